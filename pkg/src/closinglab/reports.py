"""CSV, JSON and SVG emission. Output is a pure function of its input (no timestamps)."""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import EmptyInput


def format_value(v) -> str:
    if v is None:
        return ""
    if hasattr(v, "item"):
        v = v.item()  # numpy scalar
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(v):
    if hasattr(v, "item"):
        return v.item()
    raise TypeError(f"not serializable: {type(v).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default, allow_nan=True)


def columns_for(rows: list[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def csv_text(rows: list[dict], header: dict, columns: list[str] | None = None) -> str:
    """Rows as CSV preceded by '#'-prefixed metadata lines."""
    buf = io.StringIO()
    buf.write(f"# closinglab {__version__}\n")
    for key in sorted(header):
        buf.write(f"# {key}: {dumps(header[key])}\n")
    cols = columns if columns is not None else columns_for(rows)
    extra = [c for c in columns_for(rows) if c not in cols]
    if extra:
        raise ValueError(f"rows carry columns outside the schema: {extra}")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([format_value(r.get(c)) for c in cols])
    return buf.getvalue()


def read_csv(path: str | Path) -> tuple[dict, list[dict]]:
    header, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# ") and ": " in line:
            k, v = line[2:].split(": ", 1)
            header[k] = json.loads(v)
        elif not line.startswith("#"):
            body.append(line)
    return header, list(csv.DictReader(body))


def write_csv(path: str | Path, rows: list[dict], header: dict, columns: list[str] | None = None) -> None:
    Path(path).write_text(csv_text(rows, header, columns))


def write_json(path: str | Path, rows: list[dict], header: dict, summary: dict) -> None:
    Path(path).write_text(json.dumps({"header": header, "summary": summary, "rows": rows}, sort_keys=True,
                                     indent=1, default=_json_default) + "\n")


def load_schema() -> dict:
    return json.loads(resources.files("closinglab").joinpath("csv_schema.json").read_text())


def schema_columns(kind: str) -> list[str]:
    return [c["name"] for c in load_schema()["kinds"][kind]["columns"]]


# plotting

W, H, PAD = 640, 480, 60


def _log_axis(values: list[float]) -> tuple[float, float]:
    lo, hi = math.log10(min(values)), math.log10(max(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    margin = 0.05 * (hi - lo)
    return lo - margin, hi + margin


class _Canvas:
    def __init__(self, xs: list[float], ys: list[float], title: str, xlabel: str, ylabel: str):
        self.xr, self.yr = _log_axis(xs), _log_axis(ys)
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
            f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" fill="none" stroke="black"/>',
            f'<text x="{W / 2:.1f}" y="{PAD / 2:.1f}" text-anchor="middle" font-size="16">{title}</text>',
            f'<text x="{W / 2:.1f}" y="{H - 15:.1f}" text-anchor="middle" font-size="13">{xlabel}</text>',
            f'<text x="15" y="{H / 2:.1f}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 15 {H / 2:.1f})">{ylabel}</text>',
        ]
        self._ticks()

    def px(self, x: float) -> float:
        lo, hi = self.xr
        return PAD + (math.log10(x) - lo) / (hi - lo) * (W - 2 * PAD)

    def py(self, y: float) -> float:
        lo, hi = self.yr
        return H - PAD - (math.log10(y) - lo) / (hi - lo) * (H - 2 * PAD)

    def _ticks(self):
        for k in range(math.ceil(self.xr[0]), math.floor(self.xr[1]) + 1):
            x = self.px(10.0**k)
            self.parts.append(f'<line x1="{x:.2f}" y1="{H - PAD}" x2="{x:.2f}" y2="{H - PAD + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{x:.2f}" y="{H - PAD + 18}" text-anchor="middle" font-size="11">1e{k}</text>')
        for k in range(math.ceil(self.yr[0]), math.floor(self.yr[1]) + 1):
            y = self.py(10.0**k)
            self.parts.append(f'<line x1="{PAD - 5}" y1="{y:.2f}" x2="{PAD}" y2="{y:.2f}" stroke="black"/>')
            self.parts.append(f'<text x="{PAD - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">1e{k}</text>')

    def markers(self, xs, ys, color: str, cls: str = "marker"):
        for x, y in zip(xs, ys):
            if not y > 1e-200:
                continue  # zero cannot sit on a log axis
            self.parts.append(f'<circle class="{cls}" cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="3" fill="{color}"/>')

    def line(self, xs, ys, color: str, cls: str, dash: bool = False):
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        extra = ' stroke-dasharray="6,4"' if dash else ""
        self.parts.append(f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}"{extra}/>')

    def legend(self, items: list[tuple[str, str]]):
        for k, (label, color) in enumerate(items):
            y = PAD + 18 + 16 * k
            self.parts.append(f'<rect x="{PAD + 10}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
            self.parts.append(f'<text x="{PAD + 26}" y="{y}" font-size="12">{label}</text>')

    def svg(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def emit_plot(rows: list[dict], kind: str, path: str | Path | None = None) -> str:
    """Log-log SVG: scaling of T - T' against eps, or closing bounds against delta."""
    if not rows:
        raise EmptyInput("no rows to plot")
    if kind in ("partner", "partner-scaling"):
        xs = [float(r["eps"]) for r in rows]
        ys = [float(r["length_gap"]) for r in rows]
        c = math.exp(sum(math.log(y / x**2) for x, y in zip(xs, ys)) / len(xs))
        ref = [c * x**2 for x in xs]
        cv = _Canvas(xs, ys + ref, "length gap against crossing angle", "eps", "T - T'")
        cv.line(sorted(xs), sorted(ref), "red", "reference", dash=True)
        cv.markers(xs, ys, "black")
        cv.legend([("measured T - T'", "black"), (f"{c:.4g} eps^2", "red")])
    elif kind == "closing":
        keep = [r for r in rows if float(r["delta"]) > 0]
        if not keep:
            raise EmptyInput("closing rows all have delta = 0")
        xs = [float(r["delta"]) for r in keep]
        gaps = [abs(float(r["T"]) - float(r["T_prime"])) for r in keep]
        shadows = [float(r["shadow_sup"]) for r in keep]
        bl = [float(r["bound_len"]) for r in keep]
        bs = [float(r["bound_shadow"]) for r in keep]
        cv = _Canvas(xs, [y for y in gaps + shadows + bl + bs if y > 1e-200], "closing bounds against delta",
                     "delta", "measured and bound")
        order = sorted(range(len(xs)), key=lambda k: xs[k])
        cv.line([xs[k] for k in order], [bl[k] for k in order], "red", "bound", dash=True)
        cv.line([xs[k] for k in order], [bs[k] for k in order], "blue", "bound", dash=True)
        cv.markers(xs, gaps, "red")
        cv.markers(xs, shadows, "blue")
        cv.legend([("|T - T'| and 2C delta", "red"), ("shadow sup and (5C+1) delta", "blue")])
    else:
        raise ValueError(f"no plot defined for kind {kind!r}")
    text = cv.svg()
    if path is not None:
        Path(path).write_text(text)
    return text
