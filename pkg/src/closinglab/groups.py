"""Generator sets, reduced words, conjugacy classes and self-crossings of word geodesics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hyp2
from .errors import BudgetExceeded, DomainError, NotDiscrete, NotHyperbolic

MAX_ENUM_LENGTH = 12
MAX_CROSSING_CUT = 10
START = hyp2.UnitTangent(1j, hyp2.HALF_PI)


@dataclass(frozen=True)
class Word:
    """Letters are +-k for generator k (1-based); negative means inverse."""

    letters: tuple[int, ...]

    def __post_init__(self):
        if any(x == 0 for x in self.letters):
            raise DomainError("letter 0 is not a generator")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def reduced(self) -> bool:
        return all(x != -y for x, y in zip(self.letters, self.letters[1:]))

    @property
    def cyclically_reduced(self) -> bool:
        return self.reduced and (len(self) < 2 or self.letters[0] != -self.letters[-1])

    def cyclic_core(self) -> "Word":
        """Strip letters that cancel cyclically; the result is conjugate to this word."""
        x = Word(()) * self
        lo, hi = 0, len(x.letters)
        while hi - lo > 1 and x.letters[lo] == -x.letters[hi - 1]:
            lo, hi = lo + 1, hi - 1
        return Word(x.letters[lo:hi])

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def __mul__(self, other: "Word") -> "Word":
        out: list[int] = list(self.letters)
        for x in other.letters:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return Word(tuple(out))

    def rotations(self):
        n = len(self.letters)
        for k in range(n):
            yield self.letters[k:] + self.letters[:k]

    def canonical(self, unoriented: bool = False) -> tuple[int, ...]:
        cands = list(self.rotations())
        if unoriented:
            cands += list(self.inverse().rotations())
        return min(cands, key=_sort_key) if cands else ()

    def render(self) -> str:
        return "".join(_letter_name(x) for x in self.letters) or "1"

    @classmethod
    def parse(cls, text: str) -> "Word":
        out = []
        for ch in text.strip():
            if not ch.isalpha():
                raise DomainError(f"bad letter {ch!r}")
            k = ord(ch.lower()) - ord("a") + 1
            out.append(k if ch.islower() else -k)
        return cls(tuple(out))


def _letter_name(x: int) -> str:
    ch = chr(ord("a") + abs(x) - 1)
    return ch if x > 0 else ch.upper()


def _sort_key(letters: tuple[int, ...]):
    # a < A < b < B ...
    return tuple(2 * abs(x) + (x < 0) for x in letters)


@dataclass
class GeneratorSet:
    generators: list[hyp2.Isometry]
    names: list[str] = field(default_factory=list)
    kappa: float = 1.0
    certificate: bool | None = None
    relator: Word | None = None

    def __post_init__(self):
        if not self.names:
            self.names = [_letter_name(k + 1) for k in range(len(self.generators))]
        for name, g in zip(self.names, self.generators):
            if hyp2.classify(g) != "hyperbolic":
                raise NotHyperbolic(f"generator {name} is not hyperbolic")

    def letter(self, x: int) -> hyp2.Isometry:
        g = self.generators[abs(x) - 1]
        return g if x > 0 else g.inverse()

    def evaluate(self, word: Word) -> hyp2.Isometry:
        m = np.eye(2)
        for x in word.letters:
            m = m @ self.letter(x).matrix
        # a product of unimodular matrices; its determinant cannot be recomputed reliably
        return hyp2.Isometry.unimodular(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def length(self, word: Word) -> float:
        # translation length is a class function, so drop the conjugating letters first
        return hyp2.translation_length(self.evaluate(word.cyclic_core()), self.kappa)

    def to_json(self) -> str:
        data = {
            "kappa": self.kappa,
            "generators": [{"name": n, "matrix": [[g.a, g.b], [g.c, g.d]]}
                           for n, g in zip(self.names, self.generators)],
        }
        if self.relator is not None:
            data["relator"] = self.relator.render()
        return json.dumps(data, indent=2, sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSet":
        data = json.loads(text)
        names, gens = [], []
        for item in data["generators"]:
            m = np.asarray(item["matrix"], dtype=float)
            if m.shape != (2, 2):
                raise DomainError(f"generator {item.get('name')} is not a 2x2 matrix")
            det = float(np.linalg.det(m))
            if not det > 0:
                raise DomainError(f"generator {item.get('name')} has non-positive determinant")
            names.append(str(item["name"]))
            gens.append(hyp2.Isometry.from_matrix(m / math.sqrt(det)))
        relator = Word.parse(data["relator"]) if data.get("relator") else None
        gs = cls(gens, names, float(data.get("kappa", 1.0)), relator=relator)
        gs.certificate = ping_pong_certificate(gs)
        return gs

    @classmethod
    def load(cls, path: str | Path) -> "GeneratorSet":
        return cls.from_json(Path(path).read_text())


def isometric_discs(g: hyp2.Isometry) -> list[tuple[float, float]]:
    """(centre, radius) of the isometric circles of g and of its inverse."""
    if abs(g.c) < 1e-14:
        raise DomainError("isometric circles need a nonzero lower-left entry")
    r = 1.0 / abs(g.c)
    return [(-g.d / g.c, r), (g.a / g.c, r)]


def ping_pong_certificate(gs: GeneratorSet) -> bool:
    """True when all isometric discs are pairwise disjoint, which makes the group free and discrete."""
    try:
        discs = [d for g in gs.generators for d in isometric_discs(g)]
    except DomainError:
        return False
    for i in range(len(discs)):
        for j in range(i + 1, len(discs)):
            (c1, r1), (c2, r2) = discs[i], discs[j]
            if abs(c1 - c2) <= r1 + r2:
                return False
    return True


def schottky_generators(separation: float, strength: float, kappa: float = 1.0, strict: bool = False,
                        flip: bool = False) -> GeneratorSet:
    """Two translations of length ``strength`` along nested axes a distance ``separation`` apart.

    With the default orientation a.b is the figure-eight class and a.B is simple.
    """
    if not strength > 1e-9:
        raise NotHyperbolic("strength must be positive for hyperbolic generators")
    if not separation > 0:
        raise DomainError("separation must be positive")
    half = 0.5 * kappa * strength
    a = hyp2.Isometry(math.cosh(half), math.sinh(half), math.sinh(half), math.cosh(half))
    lam = math.exp(0.5 * kappa * separation)
    b = a.conjugate_by(hyp2.Isometry(lam, 0.0, 0.0, 1.0 / lam))
    if flip:
        b = b.inverse()
    gs = GeneratorSet([a, b], ["a", "b"], kappa)
    gs.certificate = ping_pong_certificate(gs)
    if strict and not gs.certificate:
        raise NotDiscrete("isometric discs overlap; ping-pong certificate failed")
    return gs


def genus2_generators(kappa: float = 1.0) -> GeneratorSet:
    """Side pairings of the regular octagon with angles pi/4, satisfying [a,b][c,d] = 1."""
    h = math.acosh(1.0 + math.sqrt(2.0)) / kappa

    def midpoint(k: int) -> hyp2.UnitTangent:
        return hyp2.geodesic_flow(hyp2.UnitTangent(1j, hyp2.HALF_PI + k * math.pi / 4), h, kappa)

    def pairing(src: int, dst: int) -> hyp2.Isometry:
        return hyp2.isometry_from_frames(midpoint(src).rotated(math.pi), midpoint(dst))

    gens = [pairing(2, 0), pairing(3, 1).inverse(), pairing(6, 4), pairing(7, 5).inverse()]
    gs = GeneratorSet(gens, ["a", "b", "c", "d"], kappa, certificate=False, relator=Word.parse("abABcdCD"))
    return gs


def relator_residual(gs: GeneratorSet) -> float:
    if gs.relator is None:
        raise DomainError("generator set has no relator")
    m = gs.evaluate(gs.relator).matrix
    return float(min(np.max(np.abs(m - np.eye(2))), np.max(np.abs(m + np.eye(2)))))


def reduced_words(n_gens: int, max_len: int, min_len: int = 1):
    """All freely reduced words with lengths in [min_len, max_len], shortest first."""
    alphabet = [k for g in range(1, n_gens + 1) for k in (g, -g)]
    level: list[tuple[int, ...]] = [()]
    for n in range(1, max_len + 1):
        level = [w + (x,) for w in level for x in alphabet if not w or w[-1] != -x]
        if n >= min_len:
            yield from level


def enumerate_conjugacy(gs: GeneratorSet, L: int, unoriented: bool = False) -> list[tuple[Word, float]]:
    """One cyclically reduced representative per class up to word length L, sorted by translation length."""
    if L > MAX_ENUM_LENGTH:
        raise BudgetExceeded(f"word length {L} exceeds the budget of {MAX_ENUM_LENGTH}")
    if L < 1:
        return []
    seen: set[tuple[int, ...]] = set()
    out = []
    for letters in reduced_words(len(gs.generators), L):
        w = Word(letters)
        if not w.cyclically_reduced:
            continue
        key = w.canonical(unoriented)
        if key in seen:
            continue
        seen.add(key)
        rep = Word(key)
        out.append((rep, gs.length(rep)))
    # rounding keeps equal lengths from being ordered by float noise
    out.sort(key=lambda item: (round(item[1], 9), len(item[0]), _sort_key(item[0].letters)))
    return out


def injectivity_lower_bound(gs: GeneratorSet, L: int) -> float:
    """Half the shortest translation length among classes of word length <= L (a proxy, not a proof)."""
    if not gs.certificate:
        raise NotDiscrete("no discreteness certificate for this generator set")
    classes = enumerate_conjugacy(gs, L)
    return 0.5 * classes[0][1]


def _power(g: hyp2.Isometry, n: int) -> hyp2.Isometry:
    return g.power(n) if n >= 0 else g.inverse().power(-n)


def _wrapped_close(a: float, b: float, period: float, tol: float) -> bool:
    d = abs(a - b) % period
    return min(d, period - d) < tol


@dataclass
class Crossing:
    T1: float
    eps: float
    t_first: float
    t_second: float
    period: float
    point: complex
    eta: Word
    g1: hyp2.Isometry = field(repr=False)  # in the frame with the crossing at i
    frame: hyp2.Isometry = field(repr=False)

    @property
    def T2(self) -> float:
        return self.period - self.T1


def detect_crossings(word: Word, gs: GeneratorSet, L_cut: int, kappa: float | None = None,
                     dedup_tol: float = 1e-5) -> list[Crossing]:
    """Transverse self-intersections of the closed geodesic of ``word``, found among translates eta.axis
    with eta of word length <= L_cut. Completeness beyond the cutoff is not claimed."""
    if L_cut > MAX_CROSSING_CUT:
        raise BudgetExceeded(f"L_cut {L_cut} exceeds the budget of {MAX_CROSSING_CUT}")
    kappa = gs.kappa if kappa is None else kappa
    g = gs.evaluate(word)
    T = hyp2.translation_length(g, kappa)
    line = hyp2.axis(g, kappa)
    xm, xp = line.endpoints
    g_n = hyp2.Isometry(math.exp(0.5 * kappa * T), 0.0, 0.0, math.exp(-0.5 * kappa * T))
    found: list[Crossing] = []
    keys: list[tuple[float, float]] = []
    for letters in reduced_words(len(gs.generators), L_cut):
        eta = gs.evaluate(Word(letters))
        ym, yp = eta.apply_boundary(xm), eta.apply_boundary(xp)
        # in the frame where the axis is the imaginary axis, the translate is a semicircle over (u1, u2)
        f = line.frame.inverse()
        u1, u2 = f.apply_boundary(ym), f.apply_boundary(yp)
        if not (math.isfinite(u1) and math.isfinite(u2)) or min(abs(u1), abs(u2)) < 1e-9 * max(1.0, abs(u1), abs(u2)):
            continue  # the translate shares an endpoint with the axis
        if u1 * u2 >= 0:
            continue  # no sign change means the endpoint pairs do not separate
        z = complex(0.0, math.sqrt(-u1 * u2))
        x = line.frame.apply(z)
        t_x = math.log(z.imag) / kappa
        t_y = line.foot_parameter(eta.inverse().apply(x))
        key = (min(t_x % T, t_y % T), max(t_x % T, t_y % T))
        if any(_wrapped_close(key[0], k0, T, dedup_tol) and _wrapped_close(key[1], k1, T, dedup_tol)
               for k0, k1 in keys):
            continue
        keys.append(key)
        # work in the frame with the crossing at i and the axis pointing up; entries stay moderate there
        frame = hyp2.frame(line.tangent(t_x))
        eta_n = frame.inverse() @ eta @ frame
        s_y = math.log(abs(eta_n.inverse().apply(1j))) / kappa
        T1 = s_y % T
        eta_n = eta_n @ _power(g_n, round((s_y - T1) / T))
        # the lift is back over the crossing at time T1, where eta_n^-1 carries i
        g1 = eta_n.inverse()
        there = g1.apply_tangent(START).direction
        eps = hyp2.angle_between(hyp2.HALF_PI, there + math.pi)
        found.append(Crossing(T1, eps, t_x % T, t_y % T, T, line.point(t_x), Word(letters), g1, frame))
    found.sort(key=lambda c: (c.t_first, c.T1))
    return found


def crossing_geometry(c: Crossing, kappa: float = 1.0):
    """Crossed-geodesic record for a detected crossing, in the frame with the crossing at i."""
    from .orbits import CrossedGeodesic

    g = hyp2.Isometry(math.exp(0.5 * kappa * c.period), 0.0, 0.0, math.exp(-0.5 * kappa * c.period))
    g2 = g @ c.g1.inverse()
    mode = "partner" if c.eps <= 0.5 * math.pi else "pseudo"
    eps = c.eps if mode == "partner" else math.pi - c.eps
    return CrossedGeodesic(kappa, START, c.T1, c.T2, eps, mode, c.g1, g, g2)
