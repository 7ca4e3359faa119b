"""Geometric side of the sum formula: the delta term with its exact constant,
the truncated Kloosterman term for product test functions, and the
log-log dominance scan comparing the two as s -> 0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from kkit.bessel import bessel_transform_plus
from kkit.kloosterman import Envelope, KloostermanTermReport, kloosterman_term
from kkit.numberfield import FieldContext, FieldElem, Ideal
from kkit.testfn import TestFunction, eta, norms, special_minus, special_plus

ENVELOPE_SAFETY = 1.25
ENVELOPE_SAMPLES = np.geomspace(1e-8, 1e8, 161)
SPECIAL_ENVELOPE_EXPONENTS = (1.5, 1.25, 1.0, 0.8)  # both special families vanish like y^(3/2) at 0
DOMINANCE_MARGIN = 0.2
TAIL_FRACTION_LIMIT = 0.1
ANCHOR_S = 0.5


class InconclusiveScan(RuntimeError):
    """The Kloosterman tail bound is too large relative to the value."""

    def __init__(self, message: str, report: "DominanceReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Partition:
    """Disjoint places E, Q+, Q- (1-based) covering 1..d."""

    d: int
    E: frozenset[int] = frozenset()
    Qp: frozenset[int] = frozenset()
    Qm: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        sets = (self.E, self.Qp, self.Qm)
        if sum(len(x) for x in sets) != len(self.E | self.Qp | self.Qm):
            raise ValueError("E, Q+ and Q- must be disjoint")
        if self.E | self.Qp | self.Qm != frozenset(range(1, self.d + 1)):
            raise ValueError(f"E, Q+, Q- must cover 1..{self.d}")

    @property
    def Q(self) -> frozenset[int]:
        return self.Qp | self.Qm

    def kind(self, j: int) -> str:
        if j in self.E:
            return "E"
        return "+" if j in self.Qp else "-"

    @classmethod
    def parse(cls, text: str, d: int) -> Partition:
        """Parse `E=;Q+=1,2;Q-=`."""
        parts: dict[str, frozenset[int]] = {"E": frozenset(), "Q+": frozenset(), "Q-": frozenset()}
        for chunk in text.split(";"):
            if not chunk.strip():
                continue
            key, _, vals = chunk.partition("=")
            key = key.strip()
            if key not in parts:
                raise ValueError(f"unknown partition key {key!r}")
            parts[key] = frozenset(int(v) for v in vals.split(",") if v.strip())
        return cls(d, parts["E"], parts["Q+"], parts["Q-"])

    def __str__(self) -> str:
        def fmt(x: frozenset[int]) -> str:
            return ",".join(str(v) for v in sorted(x))

        return f"E={fmt(self.E)};Q+={fmt(self.Qp)};Q-={fmt(self.Qm)}"


def place_functions(partition: Partition, k_E: Mapping[int, TestFunction], s: float) -> list[TestFunction]:
    """k_j for j = 1..d: the given factors on E, the special families on Q."""
    if set(k_E) != set(partition.E):
        raise ValueError("k_E must provide exactly the places in E")
    out = []
    for j in range(1, partition.d + 1):
        kind = partition.kind(j)
        out.append(k_E[j] if kind == "E" else special_plus(s) if kind == "+" else special_minus(s))
    return out


# ---------------------------------------------------------------------------
# delta term


def _real_if_close(z: complex) -> complex | float:
    return z.real if abs(z.imag) <= 1e-12 * max(abs(z), 1e-300) else z


def delta_term(F: FieldContext, ks: Sequence[TestFunction], r: FieldElem | None = None,
               tol: float = 1e-11) -> float | complex:
    """2 pi^(-d) sqrt|D_F| prod_j eta(k_j); r does not enter."""
    if len(ks) != F.degree:
        raise ValueError("one test function per place is required")
    prod = 1 + 0j
    for k in ks:
        prod *= eta(k, tol).total
    return _real_if_close(2 * math.pi ** (-F.degree) * F.sqrt_disc * prod)


def predicted_main_term(F: FieldContext, partition: Partition, k_E: Mapping[int, TestFunction]) -> float | complex:
    """2^(1+|E|) / (2 pi)^d sqrt|D_F| eta_E(k); multiply by s^(|E|-d) for the delta asymptotics."""
    eta_E = 1 + 0j
    for j in sorted(partition.E):
        eta_E *= eta(k_E[j]).total
    e = len(partition.E)
    return _real_if_close(2 ** (1 + e) / (2 * math.pi) ** F.degree * F.sqrt_disc * eta_E)


def _slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class DeltaFit:
    predicted: float | complex
    rows: list[tuple[float, float, float, float]]  # s, delta, delta * s^(d-|E|), relative deviation
    residual_exponent: float
    expected_exponent: float


def delta_asymptotics(F: FieldContext, partition: Partition, k_E: Mapping[int, TestFunction],
                      s_grid: Sequence[float]) -> DeltaFit:
    if not partition.Q:
        raise ValueError("the delta asymptotics need at least one place in Q")
    pred = predicted_main_term(F, partition, k_E)
    power = F.degree - len(partition.E)
    rows = []
    for s in s_grid:
        delta = delta_term(F, place_functions(partition, k_E, s))
        scaled = delta * s ** power
        rows.append((s, delta, scaled, abs(scaled - pred) / abs(pred)))
    resid = [abs(r[2] - pred) for r in rows]
    c = _slope([r[0] for r in rows], resid) if all(x > 0 for x in resid) and len(rows) >= 2 else math.nan
    return DeltaFit(pred, rows, c, 0.5 if partition.Qm else 1.0)


# ---------------------------------------------------------------------------
# Kloosterman side


@dataclass(frozen=True)
class ProductTransform:
    """y -> prod_j beta_+ k_j(y_j); picklable when the k_j are."""

    ks: tuple[TestFunction, ...]

    def __call__(self, y: Sequence[float]) -> complex:
        out = 1 + 0j
        for k, yj in zip(self.ks, y):
            out *= bessel_transform_plus(k, abs(yj)).value
            if out == 0:
                break
        return out


@lru_cache(maxsize=128)
def _transform_samples(k: TestFunction) -> np.ndarray:
    return np.array([abs(bessel_transform_plus(k, y).value) for y in ENVELOPE_SAMPLES])


def transform_envelope(k: TestFunction, alpha: float) -> tuple[float, float]:
    """(p, q) with |beta_+ k(y)| <= min(p, q y^alpha) on the sample grid, times a safety factor."""
    vals = _transform_samples(k)
    p = ENVELOPE_SAFETY * float(vals.max())
    q = ENVELOPE_SAFETY * float((vals / ENVELOPE_SAMPLES ** alpha).max())
    return max(p, 1e-300), max(q, 1e-300)


def kloosterman_bound_shape(F: FieldContext, q: Ideal, r: FieldElem, partition: Partition,
                            k_E: Mapping[int, TestFunction], s: float, alpha: float, eps: float,
                            a: float = 4.0) -> tuple[float, float]:
    """(C(q,r,eps) ||k||_{alpha,a,E} s^e, e) with e = -(3/4+eps)|Q+| - (1/4+1/(8 alpha)+eps)|Q-|."""
    c_qr = q.norm ** (-0.5 + eps) * abs(float(r.norm())) ** (0.5 + eps)
    norm_E = 1.0
    for j in sorted(partition.E):
        norm_E *= float(norms(k_E[j], alpha, a).combined)
    e = -(0.75 + eps) * len(partition.Qp) - (0.25 + 1 / (8 * alpha) + eps) * len(partition.Qm)
    return c_qr * norm_E * s ** e, e


@dataclass
class KloostermanSideReport:
    s: float
    term: KloostermanTermReport
    bound: float
    bound_constant: float
    exponent: float
    envelope: Envelope

    @property
    def value(self) -> complex:
        return self.term.value

    @property
    def tail(self) -> float:
        return self.term.tail


def kloosterman_side(F: FieldContext, q: Ideal, r: FieldElem, partition: Partition,
                     k_E: Mapping[int, TestFunction], s: float, alpha: float = 0.6, eps: float = 0.1,
                     B: float = 2000, *, bound_constant: float | None = None, anchor_s: float = ANCHOR_S,
                     a: float = 4.0, threads: int = 1, ws_constant: float | None = None) -> KloostermanSideReport:
    """K_{-r,-r}(Bk) truncated at |N(c)| <= B, with tail majorant and the fixed-constant bound.

    The bound constant is fitted once at `anchor_s` (|value| + tail over the
    bound shape) unless given explicitly.
    """
    if not 0.5 < alpha <= 0.75:
        raise ValueError("alpha must lie in (1/2, tau]")
    if not 0 < eps < 1 - alpha:
        raise ValueError("eps must lie in (0, 1 - tau)")
    ks = place_functions(partition, k_E, s)
    envs = []
    for env_alpha in (SPECIAL_ENVELOPE_EXPONENTS if not partition.E else (alpha,)):
        pq = [transform_envelope(k, env_alpha) for k in ks]
        envs.append(Envelope(tuple(p for p, _ in pq), tuple(qq for _, qq in pq), env_alpha))
    term = kloosterman_term(F, q, -r, ProductTransform(tuple(ks)), envs, B, eps=eps,
                            ws_constant=ws_constant, threads=threads)
    shape, e = kloosterman_bound_shape(F, q, r, partition, k_E, s, alpha, eps, a)
    if bound_constant is None:
        if s == anchor_s:
            bound_constant = (abs(term.value) + term.tail) / shape
        else:
            anchor = kloosterman_side(F, q, r, partition, k_E, anchor_s, alpha, eps, B, anchor_s=anchor_s,
                                      a=a, threads=threads, ws_constant=ws_constant)
            bound_constant = anchor.bound_constant
    env = next(x for x in envs if x.alpha == term.constants.get("envelope_alpha", envs[0].alpha))
    return KloostermanSideReport(s, term, bound_constant * shape, bound_constant, e, env)


# ---------------------------------------------------------------------------
# dominance scan


@dataclass
class GeometricSideReport:
    s: float
    delta: float | complex
    delta_pred: float | complex
    kl_value: complex
    kl_tail: float
    kl_bound: float
    meta: dict = field(default_factory=dict)


@dataclass
class DominanceReport:
    rows: list[GeometricSideReport]
    p_delta: float
    p_k: float
    margin: float
    inconclusive: bool

    @property
    def gap(self) -> float:
        return self.p_k - self.p_delta

    @property
    def passed(self) -> bool:
        return not self.inconclusive and self.gap >= self.margin


def default_B(F: FieldContext) -> int:
    return 2000 if F.degree == 1 else 300


def geometric_rows(F: FieldContext, q: Ideal, r: FieldElem, partition: Partition, s_grid: Sequence[float],
                   k_E: Mapping[int, TestFunction] | None = None, alpha: float = 0.6, eps: float = 0.1,
                   B: float | None = None, threads: int = 1) -> list[GeometricSideReport]:
    k_E = dict(k_E or {})
    B = default_B(F) if B is None else B
    anchor = kloosterman_side(F, q, r, partition, k_E, ANCHOR_S, alpha, eps, B, threads=threads)
    pred = predicted_main_term(F, partition, k_E)
    power = len(partition.E) - F.degree
    rows = []
    for s in s_grid:
        ks = place_functions(partition, k_E, s)
        rep = anchor if s == ANCHOR_S else kloosterman_side(
            F, q, r, partition, k_E, s, alpha, eps, B, bound_constant=anchor.bound_constant, threads=threads)
        rows.append(GeometricSideReport(
            s, delta_term(F, ks), pred * s ** power, rep.value, rep.tail, rep.bound,
            {"B": B, "orbits": rep.term.orbits, "bound_constant": rep.bound_constant,
             **rep.term.constants}))
    return rows


def dominance_scan(F: FieldContext, q: Ideal, r: FieldElem, partition: Partition, s_grid: Sequence[float],
                   k_E: Mapping[int, TestFunction] | None = None, alpha: float = 0.6, eps: float = 0.1,
                   B: float | None = None, threads: int = 1, strict: bool = True) -> DominanceReport:
    """Log-log slopes of |delta| and |K| in s; K must be smaller by at least DOMINANCE_MARGIN in the exponent."""
    s_grid = list(s_grid)
    if len(s_grid) < 4 or not all(0 < s <= 0.5 for s in s_grid):
        raise ValueError("the s grid needs at least 4 points in (0, 0.5]")
    rows = geometric_rows(F, q, r, partition, s_grid, k_E, alpha, eps, B, threads)
    p_d = _slope(s_grid, [abs(x.delta) for x in rows])
    p_k = _slope(s_grid, [abs(x.kl_value) for x in rows])
    bad = any(x.kl_tail > TAIL_FRACTION_LIMIT * abs(x.kl_value) for x in rows)
    report = DominanceReport(rows, p_d, p_k, DOMINANCE_MARGIN, bad)
    if bad and strict:
        raise InconclusiveScan("Kloosterman tail bound exceeds 10% of the value on the grid", report)
    return report
