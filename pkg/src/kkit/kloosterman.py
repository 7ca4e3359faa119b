"""Kloosterman sums over Q and real quadratic fields, their arithmetic
normalizing factor, unit sums, and the truncated sum of Kloosterman sums
with an explicit tail majorant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from kkit import _cache
from kkit._parallel import parallel_map
from kkit.numberfield import (
    AlgInt,
    FieldContext,
    FieldElem,
    Ideal,
    ResidueRing,
    UnitGroup,
    different_valuation,
    dual_element_check,
    elem_valuation,
    enumerate_ideal_elements,
    full_unit_group,
    kronecker,
    primes_above,
    principal,
    valuation,
)

MAX_BRUTE_NORM = 10**5
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class KloostermanValue:
    value: complex
    c: AlgInt
    r: FieldElem
    terms: int


def _check_r(r: FieldElem) -> None:
    if r.is_zero():
        raise ValueError("r must be nonzero")
    if not dual_element_check(r):
        raise ValueError(f"r={r} is not in the inverse different")


@lru_cache(maxsize=64)
def _residue_ring(I: Ideal) -> ResidueRing:
    return ResidueRing(I)


@lru_cache(maxsize=8)
def _pair_sums(I: Ideal) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of d + a (ad = 1 mod I) over the invertible residues d."""
    R = _residue_ring(I)
    us: list[int] = []
    vs: list[int] = []
    for x in R.elements():
        if not R.is_unit(x):
            continue
        inv = R.inverse(x)
        us.append(x[0] + inv[0])
        vs.append(x[1] + inv[1])
    return np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64)


@lru_cache(maxsize=1 << 16)
def kloosterman_sum(F: FieldContext, r: FieldElem, c: AlgInt) -> KloostermanValue:
    """S(r,r;c): sum over invertible d mod (c) of e(Tr(r(d+a)/c)), ad = 1 mod (c).

    Phases are reduced modulo 1 in exact integer arithmetic before the
    trigonometric call.
    """
    if c.is_zero():
        raise ValueError("c must be nonzero")
    _check_r(r)
    nc = c.norm()
    if abs(nc) > MAX_BRUTE_NORM:
        raise ValueError(f"|N(c)|={abs(nc)} beyond the brute-force range {MAX_BRUTE_NORM}")
    zu, zv = _pair_sums(principal(c))
    # Tr(r x / c) = Tr(num * conj(c) * x) / (den * N(c)), linear in x = u + v w
    z = r.num * c.conj() if F.degree == 2 else r.num
    t1 = z.trace()
    tw = (z * F.omega).trace() if F.degree == 2 else 0
    M = r.den * nc
    if M < 0:
        t1, tw, M = -t1, -tw, -M
    k = (zu * (t1 % M) + zv * (tw % M)) % M
    ang = TWO_PI * (k / M)
    value = complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang)))
    return KloostermanValue(value, c, r, int(zu.size))


def kloosterman_sum_unit_shift(F: FieldContext, r: FieldElem, c: AlgInt, n: int) -> complex:
    """S(r,r; eps_0^n c), computed as S(r m, r m; c) with m = eps_0^-n mod (c).

    Kloosterman sums are not constant on unit orbits: S(r,r;eps c) equals
    S(r/eps, r/eps; c), and only the class of eps mod (c) matters.
    """
    if F.degree == 1 or n == 0 or abs(c.norm()) == 1:
        return kloosterman_sum(F, r, c).value
    R = _residue_ring(principal(c))
    u = F.unit if n < 0 else F.unit.unit_inverse()
    m = R.pow(R.reduce(u.a, u.b), abs(n))
    return kloosterman_sum(F, r * F.elt(*m), c).value


def kloosterman_sum_value(F: FieldContext, r: FieldElem, c: AlgInt) -> complex:
    return kloosterman_sum(F, r, c).value


def _relevant_primes(F: FieldContext, r: FieldElem, c: AlgInt):
    ps = set(_cache.factorint(abs(c.norm())))
    if r.num.norm() != 0:
        ps |= set(_cache.factorint(abs(r.num.norm())))
    ps |= set(_cache.factorint(r.den))
    ps |= set(_cache.factorint(F.disc)) if F.disc > 1 else set()
    out = []
    for p in sorted(ps):
        out.extend(primes_above(F, p))
    return out


def nrr_factor(F: FieldContext, r: FieldElem, c: AlgInt) -> Fraction:
    """prod_P N(P)^min(v_P(r), v_P(c) - d_P)."""
    if c.is_zero():
        raise ValueError("c must be nonzero")
    val = Fraction(1)
    cI = principal(c)
    for P in _relevant_primes(F, r, c):
        m = min(elem_valuation(P, r), valuation(P, cI) - different_valuation(P))
        val *= Fraction(P.norm) ** m
    return val


def positive_part_norm(F: FieldContext, r: FieldElem) -> int:
    """N(R_+) where R_+ collects the primes with v_P(r) > 0; bounds N_{r,r}(c)."""
    out = 1
    for P in _relevant_primes(F, r, F.one):
        v = elem_valuation(P, r)
        if v > 0:
            out *= P.norm ** v
    return out


def weil_salie_ratio(F: FieldContext, r: FieldElem, c: AlgInt, eps: float,
                     S: complex | None = None) -> float:
    """|S(r,r;c)| / (N_{r,r}(c)^(1/2) |N(c)|^(1/2+eps))."""
    if S is None:
        S = kloosterman_sum(F, r, c).value
    if abs(S) < 1e-9:
        return 0.0
    nrr = float(nrr_factor(F, r, c))
    return abs(S) / (math.sqrt(nrr) * abs(c.norm()) ** (0.5 + eps))


# ---------------------------------------------------------------------------
# Unit sums


def _unit_exponents(F: FieldContext) -> tuple[float, float]:
    """(log eps_0^sigma1, log |eps_0^sigma2|) for the fundamental unit."""
    e1, e2 = F.unit.embed()
    return math.log(abs(e1)), math.log(abs(e2))


def unit_orbit_sum(F: FieldContext, func: Callable[[tuple[float, ...]], complex],
                   y: Sequence[float], *, absolute: bool = False,
                   rel_tol: float = 1e-16, patience: int = 5, max_terms: int = 100000,
                   envelope: Callable[[Sequence[float]], float] | None = None,
                   step: int = 1, weight: Callable[[int], complex] | None = None) -> complex:
    """Sum of func(eps*y) over all units eps (signs included).

    Real quadratic case: terms +-eps_0^(step*n) y are visited outward from
    n = 0 in both directions until `patience` consecutive terms fall below
    rel_tol times the running magnitude.  With step = 2 only the squares of
    units are visited.  A `weight(n)` multiplies the pair of terms at index
    n.  With an `envelope` (a majorant of |func|) the test is made on the
    envelope before func is called, so terms that cannot matter are never
    evaluated.
    """
    g = (lambda v: abs(func(v))) if absolute else func
    if F.degree == 1:
        return g((y[0],)) + g((-y[0],))
    l1, l2 = _unit_exponents(F)
    e1, e2 = F.unit.embed()
    sgn1 = 1.0 if e1 > 0 else -1.0
    sgn2 = 1.0 if e2 > 0 else -1.0
    parts: list[complex] = []

    def point(n: int) -> tuple[float, float]:
        k = n * step
        return (y[0] * math.exp(k * l1) * sgn1 ** (k % 2), y[1] * math.exp(k * l2) * sgn2 ** (k % 2))

    def term(v: tuple[float, float], n: int) -> complex:
        t = g(v) + g((-v[0], -v[1]))
        return t * weight(n) if weight is not None else t

    v0 = point(0)
    t0 = term(v0, 0)
    parts.append(t0)
    scale = 2 * envelope(v0) if envelope is not None else abs(t0)
    for direction in (1, -1):
        small = 0
        n = direction
        peaked = False
        while abs(n) < max_terms:
            v = point(n)
            if envelope is not None:
                mag = 2 * envelope(v)
                if mag > rel_tol * scale:
                    parts.append(term(v, n))
            else:
                t = term(v, n)
                parts.append(t)
                mag = abs(t)
            scale = max(scale, mag)
            if mag <= rel_tol * scale:
                small += 1
                if small >= patience and (peaked or scale == 0.0 or abs(n) > 200):
                    break
            else:
                small = 0
                peaked = True
            n += direction
    re = math.fsum(complex(p).real for p in parts)
    im = math.fsum(complex(p).imag for p in parts)
    return complex(re, im)


def unit_sum_constant(F: FieldContext, a: float, b: float) -> float:
    """Constant C with sum_eps |f(eps y)| <= C * min(...) * (1 + |log term|^(d-1))."""
    if a + b <= 0:
        raise ValueError("unit sum diverges for a + b <= 0")
    if F.degree == 1:
        return 2.0
    L = _unit_exponents(F)[0]
    return 2.0 * max(1.0 / L, 1.0 + 2.0 / (1.0 - math.exp(-(a + b) * L)))


def unit_sum_bound(F: FieldContext, p: Sequence[float], q: Sequence[float], a: float, b: float,
                   y: Sequence[float]) -> float:
    if a + b <= 0:
        raise ValueError("unit sum diverges for a + b <= 0")
    Np = math.prod(p)
    Nq = math.prod(q)
    Ny = abs(math.prod(y))
    main = min(Np * Ny ** a, Nq * Ny ** (-b))
    lg = abs(math.log(Ny) + math.log(Np / Nq) / (a + b))
    return unit_sum_constant(F, a, b) * main * (1.0 + lg ** (F.degree - 1))


def unit_sum(F: FieldContext, f: Callable[[tuple[float, ...]], complex], p: Sequence[float],
             q: Sequence[float], a: float, b: float, y: Sequence[float]) -> tuple[float, float]:
    """(sum over units of |f(eps y)|, the unit-sum bound with explicit constant)."""
    if a + b <= 0:
        raise ValueError("unit sum diverges for a + b <= 0")
    if any(v <= 0 for v in p) or any(v <= 0 for v in q):
        raise ValueError("p_j and q_j must be positive")
    numeric = unit_orbit_sum(F, f, y, absolute=True).real
    return numeric, unit_sum_bound(F, p, q, a, b, y)


# ---------------------------------------------------------------------------
# Sum of Kloosterman sums


@dataclass(frozen=True)
class Envelope:
    """|f(y)| <= prod_j min(p_j, q_j |y_j|^alpha)."""

    p: tuple[float, ...]
    q: tuple[float, ...]
    alpha: float

    def __call__(self, y: Sequence[float]) -> float:
        return math.prod(min(pj, qj * abs(yj) ** self.alpha) for pj, qj, yj in zip(self.p, self.q, y))


@dataclass
class KloostermanTermReport:
    value: complex
    bound_B: float
    tail: float
    partial_sums: list[tuple[int, complex]] = field(default_factory=list)
    orbits: int = 0
    constants: dict = field(default_factory=dict)


def divisor_constant(delta: float) -> float:
    """sup_n tau(n) / n^delta, computed exactly from the prime-by-prime maxima."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    out = 1.0
    for p in _cache.primes_up_to(int(2 ** (1 / delta)) + 2):
        best = 1.0
        k = 1
        while True:
            val = (k + 1) / p ** (delta * k)
            if val < best and k > 1:
                break
            best = max(best, val)
            k += 1
        out *= best
    return out


@lru_cache(maxsize=16)
def ideal_counts(F: FieldContext, bound: int) -> tuple[int, ...]:
    """a(n) = number of integral ideals of norm n for n <= bound (index 0 unused).

    a(n) = sum_{m | n} chi(m) with chi the Kronecker character of the
    discriminant, which is periodic modulo it.
    """
    if F.degree == 1:
        return (0,) + (1,) * bound
    D = F.disc
    chi = [0] * D
    for m in range(1, D):
        v = 1
        for p, e in _cache.factorint(m).items():
            v *= kronecker(D, p) ** e
        chi[m] = v
    a = np.zeros(bound + 1, dtype=np.int64)
    for m in range(1, bound + 1):
        c = chi[m % D]
        if c:
            a[m::m] += c
    return tuple(int(x) for x in a)


def tail_majorant(F: FieldContext, B: float, *, A: float, p_exp: float, kappa: float,
                  q_norm: int = 1, divisor_exp: float = 0.3, exact_upto: int | None = None) -> float:
    """Upper bound for sum over n > B of A a_q(n) n^(-p) (1 + |log n + kappa|)^(d-1).

    a_q(n) counts integral ideals of norm n divisible by q, so it also
    bounds the number of unit orbits of c in q with |N(c)| = n.  For d = 2
    the counts are exact up to `exact_upto`; beyond it a_q(n) <= tau(n) <=
    C n^delta with the exact divisor constant.  Over Q, a_q(n) <= 1.
    """
    if p_exp <= 1:
        return math.inf
    d = F.degree
    m = math.floor(B) + 1
    if d == 1:
        return A * (m ** (-p_exp) + m ** (1 - p_exp) / (p_exp - 1))
    if exact_upto is None:
        exact_upto = int(min(max(200 * m, 10**5), 4 * 10**6))
    head = 0.0
    if exact_upto >= m:
        counts = np.asarray(ideal_counts(F, exact_upto // q_norm), dtype=float)
        n = np.arange(m, exact_upto + 1)
        n = n[n % q_norm == 0]
        if n.size:
            an = counts[n // q_norm]
            nf = n.astype(float)
            head = math.fsum(an * nf ** (-p_exp) * (1 + np.abs(np.log(nf) + kappa)))
        m = exact_upto + 1
    # analytic remainder with a(n) <= C n^delta
    p = p_exp - divisor_exp
    if p <= 1:
        return math.inf
    K = 1.0 + abs(kappa)
    # g(x) = x^-p (K + log x) is decreasing once p (K + log x) >= 1
    start = max(m, math.ceil(math.exp(max(0.0, 1.0 / p - K))))
    rest = sum(n ** (-p) * (K + math.log(n)) for n in range(m, start))
    g_start = start ** (-p) * (K + math.log(start))
    integral = start ** (1 - p) / (p - 1) * (K + math.log(start) + 1.0 / (p - 1))
    return A * (head + divisor_constant(divisor_exp) * (rest + g_start + integral))


def _orbit_term(args) -> tuple[int, float, float, float]:
    """Contribution of the unit orbit of c: sum over eps of S(r,r;eps c) f(r^2/(eps c)^2) / |N(c)|.

    Also returns the largest |S| met along the orbit.
    """
    F, r, c, f, section_shift, env = args
    nc = abs(c.norm())
    if F.degree == 1:
        y = ((r.embed()[0] / c.embed()[0]) ** 2,)
        S = kloosterman_sum(F, r, c).value
        val = S * 2.0 * complex(f(y)) / nc
        return nc, val.real, val.imag, abs(S)
    shift = 2 * section_shift
    rep = c * (F.unit ** shift) if shift >= 0 else c * (F.unit.unit_inverse() ** (-shift))
    y = tuple((rj / cj) ** 2 for rj, cj in zip(r.embed(), rep.embed()))
    seen = [abs(kloosterman_sum(F, r, c).value)]

    def weight(n: int) -> complex:
        S = kloosterman_sum_unit_shift(F, r, c, n + shift)
        seen.append(abs(S))
        return S

    # the orbit of rep is +-eps_0^n rep, giving y * eps_0^(-2n); both signs share S
    inner = unit_orbit_sum(F, lambda v: complex(f(tuple(abs(t) for t in v))), y, envelope=env,
                           step=-2, weight=weight)
    val = inner / nc
    return nc, val.real, val.imag, max(seen)


def kloosterman_tail(F: FieldContext, q: Ideal, r: FieldElem, envelope: Envelope, B: float, *,
                     eps: float, ws_constant: float, divisor_exp: float = 0.3) -> tuple[float, dict]:
    """Majorant for the part of K_{r,r}(f) with |N(c)| > B, and the constants used."""
    d = F.degree
    b = 2.0 * envelope.alpha
    csu = unit_sum_constant(F, 0.0, b)
    Nr = abs(float(r.norm()))
    Np, Nq = math.prod(envelope.p), math.prod(envelope.q)
    dexp = divisor_exp if d == 2 else 0.0
    A = ws_constant * math.sqrt(positive_part_norm(F, r)) * csu * Nq * Nr ** b
    p_exp = b + 0.5 - eps
    kappa = -math.log(Nr) + math.log(Np / Nq) / b
    tail = tail_majorant(F, B, A=A, p_exp=p_exp, kappa=kappa, q_norm=q.norm, divisor_exp=divisor_exp)
    consts = {"ws_constant": ws_constant, "unit_sum_constant": csu,
              "divisor_constant": divisor_constant(divisor_exp) if d == 2 else 1.0,
              "divisor_exponent": dexp, "decay_exponent": p_exp, "envelope_alpha": envelope.alpha}
    return tail, consts


def kloosterman_term(F: FieldContext, q: Ideal, r: FieldElem,
                     f: Callable[[tuple[float, ...]], complex] | None,
                     envelope: Envelope | Sequence[Envelope],
                     B: float, *, eps: float = 0.1, ws_constant: float | None = None,
                     divisor_exp: float = 0.3, section_shift: int = 0, threads: int = 1,
                     probe: bool = True) -> KloostermanTermReport:
    """Truncated K_{r,r}(f) = sum_{c in q, c != 0} S(r,r;c)/|N(c)| f(r^2/c^2).

    Orbits under the full unit group are enumerated up to |N(c)| <= B; each
    orbit carries its inner unit sum.  The tail over |N(c)| > B is bounded by
    the Weil-Salie-type estimate, the explicit unit-sum constant, ideal
    counts and the envelope of f.  Several envelopes may be passed (all
    must majorize |f|); the one giving the smallest tail is used.
    """
    _check_r(r)
    envs = [envelope] if isinstance(envelope, Envelope) else list(envelope)
    if not envs:
        raise ValueError("at least one envelope is required")
    if any(e.alpha <= 0.25 for e in envs):
        raise ValueError("the envelope exponent must exceed 1/4")
    if B < q.norm:
        raise ValueError("B must be at least N(q)")
    d = F.degree
    if f is None:
        return KloostermanTermReport(0j, B, 0.0, [], 0, {})
    if probe:
        for env in envs:
            for y0 in (1e-6, 1e-3, 0.05, 1.0, 30.0):
                yy = tuple(y0 * (1.0 + 0.37 * j) for j in range(d))
                if abs(f(yy)) > env(yy) * (1 + 1e-9) + 1e-300:
                    raise ValueError(f"envelope violated at y={yy}: |f|={abs(f(yy)):.3e} > {env(yy):.3e}")
    reps = enumerate_ideal_elements(q, B, "units", full_unit_group(F))
    # the inner sums stop on the envelope, so its choice does not depend on the tail
    env_first = envs[0]
    terms = parallel_map(_orbit_term, [(F, r, c, f, section_shift, env_first) for c in reps], threads)
    if ws_constant is None:
        # S varies along a unit orbit; every value met by the orbit sums enters the ratio
        ws_constant = 1.0
        for c, t in zip(reps, terms):
            nrr = float(nrr_factor(F, r, c))
            ratio = t[3] / (math.sqrt(nrr) * abs(c.norm()) ** (0.5 + eps)) if t[3] >= 1e-9 else 0.0
            ws_constant = max(ws_constant, 1.25 * ratio)
    tails = [kloosterman_tail(F, q, r, e, B, eps=eps, ws_constant=ws_constant, divisor_exp=divisor_exp)
             for e in envs]
    best = min(range(len(envs)), key=lambda i: tails[i][0])
    tail, consts = tails[best]
    by_norm: dict[int, tuple[list[float], list[float]]] = {}
    for n, re, im, _ in terms:
        lst = by_norm.setdefault(n, ([], []))
        lst[0].append(re)
        lst[1].append(im)
    partial = []
    all_re: list[float] = []
    all_im: list[float] = []
    for n in sorted(by_norm):
        all_re.extend(by_norm[n][0])
        all_im.extend(by_norm[n][1])
        partial.append((n, complex(math.fsum(all_re), math.fsum(all_im))))
    value = complex(math.fsum(all_re), math.fsum(all_im))
    return KloostermanTermReport(value, B, tail, partial, len(reps), consts)


def kloosterman_scan_rows(F: FieldContext, q: Ideal, r: FieldElem, B: float, eps: float = 0.1,
                          threads: int = 1) -> list[tuple]:
    """Rows (c, N(c), S, N_rr, ratio) for unit-orbit representatives c in q."""
    reps = enumerate_ideal_elements(q, B, "units", full_unit_group(F))
    vals = parallel_map(_scan_one, [(F, r, c, eps) for c in reps], threads)
    return [(c, c.norm(), S, nrr, ratio) for c, (S, nrr, ratio) in zip(reps, vals)]


def _scan_one(args):
    F, r, c, eps = args
    S = kloosterman_sum(F, r, c).value
    nrr = nrr_factor(F, r, c)
    return S, nrr, weil_salie_ratio(F, r, c, eps, S=S)


def max_weil_salie_ratio(F: FieldContext, q: Ideal, r: FieldElem, B: float, eps: float = 0.1,
                         threads: int = 1) -> float:
    rows = kloosterman_scan_rows(F, q, r, B, eps, threads)
    return max((row[4] for row in rows), default=0.0)
