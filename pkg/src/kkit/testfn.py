"""Test functions on the strip |Re nu| <= tau plus the half-integers, the
delta-term functional, its measure form on the spectral parameter, the
local norms, and the Gaussian mollifier with its bump majorant."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

DEFAULT_TAU = 0.6
DISCRETE_REL_TOL = 1e-16
DISCRETE_PATIENCE = 5


@dataclass(frozen=True)
class TestFunction:
    """An even test function.

    `strip(nu)` evaluates k on |Re nu| <= tau (vectorized over numpy arrays
    is welcome but not required).  `discrete(b)` evaluates k((b-1)/2) for
    even b >= 4; the b = 2 point lies inside the strip and is read from
    `strip`.  `holo_width` bounds the real parts to which `strip` continues
    holomorphically without poles; contour shifts may go that far.
    """

    strip: Callable
    discrete: Callable[[int], float]
    decay: float
    tau: float = DEFAULT_TAU
    holo_width: float = DEFAULT_TAU
    name: str = "k"
    discrete_terms: int | None = None  # known number of nonzero b >= 4 terms, None = unknown
    gauss_s: float | None = None  # k(iu) real and ~ exp(-gauss_s u^2); enables the large-t route

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self) -> None:
        if not 0.5 < self.tau < 0.75:
            raise ValueError("tau must lie in (1/2, 3/4)")
        if self.decay <= 2:
            raise ValueError("decay exponent must exceed 2")

    def __call__(self, nu: complex) -> complex:
        return complex(self.strip(nu))

    def at_half_integer(self, b: int) -> complex:
        """k((b-1)/2) for even b >= 2."""
        if b < 2 or b % 2:
            raise ValueError("b must be even and >= 2")
        x = (b - 1) / 2
        if x <= self.tau:
            return complex(self.strip(complex(x)))
        return complex(self.discrete(b))

    def scaled(self, factor: complex) -> TestFunction:
        return linear_combination([(factor, self)])


def _zero(*_args):
    return 0.0


def _zero_strip(nu):
    return 0.0 * nu


# module-level callables (not lambdas) keep the special families picklable
# for the process pool


@dataclass(frozen=True)
class _GaussStrip:
    s: float

    def __call__(self, nu):
        return np.exp(-self.s * (0.25 - nu * nu))


@dataclass(frozen=True)
class _GaussDiscrete:
    s: float

    def __call__(self, b: int) -> float:
        x = (b - 1) / 2
        return math.exp(-self.s * (x * x - 0.25))


ZERO = TestFunction(_zero_strip, _zero, decay=4.0, holo_width=math.inf,
                    name="zero", discrete_terms=0)


def linear_combination(parts: Sequence[tuple[complex, TestFunction]]) -> TestFunction:
    if not parts:
        return ZERO
    tau = parts[0][1].tau
    return TestFunction(
        strip=lambda nu: sum(c * k.strip(nu) for c, k in parts),
        discrete=lambda b: sum(c * k.discrete(b) for c, k in parts),
        decay=min(k.decay for _, k in parts),
        tau=tau,
        holo_width=min(k.holo_width for _, k in parts),
        name="+".join(k.name for _, k in parts),
        discrete_terms=None if any(k.discrete_terms is None for _, k in parts)
        else max(k.discrete_terms for _, k in parts),
    )


def special_plus(s: float, tau: float = DEFAULT_TAU) -> TestFunction:
    """exp(-s(1/4 - nu^2)) on the strip, zero at half-integers beyond it."""
    if s <= 0:
        raise ValueError("s must be positive")
    return TestFunction(
        strip=_GaussStrip(s),
        discrete=_zero,
        decay=1e6,  # Gaussian decay beats every power
        tau=tau,
        holo_width=1.5,  # entire, but 1/cos(pi nu) has its next pole at 3/2
        name=f"plus(s={s:g})",
        discrete_terms=0,
        gauss_s=s,
    )


def special_minus(s: float, tau: float = DEFAULT_TAU) -> TestFunction:
    """Zero on the strip, exp(-s(nu^2 - 1/4)) at half-integers beyond it."""
    if s <= 0:
        raise ValueError("s must be positive")
    return TestFunction(
        strip=_zero_strip,
        discrete=_GaussDiscrete(s),
        decay=1e6,
        tau=tau,
        holo_width=1.5,
        name=f"minus(s={s:g})",
    )


def discrete_only(values: dict[int, float], tau: float = DEFAULT_TAU) -> TestFunction:
    """Zero on the strip; k((b-1)/2) = values[b] for the listed even b >= 4."""
    vals = dict(values)
    return TestFunction(lambda nu: 0.0 * nu, lambda b: vals.get(b, 0.0), decay=4.0, tau=tau,
                        holo_width=math.inf, name="discrete",
                        discrete_terms=max(vals, default=2) // 2)


def power_profile(a: float = 4.0, tau: float = DEFAULT_TAU) -> TestFunction:
    """k(nu) = (1 - nu^2)^(-a/2): even, equal to (1+|Im nu|^2)^(-a/2) on Re nu = 0."""
    return TestFunction(lambda nu: (1.0 - nu * nu) ** (-a / 2), _zero, decay=a, tau=tau,
                        holo_width=tau, name=f"power(a={a:g})", discrete_terms=0)


# ---------------------------------------------------------------------------
# Delta-term functional


@dataclass(frozen=True)
class EtaValue:
    total: complex
    continuous: complex
    discrete: complex
    err: float


def _discrete_sum(weight: Callable[[int], float], k: TestFunction) -> tuple[complex, int]:
    """sum over even b >= 2 of weight(b) k((b-1)/2), stopped on 5 consecutive negligible terms."""
    terms: list[complex] = []
    scale = 0.0
    small = 0
    b = 2
    limit = None if k.discrete_terms is None else 2 * k.discrete_terms + 2
    while True:
        t = weight(b) * k.at_half_integer(b)
        terms.append(t)
        scale = max(scale, abs(t))
        if limit is not None:
            if b >= limit:
                break
        elif abs(t) <= DISCRETE_REL_TOL * scale:
            small += 1
            if small >= DISCRETE_PATIENCE and b > 40:
                break
        else:
            small = 0
        if b > 10**6:
            raise ArithmeticError("discrete series did not settle within 10^6 terms")
        b += 2
    re = math.fsum(t.real for t in terms)
    im = math.fsum(t.imag for t in terms)
    return complex(re, im), len(terms)


def _quad_complex(func: Callable[[float], complex], a: float, b: float, tol: float,
                  limit: int = 400) -> tuple[complex, float]:
    re, e1 = integrate.quad(lambda x: func(x).real, a, b, epsabs=tol, epsrel=tol, limit=limit)
    im, e2 = integrate.quad(lambda x: func(x).imag, a, b, epsabs=tol, epsrel=tol, limit=limit)
    return complex(re, im), e1 + e2


def _cutoff(k: TestFunction, tol: float, T: float | None) -> tuple[float, float]:
    """Cutoff T and the tail estimate beyond it from the decay exponent."""
    probe = abs(k(complex(0.0, 1.0))) + 1e-300
    if T is None:
        T = 50.0
        # grow until the decay-based tail estimate is below tol
        while True:
            bound = _tail_estimate(k, T)
            if bound < tol or T > 1e6:
                break
            T *= 2
    return T, _tail_estimate(k, T) if probe > 0 else 0.0


def _tail_estimate(k: TestFunction, T: float) -> float:
    # |k(it)| <= C (1+t)^(-a) with C read off at T; tail of t tanh(pi t) |k| beyond T
    a = min(k.decay, 60.0)
    C = max(abs(k(complex(0.0, T))), abs(k(complex(0.0, T / 2))) * 2.0 ** (-a)) * (1 + T) ** a
    if C == 0:
        return 0.0
    return C * (1 + T) ** (2 - a) / (a - 2)


def eta(k: TestFunction, tol: float = 1e-10, T: float | None = None) -> EtaValue:
    """Continuous part: int_0^inf k(it) t tanh(pi t) dt; discrete: sum (b-1)/2 k((b-1)/2)."""
    T, tail = _cutoff(k, tol, T)
    func = lambda t: complex(k(complex(0.0, t))) * t * math.tanh(math.pi * t)
    # split where a Gaussian profile would concentrate
    pts = [0.0, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0]
    cont = 0j
    err = 0.0
    lo = 0.0
    for p in pts[1:] + [T]:
        hi = min(p, T)
        if hi <= lo:
            continue
        v, e = _quad_complex(func, lo, hi, tol / 8)
        cont += v
        err += e
        lo = hi
        if hi >= T:
            break
    disc, _ = _discrete_sum(lambda b: (b - 1) / 2, k)
    return EtaValue(cont + disc, cont, disc, err + tail)


ADISCRETE_MAX_B = 10**6


def discrete_points(limit_b: int) -> list[tuple[int, float, float]]:
    """(b, y = b/2 (1 - b/2), weight sqrt(1/4 - y) = (b-1)/2) for even b <= limit_b."""
    return [(b, (b / 2) * (1 - b / 2), (b - 1) / 2) for b in range(2, limit_b + 1, 2)]


def eta_tilde(g: Callable[[float], complex], tol: float = 1e-10, upper: float | None = None,
              breakpoints: Sequence[float] = (), discrete_b_max: int = 2000) -> EtaValue:
    """1/2 int_{1/4}^inf g(y) tanh(pi sqrt(y-1/4)) dy + sum over the discrete points of (b-1)/2 g(y_b).

    `upper` truncates the integral (g is assumed negligible beyond it).
    Substituting y = 1/4 + u^2 keeps the integrand smooth at 1/4.
    """
    if upper is None:
        upper = 1e4

    def integrand(u: float) -> complex:
        return complex(g(0.25 + u * u)) * math.tanh(math.pi * u) * u

    umax = math.sqrt(max(upper - 0.25, 0.0))
    cuts = sorted({0.0, umax, *(math.sqrt(p - 0.25) for p in breakpoints if 0.25 < p < upper)})
    cont = 0j
    err = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        v, e = _quad_complex(integrand, lo, hi, tol / 8)
        cont += v
        err += e
    # dy = 2u du, times the factor 1/2
    disc_terms = [w * complex(g(y)) for _, y, w in discrete_points(discrete_b_max)]
    disc = complex(math.fsum(t.real for t in disc_terms), math.fsum(t.imag for t in disc_terms))
    return EtaValue(cont + disc, cont, disc, err)


def eta_product(ks: Sequence[TestFunction], tol: float = 1e-10) -> complex:
    out = 1 + 0j
    for k in ks:
        out *= eta(k, tol).total
    return out


# ---------------------------------------------------------------------------
# Norms


SAMPLE_IM_MAX = 1e3


def _sup_on_line(k: TestFunction, alpha: float, b: float, a: float) -> float:
    if alpha > k.holo_width + 1e-12:
        return math.inf
    ts = np.concatenate([np.linspace(0.0, 10.0, 2001), np.geomspace(10.0, SAMPLE_IM_MAX, 2000)])
    best = 0.0
    for t in ts:
        for sgn in (1.0, -1.0):
            v = abs(k(complex(alpha, sgn * t))) * (1 + t) ** b
            if not math.isfinite(v):
                return math.inf
            best = max(best, v)
    # decay check: with exponent a the profile (1+t)^a |k| must not grow at the far end
    far = abs(k(complex(alpha, SAMPLE_IM_MAX))) * (1 + SAMPLE_IM_MAX) ** a
    mid = abs(k(complex(alpha, SAMPLE_IM_MAX / 10))) * (1 + SAMPLE_IM_MAX / 10) ** a
    if mid > 0 and far > 10 * mid:
        return math.inf
    return best


def ndiscr(k: TestFunction) -> float:
    v, _ = _discrete_sum(lambda b: (b - 1) / 2, TestFunction(
        lambda nu: abs(k.strip(nu)), lambda b: abs(k.discrete(b)), k.decay, k.tau, k.holo_width,
        k.name, k.discrete_terms))
    return v.real


@dataclass(frozen=True)
class Norms:
    n_alpha_b: float
    n_0_b: float
    ndiscr: float
    combined: float  # N_{0,b} + N_{alpha,b} + Ndiscr


def norms(k: TestFunction, alpha: float, b: float) -> Norms:
    if not 0 <= alpha <= k.tau:
        raise ValueError("alpha must lie in [0, tau]")
    if b > k.decay:
        raise ValueError("b must not exceed the decay exponent")
    na = _sup_on_line(k, alpha, b, k.decay)
    n0 = _sup_on_line(k, 0.0, b, k.decay)
    nd = ndiscr(k)
    return Norms(na, n0, nd, n0 + na + nd)


def product_norm(ks: Sequence[TestFunction], alpha: float, a: float) -> float:
    out = 1.0
    for k in ks:
        out *= norms(k, alpha, a).combined
    return out


# ---------------------------------------------------------------------------
# Mollifier and bump


@dataclass(frozen=True)
class Mollified:
    """h(lam) = sqrt(u/pi) int exp(-u y^2) k(lam - y) dy for compactly supported k."""

    target: Callable[[float], float]
    support: tuple[float, float]
    u: float
    breakpoints: tuple[float, ...] = ()

    def __call__(self, lam: float) -> float:
        lo, hi = self.support
        if hi <= lo:
            return 0.0
        # substitute x = lam - y, integrate over the support of k
        c = math.sqrt(self.u / math.pi)
        f = lambda x: math.exp(-self.u * (lam - x) ** 2) * self.target(x)
        width = 8.0 / math.sqrt(self.u)
        a, b = max(lo, lam - width), min(hi, lam + width)
        if a >= b:
            return 0.0
        pts = sorted({p for p in (*self.breakpoints, lam) if a < p < b})
        v, _ = integrate.quad(f, a, b, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-11)
        return c * v

    def of_nu(self, nu: complex) -> complex:
        """h(1/4 - nu^2) for real 1/4 - nu^2 (the form used on the spectral parameter)."""
        lam = 0.25 - nu * nu
        if abs(complex(lam).imag) > 1e-12:
            raise ValueError("of_nu is implemented for real 1/4 - nu^2 only")
        return self(complex(lam).real)


def mollify(target: Callable[[float], float], support: tuple[float, float], u: float,
            breakpoints: Sequence[float] = ()) -> Mollified:
    if u <= 0:
        raise ValueError("u must be positive")
    return Mollified(target, support, u, tuple(breakpoints))


def tent(lo: float, hi: float, height: float = 1.0) -> tuple[Callable[[float], float], tuple[float, float], tuple[float, ...]]:
    """Piecewise-linear tent on [lo, hi] peaking at the midpoint."""
    mid = (lo + hi) / 2
    half = (hi - lo) / 2

    def f(x: float) -> float:
        if x <= lo or x >= hi:
            return 0.0
        return height * (1 - abs(x - mid) / half)

    return f, (lo, hi), (lo, mid, hi)


def random_tent(rng: random.Random) -> tuple[Callable[[float], float], tuple[float, float], tuple[float, ...]]:
    lo = rng.uniform(-5, 5)
    return tent(lo, lo + rng.uniform(0.2, 4), rng.uniform(0.1, 3))


def bump(A: float) -> Callable[[float], float]:
    """b_A(lam) = ((1+lam)/(1+A))^-2 for lam >= -1/2, ((1-lam)/(1+A))^-2 below."""
    if A <= 1:
        raise ValueError("A must exceed 1")

    def b(lam: float) -> float:
        if lam >= -0.5:
            return ((1 + lam) / (1 + A)) ** -2
        return ((1 - lam) / (1 + A)) ** -2

    return b
