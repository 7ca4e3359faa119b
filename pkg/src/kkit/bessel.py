"""J-Bessel functions of complex order and the Bessel transform beta_+.

Evaluation routes for J_w(t):
  * power series in complex double precision, redone in mpmath when the
    ratio (largest term / |sum|) signals cancellation;
  * Mellin-Barnes loop integral around the poles of Gamma(w/2 + z);
  * Hankel's large-argument expansion, used when its smallest term is tiny;
  * Miller's backward recurrence for all integer orders at once.

Most callers want J_{2 nu}(t) / cos(pi nu) for nu far up the imaginary
direction, where both factors overflow; the `logscale` argument divides by
exp(logscale) inside the exponent so that the ratio stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np
from scipy.special import loggamma

from kkit.testfn import TestFunction

SERIES_CANCEL_LIMIT = 1e5  # above this ratio (about 1e-11 relative loss) the series is redone in mpmath
HANKEL_TOL = 1e-16
HANKEL_MAX_TERMS = 400
T_MAX = 1e16  # internal cap; the public bessel_j envelope stays at 1e4


@dataclass(frozen=True)
class BesselEval:
    w: complex
    t: float
    value: complex
    method: str


def _logcos(z: np.ndarray) -> np.ndarray:
    """log cos z without overflow for large |Im z| (any branch; only exp() of it is used)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    up = z.imag >= 0
    zu = z[up]
    out[up] = -1j * zu + np.log1p(np.exp(2j * zu)) - math.log(2.0)
    zd = z[~up]
    out[~up] = 1j * zd + np.log1p(np.exp(-2j * zd)) - math.log(2.0)
    return out


def _logsin(z: np.ndarray) -> np.ndarray:
    return _logcos(np.asarray(z, dtype=complex) - math.pi / 2)


def _is_neg_int(w: complex) -> bool:
    return w.imag == 0 and w.real < 0 and float(w.real).is_integer()


# ---------------------------------------------------------------------------
# power series


def _series_scaled(w: np.ndarray, t: float, logscale: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Series for J_w(t) exp(-logscale); also the cancellation ratio per element."""
    x = -(t * t) / 4.0
    term = np.exp(w * math.log(t / 2.0) - loggamma(w + 1.0) - logscale)
    total = term.copy()
    biggest = np.abs(term)
    n = 0
    nmin = int(t / 2) + 2
    while True:
        n += 1
        term = term * x / (n * (w + n))
        total += term
        mag = np.abs(term)
        biggest = np.maximum(biggest, mag)
        if n > nmin and np.all(mag <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
        if n > 10000:
            raise ArithmeticError("power series failed to converge")
    cancel = biggest / np.maximum(np.abs(total), 1e-300)
    return total, cancel


def _series_mp(w: complex, t: float, logscale: complex, cancel: float) -> complex:
    # the largest series term is at most about exp(t) times |J|
    extra = int(max(math.log10(max(cancel, 1.0)), t / math.log(10))) + 25
    with mpmath.workdps(extra):
        wm = mpmath.mpc(w)
        x = -(mpmath.mpf(t) ** 2) / 4
        term = mpmath.exp(wm * mpmath.log(mpmath.mpf(t) / 2) - mpmath.loggamma(wm + 1) - mpmath.mpc(logscale))
        total = term
        n = 0
        eps = mpmath.mpf(10) ** (-(extra + 2))
        while True:
            n += 1
            term = term * x / (n * (wm + n))
            total += term
            if n > t / 2 + 2 and abs(term) <= eps * abs(total):
                break
        return complex(total)


# ---------------------------------------------------------------------------
# Hankel expansion


def _hankel_scaled(w: np.ndarray, t: float, logscale: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Large-argument expansion; returns (values, converged mask)."""
    mu = 4.0 * w * w
    a = np.ones_like(w)
    P = np.ones_like(w)
    Q = np.zeros_like(w)
    prev = np.full(w.shape, np.inf)
    done = np.zeros(w.shape, dtype=bool)
    ok = np.zeros(w.shape, dtype=bool)
    for k in range(1, HANKEL_MAX_TERMS):
        a = a * (mu - (2 * k - 1) ** 2) / (8.0 * k * t)
        mag = np.abs(a)
        live = ~done
        grow = live & (mag > prev) & (k > 2)
        done |= grow  # minimal term passed without convergence
        live = ~done
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            P = np.where(live, P + sign * a, P)
        else:
            Q = np.where(live, Q + sign * a, Q)
        conv = live & (mag < HANKEL_TOL)
        ok |= conv
        done |= conv
        prev = np.where(live, mag, prev)
        if np.all(done):
            break
    chi = t - (w / 2.0 + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * t))
    val = amp * (P * np.exp(_logcos(chi) - logscale) - Q * np.exp(_logsin(chi) - logscale))
    return val, ok


# ---------------------------------------------------------------------------
# public evaluators


def bessel_j_scaled(w: Sequence[complex] | np.ndarray, t: float,
                    logscale: Sequence[complex] | np.ndarray | None = None,
                    methods: list[str] | None = None) -> np.ndarray:
    """J_w(t) exp(-logscale) for an array of orders at one argument t > 0."""
    if not 0 < t <= T_MAX:
        raise ValueError(f"argument t={t} outside (0, {T_MAX}]")
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    ls = np.zeros_like(w) if logscale is None else np.atleast_1d(np.asarray(logscale, dtype=complex))
    out = np.empty_like(w)
    tag = np.array(["series"] * w.size, dtype=object)
    # negative integer orders: J_{-m} = (-1)^m J_m
    negint = np.array([_is_neg_int(x) for x in w])
    weff = np.where(negint, -w, w)
    hv, ok = _hankel_scaled(weff, t, ls)
    out[ok] = hv[ok]
    tag[ok] = "large-argument"
    rest = ~ok
    if np.any(rest):
        sv, cancel = _series_scaled(weff[rest], t, ls[rest])
        idx = np.nonzero(rest)[0]
        for j, i in enumerate(idx):
            if cancel[j] > SERIES_CANCEL_LIMIT:
                sv[j] = _series_mp(complex(weff[i]), t, complex(ls[i]), float(cancel[j]))
                tag[i] = "series-mp"
        out[rest] = sv
    sgn = np.where(negint & (np.abs(w.real) % 2 == 1), -1.0, 1.0)
    out = out * sgn
    realw = (w.imag == 0) & np.all(np.imag(ls) == 0)
    out[realw] = out[realw].real
    if methods is not None:
        methods.extend(tag.tolist())
    return out


def bessel_j(w: complex, t: float, method: str = "auto") -> BesselEval:
    """J_w(t) for |Re w| <= 4 (wider orders work but are outside the tested envelope)."""
    w = complex(w)
    if abs(w.real) > 4 + 1e-12 and method == "auto":
        raise ValueError("order outside the supported envelope |Re w| <= 4")
    if not 0 < t <= 1e4:
        raise ValueError("argument outside the supported envelope 0 < t <= 1e4")
    if method == "auto":
        tags: list[str] = []
        v = complex(bessel_j_scaled([w], t, methods=tags)[0])
        return BesselEval(w, t, v, tags[0])
    if method == "series":
        if _is_neg_int(w):
            m = int(-w.real)
            v = (-1) ** m * bessel_j(-w, t, "series").value
            return BesselEval(w, t, v, "series")
        sv, cancel = _series_scaled(np.array([w]), t, np.zeros(1, dtype=complex))
        v = complex(sv[0])
        if cancel[0] > SERIES_CANCEL_LIMIT:
            return BesselEval(w, t, _series_mp(w, t, 0j, float(cancel[0])), "series-mp")
        return BesselEval(w, t, v.real + 0j if w.imag == 0 else v, "series")
    if method == "series-mp":
        return BesselEval(w, t, _series_mp(w, t, 0j, 1.0), "series-mp")
    if method == "mellin-barnes":
        return BesselEval(w, t, mellin_barnes_j(w, t), "integral-representation")
    if method == "hankel":
        hv, ok = _hankel_scaled(np.array([w]), t, np.zeros(1, dtype=complex))
        if not ok[0]:
            raise ArithmeticError("Hankel expansion did not reach tolerance")
        return BesselEval(w, t, complex(hv[0]), "large-argument")
    raise ValueError(f"unknown method {method}")


@lru_cache(maxsize=8)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _composite(a: complex, b: complex, panels: int, n: int = 20) -> tuple[np.ndarray, np.ndarray]:
    x, wts = _gauss_legendre(n)
    edges = np.linspace(0.0, 1.0, panels + 1)
    pts = []
    ws = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        pts.append(a + (b - a) * (lo + (hi - lo) * (x + 1) / 2))
        ws.append((b - a) * (hi - lo) / 2 * wts)
    return np.concatenate(pts), np.concatenate(ws)


def mellin_barnes_j(w: complex, t: float) -> complex:
    """(1/2 pi i) int_C (t/2)^(-2z) Gamma(w/2 + z) / Gamma(1 + w/2 - z) dz.

    C runs from -L - iY right to x0 - iY, up to x0 + iY, and back left to
    -L + iY, with every pole z = -w/2 - n enclosed on its left.
    """
    w = complex(w)
    h = w / 2
    x0 = -h.real + 0.5
    Y = abs(h.imag) + 1.5
    L = x0 - (1.5 * t + 40.0 + abs(h.real))
    lt = math.log(t / 2)

    def G(z: np.ndarray) -> np.ndarray:
        return np.exp(-2 * z * lt + loggamma(h + z) - loggamma(1 + h - z))

    n_h = max(8, int((x0 - L) * 2))
    n_v = max(8, int(2 * Y * 2))
    zb, wb = _composite(complex(L, -Y), complex(x0, -Y), n_h)
    zv, wv = _composite(complex(x0, -Y), complex(x0, Y), n_v)
    zt, wt = _composite(complex(x0, Y), complex(L, Y), n_h)
    total = np.sum(G(zb) * wb) + np.sum(G(zv) * wv) + np.sum(G(zt) * wt)
    return complex(total / (2j * math.pi))


def bessel_j_integers(nmax: int, t: float) -> np.ndarray:
    """J_0(t), ..., J_nmax(t) by Miller's backward recurrence, normalized by J_0 + 2 sum J_2k = 1."""
    if t <= 0:
        raise ValueError("t must be positive")
    if t > 2000:
        orders = np.arange(nmax + 1, dtype=complex)
        return bessel_j_scaled(orders, t).real
    M = int(max(nmax, t) + 40 + 2 * math.sqrt(max(nmax, t) + 1))
    M += M % 2
    vals = np.zeros(M + 2)
    f_next, f = 0.0, 1e-300
    vals[M] = f
    norm = 0.0
    for n in range(M, 0, -1):
        f_prev = 2 * n / t * f - f_next
        f_next, f = f, f_prev
        vals[n - 1] = f
        if abs(f) > 1e250:
            vals[n - 1:M + 1] *= 1e-250
            f *= 1e-250
            f_next *= 1e-250
    norm = vals[0] + 2.0 * vals[2:M + 1:2].sum()
    return vals[: nmax + 1] / norm


def j_over_cos(nu: np.ndarray, t: float) -> np.ndarray:
    """J_{2 nu}(t) / cos(pi nu), finite for large |Im nu|."""
    nu = np.asarray(nu, dtype=complex)
    return bessel_j_scaled(2 * nu, t, _logcos(math.pi * nu))


# ---------------------------------------------------------------------------
# Bessel transform


@dataclass(frozen=True)
class BesselTransform:
    value: complex
    continuous: complex
    discrete: complex
    alpha: float
    y: float
    err: float


def _discrete_part(k: TestFunction, t: float, b0: int) -> complex:
    """2 sum_{b >= b0 even} (-1)^(b/2) (b-1)/2 k((b-1)/2) J_{b-1}(t)."""
    coeffs: list[tuple[int, complex]] = []
    if k.discrete_terms is not None:
        bmax = 2 * k.discrete_terms + 2
        for b in range(b0, bmax + 1, 2):
            coeffs.append((b, k.at_half_integer(b)))
    else:
        scale = 0.0
        small = 0
        b = b0
        while True:
            v = k.at_half_integer(b)
            coeffs.append((b, v))
            mag = abs(v) * (b - 1)
            scale = max(scale, mag)
            if mag <= 1e-17 * scale:
                small += 1
                if small >= 5:
                    break
            else:
                small = 0
            b += 2
            if b > 20000:
                raise ArithmeticError("discrete coefficients do not decay")
    coeffs = [(b, v) for b, v in coeffs if v != 0]
    if not coeffs:
        return 0j
    J = bessel_j_integers(max(b for b, _ in coeffs) - 1, t)
    terms = [2 * (-1) ** (b // 2) * (b - 1) / 2 * v * J[b - 1] for b, v in coeffs]
    return complex(math.fsum(x.real for x in terms), math.fsum(x.imag for x in terms))


def _trapezoid_line(g, h: float, tol: float, decay: float, alpha: float) -> tuple[complex, float]:
    """Trapezoid rule for int_R g(u) du with step h; cutoff grown until the tail is negligible.

    Returns the estimate with step h and |I_h - I_2h| as error estimate.
    """
    U = 8.0
    while True:
        n = int(math.ceil(U / h))
        u = np.arange(-n, n + 1) * h
        vals = g(u)
        edge = max(abs(vals[0]), abs(vals[-1]), abs(vals[1]), abs(vals[-2]))
        p = max(decay + 2 * alpha - 1.5, 1.5)
        tail = 2 * edge * max(U / (p - 1), 1.0)
        if tail < tol * 0.1 or U > 5000:
            break
        U *= 1.6
    Ih = h * vals.sum()
    # the coarse rule uses nodes at even multiples of h
    I2h = 2 * h * vals[(np.arange(-n, n + 1) % 2) == 0].sum()
    return complex(Ih), abs(Ih - I2h) + tail


def _default_step(alpha: float, holo: float) -> float:
    # nearest pole of 1/cos(pi nu) (or loss of holomorphy) sets the analytic strip
    if alpha == 0:
        d = 0.5
    else:
        d = min(abs(alpha - 0.5), abs(1.5 - alpha), max(holo - alpha, 0.05))
    # trapezoid error ~ exp(-2 pi d / h); aim at 1e-14
    return 2 * math.pi * d / 40.0


MS_T_SWITCH = 4.0


def _gl_panels(a: complex, b: complex, panels: int, n: int = 16) -> tuple[np.ndarray, np.ndarray]:
    return _composite(a, b, panels, n)


@lru_cache(maxsize=256)
def _ms_plan(k: TestFunction, t_lo: float) -> tuple[np.ndarray, np.ndarray]:
    """Contour nodes xi, weights, and H(xi) for arguments t in [t_lo, 2 t_lo].

    H(xi) = int_R k(iu) u tanh(pi u) cos(2 u xi) du.  The contour leaves 0
    along the steepest-descent diagonal of exp(i t cosh xi) and continues
    horizontally at height eta, where exp(i t cosh xi) decays like
    exp(-t sinh(x) sin(eta)).
    """
    s = k.gauss_s
    eta = min(math.sqrt(3 * s), 1.2)  # keeps exp(2|u| eta - s u^2) below e^3
    rmax = min(eta * math.sqrt(2), 9 / math.sqrt(t_lo))
    eta_e = min(eta, rmax / math.sqrt(2))
    xmax = max(math.asinh(40 / (t_lo * math.sin(eta_e))), eta_e + 0.05)
    t_hi = 2 * t_lo
    nd = max(4, math.ceil(t_hi * rmax ** 2 / (4 * math.pi))) + 4
    d = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    r, wr = _gl_panels(0.0, rmax, nd)
    nh = math.ceil(t_hi * (math.cosh(xmax) - math.cosh(eta_e)) / (2 * math.pi)) + 6
    x, wx = _gl_panels(eta_e, xmax, nh)
    xi = np.concatenate([r * d, x + 1j * eta_e])
    w = np.concatenate([wr * d, wx + 0j])
    hu = 0.05
    U = (eta_e + math.sqrt(eta_e ** 2 + 40 * s)) / s + 2
    u = np.arange(-int(U / hu), int(U / hu) + 1) * hu
    wu = np.real(np.asarray(k.strip(1j * u), dtype=complex)) * u * np.tanh(np.pi * u)
    H = np.empty(xi.shape, dtype=complex)
    for i in range(0, xi.size, 256):
        H[i:i + 256] = hu * (np.cos(2 * np.outer(xi[i:i + 256], u)) @ wu)
    return xi, w * H


SMALL_T_SHIFT = 2.0  # contour Re nu for the small-t route, past the pole at 3/2


@lru_cache(maxsize=256)
def _small_t_plan(k: TestFunction, t_max: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes u >= 0, trapezoid weights times k(c+iu)(c+iu), and series coefficients on Re nu = c.

    J_{2 nu}(t) / cos(pi nu) = (t/2)^{2 nu} sum_n A_n (-t^2/4)^n with
    A_n = 1 / (n! Gamma(2 nu + n + 1) cos(pi nu)).  The integrand at -u is
    the conjugate of the one at u, so only u >= 0 is stored.
    """
    s = k.gauss_s
    c = SMALL_T_SHIFT
    h = 2 * math.pi * 0.5 / 40.0  # poles of 1/cos at distance 1/2
    U = math.sqrt(18 * math.log(10) / s) + 1.0
    u = np.arange(0, int(math.ceil(U / h)) + 1) * h
    x = t_max * t_max / 4
    nterms, mag = 0, 1.0
    while mag > 1e-18 or nterms < 4:
        nterms += 1
        mag *= x / (nterms * nterms)
    nu = c + 1j * u
    w = 2 * nu
    A = np.empty((nterms + 1, u.size), dtype=complex)
    A[0] = np.exp(-loggamma(1 + w) - _logcos(math.pi * nu))
    for n in range(1, nterms + 1):
        A[n] = A[n - 1] / (n * (w + n))
    wt = np.full(u.size, 2 * h)
    wt[0] = h
    W = wt * np.asarray(k.strip(nu), dtype=complex) * nu
    return u, W, A


def _small_t_continuous(k: TestFunction, t: float) -> tuple[float, float]:
    """Continuous part of the shifted form for t < MS_T_SWITCH, with the residue at 3/2 moved out.

    Moving Re nu from (1/2, 3/2) to 2 crosses the pole at 3/2 and changes the
    integral by 3 k(3/2) J_3(t); what remains is O(t^4), so there is no
    cancellation against the J_1 and J_3 terms when t is small.
    """
    u, W, A = _small_t_plan(k, MS_T_SWITCH)
    x = -t * t / 4
    P = A[-1].copy()
    for n in range(A.shape[0] - 2, -1, -1):
        P = A[n] + x * P
    lt = math.log(t / 2)
    vals = W * np.exp(2 * SMALL_T_SHIFT * lt + 2j * u * lt) * P
    shifted = math.fsum(vals.real)
    residue = 3 * complex(k.strip(1.5)).real * float(bessel_j_integers(3, t)[3])
    err = 1e-15 * float(np.abs(vals).sum()) + 1e-16 * abs(residue)
    return shifted - residue, err


def _ms_continuous(k: TestFunction, t: float) -> complex:
    """(2/pi) int_0^inf cos(t cosh xi) H(xi) dxi on the deformed contour."""
    t_lo = MS_T_SWITCH * 2.0 ** math.floor(math.log2(t / MS_T_SWITCH))
    xi, wH = _ms_plan(k, t_lo)
    return complex(2 / math.pi * np.sum(np.exp(1j * t * np.cosh(xi)) * wH).real)


def bessel_transform_plus(k: TestFunction, y: float, alpha: float = 0.0, tol: float = 1e-10,
                          step: float | None = None, method: str = "auto") -> BesselTransform:
    """beta_+ k(y) at t = 4 pi sqrt(y).

    alpha = 0: -int_R k(iu) u Im J_{2iu}(t) / cosh(pi u) du plus the discrete sum from b = 2.
    alpha in (1/2, 3/2): int_R k(alpha+iu) J_{2 alpha + 2iu}(t) (alpha+iu) / cos(pi(alpha+iu)) du
    plus the discrete sum from b = 4 (the b = 2 residue is absorbed by the shift).

    method "mehler" rewrites the alpha = 0 form through the Mehler-Sonine
    integral for J_{-2iu} - J_{2iu}; "auto" takes it for Gaussian profiles
    once t >= MS_T_SWITCH, where the Bessel routes above get expensive.
    """
    if y <= 0:
        raise ValueError("y must be positive")
    if alpha != 0 and not (0.5 < alpha < 1.5 and alpha <= k.holo_width + 1e-12):
        raise ValueError(f"contour Re nu = {alpha} not allowed for this test function")
    if method not in ("auto", "contour", "mehler"):
        raise ValueError(f"unknown method {method}")
    t = 4 * math.pi * math.sqrt(y)
    strip_zero = k.strip(complex(alpha, 0.3)) == 0 and k.strip(complex(alpha, 1.7)) == 0
    use_ms = (not strip_zero and k.gauss_s is not None
              and (method == "mehler" or (method == "auto" and t >= MS_T_SWITCH)))
    if method == "mehler" and k.gauss_s is None:
        raise ValueError("the Mehler-Sonine route needs a Gaussian profile")
    if (method == "auto" and not strip_zero and k.gauss_s is not None and t < MS_T_SWITCH):
        cont, err = _small_t_continuous(k, t)
        disc = _discrete_part(k, t, 4)
        return BesselTransform(cont + disc, complex(cont), disc, alpha, y, err)
    if use_ms:
        cont = _ms_continuous(k, t)
        return BesselTransform(cont + _discrete_part(k, t, 2), cont, _discrete_part(k, t, 2), alpha, y,
                               1e-13 * max(1.0, abs(cont)))
    h = step if step is not None else _default_step(alpha, k.holo_width)
    if alpha == 0:
        def g(u: np.ndarray) -> np.ndarray:
            nu = 1j * u
            kv = np.asarray(k.strip(nu), dtype=complex) * np.ones_like(nu)
            jc = j_over_cos(nu, t)
            return -kv * u * jc.imag
        b0 = 2
    else:
        def g(u: np.ndarray) -> np.ndarray:
            nu = alpha + 1j * u
            kv = np.asarray(k.strip(nu), dtype=complex) * np.ones_like(nu)
            return kv * nu * j_over_cos(nu, t)
        b0 = 4
    if strip_zero:
        cont, err = 0j, 0.0
    else:
        cont, err = _trapezoid_line(g, h, tol, k.decay, alpha)
    disc = _discrete_part(k, t, b0)
    return BesselTransform(cont + disc, cont, disc, alpha, y, err)


# ---------------------------------------------------------------------------
# envelopes for the Bessel transform


def bessel_envelope(family: str, s: float, y: float, alpha: float, eps: float = 0.05) -> float:
    """Shape of the transform bound: min(s^(alpha-1-eps) y^alpha, 1/s) or min(s^(alpha-1) y^alpha, s^-1/2)."""
    if family == "plus":
        return min(s ** (alpha - 1 - eps) * y ** alpha, 1.0 / s)
    if family == "minus":
        return min(s ** (alpha - 1) * y ** alpha, s ** -0.5)
    raise ValueError("family must be plus or minus")


@dataclass
class BoundReport:
    rows: list[tuple[float, float, complex, float, float]]  # s, y, value, envelope, ratio
    anchor_s: float
    constant: float
    max_ratio_after_anchor: float

    @property
    def violated(self) -> bool:
        return self.max_ratio_after_anchor > self.constant * (1 + 1e-9)


def verify_bessel_bounds(family: str, s_grid: Sequence[float], y_grid: Sequence[float],
                         alpha: float, eps: float = 0.05, anchor_s: float | None = None) -> BoundReport:
    """Ratios |beta_+ k(y)| / envelope; the constant is fitted at the anchor s and then frozen."""
    from kkit.testfn import special_minus, special_plus

    if not 0.5 < alpha < 1.5:
        raise ValueError("alpha must lie in (1/2, 3/2)")
    make = special_plus if family == "plus" else special_minus
    rows = []
    for s in s_grid:
        k = make(s)
        for y in y_grid:
            v = bessel_transform_plus(k, y).value
            env = bessel_envelope(family, s, y, alpha, eps)
            rows.append((s, y, v, env, abs(v) / env))
    if anchor_s is None:
        anchor_s = max(s_grid)
    const = max(r[4] for r in rows if r[0] == anchor_s)
    after = max((r[4] for r in rows if r[0] != anchor_s), default=0.0)
    return BoundReport(rows, anchor_s, const, after)


# ---------------------------------------------------------------------------
# cross-method grid

CROSS_MB_T_MAX = 20.0  # the Mellin-Barnes contour loses accuracy to cancellation beyond this


def cross_method_grid(n_w: int = 20, n_t: int = 20, t_range: tuple[float, float] = (0.05, 300.0)) -> list[tuple[complex, float, complex, complex, str, float]]:
    """Rows (w, t, auto value, reference value, reference route, relative gap).

    Orders sweep Re w over [-3.8, 3.8] with Im w up to 4 in modulus; t is
    log-spaced across the series and large-argument regimes.  The reference
    is the Mellin-Barnes integral for t <= CROSS_MB_T_MAX and the power series
    in extended precision above it, so each row compares two distinct routes.
    """
    ws = [complex(re, im) for re, im in zip(np.linspace(-3.8, 3.8, n_w), 4 * np.sin(np.arange(n_w) * 1.3))]
    ts = np.geomspace(t_range[0], t_range[1], n_t)
    rows = []
    for w in ws:
        for t in ts:
            a = bessel_j(w, float(t)).value
            route = "mellin-barnes" if t <= CROSS_MB_T_MAX else "series-mp"
            b = bessel_j(w, float(t), route).value
            rows.append((w, float(t), a, b, route, abs(a - b) / max(abs(a), 1e-300)))
    return rows
