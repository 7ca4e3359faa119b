"""Spectral-side harness: mock spectral measures, the zeta transform Z_s(g),
counting functions mu_g(X), a Tauberian comparison of the two, and the
closed-form limit constants for counting by the l1-norm of the Q-eigenvalues.

Eigenvalue coordinates live in Y = (0, inf) union A_d, with
A_d = {m(1 - m) : m >= 1} = {0, -2, -6, -12, ...} (m = b/2 for even b >= 2).
The limit measure at one place is
    d eta(y) = 1/2 tanh(pi sqrt(y - 1/4)) dy on y > 1/4,
plus point masses sqrt(1/4 - y) = (b - 1)/2 at y in A_d.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate

from kkit.numberfield import FieldContext
from kkit.sumformula import Partition

EXCEPTIONAL_BOUND = 0.21
TAUBER_TOL = 0.05
STABILITY_TOL = 0.1
QUAD_TOL = 1e-13
MODELS = ("dgrid", "uniform", "adversarial")
DEFAULT_CUBE = (-2.5, 5.0)  # catches the points 0 and -2 plus a stretch of continuous spectrum

GFactor = Callable[[np.ndarray], np.ndarray]


class DensityError(ValueError):
    """Invalid input to a density constant."""


# ---------------------------------------------------------------------------
# the discrete set A_d and the single-place measure


def discrete_point(b: int) -> float:
    """b/2 (1 - b/2) for even b >= 2."""
    if b < 2 or b % 2:
        raise DensityError(f"b must be even and >= 2, got {b}")
    m = b // 2
    return float(m * (1 - m))


def discrete_b(y: float, tol: float = 1e-12) -> int | None:
    """The even b with y = b/2 (1 - b/2), or None."""
    if y > tol:
        return None
    # m(m - 1) = -y  =>  m = (1 + sqrt(1 - 4y)) / 2
    m = round((1.0 + math.sqrt(1.0 - 4.0 * y)) / 2.0)
    if m >= 1 and abs(m * (1 - m) - y) <= tol * max(1.0, abs(y)):
        return 2 * m
    return None


def discrete_points_in(a: float, b: float) -> list[tuple[int, float]]:
    """(b_even, y) with a < y < b and y in A_d."""
    out = []
    m = 1
    while True:
        y = float(m * (1 - m))
        if y <= a:
            break
        if y < b:
            out.append((2 * m, y))
        m += 1
    return out


def eta_density(y: np.ndarray | float) -> np.ndarray:
    """Continuous density 1/2 tanh(pi sqrt(y - 1/4)), zero for y <= 1/4."""
    y = np.asarray(y, dtype=float)
    u = np.clip(y - 0.25, 0.0, None)
    return 0.5 * np.tanh(np.pi * np.sqrt(u))


def tanh_integral(a: float, b: float) -> float:
    """Integral of tanh(pi sqrt(y - 1/4)) over [a, b] intersected with [1/4, inf)."""
    lo = max(a, 0.25)
    if b <= lo:
        return 0.0
    # (b - lo) minus the integral of 1 - tanh, which decays like e^{-2 pi sqrt(u)}
    # and is computed in v = sqrt(y - 1/4) for a smooth integrand
    v0, v1 = math.sqrt(lo - 0.25), math.sqrt(b - 0.25)

    def deficit(v: float) -> float:
        return 2.0 * v * 2.0 / (math.exp(2.0 * math.pi * v) + 1.0)

    defect, _ = integrate.quad(deficit, v0, v1, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return (b - lo) - defect


def lambda_q_norm(lam: Sequence[float], Q: frozenset[int] | Sequence[int]) -> float:
    """Sum of |lambda_j| over j in Q (1-based)."""
    return float(sum(abs(lam[j - 1]) for j in Q))


# ---------------------------------------------------------------------------
# atom lists


@dataclass(frozen=True, eq=False)
class SpectralAtomList:
    """Atoms lam[i] in Y^d with weights w[i] >= 0.

    Sums over the list are multiplied by `scale`, which lets the d eta grid
    keep its cell masses as weights while matching the limit normalization.
    """

    lam: np.ndarray
    weights: np.ndarray
    model: str = "explicit"
    seed: int | None = None
    scale: float = 1.0
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim == 1:
            lam = lam[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if lam.shape[0] != w.shape[0]:
            raise ValueError("one weight per atom")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if self.scale < 0:
            raise ValueError("scale must be non-negative")
        lam.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return int(self.lam.shape[1])

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    def provenance(self) -> dict:
        return {"model": self.model, "seed": self.seed, "scale": self.scale, **dict(self.params)}

    def same_as(self, other: SpectralAtomList) -> bool:
        return (
            self.provenance() == other.provenance()
            and np.array_equal(self.lam, other.lam)
            and np.array_equal(self.weights, other.weights)
        )


def _admissible(atoms: SpectralAtomList, partition: Partition) -> np.ndarray:
    """Mask of atoms meeting the sign constraints of the partition."""
    if atoms.d != partition.d:
        raise ValueError(f"atoms have d={atoms.d}, partition has d={partition.d}")
    mask = np.ones(len(atoms), dtype=bool)
    for j in partition.Qp:
        mask &= atoms.lam[:, j - 1] >= 0
    for j in partition.Qm:
        mask &= atoms.lam[:, j - 1] < 0
    return mask


def _q_norms(atoms: SpectralAtomList, partition: Partition) -> np.ndarray:
    cols = [j - 1 for j in sorted(partition.Q)]
    if not cols:
        return np.zeros(len(atoms))
    return np.abs(atoms.lam[:, cols]).sum(axis=1)


def _g_weights(atoms: SpectralAtomList, partition: Partition, g_E: Mapping[int, GFactor] | None) -> np.ndarray:
    """scale * weight * prod_{j in E} g_j(lam_j), zero off the admissible set."""
    g_E = dict(g_E or {})
    if set(g_E) - set(partition.E):
        raise ValueError("g_E may only name places in E")
    w = atoms.scale * atoms.weights * _admissible(atoms, partition)
    out = w.astype(complex)
    for j, g in g_E.items():
        vals = np.asarray(g(atoms.lam[:, j - 1]))
        if vals.shape != (len(atoms),):
            vals = np.array([g(float(x)) for x in atoms.lam[:, j - 1]])
        out = out * vals
    return out


def indicator(a: float, b: float) -> GFactor:
    """Vectorized indicator of [a, b]."""
    return lambda y: ((np.asarray(y) >= a) & (np.asarray(y) <= b)).astype(float)


def _real_if_close(z: complex) -> complex | float:
    return z.real if abs(z.imag) <= 1e-14 * max(abs(z), 1e-300) else z


def zeta_transform(atoms: SpectralAtomList, partition: Partition, g_E: Mapping[int, GFactor] | None, s: float) -> complex | float:
    """Sum of weight * exp(-s ||lam_Q||_1) * prod_E g_j(lam_j)."""
    if s <= 0:
        raise ValueError("s must be positive")
    w = _g_weights(atoms, partition, g_E)
    return _real_if_close(complex(np.sum(w * np.exp(-s * _q_norms(atoms, partition)))))


def counting_mu(atoms: SpectralAtomList, partition: Partition, g_E: Mapping[int, GFactor] | None, X: float) -> complex | float:
    """Sum of weight * prod_E g_j(lam_j) over atoms with ||lam_Q||_1 <= X."""
    if X < 0:
        raise ValueError("X must be non-negative")
    w = _g_weights(atoms, partition, g_E)
    return _real_if_close(complex(np.sum(w[_q_norms(atoms, partition) <= X])))


def counting_profile(atoms: SpectralAtomList, partition: Partition, g_E: Mapping[int, GFactor] | None, X: Sequence[float]) -> np.ndarray:
    """counting_mu on a whole grid of X via one sort."""
    w = _g_weights(atoms, partition, g_E)
    norms = _q_norms(atoms, partition)
    order = np.argsort(norms, kind="stable")
    csum = np.concatenate([[0.0], np.cumsum(w[order])])
    idx = np.searchsorted(norms[order], np.asarray(X, dtype=float), side="right")
    return csum[idx]


def stieltjes_laplace(atoms: SpectralAtomList, partition: Partition, g_E: Mapping[int, GFactor] | None, s: float) -> complex | float:
    """Integral of exp(-s X) d mu(X), assembled from the jumps of mu."""
    norms = _q_norms(atoms, partition)
    jumps = np.unique(norms)
    mu = counting_profile(atoms, partition, g_E, jumps)
    dmu = np.diff(np.concatenate([[0.0], mu]))
    return _real_if_close(complex(np.sum(np.exp(-s * jumps) * dmu)))


# ---------------------------------------------------------------------------
# Tauberian comparison


@dataclass
class TauberReport:
    n: int  # d - |E|, kept explicit so the factorial is visible
    factorial: int
    s_grid: list[float]
    zeta_scaled: list[float]  # s^n Z_s
    X_grid: list[float]
    mu_scaled: list[float]  # n! X^{-n} mu(X)
    L1: float
    L2: float
    rel_err: float
    inconclusive: bool
    passed: bool
    notes: list[str] = field(default_factory=list)


def _extrapolate(x: np.ndarray, y: np.ndarray) -> float:
    """Intercept at x = 0 of a least-squares line; the last value if too few points."""
    if len(x) < 3:
        return float(y[-1])
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def tauberian_check(
    atoms: SpectralAtomList,
    partition: Partition,
    g_E: Mapping[int, GFactor] | None,
    s_grid: Sequence[float],
    X_grid: Sequence[float],
    *,
    tol: float = TAUBER_TOL,
) -> TauberReport:
    """Compare lim s^n Z_s with lim n! X^{-n} mu(X), n = d - |E|.

    Each limit is the intercept of a linear fit in s (resp. 1/X). A limit
    whose intercept is far from the extreme grid value is flagged as not
    stabilized and the report is inconclusive.
    """
    s_arr = np.asarray(s_grid, dtype=float)
    X_arr = np.asarray(X_grid, dtype=float)
    if np.any(s_arr <= 0) or np.any(X_arr <= 0):
        raise ValueError("grids must be positive")
    if np.any(np.diff(s_arr) >= 0):
        raise ValueError("s grid must be strictly decreasing")
    if np.any(np.diff(X_arr) <= 0):
        raise ValueError("X grid must be strictly increasing")
    n = partition.d - len(partition.E)
    if n <= 0:
        raise ValueError("E must not contain every place")
    fact = math.factorial(n)
    z = np.array([float(np.real(zeta_transform(atoms, partition, g_E, s))) for s in s_arr]) * s_arr**n
    mu = np.real(counting_profile(atoms, partition, g_E, X_arr)) * fact / X_arr**n
    L1 = _extrapolate(s_arr, z)
    L2 = _extrapolate(1.0 / X_arr, mu)
    notes = []
    inconclusive = False
    for name, lim, last in (("L1", L1, z[-1]), ("L2", L2, mu[-1])):
        if abs(lim - last) > STABILITY_TOL * max(abs(lim), abs(last), 1e-300):
            inconclusive = True
            notes.append(f"{name} not stabilized: extrapolated {lim:.6g}, last grid value {last:.6g}")
    if L1 == 0.0 and L2 == 0.0:
        rel = 0.0
    else:
        rel = abs(L1 - L2) / max(abs(L1), 1e-300)
    return TauberReport(
        n=n,
        factorial=fact,
        s_grid=s_arr.tolist(),
        zeta_scaled=z.tolist(),
        X_grid=X_arr.tolist(),
        mu_scaled=mu.tolist(),
        L1=L1,
        L2=L2,
        rel_err=rel,
        inconclusive=inconclusive,
        passed=(not inconclusive) and rel <= tol,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# limit constants


@dataclass(frozen=True)
class DensityConstants:
    D: int
    d: int
    partition: str
    hypercube: dict[int, tuple[float, float]]
    prefactor: float  # 2 sqrt|D| / ((d - |E|)! (2 pi)^d)
    factors: dict[int, float]
    value: float
    weyl: float

    def as_dict(self) -> dict:
        return {
            "D": self.D,
            "d": self.d,
            "partition": self.partition,
            "hypercube": {str(j): list(ab) for j, ab in self.hypercube.items()},
            "prefactor": self.prefactor,
            "factors": {str(j): v for j, v in self.factors.items()},
            "value": self.value,
            "weyl": self.weyl,
        }


def _field_dims(F: FieldContext) -> tuple[int, int]:
    return F.disc, F.degree


def place_factor(a: float, b: float) -> float:
    """tanh integral over [a, b] (from 1/4) plus (b_even - 1) for interior points of A_d."""
    if a >= b:
        raise DensityError(f"empty interval [{a}, {b}]")
    for end in (a, b):
        be = discrete_b(end)
        if be is not None:
            raise DensityError(f"endpoint {end} lies on the discrete set (b={be})")
    return tanh_integral(a, b) + float(sum(be - 1 for be, _ in discrete_points_in(a, b)))


def weyl_constant(F: FieldContext) -> float:
    """2 sqrt|D| / (d! (2 pi)^d)."""
    D, d = _field_dims(F)
    return 2.0 * math.sqrt(abs(D)) / (math.factorial(d) * (2.0 * math.pi) ** d)


def mainthm_constant(F: FieldContext, partition: Partition, hypercube: Mapping[int, tuple[float, float]] | None = None) -> DensityConstants:
    """Limit of X^{|E|-d} times the count of eigenvalue vectors with ||lam_Q||_1 <= X
    and lam_j in [a_j, b_j] for j in E, weighted by |c^r|^2."""
    D, d = _field_dims(F)
    if partition.d != d:
        raise DensityError(f"partition is for d={partition.d}, field has degree {d}")
    if len(partition.E) == d:
        raise DensityError("E must not contain every place")
    cube = {int(j): (float(a), float(b)) for j, (a, b) in (hypercube or {}).items()}
    if set(cube) != set(partition.E):
        raise DensityError(f"hypercube must give an interval for each place in E={sorted(partition.E)}")
    n = d - len(partition.E)
    pre = 2.0 * math.sqrt(abs(D)) / (math.factorial(n) * (2.0 * math.pi) ** d)
    factors = {j: place_factor(*cube[j]) for j in sorted(cube)}
    value = pre * math.prod(factors.values())
    return DensityConstants(D, d, str(partition), cube, pre, factors, value, weyl_constant(F))


def corgen_constant(F: FieldContext, E: frozenset[int], hypercube: Mapping[int, tuple[float, float]]) -> float:
    """Closed form for the count with no sign condition on the Q-places:
    2 sqrt|D| / ((d - |E|)! pi^d 2^{|E|}) times the place factors."""
    D, d = _field_dims(F)
    n = d - len(E)
    pre = 2.0 * math.sqrt(abs(D)) / (math.factorial(n) * math.pi**d * 2 ** len(E))
    return pre * math.prod(place_factor(*hypercube[j]) for j in sorted(E))


def sign_splits(d: int, E: frozenset[int]) -> list[Partition]:
    """All partitions with the given E."""
    Q = sorted(set(range(1, d + 1)) - set(E))
    out = []
    for signs in itertools.product((True, False), repeat=len(Q)):
        qp = frozenset(j for j, sg in zip(Q, signs) if sg)
        out.append(Partition(d, frozenset(E), qp, frozenset(Q) - qp))
    return out


def dseries_constant(F: FieldContext, fixed: Mapping[int, float]) -> float:
    """sqrt|D| / pi^d * prod sqrt(1/4 - lam_j) over the d - 1 fixed discrete eigenvalues."""
    D, d = _field_dims(F)
    if len(fixed) != d - 1:
        raise DensityError(f"need d-1={d - 1} fixed eigenvalues, got {len(fixed)}")
    prod = 1.0
    for j, y in fixed.items():
        if not 1 <= j <= d:
            raise DensityError(f"place {j} out of range")
        if discrete_b(y) is None:
            raise DensityError(f"lambda_{j}={y} is not of the form b/2(1-b/2)")
        prod *= math.sqrt(0.25 - y)
    return math.sqrt(abs(D)) / math.pi**d * prod


@dataclass(frozen=True)
class PSeriesConstant:
    value: float  # with the exact tanh integrals
    approx: float  # with each integral replaced by b - a
    rel_gap: float


def pseries_constant(F: FieldContext, intervals: Mapping[int, tuple[float, float]]) -> PSeriesConstant:
    """2^{1-d} sqrt|D| / pi^d * prod of tanh integrals over d - 1 intervals in [1/4, inf)."""
    D, d = _field_dims(F)
    if len(intervals) != d - 1:
        raise DensityError(f"need d-1={d - 1} intervals, got {len(intervals)}")
    exact = approx = 1.0
    for j, (a, b) in intervals.items():
        if a < 0.25 or b <= a:
            raise DensityError(f"interval for place {j} must satisfy 1/4 <= a < b")
        exact *= tanh_integral(a, b)
        approx *= b - a
    pre = 2.0 ** (1 - d) * math.sqrt(abs(D)) / math.pi**d
    return PSeriesConstant(pre * exact, pre * approx, abs(approx - exact) / exact if exact else math.inf)


# ---------------------------------------------------------------------------
# mock measures


def _continuous_cells(lo: float, hi: float, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell centres and widths covering (lo, hi] within (1/4, inf).

    Cells have width 1/resolution for y - 1/4 <= 1 and grow geometrically by
    the factor 1 + 1/resolution beyond, so large ranges stay cheap.
    """
    lo = max(lo, 0.25)
    if hi <= lo:
        return np.empty(0), np.empty(0)
    u_lo, u_hi = lo - 0.25, hi - 0.25
    edges = list(np.arange(0.0, min(1.0, u_hi), 1.0 / resolution))
    if u_hi > 1.0:
        edges += list(np.geomspace(1.0, u_hi, max(2, int(math.ceil(resolution * math.log(u_hi))) + 1)))
    else:
        edges.append(u_hi)
    e = np.unique(np.clip(np.asarray(edges), u_lo, u_hi))
    e = e[e >= u_lo]
    if e[0] > u_lo:
        e = np.concatenate([[u_lo], e])
    centres = 0.25 + 0.5 * (e[:-1] + e[1:])
    return centres, np.diff(e)


def _place_grid(kind: str, cube: tuple[float, float] | None, x_max: float, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """(points, d eta masses) for one place."""
    pts: list[np.ndarray] = []
    mass: list[np.ndarray] = []
    if kind == "+":
        lo, hi = 0.0, x_max
        c, w = _continuous_cells(lo, hi, resolution)
        pts.append(c)
        mass.append(eta_density(c) * w)
        pts.append(np.array([0.0]))
        mass.append(np.array([0.5]))
        return np.concatenate(pts), np.concatenate(mass)
    if kind == "-":
        disc = discrete_points_in(-x_max, -1e-9)
    else:
        a, b = cube  # type: ignore[misc]
        c, w = _continuous_cells(a, b, resolution)
        pts.append(c)
        mass.append(eta_density(c) * w)
        disc = discrete_points_in(a, b)
    if disc:
        pts.append(np.array([y for _, y in disc]))
        mass.append(np.array([(be - 1) / 2.0 for be, _ in disc]))
    if not pts:
        return np.empty(0), np.empty(0)
    return np.concatenate(pts), np.concatenate(mass)


def generate_mock_measure(
    F: FieldContext,
    partition: Partition,
    model: str = "dgrid",
    resolution: int = 40,
    seed: int = 0,
    *,
    hypercube: Mapping[int, tuple[float, float]] | None = None,
    x_max: float = 1.2e4,
    n_atoms: int = 2000,
) -> SpectralAtomList:
    """Deterministic mock spectral measure.

    dgrid: product grid of d eta cells (midpoint masses) at every place, with
    E-places confined to their hypercube; scale 2 sqrt|D| / pi^d so that the
    normalized counting function tends to `mainthm_constant`.
    uniform: n_atoms uniform points in the admissible box with unit weights.
    adversarial: n_atoms atoms of total mass below 1 with every E-coordinate
    in (0, 1/4).
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if resolution < 10:
        raise ValueError("resolution must be >= 10")
    D, d = _field_dims(F)
    if partition.d != d:
        raise ValueError("partition degree differs from field degree")
    cube = {j: tuple(map(float, (hypercube or {}).get(j, DEFAULT_CUBE))) for j in partition.E}
    params = {
        "D": D,
        "partition": str(partition),
        "resolution": resolution,
        "x_max": x_max,
        "hypercube": {j: cube[j] for j in sorted(cube)},
    }
    if model == "dgrid":
        grids = [_place_grid(partition.kind(j), cube.get(j), x_max, resolution) for j in range(1, d + 1)]
        mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
        wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij")
        lam = np.stack([m.reshape(-1) for m in mesh], axis=1)
        w = np.prod(np.stack([m.reshape(-1) for m in wmesh], axis=1), axis=1)
        scale = 2.0 * math.sqrt(abs(D)) / math.pi**d
        return SpectralAtomList(lam, w, model, seed, scale, params)

    rng = np.random.default_rng(seed)
    params["n_atoms"] = n_atoms
    lam = np.empty((n_atoms, d))
    for j in range(1, d + 1):
        kind = partition.kind(j)
        if kind == "+":
            col = rng.uniform(0.0, x_max, n_atoms)
        elif kind == "-":
            col = -rng.uniform(1e-9, x_max, n_atoms)
        elif model == "adversarial":
            col = rng.uniform(1e-6, 0.25 - 1e-6, n_atoms)
        else:
            col = rng.uniform(*cube[j], n_atoms)
        lam[:, j - 1] = col
    # adversarial atoms carry total mass below 1, so their normalized count vanishes
    w = np.ones(n_atoms) if model == "uniform" else rng.uniform(0.0, 1.0, n_atoms) / n_atoms
    return SpectralAtomList(lam, w, model, seed, 1.0, params)


def cube_factors(partition: Partition, hypercube: Mapping[int, tuple[float, float]] | None) -> dict[int, GFactor]:
    """Indicator factors g_j for the E-places (defaults to the mock-measure cube)."""
    cube = {j: (hypercube or {}).get(j, DEFAULT_CUBE) for j in partition.E}
    return {j: indicator(*cube[j]) for j in partition.E}


@dataclass
class MockComparison:
    X: list[float]
    mu_scaled: list[float]  # X^{|E|-d} mu(X)
    target: float
    reference: float
    rel_err: list[float]
    passed: bool


def compare_to_constant(
    F: FieldContext,
    atoms: SpectralAtomList,
    partition: Partition,
    hypercube: Mapping[int, tuple[float, float]] | None,
    X_grid: Sequence[float],
    *,
    tol: float = TAUBER_TOL,
) -> MockComparison:
    """X^{|E|-d} mu(X) against `mainthm_constant`.

    Errors are relative to the target, or to the constant's prefactor when the
    target vanishes (complementary-series cubes).
    """
    cube = {j: (hypercube or {}).get(j, DEFAULT_CUBE) for j in partition.E}
    const = mainthm_constant(F, partition, cube)
    n = partition.d - len(partition.E)
    X = np.asarray(X_grid, dtype=float)
    mu = np.real(counting_profile(atoms, partition, cube_factors(partition, cube), X)) / X**n
    ref = const.value if const.value > 0 else const.prefactor
    rel = np.abs(mu - const.value) / ref
    return MockComparison(X.tolist(), mu.tolist(), const.value, ref, rel.tolist(), bool(rel[-1] <= tol))


# ---------------------------------------------------------------------------
# exceptional coordinates


@dataclass
class ExceptionalReport:
    indices: list[int]
    places: dict[int, list[int]]
    violating: list[int]

    @property
    def count(self) -> int:
        return len(self.indices)


def exceptional_filter(atoms: SpectralAtomList, bound: float = EXCEPTIONAL_BOUND) -> tuple[SpectralAtomList, ExceptionalReport]:
    """Atoms with some coordinate in (0, 1/4), flagging those below `bound`."""
    lam = atoms.lam
    exc = (lam > 0) & (lam < 0.25)
    rows = np.nonzero(exc.any(axis=1))[0]
    places = {int(i): [int(j) + 1 for j in np.nonzero(exc[i])[0]] for i in rows}
    violating = [int(i) for i in rows if np.any(lam[i][exc[i]] < bound)]
    sub = SpectralAtomList(lam[rows], atoms.weights[rows], atoms.model, atoms.seed, atoms.scale, {**dict(atoms.params), "filter": "exceptional"})
    return sub, ExceptionalReport([int(i) for i in rows], places, violating)
