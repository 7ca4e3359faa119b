"""Strict ray class groups, Hecke characters, ray-class zeta partial sums,
L-functions on Re s >= 1 and the (psi, Q, Phi) decomposition of the
Dirichlet series attached to Eisenstein Fourier coefficients.

Supported fields: Q and real quadratic fields of (wide) class number one.
The narrow class number may be 2; sign vectors are carried in the group.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .numberfield import (
    AlgInt,
    FieldContext,
    FieldElem,
    Ideal,
    ResidueRing,
    congruence_unit_group,
    enumerate_ideal_elements,
    factor_ideal,
    full_unit_group,
    ideal_divides,
    ideal_from_gens,
    ideal_power,
    ideal_product,
    ideal_sum,
    kronecker,
    prime_ideals_up_to,
    valuation,
    principal,
    unit_ideal,
)

MAX_MODULUS_NORM = 100
DEFAULT_PRIME_BOUND = 2000
MAX_SUM_NORM = 10**6
L_TARGET_TOL = 1e-4
EM_TERMS = 12

# B_2 .. B_24
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
              Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
              Fraction(-174611, 330), Fraction(854513, 138), Fraction(-236364091, 2730)]


class RayClassError(RuntimeError):
    """Raised when the class closure is not reached within the prime bound."""


class AccuracyError(RuntimeError):
    """Raised when an L-value cannot be certified to the requested tolerance."""


# ---------------------------------------------------------------------------
# Images in (O/q)^* x {+-1}^d


def _exact_signs(x: AlgInt) -> tuple[int, ...]:
    F = x.field
    if F.degree == 1:
        return (1 if x.a > 0 else -1,)
    # x_j = (P +- Q sqrt D) / 2 (D = 1 mod 4) or P +- Q sqrt D
    if F.D % 4 == 1:
        P, Q = 2 * x.a + x.b, x.b
    else:
        P, Q = x.a, x.b
    out = []
    for sgn in (1, -1):
        Qs = sgn * Q
        if P >= 0 and Qs >= 0:
            out.append(1)
        elif P <= 0 and Qs <= 0:
            out.append(-1)
        elif P * P > Q * Q * F.D:
            out.append(1 if P > 0 else -1)
        else:
            out.append(1 if Qs > 0 else -1)
    return tuple(out)


def _log_ratio(x: AlgInt) -> float:
    """log|x^sigma1| - log|x^sigma2| (0 over Q)."""
    if x.field.degree == 1:
        return 0.0
    e1 = x.embed()[0]
    n = abs(x.norm())
    # |x2| = |N x| / |x1| avoids cancellation in the small conjugate
    return 2.0 * math.log(abs(e1)) - math.log(n)


Image = tuple  # (u, v, signs)


@dataclass(frozen=True)
class _UnitImage:
    sign: int  # exponent of -1
    k: int  # exponent of the fundamental unit
    image: Image


@lru_cache(maxsize=None)
def find_generator(J: Ideal) -> AlgInt | None:
    """A generator of the integral ideal J, or None when J is not principal."""
    F = J.field
    if F.degree == 1:
        return AlgInt(F, J.a, 0)
    for x in enumerate_ideal_elements(J, J.norm, "units", full_unit_group(F)):
        if abs(x.norm()) == J.norm:
            return x
    return None


def _check_class_number_one(F: FieldContext) -> None:
    if F.degree == 1:
        return
    mink = int(math.sqrt(F.disc) / 2) + 1
    for P in prime_ideals_up_to(F, mink):
        if find_generator(P.ideal) is None:
            raise NotImplementedError(f"{F} has class number > 1; only class number one is supported")


# ---------------------------------------------------------------------------
# Group data


@dataclass(frozen=True)
class Polycyclic:
    """Generators g_i (class indices) with relative orders m_i and relations
    g_i^{m_i} = prod_{j<i} g_j^{rel_i[j]}; vec[c] expresses class c."""

    gens: tuple[int, ...]
    orders: tuple[int, ...]
    rels: tuple[tuple[int, ...], ...]
    vec: tuple[tuple[int, ...], ...]


def _polycyclic(table: Sequence[Sequence[int]]) -> Polycyclic:
    h = len(table)
    vec: dict[int, tuple[int, ...]] = {0: ()}
    gens, orders, rels = [], [], []
    for g in range(h):
        if g in vec:
            continue
        x, m = g, 1
        while x not in vec:
            x = table[x][g]
            m += 1
        rels.append(vec[x])
        new: dict[int, tuple[int, ...]] = {}
        p = 0
        for j in range(m):
            for el, v in vec.items():
                new[table[el][p]] = v + (j,)
            p = table[p][g]
        vec = new
        gens.append(g)
        orders.append(m)
    k = len(gens)
    rels_pad = tuple(r + (0,) * (k - len(r)) for r in rels)
    return Polycyclic(tuple(gens), tuple(orders), rels_pad, tuple(vec[c] for c in range(h)))


def _character_angles(pc: Polycyclic) -> list[tuple[Fraction, ...]]:
    """Angles theta_i (in turns) of every character on the generators."""
    chars: list[tuple[Fraction, ...]] = [()]
    for i, m in enumerate(pc.orders):
        nxt = []
        for th in chars:
            target = sum((e * t for e, t in zip(pc.rels[i], th)), Fraction(0))
            for k in range(m):
                nxt.append(th + (((target + k) / m) % 1,))
        chars = nxt
    return chars


@dataclass(eq=False)
class RayClassData:
    field: FieldContext
    modulus: Ideal
    reps: list[Ideal]  # integral ideal in each class (class 0 = identity)
    rep_generators: list[AlgInt]
    table: list[list[int]]
    characters: list[tuple[Fraction, ...]]  # angles on the polycyclic generators
    poly: Polycyclic
    ring: ResidueRing
    class_of_image: dict  # image -> class index
    units: list[_UnitImage]  # image of O^* in G, one entry per image
    unit_log_ratio: float
    canon: list[Image]

    @property
    def h(self) -> int:
        return len(self.reps)

    def image(self, x: AlgInt) -> Image:
        u, v = self.ring.reduce(x.a, x.b)
        return (u, v, _exact_signs(x))

    def mul_image(self, x: Image, y: Image) -> Image:
        u, v = self.ring.mul((x[0], x[1]), (y[0], y[1]))
        return (u, v, tuple(a * b for a, b in zip(x[2], y[2])))

    def inv_image(self, x: Image) -> Image:
        u, v = self.ring.inverse((x[0], x[1]))
        return (u, v, x[2])

    def class_of_element(self, x: AlgInt) -> int:
        """Class of the principal ideal (x); -1 if x is not prime to the modulus."""
        return self.class_of_image.get(self.image(x), -1)

    def class_of_ideal(self, J: Ideal) -> int:
        g = find_generator(J)
        if g is None:  # pragma: no cover - excluded by the class-number check
            raise NotImplementedError("non-principal ideal")
        return self.class_of_element(g)

    def chi(self, index: int, tau: int) -> complex:
        th = self.characters[index]
        ang = sum((v * t for v, t in zip(self.poly.vec[tau], th)), Fraction(0))
        return cmath.exp(2j * math.pi * float(ang % 1))

    def character_table(self) -> np.ndarray:
        return np.array([[self.chi(i, t) for t in range(self.h)] for i in range(self.h)])

    def is_trivial_character(self, index: int) -> bool:
        return all(t == 0 for t in self.characters[index])

    def unit_for_image(self, img: Image) -> _UnitImage | None:
        for u in self.units:
            if u.image == img:
                return u
        return None

    def as_dict(self) -> dict:
        return {
            "field_D": self.field.D,
            "modulus": repr(self.modulus),
            "order": self.h,
            "representatives": [repr(I) for I in self.reps],
            "representative_norms": [I.norm for I in self.reps],
            "table": self.table,
            "generators": list(self.poly.gens),
            "relative_orders": list(self.poly.orders),
            "characters": [[str(t) for t in th] for th in self.characters],
        }


def _unit_images(F: FieldContext, R: ResidueRing) -> tuple[list[_UnitImage], float]:
    def img(x: AlgInt) -> Image:
        u, v = R.reduce(x.a, x.b)
        return (u, v, _exact_signs(x))

    minus = AlgInt(F, -1, 0)
    out: dict[Image, _UnitImage] = {}
    if F.degree == 1:
        for s in (0, 1):
            x = minus if s else F.one
            out.setdefault(img(x), _UnitImage(s, 0, img(x)))
        return list(out.values()), 0.0
    eps = F.unit
    x = F.one
    k = 0
    while True:
        fresh = False
        for s in (0, 1):
            y = -x if s else x
            key = img(y)
            if key not in out:
                out[key] = _UnitImage(s, k, key)
                fresh = True
        if not fresh and k > 0:
            break
        x = x * eps
        k += 1
    return list(out.values()), _log_ratio(eps)


@lru_cache(maxsize=64)
def ray_class_group(F: FieldContext, q: Ideal, prime_bound: int = DEFAULT_PRIME_BOUND) -> RayClassData:
    """Strict ray class group I_q / F_q.

    Every ideal prime to q is principal, so its class is the image of a
    generator in G = (O/q)^* x {+-1}^d modulo the image of the units.
    Representatives are the smallest prime ideals found in each class.
    """
    if q.norm > MAX_MODULUS_NORM:
        raise ValueError(f"N(q) = {q.norm} exceeds the desk-scale limit {MAX_MODULUS_NORM}")
    _check_class_number_one(F)
    R = ResidueRing(q)
    units, unit_lr = _unit_images(F, R)

    def key(img: Image) -> tuple:
        return (img[0], img[1], tuple(-s for s in img[2]))

    sign_vectors = [(1,), (-1,)] if F.degree == 1 else [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    cosets: dict[Image, Image] = {}
    for res in R.elements():
        if not R.is_unit(res):
            continue
        for sg in sign_vectors:
            g = (res[0], res[1], sg)
            if g in cosets:
                continue
            members = []
            for u in units:
                uu, vv = R.mul(res, (u.image[0], u.image[1]))
                members.append((uu, vv, tuple(a * b for a, b in zip(sg, u.image[2]))))
            c = min(members, key=key)
            for m in members:
                cosets[m] = c
    one = (R.reduce(1, 0)[0], R.reduce(1, 0)[1], sign_vectors[0])
    canon = sorted(set(cosets.values()), key=lambda c: (c != cosets[one], key(c)))
    index = {c: i for i, c in enumerate(canon)}
    class_of_image = {g: index[c] for g, c in cosets.items()}
    h = len(canon)

    def cmul(i: int, j: int) -> int:
        a, b = canon[i], canon[j]
        uu, vv = R.mul((a[0], a[1]), (b[0], b[1]))
        return class_of_image[(uu, vv, tuple(x * y for x, y in zip(a[2], b[2])))]

    table = [[cmul(i, j) for j in range(h)] for i in range(h)]

    reps: list[Ideal | None] = [None] * h
    gens: list[AlgInt | None] = [None] * h
    reps[0], gens[0] = unit_ideal(F), F.one
    missing = h - 1
    if missing:
        for P in prime_ideals_up_to(F, prime_bound):
            if not ideal_sum(P.ideal, q).is_one():
                continue
            g = find_generator(P.ideal)
            c = class_of_image[(*R.reduce(g.a, g.b), _exact_signs(g))]
            if reps[c] is None:
                reps[c], gens[c] = P.ideal, g
                missing -= 1
                if not missing:
                    break
    if missing:
        raise RayClassError(f"{missing} ray classes have no prime of norm <= {prime_bound}; raise the bound")
    pc = _polycyclic(table)
    return RayClassData(F, q, reps, gens, table, _character_angles(pc), pc, R, class_of_image,
                        units, unit_lr, canon)


def orthogonality_defect(rc: RayClassData) -> float:
    """max |sum_chi chi(t) conj chi(t') - h [t = t']| over all class pairs."""
    T = rc.character_table()
    G = T.T @ T.conj()
    return float(np.max(np.abs(G - rc.h * np.eye(rc.h))))


# ---------------------------------------------------------------------------
# mu lattice and Hecke characters


def mu_lattice(F: FieldContext, q: Ideal) -> tuple[float, ...]:
    """Basis vector of the lattice of admissible mu.

    The condition is |eps|^{2i mu} = 1 for every unit eps = 1 mod q, so that
    c -> |c|^{-2i mu} is well defined on c modulo those units; with
    mu = (m, -m) this reads m in (pi / (2 log|g|)) Z, g the generator.
    """
    if F.degree == 1:
        return (0.0,)
    if F.degree != 2:  # pragma: no cover
        raise ValueError("only degrees 1 and 2")
    g = congruence_unit_group(F, q).gen
    m = math.pi / abs(_log_ratio(g))
    return (m, -m)


def lattice_defect(F: FieldContext, q: Ideal, mu: Sequence[float]) -> float:
    """|prod_j |g_j|^{2i mu_j} - 1| for the generator g of units = 1 mod q."""
    if F.degree == 1:
        return 0.0 if mu[0] == 0 else abs(cmath.exp(2j * mu[0]) - 1)
    g = congruence_unit_group(F, q).gen
    e = g.embed()
    val = cmath.exp(2j * sum(m * math.log(abs(x)) for m, x in zip(mu, e)))
    return abs(val - 1)


@dataclass
class HeckeCharacter:
    """Unitary extension of xi -> prod_j |xi_j|^{2i mu_j} from F_q to I_q.

    The extension fixes the value on each polycyclic generator g_i as the
    principal m_i-th root forced by its relation; it is 1 whenever the
    relation leaves that freedom (in particular always when mu = 0).
    """

    rc: RayClassData
    mu1: float = 0.0
    conj: bool = False
    gen_values: list[complex] = field(default_factory=list)
    class_lr: list[float] = field(default_factory=list)
    class_value: list[complex] = field(default_factory=list)
    coset: dict = field(default_factory=dict)  # image -> (class, unit exponent k)

    @property
    def mu(self) -> tuple[float, ...]:
        return (self.mu1, -self.mu1) if self.rc.field.degree == 2 else (0.0,)

    @property
    def is_trivial(self) -> bool:
        return self.mu1 == 0.0

    def conjugate(self) -> HeckeCharacter:
        return HeckeCharacter(self.rc, self.mu1, not self.conj, self.gen_values, self.class_lr,
                              self.class_value, self.coset)

    def _phase(self, lr: float) -> complex:
        return cmath.exp(2j * self.mu1 * lr)

    def value_of_element(self, x: AlgInt) -> complex:
        """lambda((x)) for x prime to the modulus."""
        img = self.rc.image(x)
        tau, k = self.coset[img]
        lr = _log_ratio(x) - self.class_lr[tau] - k * self.rc.unit_log_ratio
        v = self.class_value[tau] * self._phase(lr)
        return v.conjugate() if self.conj else v

    def __call__(self, J: Ideal) -> complex:
        g = find_generator(J)
        if g is None:  # pragma: no cover
            raise NotImplementedError("non-principal ideal")
        return self.value_of_element(g)

    def vectorized(self, codes: np.ndarray, lr: np.ndarray, code_table: dict) -> np.ndarray:
        """Values for principal ideals given image codes and log ratios."""
        lut_tau = np.full(len(code_table["images"]), -1, dtype=np.int64)
        lut_k = np.zeros(len(code_table["images"]), dtype=np.int64)
        for c, img in enumerate(code_table["images"]):
            if img in self.coset:
                lut_tau[c], lut_k[c] = self.coset[img]
        tau = lut_tau[codes]
        ok = tau >= 0
        tt = np.where(ok, tau, 0)
        base = np.array(self.class_value)[tt]
        phase = np.exp(2j * self.mu1 * (lr - np.array(self.class_lr)[tt] - lut_k[codes] * self.rc.unit_log_ratio))
        out = np.where(ok, base * phase, 0)
        return out.conj() if self.conj else out


def hecke_character(rc: RayClassData, mu1: float = 0.0) -> HeckeCharacter:
    F = rc.field
    if F.degree == 1 and mu1 != 0:
        raise ValueError("over Q only mu = 0 is admissible")
    if F.degree == 2 and mu1 != 0:
        base = mu_lattice(F, rc.modulus)[0]
        ratio = mu1 / base
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"mu1 = {mu1} is not in the lattice {base:.12g} Z")
    lam = HeckeCharacter(rc, mu1)
    pc = rc.poly
    k = len(pc.gens)
    # tracks (image, log ratio, lambda) of prod_j gamma_j^{v_j}
    g_img = [rc.image(rc.rep_generators[c]) for c in pc.gens]
    g_lr = [_log_ratio(rc.rep_generators[c]) for c in pc.gens]
    one_img = rc.image(F.one)

    def track(v: Sequence[int], vals: Sequence[complex]) -> tuple[Image, float, complex]:
        img, lr, val = one_img, 0.0, 1.0 + 0j
        for j, e in enumerate(v):
            for _ in range(e):
                img = rc.mul_image(img, g_img[j])
            lr += e * g_lr[j]
            val *= vals[j] ** e if e else 1.0
        return img, lr, val

    def unit_between(target: Image, base: Image) -> _UnitImage:
        u = rc.unit_for_image(rc.mul_image(target, rc.inv_image(base)))
        if u is None:  # pragma: no cover - same class means the quotient is a unit image
            raise RuntimeError("class tracking failed")
        return u

    vals: list[complex] = []
    for i in range(k):
        m = pc.orders[i]
        rel = pc.rels[i][:i] + (0,) * (k - i)
        b_img, b_lr, b_val = track(rel, vals + [1.0] * (k - i))
        p_img = one_img
        for _ in range(m):
            p_img = rc.mul_image(p_img, g_img[i])
        u = unit_between(p_img, b_img)
        lr = m * g_lr[i] - b_lr - u.k * rc.unit_log_ratio
        target = b_val * cmath.exp(2j * mu1 * lr)
        ang = cmath.phase(target)
        vals.append(cmath.exp(1j * ang / m) if abs(ang) > 1e-15 else 1.0 + 0j)
    lam.gen_values = vals
    for tau in range(rc.h):
        img, lr, val = track(pc.vec[tau] + (0,) * (k - len(pc.vec[tau])), vals)
        lam.class_lr.append(lr)
        lam.class_value.append(val)
        for u in rc.units:
            lam.coset[rc.mul_image(img, u.image)] = (tau, u.k)
    return lam


# ---------------------------------------------------------------------------
# Enumeration of principal ideals (one generator each)


@dataclass
class IdealTable:
    """All integral ideals prime to nothing in particular, N <= bound, one
    generator per ideal: coordinates, norms, log ratios."""

    a: np.ndarray
    b: np.ndarray
    norm: np.ndarray
    lr: np.ndarray
    bound: int


@lru_cache(maxsize=8)
def ideal_table(F: FieldContext, bound: int) -> IdealTable:
    if bound > MAX_SUM_NORM:
        raise ValueError(f"norm bound {bound} exceeds {MAX_SUM_NORM}")
    if F.degree == 1:
        n = np.arange(1, bound + 1, dtype=np.int64)
        z = np.zeros_like(n)
        return IdealTable(n, z, n, np.zeros(len(n)), bound)
    _check_class_number_one(F)
    t, nn = F.t, F.n
    w1, w2 = F.sigma
    eps = F.unit
    g = abs(eps.embed()[0])
    R1 = g * math.sqrt(bound) * (1 + 1e-9)
    R2 = math.sqrt(bound) * (1 + 1e-9)
    ui = eps.unit_inverse()
    ymax = int((R1 + R2) / F.sqrt_disc) + 1
    As, Bs = [], []
    for y in range(-ymax, ymax + 1):
        lo = max(-R1 - y * w1, -R2 - y * w2)
        hi = min(R1 - y * w1, R2 - y * w2)
        if hi < lo:
            continue
        x = np.arange(math.floor(lo) - 1, math.ceil(hi) + 2, dtype=np.int64)
        As.append(x)
        Bs.append(np.full(len(x), y, dtype=np.int64))
    A = np.concatenate(As)
    Bc = np.concatenate(Bs)
    N = A * A + t * A * Bc - nn * Bc * Bc
    keep = (N != 0) & (np.abs(N) <= bound)
    A, Bc, N = A[keep], Bc[keep], N[keep]
    # fundamental domain: ratio |x1/x2| in [1, eps^2), first embedding positive
    tr = 2 * A + t * Bc
    r1 = Bc * tr >= 0
    a2 = A * ui.a + Bc * ui.b * nn
    b2 = A * ui.b + Bc * ui.a + Bc * ui.b * t
    r2 = b2 * (2 * a2 + t * b2) >= 0
    e1 = A + Bc * w1
    keep = r1 & ~r2 & (e1 > 0)
    A, Bc, N, e1 = A[keep], Bc[keep], np.abs(N[keep]), e1[keep]
    lr = 2.0 * np.log(np.abs(e1)) - np.log(N.astype(float))
    order = np.lexsort((Bc, A, N))
    return IdealTable(A[order], Bc[order], N[order], lr[order], bound)


def _image_codes(rc: RayClassData, tab: IdealTable) -> tuple[np.ndarray, dict]:
    """Integer code of the image of each generator (-1 if not prime to q)."""
    F = rc.field
    I = rc.modulus
    A, Bc = tab.a, tab.b
    if F.degree == 1:
        u = A % I.a
        v = np.zeros_like(u)
        sig = np.zeros((len(A), 1), dtype=np.int64)  # generators are positive
    else:
        k = Bc // I.c
        u = (A - k * I.b) % I.a
        v = Bc - k * I.c
        if F.D % 4 == 1:
            P, Q = 2 * A + Bc, Bc
        else:
            P, Q = A, Bc
        sig = np.zeros((len(A), 2), dtype=np.int64)
        for j, sgn in enumerate((1, -1)):
            Qs = sgn * Q
            big = P * P > Q * Q * F.D
            pos = np.where(big, P > 0, Qs > 0)
            sig[:, j] = np.where(pos, 0, 1)
    images: list[Image] = []
    lookup: dict[tuple[int, int, int], int] = {}
    nd = F.degree
    for img in rc.class_of_image:
        scode = sum((0 if s > 0 else 1) << j for j, s in enumerate(img[2]))
        lookup[(img[0], img[1], scode)] = len(images)
        images.append(img)
    scode_arr = sig[:, 0] if nd == 1 else sig[:, 0] + 2 * sig[:, 1]
    size_u, size_v = I.a, (I.c if nd == 2 else 1)
    lut = np.full(size_u * size_v * (1 << nd), -1, dtype=np.int64)
    for (uu, vv, sc), c in lookup.items():
        lut[(uu * size_v + vv) * (1 << nd) + sc] = c
    codes = lut[(u * size_v + v) * (1 << nd) + scode_arr]
    return codes, {"images": images}


@lru_cache(maxsize=32)
def _class_arrays(rc: RayClassData, bound: int) -> tuple[IdealTable, np.ndarray, dict, np.ndarray]:
    tab = ideal_table(rc.field, bound)
    codes, ctab = _image_codes(rc, tab)
    lut = np.array([rc.class_of_image[img] for img in ctab["images"]], dtype=np.int64)
    classes = np.where(codes >= 0, lut[np.maximum(codes, 0)], -1)
    return tab, codes, ctab, classes


def _values(rc: RayClassData, lam: HeckeCharacter, bound: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(norms, classes, lambda values) for all ideals with norm <= bound."""
    tab, codes, ctab, classes = _class_arrays(rc, bound)
    if lam.is_trivial:
        vals = np.where(classes >= 0, 1.0 + 0j, 0j)
    else:
        vals = lam.vectorized(np.maximum(codes, 0), tab.lr, ctab)
        vals = np.where(classes >= 0, vals, 0j)
    return tab.norm, classes, vals


def s_lambda(rc: RayClassData, tau: int, lam: HeckeCharacter, n: int) -> complex:
    """Sum of lambda(b) over integral ideals b in the class tau with N(b) <= n."""
    if n > MAX_SUM_NORM:
        raise ValueError(f"n = {n} exceeds {MAX_SUM_NORM}")
    if n < 1:
        return 0j
    norms, classes, vals = _values(rc, lam, n)
    return complex(np.sum(vals[classes == tau]))


def s_lambda_profile(rc: RayClassData, tau: int, lam: HeckeCharacter, n: int) -> np.ndarray:
    """s_lambda(k) for k = 0..n as an array."""
    norms, classes, vals = _values(rc, lam, n)
    sel = classes == tau
    acc = np.zeros(n + 1, dtype=complex)
    np.add.at(acc, norms[sel], vals[sel])
    return np.cumsum(acc)


def class_density(rc: RayClassData) -> float:
    """Asymptotic number of ideals per unit norm in one ray class.

    Ideals prime to q have density kappa * phi(q)/N(q), kappa the residue of
    the Dedekind zeta function, and they equidistribute over the h classes.
    """
    F = rc.field
    frac = 1.0
    for P, _ in (factor_ideal(rc.modulus) if not rc.modulus.is_one() else []):
        frac *= 1 - 1 / P.norm
    kappa = 1.0 if F.degree == 1 else 2.0 * F.unit_regulator() / F.sqrt_disc
    return kappa * frac / rc.h


# ---------------------------------------------------------------------------
# L-functions


def _hurwitz_parts(s: complex, x: float, M: int) -> tuple[complex, complex]:
    """zeta(s, x) = H + P/(s-1) with P = (M+x)^{1-s}; Euler-Maclaurin at M."""
    k = np.arange(M, dtype=float) + x
    H = complex(np.sum(np.exp(-s * np.log(k))))
    y = M + x
    H += y ** (-s) / 2
    coef = s
    powr = y ** (-s - 1)
    fact = 2.0
    for j in range(1, EM_TERMS + 1):
        H += float(_BERNOULLI[j - 1]) / fact * coef * powr
        coef *= (s + 2 * j - 1) * (s + 2 * j)
        powr /= y * y
        fact *= (2 * j + 1) * (2 * j + 2)
    return H, y ** (1 - s)


def _hurwitz_log(x: float, M: int) -> float:
    return math.log(M + x)


def hurwitz_zeta(s: complex, x: float) -> complex:
    if s == 1:
        raise ZeroDivisionError("pole at s = 1")
    M = int(30 + abs(complex(s).imag))
    H, P = _hurwitz_parts(s, x, M)
    return H + P / (s - 1)


@dataclass(frozen=True)
class LValue:
    value: complex
    error: float
    method: str
    truncation: int


def _l_rational(rc: RayClassData, chi_index: int, s: complex, conj_chi: bool) -> LValue:
    qn = rc.modulus.a
    M = int(30 + abs(s.imag))
    total = 0j
    pole = 0j
    finite_at_one = 0j
    for a in range(1, qn + 1):
        if math.gcd(a, qn) != 1:
            continue
        tau = rc.class_of_image[(a % qn, 0, (1,))]
        c = rc.chi(chi_index, tau)
        if conj_chi:
            c = c.conjugate()
        H, P = _hurwitz_parts(s, a / qn, M)
        scale = qn ** (-s)
        total += c * scale * H
        pole += c * scale * P
        finite_at_one -= c * math.log(M + a / qn) / qn
    if s == 1:
        if rc.is_trivial_character(chi_index):
            raise ZeroDivisionError("pole of the trivial L-function at s = 1")
        return LValue(total + finite_at_one, 1e-12, "hurwitz-euler-maclaurin", M)
    return LValue(total + pole / (s - 1), 1e-12, "hurwitz-euler-maclaurin", M)


def _default_truncation(s: complex, tol: float) -> int:
    sigma = s.real
    # |error| ~ C (|s|/(sigma - 1/2) + 1) N^{1/2 - sigma} with C ~ 1
    need = ((abs(s) / (sigma - 0.5) + 1) / tol) ** (1 / (sigma - 0.5))
    return int(min(MAX_SUM_NORM // 4, max(2000, need)))


def l_function(rc: RayClassData, lam: HeckeCharacter, chi_index: int, s: complex, *,
               N: int | None = None, tol: float | None = L_TARGET_TOL, conj_chi: bool = False) -> LValue:
    """L(s, lam, chi) = sum over ideals prime to q of lam(b) chi(b) N(b)^{-s}.

    Pass lam.conjugate() for L(s, conj lam, chi).  Over Q the class sums are
    Hurwitz zeta values (Euler-Maclaurin).  For quadratic fields partial
    summation is used up to N, the tail being the main term of the class
    counts; the error estimate is C (|s|/(sigma-1/2) + 1) N^{1/2-sigma} with
    C = max |s_lambda(n) - alpha n| / sqrt(n) over the computed range.
    """
    s = complex(s)
    if s.real < 1:
        raise ValueError("Re s >= 1 required")
    trivial_pair = lam.is_trivial and rc.is_trivial_character(chi_index)
    if s == 1 and trivial_pair:
        raise ZeroDivisionError("pole at s = 1 for the trivial pair")
    if rc.field.degree == 1:
        return _l_rational(rc, chi_index, s, conj_chi)
    if N is None:
        N = _default_truncation(s, tol or L_TARGET_TOL)
    norms, classes, vals = _values(rc, lam, N)
    chis = np.array([rc.chi(chi_index, t) for t in range(rc.h)])
    if conj_chi:
        chis = chis.conj()
    ok = classes >= 0
    coef = np.where(ok, vals * chis[np.maximum(classes, 0)], 0)
    head = complex(np.sum(coef * np.exp(-s * np.log(norms.astype(float)))))
    # main term of the counting function: only the trivial pair has alpha != 0
    alpha = class_density(rc) * rc.h if trivial_pair else 0.0
    acc = np.zeros(N + 1, dtype=complex)
    np.add.at(acc, norms, coef)
    S = np.cumsum(acc)
    n = np.arange(N + 1, dtype=float)
    E = S - alpha * n
    C = float(np.max(np.abs(E[1:]) / np.sqrt(n[1:])))
    tail = alpha * N ** (1 - s) / (s - 1) if alpha else 0j
    err = C * (abs(s) / (s.real - 0.5) + 1) * N ** (0.5 - s.real)
    val = LValue(head + tail, err, "partial-summation", N)
    if tol is not None and err > tol:
        raise AccuracyError(f"L error estimate {err:.2e} > tol {tol:.1e} at N = {N}")
    return val


@dataclass
class LowerBoundReport:
    constant: float
    refined_constant: float
    argmin_t: float
    rows: list[tuple[float, float]]

    @property
    def stable(self) -> bool:
        return self.constant > 0 and abs(self.refined_constant / self.constant - 1) <= 0.5


def log_weight(t: float, lam: HeckeCharacter) -> float:
    """log^7(2+|t|), plus log^7 max(2, |mu|) when lambda is nontrivial."""
    w = math.log(2 + abs(t)) ** 7
    if not lam.is_trivial:
        w += math.log(max(2.0, math.hypot(*lam.mu))) ** 7
    return w


def l_lower_bound_check(rc: RayClassData, lam: HeckeCharacter, chi_index: int, t_grid: Sequence[float], *,
                        tol: float | None = L_TARGET_TOL) -> LowerBoundReport:
    """min over the grid of |L(1+it)| times the log^7 weight, and the same on
    the grid refined by inserting midpoints."""
    ts = sorted(float(t) for t in t_grid)
    if any(abs(t) > 50 for t in ts):
        raise ValueError("grid must lie within |t| <= 50")

    def prod(t: float) -> float:
        return abs(l_function(rc, lam, chi_index, 1 + 1j * t, tol=tol).value) * log_weight(t, lam)

    rows = [(t, prod(t)) for t in ts]
    mids = [(a + b) / 2 for a, b in zip(ts, ts[1:])]
    fine = rows + [(t, prod(t)) for t in mids]
    c0 = min(rows, key=lambda r: r[1])
    c1 = min(r[1] for r in fine)
    return LowerBoundReport(c0[1], c1, c0[0], rows)


# ---------------------------------------------------------------------------
# Moebius function on ideals (from the generator table)


def _spf(n: int) -> np.ndarray:
    """Smallest prime factor table for 0..n."""
    spf = np.arange(n + 1, dtype=np.int64)
    for p in range(2, int(math.isqrt(n)) + 1):
        if spf[p] == p:
            blk = spf[p * p::p]
            np.minimum(blk, p, out=blk)
    return spf


def _ideal_mobius(F: FieldContext, a: np.ndarray, b: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """Moebius function of the ideals (a + b w), read off the norm factorization:
    a split prime p with p^2 || N is squarefree exactly when p divides the generator."""
    spf = _spf(int(norms.max()) if len(norms) else 1)
    kinds: dict[int, int] = {}
    out = np.zeros(len(norms), dtype=np.int64)
    for i in range(len(norms)):
        n = int(norms[i])
        mu = 1
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if F.degree == 1:
                kind = 0
            else:
                kind = kinds.get(p)
                if kind is None:
                    kind = kinds[p] = kronecker(F.disc, p)
            if kind == 0:
                if e > 1:
                    mu = 0
                    break
                mu = -mu
            elif kind == -1:
                if e != 2:
                    mu = 0
                    break
                mu = -mu
            elif e == 1:
                mu = -mu
            elif not (e == 2 and a[i] % p == 0 and b[i] % p == 0):
                mu = 0
                break
        out[i] = mu
    return out


@lru_cache(maxsize=8)
def _mobius_array(F: FieldContext, bound: int) -> np.ndarray:
    tab = ideal_table(F, bound)
    return _ideal_mobius(F, tab.a, tab.b, tab.norm)


# ---------------------------------------------------------------------------
# Q, psi and Phi


@dataclass(frozen=True)
class QValue:
    value: complex
    route: str
    truncation: int
    error: float


def q_factor(rc: RayClassData, lam: HeckeCharacter, tau: int, nu: complex, *, route: str = "L",
             N: int | None = None, tol: float | None = L_TARGET_TOL) -> QValue:
    """Q(nu, lam; tau) = sum_{b in tau} mu_q(b) N(b)^{-1-2nu} lam(b)^{-1}.

    route="L": (1/h) sum_chi conj chi(tau) / L(1+2nu, conj lam, chi).
    route="mobius": the series itself truncated at N(b) <= N.
    """
    nu = complex(nu)
    if nu.real < 0:
        raise ValueError("Re nu >= 0 required")
    s = 1 + 2 * nu
    if route == "L":
        total = 0j
        err = 0.0
        trunc = 0
        lbar = lam.conjugate()
        for i in range(rc.h):
            try:
                L = l_function(rc, lbar, i, s, tol=tol, N=N)
            except ZeroDivisionError:
                continue  # pole: 1/L vanishes
            total += rc.chi(i, tau).conjugate() / L.value
            err += L.error / max(abs(L.value) - L.error, 1e-300) / abs(L.value)
            trunc = max(trunc, L.truncation)
        return QValue(total / rc.h, "L", trunc, err / rc.h)
    if route != "mobius":
        raise ValueError(f"unknown route {route!r}")
    if nu.real <= 0:
        raise ValueError("the Moebius series needs Re nu > 0")
    N = N or 10**5
    norms, classes, vals = _values(rc, lam, N)
    mob = _mobius_array(rc.field, N)
    sel = (classes == tau) & (mob != 0)
    terms = mob[sel] * np.exp(-s * np.log(norms[sel].astype(float))) * vals[sel].conj()
    # tail: at most (ideal density) * N^{-2 Re nu} / (2 Re nu)
    dens = class_density(rc) * rc.h
    tail = dens * N ** (-2 * nu.real) / (2 * nu.real)
    return QValue(complex(math.fsum(terms.real) + 1j * math.fsum(terms.imag)), "mobius", N, tail)


def _scaled_ideal(r: FieldElem, J: Ideal) -> Ideal:
    """The integral ideal r * diff * J (r must lie in the inverse different)."""
    F = J.field
    gens = []
    for x in J.basis():
        y = r.num * F.different * x
        if y.a % r.den or y.b % r.den:
            raise ValueError("r * different * J is not integral")
        gens.append(AlgInt(F, y.a // r.den, y.b // r.den))
    return ideal_from_gens(F, gens)


def _divisors(I: Ideal) -> list[Ideal]:
    F = I.field
    fac = factor_ideal(I) if not I.is_one() else []
    out = [unit_ideal(F)]
    for P, e in fac:
        nxt = []
        for D in out:
            X = D
            for _ in range(e + 1):
                nxt.append(X)
                X = ideal_product(X, P.ideal)
        out = nxt
    return out


def _unit_coset_reps(F: FieldContext, q: Ideal) -> list[AlgInt]:
    """Representatives of O^* modulo the units = 1 mod q."""
    U = congruence_unit_group(F, q)
    signs = [F.one] if U.has_minus else [F.one, AlgInt(F, -1, 0)]
    if F.degree == 1:
        return signs
    eps = F.unit
    target = abs(math.log(abs(U.gen.embed()[0])))
    K = int(round(target / math.log(eps.embed()[0])))
    out = []
    x = F.one
    for _ in range(K):
        for s in signs:
            out.append(x * s)
        x = x * eps
    return out


def _phase_turns(r: FieldElem, d: AlgInt, c: AlgInt) -> Fraction:
    """Tr(r d / c) modulo 1."""
    num = (r.num * d * c.conj()).trace() if c.field.degree == 2 else r.num.a * d.a
    den = r.den * (c.norm() if c.field.degree == 2 else c.a)
    return Fraction(num, den) % 1


def _mu_phase(x: AlgInt, mu1: float) -> complex:
    """|x|^{-2i mu}."""
    return cmath.exp(-2j * mu1 * _log_ratio(x)) if mu1 else 1.0 + 0j


def _lift_delta(q: Ideal, M: Ideal, delta: AlgInt) -> AlgInt:
    """delta' = delta mod q and delta' = 0 mod M (q, M coprime)."""
    for y in _small_elements(M, q):
        return y * delta
    raise ValueError("modulus and ideal are not coprime")  # pragma: no cover


def _small_elements(M: Ideal, q: Ideal):
    """Elements y of M with y = 1 mod q."""
    F = M.field
    if q.is_one():
        yield AlgInt(F, 0, 0)
        return
    R = ResidueRing(q)
    one = R.reduce(1, 0)
    basis = M.basis()
    rng = range(q.norm + 1)
    if F.degree == 1:
        for i in rng:
            y = basis[0] * i
            if R.reduce(y.a, y.b) == one:
                yield y
                return
        return
    for i in rng:
        for j in rng:
            y = basis[0] * i + basis[1] * j
            if R.reduce(y.a, y.b) == one:
                yield y
                return


def psi_factor(F: FieldContext, q: Ideal, r: FieldElem, a_ideal: Ideal, b0: Ideal, gamma: AlgInt,
               delta: AlgInt, nu: complex, mu1: float = 0.0) -> complex:
    """psi_r^{b0}(nu + i mu; gamma, delta).

    Sum over c with a b0 | (c) | r diff q a b0, c = gamma mod q, c modulo the
    units = 1 mod q, of |N c|^{-2nu} |c|^{-2i mu} N(a b0)^{-1} e(Tr(r delta'/c)),
    where delta' = delta mod q and delta' = 0 mod a b0.  The phase is the
    common value of the additive character on the class of d mod q a b0.
    """
    nu = complex(nu)
    if not ideal_sum(a_ideal, q).is_one() or not ideal_sum(b0, q).is_one():
        raise ValueError("a and b0 must be prime to q")
    ab = ideal_product(a_ideal, b0)
    M = _scaled_ideal(r, ideal_product(q, ab))
    dprime = _lift_delta(q, ab, delta)
    reps = _unit_coset_reps(F, q)
    total = 0j
    for C in _divisors(M):
        if not ideal_divides(ab, C):
            continue
        g = find_generator(C)
        if g is None:  # pragma: no cover
            raise NotImplementedError("non-principal divisor")
        for u in reps:
            c = g * u
            if not q.contains(c - gamma):
                continue
            nc = abs(c.norm()) if F.degree == 2 else abs(c.a)
            ph = cmath.exp(2j * math.pi * float(_phase_turns(r, dprime, c)))
            total += nc ** (-2 * nu) * _mu_phase(c, mu1) * ph / ab.norm
    return total


def _hnf2(rows: list[list[int]]) -> tuple[int, int, int]:
    """Upper triangular basis (h11, h12, h22) of the row lattice in Z^2."""
    (x1, y1), (x2, y2) = rows
    # extended gcd on the first column
    a, b = x1, x2
    u0, v0, u1, v1 = 1, 0, 0, 1
    while b:
        k = a // b
        a, b = b, a - k * b
        u0, u1 = u1, u0 - k * u1
        v0, v1 = v1, v0 - k * v1
    g = a
    top = (g, u0 * y1 + v0 * y2)
    # the other combination kills the first column
    bot_y = u1 * y1 + v1 * y2
    if g < 0:
        top = (-g, -top[1])
    h22 = abs(bot_y)
    return top[0], top[1], h22


def _quotient_reps(L1: Ideal, L2: Ideal) -> tuple[AlgInt, AlgInt, int, int]:
    """(e1, e2, n1, n2): elements i e1 + j e2, 0 <= i < n1, 0 <= j < n2,
    represent L1 / L2 (L2 inside L1)."""
    F = L1.field
    if F.degree == 1:
        return AlgInt(F, L1.a, 0), AlgInt(F, 0, 0), L2.a // L1.a, 1
    e1, e2 = L1.basis()
    rows = []
    for f in L2.basis():
        y = f.b // e2.b
        x = (f.a - y * e2.a) // e1.a
        rows.append([x, y])
    h11, h12, h22 = _hnf2(rows)
    return e1, e2, h11, h22


def _not_in_mask(I: Ideal, A: np.ndarray, Bc: np.ndarray) -> np.ndarray:
    if I.field.degree == 1:
        return A % I.a != 0
    k = Bc // I.c
    inside = (Bc % I.c == 0) & ((A - k * I.b) % I.a == 0)
    return ~inside


def _direct_c_term(F, q, r, a_ideal, gamma_delta, c, nu, mu1):
    gamma, delta = gamma_delta
    qa = ideal_product(q, a_ideal)
    qc = ideal_product(q, principal(c))
    e1, e2, n1, n2 = _quotient_reps(qa, qc)
    i = np.repeat(np.arange(n1, dtype=np.int64), n2)
    j = np.tile(np.arange(n2, dtype=np.int64), n1)
    A = delta.a + i * e1.a + j * e2.a
    Bc = delta.b + i * e1.b + j * e2.b
    keep = np.ones(len(A), dtype=bool)
    # O c + O d = a: at each prime where c exceeds a, d must not
    for P, e in factor_ideal(principal(c)):
        va = valuation(P, a_ideal)
        if e > va:
            keep &= _not_in_mask(ideal_power(P.ideal, va + 1), A, Bc)
    A, Bc = A[keep], Bc[keep]
    # Tr(r d conj c) is linear in (a, b) of d
    if F.degree == 1:
        T0 = r.num.a * c.a
        phase_num = A * T0
        den = r.den * c.a * c.a
    else:
        rc_ = r.num * c.conj()
        t_a = rc_.trace()
        t_b = (rc_ * F.omega).trace()
        phase_num = A * t_a + Bc * t_b
        den = r.den * c.norm()
    sgn = -1 if den < 0 else 1
    den = abs(den)
    turns = (sgn * phase_num) % den
    ssum = np.sum(np.exp(2j * np.pi * turns / den))
    nc = abs(c.norm()) if F.degree == 2 else abs(c.a)
    return complex(nc ** (-1 - 2 * nu) * _mu_phase(c, mu1) * ssum)


@dataclass
class DirichletPieces:
    nu: complex
    mu1: float
    psi: list[complex]
    q_values: list[QValue]
    phi_tau: list[complex]
    phi: complex
    b0: list[str]
    direct: complex | None = None
    direct_B: float | None = None
    direct_tail: float | None = None
    extension_note: str = "lambda on polycyclic generators: principal root of the relation value (1 when free)"


def phi_direct(F: FieldContext, q: Ideal, r: FieldElem, gamma: AlgInt, delta: AlgInt, nu: complex,
               mu1: float = 0.0, B: float = 2000) -> tuple[complex, float]:
    """Direct double sum over pairs (c, d) truncated at |N(c)| <= B, with a
    (coarse) tail majorant."""
    nu = complex(nu)
    a_ideal = ideal_from_gens(F, [gamma, delta])
    if not ideal_sum(a_ideal, q).is_one():
        raise ValueError("a = (gamma, delta) must be prime to q")
    U = congruence_unit_group(F, q)
    cs = enumerate_ideal_elements(a_ideal, B, "units", U)
    total = 0j
    for c in cs:
        if not q.contains(c - gamma):
            continue
        total += _direct_c_term(F, q, r, a_ideal, (gamma, delta), c, nu, mu1)
    tail = _direct_tail(F, q, r, nu.real, B)
    return total, tail


def _direct_tail(F: FieldContext, q: Ideal, r: FieldElem, sigma_nu: float, B: float) -> float:
    """Majorant of the pairs with |N(c)| > B.

    Each inner sum is bounded by N(r diff q) times the number of ideal
    divisors of (c); summed over the c of norm n this is at most tau(n)^k
    per unit coset (k = 1 over Q, 3 for quadratic fields).  Over Q,
    sum_{n <= x} tau(n) <= x (1 + log x); for k = 3, tau^3 <= tau_8 gives
    sum_{n <= x} tau(n)^3 <= x (1 + log x)^8.  Partial summation against
    n^{-1-2 Re nu} gives the integral below.
    """
    Mn = _scaled_ideal(r, q).norm
    ncos = len(_unit_coset_reps(F, q))
    power = 1 if F.degree == 1 else 8
    sigma = 1 + 2 * sigma_nu
    val, _ = integrate.quad(lambda x: x ** (-sigma) * (1 + math.log(x)) ** power, B, math.inf, limit=200)
    return Mn * ncos * sigma * val


def phi_series(F: FieldContext, q: Ideal, r: FieldElem, gamma: AlgInt, delta: AlgInt, nu: complex,
               mu1: float = 0.0, *, direct_B: float | None = None, q_route: str = "L",
               q_tol: float | None = L_TARGET_TOL, rc: RayClassData | None = None) -> DirichletPieces:
    """Phi_r(nu + i mu; gamma, delta) = sum_tau lam(b0) N(b0)^{1+2nu} Q(nu, lam; tau) psi^{b0}."""
    nu = complex(nu)
    rc = rc or ray_class_group(F, q)
    lam = hecke_character(rc, mu1)
    a_ideal = ideal_from_gens(F, [gamma, delta])
    psis, qs, parts = [], [], []
    for tau in range(rc.h):
        b0 = rc.reps[tau]
        psi = psi_factor(F, q, r, a_ideal, b0, gamma, delta, nu, mu1)
        Q = q_factor(rc, lam, tau, nu, route=q_route, tol=q_tol)
        lb0 = lam(b0)
        psis.append(psi)
        qs.append(Q)
        parts.append(lb0 * b0.norm ** (1 + 2 * nu) * Q.value * psi)
    phi = complex(math.fsum(p.real for p in parts) + 1j * math.fsum(p.imag for p in parts))
    out = DirichletPieces(nu, mu1, psis, qs, parts, phi, [repr(b) for b in rc.reps])
    if direct_B is not None:
        if nu.real < 0.5:
            raise ValueError("the direct double sum needs Re nu >= 1/2")
        out.direct, out.direct_tail = phi_direct(F, q, r, gamma, delta, nu, mu1, direct_B)
        out.direct_B = direct_B
    return out


def eisenstein_coeff_bound(F: FieldContext, q: Ideal, r: FieldElem, t: float, mu1: float = 0.0, *,
                           lower_constant: float | None = None) -> float:
    """Majorant for |Phi_r(it + i mu)| on Re nu = 0:

    sum_tau N(b0) |Q| |psi| with |Q| <= w(2t)/c_L (w the log^7 weight, c_L
    the lower-bound constant) and |psi| <= #cosets * tau(r diff q), the exact
    number of admissible (c).  tau(r diff q) is the quantity that the
    divisor bound O_eps((N(r) N(diff) N(q))^eps) majorizes.
    """
    rc = ray_class_group(F, q)
    lam = hecke_character(rc, mu1)
    if lower_constant is None:
        grid = [0.5 + 0.25 * k for k in range(199)]
        if F.degree == 1:
            lower_constant = min(
                l_lower_bound_check(rc, lam, i, grid).constant for i in range(rc.h))
        else:
            # quadratic L on Re s = 1 is only estimated; use a conservative floor
            lower_constant = 1e-2
    ncos = len(_unit_coset_reps(F, q))
    psi_bound = ncos * len(_divisors(_scaled_ideal(r, q)))
    w = math.log(2 + 2 * abs(t)) ** 7
    if mu1:
        w += math.log(max(2.0, math.hypot(mu1, mu1))) ** 7
    return sum(b.norm for b in rc.reps) * psi_bound * w / lower_constant
