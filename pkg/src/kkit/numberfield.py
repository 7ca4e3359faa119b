"""Exact arithmetic in Q and in real quadratic fields Q(sqrt D).

Elements of the ring of integers are stored by their integer coordinates
with respect to the basis {1, w}, where w = (1+sqrt D)/2 if D = 1 mod 4 and
w = sqrt D otherwise.  For D = 1 the field is Q and the second coordinate is
always zero.  Ideals are rank-d lattices kept in Hermite normal form.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

from kkit import _cache

COORD_LIMIT = 1 << 60


class ArithmeticRangeError(OverflowError):
    """A coordinate left the exact range supported by the element type."""


def _is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    for p, e in _cache.factorint(n).items():
        if e > 1:
            return False
    return True


class FieldContext:
    """Q (D=1) or the real quadratic field Q(sqrt D) with its standard data."""

    __slots__ = ("D", "degree", "disc", "t", "n", "sigma", "_unit", "unit_norm", "_different")

    def __init__(self, D: int):
        if not _is_squarefree(D):
            raise ValueError(f"D={D} is not a squarefree positive integer")
        self.D = D
        if D == 1:
            self.degree = 1
            self.disc = 1
            self.t, self.n = 0, 0
            self.sigma = (0.0,)
            self._unit = (-1, 0)
            self.unit_norm = -1
            self._different = (1, 0)
            return
        self.degree = 2
        root = math.sqrt(D)
        if D % 4 == 1:
            self.disc = D
            # w^2 = w + (D-1)/4
            self.t, self.n = 1, (D - 1) // 4
            self.sigma = ((1 + root) / 2, (1 - root) / 2)
            self._different = (-1, 2)  # 2w - 1 = sqrt D
        else:
            self.disc = 4 * D
            self.t, self.n = 0, D
            self.sigma = (root, -root)
            self._different = (0, 2)  # 2w = 2 sqrt D
        self._unit = _fundamental_unit(self)
        self.unit_norm = self.unit.norm()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldContext) and other.D == self.D

    def __hash__(self) -> int:
        return hash(("FieldContext", self.D))

    def __repr__(self) -> str:
        return "Q" if self.D == 1 else f"Q(sqrt {self.D})"

    # convenience constructors
    def elt(self, a: int, b: int = 0) -> AlgInt:
        return AlgInt(self, a, b)

    @property
    def one(self) -> AlgInt:
        return AlgInt(self, 1, 0)

    @property
    def omega(self) -> AlgInt:
        if self.degree == 1:
            raise ValueError("Q has no second basis element")
        return AlgInt(self, 0, 1)

    @property
    def unit(self) -> AlgInt:
        """Fundamental unit with first embedding > 1 (for Q: -1)."""
        return AlgInt(self, *self._unit)

    @property
    def different(self) -> AlgInt:
        """Generator of the different ideal; its norm is +-disc."""
        return AlgInt(self, *self._different)

    @property
    def sqrt_disc(self) -> float:
        return math.sqrt(self.disc)

    def unit_regulator(self) -> float:
        return math.log(self.unit.embed()[0]) if self.degree == 2 else 0.0


@lru_cache(maxsize=None)
def make_field(D: int) -> FieldContext:
    return FieldContext(D)


@dataclass(frozen=True, slots=True)
class AlgInt:
    """Integer a + b*w of a field (b == 0 when the field is Q)."""

    field: FieldContext
    a: int
    b: int = 0

    def __post_init__(self) -> None:
        if abs(self.a) >= COORD_LIMIT or abs(self.b) >= COORD_LIMIT:
            raise ArithmeticRangeError(f"coordinates ({self.a}, {self.b}) exceed 2^60")

    def __add__(self, other: AlgInt | int) -> AlgInt:
        if isinstance(other, int):
            return AlgInt(self.field, self.a + other, self.b)
        return AlgInt(self.field, self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self) -> AlgInt:
        return AlgInt(self.field, -self.a, -self.b)

    def __sub__(self, other: AlgInt | int) -> AlgInt:
        return self + (-other)

    def __rsub__(self, other: int) -> AlgInt:
        return (-self) + other

    def __mul__(self, other: AlgInt | int) -> AlgInt:
        if isinstance(other, int):
            return AlgInt(self.field, self.a * other, self.b * other)
        a, b, c, d = self.a, self.b, other.a, other.b
        F = self.field
        bd = b * d
        return AlgInt(F, a * c + bd * F.n, a * d + b * c + bd * F.t)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> AlgInt:
        if k < 0:
            return self.unit_inverse() ** (-k)
        result = self.field.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> AlgInt:
        # conj(w) = t - w
        return AlgInt(self.field, self.a + self.b * self.field.t, -self.b)

    def norm(self) -> int:
        F = self.field
        return self.a * self.a + self.a * self.b * F.t - self.b * self.b * F.n if F.degree == 2 else self.a

    def trace(self) -> int:
        return 2 * self.a + self.b * self.field.t if self.field.degree == 2 else self.a

    def embed(self) -> tuple[float, ...]:
        F = self.field
        if F.degree == 1:
            return (float(self.a),)
        return tuple(_embed_exact(self.a, self.b, F, j) for j in range(2))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def unit_inverse(self) -> AlgInt:
        nm = self.norm()
        if abs(nm) != 1:
            raise ValueError(f"{self} is not a unit")
        c = self.conj()
        return c * nm

    def exact_div(self, other: AlgInt) -> AlgInt:
        """self / other, which must lie in the ring."""
        nm = other.norm()
        num = self * other.conj()
        if num.a % nm or num.b % nm:
            raise ValueError(f"{other} does not divide {self}")
        return AlgInt(self.field, num.a // nm, num.b // nm)

    def __repr__(self) -> str:
        return format_elt(self)


def _embed_exact(a: int, b: int, F: FieldContext, j: int) -> float:
    # Avoid cancellation between a and b*w_j by using the conjugate when the
    # direct sum is small compared to its terms.
    direct = a + b * F.sigma[j]
    if b == 0 or abs(direct) > 1e-3 * (abs(a) + abs(b * F.sigma[j])):
        return float(direct)
    other = a + b * F.sigma[1 - j]
    nm = a * a + a * b * F.t - b * b * F.n
    return nm / other


def format_elt(x: AlgInt) -> str:
    if x.field.degree == 1 or x.b == 0:
        return str(x.a)
    wterm = "w" if abs(x.b) == 1 else f"{abs(x.b)}*w"
    if x.a == 0:
        return wterm if x.b > 0 else "-" + wterm
    sign = "+" if x.b > 0 else "-"
    return f"{x.a}{sign}{wterm}"


def parse_elt(F: FieldContext, text: str) -> AlgInt:
    """Parse the `a+b*w` grammar (terms in any order, e.g. `w`, `2-3*w`, `-w+1`)."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty element literal")
    a = b = 0
    pos = 0
    while pos < len(s):
        m = re.match(r"([+-]?)(\d*)(\*?w)?", s[pos:])
        if not m or m.end() == 0:
            raise ValueError(f"cannot parse element {text!r} at column {pos + 1}")
        sign = -1 if m.group(1) == "-" else 1
        digits, wpart = m.group(2), m.group(3)
        if not digits and not wpart:
            raise ValueError(f"cannot parse element {text!r} at column {pos + 1}")
        if wpart and wpart.startswith("*") and not digits:
            raise ValueError(f"dangling '*' in {text!r}")
        coef = int(digits) if digits else 1
        if wpart:
            if F.degree == 1:
                raise ValueError("w is not available over Q")
            b += sign * coef
        else:
            a += sign * coef
        pos += m.end()
    return AlgInt(F, a, b)


# ---------------------------------------------------------------------------
# Field elements with denominators (used for r in the inverse different)


@dataclass(frozen=True, slots=True)
class FieldElem:
    """num / den with num in the ring of integers and den a positive integer."""

    num: AlgInt
    den: int = 1

    def __post_init__(self) -> None:
        if self.den <= 0:
            raise ValueError("denominator must be positive")

    @classmethod
    def make(cls, num: AlgInt, den: int = 1) -> FieldElem:
        if den < 0:
            num, den = -num, -den
        g = math.gcd(math.gcd(num.a, num.b), den)
        if g > 1:
            num = AlgInt(num.field, num.a // g, num.b // g)
            den //= g
        return cls(num, den)

    @property
    def field(self) -> FieldContext:
        return self.num.field

    def __mul__(self, other: FieldElem | AlgInt | int) -> FieldElem:
        if isinstance(other, FieldElem):
            return FieldElem.make(self.num * other.num, self.den * other.den)
        return FieldElem.make(self.num * other, self.den)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElem:
        return FieldElem(-self.num, self.den)

    def inverse(self) -> FieldElem:
        nm = self.num.norm()
        if nm == 0:
            raise ZeroDivisionError("inverse of zero")
        return FieldElem.make(self.num.conj() * self.den, nm)

    def trace(self) -> Fraction:
        return Fraction(self.num.trace(), self.den)

    def norm(self) -> Fraction:
        return Fraction(self.num.norm(), self.den ** self.field.degree)

    def embed(self) -> tuple[float, ...]:
        return tuple(x / self.den for x in self.num.embed())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __repr__(self) -> str:
        s = format_elt(self.num)
        return s if self.den == 1 else f"({s})/{self.den}"


def parse_field_elem(F: FieldContext, text: str) -> FieldElem:
    """Parse `a+b*w` optionally followed by `/den` (parentheses allowed)."""
    s = text.strip()
    if "/" in s:
        num_s, den_s = s.rsplit("/", 1)
        num_s = num_s.strip()
        if num_s.startswith("(") and num_s.endswith(")"):
            num_s = num_s[1:-1]
        den = int(den_s.strip().strip("()"))
        return FieldElem.make(parse_elt(F, num_s), den)
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    return FieldElem.make(parse_elt(F, s), 1)


def inverse_different_generator(F: FieldContext) -> FieldElem:
    """1/delta where (delta) is the different; generates the dual module."""
    return FieldElem.make(F.different, 1).inverse()


def trace_and_norm(x: AlgInt) -> tuple[int, int]:
    return x.trace(), x.norm()


def embed(x: AlgInt | FieldElem) -> tuple[float, ...]:
    return x.embed()


def dual_element_check(r: FieldElem) -> bool:
    """True iff Tr(r*y) is an integer for all y in the ring of integers."""
    F = r.field
    if r.trace().denominator != 1:
        return False
    if F.degree == 2 and (r * F.omega).trace().denominator != 1:
        return False
    return True


# ---------------------------------------------------------------------------
# Units


def _fundamental_unit(F: FieldContext) -> tuple[int, int]:
    """Continued-fraction expansion of w; the first convergent p/q with
    N(p - q*w) = +-1 yields the fundamental unit."""
    D = F.D
    s = math.isqrt(D)
    if D % 4 == 1:
        P, Q = 1, 2
    else:
        P, Q = 0, 1
    h2, h1 = 0, 1  # convergent numerators h_{k-2}, h_{k-1}
    k2, k1 = 1, 0
    for _ in range(100000):
        a = (P + s) // Q
        h, k = a * h1 + h2, a * k1 + k2
        # N(h - k*w), computed directly because the field is not ready yet
        nm = h * h - h * k * F.t - k * k * F.n
        if abs(nm) == 1:
            # conj(h - k*w) = (h - k*t) + k*w is the large conjugate
            ua, ub = h - k * F.t, k
            break
        h2, h1, k2, k1 = h1, h, k1, k
        P = a * Q - P
        Q = (D - P * P) // Q
    else:  # pragma: no cover
        raise RuntimeError("continued fraction did not reach a unit")
    return ua, ub


def enumerate_units(F: FieldContext, bound: float) -> list[AlgInt]:
    """All units with max_j |eps^(sigma_j)| <= bound, no duplicates."""
    if F.degree == 1:
        return [F.one, -F.one]
    eps = F.unit
    out = [F.one, -F.one]
    lg = math.log(eps.embed()[0])
    nmax = int(math.floor(math.log(bound) / lg + 1e-12)) if bound >= 1 else -1
    for n in range(1, nmax + 1):
        for u in (eps ** n, eps ** (-n)):
            if max(abs(v) for v in u.embed()) <= bound * (1 + 1e-12):
                out.extend([u, -u])
    return out


# ---------------------------------------------------------------------------
# Ideals


@dataclass(frozen=True, slots=True)
class Ideal:
    """Integral ideal with Z-basis {a, b + c*w}: c | a, c | b, 0 <= b < a.

    Over Q the ideal is aZ and b = 0, c = 1 by convention.
    """

    field: FieldContext
    a: int
    b: int
    c: int

    @property
    def norm(self) -> int:
        return self.a * self.c

    def basis(self) -> list[AlgInt]:
        F = self.field
        if F.degree == 1:
            return [AlgInt(F, self.a, 0)]
        return [AlgInt(F, self.a, 0), AlgInt(F, self.b, self.c)]

    def contains(self, x: AlgInt) -> bool:
        if self.field.degree == 1:
            return x.a % self.a == 0
        if x.b % self.c:
            return False
        k = x.b // self.c
        return (x.a - k * self.b) % self.a == 0

    def reduce(self, x: AlgInt) -> AlgInt:
        """Canonical representative of x modulo the ideal."""
        u, v = reduce_coords(self, x.a, x.b)
        return AlgInt(self.field, u, v)

    def is_one(self) -> bool:
        return self.a == 1 and self.c == 1

    def conj(self) -> Ideal:
        return ideal_from_gens(self.field, [g.conj() for g in self.basis()])

    def __mul__(self, other: Ideal) -> Ideal:
        return ideal_product(self, other)

    def __repr__(self) -> str:
        if self.field.degree == 1:
            return f"({self.a})"
        return f"[{self.a}; {format_elt(AlgInt(self.field, self.b, self.c))}]"


def reduce_coords(I: Ideal, u: int, v: int) -> tuple[int, int]:
    if I.field.degree == 1:
        return u % I.a, 0
    k = v // I.c
    return (u - k * I.b) % I.a, v - k * I.c


def _hnf(F: FieldContext, vecs: list[tuple[int, int]]) -> Ideal:
    if F.degree == 1:
        g = 0
        for x, _ in vecs:
            g = math.gcd(g, x)
        if g == 0:
            raise ValueError("zero ideal")
        return Ideal(F, g, 0, 1)
    rows = [list(v) for v in vecs if v != (0, 0)]
    if not rows:
        raise ValueError("zero ideal")
    # Euclid on the second coordinate
    while True:
        nz = [r for r in rows if r[1] != 0]
        if len(nz) <= 1:
            break
        piv = min(nz, key=lambda r: abs(r[1]))
        for r in nz:
            if r is piv:
                continue
            q = r[1] // piv[1]
            r[0] -= q * piv[0]
            r[1] -= q * piv[1]
    nz = [r for r in rows if r[1] != 0]
    if not nz:
        raise ValueError("generators do not span a full-rank lattice")
    piv = nz[0]
    if piv[1] < 0:
        piv[0], piv[1] = -piv[0], -piv[1]
    g = 0
    for r in rows:
        if r is not piv:
            g = math.gcd(g, r[0])
    if g == 0:
        raise ValueError("generators do not span a full-rank lattice")
    return Ideal(F, g, piv[0] % g, piv[1])


def ideal_from_gens(F: FieldContext, gens: Iterable[AlgInt]) -> Ideal:
    """Ideal generated (as a module over the ring) by the given elements."""
    vecs: list[tuple[int, int]] = []
    for g in gens:
        vecs.append((g.a, g.b))
        if F.degree == 2:
            gw = g * F.omega
            vecs.append((gw.a, gw.b))
    return _hnf(F, vecs)


def principal(x: AlgInt) -> Ideal:
    return ideal_from_gens(x.field, [x])


def unit_ideal(F: FieldContext) -> Ideal:
    return Ideal(F, 1, 0, 1)


def ideal_sum(I: Ideal, J: Ideal) -> Ideal:
    return ideal_from_gens(I.field, I.basis() + J.basis())


def ideal_product(I: Ideal, J: Ideal) -> Ideal:
    return ideal_from_gens(I.field, [x * y for x in I.basis() for y in J.basis()])


def ideal_divides(A: Ideal, B: Ideal) -> bool:
    """A | B, i.e. B is contained in A."""
    return all(A.contains(x) for x in B.basis())


def ideal_norm(I: Ideal) -> int:
    return I.norm


def ideal_power(I: Ideal, k: int) -> Ideal:
    out = unit_ideal(I.field)
    for _ in range(k):
        out = ideal_product(out, I)
    return out


def ideal_divide_by_int(I: Ideal, p: int) -> Ideal:
    if I.a % p or I.b % p or (I.field.degree == 2 and I.c % p):
        raise ValueError(f"{I} is not contained in ({p})")
    if I.field.degree == 1:
        return Ideal(I.field, I.a // p, 0, 1)
    return Ideal(I.field, I.a // p, I.b // p, I.c // p)


def parse_ideal(F: FieldContext, text: str) -> Ideal:
    """Parse `[g1; g2; ...]` (brackets optional) into an ideal."""
    s = text.strip()
    if s.startswith("[") and s.endswith("]"):
        s = s[1:-1]
    parts = [p for p in re.split(r"[;,]", s) if p.strip()]
    if not parts:
        raise ValueError(f"empty ideal literal {text!r}")
    return ideal_from_gens(F, [parse_elt(F, p) for p in parts])


# ---------------------------------------------------------------------------
# Prime ideals and factorization


def kronecker(a: int, p: int) -> int:
    """Kronecker symbol (a/p) for a prime p."""
    if p == 2:
        if a % 2 == 0:
            return 0
        return 1 if a % 8 in (1, 7) else -1
    r = pow(a % p, (p - 1) // 2, p)
    return 0 if r == 0 else (1 if r == 1 else -1)


def _minpoly_roots(F: FieldContext, p: int) -> list[int]:
    """Roots mod p of x^2 - t x - n, the minimal polynomial of w."""
    if p == 2 or p < 50:
        return [x for x in range(p) if (x * x - F.t * x - F.n) % p == 0]
    disc = (F.t * F.t + 4 * F.n) % p
    if disc == 0:
        return [(F.t * pow(2, -1, p)) % p]
    roots = _cache.sqrt_mod_all(disc, p)
    inv2 = pow(2, -1, p)
    return sorted({((F.t + s) * inv2) % p for s in roots})


@dataclass(frozen=True, slots=True)
class PrimeIdeal:
    ideal: Ideal
    p: int
    f: int  # residue degree
    e: int  # ramification index
    complement: Ideal  # ideal C with P*C = (p)

    @property
    def norm(self) -> int:
        return self.p ** self.f


@lru_cache(maxsize=None)
def primes_above(F: FieldContext, p: int) -> tuple[PrimeIdeal, ...]:
    if F.degree == 1:
        return (PrimeIdeal(Ideal(F, p, 0, 1), p, 1, 1, unit_ideal(F)),)
    k = kronecker(F.disc, p)
    pp = AlgInt(F, p, 0)
    if k == -1:
        return (PrimeIdeal(principal(pp), p, 2, 1, unit_ideal(F)),)
    roots = _minpoly_roots(F, p)
    if k == 0:
        P = ideal_from_gens(F, [pp, F.omega - roots[0]])
        return (PrimeIdeal(P, p, 1, 2, P),)
    P1 = ideal_from_gens(F, [pp, F.omega - roots[0]])
    P2 = ideal_from_gens(F, [pp, F.omega - roots[1]])
    return (PrimeIdeal(P1, p, 1, 1, P2), PrimeIdeal(P2, p, 1, 1, P1))


def factor_ideal(I: Ideal) -> list[tuple[PrimeIdeal, int]]:
    """Prime factorization of a nonzero integral ideal."""
    if I.norm >= COORD_LIMIT:
        raise ArithmeticRangeError("ideal norm beyond the factorization range")
    F = I.field
    out: list[tuple[PrimeIdeal, int]] = []
    rest = I
    for p in sorted(_cache.factorint(I.norm)):
        for P in primes_above(F, p):
            e = 0
            while ideal_divides(P.ideal, rest):
                rest = ideal_divide_by_int(ideal_product(rest, P.complement), p)
                e += 1
            if e:
                out.append((P, e))
    if not rest.is_one():  # pragma: no cover - would indicate a bug
        raise RuntimeError(f"factorization of {I} left cofactor {rest}")
    return out


def valuation(P: PrimeIdeal, I: Ideal) -> int:
    e = 0
    rest = I
    while ideal_divides(P.ideal, rest):
        rest = ideal_divide_by_int(ideal_product(rest, P.complement), P.p)
        e += 1
    return e


def elem_valuation(P: PrimeIdeal, x: FieldElem | AlgInt) -> int:
    """v_P of a nonzero field element."""
    if isinstance(x, AlgInt):
        x = FieldElem(x, 1)
    v = valuation(P, principal(x.num))
    if x.den != 1:
        v -= valuation(P, principal(AlgInt(x.field, x.den, 0)))
    return v


def different_valuation(P: PrimeIdeal) -> int:
    return valuation(P, principal(P.ideal.field.different))


def ideal_product_of_factors(F: FieldContext, fac: list[tuple[PrimeIdeal, int]]) -> Ideal:
    out = unit_ideal(F)
    for P, e in fac:
        out = ideal_product(out, ideal_power(P.ideal, e))
    return out


def euler_phi(I: Ideal) -> int:
    phi = I.norm
    for P, _ in factor_ideal(I):
        phi = phi // P.norm * (P.norm - 1)
    return phi


def prime_ideals_up_to(F: FieldContext, bound: int) -> list[PrimeIdeal]:
    """All prime ideals of norm <= bound, sorted by norm then HNF."""
    out: list[PrimeIdeal] = []
    for p in _cache.primes_up_to(bound):
        for P in primes_above(F, p):
            if P.norm <= bound:
                out.append(P)
    out.sort(key=lambda P: (P.norm, P.ideal.a, P.ideal.b, P.ideal.c))
    return out


def ideals_up_to(F: FieldContext, bound: int) -> list[tuple[Ideal, list[tuple[PrimeIdeal, int]]]]:
    """All nonzero integral ideals of norm <= bound with their factorizations,
    generated multiplicatively from prime ideals (sorted by norm, then HNF)."""
    primes = prime_ideals_up_to(F, bound)
    out: list[tuple[int, list[tuple[PrimeIdeal, int]]]] = []

    def rec(start: int, nm: int, fac: list[tuple[PrimeIdeal, int]]) -> None:
        out.append((nm, list(fac)))
        for i in range(start, len(primes)):
            P = primes[i]
            if nm * P.norm > bound:
                break
            e, q = 1, P.norm
            while nm * q <= bound:
                fac.append((P, e))
                rec(i + 1, nm * q, fac)
                fac.pop()
                e += 1
                q *= P.norm

    rec(0, 1, [])
    result = []
    for nm, fac in out:
        result.append((ideal_product_of_factors(F, fac), fac))
    result.sort(key=lambda t: (t[0].norm, t[0].a, t[0].b, t[0].c))
    return result


def ideals_of_norm_bruteforce(F: FieldContext, nrm: int) -> list[Ideal]:
    """All HNF matrices of determinant nrm that are closed under w (oracle)."""
    if F.degree == 1:
        return [Ideal(F, nrm, 0, 1)]
    found = []
    for c in range(1, nrm + 1):
        if nrm % c:
            continue
        a = nrm // c
        if a % c:
            continue
        for b in range(0, a, c):
            I = Ideal(F, a, b, c)
            # closure under multiplication by w
            if all(I.contains(x * F.omega) for x in I.basis()):
                found.append(I)
    return found


# ---------------------------------------------------------------------------
# Residues


def residues_mod(c: AlgInt | Ideal) -> list[AlgInt]:
    """A complete residue system of the ring modulo (c)."""
    I = c if isinstance(c, Ideal) else principal(c)
    F = I.field
    if F.degree == 1:
        return [AlgInt(F, x, 0) for x in range(I.a)]
    return [AlgInt(F, x, y) for y in range(I.c) for x in range(I.a)]


class ResidueRing:
    """Arithmetic in O/I on raw integer coordinates."""

    def __init__(self, I: Ideal):
        self.I = I
        self.F = I.field
        self.primes = [P for P, _ in factor_ideal(I)] if not I.is_one() else []
        phi = I.norm
        for P in self.primes:
            phi = phi // P.norm * (P.norm - 1)
        self.phi = phi

    def reduce(self, u: int, v: int) -> tuple[int, int]:
        return reduce_coords(self.I, u, v)

    def mul(self, x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
        a, b = x
        c, d = y
        bd = b * d
        return self.reduce(a * c + bd * self.F.n, a * d + b * c + bd * self.F.t)

    def pow(self, x: tuple[int, int], k: int) -> tuple[int, int]:
        result = self.reduce(1, 0)
        base = x
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def is_unit(self, x: tuple[int, int]) -> bool:
        return not any(P.ideal.contains(AlgInt(self.F, x[0], x[1])) for P in self.primes)

    def inverse(self, x: tuple[int, int]) -> tuple[int, int]:
        return self.pow(x, self.phi - 1)

    def elements(self) -> Iterator[tuple[int, int]]:
        I = self.I
        if self.F.degree == 1:
            for x in range(I.a):
                yield (x, 0)
        else:
            for y in range(I.c):
                for x in range(I.a):
                    yield (x, y)


def invertible_residues_mod(c: AlgInt | Ideal) -> list[tuple[AlgInt, AlgInt]]:
    """Pairs (d, a) with d running over invertible residues and a*d = 1 mod (c)."""
    I = c if isinstance(c, Ideal) else principal(c)
    R = ResidueRing(I)
    F = I.field
    out = []
    for x in R.elements():
        if R.is_unit(x):
            inv = R.inverse(x)
            out.append((AlgInt(F, *x), AlgInt(F, *inv)))
    return out


# ---------------------------------------------------------------------------
# Unit groups acting on elements, and enumeration of lattice points


@dataclass(frozen=True)
class UnitGroup:
    """Subgroup <u> x {+-1 if has_minus} of the unit group (u = 1 over Q)."""

    field: FieldContext
    gen: AlgInt
    has_minus: bool

    @property
    def gen_size(self) -> float:
        """First embedding of the generator (>1 for real quadratic fields)."""
        return self.gen.embed()[0]


def full_unit_group(F: FieldContext) -> UnitGroup:
    return UnitGroup(F, F.unit if F.degree == 2 else F.one, True)


def congruence_unit_group(F: FieldContext, q: Ideal) -> UnitGroup:
    """U_q = units congruent to 1 mod q, found by direct order search."""
    one = reduce_coords(q, 1, 0)
    minus_one = reduce_coords(q, -1, 0)
    has_minus = one == minus_one
    if F.degree == 1:
        return UnitGroup(F, F.one, has_minus)
    eps = F.unit
    x = eps
    for m in range(1, 100000):
        r = reduce_coords(q, x.a, x.b)
        if r == one:
            return UnitGroup(F, x, has_minus)
        if r == minus_one:
            return UnitGroup(F, -x, has_minus)
        x = x * eps
    raise RuntimeError("unit order search did not terminate")  # pragma: no cover


def totally_positive_unit_group(F: FieldContext) -> UnitGroup:
    if F.degree == 1:
        return UnitGroup(F, F.one, False)
    eps = F.unit
    g = eps if eps.norm() == 1 else eps * eps
    if g.embed()[0] < 0:  # pragma: no cover - eps has positive first embedding
        g = -g
    return UnitGroup(F, g, False)


def _ratio_ge_one(x: AlgInt) -> bool:
    """Exact test |x^sigma1| >= |x^sigma2| (x nonzero, real quadratic)."""
    # sigma1^2 - sigma2^2 = (s1 - s2)(s1 + s2) = b*sqrt(disc)*trace
    return x.b * x.trace() >= 0


def _sigma1_positive(x: AlgInt) -> bool:
    return x.embed()[0] > 0


def orbit_representative(c: AlgInt, G: UnitGroup) -> AlgInt:
    """Canonical element of the orbit c*G.

    Real quadratic: the unique element with ratio |c1/c2| in [1, g^2), where
    g is the first embedding of the group generator, and with c1 > 0 if -1
    lies in G.  Over Q: |c| if -1 is in G, else c.
    """
    F = c.field
    if c.is_zero():
        raise ValueError("zero has no unit orbit")
    if F.degree == 1:
        return AlgInt(F, abs(c.a), 0) if G.has_minus else c
    u = G.gen
    if u.embed()[0] < 0:
        u = -u
    uinv = u.unit_inverse()
    s1, s2 = c.embed()
    lg = math.log(u.embed()[0])
    k = math.floor(math.log(abs(s1 / s2)) / (2 * lg))
    x = c * (uinv ** k) if k > 0 else c * (u ** (-k))
    while not _ratio_ge_one(x):
        x = x * u
    while _ratio_ge_one(x * uinv):
        x = x * uinv
    if G.has_minus and not _sigma1_positive(x):
        x = -x
    return x


def lattice_points_in_box(I: Ideal, R1: float, R2: float | None = None) -> Iterator[AlgInt]:
    """All nonzero x in I with |x^sigma1| <= R1 and |x^sigma2| <= R2."""
    F = I.field
    if F.degree == 1:
        m = int(math.floor(R1 / I.a))
        for k in range(-m, m + 1):
            if k:
                yield AlgInt(F, k * I.a, 0)
        return
    if R2 is None:
        R2 = R1
    w1, w2 = F.sigma
    sd = F.sqrt_disc
    ymax = int(math.floor((R1 + R2) / (I.c * sd))) + 1
    eps = 1e-9 * (1 + R1 + R2)
    for y in range(-ymax, ymax + 1):
        # x*a + y*b + y*c*w_j in [-R_j, R_j]
        base1 = y * I.b + y * I.c * w1
        base2 = y * I.b + y * I.c * w2
        lo = max((-R1 - base1) / I.a, (-R2 - base2) / I.a)
        hi = min((R1 - base1) / I.a, (R2 - base2) / I.a)
        for x in range(math.floor(lo - eps) , math.ceil(hi + eps) + 1):
            el = AlgInt(F, x * I.a + y * I.b, y * I.c)
            if el.is_zero():
                continue
            e1, e2 = el.embed()
            if abs(e1) <= R1 * (1 + 1e-12) and abs(e2) <= R2 * (1 + 1e-12):
                yield el


def enumerate_ideal_elements(
    I: Ideal, bound: float, mode: str = "units", group: UnitGroup | None = None
) -> list[AlgInt]:
    """Nonzero elements of I.

    mode="units": one representative per orbit under `group` (default: all
    units) with |N(c)| <= bound, sorted by (|N(c)|, coordinates).
    mode="box": every lattice point with max_j |c^sigma_j| <= bound.
    """
    F = I.field
    if mode == "box":
        pts = list(lattice_points_in_box(I, bound))
        pts.sort(key=lambda x: (abs(x.norm()), x.a, x.b))
        return pts
    if mode != "units":
        raise ValueError(f"unknown mode {mode!r}")
    G = group or full_unit_group(F)
    if F.degree == 1:
        m = int(bound) // I.a
        out = [AlgInt(F, k * I.a, 0) for k in range(1, m + 1)]
        if not G.has_minus:
            out += [AlgInt(F, -k * I.a, 0) for k in range(1, m + 1)]
        out.sort(key=lambda x: (abs(x.a), x.a))
        return out
    g = abs(G.gen.embed()[0])
    R1 = g * math.sqrt(bound) * (1 + 1e-9)
    R2 = math.sqrt(bound) * (1 + 1e-9)
    out = []
    u = G.gen if G.gen.embed()[0] > 0 else -G.gen
    uinv = u.unit_inverse()
    for x in lattice_points_in_box(I, R1, R2):
        if abs(x.norm()) > bound:
            continue
        if not _ratio_ge_one(x) or _ratio_ge_one(x * uinv):
            continue
        if G.has_minus and not _sigma1_positive(x):
            continue
        out.append(x)
    out.sort(key=lambda x: (abs(x.norm()), x.a, x.b))
    return out


def count_ideals_by_norm(F: FieldContext, bound: int) -> list[int]:
    """counts[n] = number of integral ideals of norm n (n <= bound)."""
    counts = [0] * (bound + 1)
    for I, _ in ideals_up_to(F, bound):
        counts[I.norm] += 1
    return counts
