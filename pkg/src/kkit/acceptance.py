"""End-to-end acceptance checks shared by `kkit verify-all` and the test suite.

Each check returns a CriterionResult whose `measured` dict holds only
deterministic numbers; wall-clock time is kept apart so reports can be
compared byte for byte across runs and thread counts.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from kkit import bessel, density, kloosterman, rayclass, sumformula, testfn
from kkit.numberfield import FieldElem, inverse_different_generator, make_field, parse_ideal


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0
    limit_seconds: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.number}: {self.name} :: {parts}"


def _fmt(v: object) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}j"
    return str(v)


def _timed(number: int, name: str, limit: float | None, fn: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, measured = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt > limit:
        ok = False
        measured["over_time_limit"] = True
    return CriterionResult(number, name, bool(ok), measured, dt, limit)


def _one(F) -> FieldElem:
    return FieldElem.make(F.one, 1)


# ---------------------------------------------------------------------------
# 1. Kloosterman sums over Q against a double loop


def kloosterman_double_loop(r: int, c: int) -> complex:
    """S(r, r; c) over Z: for each unit d, search the inverse a directly."""
    total = 0j
    for d in range(c):
        if math.gcd(d, c) != 1:
            continue
        for a in range(c):
            if (a * d) % c == 1 % c:
                total += cmath.exp(2j * math.pi * ((r * (d + a)) % c) / c)
                break
    return total


def criterion_1() -> CriterionResult:
    def run():
        Q = make_field(1)
        worst = 0.0
        for r in (1, 2, 3):
            rr = FieldElem.make(Q.elt(r), 1)
            for c in range(1, 51):
                v = kloosterman.kloosterman_sum_value(Q, rr, Q.elt(c))
                worst = max(worst, abs(v - kloosterman_double_loop(r, c)))
        one = _one(Q)
        s2 = kloosterman.kloosterman_sum_value(Q, one, Q.elt(2))
        s3 = kloosterman.kloosterman_sum_value(Q, one, Q.elt(3))
        s5 = kloosterman.kloosterman_sum_value(Q, one, Q.elt(5))
        named = max(abs(s2 - 1), abs(s3 + 1), abs(s5 - (2 + 2 * math.cos(4 * math.pi / 5))))
        return worst <= 1e-10 and named <= 1e-10, {"max_oracle_diff": worst, "max_named_diff": named}

    return _timed(1, "Kloosterman sums vs double-loop oracle", 5.0, run)


# ---------------------------------------------------------------------------
# 2. Weil-Salie ratios


def criterion_2(threads: int = 1) -> CriterionResult:
    def run():
        ok = True
        out = {}
        for D in (1, 2, 5):
            F = make_field(D)
            for qs in ("[1]", "[2]"):
                q = parse_ideal(F, qs)
                r300 = kloosterman.max_weil_salie_ratio(F, q, _one(F), 300, 0.1, threads)
                r500 = kloosterman.max_weil_salie_ratio(F, q, _one(F), 500, 0.1, threads)
                growth = r500 / r300 - 1 if r300 > 0 else math.inf
                ok &= math.isfinite(r500) and growth < 0.2
                out[f"D{D}q{qs[1:-1]}_ratio"] = r500
                out[f"D{D}q{qs[1:-1]}_growth"] = growth
        return ok, out

    return _timed(2, "Weil-Salie ratio bounded, growth < 20% from 300 to 500", 120.0, run)


# ---------------------------------------------------------------------------
# 3. delta asymptotics

RESIDUAL_GRID = (0.1, 0.03, 0.01, 0.003, 0.001)


def criterion_3() -> CriterionResult:
    def run():
        Q, K = make_field(1), make_field(5)
        f1 = sumformula.delta_asymptotics(Q, sumformula.Partition.parse("Q+=1", 1), {}, [1e-3])
        f2 = sumformula.delta_asymptotics(K, sumformula.Partition.parse("Q+=1,2", 2), {}, [1e-3])
        m1 = sumformula.delta_asymptotics(Q, sumformula.Partition.parse("Q-=1", 1), {}, RESIDUAL_GRID)
        m2 = sumformula.delta_asymptotics(K, sumformula.Partition.parse("Q+=1;Q-=2", 2), {}, RESIDUAL_GRID)
        dev1, dev2 = f1.rows[0][3], f2.rows[0][3]
        ok = dev1 <= 0.02 and dev2 <= 0.05 and m1.residual_exponent >= 0.45 and m2.residual_exponent >= 0.45
        return ok, {"d1_rel_dev": dev1, "d2_rel_dev": dev2,
                    "exp_Q-": m1.residual_exponent, "exp_Q+Q-": m2.residual_exponent}

    return _timed(3, "delta term asymptotics", 60.0, run)


# ---------------------------------------------------------------------------
# 4. Kloosterman-term dominance

DOMINANCE_GRID = (0.1, 0.07, 0.05, 0.035)
DOMINANCE_CONFIGS = ((1, "Q+=1"), (5, "Q+=1,2"), (5, "Q+=1;Q-=2"))


def criterion_4(threads: int = 1, quick: bool = False) -> CriterionResult:
    def run():
        ok = True
        out = {}
        configs = DOMINANCE_CONFIGS[:1] if quick else DOMINANCE_CONFIGS
        for D, pt in configs:
            F = make_field(D)
            # r generates the inverse different: the smallest admissible Fourier order
            r = inverse_different_generator(F)
            rep = sumformula.dominance_scan(F, parse_ideal(F, "[1]"), r, sumformula.Partition.parse(pt, F.degree),
                                            DOMINANCE_GRID, threads=threads, strict=False)
            tail = max(x.kl_tail / abs(x.kl_value) for x in rep.rows)
            ok &= rep.passed
            tag = f"D{D}[{pt}]"
            out[f"{tag}_gap"] = rep.gap
            out[f"{tag}_max_tail_frac"] = tail
        if quick:
            out["configs"] = "Q only (quick)"
        return ok, out

    return _timed(4, "Kloosterman term dominated by the delta term", 600.0, run)


# ---------------------------------------------------------------------------
# 5. Eisenstein machinery


def criterion_5() -> CriterionResult:
    def run():
        Q, K = make_field(1), make_field(5)
        q1, k1 = parse_ideal(Q, "[1]"), parse_ideal(K, "[1]")
        pq = rayclass.phi_series(Q, q1, _one(Q), Q.one, Q.elt(0), 0.5, direct_B=2000)
        pk = rayclass.phi_series(K, k1, inverse_different_generator(K), K.one, K.elt(0), 0.5, direct_B=500)
        dq, dk = abs(pq.phi - pq.direct), abs(pk.phi - pk.direct)
        route = 0.0
        for F, qq in ((Q, q1), (K, k1)):
            rc = rayclass.ray_class_group(F, qq)
            for mu1 in sorted({0.0, abs(rayclass.mu_lattice(F, qq)[0])}):
                lam = rayclass.hecke_character(rc, mu1)
                for nu in (0.5, 1.0):
                    a = rayclass.q_factor(rc, lam, 0, nu)
                    b = rayclass.q_factor(rc, lam, 0, nu, route="mobius", N=100000)
                    route = max(route, abs(a.value - b.value))
        rc = rayclass.ray_class_group(Q, q1)
        z2 = rayclass.q_factor(rc, rayclass.hecke_character(rc), 0, 0.5, route="mobius", N=100000)
        dz = abs(z2.value - 6 / math.pi**2)
        ok = dq <= 1e-3 and dk <= 1e-2 and route <= 1e-4 and dz <= 1e-5
        return ok, {"phi_diff_Q": dq, "phi_diff_Q5": dk, "q_route_diff": route, "inv_zeta2_diff": dz}

    return _timed(5, "Eisenstein coefficients: direct sum vs ray-class decomposition", 180.0, run)


# ---------------------------------------------------------------------------
# 6. ray-class partial sums


def criterion_6() -> CriterionResult:
    def run():
        K = make_field(5)
        q = parse_ideal(K, "[1]")
        rc = rayclass.ray_class_group(K, q)
        prof = rayclass.s_lambda_profile(rc, 0, rayclass.hecke_character(rc), 100000).real
        a = [prof[n] / n for n in (1000, 10000, 100000)]
        d1, d2 = abs(a[1] - a[0]), abs(a[2] - a[1])
        lam = rayclass.hecke_character(rc, rayclass.mu_lattice(K, q)[0])
        p = np.abs(rayclass.s_lambda_profile(rc, 0, lam, 20000)[1:]) / np.sqrt(np.arange(1, 20001))
        ratio = float(p.max())
        # bounded: the second half of the range does not raise the maximum by more than half
        first, second = float(p[:10000].max()), float(p[10000:].max())
        ok = d2 > 0 and d1 / d2 >= 2 and math.isfinite(ratio) and second <= 1.5 * first
        return ok, {"diff_1e3_1e4": d1, "diff_1e4_1e5": d2, "shrink": d1 / d2 if d2 else math.inf,
                    "max_s_lambda_over_sqrt_n": ratio}

    return _timed(6, "ray-class partial sums", 120.0, run)


# ---------------------------------------------------------------------------
# 7. L lower bound


def criterion_7() -> CriterionResult:
    def run():
        Q = make_field(1)
        rc = rayclass.ray_class_group(Q, parse_ideal(Q, "[1]"))
        grid = [0.5 + 0.25 * k for k in range(199)]
        rep = rayclass.l_lower_bound_check(rc, rayclass.hecke_character(rc), 0, grid)
        return rep.stable, {"constant": rep.constant, "refined": rep.refined_constant, "argmin_t": rep.argmin_t}

    return _timed(7, "lower bound for |zeta(1+it)| log^7", 60.0, run)


# ---------------------------------------------------------------------------
# 8. Tauberian harness


def criterion_8() -> CriterionResult:
    def run():
        K = make_field(5)
        worst = 0.0
        n_patterns = 0
        for pt in ("Q+=1,2", "Q+=1;Q-=2", "Q-=1;Q+=2", "Q-=1,2", "E=1;Q+=2", "E=1;Q-=2", "E=2;Q+=1", "E=2;Q-=1"):
            P = sumformula.Partition.parse(pt, 2)
            atoms = density.generate_mock_measure(K, P, "dgrid", 40, 0)
            cmp = density.compare_to_constant(K, atoms, P, None, [1e4])
            worst = max(worst, cmp.rel_err[-1])
            n_patterns += 1
        E = frozenset({2})
        cube = {2: (0.3, 7.0)}
        split = math.fsum(density.mainthm_constant(K, P, cube).value for P in density.sign_splits(2, E))
        corgen = abs(split - density.corgen_constant(K, E, cube))
        P = sumformula.Partition.parse("E=2;Q+=1", 2)
        comp_cube = {2: (0.01, 0.24)}
        comp_const = density.mainthm_constant(K, P, comp_cube).value
        adv = density.generate_mock_measure(K, P, "adversarial", 10, 0)
        comp = density.compare_to_constant(K, adv, P, comp_cube, [1e4])
        ds = density.dseries_constant(K, {2: -2.0})
        ds_cube = density.mainthm_constant(K, P, {2: (-2.5, -1.5)}).value
        closed = math.sqrt(5) / math.pi**2 * 1.5
        ds_diff = max(abs(ds - ds_cube), abs(ds - closed))
        ok = worst <= 0.05 and corgen <= 1e-10 and comp_const == 0.0 and comp.passed and ds_diff <= 1e-10
        return ok, {"patterns": n_patterns, "max_rel_err_X1e4": worst, "corgen_diff": corgen,
                    "complementary_target": comp_const, "complementary_scaled_mu": comp.mu_scaled[-1],
                    "dseries_diff": ds_diff}

    return _timed(8, "Tauberian harness and limit constants", None, run)


# ---------------------------------------------------------------------------
# 9. Bessel integrity

ENVELOPE_S = (0.5, 0.1, 0.02)
ENVELOPE_Y = (1e-4, 1.0, 1e3)


def criterion_9() -> CriterionResult:
    def run():
        grid = max(r[-1] for r in bessel.cross_method_grid())
        k = testfn.discrete_only({4: 1.0})
        disc = 0.0
        for y in (1e-3, 0.05, 0.3, 1.0, 4.0, 25.0):
            v = bessel.bessel_transform_plus(k, y).value
            ref = 3 * bessel.bessel_j(3, 4 * math.pi * math.sqrt(y)).value
            disc = max(disc, abs(v - ref) / max(abs(ref), 1e-300))
        env_ok = True
        ratios = {}
        for fam in ("plus", "minus"):
            rep = bessel.verify_bessel_bounds(fam, ENVELOPE_S, ENVELOPE_Y, 0.6, anchor_s=0.5)
            env_ok &= not rep.violated
            ratios[f"{fam}_anchor_const"] = rep.constant
            ratios[f"{fam}_max_ratio_after"] = rep.max_ratio_after_anchor
        ok = grid <= 1e-8 and disc <= 1e-9 and env_ok
        return ok, {"cross_method_max_rel": grid, "discrete_only_rel": disc, **ratios}

    return _timed(9, "Bessel routes and envelopes", None, run)


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}
SUITE_LIMIT_SECONDS = 20 * 60


def run_all(threads: int = 1, quick: bool = False, only: list[int] | None = None) -> list[CriterionResult]:
    """Criteria 1-9; criterion 10 (total time and determinism) is judged by the caller."""
    out = []
    for n, fn in CRITERIA.items():
        if only and n not in only:
            continue
        kwargs = {}
        if n in (2, 4):
            kwargs["threads"] = threads
        if n == 4:
            kwargs["quick"] = quick
        out.append(fn(**kwargs))
    return out
