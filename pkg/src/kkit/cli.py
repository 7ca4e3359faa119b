"""Command line interface.

Every subcommand emits either JSON (single structured results) or CSV
(grids).  CSV output ends with a `#` comment block carrying the resolved
configuration and its hash; JSON output embeds the same two fields.  No
timestamps or timings go to stdout, so identical configurations give
identical bytes whatever the thread count.

Options can also come from a config file (`--config FILE`) of the form

    [global]
    threads = 2

    [geometric scan]
    D = 5
    partition = Q+=1,2
    s-grid = 0.5:0.05:log:5

where each section names a subcommand and keys are its option names.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import re
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

import click
import numpy as np

from kkit import __version__, _cache
from kkit._parallel import default_threads

SUBCOMMANDS = {
    "field": ("info",),
    "kloosterman": ("eval", "scan"),
    "eta": ("eval",),
    "bessel": ("check",),
    "geometric": ("scan",),
    "rayclass": ("table",),
    "lfun": ("eval",),
    "phi": ("check",),
    "density": ("constants", "tauber"),
}


# ---------------------------------------------------------------------------
# config files


class ConfigError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class RunConfig:
    """Sections of `key = value` pairs, in file order."""

    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    def dumps(self) -> str:
        out = []
        for name, items in self.sections.items():
            out.append(f"[{name}]")
            out.extend(f"{k} = {v}" for k, v in items.items())
            out.append("")
        return "\n".join(out)

    def default_map(self) -> dict:
        """Nested click default_map; [global] feeds the top-level options."""
        dm: dict[str, Any] = {}
        for name, items in self.sections.items():
            opts = {_key(k): v for k, v in items.items()}
            if name == "global":
                dm.update(opts)
                continue
            words = name.split()
            node = dm
            for w in words:
                node = node.setdefault(w, {})
            node.update(opts)
        return dm


def _key(k: str) -> str:
    return k.strip().replace("-", "_")


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, col + len(stripped))
            name = " ".join(stripped[1:-1].split())
            if name != "global":
                words = name.split()
                if len(words) != 2 or words[0] not in SUBCOMMANDS or words[1] not in SUBCOMMANDS[words[0]]:
                    raise ConfigError(f"unknown section {name!r}", lineno, col + 1)
            if name in cfg.sections:
                raise ConfigError(f"duplicate section {name!r}", lineno, col + 1)
            cfg.sections[name] = {}
            current = name
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", lineno, col)
        if current is None:
            raise ConfigError("key outside any section", lineno, col)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_-]*", key):
            raise ConfigError(f"invalid key {key!r}", lineno, col)
        if key in cfg.sections[current]:
            raise ConfigError(f"duplicate key {key!r}", lineno, col)
        cfg.sections[current][key] = value.strip()
    return cfg


# ---------------------------------------------------------------------------
# output


def _canonical(obj: Any) -> Any:
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _resolved(ctx: click.Context) -> dict:
    """Command path and every parameter value, threads excluded (it must not change output)."""
    params = {}
    c: click.Context | None = ctx
    while c is not None:
        for k, v in c.params.items():
            if k not in ("threads", "config", "output"):
                params.setdefault(k, v)
        c = c.parent
    return {"command": ctx.command_path.split(" ", 1)[-1], "params": _canonical(dict(sorted(params.items())))}


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write(ctx: click.Context, text: str) -> None:
    path = ctx.find_root().params.get("output")
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def emit_json(ctx: click.Context, result: dict) -> None:
    resolved = _resolved(ctx)
    doc = {"kkit_version": __version__, "config": resolved, "config_hash": config_hash(resolved),
           "result": _canonical(result)}
    _write(ctx, json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    return str(v)


def emit_csv(ctx: click.Context, header: Sequence[str], rows: Sequence[Sequence[Any]], extra: dict | None = None) -> None:
    resolved = _resolved(ctx)
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    buf.write(f"# kkit_version: {__version__}\n")
    buf.write(f"# command: {resolved['command']}\n")
    buf.write(f"# params: {json.dumps(resolved['params'], sort_keys=True)}\n")
    for k, v in (extra or {}).items():
        buf.write(f"# {k}: {json.dumps(_canonical(v), sort_keys=True)}\n")
    buf.write(f"# config_hash: {config_hash(resolved)}\n")
    _write(ctx, buf.getvalue())


def parse_grid(text: str) -> list[float]:
    """`a,b,c`, or `start:stop:log[:n]` / `start:stop:lin[:n]` (n defaults to 6)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4) or parts[2] not in ("log", "lin"):
            raise click.BadParameter(f"grid {text!r}: expected start:stop:log|lin[:n]")
        a, b = float(parts[0]), float(parts[1])
        n = int(parts[3]) if len(parts) == 4 else 6
        if n < 2:
            raise click.BadParameter("a grid needs at least 2 points")
        if parts[2] == "log":
            if a <= 0 or b <= 0:
                raise click.BadParameter("log grids need positive endpoints")
            return [float(x) for x in np.geomspace(a, b, n)]
        return [float(x) for x in np.linspace(a, b, n)]
    return [float(x) for x in text.split(",") if x.strip()]


class GridType(click.ParamType):
    name = "grid"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            return parse_grid(str(value))
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


GRID = GridType()


# ---------------------------------------------------------------------------
# error handling


class KkitGroup(click.Group):
    """Maps module errors to exit code 1 with a JSON error record on stderr."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (click.exceptions.Exit, click.ClickException, click.exceptions.Abort):
            raise
        except (ValueError, ArithmeticError, RuntimeError, KeyError) as exc:
            record = {"error": type(exc).__name__, "message": str(exc)}
            click.echo(json.dumps(record), err=True)
            ctx.exit(1)
        finally:
            _cache.flush()


def _field(D: int):
    from kkit.numberfield import make_field

    return make_field(D)


def _partition(text: str, d: int):
    from kkit.sumformula import Partition

    return Partition.parse(text, d)


# ---------------------------------------------------------------------------
# root


def _load_config(ctx: click.Context, param: click.Parameter, value: str | None):
    if value is None:
        return None
    try:
        with open(value, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except ConfigError as exc:
        raise click.BadParameter(str(exc), ctx=ctx, param=param) from exc
    except OSError as exc:
        raise click.BadParameter(str(exc), ctx=ctx, param=param) from exc
    ctx.default_map = {**(ctx.default_map or {}), **cfg.default_map()}
    return value


@click.group(cls=KkitGroup)
@click.option("--config", type=click.Path(dir_okay=False), callback=_load_config, is_eager=True,
              expose_value=True, help="key = value config file with [subcommand] sections.")
@click.option("--threads", type=click.IntRange(min=1), default=default_threads, show_default="logical cores",
              help="Worker processes; output does not depend on it.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write to this file instead of stdout.")
@click.version_option(__version__, prog_name="kkit")
@click.pass_context
def main(ctx: click.Context, config: str | None, threads: int, output: str | None) -> None:
    """Geometric and spectral-side computations for the Kuznetsov sum formula
    over Q and real quadratic fields."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = threads


def _threads(ctx: click.Context) -> int:
    return int(ctx.find_root().obj["threads"])


# ---------------------------------------------------------------------------
# field


@main.group("field")
def field_group() -> None:
    """Number field data."""


@field_group.command("info")
@click.option("--D", "D", type=int, required=True, help="Squarefree D >= 1 (1 means Q).")
@click.pass_context
def field_info(ctx: click.Context, D: int) -> None:
    from kkit.numberfield import format_elt, inverse_different_generator

    F = _field(D)
    info = {
        "D": F.D,
        "D_F": F.disc,
        "degree": F.degree,
        "basis": "1" if F.degree == 1 else ("1, w with w = (1+sqrt D)/2" if F.D % 4 == 1 else "1, w with w = sqrt D"),
        "fundamental_unit": format_elt(F.unit),
        "fundamental_unit_norm": F.unit_norm,
        "regulator": F.unit_regulator(),
        "different": format_elt(F.different),
        "inverse_different_generator": str(inverse_different_generator(F)),
    }
    if F.degree == 2:
        info["fundamental_unit_embeddings"] = list(F.unit.embed())
    emit_json(ctx, info)


# ---------------------------------------------------------------------------
# kloosterman


@main.group("kloosterman")
def kloosterman_group() -> None:
    """Kloosterman sums and Weil-Salie ratios."""


@kloosterman_group.command("eval")
@click.option("--D", "D", type=int, required=True)
@click.option("--r", "r_text", required=True, help="Element of the inverse different, e.g. 1 or (-1+2*w)/5.")
@click.option("--c", "c_text", required=True, help="Nonzero algebraic integer a+b*w.")
@click.option("--eps", type=float, default=0.1, show_default=True)
@click.pass_context
def kloosterman_eval(ctx: click.Context, D: int, r_text: str, c_text: str, eps: float) -> None:
    from kkit.kloosterman import kloosterman_sum, nrr_factor, weil_salie_ratio
    from kkit.numberfield import format_elt, parse_elt, parse_field_elem

    F = _field(D)
    r = parse_field_elem(F, r_text)
    c = parse_elt(F, c_text)
    val = kloosterman_sum(F, r, c)
    emit_json(ctx, {
        "c": format_elt(c), "norm_c": c.norm(), "S": val.value, "terms": val.terms,
        "N_rr": str(nrr_factor(F, r, c)), "weil_salie_ratio": weil_salie_ratio(F, r, c, eps, S=val.value),
    })


@kloosterman_group.command("scan")
@click.option("--D", "D", type=int, required=True)
@click.option("--q", "q_text", default="[1]", show_default=True)
@click.option("--r", "r_text", default="1", show_default=True)
@click.option("--B", "B", type=float, required=True, help="Bound on |N(c)|.")
@click.option("--eps", type=float, default=0.1, show_default=True)
@click.pass_context
def kloosterman_scan(ctx: click.Context, D: int, q_text: str, r_text: str, B: float, eps: float) -> None:
    from kkit.kloosterman import kloosterman_scan_rows
    from kkit.numberfield import format_elt, parse_field_elem, parse_ideal

    F = _field(D)
    rows = kloosterman_scan_rows(F, parse_ideal(F, q_text), parse_field_elem(F, r_text), B, eps, _threads(ctx))
    out = [(format_elt(c), n, S.real, S.imag, str(nrr), ratio) for c, n, S, nrr, ratio in rows]
    emit_csv(ctx, ["c", "norm_c", "S_re", "S_im", "N_rr", "ratio"], out,
             {"max_ratio": max((x[5] for x in out), default=0.0)})


# ---------------------------------------------------------------------------
# eta


@main.group("eta")
def eta_group() -> None:
    """The delta-term functional."""


@eta_group.command("eval")
@click.option("--family", type=click.Choice(["plus", "minus", "power"]), required=True)
@click.option("--s", "s", type=float, default=0.1, show_default=True, help="Parameter of the plus/minus families.")
@click.option("--a", "a", type=float, default=4.0, show_default=True, help="Decay exponent of the power profile.")
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.pass_context
def eta_eval(ctx: click.Context, family: str, s: float, a: float, tol: float) -> None:
    from kkit.testfn import eta, power_profile, special_minus, special_plus

    k = {"plus": lambda: special_plus(s), "minus": lambda: special_minus(s), "power": lambda: power_profile(a)}[family]()
    v = eta(k, tol)
    res = {"family": family, "total": v.total, "continuous": v.continuous, "discrete": v.discrete, "error": v.err}
    if family != "power":
        res["leading_term_1_over_2s"] = 1 / (2 * s)
    emit_json(ctx, res)


# ---------------------------------------------------------------------------
# bessel


@main.group("bessel")
def bessel_group() -> None:
    """Bessel transforms of the special test functions."""


@bessel_group.command("check")
@click.option("--family", type=click.Choice(["plus", "minus"]), required=True)
@click.option("--alpha", type=float, default=0.6, show_default=True)
@click.option("--eps", type=float, default=0.05, show_default=True)
@click.option("--s-grid", "s_grid", type=GRID, default="0.5,0.1,0.02", show_default=True)
@click.option("--y-grid", "y_grid", type=GRID, default="1e-4,1,1e3", show_default=True)
@click.pass_context
def bessel_check(ctx: click.Context, family: str, alpha: float, eps: float, s_grid: list[float], y_grid: list[float]) -> None:
    from kkit.bessel import verify_bessel_bounds

    rep = verify_bessel_bounds(family, s_grid, y_grid, alpha, eps, anchor_s=max(s_grid))
    rows = [(s, y, v.real, v.imag, env, ratio) for s, y, v, env, ratio in rep.rows]
    emit_csv(ctx, ["s", "y", "value_re", "value_im", "envelope", "ratio"], rows,
             {"anchor_s": rep.anchor_s, "anchor_constant": rep.constant,
              "max_ratio_after_anchor": rep.max_ratio_after_anchor, "violated": rep.violated})


# ---------------------------------------------------------------------------
# geometric side


@main.group("geometric")
def geometric_group() -> None:
    """Delta term against the Kloosterman term."""


@geometric_group.command("scan")
@click.option("--D", "D", type=int, required=True)
@click.option("--q", "q_text", default="[1]", show_default=True)
@click.option("--r", "r_text", default=None, help="Fourier order (default: generator of the inverse different).")
@click.option("--partition", required=True, help="e.g. 'E=;Q+=1,2;Q-='.")
@click.option("--s-grid", "s_grid", type=GRID, default="0.1,0.07,0.05,0.035", show_default=True)
@click.option("--B", "B", type=float, default=None, help="Truncation |N(c)| <= B (default 2000 over Q, 300 otherwise).")
@click.pass_context
def geometric_scan(ctx: click.Context, D: int, q_text: str, r_text: str | None, partition: str,
                   s_grid: list[float], B: float | None) -> None:
    from kkit.numberfield import inverse_different_generator, parse_field_elem, parse_ideal
    from kkit.sumformula import dominance_scan

    F = _field(D)
    P = _partition(partition, F.degree)
    if P.E:
        raise click.UsageError("geometric scan takes partitions with E empty")
    r = parse_field_elem(F, r_text) if r_text else inverse_different_generator(F)
    rep = dominance_scan(F, parse_ideal(F, q_text), r, P, s_grid, B=B, threads=_threads(ctx), strict=False)
    rows = [(x.s, _real(x.delta), _real(x.delta_pred), _real(x.kl_value), x.kl_tail, x.kl_bound) for x in rep.rows]
    emit_csv(ctx, ["s", "delta", "delta_pred", "kl_value", "kl_tail", "kl_bound"], rows,
             {"p_delta": rep.p_delta, "p_k": rep.p_k, "gap": rep.gap, "margin": rep.margin,
              "inconclusive": rep.inconclusive, "passed": rep.passed})


def _real(z: Any) -> float:
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-12 * max(abs(z), 1e-300) else float("nan")


# ---------------------------------------------------------------------------
# ray classes and L-functions


@main.group("rayclass")
def rayclass_group() -> None:
    """Strict ray class groups."""


@rayclass_group.command("table")
@click.option("--D", "D", type=int, required=True)
@click.option("--q", "q_text", default="[1]", show_default=True)
@click.pass_context
def rayclass_table(ctx: click.Context, D: int, q_text: str) -> None:
    from kkit.numberfield import parse_ideal
    from kkit.rayclass import mu_lattice, orthogonality_defect, ray_class_group

    F = _field(D)
    q = parse_ideal(F, q_text)
    rc = ray_class_group(F, q)
    res = rc.as_dict()
    res["orthogonality_defect"] = orthogonality_defect(rc)
    res["mu_lattice_generator"] = list(mu_lattice(F, q))
    emit_json(ctx, res)


@main.group("lfun")
def lfun_group() -> None:
    """Hecke L-functions."""


@lfun_group.command("eval")
@click.option("--D", "D", type=int, required=True)
@click.option("--q", "q_text", default="[1]", show_default=True)
@click.option("--chi", "chi", type=int, default=0, show_default=True, help="Index of the class group character.")
@click.option("--mu", "mu1", type=float, default=0.0, show_default=True, help="mu_1 on the unit lattice.")
@click.option("--sigma", type=float, default=1.0, show_default=True, help="Real part of s.")
@click.option("--t-grid", "t_grid", type=GRID, default="0.5:50:lin:199", show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True, help="Target accuracy; 0 disables the check.")
@click.pass_context
def lfun_eval(ctx: click.Context, D: int, q_text: str, chi: int, mu1: float, sigma: float,
              t_grid: list[float], tol: float) -> None:
    from kkit.numberfield import parse_ideal
    from kkit.rayclass import hecke_character, l_function, log_weight, ray_class_group

    F = _field(D)
    rc = ray_class_group(F, parse_ideal(F, q_text))
    if not 0 <= chi < rc.h:
        raise click.BadParameter(f"chi must lie in 0..{rc.h - 1}", param_hint="--chi")
    lam = hecke_character(rc, mu1)
    rows = []
    errors = []
    for t in t_grid:
        L = l_function(rc, lam, chi, complex(sigma, t), tol=tol or None)
        v = complex(L.value)
        rows.append((t, v.real, v.imag, abs(v), abs(v) * log_weight(t, lam)))
        errors.append(L.error)
    emit_csv(ctx, ["t", "re", "im", "abs", "log7bound"], rows,
             {"min_log7bound": min((r[4] for r in rows), default=math.nan),
              "max_error_estimate": max(errors, default=0.0)})


@main.group("phi")
def phi_group() -> None:
    """Eisenstein Fourier coefficients."""


@phi_group.command("check")
@click.option("--D", "D", type=int, required=True)
@click.option("--q", "q_text", default="[1]", show_default=True)
@click.option("--r", "r_text", default=None, help="Fourier order (default: generator of the inverse different).")
@click.option("--gamma", "gamma_text", default="1", show_default=True)
@click.option("--delta", "delta_text", default="0", show_default=True)
@click.option("--nu", type=float, default=0.5, show_default=True)
@click.option("--mu", "mu1", type=float, default=0.0, show_default=True)
@click.option("--B", "B", type=float, default=None, help="Direct-sum truncation (default 2000 over Q, 500 otherwise).")
@click.option("--q-route", type=click.Choice(["L", "mobius"]), default="L", show_default=True)
@click.pass_context
def phi_check(ctx: click.Context, D: int, q_text: str, r_text: str | None, gamma_text: str, delta_text: str,
              nu: float, mu1: float, B: float | None, q_route: str) -> None:
    from kkit.numberfield import inverse_different_generator, parse_elt, parse_field_elem, parse_ideal
    from kkit.rayclass import phi_series

    F = _field(D)
    r = parse_field_elem(F, r_text) if r_text else inverse_different_generator(F)
    B = B if B is not None else (2000 if F.degree == 1 else 500)
    P = phi_series(F, parse_ideal(F, q_text), r, parse_elt(F, gamma_text), parse_elt(F, delta_text), nu, mu1,
                   direct_B=B, q_route=q_route)
    emit_json(ctx, {
        "phi": P.phi, "direct": P.direct, "direct_B": P.direct_B, "direct_tail_bound": P.direct_tail,
        "difference": abs(P.phi - P.direct) if P.direct is not None else None,
        "classes": P.b0, "psi": P.psi, "Q": [q.value for q in P.q_values], "terms": P.phi_tau,
        "extension": P.extension_note,
    })


# ---------------------------------------------------------------------------
# density


@main.group("density")
def density_group() -> None:
    """Limit constants and the Tauberian harness."""


def _parse_cube(text: str | None) -> dict[int, tuple[float, float]]:
    cube: dict[int, tuple[float, float]] = {}
    for chunk in (text or "").split(";"):
        if not chunk.strip():
            continue
        j, _, ab = chunk.partition(":")
        a, _, b = ab.partition(",")
        try:
            cube[int(j)] = (float(a), float(b))
        except ValueError as exc:
            raise click.BadParameter(f"cube entry {chunk!r}: expected j:a,b", param_hint="--cube") from exc
    return cube


@density_group.command("constants")
@click.option("--D", "D", type=int, required=True)
@click.option("--partition", required=True)
@click.option("--cube", default=None, help="'j:a,b;...' for the places in E.")
@click.pass_context
def density_constants(ctx: click.Context, D: int, partition: str, cube: str | None) -> None:
    from kkit.density import corgen_constant, mainthm_constant

    F = _field(D)
    P = _partition(partition, F.degree)
    c = _parse_cube(cube)
    const = mainthm_constant(F, P, c)
    res = const.as_dict()
    res["unsigned_Q_constant"] = corgen_constant(F, P.E, c)
    res["normalization_factorial"] = math.factorial(F.degree - len(P.E))
    emit_json(ctx, res)


@density_group.command("tauber")
@click.option("--D", "D", type=int, default=5, show_default=True)
@click.option("--partition", default="Q+=1,2", show_default=True)
@click.option("--cube", default=None, help="'j:a,b;...' for the places in E (default -2.5,5).")
@click.option("--model", type=click.Choice(["dgrid", "uniform", "adversarial"]), default="dgrid", show_default=True)
@click.option("--resolution", type=click.IntRange(min=10), default=40, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--x-grid", "x_grid", type=GRID, default="100:10000:log:5", show_default=True)
@click.pass_context
def density_tauber(ctx: click.Context, D: int, partition: str, cube: str | None, model: str, resolution: int,
                   seed: int, x_grid: list[float]) -> None:
    from kkit.density import compare_to_constant, cube_factors, generate_mock_measure, tauberian_check

    F = _field(D)
    P = _partition(partition, F.degree)
    c = _parse_cube(cube) or None
    atoms = generate_mock_measure(F, P, model, resolution, seed, hypercube=c)
    cmp = compare_to_constant(F, atoms, P, c, x_grid)
    rows = [(X, m, cmp.target, e) for X, m, e in zip(cmp.X, cmp.mu_scaled, cmp.rel_err)]
    x_max = float(atoms.params["x_max"])
    s_grid = [20.0 / x_max * f for f in (4.0, 2.0, 1.5, 1.0)]
    tr = tauberian_check(atoms, P, cube_factors(P, c), s_grid, x_grid)
    emit_csv(ctx, ["X", "muX_scaled", "target", "rel_err"], rows,
             {"atoms": len(atoms), "provenance": atoms.provenance(), "L1": tr.L1, "L2": tr.L2,
              "factorial": tr.factorial, "tauber_rel_err": tr.rel_err, "tauber_inconclusive": tr.inconclusive,
              "passed": cmp.passed})


# ---------------------------------------------------------------------------
# acceptance


@main.command("verify-all")
@click.option("--quick", is_flag=True, help="Trim the slowest scans (criterion 4 runs over Q only).")
@click.option("--only", default=None, help="Comma-separated criterion numbers.")
@click.option("--json-report", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify_all(ctx: click.Context, quick: bool, only: str | None, json_report: str | None) -> None:
    """Run the acceptance suite; one pass/fail line per criterion."""
    from kkit.acceptance import CRITERIA, SUITE_LIMIT_SECONDS, run_all

    sel = [int(x) for x in only.split(",")] if only else None
    t0 = time.perf_counter()
    results = []
    for n in CRITERIA:
        if sel and n not in sel:
            continue
        (res,) = run_all(_threads(ctx), quick, [n])
        results.append(res)
        click.echo(res.line())
        click.echo(f"criterion {res.number}: {res.seconds:.1f}s", err=True)
    total = time.perf_counter() - t0
    ok10 = total <= SUITE_LIMIT_SECONDS
    line10 = f"[{'PASS' if ok10 else 'FAIL'}] criterion 10: suite within {SUITE_LIMIT_SECONDS // 60} min"
    click.echo(line10)
    click.echo(f"total: {total:.1f}s", err=True)
    if json_report:
        doc = {"quick": quick, "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed, "measured": _canonical(r.measured),
             "seconds": r.seconds} for r in results], "total_seconds": total}
        with open(json_report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
    if not (all(r.passed for r in results) and ok10):
        ctx.exit(1)


if __name__ == "__main__":  # pragma: no cover
    main()
