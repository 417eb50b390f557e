"""Command-line reports for the geometry library.

Every command writes rows (CSV by default, or JSON) and exits with

* 0 when every asserted invariant holds,
* 1 when an assertion fails (rows up to and including the failing one are written),
* 2 on precondition, domain or parameter errors,
* 3 when a quadrature or root finder does not converge,
* 64 on unusable arguments (nothing is written).

Any option can also be set through an environment variable named
``SCHWARZGEOM_<OPTION>`` (upper case, dashes replaced by underscores);
command-line flags take precedence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as L

from . import doubled, offcenter, surface, warped
from ._numerics import loglog_slope
from .errors import GeometryError, NumericError

EXIT_OK, EXIT_ASSERT, EXIT_PRECONDITION, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64
ENV_PREFIX = "SCHWARZGEOM_"

COLUMN_DOCS = {
    "check-conditions": {
        "s_min": "inner end of the positivity interval of F",
        "s_max": "outer end (inf when unbounded)",
        "grid_min": "first sampled area radius",
        "grid_max": "last sampled area radius",
        "h1_ok": "f vanishes and h'' > 0 at the inner end",
        "h2_ok": "f > 0 on the grid",
        "h3_ok": "-scalar/(n-1) is non-decreasing on the grid",
        "h4_ok": "Q > 0 on the grid",
        "pass": "all four conditions hold",
    },
    "minkowski": {
        "p": "curvature degree",
        "eps_used": "perturbation amplitude after shrinking to convexity",
        "gap": "p int <X,nu> sigma_p - (n-p) int f sigma_{p-1}",
        "scale": "|(n-p) int f sigma_{p-1}|",
        "pairing_min": "minimum over nodes of the Newton-tensor divergence pairing",
        "pairing_integral": "integral of the pairing",
        "hk_gap": "(n-1) int f/H - int <X,nu>",
        "hk_scale": "|int <X,nu>|",
        "convex": "all principal curvatures >= -1e-12",
        "pass": "gap, hk_gap >= -tol * scale and pairing >= -tol",
    },
    "weingarten": {
        "p": "curvature degree",
        "eps_used": "perturbation amplitude after shrinking to convexity",
        "sigma_variation": "max - min of sigma_p over nodes",
        "constant_sigma": "sigma_variation < tol",
        "is_slice": "the surface is a slice by construction",
        "pass": "constant_sigma agrees with is_slice",
    },
    "bray-probe": {
        "sample": "sample index",
        "eps": "perturbation amplitude",
        "area_difference": "area minus area of the volume-matched sphere of symmetry",
        "area_difference_half": "same at eps/2",
        "eps_exponent": "log2 of the ratio of the two differences",
        "pass": "area_difference >= -tol",
    },
    "candidates": {
        "label": "symmetric, asymmetric-far or asymmetric-near-horizon",
        "r0": "inner radius",
        "r1": "outer radius",
        "H": "common mean curvature (normal out of the annulus)",
        "volume": "annulus volume",
        "volume_residual": "volume / V - 1",
        "area": "sum of the two sphere areas",
        "euclidean_bound": "flat isoperimetric area for V",
        "pass": "volume and mean curvature matched; asymmetric area below symmetric",
    },
    "profile": {
        "V": "enclosed volume",
        "r0_sym": "inner radius of the symmetric candidate",
        "r1_sym": "outer radius of the symmetric candidate",
        "area_sym": "area of the symmetric candidate",
        "r0_asym": "inner radius of the asymmetric candidate (nan if none)",
        "r1_asym": "outer radius of the asymmetric candidate (nan if none)",
        "area_asym": "area of the asymmetric candidate (nan if none)",
        "euclidean_bound": "flat isoperimetric area for V",
        "best_label": "smallest of symmetric, asymmetric and the off-center (Euclidean) value",
    },
    "offcenter": {
        "n": "dimension",
        "r": "coordinate radius",
        "a": "center distance |a|",
        "area_exact": "area by quadrature",
        "area_expansion": "area from the fourth-order expansion",
        "area_diff": "|area_exact - area_expansion|",
        "volume_exact": "volume by quadrature",
        "volume_expansion": "volume from the fourth-order expansion",
        "volume_diff": "|volume_exact - volume_expansion|",
        "area_order": "fitted decay order of the area remainder over all |a|",
        "volume_order": "fitted decay order of the volume remainder over all |a|",
        "expected_order": "2n + 1",
        "inconclusive": "a remainder fell below the quadrature noise floor",
        "deficit": "isoperimetric-ratio deficit of the perturbed ball",
        "deficit_coefficient": "fitted limit of deficit |a|^{2n} / r^4",
        "pass": "both fitted orders within 0.5 of expected_order",
    },
    "perturbed-ball": {
        "n": "dimension",
        "r": "coordinate radius",
        "a": "center distance |a|",
        "c": "normalization constant of the perturbation",
        "max_abs_f": "max |f| over the sphere",
        "laplacian_residual": "max residual of the Laplacian identity of f",
        "mean_f": "conformal mean of f",
        "area": "perturbed area (second variation)",
        "area_expansion": "closed-form perturbed area",
        "volume": "perturbed volume (second variation)",
        "volume_expansion": "closed-form perturbed volume",
        "deficit": "isoperimetric-ratio deficit",
        "deficit_scaled": "deficit |a|^{2n} / r^4",
        "deficit_limit": "2(n-2)(n-1)^2 / ((n+1)(n+2)(n+4))",
        "c_order": "fitted exponent of |c| against |a| over all |a|",
        "max_abs_f_order": "fitted exponent of max |f| against |a| over all |a|",
        "pass": "deficit > 0 and |mean_f| <= tol",
    },
}
COMMON_COLUMN = {"config_hash": "hash of the configuration that produced the row"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    fmt: str = "csv"
    output: str | None = None

    @property
    def config_hash(self) -> str:
        blob = json.dumps({"command": self.command, **self.options}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _float_list(text):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _dimension(text):
    v = int(text)
    if v < 3:
        raise argparse.ArgumentTypeError(f"dimension must be >= 3, got {text}")
    return v


def _epilog(cmd):
    cols = {**COLUMN_DOCS[cmd], **COMMON_COLUMN}
    width = max(len(c) for c in cols)
    return "columns:\n" + "\n".join(f"  {c:<{width}}  {d}" for c, d in cols.items())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="schwarzgeom", description="Numerical checks for hypersurfaces in Schwarzschild-type manifolds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, tol=1e-10, grid=64):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=_epilog(name), formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=None, help="output path (default: stdout)")
        p.add_argument("--tol", type=_positive, default=tol)
        p.add_argument("--grid", type=int, default=grid)
        p.add_argument("--seed", type=int, default=0)
        return p

    def ambient(p):
        p.add_argument("--n", type=_dimension, default=3)
        p.add_argument("--m", type=float, default=2.0)
        p.add_argument("--kappa", type=float, default=0.0)

    def family(p):
        p.add_argument("--family", choices=surface.FAMILIES, default="legendre")
        p.add_argument("--s0", type=_positive, default=None, help="profile area radius (default: inside the domain)")
        p.add_argument("--eps", type=float, default=0.02)
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--center", type=float, default=0.0)
        p.add_argument("--p", type=int, default=None, help="curvature degree (default: all)")

    p = add("check-conditions", "Sample conditions (H1)-(H4) of the warping function.", grid=50)
    ambient(p)
    p = add("minkowski", "Minkowski-type and Heintze-Karcher-type gaps on a test surface.")
    ambient(p)
    family(p)
    p = add("weingarten", "Whether sigma_p is constant on a test surface.")
    ambient(p)
    family(p)
    p = add("bray-probe", "Area excess of perturbed spheres over volume-matched spheres of symmetry.")
    p.add_argument("--n", type=_dimension, default=3)
    p.add_argument("--base-radius", type=_positive, default=2.0)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--eps-min", type=_positive, default=0.002)
    p.add_argument("--eps-max", type=_positive, default=0.02)
    p.add_argument("--k-max", type=int, default=4)
    p = add("candidates", "Two-sphere isoperimetric candidates of a given volume.")
    p.add_argument("--n", type=_dimension, default=3)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--volume", type=_positive)
    g.add_argument("--r1", type=_positive, help="outer radius of an asymmetric candidate fixing the volume")
    p = add("profile", "Candidate areas against the Euclidean bound on a log volume grid.")
    p.add_argument("--n", type=_dimension, default=3)
    p.add_argument("--v-min", type=_positive, default=10.0)
    p.add_argument("--v-max", type=_positive, default=1e6)
    p.add_argument("--steps", type=int, default=13)
    p = add("offcenter", "Expansions of off-center balls against quadrature.")
    p.add_argument("--n", type=_dimension, default=3)
    p.add_argument("--r", type=_positive, default=1.0)
    p.add_argument("--a", type=_float_list, default=[10.0, 20.0, 40.0])
    p = add("perturbed-ball", "The perturbed off-center ball and its isoperimetric deficit.", tol=1e-12)
    p.add_argument("--n", type=_dimension, default=3)
    p.add_argument("--r", type=_positive, default=1.0)
    p.add_argument("--a", type=_float_list, default=[20.0, 40.0, 80.0])
    return parser


def _apply_env(parser, env):
    """Use ``SCHWARZGEOM_*`` variables as defaults of the matching options."""
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sp in action.choices.values():
                _apply_env(sp, env)
            continue
        if not action.option_strings or action.dest in ("help",):
            continue
        key = ENV_PREFIX + action.dest.upper()
        if key in env:
            raw = env[key]
            try:
                action.default = action.type(raw) if action.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value in {key}: {exc}")
            if action.choices is not None and action.default not in action.choices:
                raise UsageError(f"bad value in {key}: {raw!r} not in {list(action.choices)}")
            action.required = False


def parse_config(argv=None, env=None) -> RunConfig:
    parser = build_parser()
    _apply_env(parser, os.environ if env is None else env)
    ns = parser.parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "format", "output")}
    if opts.get("grid", 4) < 4:
        raise UsageError(f"schwarzgeom {ns.command}: error: --grid must be at least 4")
    return RunConfig(ns.command, opts, ns.format, ns.output)


class AssertionFailed(Exception):
    pass


def _default_s0(w):
    if math.isfinite(w.s_max):
        return 0.5 * (w.s_min + w.s_max)
    return 2.0 * w.s_min if w.s_min > 0 else 1.0


def _surface(o):
    w = warped.WarpingFunction.from_constants(o["n"], o["m"], o["kappa"])
    s0 = o["s0"] if o["s0"] is not None else _default_s0(w)
    eps = o["eps"]
    if o["family"] == "legendre" and eps != 0:
        eps = surface.admissible_eps(w, s0, eps, k=o["k"], grid=o["grid"])
    surf = surface.build_surface(w, o["family"], s0=s0, eps=eps, k=o["k"], center=o["center"], grid=o["grid"])
    return w, surf, eps


def _degrees(o):
    n = o["n"]
    return range(1, n) if o["p"] is None else [o["p"]]


def cmd_check_conditions(o):
    w = warped.WarpingFunction.from_constants(o["n"], o["m"], o["kappa"])
    rep = warped.check_conditions(w, warped.default_grid(w, o["grid"]))
    yield {
        "s_min": w.s_min,
        "s_max": w.s_max,
        "grid_min": rep.grid_min,
        "grid_max": rep.grid_max,
        "h1_ok": rep.h1_ok,
        "h2_ok": rep.h2_ok,
        "h3_ok": rep.h3_ok,
        "h4_ok": rep.h4_ok,
        "pass": rep.all_ok,
    }


def cmd_minkowski(o):
    w, surf, eps = _surface(o)
    geom = surface.surface_geometry(surf)
    tol = o["tol"]
    hk = surface.heintze_karcher_gap(geom)
    hk_scale = surface.heintze_karcher_scale(geom)
    for p in _degrees(o):
        gap = surface.minkowski_gap(geom, p)
        scale = surface.minkowski_scale(geom, p)
        pair = surface.newton_divergence_pairing(geom, p)
        ok = gap >= -tol * max(scale, 1.0) and hk >= -tol * max(hk_scale, 1.0) and pair.min() >= -tol
        yield {
            "p": p,
            "eps_used": eps,
            "gap": gap,
            "scale": scale,
            "pairing_min": float(pair.min()),
            "pairing_integral": geom.integrate(pair),
            "hk_gap": hk,
            "hk_scale": hk_scale,
            "convex": geom.convex,
            "pass": bool(ok),
        }


def cmd_weingarten(o):
    w, surf, eps = _surface(o)
    geom = surface.surface_geometry(surf)
    is_slice = o["family"] == "slice" or eps == 0 or (o["family"] == "offcenter" and o["center"] == 0)
    for p in _degrees(o):
        const, var = surface.weingarten_slice_test(geom, p, o["tol"])
        yield {
            "p": p,
            "eps_used": eps,
            "sigma_variation": var,
            "constant_sigma": const,
            "is_slice": is_slice,
            "pass": const == is_slice,
        }


def _random_shape(rng, k_max):
    c = np.zeros(k_max + 1)
    c[1:] = rng.normal(size=k_max)
    x = np.linspace(-1, 1, 2001)
    return c / np.max(np.abs(L.legval(x, c)))


def cmd_bray_probe(o):
    rng = np.random.default_rng(o["seed"])
    if o["eps_min"] > o["eps_max"]:
        raise GeometryError("eps-min exceeds eps-max")
    for i in range(o["samples"]):
        c = _random_shape(rng, o["k_max"])
        eps = float(rng.uniform(o["eps_min"], o["eps_max"]))
        d = doubled.bray_probe(o["n"], o["base_radius"], c, eps, nodes=o["grid"]).area_difference
        d2 = doubled.bray_probe(o["n"], o["base_radius"], c, eps / 2, nodes=o["grid"]).area_difference
        expo = math.log2(d / d2) if d > 0 and d2 > 0 else math.nan
        yield {
            "sample": i,
            "eps": eps,
            "area_difference": d,
            "area_difference_half": d2,
            "eps_exponent": expo,
            "pass": d >= -o["tol"] and d2 >= -o["tol"],
        }


def cmd_candidates(o):
    n = o["n"]
    V = o["volume"] if o["volume"] is not None else doubled.asymmetric_from_outer(n, o["r1"]).volume
    cands = doubled.isoperimetric_candidates(n, V)
    bound = doubled.euclidean_ratio_bound(n, V)
    sym = [c.area for c in cands if c.label == "symmetric"]
    for c in cands:
        resid = c.volume / V - 1
        h_inner = doubled.sphere_mean_curvature(n, c.r0, "inward")
        ok = abs(resid) <= max(o["tol"], 1e-10) and abs(h_inner - c.H) <= 1e-12 * max(1.0, abs(c.H))
        if c.label != "symmetric" and sym:
            ok = ok and c.area < sym[0]
        yield {
            "label": c.label,
            "r0": c.r0,
            "r1": c.r1,
            "H": c.H,
            "volume": c.volume,
            "volume_residual": resid,
            "area": c.area,
            "euclidean_bound": bound,
            "pass": bool(ok),
        }


def cmd_profile(o):
    if not o["v_min"] < o["v_max"] or o["steps"] < 2:
        raise GeometryError("need v-min < v-max and steps >= 2")
    for pt in doubled.profile_sweep(o["n"], o["v_min"], o["v_max"], o["steps"]):
        yield {
            "V": pt.V,
            "r0_sym": pt.r0_sym,
            "r1_sym": pt.r1_sym,
            "area_sym": pt.area_symmetric,
            "r0_asym": pt.r0_asym,
            "r1_asym": pt.r1_asym,
            "area_asym": pt.area_asymmetric,
            "euclidean_bound": pt.euclidean_bound,
            "best_label": pt.best_label,
        }


def cmd_offcenter(o):
    n, r, avals = o["n"], o["r"], o["a"]
    nodes = o["grid"]
    fa = offcenter.convergence_order(n, r, avals, "area", nodes)
    fv = offcenter.convergence_order(n, r, avals, "volume", nodes)
    coef = offcenter.fit_deficit_coefficient(n, r, avals, nodes).coefficient
    expected = 2 * n + 1
    ok = (not fa.inconclusive and not fv.inconclusive and abs(fa.order - expected) <= 0.5 and abs(fv.order - expected) <= 0.5)
    for a in avals:
        b = offcenter.OffCenterBall(n, r, a)
        ae, ve = offcenter.area_exact(b, nodes), offcenter.volume_exact(b, nodes)
        ax, vx = offcenter.area_expansion(b).value, offcenter.volume_expansion(b).value
        yield {
            "n": n,
            "r": r,
            "a": a,
            "area_exact": ae,
            "area_expansion": ax,
            "area_diff": abs(ae - ax),
            "volume_exact": ve,
            "volume_expansion": vx,
            "volume_diff": abs(ve - vx),
            "area_order": fa.order,
            "volume_order": fv.order,
            "expected_order": expected,
            "inconclusive": fa.inconclusive or fv.inconclusive,
            "deficit": offcenter.iso_ratio_deficit(b, nodes=nodes),
            "deficit_coefficient": coef,
            "pass": bool(ok),
        }


def cmd_perturbed_ball(o):
    n, r, avals = o["n"], o["r"], o["a"]
    nodes = o["grid"]
    balls = [offcenter.OffCenterBall(n, r, a) for a in avals]
    profs = [offcenter.perturbation_profile(b, nodes) for b in balls]
    if len(avals) >= 2:
        c_order = loglog_slope(avals, [p.c for p in profs])
        f_order = loglog_slope(avals, [p.max_abs for p in profs])
    else:
        c_order = f_order = math.nan
    for b, prof in zip(balls, profs):
        res = offcenter.perturbed_area_volume(b, nodes)
        delta = offcenter._deficit(res.area_excess, res.volume_excess, n)
        yield {
            "n": n,
            "r": r,
            "a": b.a_mag,
            "c": prof.c,
            "max_abs_f": prof.max_abs,
            "laplacian_residual": prof.laplacian_residual,
            "mean_f": res.mean_f,
            "area": res.area,
            "area_expansion": offcenter.perturbed_area_expansion(b).value,
            "volume": res.volume,
            "volume_expansion": offcenter.perturbed_volume_expansion(b).value,
            "deficit": delta,
            "deficit_scaled": delta * b.a_mag ** (2 * n) / r**4,
            "deficit_limit": offcenter.iso_ratio_coefficient(n),
            "c_order": c_order,
            "max_abs_f_order": f_order,
            "pass": delta > 0 and abs(res.mean_f) <= o["tol"],
        }


COMMANDS = {
    "check-conditions": cmd_check_conditions,
    "minkowski": cmd_minkowski,
    "weingarten": cmd_weingarten,
    "bray-probe": cmd_bray_probe,
    "candidates": cmd_candidates,
    "profile": cmd_profile,
    "offcenter": cmd_offcenter,
    "perturbed-ball": cmd_perturbed_ball,
}


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render(rows, columns, fmt) -> str:
    if fmt == "json":
        return json.dumps([{c: _json_value(r[c]) for c in columns} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def run(config: RunConfig, stream=None) -> int:
    """Execute ``config`` and write its report; returns the exit status."""
    columns = list(COLUMN_DOCS[config.command]) + ["config_hash"]
    rows, status, message = [], EXIT_OK, None
    try:
        for row in COMMANDS[config.command](config.options):
            row["config_hash"] = config.config_hash
            rows.append(row)
            if row.get("pass") is False:
                status = EXIT_ASSERT
                message = f"assertion failed in row {len(rows) - 1}"
                break
    except NumericError as exc:
        status, message = EXIT_NUMERIC, f"numeric error: {exc}"
    except (GeometryError, ValueError) as exc:
        status, message = EXIT_PRECONDITION, f"precondition error: {exc}"
    text = render(rows, columns, config.fmt)
    if config.output:
        with open(config.output, "w", newline="") as fh:
            fh.write(text)
    else:
        out = sys.stdout if stream is None else stream
        out.write(text)
        out.flush()
    if message:
        print(message, file=sys.stderr)
    return status


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
