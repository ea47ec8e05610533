"""Command-line surface tying the solvers into reproducible experiments.

Each subcommand writes deterministic JSON/CSV files (floats at 17
significant digits) plus rendered figures into --out.  Parameters come
from per-command flags or a --config JSON file; explicit flags win over
config values, which win over the built-in defaults.

Exit codes: 0 success, 2 configuration or file-format error, 3 domain or
precondition error, 4 solver failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fieldfile, figures, friedrichs, hodge_disc, liouville, surfaces
from .errors import DomainError, SolverError
from .geometry import (
    MINKOWSKI_GRAPH,
    Point2,
    best_fit_line,
    build_lens_domain,
    classify,
    extremal_operator_coefficients,
    trace_characteristic,
)
from .grids import CARTESIAN, GridField, field_from_function


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# parameter plumbing

_DEFAULTS: dict[str, dict] = {
    "classify-map": {
        "xmin": -2.0, "xmax": 2.0, "ymin": -2.0, "ymax": 2.0,
        "nx": 101, "ny": 101, "type_tol": 1e-10,
    },
    "chars": {
        "starts": None, "count": 6, "seed": 7, "branch": 1,
        "step": 1e-3, "max_len": 2.0,
    },
    "domain": {"x0": 0.5, "eps": 0.25, "leaves": 5},
    "residual": {
        "mode": "extremal", "kind": None, "field": None,
        "density": "euclidean", "gamma_ad": 1.4, "nx": 65, "ny": 65,
    },
    "legendre": {"field": None, "nx": 33, "ny": 33},
    "dualize": {
        "c": 1.0, "density": "euclidean", "gamma_ad": 1.4,
        "field": None, "nx": 65, "ny": 65,
    },
    "energy-profile": {
        "preset": "constant", "q0": 0.5, "density": "euclidean",
        "gamma_ad": 1.4, "n": 5, "rmax": 4.0, "nr": 24,
        "radial": 32, "angular": 16,
    },
    "solve-keldysh": {
        "eta_crit": 0.5, "k": 1.0, "sigma": 1.0, "tau": -1.0,
        "a": 1.0, "c": 1.0, "resolutions": "8,16,32",
    },
    "verify-sympos": {
        "eta_crit": 0.5, "k": 1.0, "sigma": 1.0, "tau": -1.0,
        "a": 1.0, "c": 1.0, "samples": 257,
    },
    "uniqueness-demo": {
        "x0": 0.5, "eps": 0.25, "resolutions": "8,16,32", "data": "zero",
    },
    "overdetermination": {
        "x0": 0.5, "eps": 0.25, "resolutions": "8,16,32",
        "amplitude": 0.1,
    },
}

_COMMON_DEFAULTS = {"out": ".", "prefix": None, "no_figures": False,
                    "config": None}


def _add_common(sub):
    sub.add_argument("--out", default=argparse.SUPPRESS,
                     help="output directory (default: current)")
    sub.add_argument("--prefix", default=argparse.SUPPRESS,
                     help="output file prefix (default: command name)")
    sub.add_argument("--no-figures", action="store_true",
                     default=argparse.SUPPRESS, dest="no_figures",
                     help="skip figure rendering")
    sub.add_argument("--config", default=argparse.SUPPRESS,
                     help="JSON file with parameter values; explicit "
                          "flags override it")


def _flag(sub, name, type_, help_):
    sub.add_argument(name, type=type_, default=argparse.SUPPRESS,
                     dest=name.lstrip("-").replace("-", "_"), help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedpde",
        description="Mixed-type metric, characteristic, and degenerate "
                    "solver experiments.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("classify-map",
                        help="type map of the gradient-graph operator")
    for nm in ("--xmin", "--xmax", "--ymin", "--ymax"):
        _flag(p, nm, float, "map extent")
    _flag(p, "--nx", int, "grid nodes in x")
    _flag(p, "--ny", int, "grid nodes in y")
    _flag(p, "--type-tol", float, "parabolic band half-width")
    _add_common(p)

    p = subs.add_parser("chars", help="trace characteristic curves")
    _flag(p, "--starts", str, "semicolon-separated x,y start points")
    _flag(p, "--count", int, "random start count when --starts absent")
    _flag(p, "--seed", int, "random seed for start points")
    _flag(p, "--branch", int, "characteristic family, +1 or -1")
    _flag(p, "--step", float, "arc-length step")
    _flag(p, "--max-len", float, "arc-length budget per trace")
    _add_common(p)

    p = subs.add_parser("domain", help="emit a lens domain description")
    _flag(p, "--x0", float, "chord abscissa in (0, 1)")
    _flag(p, "--eps", float, "inner arc radius in (0, x0)")
    _flag(p, "--leaves", int, "foliation leaves to list")
    _add_common(p)

    p = subs.add_parser("residual",
                        help="extremal or Hodge residual of a field")
    _flag(p, "--mode", str, "extremal | hodge")
    _flag(p, "--kind", str, "extremal kind (minkowski_graph | "
                            "euclidean_minimal | lorentz_maximal)")
    _flag(p, "--field", str, "input field file (default: built-in sample)")
    _flag(p, "--density", str, "density kind for hodge mode")
    _flag(p, "--gamma-ad", float, "adiabatic exponent for polytropic")
    _flag(p, "--nx", int, "sample grid nodes in x")
    _flag(p, "--ny", int, "sample grid nodes in y")
    _add_common(p)

    p = subs.add_parser("legendre", help="hodograph-plane transform")
    _flag(p, "--field", str, "input field file (default: built-in sample)")
    _flag(p, "--nx", int, "sample grid nodes in x")
    _flag(p, "--ny", int, "sample grid nodes in y")
    _add_common(p)

    p = subs.add_parser("dualize",
                        help="reconstruct the dual form of a solution")
    _flag(p, "--c", float, "constant-field strength (default field)")
    _flag(p, "--density", str, "density kind: euclidean | minkowski")
    _flag(p, "--gamma-ad", float, "adiabatic exponent (unused by the pair)")
    _flag(p, "--field", str, "input 2-component field file")
    _flag(p, "--nx", int, "grid nodes in x")
    _flag(p, "--ny", int, "grid nodes in y")
    _add_common(p)

    p = subs.add_parser("energy-profile",
                        help="nested-ball energy growth and verdict")
    _flag(p, "--preset", str, "field preset: zero | constant | gaussian")
    _flag(p, "--q0", float, "speed for the constant preset")
    _flag(p, "--density", str, "density kind")
    _flag(p, "--gamma-ad", float, "adiabatic exponent for polytropic")
    _flag(p, "--n", int, "base dimension")
    _flag(p, "--rmax", float, "largest ball radius")
    _flag(p, "--nr", int, "number of nested radii")
    _flag(p, "--radial", int, "radial quadrature panels per shell")
    _flag(p, "--angular", int, "angular quadrature panels")
    _add_common(p)

    p = subs.add_parser("solve-keldysh",
                        help="least-squares solve of the degenerate system")
    _flag(p, "--eta-crit", float, "type-change height of K")
    _flag(p, "--k", float, "lower-order coefficient")
    _flag(p, "--sigma", float, "boundary combination weight on w1")
    _flag(p, "--tau", float, "boundary combination weight on w2")
    _flag(p, "--a", float, "multiplier diagonal")
    _flag(p, "--c", float, "multiplier off-diagonal")
    _flag(p, "--resolutions", str, "comma-separated eta interval counts")
    _add_common(p)

    p = subs.add_parser("verify-sympos",
                        help="multiplier and boundary admissibility audit")
    _flag(p, "--eta-crit", float, "type-change height of K")
    _flag(p, "--k", float, "lower-order coefficient")
    _flag(p, "--sigma", float, "boundary combination weight on w1")
    _flag(p, "--tau", float, "boundary combination weight on w2")
    _flag(p, "--a", float, "multiplier diagonal")
    _flag(p, "--c", float, "multiplier off-diagonal")
    _flag(p, "--samples", int, "audit sample count")
    _add_common(p)

    p = subs.add_parser("uniqueness-demo",
                        help="open-problem solve on the lens domain")
    _flag(p, "--x0", float, "chord abscissa")
    _flag(p, "--eps", float, "inner arc radius")
    _flag(p, "--resolutions", str, "comma-separated radial interval counts")
    _flag(p, "--data", str, "data preset: zero | theta | r2theta")
    _add_common(p)

    p = subs.add_parser("overdetermination",
                        help="gap between induced and prescribed "
                             "characteristic data")
    _flag(p, "--x0", float, "chord abscissa")
    _flag(p, "--eps", float, "inner arc radius")
    _flag(p, "--resolutions", str, "comma-separated radial interval counts")
    _flag(p, "--amplitude", float, "hyperbolic data perturbation size")
    _add_common(p)

    return parser


def _merge(command: str, explicit: dict) -> dict:
    params = dict(_COMMON_DEFAULTS)
    params.update(_DEFAULTS[command])
    config_path = explicit.get("config")
    if config_path is not None:
        try:
            doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in doc.items():
            if key not in params:
                raise ConfigError(
                    f"unknown config key {key!r} for {command}")
            params[key] = value
    params.update(explicit)
    return params


def _validate(command: str, params: dict) -> None:
    for key, value in params.items():
        if key.endswith("tol") and not (isinstance(value, (int, float))
                                        and value > 0):
            raise ConfigError(f"{key} must be positive")
    for key in ("nx", "ny", "nr", "samples"):
        if key in params and int(params[key]) < 8:
            raise ConfigError(f"{key} must be at least 8")
    if "resolutions" in params:
        params["resolutions"] = _parse_resolutions(params["resolutions"])
    if "branch" in params and params["branch"] not in (1, -1):
        raise ConfigError("branch must be +1 or -1")


def _parse_resolutions(spec) -> list[int]:
    if isinstance(spec, (list, tuple)):
        vals = [int(v) for v in spec]
    else:
        try:
            vals = [int(tok) for tok in str(spec).split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"bad resolution list {spec!r}")
    if not vals or any(v < 8 for v in vals):
        raise ConfigError("resolutions must all be at least 8")
    return vals


class _Out:
    """Output directory, prefix, and the list of files written."""

    def __init__(self, command: str, params: dict):
        self.dir = Path(params["out"])
        self.dir.mkdir(parents=True, exist_ok=True)
        prefix = params["prefix"] or command.replace("-", "_")
        self.prefix = prefix
        self.figures = not params["no_figures"]
        self.written: list[Path] = []

    def path(self, suffix: str) -> Path:
        p = self.dir / f"{self.prefix}_{suffix}"
        self.written.append(p)
        return p

    def figure(self, suffix: str) -> Path | None:
        if not self.figures:
            return None
        return self.path(suffix)


def _load_field(path: str) -> GridField:
    try:
        return fieldfile.read_field(path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read field {path}: {exc}")


def _unit_square_field(nx: int, ny: int, fn) -> GridField:
    return field_from_function((0.0, 0.0),
                               (1.0 / (nx - 1), 1.0 / (ny - 1)),
                               (nx, ny), fn)


# ---------------------------------------------------------------------------
# command handlers

def _cmd_classify_map(params, out: _Out):
    nx, ny = int(params["nx"]), int(params["ny"])
    xs = np.linspace(params["xmin"], params["xmax"], nx)
    ys = np.linspace(params["ymin"], params["ymax"], ny)
    disc = np.empty((nx, ny))
    counts = {"elliptic": 0, "hyperbolic": 0, "parabolic": 0}
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            coeffs = extremal_operator_coefficients(Point2(x, y))
            tc = classify(coeffs, tol=params["type_tol"])
            disc[i, j] = tc.discriminant
            counts[tc.kind] += 1
    field = GridField((float(xs[0]), float(ys[0])),
                      (float(xs[1] - xs[0]), float(ys[1] - ys[0])),
                      disc, CARTESIAN)
    fieldfile.write_field(field, out.path("discriminant.json"))
    fieldfile.emit_json(
        {"nx": nx, "ny": ny,
         "extent": [params["xmin"], params["xmax"],
                    params["ymin"], params["ymax"]],
         "counts": counts},
        out.path("summary.json"))
    fig = out.figure("map.png")
    if fig:
        figures.type_map_figure(xs, ys, disc, fig)


def _parse_starts(spec: str) -> list[Point2]:
    pts = []
    for tok in spec.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        try:
            x, y = (float(v) for v in tok.split(","))
        except ValueError:
            raise ConfigError(f"bad start point {tok!r}")
        pts.append(Point2(x, y))
    if not pts:
        raise ConfigError("no start points given")
    return pts


def _cmd_chars(params, out: _Out):
    if params["starts"]:
        starts = _parse_starts(params["starts"])
    else:
        rng = np.random.default_rng(int(params["seed"]))
        starts = []
        for _ in range(int(params["count"])):
            r = rng.uniform(1.05, 1.9)
            ang = rng.uniform(0.0, 2.0 * math.pi)
            starts.append(Point2(r * math.cos(ang), r * math.sin(ang)))
    rows = []
    report = []
    polylines = []
    for idx, start in enumerate(starts):
        path = trace_characteristic(start, int(params["branch"]),
                                    params["step"], params["max_len"])
        polylines.append(path.points)
        for j, (x, y) in enumerate(path.points):
            rows.append((idx, j, float(x), float(y)))
        line, dev = best_fit_line(path.points)
        report.append({
            "start": [start.x, start.y],
            "branch": path.branch,
            "points": int(path.points.shape[0]),
            "arc_length": path.arc_length(),
            "line": line.to_json_dict(),
            "max_deviation": dev,
            "distance_to_origin": line.distance(Point2(0.0, 0.0)),
        })
    fieldfile.write_csv(out.path("paths.csv"),
                        ["path", "index", "x", "y"], rows)
    fieldfile.emit_json({"paths": report}, out.path("lines.json"))
    fig = out.figure("paths.png")
    if fig:
        figures.characteristics_figure(polylines, fig)


def _cmd_domain(params, out: _Out):
    dom = build_lens_domain(params["x0"], params["eps"])
    doc = dom.to_json_dict()
    doc["foliation_leaves"] = [
        {"touch_angle": leaf.touch_angle,
         "upper": leaf.upper.to_json_dict(),
         "lower": leaf.lower.to_json_dict(),
         "pole": [leaf.pole.x, leaf.pole.y]}
        for leaf in dom.foliation_leaves(int(params["leaves"]))]
    fieldfile.emit_json(doc, out.path("domain.json"))
    fig = out.figure("domain.png")
    if fig:
        figures.domain_figure(dom, int(params["leaves"]), fig)


def _cmd_residual(params, out: _Out):
    mode = params["mode"]
    nx, ny = int(params["nx"]), int(params["ny"])
    if mode == "extremal":
        kind = params["kind"] or MINKOWSKI_GRAPH
        if params["field"]:
            f = _load_field(params["field"])
        else:
            f = _unit_square_field(nx, ny,
                                   lambda x, y: 0.25 * (x**2 + y**2))
        res = surfaces.extremal_residual(f, kind)
        fieldfile.write_field(res, out.path("residual.json"))
        vals = res.scalar()
        good = np.isfinite(vals)
        fieldfile.emit_json(
            {"mode": mode, "kind": kind,
             "max_abs": float(np.abs(vals[good]).max())},
            out.path("report.json"))
        fig = out.figure("residual.png")
        if fig:
            figures.heatmap_figure(res, fig, title=f"{kind} residual")
    elif mode == "hodge":
        dens = surfaces.make_density(params["density"], params["gamma_ad"])
        if params["field"]:
            omega = _load_field(params["field"])
        else:
            omega = _unit_square_field(nx, ny,
                                       lambda x, y: np.stack([x, y], -1))
        closed, coclosed = surfaces.hodge_residual(omega, dens)
        fieldfile.write_field(closed, out.path("closed.json"))
        fieldfile.write_field(coclosed, out.path("coclosed.json"))
        cv, dv = closed.scalar(), coclosed.scalar()
        fieldfile.emit_json(
            {"mode": mode, "density": dens.kind,
             "max_closedness": float(np.abs(cv[np.isfinite(cv)]).max()),
             "max_coclosedness": float(np.abs(dv[np.isfinite(dv)]).max())},
            out.path("report.json"))
        fig = out.figure("coclosed.png")
        if fig:
            figures.heatmap_figure(coclosed, fig, title="coclosedness")
    else:
        raise ConfigError(f"unknown residual mode {mode!r}")


def _cmd_legendre(params, out: _Out):
    if params["field"]:
        f = _load_field(params["field"])
    else:
        nx, ny = int(params["nx"]), int(params["ny"])
        h = 1.0 / (nx - 1)
        f = field_from_function((0.2, 0.2), (h, h), (nx, ny),
                                lambda x, y: 0.5 * (x**2 + y**2))
    hodo = surfaces.legendre_transform(f)
    phi = hodo.phi
    fieldfile.write_field(phi, out.path("hodograph.json"))
    masked = int(phi.mask.sum()) if phi.mask is not None else 0
    fieldfile.emit_json(
        {"dims": [phi.dims[0], phi.dims[1]],
         "origin": [phi.origin[0], phi.origin[1]],
         "spacing": [phi.spacing[0], phi.spacing[1]],
         "masked_nodes": masked},
        out.path("report.json"))
    fig = out.figure("hodograph.png")
    if fig:
        figures.heatmap_figure(phi, fig, title="hodograph potential")


def _cmd_dualize(params, out: _Out):
    dens = surfaces.make_density(params["density"], params["gamma_ad"])
    if params["field"]:
        omega = _load_field(params["field"])
    else:
        nx, ny = int(params["nx"]), int(params["ny"])
        cval = params["c"]
        omega = _unit_square_field(
            nx, ny, lambda x, y: np.stack([np.full_like(x, cval),
                                           np.zeros_like(x)], -1))
    sigma, report = surfaces.dual_form(omega, dens)
    fieldfile.write_field(sigma, out.path("sigma.json"))
    cv = report.closedness.scalar()
    dv = report.coclosedness.scalar()
    fieldfile.emit_json(
        {"density": dens.kind,
         "dual_kind": report.dual_kind,
         "max_closedness": report.max_closedness,
         "max_coclosedness": report.max_coclosedness,
         "path_defect": report.path_defect,
         "max_dual_closedness": float(np.abs(cv[np.isfinite(cv)]).max()),
         "max_dual_coclosedness": float(np.abs(dv[np.isfinite(dv)]).max())},
        out.path("report.json"))
    fig = out.figure("sigma.png")
    if fig:
        figures.heatmap_figure(sigma, fig, title="dual potential")


_SAMPLERS = {
    "zero": lambda n, q0: liouville.zero_sampler(n),
    "constant": lambda n, q0: liouville.constant_sampler(n, q0),
    "gaussian": lambda n, q0: liouville.gaussian_sampler(n),
}


def _cmd_energy_profile(params, out: _Out):
    preset = params["preset"]
    if preset not in _SAMPLERS:
        raise ConfigError(f"unknown field preset {preset!r}")
    n = int(params["n"])
    q0 = params["q0"]
    sampler = _SAMPLERS[preset](n, q0)
    dens = surfaces.make_density(params["density"], params["gamma_ad"])
    nr = int(params["nr"])
    radii = np.linspace(params["rmax"] / nr, params["rmax"], nr)
    quad = liouville.QuadratureSpec(int(params["radial"]),
                                    int(params["angular"]))
    profile = liouville.conformal_profile(sampler, dens, radii, quad)
    fieldfile.write_csv(out.path("profile.csv"), ["r", "E", "conformal"],
                        zip(profile.radii, profile.energies,
                            profile.conformal))
    fit_doc = None
    fit_error = None
    try:
        fit = liouville.growth_fit(profile)
        k_fit = fit.k
        C_fit = fit.C
        fit_doc = {"C": fit.C, "k": fit.k, "residual": fit.residual}
    except DomainError as exc:
        k_fit = getattr(exc, "k", None)
        if k_fit is None:
            raise
        C_fit = 0.0
        fit_error = str(exc)
    max_q = {"zero": 0.0, "constant": q0, "gaussian": 1.0}[preset]
    bounded = (profile.q_crit is None) or (max_q < profile.q_crit)
    rho_noninc = dens.kind in (surfaces.EUCLIDEAN, surfaces.POLYTROPIC)
    verdict = liouville.liouville_verdict(
        n, k_fit, rho_prime_nonpositive=rho_noninc,
        bounded_by_Qcrit=bounded, stationary=sampler.stationary, C=C_fit)
    fieldfile.emit_json(
        {"preset": preset, "density": dens.kind, "n": n,
         "q_crit": profile.q_crit,
         "max_speed": max_q,
         "monotone_conformal": profile.monotone_conformal,
         "fit": fit_doc, "fit_error": fit_error,
         "verdict": verdict.to_json_dict()},
        out.path("verdict.json"))
    fig = out.figure("profile.png")
    if fig:
        curves = {"ball energy": profile.energies,
                  "conformal": profile.conformal}
        loglog = all(np.all(v > 0) for v in curves.values())
        figures.curves_figure(profile.radii, curves, fig, "r", "energy",
                              loglog=loglog, title="energy growth")


def _keldysh_setup(params):
    K = friedrichs.linear_type_change(params["eta_crit"])
    sys_ = friedrichs.build_system(K, params["k"])
    return K, sys_


def _cmd_solve_keldysh(params, out: _Out):
    K, sys_ = _keldysh_setup(params)
    a, c, k = params["a"], params["c"], params["k"]
    sigma, tau = params["sigma"], params["tau"]
    _, prof = friedrichs.apply_multiplier(sys_, a, c)
    _, pos = friedrichs.positivity_matrix(sys_, a, c)
    adm = friedrichs.boundary_admissibility(
        sigma, tau, a, c, float(K.K(K.R)), k, positivity=pos)
    lo = abs(a * k) / (2.0 * K.nu0)
    K0 = float(K.K(0.0))
    hi = a / math.sqrt(-K0) if K0 < 0 else math.inf
    choice = friedrichs.MultiplierChoice(a, c, prof.min_value, (lo, hi))

    def u_parts(eta, xi):
        return (eta * np.sin(xi), np.sin(xi),
                -0.5 * eta**2 * np.sin(xi), 0.5 * eta**2 * np.cos(xi))

    def f(eta, xi):
        ue, uee, uxx, ux = u_parts(eta, xi)
        return float(friedrichs.manufactured_rhs(eta, ue, uee, uxx, ux,
                                                 K, k))

    R = K.R

    def g(xi):
        return sigma * R * math.sin(xi) + tau * 0.5 * R**2 * math.cos(xi)

    rows = []
    errors = []
    last = None
    for m in params["resolutions"]:
        sol = friedrichs.solve_strong(sys_, choice, f, (m, m), sigma, tau,
                                      g=g)
        h = R / m
        etas = sol.field.axis0()
        xis = sol.field.axis1()
        Eg, Xg = np.meshgrid(etas, xis, indexing="ij")
        exact = np.stack([Eg * np.sin(Xg), 0.5 * Eg**2 * np.cos(Xg)], -1)
        diff = sol.field.values - exact
        l2 = float(np.sqrt(h * (2 * math.pi / m) * np.sum(diff**2)))
        errors.append(l2)
        rows.append((h, sol.interior_residual, sol.boundary_defect,
                     pos.eig_min, adm.mu_eig_min))
        last = sol
    fieldfile.write_csv(
        out.path("study.csv"),
        ["h", "interior_residual", "boundary_defect", "kappa_min_eig",
         "mu_min_eig"], rows)
    ratios = [errors[i] / errors[i + 1] if errors[i + 1] > 0 else math.inf
              for i in range(len(errors) - 1)]
    fieldfile.emit_json(
        {"a": a, "c": c, "k": k, "eta_crit": params["eta_crit"],
         "det_E_min": prof.min_value,
         "feasible_interval": [choice.feasible_interval[0],
                               choice.feasible_interval[1]],
         "resolutions": list(params["resolutions"]),
         "l2_errors": errors, "error_ratios": ratios,
         "admissibility": adm.verdict},
        out.path("report.json"))
    fieldfile.write_field(last.field, out.path("solution.json"))
    fig = out.figure("solution.png")
    if fig:
        figures.heatmap_figure(last.field, fig, title="solved components")


def _cmd_verify_sympos(params, out: _Out):
    K, sys_ = _keldysh_setup(params)
    a, c, k = params["a"], params["c"], params["k"]
    ms, prof = friedrichs.apply_multiplier(sys_, a, c,
                                           samples=int(params["samples"]))
    _, pos = friedrichs.positivity_matrix(sys_, a, c,
                                          samples=int(params["samples"]))
    adm = friedrichs.boundary_admissibility(
        params["sigma"], params["tau"], a, c, float(K.K(K.R)), k,
        positivity=pos)
    fieldfile.emit_json(
        {"a": a, "c": c, "k": k, "eta_crit": params["eta_crit"],
         "det_E_min": prof.min_value,
         "symmetry_defect": ms.symmetry_defect,
         "kappa_eig_min": pos.eig_min,
         "kappa_eig_max": pos.eig_max,
         "kappa_det_formula_defect": pos.det_formula_defect,
         "mu_eigs": [adm.mu_eigs_at_first_sample[0],
                     adm.mu_eigs_at_first_sample[1]],
         "mu_eig_min": adm.mu_eig_min,
         "mu_eig_max": adm.mu_eig_max,
         "boundary_kernel_defect": adm.boundary_kernel_defect,
         "ranges_intersect_trivially": adm.ranges_intersect_trivially,
         "null_spaces_span": adm.null_spaces_span,
         "verdict": adm.verdict},
        out.path("report.json"))
    fig = out.figure("detE.png")
    if fig:
        figures.eta_profiles_figure(prof.etas, {"det E": prof.values}, fig,
                                    title="multiplier invertibility")


_LENS_DATA = {
    "zero": (lambda r, t: 0.0, None),
    "theta": (lambda r, t: t, None),
    "r2theta": (lambda r, t: r * r * t,
                lambda r, t: t * (4.0 * r * r - 6.0 * r**4)),
}


def _cmd_uniqueness_demo(params, out: _Out):
    preset = params["data"]
    if preset not in _LENS_DATA:
        raise ConfigError(f"unknown data preset {preset!r}")
    data, source = _LENS_DATA[preset]
    dom = build_lens_domain(params["x0"], params["eps"])
    rows = []
    summary = []
    last = None
    for n_r in params["resolutions"]:
        sol = hodge_disc.solve_open_problem(dom, data, n_r, 2 * n_r,
                                            source=source)
        h = (1.0 - params["eps"]) / (n_r + 0.5)
        rows.append(("elliptic", sol.elliptic_residual, h))
        rows.append(("hyperbolic", sol.hyperbolic_residual, h))
        vals = sol.field.values
        good = np.isfinite(vals)
        if sol.field.mask is not None:
            good &= ~sol.field.mask[..., None]
        summary.append({
            "n_r": int(n_r), "h": h,
            "max_abs": float(np.abs(vals[good]).max()),
            "filled_cells": int(sol.filled_cells),
            "trace_range": [float(sol.nu_trace.min()),
                            float(sol.nu_trace.max())],
        })
        last = sol
    fieldfile.write_csv(out.path("residuals.csv"), ["region", "norm", "h"],
                        rows)
    fieldfile.emit_json({"x0": params["x0"], "eps": params["eps"],
                         "data": preset, "levels": summary},
                        out.path("summary.json"))
    fieldfile.write_field(last.field, out.path("field.json"))
    fig = out.figure("field.png")
    if fig:
        figures.heatmap_figure(last.field, fig, title="mixed-type solution")


def _cmd_overdetermination(params, out: _Out):
    dom = build_lens_domain(params["x0"], params["eps"])
    amp = params["amplitude"]
    data = lambda r, t: t                     # noqa: E731
    hyper = lambda r, t: t + amp              # noqa: E731
    rows = []
    for n_r in params["resolutions"]:
        rep = hodge_disc.overdetermination_gap(dom, data, hyper, n_r,
                                               2 * n_r)
        h = (1.0 - params["eps"]) / (n_r + 0.5)
        rows.append((h, rep.gap, rep.upper_gap, rep.lower_gap))
    fieldfile.write_csv(out.path("gaps.csv"),
                        ["h", "gap", "upper_gap", "lower_gap"], rows)
    fieldfile.emit_json(
        {"x0": params["x0"], "eps": params["eps"], "amplitude": amp,
         "gaps": [{"h": r[0], "gap": r[1], "upper_gap": r[2],
                   "lower_gap": r[3]} for r in rows]},
        out.path("summary.json"))
    fig = out.figure("gaps.png")
    if fig:
        hs = [r[0] for r in rows]
        figures.curves_figure(
            hs, {"gap": [r[1] for r in rows],
                 "upper": [r[2] for r in rows],
                 "lower": [r[3] for r in rows]},
            fig, "h", "trace gap", title="induced vs prescribed data")


_HANDLERS = {
    "classify-map": _cmd_classify_map,
    "chars": _cmd_chars,
    "domain": _cmd_domain,
    "residual": _cmd_residual,
    "legendre": _cmd_legendre,
    "dualize": _cmd_dualize,
    "energy-profile": _cmd_energy_profile,
    "solve-keldysh": _cmd_solve_keldysh,
    "verify-sympos": _cmd_verify_sympos,
    "uniqueness-demo": _cmd_uniqueness_demo,
    "overdetermination": _cmd_overdetermination,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    explicit = dict(vars(ns))
    command = explicit.pop("command")
    try:
        params = _merge(command, explicit)
        _validate(command, params)
        out = _Out(command, params)
        _HANDLERS[command](params, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4
    for p in out.written:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
