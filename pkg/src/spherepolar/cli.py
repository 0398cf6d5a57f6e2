"""Command-line experiments: factorizations, c-convexity, Lagrangian test, OT.

Every command writes a structured plain-text ``report.txt`` (with the
resolved configuration and package version) plus CSV files into ``--out``.
Configuration comes from a flat ``key=value`` file overridden by flags.

Exit codes: 0 success, 2 invalid input or configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import c_convexity as cc
from . import closed_form_maps as cf
from . import discrete_ot as ot
from . import group_actions as ga
from . import symplectic_check as sc
from .errors import ConfigError, NotConverged, SolverFailure, SpherePolarError
from .sphere_geom import random_rotation

EXIT_VALIDATION = 2
EXIT_SOLVER = 3

# tolerance keys accepted by --tol and their defaults
TOLERANCES = {
    "group": 1e-10,
    "eig_cluster": 1e-8,
    "lagrangian": 1e-8,
    "marginal": 1e-5,
    "integral": 1e-9,
}


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(",", " ").split()]


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).replace(",", " ").split()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_str(text):
    return None if text in (None, "", "none") else str(text)


COMMON = {"n": int, "N": int, "seed": int, "out": str}

SCHEMAS = {
    "conformal-factorize": {
        "matrix": _opt_str, "a": float, "rotate": _bool, "solver": str, "anneal": _floats,
        "spacing_factor": float, "max_iters": int,
    },
    "projective-factorize": {
        "matrix": _opt_str, "eigenvalues": _floats, "rotate": _bool, "solver": str,
        "anneal": _floats, "spacing_factor": float, "points": int, "max_iters": int,
    },
    "cconvex-check": {"profile": str, "a": float, "sizes": _ints, "amplitude": float},
    "lagrangian-test": {"matrix": _opt_str, "eigenvalues": _floats, "points": int, "bins": int},
    "discrete-ot": {
        "source": str, "target": str, "a": float, "eigenvalues": _floats, "solver": str,
        "anneal": _floats, "max_iters": int,
    },
    "double-cover": {"a": _floats, "samples": int},
    "compare": {"first": str, "second": str, "spacing_factor": float},
}

DEFAULTS = {
    "conformal-factorize": {
        "n": 2, "N": 1000, "seed": 0, "matrix": None, "a": 0.3, "rotate": True,
        "solver": "entropic", "anneal": None, "spacing_factor": 2.0, "max_iters": 20000,
    },
    "projective-factorize": {
        "n": 2, "N": 1000, "seed": 0, "matrix": None, "eigenvalues": [1.0, 2.0, 3.0],
        "rotate": True, "solver": "entropic", "anneal": None, "spacing_factor": 3.0,
        "points": 1000, "max_iters": 20000,
    },
    "cconvex-check": {
        "n": 1, "N": 1024, "seed": 0, "profile": "projective-f", "a": 0.5,
        "sizes": [128, 256, 512, 1024], "amplitude": 10.0,
    },
    "lagrangian-test": {
        "n": 2, "N": 1000, "seed": 0, "matrix": None, "eigenvalues": [1.0, 2.0, 3.0],
        "points": 1000, "bins": 10,
    },
    "discrete-ot": {
        "n": 2, "N": 500, "seed": 0, "source": "auto", "target": "conformal", "a": 0.3,
        "eigenvalues": [1.0, 2.0, 3.0], "solver": "entropic", "anneal": None, "max_iters": 20000,
    },
    "double-cover": {"n": 1, "N": 1000, "seed": 0, "a": [0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0],
                     "samples": 1000},
    "compare": {"n": 2, "N": 0, "seed": 0, "first": "", "second": "", "spacing_factor": 2.0},
}


# -- configuration ---------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _parse_tol(items) -> dict:
    tol = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects KEY=VAL, got {item!r}")
        key, val = item.split("=", 1)
        tol[key.strip()] = val.strip()
    return tol


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < flags, then typed and validated."""
    schema = {**COMMON, **SCHEMAS[command]}
    raw = dict(DEFAULTS[command])
    raw.setdefault("out", ".")
    file_tol = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for key, val in parse_config_text(text).items():
            if key.startswith("tol."):
                file_tol[key[4:]] = val
            elif key in schema:
                raw[key] = val
            else:
                raise ConfigError(f"unknown config key {key!r} for {command}")
    for key in schema:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = {}
    for key, conv in schema.items():
        val = raw.get(key)
        if val is None:
            cfg[key] = None
            continue
        try:
            cfg[key] = conv(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    tol = dict(TOLERANCES)
    for key, val in {**file_tol, **_parse_tol(args.tol)}.items():
        if key not in TOLERANCES:
            raise ConfigError(f"unknown tolerance {key!r}; known: {', '.join(sorted(TOLERANCES))}")
        try:
            tol[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance {key}={val!r}") from exc
    for key, val in tol.items():
        if not val > 0:
            raise ConfigError(f"tolerance {key} must be positive, got {val!r}")
    cfg["tol"] = tol
    if cfg.get("n") is not None and cfg["n"] < 1:
        raise ConfigError("n must be >= 1")
    if cfg.get("seed") is None:
        raise ConfigError("seed is required")
    return cfg


def _fmt(val) -> str:
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, (list, tuple, np.ndarray)):
        return " ".join(_fmt(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in val)
    if isinstance(val, (np.floating,)):
        return repr(float(val))
    return str(val)


class Report:
    """Ordered ``key: value`` lines, written as report.txt."""

    def __init__(self, command: str, cfg: dict):
        self.lines = [f"command: {command}", f"version: {__version__}"]
        for key in sorted(k for k in cfg if k != "tol"):
            self.lines.append(f"config.{key}: {_fmt(cfg[key])}")
        for key in sorted(cfg["tol"]):
            self.lines.append(f"config.tol.{key}: {_fmt(cfg['tol'][key])}")

    def add(self, key, val):
        self.lines.append(f"{key}: {_fmt(val)}")

    def section(self, name):
        self.lines.append(f"[{name}]")

    def matrix(self, key, A):
        for i, row in enumerate(np.atleast_2d(A)):
            self.add(f"{key}_row_{i}", [float(x) for x in row])

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def write(self, out: Path) -> None:
        (out / "report.txt").write_text(self.text())


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cloud(n, N, seed, scheme="auto"):
    if scheme == "auto":
        scheme = {1: "uniform-circle", 2: "fibonacci-s2"}.get(n, "seeded-random")
    return ot.sample_sphere(n, N, scheme, seed)


def _solver_config(cfg) -> dict:
    if cfg["solver"] == "exact":
        return {"method": "exact"}
    if cfg["solver"] != "entropic":
        raise ConfigError(f"solver must be 'entropic' or 'exact', got {cfg['solver']!r}")
    out = {"method": "entropic", "marginal_tol": cfg["tol"]["marginal"], "max_iters": cfg["max_iters"],
           "strict": True}
    if cfg.get("anneal"):
        out["schedule"] = tuple(cfg["anneal"])
    return out


def _add_diagnostics(rep: Report, fac: ot.NumericalFactorization):
    rep.section("discrete")
    for key in sorted(fac.diagnostics):
        val = fac.diagnostics[key]
        rep.add(key, float(val) if isinstance(val, (float, np.floating, int)) and not isinstance(val, bool) else val)


def _add_comparison(rep: Report, stats: dict, spacing: float, factor: float, label: str):
    dev = stats["deviations"]
    tol = factor * spacing
    rep.section(f"comparison:{label}")
    rep.add("mean_deviation", stats["mean"])
    rep.add("max_deviation", stats["max"])
    rep.add("p95_deviation", stats["p95"])
    rep.add("spacing_factor", factor)
    rep.add("threshold", tol)
    rep.add("fraction_within", ot.fraction_within(dev, tol))
    rep.add("fraction_beyond", float(np.mean(dev > tol)))


def _write_deviation_csv(path, points, dev):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index"] + [f"x{i}" for i in range(points.shape[1])] + ["deviation"])
        for i, (p, d) in enumerate(zip(points, dev)):
            wr.writerow([i] + [repr(float(c)) for c in p] + [repr(float(d))])


# -- commands --------------------------------------------------------------------

def cmd_conformal_factorize(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("conformal-factorize", cfg)
    n = cfg["n"]
    if cfg["matrix"]:
        A = ga.read_matrix(cfg["matrix"])
        if A.shape != (n + 2, n + 2):
            n = A.shape[0] - 2
            rep.add("n_from_matrix", n)
    else:
        rng = np.random.default_rng(cfg["seed"])
        e = np.zeros(n + 1)
        e[0] = cfg["a"]
        O = random_rotation(n + 1, rng) if cfg["rotate"] else np.eye(n + 1)
        A = ga.exp_generator(e) @ ga.block_rotation(O)
    ga.validate_lorentz(A, cfg["tol"]["group"])
    pair = ga.cartan_decompose(A, validate=False)
    a = float(np.linalg.norm(pair.generator))
    rep.section("cartan")
    rep.add("generator", list(pair.generator))
    rep.add("boost_parameter", a)
    rep.matrix("rotation", pair.rotation)
    rep.add("reconstruction_error", float(np.max(np.abs(pair.reconstruct() - A))))

    mu = _cloud(n, cfg["N"], cfg["seed"])
    S = lambda X: ga.conformal_act(A, X)
    T_closed = cf.conformal_map_for_generator(pair.generator)
    fac = ot.numerical_polar_factorization(S, mu, _solver_config(cfg))
    _add_diagnostics(rep, fac)
    closed = T_closed(mu.points)
    rep.add("closed_form_max_displacement", float(np.max(ot.geodesic_distance(mu.points, closed))))
    stats = ot.compare_maps(fac.T_samples, closed)
    _add_comparison(rep, stats, fac.diagnostics["mean_spacing"], cfg["spacing_factor"], "closed-form")
    ot.write_map_csv(out / "T_numeric.csv", mu.points, fac.T_samples)
    ot.write_map_csv(out / "T_closed_form.csv", mu.points, closed)
    ot.write_map_csv(out / "U_numeric.csv", mu.points, fac.U_samples)
    rep.write(out)
    return rep


def cmd_projective_factorize(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("projective-factorize", cfg)
    rng = np.random.default_rng(cfg["seed"])
    if cfg["matrix"]:
        A = ga.read_matrix(cfg["matrix"])
    else:
        lam = np.asarray(cfg["eigenvalues"], dtype=float)
        m = len(lam)
        O = random_rotation(m, rng) if cfg["rotate"] else np.eye(m)
        A = np.diag(lam) @ O
    pair = ga.polar_decompose(A)
    P = pair.symmetric_part
    n = P.shape[0] - 1
    groups = ga.distinct_eigenvalues(P, cfg["tol"]["eig_cluster"])
    rep.section("polar")
    rep.matrix("symmetric_part", P)
    rep.matrix("rotation_part", pair.rotation_part)
    rep.add("eigenvalues", list(pair.eigenvalues()))
    rep.add("distinct_eigenvalues", len(groups))
    T_closed = cf.projective_closed_form(P, cfg["tol"]["eig_cluster"])
    path = "closed-form" if T_closed is not None else "open-question"
    rep.add("path", path)

    if T_closed is None:
        # the map p -> Pp/|Pp| is the algebraic candidate; test its optimality
        pts = ot.sample_sphere(n, cfg["points"], "seeded-random", cfg["seed"] + 1).points
        reports = sc.batch_lagrangian(P, pts, require_generic=True, tol=cfg["tol"]["lagrangian"])
        _lagrangian_summary(rep, reports, bins=10)
        T_candidate = lambda X: ga.projective_act(P, X)
    else:
        T_candidate = T_closed
        direct = np.max(ot.geodesic_distance(T_closed(_cloud(n, 200, cfg["seed"]).points),
                                             ga.projective_act(P, _cloud(n, 200, cfg["seed"]).points)))
        rep.add("closed_form_vs_action", float(direct))
        if n >= 2:
            pts = ot.sample_sphere(n, cfg["points"], "seeded-random", cfg["seed"] + 1).points
            reports = sc.batch_lagrangian(P, pts, require_generic=False, tol=cfg["tol"]["lagrangian"])
            _lagrangian_summary(rep, reports, bins=10)

    mu = _cloud(n, cfg["N"], cfg["seed"])
    S = lambda X: ga.projective_act(A, X)
    fac = ot.numerical_polar_factorization(S, mu, _solver_config(cfg))
    _add_diagnostics(rep, fac)
    candidate = T_candidate(mu.points)
    stats = ot.compare_maps(fac.T_samples, candidate)
    _add_comparison(rep, stats, fac.diagnostics["mean_spacing"], cfg["spacing_factor"],
                    "closed-form" if T_closed is not None else "projective-candidate")
    ot.write_map_csv(out / "T_numeric.csv", mu.points, fac.T_samples)
    ot.write_map_csv(out / "T_candidate.csv", mu.points, candidate)
    _write_deviation_csv(out / "deviation.csv", mu.points, stats["deviations"])
    rep.write(out)
    return rep


def _lagrangian_summary(rep: Report, reports, bins: int):
    tested = [r for r in reports if not r.skipped]
    asym = np.array([r.asymmetry for r in tested])
    rep.section("lagrangian")
    rep.add("points_tested", len(tested))
    rep.add("points_skipped", len(reports) - len(tested))
    if not tested:
        rep.add("verdict", "skipped")
        return asym
    n_sym = sum(r.lagrangian for r in tested)
    rep.add("symmetric_count", n_sym)
    rep.add("asymmetric_count", len(tested) - n_sym)
    verdict = "symmetric" if n_sym == len(tested) else ("asymmetric" if n_sym == 0 else "mixed")
    rep.add("verdict", verdict)
    rep.add("asymmetry_min", float(asym.min()))
    rep.add("asymmetry_max", float(asym.max()))
    # the designated-entry ratio is only meaningful off the Lagrangian case
    ratio_err = [abs(r.measured_ratio - r.predicted_ratio) for r in tested
                 if not r.lagrangian and np.isfinite(r.measured_ratio)]
    if ratio_err:
        rep.add("ratio_max_error", float(max(ratio_err)))
    # log-spaced histogram of asymmetry
    lo = np.log10(max(float(asym.min()), 1e-18))
    hi = np.log10(max(float(asym.max()), 1e-18)) + 1e-9
    counts, edges = np.histogram(np.log10(np.maximum(asym, 1e-18)), bins=bins, range=(lo, hi))
    for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
        rep.add(f"hist_log10[{e0:.3f},{e1:.3f})", int(c))
    return asym


def cmd_lagrangian_test(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("lagrangian-test", cfg)
    P = ga.read_matrix(cfg["matrix"]) if cfg["matrix"] else np.diag(cfg["eigenvalues"])
    P = ga.validate_projective(P)
    n = P.shape[0] - 1
    if n < 2:
        raise ConfigError("the Lagrangian test needs n >= 2")
    pts = ot.sample_sphere(n, cfg["points"], "seeded-random", cfg["seed"]).points
    reports = sc.batch_lagrangian(P, pts, require_generic=True, tol=cfg["tol"]["lagrangian"])
    _lagrangian_summary(rep, reports, cfg["bins"])
    with open(out / "lagrangian.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index"] + [f"p{i}" for i in range(n + 1)]
                    + ["d", "asymmetry", "predicted_ratio", "measured_ratio", "verdict"])
        for i, r in enumerate(reports):
            wr.writerow([i] + [repr(float(c)) for c in r.p]
                        + [repr(float(r.d)), repr(float(r.asymmetry)), repr(float(r.predicted_ratio)),
                           repr(float(r.measured_ratio)), r.verdict])
    rep.write(out)
    return rep


def _cconvex_profile(cfg):
    kind, a = cfg["profile"], cfg["a"]
    if kind == "projective-f":
        return cf.f_profile(a)
    if kind == "conformal-g":
        return cf.g_profile(a)
    if kind == "zero":
        return cf.custom_profile(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                                 lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    if kind == "steep":
        return cc.steep_profile(cfg["amplitude"])
    raise ConfigError(f"unknown profile {kind!r}; use projective-f, conformal-g, zero or steep")


def cmd_cconvex_check(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("cconvex-check", cfg)
    profile = _cconvex_profile(cfg)
    sizes = cfg["sizes"]
    if any(N < 8 for N in sizes):
        raise ConfigError("grid sizes must be >= 8")
    rows = cc.defect_table(profile, sizes)
    rep.section("defect")
    for N, dfc in rows:
        rep.add(f"defect[N={N}]", dfc)
    monotone = all(rows[i + 1][1] <= rows[i][1] + 1e-12 for i in range(len(rows) - 1))
    rep.add("monotone_decrease", monotone)
    crit = cc.circle_optimality_criterion(profile, integral_tol=cfg["tol"]["integral"])
    rep.section("circle-criterion")
    rep.add("monotone_lift", crit.monotone)
    rep.add("min_increment", crit.min_increment)
    rep.add("zero_mean", crit.zero_mean)
    rep.add("integral", crit.integral)
    rep.add("passed", crit.passed)
    with open(out / "defect.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["N", "defect"])
        for N, dfc in rows:
            wr.writerow([N, repr(float(dfc))])
    phi = cc.profile_potential_grid(profile, cc.circle_nodes(sizes[-1]), 1)
    cc.write_grid_csv(out / "potential.csv", phi)
    rep.write(out)
    return rep


def cmd_discrete_ot(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("discrete-ot", cfg)
    n = cfg["n"]
    mu = _cloud(n, cfg["N"], cfg["seed"], cfg["source"])
    if cfg["target"] == "conformal":
        T = cf.conformal_map(cfg["a"], n)
    elif cfg["target"] == "projective":
        P = np.diag(cfg["eigenvalues"])
        if P.shape[0] != n + 1:
            raise ConfigError(f"need {n + 1} eigenvalues for n={n}")
        T = lambda X: ga.projective_act(P, X)
    elif cfg["target"] == "identity":
        T = lambda X: np.array(X, copy=True)
    else:
        raise ConfigError(f"unknown target {cfg['target']!r}; use conformal, projective or identity")
    nu = ot.DiscreteMeasure(np.asarray(T(mu.points)), mu.weights.copy())
    plan = ot.solve(mu, nu, _solver_config(cfg))
    rep.section("plan")
    rep.add("converged", plan.converged)
    rep.add("iterations", plan.iterations)
    rep.add("transport_cost", plan.transport_cost())
    rep.add("marginal_error", plan.marginal_error())
    Tn = ot.extract_map(plan)
    stats = ot.compare_maps(Tn, nu.points)
    _add_comparison(rep, stats, ot.mean_spacing(mu.points), 2.0, "pushforward-map")
    ot.write_plan_csv(out / "plan.csv", plan, threshold=1e-12)
    ot.write_map_csv(out / "map.csv", mu.points, Tn)
    rep.write(out)
    return rep


def cmd_double_cover(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("double-cover", cfg)
    if cfg["samples"] < 1:
        raise ConfigError("samples must be >= 1")
    rows = []
    for a in cfg["a"]:
        dev = cf.double_cover_check(a, cfg["samples"])
        x = np.linspace(-np.pi / 2, np.pi / 2, cfg["samples"])
        prof = float(np.max(np.abs(cf.projective_profile_from_diagram(a, x) - cf.f_profile(a)(x))))
        rows.append((a, dev, prof))
        rep.add(f"max_deviation[a={a!r}]", dev)
        rep.add(f"profile_deviation[a={a!r}]", prof)
    with open(out / "double_cover.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["a", "max_deviation", "profile_deviation"])
        for a, dev, prof in rows:
            wr.writerow([repr(float(a)), repr(float(dev)), repr(float(prof))])
    rep.write(out)
    return rep


def cmd_compare(cfg) -> Report:
    out = _outdir(cfg)
    rep = Report("compare", cfg)
    if not cfg["first"] or not cfg["second"]:
        raise ConfigError("compare needs --first and --second map CSV files")
    try:
        X1, Y1 = ot.read_map_csv(cfg["first"])
        X2, Y2 = ot.read_map_csv(cfg["second"])
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read map CSV: {exc}") from exc
    if X1.shape != X2.shape or np.max(np.abs(X1 - X2)) > 1e-12:
        raise ConfigError("map CSVs are not sampled on the same source cloud")
    stats = ot.compare_maps(Y1, Y2)
    _add_comparison(rep, stats, ot.mean_spacing(X1), cfg["spacing_factor"], "maps")
    _write_deviation_csv(out / "deviation.csv", X1, stats["deviations"])
    rep.write(out)
    return rep


COMMANDS = {
    "conformal-factorize": cmd_conformal_factorize,
    "projective-factorize": cmd_projective_factorize,
    "cconvex-check": cmd_cconvex_check,
    "lagrangian-test": cmd_lagrangian_test,
    "discrete-ot": cmd_discrete_ot,
    "double-cover": cmd_double_cover,
    "compare": cmd_compare,
}

HELP = {
    "conformal-factorize": "Cartan factors of a Lorentz matrix vs the discrete OT factorization",
    "projective-factorize": "polar factors of a GL+ matrix, closed-form or open-question path",
    "cconvex-check": "grid c-convexity defect table and the circle criterion",
    "lagrangian-test": "Lagrangian-graph test of the projective map over sampled points",
    "discrete-ot": "solve a discrete OT problem between a cloud and its image",
    "double-cover": "commutativity of the circle double-cover diagram",
    "compare": "deviation statistics between two map CSV files",
}

FLAG_HELP = {
    "matrix": "row-major matrix text file", "eigenvalues": "comma-separated eigenvalues",
    "anneal": "comma-separated epsilon schedule", "sizes": "comma-separated grid sizes",
    "a": "parameter (comma-separated list for double-cover)",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spherepolar", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"spherepolar {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--n", type=str, help="sphere dimension")
        p.add_argument("--N", type=str, help="number of samples")
        p.add_argument("--seed", type=str)
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument("--config", type=str, help="key=value config file")
        p.add_argument("--tol", action="append", metavar="KEY=VAL",
                       help=f"tolerance override; keys: {', '.join(TOLERANCES)}")
        for key in schema:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=str, help=FLAG_HELP.get(key))
    return ap


def _fail(exc: Exception, code: int) -> int:
    cat = getattr(exc, "category", type(exc).__name__)
    print(f"error[{cat}]: {exc}", file=sys.stderr)
    print(f"error_category={cat}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        COMMANDS[args.command](cfg)
    except (NotConverged, SolverFailure) as exc:
        return _fail(exc, EXIT_SOLVER)
    except SpherePolarError as exc:
        return _fail(exc, EXIT_VALIDATION)
    except (ValueError, OSError) as exc:
        err = ConfigError(str(exc))
        return _fail(err, EXIT_VALIDATION)
    print(Path(cfg["out"]) / "report.txt")
    return 0


if __name__ == "__main__":
    sys.exit(main())
