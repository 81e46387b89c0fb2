"""Command-line front end: config ingestion, experiment orchestration, reports.

Subcommands
-----------
selftest     built-in reference corpus: quadrature closed forms and the
             pointwise identity suite (no config needed)
verify       integral identity residual and Hardy ratio over a corpus of
             test functions from the config
optimality   sharpness sweep: drive the cutoff parameter down, fit the
             remainder decay rate
beta-sweep   general-exponent identity and the companion-constant vertex
spectral     finite-span upper bound on the best constant via the
             generalized eigenproblem
certify      sample-based certification of the weight hypotheses

Configs are JSON files with four top-level blocks: ``problem`` (dimension,
poles, weight, pole-strength candidate), ``quadrature`` (discretization
parameters), ``experiments`` (one sub-block per subcommand), ``output``
(directory and formats), plus an optional top-level ``seed`` that
overrides the quadrature seed.  Unknown keys anywhere in the tree are
rejected.  Reports are CSV tables (comma-separated, header row, 17
significant digits; run metadata confined to leading ``#`` comment lines
so bodies from identical config + seed are byte-identical) and JSON
summaries.  Exit codes: 0 all checks passed, 1 a numerical check failed,
2 usage or config error.  The environment variable MHARDY_WORKERS
overrides the evaluation worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .config import (
    HardyParams,
    PoleConfig,
    WeightSpec,
    derive_params,
    enclosing_radius,
    min_pole_gap,
    validate_config,
)
from .errors import (
    ConfigError,
    MultipolarHardyError,
    UnboundedSuspected,
    ZeroVMass,
)
from .fields import (
    cross_term_identity_gap,
    hardy_factor,
    laplacian_ratio,
    potential_v,
    vector_field_f,
)
from .functionals import (
    CutoffTheta,
    GaussianBump,
    OptimalityPhi,
    energy_report,
    hardy_ratio,
    identity_residual,
)
from .experiments import (
    beta_sweep,
    h2_certify,
    h3_h4_certify,
    h4_local_exponent,
    optimality_sweep,
    spectral_bound,
)
from .quadrature import (
    Integrand,
    QuadratureSpec,
    integrate_many,
    integrate_pole_ball,
    sphere_flux,
    sphere_surface_measure,
)

__all__ = ["RunConfig", "ReportTable", "load_run_config", "main"]

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

_H4_TOL = 1e-9


# --------------------------------------------------------------------------
# Config ingestion
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    """Parsed and validated run configuration (one config = one problem)."""

    cfg: PoleConfig
    weight: WeightSpec
    params: HardyParams
    quadrature: QuadratureSpec
    experiments: dict
    out_dir: str
    formats: tuple[str, ...]
    source: str


@dataclass
class ReportTable:
    """One experiment's report: long-format rows plus a summary.

    Every numeric column is paired with an ``<name>_error`` column holding
    its error estimate or the marker ``exact``.
    """

    experiment: str
    columns: tuple[str, ...]
    rows: list[dict]
    summary: dict
    passed: bool
    wall_time_s: float = 0.0


def _check_keys(node: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(node) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {unknown} in {path!r} (allowed: {sorted(allowed)})"
        )


def _mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path!r} must be a mapping, got {type(node).__name__}")
    return node


def _parse_weight(node, path: str) -> WeightSpec:
    node = _mapping(node, path)
    kind = node.get("kind")
    if kind == "unit":
        _check_keys(node, {"kind"}, path)
        return WeightSpec.unit()
    if kind == "polyexp":
        _check_keys(node, {"kind", "gamma", "delta", "m"}, path)
        return WeightSpec.polyexp(
            gamma=float(node.get("gamma", 0.0)),
            delta=float(node.get("delta", 0.0)),
            m=float(node.get("m", 2.0)),
        )
    raise ConfigError(f"{path}.kind must be 'unit' or 'polyexp', got {kind!r}")


_EXPERIMENT_KEYS = {"verify", "optimality", "beta_sweep", "spectral", "certify"}

_QUAD_FIELDS = {f.name for f in dataclasses.fields(QuadratureSpec)}


def parse_run_config(data: dict, source: str = "<memory>") -> RunConfig:
    """Build a RunConfig from a parsed JSON tree, rejecting unknown keys."""
    data = _mapping(data, "<top-level>")
    _check_keys(
        data, {"problem", "quadrature", "experiments", "output", "seed"}, "<top-level>"
    )
    for block in ("problem", "quadrature"):
        if block not in data:
            raise ConfigError(f"missing required block {block!r}")

    prob = _mapping(data["problem"], "problem")
    _check_keys(prob, {"dim", "poles", "weight", "k_mu", "c_mu"}, "problem")
    for key in ("dim", "poles", "k_mu"):
        if key not in prob:
            raise ConfigError(f"missing required key 'problem.{key}'")
    dim = int(prob["dim"])
    poles = np.asarray(prob["poles"], dtype=float)
    if poles.ndim != 2 or poles.shape[1] != dim:
        raise ConfigError(
            f"problem.poles must be an array of shape (n, {dim}), got {poles.shape}"
        )
    cfg = PoleConfig(dim=dim, poles=poles)
    weight = _parse_weight(prob.get("weight", {"kind": "unit"}), "problem.weight")
    validate_config(cfg, weight)
    k_mu = float(prob["k_mu"])
    c_mu = float(prob.get("c_mu", 0.0))
    params = derive_params(cfg, k_mu, c_mu)

    quad = dict(_mapping(data["quadrature"], "quadrature"))
    _check_keys(quad, _QUAD_FIELDS, "quadrature")
    if "seed" in data:
        quad["seed"] = int(data["seed"])
    quad.setdefault("seed", 0)
    try:
        spec = QuadratureSpec(**quad)
    except TypeError as exc:
        raise ConfigError(f"bad quadrature block: {exc}") from exc

    experiments = _mapping(data.get("experiments", {}), "experiments")
    _check_keys(experiments, _EXPERIMENT_KEYS, "experiments")

    output = _mapping(data.get("output", {}), "output")
    _check_keys(output, {"directory", "formats"}, "output")
    out_dir = str(output.get("directory", "out"))
    formats = tuple(output.get("formats", ("csv", "json")))
    bad = set(formats) - {"csv", "json"}
    if bad:
        raise ConfigError(f"output.formats entries must be csv/json, got {sorted(bad)}")

    return RunConfig(
        cfg=cfg,
        weight=weight,
        params=params,
        quadrature=spec,
        experiments=experiments,
        out_dir=out_dir,
        formats=formats,
        source=source,
    )


def load_run_config(
    path: str, *, seed: int | None = None, out_dir: str | None = None
) -> RunConfig:
    """Load a JSON run config from disk, applying CLI overrides."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if seed is not None:
        data = dict(_mapping(data, "<top-level>"))
        data["seed"] = seed
    run = parse_run_config(data, source=path)
    if out_dir is not None:
        run.out_dir = out_dir
    return run


def _parse_function(node, run: RunConfig, path: str):
    """Build a test function from its config node."""
    node = _mapping(node, path)
    kind = node.get("kind")
    cfg, p = run.cfg, run.params
    if kind == "gaussian_bump":
        _check_keys(node, {"kind", "center", "width"}, path)
        center = np.asarray(node["center"], dtype=float)
        if center.shape != (cfg.dim,):
            raise ConfigError(f"{path}.center must have length {cfg.dim}")
        return GaussianBump(center=center, width=float(node["width"]))
    if kind == "cutoff_theta":
        _check_keys(node, {"kind", "R", "eps"}, path)
        return CutoffTheta(R=float(node["R"]), eps=float(node["eps"]))
    if kind == "optimality_phi":
        _check_keys(node, {"kind", "R", "eps", "beta"}, path)
        if "R" in node:
            radius = float(node["R"])
        else:
            radius = enclosing_radius(cfg, min_pole_gap(cfg))
        beta = float(node.get("beta", p.beta))
        return OptimalityPhi(cfg=cfg, R=radius, eps=float(node["eps"]), beta=beta)
    raise ConfigError(
        f"{path}.kind must be gaussian_bump/cutoff_theta/optimality_phi, got {kind!r}"
    )


def _function_label(phi) -> str:
    """Single-cell label; must stay free of commas to keep the CSV flat."""
    if isinstance(phi, GaussianBump):
        center = ";".join(f"{c:g}" for c in phi.center)
        return f"gaussian_bump(center=[{center}];width={phi.width:g})"
    if isinstance(phi, CutoffTheta):
        return f"cutoff_theta(R={phi.R:g};eps={phi.eps:g})"
    return f"optimality_phi(R={phi.R:g};eps={phi.eps:g};beta={phi.beta:g})"


# --------------------------------------------------------------------------
# Report writing
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    """Render a cell: 17 significant digits for floats, bare strings kept."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_report(table: ReportTable, run: RunConfig | None, args) -> None:
    """Write <experiment>.csv and <experiment>_summary.json under the out dir."""
    out_dir = args.out or (run.out_dir if run is not None else "out")
    formats = run.formats if run is not None else ("csv", "json")
    os.makedirs(out_dir, exist_ok=True)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if "csv" in formats:
        path = os.path.join(out_dir, f"{table.experiment}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# command: {table.experiment}\n")
            if run is not None:
                fh.write(f"# config: {run.source}\n")
                fh.write(f"# seed: {run.quadrature.seed}\n")
            fh.write(f"# generated: {stamp}\n")
            fh.write(f"# wall_time_s: {table.wall_time_s:.3f}\n")
            fh.write(",".join(table.columns) + "\n")
            for row in table.rows:
                fh.write(",".join(_fmt(row[c]) for c in table.columns) + "\n")
        if not args.quiet:
            print(f"wrote {path}")
    if "json" in formats:
        payload = {
            "command": table.experiment,
            "pass": table.passed,
            "wall_time_s": round(table.wall_time_s, 3),
            **table.summary,
        }
        if run is not None:
            payload["config"] = run.source
            payload["seed"] = run.quadrature.seed
        path = os.path.join(out_dir, f"{table.experiment}_summary.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        if not args.quiet:
            print(f"wrote {path}")


def _json_default(obj):
    if isinstance(obj, (np.bool_, np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(args, text: str) -> None:
    if not args.quiet:
        print(text)


# --------------------------------------------------------------------------
# selftest corpus
# --------------------------------------------------------------------------


def _selftest_spec(seed: int, **overrides) -> QuadratureSpec:
    base = dict(
        pole_radius=1.0,
        far_radius=6.0,
        radial_levels=14,
        mc_samples=20_000,
        seed=seed,
        tail_exponent=2.0,
    )
    base.update(overrides)
    return QuadratureSpec(**base)


def _check_gaussian(seed: int):
    """Gaussian integral over R^3 against pi^(3/2)."""
    cfg = PoleConfig(dim=3, poles=np.zeros((1, 3)))
    spec = _selftest_spec(seed, pole_radius=4.0, radial_levels=12, tail_exponent=4.0)
    integrand = Integrand(
        func=lambda x: np.exp(-np.sum(x * x, axis=1)),
        pole_exponents=[0.0],
        support_radius=None,
        name="gaussian",
    )
    (res,) = integrate_many([integrand], cfg, spec)
    exact = math.pi**1.5
    rel = abs(res.value - exact) / exact
    return rel < 1e-4, f"rel err {rel:.3e} (tol 1e-04)"


def _check_ball_inverse_square(seed: int):
    """Integral of |x|^-2 over the unit ball against 4 pi."""
    cfg = PoleConfig(dim=3, poles=np.zeros((1, 3)))
    res = integrate_pole_ball(
        lambda x: 1.0 / np.sum(x * x, axis=1), cfg, 0, 1.0, levels=16, exponent=2.0
    )
    exact = 4.0 * math.pi
    rel = abs(res.value - exact) / exact
    return rel < 1e-4, f"rel err {rel:.3e} (tol 1e-04)"


def _check_singular_power(seed: int):
    """Integral of |x|^-5/2 over the unit ball against omega_3 / (1/2)."""
    cfg = PoleConfig(dim=3, poles=np.zeros((1, 3)))
    res = integrate_pole_ball(
        lambda x: np.sum(x * x, axis=1) ** -1.25, cfg, 0, 1.0, levels=16, exponent=2.5
    )
    exact = sphere_surface_measure(3) / 0.5
    rel = abs(res.value - exact) / exact
    return rel < 1e-4, f"rel err {rel:.3e} (tol 1e-04)"


def _check_sphere_measures(seed: int):
    """Closed-form unit sphere measures in dimensions 3..6."""
    exact = {
        3: 4.0 * math.pi,
        4: 2.0 * math.pi**2,
        5: 8.0 * math.pi**2 / 3.0,
        6: math.pi**3,
    }
    worst = max(
        abs(sphere_surface_measure(d) - v) / v for d, v in exact.items()
    )
    return worst < 1e-13, f"max rel err {worst:.3e} (tol 1e-13)"


def _random_instances(seed: int):
    rng = np.random.default_rng(seed)
    for dim in (3, 4, 5):
        for n in (1, 2, 3, 4):
            poles = rng.uniform(-2.0, 2.0, size=(n, dim))
            yield PoleConfig(dim=dim, poles=poles), rng


def _check_cross_identity(seed: int):
    """Algebraic cross-term identity at random points (pure rounding)."""
    worst = 0.0
    for cfg, rng in _random_instances(seed):
        pts = rng.uniform(-3.0, 3.0, size=(100, cfg.dim))
        gap = np.abs(cross_term_identity_gap(pts, cfg))
        dist = np.linalg.norm(pts[:, None, :] - cfg.poles[None, :, :], axis=2)
        scale = (cfg.n_poles) * np.sum(1.0 / dist**2, axis=1) + 1.0
        worst = max(worst, float(np.max(gap / scale)))
    return worst < 1e-12, f"max scaled gap {worst:.3e} (tol 1e-12)"


def _fd_points(cfg: PoleConfig, rng, count: int = 20) -> np.ndarray:
    """Random points at a safe distance from every pole."""
    pts = []
    while len(pts) < count:
        x = rng.uniform(-3.0, 3.0, size=cfg.dim)
        if np.min(np.linalg.norm(cfg.poles - x, axis=1)) > 0.35:
            pts.append(x)
    return np.array(pts)


def _check_gradient_fd(seed: int):
    """grad(f)/f against central differences of log f."""
    worst = 0.0
    for cfg, rng in _random_instances(seed):
        beta = rng.uniform(0.2, 1.5)
        pts = _fd_points(cfg, rng)
        _, grad = hardy_factor(pts, cfg, beta)
        h = 1e-6
        fd = np.empty_like(grad)
        for k in range(cfg.dim):
            e = np.zeros(cfg.dim)
            e[k] = h
            fp, _ = hardy_factor(pts + e, cfg, beta)
            fm, _ = hardy_factor(pts - e, cfg, beta)
            fd[:, k] = (np.log(fp) - np.log(fm)) / (2.0 * h)
        scale = np.linalg.norm(grad, axis=1) + 1.0
        worst = max(worst, float(np.max(np.linalg.norm(fd - grad, axis=1) / scale)))
    return worst < 1e-6, f"max rel err {worst:.3e} (tol 1e-06)"


def _check_laplacian_fd(seed: int):
    """Delta(f)/f against a second-order central difference of f."""
    worst = 0.0
    for cfg, rng in _random_instances(seed):
        beta = rng.uniform(0.2, 1.2)
        pts = _fd_points(cfg, rng)
        lap = laplacian_ratio(pts, cfg, beta)
        f0, _ = hardy_factor(pts, cfg, beta)
        h = 2e-4
        acc = np.zeros(pts.shape[0])
        for k in range(cfg.dim):
            e = np.zeros(cfg.dim)
            e[k] = h
            fp, _ = hardy_factor(pts + e, cfg, beta)
            fm, _ = hardy_factor(pts - e, cfg, beta)
            acc += fp + fm - 2.0 * f0
        fd = acc / (h * h) / f0
        scale = np.abs(lap) + 1.0
        worst = max(worst, float(np.max(np.abs(fd - lap) / scale)))
    return worst < 1e-4, f"max rel err {worst:.3e} (tol 1e-04)"


def _check_near_pole(seed: int):
    """|x - a_i|^2 V -> n - 1 along approach sequences, extrapolated."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for n in (2, 3, 4):
        cfg = PoleConfig(dim=4, poles=rng.uniform(-2.0, 2.0, size=(n, 4)))
        direction = rng.standard_normal(4)
        direction /= np.linalg.norm(direction)
        ts = 10.0 ** -np.arange(1.0, 6.0)
        pts = cfg.poles[0] + ts[:, None] * direction
        vals = ts**2 * potential_v(pts, cfg)
        # One Richardson step on the O(t) error using the two smallest t.
        extrap = vals[-1] + (vals[-1] - vals[-2]) * ts[-1] / (ts[-2] - ts[-1])
        worst = max(worst, abs(extrap - (n - 1)) / (n - 1))
    return worst < 0.01, f"max rel err {worst:.3e} (tol 1e-02)"


def _check_v_invariance(seed: int):
    """V under pole permutation, translation, and scaling."""
    worst = 0.0
    for cfg, rng in _random_instances(seed + 2):
        if cfg.n_poles < 2:
            continue
        pts = rng.uniform(-3.0, 3.0, size=(50, cfg.dim))
        base = potential_v(pts, cfg)
        scale = np.abs(base) + 1.0
        perm = rng.permutation(cfg.n_poles)
        v_perm = potential_v(pts, PoleConfig(dim=cfg.dim, poles=cfg.poles[perm]))
        shift = rng.uniform(-1.0, 1.0, size=cfg.dim)
        v_shift = potential_v(
            pts + shift, PoleConfig(dim=cfg.dim, poles=cfg.poles + shift)
        )
        lam = rng.uniform(0.5, 2.0)
        v_scale = potential_v(
            lam * pts, PoleConfig(dim=cfg.dim, poles=lam * cfg.poles)
        ) * lam**2
        for other in (v_perm, v_shift, v_scale):
            worst = max(worst, float(np.max(np.abs(other - base) / scale)))
    return worst < 1e-11, f"max rel err {worst:.3e} (tol 1e-11)"


_SELFTEST_CASES = (
    ("sphere_measures", _check_sphere_measures),
    ("quadrature_gaussian", _check_gaussian),
    ("quadrature_ball_inverse_square", _check_ball_inverse_square),
    ("quadrature_singular_power", _check_singular_power),
    ("identity_cross_terms", _check_cross_identity),
    ("gradient_fd", _check_gradient_fd),
    ("laplacian_fd", _check_laplacian_fd),
    ("near_pole_limit", _check_near_pole),
    ("potential_invariances", _check_v_invariance),
)


def cmd_selftest(args) -> int:
    """Run the reference corpus; exit 0 iff every selected case passes."""
    seed = args.seed if args.seed is not None else 20_240
    pattern = (args.filter or "").lower()
    cases = [(n, f) for n, f in _SELFTEST_CASES if pattern in n.lower()]
    if not cases:
        print(f"no selftest case matches filter {args.filter!r}", file=sys.stderr)
        return EXIT_USAGE
    failures = []
    for name, fn in cases:
        t0 = time.perf_counter()
        ok, detail = fn(seed)
        dt = time.perf_counter() - t0
        _emit(args, f"{'PASS' if ok else 'FAIL'}  {name:<32} {detail}  [{dt:.2f}s]")
        if not ok:
            failures.append(name)
    if failures:
        print("selftest failures: " + ", ".join(failures), file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

_VERIFY_COLUMNS = (
    "function",
    "dirichlet",
    "dirichlet_error",
    "v_mass",
    "v_mass_error",
    "w_mass",
    "w_mass_error",
    "l2_mass",
    "l2_mass_error",
    "remainder",
    "remainder_error",
    "flux",
    "flux_error",
    "identity_residual",
    "identity_residual_error",
    "hardy_ratio",
    "hardy_ratio_error",
    "truncated",
    "residual_pass",
    "ratio_pass",
)


def _result_err(res) -> float:
    return res.stderr + res.trunc_bound


def cmd_verify(args) -> int:
    """Check the integral identity and the ratio bound over a corpus."""
    run = load_run_config(args.config, seed=args.seed, out_dir=None)
    block = _mapping(run.experiments.get("verify"), "experiments.verify")
    _check_keys(
        block, {"functions", "residual_tol", "ratio_slack"}, "experiments.verify"
    )
    nodes = block.get("functions")
    if not nodes:
        raise ConfigError("experiments.verify.functions must be a nonempty list")
    residual_tol = float(block.get("residual_tol", 1e-3))
    ratio_slack = float(block.get("ratio_slack", 0.02))
    pattern = (args.filter or "").lower()

    cfg, w, p, spec = run.cfg, run.weight, run.params, run.quadrature
    t0 = time.perf_counter()
    rows = []
    all_ok = True
    notes = []
    if cfg.n_poles < 2:
        notes.append("single pole: V vanishes identically, ratio rows skipped")
    for idx, node in enumerate(nodes):
        phi = _parse_function(node, run, f"experiments.verify.functions[{idx}]")
        label = _function_label(phi)
        if pattern and pattern not in label.lower():
            continue
        borderline = (
            isinstance(phi, OptimalityPhi)
            and h4_local_exponent(cfg, w, p.k_mu) >= cfg.dim - _H4_TOL
        )
        rep = energy_report(phi, cfg, w, p, spec, allow_truncation=borderline)
        truncated = rep.v_mass.truncated or rep.dirichlet.truncated
        residual = identity_residual(rep, p)
        flux, flux_err = 0.0, 0.0
        if truncated:
            order = 2 * cfg.dim + 6

            def field(x, phi=phi):
                v = phi.value(x)
                return (v * v)[:, None] * vector_field_f(x, cfg, w, p.beta)

            eta = rep.v_mass.eta
            lo = sum(
                sphere_flux(field, cfg.poles[i], eta, cfg.dim, angular_order=order)
                for i in range(cfg.n_poles)
            )
            hi = sum(
                sphere_flux(field, cfg.poles[i], eta, cfg.dim, angular_order=order + 4)
                for i in range(cfg.n_poles)
            )
            flux, flux_err = hi, abs(hi - lo)
            residual -= flux / max(rep.dirichlet.value, 1.0)
        scale = max(rep.dirichlet.value, 1.0)
        residual_err = (
            _result_err(rep.dirichlet)
            + _result_err(rep.remainder)
            + p.c_n_mu * _result_err(rep.v_mass)
            + _result_err(rep.w_mass)
            + flux_err
        ) / scale
        residual_ok = abs(residual) <= max(residual_tol, 3.0 * residual_err)
        try:
            ratio = hardy_ratio(rep)
            energy = rep.dirichlet.value + rep.w_mass.value
            ratio_err = abs(ratio) * (
                (_result_err(rep.dirichlet) + _result_err(rep.w_mass)) / abs(energy)
                + _result_err(rep.v_mass) / rep.v_mass.value
            )
            ratio_ok = ratio >= p.c_n_mu * (1.0 - ratio_slack) - 3.0 * ratio_err
            ratio_cell, ratio_err_cell = ratio, ratio_err
            ratio_flag = "true" if ratio_ok else "false"
        except ZeroVMass:
            ratio_cell, ratio_err_cell = "nan", "nan"
            ratio_flag = "skipped"
            ratio_ok = True
            if cfg.n_poles >= 2:
                notes.append(f"{label}: V-mass indistinguishable from zero")
        all_ok = all_ok and residual_ok and ratio_ok
        rows.append(
            {
                "function": label,
                "dirichlet": rep.dirichlet.value,
                "dirichlet_error": _result_err(rep.dirichlet),
                "v_mass": rep.v_mass.value,
                "v_mass_error": _result_err(rep.v_mass),
                "w_mass": rep.w_mass.value,
                "w_mass_error": _result_err(rep.w_mass),
                "l2_mass": rep.l2_mass.value,
                "l2_mass_error": _result_err(rep.l2_mass),
                "remainder": rep.remainder.value,
                "remainder_error": _result_err(rep.remainder),
                "flux": flux,
                "flux_error": flux_err if truncated else "exact",
                "identity_residual": residual,
                "identity_residual_error": residual_err,
                "hardy_ratio": ratio_cell,
                "hardy_ratio_error": ratio_err_cell,
                "truncated": truncated,
                "residual_pass": "true" if residual_ok else "false",
                "ratio_pass": ratio_flag,
            }
        )
    if not rows:
        raise ConfigError(f"no verify function matches filter {args.filter!r}")
    table = ReportTable(
        experiment="verify",
        columns=_VERIFY_COLUMNS,
        rows=rows,
        summary={
            "functions": len(rows),
            "residual_tol": residual_tol,
            "ratio_floor": p.c_n_mu * (1.0 - ratio_slack),
            "c_n_mu": p.c_n_mu,
            "worst_abs_residual": max(abs(r["identity_residual"]) for r in rows),
            "notes": notes,
        },
        passed=all_ok,
        wall_time_s=time.perf_counter() - t0,
    )
    write_report(table, run, args)
    _emit(args, f"verify: {'PASS' if all_ok else 'FAIL'} ({len(rows)} functions)")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# optimality
# --------------------------------------------------------------------------

_OPTIMALITY_COLUMNS = (
    "eps",
    "eps_error",
    "remainder",
    "remainder_error",
    "hardy_ratio",
    "hardy_ratio_error",
    "deficit",
    "deficit_error",
    "flux",
    "flux_error",
    "truncated",
)


def cmd_optimality(args) -> int:
    """Sharpness sweep: remainder decay rate and terminal Hardy ratio."""
    run = load_run_config(args.config, seed=args.seed, out_dir=None)
    block = _mapping(run.experiments.get("optimality"), "experiments.optimality")
    _check_keys(
        block,
        {"eps_list", "R", "slope_band", "ratio_band", "r2_min"},
        "experiments.optimality",
    )
    eps_list = block.get("eps_list")
    radius = block.get("R")
    slope_band = float(block.get("slope_band", 0.15))
    ratio_band = float(block.get("ratio_band", 0.10))
    r2_min = float(block.get("r2_min", 0.98))

    t0 = time.perf_counter()
    records, fit = optimality_sweep(
        run.cfg,
        run.weight,
        run.params,
        eps_list,
        run.quadrature,
        R=None if radius is None else float(radius),
    )
    rows = [
        {
            "eps": r.eps,
            "eps_error": "exact",
            "remainder": r.remainder,
            "remainder_error": r.remainder_error,
            "hardy_ratio": r.hardy_ratio,
            "hardy_ratio_error": r.ratio_error,
            "deficit": r.deficit,
            "deficit_error": r.deficit_error,
            "flux": r.flux,
            "flux_error": r.flux_error if r.truncated else "exact",
            "truncated": r.truncated,
        }
        for r in records
    ]
    p = run.params
    finite = math.isfinite(fit.predicted_slope)
    if finite:
        tol = slope_band * max(abs(fit.predicted_slope), 1.0)
        slope_ok = abs(fit.slope - fit.predicted_slope) <= tol
        r2_ok = fit.r_squared >= r2_min
    else:
        slope_ok = r2_ok = True
    last = records[-1]
    ratio_ok = (
        last.hardy_ratio <= p.c_n_mu * (1.0 + ratio_band) + 3.0 * last.ratio_error
        and last.hardy_ratio >= p.c_n_mu * (1.0 - 0.02) - 3.0 * last.ratio_error
    )
    passed = slope_ok and r2_ok and ratio_ok
    table = ReportTable(
        experiment="optimality",
        columns=_OPTIMALITY_COLUMNS,
        rows=rows,
        summary={
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "predicted_slope": fit.predicted_slope if finite else "inf",
            "points_used": fit.points_used,
            "slope_pass": slope_ok if finite else "skipped",
            "r2_pass": r2_ok if finite else "skipped",
            "ratio_at_smallest_eps": last.hardy_ratio,
            "c_n_mu": p.c_n_mu,
            "ratio_pass": ratio_ok,
        },
        passed=passed,
        wall_time_s=time.perf_counter() - t0,
    )
    write_report(table, run, args)
    _emit(
        args,
        f"optimality: {'PASS' if passed else 'FAIL'} "
        f"(slope {fit.slope:.4g} vs {fit.predicted_slope:.4g}, "
        f"ratio {last.hardy_ratio:.6g} vs c {p.c_n_mu:.6g})",
    )
    return EXIT_OK if passed else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# beta-sweep
# --------------------------------------------------------------------------

_BETA_COLUMNS = (
    "beta",
    "beta_error",
    "coefficient",
    "coefficient_error",
    "identity_residual",
    "identity_residual_error",
    "residual_pass",
)


def cmd_beta_sweep(args) -> int:
    """General-exponent identity residuals and the companion vertex."""
    run = load_run_config(args.config, seed=args.seed, out_dir=None)
    block = _mapping(run.experiments.get("beta_sweep"), "experiments.beta_sweep")
    _check_keys(
        block, {"beta_list", "function", "residual_tol"}, "experiments.beta_sweep"
    )
    betas = block.get("beta_list")
    if not betas:
        raise ConfigError("experiments.beta_sweep.beta_list must be a nonempty list")
    phi = _parse_function(
        block.get("function"), run, "experiments.beta_sweep.function"
    )
    residual_tol = float(block.get("residual_tol", 1e-2))

    t0 = time.perf_counter()
    result = beta_sweep(
        run.cfg, run.weight, run.params.k_mu, betas, phi, run.quadrature
    )
    rows = []
    residual_ok = True
    for rec in result.records:
        ok = abs(rec.residual) <= residual_tol
        residual_ok = residual_ok and ok
        rows.append(
            {
                "beta": rec.beta,
                "beta_error": "exact",
                "coefficient": rec.coefficient,
                "coefficient_error": "exact",
                "identity_residual": rec.residual,
                "identity_residual_error": residual_tol,
                "residual_pass": "true" if ok else "false",
            }
        )
    grid = sorted(r.beta for r in result.records)
    step = max(
        (b2 - b1 for b1, b2 in zip(grid, grid[1:])), default=0.0
    )
    argmax_ok = abs(result.argmax_beta - result.vertex_beta) <= step + 1e-12
    n = run.cfg.n_poles
    shift = run.cfg.dim + run.params.k_mu - 2.0
    vertex_formula = shift * shift / (4.0 * n)
    vertex_ok = abs(result.vertex_value - vertex_formula) <= 1e-12
    passed = residual_ok and argmax_ok and vertex_ok
    table = ReportTable(
        experiment="beta_sweep",
        columns=_BETA_COLUMNS,
        rows=rows,
        summary={
            "argmax_beta": result.argmax_beta,
            "vertex_beta": result.vertex_beta,
            "grid_step": step,
            "argmax_within_one_step": argmax_ok,
            "max_coefficient": result.max_coefficient,
            "vertex_value": result.vertex_value,
            "vertex_formula_gap": abs(result.vertex_value - vertex_formula),
            "residual_tol": residual_tol,
            "residuals_pass": residual_ok,
        },
        passed=passed,
        wall_time_s=time.perf_counter() - t0,
    )
    write_report(table, run, args)
    _emit(
        args,
        f"beta-sweep: {'PASS' if passed else 'FAIL'} "
        f"(argmax {result.argmax_beta:.6g}, vertex {result.vertex_beta:.6g})",
    )
    return EXIT_OK if passed else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# spectral
# --------------------------------------------------------------------------

_SPECTRAL_COLUMNS = (
    "basis_size",
    "basis_size_error",
    "rank",
    "rank_error",
    "lambda_min",
    "lambda_min_error",
    "lambda_over_c",
    "lambda_over_c_error",
)


def cmd_spectral(args) -> int:
    """Finite-span spectral bound over growing basis prefixes."""
    run = load_run_config(args.config, seed=args.seed, out_dir=None)
    block = _mapping(run.experiments.get("spectral"), "experiments.spectral")
    _check_keys(
        block,
        {"basis", "prefix_sizes", "allow_truncation", "lower_slack", "upper_band"},
        "experiments.spectral",
    )
    nodes = block.get("basis")
    if not nodes:
        raise ConfigError("experiments.spectral.basis must be a nonempty list")
    basis = [
        _parse_function(node, run, f"experiments.spectral.basis[{i}]")
        for i, node in enumerate(nodes)
    ]
    sizes = block.get("prefix_sizes") or [len(basis)]
    sizes = sorted({int(s) for s in sizes})
    if sizes[0] < 1 or sizes[-1] > len(basis):
        raise ConfigError(
            f"prefix_sizes must lie in 1..{len(basis)}, got {sizes}"
        )
    allow_truncation = bool(block.get("allow_truncation", False))
    lower_slack = float(block.get("lower_slack", 0.02))
    upper_band = block.get("upper_band")

    cfg, w, p, spec = run.cfg, run.weight, run.params, run.quadrature
    t0 = time.perf_counter()
    rows = []
    monotone = True
    prev = None
    last = None
    for size in sizes:
        res = spectral_bound(
            cfg, w, p, basis[:size], spec, allow_truncation=allow_truncation
        )
        if prev is not None and res.lambda_min > prev + 1e-10:
            monotone = False
        prev = res.lambda_min
        last = res
        rows.append(
            {
                "basis_size": res.basis_size,
                "basis_size_error": "exact",
                "rank": res.rank,
                "rank_error": "exact",
                "lambda_min": res.lambda_min,
                "lambda_min_error": res.lambda_error,
                "lambda_over_c": res.lambda_min / p.c_n_mu,
                "lambda_over_c_error": res.lambda_error / p.c_n_mu,
            }
        )
    lower_ok = last.lambda_min >= p.c_n_mu * (1.0 - lower_slack) - 3.0 * last.lambda_error
    upper_ok = True
    if upper_band is not None:
        upper_ok = last.lambda_min <= p.c_n_mu * (1.0 + float(upper_band)) + (
            3.0 * last.lambda_error
        )
    passed = monotone and lower_ok and upper_ok
    table = ReportTable(
        experiment="spectral",
        columns=_SPECTRAL_COLUMNS,
        rows=rows,
        summary={
            "lambda_min": last.lambda_min,
            "lambda_error": last.lambda_error,
            "c_n_mu": p.c_n_mu,
            "lambda_over_c": last.lambda_min / p.c_n_mu,
            "rank": last.rank,
            "monotone": monotone,
            "lower_pass": lower_ok,
            "upper_pass": upper_ok if upper_band is not None else "skipped",
            "witness": [float(v) for v in last.witness],
        },
        passed=passed,
        wall_time_s=time.perf_counter() - t0,
    )
    write_report(table, run, args)
    _emit(
        args,
        f"spectral: {'PASS' if passed else 'FAIL'} "
        f"(lambda_min {last.lambda_min:.6g}, c {p.c_n_mu:.6g})",
    )
    return EXIT_OK if passed else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# certify
# --------------------------------------------------------------------------

_CERTIFY_COLUMNS = (
    "record",
    "pole",
    "parameter",
    "value",
    "value_error",
    "status",
)


def cmd_certify(args) -> int:
    """Certify the weight hypotheses for the configured problem."""
    run = load_run_config(args.config, seed=args.seed, out_dir=None)
    block = _mapping(run.experiments.get("certify", {}), "experiments.certify")
    _check_keys(block, {"beta"}, "experiments.certify")
    cfg, w, p = run.cfg, run.weight, run.params
    beta = float(block.get("beta", p.beta))

    t0 = time.perf_counter()
    rows = []
    h2_ok = True
    h2_note = ""
    c_mu_est = None
    max_point = None
    try:
        c_mu_est, max_point = h2_certify(cfg, w, beta, p.k_mu, run.quadrature)
        rows.append(
            {
                "record": "h2_c_mu",
                "pole": "",
                "parameter": beta,
                "value": c_mu_est,
                "value_error": 0.05 * abs(c_mu_est),
                "status": "bounded",
            }
        )
    except UnboundedSuspected as exc:
        h2_ok = False
        h2_note = str(exc)
        rows.append(
            {
                "record": "h2_c_mu",
                "pole": "",
                "parameter": beta,
                "value": "nan",
                "value_error": "nan",
                "status": "unbounded_suspected",
            }
        )

    report = h3_h4_certify(cfg, w, p.k_mu)
    for i in range(cfg.n_poles):
        for k, delta in enumerate(report.h3_deltas):
            rows.append(
                {
                    "record": "h3_scaled_ball_mass",
                    "pole": i,
                    "parameter": float(delta),
                    "value": float(report.h3_values[i, k]),
                    "value_error": float(report.h3_errors[i, k]),
                    "status": "decreasing" if report.h3_pass else "fail",
                }
            )
    rows.append(
        {
            "record": "h4i_local_exponent",
            "pole": "",
            "parameter": p.k_mu,
            "value": report.h4i_exponent,
            "value_error": "exact",
            "status": report.h4i_status,
        }
    )
    rows.append(
        {
            "record": "h4ii_far_field_sup",
            "pole": "",
            "parameter": report.h4ii_decay,
            "value": report.h4ii_sup,
            "value_error": 0.05 * abs(report.h4ii_sup),
            "status": "bounded" if report.h4ii_pass else "fail",
        }
    )
    passed = (
        h2_ok
        and report.h3_pass
        and report.h4i_status in ("strict", "borderline")
        and report.h4ii_pass
    )
    summary = {
        "beta": beta,
        "k_mu": p.k_mu,
        "c_mu_estimate": c_mu_est if h2_ok else "nan",
        "h2_pass": h2_ok,
        "h2_note": h2_note,
        "h3_pass": report.h3_pass,
        "h4i_status": report.h4i_status,
        "h4i_exponent": report.h4i_exponent,
        "h4ii_pass": report.h4ii_pass,
        "h4ii_decay": report.h4ii_decay,
    }
    if max_point is not None:
        summary["h2_argmax_point"] = [float(v) for v in max_point]
    table = ReportTable(
        experiment="certify",
        columns=_CERTIFY_COLUMNS,
        rows=rows,
        summary=summary,
        passed=passed,
        wall_time_s=time.perf_counter() - t0,
    )
    write_report(table, run, args)
    _emit(
        args,
        f"certify: {'PASS' if passed else 'FAIL'} "
        f"(C_mu {summary['c_mu_estimate']}, H3 {report.h3_pass}, "
        f"H4i {report.h4i_status}, H4ii {report.h4ii_pass})",
    )
    return EXIT_OK if passed else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhardy",
        description=(
            "Numerical laboratory for weighted Hardy inequalities with "
            "multipolar potentials."
        ),
        epilog=(
            "Exit codes: 0 pass, 1 numerical failure, 2 usage/config error. "
            "Set MHARDY_WORKERS to override the evaluation worker count."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("selftest", cmd_selftest, False),
        ("verify", cmd_verify, True),
        ("optimality", cmd_optimality, True),
        ("beta-sweep", cmd_beta_sweep, True),
        ("spectral", cmd_spectral, True),
        ("certify", cmd_certify, True),
    )
    for name, handler, needs_config in specs:
        p = sub.add_parser(name, help=handler.__doc__.splitlines()[0].lower())
        p.add_argument(
            "--config", required=needs_config, help="path to a JSON run config"
        )
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument(
            "--seed", type=int, default=None, help="seed override (64-bit unsigned)"
        )
        p.add_argument(
            "--filter", default=None, help="case/function name substring filter"
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; re-raise unchanged.
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MultipolarHardyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
