"""Named experiments: compute, write CSV artifacts, judge configured assertions.

Every CSV cell is written with shortest-roundtrip float formatting and all
internal sums run in fixed orders, so identical configs produce bit-identical
files.  The manifest records the resolved config, package version, and wall
time; wall time never enters a data file.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import ConfigError
from .hamiltonian import gap_scan
from .heisenberg import (
    EvolutionConfig,
    evolve_propagator,
    expectation,
    truncation_error_curve,
)
from .filters import chi_hat, chi_time, time_quadrature
from .oracle import (
    boundary_difference_scan,
    exact_adiabatic_transport,
    exact_expectation,
    full_generator_transport,
    lr_cone_scan,
    projector_filter_check,
    pt_generator_check,
)
from .quasiadiabatic import shell_decay_curve, summability_check


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class ExperimentResult:
    name: str
    passed: bool
    checks: list[tuple[str, bool]] = field(default_factory=list)
    csv_files: list[Path] = field(default_factory=list)

    def summary_lines(self) -> list[str]:
        lines = []
        for label, ok in self.checks:
            lines.append(f"  [{'PASS' if ok else 'FAIL'}] {label}")
        return lines


class OutputWriter:
    """Writes CSVs and the run manifest into the output directory."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []

    def write_csv(self, name: str, header: list[str], rows, comments: dict | None = None) -> Path:
        path = self.out_dir / name
        lines = []
        for key, value in sorted((comments or {}).items()):
            lines.append(f"# {key}={_fmt(value)}")
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(_fmt(cell) for cell in row))
        path.write_text("\n".join(lines) + "\n")
        self.files.append(path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=_fmt) + "\n")
        self.files.append(path)
        return path

    def write_manifest(self, experiment: str, cfg: RunConfig, wall_time: float) -> Path:
        path = self.out_dir / "manifest.txt"
        lines = [f"tool_version={__version__}", f"experiment={experiment}"]
        for key in sorted(cfg.values):
            lines.append(f"{key}={_fmt(cfg.values[key])}")
        lines.append(f"wall_time_s={wall_time:.3f}")
        path.write_text("\n".join(lines) + "\n")
        return path


def _resolve(value: int, fallback: int) -> int:
    return fallback if value < 0 else value


def _lattice_radius(ham) -> int:
    m = ham.lattice.extent
    return ham.lattice.dimension * (m // 2)


def run_gap_scan(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    bound = cfg["model.gap_bound"]
    min_gap, curve = gap_scan(ham, cfg.s_grid(), gap_bound=bound)
    out.write_csv(
        "gap_scan.csv",
        ["s", "ground_energy", "gap"],
        [(r.s, r.ground_energy, r.gap) for r in curve],
        comments={"n": ham.lattice.n_sites, "min_gap": min_gap},
    )
    ok = min_gap >= bound
    return ExperimentResult("gap-scan", ok, [(f"min gap {min_gap:.6f} >= bound {bound:g}", ok)])


def run_filter_check(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    spec = cfg.build_filter_spec()
    g = spec.gamma
    omegas = np.linspace(-1.2 * g, 1.2 * g, 241)
    chivals = np.asarray(chi_hat(spec, omegas))
    out.write_csv(
        "filter_samples.csv",
        ["omega", "chi_hat"],
        zip(omegas, chivals),
        comments={"gamma": g},
    )
    ts = np.linspace(0.0, 50.0 / g, 201)
    out.write_csv(
        "chi_time_samples.csv",
        ["t", "chi"],
        zip(ts, np.asarray(chi_time(spec, ts))),
        comments={"gamma": g},
    )

    checks = []
    plateau = np.abs(omegas) <= g / 3.0
    outside = np.abs(omegas) >= g
    checks.append(
        ("chi_hat exactly 1 on the plateau", bool(np.all(chivals[plateau] == 1.0)))
    )
    checks.append(
        ("chi_hat exactly 0 outside the support", bool(np.all(chivals[outside] == 0.0)))
    )
    _, weighted = time_quadrature(spec)
    norm_defect = abs(float(np.sum(weighted)) - 1.0)
    checks.append((f"time integral of chi within 1e-8 of 1 (defect {norm_defect:.2e})",
                   norm_defect <= 1e-8))

    # decay envelopes: constants fitted at gamma=1 on the scaled grid
    from .filters import FilterSpec as _FS

    ref = _FS(gamma=1.0, mollifier_points=spec.mollifier_points,
              freq_points=spec.freq_points, time_points=spec.time_points)
    t_ref = np.linspace(5.0, 50.0, 181)
    chi_ref = np.abs(np.asarray(chi_time(ref, t_ref)))
    rows = []
    env_ok = True
    t_here = t_ref / g
    chi_here = np.abs(np.asarray(chi_time(spec, t_here)))
    for j in range(2, 6):
        c_j = float((chi_ref * t_ref**j).max())
        bound = 1.02 * c_j * g ** (1 - j) * t_here ** (-float(j))
        ok = bool(np.all(chi_here <= bound))
        env_ok = env_ok and ok
        rows.append((j, c_j, ok))
    out.write_csv(
        "decay_envelope.csv",
        ["j", "c_j_at_gamma_1", "holds_here"],
        rows,
        comments={"gamma": g, "t_range": "5/gamma..50/gamma"},
    )
    checks.append(("time-decay envelopes j=2..5 hold", env_ok))
    passed = all(ok for _, ok in checks)
    return ExperimentResult("filter-check", passed, checks)


def run_projector_check(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    spec = cfg.build_filter_spec()
    rows = []
    checks = []
    for s in cfg.s_grid():
        rep = projector_filter_check(ham, float(s), spec)
        rows.append((s, rep.spectral_residual, rep.quadrature_agreement, rep.gap, rep.gamma_ok))
        if rep.gamma_ok:
            ok = (
                rep.spectral_residual <= cfg["tolerances.projector_spectral"]
                and rep.quadrature_agreement <= cfg["tolerances.projector_quadrature"]
            )
            checks.append((f"s={s:g}: residual {rep.spectral_residual:.2e}, "
                           f"quadrature {rep.quadrature_agreement:.2e}", ok))
    out.write_csv(
        "projector_check.csv",
        ["s", "spectral_residual", "quadrature_agreement", "gap", "gamma_ok"],
        rows,
        comments={"gamma": spec.gamma, "n": ham.lattice.n_sites},
    )
    passed = all(ok for _, ok in checks) and bool(checks)
    return ExperimentResult("projector-check", passed, checks)


def run_pt_check(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    spec = cfg.build_filter_spec()
    rows = []
    worst = 0.0
    for s in cfg.s_grid():
        r = pt_generator_check(ham, float(s), spec)
        worst = max(worst, r)
        rows.append((s, r))
    out.write_csv(
        "pt_check.csv",
        ["s", "residual"],
        rows,
        comments={"gamma": spec.gamma, "n": ham.lattice.n_sites},
    )
    tol = cfg["tolerances.pt_residual"]
    ok = worst <= tol
    return ExperimentResult(
        "pt-check", ok, [(f"max residual {worst:.2e} <= {tol:g}", ok)]
    )


def run_shell_decay(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    spec = cfg.build_filter_spec()
    alpha_max = _resolve(cfg["experiment.alpha_max"], _lattice_radius(ham))
    curve = shell_decay_curve(ham, cfg["experiment.s"], ham.lattice.origin(), alpha_max, spec)
    env = curve.envelope_at(curve.xs)
    out.write_csv(
        "shell_decay.csv",
        ["x", "value", "envelope_fit"],
        zip(curve.xs, curve.values, env),
        comments={
            "gamma": spec.gamma,
            "lambda": cfg["model.coupling"],
            "n": ham.lattice.n_sites,
            "s": cfg["experiment.s"],
        },
    )
    checks = []
    if curve.values.max() == 0.0:
        checks.append(("all shell norms zero (driving term trivial)", True))
    else:
        tail = curve.values[-3:]
        mono = bool(np.all(np.diff(tail) <= 0))
        checks.append(("last three shell norms non-increasing", mono))
        exponent = curve.fit.get("exponent", np.inf)
        ok = exponent <= cfg["tolerances.tail_exponent"]
        checks.append((f"tail power-law exponent {exponent:.2f} <= "
                       f"{cfg['tolerances.tail_exponent']:g}", ok))
    passed = all(ok for _, ok in checks)
    return ExperimentResult("shell-decay", passed, checks)


def run_summability(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    spec = cfg.build_filter_spec()
    alpha_max = _resolve(cfg["experiment.alpha_max"], ham.lattice.extent - 1)
    power = _resolve(cfg["experiment.power"], 7 + ham.lattice.dimension)
    rep = summability_check(ham, cfg["experiment.s"], spec, power=power, alpha_max=alpha_max)
    alphas = np.arange(len(rep.shell_norms))
    weights = (1 + 2 * alphas * (alphas + 1)) ** 2 * (2 + 2 * alphas) ** ham.lattice.dimension
    out.write_csv(
        "summability.csv",
        ["alpha", "shell_norm", "weight", "partial_sum"],
        zip(alphas, rep.shell_norms, weights.astype(float), rep.partial_sums),
        comments={"gamma": spec.gamma, "n": ham.lattice.n_sites,
                  "s": cfg["experiment.s"], "power": power},
    )
    ok = rep.converged
    return ExperimentResult(
        "summability", ok,
        [(f"weighted sum {rep.value:.6g}, final increment "
          f"{rep.final_increment:.2%} < 1%", ok)],
    )


def run_lr_cone(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    rep = lr_cone_scan(
        ham,
        cfg["experiment.s"],
        cfg.axis_code("experiment.a_axis"),
        cfg.axis_code("experiment.b_axis"),
        cfg["experiment.distances"],
        cfg.t_grid(),
    )
    rows = []
    for it, t in enumerate(rep.t_grid):
        for idx, d in enumerate(rep.distances):
            rows.append((t, d, rep.values[it, idx]))
    out.write_csv(
        "lr_cone.csv",
        ["t", "distance", "comm_norm"],
        rows,
        comments={"n": ham.lattice.n_sites, "s": cfg["experiment.s"]},
    )
    out.write_json(
        "lr_fit.json",
        {
            "velocity": rep.velocity,
            "kappa": rep.kappa,
            "intercept": rep.intercept,
            "residual_rms": rep.residual_rms,
            "n_fit_points": rep.n_fit_points,
        },
    )
    checks = [
        (f"commutator cap 2 respected (max {rep.values.max():.3f})",
         bool(rep.values.max() <= 2.0 + 1e-9)),
        (f"fit residual RMS {rep.residual_rms:.3f} <= {cfg['tolerances.lr_rms']:g}",
         rep.residual_rms <= cfg["tolerances.lr_rms"]),
    ]
    passed = all(ok for _, ok in checks)
    return ExperimentResult("lr-cone", passed, checks)


def run_boundary_diff(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    alphas = cfg["experiment.alphas"] or tuple(range(1, _lattice_radius(ham) + 1))
    curve = boundary_difference_scan(
        ham, cfg["experiment.s"], cfg.axis_code("experiment.a_axis"),
        list(alphas), cfg["experiment.t"],
    )
    env = curve.envelope_at(curve.xs)
    out.write_csv(
        "boundary_diff.csv",
        ["x", "value", "envelope_fit"],
        zip(curve.xs, curve.values, env),
        comments={"n": ham.lattice.n_sites, "lambda": cfg["model.coupling"],
                  "t": cfg["experiment.t"], "s": cfg["experiment.s"]},
    )
    tail = curve.values[-3:] if len(curve.values) >= 3 else curve.values
    ok = bool(np.all(np.diff(tail) <= 1e-15))
    return ExperimentResult(
        "boundary-diff", ok, [("boundary differences non-increasing in the tail", ok)]
    )


def _evolution_config(cfg: RunConfig, ham) -> EvolutionConfig:
    spec = cfg.build_filter_spec()
    if spec.gamma >= cfg["model.gap_bound"]:
        raise ConfigError(
            f"filter gamma {spec.gamma:g} must stay below the configured gap "
            f"bound {cfg['model.gap_bound']:g} for the evolution to be valid"
        )
    return EvolutionConfig(
        alpha=cfg["evolution.alpha"],
        beta=cfg["evolution.beta"],
        observable=cfg.build_observable(ham),
        s_grid=cfg.s_grid(),
        ds=cfg["evolution.ds"],
        convergence_check=cfg["evolution.convergence_check"],
    )


def run_evolve_expectation(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    spec = cfg.build_filter_spec()
    evo = _evolution_config(cfg, ham)
    trajectory = evolve_propagator(ham, evo, spec)
    report = expectation(ham, trajectory, evo.observable, spec, evo)
    use_oracle = cfg["experiment.oracle"] and ham.lattice.n_sites <= 12
    oracle_col = [""] * len(report.s_values)
    err_col = [""] * len(report.s_values)
    checks = []
    if use_oracle:
        oracle_vals = np.array(
            [exact_expectation(ham, float(s), evo.observable) for s in report.s_values]
        )
        report.omega_oracle = oracle_vals
        err = report.abs_error
        oracle_col = list(oracle_vals)
        err_col = list(err)
        tol = cfg["tolerances.epsilon"]
        ok = bool(err.max() <= tol)
        checks.append((f"max |omega' - omega| = {err.max():.3e} <= {tol:g}", ok))
    rows = []
    for i, s in enumerate(report.s_values):
        rows.append((
            s, report.omega_approx[i], oracle_col[i], err_col[i],
            report.alpha, report.beta, report.gamma, report.defects[i],
        ))
    out.write_csv(
        "expectation.csv",
        ["s", "omega_approx", "omega_oracle", "abs_error",
         "alpha", "beta", "gamma", "unitarity_defect"],
        rows,
        comments={"n": ham.lattice.n_sites, "lambda": cfg["model.coupling"]},
    )
    passed = all(ok for _, ok in checks)
    return ExperimentResult("evolve-expectation", passed, checks)


def run_truncation_error(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    spec = cfg.build_filter_spec()
    evo = _evolution_config(cfg, ham)
    radius = _lattice_radius(ham)
    alpha_ref = _resolve(cfg["experiment.alpha_ref"], radius)
    beta_ref = _resolve(cfg["experiment.beta_ref"], radius)
    alphas = list(cfg["experiment.alphas"] or range(alpha_ref))
    betas = list(cfg["experiment.betas"] or range(beta_ref))
    alpha_curve, beta_curve = truncation_error_curve(
        ham, evo, spec, cfg["experiment.s"], alphas, betas, alpha_ref, beta_ref
    )
    meta = {"n": ham.lattice.n_sites, "lambda": cfg["model.coupling"],
            "gamma": spec.gamma, "s": cfg["experiment.s"],
            "alpha_ref": alpha_ref, "beta_ref": beta_ref}
    out.write_csv(
        "truncation_error_alpha.csv",
        ["x", "value", "envelope_fit"],
        zip(alpha_curve.xs, alpha_curve.values, alpha_curve.envelope_at(alpha_curve.xs)),
        comments=meta,
    )
    out.write_csv(
        "truncation_error_beta.csv",
        ["x", "value", "envelope_fit"],
        zip(beta_curve.xs, beta_curve.values, beta_curve.envelope_at(beta_curve.xs)),
        comments=meta,
    )
    tail = alpha_curve.values[-3:]
    mono = bool(np.all(np.diff(tail) < 0))
    final_ok = bool(alpha_curve.values[-1] <= cfg["tolerances.epsilon"])
    checks = [
        ("alpha error curve strictly decreasing over its last three points", mono),
        (f"final alpha point {alpha_curve.values[-1]:.3e} <= epsilon", final_ok),
    ]
    passed = all(ok for _, ok in checks)
    return ExperimentResult("truncation-error", passed, checks)


def run_exact_transport(cfg: RunConfig, out: OutputWriter) -> ExperimentResult:
    ham = cfg.build_model()
    ds = cfg["experiment.ds"]
    kind = cfg["experiment.generator"]
    if kind == "projector":
        rep = exact_adiabatic_transport(ham, ds)
    elif kind == "quasiadiabatic":
        rep = full_generator_transport(ham, cfg.build_filter_spec(), ds)
    else:
        raise ConfigError(f"experiment.generator must be 'projector' or 'quasiadiabatic', got {kind!r}")
    stride = max(1, len(rep.s_values) // 200)
    rows = list(zip(rep.s_values[::stride], rep.errors[::stride]))
    out.write_csv(
        "transport_error.csv",
        ["s", "projector_error"],
        rows,
        comments={"n": ham.lattice.n_sites, "ds": ds, "generator": kind},
    )
    checks = []
    tol = cfg["tolerances.transport_error"]
    ok = rep.max_error <= tol
    checks.append((f"max projector error {rep.max_error:.3e} <= {tol:g}", ok))
    base = cfg["experiment.halving_base"]
    if base > 0:
        coarse = (exact_adiabatic_transport(ham, base) if kind == "projector"
                  else full_generator_transport(ham, cfg.build_filter_spec(), base))
        fine = (exact_adiabatic_transport(ham, base / 2) if kind == "projector"
                else full_generator_transport(ham, cfg.build_filter_spec(), base / 2))
        ratio = coarse.max_error / max(fine.max_error, 1e-300)
        ok2 = ratio >= 3.0
        checks.append((f"halving from ds={base:g} reduces error {ratio:.1f}x (>= 3)", ok2))
    passed = all(ok for _, ok in checks)
    return ExperimentResult("exact-transport", passed, checks)


EXPERIMENTS = {
    "gap-scan": run_gap_scan,
    "filter-check": run_filter_check,
    "projector-check": run_projector_check,
    "pt-check": run_pt_check,
    "shell-decay": run_shell_decay,
    "summability": run_summability,
    "lr-cone": run_lr_cone,
    "boundary-diff": run_boundary_diff,
    "evolve-expectation": run_evolve_expectation,
    "truncation-error": run_truncation_error,
    "exact-transport": run_exact_transport,
}


def run_experiment(name: str, cfg: RunConfig, out_dir: Path) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; choose from {', '.join(sorted(EXPERIMENTS))}"
        )
    configured = cfg["experiment.name"]
    if configured and configured != name:
        raise ConfigError(
            f"config names experiment {configured!r} but {name!r} was requested"
        )
    writer = OutputWriter(out_dir)
    start = time.time()
    result = EXPERIMENTS[name](cfg, writer)
    writer.write_manifest(name, cfg, time.time() - start)
    result.csv_files = list(writer.files)
    return result
