"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances are pinned here and nowhere else.
"""

import pathlib

import numpy as np
import pytest

from adiacont.cli import main as cli_main
from adiacont.filters import FilterSpec, SpectralWeight, chi_hat, chi_time
from adiacont.hamiltonian import perturbed_classical_model, restrict
from adiacont.heisenberg import (
    EvolutionConfig,
    evolve_propagator,
    expectation,
    truncation_error_curve,
)
from adiacont.operators import LocalOperator, embed, embed_dense
from adiacont.oracle import (
    boundary_difference_scan,
    exact_adiabatic_transport,
    exact_expectation,
    full_generator_transport,
    lr_cone_scan,
    projector_filter_check,
    pt_generator_check,
)
from adiacont.quasiadiabatic import (
    f_s,
    fit_power_law,
    shell_decay_curve,
    shell_term,
    summability_check,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

GAMMA_DEFAULT = 0.6  # = (configured gap bound 1.2) / 2
SPEC_DEFAULT = FilterSpec(gamma=GAMMA_DEFAULT)

# weak-coupling instance with the configured bound raised to 1.8: the
# superpolynomial shell-decay regime is visible at desk scale there
WEAK_COUPLING = 0.05
SPEC_WEAK = FilterSpec(gamma=0.9)


def _verdict(num: int, label: str, ok: bool) -> None:
    print(f"ACCEPTANCE {num:02d} [{'PASS' if ok else 'FAIL'}] {label}")
    assert ok, f"criterion {num} failed: {label}"


def _load_curve(name: str) -> np.ndarray:
    path = FIXTURES / name
    assert path.exists(), f"run scripts/make_fixtures.py first ({name} missing)"
    return np.loadtxt(path, delimiter=",", ndmin=2)


def test_criterion_01_filter_construction():
    checks = []
    ref = FilterSpec(gamma=1.0)
    for spec in (ref, FilterSpec(gamma=0.5), FilterSpec(gamma=2.0)):
        g = spec.gamma
        plateau = np.linspace(-g / 3, g / 3, 101)
        outside = np.concatenate([np.linspace(g, 3 * g, 40), -np.linspace(g, 3 * g, 40)])
        checks.append(chi_hat(spec, 0.0) == 1.0)
        checks.append(bool(np.all(np.asarray(chi_hat(spec, plateau)) == 1.0)))
        checks.append(bool(np.all(np.asarray(chi_hat(spec, outside)) == 0.0)))
    t_ref = np.linspace(5.0, 50.0, 181)
    c_j = {j: float((np.abs(np.asarray(chi_time(ref, t_ref))) * t_ref**j).max())
           for j in range(2, 6)}
    for gamma in (0.5, 2.0):
        spec = FilterSpec(gamma=gamma)
        ts = t_ref / gamma
        vals = np.abs(np.asarray(chi_time(spec, ts)))
        for j in range(2, 6):
            envelope = 1.02 * c_j[j] * gamma ** (1 - j) * ts ** (-float(j))
            checks.append(bool(np.all(vals <= envelope)))
    _verdict(1, "filter plateau/support exact; |chi(t)| <= C_j g^{1-j} t^{-j}, j=2..5",
             all(checks))


def test_criterion_02_projector_reconstruction():
    checks = []
    for m in (1, 2, 6):
        ham = perturbed_classical_model(1, m, 0.2)
        rep = projector_filter_check(ham, 1.0, SPEC_DEFAULT)
        checks.append(rep.gamma_ok)
        checks.append(rep.spectral_residual <= 1e-10)
        checks.append(rep.quadrature_agreement <= 1e-6)
    negative = projector_filter_check(
        perturbed_classical_model(1, 1, 0.0), 0.0, FilterSpec(gamma=3.0)
    )
    checks.append(not negative.gamma_ok)
    checks.append(negative.spectral_residual > 0.0)
    _verdict(2, "projector residual <= 1e-10, quadrature path <= 1e-6, "
                "negative control leaks", all(checks))


def test_criterion_03_perturbation_theory_identity():
    ham = perturbed_classical_model(1, 8, 0.2)
    worst = max(
        pt_generator_check(ham, s, SPEC_DEFAULT) for s in (0.0, 0.25, 0.5, 0.75, 1.0)
    )
    _verdict(3, f"PT identity residual {worst:.2e} <= 1e-9 on n=8", worst <= 1e-9)


def test_criterion_04_unitary_transport_full_generator():
    ham = perturbed_classical_model(1, 8, 0.2)
    stated = full_generator_transport(ham, SPEC_DEFAULT, 1e-3)
    ok_err = stated.max_error <= 1e-4
    # the halving certificate runs where discretization still dominates the
    # floating-point floor; the stated ds=1e-3 error sits far below it
    coarse = full_generator_transport(ham, SPEC_DEFAULT, 0.02)
    fine = full_generator_transport(ham, SPEC_DEFAULT, 0.01)
    ratio = coarse.max_error / max(fine.max_error, 1e-300)
    ok_ratio = ratio >= 4.0
    _verdict(4, f"full-K transport err {stated.max_error:.2e} <= 1e-4 at ds=1e-3; "
                f"halving reduces {ratio:.1f}x >= 4x", ok_err and ok_ratio)


def test_criterion_05_exact_adiabatic_generator():
    ham = perturbed_classical_model(1, 6, 0.2)
    stated = exact_adiabatic_transport(ham, 1e-3)
    ok_err = stated.max_error <= 1e-4
    coarse = exact_adiabatic_transport(ham, 4e-3)
    fine = exact_adiabatic_transport(ham, 2e-3)
    ratio = coarse.max_error / max(fine.max_error, 1e-300)
    ok_ratio = 3.0 <= ratio <= 6.0
    ham2 = perturbed_classical_model(1, 2, 0.2)
    r2 = (exact_adiabatic_transport(ham2, 4e-3).max_error
          / exact_adiabatic_transport(ham2, 2e-3).max_error)
    ok_n2 = 3.0 <= r2 <= 6.0
    _verdict(5, f"[P,P'] transport err {stated.max_error:.2e} <= 1e-4 at ds=1e-3; "
                f"2nd-order refinement (ratios {ratio:.2f}, n=2 {r2:.2f})",
             ok_err and ok_ratio and ok_n2)


def test_criterion_06_shell_decay():
    ham = perturbed_classical_model(1, 10, WEAK_COUPLING)
    cone = lr_cone_scan(ham, 1.0, 1, 1, [1, 2, 3], np.linspace(0.5, 6.0, 8))
    c = cone.velocity / (2.0 * cone.kappa)
    onset = max(1, int(np.ceil(c / 1.8)))  # configured gap bound 1.8
    curve = shell_decay_curve(ham, 1.0, (0,), 5, SPEC_WEAK)
    tail = curve.values[onset:]
    ok_mono = bool(np.all(np.diff(tail) <= 0))
    fit = fit_power_law(curve.xs[onset:], curve.values[onset:])
    exponent = fit.get("exponent", -np.inf)
    ok_exp = exponent <= -3.0

    # telescoping on n=6 with the default instance
    chain6 = perturbed_classical_model(1, 6, 0.2)
    window = chain6.lattice.sites()
    total = np.zeros((64, 64), dtype=complex)
    for alpha in range(6):
        term = shell_term(chain6, 1.0, (0,), alpha, SPEC_DEFAULT)
        total += embed_dense(term.operator, window).matrix
    hr = restrict(chain6, 1.0, window, window)
    hp = embed(chain6.driving_term((0,)), window)
    want = f_s(hp, hr, SpectralWeight(SPEC_DEFAULT)).matrix
    ok_tel = float(np.abs(total - want).max()) <= 1e-9

    fixture = _load_curve("shell_decay_n10.csv")
    ok_fix = float(np.abs(curve.values - fixture[:, 1]).max()) <= 1e-9
    _verdict(6, f"shell norms monotone beyond alpha*={onset}, tail exponent "
                f"{exponent:.1f} <= -3, telescoping <= 1e-9, fixture stable",
             ok_mono and ok_exp and ok_tel and ok_fix)


def test_criterion_07_summability():
    ham = perturbed_classical_model(1, 10, WEAK_COUPLING)
    rep = summability_check(ham, 1.0, SPEC_WEAK, alpha_max=8)
    base = rep.partial_sums[4]
    doubled = rep.partial_sums[8]
    rel_change = abs(doubled - base) / doubled
    ok = rep.converged and rel_change < 0.01
    _verdict(7, f"weighted shell sum {doubled:.4f}; alpha_max doubling changes "
                f"{rel_change:.2%} < 1%", ok)


def test_criterion_08_truncated_evolution_accuracy():
    ham = perturbed_classical_model(1, 8, 0.2)
    obs = LocalOperator.pauli((4,), 3)
    cfg = EvolutionConfig(alpha=3, beta=3, observable=obs,
                          s_grid=tuple(np.linspace(0.0, 1.0, 6)), ds=0.02)
    traj = evolve_propagator(ham, cfg, SPEC_DEFAULT)
    rep = expectation(ham, traj, obs, SPEC_DEFAULT, cfg)
    oracle = np.array([exact_expectation(ham, float(s), obs) for s in rep.s_values])
    err = np.abs(rep.omega_approx - oracle)
    ok_eps = bool(err.max() <= 0.01)

    fixture = _load_curve("expectation_n8.csv")
    ok_fix = float(np.abs(rep.omega_approx - fixture[:, 1]).max()) <= 1e-9

    base = EvolutionConfig(alpha=3, beta=3, observable=obs,
                           s_grid=(0.0, 0.5, 1.0), ds=0.02)
    alpha_curve, _ = truncation_error_curve(
        ham, base, SPEC_DEFAULT, 1.0, [0, 1, 2, 3], [3], 4, 4
    )
    ok_mono = bool(np.all(np.diff(alpha_curve.values[-3:]) < 0))
    fixture_tr = _load_curve("truncation_alpha_n8.csv")
    ok_fix_tr = float(np.abs(alpha_curve.values - fixture_tr[:, 1]).max()) <= 1e-9

    full_cfg = EvolutionConfig(alpha=4, beta=4, observable=obs,
                               s_grid=(0.0, 0.5, 1.0), ds=0.01)
    full_traj = evolve_propagator(ham, full_cfg, SPEC_DEFAULT)
    full_rep = expectation(ham, full_traj, obs, SPEC_DEFAULT, full_cfg)
    full_oracle = np.array(
        [exact_expectation(ham, float(s), obs) for s in full_rep.s_values]
    )
    full_err = float(np.abs(full_rep.omega_approx - full_oracle).max())
    ok_full = full_err <= 2e-6  # 1e-6 + ODE tolerance

    _verdict(8, f"|omega' - omega| max {err.max():.2e} <= 0.01 at alpha=beta=3; "
                f"alpha curve decreasing; full window err {full_err:.1e} <= 2e-6",
             ok_eps and ok_fix and ok_mono and ok_fix_tr and ok_full)


def test_criterion_09_lieb_robinson_structure():
    ham = perturbed_classical_model(1, 10, 0.2)
    t_grid = np.concatenate([[0.0], np.linspace(0.5, 6.0, 8)])
    cone = lr_cone_scan(ham, 1.0, 1, 1, [1, 2, 3, 4, 5], t_grid)
    ok_zero = bool(np.abs(cone.values[0]).max() <= 1e-10)
    ok_cap = bool(cone.values.max() <= 2.0 + 1e-9)
    ok_rms = cone.residual_rms <= 0.5

    fixture = _load_curve("lr_cone_n10.csv")
    ok_fix = float(np.abs(cone.values[1:].ravel() - fixture[:, 2]).max()) <= 1e-9

    radius = max(1, int(np.ceil(cone.kappa * 1.0 / cone.velocity)))
    bd = boundary_difference_scan(ham, 1.0, 1, [1, 2, 3, 4, 5], 1.0)
    tail = bd.values[radius - 1:]
    ok_bd = bool(np.all(np.diff(tail) < 0))
    fixture_bd = _load_curve("boundary_diff_n10.csv")
    ok_fix_bd = float(np.abs(bd.values - fixture_bd[:, 1]).max()) <= 1e-9

    _verdict(9, f"commutator 0 at t=0, cap 2, fit RMS {cone.residual_rms:.2f} <= 0.5, "
                f"boundary differences decreasing beyond cone radius {radius}",
             ok_zero and ok_cap and ok_rms and ok_fix and ok_bd and ok_fix_bd)


def test_criterion_10_determinism_and_fixtures(tmp_path):
    cfg_path = tmp_path / "acc.cfg"
    cfg_path.write_text(
        "model.extent = 6\nmodel.coupling = 0.05\nmodel.gap_bound = 1.8\n"
        "experiment.alpha_max = 3\nevolution.s_points = 4\n"
    )
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    fixtures = tmp_path / "fixtures"
    rc1 = cli_main(["run", "shell-decay", str(cfg_path), "--out", str(out1),
                    "--fixtures", str(fixtures), "--write-fixtures"])
    rc2 = cli_main(["run", "shell-decay", str(cfg_path), "--out", str(out2),
                    "--fixtures", str(fixtures)])
    ok_cli = rc1 == 0 and rc2 == 0
    ok_bits = (out1 / "shell_decay.csv").read_bytes() == (out2 / "shell_decay.csv").read_bytes()

    rc3 = cli_main(["run", "gap-scan", str(cfg_path), "--out", str(tmp_path / "g1")])
    rc4 = cli_main(["run", "gap-scan", str(cfg_path), "--out", str(tmp_path / "g2")])
    ok_gap = rc3 == 0 and rc4 == 0 and (
        (tmp_path / "g1" / "gap_scan.csv").read_bytes()
        == (tmp_path / "g2" / "gap_scan.csv").read_bytes()
    )

    # stored derived fixtures reproduce within 1e-9 (recomputed in criteria
    # 6, 8, 9 above); here the cheap one is recomputed end to end again
    ham = perturbed_classical_model(1, 10, WEAK_COUPLING)
    curve = shell_decay_curve(ham, 1.0, (0,), 5, SPEC_WEAK)
    fixture = _load_curve("shell_decay_n10.csv")
    ok_stable = float(np.abs(curve.values - fixture[:, 1]).max()) <= 1e-9

    _verdict(10, "bit-identical CSVs across reruns; derived fixtures stable to 1e-9",
             ok_cli and ok_bits and ok_gap and ok_stable)