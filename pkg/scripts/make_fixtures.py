#!/usr/bin/env python3
"""Record the first verified run of every derived quantity as a fixture.

Later runs must reproduce these numbers within 1e-9 (bit-drift guard).
Rerun only when a deliberate numerical change is being accepted.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from adiacont.filters import FilterSpec
from adiacont.hamiltonian import perturbed_classical_model
from adiacont.heisenberg import (
    EvolutionConfig,
    evolve_observable,
    evolve_propagator,
    expectation,
    truncation_error_curve,
)
from adiacont.operators import LocalOperator
from adiacont.oracle import boundary_difference_scan, lr_cone_scan
from adiacont.quasiadiabatic import shell_decay_curve

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def save_curve(name: str, xs, values) -> None:
    path = FIXTURES / name
    np.savetxt(path, np.column_stack([xs, values]), fmt="%.17e", delimiter=",")
    print(f"wrote {path}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    # evolved observable matrix, n=8 lam=0.2 gamma=0.6 alpha=beta=2
    chain8 = perturbed_classical_model(1, 8, 0.2)
    spec06 = FilterSpec(gamma=0.6)
    cfg = EvolutionConfig(
        alpha=2, beta=2, observable=LocalOperator.pauli((4,), 3),
        s_grid=(0.0, 1.0), ds=0.05,
    )
    traj = evolve_propagator(chain8, cfg, spec06)
    evolved = evolve_observable(traj, cfg.observable)
    np.save(FIXTURES / "evolved_observable_n8.npy", evolved[-1].matrix)
    print(f"wrote {FIXTURES / 'evolved_observable_n8.npy'}")

    # expectation trajectory, criterion-8 instance
    cfg_exp = EvolutionConfig(
        alpha=3, beta=3, observable=LocalOperator.pauli((4,), 3),
        s_grid=tuple(np.linspace(0.0, 1.0, 6)), ds=0.02,
    )
    traj = evolve_propagator(chain8, cfg_exp, spec06)
    rep = expectation(chain8, traj, cfg_exp.observable, spec06, cfg_exp)
    save_curve("expectation_n8.csv", rep.s_values, rep.omega_approx)

    # truncation-error alpha curve, n=8 lam=0.2
    base = EvolutionConfig(
        alpha=3, beta=3, observable=LocalOperator.pauli((4,), 3),
        s_grid=(0.0, 0.5, 1.0), ds=0.02,
    )
    alpha_curve, _ = truncation_error_curve(
        chain8, base, spec06, 1.0, [0, 1, 2, 3], [3], 4, 4
    )
    save_curve("truncation_alpha_n8.csv", alpha_curve.xs, alpha_curve.values)

    # shell decay, n=10 asymptotic-regime instance (lam=0.05, gamma=0.9)
    chain10w = perturbed_classical_model(1, 10, 0.05)
    spec09 = FilterSpec(gamma=0.9)
    curve = shell_decay_curve(chain10w, 1.0, (0,), 5, spec09)
    save_curve("shell_decay_n10.csv", curve.xs, curve.values)

    # boundary differences at t=1, n=10 default coupling
    chain10 = perturbed_classical_model(1, 10, 0.2)
    bd = boundary_difference_scan(chain10, 1.0, 1, [1, 2, 3, 4, 5], 1.0)
    save_curve("boundary_diff_n10.csv", bd.xs, bd.values)

    # Lieb-Robinson surface, n=10 default coupling
    t_grid = np.linspace(0.5, 6.0, 8)
    cone = lr_cone_scan(chain10, 1.0, 1, 1, [1, 2, 3, 4, 5], t_grid)
    rows = []
    for it, t in enumerate(cone.t_grid):
        for idx, d in enumerate(cone.distances):
            rows.append((t, float(d), cone.values[it, idx]))
    rows = np.array(rows)
    path = FIXTURES / "lr_cone_n10.csv"
    np.savetxt(path, rows, fmt="%.17e", delimiter=",")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
