"""Truncated Heisenberg-picture evolution of local observables.

The truncated propagator solves dV/ds = i K-tilde(s) V from V(0) = 1 with a
classical 4th-order Runge-Kutta step (generator refreshed at the stage
points s, s + ds/2, s + ds, the endpoint being reused by the next step), an
optional step-halving self-convergence certificate, and unitarity-defect
tracking with polar re-projection inside a bounded repair band.  Observables
evolve as A -> V^dag A V, and approximate expectations are taken in the
known product ground state of H(0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OdeConvergenceError, UnitarityError, WindowCapError
from .filters import FilterSpec
from .hamiltonian import ParamHamiltonian, assemble
from .lattice import SiteSet, siteset
from .operators import DenseOperator, LocalOperator, embed, embed_dense, op_norm
from .quasiadiabatic import (
    DecayCurve,
    EIGEN_CAP,
    fit_power_law,
    generator_window,
    truncated_generator_matrix,
)


@dataclass(frozen=True)
class EvolutionConfig:
    """Truncation radii, path grid, step size, and unitarity policy."""

    alpha: int
    beta: int
    observable: LocalOperator
    s_grid: tuple[float, ...] = tuple(np.linspace(0.0, 1.0, 21))
    ds: float = 0.02
    unitarity_tol: float = 1e-8
    unitarity_max: float = 1e-6
    convergence_check: bool = True
    convergence_tol: float = 1e-6
    max_observable_support: int = 4

    def __post_init__(self):
        grid = tuple(float(x) for x in self.s_grid)
        if not grid or grid[0] != 0.0 or grid[-1] != 1.0:
            raise ConfigError("s_grid must start at 0 and end at 1")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ConfigError("s_grid must be nondecreasing")
        if self.ds <= 0:
            raise ConfigError("ODE step ds must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("truncation radii must be nonnegative")
        support = len(self.observable.support)
        if support > self.max_observable_support:
            # extensive observables are out of contract: the window, and with
            # it the cost, would grow with the observable
            raise ConfigError(
                f"observable acts on {support} sites, above the configured "
                f"cap of {self.max_observable_support}"
            )
        object.__setattr__(self, "s_grid", grid)


@dataclass
class PropagatorState:
    """Propagator snapshot at one path point."""

    s: float
    window: SiteSet
    matrix: np.ndarray = field(repr=False)
    defect: float = 0.0


def evolution_window(ham: ParamHamiltonian, cfg: EvolutionConfig) -> tuple[SiteSet, SiteSet]:
    """Generator centres within alpha of the observable, and their window."""
    lat = ham.lattice
    support = cfg.observable.support
    if not support:
        raise ConfigError("observable has empty support")
    centers = siteset(
        j for j in lat.sites() if lat.set_distance(j, support) <= cfg.alpha
    )
    window = generator_window(ham, centers, cfg.beta)
    return centers, window


def _unitarity_defect(v: np.ndarray) -> float:
    gram = v.conj().T @ v - np.eye(v.shape[0])
    return float(np.abs(np.linalg.eigvalsh(gram)).max())


def _polar_project(v: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(v)
    return u @ vh


class _GeneratorTable:
    """Builds i*K-tilde(s) on demand, caching stage points within a byte budget.

    The step-halving pass revisits half of the main pass's stage points, so a
    generous cache roughly halves its cost; the budget keeps big windows from
    hoarding memory.
    """

    CACHE_BYTES = 256 * 2**20

    def __init__(self, ham, centers, beta, spec, window):
        self.ham = ham
        self.centers = centers
        self.beta = beta
        self.spec = spec
        self.window = window
        entry = (1 << len(window)) ** 2 * 16
        self.max_entries = max(4, self.CACHE_BYTES // entry)
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, s: float) -> np.ndarray:
        key = round(float(s), 12)
        if key not in self._cache:
            while len(self._cache) >= self.max_entries:
                self._cache.pop(next(iter(self._cache)))
            k = truncated_generator_matrix(
                self.ham, float(s), self.centers, self.beta, self.spec,
                window=self.window, ed_cache={},
            )
            self._cache[key] = 1.0j * k.matrix
        return self._cache[key]


def _rk4_propagate(gen, v: np.ndarray, s0: float, s1: float, nsteps: int) -> np.ndarray:
    h = (s1 - s0) / nsteps
    for k in range(nsteps):
        s = s0 + k * h
        g0 = gen(s)
        gm = gen(s + h / 2)
        g1 = gen(s + h)
        k1 = g0 @ v
        k2 = gm @ (v + (h / 2) * k1)
        k3 = gm @ (v + (h / 2) * k2)
        k4 = g1 @ (v + h * k3)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def evolve_propagator(
    ham: ParamHamiltonian, cfg: EvolutionConfig, spec: FilterSpec
) -> list[PropagatorState]:
    """Propagator trajectory at the path grid points."""
    centers, window = evolution_window(ham, cfg)
    if len(window) > EIGEN_CAP:
        raise WindowCapError(
            f"evolution window of {len(window)} sites exceeds the cap of {EIGEN_CAP}"
        )
    gen = _GeneratorTable(ham, centers, cfg.beta, spec, window)
    dim = 1 << len(window)
    v = np.eye(dim, dtype=complex)
    trajectory = [PropagatorState(s=cfg.s_grid[0], window=window, matrix=v.copy(), defect=0.0)]
    v_half = v.copy() if cfg.convergence_check else None
    for s0, s1 in zip(cfg.s_grid, cfg.s_grid[1:]):
        if s1 == s0:
            trajectory.append(PropagatorState(s1, window, v.copy(), trajectory[-1].defect))
            continue
        nsteps = max(1, int(np.ceil((s1 - s0) / cfg.ds - 1e-12)))
        v = _rk4_propagate(gen, v, s0, s1, nsteps)
        defect = _unitarity_defect(v)
        if defect > cfg.unitarity_max:
            raise UnitarityError(
                f"unitarity defect {defect:.3e} at s={s1:g} exceeds {cfg.unitarity_max:g}"
            )
        if defect > cfg.unitarity_tol:
            v = _polar_project(v)
            defect = _unitarity_defect(v)
        if cfg.convergence_check:
            v_half = _rk4_propagate(gen, v_half, s0, s1, 2 * nsteps)
        trajectory.append(PropagatorState(s=s1, window=window, matrix=v.copy(), defect=defect))
    if cfg.convergence_check:
        drift = op_norm(v - v_half)
        if drift > cfg.convergence_tol:
            raise OdeConvergenceError(
                f"step halving moved V(1) by {drift:.3e} (> {cfg.convergence_tol:g}); "
                f"reduce ds"
            )
    return trajectory


def evolve_observable(trajectory: list[PropagatorState], a: LocalOperator) -> list[DenseOperator]:
    """A-tilde(s) = V^dag A V along the trajectory."""
    window = trajectory[0].window
    missing = set(a.support) - set(window)
    if missing:
        raise ConfigError(f"observable support {sorted(missing)} outside the evolution window")
    a_dense = embed(a, window).matrix
    return [
        DenseOperator(window, st.matrix.conj().T @ a_dense @ st.matrix) for st in trajectory
    ]


def product_state(window: SiteSet, local_kets: dict | None = None) -> np.ndarray:
    """Product state on the window; defaults to all-up (basis index 0)."""
    vec = np.array([1.0 + 0.0j])
    for site in window:
        ket = np.asarray((local_kets or {}).get(site, (1.0, 0.0)), dtype=complex)
        vec = np.kron(vec, ket / np.linalg.norm(ket))
    return vec


def _validate_initial_state(ham: ParamHamiltonian, window: SiteSet, psi: np.ndarray) -> None:
    """The initial state must be an H(0)-eigenstate on the window interior."""
    window_set = set(window)
    interior = siteset(
        j for j in ham.lattice.sites() if set(ham.region_window((j,))) <= window_set
    )
    if not interior:
        return
    h0 = assemble(ham, 0.0, interior, window=window).matrix
    h_psi = h0 @ psi
    energy = np.vdot(psi, h_psi).real
    residual = float(np.linalg.norm(h_psi - energy * psi))
    if residual > 1e-8:
        raise ConfigError(
            f"initial state is not an H(0) eigenstate on the window interior "
            f"(residual {residual:.3e}); wrong initial ground state configured"
        )


@dataclass
class ExpectationReport:
    """Approximate expectation trajectory with provenance and optional oracle."""

    s_values: np.ndarray
    omega_approx: np.ndarray
    alpha: int
    beta: int
    gamma: float
    defects: np.ndarray
    omega_oracle: np.ndarray | None = None

    @property
    def abs_error(self) -> np.ndarray | None:
        if self.omega_oracle is None:
            return None
        return np.abs(self.omega_approx - self.omega_oracle)


def expectation(
    ham: ParamHamiltonian,
    trajectory: list[PropagatorState],
    a: LocalOperator,
    spec: FilterSpec,
    cfg: EvolutionConfig,
    initial_state: np.ndarray | None = None,
) -> ExpectationReport:
    """omega'_s(A) = <psi0| V^dag A V |psi0> along the trajectory."""
    window = trajectory[0].window
    psi = product_state(window) if initial_state is None else np.asarray(initial_state, complex)
    psi = psi / np.linalg.norm(psi)
    _validate_initial_state(ham, window, psi)
    evolved = evolve_observable(trajectory, a)
    omega = np.array([np.vdot(psi, op.matrix @ psi).real for op in evolved])
    return ExpectationReport(
        s_values=np.array([st.s for st in trajectory]),
        omega_approx=omega,
        alpha=cfg.alpha,
        beta=cfg.beta,
        gamma=spec.gamma,
        defects=np.array([st.defect for st in trajectory]),
    )


def _final_observable(
    ham: ParamHamiltonian, cfg: EvolutionConfig, spec: FilterSpec, s: float
) -> DenseOperator:
    trajectory = evolve_propagator(ham, cfg, spec)
    idx = [i for i, st in enumerate(trajectory) if abs(st.s - s) < 1e-12]
    if not idx:
        raise ConfigError(f"s={s} is not a point of the configured s_grid")
    evolved = evolve_observable(trajectory, cfg.observable)
    return evolved[idx[0]]


def truncation_error_curve(
    ham: ParamHamiltonian,
    base: EvolutionConfig,
    spec: FilterSpec,
    s: float,
    alphas: list[int],
    betas: list[int],
    alpha_ref: int,
    beta_ref: int,
) -> tuple[DecayCurve, DecayCurve]:
    """Distance of A-tilde_{a,b}(s) from the largest-window reference run."""
    from dataclasses import replace

    ref_cfg = replace(base, alpha=alpha_ref, beta=beta_ref)
    reference = _final_observable(ham, ref_cfg, spec, s)

    def distance(alpha: int, beta: int) -> float:
        probe = _final_observable(ham, replace(base, alpha=alpha, beta=beta), spec, s)
        union = siteset(set(probe.window) | set(reference.window))
        diff = embed_dense(probe, union).matrix - embed_dense(reference, union).matrix
        return op_norm(DenseOperator(union, diff))

    alpha_vals = np.array([distance(a, beta_ref) for a in alphas])
    beta_vals = np.array([distance(alpha_ref, b) for b in betas])
    meta = {"s": s, "gamma": spec.gamma, "n": ham.lattice.n_sites,
            "alpha_ref": alpha_ref, "beta_ref": beta_ref}
    alpha_curve = DecayCurve(
        label="alpha", xs=np.asarray(alphas, float), values=alpha_vals,
        fit=fit_power_law(alphas, alpha_vals), meta=dict(meta),
    )
    beta_curve = DecayCurve(
        label="beta", xs=np.asarray(betas, float), values=beta_vals,
        fit=fit_power_law(betas, beta_vals), meta=dict(meta),
    )
    return alpha_curve, beta_curve
