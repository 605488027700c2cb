"""The effectively local generator of exact adiabatic evolution.

``f_s`` applies the spectral-weight map to an operator in the eigenbasis of a
restricted Hamiltonian: matrix element (m, n) is multiplied by
w(E_m - E_n).  Shell terms k_{j,alpha}(s) are differences of that map under
nested restricted Hamiltonians; their norm decay certifies approximate
locality.  Truncated generators sum the map over centres within a ball,
each term evaluated on its own beta-ball.

All sums run in a fixed order (ascending site order, then shell index) so
results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AdiacontError, WindowCapError
from .filters import FilterSpec, SpectralWeight
from .hamiltonian import ParamHamiltonian, RestrictedHamiltonian, restrict
from .lattice import Site, SiteSet, siteset
from .operators import DenseOperator, embed, embed_dense, op_norm

#: Full diagonalization is required, so the window cap is one site stricter
#: than plain dense assembly.
EIGEN_CAP = 13

HERMITICITY_TOL = 1e-10

EdCache = dict[tuple[float, SiteSet, SiteSet], tuple[np.ndarray, np.ndarray]]


def eigensystem(hr: RestrictedHamiltonian, ed_cache: EdCache | None = None):
    """Eigendecomposition of a restricted Hamiltonian, optionally cached."""
    if len(hr.window) > EIGEN_CAP:
        raise WindowCapError(
            f"window of {len(hr.window)} sites exceeds the eigensolve cap of {EIGEN_CAP}"
        )
    key = (hr.s, hr.region, hr.window)
    if ed_cache is not None and key in ed_cache:
        return ed_cache[key]
    evals, evecs = np.linalg.eigh(hr.dense.matrix)
    if ed_cache is not None:
        ed_cache[key] = (evals, evecs)
    return evals, evecs


def apply_weight(
    evals: np.ndarray, evecs: np.ndarray, matrix: np.ndarray, weight: SpectralWeight
) -> np.ndarray:
    """Multiply eigenbasis matrix elements by w(E_m - E_n)."""
    in_basis = evecs.conj().T @ matrix @ evecs
    kernel = np.asarray(weight(evals[:, None] - evals[None, :]))
    return evecs @ (kernel * in_basis) @ evecs.conj().T


def f_s(
    m: DenseOperator,
    hr: RestrictedHamiltonian,
    weight: SpectralWeight,
    ed_cache: EdCache | None = None,
) -> DenseOperator:
    """The generator map F_s(M) under the restricted Hamiltonian ``hr``."""
    if m.window != hr.window:
        raise ValueError(f"operand window {m.window} differs from Hamiltonian window {hr.window}")
    evals, evecs = eigensystem(hr, ed_cache)
    return DenseOperator(m.window, apply_weight(evals, evecs, m.matrix, weight))


def _check_hermitian(matrix: np.ndarray, what: str) -> None:
    defect = float(np.abs(matrix - matrix.conj().T).max())
    if defect > HERMITICITY_TOL:
        raise AdiacontError(f"{what} lost Hermiticity (defect {defect:.3e})")


@dataclass
class QuasiLocalTerm:
    """Shell term k_{j,alpha}(s) on its grown alpha-window."""

    center: Site
    alpha: int
    s: float
    operator: DenseOperator

    def norm(self) -> float:
        return op_norm(self.operator)


@dataclass
class TruncatedGenerator:
    """K-tilde_{alpha,beta}(s): generator truncated to centres near an observable."""

    alpha: int
    beta: int
    s: float
    window: SiteSet
    operator: DenseOperator


@dataclass
class DecayCurve:
    """Measured norm-vs-abscissa curve with an optional fitted envelope."""

    label: str
    xs: np.ndarray
    values: np.ndarray
    fit: dict[str, float] = field(default_factory=dict)
    meta: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.xs) > 1 and not np.all(np.diff(self.xs) > 0):
            raise ValueError("DecayCurve abscissa must be strictly increasing")

    def envelope_at(self, x: np.ndarray) -> np.ndarray:
        if "exponent" not in self.fit:
            return np.full(np.shape(x), np.nan)
        xs = np.asarray(x, float)
        out = np.full(xs.shape, np.nan)
        pos = xs > 0
        out[pos] = self.fit["prefactor"] * xs[pos] ** self.fit["exponent"]
        return out


def fit_power_law(xs, values, floor: float = 1e-15) -> dict[str, float]:
    """Least-squares power-law fit on the log-log positive part of a curve."""
    xs = np.asarray(xs, float)
    values = np.asarray(values, float)
    mask = (xs > 0) & (values > floor)
    if mask.sum() < 2:
        return {}
    slope, intercept = np.polyfit(np.log(xs[mask]), np.log(values[mask]), 1)
    return {"exponent": float(slope), "prefactor": float(np.exp(intercept))}


def shell_term(
    ham: ParamHamiltonian,
    s: float,
    center: Site,
    alpha: int,
    spec: FilterSpec,
    ed_cache: EdCache | None = None,
) -> QuasiLocalTerm:
    """k_{center,alpha}(s): difference of f_s under nested restrictions.

    alpha = 0 is the single-region case with no subtraction.  Once the ball
    saturates the lattice the nested regions coincide and the term is
    exactly zero.
    """
    lat = ham.lattice
    center = lat.canon(center)
    outer_region = lat.ball(center, alpha)
    window = ham.region_window(outer_region)
    if len(window) > EIGEN_CAP:
        raise WindowCapError(
            f"shell window of {len(window)} sites exceeds the eigensolve cap of {EIGEN_CAP}"
        )
    hp = embed(ham.driving_term(center), window)
    outer = restrict(ham, s, outer_region, window)
    result = apply_weight(*eigensystem(outer, ed_cache), hp.matrix, SpectralWeight(spec))
    if alpha > 0:
        inner_region = lat.ball(center, alpha - 1)
        if inner_region == outer_region:
            result = np.zeros_like(result)
        else:
            inner = restrict(ham, s, inner_region, window)
            result = result - apply_weight(
                *eigensystem(inner, ed_cache), hp.matrix, SpectralWeight(spec)
            )
    _check_hermitian(result, f"shell term alpha={alpha}")
    return QuasiLocalTerm(center=center, alpha=alpha, s=s, operator=DenseOperator(window, result))


def shell_decay_curve(
    ham: ParamHamiltonian,
    s: float,
    center: Site,
    alpha_max: int,
    spec: FilterSpec,
) -> DecayCurve:
    """Points (alpha, ||k_alpha(s)||) for alpha = 0..alpha_max, with tail fit."""
    alphas = np.arange(alpha_max + 1)
    norms = np.array(
        [shell_term(ham, s, center, int(a), spec).norm() for a in alphas], dtype=float
    )
    fit = fit_power_law(alphas[1:], norms[1:])
    return DecayCurve(
        label="alpha",
        xs=alphas,
        values=norms,
        fit=fit,
        meta={"s": s, "gamma": spec.gamma, "n": ham.lattice.n_sites},
    )


def _translation_permutation(ham: ParamHamiltonian, shift: Site) -> np.ndarray:
    """Basis-index map of the shift unitary on the full-lattice window."""
    lat = ham.lattice
    window = lat.sites()
    nw = len(window)
    bit = {site: nw - 1 - k for k, site in enumerate(window)}
    dim = 1 << nw
    source = np.arange(dim)
    target = np.zeros(dim, dtype=np.int64)
    for site in window:
        moved = tuple((c + d) % lat.extent for c, d in zip(site, lat.canon(shift)))
        picked = (source >> bit[site]) & 1
        target |= picked << bit[moved]
    return target


def _single_center_term(
    ham: ParamHamiltonian,
    s: float,
    center: Site,
    beta: int,
    spec: FilterSpec,
    ed_cache: EdCache | None,
) -> DenseOperator:
    region = ham.lattice.ball(center, beta)
    local_window = ham.region_window(region)
    hr = restrict(ham, s, region, local_window)
    hp = embed(ham.driving_term(center), local_window)
    term = apply_weight(*eigensystem(hr, ed_cache), hp.matrix, SpectralWeight(spec))
    return DenseOperator(local_window, term)


def truncated_generator_matrix(
    ham: ParamHamiltonian,
    s: float,
    centers: SiteSet,
    beta: int,
    spec: FilterSpec,
    window: SiteSet | None = None,
    ed_cache: EdCache | None = None,
) -> DenseOperator:
    """Sum of F-tilde terms for the given centres, each on its own beta-ball."""
    lat = ham.lattice
    centers = siteset(lat.canon(c) for c in centers)
    if window is None:
        window = generator_window(ham, centers, beta)
    if len(window) > EIGEN_CAP:
        raise WindowCapError(
            f"generator window of {len(window)} sites exceeds the eigensolve cap of {EIGEN_CAP}"
        )
    total = np.zeros((1 << len(window),) * 2, dtype=complex)
    # For a translation-generated Hamiltonian on the full-lattice window the
    # per-centre terms are exact shift conjugates of one another, so a single
    # eigendecomposition per stage point serves every centre.
    translation_ok = not ham.overrides and window == lat.sites()
    base: DenseOperator | None = None
    for center in centers:  # ascending site order for reproducible sums
        if translation_ok:
            if base is None:
                base = embed_dense(
                    _single_center_term(ham, s, centers[0], beta, spec, ed_cache), window
                )
            if center == centers[0]:
                total += base.matrix
            else:
                # gather form of T_v K T_v^dag uses the inverse shift map
                back = tuple(
                    (c0 - c) % lat.extent for c, c0 in zip(center, centers[0])
                )
                perm = _translation_permutation(ham, back)
                total += base.matrix[np.ix_(perm, perm)]
        else:
            term = _single_center_term(ham, s, center, beta, spec, ed_cache)
            total += embed_dense(term, window).matrix
    _check_hermitian(total, "truncated generator")
    return DenseOperator(window, total)


def generator_window(ham: ParamHamiltonian, centers: SiteSet, beta: int) -> SiteSet:
    """Union over centres of the beta-ball windows."""
    lat = ham.lattice
    sites: set[Site] = set()
    for center in centers:
        sites.update(ham.region_window(lat.ball(center, beta)))
    return siteset(sites)


def assemble_truncated_generator(
    ham: ParamHamiltonian,
    s: float,
    alpha: int,
    beta: int,
    spec: FilterSpec,
    center: Site,
) -> TruncatedGenerator:
    """K-tilde for centres within ``alpha`` of ``center``."""
    centers = ham.lattice.ball(ham.lattice.canon(center), alpha)
    window = generator_window(ham, centers, beta)
    dense = truncated_generator_matrix(ham, s, centers, beta, spec, window)
    return TruncatedGenerator(alpha=alpha, beta=beta, s=s, window=window, operator=dense)


@dataclass
class SummabilityReport:
    """Weighted shell-norm sum entering the general Lieb-Robinson hypothesis."""

    value: float
    partial_sums: np.ndarray
    shell_norms: np.ndarray
    converged: bool
    power: int

    @property
    def final_increment(self) -> float:
        if len(self.partial_sums) < 2 or self.partial_sums[-1] == 0:
            return 0.0
        return float(
            (self.partial_sums[-1] - self.partial_sums[-2]) / self.partial_sums[-1]
        )


def summability_check(
    ham: ParamHamiltonian,
    s: float,
    spec: FilterSpec,
    power: int | None = None,
    alpha_max: int | None = None,
    center: Site | None = None,
) -> SummabilityReport:
    """Partial sums of sum_alpha ||k_alpha|| (1+2a(a+1))^2 (2+2a)^eta.

    ``power`` is the decay-estimate exponent bookkeeping field (must be at
    least 7 + eta); it does not enter the sum itself.
    """
    eta = ham.lattice.dimension
    if power is None:
        power = 7 + eta
    if power < 7 + eta:
        raise ValueError(f"summability power must be >= {7 + eta}, got {power}")
    if alpha_max is None:
        alpha_max = ham.lattice.extent - 1
    alpha_max = min(alpha_max, ham.lattice.extent - 1)
    if center is None:
        center = ham.lattice.origin()
    norms = np.array(
        [shell_term(ham, s, center, a, spec).norm() for a in range(alpha_max + 1)]
    )
    alphas = np.arange(alpha_max + 1, dtype=float)
    weights = (1.0 + 2.0 * alphas * (alphas + 1.0)) ** 2 * (2.0 + 2.0 * alphas) ** eta
    partial = np.cumsum(norms * weights)
    total = float(partial[-1])
    if total == 0.0:
        converged = True
    else:
        converged = (partial[-1] - partial[-2]) / partial[-1] < 0.01 if len(partial) > 1 else False
    return SummabilityReport(
        value=total,
        partial_sums=partial,
        shell_norms=norms,
        converged=converged,
        power=power,
    )
