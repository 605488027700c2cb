"""Parameter-dependent lattice Hamiltonians H(s) = H0 + s*H' and their spectra.

The Hamiltonian is generated by translating a single interaction term
h(s) = h0 + s*h' over the lattice; per-site overrides allow spatially varying
interactions.  Restrictions H_Lambda(s) sum the translated terms whose
centres lie in a region, realized densely on the region's grown window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateGroundStateError, GapAssumptionError, WindowCapError
from .lattice import Lattice, Site, SiteSet, siteset
from .operators import (
    DenseOperator,
    LocalOperator,
    embed,
    op_norm,
    operator_from_text,
    operator_to_text,
)

#: Below this gap the ground state is treated as degenerate.
DEGENERACY_THRESHOLD = 1e-8

#: Dense assembly cap (sites); eigensolves cap one lower, see quasiadiabatic.
ASSEMBLY_CAP = 14


@dataclass(frozen=True)
class Interaction:
    """One translated cell h(s) = h0 + s*hprime, centred on the origin."""

    h0: LocalOperator
    hprime: LocalOperator
    norm_h0: float = field(init=False)
    norm_hprime: float = field(init=False)

    def __post_init__(self):
        support = siteset(set(self.h0.support) | set(self.hprime.support))
        if not support:
            raise ConfigError("interaction must act on at least one site")
        origin = (0,) * len(support[0])
        if origin not in support:
            raise ConfigError("interaction must be centred: origin not in its support")
        if not (self.h0.is_hermitian and self.hprime.is_hermitian):
            raise ConfigError("interaction terms must be Hermitian")
        object.__setattr__(self, "norm_h0", _local_norm(self.h0))
        object.__setattr__(self, "norm_hprime", _local_norm(self.hprime))

    @property
    def support(self) -> SiteSet:
        return siteset(set(self.h0.support) | set(self.hprime.support))


def _local_norm(op: LocalOperator) -> float:
    support = op.support
    if not support:
        # pure identity component
        return float(abs(sum(op.terms.values()))) if op.terms else 0.0
    return op_norm(embed(op, support))


@dataclass(frozen=True)
class ParamHamiltonian:
    """H(s) over a lattice, translation-generated unless overrides are given."""

    lattice: Lattice
    interaction: Interaction
    overrides: tuple[tuple[Site, Interaction], ...] = ()

    def cell(self, site: Site) -> Interaction:
        for where, inter in self.overrides:
            if self.lattice.canon(where) == self.lattice.canon(site):
                return inter
        return self.interaction

    def term(self, site: Site, s: float) -> LocalOperator:
        """h_j(s): the interaction translated so its centre sits at ``site``."""
        cell = self.cell(site)
        shifted_h0 = cell.h0.translate(self.lattice, site)
        shifted_hp = cell.hprime.translate(self.lattice, site)
        return shifted_h0 + shifted_hp.scale(s)

    def driving_term(self, site: Site) -> LocalOperator:
        return self.cell(site).hprime.translate(self.lattice, site)

    @property
    def cell_support(self) -> SiteSet:
        """Union of interaction supports across cells (as origin-centred sets)."""
        sets = {self.interaction.support}
        for _, inter in self.overrides:
            sets.add(inter.support)
        return siteset(s for group in sets for s in group)

    def region_window(self, region: SiteSet) -> SiteSet:
        """Window carrying all terms centred in ``region``."""
        return self.lattice.sumset(region, self.cell_support)


@dataclass
class RestrictedHamiltonian:
    """H_Lambda(s) = sum of terms centred in ``region``, realized on ``window``."""

    region: SiteSet
    s: float
    window: SiteSet
    dense: DenseOperator


def assemble(ham: ParamHamiltonian, s: float, region: SiteSet, window: SiteSet | None = None) -> DenseOperator:
    """Dense H_region(s) on ``window`` (default: the grown region window)."""
    region = siteset(region)
    if window is None:
        window = ham.region_window(region)
    else:
        window = siteset(window)
    if len(window) > ASSEMBLY_CAP:
        raise WindowCapError(
            f"assembly window of {len(window)} sites exceeds the cap of {ASSEMBLY_CAP}"
        )
    total = LocalOperator.zero()
    for site in region:
        total = total + ham.term(site, s)
    return embed(total, window)


def restrict(ham: ParamHamiltonian, s: float, region: SiteSet, window: SiteSet | None = None) -> RestrictedHamiltonian:
    region = siteset(region)
    if window is None:
        window = ham.region_window(region)
    dense = assemble(ham, s, region, window)
    return RestrictedHamiltonian(region=region, s=s, window=siteset(window), dense=dense)


@dataclass
class SpectrumReport:
    """Eigensystem summary: ascending eigenvalues, gap, optional ground vector."""

    s: float | None
    eigenvalues: np.ndarray
    ground_energy: float
    gap: float
    ground_vector: np.ndarray | None = None

    @property
    def near_degenerate(self) -> bool:
        return self.gap < DEGENERACY_THRESHOLD


def ground_state(
    dense: DenseOperator,
    s: float | None = None,
    want_vector: bool = True,
    check_unique: bool = True,
) -> SpectrumReport:
    """Full eigendecomposition with ground-state uniqueness enforcement."""
    mat = dense.matrix
    herm_defect = float(np.abs(mat - mat.conj().T).max())
    if herm_defect > 1e-10:
        raise ConfigError(f"ground_state needs a Hermitian matrix (defect {herm_defect:.2e})")
    evals, evecs = np.linalg.eigh(mat)
    gap = float(evals[1] - evals[0]) if len(evals) > 1 else np.inf
    report = SpectrumReport(
        s=s,
        eigenvalues=evals,
        ground_energy=float(evals[0]),
        gap=gap,
        ground_vector=evecs[:, 0].copy() if want_vector else None,
    )
    if check_unique and report.near_degenerate:
        raise DegenerateGroundStateError(
            f"ground state degenerate within {DEGENERACY_THRESHOLD:g} (gap {gap:.3e})"
        )
    return report


def gap_scan(
    ham: ParamHamiltonian,
    s_grid,
    gap_bound: float | None = None,
) -> tuple[float, list[SpectrumReport]]:
    """Gap curve over ``s_grid`` on the full lattice; errors if below the bound."""
    region = ham.lattice.sites()
    if ham.lattice.n_sites > 12:
        raise WindowCapError("gap certification is oracle-scale only (n <= 12)")
    curve = []
    for s in s_grid:
        dense = assemble(ham, float(s), region, window=region)
        curve.append(ground_state(dense, s=float(s), want_vector=False))
    min_gap = min(r.gap for r in curve)
    if gap_bound is not None and min_gap < gap_bound:
        raise GapAssumptionError(
            f"minimum gap {min_gap:.6f} over the path is below the configured "
            f"bound {gap_bound:g}; the method's validity assumption fails"
        )
    return min_gap, curve


def perturbed_classical_model(dimension: int, extent: int, coupling: float) -> ParamHamiltonian:
    """Default benchmark: h0 = -sigma^z at the origin, h' = coupling * sigma^x sigma^x.

    H(0) is a regular classical Hamiltonian with the all-up product ground
    state; the coupling acts along the +x axis.  On extent-1 lattices the
    two x factors land on the same site and multiply out to the identity.
    """
    lat = Lattice(dimension, extent)
    origin = lat.origin()
    step = lat.canon(tuple(1 if i == 0 else 0 for i in range(dimension)))
    h0 = LocalOperator.pauli(origin, 3, -1.0)
    hprime = LocalOperator.pauli(origin, 1, coupling) * LocalOperator.pauli(step, 1, 1.0)
    return ParamHamiltonian(lattice=lat, interaction=Interaction(h0=h0, hprime=hprime))


def model_to_text(ham: ParamHamiltonian, coupling: float | None = None) -> str:
    """Model file: header lines then the two interaction terms."""
    lines = [
        f"dim={ham.lattice.dimension}",
        f"m={ham.lattice.extent}",
        f"lambda={coupling if coupling is not None else 'custom'}",
        "[h0]",
        operator_to_text(ham.interaction.h0),
        "[hprime]",
        operator_to_text(ham.interaction.hprime),
    ]
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> ParamHamiltonian:
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1]
            sections[current] = []
        elif current is None:
            if "=" not in stripped:
                raise ConfigError(f"bad model header line: {stripped!r}")
            key, _, value = stripped.partition("=")
            header[key.strip()] = value.strip()
        else:
            sections[current].append(stripped)
    for key in ("dim", "m"):
        if key not in header:
            raise ConfigError(f"model file missing header {key}=")
    for sec in ("h0", "hprime"):
        if sec not in sections:
            raise ConfigError(f"model file missing [{sec}] section")
    lat = Lattice(int(header["dim"]), int(header["m"]))
    h0 = operator_from_text("\n".join(sections["h0"]))
    hprime = operator_from_text("\n".join(sections["hprime"]))
    return ParamHamiltonian(lattice=lat, interaction=Interaction(h0=h0, hprime=hprime))
