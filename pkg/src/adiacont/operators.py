"""Pauli-string operator algebra with support tracking, plus dense realization.

A ``LocalOperator`` is a finite sum of Pauli strings (site -> axis maps with a
complex coefficient); ``DenseOperator`` realizes one on an explicit site
window as a 2^|W| complex matrix in the global row-major site order, the
first site in that order being the most significant qubit.

Dense windows are capped at ``WINDOW_CAP`` sites: everything at desk scale
fits, and beyond that dense eigensolvers stop being the right tool.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WindowCapError
from .lattice import Lattice, Site, SiteSet, siteset

AXIS_NAMES = "IXYZ"
PAULI_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)

# sigma^a sigma^b = phase * sigma^c, tabulated as (a, b) -> (phase, c)
_PAULI_MUL = {}
for _a in range(4):
    _PAULI_MUL[(0, _a)] = (1.0, _a)
    _PAULI_MUL[(_a, 0)] = (1.0, _a)
    _PAULI_MUL[(_a, _a)] = (1.0, 0)
for _a, _b, _c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
    _PAULI_MUL[(_a, _b)] = (1.0j, _c)
    _PAULI_MUL[(_b, _a)] = (-1.0j, _c)

#: Hard cap on dense window size; dim 2^14 = 16384 is already impractical.
WINDOW_CAP = 14

#: Coefficients below this are dropped when recomputing supports, so that
#: floating-point residue cannot grow phantom support.
COEFF_TOLERANCE = 1e-14

# A Pauli string key is a tuple of (site, axis) pairs sorted by site, with
# identity axes omitted.
StringKey = tuple[tuple[Site, int], ...]


def _string_mul(a: StringKey, b: StringKey) -> tuple[complex, StringKey]:
    """Product of two Pauli strings: overall phase and resulting key."""
    axes = dict(a)
    phase = 1.0 + 0.0j
    for site, ax in b:
        if site in axes:
            p, c = _PAULI_MUL[(axes[site], ax)]
            phase *= p
            if c == 0:
                del axes[site]
            else:
                axes[site] = c
        else:
            axes[site] = ax
    return phase, tuple(sorted(axes.items()))


class LocalOperator:
    """Finite sum of Pauli strings with cached support."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[StringKey, complex] | None = None):
        clean: dict[StringKey, complex] = {}
        for key, coeff in (terms or {}).items():
            if abs(coeff) > COEFF_TOLERANCE:
                clean[key] = complex(coeff)
        self.terms = clean

    @classmethod
    def zero(cls) -> "LocalOperator":
        return cls({})

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "LocalOperator":
        return cls({(): coeff})

    @classmethod
    def pauli(cls, site: Site, axis: int, coeff: complex = 1.0) -> "LocalOperator":
        if axis == 0:
            return cls.identity(coeff)
        return cls({((tuple(site), axis),): coeff})

    @property
    def support(self) -> SiteSet:
        return siteset(site for key in self.terms for site, _ in key)

    @property
    def is_hermitian(self) -> bool:
        """Pauli strings are Hermitian, so Hermiticity = real coefficients."""
        return all(abs(c.imag) <= COEFF_TOLERANCE for c in self.terms.values())

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            out[key] = out.get(key, 0.0) + coeff
        return LocalOperator(out)

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "LocalOperator":
        return LocalOperator({k: factor * c for k, c in self.terms.items()})

    def __mul__(self, other: "LocalOperator") -> "LocalOperator":
        """Operator product, composing Pauli strings site by site."""
        out: dict[StringKey, complex] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                phase, key = _string_mul(ka, kb)
                out[key] = out.get(key, 0.0) + ca * cb * phase
        return LocalOperator(out)

    def translate(self, lat: Lattice, shift: Site) -> "LocalOperator":
        """Relabel every string's sites by ``+shift`` mod extent."""
        shift = lat.canon(shift)
        out: dict[StringKey, complex] = {}
        for key, coeff in self.terms.items():
            new = tuple(
                sorted(
                    (tuple((c + d) % lat.extent for c, d in zip(lat.canon(s), shift)), ax)
                    for s, ax in key
                )
            )
            out[new] = out.get(new, 0.0) + coeff
        return LocalOperator(out)

    def __repr__(self) -> str:
        if not self.terms:
            return "LocalOperator(0)"
        bits = []
        for key, coeff in sorted(self.terms.items()):
            ops = " ".join(f"{s}:{AXIS_NAMES[a]}" for s, a in key) or "1"
            bits.append(f"({coeff:g})*{ops}")
        return "LocalOperator(" + " + ".join(bits) + ")"


def _site_label(site: Site) -> str:
    return ",".join(str(c) for c in site)


def _parse_site(label: str) -> Site:
    return tuple(int(c) for c in label.split(","))


def operator_to_text(op: LocalOperator) -> str:
    """One string per line: ``coeff_re coeff_im site:axis site:axis ...``."""
    lines = []
    for key, coeff in sorted(op.terms.items()):
        parts = [f"{coeff.real!r}", f"{coeff.imag!r}"]
        parts.extend(f"{_site_label(s)}:{AXIS_NAMES[a]}" for s, a in key)
        lines.append(" ".join(parts))
    return "\n".join(lines)


def operator_from_text(text: str) -> LocalOperator:
    """Inverse of :func:`operator_to_text`; blank lines and ``#`` comments ok."""
    terms: dict[StringKey, complex] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"bad operator line: {line!r}")
        coeff = complex(float(parts[0]), float(parts[1]))
        key = []
        for tok in parts[2:]:
            label, _, axis = tok.rpartition(":")
            if axis not in "XYZ":
                raise ValueError(f"bad site:axis token {tok!r} in line {line!r}")
            key.append((_parse_site(label), AXIS_NAMES.index(axis)))
        k = tuple(sorted(key))
        terms[k] = terms.get(k, 0.0) + coeff
    return LocalOperator(terms)


@dataclass
class DenseOperator:
    """Complex matrix on an explicit site window (global site order)."""

    window: SiteSet
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.window = siteset(self.window)
        dim = 1 << len(self.window)
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match window of "
                f"{len(self.window)} sites (dim {dim})"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_window(window: SiteSet, cap: int = WINDOW_CAP) -> SiteSet:
    window = siteset(window)
    if len(window) > cap:
        raise WindowCapError(
            f"window of {len(window)} sites exceeds the dense cap of {cap}"
        )
    return window


def identity_on(window: SiteSet) -> DenseOperator:
    window = _check_window(window)
    return DenseOperator(window, np.eye(1 << len(window), dtype=complex))


def embed(op: LocalOperator, window: SiteSet) -> DenseOperator:
    """Dense matrix of ``op`` on ``window``, identity on the unused legs."""
    window = _check_window(window)
    missing = set(op.support) - set(window)
    if missing:
        raise ValueError(f"operator support {sorted(missing)} not contained in window")
    nw = len(window)
    dim = 1 << nw
    # leg k (leftmost site in the order) is bit nw-1-k
    bit = {site: nw - 1 - k for k, site in enumerate(window)}
    cols = np.arange(dim)
    mat = np.zeros((dim, dim), dtype=complex)
    for key, coeff in sorted(op.terms.items()):
        xy_mask = 0
        zy_mask = 0
        n_y = 0
        for site, axis in key:
            b = 1 << bit[site]
            if axis in (1, 2):
                xy_mask |= b
            if axis in (2, 3):
                zy_mask |= b
            if axis == 2:
                n_y += 1
        signs = 1 - 2 * (np.bitwise_count(cols & zy_mask).astype(np.int64) & 1)
        # sigma^y column action: |b> -> i(-1)^b |1-b>
        mat[cols ^ xy_mask, cols] += coeff * (1.0j**n_y) * signs
    return DenseOperator(window, mat)


def embed_dense(dense: DenseOperator, window: SiteSet) -> DenseOperator:
    """Re-embed a dense operator into a superset window."""
    window = _check_window(window)
    if dense.window == window:
        return dense
    missing = set(dense.window) - set(window)
    if missing:
        raise ValueError(f"window does not contain sites {sorted(missing)}")
    extra = tuple(s for s in window if s not in set(dense.window))
    big = np.kron(dense.matrix, np.eye(1 << len(extra), dtype=complex))
    # kron leg order is (dense.window..., extra...); permute to sorted target
    source = list(dense.window) + list(extra)
    perm = [source.index(site) for site in window]
    nw = len(window)
    tensor = big.reshape([2] * (2 * nw))
    tensor = tensor.transpose(perm + [nw + p for p in perm])
    return DenseOperator(window, np.ascontiguousarray(tensor.reshape(big.shape)))


def _aligned(a: DenseOperator, b: DenseOperator, auto_embed: bool):
    if a.window == b.window:
        return a, b
    if not auto_embed:
        raise ValueError(f"window mismatch: {a.window} vs {b.window}")
    union = siteset(set(a.window) | set(b.window))
    return embed_dense(a, union), embed_dense(b, union)


def multiply(a: DenseOperator, b: DenseOperator, auto_embed: bool = True) -> DenseOperator:
    a, b = _aligned(a, b, auto_embed)
    return DenseOperator(a.window, a.matrix @ b.matrix)


def commutator(a: DenseOperator, b: DenseOperator, auto_embed: bool = True) -> DenseOperator:
    a, b = _aligned(a, b, auto_embed)
    return DenseOperator(a.window, a.matrix @ b.matrix - b.matrix @ a.matrix)


def dagger(a: DenseOperator) -> DenseOperator:
    return DenseOperator(a.window, a.matrix.conj().T.copy())


def op_norm(d: DenseOperator | np.ndarray) -> float:
    """Operator (largest-singular-value) norm via eigenvalues of A^dag A.

    One uniform path for Hermitian and non-Hermitian inputs.
    """
    m = d.matrix if isinstance(d, DenseOperator) else np.asarray(d)
    if m.size == 0:
        return 0.0
    gram = m.conj().T @ m
    ev = np.linalg.eigvalsh(gram)
    return float(np.sqrt(max(ev[-1], 0.0)))


def dense_support(d: DenseOperator, tol: float = 1e-12) -> SiteSet:
    """Sites on which the matrix acts nontrivially (identity legs removed)."""
    nw = len(d.window)
    active = []
    for k, site in enumerate(d.window):
        t = d.matrix.reshape([2] * (2 * nw))
        # move this site's row and column legs to the front
        order = [k] + [i for i in range(nw) if i != k]
        t = t.transpose(order + [nw + o for o in order])
        t = t.reshape(2, 1 << (nw - 1), 2, 1 << (nw - 1))
        is_identity_leg = (
            np.abs(t[0, :, 1, :]).max(initial=0.0) <= tol
            and np.abs(t[1, :, 0, :]).max(initial=0.0) <= tol
            and np.abs(t[0, :, 0, :] - t[1, :, 1, :]).max(initial=0.0) <= tol
        )
        if not is_identity_leg:
            active.append(site)
    return siteset(active)
