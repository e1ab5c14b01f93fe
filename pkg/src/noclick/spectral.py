"""Eigendecomposition, steady states, imaginary gaps and no-click evolution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from .basis import FULL, SectorBasis, SectorLabel, enumerate_sector, sector_labels, sector_to_full
from .hamiltonian import DenseOperator, ModelSpec, build, build_sparse

log = logging.getLogger(__name__)

#: Relative tolerance under which two decay rates count as tied.
TIE_RTOL = 1e-10


class EigensolverError(RuntimeError):
    pass


@dataclass
class EigenDecomposition:
    """Eigenvalues ``E_j + i Gamma_j`` sorted by descending ``Gamma``.

    ``right[:, j]`` is the unit-norm right eigenvector; ``left[j]`` the dual
    row with ``left @ right = 1``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray | None = field(default=None, repr=False)
    left: np.ndarray | None = field(default=None, repr=False)
    basis: SectorBasis | None = field(default=None, repr=False)

    @property
    def gammas(self) -> np.ndarray:
        return self.eigenvalues.imag

    @property
    def sector(self):
        return None if self.basis is None else self.basis.label


@dataclass
class SteadyState:
    eigenvalue: complex
    vector: np.ndarray = field(repr=False)
    gap: float | None = None
    index: int = 0
    sector: SectorLabel | None = None


def canonical_order(eigenvalues: np.ndarray) -> np.ndarray:
    """Permutation sorting by descending Im, then descending Re, then index."""
    return np.lexsort((-eigenvalues.real, -eigenvalues.imag))


def diagonalize(op: DenseOperator | np.ndarray, want: str = "values", basis: SectorBasis | None = None) -> EigenDecomposition:
    """Full dense eigendecomposition.

    ``want`` is ``"values"``, ``"right"`` or ``"both"``.
    """
    if isinstance(op, DenseOperator):
        m, basis = op.matrix, op.basis
    else:
        m = np.asarray(op, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"need a nonempty square matrix, got shape {m.shape}")
    if want not in ("values", "right", "both"):
        raise ValueError(f"want must be 'values', 'right' or 'both', not {want!r}")
    try:
        if want == "values":
            w = scipy.linalg.eigvals(m, check_finite=True)
            vr = None
        else:
            w, vr = scipy.linalg.eig(m, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        where = f"sector {basis.label}, L={basis.L}" if basis is not None else f"matrix {m.shape}"
        raise EigensolverError(f"eigensolver failed for {where}: {exc}") from exc
    order = canonical_order(w)
    w = w[order]
    left = None
    if vr is not None:
        vr = vr[:, order]
        vr /= np.linalg.norm(vr, axis=0)
        if want == "both":
            left = scipy.linalg.inv(vr)
    return EigenDecomposition(w, vr, left, basis)


def spectral_gap(decomp, mode: str = "three_level") -> float:
    """Imaginary gap of the steady state.

    ``three_level``: ``G0 - (G1 + G2)/2``; ``two_level``: ``G0 - G1``.
    Accepts a decomposition or a bare eigenvalue array.
    """
    ev = decomp.eigenvalues if isinstance(decomp, EigenDecomposition) else np.asarray(decomp)
    g = np.sort(np.imag(ev))[::-1]
    need = {"three_level": 3, "two_level": 2}
    if mode not in need:
        raise ValueError(f"unknown gap mode {mode!r}")
    if g.size < need[mode]:
        raise ValueError(f"{mode} gap needs at least {need[mode]} eigenvalues, got {g.size}")
    if mode == "two_level":
        return float(g[0] - g[1])
    return float(g[0] - 0.5 * (g[1] + g[2]))


def _warn_ties(ev: np.ndarray) -> None:
    if ev.size > 1:
        scale = max(1.0, abs(ev[0].imag))
        if abs(ev[0].imag - ev[1].imag) <= TIE_RTOL * scale:
            log.warning("steady state is degenerate in Gamma (%.3g vs %.3g); tie broken by Re",
                        ev[0].imag, ev[1].imag)


def steady_state(decomp: EigenDecomposition, basis: SectorBasis | None = None, gap_mode: str | None = "three_level") -> SteadyState:
    """State with the largest decay rate, embedded in the full space."""
    if decomp.right is None:
        raise ValueError("steady state needs right eigenvectors (diagonalize with want='right')")
    basis = basis if basis is not None else decomp.basis
    _warn_ties(decomp.eigenvalues)
    v = decomp.right[:, 0]
    if basis is not None:
        v = sector_to_full(v, basis)
    v = v / np.linalg.norm(v)
    gap = None
    if gap_mode is not None and decomp.eigenvalues.size >= (3 if gap_mode == "three_level" else 2):
        gap = spectral_gap(decomp, gap_mode)
    return SteadyState(complex(decomp.eigenvalues[0]), v, gap, 0)


def top_eigenpair_sparse(matrix, k: int = 4, tol: float = 1e-12, seed: int = 0):
    """Largest-Gamma eigenpair of a sparse matrix by implicitly restarted Arnoldi.

    Used for sectors beyond the dense cap.  Returns ``(eigenvalue, unit vector)``.
    """
    n = matrix.shape[0]
    if n <= k + 2:
        dec = diagonalize(matrix.toarray(), want="right")
        return dec.eigenvalues[0], dec.right[:, 0]
    v0 = np.random.default_rng(seed).standard_normal(n).astype(np.complex128)
    ncv = min(n, max(2 * k + 1, 40))
    try:
        w, v = eigs(matrix, k=k, which="LI", v0=v0, ncv=ncv, tol=tol, maxiter=50 * n)
    except ArpackNoConvergence as exc:
        raise EigensolverError(f"Arnoldi did not converge for dimension {n}") from exc
    order = canonical_order(w)
    vec = v[:, order[0]]
    return w[order[0]], vec / np.linalg.norm(vec)


def evolve(decomp: EigenDecomposition, psi0, t: float) -> np.ndarray:
    """Normalized no-click evolution ``exp(-i H t) psi0 / ||...||``.

    ``psi0`` lives in the same space as the decomposition.
    """
    if decomp.right is None or decomp.left is None:
        raise ValueError("evolution needs both right and left eigenvectors")
    if t < 0:
        raise ValueError("t must be >= 0")
    psi0 = np.asarray(psi0, dtype=np.complex128)
    c = decomp.left @ psi0
    lam = decomp.eigenvalues
    # factor out the fastest growth so large t cannot overflow
    expo = -1j * lam * t - lam.imag.max() * t
    psi = decomp.right @ (np.exp(expo) * c)
    nrm = np.linalg.norm(psi)
    if not np.isfinite(nrm) or nrm == 0:
        raise ValueError("evolved state is not normalizable")
    return psi / nrm


#: Sectors above this dimension switch from dense eig to Arnoldi in
#: :func:`find_steady_state`.
ARNOLDI_MIN_DIM = 600


def steady_state_sectors(spec: ModelSpec) -> list[SectorLabel]:
    """Zero-momentum blocks searched for the steady state (full space if disordered)."""
    if spec.disorder is not None:
        return [FULL]
    return sector_labels(spec.L, z2=spec.has_z2, momenta=[0])


def gap_sectors(spec: ModelSpec) -> list[SectorLabel]:
    """Zero-momentum, even spin-inversion blocks holding the vacuum and its pair excitations."""
    if spec.disorder is not None:
        return [FULL]
    z2 = 1 if spec.has_z2 else None
    return [SectorLabel(0, z2, p) for p in (1, -1)]


def find_steady_state(spec: ModelSpec, sectors=None, arnoldi_min_dim: int | None = None) -> SteadyState:
    """Largest-Gamma eigenstate over ``sectors`` as a unit full-space vector.

    Blocks larger than ``arnoldi_min_dim`` use sparse Arnoldi for the top
    eigenpair only; smaller blocks are diagonalized densely.
    """
    sectors = steady_state_sectors(spec) if sectors is None else sectors
    cut = ARNOLDI_MIN_DIM if arnoldi_min_dim is None else arnoldi_min_dim
    best = None
    for lab in sectors:
        basis = enumerate_sector(spec.L, lab)
        if basis.dim == 0:
            continue
        if basis.dim > cut:
            lam, vec = top_eigenpair_sparse(build_sparse(spec, basis))
        else:
            dec = diagonalize(build(spec, basis), want="right")
            lam, vec = dec.eigenvalues[0], dec.right[:, 0]
        key = (lam.imag, lam.real)
        if best is None or key > best[0]:
            if best is not None and abs(lam.imag - best[0][0]) <= TIE_RTOL * max(1.0, abs(lam.imag)):
                log.warning("steady state tie between sectors %s and %s", best[2], lab)
            best = (key, lam, lab, basis, vec)
    if best is None:
        raise ValueError("no nonempty sector to search")
    _, lam, lab, basis, vec = best
    full = sector_to_full(vec, basis)
    full /= np.linalg.norm(full)
    return SteadyState(complex(lam), full, None, 0, lab)


def sector_eigenvalues(spec: ModelSpec, sectors) -> np.ndarray:
    """Union of the dense spectra of ``sectors``, canonically ordered."""
    parts = []
    for lab in sectors:
        basis = enumerate_sector(spec.L, lab)
        if basis.dim:
            parts.append(diagonalize(build(spec, basis), want="values").eigenvalues)
    if not parts:
        return np.zeros(0, dtype=np.complex128)
    ev = np.concatenate(parts)
    return ev[canonical_order(ev)]


def model_gap(spec: ModelSpec, mode: str = "three_level", sectors=None) -> float:
    """Imaginary gap of ``spec`` from the union spectrum of ``sectors``."""
    sectors = gap_sectors(spec) if sectors is None else sectors
    return spectral_gap(sector_eigenvalues(spec, sectors), mode)
