"""Reduced density matrices and von Neumann entropy of chain states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Eigenvalues of rho_A below this contribute nothing to the entropy.
EIG_CUTOFF = 1e-12
HERMITIAN_TOL = 1e-10


@dataclass
class ReducedDensityMatrix:
    subsystem_size: int
    entries: np.ndarray = field(repr=False)
    sites: tuple = ()


def reduce(psi, L: int, L_A: int, offset: int = 0) -> ReducedDensityMatrix:
    """``rho_A = Tr_B |psi><psi|`` for the block of ``L_A`` sites starting at ``offset``.

    The block wraps around the ring.  Bit ``m`` of a row index of ``rho_A`` is
    site ``offset + m``.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (1 << L,):
        raise ValueError(f"state has shape {psi.shape}, expected ({1 << L},)")
    if not 1 <= L_A < L:
        raise ValueError(f"need 1 <= L_A < L, got L_A={L_A}, L={L}")
    if not 0 <= offset < L:
        raise ValueError(f"offset must be in [0, {L}), got {offset}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized (norm {nrm:.12g})")
    sites = tuple((offset + m) % L for m in range(L_A))
    rest = tuple(s for s in range(L - 1, -1, -1) if s not in sites)
    # tensor axis j holds site L-1-j
    axes = [L - 1 - s for s in reversed(sites)] + [L - 1 - s for s in rest]
    m = psi.reshape((2,) * L).transpose(axes).reshape(1 << L_A, -1)
    rho = m @ m.conj().T
    return ReducedDensityMatrix(L_A, rho, sites)


def entropy(rho: ReducedDensityMatrix | np.ndarray) -> float:
    """Von Neumann entropy in nats."""
    m = rho.entries if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho)
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > HERMITIAN_TOL:
        raise ValueError(f"density matrix has trace {tr:.12g}")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    lam = lam[lam > EIG_CUTOFF]
    s = float(-np.sum(lam * np.log(lam)))
    return max(s, 0.0)


def default_subsystem(L: int) -> int:
    return max(1, L // 4)


def steady_state_entropy(spec, L_A: int | None = None, offset: int = 0, **solver) -> float:
    """Entropy of the ``L_A``-site block in the steady state of a clean model.

    ``L_A`` defaults to ``floor(L/4)``; extra keywords go to
    :func:`noclick.spectral.find_steady_state`.
    """
    from .spectral import find_steady_state

    if spec.disorder is not None:
        raise ValueError("steady-state entropy is defined for clean models only")
    L_A = default_subsystem(spec.L) if L_A is None else L_A
    ss = find_steady_state(spec, **solver)
    return entropy(reduce(ss.vector, spec.L, L_A, offset))
