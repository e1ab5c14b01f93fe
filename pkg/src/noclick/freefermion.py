"""Quasiparticle spectrum of the integrable transverse-measured chain.

Jordan-Wigner plus Bogoliubov on ``-sum Z Z - (h + i gamma/4) sum X`` gives
single-mode energies ``Lambda_k = 2 sqrt(1 + w^2 - 2 w cos k)`` with the complex
field ``w = h + i gamma/4``.  The branch with ``Im Lambda_k >= 0`` is used.

Writing ``a = gamma/4``, the radicand is
``(1 + h^2 - a^2 - 2 h cos k) + 2 i a (h - cos k)``; it is real and
nonnegative only at ``cos k = h`` with ``a^2 <= 1 - h^2``, which is where the
imaginary gap closes: ``gamma_c(h) = 4 sqrt(1 - h^2)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_K_POINTS = 20001


@dataclass
class QuasiparticleSpectrum:
    momenta: np.ndarray
    values: np.ndarray = field(repr=False)
    h: float = 0.0
    gamma: float = 0.0
    branch: str = "principal sqrt, Im >= 0"


def dispersion(h, gamma, k):
    """Single-quasiparticle eigenvalue ``Lambda_k`` (vectorized over ``k``)."""
    w = h + 1j * gamma / 4
    k = np.asarray(k, dtype=np.float64)
    lam = 2.0 * np.sqrt(1.0 + w * w - 2.0 * w * np.cos(k) + 0j)
    # principal sqrt already has Re >= 0; flip to the Im >= 0 branch
    lam = np.where(lam.imag < 0, -lam, lam)
    return lam if lam.ndim else complex(lam)


def spectrum(h, gamma, L: int | None = None, n_points: int = DEFAULT_K_POINTS) -> QuasiparticleSpectrum:
    """Dispersion on the allowed momenta of an L-site ring (or a dense grid)."""
    if L is not None:
        k = 2 * np.pi * np.arange(L) / L
        k = np.where(k > np.pi, k - 2 * np.pi, k)
    else:
        k = np.linspace(-np.pi, np.pi, n_points)
    vals = dispersion(h, gamma, k)
    if L is None:
        _check_continuity(k, vals)
    return QuasiparticleSpectrum(k, vals, h, gamma)


def _check_continuity(k, vals) -> bool:
    """Flag jumps between neighbouring grid points.

    Where ``Lambda_k`` touches the real axis the Im >= 0 branch legitimately
    flips the sign of Re; only jumps away from such points are errors.
    """
    jumps = np.abs(np.diff(vals))
    typical = np.median(jumps) + 1e-12
    step = k[1] - k[0]
    near_axis = np.minimum(np.abs(vals.imag[:-1]), np.abs(vals.imag[1:])) < 8 * step
    bad = (jumps > 50 * typical + 40 * step) & ~near_axis
    if np.any(bad):
        log.error("dispersion branch discontinuity near k=%s", k[:-1][bad][:3])
        return False
    return True


def critical_rate(h: float) -> float:
    """Measurement rate where the imaginary gap opens, ``4 sqrt(1 - h^2)``.

    Returns 0 for ``h >= 1`` (no gapless phase).
    """
    if h < 0:
        raise ValueError("h must be >= 0")
    if h >= 1:
        return 0.0
    return 4.0 * np.sqrt(1.0 - h * h)


def has_gapless_phase(h: float) -> bool:
    return 0 <= h < 1


def asymptotic_imag_gap(h: float, gamma: float, n_points: int = DEFAULT_K_POINTS) -> float:
    """Thermodynamic-limit gap in ``Gamma`` for flipping a ``(k, -k)`` pair.

    ``2 min_k Im Lambda_k``; zero on and inside the critical boundary.
    """
    if h < 0 or gamma < 0:
        raise ValueError("need h >= 0 and gamma >= 0")
    if h >= 1:
        raise ValueError("asymptotic gap oracle defined for 0 <= h < 1")
    if gamma <= critical_rate(h):
        return 0.0
    k = np.linspace(0.0, np.pi, n_points)
    # the minimum sits at cos k = h; include it exactly
    k = np.append(k, np.arccos(h))
    return float(2.0 * np.min(dispersion(h, gamma, k).imag))
