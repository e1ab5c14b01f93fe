"""Computational basis and symmetry sectors for periodic spin-1/2 chains.

Configurations are L-bit integers; bit ``i`` set means site ``i`` is up
(sigma^z = +1).  Sectors are labelled by a lattice momentum ``k`` (eigenvalue
``exp(2 pi i k / L)`` of the one-site translation), a spin-inversion parity and
a reflection parity ``i -> L-1-i``.  Each orbit is represented by its smallest
integer member.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels

MAX_SITES = 30


@dataclass(frozen=True)
class SectorLabel:
    """Quantum numbers of a symmetry block.

    ``momentum=None`` leaves translations unresolved (used for disordered
    chains, where only spin inversion can survive).  Parities are ``+1``,
    ``-1`` or ``None``.
    """

    momentum: int | None = 0
    z2_parity: int | None = None
    reflection_parity: int | None = None

    def __post_init__(self):
        for name in ("z2_parity", "reflection_parity"):
            value = getattr(self, name)
            if value not in (None, 1, -1):
                raise ValueError(f"{name} must be +1, -1 or None, got {value!r}")
        if self.reflection_parity is not None and self.momentum is None:
            raise ValueError("reflection parity requires a resolved momentum")

    @property
    def is_full(self) -> bool:
        return self.momentum is None and self.z2_parity is None and self.reflection_parity is None

    def as_dict(self) -> dict:
        return {"momentum": self.momentum, "z2_parity": self.z2_parity,
                "reflection_parity": self.reflection_parity}

    def __str__(self):
        if self.is_full:
            return "full"
        parts = []
        if self.momentum is not None:
            parts.append(f"k={self.momentum}")
        if self.z2_parity is not None:
            parts.append(f"z2={self.z2_parity:+d}")
        if self.reflection_parity is not None:
            parts.append(f"P={self.reflection_parity:+d}")
        return ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "SectorLabel":
        """Inverse of ``str``: ``"full"`` or e.g. ``"k=0,z2=+1,P=-1"``."""
        text = text.strip()
        if text in ("", "full"):
            return FULL
        kw = {"momentum": None}
        keys = {"k": "momentum", "z2": "z2_parity", "P": "reflection_parity"}
        for part in text.split(","):
            key, _, value = part.partition("=")
            key = key.strip()
            if key not in keys:
                raise ValueError(f"unknown sector key {key!r} in {text!r}")
            kw[keys[key]] = int(value)
        return cls(**kw)


FULL = SectorLabel(momentum=None)


@dataclass(frozen=True)
class SectorBasis:
    """Orbit representatives spanning one symmetry sector."""

    label: SectorLabel
    L: int
    representatives: np.ndarray
    norms: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return int(self.representatives.size)

    @property
    def group_order(self) -> int:
        lab = self.label
        order = self.L if lab.momentum is not None else 1
        if lab.z2_parity is not None:
            order *= 2
        if lab.reflection_parity is not None:
            order *= 2
        return order

    def kernel_args(self) -> tuple:
        lab = self.label
        return (
            lab.momentum if lab.momentum is not None else 0,
            lab.momentum is not None,
            lab.reflection_parity or 0,
            lab.z2_parity or 0,
        )

    def index(self, config: int) -> int:
        a = int(np.searchsorted(self.representatives, config))
        if a >= self.dim or self.representatives[a] != config:
            raise KeyError(f"{config} is not a representative of sector {self.label}")
        return a


def _check_L(L: int) -> None:
    if not isinstance(L, (int, np.integer)) or L < 2 or L > MAX_SITES:
        raise ValueError(f"L must be an integer in [2, {MAX_SITES}], got {L!r}")


@lru_cache(maxsize=64)
def enumerate_sector(L: int, label: SectorLabel = FULL) -> SectorBasis:
    """Enumerate the representatives of sector ``label`` for ``L`` sites.

    Representatives are returned in ascending order; states whose projection
    vanishes (stabilizer incompatible with the characters) are dropped.
    """
    _check_L(L)
    if label.momentum is not None and not 0 <= label.momentum < L:
        raise ValueError(f"momentum must lie in [0, {L}), got {label.momentum}")
    if label.reflection_parity is not None and (2 * label.momentum) % L != 0:
        raise ValueError(
            f"reflection commutes with translations only at k=0 or k=L/2, got k={label.momentum}"
        )
    if label.is_full:
        reps = np.arange(1 << L, dtype=np.int64)
        norms = np.ones(reps.size)
    else:
        k, translate, refl, z2 = (
            label.momentum if label.momentum is not None else 0,
            label.momentum is not None,
            label.reflection_parity or 0,
            label.z2_parity or 0,
        )
        reps, norms = kernels.enumerate_reps(L, k, translate, refl, z2)
    reps.setflags(write=False)
    norms.setflags(write=False)
    return SectorBasis(label, L, reps, norms)


def sector_labels(L: int, z2: bool = True, reflection: bool = True, momenta=None) -> list[SectorLabel]:
    """All labels whose sectors together span the full ``2**L`` space."""
    momenta = range(L) if momenta is None else momenta
    out = []
    for k in momenta:
        refls = (1, -1) if reflection and (2 * k) % L == 0 else (None,)
        for z in ((1, -1) if z2 else (None,)):
            for p in refls:
                out.append(SectorLabel(k, z, p))
    return out


# -- single-configuration Pauli algebra -------------------------------------------


def spin(config: int, i: int) -> int:
    """sigma^z eigenvalue of site ``i``."""
    return 1 if (config >> i) & 1 else -1


def apply_term(config: int, term, L: int) -> tuple[int, complex]:
    """Apply a Pauli string to a configuration.

    ``term`` is ``(coefficient, ((site, 'x'|'y'|'z'), ...))``.  Returns the image
    configuration and its amplitude.
    """
    coeff, ops = term
    amp = complex(coeff)
    out = int(config)
    for i, op in reversed(tuple(ops)):
        if not 0 <= i < L:
            raise IndexError(f"site {i} out of range for L={L}")
        s = spin(out, i)
        if op == "z":
            amp *= s
        elif op == "x":
            out ^= 1 << i
        elif op == "y":
            amp *= 1j * s
            out ^= 1 << i
        else:
            raise ValueError(f"unknown Pauli operator {op!r}")
    return out, amp


def zz(i: int, d: int, L: int, coeff=1.0):
    """``coeff * sigma^z_i sigma^z_{i+d}`` with periodic wrap."""
    return (coeff, ((i % L, "z"), ((i + d) % L, "z")))


def single(i: int, op: str, L: int, coeff=1.0):
    return (coeff, ((i % L, op),))


# -- sector <-> full space -------------------------------------------------------


def _orbit_images(basis: SectorBasis):
    """Yield ``(character, images)`` for each group element."""
    lab = basis.label
    L = basis.L
    reps = basis.representatives
    mask = np.int64((1 << L) - 1)
    k = lab.momentum or 0
    shifts = range(L) if lab.momentum is not None else range(1)
    bases = [(1, reps)]
    if lab.reflection_parity is not None:
        rev = np.zeros_like(reps)
        for i in range(L):
            rev |= ((reps >> i) & 1) << (L - 1 - i)
        bases.append((lab.reflection_parity, rev))
    for pchar, base in bases:
        flips = [(1, base)]
        if lab.z2_parity is not None:
            flips.append((lab.z2_parity, base ^ mask))
        for zchar, b in flips:
            for r in shifts:
                img = b if r == 0 else ((b << r) | (b >> (L - r))) & mask
                yield np.exp(2j * np.pi * k * r / L) * pchar * zchar, img


def sector_to_full(vector, basis: SectorBasis) -> np.ndarray:
    """Embed sector amplitudes into the ``2**L`` computational basis (isometry)."""
    vector = np.asarray(vector)
    if vector.shape[0] != basis.dim:
        raise ValueError(f"vector has length {vector.shape[0]}, sector dimension is {basis.dim}")
    if basis.label.is_full:
        return vector.astype(np.complex128, copy=True)
    out = np.zeros((1 << basis.L,) + vector.shape[1:], dtype=np.complex128)
    scale = 1.0 / (basis.group_order * basis.norms)
    if vector.ndim > 1:
        scale = scale[:, None]
    for chi, img in _orbit_images(basis):
        np.add.at(out, img, np.conj(chi) * scale * vector)
    return out


def full_to_sector(psi, basis: SectorBasis) -> np.ndarray:
    """Adjoint of :func:`sector_to_full` (projection onto the sector)."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape[0] != 1 << basis.L:
        raise ValueError("full-space vector has wrong length")
    if basis.label.is_full:
        return psi.copy()
    out = np.zeros(basis.dim, dtype=np.complex128)
    scale = 1.0 / (basis.group_order * basis.norms)
    for chi, img in _orbit_images(basis):
        out += chi * scale * psi[img]
    return out


def translation_matrix(L: int):
    """Sparse permutation matrix of the one-site translation ``i -> i+1``."""
    from scipy import sparse

    s = np.arange(1 << L, dtype=np.int64)
    mask = (1 << L) - 1
    img = ((s << 1) | (s >> (L - 1))) & mask
    return sparse.csr_matrix((np.ones(s.size), (img, s)), shape=(1 << L, 1 << L))
