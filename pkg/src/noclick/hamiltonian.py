"""Effective non-Hermitian Hamiltonians of monitored Ising chains.

Four models, all with periodic boundaries and ``J = 1`` by default:

``transverse_measured``
    ``-J sum Z_i Z_{i+1} - (h + i gamma/4) sum X_i``
``nnn_transverse_measured``
    adds ``-J2 sum Z_i Z_{i+2}``
``longfield_transverse_measured``
    adds ``-g sum Z_i``
``longitudinal_measured``
    ``-J sum Z_i Z_{i+1} - (i gamma/4) sum Z_i - h sum X_i``

Optional disorder replaces ``h`` by ``h_i = h (1 + delta u_i)`` with ``u_i``
uniform on ``[-1, 1]``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import sparse

from . import kernels
from .basis import FULL, SectorBasis, SectorLabel, enumerate_sector

MODELS = (
    "transverse_measured",
    "nnn_transverse_measured",
    "longfield_transverse_measured",
    "longitudinal_measured",
)

#: Largest matrix dimension :func:`build` will materialize densely.
DENSE_DIM_CAP = 8192


@dataclass(frozen=True)
class Disorder:
    amplitude: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("disorder amplitude must be >= 0")


@dataclass(frozen=True)
class ModelSpec:
    model: str
    L: int
    h: float = 0.0
    gamma: float = 0.0
    J: float = 1.0
    J2: float = 0.0
    g: float = 0.0
    disorder: Disorder | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if not isinstance(self.L, (int, np.integer)) or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.model != "nnn_transverse_measured" and self.J2 != 0:
            raise ValueError(f"J2 must be 0 for model {self.model}")
        if self.model != "longfield_transverse_measured" and self.g != 0:
            raise ValueError(f"g must be 0 for model {self.model}")
        if isinstance(self.disorder, dict):
            object.__setattr__(self, "disorder", Disorder(**self.disorder))

    @property
    def has_z2(self) -> bool:
        return self.model != "longitudinal_measured" and self.g == 0

    @property
    def clean(self) -> bool:
        return self.disorder is None

    def site_fields(self) -> np.ndarray:
        if self.disorder is None:
            return np.full(self.L, float(self.h))
        rng = np.random.default_rng(self.disorder.seed)
        u = rng.uniform(-1.0, 1.0, self.L)
        return self.h * (1.0 + self.disorder.amplitude * u)

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        d = dict(d)
        dis = d.pop("disorder", None)
        if dis:
            d["disorder"] = Disorder(**dis)
        return cls(**d)


@dataclass
class DenseOperator:
    """Dense matrix of a model restricted to one sector (or the full space)."""

    matrix: np.ndarray = field(repr=False)
    basis: SectorBasis = field(repr=False)
    spec: ModelSpec | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def sector(self) -> SectorLabel:
        return self.basis.label


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64)
    out = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        out += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return out


def _rotate(x: np.ndarray, r: int, L: int) -> np.ndarray:
    r %= L
    if r == 0:
        return x
    mask = np.int64((1 << L) - 1)
    return ((x << r) | (x >> (L - r))) & mask


def zz_sum(configs: np.ndarray, L: int, d: int) -> np.ndarray:
    """``sum_i s_i s_{i+d}`` over the periodic chain."""
    return L - 2 * _popcount(configs ^ _rotate(configs, d, L))


def z_sum(configs: np.ndarray, L: int) -> np.ndarray:
    return 2 * _popcount(configs) - L


def _coefficients(spec: ModelSpec):
    """(diagonal energies per config -> callable, flip coefficient per site)."""
    L = spec.L
    hs = spec.site_fields()
    if spec.model == "longitudinal_measured":
        z_coef = 1j * spec.gamma / 4
        cx = -hs.astype(np.complex128)
    else:
        z_coef = spec.g
        cx = -(hs + 1j * spec.gamma / 4)

    def diag(configs):
        out = -spec.J * zz_sum(configs, L, 1).astype(np.complex128)
        if spec.J2 != 0:
            out -= spec.J2 * zz_sum(configs, L, 2)
        if z_coef != 0:
            out -= z_coef * z_sum(configs, L)
        return out

    return diag, cx


def _check_basis(spec: ModelSpec, basis: SectorBasis | None) -> SectorBasis:
    if basis is None:
        basis = enumerate_sector(spec.L, FULL)
    if basis.L != spec.L:
        raise ValueError(f"basis is for L={basis.L}, model has L={spec.L}")
    lab = basis.label
    if not lab.is_full:
        if spec.disorder is not None and (lab.momentum is not None or lab.reflection_parity is not None):
            raise ValueError("disordered models break translation/reflection; use the full space")
        if lab.z2_parity is not None and not spec.has_z2:
            raise ValueError(f"model {spec.model} with g={spec.g} has no spin-inversion symmetry")
    return basis


def coo_triplets(spec: ModelSpec, basis: SectorBasis | None = None):
    """Matrix elements ``(rows, cols, vals)`` of the model in ``basis``."""
    basis = _check_basis(spec, basis)
    diag, cx = _coefficients(spec)
    reps = basis.representatives
    d = diag(reps)
    if basis.label.is_full:
        sites = np.arange(spec.L, dtype=np.int64)
        rows = (reps[:, None] ^ (np.int64(1) << sites)[None, :]).ravel()
        cols = np.repeat(np.arange(basis.dim, dtype=np.int64), spec.L)
        vals = np.tile(cx, basis.dim)
    else:
        rows, cols, vals = kernels.offdiag_flips(spec.L, reps, basis.norms, *basis.kernel_args(), cx)
    idx = np.arange(basis.dim, dtype=np.int64)
    return (np.concatenate([idx, rows]), np.concatenate([idx, cols]), np.concatenate([d, vals]))


def build(spec: ModelSpec, basis: SectorBasis | None = None, max_dim: int | None = None) -> DenseOperator:
    """Dense complex matrix of ``spec`` restricted to ``basis`` (full space if None)."""
    basis = _check_basis(spec, basis)
    cap = DENSE_DIM_CAP if max_dim is None else max_dim
    if basis.dim > cap:
        raise MemoryError(f"sector dimension {basis.dim} exceeds dense cap {cap}")
    rows, cols, vals = coo_triplets(spec, basis)
    m = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    np.add.at(m, (rows, cols), vals)
    return DenseOperator(m, basis, spec)


def build_sparse(spec: ModelSpec, basis: SectorBasis | None = None) -> sparse.csr_matrix:
    basis = _check_basis(spec, basis)
    rows, cols, vals = coo_triplets(spec, basis)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


def ground_truth_diagonal(spec: ModelSpec) -> np.ndarray:
    """Exact eigenvalues of the classical (``h = 0``) longitudinal-measured chain.

    Entry ``c`` is the eigenvalue of configuration ``c``:
    ``E = -J sum s_i s_{i+1}`` and decay rate ``Gamma = -(gamma/4) sum s_i``,
    so the all-down state has the largest ``Gamma = L gamma / 4``.
    """
    if spec.model != "longitudinal_measured":
        raise ValueError("ground truth only available for the longitudinal_measured model")
    if spec.h != 0:
        raise ValueError("ground truth requires h = 0")
    configs = np.arange(1 << spec.L, dtype=np.int64)
    E = -spec.J * zz_sum(configs, spec.L, 1)
    gam = -(spec.gamma / 4) * z_sum(configs, spec.L)
    return E + 1j * gam
