"""Content-addressed on-disk cache of diagonalization results.

Entries are ``.npz`` files named by the SHA-256 of the model parameters, the
sector list, the kind of result and the numerical backend.  Deleting the
directory is always safe.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels
from .hamiltonian import ModelSpec
from .spectral import SteadyState, find_steady_state, gap_sectors, sector_eigenvalues, spectral_gap
from .basis import SectorLabel

log = logging.getLogger(__name__)

POLICIES = ("use", "refresh", "off")


def backend_tag() -> str:
    return f"noclick-{__version__}/numpy-{np.__version__}/scipy-{scipy.__version__}/{kernels.BACKEND}"


def content_key(kind: str, spec: ModelSpec, sectors, extra=None) -> str:
    payload = {
        "kind": kind,
        "spec": spec.to_dict(),
        "sectors": [str(s) for s in sectors] if sectors is not None else None,
        "extra": extra,
        "backend": backend_tag(),
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    evicted: int = 0
    diagonalizations: int = 0

    def add(self, other: "CacheStats") -> None:
        self.hits += other.hits
        self.misses += other.misses
        self.evicted += other.evicted
        self.diagonalizations += other.diagonalizations

    def as_dict(self) -> dict:
        return dict(hits=self.hits, misses=self.misses, evicted=self.evicted,
                    diagonalizations=self.diagonalizations)


@dataclass
class Solver:
    """Diagonalization front end that consults the cache first.

    Picklable, so sweep workers can each carry one; merge their ``stats``.
    """

    cache_dir: str | None = None
    policy: str = "use"
    stats: CacheStats = field(default_factory=CacheStats)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"cache policy must be one of {POLICIES}")

    def fresh(self) -> "Solver":
        """Copy with zeroed statistics, for use inside a worker task."""
        return Solver(self.cache_dir, self.policy)

    # -- storage ----------------------------------------------------------------
    def _path(self, key: str) -> Path | None:
        if self.cache_dir is None or self.policy == "off":
            return None
        return Path(self.cache_dir) / key[:2] / f"{key}.npz"

    def _load(self, key: str):
        path = self._path(key)
        if path is None or self.policy == "refresh" or not path.exists():
            return None
        try:
            with np.load(path, allow_pickle=False) as data:
                out = {k: data[k] for k in data.files}
            self.stats.hits += 1
            return out
        except Exception as exc:
            log.warning("evicting corrupt cache entry %s: %s", path, exc)
            self.stats.evicted += 1
            path.unlink(missing_ok=True)
            return None

    def _store(self, key: str, **arrays) -> None:
        path = self._path(key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(fh, **arrays)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    # -- cached computations --------------------------------------------------------
    def eigenvalues(self, spec: ModelSpec, sectors) -> np.ndarray:
        key = content_key("eigenvalues", spec, sectors)
        hit = self._load(key)
        if hit is not None:
            return hit["eigenvalues"]
        self.stats.misses += 1
        self.stats.diagonalizations += len(sectors)
        ev = sector_eigenvalues(spec, sectors)
        self._store(key, eigenvalues=ev)
        return ev

    def gap(self, spec: ModelSpec, mode: str = "three_level", sectors=None) -> float:
        sectors = gap_sectors(spec) if sectors is None else sectors
        return spectral_gap(self.eigenvalues(spec, sectors), mode)

    def steady_state(self, spec: ModelSpec, sectors=None) -> SteadyState:
        key = content_key("steady_state", spec, sectors)
        hit = self._load(key)
        if hit is not None:
            return SteadyState(complex(hit["eigenvalue"]), hit["vector"], None, 0,
                               SectorLabel.parse(str(hit["sector"])))
        self.stats.misses += 1
        self.stats.diagonalizations += 1
        ss = find_steady_state(spec, sectors)
        self._store(key, eigenvalue=np.array(ss.eigenvalue), vector=ss.vector,
                    sector=np.array(str(ss.sector)))
        return ss

    def baseline(self, cls: str, N: int, samples: int, seed: int, tau_grid, theta_list, c: float = 1.0):
        """Random-matrix DSFF curve, cached under (class, N, samples, seed, grid hash)."""
        from .dsff import DsffCurve, rmt_baseline

        grid = np.ascontiguousarray(tau_grid, dtype=np.float64)
        thetas = np.ascontiguousarray(theta_list, dtype=np.float64)
        grid_hash = hashlib.sha256(grid.tobytes() + thetas.tobytes()).hexdigest()
        blob = json.dumps([cls, N, samples, seed, grid_hash, c, backend_tag()]).encode()
        key = "rmt-" + hashlib.sha256(blob).hexdigest()
        hit = self._load(key)
        if hit is not None:
            return DsffCurve(hit["theta"], hit["tau"], hit["kappa"], hit["stderr"], True, N, samples,
                             float(hit["tau_H"]), c, None,
                             {"class": cls, "N": N, "samples": samples, "seed": seed})
        self.stats.misses += 1
        self.stats.diagonalizations += samples if cls != "Poisson" else 0
        curve = rmt_baseline(cls, N, samples, grid, thetas, seed, c)
        self._store(key, theta=curve.theta_values, tau=curve.tau_values, kappa=curve.kappa,
                    stderr=curve.stderr, tau_H=np.array(curve.tau_H))
        return curve

    def entropy(self, spec: ModelSpec, L_A: int | None = None, offset: int = 0) -> float:
        from .entanglement import default_subsystem, entropy, reduce

        L_A = default_subsystem(spec.L) if L_A is None else L_A
        ss = self.steady_state(spec)
        return entropy(reduce(ss.vector, spec.L, L_A, offset))
