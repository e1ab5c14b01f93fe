"""Dissipative spectral form factor and random-matrix baselines.

For a complex spectrum ``z_n`` and complex time ``tau = |tau| e^{i theta}``,
``(z tau* + z* tau) / 2 = |tau| (Re z cos theta + Im z sin theta)``, so the
signal is ``S(tau) = sum_n exp(i |tau| (x_n cos theta + y_n sin theta))``.
The form factor is ``<|S|^2> / N``; the connected version subtracts
``|<S>|^2``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .basis import FULL, SectorLabel, enumerate_sector
from .hamiltonian import Disorder, ModelSpec, build
from .spectral import diagonalize

THETA_PRESETS = {
    # [pi/18, 6 pi/18] in steps of pi/9
    "fig3": tuple(np.arange(1, 7, 2) * np.pi / 18),
    # [pi/20, 6 pi/20] in steps of pi/20
    "fig4": tuple(np.arange(1, 7) * np.pi / 20),
    "fig5": tuple(np.arange(1, 7) * np.pi / 20),
}

RMT_CLASSES = ("AIdagger", "GinUE", "Poisson")


def default_tau_grid(n: int = 160, lo: float = 0.01, hi: float = 20.0) -> np.ndarray:
    """Geometric grid of rescaled times ``|tau| / tau_H``."""
    return np.geomspace(lo, hi, n)


@dataclass
class SpectraEnsemble:
    members: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.members, (list, tuple)):
            sizes = {len(m) for m in self.members}
            if len(sizes) > 1:
                raise ValueError(f"ragged ensemble: member sizes {sorted(sizes)}")
        self.members = np.atleast_2d(np.asarray(self.members, dtype=np.complex128))
        if self.members.shape[0] < 1 or self.members.shape[1] < 1:
            raise ValueError("ensemble needs at least one nonempty spectrum")

    @property
    def N(self) -> int:
        return self.members.shape[1]

    @property
    def realizations(self) -> int:
        return self.members.shape[0]


@dataclass
class DsffCurve:
    theta_values: np.ndarray
    tau_values: np.ndarray
    kappa: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    connected: bool
    N: int
    realizations: int
    tau_H: float = 1.0
    heisenberg_c: float | None = None
    #: per-realization contributions whose mean is ``kappa``; shape (R, theta, tau)
    contributions: np.ndarray | None = field(default=None, repr=False)
    provenance: dict = field(default_factory=dict, repr=False)

    def window_mean(self, t: int, mask) -> tuple[float, float]:
        """Mean of ``kappa`` over a tau window and its standard error.

        The error comes from per-realization window averages, so correlations
        between neighbouring tau points are accounted for.
        """
        if self.contributions is None:
            raise ValueError("curve was computed without per-realization contributions")
        per = self.contributions[:, t, mask].mean(axis=1)
        R = per.size
        se = per.std(ddof=1) / np.sqrt(R) if R > 1 else float("nan")
        return float(self.kappa[t, mask].mean()), float(se)


def standardize(members: np.ndarray) -> np.ndarray:
    """Shift to zero ensemble mean and scale to unit mean ``|z - mean|^2``."""
    z = np.asarray(members, dtype=np.complex128)
    z = z - z.mean()
    scale = np.sqrt(np.mean(np.abs(z) ** 2))
    return z / scale if scale > 0 else z


def dsff(ensemble: SpectraEnsemble, tau_grid, theta_list, connected: bool = True,
         standardized: bool = True) -> DsffCurve:
    """Ensemble-averaged DSFF on ``tau_grid x theta_list`` (raw, unrescaled times)."""
    taus = np.asarray(tau_grid, dtype=np.float64)
    thetas = np.asarray(theta_list, dtype=np.float64)
    z = standardize(ensemble.members) if standardized else ensemble.members
    N, R = ensemble.N, ensemble.realizations
    S = np.stack([kernels.dsff_signal(m.real, m.imag, taus, thetas) for m in z])
    if connected:
        mean = S.mean(axis=0)
        contrib = np.abs(S - mean) ** 2 / N
    else:
        contrib = np.abs(S) ** 2 / N
    kappa = contrib.mean(axis=0)
    se = contrib.std(axis=0, ddof=1) / np.sqrt(R) if R > 1 else np.full(kappa.shape, np.nan)
    return DsffCurve(thetas, taus, kappa, se, connected, N, R, 1.0, None, contrib,
                     dict(ensemble.provenance, standardized=standardized))


def heisenberg_rescale(curve: DsffCurve, c: float = 1.0) -> DsffCurve:
    """Divide the time axis by ``tau_H = c sqrt(N)``."""
    tau_H = c * np.sqrt(curve.N)
    return replace(curve, tau_values=curve.tau_values / tau_H, tau_H=curve.tau_H * tau_H, heisenberg_c=c)


def rescaled_dsff(ensemble: SpectraEnsemble, rescaled_grid, theta_list, connected: bool = True,
                  c: float = 1.0) -> DsffCurve:
    """DSFF evaluated on a grid given in Heisenberg-rescaled units."""
    tau_H = c * np.sqrt(ensemble.N)
    return heisenberg_rescale(dsff(ensemble, np.asarray(rescaled_grid) * tau_H, theta_list, connected), c)


# -- random-matrix baselines -------------------------------------------------------------


def sample_matrix(cls: str, N: int, rng: np.random.Generator) -> np.ndarray:
    if cls not in RMT_CLASSES or cls == "Poisson":
        raise ValueError(f"no matrix ensemble for class {cls!r}")
    G = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    if cls == "AIdagger":
        return (G + G.T) / 2
    return G


def sample_spectrum(cls: str, N: int, rng: np.random.Generator) -> np.ndarray:
    if cls not in RMT_CLASSES:
        raise ValueError(f"unknown random-matrix class {cls!r}; expected one of {RMT_CLASSES}")
    if cls == "Poisson":
        # uniform in the unit disk
        r = np.sqrt(rng.uniform(0, 1, N))
        phi = rng.uniform(0, 2 * np.pi, N)
        return r * np.exp(1j * phi)
    return diagonalize(sample_matrix(cls, N, rng)).eigenvalues


def rmt_ensemble(cls: str, N: int, samples: int, seed: int = 0) -> SpectraEnsemble:
    if N < 2 or samples < 1:
        raise ValueError("need N >= 2 and samples >= 1")
    seeds = np.random.SeedSequence(seed).spawn(samples)
    members = [sample_spectrum(cls, N, np.random.default_rng(s)) for s in seeds]
    return SpectraEnsemble(np.array(members), {"class": cls, "N": N, "samples": samples, "seed": seed})


def rmt_baseline(cls: str, N: int, samples: int, tau_grid, theta_list, seed: int = 0,
                 c: float = 1.0) -> DsffCurve:
    """Connected DSFF of a random-matrix class, on a rescaled-time grid."""
    return rescaled_dsff(rmt_ensemble(cls, N, samples, seed), tau_grid, theta_list, True, c)


# -- disordered model ensembles --------------------------------------------------------


def realization_seeds(seed: int, realizations: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(realizations)]


def _one_spectrum(args):
    spec, sector, solver = args
    if solver is not None:
        solver = solver.fresh()
        return solver.eigenvalues(spec, [sector]), solver.stats
    basis = enumerate_sector(spec.L, sector)
    return diagonalize(build(spec, basis)).eigenvalues, None


def ensemble_sector(spec: ModelSpec, resolve_z2: bool = True) -> SectorLabel:
    """Even spin-inversion block when the model has that symmetry, else the full space."""
    if resolve_z2 and spec.has_z2:
        return SectorLabel(momentum=None, z2_parity=1)
    return FULL


def model_ensemble(spec: ModelSpec, realizations: int, seed: int = 0, resolve_z2: bool = True,
                   jobs: int = 1, solver=None) -> SpectraEnsemble:
    """Spectra of ``realizations`` disordered copies of ``spec``.

    Disorder amplitude comes from ``spec.disorder`` (its seed is replaced by
    seeds derived from ``seed``).
    """
    if spec.disorder is None:
        raise ValueError("model ensembles need spec.disorder")
    if realizations < 1:
        raise ValueError("need at least one realization")
    sector = ensemble_sector(spec, resolve_z2)
    seeds = realization_seeds(seed, realizations)
    tasks = [(spec.with_(disorder=Disorder(spec.disorder.amplitude, s)), sector, solver) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_one_spectrum, tasks))
    else:
        results = [_one_spectrum(t) for t in tasks]
    members = [r[0] for r in results]
    if solver is not None:
        for r in results:
            solver.stats.add(r[1])
    prov = {"spec": spec.to_dict(), "realizations": realizations, "seed": seed,
            "sector": str(sector), "seeds": seeds}
    return SpectraEnsemble(np.array(members), prov)
