"""Finite-size extrapolation, entanglement-scaling classification and sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import freefermion
from .entanglement import steady_state_entropy
from .hamiltonian import ModelSpec
from .spectral import find_steady_state, model_gap

log = logging.getLogger(__name__)

LOG_MARGIN = 0.8
LOG_MIN_SLOPE = 0.02


@dataclass
class GapSeries:
    points: list
    params: dict = field(default_factory=dict)
    mode: str = "three_level"

    def __post_init__(self):
        Ls = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(Ls, Ls[1:])):
            raise ValueError("L values must be strictly increasing")
        if any(d < 0 for _, d in self.points):
            raise ValueError("gaps must be nonnegative")

    @property
    def Ls(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=float)


@dataclass
class FitResult:
    delta_a: float
    slope: float
    residuals: np.ndarray = field(repr=False)
    rms: float = 0.0
    clamped: bool = False
    delta_a_raw: float = 0.0


def hyperbolic_fit(series, weights=None) -> FitResult:
    """Least-squares fit of ``Delta(L) = Delta_a + b / L``.

    ``series`` is a :class:`GapSeries` or a sequence of ``(L, Delta)`` pairs.
    A negative intercept is clamped to zero and flagged.
    """
    pts = series.points if isinstance(series, GapSeries) else list(series)
    if len(pts) < 3:
        raise ValueError(f"hyperbolic fit needs at least 3 points, got {len(pts)}")
    L = np.array([p[0] for p in pts], dtype=float)
    d = np.array([p[1] for p in pts], dtype=float)
    if np.unique(L).size != L.size or np.any(L <= 0):
        raise ValueError("L values must be positive and distinct")
    A = np.column_stack([np.ones_like(L), 1.0 / L])
    w = np.ones_like(L) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    coef, *_ = np.linalg.lstsq(A * w[:, None], d * w, rcond=None)
    a, b = float(coef[0]), float(coef[1])
    resid = d - A @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    clamped = a < 0
    return FitResult(max(a, 0.0), b, resid, rms, clamped, a)


@dataclass
class ScalingClassification:
    kind: str
    log_a: float
    log_c: float
    flat_c: float
    rms_log: float
    rms_flat: float
    score: float
    margin: float = LOG_MARGIN
    min_slope: float = LOG_MIN_SLOPE


def classify_entropy_scaling(points, margin: float = LOG_MARGIN, min_slope: float = LOG_MIN_SLOPE) -> ScalingClassification:
    """Decide between ``S = a ln L + c`` and ``S = const``.

    Logarithmic only if the log fit's rms residual is below ``margin`` times the
    flat fit's and ``a > min_slope``.
    """
    pts = sorted((float(L), float(S)) for L, S in points)
    if len(pts) < 4:
        raise ValueError("need at least 4 (L, S) points")
    L = np.array([p[0] for p in pts])
    S = np.array([p[1] for p in pts])
    if L.max() < 2 * L.min():
        raise ValueError("L values must span at least a factor of 2")
    A = np.column_stack([np.log(L), np.ones_like(L)])
    (a, c), *_ = np.linalg.lstsq(A, S, rcond=None)
    rms_log = float(np.sqrt(np.mean((S - A @ np.array([a, c])) ** 2)))
    flat = float(S.mean())
    rms_flat = float(np.sqrt(np.mean((S - flat) ** 2)))
    score = rms_log / rms_flat if rms_flat > 0 else 1.0
    kind = "logarithmic" if (score < margin and a > min_slope) else "area"
    return ScalingClassification(kind, float(a), float(c), flat, rms_log, rms_flat, float(score), margin, min_slope)


# -- series over system size -------------------------------------------------------


def gap_series(template: ModelSpec, L_list, mode: str = "three_level", solver=None) -> GapSeries:
    """Imaginary gap versus L; ``solver`` (e.g. a caching :class:`~noclick.cache.Solver`)
    supplies ``gap(spec, mode)`` when given."""
    gap = solver.gap if solver is not None else model_gap
    pts = [(int(L), gap(template.with_(L=int(L)), mode)) for L in sorted(L_list)]
    params = {k: v for k, v in template.to_dict().items() if k != "L"}
    return GapSeries([(L, max(d, 0.0)) for L, d in pts], params, mode)


def entropy_series(template: ModelSpec, L_list, L_A=None, solver=None) -> list[tuple[int, float]]:
    """``(L, S)`` pairs; ``L_A`` is an int, a callable of L, or None for ``floor(L/4)``."""
    ent = solver.entropy if solver is not None else steady_state_entropy
    out = []
    for L in sorted(L_list):
        la = L_A(L) if callable(L_A) else L_A
        out.append((int(L), ent(template.with_(L=int(L)), la)))
    return out


# -- gamma-h phase diagram -------------------------------------------------------------


@dataclass
class PhaseGrid:
    h_values: np.ndarray
    gamma_values: np.ndarray
    delta_a: np.ndarray
    rms: np.ndarray = field(repr=False)
    flags: list = field(default_factory=list, repr=False)
    boundary: np.ndarray = field(default=None, repr=False)
    cache_stats: object = field(default=None, repr=False)


def _cell(args):
    template, h, gamma, L_list, mode, solver = args
    if solver is not None:
        solver = solver.fresh()
    try:
        fit = hyperbolic_fit(gap_series(template.with_(h=h, gamma=gamma), L_list, mode, solver))
        flag = "clamped" if fit.clamped else ""
        out = (fit.delta_a, fit.rms, flag)
    except Exception as exc:  # per-cell failures are recorded, not fatal
        log.error("phase-diagram cell h=%g gamma=%g failed: %s", h, gamma, exc)
        out = (float("nan"), float("nan"), f"error: {exc}")
    return out + (solver.stats if solver is not None else None,)


def phase_diagram(h_grid, gamma_grid, L_list, template: ModelSpec, mode: str = "three_level", jobs: int = 1,
                  solver=None) -> PhaseGrid:
    """Extrapolated gap on every ``(h, gamma)`` cell plus the analytic boundary."""
    h_grid = np.asarray(h_grid, dtype=float)
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    if h_grid.size == 0 or gamma_grid.size == 0:
        raise ValueError("grids must be nonempty")
    if len(L_list) < 3:
        raise ValueError("need at least 3 system sizes")
    tasks = [(template, float(h), float(g), tuple(L_list), mode, solver) for h in h_grid for g in gamma_grid]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_cell, tasks))
    else:
        results = [_cell(t) for t in tasks]
    shape = (h_grid.size, gamma_grid.size)
    delta = np.array([r[0] for r in results]).reshape(shape)
    rms = np.array([r[1] for r in results]).reshape(shape)
    flags = [r[2] for r in results]
    boundary = np.array([(h, freefermion.critical_rate(h)) for h in h_grid])
    stats = None
    if solver is not None:
        stats = type(solver.stats)()
        for r in results:
            stats.add(r[3])
        solver.stats.add(stats)
    return PhaseGrid(h_grid, gamma_grid, delta, rms, flags, boundary, stats)


# -- second-order perturbation theory of the longitudinal-measured chain ----------------


@dataclass
class PerturbationCheck:
    h: float
    gamma: float
    L: int
    predicted: complex
    predicted_gamma: float
    ed: complex
    difference: float


def perturbative_vacuum(h: float, gamma: float, L: int) -> complex:
    """``E0 + E2 + i (G0 + G2)`` for the all-down vacuum, with ``g' = gamma/4``.

    Zeroth order ``-L + i L g'``; first order vanishes; second order from the
    ``L`` single-flip states, each ``4 - 2 i g'`` away:
    ``-L h^2 (2 + i g') / (8 + 2 g'^2)``.
    """
    gp = gamma / 4
    zeroth = -L + 1j * L * gp
    second = -L * h * h * (2 + 1j * gp) / (8 + 2 * gp * gp)
    return zeroth + second


def perturbation_check(h: float, gamma: float, L: int, solver=None) -> PerturbationCheck:
    if not 0 < h < 1:
        raise ValueError("perturbation check needs 0 < h < 1")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    pred = perturbative_vacuum(h, gamma, L)
    spec = ModelSpec("longitudinal_measured", L, h=h, gamma=gamma)
    ss = solver.steady_state(spec) if solver is not None else find_steady_state(spec)
    return PerturbationCheck(h, gamma, L, pred, pred.imag, ss.eigenvalue, abs(ss.eigenvalue.imag - pred.imag))


# -- dip-ramp-plateau diagnostics of rescaled DSFF curves ----------------------------------

#: windows in Heisenberg-rescaled time |tau~|
RAMP_WINDOW = (0.1, 2.0)
PLATEAU_WINDOW = (5.0, 20.0)
PAST_DIP = 2.0
DIP_MAX = 0.5
RAMP_MIN_SPEARMAN = 0.9
BASELINE_RMS_MAX = 0.15


@dataclass
class ChaosDiagnostics:
    theta: float
    dip: float
    plateau: float
    plateau_se: float
    ramp_spearman: float
    baseline_rms: float

    @property
    def dip_ok(self) -> bool:
        return self.dip < DIP_MAX

    @property
    def plateau_ok(self) -> bool:
        return abs(self.plateau - 1.0) <= 3 * self.plateau_se

    @property
    def ramp_ok(self) -> bool:
        return self.ramp_spearman > RAMP_MIN_SPEARMAN

    @property
    def baseline_ok(self) -> bool:
        return self.baseline_rms < BASELINE_RMS_MAX

    @property
    def chaotic(self) -> bool:
        return self.dip_ok and self.plateau_ok and self.ramp_ok and self.baseline_ok


def _window(tau, lo, hi):
    mask = (tau >= lo) & (tau <= hi)
    if mask.sum() < 2:
        raise ValueError(f"fewer than 2 grid points in |tau~| window [{lo}, {hi}]")
    return mask


def diagnose_chaos(curve, baseline) -> list[ChaosDiagnostics]:
    """Dip, ramp trend, plateau and baseline distance for each theta of a rescaled curve.

    ``baseline`` must share the rescaled time grid and theta values.
    """
    from scipy.stats import spearmanr

    tau = np.asarray(curve.tau_values)
    if not np.allclose(tau, baseline.tau_values) or not np.allclose(curve.theta_values, baseline.theta_values):
        raise ValueError("curve and baseline must share the rescaled grid")
    ramp = _window(tau, *RAMP_WINDOW)
    plat = _window(tau, *PLATEAU_WINDOW)
    out = []
    for t, theta in enumerate(curve.theta_values):
        k = curve.kappa[t]
        p, se = curve.window_mean(t, plat)
        rho = float(spearmanr(tau[ramp], k[ramp]).statistic)
        rms = float(np.sqrt(np.mean((k[ramp] - baseline.kappa[t, ramp]) ** 2)))
        out.append(ChaosDiagnostics(float(theta), float(k.min()), p, se, rho, rms))
    return out


def poisson_consistent(curve, past: float = PAST_DIP) -> tuple[bool, float]:
    """Whether every point with ``|tau~| > past`` lies within 3 s.e. of 1.

    Also returns the largest deviation in units of its standard error.
    """
    mask = np.asarray(curve.tau_values) > past
    if not mask.any():
        raise ValueError(f"no grid points beyond |tau~| = {past}")
    z = np.abs(curve.kappa[:, mask] - 1.0) / curve.stderr[:, mask]
    worst = float(np.max(z))
    return worst <= 3.0, worst
