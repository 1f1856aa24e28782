from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.linalg

from . import config
from .errors import DimensionMismatch, InvalidConfiguration, KappaNotLessThanOne, SingularSystem
from .graph import CentralityConfig, InfluenceGraph, matrix_norms, spectral_norm, spectral_radius
from .helpers.formats import counted
from .helpers.utils import exact_matvec
from .trace import RoundTrace, StopCriterion


__all__ = [
    "EstimationState",
    "ErrorBoundParams",
    "estimation_step",
    "estimation_increment",
    "run_estimation",
    "oracle_alpha_centrality",
    "oracle_katz_centrality",
    "alpha_centrality_series",
    "estimation_closed_form",
    "error_bound_params",
    "error_bound",
    "estimation_errors",
    "default_max_rounds",
    "fit_alpha",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EstimationState:
    """Centrality estimates ``c(t)`` after ``t`` rounds.

    Attributes
    ----------
    c : np.ndarray
        Current estimates.
    t : int
        Round counter.
    converged : bool
        Whether the increment fell below the tolerance before the round cap.
    residual : float
        ``||c(t) - c(t-1)||_inf`` at the last round.
    """

    c: np.ndarray
    t: int = 0
    converged: bool = False
    residual: float = math.inf


@dataclass(frozen=True)
class ErrorBoundParams:
    """Constants of the geometric error bound.

    ``kappa = alpha * ||W^T||`` in the vector norm ``norm`` (one of ``"1"``, ``"2"``, ``"inf"``), ``gamma``
    converts that norm into the Euclidean error and ``m0 = max(||c(0)||, ||z||)``.
    """

    kappa: float
    gamma: float
    m0: float
    norm: str = "2"


def _as_vector(values: Iterable[float], n: int, name: str = "vector") -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    if vector.shape != (n,):
        raise DimensionMismatch(f"{name} has shape {vector.shape}, expected ({n},).")
    return vector


def estimation_step(g: InfluenceGraph, cfg: CentralityConfig, c: Iterable[float]) -> np.ndarray:
    """One synchronous round: ``c_i(t+1) = alpha * sum_j w_ji c_j(t) + z_i``."""

    c = _as_vector(c, g.n, "c")
    return cfg.alpha * exact_matvec(g.weights.T, c) + cfg.z


def estimation_increment(g: InfluenceGraph, cfg: CentralityConfig, c: np.ndarray, dc: np.ndarray) -> np.ndarray:
    """Incremental form ``c(t+1) = c(t) + alpha W^T dc(t)``."""

    return _as_vector(c, g.n, "c") + cfg.alpha * exact_matvec(g.weights.T, _as_vector(dc, g.n, "dc"))


def default_max_rounds(kappa: Optional[float], tol: float) -> int:
    if kappa is None or not 0 < kappa < 1 or tol <= 0:
        return config.MAX_ROUNDS
    return max(10, 10 * math.ceil(math.log(tol) / math.log(kappa)))


def run_estimation(
    g: InfluenceGraph,
    cfg: CentralityConfig,
    c0: Optional[Iterable[float]] = None,
    stop: Optional[StopCriterion] = None,
) -> Tuple[EstimationState, RoundTrace]:
    """Iterates :func:`estimation_step` until ``||c(t+1) - c(t)||_inf < tol`` or the round cap.

    Parameters
    ----------
    c0 : Optional[Iterable[float]]
        Initial estimates; defaults to ``z``, which makes the estimates nondecreasing.
    stop : Optional[StopCriterion]
        Defaults to ``config.TOL`` and ``10 * ceil(log(tol) / log(kappa))`` rounds when kappa is known.

    Returns
    -------
    Tuple[EstimationState, RoundTrace]
        The last state (``converged`` reports whether the tolerance was met) and the per-round trace.
    """

    stop = stop or StopCriterion()
    tol = config.TOL if stop.tol is None else stop.tol
    c = cfg.z.copy() if c0 is None else _as_vector(c0, g.n, "c0").copy()

    params = error_bound_params(g, cfg, c)
    max_rounds = stop.max_rounds or default_max_rounds(params and params.kappa, tol)

    trace = RoundTrace("estimate", ("c",), params={"alpha": cfg.alpha, "tol": tol, "max_rounds": max_rounds})
    trace.record(c=c)

    t, residual, converged = 0, math.inf, False
    while t < max_rounds:
        nxt = estimation_step(g, cfg, c)
        residual = float(np.max(np.abs(nxt - c)))
        c, t = nxt, t + 1
        trace.record(c=c)
        log.debug(f"estimate round {t}: residual {residual:.3e}")
        if residual < tol:
            converged = True
            break

    if converged:
        log.info(f"Estimation converged in {counted(t, 'round')}")
    else:
        log.warning(f"Estimation stopped at {counted(t, 'round')} with residual {residual:.3e}")

    return EstimationState(c=c, t=t, converged=converged, residual=residual), trace


def _system(g: InfluenceGraph, alpha: float) -> np.ndarray:
    return np.eye(g.n) - alpha * g.weights.T


def oracle_alpha_centrality(g: InfluenceGraph, cfg: CentralityConfig) -> np.ndarray:
    """Solves ``(I - alpha W^T) rho = z`` directly."""

    try:
        rho = scipy.linalg.solve(_system(g, cfg.alpha), cfg.z)
    except scipy.linalg.LinAlgError as e:
        raise SingularSystem(f"{SingularSystem.message} ({e})")
    return np.maximum(rho, 0.0)


def oracle_katz_centrality(g: InfluenceGraph, alpha: float) -> np.ndarray:
    """``((I - alpha W^T)^-1 - I) 1``, the attenuated count of walks reaching each agent."""

    if alpha * spectral_radius(g.weights) >= 1:
        raise InvalidConfiguration(f"alpha = {alpha} violates alpha * rho(W) < 1.")
    try:
        inverse = scipy.linalg.inv(_system(g, alpha))
    except scipy.linalg.LinAlgError as e:
        raise SingularSystem(f"{SingularSystem.message} ({e})")
    return inverse.sum(axis=1) - 1.0


def alpha_centrality_series(g: InfluenceGraph, cfg: CentralityConfig, terms: int) -> np.ndarray:
    """Truncated series ``sum_{k < terms} (alpha W^T)^k z``."""

    operator = cfg.alpha * g.weights.T
    term = cfg.z.copy()
    total = np.zeros(g.n)
    for _ in range(terms):
        total += term
        term = operator @ term
    return total


def estimation_closed_form(g: InfluenceGraph, cfg: CentralityConfig, c0: Iterable[float], t: int) -> np.ndarray:
    """``c(t) = (alpha W^T)^t c(0) + sum_{k < t} (alpha W^T)^k z``."""

    operator = cfg.alpha * g.weights.T
    return np.linalg.matrix_power(operator, t) @ _as_vector(c0, g.n, "c0") + alpha_centrality_series(g, cfg, t)


def error_bound_params(g: InfluenceGraph, cfg: CentralityConfig, c0: Iterable[float]) -> Optional[ErrorBoundParams]:
    """Bound constants for ``g``, or ``None`` when no available norm gives ``kappa < 1``.

    Symmetric W uses the spectral norm. Otherwise the smallest of the 1-, 2- and inf-norms of ``W^T`` is used.
    """

    c0 = _as_vector(c0, g.n, "c0")

    if g.is_symmetric:
        norm, order, gamma = spectral_norm(g.weights), 2, 1.0
    else:
        norm_one, norm_inf = matrix_norms(g.weights)
        # induced norms of W^T: ||W^T||_1 = ||W||_inf, ||W^T||_inf = ||W||_1
        candidates = [
            (norm_inf, 1, 1.0),
            (spectral_norm(g.weights), 2, 1.0),
            (norm_one, np.inf, math.sqrt(g.n)),
        ]
        norm, order, gamma = min(candidates, key=lambda x: x[0])

    kappa = cfg.alpha * norm
    if kappa >= 1:
        log.warning(f"No norm gives kappa < 1 (best {kappa:.4g}); error bound unavailable")
        return None

    m0 = max(float(np.linalg.norm(c0, order)), float(np.linalg.norm(cfg.z, order)))
    return ErrorBoundParams(kappa=kappa, gamma=gamma, m0=m0, norm="inf" if order == np.inf else str(order))


def error_bound(params: ErrorBoundParams, t: int) -> float:
    """``gamma (2 - kappa) kappa^t / (1 - kappa) * m0``."""

    if not params.kappa < 1:
        raise KappaNotLessThanOne(f"kappa = {params.kappa} is not below one.")
    if t < 0:
        raise ValueError("Round index must be nonnegative.")
    return params.gamma * (2 - params.kappa) * params.kappa**t / (1 - params.kappa) * params.m0


def estimation_errors(trace: RoundTrace, rho: np.ndarray) -> np.ndarray:
    """Euclidean error ``||c(t) - rho||`` for every recorded round."""

    return np.linalg.norm(trace.series("c") - rho[np.newaxis, :], axis=1)


def fit_alpha(g: InfluenceGraph, rho: Iterable[float], z: Iterable[float]) -> Tuple[float, float]:
    """Least-squares alpha for ``(I - alpha W^T) rho = z``.

    Returns
    -------
    Tuple[float, float]
        The fitted alpha and the infinity norm of the remaining residual.
    """

    rho = _as_vector(rho, g.n, "rho")
    z = _as_vector(z, g.n, "z")
    a = g.weights.T @ rho
    b = rho - z
    if not np.any(a):
        raise InvalidConfiguration("Cannot fit alpha on a zero influence matrix.")
    alpha = float(a @ b / (a @ a))
    return alpha, float(np.max(np.abs(b - alpha * a)))
