# -*- coding: utf-8 -*-
"""
Quantile regression estimators.

The loss keeps the factor two of ``L_tau(x) = 2 (tau - 1{x < 0}) x`` so that
``L_0.5`` is the absolute loss; objectives and quantile-loss ratios are
reported on this scale.
"""
__all__ = ('SolverOptions', 'QuantileFit', 'QuantileProfile', 'OlsFit', 'check_tau',
           'check_taus', 'pinball_loss', 'fit_quantile', 'fit_profile', 'fit_ols')

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from joblib import Parallel, delayed

from soilqr import conf
from soilqr.design import DesignMatrix
from soilqr.exceptions import (ConfigurationError, DataError, DesignError, DomainError,
                               QuantileFitFailed, SoilQRException)
from soilqr.solvers import frisch_newton, highs, purify


logger = logging.getLogger(__name__)

VERTEX = 'vertex'
INTERIOR = 'interior'
MAX_ITER = 'max_iter'

SOLVERS = {
    'fn': frisch_newton,
    'highs': highs,
}


def check_tau(tau):
    """
    Raise :class:`~soilqr.exceptions.DomainError` unless ``0 < tau < 1``.
    """
    try:
        valid = 0.0 < float(tau) < 1.0
    except (TypeError, ValueError):
        valid = False
    if not valid:
        raise DomainError('tau', tau)
    return float(tau)


def check_taus(taus):
    taus = [check_tau(t) for t in taus]
    if not taus:
        raise ConfigurationError('The tau grid is empty')
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ConfigurationError('The tau grid must be strictly increasing: %s' % taus)
    return taus


def pinball_loss(x, tau):
    """
    The quantile loss ``L_tau``: ``-2 (1 - tau) x`` for negative ``x`` and
    ``2 tau x`` otherwise. Works elementwise on arrays.
    """
    tau = check_tau(tau)
    x = np.asarray(x, dtype=float)
    loss = np.where(x < 0, -2.0 * (1.0 - tau) * x, 2.0 * tau * x)
    return float(loss) if loss.ndim == 0 else loss


def _objective(residuals, tau):
    return float(np.sum(pinball_loss(residuals, tau)))


@dataclass(frozen=True)
class SolverOptions:
    method: str = field(default_factory=lambda: conf.SOLVER)
    gap_tolerance: float = field(default_factory=lambda: conf.GAP_TOLERANCE)
    max_iterations: int = field(default_factory=lambda: conf.MAX_ITERATIONS)

    def __post_init__(self):
        if self.method not in SOLVERS:
            raise ConfigurationError("Unknown solver '%s'; choose from %s"
                                     % (self.method, ', '.join(sorted(SOLVERS))))
        if self.gap_tolerance <= 0 or self.max_iterations < 1:
            raise ConfigurationError('Solver tolerance and iteration limit must be positive')


@dataclass(frozen=True)
class QuantileFit:
    """
    A fitted conditional ``tau``-quantile plane.

    ``residuals`` are ``y - X beta`` with the rows the solution interpolates
    stored as exact zeros; ``objective`` is the summed quantile loss.
    ``solver_status`` is ``'vertex'`` for a certified unique optimum,
    ``'interior'`` for an optimal point of a non-unique optimum (or an
    uncertified interior point iterate) and ``'max_iter'`` when the solver
    ran out of iterations.
    """
    tau: float
    beta: np.ndarray
    residuals: np.ndarray
    objective: float
    solver_status: str
    iterations: int

    @property
    def n_negative(self):
        return int(np.sum(self.residuals < 0))

    @property
    def n_positive(self):
        return int(np.sum(self.residuals > 0))

    @property
    def n_zero(self):
        return int(np.sum(self.residuals == 0))

    def predict(self, values):
        """Linear predictor for the rows of a design (matrix or DesignMatrix)."""
        values = getattr(values, 'values', values)
        return np.asarray(values, dtype=float) @ self.beta


def _check_response(X, y):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] != X.n:
        raise DataError('The response has %s values for a design with %i rows'
                        % (y.shape[0] if y.ndim == 1 else y.shape, X.n))
    if not np.all(np.isfinite(y)):
        raise DataError('The response holds non-finite values')
    return y


def fit_quantile(X, y, tau, options=None):
    """
    Fit the linear ``tau``-quantile of ``y`` given the design ``X``.

    :param soilqr.design.DesignMatrix X: design of full column rank
    :param y: response vector
    :param float tau: probability level in ``(0, 1)``
    :param SolverOptions options: solver choice and limits

    :returns: :class:`QuantileFit`
    """
    tau = check_tau(tau)
    if not isinstance(X, DesignMatrix):
        raise DesignError('expected a DesignMatrix, got %s' % type(X).__name__)
    y = _check_response(X, y)
    options = options or SolverOptions()
    values = X.values

    solution = SOLVERS[options.method](values, y, tau, options.gap_tolerance, options.max_iterations)
    raw_residuals = y - values @ solution.beta
    raw_objective = _objective(raw_residuals, tau)
    basic = purify(values, y, tau, solution.beta)

    if basic is not None and basic.certified:
        beta, residuals = basic.beta, basic.residuals
        status = VERTEX if basic.unique else INTERIOR
    elif basic is not None and _objective(basic.residuals, tau) <= raw_objective:
        beta, residuals = basic.beta, basic.residuals
        status = INTERIOR if solution.converged else MAX_ITER
    else:
        beta, residuals = solution.beta, raw_residuals
        status = INTERIOR if solution.converged else MAX_ITER

    if status == MAX_ITER:
        logger.warning('Quantile fit at tau=%s stopped after %i iterations without converging',
                       tau, solution.iterations)
    beta.flags.writeable = False
    residuals.flags.writeable = False
    return QuantileFit(tau, beta, residuals, _objective(residuals, tau), status, solution.iterations)


class QuantileProfile(object):
    """
    Independent quantile fits of one design over a grid of levels.
    """

    def __init__(self, fits, columns):
        self.fits = tuple(fits)
        self.columns = tuple(columns)

    @property
    def taus(self):
        return [f.tau for f in self.fits]

    @property
    def coefficients(self):
        """``len(taus) x (p+1)`` matrix of fitted coefficients."""
        return np.vstack([f.beta for f in self.fits])

    def __getitem__(self, tau):
        for f in self.fits:
            if f.tau == tau:
                return f
        raise KeyError(tau)

    def __iter__(self):
        return iter(self.fits)

    def __len__(self):
        return len(self.fits)


def _fit_tagged(X, y, tau, options):
    try:
        return fit_quantile(X, y, tau, options)
    except QuantileFitFailed:
        raise
    except SoilQRException as e:
        raise QuantileFitFailed(tau, e)


def fit_profile(X, y, taus=None, options=None, workers=None):
    """
    Fit one quantile regression per level in ``taus`` (default: the
    19-level grid 0.05, ..., 0.95). Fits are independent, so they are
    distributed over ``workers`` joblib workers; results keep grid order.
    """
    taus = check_taus(conf.TAUS if taus is None else taus)
    options = options or SolverOptions()
    workers = conf.WORKERS if workers is None else workers
    fits = Parallel(n_jobs=workers)(delayed(_fit_tagged)(X, y, tau, options) for tau in taus)
    return QuantileProfile(fits, X.columns)


@dataclass(frozen=True)
class OlsFit:
    beta: np.ndarray
    residuals: np.ndarray
    rss: float
    sigma2_hat: float

    def predict(self, values):
        values = getattr(values, 'values', values)
        return np.asarray(values, dtype=float) @ self.beta


def fit_ols(X, y):
    """
    Ordinary least squares fit, the conditional-mean baseline.

    ``sigma2_hat`` is ``rss / (n - p - 1)``, or zero for a saturated design.
    """
    if not isinstance(X, DesignMatrix):
        raise DesignError('expected a DesignMatrix, got %s' % type(X).__name__)
    y = _check_response(X, y)
    beta = scipy.linalg.lstsq(X.values, y)[0]
    residuals = y - X.values @ beta
    rss = float(residuals @ residuals)
    dof = X.n - X.p - 1
    return OlsFit(beta, residuals, rss, rss / dof if dof > 0 else 0.0)
