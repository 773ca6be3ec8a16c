# -*- coding: utf-8 -*-
"""
Reference computations for checking the estimators: exhaustive vertex
enumeration for tiny quantile regression problems, and a location-scale
data generator whose conditional quantiles are known in closed form.
"""
__all__ = ('brute_force_qr', 'SyntheticSpec', 'generate', 'true_coefficients')

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.stats

from soilqr.exceptions import DataError, EnumerationError, SpecError
from soilqr.features import CATEGORICAL, CovariateSchema, Dataset, Response, Variable
from soilqr.quantreg import check_tau, pinball_loss


logger = logging.getLogger(__name__)

MAX_ENUMERATION_ROWS = 20
MAX_ENUMERATION_COLUMNS = 4

NOISE = {
    'gaussian': scipy.stats.norm,
    'laplace': scipy.stats.laplace,
}


def brute_force_qr(X, y, tau):
    """
    Exact quantile regression by enumeration: an optimal solution
    interpolates ``p+1`` observations, so the best of all hyperplanes
    through ``p+1`` rows is a global optimum. Singular subsets are skipped;
    among equal objectives the lexicographically first subset wins.

    :returns: ``(beta, objective)``
    """
    tau = check_tau(tau)
    X = np.asarray(getattr(X, 'values', X), dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if n > MAX_ENUMERATION_ROWS or k > MAX_ENUMERATION_COLUMNS:
        raise DataError('Enumeration is limited to %i rows and %i columns, got %ix%i'
                        % (MAX_ENUMERATION_ROWS, MAX_ENUMERATION_COLUMNS, n, k))
    best = None
    for subset in itertools.combinations(range(n), k):
        rows = list(subset)
        if np.linalg.cond(X[rows]) > 1e12:
            continue
        beta = np.linalg.solve(X[rows], y[rows])
        objective = float(np.sum(pinball_loss(y - X @ beta, tau)))
        if best is None or objective < best[1]:
            best = (beta, objective)
    if best is None:
        raise EnumerationError()
    return best


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Location-scale model ``y = X beta_true + (1 + hetero_gamma x1) sigma e``.

    ``beta_true`` holds the intercept followed by one slope per continuous
    covariate ``x1, x2, ...`` drawn uniformly from ``covariate_range``.
    Non-empty ``class_effects`` adds a categorical covariate ``cls`` with
    classes ``k0, k1, ...``; class ``ki`` shifts the location by
    ``class_effects[i]`` and is drawn with weight proportional to
    ``len(class_effects) - i``, so ``k0`` is the modal class.
    """
    n: int
    beta_true: tuple
    hetero_gamma: float = 0.0
    noise: str = 'gaussian'
    seed: int = 0
    sigma: float = 1.0
    covariate_range: tuple = (0.0, 1.0)
    class_effects: tuple = ()

    def __post_init__(self):
        if self.noise not in NOISE:
            raise SpecError("Unknown noise '%s'; choose from %s" % (self.noise, ', '.join(sorted(NOISE))))
        if self.n < 1 or len(self.beta_true) < 2:
            raise SpecError('A synthetic dataset needs rows and at least one covariate')
        if self.sigma <= 0:
            raise SpecError('sigma must be positive, got %r' % self.sigma)

    @property
    def covariates(self):
        return ['x%i' % j for j in range(1, len(self.beta_true))]

    @property
    def schema(self):
        variables = [Variable(name) for name in self.covariates]
        if self.class_effects:
            variables.append(Variable('cls', CATEGORICAL))
        return CovariateSchema(Response('y'), tuple(variables))


def generate(spec):
    """
    Draw a :class:`~soilqr.features.Dataset` from ``spec``. The same spec
    always yields the same data.
    """
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.covariate_range
    x = rng.uniform(lo, hi, size=(spec.n, len(spec.covariates)))
    scale = 1.0 + spec.hetero_gamma * x[:, 0]
    if np.any(scale <= 0):
        raise SpecError('The noise scale 1 + hetero_gamma * x1 is not positive on %i rows'
                        % int(np.sum(scale <= 0)))
    location = spec.beta_true[0] + x @ np.asarray(spec.beta_true[1:], dtype=float)
    frame = pd.DataFrame(x, columns=spec.covariates)
    if spec.class_effects:
        m = len(spec.class_effects)
        weights = np.arange(m, 0, -1, dtype=float)
        classes = rng.choice(m, size=spec.n, p=weights / weights.sum())
        location = location + np.asarray(spec.class_effects, dtype=float)[classes]
        frame['cls'] = ['k%i' % c for c in classes]
    if spec.noise == 'gaussian':
        errors = rng.standard_normal(spec.n)
    else:
        errors = rng.laplace(0.0, 1.0, spec.n)
    frame['y'] = location + scale * spec.sigma * errors
    frame.index = pd.RangeIndex(1, spec.n + 1)
    return Dataset(frame, spec.schema, source='synthetic(seed=%i)' % spec.seed)


def true_coefficients(spec, tau):
    """
    Coefficients of the true conditional ``tau``-quantile, keyed by design
    column name (dummy columns against the baseline ``k0``).
    """
    q = spec.sigma * NOISE[spec.noise].ppf(check_tau(tau))
    base = spec.class_effects[0] if spec.class_effects else 0.0
    result = {'(Intercept)': spec.beta_true[0] + q + base}
    for j, name in enumerate(spec.covariates, start=1):
        result[name] = spec.beta_true[j] + (spec.hetero_gamma * q if j == 1 else 0.0)
    for i, effect in enumerate(spec.class_effects[1:], start=1):
        result['cls=k%i' % i] = effect - base
    return result
