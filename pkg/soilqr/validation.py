# -*- coding: utf-8 -*-
"""
Model validation: leave-one-out cross-validation scored by the quantile
loss, and the case-resampling bootstrap of the coefficients.
"""
__all__ = ('CvScore', 'CvReport', 'BootstrapEnsemble', 'CoefficientRow',
           'CoefficientSummary', 'percentile', 'loocv', 'resample_indices', 'refit_resample',
           'bootstrap', 'bootstrap_profile', 'summarize_coefficients')

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from soilqr import conf
from soilqr.design import DesignMatrix
from soilqr.exceptions import DataError, DesignError, FoldFailureError
from soilqr.quantreg import SolverOptions, check_tau, check_taus, fit_quantile, pinball_loss


logger = logging.getLogger(__name__)

#: Bootstrap replicates handed to a worker at once.
REPLICATE_BLOCK = 50


def percentile(values, q, axis=0):
    """
    Inverted-CDF order statistic: the value of rank ``ceil(q * m)`` among
    the ``m`` sorted values along ``axis`` (rank 1 for ``q = 0``).
    """
    values = np.sort(np.asarray(values, dtype=float), axis=axis)
    m = values.shape[axis]
    # Rounding keeps products such as 0.975 * 100 on their exact rank.
    rank = max(int(math.ceil(round(q * m, 9))), 1)
    return np.take(values, min(rank, m) - 1, axis=axis)


def _write_frame(frame, path):
    frame.to_csv(path, index=False, float_format=conf.RASTER_FLOAT_FORMAT, lineterminator='\n')


# =======================[ Cross-validation ]=====================

@dataclass(frozen=True)
class CvScore:
    tau: float
    #: ``1 - sum(held-out loss) / sum(held-out loss of the intercept-only model)``
    r1: float
    mean_heldout_pinball: float
    n: int
    #: The same ratio on the training objectives of the full-data fits.
    insample_r1: float
    skipped_folds: int = 0


class CvReport(object):
    def __init__(self, scores):
        self.scores = tuple(scores)

    @property
    def taus(self):
        return [s.tau for s in self.scores]

    @property
    def r1(self):
        return np.array([s.r1 for s in self.scores])

    def __getitem__(self, tau):
        for s in self.scores:
            if s.tau == tau:
                return s
        raise KeyError(tau)

    def __iter__(self):
        return iter(self.scores)

    def __len__(self):
        return len(self.scores)

    def to_frame(self):
        return pd.DataFrame([vars(s) for s in self.scores],
                            columns=['tau', 'r1', 'mean_heldout_pinball', 'n', 'insample_r1',
                                     'skipped_folds'])

    def write_csv(self, path):
        _write_frame(self.to_frame(), path)


def _ratio(loss, reference):
    if reference > 0:
        return 1.0 - loss / reference
    return 0.0 if loss == 0 else -np.inf


def _heldout_losses(X, y, i, taus, options):
    """
    Quantile losses at row ``i`` of the fits on the other rows, one per
    level, or ``None`` when dropping the row leaves a singular design.
    """
    try:
        train = X.without_row(i)
    except DesignError:
        return None
    rest = np.delete(y, i)
    row = X.values[i]
    return np.array([pinball_loss(y[i] - row @ fit_quantile(train, rest, tau, options).beta, tau)
                     for tau in taus])


def loocv(X, y, taus=None, options=None, workers=None):
    """
    Leave-one-out cross-validation of the quantile fits of ``X`` at every
    level of ``taus``.

    Each row is predicted by the fit on the remaining rows. The held-out
    losses are summed and compared to those of the intercept-only model
    cross-validated the same way. Folds whose training design is singular
    are skipped (and skipped for the reference as well); more than
    ``MAX_SKIPPED_FOLDS`` of them raise
    :class:`~soilqr.exceptions.FoldFailureError`.

    :returns: :class:`CvReport`
    """
    taus = check_taus(conf.TAUS if taus is None else taus)
    options = options or SolverOptions()
    workers = conf.WORKERS if workers is None else workers
    y = np.asarray(y, dtype=float)
    if X.n < X.p + 2:
        raise DataError('Leave-one-out needs at least %i observations for %i columns, got %i'
                        % (X.p + 2, X.p + 1, X.n))
    reference = DesignMatrix.intercept_only(X.n)

    with Parallel(n_jobs=workers) as parallel:
        folds = parallel(delayed(_heldout_losses)(X, y, i, taus, options) for i in range(X.n))
        kept = [i for i, losses in enumerate(folds) if losses is not None]
        skipped = X.n - len(kept)
        if skipped:
            logger.warning('Skipped %i of %i leave-one-out folds with singular designs', skipped, X.n)
        if skipped > conf.MAX_SKIPPED_FOLDS * X.n:
            raise FoldFailureError(skipped, X.n, conf.MAX_SKIPPED_FOLDS)
        references = parallel(delayed(_heldout_losses)(reference, y, i, taus, options) for i in kept)

    losses = np.vstack([folds[i] for i in kept]).sum(axis=0)
    reference_losses = np.vstack(references).sum(axis=0)
    scores = []
    for k, tau in enumerate(taus):
        insample = fit_quantile(X, y, tau, options).objective
        insample_reference = fit_quantile(reference, y, tau, options).objective
        scores.append(CvScore(tau=tau,
                              r1=_ratio(losses[k], reference_losses[k]),
                              mean_heldout_pinball=losses[k] / len(kept),
                              n=len(kept),
                              insample_r1=_ratio(insample, insample_reference),
                              skipped_folds=skipped))
    return CvReport(scores)


# =======================[ Bootstrap ]=====================

def _generator(master_seed, replicate):
    return np.random.default_rng(np.random.SeedSequence([master_seed, replicate]))


def resample_indices(master_seed, replicate, n):
    """First resample drawn for ``replicate``: ``n`` row indices with replacement."""
    return _generator(master_seed, replicate).integers(0, n, n)


def refit_resample(X, y, taus, master_seed, replicate, options, max_redraws=None):
    """
    Refit every level of ``taus`` on one case resample.

    The resample of ``replicate`` is drawn from a generator seeded by
    ``(master_seed, replicate)`` alone. A singular resample is redrawn from
    the same generator up to ``max_redraws`` times.

    :returns: ``len(taus) x (p+1)`` coefficients, or ``None`` for a failed
        replicate
    """
    max_redraws = conf.MAX_REDRAWS if max_redraws is None else max_redraws
    rng = _generator(master_seed, replicate)
    for attempt in range(max_redraws + 1):
        rows = rng.integers(0, X.n, X.n)
        try:
            resample = X.take(rows)
        except DesignError:
            logger.debug('Replicate %i: singular resample, redraw %i', replicate, attempt + 1)
            continue
        return np.vstack([fit_quantile(resample, y[rows], tau, options).beta for tau in taus])
    return None


def _replicate_block(X, y, taus, master_seed, replicates, options, max_redraws):
    return [refit_resample(X, y, taus, master_seed, r, options, max_redraws) for r in replicates]


@dataclass(frozen=True)
class BootstrapEnsemble:
    """
    Coefficient replicates of one quantile level. ``draws`` has one row per
    replicate in replicate order; failed replicates are rows of NaN.
    """
    tau: float
    draws: np.ndarray
    B: int
    master_seed: int
    failed_replicates: int
    columns: tuple = ()

    @property
    def valid_draws(self):
        return self.draws[~np.isnan(self.draws).any(axis=1)]


def bootstrap_profile(X, y, taus=None, B=None, master_seed=None, options=None, workers=None,
                      max_redraws=None):
    """
    Case-resampling bootstrap over a grid of levels. Each replicate draws
    one resample and refits every level on it.

    The result depends on ``(X, y, taus, B, master_seed)`` only; the number
    of workers changes the wall time, never the draws.

    :returns: list of :class:`BootstrapEnsemble`, one per level
    """
    taus = check_taus(conf.TAUS if taus is None else taus)
    B = conf.BOOTSTRAP_REPLICATES if B is None else int(B)
    master_seed = conf.MASTER_SEED if master_seed is None else int(master_seed)
    options = options or SolverOptions()
    workers = conf.WORKERS if workers is None else workers
    max_redraws = conf.MAX_REDRAWS if max_redraws is None else max_redraws
    if B < 1:
        raise DataError('The bootstrap needs at least one replicate, got B=%i' % B)
    y = np.asarray(y, dtype=float)

    blocks = [range(start, min(start + REPLICATE_BLOCK, B)) for start in range(0, B, REPLICATE_BLOCK)]
    results = Parallel(n_jobs=workers)(
        delayed(_replicate_block)(X, y, taus, master_seed, block, options, max_redraws)
        for block in blocks)

    draws = np.full((B, len(taus), X.p + 1), np.nan)
    failed = 0
    for r, betas in enumerate(b for block in results for b in block):
        if betas is None:
            failed += 1
        else:
            draws[r] = betas
    if failed:
        logger.warning('%i of %i bootstrap replicates failed after %i redraws', failed, B, max_redraws)
    return [BootstrapEnsemble(tau, draws[:, k, :], B, master_seed, failed, tuple(X.names))
            for k, tau in enumerate(taus)]


def bootstrap(X, y, tau, B=None, master_seed=None, options=None, workers=None):
    """Case-resampling bootstrap of the coefficients at a single level."""
    return bootstrap_profile(X, y, [check_tau(tau)], B, master_seed, options, workers)[0]


# =======================[ Summaries ]=====================

@dataclass(frozen=True)
class CoefficientRow:
    tau: float
    column: str
    median: float
    q25: float
    q75: float
    whisker_lo: float
    whisker_hi: float
    #: Percentile-bootstrap 95% interval; NaN when too few replicates.
    ci_lo: float
    ci_hi: float
    excludes_zero: object
    n_draws: int


class CoefficientSummary(object):
    FIELDS = ('tau', 'column', 'median', 'q25', 'q75', 'whisker_lo', 'whisker_hi',
              'ci_lo', 'ci_hi', 'excludes_zero', 'n_draws')

    def __init__(self, rows):
        self.rows = tuple(rows)

    def get(self, tau, column):
        for row in self.rows:
            if row.tau == tau and row.column == column:
                return row
        raise KeyError((tau, column))

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def to_frame(self):
        return pd.DataFrame([vars(r) for r in self.rows], columns=self.FIELDS)

    def write_csv(self, path):
        _write_frame(self.to_frame(), path)


def summarize_coefficients(ensembles, min_replicates=None):
    """
    Boxplot statistics and percentile confidence intervals of the bootstrap
    draws, per level and design column.

    Quartiles and interval endpoints are order statistics of rank
    ``ceil(q * B)`` over the valid draws. The whiskers reach the most
    extreme draws within 1.5 interquartile ranges of the box. Below
    ``min_replicates`` valid draws no interval is reported.
    """
    min_replicates = conf.MIN_CI_REPLICATES if min_replicates is None else min_replicates
    ensembles = list(ensembles)
    if not ensembles:
        return CoefficientSummary([])
    columns = ensembles[0].columns
    if any(e.columns != columns for e in ensembles):
        raise DataError('Bootstrap ensembles do not share their design columns')

    rows = []
    for ensemble in ensembles:
        draws = ensemble.valid_draws
        if len(draws) == 0:
            raise DataError('Every bootstrap replicate failed at tau=%s' % ensemble.tau)
        with_ci = len(draws) >= min_replicates
        if not with_ci:
            logger.warning('Only %i valid replicates at tau=%s; confidence intervals need %i',
                           len(draws), ensemble.tau, min_replicates)
        for j, column in enumerate(columns):
            values = draws[:, j]
            q25, median, q75 = (percentile(values, q) for q in (0.25, 0.5, 0.75))
            fence = 1.5 * (q75 - q25)
            inside = values[(values >= q25 - fence) & (values <= q75 + fence)]
            ci_lo = percentile(values, 0.025) if with_ci else np.nan
            ci_hi = percentile(values, 0.975) if with_ci else np.nan
            rows.append(CoefficientRow(
                tau=ensemble.tau, column=column, median=float(median), q25=float(q25),
                q75=float(q75), whisker_lo=float(inside.min()), whisker_hi=float(inside.max()),
                ci_lo=float(ci_lo), ci_hi=float(ci_hi),
                excludes_zero=bool(ci_lo > 0 or ci_hi < 0) if with_ci else None,
                n_draws=len(values)))
    return CoefficientSummary(rows)
