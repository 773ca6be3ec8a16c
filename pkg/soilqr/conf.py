# -*- coding: utf-8 -*-
"""Configuration options"""
from django.conf import settings


#: The basic configuration. Only read when Django settings are configured,
#: so the numerical modules stay usable as a plain library.
base_conf = getattr(settings, 'SOILQR_CONF', {}) if settings.configured else {}

#: Probability levels fitted when no grid is given: 0.05, 0.10, ..., 0.95.
TAUS = tuple(base_conf.get('TAUS', [k / 20 for k in range(1, 20)]))

#: Pearson correlation above which one of two covariates is dropped.
COLLINEARITY_THRESHOLD = base_conf.get('COLLINEARITY_THRESHOLD', 0.7)

#: Categorical classes with at most this many rows are pruned.
RARE_THRESHOLD = base_conf.get('RARE_THRESHOLD', 5)

#: Bootstrap replicates and the seed they are derived from.
BOOTSTRAP_REPLICATES = base_conf.get('BOOTSTRAP_REPLICATES', 10000)
MASTER_SEED = base_conf.get('MASTER_SEED', 0)

#: Redraws of a rank-deficient resample before the replicate counts as failed.
MAX_REDRAWS = base_conf.get('MAX_REDRAWS', 10)

#: Fewer valid replicates than this and no confidence interval is reported.
MIN_CI_REPLICATES = base_conf.get('MIN_CI_REPLICATES', 40)

#: Largest share of leave-one-out folds that may be skipped.
MAX_SKIPPED_FOLDS = base_conf.get('MAX_SKIPPED_FOLDS', 0.01)

#: Linear program solver: ``'fn'`` (Frisch-Newton interior point) or
#: ``'highs'`` (scipy's HiGHS).
SOLVER = base_conf.get('SOLVER', 'fn')
GAP_TOLERANCE = base_conf.get('GAP_TOLERANCE', 1e-8)
MAX_ITERATIONS = base_conf.get('MAX_ITERATIONS', 200)

#: Relative tolerance on the pivoted QR diagonal for rank detection.
RANK_TOLERANCE = base_conf.get('RANK_TOLERANCE', 1e-10)

#: Default number of joblib workers.
WORKERS = base_conf.get('WORKERS', 1)

#: Bins per axis of the density histogram in map comparisons.
DENSITY_BINS = base_conf.get('DENSITY_BINS', 50)

#: ``printf`` format of cell values in written ASCII grids.
RASTER_FLOAT_FORMAT = base_conf.get('RASTER_FLOAT_FORMAT', '%.12g')
