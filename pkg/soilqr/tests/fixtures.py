# -*- coding: utf-8 -*-
"""Shared test data"""
import os
import shutil
import tempfile
import unittest

import numpy as np
import yaml

from soilqr.design import CONTINUOUS, Column, DesignMatrix
from soilqr.features import INTERCEPT_COLUMN
from soilqr.oracle import SyntheticSpec, generate
from soilqr.raster import Raster

#: Long Monte Carlo runs only execute when this is set.
LONG_TESTS = bool(os.environ.get('SOILQR_LONG_TESTS'))

long_test = unittest.skipUnless(LONG_TESTS, 'set SOILQR_LONG_TESTS to run')


def design(*covariates, **kwargs):
    """Intercept plus the given continuous columns ``x1, x2, ...``."""
    names = kwargs.get('names') or ['x%i' % j for j in range(1, len(covariates) + 1)]
    n = len(covariates[0]) if covariates else kwargs['n']
    values = np.column_stack([np.ones(n)] + [np.asarray(c, dtype=float) for c in covariates])
    columns = [INTERCEPT_COLUMN] + [Column(name, CONTINUOUS, name) for name in names]
    return DesignMatrix(values, columns)


def synthetic_design(spec):
    """``(DesignMatrix, y)`` of a continuous-only synthetic spec."""
    data = generate(spec)
    X = design(*[data.frame[name].to_numpy() for name in spec.covariates])
    return X, data.response_values()


class TemporaryDirectoryMixin(object):
    def setUp(self):
        super(TemporaryDirectoryMixin, self).setUp()
        self.directory = tempfile.mkdtemp(prefix='soilqr-')
        self.addCleanup(shutil.rmtree, self.directory, True)

    def path(self, *parts):
        return os.path.join(self.directory, *parts)


def write_grid(path, values, cellsize=1.0, x_origin=0.0, y_origin=0.0):
    return Raster(values, x_origin, y_origin, cellsize).write(path)


def write_project(directory, n=80, seed=3, positive=False, taus=(0.25, 0.5, 0.75),
                  bootstrap_replicates=50, **extra):
    """
    Write a small mapping project into ``directory``: a sample table with
    two continuous covariates and a two-class categorical one, a raster per
    covariate on a 4 x 5 grid and a run configuration.

    :returns: the path of the YAML configuration
    """
    spec = SyntheticSpec(n=n, beta_true=(10.0, 2.0, -1.0) if positive else (1.0, 2.0, -1.0),
                         sigma=0.5, seed=seed, class_effects=(0.0, 1.5))
    data = generate(spec)
    data.frame.to_csv(os.path.join(directory, 'samples.csv'), index=False)

    rng = np.random.default_rng(seed)
    x1 = rng.uniform(0, 1, (4, 5))
    x1[0, 0] = np.nan
    write_grid(os.path.join(directory, 'x1.asc'), x1)
    write_grid(os.path.join(directory, 'x2.asc'), rng.uniform(0, 1, (4, 5)))
    classes = np.where(rng.uniform(0, 1, (4, 5)) < 0.6, 1.0, 2.0)
    write_grid(os.path.join(directory, 'cls.asc'), classes)

    config = {
        'input': 'samples.csv',
        'schema': {
            'response': {'name': 'y', 'transform': 'log'} if positive else 'y',
            'covariates': ['x1', 'x2', {'name': 'cls', 'kind': 'categorical'}],
        },
        'taus': list(taus),
        'bootstrap': {'replicates': bootstrap_replicates, 'seed': 11},
        'covariate_rasters': {'x1': 'x1.asc', 'x2': 'x2.asc', 'cls': 'cls.asc'},
        'class_codes': {'cls': {'k0': 1, 'k1': 2}},
        'output': 'out',
    }
    config.update(extra)
    path = os.path.join(directory, 'run.yaml')
    with open(path, 'w') as f:
        yaml.safe_dump(config, f)
    return path
