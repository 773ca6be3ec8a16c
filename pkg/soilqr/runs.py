# -*- coding: utf-8 -*-
"""
Run configuration and the commands of the command line.

A run configuration is a YAML file::

    input: samples.csv
    schema:
      response: {name: soc, transform: log}
      covariates:
        - {name: elevation}
        - {name: land_use, kind: categorical}
    taus: [0.25, 0.5, 0.75]
    bootstrap: {replicates: 1000, seed: 42}
    covariate_rasters: {elevation: dem.asc, land_use: land_use.asc}
    output: out

Relative paths are resolved against the directory of the file. Every key
but ``schema`` is optional and defaults to :mod:`soilqr.conf`.
"""
__all__ = ('RunConfig', 'COMMANDS', 'cmd_fit', 'cmd_cv', 'cmd_bootstrap', 'cmd_predict',
           'cmd_compare')

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

import pandas as pd
import yaml

from soilqr import conf
from soilqr.exceptions import ConfigurationError, DomainError
from soilqr.features import CovariateSchema
from soilqr.log import file_sha256, write_manifest
from soilqr.quantreg import SolverOptions, check_taus
from soilqr.workflow import Run


logger = logging.getLogger(__name__)

KEYS = ('input', 'schema', 'taus', 'collinearity_threshold', 'rare_threshold', 'bootstrap',
        'workers', 'solver', 'covariate_rasters', 'class_codes', 'mask', 'reference_map',
        'benchmarks', 'density_bins', 'output')


@dataclass
class RunConfig:
    schema: CovariateSchema = None
    input: str = None
    taus: tuple = field(default_factory=lambda: tuple(conf.TAUS))
    collinearity_threshold: float = field(default_factory=lambda: conf.COLLINEARITY_THRESHOLD)
    rare_threshold: int = field(default_factory=lambda: conf.RARE_THRESHOLD)
    bootstrap_replicates: int = field(default_factory=lambda: conf.BOOTSTRAP_REPLICATES)
    master_seed: int = field(default_factory=lambda: conf.MASTER_SEED)
    workers: int = field(default_factory=lambda: conf.WORKERS)
    solver: SolverOptions = field(default_factory=SolverOptions)
    #: Covariate name to raster path; categorical covariates hold class codes.
    covariate_rasters: dict = field(default_factory=dict)
    #: Covariate name to ``{class: raster code}`` for class rasters.
    class_codes: dict = field(default_factory=dict)
    mask: str = None
    reference_map: str = None
    benchmarks: dict = field(default_factory=dict)
    density_bins: int = field(default_factory=lambda: conf.DENSITY_BINS)
    output: str = '.'
    config_sha256: str = None

    def __post_init__(self):
        self.taus = tuple(check_taus(self.taus))
        if not 0 < self.collinearity_threshold <= 1:
            raise DomainError('collinearity_threshold', self.collinearity_threshold, '(0, 1]')
        if self.rare_threshold < 0:
            raise DomainError('rare_threshold', self.rare_threshold, '[0, inf)')
        if self.bootstrap_replicates < 0:
            raise DomainError('bootstrap.replicates', self.bootstrap_replicates, '[0, inf)')
        if self.workers == 0:
            raise DomainError('workers', self.workers, 'the nonzero integers')
        if self.density_bins < 1:
            raise DomainError('density_bins', self.density_bins, '[1, inf)')

    @classmethod
    def load(cls, path, **overrides):
        """
        Read a YAML run configuration. Keyword arguments that are not
        ``None`` (``taus``, ``master_seed``, ``bootstrap_replicates``,
        ``workers``, ``output``) override the file. An overriding output
        directory is relative to the working directory.
        """
        try:
            with open(path, 'rb') as f:
                raw = f.read()
        except OSError as e:
            raise ConfigurationError('Cannot read the run configuration: %s' % e)
        try:
            block = yaml.safe_load(raw) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError('Invalid YAML in %s: %s' % (path, e))
        if not isinstance(block, dict):
            raise ConfigurationError('The run configuration %s must be a mapping' % path)
        unknown = sorted(set(block) - set(KEYS))
        if unknown:
            raise ConfigurationError('Unknown keys in %s: %s' % (path, ', '.join(unknown)))
        if 'schema' not in block:
            raise ConfigurationError('The run configuration %s has no schema' % path)

        base = os.path.dirname(os.path.abspath(path))

        def resolve(value):
            return None if value is None else os.path.normpath(os.path.join(base, str(value)))

        kwargs = {'schema': CovariateSchema.from_dict(block['schema']),
                  'config_sha256': hashlib.sha256(raw).hexdigest()}
        for key in ('input', 'mask', 'reference_map', 'output'):
            if key in block:
                kwargs[key] = resolve(block[key])
        kwargs.setdefault('output', base)
        for key in ('covariate_rasters', 'benchmarks'):
            if key in block:
                kwargs[key] = dict((str(k), resolve(v)) for k, v in (block[key] or {}).items())
        if 'class_codes' in block:
            kwargs['class_codes'] = dict((str(cov), dict((str(k), v) for k, v in codes.items()))
                                         for cov, codes in (block['class_codes'] or {}).items())
        for key in ('taus', 'collinearity_threshold', 'rare_threshold', 'workers', 'density_bins'):
            if key in block:
                kwargs[key] = block[key]
        bootstrap = block.get('bootstrap') or {}
        if 'replicates' in bootstrap:
            kwargs['bootstrap_replicates'] = int(bootstrap['replicates'])
        if 'seed' in bootstrap:
            kwargs['master_seed'] = int(bootstrap['seed'])
        if block.get('solver'):
            try:
                kwargs['solver'] = SolverOptions(**block['solver'])
            except TypeError as e:
                raise ConfigurationError('Invalid solver options: %s' % e)

        for key, value in overrides.items():
            if value is not None:
                kwargs[key] = os.path.abspath(value) if key == 'output' else value
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigurationError('Invalid run configuration: %s' % e)

    def settings(self):
        """Effective settings recorded in the manifest. The worker count and
        the output directory change no output, so they are left out."""
        def digest(path):
            return file_sha256(path) if path and os.path.exists(path) else None

        return {
            'input_sha256': digest(self.input),
            'taus': list(self.taus),
            'collinearity_threshold': self.collinearity_threshold,
            'rare_threshold': self.rare_threshold,
            'bootstrap_replicates': self.bootstrap_replicates,
            'solver': {'method': self.solver.method, 'gap_tolerance': self.solver.gap_tolerance,
                       'max_iterations': self.solver.max_iterations},
            'covariate_rasters': dict((k, digest(v)) for k, v in sorted(self.covariate_rasters.items())),
            'benchmarks': dict((k, digest(v)) for k, v in sorted(self.benchmarks.items())),
            'reference_map_sha256': digest(self.reference_map),
            'density_bins': self.density_bins,
        }


# =======================[ Output helpers ]=====================

def _path(config, name):
    os.makedirs(config.output, exist_ok=True)
    return os.path.join(config.output, name)


def _write_csv(frame, path):
    frame.to_csv(path, index=False, float_format=conf.RASTER_FLOAT_FORMAT, lineterminator='\n')
    logger.info('Wrote %s', path)
    return path


def _coefficients_frame(profile):
    return pd.DataFrame([{'tau': fit.tau, 'column': column.name, 'beta': beta}
                         for fit in profile for column, beta in zip(profile.columns, fit.beta)],
                        columns=['tau', 'column', 'beta'])


def _manifest(config, command, run, outputs):
    path = _path(config, '%s_manifest.json' % command)
    write_manifest(path, command, config.config_sha256, config.settings(), config.master_seed,
                   run.steps, outputs)
    return outputs + [path]


# =======================[ Commands ]=====================

def cmd_fit(config):
    """
    Preprocess, then fit the final model (and the simple model) at every
    level. Writes the encoding report, coefficient tables, per-level fit
    summaries and residuals.
    """
    run = Run(config).run_until('load', 'filter_collinear', 'encode', 'build', 'fit')
    outputs = []

    path = _path(config, 'encoding_report.json')
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(run.prepared.report.as_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    outputs.append(path)

    outputs.append(_write_csv(_coefficients_frame(run.profile), _path(config, 'coefficients_qr.csv')))
    if run.simple_profile is not None:
        outputs.append(_write_csv(_coefficients_frame(run.simple_profile),
                                  _path(config, 'simple_coefficients_qr.csv')))
    outputs.append(_write_csv(pd.DataFrame({'column': run.prepared.design.names, 'beta': run.ols.beta}),
                              _path(config, 'coefficients_ols.csv')))

    summary = pd.DataFrame([{
        'tau': fit.tau, 'objective': fit.objective, 'solver_status': fit.solver_status,
        'iterations': fit.iterations, 'n_negative': fit.n_negative, 'n_zero': fit.n_zero,
        'n_positive': fit.n_positive,
    } for fit in run.profile])
    outputs.append(_write_csv(summary, _path(config, 'fit_summary.csv')))

    data = run.encoding.data
    residuals = pd.DataFrame({'row': data.frame.index.to_numpy()})
    for name in data.schema.coordinates:
        residuals[name] = data.frame[name].to_numpy()
    for fit in run.profile:
        residuals['tau_%.3f' % fit.tau] = fit.residuals
    outputs.append(_write_csv(residuals, _path(config, 'fit_residuals.csv')))
    return _manifest(config, 'fit', run, outputs)


def cmd_cv(config):
    """Leave-one-out cross-validation of the final model: ``cv_report.csv``."""
    run = Run(config).run_until('load', 'filter_collinear', 'encode', 'build', 'cross_validate')
    path = _path(config, 'cv_report.csv')
    run.cv.write_csv(path)
    return _manifest(config, 'cv', run, [path])


def cmd_bootstrap(config):
    """Bootstrap summaries of the final (and simple) model coefficients."""
    if config.bootstrap_replicates < 1:
        raise DomainError('bootstrap.replicates', config.bootstrap_replicates, '[1, inf)')
    run = Run(config).run_until('load', 'filter_collinear', 'encode', 'build', 'bootstrap')
    outputs = [_path(config, 'coefficients.csv')]
    run.summary.write_csv(outputs[0])
    if run.simple_summary is not None:
        outputs.append(_path(config, 'simple_coefficients.csv'))
        run.simple_summary.write_csv(outputs[1])
    return _manifest(config, 'bootstrap', run, outputs)


def cmd_predict(config):
    """
    Quantile maps at every level, and their bootstrap IQR maps unless
    ``bootstrap.replicates`` is 0.
    """
    steps = ['load', 'filter_collinear', 'encode', 'build', 'fit']
    if config.bootstrap_replicates > 0:
        steps.append('bootstrap')
    run = Run(config).run_until(*steps + ['predict'])
    os.makedirs(config.output, exist_ok=True)
    outputs = run.stack.write(config.output)
    return _manifest(config, 'predict', run, outputs)


def cmd_compare(config):
    """
    Compare the reference map (or, without one, the predicted median) with
    every benchmark, after bringing all maps to the coarsest resolution.
    One directory of CSV tables per benchmark.
    """
    if not config.benchmarks:
        raise ConfigurationError('No benchmark maps configured')
    run = Run(config)
    if not config.reference_map:
        run.run_until('load', 'filter_collinear', 'encode', 'build', 'fit', 'predict')
    run.make_transition('compare')
    outputs = []
    for name in sorted(run.comparisons):
        directory = _path(config, name)
        os.makedirs(directory, exist_ok=True)
        outputs.extend(run.comparisons[name].write(directory))
    return _manifest(config, 'compare', run, outputs)


COMMANDS = {
    'fit': cmd_fit,
    'cv': cmd_cv,
    'bootstrap': cmd_bootstrap,
    'predict': cmd_predict,
    'compare': cmd_compare,
}
