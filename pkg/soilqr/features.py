# -*- coding: utf-8 -*-
"""
Observation tables and their conversion into design matrices.

Preprocessing follows the model building strategy: prune collinear
continuous covariates, turn categorical covariates into dummy columns with
the modal class as baseline and the rare classes removed, then assemble the
design matrix with an intercept.
"""
__all__ = ('Variable', 'Response', 'CovariateSchema', 'Dataset', 'CollinearPair',
           'BaselineClass', 'PrunedClass', 'EncodingReport', 'CategoricalEncoding',
           'PreparedDesign', 'pearson_matrix', 'collinearity_filter', 'encode_categoricals',
           'build_design', 'build_simple_model', 'prepare_design')

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from soilqr import conf
from soilqr.design import CONTINUOUS, DUMMY, INTERCEPT, Column, DesignMatrix
from soilqr.exceptions import (DataError, EmptyDatasetError, MissingColumn, SchemaError,
                               SingleClassError, TransformError, UnreadableFile, ZeroVarianceError)


logger = logging.getLogger(__name__)

CATEGORICAL = 'categorical'
NONE = 'none'
LOG = 'log'

INTERCEPT_COLUMN = Column('(Intercept)', INTERCEPT, '')


# =======================[ Schema ]=====================

@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    transform: str = NONE

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise SchemaError("Covariate '%s' has unknown kind '%s'" % (self.name, self.kind))
        if self.transform not in (NONE, LOG):
            raise SchemaError("Variable '%s' has unknown transform '%s'" % (self.name, self.transform))
        if self.kind == CATEGORICAL and self.transform != NONE:
            raise SchemaError("Categorical covariate '%s' cannot be transformed" % self.name)


@dataclass(frozen=True)
class Response:
    """
    The modeled variable. When ``product_of`` names columns, the response is
    their product times ``scale`` (for instance organic carbon content times
    bulk density times a depth factor gives a carbon stock).
    """
    name: str
    transform: str = NONE
    product_of: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        if self.transform not in (NONE, LOG):
            raise SchemaError("Response '%s' has unknown transform '%s'" % (self.name, self.transform))


@dataclass(frozen=True)
class CovariateSchema:
    response: Response
    covariates: tuple
    #: Optional ``(x, y)`` column names carried along with the observations.
    coordinates: tuple = ()

    def __post_init__(self):
        if not self.covariates:
            raise SchemaError('The schema needs at least one covariate')
        names = [self.response.name] + [c.name for c in self.covariates]
        duplicated = sorted(set(n for n in names if names.count(n) > 1))
        if duplicated:
            raise SchemaError('Duplicated names in the schema: %s' % ', '.join(duplicated))
        if self.coordinates and len(self.coordinates) != 2:
            raise SchemaError('Coordinates must name exactly two columns')

    @classmethod
    def from_dict(cls, block):
        """
        Build a schema from its configuration block::

            response: {name: soc_stock, transform: log}
            covariates:
              - {name: elevation}
              - {name: land_use, kind: categorical}
        """
        if not isinstance(block, dict):
            raise SchemaError('The schema must be a mapping')
        try:
            response = block['response']
            if isinstance(response, str):
                response = {'name': response}
            response = Response(name=str(response['name']),
                                transform=response.get('transform', NONE),
                                product_of=tuple(response.get('product_of', ())),
                                scale=float(response.get('scale', 1.0)))
            covariates = []
            for item in block['covariates']:
                if isinstance(item, str):
                    item = {'name': item}
                covariates.append(Variable(name=str(item['name']),
                                           kind=item.get('kind', CONTINUOUS),
                                           transform=item.get('transform', NONE)))
        except (KeyError, TypeError) as e:
            raise SchemaError('Incomplete schema: missing %s' % e)
        return cls(response, tuple(covariates), tuple(block.get('coordinates', ())))

    @property
    def continuous(self):
        return [c.name for c in self.covariates if c.kind == CONTINUOUS]

    @property
    def categorical(self):
        return [c.name for c in self.covariates if c.kind == CATEGORICAL]

    def get(self, name):
        for c in self.covariates:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def source_columns(self):
        """Columns an input table has to provide."""
        response = list(self.response.product_of) or [self.response.name]
        return response + [c.name for c in self.covariates] + list(self.coordinates)


# =======================[ Dataset ]=====================

def _rows(frame, mask):
    return [int(i) for i in frame.index[np.asarray(mask)]]


class Dataset(object):
    """
    Observations conforming to a :class:`CovariateSchema`.

    The table is held as a :class:`pandas.DataFrame` whose index numbers the
    rows (CSV line numbers when read from a file). Continuous columns are
    floats, categorical columns strings.
    """

    def __init__(self, frame, schema, source='<memory>', dropped_missing=0):
        for column in schema.source_columns:
            if column not in frame.columns:
                raise MissingColumn(column, source)
        frame = frame.copy()
        response = schema.response
        if response.product_of:
            product = np.ones(len(frame))
            for column in response.product_of:
                product = product * self._numeric(frame, column)
            frame[response.name] = product * response.scale
        else:
            frame[response.name] = self._numeric(frame, response.name)
        for name in schema.continuous:
            frame[name] = self._numeric(frame, name)
        for name in schema.categorical:
            frame[name] = frame[name].astype(str)
        for name in schema.coordinates:
            frame[name] = self._numeric(frame, name)

        columns = list(dict.fromkeys([response.name] + [c.name for c in schema.covariates]
                                     + list(schema.coordinates) + list(response.product_of)))
        self.frame = frame[columns]
        self.schema = schema
        self.source = source
        self.dropped_missing = dropped_missing
        if len(self.frame) == 0:
            raise EmptyDatasetError(source)
        if response.transform == LOG:
            bad = self.frame[response.name] <= 0
            if bad.any():
                raise TransformError(response.name, _rows(self.frame, bad))

    @staticmethod
    def _numeric(frame, column):
        values = pd.to_numeric(frame[column], errors='coerce')
        bad = ~np.isfinite(values.to_numpy(dtype=float))
        if bad.any():
            raise DataError("Column '%s' holds missing or non-numeric values at rows %s"
                            % (column, ', '.join(str(r) for r in _rows(frame, bad))))
        return values.astype(float)

    @classmethod
    def from_csv(cls, path, schema):
        """
        Read a comma separated UTF-8 file with a header row. Rows with an
        empty field in any modeled column are dropped and counted.
        """
        try:
            frame = pd.read_csv(path, sep=',', dtype=str, keep_default_na=False, encoding='utf-8')
        except pd.errors.EmptyDataError:
            raise EmptyDatasetError(path)
        except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
            raise UnreadableFile(path, e)
        # Line numbers of the file: the header is line 1.
        frame.index = pd.RangeIndex(2, len(frame) + 2)
        for column in schema.source_columns:
            if column not in frame.columns:
                raise MissingColumn(column, path)
        missing = np.zeros(len(frame), dtype=bool)
        for column in schema.source_columns:
            missing |= (frame[column].str.strip() == '').to_numpy(dtype=bool)
        if missing.any():
            logger.info('Dropping %i rows of %s with missing values', int(missing.sum()), path)
        return cls(frame[~missing], schema, source=str(path), dropped_missing=int(missing.sum()))

    @property
    def n(self):
        return len(self.frame)

    def __len__(self):
        return self.n

    def subset(self, mask):
        """Dataset restricted to the rows where ``mask`` holds."""
        return Dataset(self.frame[np.asarray(mask)], self.schema, self.source, self.dropped_missing)

    def response_values(self):
        values = self.frame[self.schema.response.name].to_numpy(dtype=float)
        return np.log(values) if self.schema.response.transform == LOG else values

    def covariate_values(self, name):
        """Continuous covariate with its declared transform applied."""
        values = self.frame[name].to_numpy(dtype=float)
        if self.schema.get(name).transform == LOG:
            bad = values <= 0
            if bad.any():
                raise TransformError(name, _rows(self.frame, bad))
            return np.log(values)
        return values

    def class_counts(self, name):
        """``{class: count}`` of a categorical covariate."""
        return dict(self.frame[name].value_counts(sort=False))


def modal_class(counts):
    """The most frequent class; ties go to the lexicographically first."""
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


# =======================[ Collinearity ]=====================

@dataclass(frozen=True)
class CollinearPair:
    name: str
    partner: str
    r: float


def pearson_matrix(data, names=None):
    """
    Pearson correlations between continuous covariates (after their declared
    transforms), as a labelled symmetric :class:`pandas.DataFrame`.
    """
    names = list(data.schema.continuous if names is None else names)
    if len(names) < 2:
        raise DataError('A correlation matrix needs at least two continuous covariates')
    values = np.column_stack([data.covariate_values(name) for name in names])
    for j, name in enumerate(names):
        if np.all(values[:, j] == values[0, j]):
            raise ZeroVarianceError(name)
    corr = np.corrcoef(values, rowvar=False)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return pd.DataFrame(corr, index=names, columns=names)


def collinearity_filter(corr, threshold=None):
    """
    Drop covariates until no pair correlates beyond ``threshold`` in
    absolute value.

    Among the covariates involved in an offending pair, the one with the
    largest mean absolute correlation to the other survivors goes first;
    ties go to the earlier covariate.

    :returns: ``(kept names, [CollinearPair, ...])``
    """
    threshold = conf.COLLINEARITY_THRESHOLD if threshold is None else threshold
    names = list(corr.columns)
    signed = corr.to_numpy(dtype=float)
    strength = np.abs(signed)
    np.fill_diagonal(strength, 0.0)
    alive = list(range(len(names)))
    dropped = []
    while len(alive) > 1:
        sub = strength[np.ix_(alive, alive)]
        offending = [k for k in range(len(alive)) if np.any(sub[k] > threshold)]
        if not offending:
            break
        mean_abs = sub.sum(axis=1) / (len(alive) - 1)
        top = max(round(mean_abs[k], 12) for k in offending)
        victim = next(k for k in offending if round(mean_abs[k], 12) == top)
        partner = int(np.argmax(sub[victim]))
        i, j = alive[victim], alive[partner]
        dropped.append(CollinearPair(names[i], names[j], float(signed[i, j])))
        logger.info("Dropping '%s' (r=%.3f with '%s')", names[i], signed[i, j], names[j])
        del alive[victim]
    return [names[a] for a in alive], dropped


# =======================[ Categorical encoding ]=====================

@dataclass(frozen=True)
class BaselineClass:
    covariate: str
    level: str
    count: int


@dataclass(frozen=True)
class PrunedClass:
    covariate: str
    level: str
    count: int
    rows_removed: int


@dataclass(frozen=True)
class EncodingReport:
    dropped_collinear: tuple = ()
    baseline_classes: tuple = ()
    pruned_rare_classes: tuple = ()
    final_columns: tuple = ()

    def as_dict(self):
        return {
            'dropped_collinear': [vars(p) for p in self.dropped_collinear],
            'baseline_classes': [vars(b) for b in self.baseline_classes],
            'pruned_rare_classes': [vars(p) for p in self.pruned_rare_classes],
            'final_columns': [vars(c) for c in self.final_columns],
        }


@dataclass(frozen=True)
class CategoricalEncoding:
    """
    Dummy coding of the categorical covariates of ``data`` (the modeling
    table left after rare-class pruning). ``levels`` maps each covariate to
    its baseline class and the classes that get a column.
    """
    data: Dataset
    levels: dict = field(default_factory=dict)

    @property
    def columns(self):
        return [Column('%s=%s' % (cov, level), DUMMY, cov)
                for cov, (baseline, kept) in self.levels.items() for level in kept]

    def column_classes(self):
        """``{column name: (covariate, class)}`` for the dummy columns."""
        return dict(('%s=%s' % (cov, level), (cov, level))
                    for cov, (baseline, kept) in self.levels.items() for level in kept)

    def indicators(self, frame):
        if not self.levels:
            return np.empty((len(frame), 0))
        return np.column_stack([(frame[cov] == level).to_numpy(dtype=float)
                                for cov, (baseline, kept) in self.levels.items() for level in kept])


def encode_categoricals(data, rare_threshold=None):
    """
    Dummy-code the categorical covariates.

    Classes with at most ``rare_threshold`` rows are pruned together with
    their rows, repeating in schema order until every remaining class is
    larger (the modal class of a covariate is never pruned). The modal
    class then becomes the baseline carried by the intercept, ties going to
    the lexicographically first class; every other class gets a 0/1 column.

    :returns: ``(CategoricalEncoding, EncodingReport)``
    """
    rare_threshold = conf.RARE_THRESHOLD if rare_threshold is None else rare_threshold
    covariates = data.schema.categorical
    frame = data.frame
    pruned = []
    changed = True
    while changed:
        changed = False
        for cov in covariates:
            counts = dict(frame[cov].value_counts(sort=False))
            modal = modal_class(counts)
            for level in sorted(counts):
                if level != modal and counts[level] <= rare_threshold:
                    pruned.append(PrunedClass(cov, level, int(counts[level]), int(counts[level])))
                    logger.info("Pruning class '%s' of '%s' (%i rows)", level, cov, counts[level])
                    frame = frame[frame[cov] != level]
                    changed = True

    levels = {}
    baselines = []
    for cov in covariates:
        counts = dict(frame[cov].value_counts(sort=False))
        modal = modal_class(counts)
        if len(counts) < 2:
            raise SingleClassError(cov, modal)
        levels[cov] = (modal, tuple(sorted(level for level in counts if level != modal)))
        baselines.append(BaselineClass(cov, modal, int(counts[modal])))

    retained = data.subset(data.frame.index.isin(frame.index)) if pruned else data
    encoding = CategoricalEncoding(retained, levels)
    report = EncodingReport(baseline_classes=tuple(baselines), pruned_rare_classes=tuple(pruned),
                            final_columns=tuple(encoding.columns))
    return encoding, report


# =======================[ Design matrices ]=====================

def build_design(data, kept=None, encoding=None):
    """
    Assemble the design matrix and response vector.

    :param Dataset data: the observations
    :param kept: continuous covariates to use, default all
    :param CategoricalEncoding encoding: dummy coding; computed with the
        default rare-class threshold when the schema has categorical
        covariates and none is given. Its pruned table replaces ``data``.

    :returns: ``(DesignMatrix, response vector)``; raises
        :class:`~soilqr.exceptions.DesignError` naming dependent columns
    """
    if encoding is None and data.schema.categorical:
        encoding, _ = encode_categoricals(data)
    table = encoding.data if encoding is not None else data
    kept = data.schema.continuous if kept is None else [n for n in data.schema.continuous if n in kept]

    columns = [INTERCEPT_COLUMN] + [Column(name, CONTINUOUS, name) for name in kept]
    blocks = [np.ones((table.n, 1))] + [table.covariate_values(name)[:, None] for name in kept]
    if encoding is not None:
        columns += encoding.columns
        blocks.append(encoding.indicators(table.frame))
    return DesignMatrix(np.hstack(blocks), columns), table.response_values()


def build_simple_model(data):
    """
    The simple model: intercept plus, per categorical covariate, one
    indicator of membership in its modal class.
    """
    covariates = data.schema.categorical
    if not covariates:
        raise SchemaError('The simple model needs at least one categorical covariate')
    columns = [INTERCEPT_COLUMN]
    blocks = [np.ones((data.n, 1))]
    for cov in covariates:
        modal = modal_class(data.class_counts(cov))
        columns.append(Column('%s=%s' % (cov, modal), DUMMY, cov))
        blocks.append((data.frame[cov] == modal).to_numpy(dtype=float)[:, None])
    return DesignMatrix(np.hstack(blocks), columns), data.response_values()


@dataclass(frozen=True)
class PreparedDesign:
    design: DesignMatrix
    response: np.ndarray
    report: EncodingReport
    encoding: CategoricalEncoding = None

    @property
    def data(self):
        return self.encoding.data if self.encoding is not None else None


def prepare_design(data, threshold=None, rare_threshold=None):
    """
    Run the preprocessing steps: collinearity filter over the continuous
    covariates, categorical encoding, then :func:`build_design`.
    """
    kept, dropped = data.schema.continuous, []
    if len(kept) >= 2:
        kept, dropped = collinearity_filter(pearson_matrix(data), threshold)
    if data.schema.categorical:
        encoding, report = encode_categoricals(data, rare_threshold)
    else:
        encoding, report = CategoricalEncoding(data), EncodingReport()
    design, response = build_design(data, kept, encoding)
    report = replace(report, dropped_collinear=tuple(dropped), final_columns=design.columns)
    return PreparedDesign(design, response, report, encoding)
