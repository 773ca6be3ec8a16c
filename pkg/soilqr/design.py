# -*- coding: utf-8 -*-
"""Design matrices"""
__all__ = ('Column', 'DesignMatrix', 'INTERCEPT', 'CONTINUOUS', 'DUMMY')

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from soilqr import conf
from soilqr.exceptions import DesignError


INTERCEPT = 'intercept'
CONTINUOUS = 'continuous'
DUMMY = 'dummy'


@dataclass(frozen=True)
class Column:
    """Metadata of one design column."""
    name: str
    kind: str
    source_covariate: str

    def __post_init__(self):
        if self.kind not in (INTERCEPT, CONTINUOUS, DUMMY):
            raise ValueError('Unknown column kind %r' % self.kind)


def dependent_columns(values, names, tolerance=None):
    """
    Find the columns of ``values`` that are linear combinations of others.

    A pivoted QR decomposition orders the columns by how much new direction
    they add; pivots whose ``|R_kk|`` falls below ``tolerance`` times the
    largest one are dependent. Each dependent column is mapped to the names
    of the independent columns that reproduce it.

    :returns: ``dict`` of dependent column name to a list of partner names,
        empty for a matrix of full column rank
    """
    tolerance = conf.RANK_TOLERANCE if tolerance is None else tolerance
    values = np.asarray(values, dtype=float)
    if values.shape[1] == 0:
        return {}
    r, pivots = scipy.linalg.qr(values, mode='r', pivoting=True)
    diagonal = np.abs(np.diag(r))
    if diagonal.size == 0 or diagonal[0] == 0:
        return dict((names[j], []) for j in range(values.shape[1]))
    rank = int(np.sum(diagonal > tolerance * diagonal[0]))
    # Fewer rows than columns leaves the trailing pivots without a diagonal.
    independent = sorted(pivots[:rank])
    result = {}
    for j in sorted(pivots[rank:]):
        if independent:
            coef = np.linalg.lstsq(values[:, independent], values[:, j], rcond=None)[0]
            scale = np.max(np.abs(coef)) if coef.size else 0.0
            partners = [names[k] for k, c in zip(independent, coef)
                        if abs(c) > 1e-8 * max(scale, 1.0)]
        else:
            partners = []
        result[names[j]] = partners
    return result


class DesignMatrix(object):
    """
    An ``n x (p+1)`` design matrix whose first column is the intercept.

    The matrix is validated on construction: the intercept column holds
    ones, dummy columns hold 0/1 values, and the columns are linearly
    independent, which requires ``n >= p+1``. Values are read-only.
    """

    def __init__(self, values, columns, check_rank=True):
        values = np.array(values, dtype=float)
        columns = tuple(columns)
        if values.ndim != 2 or values.shape[1] != len(columns):
            raise DesignError('expected a matrix with %i columns, got shape %s'
                              % (len(columns), values.shape))
        if not columns or columns[0].kind != INTERCEPT:
            raise DesignError('the first column must be the intercept')
        if not np.all(values[:, 0] == 1.0):
            raise DesignError('the intercept column must be all ones')
        if not np.all(np.isfinite(values)):
            raise DesignError('the matrix holds non-finite values')
        for j, column in enumerate(columns):
            if column.kind == DUMMY and not np.all((values[:, j] == 0.0) | (values[:, j] == 1.0)):
                raise DesignError("dummy column '%s' holds values other than 0 and 1" % column.name)
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise DesignError('column names are not unique')
        if check_rank:
            if values.shape[0] < values.shape[1]:
                raise DesignError('%i observations cannot identify %i coefficients'
                                  % (values.shape[0], values.shape[1]))
            dependent = dependent_columns(values, names)
            if dependent:
                raise DesignError('rank deficient; ' + '; '.join(
                    "'%s' depends on %s" % (name, ', '.join("'%s'" % p for p in partners) or 'nothing')
                    for name, partners in dependent.items()), dependent)
        values.flags.writeable = False
        self.values = values
        self.columns = columns

    @classmethod
    def intercept_only(cls, n):
        return cls(np.ones((n, 1)), [Column('(Intercept)', INTERCEPT, '')])

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        """Number of columns besides the intercept."""
        return self.values.shape[1] - 1

    @property
    def names(self):
        return [c.name for c in self.columns]

    def take(self, rows, check_rank=True):
        """
        The design restricted to ``rows`` (indices, repeats allowed).

        Raises :class:`~soilqr.exceptions.DesignError` when the selection
        no longer has full column rank.
        """
        return DesignMatrix(self.values[np.asarray(rows)], self.columns, check_rank=check_rank)

    def without_row(self, i, check_rank=True):
        return self.take(np.delete(np.arange(self.n), i), check_rank=check_rank)

    def __len__(self):
        return self.n

    def __repr__(self):
        return '<DesignMatrix %ix%i: %s>' % (self.n, self.p + 1, ', '.join(self.names))
