# -*- coding: utf-8 -*-
"""
Gridded prediction and map comparison.

Grids are single band, north-up and read from / written to the ESRI ASCII
grid format. A grid is an abstract affine lattice: the lower-left corner,
a square cell size and a nodata sentinel; no projection is involved.
"""
__all__ = ('Geometry', 'Raster', 'PredictionStack', 'ComparisonReport', 'back_transform',
           'transform_raster', 'linear_predictor', 'predict_grid', 'indicator_rasters', 'iqr_map',
           'bootstrap_iqr_map', 'valid_counts', 'downscale', 'harmonize', 'compare_maps')

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.stats

from soilqr import conf
from soilqr.design import INTERCEPT
from soilqr.exceptions import (DataError, GeometryMismatch, InsufficientReplicates,
                               MissingCovariateRaster, NoValidCells, RasterFormatError,
                               UnreadableFile)
from soilqr.features import LOG
from soilqr.validation import percentile


logger = logging.getLogger(__name__)

HEADER_KEYS = ('ncols', 'nrows', 'xllcorner', 'yllcorner', 'cellsize', 'nodata_value')
DEFAULT_NODATA = -9999.0

#: Cells handled at once when evaluating bootstrap replicate predictions.
CELL_BLOCK = 4096


@dataclass(frozen=True)
class Geometry:
    nrows: int
    ncols: int
    x_origin: float
    y_origin: float
    cellsize: float

    def matches(self, other):
        return (self.nrows == other.nrows and self.ncols == other.ncols
                and all(math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9 * self.cellsize)
                        for a, b in ((self.x_origin, other.x_origin),
                                     (self.y_origin, other.y_origin),
                                     (self.cellsize, other.cellsize))))

    @property
    def top(self):
        return self.y_origin + self.nrows * self.cellsize

    def __str__(self):
        return '%ix%i grid at (%g, %g), cellsize %g' % (
            self.nrows, self.ncols, self.x_origin, self.y_origin, self.cellsize)


class Raster(object):
    """
    An immutable grid of ``nrows x ncols`` values, row 0 being the northern
    edge. Cells are finite values or exactly ``nodata``.
    """

    def __init__(self, values, x_origin=0.0, y_origin=0.0, cellsize=1.0, nodata=DEFAULT_NODATA):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise DataError('A raster needs a non-empty two-dimensional array, got shape %s'
                            % (values.shape,))
        if not cellsize > 0:
            raise DataError('The cell size must be positive, got %r' % cellsize)
        # NaN marks missing cells in computed arrays.
        values[np.isnan(values)] = nodata
        if not np.all(np.isfinite(values[values != nodata])):
            raise DataError('Raster cells must be finite or nodata')
        values.flags.writeable = False
        self.values = values
        self.geometry = Geometry(values.shape[0], values.shape[1], float(x_origin),
                                 float(y_origin), float(cellsize))
        self.nodata = float(nodata)

    @classmethod
    def like(cls, geometry, values, nodata=DEFAULT_NODATA):
        """A raster on ``geometry`` holding ``values`` (NaN for nodata)."""
        return cls(values, geometry.x_origin, geometry.y_origin, geometry.cellsize, nodata)

    @property
    def valid(self):
        return self.values != self.nodata

    @property
    def data(self):
        """Cell values as floats with NaN at nodata cells."""
        return np.where(self.valid, self.values, np.nan)

    @property
    def shape(self):
        return self.values.shape

    def check_geometry(self, other):
        if not self.geometry.matches(other.geometry):
            raise GeometryMismatch(self.geometry, other.geometry)

    def __repr__(self):
        return '<Raster %s>' % self.geometry

    # =======================[ ESRI ASCII grid ]=====================

    @classmethod
    def read(cls, path):
        """
        Read an ESRI ASCII grid. Both the ``xllcorner``/``yllcorner`` and the
        ``xllcenter``/``yllcenter`` header variants are accepted.
        """
        header = {}
        try:
            with open(path, 'r', encoding='utf-8') as f:
                lines = f.read().splitlines()
        except (OSError, UnicodeDecodeError) as e:
            raise UnreadableFile(path, e)
        body = 0
        for body, line in enumerate(lines):
            parts = line.split()
            if not parts:
                continue
            key = parts[0].lower()
            if key[0].isdigit() or key[0] in '+-.':
                break
            if len(parts) != 2:
                raise RasterFormatError(path, 'malformed header line %r' % line)
            try:
                header[key] = float(parts[1])
            except ValueError:
                raise RasterFormatError(path, 'non-numeric header value %r' % line)
        else:
            body = len(lines)

        for key in ('ncols', 'nrows', 'cellsize'):
            if key not in header:
                raise RasterFormatError(path, "missing header key '%s'" % key)
        nrows, ncols, cellsize = int(header['nrows']), int(header['ncols']), header['cellsize']
        half = cellsize / 2.0
        try:
            x = header['xllcorner'] if 'xllcorner' in header else header['xllcenter'] - half
            y = header['yllcorner'] if 'yllcorner' in header else header['yllcenter'] - half
        except KeyError as e:
            raise RasterFormatError(path, 'missing header key %s' % e)
        nodata = header.get('nodata_value', DEFAULT_NODATA)

        try:
            values = np.array(' '.join(lines[body:]).split(), dtype=float)
        except ValueError:
            raise RasterFormatError(path, 'non-numeric cell values')
        if values.size != nrows * ncols:
            raise RasterFormatError(path, 'expected %i values for %i rows and %i columns, found %i'
                                    % (nrows * ncols, nrows, ncols, values.size))
        values = values.reshape(nrows, ncols)
        if not np.all(np.isfinite(values)):
            raise RasterFormatError(path, 'non-finite cell values')
        return cls(values, x, y, cellsize, nodata)

    def write(self, path):
        g = self.geometry
        fmt = conf.RASTER_FLOAT_FORMAT
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write('ncols %i\nnrows %i\n' % (g.ncols, g.nrows))
            f.write(('xllcorner %s\nyllcorner %s\ncellsize %s\nNODATA_value %s\n')
                    % tuple(fmt % v for v in (g.x_origin, g.y_origin, g.cellsize, self.nodata)))
            np.savetxt(f, self.values, fmt=fmt, delimiter=' ')
        return path


def back_transform(values, transform):
    """Map linear predictor values to the response scale."""
    return np.exp(values) if transform == LOG else values


def transform_raster(raster, transform):
    """
    Apply a covariate transform to the cells of ``raster``. Under the log
    transform, cells that are not positive become nodata.
    """
    if transform != LOG:
        return raster
    data = raster.data
    positive = data > 0
    values = np.full(data.shape, np.nan)
    values[positive] = np.log(data[positive])
    if (raster.valid & ~positive).any():
        logger.info("%i cells are not positive under the log transform and become nodata",
                    int((raster.valid & ~positive).sum()))
    return Raster.like(raster.geometry, values, raster.nodata)


# =======================[ Prediction ]=====================

def _covariate_rasters(columns, rasters, template=None):
    stack = []
    geometry = template.geometry if template is not None else None
    for column in columns:
        if column.kind == INTERCEPT:
            continue
        try:
            raster = rasters[column.name]
        except KeyError:
            raise MissingCovariateRaster(column.name)
        if geometry is None:
            geometry = raster.geometry
        elif not geometry.matches(raster.geometry):
            raise GeometryMismatch(geometry, raster.geometry)
        stack.append(raster)
    if geometry is None:
        raise DataError('An intercept-only prediction needs a template raster for its grid')
    return stack, geometry


def _cell_design(columns, rasters, template=None):
    """``(cells x columns matrix of valid cells, validity mask, geometry)``"""
    stack, geometry = _covariate_rasters(columns, rasters, template)
    valid = np.ones((geometry.nrows, geometry.ncols), dtype=bool)
    for raster in stack + ([template] if template is not None else []):
        valid &= raster.valid
    blocks = [np.ones((int(valid.sum()), 1))] + [r.values[valid][:, None] for r in stack]
    return np.hstack(blocks), valid, geometry


def linear_predictor(beta, columns, rasters, template=None):
    """
    The linear predictor ``beta . x(cell)`` as a raster. Cells where any
    covariate (or the template) is nodata are nodata.
    """
    cells, valid, geometry = _cell_design(columns, rasters, template)
    values = np.full(valid.shape, np.nan)
    values[valid] = cells @ np.asarray(beta, dtype=float)
    return Raster.like(geometry, values)


def predict_grid(fit, columns, rasters, schema=None, template=None):
    """
    Map a quantile fit over covariate rasters.

    :param fit: fitted coefficients (:class:`~soilqr.quantreg.QuantileFit`)
    :param columns: design columns the coefficients belong to
    :param dict rasters: one raster per non-intercept column, keyed by
        column name, all with the same geometry
    :param schema: when the response is log transformed, the prediction is
        exponentiated, which is exact for quantiles
    :param template: optional raster fixing the grid and an extra nodata mask
    """
    eta = linear_predictor(fit.beta, columns, rasters, template)
    transform = schema.response.transform if schema is not None else None
    if transform != LOG:
        return eta
    return Raster.like(eta.geometry, back_transform(eta.data, transform))


def indicator_rasters(classes, covariate, encoding, codes=None):
    """
    Expand a raster of class codes into the 0/1 rasters of the dummy
    columns of ``covariate``.

    :param Raster classes: class code per cell
    :param CategoricalEncoding encoding: the encoding of the fitted design
    :param dict codes: class name to raster code, default ``float(name)``

    Cells of classes the model does not know (pruned or unseen) are nodata.
    """
    baseline, kept = encoding.levels[covariate]
    codes = codes or {}
    try:
        code = dict((level, float(codes.get(level, level))) for level in (baseline,) + kept)
    except ValueError as e:
        raise DataError("No raster code for a class of '%s': %s" % (covariate, e))
    known = classes.valid & np.isin(classes.values, list(code.values()))
    result = {}
    for level in kept:
        values = np.where(classes.values == code[level], 1.0, 0.0)
        values[~known] = np.nan
        result['%s=%s' % (covariate, level)] = Raster.like(classes.geometry, values)
    return result


@dataclass
class PredictionStack:
    """Quantile maps and their bootstrap IQR maps, keyed by level."""
    quantiles: dict
    iqr: dict = field(default_factory=dict)

    def __post_init__(self):
        layers = list(self.quantiles.values()) + list(self.iqr.values())
        if not layers:
            return
        first = layers[0]
        for layer in layers[1:]:
            first.check_geometry(layer)
            if not np.array_equal(first.valid, layer.valid):
                raise DataError('Prediction layers have different nodata masks')

    @property
    def taus(self):
        return sorted(self.quantiles)

    def write(self, directory):
        """Write ``quantile_<tau>.asc`` and ``iqr_<tau>.asc`` files; returns their paths."""
        paths = []
        for name, layers in (('quantile', self.quantiles), ('iqr', self.iqr)):
            for tau in sorted(layers):
                path = os.path.join(directory, '%s_%.3f.asc' % (name, tau))
                paths.append(layers[tau].write(path))
        return paths


def iqr_map(replicates):
    """
    Interquartile range across replicate maps, per cell. A cell that is
    nodata in any replicate is nodata.
    """
    replicates = list(replicates)
    if len(replicates) < 4:
        raise InsufficientReplicates(len(replicates), 4)
    first = replicates[0]
    for raster in replicates[1:]:
        first.check_geometry(raster)
    stack = np.stack([r.data for r in replicates])
    valid = ~np.isnan(stack).any(axis=0)
    values = np.full(valid.shape, np.nan)
    cells = stack[:, valid]
    values[valid] = percentile(cells, 0.75) - percentile(cells, 0.25)
    return Raster.like(first.geometry, values)


def bootstrap_iqr_map(ensemble, columns, rasters, schema=None, template=None):
    """
    The IQR map of the prediction maps of every bootstrap replicate in
    ``ensemble``, evaluated a block of cells at a time instead of building
    each replicate map.
    """
    draws = ensemble.valid_draws
    if len(draws) < 4:
        raise InsufficientReplicates(len(draws), 4)
    cells, valid, geometry = _cell_design(columns, rasters, template)
    transform = schema.response.transform if schema is not None else None
    iqr = np.empty(cells.shape[0])
    for start in range(0, cells.shape[0], CELL_BLOCK):
        # cells x replicates
        eta = cells[start:start + CELL_BLOCK] @ draws.T
        q25 = percentile(eta, 0.25, axis=1)
        q75 = percentile(eta, 0.75, axis=1)
        # Order statistics commute with the monotone back transform.
        iqr[start:start + CELL_BLOCK] = back_transform(q75, transform) - back_transform(q25, transform)
    values = np.full(valid.shape, np.nan)
    values[valid] = iqr
    return Raster.like(geometry, values)


# =======================[ Resolution ]=====================

def _blocks(raster, k):
    """Fine cells padded with NaN and grouped as ``(rows, k, cols, k)`` blocks."""
    if int(k) != k or k < 1:
        raise DataError('The downscale factor must be a positive integer, got %r' % k)
    k = int(k)
    g = raster.geometry
    rows, cols = -(-g.nrows // k), -(-g.ncols // k)
    padded = np.full((rows * k, cols * k), np.nan)
    padded[:g.nrows, :g.ncols] = raster.data
    return padded.reshape(rows, k, cols, k), k


def valid_counts(raster, k):
    """Number of valid fine cells in each ``k x k`` block."""
    blocks, k = _blocks(raster, k)
    return (~np.isnan(blocks)).sum(axis=(1, 3))


def downscale(raster, k):
    """
    Aggregate ``k x k`` blocks of cells into one cell holding the mean of
    their valid cells.

    Blocks are aligned on the north-west corner; trailing partial blocks
    average the cells they have, and the lower-left corner moves so that the
    northern and western edges stay in place. A block without valid cells
    is nodata.
    """
    blocks, k = _blocks(raster, k)
    counts = (~np.isnan(blocks)).sum(axis=(1, 3))
    sums = np.nansum(blocks, axis=(1, 3))
    values = np.full(counts.shape, np.nan)
    np.divide(sums, counts, out=values, where=counts > 0)
    g = raster.geometry
    cellsize = g.cellsize * k
    return Raster(values, g.x_origin, g.top - counts.shape[0] * cellsize, cellsize, raster.nodata)


def harmonize(rasters):
    """
    Bring maps of different resolutions to the coarsest cell size among
    them by :func:`downscale`. Cell sizes must be integer multiples of each
    other and the results must share one grid.

    :param dict rasters: name to :class:`Raster`
    :returns: dict of name to the downscaled rasters
    """
    coarsest = max(r.geometry.cellsize for r in rasters.values())
    result = {}
    for name, raster in rasters.items():
        ratio = coarsest / raster.geometry.cellsize
        k = int(round(ratio))
        if abs(ratio - k) > 1e-9 * ratio:
            raise GeometryMismatch(raster.geometry, 'a grid with cellsize %g' % coarsest)
        result[name] = downscale(raster, k) if k > 1 else raster
        if k > 1:
            logger.info("Downscaled '%s' by a factor %i to cellsize %g", name, k, coarsest)
    rasters = list(result.values())
    for raster in rasters[1:]:
        rasters[0].check_geometry(raster)
    return result


# =======================[ Comparison ]=====================

@dataclass
class ComparisonReport:
    """
    Statistics comparing map ``a`` to map ``b`` over their jointly valid
    cells. Residuals are ``a - b``.
    """
    qq_pairs: np.ndarray
    residual_stats: dict
    density_bins: np.ndarray
    a_edges: np.ndarray
    b_edges: np.ndarray
    fit_through_origin_slope: float
    rmse: float
    mae: float
    pearson_r: float
    ols_intercept: float
    ols_slope: float

    def write(self, directory):
        """Write ``qq.csv``, ``residuals_summary.csv`` and ``density_bins.csv``."""
        fmt = conf.RASTER_FLOAT_FORMAT
        qq = pd.DataFrame(self.qq_pairs, columns=['a', 'b'])
        summary = dict(self.residual_stats)
        summary.update(fit_through_origin_slope=self.fit_through_origin_slope, rmse=self.rmse,
                       mae=self.mae, pearson_r=self.pearson_r, ols_intercept=self.ols_intercept,
                       ols_slope=self.ols_slope)
        summary = pd.DataFrame({'statistic': list(summary), 'value': list(summary.values())})
        i, j = np.indices(self.density_bins.shape)
        density = pd.DataFrame({
            'a_lo': self.a_edges[i.ravel()], 'a_hi': self.a_edges[i.ravel() + 1],
            'b_lo': self.b_edges[j.ravel()], 'b_hi': self.b_edges[j.ravel() + 1],
            'count': self.density_bins.ravel().astype(int),
        })
        paths = []
        for name, frame in (('qq.csv', qq), ('residuals_summary.csv', summary),
                            ('density_bins.csv', density)):
            path = os.path.join(directory, name)
            frame.to_csv(path, index=False, float_format=fmt, lineterminator='\n')
            paths.append(path)
        return paths


def compare_maps(a, b, bins=None):
    """
    Compare two maps of identical geometry (see :func:`harmonize`).

    :returns: :class:`ComparisonReport` with the quantile-quantile pairs,
        residual statistics, a ``bins x bins`` density histogram of the
        cell pairs and the slope of the line through the origin fitting
        ``a`` on ``b``
    """
    bins = conf.DENSITY_BINS if bins is None else bins
    a.check_geometry(b)
    joint = a.valid & b.valid
    if not joint.any():
        raise NoValidCells()
    av = a.values[joint]
    bv = b.values[joint]
    residuals = av - bv

    residual_stats = {
        'count': int(residuals.size),
        'mean': float(residuals.mean()),
        'median': float(percentile(residuals, 0.5)),
        'sd': float(residuals.std(ddof=1)) if residuals.size > 1 else 0.0,
        'min': float(residuals.min()),
        'max': float(residuals.max()),
    }
    density, a_edges, b_edges = np.histogram2d(av, bv, bins=bins)
    bb = float(bv @ bv)
    slope = float(av @ bv) / bb if bb > 0 else float('nan')
    if np.ptp(av) > 0 and np.ptp(bv) > 0:
        line = scipy.stats.linregress(bv, av)
        ols_intercept, ols_slope, pearson_r = float(line.intercept), float(line.slope), float(line.rvalue)
    else:
        ols_intercept = ols_slope = pearson_r = float('nan')

    return ComparisonReport(
        qq_pairs=np.column_stack([np.sort(av), np.sort(bv)]),
        residual_stats=residual_stats,
        density_bins=density,
        a_edges=a_edges,
        b_edges=b_edges,
        fit_through_origin_slope=slope,
        rmse=float(np.sqrt(np.mean(residuals ** 2))),
        mae=float(np.mean(np.abs(residuals))),
        pearson_r=pearson_r,
        ols_intercept=ols_intercept,
        ols_slope=ols_slope,
    )
