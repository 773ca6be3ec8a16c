# -*- coding: utf-8 -*-
"""Declared Exceptions"""


class SoilQRException(Exception):
    #: Exit status of the command line when this error ends a run.
    exit_code = 1


# ==========[ Configuration exceptions ]==========

class ConfigurationError(SoilQRException):
    exit_code = 2


class SchemaError(ConfigurationError):
    pass


class MissingColumn(SchemaError):
    def __init__(self, column, source):
        SchemaError.__init__(self, "Column '%s' declared in the schema is missing from %s"
                % (column, source))
        self.column = column


class DomainError(ConfigurationError, ValueError):
    def __init__(self, name, value, domain='(0, 1)'):
        ConfigurationError.__init__(self, "%s=%r is outside %s" % (name, value, domain))


class SpecError(ConfigurationError):
    pass


# ==========[ Data exceptions ]==========

class DataError(SoilQRException):
    exit_code = 3


class UnreadableFile(DataError):
    def __init__(self, path, reason):
        DataError.__init__(self, "Cannot read %s: %s" % (path, reason))
        self.path = path


class EmptyDatasetError(DataError):
    def __init__(self, source):
        DataError.__init__(self, "No usable observations in %s" % source)


class ZeroVarianceError(DataError):
    def __init__(self, covariate):
        DataError.__init__(self, "Covariate '%s' has zero variance" % covariate)
        self.covariate = covariate


class SingleClassError(DataError):
    def __init__(self, covariate, level):
        DataError.__init__(self, "Categorical covariate '%s' has the single class '%s'; "
                "no contrast is possible" % (covariate, level))
        self.covariate = covariate


class TransformError(DataError):
    def __init__(self, variable, rows):
        DataError.__init__(self, "Log transform of '%s' needs positive values; offending rows: %s"
                % (variable, ', '.join(str(r) for r in rows)))
        self.variable = variable
        self.rows = list(rows)


class RasterFormatError(DataError):
    def __init__(self, source, description):
        DataError.__init__(self, "Invalid ASCII grid %s: %s" % (source, description))


class GeometryMismatch(DataError):
    def __init__(self, first, second):
        DataError.__init__(self, "Raster geometries differ: %s != %s" % (first, second))


class MissingCovariateRaster(DataError):
    def __init__(self, column):
        DataError.__init__(self, "No covariate raster for design column '%s'" % column)
        self.column = column


class NoValidCells(DataError):
    def __init__(self):
        DataError.__init__(self, "The maps have no jointly valid cells")


class InsufficientReplicates(DataError):
    def __init__(self, count, required):
        DataError.__init__(self, "%i replicate maps given, at least %i required" % (count, required))


# ==========[ Numerical exceptions ]==========

class NumericalError(SoilQRException):
    exit_code = 4


class DesignError(NumericalError):
    """
    Raised for a design matrix that cannot identify its coefficients.
    ``dependent`` maps each dependent column to the columns it is a
    combination of.
    """
    def __init__(self, description, dependent=None):
        NumericalError.__init__(self, 'Invalid design matrix: ' + description)
        self.dependent = dependent or {}


class QuantileFitFailed(NumericalError):
    def __init__(self, tau, cause):
        NumericalError.__init__(self, "Quantile fit at tau=%s failed: %s" % (tau, cause))
        self.tau = tau
        self.cause = cause


class FoldFailureError(NumericalError):
    def __init__(self, skipped, total, limit):
        NumericalError.__init__(self, "%i of %i leave-one-out folds are rank deficient "
                "(at most %.1f%% may be skipped)" % (skipped, total, 100 * limit))


class EnumerationError(NumericalError):
    def __init__(self):
        NumericalError.__init__(self, "Every candidate subset of observations is degenerate")


class SolverError(NumericalError):
    pass


# ==========[ Workflow exceptions ]==========

class TransitionException(SoilQRException):
    pass


class UnknownTransition(TransitionException):
    def __init__(self, instance, transition):
        TransitionException.__init__(self, "Unknown transition '%s' on %s" %
                    (transition, instance.__class__.__name__))


class TransitionCannotStart(TransitionException):
    def __init__(self, instance, transition):
        TransitionException.__init__(self, "Transition '%s' on %s cannot start in the state '%s'" %
                    (transition, instance.__class__.__name__, instance.state))


class MachineDefinitionException(SoilQRException):
    def __init__(self, machine, description):
        SoilQRException.__init__(self, 'Error in state machine definition: ' + description)


class UnknownState(SoilQRException):
    def __init__(self, state):
        SoilQRException.__init__(self, 'State "%s" does not exist' % state)
