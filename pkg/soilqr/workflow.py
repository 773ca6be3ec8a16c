# -*- coding: utf-8 -*-
"""
The model building strategy as a state machine.

A :class:`Run` walks the :class:`WorkflowMachine` one transition per step:
load the observations, filter collinear covariates, encode categorical
covariates, build the design matrices, then fit, cross-validate,
bootstrap, predict and compare. Each transition is recorded in the run's
step log.
"""
__all__ = ('WorkflowMachine', 'Run')

import logging
from dataclasses import replace

from soilqr.exceptions import DesignError, SchemaError, TransitionCannotStart, UnknownTransition
from soilqr.features import (CategoricalEncoding, Dataset, EncodingReport, PreparedDesign,
                             build_design, build_simple_model, collinearity_filter,
                             encode_categoricals, pearson_matrix)
from soilqr.log import StepRecord
from soilqr.machine import StateDefinition, StateMachine, StateTransition
from soilqr.quantreg import fit_ols, fit_profile
from soilqr.raster import (PredictionStack, Raster, bootstrap_iqr_map, compare_maps, harmonize,
                           indicator_rasters, predict_grid, transform_raster)
from soilqr.signals import after_step_execute, before_step_execute
from soilqr.validation import bootstrap_profile, loocv, summarize_coefficients


logger = logging.getLogger(__name__)


class WorkflowMachine(StateMachine):
    """
    States and steps of a modeling run.
    """

    # =======================[ States ]=====================

    class configured(StateDefinition):
        description = 'Run configured'
        initial = True

    class loaded(StateDefinition):
        description = 'Observations loaded'

        def handler(cls, run):
            logger.info('Loaded %i observations from %s (%i dropped with missing values)',
                        run.data.n, run.data.source, run.data.dropped_missing)

    class filtered(StateDefinition):
        description = 'Collinear covariates removed'

    class encoded(StateDefinition):
        description = 'Categorical covariates encoded'

    class designed(StateDefinition):
        description = 'Design matrices built'

        def handler(cls, run):
            logger.info('Design: %r', run.prepared.design)

    class fitted(StateDefinition):
        description = 'Quantile models fitted'

    class validated(StateDefinition):
        description = 'Cross-validated'

    class bootstrapped(StateDefinition):
        description = 'Coefficients bootstrapped'

    class predicted(StateDefinition):
        description = 'Quantile maps predicted'

    class compared(StateDefinition):
        description = 'Maps compared with benchmarks'

    # =======================[ Transitions ]=====================

    class load(StateTransition):
        from_state = 'configured'
        to_state = 'loaded'
        description = 'Read the observation table'

        def handler(cls, run):
            config = run.config
            if not config.input:
                raise SchemaError('The run configuration names no input table')
            run.data = Dataset.from_csv(config.input, config.schema)
            run.note(rows=run.data.n, dropped_missing=run.data.dropped_missing)

    class filter_collinear(StateTransition):
        from_state = 'loaded'
        to_state = 'filtered'
        description = 'Drop collinear continuous covariates'

        def handler(cls, run):
            run.kept = run.data.schema.continuous
            run.dropped = []
            if len(run.kept) >= 2:
                corr = pearson_matrix(run.data)
                run.kept, run.dropped = collinearity_filter(corr, run.config.collinearity_threshold)
            run.note(kept=list(run.kept), dropped=[d.name for d in run.dropped])

    class encode(StateTransition):
        from_state = 'filtered'
        to_state = 'encoded'
        description = 'Dummy-code categorical covariates'

        def handler(cls, run):
            if run.data.schema.categorical:
                run.encoding, run.report = encode_categoricals(run.data, run.config.rare_threshold)
            else:
                run.encoding, run.report = CategoricalEncoding(run.data), EncodingReport()
            run.note(rows=run.encoding.data.n,
                     pruned=['%s=%s' % (p.covariate, p.level) for p in run.report.pruned_rare_classes])

    class build(StateTransition):
        from_state = 'encoded'
        to_state = 'designed'
        description = 'Assemble the design matrices'

        def handler(cls, run):
            design, response = build_design(run.data, run.kept, run.encoding)
            report = replace(run.report, dropped_collinear=tuple(run.dropped),
                             final_columns=design.columns)
            run.prepared = PreparedDesign(design, response, report, run.encoding)
            run.simple = None
            if run.data.schema.categorical:
                try:
                    run.simple = build_simple_model(run.encoding.data)
                except DesignError as e:
                    logger.warning('Simple model skipped: %s', e)
            run.note(columns=design.names, simple_model=run.simple is not None)

    class fit(StateTransition):
        from_state = 'designed'
        to_state = 'fitted'
        description = 'Fit the quantile regression profile'

        def handler(cls, run):
            config = run.config
            design, response = run.prepared.design, run.prepared.response
            run.profile = fit_profile(design, response, config.taus, config.solver, config.workers)
            run.ols = fit_ols(design, response)
            run.simple_profile = None
            if run.simple is not None:
                run.simple_profile = fit_profile(run.simple[0], run.simple[1], config.taus,
                                                 config.solver, config.workers)
            run.note(statuses=dict(('%g' % f.tau, f.solver_status) for f in run.profile))

    class cross_validate(StateTransition):
        from_states = ('designed', 'fitted')
        to_state = 'validated'
        description = 'Leave-one-out cross-validation'

        def handler(cls, run):
            config = run.config
            run.cv = loocv(run.prepared.design, run.prepared.response, config.taus, config.solver,
                           config.workers)
            run.note(folds=run.cv.scores[0].n, skipped=run.cv.scores[0].skipped_folds)

    class bootstrap(StateTransition):
        from_states = ('designed', 'fitted', 'validated')
        to_state = 'bootstrapped'
        description = 'Case-resampling bootstrap of the coefficients'

        def handler(cls, run):
            config = run.config
            kwargs = dict(taus=config.taus, B=config.bootstrap_replicates,
                          master_seed=config.master_seed, options=config.solver,
                          workers=config.workers)
            run.ensembles = bootstrap_profile(run.prepared.design, run.prepared.response, **kwargs)
            run.summary = summarize_coefficients(run.ensembles)
            run.simple_summary = None
            if run.simple is not None:
                run.simple_summary = summarize_coefficients(
                    bootstrap_profile(run.simple[0], run.simple[1], **kwargs))
            run.note(replicates=config.bootstrap_replicates,
                     failed=run.ensembles[0].failed_replicates)

    class predict(StateTransition):
        from_states = ('fitted', 'bootstrapped')
        to_state = 'predicted'
        description = 'Map the fitted quantiles over the covariate rasters'

        def handler(cls, run):
            config = run.config
            columns = run.prepared.design.columns
            rasters = run.covariate_rasters()
            template = Raster.read(config.mask) if config.mask else None
            schema = run.data.schema
            quantiles = dict((fit.tau, predict_grid(fit, columns, rasters, schema, template))
                             for fit in run.profile)
            iqr = {}
            for ensemble in run.ensembles or ():
                if len(ensemble.valid_draws) >= 4:
                    iqr[ensemble.tau] = bootstrap_iqr_map(ensemble, columns, rasters, schema, template)
            run.stack = PredictionStack(quantiles, iqr)
            run.note(layers=len(quantiles), iqr_layers=len(iqr))

    class compare(StateTransition):
        from_states = ('configured', 'predicted')
        to_state = 'compared'
        description = 'Compare the median map with benchmark maps'

        def handler(cls, run):
            config = run.config
            reference = run.reference_map()
            maps = {'reference': reference}
            for name in sorted(config.benchmarks):
                maps[name] = Raster.read(config.benchmarks[name])
            maps = harmonize(maps)
            run.comparisons = dict((name, compare_maps(maps['reference'], maps[name], config.density_bins))
                                   for name in sorted(config.benchmarks))
            run.note(benchmarks=sorted(config.benchmarks),
                     cellsize=maps['reference'].geometry.cellsize)


class Run(object):
    """
    One execution of the workflow on a
    :class:`~soilqr.runs.RunConfig`. Step results are kept as attributes.
    """
    machine = WorkflowMachine

    def __init__(self, config):
        self.config = config
        self.state = self.machine.initial_state
        self.steps = []
        self.data = None
        self.kept = None
        self.dropped = []
        self.encoding = None
        self.report = None
        self.prepared = None
        self.simple = None
        self.profile = None
        self.simple_profile = None
        self.ols = None
        self.cv = None
        self.ensembles = None
        self.summary = None
        self.simple_summary = None
        self.stack = None
        self.comparisons = None

    def __repr__(self):
        return '<Run %s>' % self.state

    @property
    def state_description(self):
        return self.machine.get_state(self.state).description

    @property
    def possible_transitions(self):
        return self.machine.possible_transitions(self.state)

    def note(self, **details):
        """Attach details to the step being executed."""
        if self.steps:
            self.steps[-1].details.update(details)

    def make_transition(self, transition, **kwargs):
        """
        Execute a workflow step.

        :param str transition: the transition name
        :param dict kwargs: passed on to the transition handler
        """
        machine = self.machine
        if not machine.has_transition(transition):
            raise UnknownTransition(self, transition)
        t = machine.get_transitions(transition)

        record = None
        if machine.log_transitions:
            record = StepRecord(machine, transition, self.state, t.to_state, kwargs)
            self.steps.append(record)

        if self.state not in t.from_states:
            if record:
                record.make_transition('fail')
            raise TransitionCannotStart(self, transition)

        if record:
            record.make_transition('start')
        try:
            from_state = self.state
            before_step_execute.send(sender=self, from_state=from_state, to_state=t.to_state)
            # The handler still sees the original state.
            t.handler(self, **kwargs)
            self.state = t.to_state
            after_step_execute.send(sender=self, from_state=from_state, to_state=t.to_state)
        except Exception as e:
            if record:
                record.make_transition('fail', error=e)
            raise
        else:
            if record:
                record.make_transition('complete')
            machine.get_state(t.to_state).handler(self)

    def run_until(self, *transitions):
        """Execute the given transitions in order."""
        for transition in transitions:
            self.make_transition(transition)
        return self

    # =======================[ Rasters ]=====================

    def covariate_rasters(self):
        """
        Rasters of the design columns: continuous covariates get their
        declared transform, categorical covariates are expanded into
        indicators.
        """
        config = self.config
        schema = self.data.schema
        rasters = {}
        for name in self.kept:
            if name in config.covariate_rasters:
                rasters[name] = transform_raster(Raster.read(config.covariate_rasters[name]),
                                                 schema.get(name).transform)
        for name in schema.categorical:
            if name in config.covariate_rasters:
                classes = Raster.read(config.covariate_rasters[name])
                rasters.update(indicator_rasters(classes, name, self.encoding,
                                                 config.class_codes.get(name)))
        return rasters

    def reference_map(self):
        """The map compared with the benchmarks: the configured reference
        map, or else the predicted median."""
        if self.config.reference_map:
            return Raster.read(self.config.reference_map)
        if self.stack is None or 0.5 not in self.stack.quantiles:
            raise SchemaError('Comparisons need a reference map or a predicted median (tau 0.5)')
        return self.stack.quantiles[0.5]
