# -*- coding: utf-8 -*-
"""Tests"""
from django.test import SimpleTestCase

from soilqr.exceptions import (MachineDefinitionException, TransitionCannotStart, UnknownState,
                               UnknownTransition)
from soilqr.log import StepRecord, StepRecordMachine
from soilqr.machine import StateDefinition, StateMachine, StateTransition
from soilqr.workflow import WorkflowMachine


class StateMachineTestCase(SimpleTestCase):

    def test_initial_states(self):
        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class running(StateDefinition):
                    description = 'running state'
                    initial = True

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'

                class running(StateDefinition):
                    description = 'running state'

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class START(StateDefinition):
                    description = 'start state'
                    initial = True

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    initial = True

    def test_transition_definitions(self):
        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class running(StateDefinition):
                    description = 'running state'

                class startup(StateTransition):
                    '''Transition from stopped to running'''
                    to_state = 'running'
                    description = 'Start up the machine!'

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class running(StateDefinition):
                    description = 'running state'

                class startup(StateTransition):
                    from_state = 'start'
                    from_states = ['start']
                    to_state = 'running'
                    description = 'Start up the machine!'

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class running(StateDefinition):
                    description = 'running state'

                class startup(StateTransition):
                    from_state = 'start'
                    description = 'Start up the machine!'

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class running(StateDefinition):
                    description = 'running state'

                class startup(StateTransition):
                    from_state = 'start'
                    to_state = 'running'

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class startup(StateTransition):
                    from_state = 'start'
                    to_state = 'crashed'
                    description = 'Start up the machine!'

        with self.assertRaises(MachineDefinitionException):
            class T1Machine(StateMachine):
                class start(StateDefinition):
                    description = 'start state'
                    initial = True

                class running(StateDefinition):
                    description = 'running state'

                    def handler(self):
                        pass

    def test_machine_functions(self):
        class T3Machine(StateMachine):
            class stopped(StateDefinition):
                description = 'stopped state'
                initial = True

            class running(StateDefinition):
                description = 'running state'

            class crashed(StateDefinition):
                description = 'crashed state'

                def handler(self, instance):
                    pass

            class startup(StateTransition):
                '''Transition from stopped to running'''
                from_state = 'stopped'
                to_state = 'running'
                description = 'Start up the machine!'

            class crash(StateTransition):
                from_states = ('stopped', 'running')
                to_state = 'crashed'
                description = 'Crash'

        self.assertEqual(T3Machine.initial_state, 'stopped')
        self.assertEqual(sorted(T3Machine.states), ['crashed', 'running', 'stopped'])
        self.assertTrue(T3Machine.has_transition('startup'))
        self.assertFalse(T3Machine.has_transition('shutdown'))
        self.assertEqual(T3Machine.get_transitions('crash').from_states, ('stopped', 'running'))
        self.assertEqual(T3Machine.get_transitions('startup').to_state_description, 'running state')
        self.assertEqual(T3Machine.possible_transitions('stopped'), ['crash', 'startup'])
        self.assertEqual(T3Machine.possible_transitions('crashed'), [])
        self.assertEqual(str(T3Machine.get_transitions('startup')),
                         'Start up the machine!: (from stopped to running)')
        with self.assertRaises(UnknownState):
            T3Machine.get_state('unknown')
        with self.assertRaises(UnknownState):
            T3Machine.possible_transitions('unknown')
        with self.assertRaises(KeyError):
            T3Machine.get_transitions('unknown')

    def test_workflow_machine(self):
        self.assertEqual(WorkflowMachine.initial_state, 'configured')
        self.assertEqual(sorted(WorkflowMachine.states),
                         ['bootstrapped', 'compared', 'configured', 'designed', 'encoded',
                          'filtered', 'fitted', 'loaded', 'predicted', 'validated'])
        self.assertEqual(WorkflowMachine.possible_transitions('fitted'),
                         ['bootstrap', 'cross_validate', 'predict'])
        self.assertEqual(WorkflowMachine.get_transitions('bootstrap').from_states,
                         ('designed', 'fitted', 'validated'))
        self.assertTrue(WorkflowMachine.log_transitions)


class StepRecordTestCase(SimpleTestCase):

    def make_record(self, **kwargs):
        return StepRecord(WorkflowMachine, 'fit', 'designed', 'fitted', kwargs)

    def test_step_lifecycle(self):
        record = self.make_record()
        self.assertEqual(record.state, StepRecordMachine.initial_state)
        self.assertFalse(record.completed)
        record.make_transition('start')
        record.make_transition('complete')
        self.assertTrue(record.completed)
        self.assertEqual(record.from_state_description, 'Design matrices built')
        self.assertEqual(record.to_state_description, 'Quantile models fitted')
        self.assertEqual(record.transition_description, 'Fit the quantile regression profile')
        self.assertIn('Step completed', str(record))

    def test_failed_step(self):
        record = self.make_record()
        record.make_transition('start')
        record.make_transition('fail', error=ValueError('boom'))
        self.assertEqual(record.state, 'step_failed')
        self.assertEqual(record.error, 'ValueError: boom')
        self.assertEqual(record.as_dict()['error'], 'ValueError: boom')

    def test_invalid_step_transitions(self):
        record = self.make_record()
        with self.assertRaises(TransitionCannotStart):
            record.make_transition('complete')
        with self.assertRaises(UnknownTransition):
            record.make_transition('restart')

    def test_kwargs(self):
        self.assertEqual(self.make_record(workers=2).kwargs, {'workers': 2})
        # Unserializable arguments are not kept.
        self.assertEqual(self.make_record(data=object()).kwargs, {})
