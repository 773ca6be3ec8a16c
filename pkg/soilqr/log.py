# -*- coding: utf-8 -*-
"""Step log and run manifest"""
__all__ = ('StepRecordMachine', 'StepRecord', 'file_sha256', 'package_versions', 'write_manifest')

import hashlib
import json
import os
from importlib import metadata

from soilqr import __version__
from soilqr.exceptions import TransitionCannotStart, UnknownTransition
from soilqr.machine import StateDefinition, StateMachine, StateTransition


class StepRecordMachine(StateMachine):
    """
    A :class:`~soilqr.machine.StateMachine` for step log entries.
    """
    # Logging the transitions of a log entry would nest forever.
    log_transitions = False

    class step_initiated(StateDefinition):
        description = 'Step initiated'
        initial = True

    class step_started(StateDefinition):
        description = 'Step started'

    class step_failed(StateDefinition):
        description = 'Step failed'

    class step_completed(StateDefinition):
        description = 'Step completed'

    class start(StateTransition):
        from_state = 'step_initiated'
        to_state = 'step_started'
        description = 'Start step'

    class complete(StateTransition):
        from_state = 'step_started'
        to_state = 'step_completed'
        description = 'Complete step'

    class fail(StateTransition):
        from_states = ('step_initiated', 'step_started')
        to_state = 'step_failed'
        description = 'Mark step as failed'


class StepRecord(object):
    """
    The log entry of one workflow transition.

    :param machine: the workflow machine the transition belongs to
    :param str transition: the transition name
    :param dict kwargs: the keyword arguments of the transition; kept
        serialized, or ``null`` when they do not serialize
    """

    def __init__(self, machine, transition, from_state, to_state, kwargs=None):
        self.machine = machine
        self.transition = transition
        self.from_state = from_state
        self.to_state = to_state
        self.state = StepRecordMachine.initial_state
        try:
            self.serialized_kwargs = json.dumps(kwargs or {}, sort_keys=True)
        except TypeError:
            self.serialized_kwargs = json.dumps(None)
        #: Counts and choices reported by the step handler.
        self.details = {}
        self.error = None

    @property
    def kwargs(self):
        return json.loads(self.serialized_kwargs) or {}

    @property
    def completed(self):
        return self.state == 'step_completed'

    @property
    def from_state_description(self):
        return self.machine.get_state(self.from_state).description

    @property
    def to_state_description(self):
        return self.machine.get_state(self.to_state).description

    @property
    def transition_description(self):
        return self.machine.get_transitions(self.transition).description

    def make_transition(self, transition, error=None):
        """
        Move the record along :class:`StepRecordMachine`.
        """
        if not StepRecordMachine.has_transition(transition):
            raise UnknownTransition(self, transition)
        t = StepRecordMachine.get_transitions(transition)
        if self.state not in t.from_states:
            raise TransitionCannotStart(self, transition)
        self.state = t.to_state
        if error is not None:
            self.error = '%s: %s' % (type(error).__name__, error)

    def as_dict(self):
        return {
            'transition': self.transition,
            'from_state': self.from_state,
            'to_state': self.to_state,
            'kwargs': self.kwargs,
            'state': self.state,
            'details': self.details,
            'error': self.error,
        }

    def __str__(self):
        return '<Step %s from "%s" to "%s" (%s)>' % (
            self.transition, self.from_state, self.to_state,
            StepRecordMachine.get_state(self.state).description)


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def package_versions():
    versions = {'soilqr': __version__}
    for name in ('numpy', 'scipy', 'pandas', 'joblib', 'Django', 'PyYAML'):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def write_manifest(path, command, config_sha256, settings, seed, steps, outputs):
    """
    Write the run manifest: what ran, on which configuration and inputs,
    and the digests of the files it produced. Output paths are recorded
    relative to the manifest's directory.
    """
    directory = os.path.dirname(os.path.abspath(path))
    manifest = {
        'command': command,
        'config_sha256': config_sha256,
        'settings': settings,
        'seed': seed,
        'versions': package_versions(),
        'steps': [step.as_dict() for step in steps],
        'outputs': [{'file': os.path.relpath(os.path.abspath(p), directory).replace(os.sep, '/'),
                     'sha256': file_sha256(p)} for p in outputs],
    }
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write('\n')
    return path
