# -*- coding: utf-8 -*-
"""
Declarative state machines.

A machine is a class holding :class:`StateDefinition` and
:class:`StateTransition` subclasses. Its metaclass checks the definitions
and collects them into ``states``, ``transitions`` and ``initial_state``.
The workflow of a modeling run (:mod:`soilqr.workflow`) and the entries of
its step log (:mod:`soilqr.log`) are both machines.
"""
__all__ = ('StateMachine', 'StateDefinition', 'StateTransition')

import logging

from soilqr.exceptions import MachineDefinitionException, UnknownState


logger = logging.getLogger(__name__)


def _install_handler(c, attrs, kind):
    # Handlers receive the definition class and the object moving through
    # the machine.
    handler = attrs.get('handler')
    if handler is None:
        return
    if handler.__code__.co_argcount < 2:
        raise MachineDefinitionException(c, '%s handler needs at least two arguments' % kind)
    attrs['handler'] = classmethod(handler)


class StateMachineMeta(type):
    def __new__(c, name, bases, attrs):
        """
        Collect the states and transitions of a machine and check that the
        transitions only refer to defined states.
        """
        states = dict((k, v) for k, v in attrs.items() if isinstance(v, StateDefinitionMeta))
        transitions = dict((k, v) for k, v in attrs.items() if isinstance(v, StateTransitionMeta))
        initial = [k for k, v in states.items() if v.initial]

        # The base class defines nothing.
        if bases:
            if len(initial) != 1:
                raise MachineDefinitionException(
                    c, 'Machine %s needs exactly one initial state, found %i' % (name, len(initial)))
            for t in transitions.values():
                for state in t.from_states + (t.to_state,):
                    if state not in states:
                        raise MachineDefinitionException(
                            c, "Transition '%s' refers to unknown state '%s'" % (t.get_name(), state))
                t.to_state_description = states[t.to_state].description
            logger.debug('Machine %s: %i states, %i transitions', name, len(states), len(transitions))

        attrs['states'] = states
        attrs['transitions'] = transitions
        attrs['initial_state'] = initial[0] if initial else None
        return type.__new__(c, name, bases, attrs)

    def has_transition(self, transition_name):
        return transition_name in self.transitions

    def get_transitions(self, transition_name):
        """
        The transition called ``transition_name``; raises :class:`KeyError`
        when there is none.
        """
        return self.transitions[transition_name]

    def get_state(self, state_name):
        """
        The :class:`StateDefinition` called ``state_name``; raises
        :class:`~soilqr.exceptions.UnknownState` when there is none.
        """
        try:
            return self.states[state_name]
        except KeyError:
            raise UnknownState(state_name)

    def possible_transitions(self, state_name):
        """Names of the transitions that can start in ``state_name``, sorted."""
        self.get_state(state_name)
        return sorted(name for name, t in self.transitions.items() if state_name in t.from_states)


class StateDefinitionMeta(type):
    def __new__(c, name, bases, attrs):
        if bases:
            if name.lower() != name:
                raise MachineDefinitionException(c, 'State names are lowercase, got %s' % name)
            if 'description' not in attrs:
                raise MachineDefinitionException(c, 'State %s has no description' % name)
        _install_handler(c, attrs, 'State')
        return type.__new__(c, name, bases, attrs)


class StateTransitionMeta(type):
    def __new__(c, name, bases, attrs):
        """
        A transition names its source as ``from_state`` or ``from_states``;
        either way the class ends up with a ``from_states`` tuple.
        """
        if bases:
            if 'from_state' in attrs:
                if 'from_states' in attrs:
                    raise MachineDefinitionException(
                        c, 'Transition %s sets both from_state and from_states' % name)
                attrs['from_states'] = (attrs.pop('from_state'),)
            for required in ('from_states', 'to_state', 'description'):
                if required not in attrs:
                    raise MachineDefinitionException(c, 'Transition %s has no %s' % (name, required))
            attrs['from_states'] = tuple(attrs['from_states'])
        _install_handler(c, attrs, 'Transition')
        return type.__new__(c, name, bases, attrs)

    def __str__(self):
        return '%s: (from %s to %s)' % (self.description, ' or '.join(self.from_states), self.to_state)


class StateMachine(metaclass=StateMachineMeta):
    """
    Base class of machine definitions.
    """

    #: Keep a step log of the transitions.
    log_transitions = True


class StateDefinition(metaclass=StateDefinitionMeta):
    """
    Base class of state definitions. The class name is the state name.
    """

    #: Exactly one state of a machine is initial.
    initial = False

    def handler(cls, instance):
        """Runs once ``instance`` has arrived in this state."""

    @classmethod
    def get_name(cls):
        return cls.__name__


class StateTransition(metaclass=StateTransitionMeta):
    """
    Base class of transitions. The class name is the transition name.
    """

    def handler(cls, instance, **kwargs):
        """The work of the transition; ``instance`` is still in the source state."""

    @classmethod
    def get_name(cls):
        return cls.__name__
