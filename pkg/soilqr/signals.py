# -*- coding: utf-8 -*-
"""Signals"""
import django.dispatch

#: Signal that is sent before a workflow step is executed. The sender is the
#: :class:`~soilqr.workflow.Run`; ``from_state`` and ``to_state`` are passed.
before_step_execute = django.dispatch.Signal()
#: Signal that is sent after a workflow step has completed
after_step_execute = django.dispatch.Signal()
