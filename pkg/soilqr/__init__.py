# -*- coding: utf-8 -*-
"""
Quantile regression workflow for gridded soil property prediction.

Fit linear quantile regressions over a grid of probability levels, validate
them with leave-one-out cross-validation and case-resampling bootstrap, and
turn them into per-quantile maps that can be benchmarked against other maps.
"""

__version__ = '0.3.0'
