# -*- coding: utf-8 -*-
"""
Linear programming solvers for quantile regression.

The quantile regression problem

    minimize  sum_i rho_tau(y_i - x_i b)

is a linear program. :func:`frisch_newton` solves its bounded dual

    maximize  y'a  subject to  X'a = (1 - tau) X'1,  0 <= a <= 1

with a primal-dual predictor-corrector interior point method; the
coefficients are the (negated) multipliers of the equality constraints.
:func:`highs` hands the primal problem to scipy's HiGHS instead.

Both solvers end in :func:`purify`, which moves the approximate solution to
the basic solution interpolating the ``p+1`` closest observations and checks
its optimality with the dual certificate of that basis.
"""
__all__ = ('Solution', 'Purified', 'frisch_newton', 'highs', 'purify')

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.optimize import linprog

from soilqr.exceptions import SolverError


logger = logging.getLogger(__name__)

#: Fraction of the distance to the boundary an interior step may cover.
STEP_FRACTION = 0.99995


@dataclass
class Solution:
    beta: np.ndarray
    iterations: int
    converged: bool


@dataclass
class Purified:
    """
    A basic solution: ``beta`` interpolates the observations in ``basis``.

    ``certified`` is set when the dual multipliers of the basis lie in
    ``[tau-1, tau]`` (the solution is optimal); ``unique`` when they lie
    strictly inside and no other observation sits on the hyperplane.
    """
    beta: np.ndarray
    residuals: np.ndarray
    basis: np.ndarray
    certified: bool
    unique: bool


def _step_length(v, dv):
    """Largest step keeping ``v + step * dv`` nonnegative."""
    shrinking = dv < 0
    if not np.any(shrinking):
        return 1e20
    return np.min(-v[shrinking] / dv[shrinking])


def _solve_normal(m, rhs):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(m, rhs, assume_a='pos')
        except (np.linalg.LinAlgError, ValueError):
            return np.linalg.lstsq(m, rhs, rcond=None)[0]


def frisch_newton(X, y, tau, gap_tolerance=1e-8, max_iterations=200):
    """
    Solve the quantile regression dual by a Frisch-Newton interior point
    method with Mehrotra's predictor-corrector steps.

    Iterations stop once the duality gap is at most ``gap_tolerance``
    relative to the dual objective (absolute below 1).

    :returns: :class:`Solution`; ``converged`` is ``False`` when
        ``max_iterations`` ran out or the iterates stopped being finite
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    A = X.T
    c = -y
    b = (1.0 - tau) * X.sum(axis=0)

    # Primal box variables x + s = 1, dual d, and the bound multipliers z, w.
    x = np.full(n, 1.0 - tau)
    s = 1.0 - x
    d = np.linalg.lstsq(X, c, rcond=None)[0]
    r = c - X @ d
    r = r + 0.001 * (r == 0)
    z = np.where(r > 0, r, 0.0)
    w = z - r
    gap = c @ x - d @ b + w.sum()

    iterations = 0
    while gap > gap_tolerance * max(1.0, abs(c @ x)) and iterations < max_iterations:
        iterations += 1
        q = 1.0 / (z / x + w / s)
        r = z - w
        M = (A * q) @ A.T

        # Affine scaling (predictor) direction
        rhs = A @ (q * r)
        dd = _solve_normal(M, rhs)
        dx = q * (A.T @ dd - r)
        ds = -dx
        dz = -z * (dx / x + 1.0)
        dw = -w * (ds / s + 1.0)
        fp = min(STEP_FRACTION * min(_step_length(x, dx), _step_length(s, ds)), 1.0)
        fd = min(STEP_FRACTION * min(_step_length(w, dw), _step_length(z, dz)), 1.0)

        if min(fp, fd) < 1.0:
            # Centering (corrector) direction
            mu = z @ x + w @ s
            g = (z + fd * dz) @ (x + fp * dx) + (w + fd * dw) @ (s + fp * ds)
            mu = mu * (g / mu) ** 3 / (2 * n)
            dxdz = dx * dz
            dsdw = ds * dw
            xinv = 1.0 / x
            sinv = 1.0 / s
            xi = mu * (xinv - sinv)
            rhs = rhs + A @ (q * (dxdz - dsdw - xi))
            dd = _solve_normal(M, rhs)
            dx = q * (A.T @ dd + xi - r - dxdz + dsdw)
            ds = -dx
            dz = mu * xinv - z - xinv * z * dx - dxdz
            dw = mu * sinv - w - sinv * w * ds - dsdw
            fp = min(STEP_FRACTION * min(_step_length(x, dx), _step_length(s, ds)), 1.0)
            fd = min(STEP_FRACTION * min(_step_length(w, dw), _step_length(z, dz)), 1.0)

        x_next = x + fp * dx
        d_next = d + fd * dd
        if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(d_next))):
            logger.warning('Interior point iterates left the finite range at iteration %i', iterations)
            return Solution(-d, iterations, False)
        x = x_next
        s = s + fp * ds
        d = d_next
        w = w + fd * dw
        z = z + fd * dz
        gap = c @ x - d @ b + w.sum()
        logger.debug('tau=%s iteration %i: duality gap %.3e', tau, iterations, gap)

    converged = gap <= gap_tolerance * max(1.0, abs(c @ x))
    return Solution(-d, iterations, bool(converged))


def highs(X, y, tau, gap_tolerance=None, max_iterations=None):
    """
    Solve the primal linear program with scipy's HiGHS solver.
    HiGHS applies its own optimality tolerances and iteration limits;
    ``gap_tolerance`` and ``max_iterations`` bound the interior point solver
    and are accepted here for a common solver signature.

    Variables are ``[b, u+, u-]`` with ``X b + u+ - u- = y`` and the
    objective ``tau * sum(u+) + (1 - tau) * sum(u-)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    cost = np.concatenate([np.zeros(k), np.full(n, tau), np.full(n, 1.0 - tau)])
    identity = scipy.sparse.identity(n, format='csr')
    A_eq = scipy.sparse.hstack([scipy.sparse.csr_matrix(X), identity, -identity], format='csr')
    bounds = [(None, None)] * k + [(0, None)] * (2 * n)
    result = linprog(cost, A_eq=A_eq, b_eq=y, bounds=bounds, method='highs')
    if result.status == 1 and result.x is not None:
        logger.warning('HiGHS reached its iteration limit at tau=%s', tau)
        return Solution(result.x[:k], int(result.nit), False)
    if result.status != 0 or result.x is None:
        raise SolverError('HiGHS failed at tau=%s: %s' % (tau, result.message))
    return Solution(result.x[:k], int(result.nit), True)


def _basis_rows(X, order, k):
    """First ``k`` rows in ``order`` that are linearly independent."""
    chosen = []
    directions = []
    for i in order:
        v = X[i].astype(float)
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        # Gram-Schmidt, applied twice
        for _ in range(2):
            for u in directions:
                v = v - (u @ v) * u
        remainder = np.linalg.norm(v)
        if remainder > 1e-8 * norm:
            directions.append(v / remainder)
            chosen.append(i)
            if len(chosen) == k:
                return np.array(chosen)
    return None


def purify(X, y, tau, beta, tolerance=1e-9):
    """
    Replace ``beta`` by the basic solution through the ``p+1`` observations
    with the smallest absolute residuals, and certify it.

    With basis ``h`` and the other rows' subgradient signs
    ``psi_i = tau - 1{r_i < 0}``, the basic solution is optimal when the
    basis multipliers ``a_h = -X_h'^{-1} sum_i psi_i x_i`` all lie in
    ``[tau - 1, tau]``. Rows lying on the hyperplane outside the basis are
    given multiplier zero, which keeps the certificate sufficient.

    :returns: :class:`Purified`, or ``None`` when no nonsingular basis exists
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    residuals = y - X @ beta
    basis = _basis_rows(X, np.argsort(np.abs(residuals), kind='stable'), k)
    if basis is None:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
        try:
            beta_h = scipy.linalg.solve(X[basis], y[basis])
        except np.linalg.LinAlgError:
            return None

    residuals = y - X @ beta_h
    scale = max(1.0, float(np.max(np.abs(y))))
    on_plane = np.abs(residuals) <= 1e-12 * scale
    on_plane[basis] = True
    residuals[on_plane] = 0.0
    ties = int(on_plane.sum()) - k

    psi = np.where(residuals < 0, tau - 1.0, tau)
    psi[on_plane] = 0.0
    multipliers = -scipy.linalg.solve(X[basis].T, X.T @ psi)
    certified = bool(np.all(multipliers >= tau - 1.0 - tolerance) and np.all(multipliers <= tau + tolerance))
    unique = certified and ties == 0 and bool(
        np.all(multipliers > tau - 1.0 + tolerance) and np.all(multipliers < tau - tolerance))
    return Purified(beta_h, residuals, basis, certified, unique)
