"""Conjugate-gradient descent on the product of complex circles.

The feasible set is the set of complex vectors with unit-modulus entries.
Tangent vectors at d satisfy Re(v * conj(d)) = 0 elementwise; the retraction
renormalizes each entry back to the unit circle.

Gradient convention: oracles return the conjugate-coordinate (Wirtinger)
gradient, grad_i = d cost / d conj(d_i).  The real directional derivative of
the cost along a perturbation v is then 2 Re(grad^H v); finite-difference
checks of an oracle must include that factor of two.  The optimizer only ever
uses gradients through descent tests and relative comparisons, so the overall
constant does not affect the iterates' trajectory semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

ON_MANIFOLD_TOL = 1e-9
_RETRACT_EPS = 1e-14
_TINY = 1e-300


class RetractionError(ValueError):
    """A step moved some entry (numerically) onto the circle's center."""


@dataclass
class RcgOptions:
    """Stopping and line-search knobs for the conjugate-gradient loop.

    ``armijo_grow`` scales the previous accepted step up to seed the next
    line search (still shrunk geometrically from there until the sufficient
    decrease test passes); set it to 0 to restart every search at step 1.
    """

    max_iters: int = 500
    grad_tol: float = 1e-8
    cost_rel_tol: float = 1e-12
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    armijo_max_backtracks: int = 50
    armijo_grow: float = 2.0

    def __post_init__(self):
        if self.max_iters < 1 or self.grad_tol <= 0 or self.cost_rel_tol <= 0:
            raise ValueError("iteration and tolerance options must be positive")
        if not (0.0 < self.armijo_c < 1.0 and 0.0 < self.armijo_shrink < 1.0):
            raise ValueError("armijo_c and armijo_shrink must lie in (0, 1)")
        if self.armijo_max_backtracks < 1 or self.armijo_grow < 0:
            raise ValueError("bad line-search budget")


def _check_on_manifold(d: np.ndarray):
    if np.max(np.abs(np.abs(d) - 1.0)) > ON_MANIFOLD_TOL:
        raise ValueError("point is not on the unit-modulus manifold")


def project_tangent(g: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Orthogonal projection of g onto the tangent space at d.

    Removes the radial component of every entry: g - Re(g conj(d)) * d.
    """
    _check_on_manifold(d)
    return g - np.real(g * np.conj(d)) * d


def transport(v: np.ndarray, d_new: np.ndarray) -> np.ndarray:
    """Carry a tangent vector to the tangent space at d_new (re-projection)."""
    _check_on_manifold(d_new)
    return v - np.real(v * np.conj(d_new)) * d_new


def fletcher_reeves_beta(g_new: np.ndarray, g_prev_transported: np.ndarray) -> float:
    """Conjugate-direction momentum: ratio of successive squared gradient norms."""
    denom = float(np.sum(np.abs(g_prev_transported) ** 2))
    if denom == 0.0:
        raise ZeroDivisionError("previous gradient has zero norm (already converged)")
    return float(np.sum(np.abs(g_new) ** 2)) / denom


def retract(d: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Map the ambient step d + step back onto the manifold, entrywise t/|t|."""
    t = d + step
    mag = np.abs(t)
    if np.min(mag) < _RETRACT_EPS:
        raise RetractionError("degenerate step: an entry landed on the origin")
    return t / mag


def armijo_step(cost: Callable[[np.ndarray], float], d: np.ndarray, direction: np.ndarray,
                slope: float, f0: float, opts: RcgOptions, alpha0: float = 1.0):
    """Backtracking line search with the sufficient-decrease acceptance test.

    ``slope`` is Re(grad^H direction) at d and must be strictly negative.
    Starting from ``alpha0`` the step is shrunk geometrically until
    cost(retract(d, alpha * direction)) <= f0 + armijo_c * alpha * slope;
    non-finite trial costs (infeasible points) and degenerate retractions just
    shrink further.  Returns (alpha, d_new, f_new), or None once the backtrack
    budget is exhausted (a stall the caller must handle).
    """
    if not (slope < 0.0):
        raise ValueError("not a descent direction")
    alpha = float(alpha0)
    for _ in range(opts.armijo_max_backtracks):
        try:
            d_trial = retract(d, alpha * direction)
        except RetractionError:
            alpha *= opts.armijo_shrink
            continue
        f_trial = cost(d_trial)
        if math.isfinite(f_trial) and f_trial <= f0 + opts.armijo_c * alpha * slope:
            return alpha, d_trial, f_trial
        alpha *= opts.armijo_shrink
    return None


@dataclass
class RcgResult:
    """Terminal point, per-iteration accepted costs, and the reason the loop ended."""

    d: np.ndarray
    costs: list
    stop_reason: str

    @property
    def iterations(self) -> int:
        return len(self.costs) - 1


def rcg_minimize(cost: Callable[[np.ndarray], float],
                 euclidean_grad: Callable[[np.ndarray], np.ndarray],
                 d0: np.ndarray,
                 opts: Optional[RcgOptions] = None,
                 callback: Optional[Callable] = None) -> RcgResult:
    """Minimize a smooth cost over unit-modulus vectors by conjugate gradients.

    Each iteration projects the Euclidean gradient onto the tangent space,
    combines it with the transported previous direction through the
    Fletcher-Reeves ratio, line-searches along the conjugate direction and
    retracts.  Directions that fail the descent test restart from steepest
    descent.  The loop stops on a small gradient, a small relative cost drop,
    an exhausted line search (recorded as a stall, not raised) or the
    iteration cap.  ``cost`` may return +inf to mark infeasible points; the
    line search simply shrinks past them, but d0 itself must be feasible.

    ``callback(d, riemannian_grad, direction)`` runs after every accepted
    iterate, mainly so tests can watch manifold invariants.
    """
    opts = opts or RcgOptions()
    d = np.asarray(d0, dtype=complex).reshape(-1).copy()
    _check_on_manifold(d)
    d = d / np.abs(d)

    f = cost(d)
    if not math.isfinite(f):
        raise ValueError("infeasible starting point")
    g = project_tangent(euclidean_grad(d), d)
    c = -g
    costs = [f]
    alpha_prev = 1.0
    stop_reason = "max_iters"

    for _ in range(opts.max_iters):
        gnorm_sq = float(np.sum(np.abs(g) ** 2))
        if math.sqrt(gnorm_sq) < opts.grad_tol:
            stop_reason = "grad_tol"
            break
        slope = float(np.real(np.vdot(g, c)))
        if not (slope < 0.0 and math.isfinite(slope)):
            c = -g
            slope = -gnorm_sq
        alpha0 = max(alpha_prev * opts.armijo_grow, 1.0) if opts.armijo_grow else 1.0
        step = armijo_step(cost, d, c, slope, f, opts, alpha0=alpha0)
        if step is None:
            stop_reason = "stalled"
            break
        alpha, d_new, f_new = step
        alpha_prev = alpha

        g_new = project_tangent(euclidean_grad(d_new), d_new)
        g_t = transport(g, d_new)
        c_t = transport(c, d_new)
        gt_norm_sq = float(np.sum(np.abs(g_t) ** 2))
        if gt_norm_sq == 0.0:
            d, f = d_new, f_new
            costs.append(f)
            stop_reason = "grad_tol"
            break
        beta = float(np.sum(np.abs(g_new) ** 2)) / gt_norm_sq
        c = -g_new + beta * c_t

        rel_drop = (f - f_new) / max(f, _TINY)
        d, f, g = d_new, f_new, g_new
        costs.append(f)
        if callback is not None:
            callback(d, g, c)
        if rel_drop < opts.cost_rel_tol:
            stop_reason = "cost_rel_tol"
            break

    return RcgResult(d=d, costs=costs, stop_reason=stop_reason)
