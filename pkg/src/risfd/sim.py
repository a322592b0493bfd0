"""Joint self-interference mitigation: transmit subspace + RIS phase design.

The residual self-interference power || G(d) P ||_F^2 is driven toward zero by
alternating two exact steps: (a) for fixed RIS phases, the optimal semi-unitary
transmit subspace is spanned by the eigenvectors of G^H G with the smallest
eigenvalues; (b) for a fixed subspace, the phase vector minimizes a plain
least-squares residual ||C d + b||^2 over unit-modulus d, solved by the
conjugate-gradient loop in :mod:`risfd.manifold`.  Finite-resolution surfaces
quantize the continuous phases each round and commit the quantized candidate
only when it beats the currently committed state, so the committed objective
never increases.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import frobenius_sq, hermitian_eig, khatri_rao, vec
from .manifold import RcgOptions, rcg_minimize
from .ris import RisState, quantize_phases, random_phases
from .scene import ChannelSet, effective_si_channel, tagged_rng


def sim_precoder(g_si: np.ndarray, m_d: int) -> np.ndarray:
    """Semi-unitary (m_t, m_d) basis of the m_d weakest directions of g_si.

    Columns are eigenvectors of g_si^H g_si belonging to the m_d smallest
    eigenvalues, so the transmitted signal leaks the least possible power
    into the receiver: || g_si P ||_F^2 equals the sum of those eigenvalues.
    """
    g_si = np.asarray(g_si)
    m_t = g_si.shape[1]
    if not (1 <= m_d <= m_t):
        raise ValueError(f"need 1 <= m_d <= m_t, got m_d={m_d}, m_t={m_t}")
    pair = hermitian_eig(g_si.conj().T @ g_si)
    return pair.vectors[:, :m_d]


def identity_subspace(m_t: int, m_d: int) -> np.ndarray:
    """First m_d columns of the identity: the no-design transmit subspace."""
    return np.eye(m_t, m_d, dtype=complex)


def ls_system(channels: ChannelSet, p_sim: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rewrite the residual-interference norm as a linear least squares in d.

    With A = h_r_bt @ p_sim and B = h_br_bt @ p_sim, returns
    C = khatri_rao(A.T, h_br_r) and b = vec(B) such that for every RIS vector
    ||C d + b||^2 == || (h_br_r diag(d) h_r_bt + h_br_bt) p_sim ||_F^2.
    """
    p_sim = np.asarray(p_sim)
    if p_sim.shape[0] != channels.m_t:
        raise ValueError(f"precoder rows {p_sim.shape[0]} != m_t {channels.m_t}")
    a = channels.h_r_bt @ p_sim
    b_mat = channels.h_br_bt @ p_sim
    return khatri_rao(a.T, channels.h_br_r), vec(b_mat)


def ls_cost(c: np.ndarray, b: np.ndarray, d: np.ndarray) -> float:
    """Squared residual ||C d + b||^2."""
    r = c @ d + b
    return float(np.real(np.vdot(r, r)))


def ls_grad(c: np.ndarray, b: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Conjugate-coordinate gradient C^H (C d + b) of :func:`ls_cost`.

    Real-coordinate finite differences of the cost equal twice the real and
    imaginary parts of this vector (see :mod:`risfd.manifold`).
    """
    return c.conj().T @ (c @ d + b)


def residual_si_metric(channels: ChannelSet, ris: RisState, p_sim: np.ndarray) -> float:
    """Residual self-interference power per receive antenna.

    kappa = || G(d) p_sim ||_F^2 / m_r; zero means the downlink signal is
    invisible to the co-located receiver.
    """
    g = effective_si_channel(channels, ris) @ np.asarray(p_sim)
    return frobenius_sq(g) / channels.m_r


@dataclass
class AoOptions:
    """Outer-loop controls for the alternating design."""

    cost_floor: float = 1e-10        # stop once the committed residual is this small
    stall_rel_tol: float = 1e-6      # relative improvement counted as progress
    stall_patience: int = 5          # consecutive no-progress rounds before giving up
    max_outer: int = 100
    rcg: RcgOptions = field(default_factory=RcgOptions)


@dataclass
class AoIteration:
    """One outer round: committed cost after each half-step plus bookkeeping."""

    index: int
    cost_after_subspace: float   # committed phases under the refreshed subspace
    cost: float                  # committed cost after the phase update
    accepted: bool               # finite bits: quantized candidate committed this round
    inner_iterations: int
    wall_s: float


@dataclass
class AoTrace:
    """Per-round history of the alternating design."""

    rounds: list = field(default_factory=list)
    stop_reason: str = "max_outer"

    @property
    def costs(self) -> list:
        return [r.cost for r in self.rounds]

    @property
    def terminal_cost(self) -> float:
        return self.rounds[-1].cost if self.rounds else math.nan

    @property
    def inner_iterations(self) -> int:
        return sum(r.inner_iterations for r in self.rounds)


def joint_sim_design(channels: ChannelSet, m_d: int, bits: float = math.inf,
                     opts: Optional[AoOptions] = None, seed: int = 0,
                     d0: Optional[np.ndarray] = None):
    """Alternating minimization of the residual self-interference power.

    Each round refreshes the transmit subspace against the committed RIS
    state, rebuilds the least-squares system, continues the conjugate-gradient
    phase optimization from the running continuous iterate and, for a finite
    ``bits``, commits the grid-quantized candidate only when it lowers the
    committed residual.  The continuous iterate always seeds the next round,
    whether or not its quantization was committed.

    Stops when the committed residual reaches ``cost_floor``, when relative
    improvement stays below ``stall_rel_tol`` for ``stall_patience``
    consecutive rounds, or at ``max_outer`` rounds; non-convergence is a
    recorded outcome, not an error.

    Returns ``(p_sim, RisState, AoTrace)`` where ``p_sim`` is refreshed once
    more against the final committed phases, so its realized residual never
    exceeds the recorded terminal cost.
    """
    opts = opts or AoOptions()
    finite = bits != math.inf
    if d0 is None:
        d0 = random_phases(channels.m_ris, tagged_rng(seed, "ris_init"))
    d_cont = np.asarray(d0, dtype=complex).reshape(-1)
    d_comm = quantize_phases(d_cont, bits) if finite else d_cont

    trace = AoTrace()
    prev_cost = math.inf
    stall = 0
    for outer in range(opts.max_outer):
        t0 = time.perf_counter()
        p_sim = sim_precoder(effective_si_channel(channels, RisState(d_comm)), m_d)
        c_mat, b = ls_system(channels, p_sim)
        cost_after_subspace = ls_cost(c_mat, b, d_comm)

        res = rcg_minimize(lambda d: ls_cost(c_mat, b, d),
                           lambda d: ls_grad(c_mat, b, d),
                           d_cont, opts.rcg)
        d_cont = res.d
        if finite:
            d_q = quantize_phases(d_cont, bits)
            cost_q = ls_cost(c_mat, b, d_q)
            accepted = cost_q < cost_after_subspace
            if accepted:
                d_comm, cost = d_q, cost_q
            else:
                cost = cost_after_subspace
        else:
            d_comm, cost, accepted = d_cont, res.costs[-1], True

        trace.rounds.append(AoIteration(
            index=outer,
            cost_after_subspace=cost_after_subspace,
            cost=cost,
            accepted=accepted,
            inner_iterations=res.iterations,
            wall_s=time.perf_counter() - t0,
        ))
        if cost <= opts.cost_floor:
            trace.stop_reason = "cost_floor"
            break
        stall = stall + 1 if (prev_cost - cost) / max(prev_cost, 1e-300) < opts.stall_rel_tol else 0
        if stall >= opts.stall_patience:
            trace.stop_reason = "stalled"
            break
        prev_cost = cost

    state = RisState(d_comm, bits=bits)
    p_sim = sim_precoder(effective_si_channel(channels, state), m_d)
    return p_sim, state, trace
