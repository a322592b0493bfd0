"""Upper-bound benchmark: ideal ADCs, full-array zero-forcing, and direct
sum-rate maximization over the RIS phases.

With infinite-resolution converters the self-interference can be subtracted
perfectly in the digital domain, so nothing constrains the transmitter and
the phase vector can chase the uplink-plus-downlink sum rate itself.  The
downlink rate has a closed form once the water-filling powers are all active,
which keeps the cost and its gradient cheap enough to feed the same
conjugate-gradient engine used for interference nulling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .manifold import RcgOptions, RcgResult, rcg_minimize
from .rates import PowerAllocation, waterfill
from .ris import RisState
from .scene import (ChannelSet, Scenario, dl_effective_channel, tagged_rng,
                    ul_effective_channel)
from .ris import random_phases

_LN2 = math.log(2.0)
_MAX_COND = 1e10


def zf_power_coeffs(h_d: np.ndarray) -> np.ndarray:
    """Per-user power weights of a full zero-forcing precoder.

    gamma_k = [(H H^H)^-1]_kk; gamma_k * p_k is what user k's stream costs
    the transmitter, so these weigh the water-filling budget.
    """
    h_d = np.asarray(h_d)
    gram = h_d @ h_d.conj().T
    if np.linalg.cond(gram) >= _MAX_COND**2:
        raise ValueError("effective channel is rank deficient")
    gammas = np.real(np.diag(np.linalg.inv(gram)))
    if np.any(gammas <= 0):
        raise ValueError("nonpositive power weight, channel is degenerate")
    return gammas


def _all_active_powers(gammas: np.ndarray, p_t: float, sigma_sq: float) -> np.ndarray:
    """Closed-form water-filling levels assuming every user stays active."""
    k_d = gammas.size
    return (p_t + np.sum(gammas) * sigma_sq) / (k_d * gammas) - sigma_sq


def closedform_dl_rate(gammas: np.ndarray, p_t: float, sigma_sq: float) -> float:
    """Downlink sum rate under zero-forcing with water-filled powers.

    Uses the all-active closed form
    K log2(p_t / sigma^2 + sum gamma) - sum log2(K gamma_k) when it is valid,
    and falls back to the active-set allocation otherwise.
    """
    gammas = np.asarray(gammas, dtype=float).reshape(-1)
    k_d = gammas.size
    if np.all(_all_active_powers(gammas, p_t, sigma_sq) >= 0):
        return float(k_d * math.log2(p_t / sigma_sq + np.sum(gammas))
                     - np.sum(np.log2(k_d * gammas)))
    powers = waterfill(gammas, p_t, sigma_sq)
    return float(np.sum(np.log2(1.0 + powers.sigma_d_sq / sigma_sq)))


def ul_rate_ideal(channels: ChannelSet, ris: RisState,
                  sigma_u_sq: float, sigma_b_sq: float) -> float:
    """Uplink capacity log2 det(I + (sigma_u^2/sigma_B^2) H_u H_u^H)."""
    h_u = ul_effective_channel(channels, ris)
    gram = np.eye(channels.k_u) + (sigma_u_sq / sigma_b_sq) * (h_u.conj().T @ h_u)
    sign, logdet = np.linalg.slogdet(gram)
    assert sign.real > 0
    return float(logdet / _LN2)


def negative_sum_rate(d: np.ndarray, channels: ChannelSet, scenario: Scenario) -> float:
    """Cost surface for the phase optimizer: -(uplink rate + downlink rate).

    Returns +inf at infeasible points (rank-deficient downlink channel, or a
    phase vector whose all-active water-filling would need a negative power),
    which makes the line search step over them instead of silently clamping.
    """
    ris = RisState(np.asarray(d))
    h_d = dl_effective_channel(channels, ris)
    try:
        gammas = zf_power_coeffs(h_d)
    except ValueError:
        return math.inf
    if np.any(_all_active_powers(gammas, scenario.p_t_mw, scenario.noise_user_mw) < 0):
        return math.inf
    r_d = closedform_dl_rate(gammas, scenario.p_t_mw, scenario.noise_user_mw)
    r_u = ul_rate_ideal(channels, ris, scenario.ul_tx_mw, scenario.noise_bs_mw)
    return -(r_u + r_d)


def negative_sum_rate_grad(d: np.ndarray, channels: ChannelSet, scenario: Scenario) -> np.ndarray:
    """Conjugate-coordinate gradient of :func:`negative_sum_rate`.

    Assembled from the three rank-structured pieces of the rate derivatives:
    an uplink term through H_u, a common downlink term through the trace of
    (H_d H_d^H)^-1, and one per-user term through each diagonal weight.  The
    convention matches :mod:`risfd.manifold`: real-coordinate finite
    differences equal twice the components returned here.
    """
    d = np.asarray(d, dtype=complex).reshape(-1)
    ris = RisState(d)
    sigma_u_sq = scenario.ul_tx_mw
    sigma_b_sq = scenario.noise_bs_mw
    sigma_sq = scenario.noise_user_mw
    p_t = scenario.p_t_mw

    # uplink piece
    h_u = ul_effective_channel(channels, ris)
    f_u = np.eye(channels.m_r) + (sigma_u_sq / sigma_b_sq) * (h_u @ h_u.conj().T)
    left = (channels.h_ru * np.sqrt(channels.gamma_u)[None, :]) @ h_u.conj().T @ np.linalg.inv(f_u)
    diag_ju = np.einsum("ij,ji->i", left, channels.h_br_r)
    grad_ru = (sigma_u_sq / sigma_b_sq) / _LN2 * np.conj(diag_ju)

    # downlink pieces
    h_d = dl_effective_channel(channels, ris)
    t = np.linalg.inv(h_d @ h_d.conj().T)
    gammas = np.real(np.diag(t))
    u = channels.h_r_bt @ h_d.conj().T @ t
    v = t @ (np.sqrt(channels.gamma_d)[:, None] * channels.h_dr)
    diag_fd = np.einsum("ik,ki->i", u, v)
    per_user = np.einsum("ik,k,ki->i", u, 1.0 / gammas, v)
    common = p_t / sigma_sq + float(np.sum(gammas))
    grad_rd = -(channels.k_d / _LN2) * np.conj(diag_fd) / common + np.conj(per_user) / _LN2

    return -(grad_ru + grad_rd)


@dataclass(frozen=True, eq=False)
class IdealDesign:
    """Phase vector, power allocation and rates of the ideal-receiver system."""

    ris: RisState
    powers: PowerAllocation
    gamma: np.ndarray
    ul_rate: float
    dl_rate: float

    @property
    def sum_rate(self) -> float:
        return self.ul_rate + self.dl_rate


def optimize_ideal(channels: ChannelSet, scenario: Scenario,
                   opts: Optional[RcgOptions] = None, seed: int = 0,
                   d0: Optional[np.ndarray] = None) -> tuple[IdealDesign, RcgResult]:
    """Maximize the ideal-receiver sum rate over the RIS phases.

    Runs the generic conjugate-gradient loop on :func:`negative_sum_rate`
    from a random feasible start (a handful of redraws guard against the
    measure-zero infeasible initialization) and finishes with the closed-form
    power allocation at the returned phases.
    """
    rng = tagged_rng(seed, "ideal_init")
    if d0 is None:
        for _ in range(16):
            d0 = random_phases(channels.m_ris, rng)
            if math.isfinite(negative_sum_rate(d0, channels, scenario)):
                break
        else:
            raise ValueError("could not find a feasible starting phase vector")
    result = rcg_minimize(lambda d: negative_sum_rate(d, channels, scenario),
                          lambda d: negative_sum_rate_grad(d, channels, scenario),
                          d0, opts or RcgOptions())
    ris = RisState(result.d)
    gammas = zf_power_coeffs(dl_effective_channel(channels, ris))
    powers = PowerAllocation(np.maximum(_all_active_powers(
        gammas, scenario.p_t_mw, scenario.noise_user_mw), 0.0))
    design = IdealDesign(
        ris=ris,
        powers=powers,
        gamma=gammas,
        ul_rate=ul_rate_ideal(channels, ris, scenario.ul_tx_mw, scenario.noise_bs_mw),
        dl_rate=closedform_dl_rate(gammas, scenario.p_t_mw, scenario.noise_user_mw),
    )
    return design, result
