"""Link spectral efficiencies: quantization-aware uplink rate, zero-forcing
downlink with water-filling power allocation, and the combined link report."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantization import (per_antenna_sinr, quant_noise_cov, quant_params,
                           receive_covariance, sqnr_db_approx, sqnr_exact_db)
from .ris import RisState
from .scene import (ChannelSet, Scenario, dl_effective_channel,
                    effective_si_channel, ul_effective_channel)
from .sim import residual_si_metric, sim_precoder

ZF_MAX_COND = 1e10
POWER_FEAS_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Per-downlink-user symbol powers (linear, milliwatt-referenced)."""

    sigma_d_sq: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.sigma_d_sq, dtype=float).reshape(-1)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("symbol powers must be finite and nonnegative")
        object.__setattr__(self, "sigma_d_sq", p)

    @property
    def k_d(self) -> int:
        return self.sigma_d_sq.size


@dataclass(frozen=True, eq=False)
class PrecoderBundle:
    """Complete downlink transmit design.

    ``p_sim`` (m_t, m_d) is the semi-unitary interference-avoiding subspace,
    ``p_dl`` (m_d, k_d) the per-user precoder inside it, and ``powers`` the
    symbol power allocation.  The composite precoder is p_sim @ p_dl.
    """

    p_sim: np.ndarray
    p_dl: np.ndarray
    powers: PowerAllocation

    def __post_init__(self):
        if self.p_sim.shape[1] != self.p_dl.shape[0]:
            raise ValueError("p_sim columns must match p_dl rows")
        if self.p_dl.shape[1] != self.powers.k_d:
            raise ValueError("p_dl columns must match the number of users")

    @property
    def composite(self) -> np.ndarray:
        return self.p_sim @ self.p_dl

    def radiated_power(self) -> float:
        """trace(P diag(powers) P^H) of the composite precoder."""
        p = self.composite
        return float(np.real(np.sum(self.powers.sigma_d_sq[None, :] * np.abs(p) ** 2)))


@dataclass(frozen=True, eq=False)
class RateReport:
    """Rates and per-antenna diagnostics of one evaluated link."""

    ul_rate_bps_hz: float
    dl_rates_bps_hz: np.ndarray
    sum_rate: float
    kappa: float
    per_antenna_sinr_db: np.ndarray
    per_antenna_sqnr_db: np.ndarray          # exact ADC-output SQNR
    per_antenna_sqnr_approx_db: np.ndarray   # 6-dB-per-bit rule of thumb


def zf_precoder(h_eff: np.ndarray) -> np.ndarray:
    """Right pseudo-inverse H^H (H H^H)^-1 so that H @ P = I.

    Rejects effective channels that are rank deficient in practice
    (condition number above ``ZF_MAX_COND``).
    """
    h_eff = np.asarray(h_eff)
    if h_eff.shape[0] > h_eff.shape[1]:
        raise ValueError("more users than effective antennas, cannot zero-force")
    if np.linalg.cond(h_eff) >= ZF_MAX_COND:
        raise ValueError("effective channel is rank deficient")
    gram = h_eff @ h_eff.conj().T
    return h_eff.conj().T @ np.linalg.inv(gram)


def waterfill(gammas: np.ndarray, p_t: float, sigma_sq: float) -> PowerAllocation:
    """Water-filling over users with per-user power weights.

    Maximizes sum log2(1 + p_k / sigma_sq) subject to sum gamma_k p_k <= p_t.
    Users whose closed-form level would go negative are dropped (largest
    weight first) and the remaining set is re-solved, so the returned powers
    satisfy the budget with equality over the active users.
    """
    gammas = np.asarray(gammas, dtype=float).reshape(-1)
    if gammas.size == 0 or np.any(gammas <= 0):
        raise ValueError("weights must be positive")
    if p_t <= 0 or sigma_sq <= 0:
        raise ValueError("power budget and noise power must be positive")
    active = list(range(gammas.size))
    while True:
        g = gammas[active]
        level = (p_t + np.sum(g) * sigma_sq) / len(active)   # common water level 1/mu
        powers_active = level / g - sigma_sq
        if np.all(powers_active >= 0) or len(active) == 1:
            break
        active.remove(active[int(np.argmax(g))])
    powers = np.zeros_like(gammas)
    powers[active] = np.maximum(powers_active, 0.0)
    return PowerAllocation(powers)


def dl_rates_zf(powers: PowerAllocation, sigma_sq: float) -> np.ndarray:
    """Per-user rates log2(1 + p_k / sigma_sq) of an exactly zero-forced link."""
    return np.log2(1.0 + powers.sigma_d_sq / sigma_sq)


def dl_rates_general(channels_actual: ChannelSet, ris_actual: RisState,
                     bundle: PrecoderBundle, sigma_sq: float) -> np.ndarray:
    """Per-user downlink rates with residual inter-user interference.

    Evaluates the realized (possibly phase-deviated) effective channel against
    the fixed precoder; when the realized channel equals the design channel
    and zero-forcing is exact this reduces to :func:`dl_rates_zf`.
    """
    h_d = dl_effective_channel(channels_actual, ris_actual)
    e = h_d @ bundle.composite
    p = bundle.powers.sigma_d_sq
    signal = p * np.abs(np.diag(e)) ** 2
    total = (np.abs(e) ** 2) @ p
    interference = total - signal
    return np.log2(1.0 + signal / (interference + sigma_sq))


def ul_rate_quantized(channels: ChannelSet, ris: RisState, bundle: PrecoderBundle,
                      enob: float, sigma_u_sq: float, sigma_b_sq: float) -> float:
    """Uplink spectral efficiency through b-bit ADCs, after digital SI removal.

    The quantization noise covariance is driven by the full analog input
    (uplink signal, self-interference and thermal noise), because the damage
    is done before the known interference can be subtracted; the subtraction
    itself removes only the linear interference term.
    """
    qp = quant_params(enob)
    h_u = ul_effective_channel(channels, ris)
    r_yb = receive_covariance(channels, ris, bundle.composite,
                              bundle.powers.sigma_d_sq, sigma_u_sq, sigma_b_sq)
    q_diag = qp.alpha**2 * sigma_b_sq + qp.rho * (1.0 - qp.rho) * np.real(np.diag(r_yb))
    assert np.all(q_diag > 0), "noise covariance must be positive definite"
    whitened = h_u / np.sqrt(q_diag)[:, None]
    gram = np.eye(channels.k_u) + qp.alpha**2 * sigma_u_sq * (whitened.conj().T @ whitened)
    sign, logdet = np.linalg.slogdet(gram)
    assert sign.real > 0
    return float(logdet / math.log(2.0))


def design_downlink(channels: ChannelSet, ris: RisState, p_sim: np.ndarray,
                    scenario: Scenario) -> PrecoderBundle:
    """Zero-forcing plus water-filling inside the chosen transmit subspace.

    The per-user weights are the diagonal of (H_eff H_eff^H)^-1 of the
    subspace channel, so the water-filled powers exhaust the radiated-power
    budget exactly.
    """
    h_eff = dl_effective_channel(channels, ris) @ p_sim
    p_dl = zf_precoder(h_eff)
    gammas = np.real(np.diag(np.linalg.inv(h_eff @ h_eff.conj().T)))
    powers = waterfill(gammas, scenario.p_t_mw, scenario.noise_user_mw)
    bundle = PrecoderBundle(p_sim=p_sim, p_dl=p_dl, powers=powers)
    if bundle.radiated_power() > scenario.p_t_mw * (1 + POWER_FEAS_RTOL):
        raise ValueError("water-filled design exceeds the power budget")
    return bundle


def design_softnull(channels: ChannelSet, scenario: Scenario) -> PrecoderBundle:
    """Transmit-beamforming-only baseline: suppress SI without any RIS.

    The scene is evaluated with the RIS removed; the subspace is aimed at the
    weakest directions of the direct Tx->Rx coupling alone and the downlink
    design reuses the standard zero-forcing/water-filling path.
    """
    bare = channels.without_ris()
    ris = RisState(np.ones(channels.m_ris, dtype=complex))
    p_sim = sim_precoder(effective_si_channel(bare, ris), scenario.m_d)
    return design_downlink(bare, ris, p_sim, scenario)


def evaluate_link(channels: ChannelSet, ris_designed: RisState, ris_actual: RisState,
                  bundle: PrecoderBundle, scenario: Scenario,
                  enob: float = math.inf) -> RateReport:
    """Full rate/diagnostic report of a design on the realized channels.

    ``bundle`` must have been designed against ``ris_designed``;
    ``ris_actual`` may carry per-element phase deviations, in which case all
    rates and diagnostics are those of the realized surface while the
    precoders stay fixed (the BS cannot know the deviations).
    """
    if ris_designed.m_ris != ris_actual.m_ris or ris_actual.m_ris != channels.m_ris:
        raise ValueError("RIS states and channels disagree on the element count")
    sigma_u_sq = scenario.ul_tx_mw
    sigma_b_sq = scenario.noise_bs_mw
    ul = ul_rate_quantized(channels, ris_actual, bundle, enob, sigma_u_sq, sigma_b_sq)
    dl = dl_rates_general(channels, ris_actual, bundle, scenario.noise_user_mw)
    kappa = residual_si_metric(channels, ris_actual, bundle.p_sim)
    sinr = per_antenna_sinr(channels, ris_actual, bundle.composite,
                            bundle.powers.sigma_d_sq, sigma_u_sq, sigma_b_sq)
    sinr_db = 10.0 * np.log10(sinr)
    if enob == math.inf:
        sqnr_db = np.full(channels.m_r, math.inf)
        sqnr_approx_db = np.full(channels.m_r, math.inf)
    else:
        sqnr_db = sqnr_exact_db(sinr_db, enob)
        sqnr_approx_db = sqnr_db_approx(sinr_db, enob)
    return RateReport(
        ul_rate_bps_hz=ul,
        dl_rates_bps_hz=dl,
        sum_rate=ul + float(np.sum(dl)),
        kappa=kappa,
        per_antenna_sinr_db=sinr_db,
        per_antenna_sqnr_db=sqnr_db,
        per_antenna_sqnr_approx_db=sqnr_approx_db,
    )
