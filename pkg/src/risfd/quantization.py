"""Additive quantization-noise model for low-resolution ADC receivers.

The quantizer output is modeled as alpha * input plus uncorrelated Gaussian
noise whose diagonal covariance is proportional to the input covariance
diagonal.  Noise vectors are never sampled; everything downstream works with
their covariances.  An infinite ENOB is a first-class value (rho = 0), so the
ideal receiver is exact rather than approximated by a huge float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ris import RisState
from .scene import ChannelSet, effective_si_channel, ul_effective_channel

_RHO_COEFF = math.pi * math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class QuantizationParams:
    """Distortion factor rho and linear gain alpha = 1 - rho of a b-bit ADC."""

    enob: float
    rho: float
    alpha: float


def quant_params(enob: float) -> QuantizationParams:
    """Distortion parameters for an ADC with the given effective number of bits.

    rho = (pi sqrt(3) / 2) * 2^(-2 enob).  Values of enob small enough to push
    rho to 1 or beyond are outside the model's validity and are rejected.
    """
    if enob == math.inf:
        return QuantizationParams(enob=math.inf, rho=0.0, alpha=1.0)
    if not (enob > 0):
        raise ValueError(f"enob must be positive, got {enob}")
    rho = _RHO_COEFF * 2.0 ** (-2.0 * enob)
    if rho >= 1.0:
        raise ValueError(f"enob={enob} gives rho={rho:.3f} >= 1, outside the model")
    return QuantizationParams(enob=float(enob), rho=rho, alpha=1.0 - rho)


def receive_covariance(channels: ChannelSet, ris: RisState, precoder: np.ndarray,
                       sigma_d_sq: np.ndarray, sigma_u_sq: float, sigma_b_sq: float) -> np.ndarray:
    """Covariance of the analog signal at the BS receive antennas, (m_r, m_r).

    Sum of the uplink-signal, self-interference and thermal-noise terms:
    sigma_u^2 H_u H_u^H + G P diag(sigma_d^2) P^H G^H + sigma_B^2 I, where
    ``precoder`` is the composite (m_t, k_d) downlink precoder.
    """
    sigma_d_sq = np.asarray(sigma_d_sq, dtype=float)
    if np.any(sigma_d_sq < 0):
        raise ValueError("downlink symbol powers must be nonnegative")
    precoder = np.asarray(precoder)
    if precoder.shape != (channels.m_t, sigma_d_sq.size):
        raise ValueError(f"precoder shape {precoder.shape} does not match "
                         f"({channels.m_t}, {sigma_d_sq.size})")
    h_u = ul_effective_channel(channels, ris)
    h_si = effective_si_channel(channels, ris) @ precoder
    r = sigma_u_sq * (h_u @ h_u.conj().T)
    r += (h_si * sigma_d_sq[None, :]) @ h_si.conj().T
    r += sigma_b_sq * np.eye(channels.m_r)
    return r


def quant_noise_cov(r_yb: np.ndarray, rho: float) -> np.ndarray:
    """Diagonal quantization-noise covariance rho (1 - rho) diag(r_yb)."""
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must be in [0, 1), got {rho}")
    r_yb = np.asarray(r_yb)
    return rho * (1.0 - rho) * np.diag(np.real(np.diag(r_yb)))


def per_antenna_sinr(channels: ChannelSet, ris: RisState, precoder: np.ndarray,
                     sigma_d_sq: np.ndarray, sigma_u_sq: float, sigma_b_sq: float) -> np.ndarray:
    """Pre-ADC signal-to-interference-plus-noise ratio per receive antenna (linear).

    Element j is r_j / (q_j + sigma_B^2) where r_j sums the uplink signal
    power and q_j the residual self-interference power landing on antenna j.
    """
    sigma_d_sq = np.asarray(sigma_d_sq, dtype=float)
    h_u = ul_effective_channel(channels, ris)
    h_si = effective_si_channel(channels, ris) @ np.asarray(precoder)
    r = sigma_u_sq * np.sum(np.abs(h_u) ** 2, axis=1)
    q = np.sum(sigma_d_sq[None, :] * np.abs(h_si) ** 2, axis=1)
    return r / (q + sigma_b_sq)


def sqnr_exact(sinr: np.ndarray | float, enob: float):
    """Exact signal-to-quantization-noise ratio (linear) at the ADC output.

    SQNR = 1 / (rho (1 - rho)) * 1 / (1 + 1/SINR).  Infinite for an ideal ADC.
    """
    qp = quant_params(enob)
    sinr = np.asarray(sinr, dtype=float)
    if qp.rho == 0.0:
        return np.where(np.isreal(sinr), np.inf, np.inf) if sinr.ndim else math.inf
    val = (1.0 / (qp.rho * (1.0 - qp.rho))) / (1.0 + 1.0 / sinr)
    return val if sinr.ndim else float(val)


def sqnr_exact_db(sinr_db: np.ndarray | float, enob: float):
    """Exact per-antenna SQNR in dB as a function of the SINR in dB."""
    sinr = 10.0 ** (np.asarray(sinr_db, dtype=float) / 10.0)
    out = 10.0 * np.log10(sqnr_exact(sinr, enob))
    return out if np.ndim(sinr_db) else float(out)


def sqnr_db_small_sinr(sinr_db: np.ndarray | float, enob: float):
    """Low-SINR form SQNR_dB = SINR_dB - 10 log10(rho - rho^2), exact constants.

    Valid in the strong-interference regime SINR << 1; for SINR <= -20 dB it
    tracks :func:`sqnr_exact_db` within 0.1 dB, and within 0.01 dB below
    -40 dB.
    """
    qp = quant_params(enob)
    if qp.rho == 0.0:
        raise ValueError("small-SINR SQNR is undefined for an ideal ADC")
    out = np.asarray(sinr_db, dtype=float) - 10.0 * math.log10(qp.rho - qp.rho**2)
    return out if np.ndim(sinr_db) else float(out)


def sqnr_db_approx(sinr_db: np.ndarray | float, enob: float):
    """Rule-of-thumb SQNR_dB = SINR_dB + 6 ENOB - 4.37 (rounded constants)."""
    if enob == math.inf:
        raise ValueError("the dB rule of thumb needs a finite enob")
    out = np.asarray(sinr_db, dtype=float) + 6.0 * enob - 4.37
    return out if np.ndim(sinr_db) else float(out)
