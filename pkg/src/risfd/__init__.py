"""RIS-assisted in-band full-duplex link design and evaluation.

A base station that transmits and receives on the same band drowns its own
receiver in self-interference; a reconfigurable surface mounted behind the
arrays can reshape the propagation so the leakage cancels before it reaches
the ADCs.  This package designs the transmit subspace and the surface phases
jointly, models the quantization noise the residual interference causes, and
evaluates uplink/downlink spectral efficiencies at desk scale.
"""

from .ideal import (IdealDesign, closedform_dl_rate, negative_sum_rate,
                    negative_sum_rate_grad, optimize_ideal, ul_rate_ideal,
                    zf_power_coeffs)
from .linalg import EigenPair, frobenius_sq, hermitian_eig, khatri_rao, vec
from .manifold import (RcgOptions, RcgResult, RetractionError, armijo_step,
                       fletcher_reeves_beta, project_tangent, rcg_minimize,
                       retract, transport)
from .quantization import (QuantizationParams, per_antenna_sinr,
                           quant_noise_cov, quant_params, receive_covariance,
                           sqnr_db_approx, sqnr_db_small_sinr, sqnr_exact,
                           sqnr_exact_db)
from .rates import (PowerAllocation, PrecoderBundle, RateReport,
                    design_downlink, design_softnull, dl_rates_general,
                    dl_rates_zf, evaluate_link, ul_rate_quantized, waterfill,
                    zf_precoder)
from .ris import RisState, quantize_phases, random_phases
from .scene import (ArrayGeometry, ChannelSet, Scenario, build_geometry,
                    dbm_to_mw, dl_effective_channel, effective_si_channel,
                    freespace_pathloss, nearfield_gain, synthesize_channels,
                    tagged_rng, ul_effective_channel)
from .sim import (AoOptions, AoTrace, identity_subspace, joint_sim_design,
                  ls_cost, ls_grad, ls_system, residual_si_metric,
                  sim_precoder)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
