"""BS/RIS scene: geometry, near-field LOS channels, Rayleigh user links, pathloss.

Geometry convention (lengths in meters):
  * the RIS occupies the z = 0 plane on a half-wavelength grid centred at the
    origin, boresight along +z;
  * the BS antenna elements sit in the z = lambda/2 plane with the Tx array
    centred at x = -1.5 lambda and the Rx array at x = +1.5 lambda, i.e.
    array centres 3 lambda apart.  The two ULAs run parallel along y (two
    collinear 3.5-lambda apertures cannot sit 3 lambda apart without their
    elements colliding); each URA is a 2 x M/2 rectangle with its long axis
    along x.

Power convention: dBm quantities are converted to linear milliwatts exactly
once, at the Scenario boundary; everything downstream works in linear units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .ris import RisState

# Stable per-matrix stream ids.  Each random matrix is drawn from its own
# counter-based stream keyed by (seed, tag), so the synthesized channels do
# not depend on the order in which matrices are generated or on how trials
# are distributed over workers.
STREAM_TAGS = {
    "h_ru": 11,
    "h_bru": 12,
    "h_dr": 13,
    "h_dbt": 14,
    "ris_init": 21,
    "ideal_init": 22,
    "phase_dev": 31,
}


def dbm_to_mw(dbm: float) -> float:
    """Convert a dBm power level to linear milliwatts."""
    return 10.0 ** (dbm / 10.0)


def tagged_rng(seed: int, tag: str) -> np.random.Generator:
    """Counter-based generator for one named draw stream of one seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), STREAM_TAGS[tag]))))


@dataclass(frozen=True)
class Scenario:
    """Full parameterization of one system instance.

    Defaults follow the reference desk-scale setup: an 8x8-antenna BS at
    2.4 GHz with a 16x16 RIS behind the arrays, three uplink users at 100 m
    and three downlink users at 500 m.
    """

    layout: str = "ula"                      # "ula" or "ura"
    m_t: int = 8                             # BS transmit antennas
    m_r: int = 8                             # BS receive antennas
    ris_rows: int = 16
    ris_cols: int = 16
    ris_bits: float = math.inf               # phase resolution: 2..6 or inf
    m_d: int = 8                             # downlink effective antennas
    k_u: int = 3                             # uplink users
    k_d: int = 3                             # downlink users
    lambda_m: float = 0.125                  # wavelength (2.4 GHz carrier)
    p_t_dbm: float = 30.0                    # BS transmit power budget
    ul_tx_dbm: float = 10.0                  # per-uplink-user symbol power
    noise_bs_dbm: float = -95.0
    noise_user_dbm: float = -95.0
    d_ul_m: tuple = (100.0, 100.0, 100.0)    # per-uplink-user distance
    d_dl_m: tuple = (500.0, 500.0, 500.0)    # per-downlink-user distance
    g_l: float = 1.0                         # antenna gain, linear
    seed: int = 0

    def __post_init__(self):
        if self.layout not in ("ula", "ura"):
            raise ValueError(f"layout must be 'ula' or 'ura', got {self.layout!r}")
        if not (1 <= self.k_d <= self.m_d <= self.m_t):
            raise ValueError(f"need k_d <= m_d <= m_t, got {self.k_d}, {self.m_d}, {self.m_t}")
        if not (1 <= self.k_u <= self.m_r):
            raise ValueError(f"need k_u <= m_r, got {self.k_u}, {self.m_r}")
        if self.ris_rows < 1 or self.ris_cols < 1:
            raise ValueError("RIS grid must have at least one element")
        if not (self.ris_bits == math.inf or (float(self.ris_bits).is_integer() and 2 <= self.ris_bits <= 6)):
            raise ValueError(f"ris_bits must be 2..6 or inf, got {self.ris_bits}")
        if self.lambda_m <= 0 or self.g_l <= 0:
            raise ValueError("wavelength and antenna gain must be positive")
        for name in ("p_t_dbm", "ul_tx_dbm", "noise_bs_dbm", "noise_user_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "d_ul_m", tuple(float(d) for d in self.d_ul_m))
        object.__setattr__(self, "d_dl_m", tuple(float(d) for d in self.d_dl_m))
        if len(self.d_ul_m) != self.k_u or len(self.d_dl_m) != self.k_d:
            raise ValueError("per-user distance lists must match the user counts")
        if any(d <= 0 for d in self.d_ul_m + self.d_dl_m):
            raise ValueError("user distances must be positive")

    @property
    def m_ris(self) -> int:
        return self.ris_rows * self.ris_cols

    @property
    def p_t_mw(self) -> float:
        return dbm_to_mw(self.p_t_dbm)

    @property
    def ul_tx_mw(self) -> float:
        return dbm_to_mw(self.ul_tx_dbm)

    @property
    def noise_bs_mw(self) -> float:
        return dbm_to_mw(self.noise_bs_dbm)

    @property
    def noise_user_mw(self) -> float:
        return dbm_to_mw(self.noise_user_dbm)

    def with_(self, **overrides) -> "Scenario":
        """Copy with the given fields replaced (distance lists auto-resized)."""
        merged = {**{f.name: getattr(self, f.name) for f in fields(self)}, **overrides}
        if "k_u" in overrides and "d_ul_m" not in overrides:
            merged["d_ul_m"] = tuple(self.d_ul_m[0] for _ in range(overrides["k_u"]))
        if "k_d" in overrides and "d_dl_m" not in overrides:
            merged["d_dl_m"] = tuple(self.d_dl_m[0] for _ in range(overrides["k_d"]))
        return Scenario(**merged)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["d_ul_m"] = list(d["d_ul_m"])
        d["d_dl_m"] = list(d["d_dl_m"])
        if d["ris_bits"] == math.inf:
            d["ris_bits"] = "inf"
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        data = dict(data)
        if isinstance(data.get("ris_bits"), str):
            if data["ris_bits"] != "inf":
                raise ValueError(f"ris_bits must be 2..6 or 'inf', got {data['ris_bits']!r}")
            data["ris_bits"] = math.inf
        for key in ("d_ul_m", "d_dl_m"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions (N, 3) for the Tx array, Rx array and RIS grid."""

    tx_positions: np.ndarray
    rx_positions: np.ndarray
    ris_positions: np.ndarray


def _grid_positions(rows: int, cols: int, spacing: float, center, z: float) -> np.ndarray:
    """Row-major rows x cols grid in the z-plane, rows along y, columns along x."""
    cx, cy = center
    xs = (np.arange(cols) - (cols - 1) / 2) * spacing + cx
    ys = (np.arange(rows) - (rows - 1) / 2) * spacing + cy
    pts = np.empty((rows * cols, 3))
    for r in range(rows):
        for c in range(cols):
            pts[r * cols + c] = (xs[c], ys[r], z)
    return pts


def build_geometry(scenario: Scenario) -> ArrayGeometry:
    """Place the antenna arrays and the RIS grid.

    ULA: two parallel single-column arrays along y.  URA: each array is a
    2 x M/2 rectangle with its long axis along x.  Either way the element
    spacing is lambda/2, the arrays sit lambda/2 in front of the RIS plane,
    and the Tx/Rx array centres are at x = -+1.5 lambda.
    """
    lam = scenario.lambda_m
    spacing = lam / 2
    z_bs = lam / 2
    centers = {"tx": (-1.5 * lam, 0.0), "rx": (+1.5 * lam, 0.0)}

    def bs_array(m: int, which: str) -> np.ndarray:
        if scenario.layout == "ula":
            return _grid_positions(m, 1, spacing, centers[which], z_bs)
        if m % 2 != 0:
            raise ValueError(f"URA needs an even antenna count, got {m}")
        return _grid_positions(2, m // 2, spacing, centers[which], z_bs)

    ris = _grid_positions(scenario.ris_rows, scenario.ris_cols, spacing, (0.0, 0.0), 0.0)
    return ArrayGeometry(
        tx_positions=bs_array(scenario.m_t, "tx"),
        rx_positions=bs_array(scenario.m_r, "rx"),
        ris_positions=ris,
    )


def nearfield_gain(point_a, point_b, lambda_m: float, g_l: float = 1.0) -> complex:
    """Near-field LOS gain between two points.

    h = sqrt(beta) * exp(-j k d) with k = 2 pi / lambda and
    beta = (g_l / 4) * (1/(kd)^2 - 1/(kd)^4 + 1/(kd)^6), which keeps the
    model usable at the sub-wavelength separations of a BS-mounted RIS.
    """
    d = float(np.linalg.norm(np.asarray(point_a, float) - np.asarray(point_b, float)))
    if d <= 0.0:
        raise ValueError("coincident points have no defined near-field gain")
    k = 2 * math.pi / lambda_m
    kd = k * d
    beta = (g_l / 4.0) * (1.0 / kd**2 - 1.0 / kd**4 + 1.0 / kd**6)
    return math.sqrt(beta) * np.exp(-1j * kd)


def _nearfield_matrix(points_to: np.ndarray, points_from: np.ndarray, lambda_m: float, g_l: float) -> np.ndarray:
    """Matrix of near-field gains, entry (i, j) from points_from[j] to points_to[i]."""
    diff = points_to[:, None, :] - points_from[None, :, :]
    d = np.linalg.norm(diff, axis=-1)
    if np.any(d <= 0.0):
        raise ValueError("coincident endpoints in near-field channel")
    kd = (2 * math.pi / lambda_m) * d
    beta = (g_l / 4.0) * (1.0 / kd**2 - 1.0 / kd**4 + 1.0 / kd**6)
    return np.sqrt(beta) * np.exp(-1j * kd)


def freespace_pathloss(d_m: float, lambda_m: float, g_l: float = 1.0) -> float:
    """Free-space power gain (sqrt(g_l) * lambda / (4 pi d))^2."""
    if d_m <= 0:
        raise ValueError("distance must be positive")
    return (math.sqrt(g_l) * lambda_m / (4 * math.pi * d_m)) ** 2


@dataclass(frozen=True)
class ChannelSet:
    """The seven channel matrices of one draw plus linear pathloss gains.

    Shapes: h_br_bt (m_r, m_t), h_br_r (m_r, m_ris), h_r_bt (m_ris, m_t),
    h_ru (m_ris, k_u), h_bru (m_r, k_u), h_dr (k_d, m_ris), h_dbt (k_d, m_t);
    gamma_u (k_u,) and gamma_d (k_d,) hold per-user power gains in (0, 1].
    """

    h_br_bt: np.ndarray
    h_br_r: np.ndarray
    h_r_bt: np.ndarray
    h_ru: np.ndarray
    h_bru: np.ndarray
    h_dr: np.ndarray
    h_dbt: np.ndarray
    gamma_u: np.ndarray
    gamma_d: np.ndarray

    @property
    def m_r(self) -> int:
        return self.h_br_bt.shape[0]

    @property
    def m_t(self) -> int:
        return self.h_br_bt.shape[1]

    @property
    def m_ris(self) -> int:
        return self.h_r_bt.shape[0]

    @property
    def k_u(self) -> int:
        return self.h_ru.shape[1]

    @property
    def k_d(self) -> int:
        return self.h_dr.shape[0]

    def without_ris(self) -> "ChannelSet":
        """Copy describing the same scene with the RIS physically absent.

        The reflected paths into the BS receiver and toward the downlink
        users are zeroed; direct paths are untouched.  Used by the
        transmit-beamforming-only baseline.
        """
        return replace(
            self,
            h_br_r=np.zeros_like(self.h_br_r),
            h_dr=np.zeros_like(self.h_dr),
        )


def _standard_complex(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian entries, unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthesize_channels(scenario: Scenario, geometry: ArrayGeometry | None = None,
                        seed: int | None = None) -> ChannelSet:
    """Draw one full channel realization.

    The three BS-side links (Tx->Rx, Tx->RIS, RIS->Rx) are deterministic
    near-field LOS functions of the geometry; the four user-side links are
    i.i.d. unit-variance complex Gaussian.  Each random matrix comes from its
    own (seed, tag)-keyed stream, so identical seeds give bit-identical
    channels regardless of evaluation order.
    """
    if geometry is None:
        geometry = build_geometry(scenario)
    if seed is None:
        seed = scenario.seed
    lam, g_l = scenario.lambda_m, scenario.g_l

    h_br_bt = _nearfield_matrix(geometry.rx_positions, geometry.tx_positions, lam, g_l)
    h_br_r = _nearfield_matrix(geometry.rx_positions, geometry.ris_positions, lam, g_l)
    h_r_bt = _nearfield_matrix(geometry.ris_positions, geometry.tx_positions, lam, g_l)

    h_ru = _standard_complex(tagged_rng(seed, "h_ru"), (scenario.m_ris, scenario.k_u))
    h_bru = _standard_complex(tagged_rng(seed, "h_bru"), (scenario.m_r, scenario.k_u))
    h_dr = _standard_complex(tagged_rng(seed, "h_dr"), (scenario.k_d, scenario.m_ris))
    h_dbt = _standard_complex(tagged_rng(seed, "h_dbt"), (scenario.k_d, scenario.m_t))

    gamma_u = np.array([freespace_pathloss(d, lam, g_l) for d in scenario.d_ul_m])
    gamma_d = np.array([freespace_pathloss(d, lam, g_l) for d in scenario.d_dl_m])
    return ChannelSet(h_br_bt, h_br_r, h_r_bt, h_ru, h_bru, h_dr, h_dbt, gamma_u, gamma_d)


def effective_si_channel(channels: ChannelSet, ris: RisState) -> np.ndarray:
    """Self-interference channel seen by the BS receiver: reflected plus direct path."""
    return (channels.h_br_r * ris.d[None, :]) @ channels.h_r_bt + channels.h_br_bt


def ul_effective_channel(channels: ChannelSet, ris: RisState) -> np.ndarray:
    """Uplink users -> BS receiver channel, (m_r, k_u), pathloss included."""
    h = (channels.h_br_r * ris.d[None, :]) @ channels.h_ru + channels.h_bru
    return h * np.sqrt(channels.gamma_u)[None, :]


def dl_effective_channel(channels: ChannelSet, ris: RisState) -> np.ndarray:
    """BS transmitter -> downlink users channel, (k_d, m_t), pathloss included."""
    h = (channels.h_dr * ris.d[None, :]) @ channels.h_r_bt + channels.h_dbt
    return np.sqrt(channels.gamma_d)[:, None] * h
