"""Scenario configuration, network geometry, and reproducible RNG streams.

A single JSON document drives every experiment.  All keys are optional except
the ones without defaults below; unknown keys are rejected so that typos do
not silently fall back to defaults.  The full schema with default values is
documented in the README and mirrored by :data:`CONFIG_DEFAULTS`.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class ConfigError(ValueError):
    """A configuration file failed schema validation; names the bad field."""


# Schema defaults.  `None` means "derived from other fields" (documented per
# key in the README): wavelength from carrier frequency, element size as a
# quarter wavelength, normalized SNRs from transmit/noise powers, eta as all
# ones.
CONFIG_DEFAULTS: dict = {
    "M": 20,
    "K": 4,
    "N_H": 4,
    "N_V": 4,
    "tau_c": 200,
    "tau_p": 2,
    "bandwidth_mhz": 20.0,
    "uplink_fraction": 1.0,
    "carrier_ghz": 1.9,
    "wavelength_m": None,
    "element_width_m": None,
    "element_height_m": None,
    "pilot_power_mw": 100.0,
    "data_power_mw": 100.0,
    "noise_figure_db": 9.0,
    "pilot_snr": None,
    "data_snr": None,
    "eta": None,
    "p_tilde": 0.2,
    "area_side_km": 1.5,
    "ap_region_km": [[-0.75, -0.5], [-0.75, -0.5]],
    "user_region_km": [[0.375, 0.75], [0.375, 0.75]],
    "ris_position_km": [0.0, 0.0],
    "ap_height_m": 15.0,
    "user_height_m": 1.65,
    "ris_height_m": 30.0,
    "pathloss_d0_km": 0.01,
    "pathloss_d1_km": 0.05,
    "reference_loss_db": None,
    "master_seed": 20260809,
    "trials": 100_000,
}


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle in km, used for AP/user drop regions."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigError(f"empty region: {self}")

    def contains(self, square_half_side: float) -> bool:
        lo, hi = -square_half_side, square_half_side
        return (
            lo <= self.x_min <= hi
            and lo <= self.x_max <= hi
            and lo <= self.y_min <= hi
            and lo <= self.y_max <= hi
        )

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        xs = rng.uniform(self.x_min, self.x_max, size=count)
        ys = rng.uniform(self.y_min, self.y_max, size=count)
        return np.column_stack([xs, ys])


@dataclass(frozen=True)
class SystemConfig:
    """All scalar scenario parameters.

    ``p`` and ``rho`` are normalized (dimensionless) pilot/data SNRs, i.e.
    transmit power divided by the noise power of the configured bandwidth and
    noise figure.
    """

    M: int
    K: int
    N_H: int
    N_V: int
    tau_c: int
    tau_p: int
    p: float
    rho: float
    eta: tuple
    bandwidth_mhz: float
    uplink_fraction: float
    wavelength: float
    d_h: float
    d_v: float
    p_tilde: float
    area_side: float
    master_seed: int
    trials: int
    carrier_ghz: float
    ap_region: Rectangle
    user_region: Rectangle
    ris_position: tuple
    ap_height: float
    user_height: float
    ris_height: float
    pathloss_d0: float
    pathloss_d1: float
    reference_loss_db: float | None

    @property
    def N(self) -> int:
        return self.N_H * self.N_V

    @property
    def eta_array(self) -> np.ndarray:
        return np.asarray(self.eta, dtype=float)

    def validate(self) -> "SystemConfig":
        checks = [
            (self.M >= 1, "M >= 1"),
            (self.K >= 1, "K >= 1"),
            (self.N_H >= 1 and self.N_V >= 1, "N_H, N_V >= 1"),
            (self.tau_p < self.tau_c, "tau_p < tau_c"),
            (self.tau_p >= 1, "tau_p >= 1"),
            (self.p > 0, "p > 0"),
            (self.rho > 0, "rho > 0"),
            (len(self.eta) == self.K, "len(eta) == K"),
            (all(0.0 <= e <= 1.0 for e in self.eta), "0 <= eta[k] <= 1"),
            (0.0 <= self.p_tilde <= 1.0, "0 <= p_tilde <= 1"),
            (0.0 <= self.uplink_fraction <= 1.0, "0 <= uplink_fraction <= 1"),
            (self.bandwidth_mhz > 0, "bandwidth_mhz > 0"),
            (self.wavelength > 0, "wavelength > 0"),
            (self.d_h > 0 and self.d_v > 0, "element size > 0"),
            (self.area_side > 0, "area_side > 0"),
            (0 < self.pathloss_d0 < self.pathloss_d1, "0 < d0 < d1"),
            (self.trials >= 1, "trials >= 1"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ConfigError(f"{rule} violated")
        half = self.area_side / 2.0
        for name, region in (("ap_region_km", self.ap_region), ("user_region_km", self.user_region)):
            if not region.contains(half):
                raise ConfigError(f"{name} outside the wrap-around square")
        if not (abs(self.ris_position[0]) <= half and abs(self.ris_position[1]) <= half):
            raise ConfigError("ris_position_km outside the wrap-around square")
        return self


def noise_power_mw(bandwidth_mhz: float, noise_figure_db: float) -> float:
    """Thermal noise power in mW: -174 dBm/Hz + 10 log10(B) + noise figure."""
    dbm = -174.0 + 10.0 * math.log10(bandwidth_mhz * 1e6) + noise_figure_db
    return 10.0 ** (dbm / 10.0)


def _region(raw, key: str) -> Rectangle:
    try:
        (x_min, x_max), (y_min, y_max) = raw
        return Rectangle(float(x_min), float(x_max), float(y_min), float(y_max))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{key} must be [[x_min,x_max],[y_min,y_max]]: {exc}") from exc


def config_from_dict(raw: dict) -> SystemConfig:
    """Resolve a raw key/value mapping against the schema and validate."""
    unknown = set(raw) - set(CONFIG_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**CONFIG_DEFAULTS, **raw}

    carrier_ghz = float(merged["carrier_ghz"])
    wavelength = merged["wavelength_m"]
    if wavelength is None:
        wavelength = SPEED_OF_LIGHT / (carrier_ghz * 1e9)
    wavelength = float(wavelength)
    d_h = float(merged["element_width_m"]) if merged["element_width_m"] is not None else wavelength / 4.0
    d_v = float(merged["element_height_m"]) if merged["element_height_m"] is not None else wavelength / 4.0

    noise_mw = noise_power_mw(float(merged["bandwidth_mhz"]), float(merged["noise_figure_db"]))
    p = merged["pilot_snr"]
    if p is None:
        p = float(merged["pilot_power_mw"]) / noise_mw
    rho = merged["data_snr"]
    if rho is None:
        rho = float(merged["data_power_mw"]) / noise_mw

    K = int(merged["K"])
    eta = merged["eta"]
    if eta is None:
        eta = (1.0,) * K
    elif isinstance(eta, (int, float)):
        eta = (float(eta),) * K
    else:
        eta = tuple(float(e) for e in eta)

    cfg = SystemConfig(
        M=int(merged["M"]),
        K=K,
        N_H=int(merged["N_H"]),
        N_V=int(merged["N_V"]),
        tau_c=int(merged["tau_c"]),
        tau_p=int(merged["tau_p"]),
        p=float(p),
        rho=float(rho),
        eta=eta,
        bandwidth_mhz=float(merged["bandwidth_mhz"]),
        uplink_fraction=float(merged["uplink_fraction"]),
        wavelength=wavelength,
        d_h=d_h,
        d_v=d_v,
        p_tilde=float(merged["p_tilde"]),
        area_side=float(merged["area_side_km"]),
        master_seed=int(merged["master_seed"]),
        trials=int(merged["trials"]),
        carrier_ghz=carrier_ghz,
        ap_region=_region(merged["ap_region_km"], "ap_region_km"),
        user_region=_region(merged["user_region_km"], "user_region_km"),
        ris_position=tuple(float(v) for v in merged["ris_position_km"]),
        ap_height=float(merged["ap_height_m"]),
        user_height=float(merged["user_height_m"]),
        ris_height=float(merged["ris_height_m"]),
        pathloss_d0=float(merged["pathloss_d0_km"]),
        pathloss_d1=float(merged["pathloss_d1_km"]),
        reference_loss_db=None if merged["reference_loss_db"] is None else float(merged["reference_loss_db"]),
    )
    return cfg.validate()


def load_config(path) -> SystemConfig:
    """Load and validate a scenario JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse failure in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(raw)


@dataclass(frozen=True)
class Geometry:
    """AP/user/RIS planar positions in km plus the fixed mount heights."""

    ap_positions: np.ndarray
    user_positions: np.ndarray
    ris_position: np.ndarray
    ap_height: float = 15.0
    user_height: float = 1.65
    ris_height: float = 30.0


def wrap_distance(a, b, side: float):
    """Toroidal distance in km on a square of the given side.

    Per-axis displacement is min(|d|, side - |d|); the result is the
    Euclidean norm of the wrapped displacements.  Supports broadcasting over
    leading axes of ``a`` and ``b``.
    """
    if side <= 0:
        raise ValueError("side must be positive")
    delta = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    delta = np.minimum(delta, side - delta)
    return np.sqrt(np.sum(delta**2, axis=-1))


def generate_geometry(
    cfg: SystemConfig,
    region_aps: Rectangle,
    region_users: Rectangle,
    rng: np.random.Generator,
) -> Geometry:
    """Drop APs and users i.i.d. uniform over their regions; RIS is fixed."""
    half = cfg.area_side / 2.0
    for name, region in (("region_aps", region_aps), ("region_users", region_users)):
        if not region.contains(half):
            raise ConfigError(f"{name} outside the wrap-around square")
    return Geometry(
        ap_positions=region_aps.sample(rng, cfg.M),
        user_positions=region_users.sample(rng, cfg.K),
        ris_position=np.asarray(cfg.ris_position, dtype=float),
        ap_height=cfg.ap_height,
        user_height=cfg.user_height,
        ris_height=cfg.ris_height,
    )


def geometry_for(cfg: SystemConfig, rng: np.random.Generator) -> Geometry:
    """Geometry drawn from the regions configured in ``cfg``."""
    return generate_geometry(cfg, cfg.ap_region, cfg.user_region, rng)


def substream(master_seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Counter-based RNG sub-stream for (master_seed, purpose, index).

    Any module can be re-run in isolation: the stream depends only on the
    three keys, never on draw order elsewhere.
    """
    tag = zlib.crc32(purpose.encode("utf-8"))
    seq = np.random.SeedSequence(master_seed, spawn_key=(tag, index))
    return np.random.default_rng(seq)
