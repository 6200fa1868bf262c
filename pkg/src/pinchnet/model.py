"""Geometry, channel and rate model for the multi-cell pinching-antenna downlink.

The service area is the rectangle ``[-D_L/2, D_L/2] x [-D_W/2, D_W/2]`` cut
into ``n_row x n_col`` equal cells. Cell ``m`` (0-based, row-major) owns one
user on the ground and one waveguide running along x through the cell center
at height ``d``. Only squared channel magnitudes are modelled; the phase of
the free-space channel never enters the achievable rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

UserModel = Literal["uniform", "clustered"]


class ConfigError(ValueError):
    """Raised for invalid scenario or experiment configuration."""


def dbm_to_watts(p_dbm):
    """Convert dBm to watts."""
    out = 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return float(out) if out.ndim == 0 else out


def watts_to_dbm(p_watts):
    """Convert watts to dBm. Non-positive powers raise ``ValueError``."""
    p = np.asarray(p_watts, dtype=float)
    if np.any(~(p > 0)):
        raise ValueError(f"power must be positive to convert to dBm, got {p_watts!r}")
    out = 10.0 * np.log10(p) + 30.0
    return float(out) if out.ndim == 0 else out


def path_loss_constant(carrier_freq: float) -> float:
    """Free-space constant ``eta = c^2 / (16 pi^2 f_c^2)``."""
    return SPEED_OF_LIGHT**2 / (16.0 * math.pi**2 * carrier_freq**2)


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, RF constants, QoS target and power cap for one experiment.

    All powers are in watts; use :meth:`from_dbm` or :func:`load_config` to
    start from dBm values.
    """

    d_l: float = 80.0
    d_w: float = 20.0
    n_row: int = 1
    n_col: int = 2
    antenna_height: float = 3.0
    carrier_freq: float = 28e9
    noise_power: float = 1e-10
    target_rate: float = 1.0
    p_max: float = 100.0

    def __post_init__(self):
        for name in ("d_l", "d_w", "antenna_height", "carrier_freq", "noise_power", "target_rate", "p_max"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        for name in ("n_row", "n_col"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")

    @property
    def n_cells(self) -> int:
        return self.n_row * self.n_col

    @property
    def eta(self) -> float:
        return path_loss_constant(self.carrier_freq)

    @property
    def epsilon(self) -> float:
        """SINR threshold ``2**R_t - 1`` matching the target rate."""
        return 2.0**self.target_rate - 1.0

    @classmethod
    def from_dbm(cls, noise_dbm: float = -70.0, p_max_dbm: float = 50.0, **kwargs) -> "ScenarioConfig":
        return cls(noise_power=dbm_to_watts(noise_dbm), p_max=dbm_to_watts(p_max_dbm), **kwargs)

    def with_rate(self, target_rate: float) -> "ScenarioConfig":
        return ScenarioConfig(**{**self.__dict__, "target_rate": target_rate})


@dataclass(frozen=True)
class CellLayout:
    """Per-cell centers and waveguide spans for a rectangular grid.

    Attributes
    ----------
    centers : ndarray, shape (M, 2)
        Cell centers ``(x, y)``; the conventional base station sits above it.
    x_bounds : ndarray, shape (M, 2)
        ``[x_start, x_end]`` of each waveguide, equal to the cell's x-extent.
    y_bounds : ndarray, shape (M, 2)
        y-extent of each cell.
    """

    n_row: int
    n_col: int
    height: float
    centers: np.ndarray = field(repr=False)
    x_bounds: np.ndarray = field(repr=False)
    y_bounds: np.ndarray = field(repr=False)

    @property
    def n_cells(self) -> int:
        return self.n_row * self.n_col

    @property
    def waveguide_y(self) -> np.ndarray:
        return self.centers[:, 1]

    def cell_index(self, row: int, col: int) -> int:
        """0-based row-major index of the cell at 0-based ``(row, col)``."""
        return row * self.n_col + col

    def antenna_positions(self, x_pin) -> np.ndarray:
        """3-D positions for antenna x-coordinates; accepts a leading batch axis."""
        x_pin = np.asarray(x_pin, dtype=float)
        y = np.broadcast_to(self.waveguide_y, x_pin.shape)
        z = np.full(x_pin.shape, self.height)
        return np.stack([x_pin, y, z], axis=-1)

    def conventional_positions(self) -> np.ndarray:
        return self.antenna_positions(self.centers[:, 0])


def build_layout(config: ScenarioConfig) -> CellLayout:
    """Tile the service rectangle into ``n_row x n_col`` cells."""
    n_row, n_col = config.n_row, config.n_col
    cell_l = config.d_l / n_col
    cell_w = config.d_w / n_row
    rows, cols = np.divmod(np.arange(n_row * n_col), n_col)
    x_start = -config.d_l / 2 + cols * cell_l
    y_start = -config.d_w / 2 + rows * cell_w
    # Edges are recomputed from the far side so the last cell closes exactly on D/2.
    x_end = np.where(cols == n_col - 1, config.d_l / 2, -config.d_l / 2 + (cols + 1) * cell_l)
    y_end = np.where(rows == n_row - 1, config.d_w / 2, -config.d_w / 2 + (rows + 1) * cell_w)
    centers = np.column_stack([
        -config.d_l / 2 + (cols + 0.5) * cell_l,
        -config.d_w / 2 + (rows + 0.5) * cell_w,
    ])
    return CellLayout(
        n_row=n_row,
        n_col=n_col,
        height=config.antenna_height,
        centers=centers,
        x_bounds=np.column_stack([x_start, x_end]),
        y_bounds=np.column_stack([y_start, y_end]),
    )


def channel_gain(user_pos, antenna_pos, carrier_freq: float) -> float:
    """Squared channel magnitude ``eta / |user - antenna|^2`` between two points."""
    diff = np.asarray(user_pos, dtype=float) - np.asarray(antenna_pos, dtype=float)
    dist2 = float(diff @ diff)
    if dist2 == 0.0:
        raise ValueError("user and antenna coincide; free-space gain is singular")
    return path_loss_constant(carrier_freq) / dist2


def gain_matrix(antenna_pos, user_pos, carrier_freq: float) -> np.ndarray:
    """Squared channel gains ``g[..., i, m]`` from antenna ``i`` to user ``m``.

    Parameters
    ----------
    antenna_pos : array_like, shape (..., M, 3)
        Antenna positions; any leading batch axes are kept.
    user_pos : array_like, shape (M, 3)
    carrier_freq : float
        Carrier frequency in Hz.
    """
    a = np.asarray(antenna_pos, dtype=float)[..., :, None, :]
    u = np.asarray(user_pos, dtype=float)
    dx = a[..., 0] - u[:, 0]
    dy = a[..., 1] - u[:, 1]
    dz = a[..., 2] - u[:, 2]
    dist2 = dx * dx + dy * dy + dz * dz
    if np.any(dist2 == 0.0):
        raise ValueError("user and antenna coincide; free-space gain is singular")
    return path_loss_constant(carrier_freq) / dist2


def sinr(powers, gains, noise_power: float) -> np.ndarray:
    """Per-user SINR for transmit powers ``powers`` and gains ``g[i, m]``."""
    p = np.asarray(powers, dtype=float)
    g = np.asarray(gains, dtype=float)
    received = p[:, None] * g  # received[i, m]: power from antenna i at user m
    signal = np.diag(received)
    interference = np.where(np.eye(len(p), dtype=bool), 0.0, received).sum(axis=0)
    return signal / (interference + noise_power)


def achievable_rates(powers, gains, noise_power: float) -> np.ndarray:
    """Achievable rate in bits/s/Hz of every user."""
    return np.log2(1.0 + sinr(powers, gains, noise_power))


def achievable_rate(m: int, powers, gains, noise_power: float) -> float:
    """Achievable rate of user ``m`` (0-based)."""
    p = np.asarray(powers, dtype=float)
    g = np.asarray(gains, dtype=float)
    interference = sum(p[i] * g[i, m] for i in range(len(p)) if i != m)
    return math.log2(1.0 + p[m] * g[m, m] / (interference + noise_power))


def sample_users(
    config: ScenarioConfig,
    layout: CellLayout,
    rng: np.random.Generator,
    model: UserModel = "uniform",
) -> np.ndarray:
    """Draw one user per cell; returns positions of shape (M, 3) with z = 0.

    ``"uniform"`` places each user uniformly in its own cell. ``"clustered"``
    is the two-cell setup with ``x1 ~ U(-2, 0)`` and ``x2 ~ U(0, 2)``; y is
    uniform over the cell's y-extent in both models.
    """
    m = layout.n_cells
    if model == "uniform":
        x = rng.uniform(layout.x_bounds[:, 0], layout.x_bounds[:, 1])
    elif model == "clustered":
        if m != 2:
            raise ConfigError(f"clustered user model needs exactly 2 cells, got {m}")
        x = rng.uniform([-2.0, 0.0], [0.0, 2.0])
    else:
        raise ConfigError(f"unknown user model {model!r}")
    y = rng.uniform(layout.y_bounds[:, 0], layout.y_bounds[:, 1])
    return np.column_stack([x, y, np.zeros(m)])


CONFIG_KEYS = {
    "d_l": float,
    "d_w": float,
    "n_row": int,
    "n_col": int,
    "antenna_height": float,
    "carrier_freq_hz": float,
    "noise_dbm": float,
    "target_rate": float,
    "p_max_dbm": float,
    "n_ce": int,
    "n_max": int,
    "n_best": int,
    "alpha": float,
    "delta": float,
}


def read_config_file(path) -> dict:
    """Read a ``key = value`` (or JSON) config file into a typed dict.

    Blank lines and ``#`` comments are ignored. Unknown keys raise
    :class:`ConfigError`.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        raw = json.loads(text)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                key, sep, value = line.partition(":")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            raw[key.strip()] = value.strip().strip('"')
    out = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        try:
            number = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad value for {key}: {value!r}") from exc
        if CONFIG_KEYS[key] is int:
            if not number.is_integer():
                raise ConfigError(f"{path}: {key} must be an integer, got {value!r}")
            number = int(number)
        out[key] = number
    return out


def scenario_from_mapping(values: dict) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from config-file keys, defaulting the rest."""
    kwargs = {}
    for key in ("d_l", "d_w", "n_row", "n_col", "antenna_height", "target_rate"):
        if key in values:
            kwargs[key] = values[key]
    if "carrier_freq_hz" in values:
        kwargs["carrier_freq"] = values["carrier_freq_hz"]
    return ScenarioConfig.from_dbm(
        noise_dbm=values.get("noise_dbm", -70.0),
        p_max_dbm=values.get("p_max_dbm", 50.0),
        **kwargs,
    )


def load_config(path) -> ScenarioConfig:
    return scenario_from_mapping(read_config_file(path))
