"""Directional mmWave link budget: Gaussian-main-lobe antenna gains, free-space
received power, full-duplex self-interference, cross-link interference and
per-slot link/flow rates.

These are the reference (readable) implementations; the slot kernel in
`t2tsched.engine` repeats the same arithmetic in a tight loop and is
differentially tested against this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import Point

SPEED_OF_LIGHT = 3.0e8  # propagation constant used for the wavelength [m/s]


class ChannelError(ValueError):
    """Invalid radio input (angle out of range, zero distance, ...)."""


def k0_for_carrier(carrier_hz: float) -> float:
    """Free-space constant (lambda / 4 pi)^2 for the given carrier."""
    lam = SPEED_OF_LIGHT / carrier_hz
    return (lam / (4.0 * math.pi)) ** 2


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    return 10.0 * math.log10(linear)


@dataclass(frozen=True)
class RadioParams:
    """Radio constants shared by every node (values default to the simulated
    28 GHz system: 1 W transmitters, 1.2 GHz channel, 30 degree beams)."""

    tx_power_mw: float = 1000.0
    carrier_hz: float = 28e9
    bandwidth_hz: float = 1.2e9
    noise_dbm_per_mhz: float = -134.0
    path_loss_exp: float = 2.0
    hpbw_deg: float = 30.0          # half-power beamwidth
    si_cancellation: float = 1e-13  # residual self-interference fraction (linear)
    efficiency: float = 1.0         # transceiver efficiency in (0, 1]
    k0: float = field(default=0.0)  # derived from carrier_hz when left at 0

    def __post_init__(self):
        for name in ("tx_power_mw", "carrier_hz", "bandwidth_hz", "path_loss_exp",
                     "hpbw_deg", "efficiency"):
            if getattr(self, name) <= 0:
                raise ChannelError(f"{name} must be positive")
        if self.si_cancellation < 0:
            raise ChannelError("si_cancellation must be >= 0")
        if self.efficiency > 1.0:
            raise ChannelError("efficiency must be <= 1")
        if not 0 < self.hpbw_deg <= 180.0 / 1.3:
            raise ChannelError("hpbw_deg out of range for the main-lobe model")
        expected = k0_for_carrier(self.carrier_hz)
        if self.k0 == 0.0:
            object.__setattr__(self, "k0", expected)
        elif abs(self.k0 - expected) > 1e-12 * expected:
            raise ChannelError(
                f"k0={self.k0!r} inconsistent with carrier ({expected!r})"
            )

    @property
    def main_lobe_half_deg(self) -> float:
        # main lobe width is 2.6 * hpbw; the branch switch sits at half of it
        return 1.3 * self.hpbw_deg

    @property
    def max_gain_dbi(self) -> float:
        return linear_to_db((1.6162 / math.sin(math.radians(self.hpbw_deg) / 2.0)) ** 2)

    @property
    def side_lobe_dbi(self) -> float:
        return -0.4111 * math.log(self.hpbw_deg) - 10.579

    @property
    def noise_mw(self) -> float:
        """Thermal noise integrated over the full channel bandwidth."""
        dbm = self.noise_dbm_per_mhz + linear_to_db(self.bandwidth_hz / 1e6)
        return dbm_to_mw(dbm)

    @property
    def si_mw(self) -> float:
        return self.si_cancellation * self.tx_power_mw


def antenna_gain(theta_deg: float, params: RadioParams) -> float:
    """Directional gain [dBi] at angle theta off boresight.

    Gaussian-shaped main lobe out to 1.3 * hpbw, flat side lobe beyond.
    """
    if not 0.0 <= theta_deg <= 180.0:
        raise ChannelError(f"theta must lie in [0, 180] degrees, got {theta_deg}")
    if theta_deg <= params.main_lobe_half_deg:
        ratio = (theta_deg + theta_deg) / params.hpbw_deg
        return params.max_gain_dbi - 3.01 * (ratio * ratio)
    return params.side_lobe_dbi


def angle_between_deg(origin: Point, toward_a: Point, toward_b: Point) -> float:
    """Angle at `origin` between the directions to two other points [deg]."""
    v1x, v1y = toward_a[0] - origin[0], toward_a[1] - origin[1]
    v2x, v2y = toward_b[0] - origin[0], toward_b[1] - origin[1]
    n1 = math.sqrt(v1x * v1x + v1y * v1y)
    n2 = math.sqrt(v2x * v2x + v2y * v2y)
    if n1 == 0.0 or n2 == 0.0:
        raise ChannelError("zero-length direction vector")
    c = (v1x * v2x + v1y * v2y) / (n1 * n2)
    c = min(1.0, max(-1.0, c))
    return math.degrees(math.acos(c))


def received_power(
    tx: Point, rx: Point, tx_boresight: Point, rx_boresight: Point,
    params: RadioParams,
) -> float:
    """Received power [mW] with each end's gain taken at its off-boresight angle."""
    dx = rx[0] - tx[0]
    dy = rx[1] - tx[1]
    d2 = dx * dx + dy * dy
    if d2 == 0.0:
        raise ChannelError("zero distance between transmitter and receiver")
    g_tx = antenna_gain(angle_between_deg(tx, tx_boresight, rx), params)
    g_rx = antenna_gain(angle_between_deg(rx, rx_boresight, tx), params)
    gain_lin = 10.0 ** ((g_tx + g_rx) * 0.1)
    return params.k0 * params.tx_power_mw * gain_lin * d2 ** (-0.5 * params.path_loss_exp)


def self_interference(params: RadioParams) -> float:
    """Residual self-interference power [mW] at a node that is transmitting."""
    return params.si_mw


def cross_interference(
    victim_rx: Point, victim_tx: Point,
    interferers: list[tuple[Point, Point]],
    params: RadioParams,
    path_blocked=None,
) -> float:
    """Aggregate interference [mW] at victim_rx from other active transmitters.

    `interferers` lists (tx position, that tx's boresight target). The victim
    receiver keeps its boresight on its own transmitter. Paths for which
    `path_blocked(tx_pos, victim_rx)` is true contribute nothing: obstacles
    attenuate interference exactly as they do signal.
    """
    total = 0.0
    for tx_pos, bore in interferers:
        if path_blocked is not None and path_blocked(tx_pos, victim_rx):
            continue
        total += received_power(tx_pos, victim_rx, bore, victim_tx, params)
    return total


def link_rate(
    signal_mw: float, params: RadioParams,
    rx_is_also_transmitting: bool = False,
    interference_mw: float = 0.0,
    blocked: bool = False,
) -> float:
    """Shannon rate [bit/s] of one link given its slot-local radio state."""
    if blocked:
        return 0.0
    si = params.si_mw if rx_is_also_transmitting else 0.0
    sinr = signal_mw / (params.noise_mw + si + interference_mw)
    return params.efficiency * params.bandwidth_hz * math.log2(1.0 + sinr)


def flow_rate(direct_or_hops: float | tuple[float, float]) -> float:
    """Rate of a flow: the direct link's rate, or min of the two relay hops."""
    if isinstance(direct_or_hops, tuple):
        first, second = direct_or_hops
        return min(first, second)
    return direct_or_hops
