"""Pure-Python slot kernel.

Semantic twin of the Cython extension `_ckernel.pyx`: every float operation
appears in the same order so the two backends produce bit-identical rates.
Keep the two files in sync when touching either.
"""

from __future__ import annotations

import math

_RAD2DEG = 180.0 / math.pi


class Kernel:
    """Per-scenario slot math: positions, blockage, gains, SINR rates.

    Nodes are flat indices into the position arrays (train A first, then
    train B). All powers in mW, rates in bit/s, angles in degrees.
    """

    def __init__(
        self, x0, v, y,
        phase, period, blocked_len, band_lo, band_hi,
        k0pt, half_exp, g0_db, gsl_db, ml_half_deg, hpbw_deg,
        noise_mw, si_mw, eta_w, dt, shield_interference,
    ):
        self.x0 = x0
        self.v = v
        self.y = y
        self.phase = phase
        self.period = period
        self.blocked_len = blocked_len
        self.band_lo = band_lo
        self.band_hi = band_hi
        self.k0pt = k0pt
        self.half_exp = half_exp  # -0.5 * path loss exponent
        self.g0_db = g0_db
        self.gsl_db = gsl_db
        self.ml_half_deg = ml_half_deg
        self.hpbw_deg = hpbw_deg
        self.noise_mw = noise_mw
        self.si_mw = si_mw
        self.eta_w = eta_w
        self.dt = dt
        # whether obstacles attenuate interference paths as they do signal
        self.shield_interference = shield_interference
        # intended links have both ends on boresight: theta = 0 at each end
        self.main_gain_lin = 10.0 ** ((g0_db + g0_db) * 0.1)

    # -- geometry ----------------------------------------------------------

    def node_x(self, i: int, slot: int) -> float:
        return self.x0[i] + self.v[i] * (slot * self.dt)

    def _blocked_xy(self, ax: float, ay: float, bx: float, by: float) -> bool:
        if self.blocked_len <= 0.0:
            return False
        if (ay, ax) > (by, bx):
            ax, ay, bx, by = bx, by, ax, ay
        dy = by - ay
        if dy == 0.0:
            if not self.band_lo <= ay <= self.band_hi:
                return False
            x_lo, x_hi = (ax, bx) if ax <= bx else (bx, ax)
        else:
            t1 = (self.band_lo - ay) / dy
            t2 = (self.band_hi - ay) / dy
            t_lo = max(min(t1, t2), 0.0)
            t_hi = min(max(t1, t2), 1.0)
            if t_lo > t_hi:
                return False
            dx = bx - ax
            x1 = ax + t_lo * dx
            x2 = ax + t_hi * dx
            x_lo, x_hi = (x1, x2) if x1 <= x2 else (x2, x1)
        n_min = math.ceil((x_lo - self.phase - self.blocked_len) / self.period)
        n_max = math.floor((x_hi - self.phase) / self.period)
        return n_min <= n_max

    def blocked(self, i: int, j: int, slot: int) -> bool:
        return self._blocked_xy(
            self.node_x(i, slot), self.y[i], self.node_x(j, slot), self.y[j]
        )

    # -- link budget -------------------------------------------------------

    def _gain_db(self, theta_deg: float) -> float:
        if theta_deg <= self.ml_half_deg:
            ratio = (theta_deg + theta_deg) / self.hpbw_deg
            return self.g0_db - 3.01 * (ratio * ratio)
        return self.gsl_db

    def _angle_deg(self, ox, oy, ax, ay, bx, by) -> float:
        v1x = ax - ox
        v1y = ay - oy
        v2x = bx - ox
        v2y = by - oy
        n1 = math.sqrt(v1x * v1x + v1y * v1y)
        n2 = math.sqrt(v2x * v2x + v2y * v2y)
        c = (v1x * v2x + v1y * v2y) / (n1 * n2)
        c = min(1.0, max(-1.0, c))
        return math.acos(c) * _RAD2DEG

    def _signal_mw(self, tx_x, tx_y, rx_x, rx_y) -> float:
        dx = rx_x - tx_x
        dy = rx_y - tx_y
        d2 = dx * dx + dy * dy
        return self.k0pt * self.main_gain_lin * d2 ** self.half_exp

    def _pair_mw(self, px, py, bore_x, bore_y, rx_x, rx_y, rbore_x, rbore_y) -> float:
        dx = rx_x - px
        dy = rx_y - py
        d2 = dx * dx + dy * dy
        g_tx = self._gain_db(self._angle_deg(px, py, bore_x, bore_y, rx_x, rx_y))
        g_rx = self._gain_db(self._angle_deg(rx_x, rx_y, rbore_x, rbore_y, px, py))
        gain_lin = 10.0 ** ((g_tx + g_rx) * 0.1)
        return self.k0pt * gain_lin * d2 ** self.half_exp

    def solo_rate(self, t: int, r: int, slot: int, rx_transmits: bool) -> float:
        """Interference-free rate of one link, used for planning."""
        tx_x = self.node_x(t, slot)
        rx_x = self.node_x(r, slot)
        if self._blocked_xy(tx_x, self.y[t], rx_x, self.y[r]):
            return 0.0
        sig = self._signal_mw(tx_x, self.y[t], rx_x, self.y[r])
        si = self.si_mw if rx_transmits else 0.0
        denom = (self.noise_mw + si) + 0.0
        return self.eta_w * math.log2(1.0 + sig / denom)

    def relay_rate(self, s: int, via: int, d: int, slot: int) -> float:
        """Planning rate through a decode-and-forward relay: min of the hops.

        The relay receives while its own transmitter serves the second hop,
        so the first hop carries the self-interference penalty.
        """
        first = self.solo_rate(s, via, slot, True)
        if first <= 0.0:
            return 0.0
        second = self.solo_rate(via, d, slot, False)
        return min(first, second)

    def relay_rates(self, s: int, d: int, cands, slot: int):
        return [self.relay_rate(s, c, d, slot) for c in cands]

    def slot_rates(self, link_tx, link_rx, slot: int):
        """Realized per-link rates for one slot's full active link set.

        Interference follows the active-set rule: every other link whose
        endpoints are disjoint from the victim's contributes received power
        (transmitter boresight on its own receiver, victim receiver boresight
        on its own transmitter); with shielding enabled, blocked interference
        paths contribute zero. A receiver that is also some link's
        transmitter takes the residual self-interference hit.
        """
        n = len(link_tx)
        xs = {}
        for k in range(n):
            for node in (link_tx[k], link_rx[k]):
                if node not in xs:
                    xs[node] = self.node_x(node, slot)
        is_tx = set(link_tx)
        rates = []
        for i in range(n):
            t = link_tx[i]
            r = link_rx[i]
            tx_x = xs[t]
            rx_x = xs[r]
            if self._blocked_xy(tx_x, self.y[t], rx_x, self.y[r]):
                rates.append(0.0)
                continue
            sig = self._signal_mw(tx_x, self.y[t], rx_x, self.y[r])
            si = self.si_mw if r in is_tx else 0.0
            acc = 0.0
            for j in range(n):
                if j == i:
                    continue
                p = link_tx[j]
                q = link_rx[j]
                if p == t or p == r or q == t or q == r:
                    continue
                if self.shield_interference and self._blocked_xy(
                    xs[p], self.y[p], rx_x, self.y[r]
                ):
                    continue
                acc += self._pair_mw(
                    xs[p], self.y[p], xs[q], self.y[q],
                    rx_x, self.y[r], tx_x, self.y[t],
                )
            denom = (self.noise_mw + si) + acc
            rates.append(self.eta_w * math.log2(1.0 + sig / denom))
        return rates
