# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled slot kernel.

Exact operation-order twin of `pykernel.py` (see that file for the
semantics); built with FP contraction disabled so both backends return
bit-identical rates. Keep the two files in sync when touching either.
"""

import array

from libc.math cimport acos, ceil, floor, log2, pow, sqrt, M_PI
from libc.stdlib cimport free, malloc

cdef double RAD2DEG = 180.0 / M_PI


cdef class Kernel:
    cdef readonly double[::1] x0
    cdef readonly double[::1] v
    cdef readonly double[::1] y
    cdef readonly double phase
    cdef readonly double period
    cdef readonly double blocked_len
    cdef readonly double band_lo
    cdef readonly double band_hi
    cdef readonly double k0pt
    cdef readonly double half_exp
    cdef readonly double g0_db
    cdef readonly double gsl_db
    cdef readonly double ml_half_deg
    cdef readonly double hpbw_deg
    cdef readonly double noise_mw
    cdef readonly double si_mw
    cdef readonly double eta_w
    cdef readonly double dt
    cdef readonly double main_gain_lin
    cdef readonly bint shield_interference
    cdef int n_nodes

    def __init__(self, x0, v, y,
                 double phase, double period, double blocked_len,
                 double band_lo, double band_hi,
                 double k0pt, double half_exp, double g0_db, double gsl_db,
                 double ml_half_deg, double hpbw_deg,
                 double noise_mw, double si_mw, double eta_w, double dt,
                 bint shield_interference):
        self.x0 = array.array('d', x0)
        self.v = array.array('d', v)
        self.y = array.array('d', y)
        self.n_nodes = len(x0)
        self.phase = phase
        self.period = period
        self.blocked_len = blocked_len
        self.band_lo = band_lo
        self.band_hi = band_hi
        self.k0pt = k0pt
        self.half_exp = half_exp
        self.g0_db = g0_db
        self.gsl_db = gsl_db
        self.ml_half_deg = ml_half_deg
        self.hpbw_deg = hpbw_deg
        self.noise_mw = noise_mw
        self.si_mw = si_mw
        self.eta_w = eta_w
        self.dt = dt
        self.shield_interference = shield_interference
        self.main_gain_lin = pow(10.0, (g0_db + g0_db) * 0.1)

    # -- geometry ----------------------------------------------------------

    cdef inline double _node_x(self, Py_ssize_t i, long slot) nogil:
        return self.x0[i] + self.v[i] * (slot * self.dt)

    def node_x(self, Py_ssize_t i, long slot):
        return self._node_x(i, slot)

    cdef bint _blocked_xy_c(self, double ax, double ay, double bx, double by) nogil:
        cdef double tmp, dy, t1, t2, t_lo, t_hi, dx, x1, x2, x_lo, x_hi
        cdef double n_min, n_max
        if self.blocked_len <= 0.0:
            return False
        if ay > by or (ay == by and ax > bx):
            tmp = ax; ax = bx; bx = tmp
            tmp = ay; ay = by; by = tmp
        dy = by - ay
        if dy == 0.0:
            if not (self.band_lo <= ay <= self.band_hi):
                return False
            if ax <= bx:
                x_lo = ax; x_hi = bx
            else:
                x_lo = bx; x_hi = ax
        else:
            t1 = (self.band_lo - ay) / dy
            t2 = (self.band_hi - ay) / dy
            t_lo = t1 if t1 < t2 else t2
            if t_lo < 0.0:
                t_lo = 0.0
            t_hi = t1 if t1 > t2 else t2
            if t_hi > 1.0:
                t_hi = 1.0
            if t_lo > t_hi:
                return False
            dx = bx - ax
            x1 = ax + t_lo * dx
            x2 = ax + t_hi * dx
            if x1 <= x2:
                x_lo = x1; x_hi = x2
            else:
                x_lo = x2; x_hi = x1
        n_min = ceil((x_lo - self.phase - self.blocked_len) / self.period)
        n_max = floor((x_hi - self.phase) / self.period)
        return n_min <= n_max

    def blocked(self, Py_ssize_t i, Py_ssize_t j, long slot):
        return self._blocked_xy_c(
            self._node_x(i, slot), self.y[i], self._node_x(j, slot), self.y[j]
        )

    # -- link budget -------------------------------------------------------

    cdef inline double _gain_db(self, double theta_deg) nogil:
        cdef double ratio
        if theta_deg <= self.ml_half_deg:
            ratio = (theta_deg + theta_deg) / self.hpbw_deg
            return self.g0_db - 3.01 * (ratio * ratio)
        return self.gsl_db

    cdef inline double _angle_deg(self, double ox, double oy, double ax, double ay,
                                  double bx, double by) nogil:
        cdef double v1x = ax - ox
        cdef double v1y = ay - oy
        cdef double v2x = bx - ox
        cdef double v2y = by - oy
        cdef double n1 = sqrt(v1x * v1x + v1y * v1y)
        cdef double n2 = sqrt(v2x * v2x + v2y * v2y)
        cdef double c = (v1x * v2x + v1y * v2y) / (n1 * n2)
        if c < -1.0:
            c = -1.0
        if c > 1.0:
            c = 1.0
        return acos(c) * RAD2DEG

    cdef inline double _signal_mw(self, double tx_x, double tx_y,
                                  double rx_x, double rx_y) nogil:
        cdef double dx = rx_x - tx_x
        cdef double dy = rx_y - tx_y
        cdef double d2 = dx * dx + dy * dy
        return self.k0pt * self.main_gain_lin * pow(d2, self.half_exp)

    cdef inline double _pair_mw(self, double px, double py, double bore_x, double bore_y,
                                double rx_x, double rx_y, double rbore_x,
                                double rbore_y) nogil:
        cdef double dx = rx_x - px
        cdef double dy = rx_y - py
        cdef double d2 = dx * dx + dy * dy
        cdef double g_tx = self._gain_db(self._angle_deg(px, py, bore_x, bore_y, rx_x, rx_y))
        cdef double g_rx = self._gain_db(self._angle_deg(rx_x, rx_y, rbore_x, rbore_y, px, py))
        cdef double gain_lin = pow(10.0, (g_tx + g_rx) * 0.1)
        return self.k0pt * gain_lin * pow(d2, self.half_exp)

    cdef double _solo_rate_c(self, Py_ssize_t t, Py_ssize_t r, long slot,
                             bint rx_transmits) nogil:
        cdef double tx_x = self._node_x(t, slot)
        cdef double rx_x = self._node_x(r, slot)
        cdef double sig, si, denom
        if self._blocked_xy_c(tx_x, self.y[t], rx_x, self.y[r]):
            return 0.0
        sig = self._signal_mw(tx_x, self.y[t], rx_x, self.y[r])
        si = self.si_mw if rx_transmits else 0.0
        denom = (self.noise_mw + si) + 0.0
        return self.eta_w * log2(1.0 + sig / denom)

    def solo_rate(self, Py_ssize_t t, Py_ssize_t r, long slot, bint rx_transmits):
        return self._solo_rate_c(t, r, slot, rx_transmits)

    cdef double _relay_rate_c(self, Py_ssize_t s, Py_ssize_t via, Py_ssize_t d,
                              long slot) nogil:
        cdef double first = self._solo_rate_c(s, via, slot, True)
        cdef double second
        if first <= 0.0:
            return 0.0
        second = self._solo_rate_c(via, d, slot, False)
        return first if first < second else second

    def relay_rate(self, Py_ssize_t s, Py_ssize_t via, Py_ssize_t d, long slot):
        return self._relay_rate_c(s, via, d, slot)

    def relay_rates(self, Py_ssize_t s, Py_ssize_t d, cands, long slot):
        return [self._relay_rate_c(s, c, d, slot) for c in cands]

    def slot_rates(self, link_tx, link_rx, long slot):
        cdef Py_ssize_t n = len(link_tx)
        cdef Py_ssize_t i, j, k
        cdef long *lt = <long *> malloc(n * sizeof(long))
        cdef long *lr = <long *> malloc(n * sizeof(long))
        cdef double *xs = <double *> malloc(self.n_nodes * sizeof(double))
        cdef bint *is_tx = <bint *> malloc(self.n_nodes * sizeof(bint))
        cdef double *out = <double *> malloc(n * sizeof(double))
        cdef long t, r, p, q
        cdef double tx_x, rx_x, sig, si, acc, denom
        if lt == NULL or lr == NULL or xs == NULL or is_tx == NULL or out == NULL:
            free(lt); free(lr); free(xs); free(is_tx); free(out)
            raise MemoryError()
        try:
            for i in range(n):
                lt[i] = link_tx[i]
                lr[i] = link_rx[i]
            with nogil:
                for k in range(self.n_nodes):
                    xs[k] = self._node_x(k, slot)
                    is_tx[k] = False
                for i in range(n):
                    is_tx[lt[i]] = True
                for i in range(n):
                    t = lt[i]
                    r = lr[i]
                    tx_x = xs[t]
                    rx_x = xs[r]
                    if self._blocked_xy_c(tx_x, self.y[t], rx_x, self.y[r]):
                        out[i] = 0.0
                        continue
                    sig = self._signal_mw(tx_x, self.y[t], rx_x, self.y[r])
                    si = self.si_mw if is_tx[r] else 0.0
                    acc = 0.0
                    for j in range(n):
                        if j == i:
                            continue
                        p = lt[j]
                        q = lr[j]
                        if p == t or p == r or q == t or q == r:
                            continue
                        if self.shield_interference and self._blocked_xy_c(
                            xs[p], self.y[p], rx_x, self.y[r]
                        ):
                            continue
                        acc = acc + self._pair_mw(
                            xs[p], self.y[p], xs[q], self.y[q],
                            rx_x, self.y[r], tx_x, self.y[t],
                        )
                    denom = (self.noise_mw + si) + acc
                    out[i] = self.eta_w * log2(1.0 + sig / denom)
            return [out[i] for i in range(n)]
        finally:
            free(lt); free(lr); free(xs); free(is_tx); free(out)
