"""Compiled DOP853 kernel for a single spectral mode.

The mode equations are

    w' = sqrt(lam) * z
    z' = -c(t)**2 * sqrt(lam) * w - b(t) * z

Coefficient profiles arrive as segment tables ``(starts, kinds, pars)``:

    kind 0:  pars[0] + pars[1] * t
    kind 1:  pars[0] + pars[1] * (1 + t) ** -pars[2]
    kind 2:  pars[0] + pars[1] * exp(-pars[2] * t)

Segment ``i`` is active on ``[starts[i], starts[i + 1])``.  The Butcher
tableau, error estimators and dense-output weights are the Hairer-Wanner
DOP853 tables as shipped with scipy.
"""

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _coef_tables

N_STAGES = _coef_tables.N_STAGES
A = np.ascontiguousarray(_coef_tables.A, dtype=np.float64)
B = np.ascontiguousarray(_coef_tables.B, dtype=np.float64)
C = np.ascontiguousarray(_coef_tables.C, dtype=np.float64)
E3 = np.ascontiguousarray(_coef_tables.E3, dtype=np.float64)
E5 = np.ascontiguousarray(_coef_tables.E5, dtype=np.float64)
D = np.ascontiguousarray(_coef_tables.D, dtype=np.float64)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1.0 / 8.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_NON_FINITE = 2


@njit(cache=True, nogil=True)
def find_segment(t, starts):
    lo = 0
    hi = starts.shape[0] - 1
    if t < starts[0]:
        return 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if starts[mid] <= t:
            lo = mid
        else:
            hi = mid - 1
    return lo


@njit(cache=True, nogil=True)
def coef_value(t, starts, kinds, pars, seg):
    if seg < 0:
        seg = find_segment(t, starts)
    k = kinds[seg]
    if k == 0:
        return pars[seg, 0] + pars[seg, 1] * t
    elif k == 1:
        return pars[seg, 0] + pars[seg, 1] * (1.0 + t) ** (-pars[seg, 2])
    else:
        return pars[seg, 0] + pars[seg, 1] * np.exp(-pars[seg, 2] * t)


@njit(cache=True, nogil=True)
def _rhs(t, w, z, sq, sg, cs, ck, cp, cseg, bs, bk, bp, bseg):
    c = coef_value(t, cs, ck, cp, cseg)
    b = coef_value(t, bs, bk, bp, bseg)
    return sq * z, -sg * c * c * sq * w - b * z


@njit(cache=True, nogil=True)
def _rms(a, b):
    return np.sqrt(0.5 * (a * a + b * b))


@njit(cache=True, nogil=True)
def _initial_step(t0, w0, z0, fw0, fz0, sq, sg, cs, ck, cp, cseg, bs, bk, bp, bseg,
                  span, max_step, rtol, atol):
    # Hairer-Norsett-Wanner starting step heuristic, estimator order 7.
    sw = atol + abs(w0) * rtol
    sz = atol + abs(z0) * rtol
    d0 = _rms(abs(w0) / sw, abs(z0) / sz)
    d1 = _rms(abs(fw0) / sw, abs(fz0) / sz)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    w1 = w0 + h0 * fw0
    z1 = z0 + h0 * fz0
    fw1, fz1 = _rhs(t0 + h0, w1, z1, sq, sg, cs, ck, cp, cseg, bs, bk, bp, bseg)
    d2 = _rms(abs(fw1 - fw0) / sw, abs(fz1 - fz0) / sz) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1, span, max_step)


@njit(cache=True, nogil=True)
def integrate_mode(sq, w0, z0, bounds, seg_c, seg_b, out_t,
                   cs, ck, cp, bs, bk, bp, rtol, atol, max_step,
                   out_w, out_z, sg=1.0):
    """Integrate one mode across consecutive subintervals.

    ``bounds`` holds the subinterval end points (``bounds[0]`` is the start
    time); ``seg_c[i]``/``seg_b[i]`` pin the coefficient segment used on
    subinterval ``i`` (negative: look up per evaluation).  Solutions at the
    sorted times ``out_t`` are written to ``out_w``/``out_z``.

    ``sg`` multiplies the restoring force; anything but 1.0 is a deliberate
    mutation used to check that the invariant harness catches broken dynamics.

    Returns ``(status, t_fail, n_steps)``.
    """
    Kw = np.empty(16, dtype=np.complex128)
    Kz = np.empty(16, dtype=np.complex128)
    w = w0
    z = z0
    t = bounds[0]
    n_out = out_t.shape[0]
    j = 0
    while j < n_out and out_t[j] <= t:
        out_w[j] = w
        out_z[j] = z
        j += 1
    n_steps = 0
    for iv in range(bounds.shape[0] - 1):
        t_end = bounds[iv + 1]
        csg = seg_c[iv]
        bsg = seg_b[iv]
        if t_end <= t:
            continue
        fw, fz = _rhs(t, w, z, sq, sg, cs, ck, cp, csg, bs, bk, bp, bsg)
        h_abs = _initial_step(t, w, z, fw, fz, sq, sg, cs, ck, cp, csg, bs, bk,
                              bp, bsg, t_end - t, max_step, rtol, atol)
        while t < t_end:
            min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
            if h_abs > max_step:
                h_abs = max_step
            elif h_abs < min_step:
                h_abs = min_step
            rejected = False
            while True:
                if h_abs < min_step:
                    return STATUS_STEP_UNDERFLOW, t, n_steps
                t_new = t + h_abs
                if t_new >= t_end:
                    t_new = t_end
                h = t_new - t
                Kw[0] = fw
                Kz[0] = fz
                for s in range(1, N_STAGES):
                    tw = w
                    tz = z
                    for q in range(s):
                        a = A[s, q]
                        if a != 0.0:
                            tw += h * a * Kw[q]
                            tz += h * a * Kz[q]
                    Kw[s], Kz[s] = _rhs(t + C[s] * h, tw, tz, sq, sg, cs, ck, cp,
                                        csg, bs, bk, bp, bsg)
                w_new = w
                z_new = z
                for q in range(N_STAGES):
                    w_new += h * B[q] * Kw[q]
                    z_new += h * B[q] * Kz[q]
                fw_new, fz_new = _rhs(t_new, w_new, z_new, sq, sg, cs, ck, cp,
                                      csg, bs, bk, bp, bsg)
                Kw[N_STAGES] = fw_new
                Kz[N_STAGES] = fz_new
                if not (np.isfinite(w_new.real) and np.isfinite(w_new.imag)
                        and np.isfinite(z_new.real) and np.isfinite(z_new.imag)):
                    return STATUS_NON_FINITE, t, n_steps
                sw = atol + max(abs(w), abs(w_new)) * rtol
                sz = atol + max(abs(z), abs(z_new)) * rtol
                e5w = 0j
                e5z = 0j
                e3w = 0j
                e3z = 0j
                for q in range(N_STAGES + 1):
                    e5w += E5[q] * Kw[q]
                    e5z += E5[q] * Kz[q]
                    e3w += E3[q] * Kw[q]
                    e3z += E3[q] * Kz[q]
                e5 = (abs(e5w) / sw) ** 2 + (abs(e5z) / sz) ** 2
                e3 = (abs(e3w) / sw) ** 2 + (abs(e3z) / sz) ** 2
                denom = (e5 + 0.01 * e3) * 2.0
                # squared norms underflow for subnormal states
                if denom == 0.0:
                    err = 0.0
                else:
                    err = h * e5 / np.sqrt(denom)
                if err < 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = min(MAX_FACTOR, SAFETY * err ** ERROR_EXPONENT)
                    if rejected:
                        factor = min(1.0, factor)
                    h_abs = h * factor
                    break
                h_abs = h * max(MIN_FACTOR, SAFETY * err ** ERROR_EXPONENT)
                rejected = True
            n_steps += 1
            if j < n_out and out_t[j] < t_new:
                # dense output on (t, t_new)
                for s in range(N_STAGES + 1, 16):
                    tw = w
                    tz = z
                    for q in range(s):
                        a = A[s, q]
                        if a != 0.0:
                            tw += h * a * Kw[q]
                            tz += h * a * Kz[q]
                    Kw[s], Kz[s] = _rhs(t + C[s] * h, tw, tz, sq, sg, cs, ck, cp,
                                        csg, bs, bk, bp, bsg)
                Fw = np.empty(7, dtype=np.complex128)
                Fz = np.empty(7, dtype=np.complex128)
                dw = w_new - w
                dz = z_new - z
                Fw[0] = dw
                Fz[0] = dz
                Fw[1] = h * fw - dw
                Fz[1] = h * fz - dz
                Fw[2] = 2.0 * dw - h * (fw_new + fw)
                Fz[2] = 2.0 * dz - h * (fz_new + fz)
                for r in range(4):
                    aw = 0j
                    az = 0j
                    for q in range(16):
                        aw += D[r, q] * Kw[q]
                        az += D[r, q] * Kz[q]
                    Fw[3 + r] = h * aw
                    Fz[3 + r] = h * az
                while j < n_out and out_t[j] < t_new:
                    x = (out_t[j] - t) / h
                    yw = 0j
                    yz = 0j
                    for i in range(7):
                        yw += Fw[6 - i]
                        yz += Fz[6 - i]
                        if i % 2 == 0:
                            yw *= x
                            yz *= x
                        else:
                            yw *= 1.0 - x
                            yz *= 1.0 - x
                    out_w[j] = w + yw
                    out_z[j] = z + yz
                    j += 1
            t = t_new
            w = w_new
            z = z_new
            fw = fw_new
            fz = fz_new
            while j < n_out and out_t[j] <= t:
                out_w[j] = w
                out_z[j] = z
                j += 1
    return STATUS_OK, t, n_steps
