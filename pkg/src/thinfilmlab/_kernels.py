"""Compiled stepping kernels.

An explicit integrator for a fourth-order problem pays an h**4 step
restriction, so preset runs take 1e6..1e8 steps; the whole adaptive loop
therefore lives inside one nopython kernel.  The flux loop is dispatched on
a small integer code so each constitutive law compiles to a branch-free,
vectorisable loop (half-integer powers go through sqrt instead of pow).

The arithmetic fill helpers and stage updates run with fastmath; the error
test stays strict so NaN detection is reliable (a NaN that sneaks through a
fastmath min-reduction still poisons the error norm and rejects the step).
"""

import math

import numpy as np
from numba import njit

# flux dispatch codes
F_NEWT = 0          # u**3 * w                     (Newtonian, alpha = 1)
F_PL_HALF = 1       # power law alpha = 0.5, sigma = 0
F_PL_3HALF = 2      # power law alpha = 1.5, sigma = 0
F_PL_TWO = 3        # power law alpha = 2,   sigma = 0
F_PL_THREE = 4      # power law alpha = 3,   sigma = 0
F_PL_GEN0 = 5       # power law, generic alpha, sigma = 0
F_PL_GENS = 6       # power law, generic alpha, sigma > 0
F_ELLIS_3HALF = 7   # Ellis alpha = 1.5
F_ELLIS_TWO = 8     # Ellis alpha = 2
F_ELLIS_GEN = 9     # Ellis, generic alpha
F_NEWT_SCALED = 10  # a*(1+b) * u**3 * w           (Ellis, alpha = 1)

# termination codes
TERM_REACHED = 0
TERM_STEADY = 1
TERM_EXTINCT = 2
TERM_POSBREACH = 3
TERM_UNDERFLOW = 4
TERM_BLOWUP = 5
TERM_STEPLIMIT = 6


def flux_code(kind: str, alpha: float, sigma: float) -> int:
    """Map a rheology/regularisation pair onto a kernel dispatch code."""
    if kind == "newtonian":
        return F_NEWT
    if kind == "power_law":
        if alpha == 1.0:
            return F_NEWT
        if sigma == 0.0:
            if alpha == 0.5:
                return F_PL_HALF
            if alpha == 1.5:
                return F_PL_3HALF
            if alpha == 2.0:
                return F_PL_TWO
            if alpha == 3.0:
                return F_PL_THREE
            return F_PL_GEN0
        return F_PL_GENS
    # Ellis
    if alpha == 1.0:
        return F_NEWT_SCALED
    if alpha == 1.5:
        return F_ELLIS_3HALF
    if alpha == 2.0:
        return F_ELLIS_TWO
    return F_ELLIS_GEN


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _fill_faces(u, h, w, uf):
    """Third differences and mean heights at faces (mirror ghosts)."""
    n = u.shape[0]
    ih3 = 1.0 / (h * h * h)
    w[0] = 0.0
    w[n] = 0.0
    uf[0] = u[0]
    uf[n] = u[n - 1]
    # near-wall faces use the mirrored ghost value
    w[1] = (u[2] - 3.0 * u[1] + 2.0 * u[0]) * ih3
    uf[1] = 0.5 * (u[0] + u[1])
    w[n - 1] = (-u[n - 3] + 3.0 * u[n - 2] - 2.0 * u[n - 1]) * ih3
    uf[n - 1] = 0.5 * (u[n - 2] + u[n - 1])
    for j in range(2, n - 1):
        w[j] = (u[j + 1] - 3.0 * u[j] + 3.0 * u[j - 1] - u[j - 2]) * ih3
        uf[j] = 0.5 * (u[j - 1] + u[j])


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _fill_flux(w, uf, n, fcode, alpha, sigma, a, b, flux):
    flux[0] = 0.0
    flux[n] = 0.0
    if fcode == F_NEWT:
        for j in range(1, n):
            u = uf[j]
            flux[j] = u * u * u * w[j]
    elif fcode == F_PL_HALF:
        for j in range(1, n):
            u = uf[j]
            flux[j] = (u * u * math.sqrt(u)) \
                * math.copysign(math.sqrt(abs(w[j])), w[j])
    elif fcode == F_PL_3HALF:
        for j in range(1, n):
            u = uf[j]
            flux[j] = (u * u * u * math.sqrt(u)) \
                * math.sqrt(abs(w[j])) * w[j]
    elif fcode == F_PL_TWO:
        for j in range(1, n):
            u = uf[j]
            u2 = u * u
            flux[j] = (u2 * u2) * abs(w[j]) * w[j]
    elif fcode == F_PL_THREE:
        for j in range(1, n):
            u = uf[j]
            u2 = u * u
            wj = w[j]
            flux[j] = (u2 * u2 * u) * wj * wj * wj
    elif fcode == F_PL_GEN0:
        ex = alpha - 1.0
        for j in range(1, n):
            wj = w[j]
            if wj == 0.0:
                flux[j] = 0.0
            else:
                flux[j] = uf[j] ** (alpha + 2.0) * abs(wj) ** ex * wj
    elif fcode == F_PL_GENS:
        s2 = sigma * sigma
        ex = 0.5 * (alpha - 1.0)
        for j in range(1, n):
            wj = w[j]
            flux[j] = uf[j] ** (alpha + 2.0) * (wj * wj + s2) ** ex * wj
    elif fcode == F_ELLIS_3HALF:
        for j in range(1, n):
            u = uf[j]
            wj = w[j]
            flux[j] = (a * (1.0 + b * math.sqrt(abs(u * wj)))) \
                * (u * u * u * wj)
    elif fcode == F_ELLIS_TWO:
        for j in range(1, n):
            u = uf[j]
            wj = w[j]
            flux[j] = (a * (1.0 + b * abs(u * wj))) * (u * u * u * wj)
    elif fcode == F_ELLIS_GEN:
        ex = alpha - 1.0
        for j in range(1, n):
            u = uf[j]
            wj = w[j]
            flux[j] = (a * (1.0 + b * abs(u * wj) ** ex)) * (u * u * u * wj)
    else:  # F_NEWT_SCALED
        c = a * (1.0 + b)
        for j in range(1, n):
            u = uf[j]
            flux[j] = c * (u * u * u * w[j])


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _divergence(flux, h, dudt):
    n = dudt.shape[0]
    ih = 1.0 / h
    for i in range(n):
        dudt[i] = -(flux[i + 1] - flux[i]) * ih


@njit(cache=True, nogil=True)
def _rhs(u, h, fcode, alpha, sigma, a, b, w, uf, flux, dudt):
    _fill_faces(u, h, w, uf)
    _fill_flux(w, uf, u.shape[0], fcode, alpha, sigma, a, b, flux)
    _divergence(flux, h, dudt)


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _stage_axpy_min(u, k, c, y):
    """y = u + c*k; returns min(y) (fastmath: NaN handling deferred to the
    strict error test)."""
    n = u.shape[0]
    mn = u[0] + c * k[0]
    for i in range(n):
        v = u[i] + c * k[i]
        y[i] = v
        if v < mn:
            mn = v
    return mn


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _stage_combine_min(u, k1, k2, k3, c1, c2, c3, y):
    n = u.shape[0]
    mn = u[0] + c1 * k1[0] + c2 * k2[0] + c3 * k3[0]
    for i in range(n):
        v = u[i] + c1 * k1[i] + c2 * k2[i] + c3 * k3[i]
        y[i] = v
        if v < mn:
            mn = v
    return mn


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _energy_of(u, h):
    acc = 0.0
    for i in range(u.shape[0] - 1):
        d = u[i + 1] - u[i]
        acc += d * d
    return 0.5 * acc / h


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _dissipation_of(flux, w, h, n):
    acc = 0.0
    for j in range(1, n):
        acc += flux[j] * w[j]
    return h * acc


@njit(cache=True, nogil=True, fastmath=True)
def _record_row(samples, idx, t, e, d, u, h):
    n = u.shape[0]
    s = 0.0
    mn = u[0]
    mx = u[0]
    for i in range(n):
        v = u[i]
        s += v
        if v < mn:
            mn = v
        if v > mx:
            mx = v
    mean = s / n
    dev = 0.0
    for i in range(n):
        q = u[i] - mean
        dev += q * q
    samples[idx, 0] = t
    samples[idx, 1] = e
    samples[idx, 2] = d
    samples[idx, 3] = h * s
    samples[idx, 4] = mn
    samples[idx, 5] = mx
    samples[idx, 6] = math.sqrt(h * dev + 2.0 * e)


@njit(cache=True, nogil=True)
def _push_row(samples, nsmp, stride, t, e, d, u, h):
    """Append a diagnostics row, decimating in place when the buffer is
    full (doubling the effective stride).  Skips duplicate times."""
    if nsmp > 0 and not samples[nsmp - 1, 0] < t:
        return nsmp, stride
    if nsmp == samples.shape[0]:
        half = (nsmp + 1) // 2
        for i in range(1, half):
            for j in range(7):
                samples[i, j] = samples[2 * i, j]
        nsmp = half
        stride *= 2
    _record_row(samples, nsmp, t, e, d, u, h)
    return nsmp + 1, stride


@njit(cache=True, nogil=True)
def _integrate_adaptive(u0, h, fcode, alpha, sigma, a, b,
                        t_end, rel_tol, abs_tol, dt0, dt_min,
                        pos_floor, e_threshold, extinct_flag,
                        stride0, samples, snap_times, snap_u, snap_t,
                        max_steps, u_final):
    """Bogacki-Shampine 3(2) with FSAL, positivity guard and event handling.

    Returns (n_samples, term_code, term_time, n_accepted, n_rejected_err,
    n_rejected_pos, n_snapshots, t_last_good, final_stride).
    """
    n = u0.shape[0]
    n_snap = snap_times.shape[0]

    u = u0.copy()
    y2 = np.empty(n)
    ynew = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    wc = np.empty(n + 1)
    ufc = np.empty(n + 1)
    fc = np.empty(n + 1)
    ws = np.empty(n + 1)
    ufs = np.empty(n + 1)
    fs = np.empty(n + 1)
    w4 = np.empty(n + 1)
    uf4 = np.empty(n + 1)
    f4 = np.empty(n + 1)

    _rhs(u, h, fcode, alpha, sigma, a, b, wc, ufc, fc, k1)
    e = _energy_of(u, h)
    d = _dissipation_of(fc, wc, h, n)

    stride = stride0
    nsmp, stride = _push_row(samples, 0, stride, 0.0, e, d, u, h)

    isnap = 0
    while isnap < n_snap and snap_times[isnap] <= 0.0:
        snap_u[isnap, :] = u
        snap_t[isnap] = 0.0
        isnap += 1

    for i in range(n):
        u_final[i] = u[i]
    if e <= e_threshold:
        return nsmp, TERM_STEADY, 0.0, 0, 0, 0, isnap, 0.0, stride

    t = 0.0
    t_prev = 0.0
    dt = dt0
    since = 0
    nacc = 0
    nrej_e = 0
    nrej_p = 0

    while True:
        if nacc + nrej_e + nrej_p >= max_steps:
            d = _dissipation_of(fc, wc, h, n)
            nsmp, stride = _push_row(samples, nsmp, stride, t, e, d, u, h)
            for i in range(n):
                u_final[i] = u[i]
            return nsmp, TERM_STEPLIMIT, t, nacc, nrej_e, nrej_p, isnap, t, \
                stride
        last = False
        if t + dt >= t_end:
            dt = t_end - t
            last = True
        if dt < dt_min and not last:
            d = _dissipation_of(fc, wc, h, n)
            nsmp, stride = _push_row(samples, nsmp, stride, t, e, d, u, h)
            for i in range(n):
                u_final[i] = u[i]
            return nsmp, TERM_UNDERFLOW, t, nacc, nrej_e, nrej_p, isnap, t, \
                stride

        # --- stages (FSAL: k1 is f at the current state) ---
        ok = True
        pos_fail = False
        mn = _stage_axpy_min(u, k1, dt * 0.5, y2)
        if not mn > pos_floor:
            ok = False
            pos_fail = mn == mn  # NaN counts as an error rejection
        if ok:
            _rhs(y2, h, fcode, alpha, sigma, a, b, ws, ufs, fs, k2)
            mn = _stage_axpy_min(u, k2, dt * 0.75, y2)
            if not mn > pos_floor:
                ok = False
                pos_fail = mn == mn
        if ok:
            _rhs(y2, h, fcode, alpha, sigma, a, b, ws, ufs, fs, k3)
            mn = _stage_combine_min(u, k1, k2, k3, dt * (2.0 / 9.0),
                                    dt * (1.0 / 3.0), dt * (4.0 / 9.0), ynew)
            if not mn > pos_floor:
                ok = False
                pos_fail = mn == mn

        err = math.inf
        if ok:
            _rhs(ynew, h, fcode, alpha, sigma, a, b, w4, uf4, f4, k4)
            e1 = -5.0 / 72.0
            e2 = 1.0 / 12.0
            e3 = 1.0 / 9.0
            e4 = -1.0 / 8.0
            acc = 0.0
            for i in range(n):
                est = dt * (e1 * k1[i] + e2 * k2[i] + e3 * k3[i] + e4 * k4[i])
                au = abs(u[i])
                av = abs(ynew[i])
                sc = abs_tol + rel_tol * (au if au > av else av)
                q = est / sc
                acc += q * q
            err = math.sqrt(acc / n)

        if ok and err <= 1.0:
            # accept: swap state and FSAL buffers
            tmp = u; u = ynew; ynew = tmp
            tmp = k1; k1 = k4; k4 = tmp
            tmp = wc; wc = w4; w4 = tmp
            tmp = ufc; ufc = uf4; uf4 = tmp
            tmp = fc; fc = f4; f4 = tmp
            t_prev = t
            t = t_end if last else t + dt
            nacc += 1
            since += 1
            e = _energy_of(u, h)
            if not math.isfinite(e):
                for i in range(n):
                    u_final[i] = u[i]
                return nsmp, TERM_BLOWUP, t, nacc, nrej_e, nrej_p, isnap, \
                    t_prev, stride

            while isnap < n_snap and t >= snap_times[isnap]:
                snap_u[isnap, :] = u
                snap_t[isnap] = t
                isnap += 1

            done = last
            code = TERM_REACHED
            if e <= e_threshold:
                done = True
                code = TERM_EXTINCT if extinct_flag else TERM_STEADY
            if done or since >= stride:
                d = _dissipation_of(fc, wc, h, n)
                nsmp, stride = _push_row(samples, nsmp, stride, t, e, d, u, h)
                since = 0
            if done:
                for i in range(n):
                    u_final[i] = u[i]
                return nsmp, code, t, nacc, nrej_e, nrej_p, isnap, t, stride
            # step-size controller (error estimator has order 2)
            if err > 1e-30:
                fac = 0.9 * err ** (-1.0 / 3.0)
                if fac > 5.0:
                    fac = 5.0
            else:
                fac = 5.0
            dt *= fac
        else:
            if pos_fail:
                nrej_p += 1
                dt *= 0.5
            else:
                nrej_e += 1
                if err == err and math.isfinite(err):
                    fac = 0.9 * err ** (-1.0 / 3.0)
                    if fac < 0.1:
                        fac = 0.1
                    if fac > 0.9:
                        fac = 0.9
                    dt *= fac
                else:
                    dt *= 0.5
            if dt < dt_min:
                d = _dissipation_of(fc, wc, h, n)
                nsmp, stride = _push_row(samples, nsmp, stride, t, e, d, u, h)
                for i in range(n):
                    u_final[i] = u[i]
                code = TERM_POSBREACH if pos_fail else TERM_UNDERFLOW
                return nsmp, code, t, nacc, nrej_e, nrej_p, isnap, t, stride
