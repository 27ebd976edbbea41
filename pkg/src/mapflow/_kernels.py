"""Compiled integration loop shared by integrate/lyapunov/classify.

One driver handles both steppers (classical RK4 with cubic Hermite dense
output, and Dormand-Prince 5(4) with PI step control and its 4th-order
continuous extension), optional co-integration of a tangent vector, sampling
at multiples of a stride, and detection of local maxima/minima of the first
state component over the measurement window.
"""
import math

import numba
import numpy as np

_jit = numba.njit(nogil=True, cache=True)

COMPLETED = 0
DIVERGED = 1
STEP_FAILURE = 2

RK4 = 0
DOPRI5 = 1

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
A71, A73, A74, A75, A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
)
D1, D3, D4, D5, D6, D7 = (
    -12715105075.0 / 11282082432.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
)


def _make_driver(TANGENT, METHOD):
    """Specialise the driver on (tangent, method).

    Both flags are closure constants so numba removes the dead branches.
    Passing them as runtime arguments, or handing array views to the field
    functions, costs several hundred ns per step in reference counting.
    """

    @_jit
    def _deriv(rhs, jac, params, z, n, out, J, yb, ob):
        if TANGENT:
            for i in range(n):
                yb[i] = z[i]
            rhs(yb, params, ob)
            for i in range(n):
                out[i] = ob[i]
            jac(yb, params, J)
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += J[i, j] * z[n + j]
                out[n + i] = s
        else:
            rhs(z, params, out)

    @_jit
    def _rk4_step(rhs, jac, params, z, n, h, f0, k2, k3, k4, tmp, znew, J, yb, ob):
        m = z.shape[0]
        for i in range(m):
            tmp[i] = z[i] + 0.5 * h * f0[i]
        _deriv(rhs, jac, params, tmp, n, k2, J, yb, ob)
        for i in range(m):
            tmp[i] = z[i] + 0.5 * h * k2[i]
        _deriv(rhs, jac, params, tmp, n, k3, J, yb, ob)
        for i in range(m):
            tmp[i] = z[i] + h * k3[i]
        _deriv(rhs, jac, params, tmp, n, k4, J, yb, ob)
        for i in range(m):
            znew[i] = z[i] + h / 6.0 * (f0[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

    @_jit
    def _dopri_step(rhs, jac, params, z, n, h, k1, k2, k3, k4, k5, k6, k7, tmp, znew, rtol, atol, J, yb, ob):
        """One trial step; ``k1 = f(z)`` on entry, ``k7 = f(znew)`` on exit."""
        m = z.shape[0]
        for i in range(m):
            tmp[i] = z[i] + h * A21 * k1[i]
        _deriv(rhs, jac, params, tmp, n, k2, J, yb, ob)
        for i in range(m):
            tmp[i] = z[i] + h * (A31 * k1[i] + A32 * k2[i])
        _deriv(rhs, jac, params, tmp, n, k3, J, yb, ob)
        for i in range(m):
            tmp[i] = z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _deriv(rhs, jac, params, tmp, n, k4, J, yb, ob)
        for i in range(m):
            tmp[i] = z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _deriv(rhs, jac, params, tmp, n, k5, J, yb, ob)
        for i in range(m):
            tmp[i] = z[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        _deriv(rhs, jac, params, tmp, n, k6, J, yb, ob)
        for i in range(m):
            znew[i] = z[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
        _deriv(rhs, jac, params, znew, n, k7, J, yb, ob)
        err = 0.0
        for i in range(m):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * max(abs(z[i]), abs(znew[i]))
            err += (e / sc) ** 2
        return math.sqrt(err / m)

    @_jit
    def _dense(z, znew, f0, f1, k3, k4, k5, k6, h, theta, n, out):
        """State components of the interpolant at ``t + theta*h``."""
        if METHOD == RK4:
            t2 = theta * theta
            t3 = t2 * theta
            h00 = 2.0 * t3 - 3.0 * t2 + 1.0
            h10 = t3 - 2.0 * t2 + theta
            h01 = -2.0 * t3 + 3.0 * t2
            h11 = t3 - t2
            for i in range(n):
                out[i] = h00 * z[i] + h10 * h * f0[i] + h01 * znew[i] + h11 * h * f1[i]
        else:
            th1 = 1.0 - theta
            for i in range(n):
                ydiff = znew[i] - z[i]
                bspl = h * f0[i] - ydiff
                r4 = ydiff - h * f1[i] - bspl
                r5 = h * (D1 * f0[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * f1[i])
                out[i] = z[i] + theta * (ydiff + th1 * (bspl + theta * (r4 + th1 * r5)))

    @_jit
    def _tangent_norm(z, n):
        s = 0.0
        for i in range(n, 2 * n):
            s += z[i] * z[i]
        return math.sqrt(s)

    @_jit
    def _scale_tangent(z, n, c):
        for i in range(n, 2 * n):
            z[i] *= c

    @_jit
    def drive(rhs, jac, params, y0, tangent, method, h_init, rtol, atol,
              t_end, t_measure, stride, bound, renorm,
              samples, sample_times, peaks, troughs):
        """Integrate from ``t = 0`` to ``t_end``.

        Returns ``(status, t_stop, n_samples, n_peaks, n_troughs, log_stretch,
        z_final)``.  ``samples``/``sample_times`` (capacity may be 0) receive the
        state at every multiple of ``stride``; maxima/minima of component 0 are
        detected from samples at ``t >= t_measure`` with parabolic refinement.
        ``log_stretch`` is the summed log growth of the tangent vector over
        ``[t_measure, t_stop]``.
        """
        n = y0.shape[0]
        m = 2 * n if TANGENT else n
        z = np.zeros(m)
        for i in range(n):
            z[i] = y0[i]
        if TANGENT:
            for i in range(n, m):
                z[i] = 1.0 / math.sqrt(n)
        znew = np.empty(m)
        f0 = np.empty(m)
        f1 = np.empty(m)
        k2 = np.empty(m)
        k3 = np.empty(m)
        k4 = np.empty(m)
        tmp = np.empty(m)
        k5 = np.empty(m)
        k6 = np.empty(m)
        J = np.empty((n, n))
        yb = np.empty(n)
        ob = np.empty(n)
        buf = np.empty(n)

        cap_s = samples.shape[0]
        cap_p = peaks.shape[0]
        cap_q = troughs.shape[0]
        n_samp = 0
        n_peak = 0
        n_trough = 0
        k_sample = 0
        # last three post-measurement samples of component 0
        s0 = 0.0
        s1 = 0.0
        have = 0

        status = COMPLETED
        log_stretch = 0.0
        measuring = t_measure <= 0.0
        next_renorm = t_measure + renorm

        # initial sample
        if cap_s > 0:
            for i in range(n):
                samples[0, i] = z[i]
            sample_times[0] = 0.0
            n_samp = 1
        if measuring:
            s1 = z[0]
            have = 1
        k_sample = 1

        _deriv(rhs, jac, params, z, n, f0, J, yb, ob)

        # Segments [0, t_measure] and [t_measure, t_end]; fixed steps are
        # stretched slightly so each segment holds an integer number of them.
        t = 0.0
        h = h_init
        if METHOD == DOPRI5:
            # initial step guess
            d0 = 0.0
            d1 = 0.0
            for i in range(m):
                sc = atol + rtol * abs(z[i])
                d0 += (z[i] / sc) ** 2
                d1 += (f0[i] / sc) ** 2
            d0 = math.sqrt(d0 / m)
            d1 = math.sqrt(d1 / m)
            if d0 < 1e-5 or d1 < 1e-5:
                h = 1e-6
            else:
                h = 0.01 * d0 / d1
            h = min(h, 0.1)
        err_old = 1e-4

        seg = 0
        while seg < 2:
            if seg == 0:
                seg_start = 0.0
                seg_end = min(t_measure, t_end) if t_measure > 0.0 else 0.0
            else:
                seg_start = max(t_measure, 0.0) if t_measure > 0.0 else 0.0
                seg_end = t_end
            seg += 1
            if seg_end <= seg_start:
                continue
            if seg == 2 and not measuring:
                measuring = True
                if TANGENT:
                    nrm = _tangent_norm(z, n)
                    _scale_tangent(z, n, 1.0 / nrm)
                    _deriv(rhs, jac, params, z, n, f0, J, yb, ob)
                next_renorm = t + renorm

            nsteps = 0
            hfix = 0.0
            if METHOD == RK4:
                nsteps = int(math.ceil((seg_end - seg_start) / h_init - 1e-9))
                if nsteps < 1:
                    nsteps = 1
                hfix = (seg_end - seg_start) / nsteps
            istep = 0
            while True:
                if METHOD == RK4:
                    if istep >= nsteps:
                        break
                    hs = hfix
                    _rk4_step(rhs, jac, params, z, n, hs, f0, k2, k3, k4, tmp, znew, J, yb, ob)
                    istep += 1
                    t_new = seg_start + istep * hfix
                    if istep == nsteps:
                        t_new = seg_end
                    _deriv(rhs, jac, params, znew, n, f1, J, yb, ob)
                else:
                    if t >= seg_end:
                        break
                    hs = h
                    if t + hs > seg_end:
                        hs = seg_end - t
                    err = _dopri_step(rhs, jac, params, z, n, hs, f0, k2, k3, k4, k5, k6, f1, tmp, znew, rtol, atol, J, yb, ob)
                    if not (err <= 1.0):
                        # reject; non-finite err also lands here
                        if err != err or err > 1e300:
                            fac = 0.2
                        else:
                            fac = max(0.2, 0.9 * err ** (-0.2))
                        h = hs * fac
                        if h < 1e-12:
                            status = STEP_FAILURE
                            break
                        continue
                    # PI controller (Gustafsson): exponents 0.7/5 and 0.4/5
                    e = max(err, 1e-10)
                    fac = 0.9 * e ** (-0.14) * err_old ** 0.08
                    fac = min(5.0, max(0.2, fac))
                    err_old = max(err, 1e-4)
                    if hs == h:
                        h = hs * fac
                    else:
                        h = max(h, hs * fac) if fac > 1.0 else min(h, hs * fac)
                    if h < 1e-12:
                        status = STEP_FAILURE
                        break
                    t_new = t + hs
                    if seg_end - t_new < 1e-12 * max(1.0, abs(seg_end)):
                        t_new = seg_end

                # divergence check on the state components
                bad = False
                for i in range(n):
                    v = znew[i]
                    if not (abs(v) <= bound):
                        bad = True
                if TANGENT:
                    for i in range(n, m):
                        if not math.isfinite(znew[i]):
                            bad = True
                if bad:
                    status = DIVERGED
                    t = t_new
                    break

                # samples at multiples of stride inside (t, t_new]
                while True:
                    ts = k_sample * stride
                    if ts > t_new + 1e-9 * stride:
                        break
                    theta = (ts - t) / hs
                    if theta > 1.0:
                        theta = 1.0
                    if theta < 0.0:
                        theta = 0.0
                    _dense(z, znew, f0, f1, k3, k4, k5, k6, hs, theta, n, buf)
                    if n_samp < cap_s:
                        for i in range(n):
                            samples[n_samp, i] = buf[i]
                        sample_times[n_samp] = ts
                        n_samp += 1
                    if ts >= t_measure - 1e-9 * stride:
                        x = buf[0]
                        if have >= 2:
                            if s1 > s0 and s1 >= x:
                                den = x - 2.0 * s1 + s0
                                pv = s1
                                if den != 0.0:
                                    pv = s1 - (x - s0) * (x - s0) / (8.0 * den)
                                if n_peak < cap_p:
                                    peaks[n_peak] = pv
                                    n_peak += 1
                            elif s1 < s0 and s1 <= x:
                                den = x - 2.0 * s1 + s0
                                pv = s1
                                if den != 0.0:
                                    pv = s1 - (x - s0) * (x - s0) / (8.0 * den)
                                if n_trough < cap_q:
                                    troughs[n_trough] = pv
                                    n_trough += 1
                        s0 = s1
                        s1 = x
                        if have < 2:
                            have += 1
                    k_sample += 1

                # accept
                for i in range(m):
                    z[i] = znew[i]
                    f0[i] = f1[i]
                t = t_new

                if TANGENT:
                    if measuring:
                        if t >= next_renorm - 1e-12 or t >= t_end:
                            nrm = _tangent_norm(z, n)
                            log_stretch += math.log(nrm)
                            _scale_tangent(z, n, 1.0 / nrm)
                            _deriv(rhs, jac, params, z, n, f0, J, yb, ob)
                            while next_renorm <= t + 1e-12:
                                next_renorm += renorm
                    else:
                        nrm = _tangent_norm(z, n)
                        if nrm > 1e100 or nrm < 1e-100:
                            _scale_tangent(z, n, 1.0 / nrm)
                            _deriv(rhs, jac, params, z, n, f0, J, yb, ob)
            if status != COMPLETED:
                break

        if TANGENT and measuring and status != COMPLETED:
            nrm = _tangent_norm(z, n)
            if nrm > 0.0 and math.isfinite(nrm):
                log_stretch += math.log(nrm)
        return status, t, n_samp, n_peak, n_trough, log_stretch, z[:n].copy()

    return drive


_DRIVERS = {(t, m): _make_driver(t, m) for t in (False, True) for m in (RK4, DOPRI5)}


def drive(rhs, jac, params, y0, tangent, method, *args):
    """Dispatch to the compiled specialisation for ``(tangent, method)``."""
    return _DRIVERS[(bool(tangent), int(method))](rhs, jac, params, y0, tangent, method, *args)
