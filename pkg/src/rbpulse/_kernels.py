"""Numba kernels for the density-matrix / field co-integration.

All kernels work on a packed parameter vector ``pv`` (float64[12]):

    0 omega21   1 omega43   2 delta_p          (rad/s)
    3 d31/hbar  4 d32/hbar  5 d41/hbar  6 d42/hbar   (rad/s per V/m)
    7 g31       8 g32       9 g41      10 g42        (1/s)
    11 gamma_deph                                    (1/s)

The Hamiltonian is built in units of rad/s (H/hbar).  The polarization
sum recorded by the slice integrator is sum(d_eg/hbar * rho_eg); the
caller folds hbar back into the propagation prefactor.
"""

import numpy as np
from numba import njit

__all__ = ["evolve_trajectory", "march"]


@njit(cache=True)
def _rhs(rho, E, pv, H, out):
    # H/hbar for the local field value
    for i in range(4):
        for j in range(4):
            H[i, j] = 0.0
    H[1, 1] = pv[0]
    H[2, 2] = -pv[2]
    H[3, 3] = pv[1] - pv[2]
    c31 = -1j * pv[3] * E
    c32 = -1j * pv[4] * E
    c41 = -1j * pv[5] * E
    c42 = -1j * pv[6] * E
    H[2, 0] = c31
    H[0, 2] = np.conj(c31)
    H[2, 1] = c32
    H[1, 2] = np.conj(c32)
    H[3, 0] = c41
    H[0, 3] = np.conj(c41)
    H[3, 1] = c42
    H[1, 3] = np.conj(c42)

    # -i [H, rho]
    for i in range(4):
        for j in range(4):
            acc = 0.0 + 0.0j
            for k in range(4):
                acc += H[i, k] * rho[k, j] - rho[i, k] * H[k, j]
            out[i, j] = -1j * acc

    # spontaneous decay: branching gains plus coherence damping
    g31 = pv[7]
    g32 = pv[8]
    g41 = pv[9]
    g42 = pv[10]
    out[0, 0] += g31 * rho[2, 2] + g41 * rho[3, 3]
    out[1, 1] += g32 * rho[2, 2] + g42 * rho[3, 3]
    half3 = 0.5 * (g31 + g32)
    half4 = 0.5 * (g41 + g42)
    for j in range(4):
        out[2, j] -= half3 * rho[2, j]
        out[j, 2] -= half3 * rho[j, 2]
        out[3, j] -= half4 * rho[3, j]
        out[j, 3] -= half4 * rho[j, 3]

    # extra dephasing on the four optical coherences only
    gd = pv[11]
    if gd != 0.0:
        for e in range(2, 4):
            for g in range(2):
                out[e, g] -= gd * rho[e, g]
                out[g, e] -= gd * rho[g, e]


@njit(cache=True)
def _rk4_step(rho, Ea, Em, Eb, dt, pv, H, k1, k2, k3, k4, tmp):
    _rhs(rho, Ea, pv, H, k1)
    for i in range(4):
        for j in range(4):
            tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
    _rhs(tmp, Em, pv, H, k2)
    for i in range(4):
        for j in range(4):
            tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
    _rhs(tmp, Em, pv, H, k3)
    for i in range(4):
        for j in range(4):
            tmp[i, j] = rho[i, j] + dt * k3[i, j]
    _rhs(tmp, Eb, pv, H, k4)
    sixth = dt / 6.0
    for i in range(4):
        for j in range(4):
            rho[i, j] += sixth * (
                k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
            )


@njit(cache=True)
def evolve_trajectory(rho0, E, dt, pv):
    """Integrate one atom over a sampled field; return the full trajectory.

    Field midpoints are linear interpolations of adjacent samples.
    Returns (traj[nt,4,4], max |trace-1| seen after any step).
    """
    nt = E.shape[0]
    traj = np.empty((nt, 4, 4), np.complex128)
    rho = rho0.copy()
    H = np.zeros((4, 4), np.complex128)
    k1 = np.zeros((4, 4), np.complex128)
    k2 = np.zeros((4, 4), np.complex128)
    k3 = np.zeros((4, 4), np.complex128)
    k4 = np.zeros((4, 4), np.complex128)
    tmp = np.zeros((4, 4), np.complex128)
    max_terr = 0.0
    for n in range(nt):
        for i in range(4):
            for j in range(4):
                traj[n, i, j] = rho[i, j]
        if n < nt - 1:
            Em = 0.5 * (E[n] + E[n + 1])
            _rk4_step(rho, E[n], Em, E[n + 1], dt, pv, H, k1, k2, k3, k4, tmp)
            terr = abs(rho[0, 0] + rho[1, 1] + rho[2, 2] + rho[3, 3] - 1.0)
            if terr > max_terr:
                max_terr = terr
    return traj, max_terr


@njit(cache=True)
def _slice_pol(rho_init, E, dt, pv, offsets, weights, pol, states, t_store_idx,
               do_store, trace_tol):
    """Integrate all velocity classes at one depth slice.

    Accumulates the weighted polarization sum in ``pol`` (complex[nt]) and,
    when ``do_store``, the weighted density matrix at the stored time
    indices in ``states`` (complex[n_store,4,4]).  Returns
    (max_trace_error, first_t_index_beyond_tol or -1).
    """
    nt = E.shape[0]
    nv = offsets.shape[0]
    H = np.zeros((4, 4), np.complex128)
    k1 = np.zeros((4, 4), np.complex128)
    k2 = np.zeros((4, 4), np.complex128)
    k3 = np.zeros((4, 4), np.complex128)
    k4 = np.zeros((4, 4), np.complex128)
    tmp = np.zeros((4, 4), np.complex128)
    pvc = pv.copy()
    max_terr = 0.0
    bad_t = -1
    for n in range(nt):
        pol[n] = 0.0
    if do_store:
        for m in range(states.shape[0]):
            for i in range(4):
                for j in range(4):
                    states[m, i, j] = 0.0

    for v in range(nv):
        pvc[2] = pv[2] + offsets[v]
        w = weights[v]
        rho = rho_init.copy()
        ptr = 0
        for n in range(nt):
            pol[n] += w * (
                pv[3] * rho[2, 0]
                + pv[4] * rho[2, 1]
                + pv[5] * rho[3, 0]
                + pv[6] * rho[3, 1]
            )
            if do_store and ptr < t_store_idx.shape[0] and t_store_idx[ptr] == n:
                for i in range(4):
                    for j in range(4):
                        states[ptr, i, j] += w * rho[i, j]
                ptr += 1
            if n < nt - 1:
                Em = 0.5 * (E[n] + E[n + 1])
                _rk4_step(rho, E[n], Em, E[n + 1], dt, pvc, H, k1, k2, k3, k4, tmp)
                terr = abs(rho[0, 0] + rho[1, 1] + rho[2, 2] + rho[3, 3] - 1.0)
                if terr > max_terr:
                    max_terr = terr
                    if terr > trace_tol and bad_t < 0:
                        bad_t = n + 1
    return max_terr, bad_t


@njit(cache=True)
def march(E_in, dt, dz, nz, pv, rho0, pref, offsets, weights, t_store_idx,
          z_store_idx, trace_tol):
    """z-outer / tau-inner Maxwell-Bloch march with a Heun corrector in z.

    For each slice: integrate the atoms over the whole retarded-time axis
    with the converged field of that slice, form the polarization source,
    take a provisional Euler step in z, re-integrate with the provisional
    field, and average both sources for the corrected field of the next
    slice.

    Returns (fields[nz+1, nt], states[n_store_z, n_store_t, 4, 4],
    max_trace_error, bad_z, bad_t); bad indices are -1 when the trace
    error stayed below ``trace_tol``.
    """
    nt = E_in.shape[0]
    n_ts = t_store_idx.shape[0]
    n_zs = z_store_idx.shape[0]
    fields = np.empty((nz + 1, nt), np.complex128)
    states = np.zeros((n_zs, n_ts, 4, 4), np.complex128)
    pol = np.zeros(nt, np.complex128)
    pol_prov = np.zeros(nt, np.complex128)
    state_buf = np.zeros((n_ts, 4, 4), np.complex128)

    for n in range(nt):
        fields[0, n] = E_in[n]

    max_terr = 0.0
    bad_z = -1
    bad_t = -1
    zptr = 0
    for k in range(nz + 1):
        do_store = zptr < n_zs and z_store_idx[zptr] == k
        terr, bt = _slice_pol(
            rho0, fields[k], dt, pv, offsets, weights, pol, state_buf,
            t_store_idx, do_store, trace_tol,
        )
        if terr > max_terr:
            max_terr = terr
            if bt >= 0 and bad_z < 0:
                bad_z = k
                bad_t = bt
        if do_store:
            for m in range(n_ts):
                for i in range(4):
                    for j in range(4):
                        states[zptr, m, i, j] = state_buf[m, i, j]
            zptr += 1
        if k < nz:
            # provisional Euler step, then trapezoidal corrector
            for n in range(nt):
                fields[k + 1, n] = fields[k, n] + dz * pref * pol[n]
            terr, bt = _slice_pol(
                rho0, fields[k + 1], dt, pv, offsets, weights, pol_prov,
                state_buf, t_store_idx, False, trace_tol,
            )
            if terr > max_terr:
                max_terr = terr
                if bt >= 0 and bad_z < 0:
                    bad_z = k + 1
                    bad_t = bt
            half = 0.5 * dz * pref
            for n in range(nt):
                fields[k + 1, n] = fields[k, n] + half * (pol[n] + pol_prov[n])
    return fields, states, max_terr, bad_z, bad_t
