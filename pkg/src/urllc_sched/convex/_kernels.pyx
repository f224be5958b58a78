# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled barrier kernels: fused constraint/gradient/Hessian assembly.

Mirrors _kernels_py exactly; tests assert both backends agree to
floating-point accuracy.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log, log1p, sqrt

cnp.import_array()

cdef double LN2 = log(2.0)


def eval_point(cnp.ndarray[double, ndim=1] phi_arr,
               cnp.ndarray[double, ndim=1] p_arr,
               double t, st):
    cdef double[::1] phi = phi_arr
    cdef double[::1] p = p_arr
    cdef double[::1] g = st.g
    cdef double[::1] a = st.a
    cdef double[::1] b = st.b
    cdef double[::1] pen_lin = st.pen_lin
    cdef double[::1] exw = st.exw
    cdef long[::1] rb = st.rb
    cdef long[::1] robot = st.robot
    cdef Py_ssize_t nc = phi.shape[0]
    cdef int n_rb = st.n_rb
    cdef int K = st.K
    cdef double Pmax = st.Pmax
    cdef double pen_quad = st.pen_quad

    cdef cnp.ndarray[double, ndim=1] s_rb_a = np.zeros(n_rb)
    cdef cnp.ndarray[double, ndim=1] su_a = np.zeros(K)
    cdef cnp.ndarray[double, ndim=1] sp_a = np.zeros(K)
    cdef double[::1] s_rb = s_rb_a
    cdef double[::1] su = su_a
    cdef double[::1] sp = sp_a

    cdef Py_ssize_t i
    cdef int j, k
    cdef double cap, z, logsum = 0.0, f0 = 0.0, c
    for i in range(nc):
        if phi[i] <= 0.0 or phi[i] >= 1.0 or p[i] <= 0.0:
            return False, INFINITY, INFINITY
        cap = phi[i] * Pmax - p[i]
        if cap <= 0.0:
            return False, INFINITY, INFINITY
        z = g[i] * p[i] / phi[i]
        s_rb[rb[i]] += exw[i] * phi[i]
        su[robot[i]] += phi[i] * log1p(z)
        sp[robot[i]] += phi[i]
        logsum += log(phi[i]) + log1p(-phi[i]) + log(p[i]) + log(cap)
        f0 += p[i] + pen_lin[i] * phi[i]
    for j in range(n_rb):
        c = 1.0 - s_rb[j]
        if c <= 0.0:
            return False, INFINITY, INFINITY
        logsum += log(c)
        f0 += 0.5 * pen_quad * s_rb[j] * s_rb[j]
    for k in range(K):
        c = su[k] / LN2 - a[k] * sp[k] - b[k]
        if c <= 0.0:
            return False, INFINITY, INFINITY
        logsum += log(c)
    return True, t * f0 - logsum, f0


def assemble(cnp.ndarray[double, ndim=1] phi_arr,
             cnp.ndarray[double, ndim=1] p_arr,
             double t, st):
    cdef double[::1] phi = phi_arr
    cdef double[::1] p = p_arr
    cdef double[::1] g = st.g
    cdef double[::1] a = st.a
    cdef double[::1] b = st.b
    cdef double[::1] pen_lin = st.pen_lin
    cdef double[::1] exw = st.exw
    cdef long[::1] rb = st.rb
    cdef long[::1] robot = st.robot
    cdef Py_ssize_t nc = phi.shape[0]
    cdef int n_rb = st.n_rb
    cdef int K = st.K
    cdef double Pmax = st.Pmax
    cdef double pen_quad = st.pen_quad
    cdef int r = n_rb + K

    cdef cnp.ndarray[double, ndim=1] s_rb_a = np.zeros(n_rb)
    cdef cnp.ndarray[double, ndim=1] su_a = np.zeros(K)
    cdef cnp.ndarray[double, ndim=1] sp_a = np.zeros(K)
    cdef cnp.ndarray[double, ndim=1] c_rb_a = np.empty(n_rb)
    cdef cnp.ndarray[double, ndim=1] c_rate_a = np.empty(K)
    cdef cnp.ndarray[double, ndim=1] gphi_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] gp_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] dff_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] dfp_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] dpp_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] ddet_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] beta_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] inv_cap2_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=1] z_a = np.empty(nc)
    cdef cnp.ndarray[double, ndim=2] uphi_a = np.zeros((nc, r))
    cdef cnp.ndarray[double, ndim=2] up_a = np.zeros((nc, r))
    cdef double[::1] s_rb = s_rb_a
    cdef double[::1] su = su_a
    cdef double[::1] sp = sp_a
    cdef double[::1] c_rb = c_rb_a
    cdef double[::1] c_rate = c_rate_a
    cdef double[::1] gphi = gphi_a
    cdef double[::1] gp = gp_a
    cdef double[::1] dff = dff_a
    cdef double[::1] dfp = dfp_a
    cdef double[::1] dpp = dpp_a
    cdef double[::1] ddet = ddet_a
    cdef double[::1] beta_v = beta_a
    cdef double[::1] inv_cap2_v = inv_cap2_a
    cdef double[::1] z_v = z_a
    cdef double[:, ::1] uphi = uphi_a
    cdef double[:, ::1] up = up_a

    cdef Py_ssize_t i
    cdef int j, k
    cdef double cap, z, zp1, logsum = 0.0, f0 = 0.0
    cdef double inv_cap, inv_cap2, one_m_phi, beta, dc_dphi, dc_dp, box_phi
    cdef double inv_crb, inv_crate, alpha

    for i in range(nc):
        cap = phi[i] * Pmax - p[i]
        z = g[i] * p[i] / phi[i]
        s_rb[rb[i]] += exw[i] * phi[i]
        su[robot[i]] += phi[i] * log1p(z)
        sp[robot[i]] += phi[i]
        logsum += log(phi[i]) + log1p(-phi[i]) + log(p[i]) + log(cap)
        f0 += p[i] + pen_lin[i] * phi[i]
    for j in range(n_rb):
        c_rb[j] = 1.0 - s_rb[j]
        logsum += log(c_rb[j])
        f0 += 0.5 * pen_quad * s_rb[j] * s_rb[j]
    for k in range(K):
        c_rate[k] = su[k] / LN2 - a[k] * sp[k] - b[k]
        logsum += log(c_rate[k])
    cdef double psi = t * f0 - logsum

    for i in range(nc):
        one_m_phi = 1.0 - phi[i]
        cap = phi[i] * Pmax - p[i]
        inv_cap = 1.0 / cap
        inv_cap2 = inv_cap * inv_cap
        z = g[i] * p[i] / phi[i]
        zp1 = 1.0 + z
        inv_crb = 1.0 / c_rb[rb[i]]
        inv_crate = 1.0 / c_rate[robot[i]]
        dc_dphi = (log1p(z) - z / zp1) / LN2 - a[robot[i]]
        dc_dp = g[i] / (zp1 * LN2)

        gphi[i] = (t * (pen_lin[i] + pen_quad * exw[i] * s_rb[rb[i]])
                   - 1.0 / phi[i] + 1.0 / one_m_phi
                   - Pmax * inv_cap + exw[i] * inv_crb
                   - inv_crate * dc_dphi)
        gp[i] = t - 1.0 / p[i] + inv_cap - inv_crate * dc_dp

        beta = inv_crate / (LN2 * phi[i] * zp1 * zp1)
        box_phi = 1.0 / (phi[i] * phi[i]) + 1.0 / (one_m_phi * one_m_phi)
        dff[i] = box_phi + Pmax * Pmax * inv_cap2 + z * z * beta
        dfp[i] = -Pmax * inv_cap2 - g[i] * z * beta
        dpp[i] = 1.0 / (p[i] * p[i]) + inv_cap2 + g[i] * g[i] * beta
        # expanded all-positive determinant (see _kernels_py.assemble)
        ddet[i] = (box_phi * (1.0 / (p[i] * p[i]) + g[i] * g[i] * beta)
                   + z * z * beta / (p[i] * p[i])
                   + inv_cap2 * (Pmax * Pmax / (p[i] * p[i]) + box_phi
                                 + beta * (Pmax * g[i] - z) * (Pmax * g[i] - z)))

        beta_v[i] = beta
        inv_cap2_v[i] = inv_cap2
        z_v[i] = z

        alpha = sqrt(inv_crb * inv_crb + t * pen_quad)
        uphi[i, rb[i]] = exw[i] * alpha
        uphi[i, n_rb + robot[i]] = dc_dphi * inv_crate
        up[i, n_rb + robot[i]] = dc_dp * inv_crate

    return (psi, f0, gphi_a, gp_a, dff_a, dfp_a, dpp_a, ddet_a, uphi_a, up_a,
            c_rb_a, c_rate_a, beta_a, inv_cap2_a, z_a)
