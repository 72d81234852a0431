# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled heralded click-statistics kernels.

Mirrors ``_kernel_py`` function for function; see that module for the
derivation of the cancellation-free heralded combination.
"""

from libc.math cimport cos, exp, expm1, log1p, sin, sqrt, tanh


cdef inline double _thermal_term(double n, double eta, double w, double c) nogil:
    cdef double x = 1.0 + eta * n * c
    return exp(-eta * w / x) / x


cdef inline double _heralded_term(double n2, double dn, double c_plus,
                                  double eta, double w, double c) nogil:
    cdef double x2 = 1.0 + eta * n2 * c
    cdef double x1 = x2 + eta * c * dn
    cdef double log_ratio = eta * w * eta * c * dn / (x1 * x2) - log1p(eta * c * dn / x2)
    return exp(-eta * w / x2) / x2 * (1.0 + c_plus * expm1(log_ratio))


cdef void _noclick(double tg2, double eta_h, double p_dc, double t, double eta,
                   double a2, double b2, double v2,
                   double* pj, double* pa, double* pb) nogil:
    cdef double r = 1.0 - t
    cdef double rh2 = 1.0 - eta_h
    cdef double d = 1.0 - rh2 * tg2
    cdef double n2 = rh2 * tg2 / d
    cdef double dn = eta_h * tg2 / ((1.0 - tg2) * d)
    cdef double c_plus = d / (tg2 * eta_h)
    cdef double u2 = a2 + b2 - v2
    cdef double k, ph, wd, z
    if u2 < 0.0:
        u2 = 0.0
    k = exp(-eta * u2)
    pj[0] = k * _heralded_term(n2, dn, c_plus, eta, v2, 1.0)
    pa[0] = _heralded_term(n2, dn, c_plus, eta, a2, r)
    pb[0] = _heralded_term(n2, dn, c_plus, eta, b2, t)
    if p_dc > 0.0:
        ph = eta_h * tg2 / d
        wd = (1.0 - ph) * p_dc
        z = ph + wd
        pj[0] = (ph * pj[0] + wd * k * _thermal_term(n2, eta, v2, 1.0)) / z
        pa[0] = (ph * pa[0] + wd * _thermal_term(n2, eta, a2, r)) / z
        pb[0] = (ph * pb[0] + wd * _thermal_term(n2, eta, b2, t)) / z


cdef double _correlator(double tg2, double eta_h, double p_dc, double t, double eta,
                        double ar, double ai, double br, double bi) nogil:
    cdef double sr = sqrt(1.0 - t)
    cdef double st = sqrt(t)
    cdef double vr = sr * ar + st * br
    cdef double vi = sr * ai + st * bi
    cdef double pj, pa, pb
    _noclick(tg2, eta_h, p_dc, t, eta, ar * ar + ai * ai, br * br + bi * bi,
             vr * vr + vi * vi, &pj, &pa, &pb)
    return 1.0 + 4.0 * pj - 2.0 * pa - 2.0 * pb


def heralded_noclick(double tg2, double eta_h, double p_dc, double t, double eta,
                     double a2, double b2, double v2):
    cdef double pj, pa, pb
    _noclick(tg2, eta_h, p_dc, t, eta, a2, b2, v2, &pj, &pa, &pb)
    return pj, pa, pb


def correlator(double tg2, double eta_h, double p_dc, double t, double eta,
               double ar, double ai, double br, double bi):
    return _correlator(tg2, eta_h, p_dc, t, eta, ar, ai, br, bi)


def chsh_sum(const double[:] x, double eta, double eta_h, double p_dc):
    cdef double tg = tanh(x[0])
    cdef double tg2 = tg * tg
    cdef double t = x[1]
    cdef double a1 = x[2]
    cdef double a2r, a2i, b1r, b1i, b2r, b2i
    if x.shape[0] > 6:
        a2r = x[3] * cos(x[6])
        a2i = x[3] * sin(x[6])
        b1r = x[4] * cos(x[7])
        b1i = x[4] * sin(x[7])
        b2r = x[5] * cos(x[8])
        b2i = x[5] * sin(x[8])
    else:
        a2r = x[3]
        a2i = 0.0
        b1r = x[4]
        b1i = 0.0
        b2r = x[5]
        b2i = 0.0
    return (
        _correlator(tg2, eta_h, p_dc, t, eta, a1, 0.0, b1r, b1i)
        + _correlator(tg2, eta_h, p_dc, t, eta, a1, 0.0, b2r, b2i)
        + _correlator(tg2, eta_h, p_dc, t, eta, a2r, a2i, b1r, b1i)
        - _correlator(tg2, eta_h, p_dc, t, eta, a2r, a2i, b2r, b2i)
    )
