"""Pure-Python heralded click-statistics kernels.

Reference implementation of the routines in ``_kernel.pyx``; both modules
expose the same functions with the same argument order and must agree to
rounding.

The heralded state is ``c_plus * th(n1) - c_minus * th(n2)`` with
``c_plus - c_minus = 1``.  Every no-click probability of a thermal state has
the shape ``K * exp(-eta*w / x) / x`` with ``x = 1 + eta*n*c``, so the
heralded combination is evaluated as

    h(n2) * (1 + c_plus * expm1(log h(n1) - log h(n2)))

where ``c_plus * (n1 - n2) = 1 / (1 - tanh(g)**2)`` keeps the product bounded
as ``g -> 0``.  The naive difference loses ~8 digits at ``g = 1e-4``.
"""

from math import cos, exp, expm1, log1p, sin, sqrt, tanh

__all__ = [
    "heralded_noclick",
    "correlator",
    "chsh_sum",
]


def _thermal_term(n, eta, w, c):
    x = 1.0 + eta * n * c
    return exp(-eta * w / x) / x


def _heralded_term(n2, dn, c_plus, eta, w, c):
    x2 = 1.0 + eta * n2 * c
    x1 = x2 + eta * c * dn
    log_ratio = eta * w * eta * c * dn / (x1 * x2) - log1p(eta * c * dn / x2)
    return exp(-eta * w / x2) / x2 * (1.0 + c_plus * expm1(log_ratio))


def heralded_noclick(tg2, eta_h, p_dc, t, eta, a2, b2, v2):
    """No-click probabilities ``(both, Alice, Bob)`` for the heralded state.

    ``a2``, ``b2`` are ``|alpha|**2``, ``|beta|**2`` and ``v2`` is
    ``|sqrt(1-t)*alpha + sqrt(t)*beta|**2``.  With ``p_dc > 0`` the herald is
    a photon click or an independent dark count, and dark-count heralds
    leave mode b in the no-click conditional state ``th(n2)``.
    """
    r = 1.0 - t
    rh2 = 1.0 - eta_h
    d = 1.0 - rh2 * tg2
    n2 = rh2 * tg2 / d
    dn = eta_h * tg2 / ((1.0 - tg2) * d)
    c_plus = d / (tg2 * eta_h)
    # |sqrt(t)*alpha - sqrt(r)*beta|**2, nonnegative up to rounding
    u2 = a2 + b2 - v2
    if u2 < 0.0:
        u2 = 0.0
    k = exp(-eta * u2)
    pj = k * _heralded_term(n2, dn, c_plus, eta, v2, 1.0)
    pa = _heralded_term(n2, dn, c_plus, eta, a2, r)
    pb = _heralded_term(n2, dn, c_plus, eta, b2, t)
    if p_dc > 0.0:
        ph = eta_h * tg2 / d
        wd = (1.0 - ph) * p_dc
        z = ph + wd
        pj = (ph * pj + wd * k * _thermal_term(n2, eta, v2, 1.0)) / z
        pa = (ph * pa + wd * _thermal_term(n2, eta, a2, r)) / z
        pb = (ph * pb + wd * _thermal_term(n2, eta, b2, t)) / z
    return pj, pa, pb


def correlator(tg2, eta_h, p_dc, t, eta, ar, ai, br, bi):
    """Heralded correlator for complex displacements ``ar+i*ai``, ``br+i*bi``."""
    sr = sqrt(1.0 - t)
    st = sqrt(t)
    vr = sr * ar + st * br
    vi = sr * ai + st * bi
    pj, pa, pb = heralded_noclick(
        tg2, eta_h, p_dc, t, eta, ar * ar + ai * ai, br * br + bi * bi, vr * vr + vi * vi
    )
    return 1.0 + 4.0 * pj - 2.0 * pa - 2.0 * pb


def chsh_sum(x, eta, eta_h, p_dc):
    """Raw ``E11 + E12 + E21 - E22`` for an optimizer parameter vector.

    Layout is ``(g, t, a1, a2, b1, b2)`` optionally followed by the phases
    ``(phi_a2, phi_b1, phi_b2)``; ``a1`` is real since only phase
    differences between the two parties enter.
    """
    tg = tanh(x[0])
    tg2 = tg * tg
    t = x[1]
    a1 = x[2]
    if len(x) > 6:
        a2r, a2i = x[3] * cos(x[6]), x[3] * sin(x[6])
        b1r, b1i = x[4] * cos(x[7]), x[4] * sin(x[7])
        b2r, b2i = x[5] * cos(x[8]), x[5] * sin(x[8])
    else:
        a2r, a2i = x[3], 0.0
        b1r, b1i = x[4], 0.0
        b2r, b2i = x[5], 0.0
    return (
        correlator(tg2, eta_h, p_dc, t, eta, a1, 0.0, b1r, b1i)
        + correlator(tg2, eta_h, p_dc, t, eta, a1, 0.0, b2r, b2i)
        + correlator(tg2, eta_h, p_dc, t, eta, a2r, a2i, b1r, b1i)
        - correlator(tg2, eta_h, p_dc, t, eta, a2r, a2i, b2r, b2i)
    )
