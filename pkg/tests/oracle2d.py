"""Closed-form plane oracles, independent of the package internals.

Everything here comes from separation of variables: elliptic coordinates
for the ellipse transmission problem, Fourier modes for the circle, and
the classical depolarization integral for spheroids (used to pin the sign
and scale of the first-order sphere results through an unrelated route).
"""

import math

import numpy as np
import scipy.integrate


def ellipse_plasmonic_eigenvalues(a, b, num):
    """Eigenvalues of the ellipse with semi-axes a > b: coth(k mu0) and
    tanh(k mu0) with mu0 = atanh(b/a), i.e. (1 +- q^k)/(1 -+ q^k) for
    q = (a-b)/(a+b). Returns the num values farthest from 1, ascending."""
    q = (a - b) / (a + b)
    out = []
    k = 1
    while len(out) < 2 * num:
        qk = q ** k
        out.append((1.0 - qk) / (1.0 + qk))
        out.append((1.0 + qk) / (1.0 - qk))
        k += 1
    out = np.array(out)
    keep = np.argsort(-np.abs(out - 1.0), kind="stable")[:num]
    return np.sort(out[keep])


def ellipse_np_eigenvalues(a, b, kmax):
    """Nonzero eigenvalues of the adjoint double-layer operator on the
    ellipse: +-(1/2) q^k, plus the constant eigenvalue 1/2."""
    q = (a - b) / (a + b)
    vals = [0.5]
    for k in range(1, kmax + 1):
        vals.append(0.5 * q ** k)
        vals.append(-0.5 * q ** k)
    return np.array(sorted(vals))


def circle_dtn_multiplier(l, radius=1.0):
    """Interior DtN of the circle acts on e^{i l t} as |l| / radius."""
    return abs(l) / radius


def spheroid_depolarization_z(c):
    """Depolarization factor along z of the spheroid x^2+y^2+z^2/c^2=1."""
    def integrand(s):
        return 0.5 * c / ((s + c * c) ** 1.5 * (s + 1.0))
    value, _ = scipy.integrate.quad(integrand, 0.0, np.inf, epsabs=1e-13,
                                    epsrel=1e-13)
    return value


def spheroid_eps_z(c):
    """Plasmonic eigenvalue of the z mode of a spheroid: (1-L)/L."""
    lz = spheroid_depolarization_z(c)
    return (1.0 - lz) / lz


def spheroid_epsdot_z(step=1e-5):
    """d/d delta of the z eigenvalue of the spheroid family c = 1 + delta.

    To first order that family is the normal shift with shape cos^2(theta)
    = 1/3 + (2/3) P2, so this derivative equals the z-branch of the
    first-order form for a = cos^2(theta); the exact value is 12/5.
    """
    return (spheroid_eps_z(1.0 + step)
            - spheroid_eps_z(1.0 - step)) / (2.0 * step)


def spheroid_epsddot_z(step=5e-3):
    """Richardson-extrapolated d^2/d delta^2 of the spheroid z eigenvalue.

    The exact value is 132/175. The spheroid radius expands as
    1 + d cos^2 + d^2 (3/2)(cos^4 - cos^2), so this curvature equals the
    pure-family second derivative for a = cos^2 plus twice the first-order
    response to the quadratic shape term; solving that relation for the
    Y_{2,0} family gives the frozen value 333/(35 pi).
    """
    def second(h):
        return (spheroid_eps_z(1.0 + h) - 2.0 * spheroid_eps_z(1.0)
                + spheroid_eps_z(1.0 - h)) / h ** 2
    return (4.0 * second(step / 2.0) - second(step)) / 3.0


def y20_amplitude_in_cos2():
    """Coefficient of Y_{2,0} in cos^2(theta) = 1/3 + (2/3) P2."""
    return (2.0 / 3.0) * math.sqrt(4.0 * math.pi / 5.0)


def epsddot_y20_from_spheroid():
    """Solve the curved-family relation for the pure Y_{2,0} second
    derivative using the numeric spheroid curvature.

    With alpha = 1/3 and beta the Y_{2,0} amplitude of cos^2:
    curvature = beta^2 E - 2 alpha beta edot + 2 edot_b, where E is the
    sought value, edot = 9/sqrt(5 pi) is the Y_{2,0} first derivative and
    edot_b = -18/35 is the response to the quadratic shape term (its P2
    coefficient is -1/7).
    """
    alpha = 1.0 / 3.0
    beta = y20_amplitude_in_cos2()
    edot = 9.0 / math.sqrt(5.0 * math.pi)
    edot_b = -18.0 / 35.0
    curvature = spheroid_epsddot_z()
    return (curvature + 2.0 * alpha * beta * edot - 2.0 * edot_b) / beta ** 2
