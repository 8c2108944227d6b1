"""Axisymmetric collocation oracle for eigenvalues of perturbed balls.

Interior and exterior harmonic expansions r^l P_l(cos theta) and
r^(-l-1) P_l(cos theta) are collocated on the surface r = rho(theta); the
continuity and plasmonic flux conditions become a generalized eigenvalue
pencil that converges exponentially in the truncation degree. The routine
shares nothing with the package (plain Legendre recurrences from numpy),
so finite differences of its eigenvalues give an independent oracle for
the first and second shape derivatives along axisymmetric families.
"""

import math

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre


def _legendre_values(lmax, x):
    """P_l(x) and P_l'(x) for l = 0..lmax, shapes (lmax+1, len(x))."""
    vals = np.empty((lmax + 1, len(x)))
    ders = np.empty((lmax + 1, len(x)))
    for l in range(lmax + 1):
        coeff = np.zeros(l + 1)
        coeff[l] = 1.0
        vals[l] = legendre.legval(x, coeff)
        ders[l] = legendre.legval(x, legendre.legder(coeff))
    return vals, ders


def axisym_eigenvalues(rho_fn, drho_fn, lmax=40):
    """All finite real eigenvalues of the collocated pencil, ascending."""
    x, _ = legendre.leggauss(lmax + 1)
    theta = np.arccos(x)
    rho = rho_fn(theta)
    drho = drho_fn(theta)
    sin_t = np.sin(theta)
    pv, pd = _legendre_values(lmax, x)

    ls = np.arange(lmax + 1, dtype=float)[None, :]
    rp = rho[:, None] ** ls                       # rho^l
    rm = rho[:, None] ** (-ls - 1.0)              # rho^(-l-1)
    # d/dtheta of P_l(cos theta) is -sin(theta) P_l'(x)
    ang = -(drho / rho ** 2)[:, None] * (-sin_t[:, None] * pd.T)
    val_c = rp * pv.T
    val_d = rm * pv.T
    flux_c = ls * rho[:, None] ** (ls - 1.0) * pv.T + rp * ang
    flux_d = -(ls + 1.0) * rho[:, None] ** (-ls - 2.0) * pv.T + rm * ang

    m = lmax + 1
    amat = np.zeros((2 * m, 2 * m))
    bmat = np.zeros((2 * m, 2 * m))
    amat[:m, :m] = val_c
    amat[:m, m:] = -val_d
    amat[m:, m:] = flux_d
    bmat[m:, :m] = -flux_c
    vals = scipy.linalg.eig(amat, bmat, right=False)
    vals = vals[np.isfinite(vals)]
    vals = vals[np.abs(vals.imag) < 1e-8].real
    return np.sort(vals)


def _y20(theta):
    return math.sqrt(5.0 / (16.0 * math.pi)) * (3.0 * np.cos(theta) ** 2 - 1.0)


def _dy20(theta):
    return math.sqrt(5.0 / (16.0 * math.pi)) * (-6.0 * np.cos(theta)
                                                * np.sin(theta))


def perturbed_eps_near(target, h, shape=_y20, dshape=_dy20, lmax=40):
    """Eigenvalue of the ball perturbed by r = 1 + h * shape(theta) that
    continues the unperturbed eigenvalue `target`."""
    vals = axisym_eigenvalues(lambda t: 1.0 + h * shape(t),
                              lambda t: h * dshape(t), lmax=lmax)
    vals = vals[(vals > 1.0) & (vals < 50.0)]
    return float(vals[np.argmin(np.abs(vals - target))])


def fd_derivatives(target=2.0, h=0.02, lmax=40):
    """Richardson-extrapolated first and second derivatives at h = 0 of the
    tracked eigenvalue along the Y_{2,0} family."""
    def first(step):
        return (perturbed_eps_near(target, step, lmax=lmax)
                - perturbed_eps_near(target, -step, lmax=lmax)) / (2.0 * step)

    def second(step):
        return (perturbed_eps_near(target, step, lmax=lmax) - 2.0 * target
                + perturbed_eps_near(target, -step, lmax=lmax)) / step ** 2

    d1 = (4.0 * first(h / 2.0) - first(h)) / 3.0
    d2 = (4.0 * second(h / 2.0) - second(h)) / 3.0
    return d1, d2
