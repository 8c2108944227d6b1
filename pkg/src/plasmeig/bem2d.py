"""Layer-potential operators and Dirichlet-to-Neumann maps on a plane curve.

Nystrom discretization on the uniform parameter grid of a CurveSample. The
single-layer operator (S phi)(x) = (1/2pi) int log|x-y| phi(y) ds(y) is
assembled with the periodic log-singularity splitting quadrature (exact
Fourier weights for the log(2 sin) part, trapezoid for the smooth
remainder), which is spectrally accurate for smooth densities. The adjoint
double-layer kernel is smooth on smooth curves and keeps plain trapezoid
weights; its diagonal is the curvature limit.

From these the interior and exterior Dirichlet-to-Neumann operators are

    N- = (-1/2 I + K*) S^{-1}
    N+ = (+1/2 I + K*) B        with B the bordered solve
                                 S phi + c = g, <phi, 1>_w = 0,

the bordered system enforcing boundedness of the exterior extension, so
both operators annihilate constants. N- is positive semidefinite and N+
negative semidefinite on mean-zero data. Curves whose single layer is
singular (logarithmic capacity near 1) are rescaled by the fixed factor 2
and the resulting operators mapped back to the original curve.
"""

import json
import math

import numpy as np
import scipy.linalg

from .curve2d import sample_curve
from .errors import GeometryError, NumericalError, RescaleRequiredError

_CAPACITY_TOL = 1e-6
_RESCALE_FACTOR = 2.0


class BoundaryOperator:
    """A dense operator on boundary node values plus its quadrature weights.

    The weights define the discrete inner product <f, g> = sum f g w used in
    all symmetry and definiteness statements.
    """

    def __init__(self, matrix, weights, name):
        self.matrix = np.asarray(matrix, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.name = name
        if self.matrix.shape != (len(self.weights),) * 2:
            raise NumericalError("bem2d", "BoundaryOperator",
                                 "matrix must be square and match the weights",
                                 "shape %s vs %d weights"
                                 % (self.matrix.shape, len(self.weights)))
        self.matrix.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self):
        return len(self.weights)

    def apply(self, g):
        return self.matrix @ np.asarray(g, dtype=float)

    def inner(self, f, g):
        return float(np.dot(np.asarray(f) * self.weights, g))

    def symmetry_residual(self):
        """Relative departure from weighted self-adjointness."""
        wm = self.weights[:, None] * self.matrix
        return float(np.linalg.norm(wm - wm.T) / max(np.linalg.norm(wm), 1e-300))

    def dump(self, path, curve_hash=""):
        """Binary row-major float64 with a one-line JSON header."""
        header = {"n": self.n, "curve_hash": curve_hash, "name": self.name,
                  "dtype": "float64", "order": "C"}
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(np.ascontiguousarray(self.matrix).tobytes())
            fh.write(np.ascontiguousarray(self.weights).tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            n = header["n"]
            mat = np.frombuffer(fh.read(8 * n * n), dtype=float).reshape(n, n)
            w = np.frombuffer(fh.read(8 * n), dtype=float)
        return cls(mat.copy(), w.copy(), header["name"]), header


class DtNPair:
    """Interior and exterior DtN operators sharing one curve sample."""

    def __init__(self, nminus, nplus, sample, single_layer, np_adjoint,
                 rescaled=False, scaled_sample=None):
        self.nminus = nminus
        self.nplus = nplus
        self.sample = sample
        self.single_layer = single_layer
        self.np_adjoint = np_adjoint
        self.rescaled = rescaled
        self.scaled_sample = scaled_sample if rescaled else sample

    @property
    def n(self):
        return self.sample.n

    @property
    def weights(self):
        return self.sample.weights


def _log_quadrature_weights(n):
    """Weights w_d for int_0^{2pi} log(2 |sin((t - s)/2)|) f(s) ds.

    Exact for trigonometric polynomials of degree < n/2 on the uniform grid;
    the classical Kussmaul-Martensen construction.
    """
    d = np.arange(n)
    tau = 2.0 * math.pi * d / n
    m = np.arange(1, n // 2)
    w = -(2.0 * math.pi / n) * (
        np.cos(np.outer(tau, m)) @ (1.0 / m)
        + np.cos((n // 2) * tau) / n)
    return w


def assemble_single_layer(sample, check_capacity=True):
    """Single-layer operator with spectrally accurate log-split quadrature.

    Raises RescaleRequiredError when the smallest singular value indicates a
    logarithmic capacity degeneracy (the constant eigenvalue R log R of a
    circle of radius 1 vanishes).
    """
    n = sample.n
    x = sample.nodes
    t = sample.t
    diff = x[:, None, :] - x[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    halfsin = np.abs(np.sin(0.5 * (t[:, None] - t[None, :])))
    np.fill_diagonal(dist, 1.0)
    np.fill_diagonal(halfsin, 0.5)
    smooth = dist / (2.0 * halfsin)
    np.fill_diagonal(smooth, sample.speed)

    w = _log_quadrature_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    logpart = w[idx]
    mat = (logpart + (2.0 * math.pi / n) * np.log(smooth)) / (2.0 * math.pi)
    mat = mat * sample.speed[None, :]
    op = BoundaryOperator(mat, sample.weights, "single_layer")
    if check_capacity:
        smin = scipy.linalg.svdvals(mat)[-1]
        if smin < _CAPACITY_TOL:
            raise RescaleRequiredError(
                "bem2d", "assemble_single_layer",
                "single layer must be invertible; logarithmic capacity near 1"
                " requires rescaling the curve",
                "sigma_min=%.3g" % smin)
    return op


def assemble_np_adjoint(sample):
    """Adjoint double-layer (Neumann-Poincare) operator K*.

    Smooth kernel <x_i - x_j, n_i> / |x_i - x_j|^2 with the curvature
    diagonal; on the unit circle K* maps constants to 1/2 and kills
    mean-zero densities.
    """
    n = sample.n
    x = sample.nodes
    diff = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    num = np.einsum("ik,ijk->ij", sample.normals, diff)
    kern = num / r2
    # kernel diagonal: limit is half the standard (counterclockwise) curvature,
    # i.e. minus half the signed curvature in the outward-normal convention
    np.fill_diagonal(kern, -0.5 * sample.curvature)
    mat = kern * sample.speed[None, :] / n
    return BoundaryOperator(mat, sample.weights, "np_adjoint")


def _bordered_density_solver(smat, weights):
    """Factorized solver for S phi + c = g with the zero-mean constraint."""
    n = len(weights)
    big = np.zeros((n + 1, n + 1))
    big[:n, :n] = smat
    big[:n, n] = 1.0
    big[n, :n] = weights
    lu = scipy.linalg.lu_factor(big)

    def solve(rhs):
        ext = np.zeros(rhs.shape[0] + 1 if rhs.ndim == 1 else (n + 1, rhs.shape[1]))
        ext[:n] = rhs
        sol = scipy.linalg.lu_solve(lu, ext)
        return sol[:n], sol[n]

    return solve


def build_dtn(sample):
    """Assemble the interior/exterior DtN pair for a curve sample.

    Auto-rescales by the fixed factor 2 when the single layer is capacity
    degenerate; the returned operators always act on node values of the
    original curve (DtN of the scaled curve times the scale factor).
    """
    work = sample
    scale = 1.0
    try:
        sop = assemble_single_layer(work)
    except RescaleRequiredError:
        scale = _RESCALE_FACTOR
        work = sample.scaled(scale)
        sop = assemble_single_layer(work)

    kstar = assemble_np_adjoint(sample)  # scale invariant; assemble on base
    smat = sop.matrix
    n = sample.n
    eye = np.eye(n)

    s_inv = scipy.linalg.solve(smat, eye)
    nminus = scale * ((-0.5 * eye + kstar.matrix) @ s_inv)

    solve = _bordered_density_solver(smat, work.weights)
    phi_cols, _ = solve(eye)
    nplus = scale * ((0.5 * eye + kstar.matrix) @ phi_cols)

    pair = DtNPair(
        nminus=BoundaryOperator(nminus, sample.weights, "dtn_interior"),
        nplus=BoundaryOperator(nplus, sample.weights, "dtn_exterior"),
        sample=sample,
        single_layer=sop,
        np_adjoint=kstar,
        rescaled=(scale != 1.0),
        scaled_sample=work)
    return pair


def build_dtn_for_curve(curve, n):
    return build_dtn(sample_curve(curve, n))


def _point_in_polygon(point, nodes):
    """Crossing-parity test against the sampled polygon."""
    x, y = point
    px = nodes[:, 0]
    py = nodes[:, 1]
    qx = np.roll(px, -1)
    qy = np.roll(py, -1)
    crosses = ((py > y) != (qy > y)) & (
        x < px + (y - py) * (qx - px) / np.where(qy != py, qy - py, 1.0))
    return int(np.count_nonzero(crosses)) % 2 == 1


def compute_g0(dtn, y0=None):
    """Boundary function characterizing decaying exterior data.

    g0 is the normal derivative of the unique exterior harmonic function that
    vanishes on the boundary and grows like (1/2pi) log|x|; a mean-zero datum
    g extends to a decaying exterior harmonic exactly when <g, g0> = 0.
    Built from the Newton potential of an interior point (default: node
    centroid) minus its bounded exterior extension, then normalized so the
    boundary integral of g0 is one. The result does not depend on the chosen
    interior point.
    """
    sample = dtn.sample
    if y0 is None:
        total = sample.weights.sum()
        y0 = (sample.nodes * sample.weights[:, None]).sum(axis=0) / total
    y0 = np.asarray(y0, dtype=float)
    if not _point_in_polygon(y0, sample.nodes):
        raise GeometryError("bem2d", "compute_g0",
                            "base point must lie inside the curve",
                            "y0=%s" % y0.tolist())
    diff = sample.nodes - y0[None, :]
    r2 = np.einsum("ij,ij->i", diff, diff)
    boundary_vals = 0.25 * np.log(r2) / math.pi
    dn_newton = np.einsum("ij,ij->i", sample.normals, diff) / (2.0 * math.pi * r2)
    g0 = dn_newton - dtn.nplus.apply(boundary_vals)
    flux = float(np.dot(g0, sample.weights))
    if abs(flux) < 1e-8:
        raise NumericalError("bem2d", "compute_g0",
                             "total flux of the log-growing solution must be 1",
                             "flux=%.3g" % flux)
    return g0 / flux


def farfield_log_coefficient(dtn, g):
    """Coefficient of log|x| in the plain single-layer exterior extension.

    Vanishes (to quadrature accuracy) exactly when <g, g0> = 0; mean-zero
    densities produce bounded extensions.
    """
    work = dtn.scaled_sample
    phi = scipy.linalg.solve(dtn.single_layer.matrix, np.asarray(g, dtype=float))
    return float(np.dot(phi, work.weights)) / (2.0 * math.pi)
