"""Self-contained acceptance checks shared by the CLI and the test suite.

Each check builds its own inputs, measures the quantities named in its
verdict, and returns a CheckResult; nothing here depends on test-runner
state. Oracle values (elliptic coordinates, the hemisphere disk integral,
the frozen second-order baseline) are computed by routes independent of the
operators they validate.
"""

import math
import time

import numpy as np

from .bem2d import build_dtn, compute_g0, farfield_log_coefficient
from .curve2d import CurveParam, ShapeFn2D, perturb_curve, sample_curve
from .dtn_shape import (banded_opnorm, fd_operator_check,
                        shape_derivative_matrix)
from .errors import ConfigError, PlasmeigError
from .perturb import epsddot, epsdot_2d, q1_matrix, uniform_shape
from .spectrum2d import (criticality_residual, np_route, rayleigh,
                         solve_plasmonic)
from .sphere3d import SHField, ball_spectrum

# Fixed geometries of the acceptance suite.
ELLIPSE = {"kind": "ellipse", "a": 2.0, "b": 1.0}
KITE = {"kind": "fourier", "cos": [1.0, 0.25, 0.15], "sin": [0.0, 0.0, 0.05]}

# Second derivative of the k=1 z-branch for the shape Y_{2,0}, frozen from
# the spheroid closed form (aspect family second derivative 132/175 plus
# the exact curved-family correction) and confirmed by the axisymmetric
# collocation oracle in the test suite.
GOLDEN_EPSDDOT_Y20 = 333.0 / (35.0 * math.pi)


class CheckResult:
    """Outcome of one acceptance check."""

    def __init__(self, name, passed, details, runtime):
        self.name = name
        self.passed = bool(passed)
        self.details = details
        self.runtime = runtime

    def to_json_dict(self):
        # wall time deliberately excluded: result artifacts are byte-stable
        return {"name": self.name, "passed": self.passed,
                "details": self.details}

    def __repr__(self):
        return "CheckResult(%r, passed=%s)" % (self.name, self.passed)


def _timed(name, fn):
    start = time.perf_counter()
    try:
        passed, details = fn()
    except PlasmeigError as exc:
        passed, details = False, {"error": str(exc)}
    return CheckResult(name, passed, details, time.perf_counter() - start)


def elliptic_eigenvalues(a, b, num):
    """Plasmonic eigenvalues of an ellipse from separation of variables.

    In elliptic coordinates the mode-k interior/exterior matching gives
    eps = coth(k mu0) for the even family and tanh(k mu0) for the odd one,
    mu0 = atanh(b/a). Expressed through q = (a-b)/(a+b) both families are
    rational in q^k. Returns the num values farthest from 1, ascending.
    """
    q = (a - b) / (a + b)
    values = []
    k = 1
    while len(values) < 2 * num:
        qk = q ** k
        values.append((1.0 - qk) / (1.0 + qk))
        values.append((1.0 + qk) / (1.0 - qk))
        k += 1
    values = np.array(values)
    order = np.argsort(-np.abs(values - 1.0), kind="stable")[:num]
    return np.sort(values[order])


def disk_integral_epsdot_y20(nq=80):
    """The hemisphere-projection disk integral for the z-branch derivative
    at k=1 with shape Y_{2,0}, evaluated in polar coordinates.

    The flat formula reads (9/4pi) * int over the unit disk of
    A(x,y) (2 - 3 rho^2) / sqrt(1 - rho^2) dx dy, where A sums the shape
    over the two hemispheres above a disk point. Substituting rho = sin(psi)
    removes the edge singularity; the shape is evaluated from its explicit
    polynomial form, independent of any transform machinery.
    """
    x, wx = np.polynomial.legendre.leggauss(nq)
    psi = 0.25 * math.pi * (x + 1.0)
    wpsi = 0.25 * math.pi * wx
    total = 0.0
    for p, wp in zip(psi, wpsi):
        rho = math.sin(p)
        cos_theta_up = math.cos(p)
        # Y_{2,0}(theta) = sqrt(5/16pi) (3 cos^2 theta - 1); both hemispheres
        # contribute equally since cos^2 is even in cos(theta)
        y20 = math.sqrt(5.0 / (16.0 * math.pi)) * (3.0 * cos_theta_up ** 2 - 1.0)
        a_sum = 2.0 * y20
        integrand = a_sum * (2.0 - 3.0 * rho * rho) * math.sin(p)
        total += wp * integrand * (2.0 * math.pi)  # uniform in phi
    return 9.0 / (4.0 * math.pi) * total


def _ellipse_dtn(n=128):
    curve = CurveParam.from_config(ELLIPSE)
    return curve, build_dtn(sample_curve(curve, n))


def check_disk_degeneracy(n=128):
    """Criterion 1: the circle spectrum collapses to eps = 1."""
    def body():
        curve = CurveParam.circle(1.0)
        spec = solve_plasmonic(build_dtn(sample_curve(curve, n)), num=20)
        worst = float(np.max(np.abs(spec.eigenvalues - 1.0)))
        return worst <= 1e-8, {"max_abs_eps_minus_1": worst, "tol": 1e-8}
    return _timed("disk_degeneracy", body)


def check_ellipse_oracle(n=128):
    """Criterion 2: BEM spectrum vs the elliptic-coordinates closed form."""
    def body():
        _, dtn = _ellipse_dtn(n)
        spec = solve_plasmonic(dtn, num=10)
        oracle = elliptic_eigenvalues(2.0, 1.0, 10)
        worst = float(np.max(np.abs(spec.eigenvalues - oracle)))
        return worst <= 1e-8, {
            "max_abs_error": worst, "tol": 1e-8,
            "oracle": [float(v) for v in oracle],
            "computed": [float(v) for v in spec.eigenvalues]}
    return _timed("ellipse_oracle", body)


def check_clustering():
    """Criterion 3: eigenvalues of a kite-like curve accumulate at 1."""
    def body():
        curve = CurveParam.from_config(KITE)
        spec = solve_plasmonic(build_dtn(sample_curve(curve, 256)), num=40)
        dist = np.sort(np.abs(spec.eigenvalues - 1.0))[::-1]
        tail = dist[20:]
        windows = [float(np.max(dist[20 + 5 * j: 30 + 5 * j]))
                   for j in range(3)]
        decreasing = windows[0] > windows[1] > windows[2]
        ok = bool(np.all(tail < 0.05)) and decreasing
        return ok, {"tail_max": float(tail.max()),
                    "tail_bound": 0.05,
                    "advancing_window_max": windows,
                    "strictly_decreasing": decreasing}
    return _timed("clustering", body)


def check_two_routes(n=128):
    """Criterion 4: pencil route vs adjoint-double-layer route."""
    def body():
        _, dtn = _ellipse_dtn(n)
        s1 = solve_plasmonic(dtn, num=10)
        s2 = np_route(dtn, num=10)
        worst = float(np.max(np.abs(s1.eigenvalues - s2.eigenvalues)))
        return worst <= 1e-8, {"max_abs_gap": worst, "tol": 1e-8}
    return _timed("two_routes", body)


def check_rayleigh(seed=0, n=128):
    """Criterion 5: quotient identity and criticality of eigenpairs."""
    def body():
        _, dtn = _ellipse_dtn(n)
        spec = solve_plasmonic(dtn, num=10)
        gaps = [abs(rayleigh(dtn, spec.eigenfunctions[:, i])
                    - spec.eigenvalues[i]) for i in range(10)]
        crit = max(criticality_residual(dtn, spec.eigenvalues[i],
                                        spec.eigenfunctions[:, i],
                                        directions=20, seed=seed + i)
                   for i in range(10))
        ok = max(gaps) <= 1e-8 and crit <= 1e-6
        return ok, {"max_rayleigh_gap": float(max(gaps)),
                    "rayleigh_tol": 1e-8,
                    "max_criticality": float(crit),
                    "criticality_tol": 1e-6}
    return _timed("rayleigh_identity", body)


def check_ball_spectrum():
    """Criterion 6: exact ball eigenvalues and multiplicities."""
    def body():
        ok = True
        for k in range(1, 11):
            eps, mult = ball_spectrum(k)
            ok = ok and eps == (k + 1.0) / k and mult == 2 * k + 1
            ok = ok and abs(eps * k - (k + 1.0)) <= 4e-16 * (k + 1.0)
        return ok, {"k_range": [1, 10]}
    return _timed("ball_spectrum", body)


def check_first_order():
    """Criterion 7: vanishing of q1 for uniform shape and the disk-integral
    oracle for the z-branch under Y_{2,0}."""
    def body():
        one = uniform_shape(1.0)
        norms = [float(np.max(np.abs(q1_matrix(k, one).matrix)))
                 for k in (1, 2, 3)]
        report = q1_matrix(1, SHField.basis(2, 2, 0))
        oracle = disk_integral_epsdot_y20()
        gap = abs(float(report.branches[2]) - oracle)
        ok = max(norms) <= 1e-10 and gap <= 1e-8
        return ok, {"uniform_q1_norms": norms, "uniform_tol": 1e-10,
                    "disk_integral": oracle,
                    "z_branch": float(report.branches[2]),
                    "oracle_gap": gap, "oracle_tol": 1e-8}
    return _timed("first_order_sphere", body)


def check_second_order(seed=0):
    """Criterion 8: scale invariance, gauge independence, compatibility,
    and the frozen second-order baseline."""
    def body():
        flat = epsddot(1, 0, uniform_shape(1.0))
        rng = np.random.default_rng(seed)
        gauge_worst = 0.0
        compat_worst = 0.0
        for _ in range(5):
            a = SHField(2)
            for l in range(3):
                for m in range(-l, l + 1):
                    a.set_coeff(l, m, rng.standard_normal())
            rep = epsddot(1, 0, a)
            gauge_worst = max(gauge_worst, rep.gauge_residual)
            compat_worst = max(compat_worst, rep.compatibility_residual)
        golden = epsddot(1, 2, SHField.basis(2, 2, 0))
        golden_gap = abs(golden.epsddot - GOLDEN_EPSDDOT_Y20)
        ok = (abs(flat.epsddot) <= 1e-8 and gauge_worst <= 1e-10
              and compat_worst <= 1e-8 and golden_gap <= 1e-8)
        return ok, {"uniform_epsddot": flat.epsddot, "uniform_tol": 1e-8,
                    "max_gauge_residual": gauge_worst, "gauge_tol": 1e-10,
                    "max_compat_residual": compat_worst, "compat_tol": 1e-8,
                    "golden": GOLDEN_EPSDDOT_Y20,
                    "golden_computed": golden.epsddot,
                    "golden_gap": golden_gap, "golden_tol": 1e-8}
    return _timed("second_order_sphere", body)


def _tracked_eigenvalue(spec, target):
    return float(spec.eigenvalues[int(np.argmin(np.abs(spec.eigenvalues
                                                       - target)))])


def finite_difference_epsdot(curve, a, eps_index, h_list, n=128, num=10):
    """Central-difference derivative of one eigenvalue along normal shift a.

    Re-solves on re-encoded perturbed curves for each step and tracks the
    eigenvalue nearest its base value (valid for the well-separated low
    modes this is used on).
    """
    base = solve_plasmonic(build_dtn(sample_curve(curve, n)), num=num)
    eps0 = float(base.eigenvalues[eps_index])
    diffs = []
    for h in h_list:
        plus = solve_plasmonic(
            build_dtn(sample_curve(perturb_curve(curve, a, h), n)), num=num)
        minus = solve_plasmonic(
            build_dtn(sample_curve(perturb_curve(curve, a, -h), n)), num=num)
        diffs.append((_tracked_eigenvalue(plus, eps0)
                      - _tracked_eigenvalue(minus, eps0)) / (2.0 * h))
    return eps0, base, diffs


def check_2d_first_order():
    """Criterion 9: analytic first-order value vs tracked finite
    differences on the ellipse with shape cos(2t)."""
    def body():
        curve = CurveParam.from_config(ELLIPSE)
        a = ShapeFn2D(cos=(0.0, 0.0, 1.0))
        dtn = build_dtn(sample_curve(curve, 128))
        spec = solve_plasmonic(dtn, num=10)
        value = epsdot_2d(dtn, float(spec.eigenvalues[0]),
                          spec.eigenfunctions[:, 0], a, spectrum=spec)
        h_list = [1e-2, 5e-3, 2.5e-3]
        _, _, diffs = finite_difference_epsdot(curve, a, 0, h_list)
        errors = [abs(d - value) for d in diffs]
        slope = float(np.polyfit(np.log(h_list), np.log(errors), 1)[0])
        extrapolated = (4.0 * diffs[2] - diffs[1]) / 3.0
        extr_gap = abs(extrapolated - value)
        ok = abs(slope - 2.0) <= 0.2 and extr_gap <= 1e-6
        return ok, {"epsdot": value, "fd_values": diffs,
                    "errors": errors, "slope": slope,
                    "slope_window": [1.8, 2.2],
                    "extrapolated_gap": extr_gap, "extrapolated_tol": 1e-6}
    return _timed("first_order_2d_fd", body)


def check_shape_derivative():
    """Criterion 10: circle oracle, ellipse FD slopes, exterior variant."""
    def body():
        circle = CurveParam.circle(1.0)
        cdtn = build_dtn(sample_curve(circle, 128))
        one = ShapeFn2D.constant(1.0)
        dmat = shape_derivative_matrix(cdtn, one, side="interior")
        circle_err = banded_opnorm(dmat + cdtn.nminus.matrix,
                                   cdtn.sample.weights, cdtn.sample.t, 32)
        a = ShapeFn2D(cos=(0.0, 0.0, 1.0))
        ell = CurveParam.from_config(ELLIPSE)
        inner = fd_operator_check(ell, a, 128, [1e-2, 5e-3, 2.5e-3],
                                  side="interior")
        outer = fd_operator_check(ell, a, 128, [1e-2, 5e-3, 2.5e-3],
                                  side="exterior")
        ok = (circle_err <= 1e-8
              and inner["slopes"]["central"] >= 1.8
              and outer["slopes"]["central"] >= 1.8)
        return ok, {"circle_opnorm_error": circle_err, "circle_tol": 1e-8,
                    "interior_slopes": inner["slopes"],
                    "exterior_slopes": outer["slopes"]}
    return _timed("dtn_shape_derivative", body)


def check_g0():
    """Criterion 11: the decaying-data functional on circle and ellipse."""
    def body():
        circle = CurveParam.circle(1.0)
        cdtn = build_dtn(sample_curve(circle, 128))
        g0c = compute_g0(cdtn)
        const_err = float(np.max(np.abs(g0c - 1.0 / (2.0 * math.pi))))
        _, dtn = _ellipse_dtn()
        g0 = compute_g0(dtn)
        spread = float(np.max(g0) - np.min(g0))
        g0_alt = compute_g0(dtn, y0=(0.3, 0.1))
        indep = float(np.max(np.abs(g0 - g0_alt)))
        sample = dtn.sample
        f = np.cos(sample.t) + 0.3 * np.sin(2.0 * sample.t)
        proj = f - float(np.dot(f * g0, sample.weights))
        coeff = abs(farfield_log_coefficient(dtn, proj))
        ok = (const_err <= 1e-8 and spread > 1e-2 and indep <= 1e-8
              and coeff <= 1e-8)
        return ok, {"circle_constant_error": const_err,
                    "ellipse_spread": spread,
                    "base_point_independence": indep,
                    "farfield_coefficient": coeff,
                    "tol": 1e-8}
    return _timed("g0_characterization", body)


_CHECKS = [
    ("disk_degeneracy", lambda seed, n: check_disk_degeneracy(n=n)),
    ("ellipse_oracle", lambda seed, n: check_ellipse_oracle(n=n)),
    ("clustering", lambda seed, n: check_clustering()),
    ("two_routes", lambda seed, n: check_two_routes(n=n)),
    ("rayleigh_identity", lambda seed, n: check_rayleigh(seed=seed, n=n)),
    ("ball_spectrum", lambda seed, n: check_ball_spectrum()),
    ("first_order_sphere", lambda seed, n: check_first_order()),
    ("second_order_sphere", lambda seed, n: check_second_order(seed=seed)),
    ("first_order_2d_fd", lambda seed, n: check_2d_first_order()),
    ("dtn_shape_derivative", lambda seed, n: check_shape_derivative()),
    ("g0_characterization", lambda seed, n: check_g0()),
]

CHECK_NAMES = [name for name, _ in _CHECKS]


def run_all(seed=0, n=128, names=None):
    """Run the acceptance suite; seed feeds only random probe vectors and n
    overrides the 2D resolution of the circle/ellipse checks. names, when
    given, restricts the run to the listed checks in suite order."""
    if names is not None:
        unknown = set(names) - set(CHECK_NAMES)
        if unknown:
            raise ConfigError("validate", "run_all",
                              "check names must come from the suite",
                              "unknown %s" % sorted(unknown))
    results = []
    for name, runner in _CHECKS:
        if names is not None and name not in names:
            continue
        results.append(runner(seed, n))
    return results
