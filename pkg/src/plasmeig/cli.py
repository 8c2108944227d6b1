"""Command line front end.

Subcommands: spectrum | perturb | dn-derivative | validate. Every job is
described by a JSON config (strict schemas, unknown keys rejected) and
produces a ResultRecord serialized as canonical JSON, so identical
(config, seed) pairs yield byte-identical artifacts. Wall-clock times are
printed to stdout and never written into artifacts. Exit codes: 0 pass,
1 validation failure, 2 config error, 3 numerical error.

Numerical modules are imported inside the handlers so that --threads can
pin the BLAS thread count through the environment before anything loads.
"""

import argparse
import json
import os
import sys
import time

ARTIFACT_VERSION = 1

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


class ResultRecord:
    """Deterministic job outcome: echo of the job, outputs, check flags."""

    def __init__(self, command, job, outputs, flags):
        self.command = command
        self.job = job
        self.outputs = outputs
        self.flags = flags
        self.passed = all(flags.values()) if flags else True

    def to_json_dict(self):
        return {"artifact_version": ARTIFACT_VERSION,
                "command": self.command,
                "job": self.job,
                "outputs": self.outputs,
                "flags": self.flags,
                "passed": self.passed}


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _check_keys(config, required, optional, operation):
    from .errors import ConfigError
    if not isinstance(config, dict):
        raise ConfigError("cli", operation, "job config must be a JSON object",
                          "got %r" % type(config).__name__)
    missing = required - set(config)
    if missing:
        raise ConfigError("cli", operation, "missing required config keys",
                          "%s" % sorted(missing))
    unknown = set(config) - required - optional
    if unknown:
        raise ConfigError("cli", operation, "unknown config keys rejected",
                          "%s" % sorted(unknown))


def _positive_int(config, key, default, operation):
    from .errors import ConfigError
    value = config.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise ConfigError("cli", operation,
                          "%s must be a positive integer" % key,
                          "%s=%r" % (key, value))
    return value


def _shape_2d(config, key, operation):
    from .curve2d import ShapeFn2D
    from .errors import ConfigError
    obj = config.get(key)
    if obj is None:
        raise ConfigError("cli", operation, "missing shape function",
                          "key %r" % key)
    return ShapeFn2D.from_config(obj)


def _shape_sphere(obj, operation):
    from .errors import ConfigError
    from .perturb import uniform_shape
    from .sphere3d import SHField
    if isinstance(obj, dict) and set(obj) == {"uniform"}:
        return uniform_shape(float(obj["uniform"]))
    if isinstance(obj, dict):
        return SHField.from_json_dict(obj)
    raise ConfigError("cli", operation,
                      "sphere shape must be {'uniform': v} or an SH field",
                      "got %r" % (obj,))


def cmd_spectrum(config, seed):
    from .bem2d import build_dtn
    from .curve2d import CurveParam, sample_curve
    from .errors import ConfigError
    from .spectrum2d import np_route, solve_plasmonic
    _check_keys(config, {"curve"}, {"N", "num_eigs", "route", "scale"},
                "cmd_spectrum")
    curve = CurveParam.from_config(config["curve"])
    n = _positive_int(config, "N", 128, "cmd_spectrum")
    num = _positive_int(config, "num_eigs", 20, "cmd_spectrum")
    route = config.get("route", "dtn")
    if route not in ("dtn", "np"):
        raise ConfigError("cli", "cmd_spectrum",
                          "route must be 'dtn' or 'np'", "route=%r" % route)
    scale = config.get("scale", 1.0)
    if not isinstance(scale, (int, float)) or isinstance(scale, bool) \
            or scale <= 0:
        raise ConfigError("cli", "cmd_spectrum",
                          "scale must be a positive number",
                          "scale=%r" % (scale,))
    if scale != 1.0:
        curve = curve.scaled(float(scale))
    dtn = build_dtn(sample_curve(curve, n))
    solver = solve_plasmonic if route == "dtn" else np_route
    spec = solver(dtn, num=num, curve_config=curve.to_config())
    record = ResultRecord("spectrum", config,
                          {"spectrum": spec.to_json_dict()}, {})
    return record, [("spectrum.csv", spec.csv_text())]


def _perturb_sphere(config, seed):
    from .perturb import epsddot, epsddot_flux_route, q1_matrix, solve_udot
    _check_keys(config, {"mode", "k", "a"}, {"branch", "order"},
                "cmd_perturb")
    k = _positive_int(config, "k", None, "cmd_perturb")
    a = _shape_sphere(config["a"], "cmd_perturb")
    branch = config.get("branch", 0)
    order = config.get("order", 2)
    if order not in (1, 2):
        from .errors import ConfigError
        raise ConfigError("cli", "cmd_perturb", "order must be 1 or 2",
                          "order=%r" % (order,))
    first = q1_matrix(k, a)
    outputs = {"first_order": first.to_json_dict()}
    flags = {"q1_symmetric": first.symmetry_residual() <= 1e-12}
    if order == 2:
        nb = 2 * k + 1
        if not isinstance(branch, int) or isinstance(branch, bool) \
                or not 0 <= branch < nb:
            from .errors import ConfigError
            raise ConfigError("cli", "cmd_perturb",
                              "branch must be an index into the 2k+1 branches",
                              "branch=%r, k=%r" % (branch, k))
        udot = solve_udot(k, branch, a, report=first)
        second = epsddot(k, branch, a, udot=udot, report=first)
        flux = epsddot_flux_route(k, branch, a, udot=udot, report=first)
        gap = abs(second.epsddot - flux)
        outputs["second_order"] = second.to_json_dict()
        outputs["second_order_flux_route"] = flux
        outputs["route_gap"] = gap
        flags["gauge_independent"] = second.gauge_residual <= 1e-10
        flags["compatible"] = second.compatibility_residual <= 1e-8
        flags["routes_agree"] = gap <= 1e-8
    record = ResultRecord("perturb", config, outputs, flags)
    return record, []


def _perturb_2d(config, seed):
    from .bem2d import build_dtn
    from .curve2d import CurveParam, sample_curve
    from .errors import ConfigError
    from .perturb import epsdot_2d
    from .spectrum2d import solve_plasmonic
    from .validate import finite_difference_epsdot
    import numpy as np
    _check_keys(config, {"mode", "curve", "a"},
                {"N", "num_eigs", "eps_index", "h_list"}, "cmd_perturb")
    curve = CurveParam.from_config(config["curve"])
    a = _shape_2d(config, "a", "cmd_perturb")
    n = _positive_int(config, "N", 128, "cmd_perturb")
    num = _positive_int(config, "num_eigs", 10, "cmd_perturb")
    index = config.get("eps_index", 0)
    if not isinstance(index, int) or isinstance(index, bool) \
            or not 0 <= index < num:
        raise ConfigError("cli", "cmd_perturb",
                          "eps_index must index the computed spectrum",
                          "eps_index=%r" % (index,))
    h_list = config.get("h_list", [1e-2, 5e-3, 2.5e-3])
    if (not isinstance(h_list, list) or len(h_list) < 2
            or not all(isinstance(h, (int, float)) and h > 0 for h in h_list)):
        raise ConfigError("cli", "cmd_perturb",
                          "h_list must hold at least two positive steps",
                          "h_list=%r" % (h_list,))
    dtn = build_dtn(sample_curve(curve, n))
    spec = solve_plasmonic(dtn, num=num, curve_config=curve.to_config())
    eps = float(spec.eigenvalues[index])
    value = epsdot_2d(dtn, eps, spec.eigenfunctions[:, index], a,
                      spectrum=spec)
    _, _, diffs = finite_difference_epsdot(curve, a, index, h_list,
                                           n=n, num=num)
    errors = [abs(d - value) for d in diffs]
    slope = float(np.polyfit(np.log(h_list), np.log(errors), 1)[0])
    outputs = {"epsilon": eps, "epsdot": value,
               "fd_values": [float(d) for d in diffs],
               "fd_errors": [float(e) for e in errors],
               "h_list": [float(h) for h in h_list],
               "slope": slope}
    flags = {"fd_slope_ok": abs(slope - 2.0) <= 0.2}
    record = ResultRecord("perturb", config, outputs, flags)
    return record, []


def cmd_perturb(config, seed):
    from .errors import ConfigError
    if not isinstance(config, dict) or "mode" not in config:
        raise ConfigError("cli", "cmd_perturb",
                          "perturb config needs mode 'sphere' or '2d'",
                          "got %r" % (config,))
    if config["mode"] == "sphere":
        return _perturb_sphere(config, seed)
    if config["mode"] == "2d":
        return _perturb_2d(config, seed)
    raise ConfigError("cli", "cmd_perturb", "mode must be 'sphere' or '2d'",
                      "mode=%r" % (config["mode"],))


def cmd_dn_derivative(config, seed):
    from .curve2d import CurveParam
    from .dtn_shape import fd_operator_check
    from .errors import ConfigError
    _check_keys(config, {"curve", "a"}, {"N", "h_list", "side"},
                "cmd_dn_derivative")
    curve = CurveParam.from_config(config["curve"])
    a = _shape_2d(config, "a", "cmd_dn_derivative")
    n = _positive_int(config, "N", 128, "cmd_dn_derivative")
    side = config.get("side", "interior")
    if side not in ("interior", "exterior"):
        raise ConfigError("cli", "cmd_dn_derivative",
                          "side must be 'interior' or 'exterior'",
                          "side=%r" % (side,))
    h_list = config.get("h_list", [1e-2, 5e-3, 2.5e-3])
    if (not isinstance(h_list, list) or len(h_list) < 2
            or not all(isinstance(h, (int, float)) and h > 0 for h in h_list)):
        raise ConfigError("cli", "cmd_dn_derivative",
                          "h_list must hold at least two positive steps",
                          "h_list=%r" % (h_list,))
    report = fd_operator_check(curve, a, n, h_list, side=side)
    if report["slopes"]["central"] is None:
        flags = {"zero_deformation_ok": max(report["max_errors"]) <= 1e-12}
    else:
        flags = {"one_sided_slope_ok": report["slopes"]["one_sided"] >= 0.8,
                 "central_slope_ok": report["slopes"]["central"] >= 1.8}
    record = ResultRecord("dn-derivative", config, {"report": report}, flags)
    return record, []


def cmd_validate(config, seed):
    from .validate import CHECK_NAMES, run_all
    _check_keys(config, set(), {"N", "checks"}, "cmd_validate")
    n = _positive_int(config, "N", 128, "cmd_validate")
    names = config.get("checks")
    if names is not None:
        from .errors import ConfigError
        if not isinstance(names, list) \
                or not all(isinstance(s, str) for s in names):
            raise ConfigError("cli", "cmd_validate",
                              "checks must be a list of check names",
                              "checks=%r" % (names,))
    results = run_all(seed=seed, n=n, names=names)
    width = max(len(name) for name in CHECK_NAMES)
    for res in results:
        print("%-*s  %s  (%.2f s)" % (width, res.name,
                                      "PASS" if res.passed else "FAIL",
                                      res.runtime))
    outputs = {"checks": [res.to_json_dict() for res in results]}
    flags = {res.name: res.passed for res in results}
    record = ResultRecord("validate", config, outputs, flags)
    csv_lines = ["check,passed"]
    csv_lines += ["%s,%s" % (res.name, "pass" if res.passed else "fail")
                  for res in results]
    return record, [("validate.csv", "\n".join(csv_lines) + "\n")]


_COMMANDS = {"spectrum": cmd_spectrum,
             "perturb": cmd_perturb,
             "dn-derivative": cmd_dn_derivative,
             "validate": cmd_validate}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plasmeig",
        description="Plasmonic eigenvalues of smooth domains via "
                    "Dirichlet-to-Neumann operators, with shape "
                    "perturbation theory.")
    parser.add_argument("command", choices=sorted(_COMMANDS),
                        help="job type to run")
    parser.add_argument("--config", help="path to the JSON job config")
    parser.add_argument("--out", help="directory for result artifacts")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized probe vectors")
    parser.add_argument("--threads", type=int,
                        help="pin linear-algebra thread count")
    return parser


def _load_config(path, command):
    from .errors import ConfigError
    if path is None:
        if command == "validate":
            return {}
        raise ConfigError("cli", "main", "--config is required",
                          "command %r" % command)
    try:
        with open(path, "r") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError("cli", "main", "config file must be readable",
                          str(exc))
    except ValueError as exc:
        raise ConfigError("cli", "main", "config file must be valid JSON",
                          str(exc))


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads <= 0:
            print("cli.main: --threads must be positive", file=sys.stderr)
            return 2
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    if args.seed < 0:
        print("cli.main: --seed must be nonnegative", file=sys.stderr)
        return 2

    from .errors import ConfigError, PlasmeigError
    start = time.perf_counter()
    try:
        config = _load_config(args.config, args.command)
        record, extras = _COMMANDS[args.command](config, args.seed)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except PlasmeigError as exc:
        print(str(exc), file=sys.stderr)
        return 3
    elapsed = time.perf_counter() - start

    text = canonical_json(record.to_json_dict())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        base = args.command.replace("-", "_")
        with open(os.path.join(args.out, base + ".json"), "w") as handle:
            handle.write(text)
        for name, payload in extras:
            with open(os.path.join(args.out, name), "w") as handle:
                handle.write(payload)
    else:
        sys.stdout.write(text)
    print("wall time: %.3f s" % elapsed)
    if not record.passed:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
