#!/usr/bin/env python3
# Justin, 2026-03-10
"""Evaluates one-loop weights, boundary levels and deformation complexes.

Commands:

    verify          exact identity suite (default when no command is given)
    sweep           eps-sweep of a bulk wheel weight, as CSV
    anomaly         eps-sweep of the anomaly weight summed over edges, as CSV
    boundary-level  fit of the boundary level constant c_an, as JSON
    cohomology      cohomology of the deformation complexes of a Lie algebra
    enumerate       admissible graphs on a list of vertices

Every file written carries a manifest (version, solved lambda constants,
grid, seed, tolerances, configuration), which can be passed back with
'--config' to reproduce the run.

Examples:

    holobf verify
    holobf sweep --graph "wheel 3" --epsilon-max 1e-1 --epsilon-min 1e-4 --out sweep.csv
    holobf cohomology --lie-algebra sl2
    holobf enumerate --vertices cubic cubic cubic

Changelog:
    2026-03-10, Justin: Init
    2026-03-12, Justin: Per-command scale defaults, verification report.
"""

__all__ = [
    "main", "run", "verification_suite", "parse_input",
    "cmd_verify", "cmd_sweep", "cmd_anomaly", "cmd_boundary_level",
    "cmd_cohomology", "cmd_enumerate", "COMMANDS",
]

import dataclasses
import pathlib
import sys
from typing import Callable, List, Optional

import numpy as np
import sympy

from holobf import constants
from holobf.boundary import ParityInput, extract_level
from holobf.common import (
    EXIT_SUCCESS, EXIT_VERIFY_FAILED, DomainError, HolobfError,
)
from holobf.datautil import build_manifest, pprint, write_report, write_sweep_csv
from holobf.defcomplex import (
    ce_complex, cohomology_dims, complex_a, euler_characteristic, is_semisimple,
    load_lie_algebra, weight_one_triviality,
)
from holobf.exterior import T, t, z, zbar
from holobf.gaussian import RankOneShiftedMatrix, expectation, sample_monte_carlo
from holobf.graphs import classify, enumerate_graphs, format_graph, graph_id, parse_graph, wheel
from holobf.kernels import (
    commutator, dz_minus_zeta, heat_equation_residual, image_part, lambda_operator,
    lambda_residual, product_residual, reflect_time, solve_lambda_constants,
    tau, tau_residuals, zeta, zeta_residuals,
)
from holobf.weights import (
    FORMS, LegFactor, TestInput, anomaly_weight_sum, bulk_weight, epsilon_sweep,
    holomorphic_reduction_check, prepare_weight,
)
import holobf.logging
import holobf.scriptutil

logger = holobf.logging.get_logger("holobf")

# Scale ranges per command; the level fit needs L well below the input envelopes
SCALE_DEFAULTS = {
    None: dict(epsilon_min=1e-4, epsilon_max=1e-1, L=1.0, sigma=1.0),
    "boundary-level": dict(epsilon_min=1e-7, epsilon_max=1e-5, L=1e-3, sigma=4.0),
}

# Inputs completing the top form of the 3-wheel, and of its anomaly
DEFAULT_INPUTS = {
    "sweep": ["1;t;dt", "z;1;dzbar", "z;1;dzbar"],
    "anomaly": ["1;t;dt", "z;1;dzbar", "z;1;1"],
}

# Holomorphic profiles (a, b) of the boundary inputs a(z) t and b(w) dwbar ds
DEFAULT_FAMILY = ["1;z", "zbar;z**2", "z;1 + z"]


@dataclasses.dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


##################
#  VERIFICATION  #
##################

def _scales(n: int):
    return [T(i) for i in range(n + 1)]

def _vanishing(result) -> bool:
    return result.value == 0 and (result.degree_zero_flag or bool(result.reason))

def _sherman_morrison(n: int) -> bool:
    M = RankOneShiftedMatrix(_scales(n))
    A = M.matrix()
    identity = (A * M.inverse()).applyfunc(sympy.cancel)
    det = sympy.cancel(A.det() * M.det_inverse())
    return identity == sympy.eye(n) and det == 1

def _operators_commute(n: int) -> bool:
    Ts = _scales(n)
    operators = [lambda_operator(i) for i in range(n)] + [zeta(Ts), tau(Ts)]
    operators += [dz_minus_zeta(j, Ts) for j in range(n)]
    return all(commutator(A, B).is_zero for A in operators for B in operators)

def _small_wheels_vanish() -> bool:
    for label in ("cubic", "dcubic"):
        for form in FORMS:
            phi = TestInput.uniform(LegFactor.of(a="z", f="t", form=form))
            for n in (1, 2):
                if not _vanishing(bulk_weight(wheel(n, label), 1e-2, 1, phi)):
                    return False
                if not _vanishing(anomaly_weight_sum(wheel(n, label), 1e-2, 1, phi)):
                    return False
    return True

def _square_zero() -> bool:
    for name in ("sl2", "sl2_sl2"):
        g = load_lie_algebra(name)
        for module in ("trivial", "adjoint", "coadjoint"):
            ce_complex(g, module).check()  # raises ConstructionError
        complex_a(g).check()
    return True

def _monte_carlo(seed: int, samples: int) -> bool:
    Ts = [1, 2, sympy.Rational(1, 2)]
    poly = t(0)*t(1) + z(0)*zbar(1)
    exact = float(expectation(poly, Ts))
    mean, stderr = sample_monte_carlo(poly, Ts, samples=samples, seed=seed)
    return abs(mean - exact) <= 3*stderr

def verification_suite(lambda_constants=None, seed: int = 0, samples: int = 10**5) -> List[Check]:
    """Runs the exact identity checks, returning one entry per identity.

    Args:
        lambda_constants: Override of (c1, c2) in lambda, for mutation tests.
    """
    checks: List[tuple] = [
        ("lambda G_T = E_T", lambda: lambda_residual(lambda_constants=lambda_constants).is_zero),
        ("lambda constants frozen", lambda: solve_lambda_constants() == (constants.LAMBDA_C1, constants.LAMBDA_C2)),
        ("heat equation", lambda: heat_equation_residual(T(0)).is_zero),
    ]
    for n in (1, 2, 3):
        checks.append((
            f"product of propagators, n={n}",
            lambda n=n: product_residual(_scales(n), lambda_constants).is_zero,
        ))
    for n in (1, 2, 3, 4):
        checks.append((
            f"zeta eigen-actions, n={n}",
            lambda n=n: all(r.is_zero for r in zeta_residuals(_scales(n)).values()),
        ))
    for n in (1, 2, 3):
        checks.append((
            f"tau eigen-actions, n={n}",
            lambda n=n: all(r.is_zero for r in tau_residuals(_scales(n)).values()),
        ))
    for k in (1, 2, 3):
        checks.append((f"holomorphic reduction, order={k}", lambda k=k: holomorphic_reduction_check(k)))
    checks.append(("operators commute, n=3", lambda: _operators_commute(3)))
    for n in (2, 3, 4, 5):
        checks.append((f"Sherman-Morrison and determinant lemma, n={n}", lambda n=n: _sherman_morrison(n)))
    checks += [
        ("Monte Carlo moments", lambda: _monte_carlo(seed, samples)),
        ("image part odd under reflection", lambda: (
            reflect_time(image_part(T(0), (0, 1)), [0, 1]) == -image_part(T(0), (0, 1))
        )),
        ("one- and two-vertex wheels vanish", _small_wheels_vanish),
        ("Chevalley-Eilenberg d^2 = 0", _square_zero),
    ]

    results = []
    for name, check in checks:
        try:
            passed, detail = bool(check()), ""
        except HolobfError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(Check(name, passed, detail))
        logger.info("%s: %s", name, "ok" if passed else "FAILED")
    return results


##################
#  INPUTS        #
##################

def parse_input(text: str, sigma=1) -> LegFactor:
    """Parses 'a;f;form', e.g. "z;1;dzbar" for z exp(...) dzbar."""
    parts = [p.strip() for p in str(text).split(";")]
    if len(parts) != 3:
        raise DomainError(f"Input '{text}' is not of the form 'a;f;form'")
    a, f, form = parts
    return LegFactor.of(a=a, f=f, form=form, sigma=sigma)

def _graph(text: str):
    path = pathlib.Path(text)
    if path.is_file():
        return parse_graph(path.read_text())
    return parse_graph(text)

def _scale_options(args):
    defaults = SCALE_DEFAULTS.get(args.command, SCALE_DEFAULTS[None])
    options = {k: getattr(args, k) if getattr(args, k) is not None else v for k, v in defaults.items()}
    if not 0 < options["epsilon_min"] < options["epsilon_max"] < options["L"]:
        raise DomainError(
            f"Scales need 0 < epsilon-min < epsilon-max < L, got {options['epsilon_min']}, "
            f"{options['epsilon_max']}, {options['L']}"
        )
    if args.tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {args.tol}")
    if args.grid < 2:
        raise DomainError(f"Grid needs at least two values of epsilon, got {args.grid}")
    epsilons = np.geomspace(options["epsilon_max"], options["epsilon_min"], args.grid)
    return options, [float(e) for e in epsilons]

def _quadrature(args):
    return dict(tol=args.tol, max_level=args.max_level, strict=not args.lenient)

def _emit(args, report, manifest):
    text = write_report(args.out, report, manifest)
    if args.out is None and not args.quiet:
        print(text)


##################
#  COMMANDS      #
##################

def cmd_verify(args) -> int:
    results = verification_suite(seed=args.seed)
    if not args.quiet:
        for r in results:
            pprint("ok" if r.passed else "FAILED", r.name, r.detail, width=6)
    if args.out is not None:
        write_report(args.out, {"checks": [dataclasses.asdict(r) for r in results]}, build_manifest(args))
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error("Verification failed: %s", ", ".join(failed))
        return EXIT_VERIFY_FAILED
    return EXIT_SUCCESS

def _sweep(args, inputs, evaluator: Callable, suffix: str) -> int:
    options, epsilons = _scale_options(args)
    g = _graph(args.graph)
    phi = TestInput(tuple(parse_input(text, options["sigma"]) for text in inputs))
    evaluate = evaluator(g, phi, options["L"])
    report = epsilon_sweep(evaluate, epsilons, tol=args.tol, workers=args.threads)

    rows = report.rows(options["L"], graph_id(g) + suffix)
    manifest = build_manifest(
        args, grid=epsilons, converged=report.converged, monotone=report.monotone,
        extrapolated=report.extrapolated,
    )
    if args.out is not None:
        write_sweep_csv(args.out, rows, manifest)
    elif not args.quiet:
        for row in rows:
            pprint(*(f"{row[k]:.6g}" if k != "graph_id" else row[k]
                     for k in ("epsilon", "L", "graph_id", "value", "error_estimate")), width=14)
    return EXIT_SUCCESS

def cmd_sweep(args) -> int:
    inputs = args.input or DEFAULT_INPUTS["sweep"]
    def evaluator(g, phi, L):
        integrand = prepare_weight(g, phi)
        return lambda e: integrand.evaluate(e, L, **_quadrature(args))
    return _sweep(args, inputs, evaluator, "")

def cmd_anomaly(args) -> int:
    inputs = args.input or DEFAULT_INPUTS["anomaly"]
    def evaluator(g, phi, L):
        return lambda e: anomaly_weight_sum(g, e, L, phi, **_quadrature(args))
    return _sweep(args, inputs, evaluator, ":anomaly")

def cmd_boundary_level(args) -> int:
    options, epsilons = _scale_options(args)
    family = []
    for member in args.family or DEFAULT_FAMILY:
        parts = [p.strip() for p in member.split(";")]
        if len(parts) != 2:
            raise DomainError(f"Family member '{member}' is not of the form 'a;b'")
        family.append((
            ParityInput(a=parts[0], f0="t", f1=0, sigma=options["sigma"]),
            ParityInput(a=parts[1], f0=0, f1=1, sigma=options["sigma"]),
        ))
    report = extract_level(epsilons, options["L"], family, workers=args.threads, **_quadrature(args))
    _emit(args, report.record(), build_manifest(args, grid=epsilons, scales=options))
    return EXIT_SUCCESS

def cmd_cohomology(args) -> int:
    g = load_lie_algebra(args.lie_algebra)
    complexes = {
        "trivial": ce_complex(g),
        "reduced": ce_complex(g, reduced=True),
        "adjoint": ce_complex(g, "adjoint"),
        "complex_a": complex_a(g),
    }
    report = {"algebra": g.name, "dimension": g.dimension, "semisimple": is_semisimple(g)}
    for name, C in complexes.items():
        dims = cohomology_dims(C, workers=args.threads)
        report[name] = {"cochains": C.dims, "cohomology": dims, "euler": euler_characteristic(C, dims)}
    try:
        report["weight_one_trivial"] = weight_one_triviality(g, workers=args.threads)
    except DomainError as e:
        logger.warning("%s", e)
        report["weight_one_trivial"] = not any(report["adjoint"]["cohomology"].values())
    _emit(args, report, build_manifest(args))
    return EXIT_SUCCESS

def cmd_enumerate(args) -> int:
    graphs = enumerate_graphs(args.vertices, self_loops=args.self_loops)
    report = {
        "vertices": list(args.vertices),
        "graphs": [
            {"graph_id": graph_id(g), "class": classify(g).value, "description": format_graph(g)}
            for g in graphs
        ],
    }
    if not args.quiet:
        for entry in report["graphs"]:
            pprint(entry["graph_id"], entry["class"], width=16)
    if args.out is not None:
        write_report(args.out, report, build_manifest(args))
    return EXIT_SUCCESS


COMMANDS = {
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "anomaly": cmd_anomaly,
    "boundary-level": cmd_boundary_level,
    "cohomology": cmd_cohomology,
    "enumerate": cmd_enumerate,
}


def make_parser():
    parser = holobf.scriptutil.generate_default_parser(__doc__, "holobf")

    # Boilerplate
    pgroup_config = parser.add_argument_group("display/configuration")
    pgroup_config.add_argument(
        "-h", "--help", action="store_true",
        help="Show this help message and exit")
    pgroup_config.add_argument(
        "-v", "--verbosity", action="count", default=0,
        help="Specify debug verbosity, e.g. -vv for more verbosity")
    pgroup_config.add_argument(
        "-L", "--logging", metavar="",
        help="Log to file, if specified. Log level follows verbosity.")
    pgroup_config.add_argument(
        "--quiet", action="store_true",
        help="Suppress errors and console output, but will not block logging")
    pgroup_config.add_argument(
        "--config", metavar="", is_config_file_arg=True,
        help="Path to configuration file, or a manifest of a previous run")
    pgroup_config.add_argument(
        "--save", metavar="", is_write_out_config_file_arg=True,
        help="Path to configuration file for saving, then immediately exit")

    parser.add_argument(
        "command", nargs="?", default="verify", choices=list(COMMANDS),
        help="Command to run (default: %(default)s)")

    pgroup = parser.add_argument_group("scales and quadrature")
    pgroup.add_argument(
        "--epsilon-min", type=float, metavar="",
        help="Smallest UV cutoff of the sweep")
    pgroup.add_argument(
        "--epsilon-max", type=float, metavar="",
        help="Largest UV cutoff of the sweep")
    pgroup.add_argument(
        "--L", dest="L", type=float, metavar="",
        help="IR scale")
    pgroup.add_argument(
        "--grid", type=int, default=4, metavar="",
        help="Number of geometrically spaced cutoffs (default: %(default)s)")
    pgroup.add_argument(
        "--tol", type=float, default=1e-6, metavar="",
        help="Relative quadrature tolerance (default: %(default)s)")
    pgroup.add_argument(
        "--max-level", type=int, metavar="",
        help="Finest refinement level of the scale quadrature")
    pgroup.add_argument(
        "--lenient", action="store_true",
        help="Warn instead of failing when the quadrature does not converge")
    pgroup.add_argument(
        "--seed", type=int, default=0, metavar="",
        help="Seed of the Monte Carlo cross-checks (default: %(default)s)")
    pgroup.add_argument(
        "--threads", type=int, default=1, metavar="", env_var="HOLOBF_THREADS",
        help="Worker threads for sweep points and ranks (default: %(default)s)")

    pgroup = parser.add_argument_group("inputs and outputs")
    pgroup.add_argument(
        "--graph", default="wheel 3", metavar="",
        help="Graph description, or path to a file with one (default: '%(default)s')")
    pgroup.add_argument(
        "--input", action="append", metavar="",
        help="Test input 'a;f;form' per external leg, e.g. 'z;1;dzbar'")
    pgroup.add_argument(
        "--sigma", type=float, metavar="",
        help="Envelope width of the test inputs")
    pgroup.add_argument(
        "--family", action="append", metavar="",
        help="Boundary input profiles 'a;b' for the level fit")
    pgroup.add_argument(
        "--lie-algebra", default="sl2", metavar="",
        help="Shipped Lie algebra name, or path to a JSON file (default: %(default)s)")
    pgroup.add_argument(
        "--vertices", nargs="+", default=["cubic", "cubic"], metavar="",
        help="Vertex labels to enumerate graphs on (default: cubic cubic)")
    pgroup.add_argument(
        "--self-loops", action="store_true",
        help="Admit self-loops in the enumeration")
    pgroup.add_argument(
        "--out", metavar="",
        help="Output file; reports are printed when omitted")
    return parser

def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    args = holobf.scriptutil.parse_args_or_help(parser, argv)
    holobf.logging.set_default_handlers(logger, file=args.logging)
    holobf.logging.set_logging_level(logger, args.verbosity)
    logger.debug("%s", args)

    try:
        return COMMANDS[args.command](args)
    except HolobfError as e:
        if not args.quiet:
            print(f"holobf {args.command}: {e}", file=sys.stderr)
        logger.debug("Command failed", exc_info=True)
        return e.exit_code

def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
