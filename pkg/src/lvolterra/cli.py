"""Command-line front end.

Every command prints one JSON report on stdout, headed by the package version
and the tolerances in effect. Logs go to stderr. Exit status: 0 success,
1 domain finding (invalid tensor, failed condition, violated bound),
2 usage, parse or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Callable

from rich.console import Console
from rich.logging import RichHandler

from lvolterra import __version__
from lvolterra.analysis.fixed_points import (
    enumerate_face_fixed_points,
    numeric_fixed_points,
    vertex_fixed_points,
)
from lvolterra.analysis.lyapunov import LyapunovFunction, empirical_lyapunov_check
from lvolterra.analysis.omega import omega_upper_bound, partial_sum_check, verify_omega_bound
from lvolterra.analysis.trajectory import (
    BoundaryHit,
    Converged,
    CycleDetected,
    StopReason,
    describe_stop,
    simulate,
)
from lvolterra.config import ENV_PREFIX, Tolerances, get_config
from lvolterra.core.canonical import canonical_of, interaction_violations
from lvolterra.core.classify import OperatorKind, classify
from lvolterra.core.gen import NAMED_OPERATORS, GenSpec, random_operator
from lvolterra.core.tensor import HeredityTensor, validate_tensor
from lvolterra.errors import (
    ClassificationError,
    ConfigError,
    DocumentParseError,
    DomainError,
    HypothesisError,
    InconsistencyError,
    SimplexError,
    TensorShapeError,
)
from lvolterra.formats.export import (
    render_ternary_png,
    ternary_path,
    write_ternary_csv,
    write_trajectory_csv,
)
from lvolterra.formats.operator_file import (
    OperatorDocument,
    load_operator,
    save_operator,
    serialize_document,
)
from lvolterra.services.ensemble_service import EnsembleService, EnsembleSpec, summarize
from lvolterra.utils import format_point, parse_point_spec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_USAGE = 2


class CommandContext:
    """What a command needs besides its arguments."""

    def __init__(self, console: Console, tolerances: Tolerances) -> None:
        self.console = console
        self.tolerances = tolerances

    def report(self, command: str, body: dict[str, Any]) -> None:
        data = {
            "lvolterra": __version__,
            "command": command,
            "tolerances": self.tolerances.as_dict(),
            **body,
        }
        self.console.print_json(data=data)


def stop_summary(stop: StopReason) -> str:
    """One-line description, e.g. ``cycle period=2``."""
    if isinstance(stop, CycleDetected):
        return f"cycle period={stop.period}"
    if isinstance(stop, Converged):
        return f"converged onset={stop.onset_step}"
    if isinstance(stop, BoundaryHit):
        return f"boundary-hit coordinate={stop.index + 1} step={stop.step}"
    return "max-steps"


def _load(path: Path) -> tuple[OperatorDocument, HeredityTensor]:
    doc = load_operator(path)
    return doc, doc.tensor()


def _require_valid(ctx: CommandContext, command: str, P: HeredityTensor) -> bool:
    report = validate_tensor(P, tolerances=ctx.tolerances)
    if not report.is_valid:
        for violation in report.violations:
            logger.warning("%s", violation.describe())
        ctx.report(command, {"validation": report.to_dict()})
    return report.is_valid


def cmd_validate(args: argparse.Namespace, ctx: CommandContext) -> int:
    doc, P = _load(args.path)
    report = validate_tensor(P, m=doc.m, tolerances=ctx.tolerances)
    for violation in report.violations:
        logger.warning("%s", violation.describe())
    ctx.report("validate", {"file": str(args.path), "validation": report.to_dict()})
    return EXIT_OK if report.is_valid else EXIT_FINDING


def cmd_classify(args: argparse.Namespace, ctx: CommandContext) -> int:
    doc, P = _load(args.path)
    if not _require_valid(ctx, "classify", P):
        return EXIT_FINDING
    op_class = classify(P, ctx.tolerances)
    if doc.ell is not None and op_class.ell != doc.ell:
        logger.warning("File declares ell=%s, classification gives %s", doc.ell, op_class.ell)
    ctx.report("classify", {"file": str(args.path), "class": op_class.to_dict()})
    return EXIT_OK


def cmd_canonical(args: argparse.Namespace, ctx: CommandContext) -> int:
    _, P = _load(args.path)
    if not _require_valid(ctx, "canonical", P):
        return EXIT_FINDING
    C = canonical_of(P, ctx.tolerances)
    violations = [
        {"constraint": c, "k": k + 1, "i": i + 1, "value": v}
        for c, k, i, v in interaction_violations(C.A, ctx.tolerances.zero)
    ]
    ctx.report("canonical", {"canonical": C.to_dict(), "constraint_violations": violations})
    return EXIT_FINDING if violations else EXIT_OK


def cmd_simulate(args: argparse.Namespace, ctx: CommandContext) -> int:
    _, P = _load(args.path)
    if not _require_valid(ctx, "simulate", P):
        return EXIT_FINDING
    x0 = parse_point_spec(args.x0, P.m, ctx.tolerances)
    traj = simulate(
        P,
        x0,
        n_max=args.steps,
        stride=args.stride,
        tolerances=ctx.tolerances,
        detect_cycles=not args.no_cycles,
        stop_on_boundary=args.stop_on_boundary,
        use_canonical=args.canonical,
    )
    logger.info("Stopped after %d steps at %s", traj.step_count, format_point(traj.points[-1]))
    body: dict[str, Any] = {
        "x0": x0.tolist(),
        "stop": describe_stop(traj.stop),
        "summary": stop_summary(traj.stop),
        "step_count": traj.step_count,
        "final_point": traj.points[-1].tolist(),
        "recorded_points": len(traj),
    }
    if args.out is not None:
        outputs = [str(write_trajectory_csv(traj, args.out))]
        if args.ternary or args.png:
            if P.m != 3:
                raise DomainError("ternary output needs m = 3")
        if args.ternary:
            outputs.append(str(write_ternary_csv(traj, ternary_path(args.out))))
        if args.png:
            outputs.append(str(render_ternary_png(traj, args.out.with_suffix(".png"))))
        body["outputs"] = outputs
    ctx.report("simulate", body)
    return EXIT_OK


def cmd_lyapunov(args: argparse.Namespace, ctx: CommandContext) -> int:
    _, P = _load(args.path)
    if not _require_valid(ctx, "lyapunov", P):
        return EXIT_FINDING
    function = LyapunovFunction.from_params(args.family, args.params)
    x0 = parse_point_spec(args.x0, P.m, ctx.tolerances)
    report = empirical_lyapunov_check(
        P, function, x0, n_steps=args.steps, window=args.window, tolerances=ctx.tolerances
    )
    ctx.report("lyapunov", {"x0": x0.tolist(), "report": report.to_dict()})
    return EXIT_OK if report.monotone else EXIT_FINDING


def cmd_fixed_points(args: argparse.Namespace, ctx: CommandContext) -> int:
    _, P = _load(args.path)
    if not _require_valid(ctx, "fixed-points", P):
        return EXIT_FINDING
    records = vertex_fixed_points(P, ctx.tolerances)
    records += enumerate_face_fixed_points(P, ctx.tolerances)
    body: dict[str, Any] = {"fixed_points": [r.to_dict() for r in records]}
    if args.numeric_seeds > 0:
        numeric = numeric_fixed_points(
            P,
            seed_count=args.numeric_seeds,
            seed=args.seed,
            newton=args.newton,
            tolerances=ctx.tolerances,
        )
        body["numeric"] = [r.to_dict() for r in numeric]
    ctx.report("fixed-points", body)
    return EXIT_OK


def cmd_omega(args: argparse.Namespace, ctx: CommandContext) -> int:
    _, P = _load(args.path)
    if not _require_valid(ctx, "omega", P):
        return EXIT_FINDING
    estimate = omega_upper_bound(P, ctx.tolerances)
    body: dict[str, Any] = {"estimate": estimate.to_dict()}
    status = EXIT_OK
    if args.verify:
        x0 = parse_point_spec(args.x0, P.m, ctx.tolerances)
        verification = verify_omega_bound(
            P, estimate, x0, n_steps=args.steps, tol=args.tol, tolerances=ctx.tolerances
        )
        body["verification"] = verification.to_dict()
        if estimate.block_decay is not None:
            traj = simulate(
                P, x0, n_max=args.steps, tolerances=ctx.tolerances, detect_cycles=False
            )
            partial = partial_sum_check(P, traj, estimate.block_decay.r, ctx.tolerances)
            body["partial_sum"] = partial.to_dict()
            if not partial.passed:
                status = EXIT_FINDING
        if not verification.passed:
            status = EXIT_FINDING
    ctx.report("omega", body)
    return status


def cmd_gen(args: argparse.Namespace, ctx: CommandContext) -> int:
    if args.named is not None:
        if args.named not in NAMED_OPERATORS:
            raise ValueError(f"unknown operator {args.named!r}")
        named = NAMED_OPERATORS[args.named]
        doc = OperatorDocument.from_tensor(
            named.tensor(),
            ell=named.ell,
            metadata={"name": named.name, "description": named.description},
        )
    else:
        if args.m is None or args.ell is None:
            raise ValueError("gen needs --named NAME or both --m and --ell")
        spec = GenSpec(args.m, args.ell, args.seed, args.sparsity)
        P = random_operator(spec, ctx.tolerances)
        doc = OperatorDocument.from_tensor(
            P,
            ell=args.ell,
            metadata={"name": f"random-m{args.m}-l{args.ell}-s{args.seed}", "seed": args.seed},
        )
    if args.out is None:
        sys.stdout.write(serialize_document(doc))
        return EXIT_OK
    save_operator(doc, args.out)
    ctx.report("gen", {"out": str(args.out), "m": doc.m, "ell": doc.ell, "name": doc.name})
    return EXIT_OK


def cmd_ensemble(args: argparse.Namespace, ctx: CommandContext) -> int:
    if args.operator is not None:
        doc, P = _load(args.operator)
        if not _require_valid(ctx, "ensemble", P):
            return EXIT_FINDING
        if classify(P, ctx.tolerances).kind is OperatorKind.NOT_ELL_VOLTERRA:
            raise ClassificationError(0, "ensembles need an ℓ-Volterra operator")
        spec = EnsembleSpec.for_operator(
            P, args.count, base_seed=args.seed, steps=args.steps, name=doc.name,
            tolerances=ctx.tolerances,
        )
    else:
        if args.m is None or args.ell is None:
            raise ValueError("ensemble needs --operator PATH or both --m and --ell")
        spec = EnsembleSpec(
            m=args.m, ell=args.ell, count=args.count, base_seed=args.seed,
            steps=args.steps, sparsity=args.sparsity,
        )

    def progress(done: int, total: int) -> None:
        logger.debug("Ensemble member %d/%d done", done, total)

    service = EnsembleService(db_path=args.db)
    results = service.run(spec, workers=args.workers, progress_callback=progress,
                          tolerances=ctx.tolerances)
    body: dict[str, Any] = {"summary": summarize(results)}
    if not args.no_save:
        run = service.save(spec, results, ctx.tolerances)
        body["run_id"] = run.id
    if args.members:
        body["members"] = [r.to_dict() for r in results]
    ctx.report("ensemble", body)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    env_help = ", ".join(
        f"{ENV_PREFIX}{name.upper()}" for name in Tolerances().as_dict()
    )
    parser = argparse.ArgumentParser(
        prog="lvolterra",
        description="Construct, validate, simulate and analyze ℓ-Volterra quadratic "
        "stochastic operators.",
        epilog=f"Tolerances can be overridden with the environment variables {env_help}.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        return p

    def add_path(p: argparse.ArgumentParser) -> None:
        p.add_argument("path", type=Path, help="Operator file (.op.json)")

    def add_x0(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--x0", default="uniform",
            help="Starting point: 'uniform', 'e<i>' or comma-separated coordinates",
        )

    p = add("validate", cmd_validate, "Check non-negativity, symmetry and row sums")
    add_path(p)

    p = add("classify", cmd_classify, "Volterra, ℓ-Volterra or neither")
    add_path(p)

    p = add("canonical", cmd_canonical, "Interaction matrix and residual coefficients")
    add_path(p)

    p = add("simulate", cmd_simulate, "Iterate the operator from a starting point")
    add_path(p)
    add_x0(p)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", type=Path, help="Write the orbit as CSV")
    p.add_argument("--ternary", action="store_true", help="Also write ternary coordinates")
    p.add_argument("--png", action="store_true", help="Also render a ternary plot")
    p.add_argument("--no-cycles", action="store_true", help="Disable cycle detection")
    p.add_argument("--stop-on-boundary", action="store_true")
    p.add_argument("--canonical", action="store_true", help="Iterate the canonical form")

    p = add("lyapunov", cmd_lyapunov, "Check a Lyapunov function along an orbit")
    add_path(p)
    p.add_argument(
        "--family", required=True,
        choices=["phi_p", "linear_r", "psi_p", "ratio_pq", "ratio_qp_plus"],
    )
    p.add_argument("--params", required=True, help="Exponents, r, or a 1-based pair p,q")
    add_x0(p)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--window", type=int, default=50)

    p = add("fixed-points", cmd_fixed_points, "Vertex, face-interior and numeric fixed points")
    add_path(p)
    p.add_argument("--numeric-seeds", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--newton", action="store_true", help="Refine with a root finder")

    p = add("omega", cmd_omega, "Certified bound on the ω-limit set")
    add_path(p)
    p.add_argument("--verify", action="store_true", help="Check the bound along an orbit")
    add_x0(p)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("gen", cmd_gen, "Write a random or named operator")
    p.add_argument("--named", help=f"One of: {', '.join(NAMED_OPERATORS)}")
    p.add_argument("--m", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--out", type=Path)

    p = add("ensemble", cmd_ensemble, "Run many orbits and store the outcomes")
    p.add_argument("--operator", type=Path, help="Fixed operator file")
    p.add_argument("--m", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--db", type=Path, help="SQLite database (default from config)")
    p.add_argument("--no-save", action="store_true")
    p.add_argument("--members", action="store_true", help="Include every member in the report")

    return parser


def setup_logging(verbose: bool) -> None:
    """Send library logs to stderr through rich."""
    root = logging.getLogger("lvolterra")
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(console=Console(stderr=True), show_path=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command, return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.verbose)

    try:
        tolerances = get_config().tolerances
    except ConfigError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    ctx = CommandContext(Console(highlight=False), tolerances)

    try:
        return args.handler(args, ctx)
    except (DocumentParseError, TensorShapeError, SimplexError, ConfigError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (ClassificationError, HypothesisError, DomainError) as e:
        logger.error("%s", e)
        ctx.report(args.command, {"error": str(e)})
        return EXIT_FINDING
    except InconsistencyError as e:
        logger.error("Internal inconsistency: %s", e)
        ctx.report(args.command, {"error": str(e)})
        return EXIT_FINDING
    except (ValueError, KeyError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except OSError as e:
        logger.error("%s: %s", getattr(e, "filename", None) or "I/O error", e.strerror or e)
        return EXIT_USAGE
