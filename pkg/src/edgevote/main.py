"""CLI entry point for edgevote."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from .errors import EdgeVoteError, InputError

logger = logging.getLogger("edgevote")


def _setup_logging() -> None:
    """Configure logging to file for run tracking."""
    from logging.handlers import RotatingFileHandler

    from .config import get_settings

    settings = get_settings()
    log_dir = Path(settings.log_dir).expanduser()
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / "edgevote.log"

    for handler in list(logger.handlers):
        if isinstance(handler, RotatingFileHandler):
            logger.removeHandler(handler)
            handler.close()

    # Rotating file handler: 1MB max, keep 3 backups
    file_handler = RotatingFileHandler(
        log_file,
        maxBytes=1_000_000,  # 1 MB
        backupCount=3,
        encoding="utf-8",
    )
    file_handler.setLevel(settings.log_level)
    file_handler.setFormatter(logging.Formatter(
        "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    ))

    logger.setLevel(settings.log_level)
    logger.addHandler(file_handler)


# =============================================================================
# Helpers
# =============================================================================

def _json_default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if is_dataclass(value):
        return asdict(value)
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


def _emit(payload: Any, out: str | None = None) -> None:
    """Print a JSON document, or write it when an output path is given."""
    from .config import write_output

    if is_dataclass(payload):
        payload = asdict(payload)
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        path = write_output(out, text + "\n")
        print(f"Wrote {path}")
    else:
        print(text)


def _load_document(value: str) -> Any:
    """Inline JSON when the argument starts with '{', otherwise a file path."""
    from .config import load_json

    if value.lstrip().startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise InputError(f"Invalid inline JSON: {e}") from e
    return load_json(value)


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _write_experiment(experiment, result, out: str | None) -> None:
    if out:
        path = experiment.write(result, out)
        print(f"Wrote {path}")
    else:
        from .storage import rows_to_csv

        sys.stdout.write(rows_to_csv(experiment.rows(result), experiment.columns))


# =============================================================================
# Commands
# =============================================================================

def _cmd_bounds_audit(args: argparse.Namespace) -> int:
    from .config import AuditGrid
    from .constants import AUDIT_COLUMNS
    from .storage import rows_to_csv, write_csv
    from .tails import BoundId, audit_all, audit_bound, default_grid

    if args.bound == "all":
        reports = audit_all()
    else:
        bound_id = BoundId(args.bound)
        grid = AuditGrid.model_validate(_load_document(args.grid)) if args.grid else default_grid(bound_id)
        reports = [audit_bound(bound_id, grid)]

    rows = [record.as_row() for report in reports for record in report.records]
    if args.out:
        write_csv(rows, AUDIT_COLUMNS, args.out)
    else:
        sys.stdout.write(rows_to_csv(rows, AUDIT_COLUMNS))

    failed = False
    for report in reports:
        print(
            f"{report.bound_id.value}: {len(report.records)} points, "
            f"{len(report.skipped)} skipped, {len(report.violations)} violations",
            file=sys.stderr,
        )
        failed = failed or not report.passed
    return 1 if failed else 0


def _cmd_bounds_theorem(args: argparse.Namespace) -> int:
    from . import theory, vote
    from .config import TheoremParams

    p = TheoremParams.model_validate(_load_document(args.params))
    which = args.which
    if which == "t1":
        n, k, l, gamma = p.require("n", "k", "l", "gamma")  # noqa: E741
        result = {"bound": vote.theorem1_bound(vote.Composition(n, k, l), gamma)}
    elif which == "t1hetero":
        n, k, l, lo, hi = p.require("n", "k", "l", "gamma_min", "gamma_max")  # noqa: E741
        result = {"bound": vote.hetero_bound(n, k, l, lo, hi)}
    elif which == "dependence":
        n, k, r, gamma = p.require("n", "k", "r", "gamma")
        result = {"bound": vote.dependence_bound(n, k, r, gamma, p.c)}
    elif which == "mostly_irrelevant":
        n, gamma = p.require("n", "gamma")
        comp = vote.mostly_irrelevant_point(n)
        result = {
            "n": comp.n,
            "k": comp.k,
            "l": comp.l,
            "error": vote.exact_error(comp, gamma),
            "t1_bound": vote.theorem1_bound(comp, gamma),
        }
    elif which == "t2":
        result = theory.theorem2_bound(*p.require("N", "K", "gamma", "m", "beta"))
    elif which == "counts":
        result = theory.count_bounds(*p.require("N", "K", "gamma", "m", "beta", "delta"))
    elif which == "t2hetero":
        result = {
            "bound": theory.theorem2_hetero_bound(
                *p.require("N", "K", "gamma_min", "gamma_max", "m", "beta")
            )
        }
    elif which == "t3":
        result = theory.theorem3_bound(*p.require("N", "K", "gamma", "m", "c_frac"))
    elif which == "bayes":
        exact, bound = theory.bayes_error_and_bound(*p.require("K", "gamma"))
        result = {"exact": exact, "bound": bound}
    elif which == "floor":
        result = {"bound": theory.relevant_floor(*p.require("k", "gamma"))}
    elif which == "irrfloor":
        result = {"bound": theory.expected_irrelevant_floor(*p.require("N", "K", "beta", "m"))}
    else:
        result = theory.regime_params(*p.require("gamma"))
    _emit(result)
    return 0


def _cmd_source_draw(args: argparse.Namespace) -> int:
    from .config import SourceConfig
    from .source import draw_dataset
    from .storage import save_dataset

    spec = SourceConfig.model_validate(_load_document(args.config)).to_spec()
    dataset = draw_dataset(spec, args.m, args.seed)
    path = save_dataset(dataset, args.out)
    print(f"Wrote {dataset.m} x {dataset.N} dataset to {path}")
    return 0


def _cmd_error_exact(args: argparse.Namespace) -> int:
    from .vote import Composition, exact_error, theorem1_bound

    comp = Composition(args.n, args.k, args.l)
    _emit({"error": exact_error(comp, args.gamma), "t1_bound": theorem1_bound(comp, args.gamma)})
    return 0


def _cmd_error_mc(args: argparse.Namespace) -> int:
    from .config import SourceConfig
    from .storage import load_model
    from .vote import mc_error

    model = load_model(args.model)
    spec = SourceConfig.model_validate(_load_document(args.spec)).to_spec()
    estimate, se = mc_error(model, spec, args.trials, args.seed)
    _emit({"error": estimate, "error_se": se, "trials": args.trials})
    return 0


def _cmd_learn(args: argparse.Namespace) -> int:
    from .learner import select_model, select_positive_model, top_j_model
    from .storage import load_dataset, save_model

    dataset = load_dataset(args.data)
    if args.top_j is not None:
        model = top_j_model(dataset, args.top_j)
    elif args.positive_only:
        model = select_positive_model(dataset, args.beta)
    else:
        model = select_model(dataset, args.beta)
    path = save_model(model, args.out)
    print(f"Wrote model with {model.n} features to {path}")
    return 0


def _cmd_posterior(args: argparse.Namespace) -> int:
    from .storage import load_dataset
    from .theory import posterior_relevance

    dataset = load_dataset(args.data)
    value = posterior_relevance(
        dataset.labels, dataset.values, dataset.N, args.K, args.gamma, args.var
    )
    _emit({"variable": args.var, "posterior": value})
    return 0


def _cmd_monotonicity(args: argparse.Namespace) -> int:
    from .theory import monotonicity_audit

    report = monotonicity_audit(args.N, args.K, args.m, args.gamma)
    _emit({
        "samples_checked": report.samples_checked,
        "violations": len(report.violations),
        "min_strict_gap": report.min_strict_gap,
    })
    return 0 if report.passed else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    from .config import ExperimentConfig
    from .harness import create_experiment

    config = ExperimentConfig.model_validate(_load_document(args.config))
    experiment = create_experiment("sweep", config)
    _write_experiment(experiment, experiment.run(), args.out or config.output)
    return 0


def _cmd_repro_fig2(args: argparse.Namespace) -> int:
    from .harness import create_experiment

    experiment = create_experiment("fig2", args.seed)
    _emit({"seed": args.seed, "runs": experiment.run()}, args.out)
    return 0


def _cmd_exclusivity(args: argparse.Namespace) -> int:
    from .harness import create_experiment

    experiment = create_experiment("exclusivity", _str_list(args.gammas), args.replicates, args.seed)
    _write_experiment(experiment, experiment.run(), args.out)
    return 0


def _cmd_dependence(args: argparse.Namespace) -> int:
    from .config import DependenceConfig
    from .harness import create_experiment

    config = DependenceConfig.model_validate(_load_document(args.config))
    experiment = create_experiment("dependence", _int_list(args.rs), config)
    _write_experiment(experiment, experiment.run(), args.out)
    return 0


def _cmd_irrelevant(args: argparse.Namespace) -> int:
    from .config import ExperimentConfig
    from .harness import create_experiment

    config = ExperimentConfig.model_validate(_load_document(args.config))
    experiment = create_experiment("irrelevant", config, args.beta)
    result = experiment.run()
    _write_experiment(experiment, result, args.out)
    return 0 if result.passed else 1


def _cmd_dominance(args: argparse.Namespace) -> int:
    from .config import ExperimentConfig
    from .harness import create_experiment

    config = ExperimentConfig.model_validate(_load_document(args.config))
    experiment = create_experiment("dominance", config)
    result = experiment.run()
    _write_experiment(experiment, result, args.out)
    return 0 if all(r.passed for r in result) else 1


# =============================================================================
# Parser
# =============================================================================

THEOREMS = (
    "t1", "t1hetero", "dependence", "mostly_irrelevant", "t2", "t2hetero", "counts", "t3",
    "bayes", "floor", "irrfloor", "regime",
)


def build_parser() -> argparse.ArgumentParser:
    from .constants import DEFAULT_MC_TRIALS, DEFAULT_TRAIN_EXAMPLES, __version__
    from .tails import BoundId

    parser = argparse.ArgumentParser(
        prog="edgevote",
        description="edgevote: majority votes over weak relevant and irrelevant variables",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    bounds = commands.add_parser("bounds", help="Tail-bound audits and theorem bounds")
    bounds_cmds = bounds.add_subparsers(dest="bounds_command", required=True)
    audit = bounds_cmds.add_parser("audit", help="Audit a tail bound against exact tails")
    audit.add_argument("--bound", default="all", choices=["all"] + [b.value for b in BoundId])
    audit.add_argument("--grid", help="AuditGrid JSON file or inline JSON")
    audit.add_argument("--out", help="CSV output path")
    audit.set_defaults(handler=_cmd_bounds_audit)
    theorem = bounds_cmds.add_parser("theorem", help="Evaluate an error bound")
    theorem.add_argument("--which", required=True, choices=THEOREMS)
    theorem.add_argument("--params", required=True, help="JSON file or inline JSON")
    theorem.set_defaults(handler=_cmd_bounds_theorem)

    source = commands.add_parser("source", help="Generative sources")
    source_cmds = source.add_subparsers(dest="source_command", required=True)
    draw = source_cmds.add_parser("draw", help="Draw a training set")
    draw.add_argument("--config", required=True, help="SourceConfig JSON file or inline JSON")
    draw.add_argument("--m", type=int, default=DEFAULT_TRAIN_EXAMPLES, help="Training examples")
    draw.add_argument("--seed", type=int, default=0)
    draw.add_argument("--out", required=True)
    draw.set_defaults(handler=_cmd_source_draw)

    error = commands.add_parser("error", help="Error of a vote model")
    error_cmds = error.add_subparsers(dest="error_command", required=True)
    exact = error_cmds.add_parser("exact", help="Exact error from a composition")
    exact.add_argument("--n", type=int, required=True)
    exact.add_argument("--k", type=int, required=True)
    exact.add_argument("--l", type=int, required=True)
    exact.add_argument("--gamma", required=True)
    exact.set_defaults(handler=_cmd_error_exact)
    mc = error_cmds.add_parser("mc", help="Monte Carlo error of a model file")
    mc.add_argument("--model", required=True)
    mc.add_argument("--spec", required=True, help="SourceConfig JSON file or inline JSON")
    mc.add_argument("--trials", type=int, default=DEFAULT_MC_TRIALS)
    mc.add_argument("--seed", type=int, default=0)
    mc.set_defaults(handler=_cmd_error_mc)

    learn = commands.add_parser("learn", help="Learn a threshold vote from a dataset")
    learn.add_argument("--data", required=True)
    learn.add_argument("--beta", default="0")
    learn.add_argument("--positive-only", action="store_true")
    learn.add_argument("--top-j", type=int, help="Vote the j variables with largest edge")
    learn.add_argument("--out", required=True)
    learn.set_defaults(handler=_cmd_learn)

    posterior = commands.add_parser("posterior", help="Posterior relevance of a variable")
    posterior.add_argument("--data", required=True)
    posterior.add_argument("--K", type=int, required=True)
    posterior.add_argument("--gamma", required=True)
    posterior.add_argument("--var", type=int, required=True)
    posterior.set_defaults(handler=_cmd_posterior)

    mono = commands.add_parser("monotonicity", help="Posterior-versus-edge order audit")
    mono.add_argument("--N", type=int, required=True)
    mono.add_argument("--K", type=int, required=True)
    mono.add_argument("--m", type=int, required=True)
    mono.add_argument("--gamma", required=True)
    mono.set_defaults(handler=_cmd_monotonicity)

    sweep = commands.add_parser("sweep", help="Beta sweep from an experiment config")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out")
    sweep.set_defaults(handler=_cmd_sweep)

    fig2 = commands.add_parser("repro-fig2", help="Canonical 10^5-variable benchmark")
    fig2.add_argument("--seed", type=int, default=1)
    fig2.add_argument("--out")
    fig2.set_defaults(handler=_cmd_repro_fig2)

    excl = commands.add_parser("exclusivity", help="Inclusive versus exclusive learners")
    excl.add_argument("--gammas", default="1/5,3/20,1/10")
    excl.add_argument("--replicates", type=int, default=100)
    excl.add_argument("--seed", type=int, default=0)
    excl.add_argument("--out")
    excl.set_defaults(handler=_cmd_exclusivity)

    dep = commands.add_parser("dependence", help="Error under block-clique dependence")
    dep.add_argument("--rs", default="0,1,3,7")
    dep.add_argument("--config", required=True)
    dep.add_argument("--out")
    dep.set_defaults(handler=_cmd_dependence)

    irr = commands.add_parser("irrelevant", help="Irrelevant variables kept at one beta")
    irr.add_argument("--config", required=True)
    irr.add_argument("--beta", required=True)
    irr.add_argument("--out")
    irr.set_defaults(handler=_cmd_irrelevant)

    dom = commands.add_parser("dominance", help="Mean error against the learning bounds")
    dom.add_argument("--config", required=True)
    dom.add_argument("--out")
    dom.set_defaults(handler=_cmd_dominance)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one edgevote command and return its exit status."""
    _setup_logging()
    args = build_parser().parse_args(argv)

    try:
        return args.handler(args)
    except (EdgeVoteError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception:
        logger.exception("Unexpected failure in %s", args.command)
        print("error: unexpected failure, see the log for details", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
