"""
Command-line interface for the typing simulator.

Usage:
    rbse-sim calibrate --auc 0.8                      Gaussian evidence model for an AUC
    rbse-sim calibrate --synth --dims 40 --n 100      Fit a KDE model on synthetic features
    rbse-sim simulate config/manifests/rsvp.json      Run a Monte-Carlo study
    rbse-sim compare a.csv b.csv --arm-a arsvp --arm-b rsvp_random
    rbse-sim codebook alp --context "THE QUICK"       Dump a code matrix as CSV

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, NoReturn

from src.config import Config, load_config, setup_logging
from src.core.exceptions import ConfigError, PairingError, SimulationError
from src.core.models import SequenceSpec, Vocabulary
from src.evidence.calibration import calibrate_pipeline, synth_calibration
from src.evidence.density import (
    evidence_auc,
    gaussian_evidence_model,
    load_evidence_model,
    save_evidence_model,
    separation_for_auc,
    sigma_point_estimates,
)
from src.language.ngram import prior, train
from src.language.phrases import load_corpus, load_phrase_pool
from src.manifest import load_manifest, log_effective_settings
from src.paradigms.codes import (
    ALP_CODEWORD_LENGTH,
    ALP_MAX_WEIGHT,
    RCP_GRID,
    CodeMatrix,
    alp_pool_from_posterior,
    rcp_matrix,
    singleton_pool,
)
from src.reporting import (
    Provenance,
    manifest_sha256,
    read_csv,
    staged_directory,
    write_csv,
    write_json,
    write_text_atomic,
)
from src.simulation.study import PPC_BY_AUC_COLUMNS, TTD_SCATTER_COLUMNS, run_study
from src.stats.summary import (
    COMPARISON_COLUMNS,
    SESSION_COLUMNS,
    GroupSummary,
    PhraseOutcome,
    compare_arms,
    summarize_groups,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

GROUP_SUMMARY_COLUMNS = tuple(f.name for f in fields(GroupSummary))
# Shown per missing pairing key in an error line
_MAX_KEYS_SHOWN = 5


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _auc_arg(text: str) -> float:
    value = float(text)
    if not 0.5 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"AUC must lie in [0.5, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonnegative_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def _parameter_digest(parameters: dict[str, Any]) -> str:
    return manifest_sha256(json.dumps(parameters, sort_keys=True, default=str).encode("utf-8"))


def _output_dir(config: Config) -> Path:
    return Path(config.output.directory)


def cmd_calibrate(args: argparse.Namespace, config: Config) -> int:
    """Build an evidence model, from an AUC or from synthetic calibration data."""
    seed = config.simulation.rng_seed if args.seed is None else args.seed
    quadrature_points = args.quadrature_points or config.evidence.quadrature_points
    output = Path(args.output) if args.output else _output_dir(config) / "evidence_model.json"

    if args.auc is not None:
        parameters = {"source": "gaussian", "auc": args.auc, "seed": seed}
        logger.info(f"Building Gaussian evidence model for AUC {args.auc}")
        model = gaussian_evidence_model(args.auc, quadrature_points)
        sigma = sigma_point_estimates(model)
        metadata: dict[str, Any] = {
            "source": "gaussian",
            "auc": args.auc,
            "separation": separation_for_auc(args.auc),
        }
        achieved = evidence_auc(model)
    else:
        n_nontarget = args.n_nontarget or args.n * (config.simulation.trials_per_sequence - 1)
        parameters = {
            "source": "synthetic",
            "dims": args.dims,
            "n_target": args.n,
            "n_nontarget": n_nontarget,
            "separation": args.separation,
            "seed": seed,
        }
        logger.info(
            f"Calibrating on synthetic data: {args.dims} dims, {args.n} targets, "
            f"{n_nontarget} non-targets, separation {args.separation}"
        )
        data = synth_calibration(args.dims, args.n, n_nontarget, args.separation, seed)
        model, report = calibrate_pipeline(
            data,
            lambda_grid=config.evidence.lambda_grid,
            gamma_grid=config.evidence.gamma_grid,
            folds=config.evidence.folds,
            seed=seed,
            quadrature_points=quadrature_points,
        )
        sigma = report.sigma
        achieved = report.achieved_auc
        metadata = {"source": "synthetic", "calibration": report.to_dict()}

    provenance = Provenance(_parameter_digest(parameters), seed)
    metadata.update(
        {"achieved_auc": achieved, "sigma": sigma.to_dict(), "provenance": provenance.to_dict()}
    )
    save_evidence_model(model, output, metadata)

    print(f"Evidence model: {output}")
    print(f"  AUC      {achieved:.4f}")
    print(f"  sigma+   {sigma.sigma_plus:.6g}")
    print(f"  sigma-   {sigma.sigma_minus:.6g}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    """Run the study a manifest describes and write its report files."""
    manifest = load_manifest(args.manifest, config).with_overrides(
        reps=args.reps,
        phrases_per_level=args.phrases,
        auc_levels=args.auc,
        output_dir=args.output_dir,
    )
    logger.info("Effective settings:")
    log_effective_settings(manifest)

    lm_config = config.language_model
    lm = train(
        load_corpus(manifest.corpus),
        manifest.order,
        manifest.vocabulary,
        top_weight=lm_config.top_weight,
        decay=lm_config.decay,
        uniform_weight=lm_config.uniform_weight,
    )
    phrase_pool = load_phrase_pool(manifest.phrases)
    evidence_models = [load_evidence_model(p) for p in manifest.evidence_models]
    workers = args.workers or config.worker.workers

    report = run_study(
        arms=manifest.arms,
        auc_levels=manifest.auc_levels,
        reps=manifest.reps,
        lm=lm,
        phrase_pool=phrase_pool,
        sim_config=manifest.simulation,
        backspace_prob=manifest.backspace_prob,
        seed=manifest.seed,
        phrases_per_level=manifest.phrases_per_level,
        workers=workers,
        evidence_models=evidence_models,
        quadrature_points=config.evidence.quadrature_points,
    )

    out_dir = manifest.output_dir or _output_dir(config)
    provenance = Provenance(manifest.sha256, manifest.seed)
    outcomes = report.outcomes()
    with staged_directory(out_dir) as stage:
        write_csv(
            stage / "sessions.csv", SESSION_COLUMNS, (o.to_dict() for o in outcomes), provenance
        )
        write_csv(
            stage / "user_summary.csv",
            GROUP_SUMMARY_COLUMNS,
            (asdict(s) for s in summarize_groups(outcomes)),
            provenance,
        )
        write_csv(stage / "ttd_scatter.csv", TTD_SCATTER_COLUMNS, report.ttd_scatter(), provenance)
        write_csv(stage / "ppc_by_auc.csv", PPC_BY_AUC_COLUMNS, report.ppc_by_auc(), provenance)
        write_json(
            stage / "summary.json",
            {"manifest": manifest.describe(), **report.aggregates()},
            provenance,
        )

    for name, stats in report.aggregates()["arms"].items():
        print(
            f"{name:<16} TTD {stats['mean_ttd_minutes']:8.2f} min   "
            f"PPC {stats['mean_ppc']:.3f}   ({stats['sessions']} sessions)"
        )
    print(f"Results written to {out_dir}")
    return EXIT_OK


def _read_outcomes(
    path: str, arm: str | None, flag: str
) -> tuple[list[PhraseOutcome], Provenance | None]:
    provenance, rows = read_csv(path)
    outcomes = [PhraseOutcome.from_row(row) for row in rows]
    arms = sorted({o.arm for o in outcomes})
    if arm is not None:
        outcomes = [o for o in outcomes if o.arm == arm]
        if not outcomes:
            raise ConfigError(f"{path} has no sessions for arm '{arm}' (found {arms})", key=flag)
    elif len(arms) != 1:
        raise ConfigError(f"{path} holds arms {arms}; choose one with {flag}", key=flag)
    return outcomes, provenance


def cmd_compare(args: argparse.Namespace, config: Config) -> int:
    """Paired Wilcoxon comparison of two arms from session CSVs."""
    outcomes_a, provenance_a = _read_outcomes(args.report_a, args.arm_a, "--arm-a")
    outcomes_b, _ = _read_outcomes(args.report_b, args.arm_b, "--arm-b")
    name_a, name_b = outcomes_a[0].arm, outcomes_b[0].arm
    logger.info(f"Comparing {name_a} ({len(outcomes_a)} rows) with {name_b} ({len(outcomes_b)})")

    rows = compare_arms(outcomes_a, outcomes_b)

    seed = provenance_a.seed if provenance_a else 0
    inputs = Path(args.report_a).read_bytes() + b"\n" + Path(args.report_b).read_bytes()
    provenance = Provenance(manifest_sha256(inputs), seed)
    output = Path(args.output) if args.output else _output_dir(config) / "comparison.csv"
    write_csv(output, COMPARISON_COLUMNS, (r.to_row() for r in rows), provenance)

    print(f"{name_a} vs {name_b} (a - b)")
    for r in rows:
        print(
            f"  {r.metric:<12} n={r.n:<3} W={r.statistic:<8.6g} "
            f"p={r.p_two_sided:<10.6g} mean_diff={r.mean_diff:.6g}"
        )
    return EXIT_OK


def cmd_codebook(args: argparse.Namespace, config: Config) -> int:
    """Write the code matrix of a paradigm as CSV."""
    vocabulary = Vocabulary()
    n = len(vocabulary)
    if args.kind == "rcp":
        matrix = rcp_matrix(args.grid[0], args.grid[1], vocabulary)
        parameters = {"kind": "rcp", "grid": list(args.grid)}
    elif args.kind == "alp":
        lm_config = config.language_model
        lm = train(
            load_corpus(lm_config.corpus_path),
            lm_config.order,
            vocabulary,
            top_weight=lm_config.top_weight,
            decay=lm_config.decay,
            uniform_weight=lm_config.uniform_weight,
        )
        context = lm.context_for(Vocabulary.normalize_text(args.context))
        posterior = prior(lm, context, lm_config.backspace_prob)
        _, matrix = alp_pool_from_posterior(posterior, args.length, args.max_weight)
        parameters = {
            "kind": "alp",
            "length": args.length,
            "max_weight": args.max_weight,
            "context": args.context,
        }
    else:
        sequence = SequenceSpec(singleton_pool(n, n).candidates)
        matrix = CodeMatrix.from_sequence(sequence, n)
        parameters = {"kind": "singleton"}

    text = matrix.to_csv(vocabulary)
    if args.output:
        provenance = Provenance(_parameter_digest(parameters), 0)
        write_text_atomic(args.output, provenance.comment_line() + "\n" + text)
        print(f"{args.kind} code matrix ({n} x {matrix.codeword_length}) written to {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fail(error: Exception, code: int) -> int:
    message = str(error).splitlines()[0] if str(error) else type(error).__name__
    if isinstance(error, PairingError) and error.missing_keys:
        shown = ", ".join(str(k) for k in error.missing_keys[:_MAX_KEYS_SHOWN])
        more = len(error.missing_keys) - _MAX_KEYS_SHOWN
        message += f": {shown}" + (f" and {more} more" if more > 0 else "")
    print(f"error: {message}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rbse-sim",
        description="Active-query typing BCI simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--config",
        "-c",
        type=str,
        default=None,
        help="Path to configuration file",
    )
    parser.add_argument(
        "--log-level",
        "-l",
        type=str,
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level override",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # calibrate command
    calibrate_parser = subparsers.add_parser("calibrate", help="Build an evidence model")
    source = calibrate_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--auc", type=_auc_arg, help="Target AUC of a Gaussian model")
    source.add_argument(
        "--synth",
        action="store_true",
        help="Run the RDA + KDE pipeline on synthetic calibration features",
    )
    calibrate_parser.add_argument(
        "--dims", type=_positive_int, default=40, help="Feature dimension (default: 40)"
    )
    calibrate_parser.add_argument(
        "--n",
        type=_positive_int,
        default=100,
        help="Target samples, one per calibration sequence (default: 100)",
    )
    calibrate_parser.add_argument(
        "--n-nontarget",
        type=_positive_int,
        default=None,
        help="Non-target samples (default: n x (trials_per_sequence - 1))",
    )
    calibrate_parser.add_argument(
        "--separation",
        type=_nonnegative_float,
        default=1.5,
        help="Distance between the class means (default: 1.5)",
    )
    calibrate_parser.add_argument("--seed", type=int, default=None, help="Random seed")
    calibrate_parser.add_argument(
        "--quadrature-points", type=_positive_int, default=None, help="Quadrature grid size"
    )
    calibrate_parser.add_argument("--output", "-o", default=None, help="Model JSON path")
    calibrate_parser.set_defaults(func=cmd_calibrate)

    # simulate command
    simulate_parser = subparsers.add_parser("simulate", help="Run a Monte-Carlo study")
    simulate_parser.add_argument("manifest", help="Experiment manifest (JSON)")
    simulate_parser.add_argument(
        "--reps", type=_positive_int, default=None, help="Repetitions per user"
    )
    simulate_parser.add_argument(
        "--phrases", type=_positive_int, default=None, help="Phrases per difficulty level"
    )
    simulate_parser.add_argument(
        "--auc",
        type=_auc_arg,
        nargs="+",
        default=None,
        help="AUC levels of the simulated users",
    )
    simulate_parser.add_argument(
        "--workers",
        "-w",
        type=_positive_int,
        default=None,
        help="Worker processes (default: from config)",
    )
    simulate_parser.add_argument(
        "--output-dir",
        "-o",
        default=None,
        help="Output directory (default: manifest, then RBSE_SIM_OUTPUT_DIR, then config)",
    )
    simulate_parser.set_defaults(func=cmd_simulate)

    # compare command
    compare_parser = subparsers.add_parser("compare", help="Paired comparison of two arms")
    compare_parser.add_argument("report_a", help="Session CSV of arm a")
    compare_parser.add_argument("report_b", help="Session CSV of arm b")
    compare_parser.add_argument("--arm-a", default=None, help="Arm to take from report a")
    compare_parser.add_argument("--arm-b", default=None, help="Arm to take from report b")
    compare_parser.add_argument("--output", "-o", default=None, help="Comparison CSV path")
    compare_parser.set_defaults(func=cmd_compare)

    # codebook command
    codebook_parser = subparsers.add_parser("codebook", help="Dump a code matrix as CSV")
    codebook_parser.add_argument("kind", choices=["rcp", "alp", "singleton"])
    codebook_parser.add_argument(
        "--grid",
        type=_positive_int,
        nargs=2,
        default=list(RCP_GRID),
        metavar=("ROWS", "COLS"),
        help="RCP grid (default: 4 7)",
    )
    codebook_parser.add_argument(
        "--length",
        type=_positive_int,
        default=ALP_CODEWORD_LENGTH,
        help="ALP codeword length (default: 6)",
    )
    codebook_parser.add_argument(
        "--max-weight",
        type=_positive_int,
        default=ALP_MAX_WEIGHT,
        help="ALP maximum codeword weight (default: 3)",
    )
    codebook_parser.add_argument(
        "--context", default="", help="Typed text whose LM prior ranks the ALP codewords"
    )
    codebook_parser.add_argument(
        "--output", "-o", default=None, help="CSV path (default: stdout)"
    )
    codebook_parser.set_defaults(func=cmd_codebook)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Load config and set up logging
    try:
        config = load_config(args.config)
    except ConfigError as e:
        return _fail(e, EXIT_USAGE)
    if args.log_level:
        config.logging.level = args.log_level
    setup_logging(config.logging)

    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    logger.info(f"Running {args.command}")
    try:
        code = args.func(args, config)
    except ConfigError as e:
        return _fail(e, EXIT_USAGE)
    except (SimulationError, OSError, ValueError) as e:
        logger.debug("Command failed", exc_info=True)
        return _fail(e, EXIT_RUNTIME)
    logger.info(f"{args.command} finished")
    return code


if __name__ == "__main__":
    sys.exit(main())
