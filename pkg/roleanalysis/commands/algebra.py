"""Role analysis subcommands: semigroup, truncate, verify-hom, verify-functor."""

import argparse

import structlog

from roleanalysis.commands.base import AnalysisConfig, add_common_arguments, emit, write_json
from roleanalysis.exceptions import InputValidationError, VerificationError
from roleanalysis.services.blockmodel import density_blockmodel
from roleanalysis.services.semigroup import multiplication_table, semigroup_of, semigroup_report
from roleanalysis.services.truncated import RoundingPolicy, generate_truncated, listing_text, truncated_report
from roleanalysis.services.verification import check_functoriality, homomorphism_report, induced_hom

logger = structlog.get_logger()


def register(subparsers: argparse._SubParsersAction) -> None:
    semigroup = subparsers.add_parser("semigroup", help="Boolean semigroup of the relations")
    add_common_arguments(semigroup)
    semigroup.add_argument("--table", choices=["txt", "json"], default="txt", help="Multiplication table format")
    semigroup.add_argument("--include-zero", action="store_true", help="Show the zero row and column")
    semigroup.set_defaults(handler=semigroup_command)

    truncate = subparsers.add_parser("truncate", help="Truncated max-times semigroup of weighted relations")
    add_common_arguments(truncate)
    truncate.add_argument("--k", type=int, default=18, help="Maximum word length")
    truncate.add_argument("--round", default=None, help="'none' or a number of digits (default from settings)")
    truncate.add_argument("--rule", choices=["half_even", "half_up"], help="Rounding tie rule")
    truncate.add_argument("--partition", help="Reduce to the density blockmodel of this partition first")
    truncate.add_argument("--expect", type=int, help="Expected element count, reported against each convention")
    truncate.add_argument("--table", action="store_true", help="Include the truncated multiplication table")
    truncate.set_defaults(handler=truncate_command)

    verify_hom = subparsers.add_parser("verify-hom", help="Check SG(G) -> SG(G/P) for a perfect blockmodel")
    add_common_arguments(verify_hom)
    verify_hom.add_argument("--partition", required=True, help="Partition JSON")
    verify_hom.set_defaults(handler=verify_hom_command)

    verify_functor = subparsers.add_parser("verify-functor", help="Check homomorphisms compose along a hierarchy")
    add_common_arguments(verify_functor)
    verify_functor.add_argument("--hierarchy", nargs="+", required=True, help="Partition files, fine to coarse")
    verify_functor.set_defaults(handler=verify_functor_command)


def semigroup_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    semigroup = semigroup_of(graph, max_elements=cfg.cap, threads=cfg.threads)
    report = semigroup_report(semigroup, include_zero=args.include_zero)
    write_json(cfg, "semigroup.json", report)
    counts = report.counts
    emit(f"{counts.all} elements ({counts.excluding_zero} nonzero), generators {', '.join(report.generators)}")
    if args.table == "json":
        emit(report.table.model_dump_json(indent=2))
    else:
        emit(multiplication_table(semigroup, include_zero=args.include_zero).to_text())
    if report.associativity is not None and not report.associativity.passed:
        raise VerificationError(
            "multiplication table is not associative",
            {"failures": len(report.associativity.failures)},
            module="semigroup",
        )
    return 0


def truncate_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    if args.k < 1:
        raise InputValidationError(f"--k must be >= 1, got {args.k}", module="cli")
    policy = RoundingPolicy.parse(args.round, args.rule) if args.round is not None else RoundingPolicy.per_step(rule=args.rule)
    if args.partition is not None:
        blockmodel, _ = density_blockmodel(graph, cfg.load_partition(args.partition, graph))
        graph = blockmodel.graph
    semigroup = generate_truncated(
        graph.matrices, args.k, policy=policy, cap=cfg.cap, names=graph.relation_names, threads=cfg.threads
    )
    report = truncated_report(semigroup, expected_count=args.expect, include_table=args.table)
    write_json(cfg, "truncated.json", report)
    emit(listing_text(report))
    if args.expect is not None:
        matches = ", ".join(report.matching_conventions) or "none"
        emit(f"expected {args.expect}: matches {matches}")
    return 0


def verify_hom_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    hom = induced_hom(graph, cfg.load_partition(args.partition, graph), max_elements=cfg.cap, threads=cfg.threads)
    report = homomorphism_report(hom)
    write_json(cfg, "homomorphism.json", report)
    emit(f"homomorphism verified: {report.source_elements} -> {report.target_elements} elements")
    emit(f"surjective: {str(report.surjective).lower()}")
    return 0


def verify_functor_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    hierarchy = cfg.load_hierarchy(args.hierarchy, graph)
    report = check_functoriality(graph, hierarchy, max_elements=cfg.cap, threads=cfg.threads)
    write_json(cfg, "functoriality.json", report)
    for pair in report.pairs:
        emit(
            f"level {pair.i} -> {pair.j}: homomorphism={str(pair.homomorphism).lower()} "
            f"surjective={str(pair.surjective).lower()} quotient_consistent={str(pair.quotient_consistent).lower()}"
        )
    for triple in report.triples:
        emit(f"compose {triple.i} -> {triple.k} -> {triple.j}: {'ok' if triple.passed else 'MISMATCH'}")
    emit(f"functoriality: {'pass' if report.passed else 'FAIL'}")
    return 0 if report.passed else 2
