"""Positional analysis subcommands: ingest, partition, density, image, leanfit, report, fixtures."""

import argparse
from typing import Optional

import structlog

from roleanalysis.commands.base import AnalysisConfig, add_common_arguments, emit, write_json, write_matrix_csv
from roleanalysis.exceptions import InputValidationError
from roleanalysis.fixtures import get_fixture, list_fixtures
from roleanalysis.graph.io import load_graph, save_partition
from roleanalysis.graph.models import Partition
from roleanalysis.schemas.reports import FixtureInfo
from roleanalysis.services.blockmodel import density_blockmodel, image_blockmodel, lean_fit_blockmodel
from roleanalysis.services.equivalence import agglomerate, distance_matrix, structural_partition
from roleanalysis.services.pipeline import (
    density_report,
    graph_summary,
    image_report,
    partition_report,
    report_text,
    run_pipeline,
)
from roleanalysis.services.truncated import RoundingPolicy

logger = structlog.get_logger()


def _relations(value: Optional[str]) -> Optional[list]:
    if value is None:
        return None
    names = [name.strip() for name in value.split(",") if name.strip()]
    if not names:
        raise InputValidationError("--relations must name at least one relation", module="cli")
    return names


def register(subparsers: argparse._SubParsersAction) -> None:
    ingest = subparsers.add_parser("ingest", help="Validate a graph and print a summary")
    add_common_arguments(ingest)
    ingest.set_defaults(handler=ingest_command)

    partition = subparsers.add_parser("partition", help="Structural or approximate equivalence partition")
    add_common_arguments(partition)
    method = partition.add_mutually_exclusive_group(required=True)
    method.add_argument("--exact", action="store_true", help="Structural equivalence")
    method.add_argument("--metric", choices=["euclidean", "cosine"], help="Profile distance for clustering")
    target = partition.add_mutually_exclusive_group()
    target.add_argument("--blocks", type=int, help="Number of blocks to cluster into")
    target.add_argument("--threshold", type=float, help="Largest complete-linkage distance to merge at")
    partition.add_argument("--relations", help="Comma-separated relation subset (default: all)")
    partition.set_defaults(handler=partition_command)

    for name, handler, text in (
        ("density", density_command, "Density matrices for a partition"),
        ("image", image_command, "Alpha-density image matrices for a partition"),
        ("leanfit", leanfit_command, "Lean-fit image matrices for a partition"),
    ):
        sub = subparsers.add_parser(name, help=text)
        add_common_arguments(sub)
        sub.add_argument("--partition", required=True, help="Partition JSON (node label -> block label)")
        if name == "image":
            sub.add_argument("--delta", default="auto", help="'auto' (share of ones per relation) or a value in (0, 1]")
        sub.set_defaults(handler=handler)

    report = subparsers.add_parser("report", help="Full pipeline: semigroups, blockmodels and verification")
    add_common_arguments(report)
    report.add_argument("--partition", help="Partition JSON (default: the fixture's partition, if any)")
    report.add_argument("--exact", action="store_true", help="Use the structural partition when none is given")
    report.add_argument("--hierarchy", nargs="+", help="Partition files, fine to coarse")
    report.add_argument("--k", type=int, default=18, help="Truncation depth for weighted semigroups")
    report.add_argument("--round", default=None, help="'none' or a number of digits")
    report.add_argument("--rule", choices=["half_even", "half_up"], help="Rounding tie rule")
    report.add_argument("--delta", default="auto", help="Image threshold")
    report.set_defaults(handler=report_command)

    fixtures = subparsers.add_parser("fixtures", help="List bundled datasets or describe one")
    fixtures.add_argument("name", nargs="?", help="Fixture name")
    fixtures.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    fixtures.set_defaults(handler=fixtures_command)


def ingest_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    summary = graph_summary(graph)
    write_json(cfg, "graph.json", summary)
    kind = "weighted" if graph.weighted else "Boolean"
    emit(f"{kind} graph: n={graph.n}, r={graph.r}, relations={', '.join(graph.relation_names)}")
    if summary.zero_relations:
        emit(f"zero relations: {', '.join(summary.zero_relations)}")
    return 0


def partition_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    relations = _relations(args.relations)
    if args.exact:
        if args.blocks is not None or args.threshold is not None:
            raise InputValidationError("--blocks/--threshold only apply with --metric", module="cli")
        partition = structural_partition(graph, relations)
        report = partition_report(partition, graph, method="structural", relations=relations)
    else:
        if args.blocks is None and args.threshold is None:
            raise InputValidationError("--metric needs --blocks or --threshold", module="cli")
        distances = distance_matrix(graph, args.metric, relations=relations, threads=cfg.threads)
        partition = agglomerate(distances, num_blocks=args.blocks, threshold=args.threshold)
        report = partition_report(
            partition, graph, method="complete_linkage", relations=relations, distances=distances
        )
    save_partition(partition, graph, cfg.out / "partition.json")
    write_json(cfg, "partition_report.json", report)
    emit(" ".join("{" + ",".join(block) + "}" for block in report.blocks))
    if report.zero_profiles:
        emit(f"zero profiles under cosine: {', '.join(report.zero_profiles)}")
    return 0


def density_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    blockmodel, _ = density_blockmodel(graph, cfg.load_partition(args.partition, graph))
    report = density_report(blockmodel)
    for name, matrix in zip(blockmodel.graph.relation_names, blockmodel.graph.matrices):
        write_matrix_csv(cfg, f"density_{name}.csv", matrix)
    write_json(cfg, "density.json", report)
    for artifact in report.matrices:
        emit(f"{artifact.name}:\n" + "\n".join(" ".join(row) for row in artifact.rows))
    emit(f"is_perfect: {str(report.is_perfect).lower()}")
    return 0


def _emit_image(cfg: AnalysisConfig, image, file_prefix: str) -> None:
    report = image_report(image)
    for name, matrix in zip(image.graph.relation_names, image.graph.matrices):
        write_matrix_csv(cfg, f"{file_prefix}_{name}.csv", matrix)
    write_json(cfg, f"{file_prefix}.json", report)
    for artifact in report.matrices:
        delta = report.deltas.get(artifact.name)
        heading = f"{artifact.name} (delta {delta})" if delta else artifact.name
        emit(f"{heading}:\n" + "\n".join(" ".join(row) for row in artifact.rows))
    if report.zero_relations:
        emit(f"zero relations (image set to zero): {', '.join(report.zero_relations)}")


def image_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    image = image_blockmodel(graph, cfg.load_partition(args.partition, graph), delta=args.delta)
    _emit_image(cfg, image, "image")
    return 0


def leanfit_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    image = lean_fit_blockmodel(graph, cfg.load_partition(args.partition, graph))
    _emit_image(cfg, image, "leanfit")
    return 0


def report_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    graph = cfg.load()
    partition: Optional[Partition] = None
    method = "file"
    if args.partition is not None:
        partition = cfg.load_partition(args.partition, graph)
    elif args.exact:
        partition, method = structural_partition(graph), "structural"
    elif cfg.fixture is not None and get_fixture(cfg.fixture).partitions:
        partition = cfg.load_partition(get_fixture(cfg.fixture).partitions[0], graph)
    hierarchy = cfg.load_hierarchy(args.hierarchy, graph) if args.hierarchy else None
    policy = RoundingPolicy.parse(args.round, args.rule) if args.round is not None else RoundingPolicy.per_step(rule=args.rule)

    report = run_pipeline(
        graph,
        partition=partition,
        hierarchy=hierarchy,
        k=args.k,
        policy=policy,
        delta=args.delta,
        max_elements=cfg.cap,
        threads=cfg.threads,
        partition_method=method,
    )
    write_json(cfg, "report.json", report)
    emit("\n\n".join(report_text(report)))
    if report.functoriality is not None and not report.functoriality.passed:
        return 2
    return 0


def fixtures_command(args: argparse.Namespace, cfg: AnalysisConfig) -> int:
    if args.name is None:
        for fixture in list_fixtures():
            emit(f"{fixture.name}: {fixture.description}")
        return 0
    fixture = get_fixture(args.name)
    graph = load_graph(fixture.manifest)
    info = FixtureInfo(
        name=fixture.name,
        description=fixture.description,
        manifest=str(fixture.manifest),
        nodes=graph.n,
        relations=list(graph.relation_names),
        partitions=fixture.partitions,
    )
    emit(info.model_dump_json(indent=2))
    return 0
