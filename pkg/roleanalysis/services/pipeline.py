"""One-shot analysis of a dataset, composed from the public operations of each service."""

from typing import List, Optional, Sequence

import structlog

from roleanalysis.exceptions import NotPerfectError
from roleanalysis.graph.models import AnyGraph, NestedHierarchy, Partition, format_entry, matrix_to_text
from roleanalysis.schemas.reports import (
    DensityEntry,
    DensityReport,
    GraphSummary,
    ImageReport,
    MatrixArtifact,
    PartitionReport,
    PipelineReport,
)
from roleanalysis.services.blockmodel import DensityBlockmodel, ImageBlockmodel, image_blockmodel
from roleanalysis.services.equivalence import DistanceMatrix
from roleanalysis.services.semigroup import semigroup_of, semigroup_report
from roleanalysis.services.truncated import RoundingPolicy, truncated_of, truncated_report
from roleanalysis.services.verification import check_functoriality, homomorphism_report, induced_hom

logger = structlog.get_logger()


def graph_summary(graph: AnyGraph) -> GraphSummary:
    return GraphSummary(
        nodes=list(graph.node_labels),
        relations=list(graph.relation_names),
        n=graph.n,
        r=graph.r,
        weighted=graph.weighted,
        zero_relations=[name for name, matrix in zip(graph.relation_names, graph.matrices) if not matrix.any()],
    )


def partition_report(
    partition: Partition,
    graph: AnyGraph,
    method: str,
    relations: Optional[Sequence[str]] = None,
    distances: Optional[DistanceMatrix] = None,
) -> PartitionReport:
    labels = partition.block_labels
    return PartitionReport(
        method=method,
        metric=distances.metric.value if distances is not None else None,
        relations=list(relations) if relations is not None else list(graph.relation_names),
        num_blocks=partition.num_blocks,
        blocks=partition.describe(graph.node_labels),
        assignment={node: labels[partition.block_of(i)] for i, node in enumerate(graph.node_labels)},
        zero_profiles=[graph.node_labels[i] for i in distances.zero_profiles] if distances is not None else [],
    )


def density_report(blockmodel: DensityBlockmodel) -> DensityReport:
    labels = blockmodel.graph.node_labels
    return DensityReport(
        block_labels=list(labels),
        blocks=blockmodel.partition.describe(blockmodel.source_labels),
        block_sizes=list(blockmodel.block_sizes),
        is_perfect=blockmodel.is_perfect,
        weighted_input=blockmodel.weighted_input,
        matrices=[
            MatrixArtifact(name=name, rows=matrix_to_text(matrix))
            for name, matrix in zip(blockmodel.graph.relation_names, blockmodel.graph.matrices)
        ],
        imperfect_entries=[
            DensityEntry(relation=name, row_block=labels[i], column_block=labels[j], density=format_entry(value))
            for name, i, j, value in blockmodel.imperfect_entries()
        ],
    )


def image_report(image: ImageBlockmodel) -> ImageReport:
    names = image.graph.relation_names
    return ImageReport(
        criterion=image.criterion,
        block_labels=list(image.graph.node_labels),
        deltas={
            name: (format_entry(delta) if delta is not None else None) for name, delta in zip(names, image.deltas)
        },
        zero_relations=list(image.zero_relations),
        matrices=[MatrixArtifact(name=name, rows=matrix_to_text(matrix)) for name, matrix in zip(names, image.graph.matrices)],
    )


def run_pipeline(
    graph: AnyGraph,
    partition: Optional[Partition] = None,
    hierarchy: Optional[NestedHierarchy] = None,
    k: int = 18,
    policy: Optional[RoundingPolicy] = None,
    delta: str = "auto",
    max_elements: Optional[int] = None,
    threads: Optional[int] = None,
    partition_method: str = "file",
) -> PipelineReport:
    """Semigroups of the input, then density, image and their semigroups for a partition."""
    policy = policy or RoundingPolicy.per_step()
    report = PipelineReport(graph=graph_summary(graph))
    boolean_input = not graph.weighted or graph.is_boolean_valued()

    if boolean_input:
        report.semigroup = semigroup_report(semigroup_of(graph, max_elements=max_elements, threads=threads))
    else:
        truncated = truncated_of(graph, k, policy=policy, cap=max_elements, threads=threads)
        report.truncated = truncated_report(truncated)

    if partition is not None:
        report.partition = partition_report(partition, graph, method=partition_method)
        image = image_blockmodel(graph, partition, delta=delta)
        blockmodel = image.density
        report.density = density_report(blockmodel)
        report.image = image_report(image)
        report.image_semigroup = semigroup_report(semigroup_of(image.graph, max_elements=max_elements, threads=threads))
        density_semigroup = truncated_of(blockmodel.graph, k, policy=policy, cap=max_elements, threads=threads)
        report.density_truncated = truncated_report(density_semigroup)
        if boolean_input:
            try:
                report.homomorphism = homomorphism_report(
                    induced_hom(graph, partition, max_elements=max_elements, threads=threads)
                )
            except NotPerfectError as e:
                logger.info("Induced homomorphism refused", reason=str(e))
                report.homomorphism_refused = str(e)

    if hierarchy is not None and boolean_input:
        report.functoriality = check_functoriality(graph, hierarchy, max_elements=max_elements, threads=threads)

    logger.info(
        "Pipeline complete",
        nodes=graph.n,
        relations=list(graph.relation_names),
        partition=partition.num_blocks if partition is not None else None,
    )
    return report


def report_text(report: PipelineReport) -> List[str]:
    """Human-readable sections of a pipeline report."""
    sections = [f"graph: {report.graph.n} nodes, relations {', '.join(report.graph.relations)}"]
    if report.semigroup is not None and report.semigroup.table is not None:
        sections.append(f"semigroup ({report.semigroup.counts.all} elements):\n{report.semigroup.table.to_text()}")
    if report.density is not None:
        for artifact in report.density.matrices:
            sections.append(f"density {artifact.name}:\n" + "\n".join(" ".join(row) for row in artifact.rows))
    if report.image is not None:
        for artifact in report.image.matrices:
            sections.append(
                f"image {artifact.name} (delta {report.image.deltas.get(artifact.name)}):\n"
                + "\n".join(" ".join(row) for row in artifact.rows)
            )
    if report.truncated is not None:
        counts = report.truncated.counts
        sections.append(
            f"truncated semigroup (k={report.truncated.k}): {counts.all} elements, "
            f"stabilization depth {report.truncated.stabilization_depth}"
        )
    if report.homomorphism is not None:
        sections.append(
            f"induced homomorphism: {report.homomorphism.source_elements} -> {report.homomorphism.target_elements}, "
            f"surjective={report.homomorphism.surjective}"
        )
    if report.homomorphism_refused:
        sections.append(f"induced homomorphism refused: {report.homomorphism_refused}")
    if report.functoriality is not None:
        sections.append(f"functoriality: {'pass' if report.functoriality.passed else 'FAIL'}")
    return sections
