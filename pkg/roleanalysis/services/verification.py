"""Semigroup homomorphisms induced by perfect blockmodels, and functoriality over hierarchies."""

from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from roleanalysis.exceptions import HomomorphismViolation, InputValidationError, NotPerfectError
from roleanalysis.graph.models import AnyGraph, MultirelationalGraph, NestedHierarchy, Partition, format_entry
from roleanalysis.schemas.reports import FunctorialityReport, HomomorphismReport, PairCheck, TripleCheck
from roleanalysis.services.blockmodel import density_blockmodel, induced_partition
from roleanalysis.services.semigroup import Semigroup, SemigroupHom, semigroup_of

logger = structlog.get_logger()


def _boolean(graph: AnyGraph) -> MultirelationalGraph:
    if not graph.weighted:
        return graph
    if not graph.is_boolean_valued():
        raise InputValidationError("semigroup homomorphisms need a Boolean graph", module="semigroup")
    return graph.to_boolean()


def _reduce(graph: MultirelationalGraph, partition: Partition, level: Optional[int] = None) -> MultirelationalGraph:
    blockmodel, _ = density_blockmodel(graph, partition)
    if not blockmodel.is_perfect:
        name, i, j, value = blockmodel.imperfect_entries()[0]
        context = {
            "relation": name,
            "block_pair": f"{blockmodel.graph.node_labels[i]},{blockmodel.graph.node_labels[j]}",
            "density": format_entry(value),
        }
        if level is not None:
            context = {"level": level, **context}
        message = "blockmodel is not perfect" if level is None else f"level {level} blockmodel is not perfect"
        raise NotPerfectError(message, context, module="semigroup")
    return blockmodel.to_boolean_graph()


def induced_hom(
    graph: AnyGraph,
    partition: Partition,
    max_elements: Optional[int] = None,
    threads: Optional[int] = None,
) -> SemigroupHom:
    """SG(G) -> SG(G/P) for a perfect blockmodel, checked on every table cell."""
    graph = _boolean(graph)
    reduced = _reduce(graph, partition)
    source = semigroup_of(graph, max_elements=max_elements, threads=threads)
    target = semigroup_of(reduced, max_elements=max_elements, threads=threads)
    hom = SemigroupHom.by_words(source, target)
    violations = hom.violations()
    if violations:
        x, y = violations[0]
        raise HomomorphismViolation(
            "induced map is not a homomorphism",
            {"violations": len(violations), "first": (source.label(x), source.label(y))},
        )
    logger.info(
        "Induced homomorphism verified",
        source_elements=source.size,
        target_elements=target.size,
        surjective=hom.is_surjective(),
    )
    return hom


def homomorphism_report(hom: SemigroupHom) -> HomomorphismReport:
    violations = hom.violations()
    return HomomorphismReport(
        source_elements=hom.source.size,
        target_elements=hom.target.size,
        mapping={hom.source.label(x): hom.target.label(hom(x)) for x in range(hom.source.size)},
        surjective=hom.is_surjective(),
        violations=[list(pair) for pair in violations[:20]],
        passed=not violations,
    )


def level_graphs(graph: AnyGraph, hierarchy: NestedHierarchy) -> List[MultirelationalGraph]:
    """G_0 = G and G_j = G_{j-1} reduced by level j; refuses at the first imperfect level."""
    graph = _boolean(graph)
    if hierarchy.n != graph.n:
        raise InputValidationError(f"hierarchy covers {hierarchy.n} nodes, graph has {graph.n}")
    graphs = [graph]
    for level in range(1, hierarchy.depth + 1):
        step = induced_partition(hierarchy.partition(level - 1), hierarchy.partition(level))
        graphs.append(_reduce(graphs[-1], step, level=level))
    return graphs


def _quotient_consistent(graphs: List[MultirelationalGraph], hierarchy: NestedHierarchy, i: int, j: int) -> bool:
    partition = induced_partition(hierarchy.partition(i), hierarchy.partition(j))
    blockmodel, _ = density_blockmodel(graphs[i], partition)
    if not blockmodel.is_perfect:
        return False
    expected = graphs[j]
    return all(
        np.array_equal(density == 1, matrix)
        for density, matrix in zip(blockmodel.graph.matrices, expected.matrices)
    )


def check_functoriality(
    graph: AnyGraph,
    hierarchy: NestedHierarchy,
    max_elements: Optional[int] = None,
    threads: Optional[int] = None,
) -> FunctorialityReport:
    """SG(pi_ij) = SG(pi_kj) o SG(pi_ik) for every i < k < j, elementwise."""
    graphs = level_graphs(graph, hierarchy)
    semigroups: List[Semigroup] = [semigroup_of(g, max_elements=max_elements, threads=threads) for g in graphs]

    homs: Dict[Tuple[int, int], SemigroupHom] = {}
    pairs: List[PairCheck] = []
    for i, j in hierarchy.quotient_pairs():
        hom = SemigroupHom.by_words(semigroups[i], semigroups[j])
        homs[(i, j)] = hom
        pairs.append(
            PairCheck(
                i=i,
                j=j,
                homomorphism=not hom.violations(),
                surjective=hom.is_surjective(),
                quotient_consistent=_quotient_consistent(graphs, hierarchy, i, j),
            )
        )

    triples: List[TripleCheck] = []
    depth = hierarchy.depth
    for i in range(depth + 1):
        for k in range(i + 1, depth + 1):
            for j in range(k + 1, depth + 1):
                direct = homs[(i, j)]
                composite = homs[(i, k)].then(homs[(k, j)])
                mismatches = [x for x in range(semigroups[i].size) if direct(x) != composite(x)]
                triples.append(TripleCheck(i=i, k=k, j=j, passed=not mismatches, mismatches=mismatches[:20]))

    passed = all(p.homomorphism and p.quotient_consistent for p in pairs) and all(t.passed for t in triples)
    report = FunctorialityReport(
        levels=depth,
        level_sizes=[g.n for g in graphs],
        semigroup_sizes=[s.size for s in semigroups],
        pairs=pairs,
        triples=triples,
        passed=passed,
    )
    logger.info("Functoriality checked", levels=depth, triples=len(triples), passed=passed)
    return report
