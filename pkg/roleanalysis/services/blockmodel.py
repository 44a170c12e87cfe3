"""Permuted, density and image matrices for a node partition, and quotient maps."""

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from roleanalysis.exceptions import InputValidationError, NotPerfectError, PartitionError
from roleanalysis.graph.models import (
    AnyGraph,
    Matrix,
    MultirelationalGraph,
    Partition,
    WeightedMultirelationalGraph,
    format_entry,
    is_boolean_valued,
)

logger = structlog.get_logger()

Delta = Union[Fraction, int, float, str]


class QuotientMap(BaseModel):
    """Surjective map sending node (or block) i of the source to block assignment[i] of the target."""

    model_config = ConfigDict(frozen=True)

    source_size: int
    target_size: int
    assignment: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_surjective(self) -> "QuotientMap":
        if len(self.assignment) != self.source_size:
            raise ValueError(f"assignment has {len(self.assignment)} entries, expected {self.source_size}")
        if set(self.assignment) != set(range(self.target_size)):
            raise ValueError("quotient map must be surjective onto 0..target_size-1")
        return self

    @classmethod
    def from_partition(cls, partition: Partition) -> "QuotientMap":
        return cls(source_size=partition.n, target_size=partition.num_blocks, assignment=partition.assignment)

    def __call__(self, i: int) -> int:
        return self.assignment[i]

    def then(self, other: "QuotientMap") -> "QuotientMap":
        return compose_quotients(self, other)


class DensityBlockmodel(BaseModel):
    """Density matrices of a graph over the blocks of a partition."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    partition: Partition
    graph: WeightedMultirelationalGraph
    source_labels: Tuple[str, ...]
    is_perfect: bool
    weighted_input: bool = False

    @property
    def block_sizes(self) -> Tuple[int, ...]:
        return tuple(len(block) for block in self.partition.blocks)

    def imperfect_entries(self) -> List[Tuple[str, int, int, Fraction]]:
        """(relation, row block, column block, density) for every entry strictly between 0 and 1."""
        entries = []
        for name, matrix in zip(self.graph.relation_names, self.graph.matrices):
            for (i, j), value in np.ndenumerate(matrix):
                if 0 < value < 1:
                    entries.append((name, i, j, value))
        return entries

    def to_boolean_graph(self) -> MultirelationalGraph:
        """The reduced graph of a perfect blockmodel."""
        if not self.is_perfect:
            name, i, j, value = self.imperfect_entries()[0]
            raise NotPerfectError(
                "blockmodel is not perfect",
                {
                    "relation": name,
                    "block_pair": (self.graph.node_labels[i], self.graph.node_labels[j]),
                    "density": format_entry(value),
                },
                module="blockmodel",
            )
        return self.graph.to_boolean()


class ImageBlockmodel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    density: DensityBlockmodel
    graph: MultirelationalGraph
    criterion: str
    deltas: Tuple[Optional[Fraction], ...] = ()
    zero_relations: Tuple[str, ...] = ()


def _check_partition(size: int, partition: Partition) -> None:
    if partition.n != size:
        raise PartitionError(f"partition covers {partition.n} nodes, matrix has {size}", module="blockmodel")


def _block_order(partition: Partition) -> List[int]:
    return [node for block in partition.blocks for node in block]


def permuted_matrix(a: Matrix, partition: Partition) -> Matrix:
    """Rows and columns reordered block by block, ascending node index inside a block."""
    a = np.asarray(a)
    _check_partition(a.shape[0], partition)
    order = _block_order(partition)
    return a[np.ix_(order, order)]


def density_matrix(a: Matrix, partition: Partition) -> Matrix:
    """Fraction of ones in each block; weighted input sums the entries instead."""
    a = np.asarray(a)
    _check_partition(a.shape[0], partition)
    blocks = partition.blocks
    m = len(blocks)
    out = np.empty((m, m), dtype=object)
    for i, rows in enumerate(blocks):
        for j, cols in enumerate(blocks):
            sub = a[np.ix_(rows, cols)]
            total = Fraction(int(sub.sum())) if sub.dtype == bool else sum(sub.flat, Fraction(0))
            out[i, j] = Fraction(total) / (len(rows) * len(cols))
    return out


def density_blockmodel(graph: AnyGraph, partition: Partition) -> Tuple[DensityBlockmodel, QuotientMap]:
    _check_partition(graph.n, partition)
    if graph.weighted:
        logger.warning("Density of weighted input uses summed weights", relations=list(graph.relation_names))
    densities = {name: density_matrix(matrix, partition) for name, matrix in zip(graph.relation_names, graph.matrices)}
    quotient = WeightedMultirelationalGraph.from_matrices(partition.block_labels, densities)
    is_perfect = all(is_boolean_valued(matrix) for matrix in densities.values())
    blockmodel = DensityBlockmodel(
        partition=partition,
        graph=quotient,
        source_labels=graph.node_labels,
        is_perfect=is_perfect,
        weighted_input=graph.weighted,
    )
    logger.info("Density blockmodel built", blocks=partition.num_blocks, is_perfect=is_perfect)
    return blockmodel, QuotientMap.from_partition(partition)


def default_delta(a: Matrix) -> Fraction:
    """Share of ones in the whole matrix (sum of entries for weighted input)."""
    a = np.asarray(a)
    total = Fraction(int(a.sum())) if a.dtype == bool else sum(a.flat, Fraction(0))
    delta = Fraction(total) / (a.shape[0] * a.shape[1])
    if delta == 0:
        logger.warning("Default delta of a zero matrix is 0")
    return delta


def as_delta(value: Delta) -> Fraction:
    if isinstance(value, float):
        value = repr(value)
    try:
        delta = Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise InputValidationError(f"invalid delta {value!r}", module="blockmodel") from None
    return delta


def image_matrix(d: Matrix, delta: Delta) -> Matrix:
    """1 exactly where the density reaches delta."""
    delta = as_delta(delta)
    if not 0 < delta <= 1:
        raise InputValidationError(f"delta must lie in (0, 1], got {format_entry(delta)}", module="blockmodel")
    d = np.asarray(d)
    if d.dtype == bool:
        return d.copy()
    return np.vectorize(lambda value: value >= delta, otypes=[bool])(d)


def lean_fit(d: Matrix) -> Matrix:
    d = np.asarray(d)
    if d.dtype == bool:
        return d.copy()
    return np.vectorize(lambda value: value > 0, otypes=[bool])(d)


def image_blockmodel(graph: AnyGraph, partition: Partition, delta: Union[str, Delta] = "auto") -> ImageBlockmodel:
    """Alpha-density image of every relation; ``auto`` uses each relation's own default delta."""
    blockmodel, _ = density_blockmodel(graph, partition)
    images: Dict[str, Matrix] = {}
    deltas: List[Optional[Fraction]] = []
    zero_relations: List[str] = []
    for name, matrix, density in zip(graph.relation_names, graph.matrices, blockmodel.graph.matrices):
        threshold = default_delta(matrix) if delta == "auto" else as_delta(delta)
        if threshold == 0:
            zero_relations.append(name)
            deltas.append(None)
            images[name] = np.zeros(density.shape, dtype=bool)
            continue
        deltas.append(threshold)
        images[name] = image_matrix(density, threshold)
    image = MultirelationalGraph.from_matrices(partition.block_labels, images)
    logger.info(
        "Image blockmodel built",
        deltas=[format_entry(value) if value is not None else None for value in deltas],
        zero_relations=zero_relations,
    )
    return ImageBlockmodel(
        density=blockmodel,
        graph=image,
        criterion="alpha",
        deltas=tuple(deltas),
        zero_relations=tuple(zero_relations),
    )


def lean_fit_blockmodel(graph: AnyGraph, partition: Partition) -> ImageBlockmodel:
    blockmodel, _ = density_blockmodel(graph, partition)
    images = {name: lean_fit(density) for name, density in zip(graph.relation_names, blockmodel.graph.matrices)}
    image = MultirelationalGraph.from_matrices(partition.block_labels, images)
    return ImageBlockmodel(density=blockmodel, graph=image, criterion="lean_fit")


def refine_check(fine: Partition, coarse: Partition) -> bool:
    """True iff every block of ``fine`` lies inside one block of ``coarse``."""
    return fine.refines(coarse)


def compose_quotients(q1: QuotientMap, q2: QuotientMap) -> QuotientMap:
    """q2 after q1."""
    if q1.target_size != q2.source_size:
        raise PartitionError(
            f"cannot compose: first map has {q1.target_size} targets, second has {q2.source_size} sources",
            module="blockmodel",
        )
    return QuotientMap(
        source_size=q1.source_size,
        target_size=q2.target_size,
        assignment=tuple(q2.assignment[block] for block in q1.assignment),
    )


def induced_partition(fine: Partition, coarse: Partition) -> Partition:
    """The coarse partition seen as a partition of the fine blocks.

    Blocks of both are numbered by minimum member, so the induced assignment is already canonical.
    """
    if not fine.refines(coarse):
        raise PartitionError("fine partition does not refine the coarse one", module="blockmodel")
    return Partition(
        assignment=tuple(coarse.block_of(block[0]) for block in fine.blocks),
        labels=coarse.labels,
    )


def blow_up(template: AnyGraph, block_sizes: Sequence[int]) -> Tuple[AnyGraph, Partition]:
    """Duplicate template node i into block_sizes[i] nodes with identical ties.

    The returned partition groups the copies; its density blockmodel reproduces the template.
    """
    if len(block_sizes) != template.n:
        raise InputValidationError(
            f"need {template.n} block sizes, got {len(block_sizes)}", module="blockmodel"
        )
    if any(size < 1 for size in block_sizes):
        raise InputValidationError("block sizes must be positive", module="blockmodel")

    assignment = [block for block, size in enumerate(block_sizes) for _ in range(size)]
    labels = []
    for label, size in zip(template.node_labels, block_sizes):
        labels.extend([label] if size == 1 else [f"{label}.{copy + 1}" for copy in range(size)])
    matrices = {
        name: matrix[np.ix_(assignment, assignment)] for name, matrix in zip(template.relation_names, template.matrices)
    }
    graph = type(template).from_matrices(labels, matrices)
    partition = Partition(assignment=tuple(assignment), labels=template.node_labels)
    return graph, partition

