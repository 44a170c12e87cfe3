"""Domain types for multirelational graphs, partitions and nested hierarchies.

Boolean relation matrices are numpy ``bool`` arrays. Weighted matrices are numpy
object arrays of ``fractions.Fraction`` so that entries read from decimal text stay
exact. All arrays held by these models are made read-only.
"""

from fractions import Fraction
from typing import Any, ClassVar, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from roleanalysis.exceptions import HierarchyError, InputValidationError, PartitionError

Matrix = np.ndarray
Word = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------

def parse_entry(text: str) -> Fraction:
    """Parse decimal (``0.25``) or rational (``1/3``) text exactly."""
    return Fraction(text.strip())


def format_entry(value: Union[Fraction, int, bool]) -> str:
    """Exact text for a matrix entry: a finite decimal when possible, ``p/q`` otherwise."""
    value = Fraction(int(value)) if isinstance(value, (bool, np.bool_)) else Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = value.numerator * 10**digits // value.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def as_fraction_matrix(matrix: Matrix) -> Matrix:
    """Object array of Fractions with the same values."""
    array = np.asarray(matrix)
    out = np.empty(array.shape, dtype=object)
    for index, value in np.ndenumerate(array):
        if isinstance(value, (bool, np.bool_, np.integer)):
            out[index] = Fraction(int(value))
        elif isinstance(value, float):
            out[index] = Fraction(repr(value))
        else:
            out[index] = Fraction(value)
    return out


def is_boolean_valued(matrix: Matrix) -> bool:
    array = np.asarray(matrix)
    if array.dtype == bool:
        return True
    return all(value == 0 or value == 1 for value in array.flat)


def to_boolean(matrix: Matrix) -> Matrix:
    """Boolean array of a 0/1-valued matrix."""
    array = np.asarray(matrix)
    if array.dtype == bool:
        return array.copy()
    if not is_boolean_valued(array):
        raise ValueError("matrix has entries strictly between 0 and 1")
    return np.array([[value == 1 for value in row] for row in array], dtype=bool).reshape(array.shape)


def matrix_to_text(matrix: Matrix) -> List[List[str]]:
    """Nested lists of exact entry strings, for JSON artifacts."""
    array = np.asarray(matrix)
    if array.dtype == bool:
        return [["1" if value else "0" for value in row] for row in array]
    return [[format_entry(value) for value in row] for row in array]


def _frozen(array: Matrix) -> Matrix:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

class Relation(BaseModel):
    """A named relation matrix."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    matrix: Matrix

    @field_validator("name")
    @classmethod
    def _name_not_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("relation name must not be empty")
        return value

    @field_validator("matrix", mode="before")
    @classmethod
    def _square(cls, value: Matrix) -> Matrix:
        value = np.asarray(value)
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise ValueError(f"relation matrix must be square, got shape {value.shape}")
        return _frozen(value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.matrix, other.matrix)

    __hash__ = None  # type: ignore[assignment]


class MultirelationalGraph(BaseModel):
    """Node labels plus r Boolean relation matrices in node order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    node_labels: Tuple[str, ...]
    relations: Tuple[Relation, ...]

    weighted: ClassVar[bool] = False

    @model_validator(mode="after")
    def _check_shape(self) -> "MultirelationalGraph":
        n = len(self.node_labels)
        if n == 0:
            raise ValueError("graph needs at least one node")
        if len(set(self.node_labels)) != n:
            raise ValueError("node labels must be unique")
        if not self.relations:
            raise ValueError("graph needs at least one relation")
        names = [relation.name for relation in self.relations]
        if len(set(names)) != len(names):
            raise ValueError(f"relation names must be unique, got {names}")
        for relation in self.relations:
            if relation.matrix.shape != (n, n):
                raise ValueError(
                    f"relation {relation.name!r} has shape {relation.matrix.shape}, expected {(n, n)}"
                )
            self._check_entries(relation)
        return self

    def _check_entries(self, relation: Relation) -> None:
        if relation.matrix.dtype != bool:
            raise ValueError(f"relation {relation.name!r} must be a Boolean matrix")

    @classmethod
    def from_matrices(
        cls, node_labels: Sequence[str], matrices: Dict[str, Matrix]
    ) -> "MultirelationalGraph":
        relations = tuple(Relation(name=name, matrix=np.asarray(m, dtype=bool)) for name, m in matrices.items())
        return cls(node_labels=tuple(node_labels), relations=relations)

    @property
    def n(self) -> int:
        return len(self.node_labels)

    @property
    def r(self) -> int:
        return len(self.relations)

    @property
    def relation_names(self) -> Tuple[str, ...]:
        return tuple(relation.name for relation in self.relations)

    @property
    def matrices(self) -> Tuple[Matrix, ...]:
        return tuple(relation.matrix for relation in self.relations)

    def matrix(self, name: str) -> Matrix:
        for relation in self.relations:
            if relation.name == name:
                return relation.matrix
        raise InputValidationError(f"unknown relation {name!r}", {"known": list(self.relation_names)})

    def node_index(self, node: Union[int, str]) -> int:
        if isinstance(node, (int, np.integer)) and not isinstance(node, bool):
            if not 0 <= node < self.n:
                raise InputValidationError(f"node index {node} out of range for {self.n} nodes")
            return int(node)
        try:
            return self.node_labels.index(str(node))
        except ValueError:
            raise InputValidationError(f"unknown node label {node!r}") from None

    def select(self, names: Optional[Sequence[str]]) -> "MultirelationalGraph":
        """Same nodes, restricted to the named relations (in the given order)."""
        if names is None:
            return self
        if not names:
            raise ValueError("relation subset must not be empty")
        relations = tuple(Relation(name=name, matrix=self.matrix(name)) for name in names)
        return type(self)(node_labels=self.node_labels, relations=relations)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultirelationalGraph) or type(self) is not type(other):
            return NotImplemented
        return (
            self.node_labels == other.node_labels
            and self.relation_names == other.relation_names
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )

    __hash__ = None  # type: ignore[assignment]


class WeightedMultirelationalGraph(MultirelationalGraph):
    """Same shape as a multirelational graph, entries are Fractions in [0, 1]."""

    weighted: ClassVar[bool] = True

    def _check_entries(self, relation: Relation) -> None:
        if relation.matrix.dtype != object:
            raise ValueError(f"relation {relation.name!r} must hold Fraction entries")
        for value in relation.matrix.flat:
            if not isinstance(value, Fraction) or not 0 <= value <= 1:
                raise ValueError(f"relation {relation.name!r} has entry {value!r} outside [0, 1]")

    @classmethod
    def from_matrices(
        cls, node_labels: Sequence[str], matrices: Dict[str, Matrix]
    ) -> "WeightedMultirelationalGraph":
        relations = tuple(Relation(name=name, matrix=as_fraction_matrix(m)) for name, m in matrices.items())
        return cls(node_labels=tuple(node_labels), relations=relations)

    def is_boolean_valued(self) -> bool:
        return all(is_boolean_valued(m) for m in self.matrices)

    def to_boolean(self) -> MultirelationalGraph:
        return MultirelationalGraph.from_matrices(
            self.node_labels, {name: to_boolean(m) for name, m in zip(self.relation_names, self.matrices)}
        )


AnyGraph = Union[MultirelationalGraph, WeightedMultirelationalGraph]


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------

def canonicalize(assignment: Sequence[Hashable]) -> Tuple[Tuple[int, ...], Tuple[Hashable, ...]]:
    """Relabel block keys 0..m-1 by first appearance, i.e. blocks sorted by minimum member.

    Returns the canonical assignment and the original keys in canonical block order.
    """
    order: Dict[Hashable, int] = {}
    canonical = []
    for key in assignment:
        if key not in order:
            order[key] = len(order)
        canonical.append(order[key])
    return tuple(canonical), tuple(order)


class Partition(BaseModel):
    """Blocks of node indices, numbered by their minimum member."""

    model_config = ConfigDict(frozen=True)

    assignment: Tuple[int, ...]
    labels: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check_canonical(self) -> "Partition":
        if not self.assignment:
            raise ValueError("partition must cover at least one node")
        canonical, _ = canonicalize(self.assignment)
        if canonical != self.assignment:
            raise ValueError("assignment is not canonical; use Partition.from_assignment")
        if self.labels and len(self.labels) != self.num_blocks:
            raise ValueError(f"expected {self.num_blocks} block labels, got {len(self.labels)}")
        if self.labels and len(set(self.labels)) != len(self.labels):
            raise ValueError("block labels must be unique")
        return self

    @classmethod
    def from_assignment(cls, assignment: Sequence[Hashable]) -> "Partition":
        canonical, keys = canonicalize(assignment)
        labels = tuple(keys) if all(isinstance(key, str) for key in keys) else ()
        return cls(assignment=canonical, labels=labels)  # type: ignore[arg-type]

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], n: int) -> "Partition":
        assignment: List[Optional[int]] = [None] * n
        for block_id, block in enumerate(blocks):
            if not block:
                raise PartitionError("blocks must be nonempty")
            for node in block:
                if not 0 <= node < n:
                    raise PartitionError(f"node {node} out of range for {n} nodes")
                if assignment[node] is not None:
                    raise PartitionError(f"node {node} appears in two blocks")
                assignment[node] = block_id
        missing = [i for i, value in enumerate(assignment) if value is None]
        if missing:
            raise PartitionError(f"nodes {missing} are not covered by any block")
        return cls.from_assignment(assignment)  # type: ignore[arg-type]

    @classmethod
    def singleton(cls, n: int) -> "Partition":
        return cls(assignment=tuple(range(n)))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls(assignment=(0,) * n)

    def canonical(self) -> "Partition":
        return self

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def num_blocks(self) -> int:
        return max(self.assignment) + 1

    @property
    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        members: List[List[int]] = [[] for _ in range(self.num_blocks)]
        for node, block in enumerate(self.assignment):
            members[block].append(node)
        return tuple(tuple(block) for block in members)

    @property
    def block_labels(self) -> Tuple[str, ...]:
        return self.labels or tuple(f"B{k + 1}" for k in range(self.num_blocks))

    def block_of(self, node: int) -> int:
        return self.assignment[node]

    def refines(self, coarse: "Partition") -> bool:
        """True iff every block of self lies inside one block of ``coarse``."""
        if coarse.n != self.n:
            raise PartitionError(f"partitions cover {self.n} and {coarse.n} nodes")
        target: Dict[int, int] = {}
        for fine_block, coarse_block in zip(self.assignment, coarse.assignment):
            if target.setdefault(fine_block, coarse_block) != coarse_block:
                return False
        return True

    def is_singleton(self) -> bool:
        return self.num_blocks == self.n

    def describe(self, node_labels: Optional[Sequence[str]] = None) -> List[List[str]]:
        names = node_labels or [str(i) for i in range(self.n)]
        return [[names[i] for i in block] for block in self.blocks]


# ---------------------------------------------------------------------------
# Nested hierarchies
# ---------------------------------------------------------------------------

def find_nesting_violation(fine: Partition, coarse: Partition) -> Optional[Tuple[int, Tuple[int, ...]]]:
    """First fine block split across coarse blocks, with the coarse blocks it touches."""
    for block_id, block in enumerate(fine.blocks):
        touched = tuple(sorted({coarse.block_of(node) for node in block}))
        if len(touched) > 1:
            return block_id, touched
    return None


class NestedHierarchy(BaseModel):
    """Partitions P_1..P_p of one base node set, each coarsening the previous.

    Level 0 is the implicit singleton partition.
    """

    model_config = ConfigDict(frozen=True)

    levels: Tuple[Partition, ...]

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            # HierarchyError is a ValueError, so pydantic wraps it
            for error in e.errors():
                cause = error.get("ctx", {}).get("error")
                if isinstance(cause, HierarchyError):
                    raise cause from None
            raise

    @model_validator(mode="after")
    def _check_nesting(self) -> "NestedHierarchy":
        check_nesting(self.levels)
        return self

    @property
    def n(self) -> int:
        return self.levels[0].n

    @property
    def depth(self) -> int:
        return len(self.levels)

    def partition(self, level: int) -> Partition:
        if level == 0:
            return Partition.singleton(self.n)
        return self.levels[level - 1]

    def quotient_assignment(self, i: int, j: int) -> Tuple[int, ...]:
        """Map from the blocks of level i to the blocks of level j (i <= j)."""
        if not 0 <= i <= j <= self.depth:
            raise InputValidationError(f"need 0 <= i <= j <= {self.depth}, got i={i}, j={j}")
        fine, coarse = self.partition(i), self.partition(j)
        return tuple(coarse.block_of(block[0]) for block in fine.blocks)

    def quotient_pairs(self) -> Iterator[Tuple[int, int]]:
        """All (i, j) with i < j: p(p+1)/2 pairs."""
        for j in range(1, self.depth + 1):
            for i in range(j):
                yield i, j


def check_nesting(levels: Sequence[Partition]) -> None:
    if not levels:
        raise HierarchyError("hierarchy needs at least one level")
    n = levels[0].n
    for index, level in enumerate(levels, start=1):
        if level.n != n:
            raise HierarchyError(
                f"level {index} covers {level.n} nodes, expected {n}", {"level": index}
            )
    for index in range(len(levels) - 1):
        violation = find_nesting_violation(levels[index], levels[index + 1])
        if violation is not None:
            block_id, touched = violation
            fine = levels[index]
            raise HierarchyError(
                f"block {fine.block_labels[block_id]} of level {index + 1} is split across "
                f"{len(touched)} blocks of level {index + 2}",
                {
                    "level": index + 1,
                    "block": fine.block_labels[block_id],
                    "members": list(fine.blocks[block_id]),
                    "coarse_blocks": [levels[index + 1].block_labels[b] for b in touched],
                },
            )
