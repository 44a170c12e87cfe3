"""Boolean semigroups of relations: closure, multiplication table and compound relations.

The product x * y is the matrix product x @ y. A word (g1, g2, ..., gl) denotes
G[g1] @ G[g2] @ ... @ G[gl], i.e. relations listed in the order they are traversed.
"""

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from roleanalysis.config import config
from roleanalysis.exceptions import HomomorphismViolation, InputValidationError
from roleanalysis.graph.models import AnyGraph, Matrix, MultirelationalGraph, Word, matrix_to_text, to_boolean
from roleanalysis.schemas.reports import (
    AssociativityReport,
    ElementCounts,
    ElementEntry,
    MultiplicationTable,
    SemigroupReport,
)
from roleanalysis.services.closure import ClosureResult, breadth_first_closure, right_multiplication_table
from roleanalysis.services.matrices import bool_product, is_zero

logger = structlog.get_logger()

ZERO_LABEL = "0"


def word_label(word: Sequence[int], names: Sequence[str]) -> str:
    """Concatenated relation names; dot-separated once any name is longer than one character."""
    separator = "." if any(len(name) > 1 for name in names) else ""
    return separator.join(names[position] for position in word)


def default_names(count: int) -> Tuple[str, ...]:
    return tuple(f"A{i + 1}" for i in range(count))


@dataclass(frozen=True, eq=False)
class Semigroup:
    """A finite set of distinct matrices closed under the product, in discovery order."""

    elements: Tuple[Matrix, ...]
    words: Tuple[Word, ...]
    generators: Tuple[Matrix, ...]
    generator_names: Tuple[str, ...]
    generator_indices: Tuple[int, ...]
    zero_index: Optional[int]
    closure: ClosureResult = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.size

    @property
    def lengths(self) -> Tuple[int, ...]:
        return tuple(len(word) for word in self.words)

    @cached_property
    def table(self) -> np.ndarray:
        def step(element: int, position: int) -> int:
            found = self.closure.lookup(bool_product(self.elements[element], self.generators[position]))
            if found is None:
                raise HomomorphismViolation(
                    "product left the closure", {"element": element, "generator": position}, module="semigroup"
                )
            return found

        return right_multiplication_table(self.closure, step)

    def product(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def label(self, index: int) -> str:
        if index == self.zero_index:
            return ZERO_LABEL
        return word_label(self.words[index], self.generator_names)

    @property
    def labels(self) -> List[str]:
        return [self.label(index) for index in range(self.size)]

    def parse_word(self, word: Sequence[Union[int, str]]) -> Word:
        positions = []
        for letter in word:
            if isinstance(letter, str):
                if letter not in self.generator_names:
                    raise InputValidationError(
                        f"unknown relation {letter!r}", {"known": list(self.generator_names)}, module="semigroup"
                    )
                positions.append(self.generator_names.index(letter))
            else:
                positions.append(int(letter))
        if not positions:
            raise InputValidationError("words have length >= 1", module="semigroup")
        return tuple(positions)

    def evaluate(self, word: Sequence[Union[int, str]]) -> Matrix:
        """Matrix of a word, multiplied left to right."""
        positions = self.parse_word(word)
        result = self.generators[positions[0]]
        for position in positions[1:]:
            result = bool_product(result, self.generators[position])
        return result

    def index_of(self, matrix: Matrix) -> Optional[int]:
        return self.closure.lookup(np.asarray(matrix, dtype=bool))

    def element_of_word(self, word: Sequence[Union[int, str]]) -> int:
        """Element index of a word, read off the table without matrix products."""
        positions = self.parse_word(word)
        current = self.generator_indices[positions[0]]
        for position in positions[1:]:
            current = self.product(current, self.generator_indices[position])
        return current

    def census(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.lengths).items()))

    def counts(self) -> ElementCounts:
        generators = set(self.generator_indices)
        has_zero = self.zero_index is not None
        zero_is_generator = has_zero and self.zero_index in generators
        return ElementCounts(
            all=self.size,
            excluding_generators=self.size - len(generators),
            excluding_generators_and_zero=self.size - len(generators) - (1 if has_zero and not zero_is_generator else 0),
            excluding_zero=self.size - (1 if has_zero else 0),
        )

    def word_relations(self) -> List[Tuple[Word, int]]:
        """Words multiplied out during closure that landed on an element with a different word."""
        return [(word, element) for word, element in self.closure.trials if self.words[element] != word]


def generate_semigroup(
    generators: Sequence[Matrix],
    max_elements: Optional[int] = None,
    names: Optional[Sequence[str]] = None,
    threads: Optional[int] = None,
) -> Semigroup:
    """Breadth-first closure of Boolean generators under the Boolean matrix product."""
    cap = config.MAX_ELEMENTS if max_elements is None else max_elements
    threads = config.DEFAULT_THREADS if threads is None else threads
    prepared = tuple(to_boolean(np.asarray(matrix)) for matrix in generators)
    for matrix in prepared:
        matrix.setflags(write=False)
    names = tuple(names) if names is not None else default_names(len(prepared))
    if len(names) != len(prepared):
        raise InputValidationError(f"{len(names)} names for {len(prepared)} generators", module="semigroup")

    closure = breadth_first_closure(prepared, bool_product, cap=cap, threads=threads)
    zero_index = next((i for i, matrix in enumerate(closure.matrices) if is_zero(matrix)), None)
    semigroup = Semigroup(
        elements=tuple(closure.matrices),
        words=tuple(closure.words),
        generators=prepared,
        generator_names=names,
        generator_indices=closure.generator_indices,
        zero_index=zero_index,
        closure=closure,
    )
    logger.info(
        "Semigroup generated",
        elements=semigroup.size,
        generators=list(names),
        zero_present=zero_index is not None,
        max_word_length=max(semigroup.lengths),
    )
    return semigroup


def semigroup_of(graph: AnyGraph, max_elements: Optional[int] = None, threads: Optional[int] = None) -> Semigroup:
    """SG of a graph's relation matrices; weighted graphs must be 0/1-valued."""
    if graph.weighted and not graph.is_boolean_valued():
        raise InputValidationError(
            "Boolean semigroup needs 0/1 matrices; use the truncated semigroup for weighted graphs",
            module="semigroup",
        )
    return generate_semigroup(graph.matrices, max_elements=max_elements, names=graph.relation_names, threads=threads)


def multiplication_table(
    semigroup: Semigroup,
    labels: Optional[Sequence[str]] = None,
    include_zero: bool = False,
) -> MultiplicationTable:
    """Rows and columns labelled by shortest words (or ``labels``); the zero renders as ``0``."""
    names = list(labels) if labels is not None else semigroup.labels
    if len(names) != semigroup.size:
        raise InputValidationError(f"{len(names)} labels for {semigroup.size} elements", module="semigroup")
    if semigroup.zero_index is not None and labels is None:
        names[semigroup.zero_index] = ZERO_LABEL
    shown = [
        index for index in range(semigroup.size) if include_zero or index != semigroup.zero_index
    ]
    cells = [[names[semigroup.product(x, y)] for y in shown] for x in shown]
    return MultiplicationTable(
        labels=[names[index] for index in shown],
        cells=cells,
        zero_label=names[semigroup.zero_index] if semigroup.zero_index is not None else None,
        zero_hidden=semigroup.zero_index is not None and not include_zero,
    )


def check_associativity(
    semigroup: Semigroup,
    limit: Optional[int] = None,
    samples: Optional[int] = None,
    seed: int = 0,
) -> AssociativityReport:
    """(x*y)*z == x*(y*z) on the table; exhaustive up to ``limit`` elements, sampled above."""
    limit = config.ASSOCIATIVITY_LIMIT if limit is None else limit
    samples = config.ASSOCIATIVITY_SAMPLES if samples is None else samples
    table = semigroup.table
    size = semigroup.size
    failures: List[List[int]] = []

    if size <= limit:
        for x in range(size):
            left = table[table[x, :], :]
            right = table[x, table]
            for y, z in zip(*np.nonzero(left != right)):
                failures.append([x, int(y), int(z)])
        checked = size**3
        exhaustive = True
    else:
        rng = np.random.default_rng(seed)
        triples = rng.integers(0, size, size=(samples, 3))
        for x, y, z in triples:
            if table[table[x, y], z] != table[x, table[y, z]]:
                failures.append([int(x), int(y), int(z)])
        checked = samples
        exhaustive = False

    if failures:
        logger.error("Associativity failures", count=len(failures))
    return AssociativityReport(exhaustive=exhaustive, triples_checked=checked, failures=failures[:20], passed=not failures)


def compound_exists(graph: MultirelationalGraph, i: Union[int, str], j: Union[int, str], word: Sequence[str]) -> bool:
    """Is there a compound relation from i to j following ``word`` (relations in traversal order)?"""
    if not word:
        raise InputValidationError("compound relations need a word of length >= 1", module="semigroup")
    source, target = graph.node_index(i), graph.node_index(j)
    matrices = [to_boolean(graph.matrix(name)) for name in word]
    result = matrices[0]
    for matrix in matrices[1:]:
        result = bool_product(result, matrix)
    return bool(result[source, target])


def element_entries(semigroup: Semigroup) -> List[ElementEntry]:
    return [
        ElementEntry(
            index=index,
            label=semigroup.label(index),
            word=[semigroup.generator_names[p] for p in semigroup.words[index]],
            length=len(semigroup.words[index]),
            matrix=matrix_to_text(semigroup.elements[index]),
        )
        for index in range(semigroup.size)
    ]


def semigroup_report(
    semigroup: Semigroup,
    include_table: bool = True,
    include_zero: bool = False,
    check: bool = True,
) -> SemigroupReport:
    return SemigroupReport(
        generators=list(semigroup.generator_names),
        counts=semigroup.counts(),
        zero_index=semigroup.zero_index,
        census={str(length): count for length, count in semigroup.census().items()},
        elements=element_entries(semigroup),
        table=multiplication_table(semigroup, include_zero=include_zero) if include_table else None,
        associativity=check_associativity(semigroup) if check else None,
    )


@dataclass(frozen=True, eq=False)
class SemigroupHom:
    """Element map between two semigroups, source index -> target index."""

    source: Semigroup
    target: Semigroup
    mapping: Tuple[int, ...]

    @classmethod
    def by_words(cls, source: Semigroup, target: Semigroup) -> "SemigroupHom":
        """Send each source element to the target element its word evaluates to."""
        if len(source.generators) != len(target.generators):
            raise InputValidationError(
                f"source has {len(source.generators)} generators, target has {len(target.generators)}",
                module="semigroup",
            )
        mapping = []
        for index, word in enumerate(source.words):
            image = target.index_of(target.evaluate(word))
            if image is None:
                raise HomomorphismViolation(
                    "word has no image in the target semigroup",
                    {"element": source.label(index)},
                    module="semigroup",
                )
            mapping.append(image)
        return cls(source=source, target=target, mapping=tuple(mapping))

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def violations(self) -> List[Tuple[int, int]]:
        """Pairs (x, y) with f(x * y) != f(x) * f(y)."""
        image = np.asarray(self.mapping, dtype=np.int64)
        left = image[self.source.table]
        right = self.target.table[np.ix_(image, image)]
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(left != right))]

    def is_surjective(self) -> bool:
        return set(self.mapping) == set(range(self.target.size))

    def then(self, other: "SemigroupHom") -> "SemigroupHom":
        """``other`` after ``self``."""
        if other.source is not self.target:
            raise InputValidationError("cannot compose: target and source differ", module="semigroup")
        return SemigroupHom(
            source=self.source,
            target=other.target,
            mapping=tuple(other.mapping[image] for image in self.mapping),
        )
