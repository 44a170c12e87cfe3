"""Breadth-first closure of a generator set under right multiplication by generators.

Shared by the Boolean and the truncated semigroup engines. Words are tuples of generator
positions. Elements are discovered by increasing word length and, within one length, in
lexicographic word order, so each element's stored word is its lex-least shortest word.
Products of a frontier may be evaluated on a thread pool; insertion is always serial.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from roleanalysis.exceptions import ClosureCapExceeded, DimensionMismatchError, InputValidationError
from roleanalysis.graph.models import Matrix, Word
from roleanalysis.services.matrices import matrix_key

logger = structlog.get_logger()

Product = Callable[[Matrix, Matrix], Matrix]


@dataclass
class ClosureResult:
    matrices: List[Matrix]
    words: List[Word]
    parents: List[int]
    last_generators: List[int]
    generator_indices: Tuple[int, ...]
    trials: List[Tuple[Word, int]] = field(default_factory=list)
    truncated: bool = False
    index: Dict[Hashable, int] = field(default_factory=dict)

    def lookup(self, matrix: Matrix) -> Optional[int]:
        return self.index.get(matrix_key(matrix))

    @property
    def lengths(self) -> List[int]:
        return [len(word) for word in self.words]

    @property
    def max_length(self) -> int:
        return max(self.lengths)


def _map(func: Callable, tasks: Sequence, threads: int) -> List:
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, tasks))
    return [func(task) for task in tasks]


def breadth_first_closure(
    generators: Sequence[Matrix],
    product: Product,
    cap: int,
    max_length: Optional[int] = None,
    threads: int = 1,
) -> ClosureResult:
    """Close ``generators`` under ``product``, stopping at ``max_length`` when given.

    ``generators`` must already be in their final form (rounded if a rounding policy applies),
    ``product`` must return matrices in the same form.
    """
    if not generators:
        raise InputValidationError("at least one generator is required", module="semigroup")
    shape = generators[0].shape
    for position, matrix in enumerate(generators):
        if matrix.shape != shape or matrix.ndim != 2 or shape[0] != shape[1]:
            raise DimensionMismatchError(
                f"generator {position} has shape {matrix.shape}, expected square {shape}"
            )

    matrices: List[Matrix] = []
    words: List[Word] = []
    parents: List[int] = []
    last_generators: List[int] = []
    index: Dict[Hashable, int] = {}
    trials: List[Tuple[Word, int]] = []

    def insert(matrix: Matrix, word: Word, parent: int) -> Tuple[int, bool]:
        key = matrix_key(matrix)
        found = index.get(key)
        if found is not None:
            return found, False
        index[key] = len(matrices)
        matrices.append(matrix)
        words.append(word)
        parents.append(parent)
        last_generators.append(word[-1])
        if len(matrices) > cap:
            raise ClosureCapExceeded(len(matrices), len(word), cap)
        return len(matrices) - 1, True

    generator_indices = []
    frontier: List[int] = []
    for position, matrix in enumerate(generators):
        element, new = insert(matrix, (position,), -1)
        generator_indices.append(element)
        trials.append(((position,), element))
        if new:
            frontier.append(element)

    length = 1
    while frontier and (max_length is None or length < max_length):
        tasks = [(element, position) for element in frontier for position in range(len(generators))]
        products = _map(lambda task: product(matrices[task[0]], generators[task[1]]), tasks, threads)
        next_frontier = []
        for (element, position), matrix in zip(tasks, products):
            word = words[element] + (position,)
            found, new = insert(matrix, word, element)
            trials.append((word, found))
            if new:
                next_frontier.append(found)
        length += 1
        logger.debug("Closure level explored", length=length, new_elements=len(next_frontier), total=len(matrices))
        frontier = next_frontier

    truncated = bool(frontier)
    logger.info(
        "Closure complete",
        elements=len(matrices),
        generators=len(generators),
        max_word_length=max(len(word) for word in words),
        truncated=truncated,
        threads=threads,
    )
    return ClosureResult(
        matrices=matrices,
        words=words,
        parents=parents,
        last_generators=last_generators,
        generator_indices=tuple(generator_indices),
        trials=trials,
        truncated=truncated,
        index=index,
    )


def right_multiplication_table(
    result: ClosureResult,
    step: Callable[[int, int], int],
    limit: Optional[int] = None,
    sink: Optional[int] = None,
) -> np.ndarray:
    """Products x * y of closure elements, filled from x * parent(y) and the last generator of y.

    ``step(element, position)`` returns the index of element * generator[position]. When
    ``limit`` is set, products whose word lengths sum past it are sent to ``sink``.
    """
    count = len(result.matrices)
    lengths = result.lengths
    table = np.zeros((count, count), dtype=np.int64)
    for x in range(count):
        for y in range(count):
            if limit is not None and lengths[x] + lengths[y] > limit:
                table[x, y] = sink
                continue
            parent = result.parents[y]
            left = x if parent < 0 else int(table[x, parent])
            table[x, y] = step(left, result.last_generators[y])
    return table
