"""k-truncated semigroups of weighted relations under the max-times product.

Every product whose operands' shortest words are together longer than k is sent to the
zero matrix. With per-step rounding each product is rounded before it is compared or
multiplied further, which keeps every entry on the grid of multiples of 10**-digits.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from roleanalysis.config import config
from roleanalysis.exceptions import InputValidationError, VerificationError
from roleanalysis.graph.models import AnyGraph, Matrix, Word, as_fraction_matrix, matrix_to_text
from roleanalysis.schemas.reports import (
    ElementCounts,
    ElementEntry,
    MultiplicationTable,
    ProductGroup,
    RoundingPolicyReport,
    TruncatedReport,
)
from roleanalysis.services.closure import ClosureResult, breadth_first_closure, right_multiplication_table
from roleanalysis.services.matrices import ROUNDING_RULES, is_zero, max_times, round_matrix
from roleanalysis.services.semigroup import ZERO_LABEL, default_names, word_label

logger = structlog.get_logger()

MAX_DIGITS = 12


class RoundingPolicy(BaseModel):
    """How products are rounded: not at all, or to ``digits`` decimals after every product."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["none", "per_step"] = "per_step"
    digits: Optional[int] = None
    rule: str = Field(default_factory=lambda: config.ROUNDING_RULE)

    @model_validator(mode="before")
    @classmethod
    def _default_digits(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("mode", "per_step") == "per_step" and data.get("digits") is None:
            data = {**data, "digits": config.ROUND_DIGITS}
        return data

    @field_validator("rule")
    @classmethod
    def _known_rule(cls, value: str) -> str:
        if value not in ROUNDING_RULES:
            raise ValueError(f"unknown rounding rule {value!r}; expected one of {ROUNDING_RULES}")
        return value

    @model_validator(mode="after")
    def _check_digits(self) -> "RoundingPolicy":
        if self.mode == "per_step" and not 0 <= self.digits <= MAX_DIGITS:
            raise ValueError(f"digits must lie in [0, {MAX_DIGITS}], got {self.digits}")
        if self.mode == "none" and self.digits is not None:
            raise ValueError("digits only apply to per_step rounding")
        return self

    @classmethod
    def none(cls) -> "RoundingPolicy":
        return cls(mode="none")

    @classmethod
    def per_step(cls, digits: Optional[int] = None, rule: Optional[str] = None) -> "RoundingPolicy":
        return cls(mode="per_step", digits=digits, rule=rule or config.ROUNDING_RULE)

    @classmethod
    def parse(cls, text: str, rule: Optional[str] = None) -> "RoundingPolicy":
        """``none`` or a number of digits, as given on the command line."""
        text = str(text).strip().lower()
        if text == "none":
            return cls.none()
        try:
            digits = int(text)
        except ValueError:
            raise InputValidationError(
                f"--round expects none or a digit count, got {text!r}", module="trunc-semigroup"
            ) from None
        if not 0 <= digits <= MAX_DIGITS:
            raise InputValidationError(f"digits must lie in [0, {MAX_DIGITS}], got {digits}", module="trunc-semigroup")
        return cls.per_step(digits, rule)

    def apply(self, matrix: Matrix) -> Matrix:
        if self.mode == "none":
            return matrix
        return round_matrix(matrix, self.digits, self.rule)

    def to_report(self) -> RoundingPolicyReport:
        return RoundingPolicyReport(
            mode=self.mode,
            digits=self.digits,
            rule=self.rule if self.mode == "per_step" else None,
        )


@dataclass(frozen=True, eq=False)
class TruncatedSemigroup:
    """Elements reached by words of length <= k, plus the zero sink when products truncate."""

    k: int
    policy: RoundingPolicy
    elements: Tuple[Matrix, ...]
    words: Tuple[Optional[Word], ...]
    generators: Tuple[Matrix, ...]
    generator_names: Tuple[str, ...]
    generator_indices: Tuple[int, ...]
    zero_index: Optional[int]
    zero_reached: bool
    closure: ClosureResult = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.size

    @property
    def lengths(self) -> Tuple[Optional[int], ...]:
        return tuple(len(word) if word is not None else None for word in self.words)

    @property
    def sink_adjoined(self) -> bool:
        return self.zero_index is not None and not self.zero_reached

    @property
    def truncates(self) -> bool:
        """Some pair of elements has words too long to multiply."""
        return 2 * self.closure.max_length > self.k

    @cached_property
    def table(self) -> np.ndarray:
        def step(element: int, position: int) -> int:
            found = self.closure.lookup(self.policy.apply(max_times(self.elements[element], self.generators[position])))
            if found is None:
                raise VerificationError(
                    "product of a word of length <= k missing from the closure",
                    {"element": element, "generator": position},
                    module="trunc-semigroup",
                )
            return found

        reached = right_multiplication_table(self.closure, step, limit=self.k, sink=self.zero_index)
        if not self.sink_adjoined:
            return reached
        table = np.full((self.size, self.size), self.zero_index, dtype=np.int64)
        table[: reached.shape[0], : reached.shape[1]] = reached
        return table

    def product(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def label(self, index: int) -> str:
        word = self.words[index]
        if index == self.zero_index or word is None:
            return ZERO_LABEL
        return word_label(word, self.generator_names)

    @property
    def labels(self) -> List[str]:
        return [self.label(index) for index in range(self.size)]

    def census(self) -> Dict[int, int]:
        return dict(sorted(Counter(length for length in self.lengths if length is not None).items()))

    def stabilization_depth(self) -> int:
        """Least k' with SG_k' = SG_k as element sets, the sink counting only once it is reached."""
        return max(length for length in self.lengths if length is not None)

    def counts(self) -> ElementCounts:
        generators = set(self.generator_indices)
        zero_extra = 1 if self.zero_index is not None and self.zero_index not in generators else 0
        return ElementCounts(
            all=self.size,
            excluding_generators=self.size - len(generators),
            excluding_generators_and_zero=self.size - len(generators) - zero_extra,
            excluding_zero=self.size - (1 if self.zero_index is not None else 0),
        )

    def products_by_length(self) -> List[ProductGroup]:
        """Every word multiplied out during closure, grouped by length, with the element it gave."""
        groups: Dict[int, ProductGroup] = {}
        seen: set = set()
        for word, element in self.closure.trials:
            group = groups.setdefault(len(word), ProductGroup(length=len(word), products={}, new_elements=[]))
            label = self.label(element)
            group.products[word_label(word, self.generator_names)] = label
            if element not in seen:
                seen.add(element)
                group.new_elements.append(label)
        return [groups[length] for length in sorted(groups)]


def generate_truncated(
    generators: Sequence[Matrix],
    k: int,
    policy: Optional[RoundingPolicy] = None,
    cap: Optional[int] = None,
    names: Optional[Sequence[str]] = None,
    threads: Optional[int] = None,
) -> TruncatedSemigroup:
    """Breadth-first closure under max-times up to word length k."""
    if k < 1:
        raise InputValidationError(f"k must be >= 1, got {k}", module="trunc-semigroup")
    policy = policy or RoundingPolicy.per_step()
    cap = config.MAX_ELEMENTS if cap is None else cap
    threads = config.DEFAULT_THREADS if threads is None else threads

    prepared = []
    for position, matrix in enumerate(generators):
        exact = as_fraction_matrix(matrix)
        if any(not 0 <= value <= 1 for value in exact.flat):
            raise InputValidationError(f"generator {position} has entries outside [0, 1]", module="trunc-semigroup")
        prepared.append(policy.apply(exact))
    names = tuple(names) if names is not None else default_names(len(prepared))
    if len(names) != len(prepared):
        raise InputValidationError(f"{len(names)} names for {len(prepared)} generators", module="trunc-semigroup")

    closure = breadth_first_closure(
        prepared,
        lambda a, b: policy.apply(max_times(a, b)),
        cap=cap,
        max_length=k,
        threads=threads,
    )
    elements: List[Matrix] = list(closure.matrices)
    words: List[Optional[Word]] = list(closure.words)
    zero_index = next((i for i, matrix in enumerate(elements) if is_zero(matrix)), None)
    zero_reached = zero_index is not None
    if zero_index is None and 2 * closure.max_length > k:
        zero = np.empty(prepared[0].shape, dtype=object)
        zero.fill(Fraction(0))
        elements.append(zero)
        words.append(None)
        zero_index = len(elements) - 1

    semigroup = TruncatedSemigroup(
        k=k,
        policy=policy,
        elements=tuple(elements),
        words=tuple(words),
        generators=tuple(prepared),
        generator_names=names,
        generator_indices=closure.generator_indices,
        zero_index=zero_index,
        zero_reached=zero_reached,
        closure=closure,
    )
    logger.info(
        "Truncated semigroup generated",
        k=k,
        mode=policy.mode,
        digits=policy.digits,
        elements=semigroup.size,
        zero_reached=zero_reached,
        stabilization_depth=semigroup.stabilization_depth(),
    )
    return semigroup


def truncated_of(
    graph: AnyGraph,
    k: int,
    policy: Optional[RoundingPolicy] = None,
    cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> TruncatedSemigroup:
    return generate_truncated(graph.matrices, k, policy=policy, cap=cap, names=graph.relation_names, threads=threads)


def truncated_table(semigroup: TruncatedSemigroup) -> MultiplicationTable:
    labels = semigroup.labels
    cells = [[labels[semigroup.product(x, y)] for y in range(semigroup.size)] for x in range(semigroup.size)]
    return MultiplicationTable(labels=labels, cells=cells, zero_label=ZERO_LABEL if semigroup.zero_index is not None else None)


def matching_conventions(counts: ElementCounts, expected: int) -> List[str]:
    return [name for name, value in counts.model_dump().items() if value == expected]


def truncated_report(
    semigroup: TruncatedSemigroup,
    expected_count: Optional[int] = None,
    include_products: bool = True,
    include_table: bool = False,
) -> TruncatedReport:
    counts = semigroup.counts()
    matches = matching_conventions(counts, expected_count) if expected_count is not None else []
    if expected_count is not None and not matches:
        logger.warning(
            "Expected element count matches no counting convention",
            expected=expected_count,
            counts=counts.model_dump(),
        )
    elements = [
        ElementEntry(
            index=index,
            label=semigroup.label(index),
            word=[semigroup.generator_names[p] for p in word] if word is not None else None,
            length=len(word) if word is not None else None,
            matrix=matrix_to_text(matrix),
        )
        for index, (matrix, word) in enumerate(zip(semigroup.elements, semigroup.words))
    ]
    return TruncatedReport(
        k=semigroup.k,
        policy=semigroup.policy.to_report(),
        generators=list(semigroup.generator_names),
        counts=counts,
        census={str(length): count for length, count in semigroup.census().items()},
        stabilization_depth=semigroup.stabilization_depth(),
        zero_index=semigroup.zero_index,
        zero_reached=semigroup.zero_reached,
        truncated=semigroup.truncates,
        expected_count=expected_count,
        matching_conventions=matches,
        elements=elements,
        products_by_length=semigroup.products_by_length() if include_products else [],
        table=truncated_table(semigroup) if include_table else None,
    )


def listing_text(report: TruncatedReport) -> str:
    """Elements grouped by word length, as k-fold products."""
    policy = report.policy
    header = f"k = {report.k}, rounding: {policy.mode}"
    if policy.digits is not None:
        header += f" ({policy.digits} digits, {policy.rule})"
    lines = [header]
    by_length: Dict[Optional[int], List[ElementEntry]] = {}
    for entry in report.elements:
        by_length.setdefault(entry.length, []).append(entry)
    for length in sorted(key for key in by_length if key is not None):
        heading = "generators" if length == 1 else f"{length}-fold products"
        lines.append(f"{heading}:")
        for entry in by_length[length]:
            lines.append(f"  {entry.label} = {entry.matrix}")
    if None in by_length:
        lines.append(f"truncation sink: {ZERO_LABEL}")
    counts = report.counts
    lines.append(
        f"elements: {counts.all} total, {counts.excluding_generators} excluding generators, "
        f"{counts.excluding_generators_and_zero} excluding generators and zero"
    )
    lines.append(f"stabilization depth: {report.stabilization_depth}")
    return "\n".join(lines)
