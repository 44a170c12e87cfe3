"""JSON artifacts written by the CLI. Weighted entries are exact strings; field order is output order."""

from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field


class MatrixArtifact(BaseModel):
    name: str
    rows: List[List[str]]


class GraphSummary(BaseModel):
    nodes: List[str]
    relations: List[str]
    n: int
    r: int
    weighted: bool
    zero_relations: List[str] = Field(default_factory=list)


class PartitionReport(BaseModel):
    method: str
    metric: Optional[str] = None
    relations: List[str]
    num_blocks: int
    blocks: List[List[str]]
    assignment: Dict[str, str]
    zero_profiles: List[str] = Field(default_factory=list)


class DensityEntry(BaseModel):
    relation: str
    row_block: str
    column_block: str
    density: str


class DensityReport(BaseModel):
    block_labels: List[str]
    blocks: List[List[str]]
    block_sizes: List[int]
    is_perfect: bool
    weighted_input: bool
    matrices: List[MatrixArtifact]
    imperfect_entries: List[DensityEntry] = Field(default_factory=list)


class ImageReport(BaseModel):
    criterion: str
    block_labels: List[str]
    deltas: Dict[str, Optional[str]] = Field(default_factory=dict)
    zero_relations: List[str] = Field(default_factory=list)
    matrices: List[MatrixArtifact]


class MultiplicationTable(BaseModel):
    """Cell (x, y) holds the label of x * y."""

    labels: List[str]
    cells: List[List[str]]
    zero_label: Optional[str] = None
    zero_hidden: bool = False

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.cells, index=self.labels, columns=self.labels)

    def to_text(self) -> str:
        return self.to_frame().to_string()


class ElementEntry(BaseModel):
    index: int
    label: str
    word: Optional[List[str]]
    length: Optional[int]
    matrix: List[List[str]]


class ElementCounts(BaseModel):
    all: int
    excluding_generators: int
    excluding_generators_and_zero: int
    excluding_zero: int


class AssociativityReport(BaseModel):
    exhaustive: bool
    triples_checked: int
    failures: List[List[int]] = Field(default_factory=list)
    passed: bool


class SemigroupReport(BaseModel):
    generators: List[str]
    counts: ElementCounts
    zero_index: Optional[int]
    census: Dict[str, int]
    elements: List[ElementEntry]
    table: Optional[MultiplicationTable] = None
    associativity: Optional[AssociativityReport] = None


class RoundingPolicyReport(BaseModel):
    mode: str
    digits: Optional[int]
    rule: Optional[str]


class ProductGroup(BaseModel):
    """All words of one length that were multiplied out, with the element each produced."""

    length: int
    products: Dict[str, str]
    new_elements: List[str]


class TruncatedReport(BaseModel):
    k: int
    policy: RoundingPolicyReport
    generators: List[str]
    counts: ElementCounts
    census: Dict[str, int]
    stabilization_depth: int
    zero_index: Optional[int]
    zero_reached: bool
    truncated: bool
    expected_count: Optional[int] = None
    matching_conventions: List[str] = Field(default_factory=list)
    elements: List[ElementEntry]
    products_by_length: List[ProductGroup] = Field(default_factory=list)
    table: Optional[MultiplicationTable] = None


class HomomorphismReport(BaseModel):
    source_elements: int
    target_elements: int
    mapping: Dict[str, str]
    surjective: bool
    violations: List[List[int]] = Field(default_factory=list)
    passed: bool


class TripleCheck(BaseModel):
    i: int
    k: int
    j: int
    passed: bool
    mismatches: List[int] = Field(default_factory=list)


class PairCheck(BaseModel):
    i: int
    j: int
    homomorphism: bool
    surjective: bool
    quotient_consistent: bool


class FunctorialityReport(BaseModel):
    levels: int
    level_sizes: List[int]
    semigroup_sizes: List[int]
    pairs: List[PairCheck]
    triples: List[TripleCheck]
    passed: bool


class PipelineReport(BaseModel):
    graph: GraphSummary
    partition: Optional[PartitionReport] = None
    density: Optional[DensityReport] = None
    image: Optional[ImageReport] = None
    semigroup: Optional[SemigroupReport] = None
    image_semigroup: Optional[SemigroupReport] = None
    truncated: Optional[TruncatedReport] = None
    density_truncated: Optional[TruncatedReport] = None
    homomorphism: Optional[HomomorphismReport] = None
    homomorphism_refused: Optional[str] = None
    functoriality: Optional[FunctorialityReport] = None


class FixtureInfo(BaseModel):
    name: str
    description: str
    manifest: str
    nodes: int
    relations: List[str]
    partitions: List[str] = Field(default_factory=list)
