"""Structural equivalence and approximate-equivalence clustering of nodes.

Two nodes are compared through their tie profiles: for every relation, the node's row
followed by its column. When node i is compared with node j, the positions i and j of
i's profile are swapped first, so a tie i -> j is matched against j -> i and a self-loop
against a self-loop.
"""

from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from roleanalysis.exceptions import InputValidationError
from roleanalysis.graph.models import AnyGraph, Matrix, Partition

logger = structlog.get_logger()


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine_distance"

    @classmethod
    def parse(cls, value: str) -> "Metric":
        aliases = {"euclidean": cls.EUCLIDEAN, "cosine": cls.COSINE, "cosine_distance": cls.COSINE}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise InputValidationError(
                f"unknown metric {value!r}; expected euclidean or cosine", module="equivalence"
            ) from None


class ProfileVector(BaseModel):
    """Row then column of node ``node`` for every relation, in relation order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    node: int
    n: int
    values: np.ndarray
    ignore_self: bool = True

    def aligned_to(self, other: int) -> np.ndarray:
        """Values with positions ``node`` and ``other`` swapped inside each row/column segment."""
        values = self.values.copy()
        if not self.ignore_self or other == self.node:
            return values
        segments = values.reshape(-1, self.n)
        segments[:, [self.node, other]] = segments[:, [other, self.node]]
        return segments.reshape(-1)


class DistanceMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    metric: Metric
    node_labels: Tuple[str, ...]
    values: np.ndarray
    zero_profiles: Tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return len(self.node_labels)


def _selected(graph: AnyGraph, relations: Optional[Sequence[str]]) -> List[Matrix]:
    if relations is not None and len(relations) == 0:
        raise InputValidationError("relation subset must not be empty", module="equivalence")
    return list(graph.select(relations).matrices)


def _profile_values(matrices: Sequence[Matrix], i: int) -> np.ndarray:
    parts = []
    for matrix in matrices:
        parts.append(np.asarray(matrix[i, :], dtype=np.float64))
        parts.append(np.asarray(matrix[:, i], dtype=np.float64))
    return np.concatenate(parts)


def profile_vector(
    graph: AnyGraph,
    i: int,
    ignore_self: bool = True,
    relations: Optional[Sequence[str]] = None,
) -> ProfileVector:
    if not 0 <= i < graph.n:
        raise InputValidationError(f"node index {i} out of range for {graph.n} nodes", module="equivalence")
    values = _profile_values(_selected(graph, relations), i)
    values.setflags(write=False)
    return ProfileVector(node=i, n=graph.n, values=values, ignore_self=ignore_self)


def structurally_equivalent(graph: AnyGraph, i: int, j: int, relations: Optional[Sequence[str]] = None) -> bool:
    """Same nonzero ties to all nodes, in and out, for every selected relation."""
    p_i = profile_vector(graph, i, relations=relations)
    p_j = profile_vector(graph, j, relations=relations)
    return bool(np.array_equal(p_i.aligned_to(j) != 0, p_j.values != 0))


def structural_partition(graph: AnyGraph, relations: Optional[Sequence[str]] = None) -> Partition:
    n = graph.n
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) != find(j) and structurally_equivalent(graph, i, j, relations):
                parent[max(find(i), find(j))] = min(find(i), find(j))

    partition = Partition.from_assignment([find(i) for i in range(n)])
    logger.info(
        "Structural partition computed",
        relations=list(relations) if relations is not None else list(graph.relation_names),
        blocks=partition.num_blocks,
    )
    return partition


def _distance_row(profiles: List[ProfileVector], metric: Metric, i: int) -> np.ndarray:
    n = len(profiles)
    row = np.zeros(n, dtype=np.float64)
    for j in range(i + 1, n):
        u = profiles[i].aligned_to(j)
        v = profiles[j].values
        if metric is Metric.EUCLIDEAN:
            row[j] = float(np.linalg.norm(u - v))
            continue
        norm_u, norm_v = np.linalg.norm(u), np.linalg.norm(v)
        if norm_u == 0 and norm_v == 0:
            row[j] = 0.0
        elif norm_u == 0 or norm_v == 0:
            row[j] = 1.0
        else:
            row[j] = min(1.0, max(0.0, 1.0 - float(u @ v) / float(norm_u * norm_v)))
    return row


def distance_matrix(
    graph: AnyGraph,
    metric: str = "euclidean",
    relations: Optional[Sequence[str]] = None,
    threads: int = 1,
) -> DistanceMatrix:
    """Pairwise profile distances. Under cosine, zero profiles sit at distance 1 from nonzero ones."""
    metric = metric if isinstance(metric, Metric) else Metric.parse(metric)
    profiles = [profile_vector(graph, i, relations=relations) for i in range(graph.n)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda i: _distance_row(profiles, metric, i), range(graph.n)))
    else:
        rows = [_distance_row(profiles, metric, i) for i in range(graph.n)]
    upper = np.vstack(rows)
    values = upper + upper.T
    values.setflags(write=False)

    zero_profiles: Tuple[int, ...] = ()
    if metric is Metric.COSINE:
        zero_profiles = tuple(i for i, profile in enumerate(profiles) if not np.any(profile.values))
        if zero_profiles:
            logger.warning(
                "Zero profile vectors under cosine distance",
                nodes=[graph.node_labels[i] for i in zero_profiles],
            )
    return DistanceMatrix(metric=metric, node_labels=graph.node_labels, values=values, zero_profiles=zero_profiles)


def agglomerate(
    d: DistanceMatrix,
    num_blocks: Optional[int] = None,
    threshold: Optional[float] = None,
) -> Partition:
    """Complete-linkage agglomerative clustering.

    Merges the pair of clusters with the smallest linkage; ties go to the pair whose first
    cluster has the smaller minimum node, then whose second cluster does. Stops at
    ``num_blocks`` clusters or before the first merge whose linkage exceeds ``threshold``.
    """
    n = d.n
    if (num_blocks is None) == (threshold is None):
        raise InputValidationError("give exactly one of num_blocks or threshold", module="equivalence")
    if num_blocks is not None and not 1 <= num_blocks <= n:
        raise InputValidationError(f"num_blocks must be in [1, {n}], got {num_blocks}", module="equivalence")
    if threshold is not None and threshold < 0:
        raise InputValidationError(f"threshold must be >= 0, got {threshold}", module="equivalence")

    values = d.values
    clusters: List[List[int]] = [[i] for i in range(n)]
    target = num_blocks if num_blocks is not None else 1

    while len(clusters) > target:
        best: Optional[Tuple[float, int, int]] = None
        best_pair = (0, 0)
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                linkage = float(values[np.ix_(clusters[a], clusters[b])].max())
                key = (linkage, clusters[a][0], clusters[b][0])
                if best is None or key < best:
                    best, best_pair = key, (a, b)
        assert best is not None
        if threshold is not None and best[0] > threshold:
            break
        a, b = best_pair
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
        clusters.sort(key=lambda cluster: cluster[0])

    assignment = [0] * n
    for block, members in enumerate(clusters):
        for node in members:
            assignment[node] = block
    partition = Partition.from_assignment(assignment)
    logger.info("Agglomerative clustering complete", metric=d.metric.value, blocks=partition.num_blocks)
    return partition
