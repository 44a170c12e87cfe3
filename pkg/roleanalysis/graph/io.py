"""Reading and writing graphs, partitions and hierarchies.

A manifest is JSON ``{"nodes": [...], "relations": [{"name": ..., "file": ...}]}`` with
CSV paths relative to the manifest. Matrix CSVs have no header, one row per line.
"""

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd
import structlog

from roleanalysis.exceptions import GraphFormatError, HierarchyError, PartitionError
from roleanalysis.graph.models import (
    AnyGraph,
    Matrix,
    MultirelationalGraph,
    NestedHierarchy,
    Partition,
    WeightedMultirelationalGraph,
    check_nesting,
    matrix_to_text,
    parse_entry,
)

logger = structlog.get_logger()

PathLike = Union[str, Path]

# pandas: "Expected 2 fields in line 2, saw 3"
_TOKENIZER_LINE = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def _read_json(path: Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise GraphFormatError("file not found", path=str(path)) from None
    except json.JSONDecodeError as e:
        raise GraphFormatError(f"invalid JSON: {e.msg}", path=str(path), line=e.lineno) from e


def read_matrix_csv(path: Path, n: int) -> Matrix:
    """Read one n x n matrix as exact Fractions. Line numbers in errors are 1-based."""
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise GraphFormatError("matrix file not found", path=str(path)) from None
    except pd.errors.EmptyDataError:
        raise GraphFormatError("matrix file is empty", path=str(path)) from None
    except pd.errors.ParserError as e:
        match = _TOKENIZER_LINE.search(str(e))
        if match is None:
            raise GraphFormatError(f"dimension mismatch: {e}", path=str(path)) from e
        expected, line, saw = (int(group) for group in match.groups())
        raise GraphFormatError(
            f"dimension mismatch: row has {saw} entries, expected {expected}", path=str(path), line=line
        ) from e

    rows, cols = frame.shape
    for line, row in enumerate(frame.itertuples(index=False), start=1):
        filled = sum(1 for cell in row if not pd.isna(cell) and str(cell).strip() != "")
        if filled != cols:
            raise GraphFormatError(
                f"dimension mismatch: row has {filled} entries, expected {cols}",
                path=str(path),
                line=line,
            )
    if rows != cols:
        raise GraphFormatError(f"matrix is not square: {rows} rows, {cols} columns", path=str(path))
    if rows != n:
        raise GraphFormatError(
            f"dimension mismatch: matrix is {rows} x {cols} but the manifest lists {n} nodes",
            path=str(path),
        )

    matrix = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            text = str(frame.iat[i, j])
            try:
                value = parse_entry(text)
            except (ValueError, ZeroDivisionError):
                raise GraphFormatError(f"invalid entry {text!r}", path=str(path), line=i + 1, column=j + 1) from None
            if not 0 <= value <= 1:
                raise GraphFormatError(
                    f"entry {text} outside [0, 1]", path=str(path), line=i + 1, column=j + 1
                )
            matrix[i, j] = value
    return matrix


def load_graph(manifest_path: PathLike) -> AnyGraph:
    """Load a validated graph; weighted iff some entry lies strictly between 0 and 1."""
    manifest_path = Path(manifest_path)
    manifest = _read_json(manifest_path)
    if not isinstance(manifest, dict) or "nodes" not in manifest or "relations" not in manifest:
        raise GraphFormatError("manifest needs 'nodes' and 'relations'", path=str(manifest_path))

    nodes = [str(node) for node in manifest["nodes"]]
    if not nodes:
        raise GraphFormatError("manifest lists no nodes", path=str(manifest_path))
    if len(set(nodes)) != len(nodes):
        raise GraphFormatError("duplicate node label", path=str(manifest_path))
    entries = manifest["relations"]
    if not isinstance(entries, list) or not entries:
        raise GraphFormatError("manifest lists no relations", path=str(manifest_path))

    matrices: Dict[str, Matrix] = {}
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry or "file" not in entry:
            raise GraphFormatError("relation entries need 'name' and 'file'", path=str(manifest_path))
        name = str(entry["name"])
        if not name.strip():
            raise GraphFormatError("empty relation name", path=str(manifest_path))
        if name in matrices:
            raise GraphFormatError(f"duplicate relation name {name!r}", path=str(manifest_path), relation=name)
        matrices[name] = read_matrix_csv(manifest_path.parent / entry["file"], len(nodes))

    weighted = any(0 < value < 1 for matrix in matrices.values() for value in matrix.flat)
    if weighted:
        graph: AnyGraph = WeightedMultirelationalGraph.from_matrices(nodes, matrices)
    else:
        graph = MultirelationalGraph.from_matrices(
            nodes, {name: np.vectorize(lambda v: v == 1, otypes=[bool])(m) for name, m in matrices.items()}
        )
    logger.info(
        "Graph loaded",
        manifest=str(manifest_path),
        nodes=graph.n,
        relations=list(graph.relation_names),
        weighted=weighted,
    )
    return graph


def save_graph(graph: AnyGraph, directory: PathLike, manifest_name: str = "manifest.json") -> Path:
    """Write one CSV per relation plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    relations = []
    for name, matrix in zip(graph.relation_names, graph.matrices):
        file_name = f"{name}.csv"
        pd.DataFrame(matrix_to_text(matrix)).to_csv(directory / file_name, header=False, index=False)
        relations.append({"name": name, "file": file_name})
    manifest_path = directory / manifest_name
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump({"nodes": list(graph.node_labels), "relations": relations}, handle, indent=2)
        handle.write("\n")
    return manifest_path


def partition_from_mapping(mapping: Dict[str, Any], graph: AnyGraph, source: str = "<mapping>") -> Partition:
    """Node label -> block label mapping, total over the graph's nodes."""
    unknown = [label for label in mapping if label not in graph.node_labels]
    if unknown:
        raise PartitionError(f"unknown node label {unknown[0]!r}", {"file": source})
    missing = [label for label in graph.node_labels if label not in mapping]
    if missing:
        raise PartitionError(f"missing node {missing[0]!r}", {"file": source, "missing": missing})
    blocks: List[str] = []
    for label in graph.node_labels:
        block = mapping[label]
        block = "" if block is None else str(block)
        if not block.strip():
            raise PartitionError(f"empty block label for node {label!r}", {"file": source})
        blocks.append(block)
    return Partition.from_assignment(blocks)


def load_partition(path: PathLike, graph: AnyGraph) -> Partition:
    path = Path(path)
    mapping = _read_json(path)
    if not isinstance(mapping, dict):
        raise PartitionError("partition file must hold a JSON object", {"file": str(path)})
    partition = partition_from_mapping({str(k): v for k, v in mapping.items()}, graph, source=str(path))
    logger.info("Partition loaded", file=str(path), blocks=partition.num_blocks)
    return partition


def save_partition(partition: Partition, graph: AnyGraph, path: PathLike) -> Path:
    path = Path(path)
    if partition.n != graph.n:
        raise PartitionError(f"partition covers {partition.n} nodes, graph has {graph.n}")
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = partition.block_labels
    mapping = {node: labels[partition.block_of(i)] for i, node in enumerate(graph.node_labels)}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(mapping, handle, indent=2)
        handle.write("\n")
    return path


def load_hierarchy(paths: Sequence[PathLike], graph: AnyGraph) -> NestedHierarchy:
    """Partition files listed fine to coarse."""
    if not paths:
        raise HierarchyError("hierarchy needs at least one partition file")
    levels = [load_partition(path, graph) for path in paths]
    try:
        check_nesting(levels)
    except HierarchyError as e:
        level = e.context.get("level")
        if level is not None:
            e.context["files"] = [str(paths[level - 1]), str(paths[level])]
        raise
    return NestedHierarchy(levels=tuple(levels))


def fraction_matrix_from_rows(rows: Sequence[Sequence[Union[str, int, Fraction]]]) -> Matrix:
    """Build an exact matrix from nested rows of text or numbers."""
    matrix = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            matrix[i, j] = parse_entry(value) if isinstance(value, str) else Fraction(value)
    return matrix
