"""Test configuration and fixtures."""

import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pytest
import structlog

from roleanalysis.fixtures import get_fixture
from roleanalysis.graph.io import fraction_matrix_from_rows, load_graph
from roleanalysis.graph.models import MultirelationalGraph, Partition
from roleanalysis.services.blockmodel import blow_up


@pytest.fixture
def six_node_graph() -> MultirelationalGraph:
    """Six-node Boolean graph with relations H and L."""
    return load_graph(get_fixture("six-node").manifest)


@pytest.fixture
def three_blocks() -> Partition:
    """Blocks {1}, {2, 3}, {4, 5, 6} labelled B1..B3."""
    return Partition.from_assignment(["B1", "B2", "B2", "B3", "B3", "B3"])


@pytest.fixture
def monks_generators() -> Dict[str, object]:
    """The 2x2 density generators P and N, exact."""
    return {
        "P": fraction_matrix_from_rows([["0.11", "0.25"], ["0.11", "0.25"]]),
        "N": fraction_matrix_from_rows([["0.17", "0.25"], ["0.19", "0.20"]]),
    }


@pytest.fixture
def blow_up_factory() -> Callable:
    """Duplicate every node of a template into a block of identical copies."""

    def factory(template: MultirelationalGraph, sizes: Optional[Sequence[int]] = None) -> Tuple:
        return blow_up(template, sizes if sizes is not None else [2] * template.n)

    return factory


@pytest.fixture
def two_level_blow_up(six_node_graph, blow_up_factory) -> Tuple[MultirelationalGraph, List[Partition]]:
    """24-node graph from two successive doublings of the six-node graph, with both nested partitions."""
    middle, coarse_on_middle = blow_up_factory(six_node_graph)
    graph, fine = blow_up_factory(middle)
    coarse = Partition.from_assignment(
        [coarse_on_middle.block_of(fine.block_of(node)) for node in range(graph.n)]
    )
    return graph, [fine, coarse]


@pytest.fixture
def write_manifest(tmp_path: Path) -> Callable:
    """Write CSV matrices given as text plus a manifest; returns the manifest path."""

    def factory(nodes: Sequence[str], relations: Dict[str, str], name: str = "graph") -> Path:
        directory = tmp_path / name
        directory.mkdir(parents=True, exist_ok=True)
        entries = []
        for relation, text in relations.items():
            (directory / f"{relation}.csv").write_text(text, encoding="utf-8")
            entries.append({"name": relation, "file": f"{relation}.csv"})
        manifest = directory / "manifest.json"
        manifest.write_text(json.dumps({"nodes": list(nodes), "relations": entries}), encoding="utf-8")
        return manifest

    return factory


@pytest.fixture
def write_partition(tmp_path: Path) -> Callable:
    """Write a node label -> block label mapping as JSON."""

    def factory(mapping: Dict[str, str], name: str = "partition.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(mapping), encoding="utf-8")
        return path

    return factory


# Mock environment variables for testing
@pytest.fixture(autouse=True)
def mock_env_vars(monkeypatch, tmp_path):
    """Mock environment variables for testing."""
    monkeypatch.setenv("ROLEANALYSIS_OUTPUT_DIR", str(tmp_path / "output"))
    monkeypatch.setenv("ROLEANALYSIS_LOG_LEVEL", "WARNING")
    monkeypatch.setenv("DEBUG", "false")


@pytest.fixture(autouse=True)
def reset_log_stream():
    """CLI runs bind structlog to the captured stderr; rebind to the real one after each test."""
    yield
    structlog.configure(logger_factory=structlog.PrintLoggerFactory(file=sys.__stderr__))
