"""Shared plumbing for subcommands: validated configuration, input resolution and artifact writing."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from roleanalysis.config import config
from roleanalysis.exceptions import InputValidationError
from roleanalysis.fixtures import get_fixture
from roleanalysis.graph.io import load_graph, load_hierarchy, load_partition
from roleanalysis.graph.models import AnyGraph, Matrix, NestedHierarchy, Partition, matrix_to_text

logger = structlog.get_logger()


class AnalysisConfig(BaseModel):
    """Settings merged with command-line flags, validated before any computation."""

    model_config = ConfigDict(frozen=True)

    command: str
    input: Optional[Path] = None
    fixture: Optional[str] = None
    out: Path = Field(default_factory=lambda: config.OUTPUT_DIR)
    threads: int = Field(default_factory=lambda: config.DEFAULT_THREADS, ge=1)
    seed: Optional[int] = None
    cap: int = Field(default_factory=lambda: config.MAX_ELEMENTS, ge=1)

    @field_validator("input")
    @classmethod
    def _input_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"input manifest {value} does not exist")
        return value

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "AnalysisConfig":
        values = {
            "command": args.command,
            "input": getattr(args, "input", None),
            "fixture": getattr(args, "fixture", None),
            "seed": getattr(args, "seed", None),
        }
        for name in ("out", "threads", "cap"):
            if getattr(args, name, None) is not None:
                values[name] = getattr(args, name)
        try:
            return cls(**values)
        except ValueError as e:
            raise InputValidationError(f"invalid options: {e}", module="cli") from None

    def manifest(self) -> Path:
        if self.input is not None:
            return self.input
        if self.fixture is not None:
            return get_fixture(self.fixture).manifest
        raise InputValidationError("one of --input or --fixture is required", module="cli")

    def load(self) -> AnyGraph:
        return load_graph(self.manifest())

    def partition_path(self, value: str) -> Path:
        """A path, or the name of a partition bundled with the selected fixture."""
        path = Path(value)
        if not path.exists() and self.fixture is not None:
            fixture = get_fixture(self.fixture)
            if value in fixture.partitions:
                return fixture.partition(value)
        return path

    def load_partition(self, value: str, graph: AnyGraph) -> Partition:
        return load_partition(self.partition_path(value), graph)

    def load_hierarchy(self, values: List[str], graph: AnyGraph) -> NestedHierarchy:
        return load_hierarchy([self.partition_path(value) for value in values], graph)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--input", type=Path, help="Graph manifest (JSON)")
    source.add_argument("--fixture", help="Use a bundled dataset instead of --input")
    parser.add_argument("--out", type=Path, help="Output directory for artifacts")
    parser.add_argument("--threads", type=int, help="Worker threads for closure products and distances")
    parser.add_argument("--seed", type=int, help="Reserved; every computation is deterministic")
    parser.add_argument("--cap", type=int, help="Maximum number of semigroup elements")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


def write_json(cfg: AnalysisConfig, name: str, model: BaseModel) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Artifact written", path=str(path))
    return path


def write_matrix_csv(cfg: AnalysisConfig, name: str, matrix: Matrix) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    pd.DataFrame(matrix_to_text(matrix)).to_csv(path, header=False, index=False)
    return path


def emit(text: str) -> None:
    """Summaries go to stdout; logs stay on stderr."""
    sys.stdout.write(text.rstrip("\n") + "\n")
