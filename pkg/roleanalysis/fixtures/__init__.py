"""Bundled datasets.

``six-node`` is the six-node toy graph with relations H and L together with the three-block
partition {1}, {2, 3}, {4, 5, 6}. ``monks-density`` holds the two 2x2 density generators
of the monks positive and negative ties. The original 18x18 monks and 71x71 lawyers
matrices are not bundled; point ``ROLEANALYSIS_EXTERNAL_DATA`` at a directory holding
them in manifest form (``monks/manifest.json``, ``lazega/manifest.json``).
"""

from pathlib import Path
from typing import Dict, List, NamedTuple

from roleanalysis.exceptions import InputValidationError

DATA_DIR = Path(__file__).parent / "data"


class Fixture(NamedTuple):
    name: str
    directory: Path
    description: str
    partitions: List[str]

    @property
    def manifest(self) -> Path:
        return self.directory / "manifest.json"

    def partition(self, name: str) -> Path:
        if name not in self.partitions:
            raise InputValidationError(f"fixture {self.name!r} has no partition {name!r}", {"known": self.partitions})
        return self.directory / name


FIXTURES: Dict[str, Fixture] = {
    "six-node": Fixture(
        name="six-node",
        directory=DATA_DIR / "six_node",
        description="Six nodes, relations H and L; three-block approximate-equivalence partition",
        partitions=["partition_three_blocks.json"],
    ),
    "monks-density": Fixture(
        name="monks-density",
        directory=DATA_DIR / "monks_density",
        description="Monks 2x2 density generators P (positive ties) and N (negative ties)",
        partitions=[],
    ),
}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise InputValidationError(f"unknown fixture {name!r}", {"available": sorted(FIXTURES)}, module="cli") from None


def list_fixtures() -> List[Fixture]:
    return [FIXTURES[name] for name in sorted(FIXTURES)]
