"""Tests for induced homomorphisms, functoriality and the one-shot pipeline."""

from fractions import Fraction

import pytest

from roleanalysis.exceptions import InputValidationError, NotPerfectError
from roleanalysis.fixtures import get_fixture
from roleanalysis.graph.io import load_graph
from roleanalysis.graph.models import NestedHierarchy, Partition, WeightedMultirelationalGraph
from roleanalysis.services.pipeline import report_text, run_pipeline
from roleanalysis.services.verification import (
    check_functoriality,
    homomorphism_report,
    induced_hom,
    level_graphs,
)


@pytest.mark.unit
class TestInducedHomomorphism:
    """Test cases for SG(G) -> SG(G/P)."""

    def test_blow_up_maps_onto_template(self, six_node_graph, blow_up_factory):
        """Test a doubled graph maps element for element onto the template's semigroup."""
        graph, partition = blow_up_factory(six_node_graph)
        hom = induced_hom(graph, partition)
        assert hom.source.size == 5
        assert hom.target.size == 5
        assert hom.is_surjective()
        report = homomorphism_report(hom)
        assert report.passed
        assert report.violations == []
        assert report.mapping == {"H": "H", "L": "L", "HH": "HH", "HL": "HL", "0": "0"}

    def test_imperfect_partition_refused(self, six_node_graph, three_blocks):
        """Test the half-filled H block stops the reduction."""
        with pytest.raises(NotPerfectError) as info:
            induced_hom(six_node_graph, three_blocks)
        assert info.value.context["relation"] == "H"
        assert info.value.context["density"] == "0.5"

    def test_weighted_input_refused(self):
        """Test fractional relations cannot be reduced to a Boolean semigroup."""
        graph = WeightedMultirelationalGraph.from_matrices(["a"], {"W": [[Fraction(1, 2)]]})
        with pytest.raises(InputValidationError):
            induced_hom(graph, Partition.whole(1))

    def test_zero_one_weighted_input_accepted(self, six_node_graph, blow_up_factory):
        """Test weighted input holding only 0 and 1 is treated as Boolean."""
        graph, partition = blow_up_factory(six_node_graph)
        weighted = WeightedMultirelationalGraph.from_matrices(
            graph.node_labels,
            {name: matrix.astype(int) for name, matrix in zip(graph.relation_names, graph.matrices)},
        )
        assert induced_hom(weighted, partition).is_surjective()


@pytest.mark.unit
class TestFunctoriality:
    """Test cases for nested hierarchies of perfect blockmodels."""

    def test_two_level_blow_up(self, two_level_blow_up):
        """Test both quotient routes from the 24-node graph agree."""
        graph, levels = two_level_blow_up
        report = check_functoriality(graph, NestedHierarchy(levels=tuple(levels)))
        assert report.passed
        assert report.levels == 2
        assert report.level_sizes == [24, 12, 6]
        assert report.semigroup_sizes == [5, 5, 5]
        assert [(p.i, p.j) for p in report.pairs] == [(0, 1), (0, 2), (1, 2)]
        assert all(p.homomorphism and p.surjective and p.quotient_consistent for p in report.pairs)
        assert len(report.triples) == 1
        assert (report.triples[0].i, report.triples[0].k, report.triples[0].j) == (0, 1, 2)
        assert report.triples[0].mismatches == []

    def test_single_level(self, six_node_graph, blow_up_factory):
        """Test a one-level hierarchy has one pair and no triples."""
        graph, partition = blow_up_factory(six_node_graph)
        report = check_functoriality(graph, NestedHierarchy(levels=(partition,)))
        assert report.passed
        assert len(report.pairs) == 1
        assert report.triples == []

    def test_imperfect_level(self, six_node_graph, three_blocks):
        """Test the failing level is named."""
        with pytest.raises(NotPerfectError) as info:
            level_graphs(six_node_graph, NestedHierarchy(levels=(three_blocks,)))
        assert info.value.context["level"] == 1

    def test_size_mismatch(self, six_node_graph):
        """Test a hierarchy over a different node count."""
        with pytest.raises(InputValidationError):
            level_graphs(six_node_graph, NestedHierarchy(levels=(Partition.whole(4),)))


@pytest.mark.integration
class TestPipeline:
    """Test cases for the one-shot report."""

    def test_six_node_graph(self, six_node_graph, three_blocks):
        """Test every stage on the six-node graph with blocks {1}, {2, 3}, {4, 5, 6}."""
        report = run_pipeline(six_node_graph, three_blocks)
        assert report.semigroup.counts.all == 5
        assert report.truncated is None
        assert not report.density.is_perfect
        assert report.density.imperfect_entries[0].density == "0.5"
        h_image = next(m for m in report.image.matrices if m.name == "H")
        assert h_image.rows == [["0", "1", "0"], ["0", "0", "1"], ["0", "0", "0"]]
        assert report.image.deltas == {"H": "5/36", "L": "7/18"}
        assert report.image_semigroup.counts.all == 4
        assert report.density_truncated.counts.all == 4
        assert report.homomorphism is None
        assert "not perfect" in report.homomorphism_refused

    def test_blow_up(self, six_node_graph, blow_up_factory):
        """Test a perfect partition yields the homomorphism and functoriality sections."""
        graph, partition = blow_up_factory(six_node_graph)
        report = run_pipeline(graph, partition, hierarchy=NestedHierarchy(levels=(partition,)))
        assert report.density.is_perfect
        assert report.homomorphism.passed
        assert report.homomorphism_refused is None
        assert report.functoriality.passed

    def test_weighted_fixture(self):
        """Test weighted input goes to the truncated semigroup only."""
        graph = load_graph(get_fixture("monks-density").manifest)
        report = run_pipeline(graph)
        assert report.semigroup is None
        assert report.truncated.counts.all == 10
        assert report.truncated.stabilization_depth == 4
        assert report.graph.weighted

    def test_report_text(self, six_node_graph, three_blocks):
        """Test the human-readable sections."""
        sections = report_text(run_pipeline(six_node_graph, three_blocks))
        assert sections[0] == "graph: 6 nodes, relations H, L"
        assert any(section.startswith("density H:") for section in sections)
        assert any(section.startswith("induced homomorphism refused:") for section in sections)
