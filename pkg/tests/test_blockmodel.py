"""Tests for density, image and lean-fit blockmodels and quotient maps."""

from fractions import Fraction

import numpy as np
import pytest

from roleanalysis.exceptions import InputValidationError, NotPerfectError, PartitionError
from roleanalysis.graph.models import MultirelationalGraph, Partition, WeightedMultirelationalGraph
from roleanalysis.services.equivalence import structural_partition
from roleanalysis.services.blockmodel import (
    QuotientMap,
    blow_up,
    compose_quotients,
    default_delta,
    density_blockmodel,
    density_matrix,
    image_blockmodel,
    image_matrix,
    induced_partition,
    lean_fit,
    lean_fit_blockmodel,
    permuted_matrix,
    refine_check,
)

HALF = Fraction(1, 2)


@pytest.mark.unit
class TestDensity:
    """Test cases for permuted and density matrices."""

    def test_permuted_contiguous_blocks(self, six_node_graph, three_blocks):
        """Test blocks that are already intervals leave the matrix unchanged."""
        a_h = six_node_graph.matrix("H")
        assert np.array_equal(permuted_matrix(a_h, three_blocks), a_h)

    def test_permuted_reorders(self):
        """Test rows and columns are grouped block by block."""
        a = np.arange(9).reshape(3, 3)
        partition = Partition.from_assignment([0, 1, 0])
        assert permuted_matrix(a, partition).tolist() == [[0, 2, 1], [6, 8, 7], [3, 5, 4]]

    def test_three_block_densities(self, six_node_graph, three_blocks):
        """Test the H density has the 1/2 entry and the L density is the identity."""
        assert density_matrix(six_node_graph.matrix("H"), three_blocks).tolist() == [[0, 1, 0], [0, 0, HALF], [0, 0, 0]]
        assert density_matrix(six_node_graph.matrix("L"), three_blocks).tolist() == np.eye(3, dtype=int).tolist()

    def test_blockmodel_not_perfect(self, six_node_graph, three_blocks):
        """Test the three-block blockmodel is imperfect and refuses reduction."""
        blockmodel, quotient = density_blockmodel(six_node_graph, three_blocks)
        assert not blockmodel.is_perfect
        assert blockmodel.block_sizes == (1, 2, 3)
        assert blockmodel.graph.node_labels == ("B1", "B2", "B3")
        assert blockmodel.imperfect_entries() == [("H", 1, 2, HALF)]
        assert quotient.assignment == (0, 1, 1, 2, 2, 2)
        with pytest.raises(NotPerfectError):
            blockmodel.to_boolean_graph()

    def test_singleton_partition_reproduces_graph(self, six_node_graph):
        """Test the singleton partition gives back the relation matrices."""
        blockmodel, _ = density_blockmodel(six_node_graph, Partition.singleton(6))
        assert blockmodel.is_perfect
        assert blockmodel.to_boolean_graph().matrices[0].tolist() == six_node_graph.matrix("H").tolist()

    def test_whole_partition(self, six_node_graph):
        """Test the one-block partition gives the overall share of ones."""
        blockmodel, _ = density_blockmodel(six_node_graph, Partition.whole(6))
        assert blockmodel.graph.matrix("H")[0, 0] == Fraction(5, 36)

    def test_weighted_input_sums_weights(self):
        """Test densities of weighted input average the weights."""
        graph = WeightedMultirelationalGraph.from_matrices(
            ["a", "b"], {"W": [[Fraction(1, 2), Fraction(1, 4)], [Fraction(0), Fraction(1)]]}
        )
        blockmodel, _ = density_blockmodel(graph, Partition.whole(2))
        assert blockmodel.weighted_input
        assert blockmodel.graph.matrix("W")[0, 0] == Fraction(7, 16)

    def test_partition_size_mismatch(self, six_node_graph):
        """Test a partition over the wrong number of nodes."""
        with pytest.raises(PartitionError):
            density_blockmodel(six_node_graph, Partition.whole(5))


@pytest.mark.unit
class TestImage:
    """Test cases for the alpha-density criterion and lean fit."""

    def test_default_deltas(self, six_node_graph):
        """Test default thresholds are the share of ones per relation."""
        assert default_delta(six_node_graph.matrix("H")) == Fraction(5, 36)
        assert default_delta(six_node_graph.matrix("L")) == Fraction(14, 36)

    def test_images(self, six_node_graph, three_blocks):
        """Test the image of H is the path 1 -> 2 -> 3 and the image of L the identity."""
        image = image_blockmodel(six_node_graph, three_blocks)
        assert image.criterion == "alpha"
        assert image.deltas == (Fraction(5, 36), Fraction(7, 18))
        assert image.graph.matrix("H").tolist() == [[False, True, False], [False, False, True], [False, False, False]]
        assert image.graph.matrix("L").tolist() == np.eye(3, dtype=bool).tolist()

    def test_image_matrix_threshold(self):
        """Test entries equal to delta map to 1."""
        d = np.array([[Fraction(1, 2), Fraction(1, 3)], [Fraction(0), Fraction(1)]], dtype=object)
        assert image_matrix(d, Fraction(1, 2)).tolist() == [[True, False], [False, True]]
        assert image_matrix(d, "1/3").tolist() == [[True, True], [False, True]]

    def test_delta_range(self):
        """Test delta outside (0, 1] is rejected."""
        d = np.zeros((2, 2), dtype=object)
        with pytest.raises(InputValidationError):
            image_matrix(d, 0)
        with pytest.raises(InputValidationError):
            image_matrix(d, 1.5)
        with pytest.raises(InputValidationError):
            image_matrix(d, "abc")

    def test_zero_relation(self, three_blocks):
        """Test a relation without ties gets a zero image and is reported."""
        graph = MultirelationalGraph.from_matrices(
            [str(i) for i in range(1, 7)], {"Z": np.zeros((6, 6), dtype=bool)}
        )
        image = image_blockmodel(graph, three_blocks)
        assert image.zero_relations == ("Z",)
        assert image.deltas == (None,)
        assert not image.graph.matrix("Z").any()

    def test_lean_fit(self, six_node_graph, three_blocks):
        """Test lean fit keeps every nonzero density."""
        assert lean_fit(np.array([[Fraction(0), Fraction(1, 9)]], dtype=object)).tolist() == [[False, True]]
        image = lean_fit_blockmodel(six_node_graph, three_blocks)
        assert image.criterion == "lean_fit"
        assert image.graph.matrix("H").tolist() == [[False, True, False], [False, False, True], [False, False, False]]


@pytest.mark.unit
class TestQuotients:
    """Test cases for refinement, quotient maps and blow-ups."""

    def test_refine_check(self, three_blocks):
        """Test refinement against the whole and singleton partitions."""
        assert refine_check(three_blocks, Partition.whole(6))
        assert not refine_check(Partition.whole(6), three_blocks)

    def test_compose(self, three_blocks):
        """Test composing node -> block -> single block."""
        first = QuotientMap.from_partition(three_blocks)
        second = QuotientMap(source_size=3, target_size=1, assignment=(0, 0, 0))
        composite = compose_quotients(first, second)
        assert composite.assignment == (0,) * 6
        assert first.then(second) == composite

    def test_compose_mismatch(self, three_blocks):
        """Test maps that do not chain are rejected."""
        first = QuotientMap.from_partition(three_blocks)
        with pytest.raises(PartitionError):
            compose_quotients(first, first)

    def test_quotient_must_be_surjective(self):
        """Test quotient maps cover every target block."""
        with pytest.raises(ValueError):
            QuotientMap(source_size=2, target_size=3, assignment=(0, 1))

    def test_induced_partition(self, three_blocks):
        """Test a coarse partition seen on the blocks of a fine one."""
        coarse = Partition.from_assignment(["x", "y", "y", "y", "y", "y"])
        induced = induced_partition(three_blocks, coarse)
        assert induced.assignment == (0, 1, 1)
        assert induced.block_labels == ("x", "y")
        with pytest.raises(PartitionError):
            induced_partition(coarse, three_blocks)

    def test_blow_up_is_perfect(self, six_node_graph, blow_up_factory):
        """Test duplicated nodes give a perfect blockmodel that reproduces the template."""
        graph, partition = blow_up_factory(six_node_graph, [1, 2, 3, 1, 1, 2])
        assert graph.n == 10
        assert graph.node_labels[:3] == ("1", "2.1", "2.2")
        blockmodel, _ = density_blockmodel(graph, partition)
        assert blockmodel.is_perfect
        assert blockmodel.to_boolean_graph() == six_node_graph

    def test_blow_up_sizes(self, six_node_graph):
        """Test invalid block sizes."""
        with pytest.raises(InputValidationError):
            blow_up(six_node_graph, [1, 1])
        with pytest.raises(InputValidationError):
            blow_up(six_node_graph, [1, 1, 1, 1, 1, 0])


def random_template(rng: np.random.Generator, n: int = 4, r: int = 2) -> MultirelationalGraph:
    return MultirelationalGraph.from_matrices(
        [f"t{i}" for i in range(n)], {f"R{k}": rng.random((n, n)) < 0.4 for k in range(r)}
    )


@pytest.mark.property
class TestBlockmodelInvariants:
    """Test cases for density and image invariants on random graphs."""

    def test_positive_densities_are_witnessed(self):
        """Test every positive block density has a tie inside its block."""
        rng = np.random.default_rng(21)
        for _ in range(30):
            graph = random_template(rng, n=7)
            partition = Partition.from_assignment([int(b) for b in rng.integers(0, 3, size=graph.n)])
            for matrix in graph.matrices:
                d = density_matrix(matrix, partition)
                for p, rows in enumerate(partition.blocks):
                    for q, cols in enumerate(partition.blocks):
                        witnessed = bool(matrix[np.ix_(rows, cols)].any())
                        assert (d[p, q] > 0) == witnessed

    def test_lean_fit_is_smallest_threshold(self):
        """Test lean fit equals the image at any delta up to the smallest positive density."""
        rng = np.random.default_rng(22)
        for _ in range(30):
            graph = random_template(rng, n=6)
            partition = Partition.from_assignment([int(b) for b in rng.integers(0, 3, size=graph.n)])
            for matrix in graph.matrices:
                d = density_matrix(matrix, partition)
                positive = [value for value in d.flat if value > 0]
                if not positive:
                    continue
                smallest = min(positive)
                for epsilon in (smallest, smallest / 2, Fraction(1, 10**6)):
                    assert np.array_equal(lean_fit(d), image_matrix(d, epsilon))

    def test_density_composes_over_perfect_levels(self):
        """Test densities of densities equal coarse densities when both levels are perfect."""
        rng = np.random.default_rng(23)
        for _ in range(20):
            template = random_template(rng, n=3)
            middle, coarse_on_middle = blow_up(template, [int(s) for s in rng.integers(1, 3, size=template.n)])
            graph, fine = blow_up(middle, [int(s) for s in rng.integers(1, 3, size=middle.n)])
            coarse = Partition.from_assignment([coarse_on_middle.block_of(fine.block_of(v)) for v in range(graph.n)])
            step = induced_partition(fine, coarse)
            for matrix in graph.matrices:
                two_step = density_matrix(density_matrix(matrix, fine), step)
                assert np.array_equal(two_step, density_matrix(matrix, coarse))

    def test_density_composition_needs_perfect_coarse_level(self):
        """Test unequal fine blocks under an imperfect coarse block do not compose."""
        a = np.zeros((4, 4), dtype=bool)
        a[0, 0] = True
        fine = Partition.from_assignment([0, 1, 1, 1])
        coarse = Partition.whole(4)
        assert density_blockmodel(MultirelationalGraph.from_matrices(list("abcd"), {"R": a}), fine)[0].is_perfect
        two_step = density_matrix(density_matrix(a, fine), induced_partition(fine, coarse))
        assert two_step[0, 0] == Fraction(1, 4)
        assert density_matrix(a, coarse)[0, 0] == Fraction(1, 16)

    def test_structural_blocks_have_boolean_off_diagonal(self):
        """Test off-diagonal densities between structurally equivalent blocks are 0 or 1."""
        rng = np.random.default_rng(24)
        for _ in range(30):
            template = random_template(rng, n=4)
            graph, _ = blow_up(template, [int(s) for s in rng.integers(1, 4, size=template.n)])
            partition = structural_partition(graph)
            for matrix in graph.matrices:
                d = density_matrix(matrix, partition)
                for p in range(partition.num_blocks):
                    for q in range(partition.num_blocks):
                        if p != q:
                            assert d[p, q] in (0, 1)
