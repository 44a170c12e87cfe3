"""Randomized checks on seeded inputs."""

from fractions import Fraction

import numpy as np
import pytest

from roleanalysis.exceptions import ClosureCapExceeded
from roleanalysis.graph.models import MultirelationalGraph, NestedHierarchy, Partition, as_fraction_matrix
from roleanalysis.services.blockmodel import blow_up, density_blockmodel, density_matrix
from roleanalysis.services.equivalence import agglomerate, distance_matrix, structural_partition
from roleanalysis.services.matrices import bool_product, matrix_key, max_times
from roleanalysis.services.semigroup import check_associativity, generate_semigroup, semigroup_of, semigroup_report
from roleanalysis.services.truncated import RoundingPolicy, generate_truncated
from roleanalysis.services.verification import check_functoriality, induced_hom

SEEDS = [0, 1, 2, 3, 4, 5, 6, 7]

TEMPLATE_CAP = 64


def random_graph(seed: int, n: int = 4, r: int = 2, density: float = 0.35) -> MultirelationalGraph:
    rng = np.random.default_rng(seed)
    return MultirelationalGraph.from_matrices(
        [f"v{i}" for i in range(n)],
        {f"R{k}": rng.random((n, n)) < density for k in range(r)},
    )


def small_templates(rng: np.random.Generator, count: int, max_nodes: int, max_relations: int):
    """Random templates whose semigroups stay under TEMPLATE_CAP elements."""
    found = 0
    while found < count:
        n = int(rng.integers(1, max_nodes + 1))
        r = int(rng.integers(1, max_relations + 1))
        template = MultirelationalGraph.from_matrices(
            [f"t{i}" for i in range(n)],
            {f"R{k}": rng.random((n, n)) < rng.uniform(0.2, 0.6) for k in range(r)},
        )
        try:
            semigroup_of(template, max_elements=TEMPLATE_CAP)
        except ClosureCapExceeded:
            continue
        found += 1
        yield template


@pytest.mark.property
class TestSemigroupProperties:
    """Test cases for closure on random Boolean generators."""

    @pytest.mark.parametrize("seed", SEEDS)
    def test_table_cells_are_products(self, seed):
        """Test every table cell equals the Boolean product of its operands."""
        semigroup = semigroup_of(random_graph(seed, n=3))
        for x in range(semigroup.size):
            for y in range(semigroup.size):
                expected = bool_product(semigroup.elements[x], semigroup.elements[y])
                assert np.array_equal(semigroup.elements[semigroup.product(x, y)], expected)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_associative(self, seed):
        """Test the table is associative."""
        assert check_associativity(semigroup_of(random_graph(seed, n=3))).passed

    @pytest.mark.parametrize("seed", SEEDS)
    def test_threads_do_not_change_result(self, seed):
        """Test the serial and parallel closures agree word for word."""
        graph = random_graph(seed)
        serial = semigroup_of(graph, threads=1)
        parallel = semigroup_of(graph, threads=3)
        assert serial.words == parallel.words
        assert np.array_equal(serial.table, parallel.table)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_report_json_identical_across_threads(self, seed):
        """Test one and four worker threads serialize to the same JSON bytes."""
        graph = random_graph(seed, n=3)
        serial = semigroup_report(semigroup_of(graph, threads=1)).model_dump_json(indent=2)
        parallel = semigroup_report(semigroup_of(graph, threads=4)).model_dump_json(indent=2)
        assert serial.encode("utf-8") == parallel.encode("utf-8")

    @pytest.mark.parametrize("seed", SEEDS)
    def test_words_are_shortest(self, seed):
        """Test words never grow by more than one from their parent level."""
        semigroup = semigroup_of(random_graph(seed))
        lengths = [len(word) for word in semigroup.words]
        assert lengths == sorted(lengths)
        assert set(lengths) == set(range(1, max(lengths) + 1))

    def test_generator_order(self):
        """Test generators keep their positions when all are distinct."""
        rng = np.random.default_rng(11)
        generators = [rng.random((3, 3)) < 0.5 for _ in range(3)]
        semigroup = generate_semigroup(generators)
        distinct = len({g.tobytes() for g in generators})
        assert len(set(semigroup.generator_indices)) == distinct


@pytest.mark.property
class TestBlockmodelProperties:
    """Test cases for densities and blow-ups on random graphs."""

    @pytest.mark.parametrize("seed", SEEDS)
    def test_blow_up_is_perfect(self, seed):
        """Test random blow-ups give perfect blockmodels and homomorphisms."""
        template = random_graph(seed)
        sizes = list(np.random.default_rng(seed).integers(1, 4, size=template.n))
        graph, partition = blow_up(template, sizes)
        blockmodel, _ = density_blockmodel(graph, partition)
        assert blockmodel.is_perfect
        assert blockmodel.to_boolean_graph() == template
        assert induced_hom(graph, partition).is_surjective()

    @pytest.mark.parametrize("seed", SEEDS)
    def test_density_weights_sum_to_tie_count(self, seed):
        """Test block densities times block areas add back to the number of ties."""
        graph = random_graph(seed, n=6)
        assignment = np.random.default_rng(seed).integers(0, 3, size=graph.n)
        partition = Partition.from_assignment(list(assignment))
        sizes = [len(block) for block in partition.blocks]
        for matrix in graph.matrices:
            d = density_matrix(matrix, partition)
            total = sum(
                d[p, q] * sizes[p] * sizes[q] for p in range(partition.num_blocks) for q in range(partition.num_blocks)
            )
            assert total == Fraction(int(matrix.sum()))

    @pytest.mark.parametrize("seed", SEEDS)
    def test_structural_blocks_have_distance_zero(self, seed):
        """Test structurally equivalent nodes sit at Euclidean distance 0."""
        graph = random_graph(seed, n=6, density=0.2)
        partition = structural_partition(graph)
        d = distance_matrix(graph, "euclidean")
        for block in partition.blocks:
            for i in block:
                for j in block:
                    assert d.values[i, j] == 0

    @pytest.mark.parametrize("seed", SEEDS)
    def test_agglomerate_block_counts(self, seed):
        """Test every block count from 1 to n is reached exactly."""
        graph = random_graph(seed, n=5)
        d = distance_matrix(graph, "cosine")
        for k in range(1, graph.n + 1):
            partition = agglomerate(d, num_blocks=k)
            assert partition.num_blocks == k
            assert partition.n == graph.n


def random_weighted(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    values = rng.integers(0, 101, size=(n, n))
    return np.array([[Fraction(int(v), 100) for v in row] for row in values], dtype=object)


@pytest.mark.property
class TestMaxTimesProperties:
    """Test cases for the max-times product on exact random matrices."""

    def test_associative(self):
        """Test (A B) C = A (B C) without rounding on 1,000 triples."""
        rng = np.random.default_rng(31)
        for _ in range(1000):
            a, b, c = (random_weighted(rng) for _ in range(3))
            assert np.array_equal(max_times(max_times(a, b), c), max_times(a, max_times(b, c)))

    def test_matches_bool_product_on_boolean_input(self):
        """Test max-times restricted to 0/1 matrices is the Boolean product, on 1,000 pairs."""
        rng = np.random.default_rng(32)
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            a, b = rng.random((n, n)) < 0.5, rng.random((n, n)) < 0.5
            assert np.array_equal(max_times(a, b), as_fraction_matrix(bool_product(a, b)))

    @pytest.mark.parametrize("seed", SEEDS)
    def test_monotone_and_bounded(self, seed):
        """Test larger factors give larger products and entries stay in [0, 1]."""
        rng = np.random.default_rng(seed)
        a, b = random_weighted(rng), random_weighted(rng)
        bigger_a = np.vectorize(lambda v: min(Fraction(1), v + Fraction(1, 10)), otypes=[object])(a)
        product_ab = max_times(a, b)
        assert np.all(max_times(bigger_a, b) >= product_ab)
        assert all(0 <= value <= 1 for value in product_ab.flat)
        assert max(product_ab.flat) <= max(max(a.flat), max(b.flat))

    @pytest.mark.parametrize("seed", SEEDS)
    def test_boolean_specialization(self, seed):
        """Test unrounded truncation of Boolean generators reproduces the Boolean semigroup."""
        graph = random_graph(seed, n=3)
        boolean = semigroup_of(graph)
        truncated = generate_truncated(graph.matrices, 64, policy=RoundingPolicy.none(), names=graph.relation_names)
        assert truncated.words == tuple(boolean.words)
        assert [matrix_key(as_fraction_matrix(m)) for m in boolean.elements] == [
            matrix_key(m) for m in truncated.elements
        ]
        assert np.array_equal(truncated.table, boolean.table)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_k_one_is_generators_plus_zero(self, seed):
        """Test every two-fold product truncates when k is 1."""
        rng = np.random.default_rng(seed)
        generators = [random_weighted(rng) for _ in range(2)]
        semigroup = generate_truncated(generators, 1)
        assert semigroup.size == 3
        assert semigroup.sink_adjoined
        assert np.all(semigroup.table[:2, :2] == semigroup.zero_index)


@pytest.mark.property
class TestInducedHomomorphismProperties:
    """Test cases for homomorphisms induced by random perfect blockmodels."""

    def test_random_blow_ups(self):
        """Test 50 random templates blown up by block sizes up to 3 induce homomorphisms."""
        rng = np.random.default_rng(41)
        for template in small_templates(rng, 50, max_nodes=4, max_relations=3):
            sizes = [int(s) for s in rng.integers(1, 4, size=template.n)]
            graph, partition = blow_up(template, sizes)
            hom = induced_hom(graph, partition, max_elements=TEMPLATE_CAP)
            assert not hom.violations()
            assert hom.is_surjective()
            assert hom.source.size == hom.target.size


@pytest.mark.property
class TestFunctorialityProperties:
    """Test cases for functoriality along random two-step blow-ups."""

    def test_random_two_step_blow_ups(self):
        """Test 20 random two-level hierarchies pass every pair and triple."""
        rng = np.random.default_rng(42)
        for template in small_templates(rng, 20, max_nodes=3, max_relations=2):
            middle, coarse_on_middle = blow_up(template, [int(s) for s in rng.integers(1, 3, size=template.n)])
            graph, fine = blow_up(middle, [int(s) for s in rng.integers(1, 3, size=middle.n)])
            coarse = Partition.from_assignment(
                [coarse_on_middle.block_of(fine.block_of(node)) for node in range(graph.n)]
            )
            report = check_functoriality(graph, NestedHierarchy(levels=(fine, coarse)), max_elements=TEMPLATE_CAP)
            assert report.passed
            assert len(report.triples) == 1
            assert report.level_sizes == [graph.n, middle.n, template.n]
