import numpy as np
import pytest
from oracles import all_ncuts, brute_min_ncut, ncut_loops, random_connected_graph

from econcomplex import (
    IncidenceMatrix,
    Partition,
    SymmetricSimilarity,
    brute_force_min_ncut,
    build_mtilde,
    build_similarity,
    cut_value,
    eci,
    eigengap,
    eigenpairs,
    fiedler,
    min_ncut_ties,
    ncut_value,
    normalized_laplacian,
    partition_from_scores,
    rayleigh_quotient,
    volume,
)
from econcomplex.errors import DataError, DegenerateSpectrumError
from econcomplex.graph_partition import degree, degrees
from econcomplex.spectral_core import spectral_scores
from econcomplex.synth import planted_two_block_graph

TWO_PAIRS = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)


@pytest.fixture
def s1(m1):
    return build_similarity(m1, "actor")


def test_degree_and_volume(s1):
    np.testing.assert_allclose(degrees(s1), [2, 1, 2])
    assert degree(s1, 1) == pytest.approx(1)
    assert volume(s1, [0, 2]) == pytest.approx(4)
    assert volume(s1, np.ones(3, dtype=bool)) == pytest.approx(s1.S.sum())


def test_cut_examples(s1):
    assert cut_value(TWO_PAIRS, [0, 1]) == 0
    assert ncut_value(TWO_PAIRS, [0, 1]) == 0
    assert cut_value(TWO_PAIRS, [0, 2]) == 2
    assert ncut_value(TWO_PAIRS, [0, 2]) == pytest.approx(2)
    part = Partition([True, False, False], s1.labels)
    assert cut_value(s1, part) == pytest.approx(2 / 3)
    assert ncut_value(s1, part) == pytest.approx(5 / 9)


def test_cut_errors():
    with pytest.raises(DataError):
        cut_value(TWO_PAIRS, [0, 1, 2, 3])
    with pytest.raises(DataError):
        ncut_value(TWO_PAIRS, np.zeros(4, dtype=bool))
    S = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
    with pytest.raises(DataError):
        ncut_value(S, [2])


def test_ncut_symmetry_and_scale():
    rng = np.random.default_rng(0)
    for _ in range(20):
        W = random_connected_graph(rng)
        a = rng.random(W.shape[0]) < 0.5
        if a.all() or not a.any():
            continue
        assert ncut_value(W, a) == ncut_value(W, ~a)
        assert ncut_value(W, a) == pytest.approx(ncut_loops(W, a), rel=1e-12)
        assert ncut_value(3.7 * W, a) == pytest.approx(ncut_value(W, a), rel=1e-12)


def test_normalized_laplacian(s1):
    L = normalized_laplacian(s1)
    np.testing.assert_allclose(np.linalg.eigvalsh(L), [0, 1 / 2, 5 / 6], atol=1e-12)
    np.testing.assert_allclose(L @ np.sqrt(degrees(s1)), 0, atol=1e-14)
    w = np.linalg.eigvalsh(normalized_laplacian(TWO_PAIRS))
    assert np.sum(np.abs(w) < 1e-12) == 2
    with pytest.raises(DataError):
        normalized_laplacian(np.zeros((2, 2)))


def test_fiedler_m1(m1, s1):
    z2, y2, lam = fiedler(s1)
    assert lam == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(y2, [2 ** -0.5, 0, -(2 ** -0.5)], atol=1e-12)
    np.testing.assert_allclose(y2, eci(m1).raw, atol=1e-10)
    assert abs(y2 @ degrees(s1)) < 1e-12


def test_fiedler_disconnected():
    with pytest.raises(DegenerateSpectrumError) as info:
        fiedler(TWO_PAIRS)
    assert info.value.top_multiplicity == 2


def test_rayleigh(m1, s1):
    assert rayleigh_quotient(s1, eci(m1).raw) == pytest.approx(0.5, abs=1e-12)
    assert rayleigh_quotient(s1, np.ones(3)) == pytest.approx(0, abs=1e-14)
    rng = np.random.default_rng(1)
    d = degrees(s1)
    for _ in range(50):
        y = rng.standard_normal(3)
        y -= (y @ d) / d.sum()
        assert rayleigh_quotient(s1, y) >= 0.5 - 1e-12
    with pytest.raises(DataError):
        rayleigh_quotient(s1, np.zeros(3))


def test_partition_from_eci_m1(m1, s1):
    part = partition_from_scores(eci(m1))
    assert part.side_a == ["A"] and part.side_b == ["B", "C"]
    assert ncut_value(s1, part.complement()) == ncut_value(s1, part)


def test_brute_force_m1(s1):
    part, value = brute_force_min_ncut(s1)
    assert value == pytest.approx(5 / 9)
    ties, best = min_ncut_ties(s1)
    assert [t.side_a for t in ties] == [["A"], ["A", "B"]]
    assert [t.side_b for t in ties] == [["B", "C"], ["C"]]
    # {B} | {A, C}
    assert ncut_value(s1, [1]) == pytest.approx(5 / 6)


def test_brute_force_two_pairs():
    part, value = brute_force_min_ncut(TWO_PAIRS)
    assert value == 0
    assert part.side_a == ["0", "1"]


def test_brute_force_matches_loop_oracle():
    rng = np.random.default_rng(2)
    for _ in range(10):
        W = random_connected_graph(rng, n_max=9)
        _, value = brute_force_min_ncut(W)
        assert value == pytest.approx(brute_min_ncut(W), rel=1e-12)


def test_brute_force_cap():
    with pytest.raises(DataError):
        brute_force_min_ncut(np.ones((21, 21)))


def test_spectral_ncut_between_optimum_and_median():
    rng = np.random.default_rng(3)
    for _ in range(30):
        W = random_connected_graph(rng)
        S = SymmetricSimilarity.from_array(W)
        part = partition_from_scores(spectral_scores(S))
        val = ncut_value(S, part)
        cuts = all_ncuts(W)
        assert val >= cuts.min() - 1e-12
        assert val <= np.median(cuts) + 1e-12


def test_planted_blocks_zero_cross():
    for seed in range(5):
        S, truth = planted_two_block_graph(5, 7, cross=0.0, seed=seed)
        with pytest.warns(UserWarning):
            scores = spectral_scores(S)
        part = partition_from_scores(scores)
        assert ncut_value(S, part) == 0
        assert np.array_equal(part.assignment, truth) or np.array_equal(part.assignment, ~truth)


def test_planted_50_50_beats_random_balanced():
    S, truth = planted_two_block_graph(50, 50, p_in=0.3, cross=1.0, p_cross=0.02, seed=4)
    part = partition_from_scores(spectral_scores(S))
    spectral = ncut_value(S, part)
    rng = np.random.default_rng(4)
    for _ in range(1000):
        a = np.zeros(100, dtype=bool)
        a[rng.choice(100, 50, replace=False)] = True
        assert spectral <= ncut_value(S, a)


def test_degenerate_partition_needs_two_components():
    M = np.zeros((6, 6), dtype=int)
    for b in range(3):
        M[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = [[1, 1], [1, 0]]
    inc = IncidenceMatrix.from_array(M)
    with pytest.warns(UserWarning):
        scores = eci(inc)
    assert scores.top_multiplicity == 3
    with pytest.raises(DegenerateSpectrumError):
        partition_from_scores(scores)


def test_eigengap_examples(m1):
    rep = eigengap(eigenpairs(build_mtilde(m1), k=3))
    np.testing.assert_allclose(rep.gaps, [1 / 2, 1 / 3], atol=1e-12)
    assert rep.suggested_k == 1
    assert rep.source == "mtilde"
    M = np.kron(np.eye(3, dtype=int), np.array([[1, 1], [0, 1]]))
    sp = eigenpairs(build_mtilde(IncidenceMatrix.from_array(M)), k=6)
    assert eigengap(sp, kmax=5).suggested_k == 3


def test_eigengap_needs_values(m1):
    with pytest.raises(DataError):
        eigengap(eigenpairs(build_mtilde(m1), k=2), kmax=3)
