import warnings

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import general_eig, mtilde_loops

from econcomplex import (
    CovariateTable,
    IncidenceMatrix,
    RawBipartitePanel,
    binarize,
    build_mhat,
    build_mtilde,
    build_similarity,
    compute_rca,
    compute_rca_pop,
    cut_value,
    diffusion_coordinates,
    eci,
    eigenpairs,
    ncut_value,
    parse_panel,
    pci,
    prune,
    rayleigh_quotient,
)
from econcomplex.errors import TooDegenerateError

SETTINGS = settings(max_examples=60, deadline=None,
                    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])


@st.composite
def panels(draw, max_side=7):
    n_a = draw(st.integers(2, max_side))
    n_i = draw(st.integers(2, max_side))
    values = draw(arrays(float, (n_a, n_i), elements=st.sampled_from([0.0, 0.5, 1.0, 2.5, 7.0, 40.0])))
    assume(values.sum(axis=1).min() > 0 and values.sum(axis=0).min() > 0)
    return RawBipartitePanel(tuple(f"a{i}" for i in range(n_a)),
                             tuple(f"i{j}" for j in range(n_i)), values)


@st.composite
def connected_incidence(draw, max_side=9, min_gap=1e-6):
    n_a = draw(st.integers(3, max_side))
    n_i = draw(st.integers(3, max_side))
    M = draw(arrays(np.int64, (n_a, n_i), elements=st.integers(0, 1)))
    try:
        inc, _ = prune(IncidenceMatrix.from_array(M))
    except Exception:
        assume(False)
    assume(min(inc.shape) >= 3)
    w = np.sort(np.linalg.eigvals(mtilde_loops(inc.M)).real)[::-1]
    assume(w[0] - w[1] > min_gap and w[1] - w[2] > min_gap)
    return inc


def quiet(fn, *a, **k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **k)


@SETTINGS
@given(panels())
def test_parse_round_trip(panel):
    again, _ = parse_panel(panel.to_csv())
    assert again.actor_labels == panel.actor_labels
    assert again.item_labels == panel.item_labels
    np.testing.assert_array_equal(again.values, panel.values)
    twice, _ = parse_panel(again.to_csv())
    assert twice.to_csv() == again.to_csv()


@SETTINGS
@given(panels(), st.randoms(use_true_random=False))
def test_row_order_does_not_change_values(panel, rnd):
    lines = panel.to_csv().splitlines()
    body = lines[1:]
    rnd.shuffle(body)
    shuffled, _ = parse_panel("\n".join([lines[0], *body]) + "\n")
    order_a = [shuffled.actor_labels.index(a) for a in panel.actor_labels]
    order_i = [shuffled.item_labels.index(i) for i in panel.item_labels]
    np.testing.assert_array_equal(shuffled.values[np.ix_(order_a, order_i)], panel.values)


@SETTINGS
@given(panels(), st.floats(1e-3, 1e3))
def test_rca_scale_invariance_and_row_mean(panel, alpha):
    s = compute_rca(panel).scores
    scaled = RawBipartitePanel(panel.actor_labels, panel.item_labels, alpha * panel.values)
    np.testing.assert_allclose(compute_rca(scaled).scores, s, rtol=1e-12)
    assert np.all(s >= 0) and np.all(np.isfinite(s))
    share = panel.values.sum(axis=0) / panel.values.sum()
    np.testing.assert_allclose(s @ share, 1.0, rtol=1e-12)


@SETTINGS
@given(panels(), st.lists(st.floats(0.5, 50), min_size=7, max_size=7))
def test_rca_pop_nonnegative(panel, pops):
    pop = CovariateTable(panel.actor_labels, pops[: panel.shape[0]], "population")
    s = compute_rca_pop(panel, pop).scores
    assert np.all(s >= 0) and np.all(np.isfinite(s))


@SETTINGS
@given(panels(), st.lists(st.floats(0, 4), min_size=2, max_size=5))
def test_binarize_monotone_and_caches(panel, thresholds):
    s = compute_rca(panel)
    prev = None
    for th in sorted(thresholds):
        inc = binarize(s, th)
        assert set(np.unique(inc.M)) <= {0, 1}
        np.testing.assert_array_equal(inc.diversity, inc.M.sum(axis=1))
        np.testing.assert_array_equal(inc.ubiquity, inc.M.sum(axis=0))
        if prev is not None:
            assert np.all(inc.M <= prev)
        prev = inc.M
        try:
            pruned, rep = prune(inc)
        except TooDegenerateError:
            continue
        assert pruned.diversity.min() >= 1 and pruned.ubiquity.min() >= 1
        assert rep.n_actors_after == pruned.shape[0] and rep.n_items_after == pruned.shape[1]


@SETTINGS
@given(connected_incidence())
def test_stochastic_and_similarity(inc):
    for T in (build_mtilde(inc), build_mhat(inc)):
        P = T.T
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
        assert P.min() >= 0
    S = build_similarity(inc, "actor")
    assert np.array_equal(S.S, S.S.T)
    # exact in rational arithmetic; sums of fractions such as 1/3 round
    np.testing.assert_allclose(S.S.sum(axis=1), inc.diversity, rtol=1e-13)
    np.testing.assert_array_equal(S.degrees, inc.diversity)
    assert np.linalg.eigvalsh(S.S).min() >= -1e-10


@SETTINGS
@given(connected_incidence())
def test_spectrum_equality_and_residuals(inc):
    k = min(inc.shape)
    a = eigenpairs(build_mtilde(inc), k=inc.shape[0])
    b = eigenpairs(build_mhat(inc), k=inc.shape[1])
    np.testing.assert_allclose(a.eigenvalues[:k], b.eigenvalues[:k], atol=1e-8)
    for sp in (a, b):
        assert np.all(np.diff(sp.eigenvalues) <= 0)
        assert sp.eigenvalues.min() >= -1e-10 and sp.eigenvalues.max() <= 1 + 1e-10
    T = build_mtilde(inc).T
    for lam, y in zip(a.eigenvalues, a.eigenvectors.T):
        assert np.linalg.norm(T @ y - lam * y) <= 1e-10 * max(np.linalg.norm(T, 2), 1)


@SETTINGS
@given(connected_incidence())
def test_eci_constraint_average_pci_and_rayleigh(inc):
    e = eci(inc)
    p = pci(inc, eci_scores=e)
    d = inc.diversity.astype(float)
    assert abs(e.raw @ d) <= 1e-8 * np.linalg.norm(e.raw) * np.linalg.norm(d)
    np.testing.assert_allclose(e.standardized.mean(), 0, atol=1e-12)
    np.testing.assert_allclose(e.standardized.std(), 1, atol=1e-12)
    avg = (inc.M @ p.raw) / d
    avg /= np.linalg.norm(avg)
    np.testing.assert_allclose(avg, e.raw / np.linalg.norm(e.raw), atol=1e-8)
    S = build_similarity(inc, "actor")
    assert abs(rayleigh_quotient(S, e.raw) - (1 - e.eigenvalue)) <= 1e-10
    w, _ = general_eig(mtilde_loops(inc.M))
    assert abs(e.eigenvalue - w[1]) <= 1e-9


@SETTINGS
@given(connected_incidence(), st.randoms(use_true_random=False))
def test_label_permutation_equivariance(inc, rnd):
    pr = list(range(inc.shape[0]))
    pc = list(range(inc.shape[1]))
    rnd.shuffle(pr)
    rnd.shuffle(pc)
    perm = IncidenceMatrix(
        tuple(inc.actor_labels[i] for i in pr),
        tuple(inc.item_labels[j] for j in pc),
        inc.M[np.ix_(pr, pc)],
    )
    base_e, base_p = eci(inc), pci(inc)
    e, p = eci(perm), pci(perm)
    np.testing.assert_allclose(e.raw, base_e.raw[pr], atol=1e-8)
    np.testing.assert_allclose(p.raw, base_p.raw[pc], atol=1e-8)
    assert np.array_equal(eci(inc).raw, base_e.raw)


@SETTINGS
@given(connected_incidence(), st.integers(1, 2 ** 20), st.floats(0.01, 100))
def test_ncut_complement_and_scaling(inc, mask_bits, alpha):
    S = build_similarity(inc, "actor").S
    n = S.shape[0]
    a = np.array([(mask_bits >> i) & 1 for i in range(n)], dtype=bool)
    assume(a.any() and not a.all())
    assert ncut_value(S, a) == ncut_value(S, ~a)
    np.testing.assert_allclose(ncut_value(alpha * S, a), ncut_value(S, a), rtol=1e-12)
    # the cut itself scales with S
    np.testing.assert_allclose(cut_value(alpha * S, a), alpha * cut_value(S, a), rtol=1e-12)


@SETTINGS
@given(connected_incidence(max_side=8))
def test_embedding_orthogonal_and_monotone(inc):
    n = inc.shape[0]
    sp = eigenpairs(build_mtilde(inc), k=n)
    d = inc.diversity.astype(float)
    prev = None
    for t in range(4):
        C = quiet(diffusion_coordinates, sp, t, n - 1).coordinates
        G = C.T @ (d[:, None] * C)
        off = G - np.diag(np.diag(G))
        assert np.abs(off).max() <= 1e-8 * max(1.0, np.abs(G).max())
        if prev is not None:
            assert np.all(np.abs(C) <= np.abs(prev) + 1e-15)
        prev = C
