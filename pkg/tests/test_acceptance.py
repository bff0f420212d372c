"""Exit criteria, one marked group per criterion.

The terminal summary prints a PASS/FAIL line for each criterion number.
"""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rmcda.aggregation import aggregate_gm, categorize
from rmcda.cli.pipeline import ARTIFACTS, PipelineConfig, run_pipeline
from rmcda.core import (
    OBJECTIVE_METHODS,
    Category,
    CriterionDomain,
    DegenerateDataError,
    IncompatibleMethodError,
    NormalizedMatrix,
    Scheme,
    Sense,
    WeightMethod,
    make_weights,
)
from rmcda.normalize import normalize_linear_scale, normalize_minmax, normalize_vector
from rmcda.ranking import mean_ranks, rank_rtopsis, rank_saw, rank_topsis, rank_wp
from rmcda.robustness import cluster_methods, select_stable_methods, stability_sweep
from rmcda.weighting import WEIGHTING, compute_weights, weights_entropy, weights_merec
from reference import (
    BEST_SCORES,
    CATEGORY_RATIOS,
    CATEGORY_SHARES,
    GM_RATIO,
    GM_WEIGHTS,
    IDS,
    MEAN_RANKS,
    RANKS,
    VECTOR_NORMALIZED,
    WEIGHT_RATIOS,
    WEIGHTS,
)
from strategies import make_matrix, matrices

SD, COV, ENT, CRI, MER = OBJECTIVE_METHODS
CATS = (Category.ENVIRONMENT, Category.COST, Category.PERFORMANCE)
PROPERTY_CASES = 200


# 1 -----------------------------------------------------------------------------

@pytest.mark.acceptance(1, "vector normalization reproduces the reference table within 1e-4")
def test_c1_vector_normalization(fixture_matrix):
    N = normalize_vector(fixture_matrix)
    assert N.shape == VECTOR_NORMALIZED.shape
    assert np.max(np.abs(N.values - VECTOR_NORMALIZED)) <= 1e-4


# 2 -----------------------------------------------------------------------------

@pytest.mark.acceptance(2, "objective weights and max/min ratios reproduce the reference")
@pytest.mark.parametrize("method", ["SD", "COV", "Entropy", "CRITIC"])
def test_c2_weights(fixture_vector, method):
    w = compute_weights(fixture_vector, method)
    assert np.max(np.abs(w.weights - WEIGHTS[method])) <= 1e-3
    assert abs(w.diagnostics.max_min_ratio - WEIGHT_RATIOS[method]) <= 0.02


@pytest.mark.acceptance(2, "objective weights and max/min ratios reproduce the reference")
def test_c2_merec(fixture_vector):
    w = weights_merec(fixture_vector)
    assert np.max(np.abs(w.weights - WEIGHTS["MEREC"])) <= 5e-3
    assert IDS[int(np.argmax(w.weights))] == "C10" and IDS[int(np.argmin(w.weights))] == "C8"
    assert abs(w.diagnostics.max_min_ratio - WEIGHT_RATIOS["MEREC"]) <= 0.02


# 3 -----------------------------------------------------------------------------

@pytest.mark.acceptance(3, "geometric-mean aggregation and categorical shares")
def test_c3_gm_of_reference_columns():
    inputs = [make_weights(np.array(WEIGHTS[m]), WeightMethod(m)) for m in ("SD", "COV", "MEREC")]
    gm = aggregate_gm(inputs)
    assert np.max(np.abs(gm.weights - GM_WEIGHTS)) <= 1e-3
    assert abs(gm.diagnostics.max_min_ratio - GM_RATIO) <= 0.01


@pytest.mark.acceptance(3, "geometric-mean aggregation and categorical shares")
def test_c3_categorical_shares(fixture_matrix, gm_weights):
    for method in ("SD", "COV", "MEREC"):
        s = categorize(make_weights(np.array(WEIGHTS[method]), WeightMethod(method)),
                       fixture_matrix.criteria)
        assert np.max(np.abs(np.array([s.shares[c] for c in CATS]) - CATEGORY_SHARES[method])) <= 0.1
    s = categorize(gm_weights, fixture_matrix.criteria)
    assert np.max(np.abs(np.array([s.shares[c] for c in CATS]) - CATEGORY_SHARES["GM"])) <= 0.1
    assert abs(s.max_min_ratio - CATEGORY_RATIOS["GM"]) <= 0.02


# 4 -----------------------------------------------------------------------------

@pytest.mark.acceptance(4, "rankings, best scores and mean ranks with aggregated weights")
def test_c4_rankings(fixture_matrix, fixture_vector, gm_weights):
    results = {
        "SAW": rank_saw(fixture_vector, gm_weights),
        "WP": rank_wp(fixture_vector, gm_weights),
        "TOPSIS": rank_topsis(fixture_vector, gm_weights),
        "R-TOPSIS": rank_rtopsis(fixture_matrix, gm_weights),
    }
    for name, r in results.items():
        assert r.ranks.tolist() == RANKS[name], name
    assert abs(results["SAW"].scores[7] - BEST_SCORES["SAW"]) <= 1e-3
    assert results["WP"].scores[7] == 1.0
    assert abs(results["TOPSIS"].scores[7] - BEST_SCORES["TOPSIS"]) <= 1e-3
    mean, _ = mean_ranks(list(results.values()))
    assert np.max(np.abs(mean - MEAN_RANKS)) <= 1e-12


# 5 -----------------------------------------------------------------------------

@pytest.mark.acceptance(5, "stability ordering, range and score identity under defaults")
def test_c5_stability(default_report):
    cfg = default_report.config
    assert cfg.epsilon_grid[0] == 0.01 and cfg.epsilon_grid[-1] == 0.25
    assert len(cfg.epsilon_grid) == 25 and cfg.iterations_per_level == 1000
    assert default_report.scheme is Scheme.VECTOR
    s = {m: v.mean for m, v in default_report.summary().items()}
    assert s[MER] > max(s[SD], s[COV])
    assert min(s[SD], s[COV]) > max(s[CRI], s[ENT])
    assert s[MER] >= 0.98
    assert abs(s[SD] - s[COV]) <= 0.01
    for r in default_report.records:
        assert 0 < r.score <= 1
        assert r.score == 1.0 / (1.0 + r.mean_relative_change)


@pytest.mark.acceptance(5, "stability ordering, range and score identity under defaults")
def test_c5_minmax_merec_rejected(fixture_matrix):
    with pytest.raises(IncompatibleMethodError):
        stability_sweep(fixture_matrix, OBJECTIVE_METHODS, Scheme.MINMAX)
    with pytest.raises(IncompatibleMethodError, match="MEREC undefined for non-positive normalized value"):
        weights_merec(normalize_minmax(fixture_matrix))


# 6 -----------------------------------------------------------------------------

@pytest.mark.acceptance(6, "Ward clustering and stable-method selection")
def test_c6_clustering(default_report):
    result = cluster_methods(default_report, k=2)
    groups = {frozenset(g) for g in result.clusters()}
    assert groups == {frozenset({SD, COV, MER}), frozenset({ENT, CRI})}
    first = result.merges[0]
    assert {result.methods[first.left], result.methods[first.right]} == {SD, COV}
    assert set(select_stable_methods(result, default_report)) == {MER, SD, COV}


# 7 -----------------------------------------------------------------------------

@pytest.mark.acceptance(7, "R-TOPSIS closeness is unaffected by removing alternatives")
def test_c7_rtopsis_rank_reversal_free():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        m = int(rng.integers(3, 9))
        n = int(rng.integers(1, 7))
        x = rng.uniform(1.0, 100.0, (m, n))
        senses = [Sense.BENEFIT if b else Sense.COST for b in rng.random(n) < 0.5]
        X = make_matrix(x, senses)
        lo = rng.uniform(0.0, 1.0, n)
        domains = [CriterionDomain(float(a), float(b)) for a, b in zip(lo, rng.uniform(100.0, 200.0, n))]
        w = make_weights(rng.uniform(0.05, 1.0, n), WeightMethod.AGGREGATED)
        variant = Scheme.RTOPSIS_MAX if rng.random() < 0.5 else Scheme.RTOPSIS_MAXMIN
        full = rank_rtopsis(X, w, domains, variant).scores
        top = int(np.argmax(full))
        for drop in range(m):
            if drop == top:
                continue
            keep = [i for i in range(m) if i != drop]
            cut = rank_rtopsis(X.subset(keep), w, domains, variant).scores
            assert np.array_equal(full[keep], cut)
            assert np.array_equal(np.argsort(-full[keep], kind="stable"), np.argsort(-cut, kind="stable"))


@pytest.mark.acceptance(7, "R-TOPSIS closeness is unaffected by removing alternatives")
def test_c7_classical_topsis_reverses():
    X = make_matrix([[6.0, 5.0], [6.0, 9.0], [3.0, 8.0], [7.0, 1.0]])
    w = make_weights(np.ones(2), WeightMethod.AGGREGATED)
    before = rank_topsis(normalize_vector(X), w).scores
    after = rank_topsis(normalize_vector(X.subset([0, 1, 2])), w).scores
    # dropping the bottom alternative A3 swaps A0 and A2
    assert int(np.argmin(before)) == 3
    assert before[2] > before[0] and after[0] > after[2]


# 8 -----------------------------------------------------------------------------

def _nm(v):
    m, n = v.shape
    return NormalizedMatrix(tuple(f"A{i}" for i in range(m)), make_matrix(np.ones((m, n))).criteria,
                            v, Scheme.VECTOR)


@st.composite
def normalized(draw):
    m = draw(st.integers(3, 8))
    n = draw(st.integers(1, 6))
    v = draw(arrays(np.float64, (m, n), elements=st.floats(0.05, 0.9)))
    for j in range(n):
        v[:, j] += 0.01 * np.asarray(draw(st.permutations(range(m))), dtype=float)
    return v


def _usable(N, method):
    try:
        w = compute_weights(N, method)
    except DegenerateDataError:
        return None
    d = w.diagnostics
    if method is WeightMethod.CRITIC and d.information.sum() <= 1e-9 * d.std.sum():
        return None
    return w


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(normalized())
def test_c8_weight_simplex(v):
    N = _nm(v)
    for method in WEIGHTING:
        w = _usable(N, method)
        if w is not None:
            assert np.all(w.weights >= 0) and abs(w.weights.sum() - 1) <= 1e-9


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(normalized(), st.randoms(use_true_random=False))
def test_c8_weight_permutation(v, rnd):
    perm = list(range(v.shape[1]))
    rnd.shuffle(perm)
    for method in WEIGHTING:
        w = _usable(_nm(v), method)
        if w is not None:
            moved = compute_weights(_nm(v[:, perm]), method).weights
            assert np.max(np.abs(moved - w.weights[perm])) <= 1e-12


def _clear_gaps(s):
    gaps = np.abs(s[:, None] - s[None, :])
    return bool(np.all((gaps == 0) | (gaps > 1e-9)))


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(matrices(min_m=3), st.randoms(use_true_random=False))
def test_c8_rank_permutation(matrix, rnd):
    perm = list(range(matrix.shape[0]))
    rnd.shuffle(perm)
    w = make_weights(np.linspace(1.0, 2.0, matrix.shape[1]), WeightMethod.AGGREGATED)

    def run(X):
        N = normalize_vector(X)
        return [rank_saw(N, w), rank_wp(N, w), rank_topsis(N, w), rank_rtopsis(X, w)]

    try:
        base = run(matrix)
    except DegenerateDataError:
        return
    for a, b in zip(base, run(matrix.subset(perm))):
        assert np.max(np.abs(b.scores - a.scores[perm])) <= 1e-12
        # exact ties can split by one ulp once the summation order changes
        if _clear_gaps(a.scores) and _clear_gaps(b.scores):
            assert b.ranks.tolist() == a.ranks[perm].tolist()


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(matrices())
def test_c8_normalization_range_and_order(matrix):
    x = matrix.values
    for fn in (normalize_vector, normalize_linear_scale, normalize_minmax):
        v = fn(matrix).values
        assert v.min() >= 0 and v.max() <= 1
        for j, c in enumerate(matrix.criteria):
            sign = 1 if c.sense is Sense.BENEFIT else -1
            for a in range(x.shape[0]):
                for b in range(x.shape[0]):
                    if x[a, j] < x[b, j]:
                        assert sign * (v[b, j] - v[a, j]) >= 0


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(matrices(), st.floats(1e-3, 1e3))
def test_c8_scale_invariance(matrix, factor):
    scaled = matrix.with_values(matrix.values * factor)
    for fn in (normalize_vector, normalize_linear_scale, normalize_minmax):
        assert np.max(np.abs(fn(scaled).values - fn(matrix).values)) <= 1e-12


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(normalized(), st.floats(0.05, 1.0))
def test_c8_entropy_constant_column(v, level):
    extended = np.hstack([v, np.full((v.shape[0], 1), level)])
    w = weights_entropy(_nm(extended)).weights
    assert w[-1] == 0.0
    base = weights_entropy(_nm(v)).weights
    assert np.max(np.abs(w[:-1] / w[:-1].sum() - base)) <= 1e-9


@pytest.mark.acceptance(8, "property suites")
@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(st.lists(st.floats(0.5, 2.0), min_size=30, max_size=30))
def test_c8_gm_order_and_contraction_on_fixture(jitter):
    # jittered versions of the fixture's SD, COV and MEREC columns
    j = np.array(jitter).reshape(3, 10) ** 0.1
    inputs = [make_weights(np.array(WEIGHTS[m]) * j[k], WeightMethod.SD)
              for k, m in enumerate(("SD", "COV", "MEREC"))]
    gm = aggregate_gm(inputs).weights
    stack = np.array([v.weights for v in inputs])
    for a in range(10):
        for b in range(10):
            if np.all(stack[:, a] > stack[:, b]):
                assert gm[a] > gm[b]
    ratio = gm.max() / gm.min()
    assert ratio <= max(v.diagnostics.max_min_ratio for v in inputs) + 1e-12


@pytest.mark.acceptance(8, "property suites")
def test_c8_gm_contraction_exact_fixture(gm_weights):
    ratios = [WEIGHT_RATIOS[m] for m in ("SD", "COV", "MEREC")]
    assert gm_weights.diagnostics.max_min_ratio < min(ratios)


# 9 -----------------------------------------------------------------------------

@pytest.mark.acceptance(9, "two runs with one seed give byte-identical artifacts")
def test_c9_determinism(tmp_path):
    reports = []
    for name in ("a", "b"):
        report = run_pipeline(PipelineConfig(out=tmp_path / name))
        reports.append(report)
    a, b = tmp_path / "a", tmp_path / "b"
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        if name == ARTIFACTS["report"]:
            continue
        assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def without_timestamp(path):
        data = json.loads(path.read_text())
        data.pop("generated_at")
        return json.dumps(data, sort_keys=True)

    assert without_timestamp(a / ARTIFACTS["report"]) == without_timestamp(b / ARTIFACTS["report"])
    # the timestamp is the only field allowed to differ
    ra, rb = dict(reports[0]), dict(reports[1])
    ra.pop("generated_at"), rb.pop("generated_at")
    assert json.dumps(ra, sort_keys=True, default=str) == json.dumps(rb, sort_keys=True, default=str)
