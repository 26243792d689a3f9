import numpy as np
import pytest

from zoprox import (
    ClassificationInstance,
    DatasetParseError,
    InvalidParameterError,
    Oracle,
    estimate_gradient,
    gen_lasso,
    lasso_blackbox,
    load_libsvm,
    parse_libsvm,
    seeded_rng,
    sigmoid_objective,
    standard_normal,
)


# ---------------------------------------------------------------------------
# LASSO generator
# ---------------------------------------------------------------------------

def test_gen_lasso_deterministic_per_seed():
    a = gen_lasso(n=2, m=1, mu=0.3, seed=202)
    b = gen_lasso(n=2, m=1, mu=0.3, seed=202)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.b, b.b)
    np.testing.assert_array_equal(a.ground_u, b.ground_u)
    c = gen_lasso(n=2, m=1, mu=0.3, seed=203)
    assert not np.array_equal(a.A, c.A)


def test_gen_lasso_benchmark_scale_shapes():
    inst = gen_lasso(n=1000, m=100, mu=0.5, seed=0)
    assert inst.A.shape == (100, 1000)
    assert inst.b.shape == (100,)
    assert inst.ground_u.shape == (1000,)


def test_gen_lasso_noise_free_interpolates():
    inst = gen_lasso(n=6, m=4, mu=0.1, seed=5, noise_scale=0.0)
    model = lasso_blackbox(inst)
    assert Oracle(model).blackbox_value(inst.ground_u) == 0.0


def test_gen_lasso_standard_normal_statistics():
    inst = gen_lasso(n=100, m=100, mu=0.1, seed=12)
    entries = inst.A.ravel()
    assert entries.size == 10_000
    assert abs(float(entries.mean())) < 0.05
    assert abs(float(entries.var()) - 1.0) < 0.1


def test_standard_normal_reproducible_and_shaped():
    a = standard_normal(seeded_rng(4, 1), (3, 5))
    b = standard_normal(seeded_rng(4, 1), (3, 5))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (3, 5)
    assert standard_normal(seeded_rng(4, 1), 7).shape == (7,)


def test_gen_lasso_rejects_bad_arguments():
    with pytest.raises(InvalidParameterError):
        gen_lasso(n=0, m=1, mu=0.1, seed=0)
    with pytest.raises(InvalidParameterError):
        gen_lasso(n=1, m=1, mu=-0.1, seed=0)


# ---------------------------------------------------------------------------
# LASSO objective model
# ---------------------------------------------------------------------------

def test_lasso_blackbox_values():
    inst = gen_lasso(n=5, m=3, mu=0.7, seed=1)
    oracle = Oracle(lasso_blackbox(inst))
    assert oracle.blackbox_value(np.zeros(5)) == pytest.approx(0.5 * float(inst.b @ inst.b))

    ident = lasso_blackbox(
        type(inst)(A=np.eye(2), b=np.ones(2), mu=1.0, ground_u=np.ones(2))
    )
    x = np.ones(2)
    h = Oracle(ident).blackbox_value(x) + ident.regularizer.value(x)
    assert h == 2.0


def test_lasso_gradient_matches_analytic():
    inst = gen_lasso(n=8, m=5, mu=0.2, seed=3)
    model = lasso_blackbox(inst)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(8)
    batch = Oracle(model).sample_batch(x, 0.3)
    grad = estimate_gradient(batch)
    want = inst.A.T @ (inst.A @ x - inst.b)
    assert np.linalg.norm(grad - want) <= 1e-10 * max(np.linalg.norm(want), 1.0)


def test_lasso_fast_paths_agree_with_pointwise():
    inst = gen_lasso(n=6, m=4, mu=0.2, seed=7)
    model = lasso_blackbox(inst)
    plain = type(model)(dimension=6, blackbox=model.blackbox, regularizer=model.regularizer)
    x = standard_normal(seeded_rng(7, 1), 6)
    fast = Oracle(model).sample_batch(x, 0.25)
    slow = Oracle(plain).sample_batch(x, 0.25)
    scale = max(1.0, abs(slow.value_center))
    np.testing.assert_allclose(fast.values_plus, slow.values_plus, rtol=0, atol=1e-9 * scale)
    np.testing.assert_allclose(fast.values_minus, slow.values_minus, rtol=0, atol=1e-9 * scale)
    assert fast.value_center == pytest.approx(slow.value_center, abs=1e-9 * scale)

    points = np.vstack([x, x + 0.1, x - 0.3])
    np.testing.assert_allclose(
        model.blackbox_batch(points),
        [model.blackbox(p) for p in points],
        rtol=1e-12,
    )


# ---------------------------------------------------------------------------
# LIBSVM parser
# ---------------------------------------------------------------------------

def test_parse_single_line_example():
    ds = parse_libsvm("+1 3:1 11:1")
    assert ds.n_samples == 1
    assert ds.n_features == 11
    label, feats = next(ds.rows())
    assert label == 1
    assert feats == [(3, 1.0), (11, 1.0)]


def test_parse_empty_input():
    ds = parse_libsvm("")
    assert ds.n_samples == 0
    assert ds.n_features == 0
    assert ds.serialize() == ""


def test_parse_skips_blanks_and_comments():
    text = "\n# a comment line\n+1 1:2.5   # trailing comment\n\n-1 2:-1\n"
    ds = parse_libsvm(text)
    assert ds.n_samples == 2
    assert list(ds.labels) == [1, -1]
    assert ds.n_features == 2


def test_label_conventions():
    ds = parse_libsvm("1 1:1\n0 1:1\n-1 1:1\n+1 1:1")
    assert list(ds.labels) == [1, -1, -1, 1]
    with pytest.raises(DatasetParseError) as excinfo:
        parse_libsvm("+1 1:1\n2 1:1")
    assert excinfo.value.line_number == 2


def test_parse_error_cases_carry_line_numbers():
    cases = [
        ("+1 3:1 2:1", "strictly increasing"),
        ("+1 3:1 3:2", "strictly increasing"),
        ("+1 0:1", ">= 1"),
        ("+1 x:1", "not an integer"),
        ("+1 1:abc", "not a number"),
        ("+1 31", "lacks ':'"),
        ("abc 1:1", "not a number"),
        ("+1 1:inf", "not finite"),
    ]
    for text, match in cases:
        with pytest.raises(DatasetParseError, match=match) as excinfo:
            parse_libsvm("-1 1:1\n" + text)
        assert excinfo.value.line_number == 2


def test_n_features_override():
    ds = parse_libsvm("+1 2:1", n_features=10)
    assert ds.n_features == 10
    assert ds.feature_matrix().shape == (1, 10)
    with pytest.raises(InvalidParameterError):
        parse_libsvm("+1 12:1", n_features=10)


def test_label_only_row_is_valid():
    ds = parse_libsvm("+1\n-1 1:3.5")
    assert ds.n_samples == 2
    label, feats = next(ds.rows())
    assert label == 1 and feats == []


def test_round_trip_small_fuzz():
    rng = np.random.default_rng(99)
    for _ in range(200):
        ds = _random_dataset(rng)
        again = parse_libsvm(ds.serialize())
        _assert_datasets_equal(ds, again)


def _random_dataset(rng):
    rows = []
    for _ in range(int(rng.integers(0, 6))):
        label = "+1" if rng.random() < 0.5 else "-1"
        count = int(rng.integers(0, 6))
        idx = np.sort(rng.choice(np.arange(1, 30), size=count, replace=False))
        feats = " ".join(f"{int(i)}:{repr(float(v))}" for i, v in zip(idx, rng.standard_normal(count) * 10))
        rows.append(f"{label} {feats}".strip())
    return parse_libsvm("\n".join(rows))


def _assert_datasets_equal(a, b):
    assert a.n_samples == b.n_samples
    assert a.n_features == b.n_features
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.indptr, b.indptr)
    np.testing.assert_array_equal(a.indices, b.indices)
    np.testing.assert_array_equal(a.values, b.values)


def test_load_libsvm_from_file(tmp_path):
    path = tmp_path / "tiny.libsvm"
    path.write_text("+1 1:1 3:2\n-1 2:0.5\n", encoding="utf-8")
    ds = load_libsvm(path)
    assert ds.n_samples == 2
    assert ds.n_features == 3


# ---------------------------------------------------------------------------
# Sigmoid classification objective
# ---------------------------------------------------------------------------

def small_instance(lam=1e-3, mu=1e-3):
    ds = parse_libsvm("+1 1:1 3:-2\n-1 2:1.5\n+1 1:-0.5 2:1 3:1\n-1 3:2")
    return ClassificationInstance(dataset=ds, lam=lam, mu=mu)


def test_sigmoid_value_at_zero_is_half():
    model = sigmoid_objective(small_instance())
    assert Oracle(model).blackbox_value(np.zeros(3)) == pytest.approx(0.5, abs=1e-15)


def test_sigmoid_single_sample_limit():
    ds = parse_libsvm("+1 1:1")
    model = sigmoid_objective(ClassificationInstance(dataset=ds, lam=0.0, mu=0.0))
    oracle = Oracle(model)
    assert oracle.blackbox_value(np.array([40.0])) < 1e-15
    assert oracle.blackbox_value(np.array([-40.0])) == pytest.approx(1.0, abs=1e-15)
    # far negative margins stay finite thanks to the stable sigmoid form
    assert np.isfinite(oracle.blackbox_value(np.array([-1e4])))


def test_sigmoid_default_weights_build():
    model = sigmoid_objective(small_instance(lam=1e-3, mu=1e-3))
    assert model.known_smooth is not None
    assert model.regularizer.mu == 1e-3


def test_fold_l2_modes_agree():
    inst = small_instance(lam=0.05, mu=0.01)
    analytic = sigmoid_objective(inst, fold_l2=False)
    folded = sigmoid_objective(inst, fold_l2=True)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.standard_normal(3) * 2
        h_analytic = Oracle(analytic).evaluate(x) + analytic.regularizer.value(x)
        h_folded = Oracle(folded).evaluate(x) + folded.regularizer.value(x)
        assert abs(h_analytic - h_folded) <= 1e-12


def test_sigmoid_fast_paths_agree_with_pointwise():
    for fold in (False, True):
        model = sigmoid_objective(small_instance(lam=0.02, mu=0.0), fold_l2=fold)
        plain = type(model)(
            dimension=3,
            blackbox=model.blackbox,
            regularizer=model.regularizer,
            known_smooth=model.known_smooth,
        )
        x = np.array([0.4, -1.0, 0.3])
        fast = Oracle(model).sample_batch(x, 0.2)
        slow = Oracle(plain).sample_batch(x, 0.2)
        np.testing.assert_allclose(fast.values_plus, slow.values_plus, atol=1e-14)
        np.testing.assert_allclose(fast.values_minus, slow.values_minus, atol=1e-14)
        assert fast.value_center == pytest.approx(slow.value_center, abs=1e-14)

        points = np.vstack([x, -x, 0.5 * x])
        np.testing.assert_allclose(
            model.blackbox_batch(points),
            [model.blackbox(p) for p in points],
            atol=1e-14,
        )


def test_classification_instance_rejects_negative_weights():
    ds = parse_libsvm("+1 1:1")
    with pytest.raises(InvalidParameterError):
        ClassificationInstance(dataset=ds, lam=-1.0, mu=0.0)


def test_lasso_instance_constants():
    inst = gen_lasso(n=10, m=4, mu=0.1, seed=2)
    gram = inst.A.T @ inst.A
    assert inst.smooth_lipschitz() == pytest.approx(float(np.linalg.eigvalsh(gram)[-1]))
    assert inst.hess_diag_bound() == pytest.approx(float(np.max(np.diag(gram))))
