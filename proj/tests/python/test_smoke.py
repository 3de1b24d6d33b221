import math

import numpy as np
import pytest

import a2c


def gaussian_partition(seed=3):
    ds = a2c.gaussian_dataset(classes=5, per_class=60, dimension=5, separation=8.0, seed=seed)
    return ds, a2c.partition(ds, ["c0", "c1"], ["c2"], ["c3", "c4"], seed=seed)


def test_exports():
    assert a2c.__version__
    assert math.isclose(a2c.resolve_probability("3"), 0.9)
    assert a2c.resolve_probability("none") == 0.0


def test_partition_sizes():
    ds, p = gaussian_partition()
    assert len(ds) == 300
    assert (len(p.d_a), len(p.d_b), len(p.d_c)) == (120, 60, 120)
    assert len(p.a_train) == 96 and len(p.a_test) == 24
    assert "a.count = 120" in p.manifest()


def test_fit_save_load(tmp_path):
    ds, p = gaussian_partition()
    x = ds.features()
    labels = ds.labels()
    rejector = a2c.fit_rejector(x[p.a_train], "knn-distance", k=3).calibrate(x[p.a_train], 0.05)
    assert rejector.theta_r is not None
    accepted = rejector.accept(x[p.d_b])
    assert sum(accepted) == 0

    targets = [labels[i] for i in p.a_train]
    clf = a2c.fit_classifier(x[p.a_train], targets, 2, epochs=50)
    probs = clf.predict_proba(x[p.a_test])
    assert probs.shape == (24, 2)
    assert np.allclose(probs.sum(axis=1), 1.0)
    assert clf.loss_curve[-1] < clf.loss_curve[0]

    a2c.save_model(rejector, tmp_path / "r.model")
    back = a2c.load_model(tmp_path / "r.model")
    assert back.kind == "knn-distance"
    assert back.theta_r == rejector.theta_r

    (tmp_path / "bad.model").write_text("A2CMODL1\nkind = rejector\nchecksum = 00000000\nk = 1\n")
    with pytest.raises(a2c._core.CorruptionError):
        a2c.load_model(tmp_path / "bad.model")


def test_metrics_and_oracle():
    assert a2c.micro_f1([0, 1, 2, 2], [0, 1, None, 1]) == 0.5
    value = a2c.expected_grid_oracle(1.0, 1.0, 1.0, 1.0, 100, 100, 100, tier=2, rate="none")
    assert math.isclose(value, 2 / 3)
    scores = [a2c.score_outcome(o, "intrusion") for o in ["normal", "caution", "caution", "intrusion", "intrusion", "normal", "normal"]]
    assert round(100 * a2c.coex_success_rate(scores), 1) == 42.9


def test_grid_matches_oracle_where_draws_do_not_matter():
    ds, p = gaussian_partition()
    x = ds.features()
    labels = ds.labels()
    rejector = a2c.fit_rejector(x[p.a_train]).calibrate(x[p.a_train], 0.05)
    clf = a2c.fit_classifier(x[p.a_train], [labels[i] for i in p.a_train], 2, epochs=50)
    grid = a2c.run_grid(p, rejector, clf, seed=5, stratified=True)
    assert len(grid["cells"]) == 15
    r = grid["rates"]
    for (tier, rate), value in grid["cells"].items():
        if rate not in ("none", "4"):
            continue
        expected = a2c.expected_grid_oracle(r["p_acc_A"], r["p_def_B"], r["p_def_C"], r["a_known"], *grid["sizes"], tier=tier, rate=rate)
        assert math.isclose(value, expected, abs_tol=1e-12)


def test_belief_loop():
    out = a2c.run_belief_loop(2, [([0.9, 0.1], [0.8, 0.2])] * 4, tau=0.9)
    assert out["consensus"] and out["label"] == 0


def test_run_command_usage():
    code, out, err = a2c.run_command(["no-such-command"])
    assert code == 2
    assert err
