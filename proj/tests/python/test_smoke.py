# Copyright 2026 The pcllab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

pcllab = pytest.importorskip("pcllab")


def info_nce(a, b, scale, symmetrize=True):
    def one_way(x, y):
        n = x.shape[0]
        total = 0.0
        for i in range(n):
            pos = scale * x[i] @ y[i]
            terms = [scale * x[i] @ y[j] for j in range(n)]
            terms += [scale * x[i] @ x[k] for k in range(n) if k != i]
            total += np.logaddexp.reduce(terms) - pos
        return total / n

    forward = one_way(a, b)
    return 0.5 * (forward + one_way(b, a)) if symmetrize else forward


def normalize(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@pytest.fixture
def batch():
    rng = np.random.default_rng(7)
    return rng.normal(size=(4, 5)), rng.normal(size=(4, 5))


def test_softmax_rows():
    x = np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])
    p = pcllab.softmax(x)
    expected = np.exp(x) / np.exp(x).sum(axis=1, keepdims=True)
    np.testing.assert_allclose(p, expected, rtol=0, atol=1e-15)


def test_fcl_and_pcl_match_numpy(batch):
    a, b = batch
    assert pcllab.loss("FCL", a, b) == pytest.approx(
        info_nce(normalize(a), normalize(b), 7.0), abs=1e-12)
    pa, pb = pcllab.softmax(a), pcllab.softmax(b)
    assert pcllab.loss("PCL", pa, pb, symmetrize=False) == pytest.approx(
        info_nce(pa, pb, 7.0, symmetrize=False), abs=1e-12)


def test_every_kind_has_a_finite_value(batch):
    a, b = batch
    pa, pb = pcllab.softmax(a), pcllab.softmax(b)
    probability_kinds = {"PCL", "PCL_L2", "PCL_MSE", "BCE"}
    assert len(pcllab.LOSS_KINDS) == 8
    for kind in pcllab.LOSS_KINDS:
        x, y = (pa, pb) if kind in probability_kinds else (a, b)
        assert math.isfinite(pcllab.loss(kind, x, y, head_seed=3)), kind


def test_gradient_matches_central_differences(batch):
    a, b = batch
    value, grad_a, _ = pcllab.loss_and_grad("FCL", a, b, scale=2.0)
    h = 1e-6
    for idx in [(0, 0), (1, 3), (3, 4)]:
        up, down = a.copy(), a.copy()
        up[idx] += h
        down[idx] -= h
        numeric = (pcllab.loss("FCL", up, b, scale=2.0)
                   - pcllab.loss("FCL", down, b, scale=2.0)) / (2 * h)
        assert grad_a[idx] == pytest.approx(numeric, abs=1e-7)
    assert value > 0


def test_uniform_closed_forms():
    n, c = 5, 4
    uniform = np.full((n, c), 1.0 / c)
    assert pcllab.loss("PCL", uniform, uniform) == pytest.approx(
        math.log(2 * n - 1), abs=1e-10)
    assert pcllab.uniformity_regularizer(uniform[:1]) == pytest.approx(
        math.log(c), abs=1e-12)


def test_errors_map_to_exceptions(batch):
    a, b = batch
    with pytest.raises(pcllab.ConfigError):
        pcllab.loss("XCL", a, b)
    with pytest.raises(pcllab.DimensionError):
        pcllab.loss("FCL", a, b[:, :3])
    with pytest.raises(pcllab.ContractError):
        pcllab.loss("PCL", a, b)
    assert issubclass(pcllab.ConfigError, pcllab.Error)


def test_domain_pair_is_seeded():
    source, target = pcllab.make_domain_pair(classes=3, n_per_class=10, seed=4)
    assert source["points"].shape == (30, 2)
    assert sorted(np.bincount(target["labels"])) == [10, 10, 10]
    again = pcllab.make_domain_pair(classes=3, n_per_class=10, seed=4)[1]
    np.testing.assert_array_equal(target["points"], again["points"])
    _, same = pcllab.make_domain_pair(
        classes=3, n_per_class=10, seed=4,
        shift={"rotation": 0.0, "translation": [0.0, 0.0]})
    assert np.abs(same["points"]).max() < 10


def test_train_reports_intervals():
    config = {"loss": {"kind": "PCL"}, "steps": 30, "eval_interval": 10,
              "probe": {"steps": 20}}
    run = pcllab.train(config, {"n_per_class": 20}, seed=1)
    assert [r["step"] for r in run["intervals"]] == [10, 20, 30]
    assert not run["diverged"]
    assert 0.0 <= run["final"]["target_accuracy"] <= 1.0
    assert run == pcllab.train(config, {"n_per_class": 20}, seed=1)


def test_run_experiment_caches_cells(tmp_path):
    spec = {"name": "smoke", "seeds": [0],
            "dataset": {"n_per_class": 10},
            "train": {"steps": 10, "probe": {"steps": 10}},
            "grid": [{"kind": "Baseline"}, {"kind": "PCL"}],
            "output_dir": str(tmp_path)}
    first = pcllab.run_experiment(spec, jobs=2)
    assert first["all_ok"] and first["cells_trained"] == 2
    assert {r["label"] for r in first["rows"]} == {"Baseline", "PCL"}
    second = pcllab.run_experiment(spec)
    assert second["cells_trained"] == 0 and second["cells_cached"] == 2
    assert (tmp_path / "smoke" / "comparison.csv").exists()
