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

"""Contrastive losses, synthetic domain shift and training, from Python.

Configs are plain dicts with the same keys as the JSON files used by the
``pcl-lab`` command line tool.
"""

import json

import numpy as np

from . import _core
from ._core import (
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    Error,
    IoError,
    LoadError,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DimensionError",
    "DomainError",
    "Error",
    "IoError",
    "LoadError",
    "LOSS_KINDS",
    "softmax",
    "loss",
    "loss_and_grad",
    "uniformity_regularizer",
    "make_domain_pair",
    "train",
    "run_experiment",
]

LOSS_KINDS = tuple(_core.loss_kinds())


def softmax(logits):
    """Row-wise softmax of a 2-d array."""
    return _core.softmax(np.asarray(logits, dtype=np.float64))


def loss_and_grad(kind, view_a, view_b, *, scale=7.0, symmetrize=True,
                  bce_threshold=0.95, sfcl_threshold=0.95, head_seed=None):
    """Loss value and gradients with respect to both views.

    Inputs are used as given. Probability kinds (PCL, PCL_L2, PCL_MSE, BCE)
    need rows that sum to 1. NTCL uses the identity head unless `head_seed`
    selects a randomly initialized one.
    """
    return _core.loss_and_grad(
        kind, np.asarray(view_a, dtype=np.float64),
        np.asarray(view_b, dtype=np.float64), scale, symmetrize,
        bce_threshold, sfcl_threshold, head_seed)


def loss(kind, view_a, view_b, **kwargs):
    return loss_and_grad(kind, view_a, view_b, **kwargs)[0]


def uniformity_regularizer(probs):
    return _core.uniformity_regularizer(np.asarray(probs, dtype=np.float64))


def make_domain_pair(classes=4, n_per_class=50, seed=0, shift=None):
    """Source and target datasets as dicts of ``points`` and ``labels``.

    `shift` overrides fields of the default benchmark shift.
    """
    source, target = _core.make_domain_pair(
        classes, n_per_class, json.dumps(shift or {}), seed)
    for d in (source, target):
        d["labels"] = np.asarray(d["labels"], dtype=np.int64)
    return source, target


def train(config=None, dataset=None, seed=0):
    """Trains one run and returns its metrics as a dict."""
    return json.loads(_core.train_json(
        json.dumps(config or {}), json.dumps(dataset or {}), seed))


def run_experiment(spec, force=False, jobs=1):
    """Runs an experiment grid and returns its comparison rows."""
    return json.loads(_core.run_experiment_json(json.dumps(spec), force, jobs))
