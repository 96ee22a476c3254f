#
# Copyright 2026 The dpstream Authors
#
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Differentially private synthetic data for turnstile point streams."""

import json

from dpstream._dpstream import (
    Counter,
    counter_error_std,
    privtree_scales,
    relative_error,
    synthesize,
)
from dpstream import _dpstream

__all__ = [
    "Counter",
    "counter_error_std",
    "generate",
    "privtree_scales",
    "relative_error",
    "run_experiment",
    "synthesize",
]


def generate(spec):
    """Returns the (t, x, y, w) events of a generator spec dict."""
    return _dpstream.generate(json.dumps(spec))


def run_experiment(config):
    """Runs an experiment config dict and returns its metric rows."""
    return _dpstream.run_experiment(json.dumps(config))
