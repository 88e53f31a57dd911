# Copyright 2026 The judgetune Authors.
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

"""Multi-objective tuning of LLM-judge configurations."""

import json

from judgetune._core import (
    ConfigError,
    DataError,
    TransportError,
    UndefinedMetricError,
    average_ranks,
    bootstrap_mean,
    campaign_cost_estimate,
    coefficient_of_variation,
    combine_orders,
    discretize,
    non_dominated_sort,
    parse_preference,
    planned_annotations,
    rank_configs,
    render_prompt,
    run_cli,
    spearman,
    stability_matrix,
)
from judgetune import _core


def enumerate_configs(search_space_path=""):
    """All judge configs of a search space as dicts (default space by default)."""
    return [json.loads(c) for c in _core.enumerate_configs(str(search_space_path))]


def config_hash(config):
    """Stable 16-hex id of a config given as a dict or JSON string."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _core.config_hash(config)


def canonical_json(config):
    if not isinstance(config, str):
        config = json.dumps(config)
    return _core.canonical_json(config)


__all__ = [
    "ConfigError",
    "DataError",
    "TransportError",
    "UndefinedMetricError",
    "average_ranks",
    "bootstrap_mean",
    "campaign_cost_estimate",
    "canonical_json",
    "coefficient_of_variation",
    "combine_orders",
    "config_hash",
    "discretize",
    "enumerate_configs",
    "non_dominated_sort",
    "parse_preference",
    "planned_annotations",
    "rank_configs",
    "render_prompt",
    "run_cli",
    "spearman",
    "stability_matrix",
]
