# Copyright 2026 the edgecache authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Demand prediction, top-R content placement and replay simulation for
mobile edge caches, backed by the C++ core."""

from ._edgecache import (
    ConfigError,
    ContentCatalog,
    ContractError,
    DataError,
    EpochStats,
    MenPlacement,
    ModelParams,
    NetworkTopology,
    PlacementPlan,
    RatingEvent,
    RatingMatrix,
    ReplayResult,
    Request,
    ShapeError,
    ShardManifest,
    Topology,
    TrainLog,
    __version__,
    aggregate_popularity,
    build_request_trace,
    ingest,
    nmf_predict,
    place_top_r,
    predict,
    replay,
    rmse,
    shard,
    split,
    svd_predict,
    synth_zipf,
    train_centralized,
    train_distributed,
)

__all__ = [
    "ConfigError",
    "ContentCatalog",
    "ContractError",
    "DataError",
    "EpochStats",
    "MenPlacement",
    "ModelParams",
    "NetworkTopology",
    "PlacementPlan",
    "RatingEvent",
    "RatingMatrix",
    "ReplayResult",
    "Request",
    "ShapeError",
    "ShardManifest",
    "Topology",
    "TrainLog",
    "__version__",
    "aggregate_popularity",
    "build_request_trace",
    "ingest",
    "nmf_predict",
    "place_top_r",
    "predict",
    "replay",
    "rmse",
    "shard",
    "split",
    "svd_predict",
    "synth_zipf",
    "train_centralized",
    "train_distributed",
]
