# Copyright 2026 The keyret Authors
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

"""Keypoint action chunks, retargeting and joint tracking."""

from keyret._keyret import (
    ACTION_WIDTH,
    CONTROL_RATE,
    DEFAULT_HORIZON,
    KEYPOINTS,
    KeyretError,
    Model,
    NormalizationStats,
    SkrConfig,
    action_column_names,
    compute_stats,
    decode_chunk,
    encode_chunk,
    forward_kinematics,
    height_scale_from_calibration,
    keypoint_jacobian,
    load_demonstration,
    resample,
    retarget,
    retarget_stream,
    rot6d_decode,
    rot6d_encode,
    scale_keypoints,
    simulate,
    synthetic_sine,
    synthetic_static,
    validate_demonstration,
)

__version__ = "0.1.0"

__all__ = [
    "ACTION_WIDTH",
    "CONTROL_RATE",
    "DEFAULT_HORIZON",
    "KEYPOINTS",
    "KeyretError",
    "Model",
    "NormalizationStats",
    "SkrConfig",
    "action_column_names",
    "compute_stats",
    "decode_chunk",
    "encode_chunk",
    "forward_kinematics",
    "height_scale_from_calibration",
    "keypoint_jacobian",
    "load_demonstration",
    "resample",
    "retarget",
    "retarget_stream",
    "rot6d_decode",
    "rot6d_encode",
    "scale_keypoints",
    "simulate",
    "synthetic_sine",
    "synthetic_static",
    "validate_demonstration",
]
