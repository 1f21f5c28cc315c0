#!/usr/bin/env python3
"""Regenerates the demonstration fixtures under tests/data/.

demo_valid.jsonl is a short, smooth, human-scale recording (no robot
kinematics behind it). The two broken variants differ from it in one line.
"""

import json
import math
import pathlib

DATA = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"
RATE = 50.0
FRAMES = 100


def yaw_quat(angle):
    return [math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2)]


def frame(i):
    t = i / RATE
    sway = 0.05 * math.sin(2 * math.pi * 0.5 * t)
    reach = 0.1 * math.sin(2 * math.pi * 0.3 * t)
    return {
        "t": t,
        "pelvis": [0.02 * t, sway, 0.95, *yaw_quat(0.1 * sway)],
        "left_tcp": [0.35 + reach, 0.25, 1.05, *yaw_quat(0.2)],
        "right_tcp": [0.35 - reach, -0.25, 1.05, *yaw_quat(-0.2)],
        "left_foot": [0.0, 0.11, 0.0, *yaw_quat(0.0)],
        "right_foot": [0.0, -0.11, 0.0, *yaw_quat(0.0)],
        "gripper": [0.04 + 0.02 * math.sin(t), 0.04],
    }


HEADER = {
    "format_version": "demo-v1",
    "rate": RATE,
    "calibration_pelvis_height": 0.95,
    "gripper_range": [0.0, 0.1],
}


def write(name, frames):
    lines = [json.dumps(HEADER)] + [json.dumps(f) for f in frames]
    (DATA / name).write_text("\n".join(lines) + "\n")
    print(f"wrote {DATA / name}")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    frames = [frame(i) for i in range(FRAMES)]
    write("demo_valid.jsonl", frames)

    bad = [dict(f) for f in frames]
    # File line 5 holds frame index 3.
    bad[3]["left_tcp"] = bad[3]["left_tcp"][:3] + [0.9 * v for v in bad[3]["left_tcp"][3:]]
    write("demo_bad_quat.jsonl", bad)

    unordered = [dict(f) for f in frames]
    unordered[10]["t"], unordered[11]["t"] = unordered[11]["t"], unordered[10]["t"]
    write("demo_unordered.jsonl", unordered)


if __name__ == "__main__":
    main()
