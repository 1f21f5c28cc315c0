#!/usr/bin/env python3
"""Regenerates the bundled kinematic models under models/.

biped29 follows the usual 29-DoF humanoid layout (2 x 6 leg, 3 waist,
2 x 7 arm) with link offsets close to a commercial 1.3 m humanoid. Joint
frames are axis-aligned at the zero posture. The thigh leans forward and the
shin back, so the zero configuration stands with the knee slightly bent
(about 0.31 rad) and the arms hanging down; the straight-leg singularity lies
outside the knee range.
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parents[1] / "models"

AXES = {"x": [1.0, 0.0, 0.0], "y": [0.0, 1.0, 0.0], "z": [0.0, 0.0, 1.0]}


def pose(t=(0.0, 0.0, 0.0)):
    return {"translation": list(t), "rotation": [1.0, 0.0, 0.0, 0.0]}


def joint(name, parent, child, origin, axis, limits):
    return {
        "name": name,
        "type": "revolute",
        "parent": parent,
        "child": child,
        "origin": pose(origin),
        "axis": AXES[axis],
        "limits": list(limits),
    }


def planar3():
    links = ["base", "link1", "link2", "link3", "end"]
    joints = [
        joint("joint1", "base", "link1", (0, 0, 0), "z", (-3.14159, 3.14159)),
        joint("joint2", "link1", "link2", (1, 0, 0), "z", (-3.14159, 3.14159)),
        joint("joint3", "link2", "link3", (1, 0, 0), "z", (-3.14159, 3.14159)),
        {"name": "tip", "type": "fixed", "parent": "link3", "child": "end",
         "origin": pose((1, 0, 0))},
    ]
    keypoints = {
        "pelvis": {"link": "base", "offset": pose()},
        "left_tcp": {"link": "end", "offset": pose()},
        "right_tcp": {"link": "link2", "offset": pose((0.5, 0, 0))},
        "left_foot": {"link": "link1", "offset": pose()},
        "right_foot": {"link": "base", "offset": pose()},
    }
    return {
        "format_version": "model-v1",
        "name": "planar3",
        "default_root_height": 0.0,
        "links": [{"name": n} for n in links],
        "joints": joints,
        "keypoints": keypoints,
    }


def mirror(v, side):
    return (v[0], v[1] if side == "left" else -v[1], v[2])


def mirror_limits(lim, side, flip):
    if side == "left" or not flip:
        return lim
    return (-lim[1], -lim[0])


LEG = [
    # name, origin, axis, limits, limit flips sign on the right side
    ("hip_pitch", (0.0, 0.064452, -0.1027), "y", (-2.5307, 2.8798), False),
    ("hip_roll", (0.0, 0.052, -0.030465), "x", (-0.5236, 2.9671), True),
    ("hip_yaw", (0.025001, 0.0, -0.12412), "z", (-2.7576, 2.7576), False),
    ("knee", (0.04, 0.0021489, -0.17734), "y", (-0.087267, 2.8798), False),
    ("ankle_pitch", (-0.03, -0.000094445, -0.30001), "y", (-0.87267, 0.5236), False),
    ("ankle_roll", (0.0, 0.0, -0.017558), "x", (-0.2618, 0.2618), False),
]

ARM = [
    ("shoulder_pitch", (0.0039563, 0.10022, 0.24778), "y", (-3.0892, 2.6704), False),
    ("shoulder_roll", (0.0, 0.038, -0.013831), "x", (-1.5882, 2.2515), True),
    ("shoulder_yaw", (0.0, 0.00624, -0.1032), "z", (-2.618, 2.618), False),
    ("elbow", (0.015783, 0.0, -0.080518), "y", (-1.0472, 2.0944), False),
    ("wrist_roll", (0.1, 0.00188791, -0.01), "x", (-1.97222, 1.97222), False),
    ("wrist_pitch", (0.038, 0.0, 0.0), "y", (-1.61443, 1.61443), False),
    ("wrist_yaw", (0.046, 0.0, 0.0), "z", (-1.61443, 1.61443), False),
]

FOOT_SOLE = (0.035, 0.0, -0.040807)
TCP_OFFSET = (0.12, 0.0, 0.0)


def biped29():
    links = ["pelvis"]
    joints = []

    def chain(parent, side, spec):
        for name, origin, axis, limits, flip in spec:
            child = f"{side}_{name}_link"
            links.append(child)
            joints.append(joint(f"{side}_{name}_joint", parent, child,
                                mirror(origin, side), axis,
                                mirror_limits(limits, side, flip)))
            parent = child
        return parent

    left_ankle = chain("pelvis", "left", LEG)
    right_ankle = chain("pelvis", "right", LEG)

    parent = "pelvis"
    for name, origin, axis, limits in [
        ("waist_yaw", (0.0, 0.0, 0.0), "z", (-2.618, 2.618)),
        ("waist_roll", (-0.0039635, 0.0, 0.044), "x", (-0.52, 0.52)),
        ("waist_pitch", (0.0, 0.0, 0.0), "y", (-0.52, 0.52)),
    ]:
        child = f"{name}_link" if name != "waist_pitch" else "torso_link"
        links.append(child)
        joints.append(joint(f"{name}_joint", parent, child, origin, axis, limits))
        parent = child

    left_hand = chain("torso_link", "left", ARM)
    right_hand = chain("torso_link", "right", ARM)

    sole_l, sole_r = mirror(FOOT_SOLE, "left"), mirror(FOOT_SOLE, "right")
    height = -sum(o[2] for _, o, _, _, _ in LEG) - FOOT_SOLE[2]
    keypoints = {
        "pelvis": {"link": "pelvis", "offset": pose()},
        "left_tcp": {"link": left_hand, "offset": pose(TCP_OFFSET)},
        "right_tcp": {"link": right_hand, "offset": pose(TCP_OFFSET)},
        "left_foot": {"link": left_ankle, "offset": pose(sole_l)},
        "right_foot": {"link": right_ankle, "offset": pose(sole_r)},
    }
    return {
        "format_version": "model-v1",
        "name": "biped29",
        "default_root_height": round(height, 6),
        "links": [{"name": n} for n in links],
        "joints": joints,
        "keypoints": keypoints,
    }


def main():
    ROOT.mkdir(exist_ok=True)
    for model in (planar3(), biped29()):
        path = ROOT / f"{model['name']}.json"
        path.write_text(json.dumps(model, indent=2) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
