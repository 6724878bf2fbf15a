"""The 20-joint skeleton: pose file I/O, camera projection, bounding
rectangle, per-bone rigid transforms, and a synthetic walking gait.

Camera space is x right, y up, z forward from the camera, in meters.
Bones are identified by their child joint; HipCenter is the root.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .imaging import Rect, RectOutOfBounds

__all__ = [
    "JointId",
    "TrackingState",
    "Joint",
    "SkeletonPose",
    "CameraIntrinsics",
    "ProjectedJoint",
    "BoneTransform",
    "GaitParams",
    "JOINT_ORDER",
    "PARENTS",
    "BONES",
    "BIND_POSE",
    "DEFAULT_INTRINSICS",
    "PoseFormatError",
    "PoseSyntaxError",
    "MissingJoint",
    "DuplicateJoint",
    "UnknownJointName",
    "BadNumber",
    "BehindCamera",
    "NoTrackedJoints",
    "ZeroVector",
    "DegenerateBone",
    "parse_pose",
    "serialize_pose",
    "project",
    "bounding_rect",
    "bone_orientation",
    "bone_transforms",
    "synth_pose",
]


class JointId(enum.Enum):
    HipCenter = "HipCenter"
    Spine = "Spine"
    ShoulderCenter = "ShoulderCenter"
    Head = "Head"
    ShoulderLeft = "ShoulderLeft"
    ElbowLeft = "ElbowLeft"
    WristLeft = "WristLeft"
    HandLeft = "HandLeft"
    ShoulderRight = "ShoulderRight"
    ElbowRight = "ElbowRight"
    WristRight = "WristRight"
    HandRight = "HandRight"
    HipLeft = "HipLeft"
    KneeLeft = "KneeLeft"
    AnkleLeft = "AnkleLeft"
    FootLeft = "FootLeft"
    HipRight = "HipRight"
    KneeRight = "KneeRight"
    AnkleRight = "AnkleRight"
    FootRight = "FootRight"


JOINT_ORDER: tuple[JointId, ...] = tuple(JointId)
_JOINT_INDEX = {jid: i for i, jid in enumerate(JOINT_ORDER)}

PARENTS: dict[JointId, JointId] = {
    JointId.Spine: JointId.HipCenter,
    JointId.ShoulderCenter: JointId.Spine,
    JointId.Head: JointId.ShoulderCenter,
    JointId.ShoulderLeft: JointId.ShoulderCenter,
    JointId.ElbowLeft: JointId.ShoulderLeft,
    JointId.WristLeft: JointId.ElbowLeft,
    JointId.HandLeft: JointId.WristLeft,
    JointId.ShoulderRight: JointId.ShoulderCenter,
    JointId.ElbowRight: JointId.ShoulderRight,
    JointId.WristRight: JointId.ElbowRight,
    JointId.HandRight: JointId.WristRight,
    JointId.HipLeft: JointId.HipCenter,
    JointId.KneeLeft: JointId.HipLeft,
    JointId.AnkleLeft: JointId.KneeLeft,
    JointId.FootLeft: JointId.AnkleLeft,
    JointId.HipRight: JointId.HipCenter,
    JointId.KneeRight: JointId.HipRight,
    JointId.AnkleRight: JointId.KneeRight,
    JointId.FootRight: JointId.AnkleRight,
}

# one bone per non-root joint, identified by its child joint
BONES: tuple[JointId, ...] = JOINT_ORDER[1:]


class TrackingState(enum.Enum):
    TRACKED = "tracked"
    INFERRED = "inferred"
    NOT_TRACKED = "nottracked"


class PoseFormatError(Exception):
    """Base class for pose file parsing failures."""


class PoseSyntaxError(PoseFormatError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class MissingJoint(PoseFormatError):
    pass


class DuplicateJoint(PoseFormatError):
    pass


class UnknownJointName(PoseFormatError):
    pass


class BadNumber(PoseFormatError):
    def __init__(self, line: int, token: str):
        self.line = line
        super().__init__(f"line {line}: not a number: {token!r}")


class BehindCamera(Exception):
    """A joint sits at or behind the camera plane (z <= 0)."""


class NoTrackedJoints(Exception):
    """Bounding box requested for a pose with no usable joints."""


class ZeroVector(ValueError):
    """Direction input with zero length."""


class DegenerateBone(Exception):
    """Bind pose bone with coincident end joints."""


@dataclass(frozen=True)
class Joint:
    position: tuple[float, float, float]
    state: TrackingState = TrackingState.TRACKED


@dataclass(frozen=True)
class SkeletonPose:
    """All 20 joints, in canonical order. Immutable and hashable."""

    joints: tuple[Joint, ...]

    def __post_init__(self):
        if len(self.joints) != len(JOINT_ORDER):
            raise ValueError(f"pose needs {len(JOINT_ORDER)} joints, got {len(self.joints)}")

    @classmethod
    def from_joints(cls, joints: dict[JointId, Joint]) -> "SkeletonPose":
        for jid in JOINT_ORDER:
            if jid not in joints:
                raise MissingJoint(f"missing joint {jid.value}")
        if len(joints) != len(JOINT_ORDER):
            extra = set(joints) - set(JOINT_ORDER)
            raise ValueError(f"unexpected joint keys: {extra}")
        return cls(tuple(joints[jid] for jid in JOINT_ORDER))

    def __getitem__(self, jid: JointId) -> Joint:
        return self.joints[_JOINT_INDEX[jid]]

    def position(self, jid: JointId) -> np.ndarray:
        return np.asarray(self[jid].position, dtype=np.float64)

    def state(self, jid: JointId) -> TrackingState:
        return self[jid].state

    def translated(self, offset) -> "SkeletonPose":
        dx, dy, dz = (float(v) for v in offset)
        return SkeletonPose(
            tuple(
                Joint((j.position[0] + dx, j.position[1] + dy, j.position[2] + dz), j.state)
                for j in self.joints
            )
        )


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")


DEFAULT_INTRINSICS = CameraIntrinsics(fx=525.0, fy=525.0, cx=319.5, cy=239.5)


@dataclass(frozen=True)
class ProjectedJoint:
    u: float
    v: float
    depth: float
    state: TrackingState


@dataclass(frozen=True, eq=False)
class BoneTransform:
    """Rigid map from bind space to camera space: q -> rotation @ q + translation."""

    rotation: np.ndarray  # (3, 3) orthonormal, det +1
    translation: np.ndarray  # (3,)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation


# -- pose file format ---------------------------------------------------
#
# POSE v1
# camera <fx> <fy> <cx> <cy>
# joint <Name> <x> <y> <z> <state>     (20 lines, any order)
#
# '#' starts a comment line; fields are whitespace-separated.

_STATE_NAMES = {s.value: s for s in TrackingState}


def _parse_float(token: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise BadNumber(line, token) from None
    if not math.isfinite(value):
        raise BadNumber(line, token)
    return value


def parse_pose(text: str) -> tuple[SkeletonPose, CameraIntrinsics]:
    """Parse a pose file into (pose, intrinsics)."""
    lines = [
        (n, line.strip())
        for n, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines:
        raise PoseSyntaxError(1, "empty pose file")

    n, header = lines[0]
    if header.split() != ["POSE", "v1"]:
        raise PoseSyntaxError(n, f"expected 'POSE v1' header, got {header!r}")

    if len(lines) < 2:
        raise PoseSyntaxError(n, "missing camera line")
    n, camera_line = lines[1]
    fields = camera_line.split()
    if fields[0] != "camera":
        raise PoseSyntaxError(n, f"expected camera line, got {camera_line!r}")
    if len(fields) != 5:
        raise PoseSyntaxError(n, "camera line needs 4 values: fx fy cx cy")
    fx, fy, cx, cy = (_parse_float(tok, n) for tok in fields[1:])
    try:
        cam = CameraIntrinsics(fx, fy, cx, cy)
    except ValueError as exc:
        raise PoseSyntaxError(n, str(exc)) from None

    joints: dict[JointId, Joint] = {}
    for n, line in lines[2:]:
        fields = line.split()
        if fields[0] != "joint":
            raise PoseSyntaxError(n, f"expected joint line, got {line!r}")
        if len(fields) != 6:
            raise PoseSyntaxError(n, "joint line needs: joint <Name> <x> <y> <z> <state>")
        name = fields[1]
        try:
            jid = JointId(name)
        except ValueError:
            raise UnknownJointName(f"line {n}: unknown joint {name!r}") from None
        if jid in joints:
            raise DuplicateJoint(f"line {n}: joint {name} appears twice")
        x, y, z = (_parse_float(tok, n) for tok in fields[2:5])
        state_name = fields[5]
        if state_name not in _STATE_NAMES:
            raise PoseSyntaxError(n, f"unknown tracking state {state_name!r}")
        joints[jid] = Joint((x, y, z), _STATE_NAMES[state_name])

    for jid in JOINT_ORDER:
        if jid not in joints:
            raise MissingJoint(f"missing joint {jid.value}")
    return SkeletonPose.from_joints(joints), cam


def serialize_pose(pose: SkeletonPose, cam: CameraIntrinsics) -> str:
    """Canonical text form: fixed joint order, 6 decimal places throughout.

    parse_pose(serialize_pose(p, c)) reproduces p and c exactly for
    values representable at that precision; two serializations of the
    same pose are byte-identical.
    """
    out = ["POSE v1", f"camera {cam.fx:.6f} {cam.fy:.6f} {cam.cx:.6f} {cam.cy:.6f}"]
    for jid in JOINT_ORDER:
        j = pose[jid]
        x, y, z = j.position
        out.append(f"joint {jid.value} {x:.6f} {y:.6f} {z:.6f} {j.state.value}")
    return "\n".join(out) + "\n"


# -- projection and bounding --------------------------------------------


def project(pose: SkeletonPose, cam: CameraIntrinsics) -> dict[JointId, ProjectedJoint]:
    """Pinhole-project every joint to pixel coordinates, keeping depth."""
    out = {}
    for jid in JOINT_ORDER:
        j = pose[jid]
        x, y, z = j.position
        if z <= 0:
            raise BehindCamera(f"joint {jid.value} has z = {z}")
        out[jid] = ProjectedJoint(
            u=cam.cx + cam.fx * x / z,
            v=cam.cy - cam.fy * y / z,
            depth=z,
            state=j.state,
        )
    return out


def bounding_rect(
    projected: dict[JointId, ProjectedJoint],
    padding: int,
    width: int,
    height: int,
) -> Rect:
    """Smallest pixel rect containing every tracked/inferred joint,
    grown by `padding` on each side, clamped to the image and to y >= 1
    (row 0 is reserved for the stego header)."""
    if padding < 0:
        raise ValueError(f"padding must be >= 0, got {padding}")
    used = [p for p in projected.values() if p.state != TrackingState.NOT_TRACKED]
    if not used:
        raise NoTrackedJoints("no tracked or inferred joints to bound")
    us = [p.u for p in used]
    vs = [p.v for p in used]
    x0 = math.floor(min(us)) - padding
    x1 = math.floor(max(us)) + padding
    y0 = math.floor(min(vs)) - padding
    y1 = math.floor(max(vs)) + padding
    x0, y0 = max(x0, 0), max(y0, 1)
    x1, y1 = min(x1, width - 1), min(y1, height - 1)
    if x1 < x0 or y1 < y0:
        raise RectOutOfBounds("skeleton bounding box lies entirely outside the image")
    return Rect(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


# -- bone orientations and transforms -----------------------------------


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise ZeroVector(f"cannot normalize zero-length vector {v}")
    return v / norm


def _cross_matrix(w: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def bone_orientation(bind_dir, current_dir) -> np.ndarray:
    """Shortest-arc rotation matrix taking bind_dir to current_dir.

    Inputs are normalized internally. For (near-)antiparallel inputs
    (dot < -1 + 1e-8) the rotation is 180 degrees about a deterministic
    perpendicular axis: the coordinate axis least aligned with bind_dir
    (lowest index on ties), orthogonalized against it.
    """
    u = _normalize(bind_dir)
    v = _normalize(current_dir)
    d = float(np.dot(u, v))
    if d >= 1.0 - 1e-12:
        return np.eye(3)
    if d < -1.0 + 1e-8:
        axis_seed = np.zeros(3)
        axis_seed[int(np.argmin(np.abs(u)))] = 1.0
        a = _normalize(axis_seed - np.dot(axis_seed, u) * u)
        return 2.0 * np.outer(a, a) - np.eye(3)
    w = np.cross(u, v)
    wx = _cross_matrix(w)
    return np.eye(3) + wx + wx @ wx / (1.0 + d)


def bone_transforms(pose: SkeletonPose, bind: SkeletonPose) -> dict[JointId, BoneTransform]:
    """Rigid bind-to-camera transform per bone, keyed by child joint.

    Rotation is the shortest arc from the bind bone direction to the
    current one (identity if the current bone has collapsed to zero
    length); translation pins the bind parent joint exactly onto the
    current parent joint.
    """
    out = {}
    for child in BONES:
        parent = PARENTS[child]
        bind_p = bind.position(parent)
        bind_vec = bind.position(child) - bind_p
        if np.linalg.norm(bind_vec) < 1e-12:
            raise DegenerateBone(f"bind bone {parent.value}->{child.value} has zero length")
        pose_p = pose.position(parent)
        cur_vec = pose.position(child) - pose_p
        if np.linalg.norm(cur_vec) < 1e-12:
            rotation = np.eye(3)
        else:
            rotation = bone_orientation(bind_vec, cur_vec)
        translation = pose_p - rotation @ bind_p
        out[child] = BoneTransform(rotation=rotation, translation=translation)
    return out


# -- fixed bind pose -----------------------------------------------------
#
# A-pose reference skeleton, root at the origin: straight torso, arms
# 30 degrees out from vertical in the x-y plane, straight legs, feet
# pointing toward the camera. Coordinates are the committed 6-decimal
# table; tests snapshot it.

_BIND_TABLE: dict[JointId, tuple[float, float, float]] = {
    JointId.HipCenter: (0.0, 0.0, 0.0),
    JointId.Spine: (0.0, 0.25, 0.0),
    JointId.ShoulderCenter: (0.0, 0.45, 0.0),
    JointId.Head: (0.0, 0.65, 0.0),
    JointId.ShoulderLeft: (-0.18, 0.43, 0.0),
    JointId.ElbowLeft: (-0.31, 0.204833, 0.0),
    JointId.WristLeft: (-0.43, -0.003013, 0.0),
    JointId.HandLeft: (-0.47, -0.072295, 0.0),
    JointId.ShoulderRight: (0.18, 0.43, 0.0),
    JointId.ElbowRight: (0.31, 0.204833, 0.0),
    JointId.WristRight: (0.43, -0.003013, 0.0),
    JointId.HandRight: (0.47, -0.072295, 0.0),
    JointId.HipLeft: (-0.09, -0.05, 0.0),
    JointId.KneeLeft: (-0.09, -0.43, 0.0),
    JointId.AnkleLeft: (-0.09, -0.79, 0.0),
    JointId.FootLeft: (-0.09, -0.84, -0.12),
    JointId.HipRight: (0.09, -0.05, 0.0),
    JointId.KneeRight: (0.09, -0.43, 0.0),
    JointId.AnkleRight: (0.09, -0.79, 0.0),
    JointId.FootRight: (0.09, -0.84, -0.12),
}

BIND_POSE = SkeletonPose.from_joints({jid: Joint(p) for jid, p in _BIND_TABLE.items()})


# -- synthetic walking gait ----------------------------------------------


@dataclass(frozen=True)
class GaitParams:
    """Deterministic walk: root drifts along x, limbs swing sinusoidally
    in the depth plane, left and right half a period out of phase."""

    x0: float = 0.0
    y0: float = 0.0
    z0: float = 2.5
    speed: float = 0.02  # meters per frame
    period: int = 40  # frames per gait cycle
    amplitude_deg: float = 30.0

    def __post_init__(self):
        if self.z0 <= 0:
            raise ValueError(f"z0 must be positive, got {self.z0}")
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")


DEFAULT_GAIT = GaitParams()

# limb segment lengths and lateral offsets, shared with the bind table
_SPINE_DY, _SHOULDER_CENTER_DY, _HEAD_DY = 0.25, 0.45, 0.65
_SHOULDER_DX, _SHOULDER_DY = 0.18, -0.02
_HIP_DX, _HIP_DY = 0.09, -0.05
_UPPER_ARM, _FOREARM, _HAND = 0.26, 0.24, 0.08
_THIGH, _SHIN = 0.38, 0.36
_FOOT_OFFSET = np.array([0.0, -0.05, -0.12])


def _swing_dir(theta: float) -> np.ndarray:
    # downward limb direction swung by theta in the y-z (depth) plane
    return np.array([0.0, -math.cos(theta), math.sin(theta)])


def synth_pose(t: int, params: GaitParams = DEFAULT_GAIT) -> SkeletonPose:
    """Closed-form walking pose for frame t; every joint tracked.

    The figure faces the camera, marching in place while the root
    translates along x at params.speed per frame. Shoulder, elbow, hip
    and knee angles follow sinusoids of the given period and amplitude;
    right limbs lag left limbs by half a period.
    """
    phi = 2.0 * math.pi * t / params.period
    amp = math.radians(params.amplitude_deg)
    root = np.array([params.x0 + params.speed * t, params.y0, params.z0])

    pos: dict[JointId, np.ndarray] = {
        JointId.HipCenter: root,
        JointId.Spine: root + [0.0, _SPINE_DY, 0.0],
        JointId.ShoulderCenter: root + [0.0, _SHOULDER_CENTER_DY, 0.0],
        JointId.Head: root + [0.0, _HEAD_DY, 0.0],
    }

    for side_sign, side_phase, names in (
        (-1.0, 0.0, ("ShoulderLeft", "ElbowLeft", "WristLeft", "HandLeft")),
        (+1.0, math.pi, ("ShoulderRight", "ElbowRight", "WristRight", "HandRight")),
    ):
        shoulder_theta = amp * math.sin(phi + side_phase)
        elbow_theta = amp * math.sin(phi + side_phase + math.pi / 2)
        shoulder = pos[JointId.ShoulderCenter] + [side_sign * _SHOULDER_DX, _SHOULDER_DY, 0.0]
        elbow = shoulder + _UPPER_ARM * _swing_dir(shoulder_theta)
        wrist = elbow + _FOREARM * _swing_dir(shoulder_theta + elbow_theta)
        hand = wrist + _HAND * _swing_dir(shoulder_theta + elbow_theta)
        for name, p in zip(names, (shoulder, elbow, wrist, hand)):
            pos[JointId(name)] = p

    for side_sign, side_phase, names in (
        (-1.0, 0.0, ("HipLeft", "KneeLeft", "AnkleLeft", "FootLeft")),
        (+1.0, math.pi, ("HipRight", "KneeRight", "AnkleRight", "FootRight")),
    ):
        # legs swing opposite the same-side arms
        hip_theta = amp * math.sin(phi + side_phase + math.pi)
        knee_theta = amp * math.sin(phi + side_phase + math.pi + math.pi / 2)
        hip = root + [side_sign * _HIP_DX, _HIP_DY, 0.0]
        knee = hip + _THIGH * _swing_dir(hip_theta)
        ankle = knee + _SHIN * _swing_dir(hip_theta + knee_theta)
        foot = ankle + _FOOT_OFFSET
        for name, p in zip(names, (hip, knee, ankle, foot)):
            pos[JointId(name)] = p

    return SkeletonPose.from_joints(
        {jid: Joint(tuple(float(c) for c in p)) for jid, p in pos.items()}
    )
