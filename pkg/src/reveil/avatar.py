"""Procedural tube-humanoid avatar: rigging, linear blend skinning, and
a deterministic z-buffered software rasterizer.

Each of the 19 bones carries one closed tube: `segments` ring vertices
at the parent joint, `segments` at the child joint, plus one apex
vertex per end capping the tube (2 * segments + 2 vertices per bone).
Ring vertices at a joint shared by exactly two bones are weighted
0.5/0.5 across those bones so elbows and knees deform watertight; all
other vertices follow their own bone rigidly.

Rasterization fills pixels whose centers pass all three edge functions
of the screen triangle, breaking exact-on-edge ties with the top-left
rule (an edge owns its pixels if it runs exactly horizontal toward +u,
or heads toward -v). Depth is the screen-space barycentric interpolation
of camera z; strictly smaller z wins, so ties keep the earlier triangle
(triangles are emitted bone by bone, in bone order).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .imaging import ImageBuffer
from .skeleton import (
    BIND_POSE,
    BONES,
    PARENTS,
    BehindCamera,
    BoneTransform,
    CameraIntrinsics,
    DegenerateBone,
    JointId,
    SkeletonPose,
    bone_transforms,
)

__all__ = [
    "RenderConfig",
    "RiggedMesh",
    "build_rig",
    "skin",
    "rasterize",
    "render_avatar",
]

# default tube radius per bone, keyed by the bone's child joint
_RADIUS_TABLE: dict[JointId, float] = {
    JointId.Spine: 0.10,
    JointId.ShoulderCenter: 0.10,
    JointId.Head: 0.09,
    JointId.ShoulderLeft: 0.05,
    JointId.ElbowLeft: 0.05,
    JointId.WristLeft: 0.04,
    JointId.HandLeft: 0.03,
    JointId.ShoulderRight: 0.05,
    JointId.ElbowRight: 0.05,
    JointId.WristRight: 0.04,
    JointId.HandRight: 0.03,
    JointId.HipLeft: 0.08,
    JointId.KneeLeft: 0.08,
    JointId.AnkleLeft: 0.06,
    JointId.FootLeft: 0.04,
    JointId.HipRight: 0.08,
    JointId.KneeRight: 0.08,
    JointId.AnkleRight: 0.06,
    JointId.FootRight: 0.04,
}

_SHIRT = (120, 150, 210)
_SKIN = (230, 190, 160)
_PANTS = (90, 90, 115)
_SHOES = (60, 50, 45)

_COLOR_TABLE: dict[JointId, tuple[int, int, int]] = {
    JointId.Spine: _SHIRT,
    JointId.ShoulderCenter: _SHIRT,
    JointId.Head: _SKIN,
    JointId.ShoulderLeft: _SHIRT,
    JointId.ElbowLeft: _SHIRT,
    JointId.WristLeft: _SHIRT,
    JointId.HandLeft: _SKIN,
    JointId.ShoulderRight: _SHIRT,
    JointId.ElbowRight: _SHIRT,
    JointId.WristRight: _SHIRT,
    JointId.HandRight: _SKIN,
    JointId.HipLeft: _PANTS,
    JointId.KneeLeft: _PANTS,
    JointId.AnkleLeft: _PANTS,
    JointId.FootLeft: _SHOES,
    JointId.HipRight: _PANTS,
    JointId.KneeRight: _PANTS,
    JointId.AnkleRight: _PANTS,
    JointId.FootRight: _SHOES,
}


def _default_radii() -> tuple[float, ...]:
    return tuple(_RADIUS_TABLE[j] for j in BONES)


def _default_colors() -> tuple[tuple[int, int, int], ...]:
    return tuple(_COLOR_TABLE[j] for j in BONES)


@dataclass(frozen=True)
class RenderConfig:
    """Avatar tessellation, sizes, colors and lighting. Hashable so rigs
    can be cached per configuration."""

    segments: int = 8
    radii: tuple[float, ...] = field(default_factory=_default_radii)
    part_colors: tuple[tuple[int, int, int], ...] = field(default_factory=_default_colors)
    light_dir: tuple[float, float, float] = (0.0, 0.0, -1.0)
    ambient: float = 0.3

    def __post_init__(self):
        if self.segments < 3:
            raise ValueError(f"segments must be >= 3, got {self.segments}")
        if len(self.radii) != len(BONES):
            raise ValueError(f"need {len(BONES)} radii, got {len(self.radii)}")
        if any(r <= 0 for r in self.radii):
            raise ValueError("all radii must be positive")
        if len(self.part_colors) != len(BONES):
            raise ValueError(f"need {len(BONES)} part colors, got {len(self.part_colors)}")
        if not 0.0 <= self.ambient <= 1.0:
            raise ValueError(f"ambient must be in [0, 1], got {self.ambient}")
        if math.isclose(sum(c * c for c in self.light_dir), 0.0):
            raise ValueError("light_dir must be non-zero")

    def scaled_radii(self, factor: float) -> "RenderConfig":
        return RenderConfig(
            segments=self.segments,
            radii=tuple(r * factor for r in self.radii),
            part_colors=self.part_colors,
            light_dir=self.light_dir,
            ambient=self.ambient,
        )


@dataclass(eq=False)
class RiggedMesh:
    """Bind-space humanoid mesh bound to the 19-bone hierarchy."""

    vertices: np.ndarray  # (N, 3) float64, bind space
    triangles: np.ndarray  # (M, 3) int32, grouped by bone
    weight_bones: np.ndarray  # (N, 2) int32 indices into BONES
    weight_values: np.ndarray  # (N, 2) float64, non-negative, rows sum to 1
    triangle_bones: np.ndarray  # (M,) int32 owning bone per triangle
    part_colors: np.ndarray  # (19, 3) uint8

    def __post_init__(self):
        n = len(self.vertices)
        if self.triangles.size and not (
            self.triangles.min() >= 0 and self.triangles.max() < n
        ):
            raise ValueError("triangle index out of range")
        if not np.all((self.weight_bones >= 0) & (self.weight_bones < len(BONES))):
            raise ValueError("bone index out of range")
        if np.any(self.weight_values < 0):
            raise ValueError("weights must be non-negative")
        if not np.allclose(self.weight_values.sum(axis=1), 1.0, atol=1e-6):
            raise ValueError("per-vertex weights must sum to 1")


def _perp_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # deterministic frame: seed with the coordinate axis least aligned
    # with the bone (lowest index on ties), orthogonalize, complete
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(axis)))] = 1.0
    e1 = seed - np.dot(seed, axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2


def _blend_partner(joint: JointId) -> JointId | None:
    """The second bone sharing `joint`, when exactly two bones meet there."""
    children = [c for c, p in PARENTS.items() if p == joint]
    if joint in PARENTS and len(children) == 1:
        return children[0]  # caller decides which side it sits on
    return None


def build_rig(bind: SkeletonPose, cfg: RenderConfig) -> RiggedMesh:
    """Construct the tube humanoid around the bind skeleton."""
    segs = cfg.segments
    bone_index = {child: i for i, child in enumerate(BONES)}

    vertices, wb, wv = [], [], []
    triangles, tri_bones = [], []

    for b, child in enumerate(BONES):
        parent = PARENTS[child]
        p = bind.position(parent)
        c = bind.position(child)
        axis = c - p
        length = float(np.linalg.norm(axis))
        if length < 1e-12:
            raise DegenerateBone(f"bind bone {parent.value}->{child.value} has zero length")
        axis /= length
        e1, e2 = _perp_basis(axis)
        radius = cfg.radii[b]

        def weights_at(joint: JointId) -> tuple[tuple[int, int], tuple[float, float]]:
            partner = _blend_partner(joint)
            if partner is None:
                return (b, 0), (1.0, 0.0)
            # the two bones meeting at `joint`: bone(joint) and its only child
            other = bone_index[joint] if joint != child else bone_index[partner]
            return (b, other), (0.5, 0.5)

        base = len(vertices)
        ring_dirs = [
            math.cos(2.0 * math.pi * j / segs) * e1 + math.sin(2.0 * math.pi * j / segs) * e2
            for j in range(segs)
        ]
        pw_bones, pw_vals = weights_at(parent)
        cw_bones, cw_vals = weights_at(child)
        for d in ring_dirs:  # parent ring: indices base .. base+segs-1
            vertices.append(p + radius * d)
            wb.append(pw_bones)
            wv.append(pw_vals)
        for d in ring_dirs:  # child ring: base+segs .. base+2*segs-1
            vertices.append(c + radius * d)
            wb.append(cw_bones)
            wv.append(cw_vals)
        apex_p = base + 2 * segs
        apex_c = apex_p + 1
        vertices.append(p.copy())
        wb.append(pw_bones)
        wv.append(pw_vals)
        vertices.append(c.copy())
        wb.append(cw_bones)
        wv.append(cw_vals)

        for j in range(segs):
            jn = (j + 1) % segs
            r0, r0n = base + j, base + jn
            r1, r1n = base + segs + j, base + segs + jn
            triangles.append((r0, r1, r1n))  # tube side, outward winding
            triangles.append((r0, r1n, r0n))
            triangles.append((apex_p, r0n, r0))  # parent cap
            triangles.append((apex_c, r1, r1n))  # child cap
            tri_bones.extend([b, b, b, b])

    return RiggedMesh(
        vertices=np.array(vertices, dtype=np.float64),
        triangles=np.array(triangles, dtype=np.int32),
        weight_bones=np.array(wb, dtype=np.int32),
        weight_values=np.array(wv, dtype=np.float64),
        triangle_bones=np.array(tri_bones, dtype=np.int32),
        part_colors=np.array(cfg.part_colors, dtype=np.uint8),
    )


@functools.lru_cache(maxsize=8)
def _cached_rig(bind: SkeletonPose, cfg: RenderConfig) -> RiggedMesh:
    return build_rig(bind, cfg)


def skin(mesh: RiggedMesh, transforms: dict[JointId, BoneTransform]) -> np.ndarray:
    """Linear blend skinning: each vertex is the weight-blended image of
    its bind position under its bones' rigid transforms."""
    rot = np.stack([transforms[child].rotation for child in BONES])
    trans = np.stack([transforms[child].translation for child in BONES])
    posed = np.zeros_like(mesh.vertices)
    for slot in range(mesh.weight_bones.shape[1]):
        bones = mesh.weight_bones[:, slot]
        w = mesh.weight_values[:, slot][:, None]
        moved = np.einsum("nij,nj->ni", rot[bones], mesh.vertices) + trans[bones]
        posed += w * moved
    return posed


def _is_top_left(a: np.ndarray, b: np.ndarray) -> bool:
    # for a positively-oriented screen triangle: top = horizontal toward
    # +u, left = heading toward -v (v grows downward)
    du, dv = b[0] - a[0], b[1] - a[1]
    return (dv == 0.0 and du > 0.0) or dv < 0.0


def rasterize(
    posed: np.ndarray,
    triangles: np.ndarray,
    colors: np.ndarray,
    cam: CameraIntrinsics,
    target: ImageBuffer,
    light_dir: tuple[float, float, float] = (0.0, 0.0, -1.0),
    ambient: float = 0.3,
) -> ImageBuffer:
    """Fill triangles over the target with flat Lambert shading and a
    z-buffer. Triangles touching z <= 0 are skipped, not clipped."""
    posed = np.asarray(posed, dtype=np.float64)
    colors = np.asarray(colors)
    width, height = target.width, target.height
    buf = target.pixels.copy()
    zbuf = np.full((height, width), np.inf)

    minus_light = -np.asarray(light_dir, dtype=np.float64)
    minus_light /= np.linalg.norm(minus_light)

    z_all = posed[:, 2]
    u_all = cam.cx + cam.fx * posed[:, 0] / np.where(z_all > 0, z_all, 1.0)
    v_all = cam.cy - cam.fy * posed[:, 1] / np.where(z_all > 0, z_all, 1.0)

    for tri_index, (i0, i1, i2) in enumerate(triangles):
        zs = (z_all[i0], z_all[i1], z_all[i2])
        if min(zs) <= 0.0:
            continue
        pts = np.array(
            [[u_all[i0], v_all[i0]], [u_all[i1], v_all[i1]], [u_all[i2], v_all[i2]]]
        )
        z0, z1, z2 = zs
        area2 = (pts[1, 0] - pts[0, 0]) * (pts[2, 1] - pts[0, 1]) - (
            pts[1, 1] - pts[0, 1]
        ) * (pts[2, 0] - pts[0, 0])
        if area2 == 0.0:
            continue  # collinear on screen: no pixels
        if area2 < 0.0:
            pts[[1, 2]] = pts[[2, 1]]
            z1, z2 = z2, z1
            area2 = -area2

        x_lo = max(0, math.ceil(pts[:, 0].min() - 0.5))
        x_hi = min(width - 1, math.floor(pts[:, 0].max() - 0.5))
        y_lo = max(0, math.ceil(pts[:, 1].min() - 0.5))
        y_hi = min(height - 1, math.floor(pts[:, 1].max() - 0.5))
        if x_lo > x_hi or y_lo > y_hi:
            continue

        # flat Lambert shade from the camera-space face normal
        a3, b3, c3 = posed[i0], posed[i1], posed[i2]
        normal = np.cross(b3 - a3, c3 - a3)
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            continue
        normal /= norm
        centroid = (a3 + b3 + c3) / 3.0
        if np.dot(normal, centroid) > 0.0:
            normal = -normal
        intensity = ambient + (1.0 - ambient) * max(0.0, float(np.dot(normal, minus_light)))
        shade = np.floor(intensity * colors[tri_index].astype(np.float64) + 0.5)
        shade = np.clip(shade, 0, 255).astype(np.uint8)

        px = np.arange(x_lo, x_hi + 1) + 0.5
        py = (np.arange(y_lo, y_hi + 1) + 0.5)[:, None]
        ws, inside = [], None
        for a, b in ((1, 2), (2, 0), (0, 1)):
            wa = (pts[b, 0] - pts[a, 0]) * (py - pts[a, 1]) - (pts[b, 1] - pts[a, 1]) * (
                px - pts[a, 0]
            )
            cover = (wa > 0.0) | ((wa == 0.0) & _is_top_left(pts[a], pts[b]))
            ws.append(wa)
            inside = cover if inside is None else inside & cover
        if not inside.any():
            continue

        z_interp = (ws[0] * z0 + ws[1] * z1 + ws[2] * z2) / area2
        window_z = zbuf[y_lo : y_hi + 1, x_lo : x_hi + 1]
        mask = inside & (z_interp < window_z)
        if not mask.any():
            continue
        window_z[mask] = z_interp[mask]
        buf[y_lo : y_hi + 1, x_lo : x_hi + 1][mask] = shade

    return ImageBuffer(buf)


def render_avatar(
    frame: ImageBuffer,
    pose: SkeletonPose,
    cam: CameraIntrinsics,
    cfg: RenderConfig,
    bind: SkeletonPose = BIND_POSE,
) -> ImageBuffer:
    """Deform the rig to the pose and composite it over the frame."""
    for joint_id, joint in zip(JointId, pose.joints):
        if joint.position[2] <= 0:
            raise BehindCamera(f"joint {joint_id.value} has z = {joint.position[2]}")
    rig = _cached_rig(bind, cfg)
    transforms = bone_transforms(pose, bind)
    posed = skin(rig, transforms)
    tri_colors = rig.part_colors[rig.triangle_bones]
    return rasterize(
        posed,
        rig.triangles,
        tri_colors,
        cam,
        frame,
        light_dir=cfg.light_dir,
        ambient=cfg.ambient,
    )
