import math

import numpy as np
import pytest

from reveil.avatar import RenderConfig, build_rig, rasterize, render_avatar, skin
from reveil.imaging import ImageBuffer
from reveil.skeleton import (
    BIND_POSE,
    BONES,
    PARENTS,
    BehindCamera,
    BoneTransform,
    CameraIntrinsics,
    DegenerateBone,
    Joint,
    JointId,
    SkeletonPose,
    TrackingState,
    bone_transforms,
    synth_pose,
)

CFG = RenderConfig()
# screen-aligned camera for rasterizer unit tests: u = x, v = -y at z = 1
FLAT_CAM = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0)


def identity_transforms():
    return {
        child: BoneTransform(rotation=np.eye(3), translation=np.zeros(3))
        for child in BONES
    }


class TestBuildRig:
    def test_counts(self):
        rig = build_rig(BIND_POSE, CFG)
        per_bone = 2 * CFG.segments + 2  # two rings plus two cap apexes
        assert len(rig.vertices) == 19 * per_bone == 342
        assert len(rig.triangles) == 19 * 4 * CFG.segments
        assert rig.part_colors.shape == (19, 3)
        assert set(np.unique(rig.triangle_bones)) == set(range(19))

    def test_weights_sum_to_one(self):
        rig = build_rig(BIND_POSE, CFG)
        assert np.allclose(rig.weight_values.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(rig.weight_values >= 0)

    def test_shared_joint_rings_blend_half_half(self):
        rig = build_rig(BIND_POSE, CFG)
        segs = CFG.segments
        per_bone = 2 * segs + 2
        elbow_bone = BONES.index(JointId.ElbowLeft)
        wrist_bone = BONES.index(JointId.WristLeft)
        # child ring of the upper arm sits at the elbow, shared with the forearm
        ring_vertex = elbow_bone * per_bone + segs
        assert set(rig.weight_bones[ring_vertex]) == {elbow_bone, wrist_bone}
        assert tuple(rig.weight_values[ring_vertex]) == (0.5, 0.5)

    def test_multiway_and_leaf_joints_stay_rigid(self):
        rig = build_rig(BIND_POSE, CFG)
        segs = CFG.segments
        per_bone = 2 * segs + 2
        head_bone = BONES.index(JointId.Head)
        # parent ring of the head tube sits at ShoulderCenter (4 bones meet)
        parent_ring = head_bone * per_bone
        assert rig.weight_values[parent_ring, 0] == 1.0
        # child ring of the head tube is a leaf joint
        child_ring = head_bone * per_bone + segs
        assert rig.weight_values[child_ring, 0] == 1.0

    def test_doubling_radii_doubles_axis_distance(self):
        rig1 = build_rig(BIND_POSE, CFG)
        rig2 = build_rig(BIND_POSE, CFG.scaled_radii(2.0))

        def axis_distance(rig, vertex, child):
            p = BIND_POSE.position(PARENTS[child])
            c = BIND_POSE.position(child)
            axis = (c - p) / np.linalg.norm(c - p)
            rel = rig.vertices[vertex] - p
            return np.linalg.norm(rel - np.dot(rel, axis) * axis)

        per_bone = 2 * CFG.segments + 2
        for b, child in enumerate(BONES):
            for j in range(2 * CFG.segments):
                v = b * per_bone + j
                d1 = axis_distance(rig1, v, child)
                d2 = axis_distance(rig2, v, child)
                assert d2 == pytest.approx(2.0 * d1, rel=1e-9)

    def test_degenerate_bind_bone(self):
        joints = {jid: BIND_POSE[jid] for jid in JointId}
        joints[JointId.Head] = BIND_POSE[JointId.ShoulderCenter]
        with pytest.raises(DegenerateBone):
            build_rig(SkeletonPose.from_joints(joints), CFG)


class TestSkin:
    def test_identity_transforms_give_bind_vertices(self):
        rig = build_rig(BIND_POSE, CFG)
        posed = skin(rig, bone_transforms(BIND_POSE, BIND_POSE))
        assert np.allclose(posed, rig.vertices, atol=1e-12)

    def test_whole_mesh_rigidity(self):
        rig = build_rig(BIND_POSE, CFG)
        angle = 0.9
        rot = np.array(
            [
                [math.cos(angle), -math.sin(angle), 0.0],
                [math.sin(angle), math.cos(angle), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        t = np.array([0.2, -0.4, 3.0])
        transforms = {
            child: BoneTransform(rotation=rot, translation=t) for child in BONES
        }
        posed = skin(rig, transforms)
        expected = rig.vertices @ rot.T + t
        assert np.max(np.abs(posed - expected)) < 1e-6

    def test_half_weight_vertex_moves_half_way(self):
        rig = build_rig(BIND_POSE, CFG)
        segs = CFG.segments
        per_bone = 2 * segs + 2
        elbow_bone = BONES.index(JointId.ElbowLeft)
        vertex = elbow_bone * per_bone + segs  # blended elbow ring
        t = np.array([0.0, 0.0, 0.5])
        transforms = identity_transforms()
        transforms[JointId.WristLeft] = BoneTransform(rotation=np.eye(3), translation=t)
        posed = skin(rig, transforms)
        assert np.allclose(posed[vertex], rig.vertices[vertex] + t / 2, atol=1e-12)

    def test_full_weight_vertex_moves_rigidly(self):
        rig = build_rig(BIND_POSE, CFG)
        head_bone = BONES.index(JointId.Head)
        per_bone = 2 * CFG.segments + 2
        vertex = head_bone * per_bone + CFG.segments  # leaf ring, weight 1
        t = np.array([1.0, 2.0, 3.0])
        transforms = identity_transforms()
        transforms[JointId.Head] = BoneTransform(rotation=np.eye(3), translation=t)
        posed = skin(rig, transforms)
        assert np.allclose(posed[vertex], rig.vertices[vertex] + t, atol=1e-12)


def tri_vertices(*screen_points, z):
    """Camera-space points that project to the given (u, v) under FLAT_CAM."""
    return np.array([[u * z, -v * z, z] for u, v in screen_points], dtype=np.float64)


class TestRasterize:
    def blank(self, w=4, h=4):
        return ImageBuffer.filled(w, h, (0, 0, 0))

    def test_empty_triangle_list(self):
        target = self.blank()
        out = rasterize(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32),
                        np.zeros((0, 3), dtype=np.uint8), FLAT_CAM, target)
        assert out == target

    def test_zero_area_triangle_writes_nothing(self):
        posed = tri_vertices((0.5, 0.5), (2.5, 2.5), (1.5, 1.5), z=1.0)
        out = rasterize(posed, np.array([[0, 1, 2]]), np.array([[255, 0, 0]]),
                        FLAT_CAM, self.blank())
        assert out == self.blank()

    def test_behind_camera_triangle_skipped(self):
        posed = tri_vertices((0.5, 0.5), (2.5, 0.5), (2.5, 2.5), z=1.0)
        posed[0, 2] = -1.0
        out = rasterize(posed, np.array([[0, 1, 2]]), np.array([[255, 0, 0]]),
                        FLAT_CAM, self.blank())
        assert out == self.blank()

    def test_nearer_triangle_wins(self):
        # two triangles over the same pixels; the z=2 one must show
        near = tri_vertices((0.0, 0.0), (4.0, 0.0), (0.0, 4.0), z=2.0)
        far = tri_vertices((0.0, 0.0), (4.0, 0.0), (0.0, 4.0), z=3.0)
        colors = np.array([[200, 40, 40], [40, 200, 40]], dtype=np.uint8)
        for order, near_idx in (((0, 1), 0), ((1, 0), 1)):
            posed = np.vstack([(near, far)[i] for i in order])
            tris = np.array([[0, 1, 2], [3, 4, 5]])
            out = rasterize(posed, tris, colors[list(order)], FLAT_CAM,
                            self.blank(), ambient=1.0)
            for x, y in ((0, 0), (1, 0), (0, 1)):
                assert out.pixel(x, y) == (200, 40, 40), (order, x, y)

    def test_quad_split_covers_each_pixel_exactly_once(self):
        # shared diagonal passes through pixel centers; the top-left rule
        # must assign them to exactly one triangle
        a, b, c, d = (0.5, 0.5), (2.5, 0.5), (2.5, 2.5), (0.5, 2.5)
        t1 = tri_vertices(a, b, c, z=1.0)
        t2 = tri_vertices(a, c, d, z=1.0)
        posed = np.vstack([t1, t2])
        tris = np.array([[0, 1, 2], [3, 4, 5]])
        colors = np.array([[255, 0, 0], [0, 255, 0]], dtype=np.uint8)
        out = rasterize(posed, tris, colors, FLAT_CAM, self.blank(), ambient=1.0)
        covered = {(x, y) for x in range(4) for y in range(4)
                   if out.pixel(x, y) != (0, 0, 0)}
        assert covered == {(0, 0), (1, 0), (0, 1), (1, 1)}

        # rendering either triangle alone shows who owns the diagonal:
        # the upper-right triangle's c->a edge heads up (toward -v)
        alone1 = rasterize(t1, np.array([[0, 1, 2]]), colors[:1], FLAT_CAM,
                           self.blank(), ambient=1.0)
        alone2 = rasterize(t2, np.array([[0, 1, 2]]), colors[1:], FLAT_CAM,
                           self.blank(), ambient=1.0)
        assert alone1.pixel(1, 1) == (255, 0, 0)
        assert alone2.pixel(1, 1) == (0, 0, 0)
        for x, y in ((0, 0), (1, 0), (0, 1), (1, 1)):
            owners = (alone1.pixel(x, y) != (0, 0, 0)) + (alone2.pixel(x, y) != (0, 0, 0))
            assert owners == 1, (x, y)

    def test_shading_bounds(self):
        posed = tri_vertices((0.0, 0.0), (4.0, 0.0), (0.0, 4.0), z=2.0)
        base = np.array([[200, 100, 50]], dtype=np.uint8)
        out = rasterize(posed, np.array([[0, 1, 2]]), base, FLAT_CAM,
                        self.blank(), ambient=0.3)
        changed = out.pixels[np.any(out.pixels != 0, axis=2)]
        for c in range(3):
            lo = round(0.3 * base[0, c])
            assert np.all(changed[:, c] >= lo)
            assert np.all(changed[:, c] <= base[0, c])


class TestRenderAvatar:
    def frame(self):
        return ImageBuffer.filled(640, 480, (180, 180, 180))

    def test_deterministic(self):
        a = render_avatar(self.frame(), synth_pose(0), CameraIntrinsics(525.0, 525.0, 319.5, 239.5), CFG)
        b = render_avatar(self.frame(), synth_pose(0), CameraIntrinsics(525.0, 525.0, 319.5, 239.5), CFG)
        assert a == b

    def test_covers_nonzero_pixels_and_locality(self):
        frame = self.frame()
        out = render_avatar(frame, synth_pose(0), CameraIntrinsics(525.0, 525.0, 319.5, 239.5), CFG)
        diff = np.any(out.pixels != frame.pixels, axis=2)
        assert diff.sum() > 1000
        # uncovered pixels are bit-identical to the background
        assert np.array_equal(out.pixels[~diff], frame.pixels[~diff])

    def test_translated_pose_shifts_footprint_right(self):
        frame = self.frame()
        cam = CameraIntrinsics(525.0, 525.0, 319.5, 239.5)
        out0 = render_avatar(frame, synth_pose(0), cam, CFG)
        moved = synth_pose(0).translated((0.1, 0.0, 0.0))
        out1 = render_avatar(frame, moved, cam, CFG)
        cols0 = np.nonzero(np.any(out0.pixels != frame.pixels, axis=2))[1]
        cols1 = np.nonzero(np.any(out1.pixels != frame.pixels, axis=2))[1]
        assert cols1.mean() > cols0.mean() + 10

    def test_golden_render_snapshot(self):
        # frozen first-run output; any rasterization change must be deliberate
        import pathlib

        golden_path = pathlib.Path(__file__).parent / "fixtures" / "golden_avatar.bmp"
        from reveil.imaging import encode_bmp

        out = render_avatar(self.frame(), synth_pose(0),
                            CameraIntrinsics(525.0, 525.0, 319.5, 239.5), CFG)
        assert encode_bmp(out) == golden_path.read_bytes()
        diff = np.any(out.pixels != self.frame().pixels, axis=2)
        assert int(diff.sum()) == 20394  # golden coverage count

    def test_propagates_behind_camera(self):
        joints = {jid: Joint((0.0, 0.0, -2.0), TrackingState.TRACKED) for jid in JointId}
        with pytest.raises(BehindCamera):
            render_avatar(self.frame(), SkeletonPose.from_joints(joints),
                          CameraIntrinsics(525.0, 525.0, 319.5, 239.5), CFG)


class TestRenderConfig:
    def test_defaults_valid(self):
        cfg = RenderConfig()
        assert cfg.segments == 8
        assert len(cfg.radii) == 19
        assert len(cfg.part_colors) == 19

    def test_validation(self):
        with pytest.raises(ValueError):
            RenderConfig(segments=2)
        with pytest.raises(ValueError):
            RenderConfig(ambient=1.5)
        with pytest.raises(ValueError):
            RenderConfig(radii=(0.1,) * 18)
        with pytest.raises(ValueError):
            RenderConfig(light_dir=(0.0, 0.0, 0.0))
