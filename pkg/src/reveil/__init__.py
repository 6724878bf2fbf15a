"""Reversible de-identification of image sequences.

Conceals a person in each frame behind pixelization and a skeleton-driven
3D avatar, while embedding the original pixels into the frame's
least-significant bits so an authorized decoder can restore them.
"""

from .avatar import RenderConfig, RiggedMesh, build_rig, rasterize, render_avatar, skin
from .imaging import (
    BadMagic,
    BmpError,
    DimensionMismatch,
    ImageBuffer,
    Rect,
    RectOutOfBounds,
    Truncated,
    UnsupportedFormat,
    blit,
    crop,
    decode_bmp,
    encode_bmp,
    psnr,
)
from .masking import MaskConfig, box_blur, pixelize
from .pipeline import (
    FrameError,
    FrameReport,
    FrameTooNarrow,
    MissingPoseFile,
    NonContiguousFrames,
    PipelineConfig,
    deidentify_frame,
    process_sequence,
    reidentify_frame,
)
from .skeleton import (
    BIND_POSE,
    BONES,
    DEFAULT_INTRINSICS,
    JOINT_ORDER,
    PARENTS,
    BehindCamera,
    BoneTransform,
    CameraIntrinsics,
    DegenerateBone,
    GaitParams,
    Joint,
    JointId,
    NoTrackedJoints,
    SkeletonPose,
    TrackingState,
    ZeroVector,
    bone_orientation,
    bone_transforms,
    bounding_rect,
    parse_pose,
    project,
    serialize_pose,
    synth_pose,
)
from .stego import (
    CarrierTooNarrow,
    CrcMismatch,
    InvalidHeader,
    MalformedRoi,
    NotStego,
    RoiTouchesHeaderRow,
    StegoError,
    StegoHeader,
    UnsupportedVersion,
    combine_channel,
    crc32,
    decode_header_bits,
    embed,
    encode_header,
    extract,
    recover_carrier_channel,
    recover_secret_channel,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # imaging
    "ImageBuffer", "Rect", "decode_bmp", "encode_bmp", "psnr", "crop", "blit",
    "BmpError", "BadMagic", "UnsupportedFormat", "Truncated",
    "DimensionMismatch", "RectOutOfBounds",
    # stego
    "StegoHeader", "combine_channel", "recover_secret_channel",
    "recover_carrier_channel", "crc32", "encode_header", "decode_header_bits",
    "embed", "extract", "StegoError", "InvalidHeader", "NotStego",
    "UnsupportedVersion", "CrcMismatch", "MalformedRoi", "CarrierTooNarrow",
    "RoiTouchesHeaderRow",
    # masking
    "MaskConfig", "pixelize", "box_blur",
    # skeleton
    "JointId", "TrackingState", "Joint", "SkeletonPose", "CameraIntrinsics",
    "BoneTransform", "GaitParams", "JOINT_ORDER", "PARENTS", "BONES",
    "BIND_POSE", "DEFAULT_INTRINSICS", "parse_pose", "serialize_pose",
    "project", "bounding_rect", "bone_orientation", "bone_transforms",
    "synth_pose", "BehindCamera", "NoTrackedJoints", "ZeroVector",
    "DegenerateBone",
    # avatar
    "RenderConfig", "RiggedMesh", "build_rig", "skin", "rasterize",
    "render_avatar",
    # pipeline
    "PipelineConfig", "FrameReport", "deidentify_frame", "reidentify_frame",
    "process_sequence", "FrameError", "FrameTooNarrow", "MissingPoseFile",
    "NonContiguousFrames",
]
