"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 format error (not a supported
BMP / not a stego frame / malformed inputs), 3 integrity error (CRC
mismatch), 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .imaging import BmpError, decode_bmp, psnr
from .masking import MaskConfig
from .pipeline import (
    FrameError,
    FrameTooNarrow,
    MissingPoseFile,
    NonContiguousFrames,
    PipelineConfig,
    process_sequence,
)
from .skeleton import BehindCamera, NoTrackedJoints, PoseFormatError
from .stego import (
    HEADER_PIXELS,
    CrcMismatch,
    NotStego,
    StegoError,
    decode_header_bits,
    extract,
)

USAGE_ERROR, FORMAT_ERROR, INTEGRITY_ERROR, IO_ERROR = 1, 2, 3, 4

_FORMAT_ERRORS = (
    BmpError,
    StegoError,  # NotStego, UnsupportedVersion, InvalidHeader, MalformedRoi, ...
    PoseFormatError,
    NonContiguousFrames,
    FrameTooNarrow,
    NoTrackedJoints,
    BehindCamera,
    ValueError,  # covers DimensionMismatch and RectOutOfBounds
)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, FrameError) and exc.__cause__ is not None:
        return _exit_code(exc.__cause__)
    if isinstance(exc, CrcMismatch):
        return INTEGRITY_ERROR
    if isinstance(exc, (OSError, MissingPoseFile)):
        return IO_ERROR
    if isinstance(exc, _FORMAT_ERRORS):
        return FORMAT_ERROR
    raise exc  # a bug, not an input problem: let it surface


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2
    # for format errors and uses 1 for usage
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="reveil", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deidentify", help="conceal the person in every frame")
    p.add_argument("--in", dest="in_dir", required=True, metavar="DIR")
    p.add_argument("--out", dest="out_dir", required=True, metavar="DIR")
    p.add_argument("--k", type=int, choices=range(1, 8), default=4,
                   help="stego bit depth (default 4)")
    p.add_argument("--padding", type=int, default=24, metavar="PX")
    p.add_argument("--block", type=int, default=8, metavar="PX")
    p.add_argument("--blur-radius", type=int, default=2, metavar="PX")
    p.add_argument("--blur-passes", type=int, default=1, metavar="N")
    p.set_defaults(func=_cmd_deidentify)

    p = sub.add_parser("reidentify", help="restore concealed regions")
    p.add_argument("--in", dest="in_dir", required=True, metavar="DIR")
    p.add_argument("--out", dest="out_dir", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_reidentify)

    p = sub.add_parser("synth", help="generate a synthetic walking sequence")
    p.add_argument("--frames", type=int, required=True, metavar="N")
    p.add_argument("--out", dest="out_dir", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("inspect", help="print a stego frame's header")
    p.add_argument("--frame", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("metrics", help="PSNR between two BMP files")
    p.add_argument("--a", required=True, metavar="FILE")
    p.add_argument("--b", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_metrics)

    return parser


def _cmd_deidentify(args) -> int:
    cfg = PipelineConfig(
        k=args.k,
        padding=args.padding,
        mask=MaskConfig(
            block=args.block,
            blur_radius=args.blur_radius,
            blur_passes=args.blur_passes,
        ),
    )
    reports = process_sequence(args.in_dir, args.out_dir, cfg, "deidentify")
    print(f"de-identified {len(reports)} frame(s) -> {args.out_dir}")
    return 0


def _cmd_reidentify(args) -> int:
    reports = process_sequence(args.in_dir, args.out_dir, PipelineConfig(), "reidentify")
    print(f"re-identified {len(reports)} frame(s) -> {args.out_dir}")
    return 0


def _cmd_synth(args) -> int:
    if args.frames < 0:
        print("frames must be >= 0", file=sys.stderr)
        return USAGE_ERROR
    reports = process_sequence(None, args.out_dir, PipelineConfig(), "synth",
                               frames=args.frames)
    print(f"generated {len(reports)} synthetic frame(s) -> {args.out_dir}")
    return 0


def _cmd_inspect(args) -> int:
    img = decode_bmp(Path(args.frame).read_bytes())
    if img.width < HEADER_PIXELS:
        raise NotStego(f"image is {img.width} px wide; a header needs {HEADER_PIXELS}")
    header = decode_header_bits((img.pixels[0, :HEADER_PIXELS] & 1).reshape(-1))
    print(f"magic: {header.magic.decode('ascii')}")
    print(f"version: {header.version}")
    print(f"k: {header.k}")
    print(f"roi: x={header.roi.x} y={header.roi.y} w={header.roi.w} h={header.roi.h}")
    print(f"crc: {header.crc:#010x}")
    try:
        extract(img)
    except CrcMismatch:
        print("crc_check: mismatch")
        return INTEGRITY_ERROR
    print("crc_check: ok")
    return 0


def _cmd_metrics(args) -> int:
    a = decode_bmp(Path(args.a).read_bytes())
    b = decode_bmp(Path(args.b).read_bytes())
    value = psnr(a, b)
    print("inf" if value == float("inf") else f"{value:.4f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        code = _exit_code(exc)
        print(f"reveil: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
