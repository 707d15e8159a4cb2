"""Latency compensation for teleoperation video by depth-based reprojection.

Images are float32 arrays of shape (H, W, 3) in [0, 1]. Depths are float64
(H, W) arrays in meters; inf, NaN and non-positive values mean "no depth".
Poses are 4x4 camera-to-world matrices (x right, y down, z forward).
"""

from ._core import (
    CameraIntrinsics,
    DataError,
    Sequence,
    backproject,
    compensate,
    depth_metrics,
    emulate_link,
    evaluate,
    inpaint,
    ms_ssim,
    open_sequence,
    plane_homography,
    predict,
    psnr,
    render,
    si_loss,
    simulate,
    ssim,
    step,
    synthetic,
    warp,
)

__all__ = [
    "CameraIntrinsics",
    "DataError",
    "Sequence",
    "backproject",
    "compensate",
    "depth_metrics",
    "emulate_link",
    "evaluate",
    "inpaint",
    "ms_ssim",
    "open_sequence",
    "plane_homography",
    "predict",
    "psnr",
    "render",
    "si_loss",
    "simulate",
    "ssim",
    "step",
    "synthetic",
    "warp",
]
