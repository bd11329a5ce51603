"""Storage-efficient intelligent video surveillance pipeline.

Frames from a camera source flow through background subtraction, face and
person detection, and labelling; only frames with activity are stored, as
individual images and as CRC-checked video chunks.
"""

from vigil._core import (
    Descriptor,
    Feature,
    Frame,
    HaarCascadeModel,
    HogModel,
    Rect,
    ScanParams,
    ScoredBox,
    VigilError,
    check_config,
    decode_frame,
    default_config,
    detect_faces,
    detect_persons,
    encode_frame,
    hog_descriptor,
    iou,
    load_cascade,
    load_hog_model,
    non_max_suppression,
    pack_chunk,
    read_chunk,
    read_image,
    reduction_percent,
    run_pipeline,
    to_grayscale,
    write_frame_ppm,
)

__all__ = [
    "Descriptor",
    "Feature",
    "Frame",
    "HaarCascadeModel",
    "HogModel",
    "Rect",
    "ScanParams",
    "ScoredBox",
    "VigilError",
    "check_config",
    "decode_frame",
    "default_config",
    "detect_faces",
    "detect_persons",
    "encode_frame",
    "hog_descriptor",
    "iou",
    "load_cascade",
    "load_hog_model",
    "non_max_suppression",
    "pack_chunk",
    "read_chunk",
    "read_image",
    "reduction_percent",
    "run_pipeline",
    "to_grayscale",
    "write_frame_ppm",
]
