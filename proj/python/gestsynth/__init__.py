"""Speech-driven gesture synthesis: features, skeleton fitting, LSTM pose regression, key-pose insertion and rendering."""

from ._gestsynth import (
    KEYPOINTS,
    POSE_DIM,
    Error,
    decode_ppm,
    encode_ppm,
    encode_transcript,
    filter_bank_energies,
    find_part_crops,
    fit_pose,
    forward_kinematics,
    infer,
    insert_motion,
    insert_still,
    letter_frequencies,
    mfcc_features,
    project_default_view,
    render_skeleton,
    rms_normalize,
    synthetic_word_pose,
    weighted_loss,
)

__all__ = [
    "KEYPOINTS",
    "POSE_DIM",
    "Error",
    "decode_ppm",
    "encode_ppm",
    "encode_transcript",
    "filter_bank_energies",
    "find_part_crops",
    "fit_pose",
    "forward_kinematics",
    "infer",
    "insert_motion",
    "insert_still",
    "letter_frequencies",
    "mfcc_features",
    "project_default_view",
    "render_skeleton",
    "rms_normalize",
    "synthetic_word_pose",
    "weighted_loss",
]
