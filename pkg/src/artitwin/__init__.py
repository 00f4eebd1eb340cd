"""Articulated-object digital-twin toolkit.

URDF modelling and forward kinematics, the structured articulation JSON and
its URDF assembly, dataset regularization, point-cloud geometry, a reference
``[SEG]`` segmentation head, and reconstruction metrics.
"""

__version__ = "0.1.0"

from .articulation import ArticulationPrediction, LinkEntry, NoiseSpec, assemble_urdf, mock_predict, parse_prediction, serialize_prediction
from .executability import ExecutabilityVerdict, SweepConfig, check_executability
from .geometry import PartMask, PointCloud, TriMesh, chamfer_distance, load_cloud, load_obj, points_to_mesh, save_cloud, save_obj
from .metrics import JointErrors, axis_error, eval_joints, eval_segmentation
from .regularize import RegularizationReport, filter_by_part_count, regularize
from .report import EvalReport, aggregate_report
from .seg_decoder import SegDecoderParams, SegTokenPair, binarize, score_points, seg_loss, total_loss
from .transforms import rpy_to_matrix
from .urdf import JointSpec, Limit, LinkSpec, Pose, UrdfModel, emit_urdf, forward_kinematics, parse_urdf
from .viewsampler import ViewpointSet, sample_equatorial, sample_min_energy

__all__ = [
    "__version__",
    "ArticulationPrediction",
    "LinkEntry",
    "NoiseSpec",
    "assemble_urdf",
    "mock_predict",
    "parse_prediction",
    "serialize_prediction",
    "ExecutabilityVerdict",
    "SweepConfig",
    "check_executability",
    "PartMask",
    "PointCloud",
    "TriMesh",
    "chamfer_distance",
    "load_cloud",
    "load_obj",
    "points_to_mesh",
    "save_cloud",
    "save_obj",
    "JointErrors",
    "axis_error",
    "eval_joints",
    "eval_segmentation",
    "RegularizationReport",
    "filter_by_part_count",
    "regularize",
    "EvalReport",
    "aggregate_report",
    "SegDecoderParams",
    "SegTokenPair",
    "binarize",
    "score_points",
    "seg_loss",
    "total_loss",
    "rpy_to_matrix",
    "JointSpec",
    "Limit",
    "LinkSpec",
    "Pose",
    "UrdfModel",
    "emit_urdf",
    "forward_kinematics",
    "parse_urdf",
    "ViewpointSet",
    "sample_equatorial",
    "sample_min_energy",
]
