"""Toy three-stage detection cascade with fused Gabor input at every stage."""

from .boxes import BBox, Detection, calibrate, iou, nms, reg_for_target
from .detector import CascadeConfig, detect, format_detections, parse_detections, stage_net
from .pyramid import crop_resize, pyramid, resize_scale
from .scoring import DetectionScore, score
from .training import CascadeTrainConfig, train_cascade

__all__ = ["BBox", "Detection", "calibrate", "iou", "nms", "reg_for_target", "CascadeConfig", "detect",
           "format_detections", "parse_detections", "stage_net", "crop_resize", "pyramid", "resize_scale",
           "DetectionScore", "score", "CascadeTrainConfig", "train_cascade"]
