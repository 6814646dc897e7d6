"""Image I/O, manifests, fold plans and synthetic data."""

from .manifest import FoldPlan, Sample, read_manifest, split_folds, write_manifest
from .pnm import PNMError, load_image, minmax_scale, save_image
from .synthetic import make_blank_scene, make_face_scene, make_synthetic_orientation_set

__all__ = ["FoldPlan", "Sample", "read_manifest", "split_folds", "write_manifest", "PNMError",
           "load_image", "minmax_scale", "save_image", "make_blank_scene", "make_face_scene",
           "make_synthetic_orientation_set"]
