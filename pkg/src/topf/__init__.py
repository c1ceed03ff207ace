"""Topological point features: per-point descriptors from harmonic persistent homology."""
__version__ = "0.1.0"

from .pointcloud import PointCloud, load_point_cloud, save_point_cloud, generate_benchmark
from .complex import build_filtration, build_alpha_filtration, build_vr_filtration, snapshot
from .persistence import compute_persistence
from .selection import SelectionParams, select_features
from .features import TopfConfig, FeatureMatrix, topf

__all__ = [
    "PointCloud", "load_point_cloud", "save_point_cloud", "generate_benchmark",
    "build_filtration", "build_alpha_filtration", "build_vr_filtration", "snapshot",
    "compute_persistence", "SelectionParams", "select_features",
    "TopfConfig", "FeatureMatrix", "topf",
]
