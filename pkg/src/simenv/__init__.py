from .scenario import (
    ScenarioSpec, ObjectSetSpec, IntersectionSpec, HeightsSpec, ViewModel, ObjectnessModel,
    load_scenario, parse_scenario,
)
from .world import (
    ViewCondition, SimObject, World, build_world, build_instances, view_transform,
    sample_objectness,
)
from .frames import SimFrame, render_frame, write_stream, read_stream
from .datasets import (
    GROUND_STREAM, MANIFEST_NAME, FEATURES_CSV, build_streams, generate_datasets, load_stream,
    split_frames, sample_frames, export_features, separability_report, nearest_centroid_error,
    aerial_stream_name, heights_stream_name,
)

__all__ = [
    "ScenarioSpec", "ObjectSetSpec", "IntersectionSpec", "HeightsSpec", "ViewModel",
    "ObjectnessModel", "load_scenario", "parse_scenario",
    "ViewCondition", "SimObject", "World", "build_world", "build_instances", "view_transform",
    "sample_objectness",
    "SimFrame", "render_frame", "write_stream", "read_stream",
    "GROUND_STREAM", "MANIFEST_NAME", "FEATURES_CSV", "build_streams", "generate_datasets",
    "load_stream", "split_frames", "sample_frames", "export_features", "separability_report",
    "nearest_centroid_error", "aerial_stream_name", "heights_stream_name",
]
