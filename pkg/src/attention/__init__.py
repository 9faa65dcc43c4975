from .spatial_memory import SpatialMemory, TrackedObject

__all__ = ["SpatialMemory", "TrackedObject"]
