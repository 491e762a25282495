"""Software renderer and geometric sampler for ProtoScene programs."""

from .camera import (
    DEFAULT_FOV,
    DEFAULT_RADIUS_SCALE,
    DEFAULT_RESOLUTION,
    Camera,
    fibonacci_cameras,
    icosphere_cameras,
    icosphere_vertices,
    look_at,
    parse_rig,
    upper_hemisphere_cameras,
)
from .geometry import EmptyScene, scene_bounds, scene_sdf
from .raymarch import (
    MODES,
    DirectionalLight,
    HitBuffer,
    InvalidProgram,
    LightRig,
    RenderedView,
    RenderSet,
    image_digest,
    random_light_rig,
    render,
    render_views,
    shade,
    trace,
)
from .sampling import LabeledCentroids, PointCloud, part_centroids, sample_surface_points

__all__ = [
    "DEFAULT_FOV",
    "DEFAULT_RADIUS_SCALE",
    "DEFAULT_RESOLUTION",
    "MODES",
    "Camera",
    "DirectionalLight",
    "EmptyScene",
    "HitBuffer",
    "InvalidProgram",
    "LabeledCentroids",
    "LightRig",
    "PointCloud",
    "RenderSet",
    "RenderedView",
    "fibonacci_cameras",
    "icosphere_cameras",
    "icosphere_vertices",
    "image_digest",
    "look_at",
    "parse_rig",
    "part_centroids",
    "random_light_rig",
    "render",
    "render_views",
    "sample_surface_points",
    "scene_bounds",
    "scene_sdf",
    "shade",
    "trace",
    "upper_hemisphere_cameras",
]
