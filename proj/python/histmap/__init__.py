"""Python bindings for the histmap toolkit.

Images are ``H x W x 3`` uint8 arrays, masks ``H x W`` uint8 arrays holding
class values 1..5, feature sets ``n x d`` float arrays.
"""

from ._histmap import (
    Features,
    HistmapError,
    TileWindow,
    acw_weights,
    confusion,
    degrade,
    derive_tile_seed,
    fid,
    gaussian_blur_3x3,
    metrics,
    parse_features,
    read_feature_file,
    read_mask_png,
    render_map,
    render_mask,
    split_ids,
    sqrtm_psd,
    tile_windows,
    toy_embedder,
    write_feature_file,
    write_image_png,
    write_mask_png,
)

__version__ = "0.1.0"

__all__ = [
    "Features",
    "HistmapError",
    "TileWindow",
    "acw_weights",
    "confusion",
    "degrade",
    "derive_tile_seed",
    "fid",
    "gaussian_blur_3x3",
    "metrics",
    "parse_features",
    "read_feature_file",
    "read_mask_png",
    "render_map",
    "render_mask",
    "split_ids",
    "sqrtm_psd",
    "tile_windows",
    "toy_embedder",
    "write_feature_file",
    "write_image_png",
    "write_mask_png",
]
