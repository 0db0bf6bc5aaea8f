#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "histmap/raster.hpp"

namespace histmap {

inline constexpr Rgb kPaperWhite{245, 240, 225};

/// Degradation settings.
///
/// JSON schema (all keys optional):
/// {
///   "blur_enabled": true,
///   "dust_enabled": true,
///   "dust_asset": "procedural" | "<path to RGBA png>",
///   "dust_alpha_range": [0.25, 0.6],
///   "dust_crop_range": [0.5, 1.0],
///   "fade_enabled": true,
///   "fade_strength_range": [0.0, 0.25],
///   "fade_noise": 0.5,
///   "fade_noise_cell_px": 64,
///   "master_seed": 42
/// }
struct DegradationConfig {
    bool blur_enabled = true;
    bool dust_enabled = true;
    std::string dust_asset = "procedural";
    std::array<double, 2> dust_alpha_range{0.25, 0.6};
    /// Crop side as a fraction of the largest tile-shaped window fitting the asset.
    std::array<double, 2> dust_crop_range{0.5, 1.0};
    bool fade_enabled = true;
    std::array<double, 2> fade_strength_range{0.0, 0.25};
    double fade_noise = 0.5;      ///< 0 disables the value-noise modulation
    int fade_noise_cell_px = 64;
    std::uint64_t master_seed = 42;

    bool any_enabled() const { return blur_enabled || dust_enabled || fade_enabled; }

    /// Throws ConfigError when a range is unordered or outside [0, 1].
    void validate() const;

    static DegradationConfig disabled();
    static DegradationConfig from_json(std::string_view text);
    static DegradationConfig load(const std::string& path);
    std::string to_json() const;
};

/// Binomial 3x3 blur, kernel [1,2,1]^T [1,2,1] / 16, replicate borders,
/// exact integer arithmetic with half-up rounding.
RasterImage gaussian_blur_3x3(const RasterImage& image);

/// Parameters drawn for one dust composite.
struct DustPlacement {
    double crop_fraction = 1.0; ///< in (0, 1]
    double crop_u = 0.5;        ///< crop origin position in [0, 1] along free x range
    double crop_v = 0.5;
    double angle_deg = 0.0;
    double alpha = 1.0;
};

/// Draws crop, angle (uniform [0, 360)) and global alpha from `rng_seed`.
DustPlacement sample_dust_placement(std::uint64_t rng_seed, std::array<double, 2> alpha_range,
                                    std::array<double, 2> crop_range);

/// Composites `asset` over `image`: the crop is scaled to the tile, rotated
/// about the tile center, sampled bilinearly with replicated edges, and
/// blended as out = (1 - alpha*A) * image + alpha*A * dust_rgb.
RasterImage dust_overlay(const RasterImage& image, const RgbaImage& asset, const DustPlacement& placement);

RasterImage dust_overlay(const RasterImage& image, const RgbaImage& asset, std::uint64_t seed,
                         std::array<double, 2> alpha_range, std::array<double, 2> crop_range = {0.5, 1.0});

/// Linear blend toward paper white. With noise_amplitude > 0 the per-pixel
/// strength is strength * (1 - a + a * n(x, y)) where n is bilinear value
/// noise in [0, 1] (smoothstep-eased, lattice every cell_px pixels, lattice
/// values drawn from SplitMix64(seed) row by row).
RasterImage color_fade(const RasterImage& image, double strength, std::uint64_t seed,
                       double noise_amplitude = 0.0, int cell_px = 64);

/// Procedural dust: black RGB with alpha from seeded blobs spread by dart
/// throwing (minimum spacing) plus fine specks.
RgbaImage generate_dust(int width, int height, std::uint64_t seed);

/// Prepared degradation pipeline. Loads or generates the dust asset once;
/// apply() is const and safe to call from several threads.
class Degrader {
public:
    explicit Degrader(DegradationConfig config);

    const DegradationConfig& config() const { return config_; }

    /// fade -> dust -> blur, each iff enabled, seeded by
    /// derive_tile_seed(master_seed, tile_id). Draw order from the tile RNG:
    /// fade strength, noise seed, dust placement seed.
    RasterImage apply(const RasterImage& image, std::uint64_t tile_id) const;

private:
    DegradationConfig config_;
    std::shared_ptr<const RgbaImage> asset_;
};

inline constexpr int kProceduralDustSize = 1024;

RasterImage degrade_tile(const RasterImage& image, const DegradationConfig& config, std::uint64_t tile_id);

} // namespace histmap
