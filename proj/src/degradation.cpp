#include "histmap/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "histmap/errors.hpp"
#include "histmap/random.hpp"

namespace histmap {

using json = nlohmann::json;

namespace {

std::uint8_t round_to_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

// sin and cos of an angle in degrees using only IEEE basic arithmetic, so
// the result does not depend on the platform's libm.
void sincos_deg(double degrees, double& s, double& c) {
    constexpr double kPi = 3.14159265358979323846;
    const double q = std::floor(degrees / 90.0);
    double r = degrees - 90.0 * q; // [0, 90)
    int quadrant = static_cast<int>(q) % 4;
    if (quadrant < 0) quadrant += 4;
    const bool complement = r > 45.0;
    if (complement) r = 90.0 - r;
    const double x = r * (kPi / 180.0);
    const double x2 = x * x;
    // Taylor series to x^17 / x^16; |x| <= pi/4 keeps the error below 1e-17.
    double sn = 0.0;
    double cs = 0.0;
    {
        double term = x;
        sn = term;
        for (int k = 1; k <= 8; ++k) {
            term *= -x2 / double((2 * k) * (2 * k + 1));
            sn += term;
        }
        term = 1.0;
        cs = term;
        for (int k = 1; k <= 8; ++k) {
            term *= -x2 / double((2 * k - 1) * (2 * k));
            cs += term;
        }
    }
    if (complement) std::swap(sn, cs);
    switch (quadrant) {
    case 0: s = sn; c = cs; break;
    case 1: s = cs; c = -sn; break;
    case 2: s = -sn; c = -cs; break;
    default: s = -cs; c = sn; break;
    }
}

// Bilinear sample of one RGBA channel set at continuous position (u, v) in
// pixel units (texel centers at i + 0.5), edges replicated.
void sample_bilinear(const RgbaImage& img, double u, double v, double out[4]) {
    const double fx = u - 0.5;
    const double fy = v - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const double tx = fx - x0f;
    const double ty = fy - y0f;
    auto clampi = [](double p, int hi) { return static_cast<int>(std::clamp(p, 0.0, double(hi))); };
    const int x0 = clampi(x0f, img.width() - 1);
    const int x1 = clampi(x0f + 1.0, img.width() - 1);
    const int y0 = clampi(y0f, img.height() - 1);
    const int y1 = clampi(y0f + 1.0, img.height() - 1);
    const std::uint8_t* p00 = img.pixel(x0, y0);
    const std::uint8_t* p10 = img.pixel(x1, y0);
    const std::uint8_t* p01 = img.pixel(x0, y1);
    const std::uint8_t* p11 = img.pixel(x1, y1);
    for (int ch = 0; ch < 4; ++ch) {
        const double top = p00[ch] + (p10[ch] - p00[ch]) * tx;
        const double bottom = p01[ch] + (p11[ch] - p01[ch]) * tx;
        out[ch] = top + (bottom - top) * ty;
    }
}

std::array<double, 2> range_from_json(const json& j, const char* key, std::array<double, 2> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ConfigError(std::string(key) + " must be [lo, hi]");
    return {r[0].get<double>(), r[1].get<double>()};
}

void check_range(std::array<double, 2> r, const char* name) {
    if (!(r[0] >= 0.0 && r[1] <= 1.0 && r[0] <= r[1]))
        throw ConfigError(std::string(name) + " must satisfy 0 <= lo <= hi <= 1");
}

double draw_in(SplitMix64& rng, std::array<double, 2> r) { return r[0] + (r[1] - r[0]) * rng.uniform(); }

} // namespace

void DegradationConfig::validate() const {
    check_range(dust_alpha_range, "dust_alpha_range");
    check_range(dust_crop_range, "dust_crop_range");
    if (!(dust_crop_range[0] > 0.0)) throw ConfigError("dust_crop_range lower bound must be > 0");
    check_range(fade_strength_range, "fade_strength_range");
    if (!(fade_noise >= 0.0 && fade_noise <= 1.0)) throw ConfigError("fade_noise must be in [0, 1]");
    if (fade_noise_cell_px < 1) throw ConfigError("fade_noise_cell_px must be >= 1");
    if (dust_enabled && dust_asset.empty()) throw ConfigError("dust_asset must be 'procedural' or a PNG path");
}

DegradationConfig DegradationConfig::disabled() {
    DegradationConfig c;
    c.blur_enabled = false;
    c.dust_enabled = false;
    c.fade_enabled = false;
    return c;
}

DegradationConfig DegradationConfig::from_json(std::string_view text) {
    DegradationConfig c;
    try {
        const json j = json::parse(text);
        c.blur_enabled = j.value("blur_enabled", c.blur_enabled);
        c.dust_enabled = j.value("dust_enabled", c.dust_enabled);
        c.dust_asset = j.value("dust_asset", c.dust_asset);
        c.dust_alpha_range = range_from_json(j, "dust_alpha_range", c.dust_alpha_range);
        c.dust_crop_range = range_from_json(j, "dust_crop_range", c.dust_crop_range);
        c.fade_enabled = j.value("fade_enabled", c.fade_enabled);
        c.fade_strength_range = range_from_json(j, "fade_strength_range", c.fade_strength_range);
        c.fade_noise = j.value("fade_noise", c.fade_noise);
        c.fade_noise_cell_px = j.value("fade_noise_cell_px", c.fade_noise_cell_px);
        c.master_seed = j.value("master_seed", c.master_seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("degradation config: ") + e.what());
    }
    c.validate();
    return c;
}

DegradationConfig DegradationConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read degradation config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string DegradationConfig::to_json() const {
    json j{{"blur_enabled", blur_enabled},
           {"dust_enabled", dust_enabled},
           {"dust_asset", dust_asset},
           {"dust_alpha_range", dust_alpha_range},
           {"dust_crop_range", dust_crop_range},
           {"fade_enabled", fade_enabled},
           {"fade_strength_range", fade_strength_range},
           {"fade_noise", fade_noise},
           {"fade_noise_cell_px", fade_noise_cell_px},
           {"master_seed", master_seed}};
    return j.dump(2);
}

RasterImage gaussian_blur_3x3(const RasterImage& image) {
    const int w = image.width();
    const int h = image.height();
    RasterImage out(w, h);
    if (image.empty()) return out;
    // Horizontal pass keeps exact sums (weights 1,2,1), vertical pass the same,
    // giving a total weight of 16 before the single rounding step.
    std::vector<int> tmp(std::size_t(w) * h * 3);
    const auto src = image.bytes();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t l = (std::size_t(y) * w + std::max(x - 1, 0)) * 3;
            const std::size_t m = (std::size_t(y) * w + x) * 3;
            const std::size_t r = (std::size_t(y) * w + std::min(x + 1, w - 1)) * 3;
            for (int c = 0; c < 3; ++c) tmp[m + c] = src[l + c] + 2 * src[m + c] + src[r + c];
        }
    auto dst = out.bytes();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t u = (std::size_t(std::max(y - 1, 0)) * w + x) * 3;
            const std::size_t m = (std::size_t(y) * w + x) * 3;
            const std::size_t d = (std::size_t(std::min(y + 1, h - 1)) * w + x) * 3;
            for (int c = 0; c < 3; ++c) dst[m + c] = std::uint8_t((tmp[u + c] + 2 * tmp[m + c] + tmp[d + c] + 8) / 16);
        }
    return out;
}

DustPlacement sample_dust_placement(std::uint64_t rng_seed, std::array<double, 2> alpha_range,
                                    std::array<double, 2> crop_range) {
    SplitMix64 rng(rng_seed);
    DustPlacement p;
    p.crop_fraction = draw_in(rng, crop_range);
    p.crop_u = rng.uniform();
    p.crop_v = rng.uniform();
    p.angle_deg = 360.0 * rng.uniform();
    p.alpha = draw_in(rng, alpha_range);
    return p;
}

RasterImage dust_overlay(const RasterImage& image, const RgbaImage& asset, const DustPlacement& placement) {
    if (asset.width() < 1 || asset.height() < 1) throw AssetError("dust asset is empty");
    if (!(placement.crop_fraction > 0.0 && placement.crop_fraction <= 1.0))
        throw ConfigError("dust crop fraction must be in (0, 1]");
    const int w = image.width();
    const int h = image.height();
    RasterImage out(w, h);
    if (image.empty()) return out;

    // Largest window with the tile's aspect ratio that fits the asset.
    const double max_w = std::min(double(asset.width()), double(asset.height()) * w / h);
    const double crop_w = placement.crop_fraction * max_w;
    const double crop_h = crop_w * h / w;
    const double crop_x = placement.crop_u * (asset.width() - crop_w);
    const double crop_y = placement.crop_v * (asset.height() - crop_h);
    const double center_x = crop_x + crop_w / 2.0;
    const double center_y = crop_y + crop_h / 2.0;
    const double k = crop_w / w; // asset pixels per tile pixel
    double s = 0.0;
    double c = 1.0;
    sincos_deg(placement.angle_deg, s, c);

    double texel[4];
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x + 0.5 - w / 2.0;
            const double dy = y + 0.5 - h / 2.0;
            const double u = center_x + k * (dx * c - dy * s);
            const double v = center_y + k * (dx * s + dy * c);
            sample_bilinear(asset, u, v, texel);
            const double a = placement.alpha * texel[3] / 255.0;
            const Rgb in = image.at(x, y);
            out.set(x, y,
                    {round_to_u8((1.0 - a) * in.r + a * texel[0]), round_to_u8((1.0 - a) * in.g + a * texel[1]),
                     round_to_u8((1.0 - a) * in.b + a * texel[2])});
        }
    }
    return out;
}

RasterImage dust_overlay(const RasterImage& image, const RgbaImage& asset, std::uint64_t seed,
                         std::array<double, 2> alpha_range, std::array<double, 2> crop_range) {
    return dust_overlay(image, asset, sample_dust_placement(seed, alpha_range, crop_range));
}

RasterImage color_fade(const RasterImage& image, double strength, std::uint64_t seed, double noise_amplitude,
                       int cell_px) {
    if (!(strength >= 0.0 && strength <= 1.0)) throw RangeError("fade strength must be in [0, 1]");
    const int w = image.width();
    const int h = image.height();
    RasterImage out(w, h);
    if (image.empty()) return out;

    std::vector<double> lattice;
    int gx = 0;
    if (noise_amplitude > 0.0) {
        if (cell_px < 1) throw ConfigError("noise cell size must be >= 1");
        gx = w / cell_px + 2;
        const int gy = h / cell_px + 2;
        SplitMix64 rng(seed);
        lattice.resize(std::size_t(gx) * gy);
        for (auto& v : lattice) v = rng.uniform();
    }
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double t = strength;
            if (!lattice.empty()) {
                const double fx = (x + 0.5) / cell_px;
                const double fy = (y + 0.5) / cell_px;
                const int ix = static_cast<int>(fx);
                const int iy = static_cast<int>(fy);
                const double sx = smooth(fx - ix);
                const double sy = smooth(fy - iy);
                const double* row0 = lattice.data() + std::size_t(iy) * gx;
                const double* row1 = row0 + gx;
                const double top = row0[ix] + (row0[ix + 1] - row0[ix]) * sx;
                const double bottom = row1[ix] + (row1[ix + 1] - row1[ix]) * sx;
                const double n = top + (bottom - top) * sy;
                t = strength * (1.0 - noise_amplitude + noise_amplitude * n);
            }
            const Rgb p = image.at(x, y);
            out.set(x, y,
                    {round_to_u8(p.r + (kPaperWhite.r - p.r) * t), round_to_u8(p.g + (kPaperWhite.g - p.g) * t),
                     round_to_u8(p.b + (kPaperWhite.b - p.b) * t)});
        }
    }
    return out;
}

RgbaImage generate_dust(int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw ConfigError("dust asset dimensions must be positive");
    SplitMix64 rng(seed);
    std::vector<double> alpha(std::size_t(width) * height, 0.0);

    auto splat = [&](double cx, double cy, double radius, double strength) {
        const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + radius)));
        const double r2 = radius * radius;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                const double q = 1.0 - (dx * dx + dy * dy) / r2;
                if (q > 0.0) alpha[std::size_t(y) * width + x] += strength * q * q;
            }
    };

    const double area = double(width) * height;
    // Blobs spread by dart throwing with a minimum spacing (blue-noise layout).
    const int blob_count = std::max(1, static_cast<int>(area / 2500.0));
    const double min_spacing = std::sqrt(area / blob_count) * 0.5;
    std::vector<std::pair<double, double>> centers;
    for (int b = 0; b < blob_count; ++b) {
        double cx = 0.0, cy = 0.0;
        for (int attempt = 0; attempt < 30; ++attempt) {
            cx = rng.uniform(0.0, width);
            cy = rng.uniform(0.0, height);
            bool ok = true;
            for (const auto& [px, py] : centers)
                if ((px - cx) * (px - cx) + (py - cy) * (py - cy) < min_spacing * min_spacing) {
                    ok = false;
                    break;
                }
            if (ok) break;
        }
        centers.emplace_back(cx, cy);
        const double radius = rng.uniform(1.5, 10.0);
        const double strength = rng.uniform(0.3, 1.0);
        for (int part = 0; part < 3; ++part) {
            const double ox = rng.uniform(-radius, radius);
            const double oy = rng.uniform(-radius, radius);
            splat(cx + ox, cy + oy, radius * rng.uniform(0.4, 1.0), strength);
        }
    }
    const int specks = static_cast<int>(area / 400.0);
    for (int i = 0; i < specks; ++i) {
        const double cx = rng.uniform(0.0, width);
        const double cy = rng.uniform(0.0, height);
        splat(cx, cy, rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.0));
    }
    for (int i = 0; i < 6; ++i) {
        const double cx = rng.uniform(0.0, width);
        const double cy = rng.uniform(0.0, height);
        splat(cx, cy, rng.uniform(0.04, 0.12) * std::max(width, height), rng.uniform(0.05, 0.15));
    }

    RgbaImage out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out.pixel(x, y)[3] = round_to_u8(255.0 * std::min(1.0, alpha[std::size_t(y) * width + x]));
    return out;
}

Degrader::Degrader(DegradationConfig config) : config_(std::move(config)) {
    config_.validate();
    if (!config_.dust_enabled) return;
    if (config_.dust_asset == "procedural") {
        asset_ = std::make_shared<RgbaImage>(
            generate_dust(kProceduralDustSize, kProceduralDustSize, mix64(config_.master_seed ^ 0x64757374ULL)));
    } else {
        try {
            asset_ = std::make_shared<RgbaImage>(read_png_rgba(config_.dust_asset));
        } catch (const Error& e) {
            throw AssetError("dust asset '" + config_.dust_asset + "' unreadable: " + e.what());
        }
    }
}

RasterImage Degrader::apply(const RasterImage& image, std::uint64_t tile_id) const {
    SplitMix64 rng(derive_tile_seed(config_.master_seed, tile_id));
    const double strength = draw_in(rng, config_.fade_strength_range);
    const std::uint64_t noise_seed = rng.next();
    const std::uint64_t dust_seed = rng.next();

    RasterImage out = image;
    if (config_.fade_enabled)
        out = color_fade(out, strength, noise_seed, config_.fade_noise, config_.fade_noise_cell_px);
    if (config_.dust_enabled)
        out = dust_overlay(out, *asset_, dust_seed, config_.dust_alpha_range, config_.dust_crop_range);
    if (config_.blur_enabled) out = gaussian_blur_3x3(out);
    return out;
}

RasterImage degrade_tile(const RasterImage& image, const DegradationConfig& config, std::uint64_t tile_id) {
    return Degrader(config).apply(image, tile_id);
}

} // namespace histmap
