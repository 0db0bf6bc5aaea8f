#include "histmap/mosaic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "histmap/dataset.hpp"
#include "histmap/errors.hpp"
#include "json_window.hpp"

namespace histmap {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kGridTolerance = 1e-6;

int snap(double v, const char* what) {
    const double r = std::round(v);
    if (std::abs(v - r) > kGridTolerance)
        throw LayoutError(std::string(what) + " is off the common pixel grid by " + std::to_string(v - r) + " px");
    return static_cast<int>(r);
}

template <class Placed>
std::vector<const Placed*> by_tile_id(std::span<const Placed> patches) {
    std::vector<const Placed*> order;
    for (const auto& p : patches) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(),
                     [](const Placed* a, const Placed* b) { return a->window.tile_id < b->window.tile_id; });
    return order;
}

template <class Image>
void check_patch(const Image& img, const TileWindow& w) {
    if (img.width() != w.width_px || img.height() != w.height_px)
        throw LayoutError("patch for tile " + std::to_string(w.tile_id) + " is " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " but its window is " + std::to_string(w.width_px) + "x" +
                          std::to_string(w.height_px));
}

void check_scale(const MosaicLayout& layout, const TileWindow& w) {
    if (std::abs(w.scale - layout.scale) > 1e-12 * layout.scale)
        throw LayoutError("tile " + std::to_string(w.tile_id) + " has scale " + std::to_string(w.scale) +
                          ", layout uses " + std::to_string(layout.scale));
}

} // namespace

Affine Affine::north_up(double origin_x, double origin_y, double scale) {
    const double px = 1.0 / scale;
    return {{px, 0.0, 0.0, -px, origin_x + 0.5 * px, origin_y - 0.5 * px}};
}

MosaicLayout MosaicLayout::from_windows(std::vector<MosaicEntry> entries) {
    if (entries.empty()) throw LayoutError("mosaic layout has no entries");
    MosaicLayout layout;
    layout.scale = entries.front().window.scale;
    layout.origin_x = entries.front().window.origin_x;
    layout.origin_y = entries.front().window.origin_y;
    for (const auto& e : entries) {
        e.window.validate();
        check_scale(layout, e.window);
        layout.origin_x = std::min(layout.origin_x, e.window.origin_x);
        layout.origin_y = std::max(layout.origin_y, e.window.origin_y);
    }
    for (const auto& e : entries) {
        const auto [ox, oy] = layout.offset_of(e.window);
        layout.width_px = std::max(layout.width_px, ox + e.window.width_px);
        layout.height_px = std::max(layout.height_px, oy + e.window.height_px);
    }
    layout.affine = Affine::north_up(layout.origin_x, layout.origin_y, layout.scale);
    layout.entries = std::move(entries);
    return layout;
}

std::array<int, 2> MosaicLayout::offset_of(const TileWindow& window) const {
    return {snap((window.origin_x - origin_x) * scale, "window x offset"),
            snap((origin_y - window.origin_y) * scale, "window y offset")};
}

MosaicLayout MosaicLayout::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LayoutError("cannot read layout '" + path.string() + "'");
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        const fs::path fp(p);
        return (fp.is_absolute() ? fp : base / fp).string();
    };
    std::vector<MosaicEntry> entries;
    try {
        const json j = json::parse(in);
        if (j.contains("manifest")) {
            const auto manifest = DatasetManifest::load(resolve(j.at("manifest").get<std::string>()));
            const std::string dir = j.value("patch_dir", std::string("."));
            const std::string suffix = j.value("patch_suffix", std::string(".png"));
            for (const auto& e : manifest.entries)
                entries.push_back({resolve((fs::path(dir) / (e.pair_id + suffix)).string()), e.window});
        } else if (j.contains("entries")) {
            for (const auto& e : j.at("entries"))
                entries.push_back({resolve(e.at("patch").get<std::string>()), detail::window_from_json(e.at("window"))});
        } else {
            throw LayoutError("layout needs either 'manifest' or 'entries'");
        }
    } catch (const json::exception& e) {
        throw LayoutError("layout '" + path.string() + "': " + e.what());
    } catch (const ConfigError& e) {
        throw LayoutError("layout '" + path.string() + "': " + e.what());
    }
    return from_windows(std::move(entries));
}

RasterImage stitch_rgb(const MosaicLayout& layout, std::span<const PlacedImage> patches) {
    RasterImage out(layout.width_px, layout.height_px);
    for (const PlacedImage* p : by_tile_id(patches)) {
        check_scale(layout, p->window);
        check_patch(*p->image, p->window);
        const auto [ox, oy] = layout.offset_of(p->window);
        if (ox < 0 || oy < 0 || ox + p->window.width_px > out.width() || oy + p->window.height_px > out.height())
            throw LayoutError("tile " + std::to_string(p->window.tile_id) + " lies outside the mosaic extent");
        const auto src = p->image->bytes();
        auto dst = out.bytes();
        const std::size_t row = std::size_t(p->window.width_px) * 3;
        for (int y = 0; y < p->window.height_px; ++y)
            std::copy_n(src.begin() + std::ptrdiff_t(y * row), row,
                        dst.begin() + std::ptrdiff_t((std::size_t(oy + y) * out.width() + ox) * 3));
    }
    return out;
}

ClassMask stitch_mask(const MosaicLayout& layout, std::span<const PlacedMask> patches, MaskOverlap policy) {
    if (policy == MaskOverlap::last_write) {
        ClassMask out(layout.width_px, layout.height_px, 0);
        for (const PlacedMask* p : by_tile_id(patches)) {
            check_scale(layout, p->window);
            check_patch(*p->mask, p->window);
            const auto [ox, oy] = layout.offset_of(p->window);
            if (ox < 0 || oy < 0 || ox + p->window.width_px > layout.width_px || oy + p->window.height_px > layout.height_px)
                throw LayoutError("tile " + std::to_string(p->window.tile_id) + " lies outside the mosaic extent");
            for (int y = 0; y < p->window.height_px; ++y)
                for (int x = 0; x < p->window.width_px; ++x) out.set(ox + x, oy + y, p->mask->at(x, y));
        }
        return out;
    }
    const std::size_t pixels = std::size_t(layout.width_px) * layout.height_px;
    int max_value = 0;
    for (const auto& p : patches) {
        check_scale(layout, p.window);
        check_patch(*p.mask, p.window);
        for (auto v : p.mask->values()) max_value = std::max<int>(max_value, v);
    }
    const std::size_t bins = std::size_t(max_value) + 1;
    std::vector<std::uint32_t> votes(pixels * bins, 0);
    std::vector<std::uint8_t> covered(pixels, 0);
    for (const auto& p : patches) {
        const auto [ox, oy] = layout.offset_of(p.window);
        if (ox < 0 || oy < 0 || ox + p.window.width_px > layout.width_px || oy + p.window.height_px > layout.height_px)
            throw LayoutError("tile " + std::to_string(p.window.tile_id) + " lies outside the mosaic extent");
        for (int y = 0; y < p.window.height_px; ++y)
            for (int x = 0; x < p.window.width_px; ++x) {
                const std::size_t i = std::size_t(oy + y) * layout.width_px + (ox + x);
                ++votes[i * bins + p.mask->at(x, y)];
                covered[i] = 1;
            }
    }
    ClassMask out(layout.width_px, layout.height_px, 0);
    auto dst = out.values();
    for (std::size_t i = 0; i < pixels; ++i) {
        if (!covered[i]) continue;
        const std::uint32_t* v = votes.data() + i * bins;
        std::size_t best = 0;
        for (std::size_t c = 1; c < bins; ++c)
            if (v[c] > v[best]) best = c;
        dst[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

RasterImage stitch_rgb(const MosaicLayout& layout) {
    std::vector<RasterImage> images;
    images.reserve(layout.entries.size());
    std::vector<PlacedImage> placed;
    for (const auto& e : layout.entries) {
        if (!fs::exists(e.patch_path)) throw LayoutError("missing patch '" + e.patch_path + "'");
        images.push_back(read_png_rgb(e.patch_path));
    }
    for (std::size_t i = 0; i < images.size(); ++i) placed.push_back({&images[i], layout.entries[i].window});
    return stitch_rgb(layout, placed);
}

ClassMask stitch_mask(const MosaicLayout& layout, MaskOverlap policy) {
    std::vector<ClassMask> masks;
    masks.reserve(layout.entries.size());
    std::vector<PlacedMask> placed;
    for (const auto& e : layout.entries) {
        if (!fs::exists(e.patch_path)) throw LayoutError("missing patch '" + e.patch_path + "'");
        masks.push_back(read_png_mask(e.patch_path));
    }
    for (std::size_t i = 0; i < masks.size(); ++i) placed.push_back({&masks[i], layout.entries[i].window});
    return stitch_mask(layout, placed, policy);
}

std::string format_coefficient(double value) {
    if (!std::isfinite(value)) throw ValidationError("world file coefficient must be finite");
    if (value == 0.0) return "0.0";
    char buf[400];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos) s += ".0";
    return s;
}

void write_worldfile(const Affine& affine, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (double c : affine.c) out << format_coefficient(c) << '\n';
    out.close();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

Affine read_worldfile(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    Affine a;
    std::string line;
    for (std::size_t i = 0; i < 6; ++i) {
        if (!std::getline(in, line)) throw ParseError("world file has fewer than 6 lines", i + 1, 1);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) throw ParseError("empty world file line", i + 1, 1);
        const char* first = line.data() + start;
        const char* last = line.data() + line.size();
        const auto res = std::from_chars(first, last, a.c[i]);
        if (res.ec != std::errc{} || res.ptr != last)
            throw ParseError("bad coefficient '" + line + "'", i + 1, std::size_t(res.ptr - line.data()) + 1);
    }
    return a;
}

} // namespace histmap
