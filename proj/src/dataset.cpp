#include "histmap/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "histmap/errors.hpp"
#include "histmap/random.hpp"
#include "histmap/renderer.hpp"
#include "json_window.hpp"

namespace histmap {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "histmap-manifest";
constexpr const char* kSplitHeader = "# histmap-split";

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Writes via "<path>.partial" and renames; the partial file is left behind
// when the writer throws.
template <class Fn>
void write_atomically(const fs::path& path, Fn write) {
    fs::path partial = path;
    partial += ".partial";
    write(partial);
    std::error_code ec;
    fs::rename(partial, path, ec);
    if (ec) throw IoError("cannot rename '" + partial.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    write_atomically(path, [&](const fs::path& p) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        out.close();
        if (!out) throw IoError("cannot write '" + p.string() + "'");
    });
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string format_ratio(double ratio) { return json(ratio).dump(); }

} // namespace

std::string_view to_string(DatasetVariant variant) {
    switch (variant) {
    case DatasetVariant::style_transferred: return "style_transferred";
    case DatasetVariant::stochastic: return "stochastic";
    case DatasetVariant::external: return "external";
    }
    return "style_transferred";
}

DatasetVariant variant_from_string(std::string_view text) {
    if (text == "style_transferred") return DatasetVariant::style_transferred;
    if (text == "stochastic") return DatasetVariant::stochastic;
    if (text == "external") return DatasetVariant::external;
    throw ParseError("unknown dataset variant '" + std::string(text) + "'");
}

std::string pair_id_for(std::int64_t tile_id) {
    if (tile_id < 0) throw ValidationError("tile_id must be non-negative");
    std::ostringstream ss;
    ss << std::setw(6) << std::setfill('0') << tile_id;
    return ss.str();
}

std::string style_digest(const StyleSpec& style) { return hex64(fnv1a64(style.to_json())); }

std::string degradation_digest(const DegradationConfig& config) { return hex64(fnv1a64(config.to_json())); }

std::string DatasetManifest::serialize() const {
    std::string out;
    json header{{"format", kManifestFormat},
                {"version", 1},
                {"style_hash", style_hash},
                {"degradation_hash", degradation_hash},
                {"class_count", class_count},
                {"entry_count", entries.size()}};
    out += header.dump();
    out += '\n';
    for (const auto& e : entries) {
        json j{{"pair_id", e.pair_id},
               {"tile_id", e.tile_id},
               {"map_path", e.map_path},
               {"mask_path", e.mask_path},
               {"window", detail::window_to_json(e.window)},
               {"seed", e.seed},
               {"variant", to_string(e.variant)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

DatasetManifest DatasetManifest::parse(std::string_view text) {
    DatasetManifest m;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool have_header = false;
    std::size_t expected = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("manifest: ") + e.what(), line_no, int(e.byte));
        }
        try {
            if (!have_header) {
                if (j.value("format", "") != kManifestFormat) throw ParseError("not a histmap manifest", line_no, 1);
                if (j.value("version", 0) != 1) throw ParseError("unsupported manifest version", line_no, 1);
                m.style_hash = j.at("style_hash").get<std::string>();
                m.degradation_hash = j.at("degradation_hash").get<std::string>();
                m.class_count = j.at("class_count").get<int>();
                expected = j.at("entry_count").get<std::size_t>();
                have_header = true;
                continue;
            }
            ManifestEntry e;
            e.pair_id = j.at("pair_id").get<std::string>();
            e.tile_id = j.at("tile_id").get<std::int64_t>();
            e.map_path = j.at("map_path").get<std::string>();
            e.mask_path = j.at("mask_path").get<std::string>();
            e.window = detail::window_from_json(j.at("window"));
            e.seed = j.at("seed").get<std::uint64_t>();
            e.variant = variant_from_string(j.at("variant").get<std::string>());
            if (!seen.insert(e.pair_id).second) throw ParseError("duplicate pair_id '" + e.pair_id + "'", line_no, 1);
            m.entries.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw ParseError(std::string("manifest: ") + e.what(), line_no, 1);
        } catch (const ConfigError& e) {
            throw ParseError(std::string("manifest: ") + e.what(), line_no, 1);
        }
    }
    if (!have_header) throw ParseError("manifest is empty");
    if (m.entries.size() != expected)
        throw ParseError("manifest declares " + std::to_string(expected) + " entries but holds " +
                         std::to_string(m.entries.size()));
    return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) { return parse(read_text(path)); }

void DatasetManifest::save(const fs::path& path) const { write_text(path, serialize()); }

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(jobs, 1u), count));
    std::vector<std::exception_ptr> errors(count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

RasterImage rebuild_map(std::span<const FeatureRecord> features, const StyleSpec& style, const ManifestEntry& entry,
                        const Degrader& degrader) {
    return degrader.apply(render_map_tile(features, style, entry.window), static_cast<std::uint64_t>(entry.tile_id));
}

DatasetManifest build_dataset(std::span<const FeatureRecord> features, const StyleSpec& style,
                              std::span<const TileWindow> windows, const DegradationConfig& config,
                              const fs::path& out_dir, const BuildOptions& options) {
    style.validate();
    const Degrader degrader(config);
    std::set<std::int64_t> ids;
    for (const auto& w : windows) {
        w.validate();
        if (!ids.insert(w.tile_id).second)
            throw ValidationError("duplicate tile_id " + std::to_string(w.tile_id));
    }

    DatasetManifest manifest;
    manifest.style_hash = style_digest(style);
    manifest.degradation_hash = degradation_digest(config);
    manifest.entries.resize(windows.size());
    if (windows.empty()) return manifest;

    make_dirs(out_dir / "maps");
    make_dirs(out_dir / "masks");
    if (options.colorized_masks) make_dirs(out_dir / "masks_color");

    const auto variant = config.any_enabled() ? DatasetVariant::stochastic : DatasetVariant::style_transferred;
    parallel_for(windows.size(), options.jobs, [&](std::size_t i) {
        const TileWindow& w = windows[i];
        try {
            ManifestEntry e;
            e.pair_id = pair_id_for(w.tile_id);
            e.tile_id = w.tile_id;
            e.map_path = "maps/" + e.pair_id + ".png";
            e.mask_path = "masks/" + e.pair_id + ".png";
            e.window = w;
            e.seed = derive_tile_seed(config.master_seed, static_cast<std::uint64_t>(w.tile_id));
            e.variant = variant;
            const RasterImage map = rebuild_map(features, style, e, degrader);
            const ClassMask mask = render_mask_tile(features, style, w);
            write_atomically(out_dir / e.map_path, [&](const fs::path& p) { write_png(p.string(), map); });
            write_atomically(out_dir / e.mask_path, [&](const fs::path& p) { write_png(p.string(), mask); });
            if (options.colorized_masks)
                write_atomically(out_dir / "masks_color" / (e.pair_id + ".png"),
                                 [&](const fs::path& p) { write_png(p.string(), colorize_mask(mask)); });
            manifest.entries[i] = std::move(e);
        } catch (const Error& e) {
            throw TileError(e.what(), w.tile_id);
        }
    });

    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.tile_id < b.tile_id; });
    manifest.save(out_dir / "manifest.txt");
    return manifest;
}

DatasetManifest degrade_dataset(const fs::path& in_dir, const DegradationConfig& config, const fs::path& out_dir,
                                const BuildOptions& options) {
    const DatasetManifest source = DatasetManifest::load(in_dir / "manifest.txt");
    const Degrader degrader(config);

    DatasetManifest manifest = source;
    manifest.degradation_hash = degradation_digest(config);
    if (manifest.entries.empty()) {
        make_dirs(out_dir);
        manifest.save(out_dir / "manifest.txt");
        return manifest;
    }
    make_dirs(out_dir / "maps");
    make_dirs(out_dir / "masks");

    parallel_for(manifest.entries.size(), options.jobs, [&](std::size_t i) {
        ManifestEntry& e = manifest.entries[i];
        try {
            const RasterImage map = read_png_rgb((in_dir / e.map_path).string());
            const RasterImage out = degrader.apply(map, static_cast<std::uint64_t>(e.tile_id));
            const ClassMask mask = read_png_mask((in_dir / e.mask_path).string());
            e.map_path = "maps/" + e.pair_id + ".png";
            e.mask_path = "masks/" + e.pair_id + ".png";
            e.seed = derive_tile_seed(config.master_seed, static_cast<std::uint64_t>(e.tile_id));
            e.variant = DatasetVariant::stochastic;
            write_atomically(out_dir / e.map_path, [&](const fs::path& p) { write_png(p.string(), out); });
            write_atomically(out_dir / e.mask_path, [&](const fs::path& p) { write_png(p.string(), mask); });
        } catch (const Error& err) {
            throw TileError(err.what(), e.tile_id);
        }
    });
    manifest.save(out_dir / "manifest.txt");
    return manifest;
}

std::string SplitAssignment::serialize() const {
    std::vector<std::pair<std::string, bool>> rows;
    for (const auto& id : train) rows.emplace_back(id, true);
    for (const auto& id : val) rows.emplace_back(id, false);
    std::sort(rows.begin(), rows.end());
    std::string out = std::string(kSplitHeader) + " seed=" + std::to_string(seed) + " ratio=" + format_ratio(ratio) + "\n";
    for (const auto& [id, is_train] : rows) {
        out += id;
        out += is_train ? "\ttrain\n" : "\tval\n";
    }
    return out;
}

SplitAssignment SplitAssignment::parse(std::string_view text) {
    SplitAssignment s;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!have_header) {
            std::istringstream hs(line);
            std::string hash, tag, seed_kv, ratio_kv;
            hs >> hash >> tag >> seed_kv >> ratio_kv;
            if (hash + " " + tag != kSplitHeader || seed_kv.rfind("seed=", 0) != 0 || ratio_kv.rfind("ratio=", 0) != 0)
                throw ParseError("not a histmap split file", line_no, 1);
            try {
                s.seed = std::stoull(seed_kv.substr(5));
                s.ratio = std::stod(ratio_kv.substr(6));
            } catch (const std::exception&) {
                throw ParseError("bad split header values", line_no, 1);
            }
            have_header = true;
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected '<pair_id>\\t<train|val>'", line_no, 1);
        const std::string id = line.substr(0, tab);
        const std::string set = line.substr(tab + 1);
        if (s.train.count(id) || s.val.count(id)) throw ParseError("duplicate pair_id '" + id + "'", line_no, 1);
        if (set == "train")
            s.train.insert(id);
        else if (set == "val")
            s.val.insert(id);
        else
            throw ParseError("unknown subset '" + set + "'", line_no, int(tab) + 2);
    }
    if (!have_header) throw ParseError("split file is empty");
    return s;
}

SplitAssignment split_ids(std::vector<std::string> ids, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
    if (ids.empty()) throw ValidationError("cannot split an empty id list");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("duplicate ids in split input");

    SplitMix64 rng(seed);
    for (std::size_t i = ids.size() - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);

    SplitAssignment s;
    s.seed = seed;
    s.ratio = ratio;
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * double(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i) (i < n_train ? s.train : s.val).insert(ids[i]);
    return s;
}

SplitAssignment split_manifest(const DatasetManifest& manifest, double ratio, std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) ids.push_back(e.pair_id);
    return split_ids(std::move(ids), ratio, seed);
}

} // namespace histmap
