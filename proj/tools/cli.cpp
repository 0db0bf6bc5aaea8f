#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "histmap/dataset.hpp"
#include "histmap/degradation.hpp"
#include "histmap/errors.hpp"
#include "histmap/fid.hpp"
#include "histmap/geo_core.hpp"
#include "histmap/mosaic.hpp"
#include "histmap/renderer.hpp"
#include "histmap/seg_metrics.hpp"
#include "histmap/style.hpp"

namespace histmap::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

std::vector<std::string> png_names(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("'" + dir.string() + "' is not a directory");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

struct RenderArgs {
    std::string input;
    std::string class_map;
    std::string style;
    std::string degradation;
    std::string out;
    std::vector<int> patch{512, 512};
    int overlap = 0;
    double scale = 1.0;
    std::vector<double> bbox;
    std::string edge = "clamp";
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    bool colorized = false;
};

int do_render(const RenderArgs& a, std::ostream& err) {
    const ClassMap class_map = a.class_map.empty() ? ClassMap::osm_default() : ClassMap::load(a.class_map);
    const StyleSpec style = a.style.empty() ? StyleSpec::historical_default() : StyleSpec::load(a.style);
    DegradationConfig config = a.degradation.empty() ? DegradationConfig::disabled() : DegradationConfig::load(a.degradation);
    if (a.seed) config.master_seed = *a.seed;
    config.validate();
    const ParseResult parsed = parse_feature_collection(read_file(a.input), class_map);

    BoundingBox bbox;
    if (!a.bbox.empty()) {
        bbox = {a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]};
    } else {
        auto b = bounding_box(parsed.features);
        if (!b) throw ValidationError("input has no features and no --bbox was given");
        bbox = *b;
    }
    const EdgePolicy edge = a.edge == "extend" ? EdgePolicy::extend : EdgePolicy::clamp;
    const auto windows = tile_windows(bbox, {a.patch[0], a.patch[1]}, a.scale, a.overlap, edge);

    err << "render: " << parsed.features.size() << " features (" << parsed.skipped << " skipped), "
        << windows.size() << " tiles\n";
    const auto manifest =
        build_dataset(parsed.features, style, windows, config, a.out, BuildOptions{a.jobs, a.colorized});
    err << "render: wrote " << manifest.entries.size() << " pairs to " << a.out << '\n';
    return 0;
}

struct DegradeArgs {
    std::string in;
    std::string out;
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
};

int do_degrade(const DegradeArgs& a, std::ostream& err) {
    DegradationConfig config = a.config.empty() ? DegradationConfig{} : DegradationConfig::load(a.config);
    if (a.seed) config.master_seed = *a.seed;
    config.validate();
    if (fs::weakly_canonical(a.in) == fs::weakly_canonical(a.out))
        throw ValidationError("--out must differ from --in");
    const auto manifest = degrade_dataset(a.in, config, a.out, BuildOptions{a.jobs, false});
    err << "degrade: wrote " << manifest.entries.size() << " pairs to " << a.out << '\n';
    return 0;
}

struct SplitArgs {
    std::string manifest;
    double ratio = 0.8;
    std::uint64_t seed = 0;
    std::string out;
};

int do_split(const SplitArgs& a, std::ostream& err) {
    const auto manifest = DatasetManifest::load(a.manifest);
    const auto split = split_manifest(manifest, a.ratio, a.seed);
    const fs::path out = a.out.empty() ? fs::path(a.manifest).parent_path() / "split.txt" : fs::path(a.out);
    write_file(out, split.serialize());
    err << "split: " << split.train.size() << " train, " << split.val.size() << " val -> " << out.string() << '\n';
    return 0;
}

struct FidArgs {
    std::string features_a, features_b, images_a, images_b;
};

FeatureSet embed_dir(const fs::path& dir) {
    const auto names = png_names(dir);
    FeatureSet fs;
    fs.data.resize(Eigen::Index(names.size()), kToyEmbeddingDim);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto v = toy_embedder(read_png_rgb((dir / names[i]).string()));
        for (int j = 0; j < kToyEmbeddingDim; ++j) fs.data(Eigen::Index(i), j) = v[std::size_t(j)];
    }
    return fs;
}

int do_fid(const FidArgs& a, std::ostream& out, std::ostream& err) {
    FeatureSet fa, fb;
    if (!a.features_a.empty() || !a.features_b.empty()) {
        if (a.features_a.empty() || a.features_b.empty())
            throw ValidationError("--features-a and --features-b must be given together");
        fa = read_feature_file(a.features_a);
        fb = read_feature_file(a.features_b);
    } else if (!a.images_a.empty() && !a.images_b.empty()) {
        fa = embed_dir(a.images_a);
        fb = embed_dir(a.images_b);
    } else {
        throw ValidationError("give either --features-a/--features-b or --images-a/--images-b");
    }
    const auto sa = summarize_features(fa);
    const auto sb = summarize_features(fb);
    const double raw = fid(sa, sb);
    err << "fid: n_a=" << fa.count() << " n_b=" << fb.count() << " d=" << fa.dim() << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f\n", std::max(0.0, raw));
    out << buf;
    return 0;
}

struct EvalArgs {
    std::string pred;
    std::string truth;
    int classes = kClassCount;
    std::string report;
    std::string csv;
    unsigned jobs = 1;
};

int do_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const auto names = png_names(a.truth);
    if (names.empty()) throw ValidationError("no mask PNGs in '" + a.truth + "'");
    for (const auto& n : names)
        if (!fs::exists(fs::path(a.pred) / n)) throw ValidationError("prediction '" + n + "' is missing");
    std::vector<ConfusionMatrix> parts(names.size(), ConfusionMatrix(a.classes));
    parallel_for(names.size(), a.jobs, [&](std::size_t i) {
        try {
            accumulate_confusion(read_png_mask((fs::path(a.pred) / names[i]).string()),
                                 read_png_mask((fs::path(a.truth) / names[i]).string()), parts[i]);
        } catch (const ValidationError& e) {
            throw ValidationError(names[i] + ": " + e.what());
        }
    });
    ConfusionMatrix cm(a.classes);
    for (const auto& p : parts) cm.merge(p);
    const auto report = metrics_report(cm);
    out << report.to_text();
    if (!a.report.empty()) write_file(a.report, report.to_text());
    if (!a.csv.empty()) write_file(a.csv, report.to_csv());
    err << "eval: " << names.size() << " mask pairs\n";
    return 0;
}

struct MosaicArgs {
    std::string layout;
    std::string kind = "rgb";
    std::string out;
    std::string worldfile;
    std::string mask_overlap = "vote";
};

int do_mosaic(const MosaicArgs& a, std::ostream& err) {
    const auto layout = MosaicLayout::load(a.layout);
    if (a.kind == "mask")
        write_png(a.out, stitch_mask(layout, a.mask_overlap == "last" ? MaskOverlap::last_write : MaskOverlap::vote));
    else
        write_png(a.out, stitch_rgb(layout));
    const fs::path wf = a.worldfile.empty() ? fs::path(a.out).replace_extension(".pgw") : fs::path(a.worldfile);
    write_worldfile(layout.affine, wf);
    err << "mosaic: " << layout.entries.size() << " patches -> " << layout.width_px << "x" << layout.height_px << '\n';
    return 0;
}

struct ProbeArgs {
    std::string image;
    int x = 0;
    int y = 0;
};

int do_probe(const ProbeArgs& a, std::ostream& out) {
    const Rgb c = estimate_class_color(read_png_rgb(a.image), a.x, a.y);
    out << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b) << '\n';
    return 0;
}

struct DustArgs {
    std::string out;
    std::vector<int> size{kProceduralDustSize, kProceduralDustSize};
    std::uint64_t seed = 0;
};

int do_dust(const DustArgs& a, std::ostream& err) {
    write_png(a.out, generate_dust(a.size[0], a.size[1], a.seed));
    err << "dust-gen: wrote " << a.size[0] << "x" << a.size[1] << " asset to " << a.out << '\n';
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic historical map dataset toolkit", "histmap"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "histmap 0.1.0");

    std::function<int()> action;

    RenderArgs render;
    auto* r = app.add_subcommand("render", "Render vector features into (map, mask) pairs");
    r->add_option("--input", render.input, "GeoJSON FeatureCollection")->required()->check(CLI::ExistingFile);
    r->add_option("--class-map", render.class_map, "Class map JSON (default: built-in OSM table)")->check(CLI::ExistingFile);
    r->add_option("--style", render.style, "Style JSON (default: historical style)")->check(CLI::ExistingFile);
    r->add_option("--degradation", render.degradation, "Degradation config JSON (default: none)")->check(CLI::ExistingFile);
    r->add_option("--out", render.out, "Output dataset directory")->required();
    r->add_option("--patch", render.patch, "Patch width,height in pixels")->expected(2)->delimiter(',')->capture_default_str();
    r->add_option("--overlap", render.overlap, "Overlap between patches in pixels")->check(CLI::NonNegativeNumber);
    r->add_option("--scale", render.scale, "Pixels per map unit")->check(CLI::PositiveNumber);
    r->add_option("--bbox", render.bbox, "x0,y0,x1,y1 (default: feature extent)")->expected(4)->delimiter(',');
    r->add_option("--edge", render.edge, "Last row/column policy")->check(CLI::IsMember({"clamp", "extend"}));
    r->add_option("--seed", render.seed, "Master seed for degradation");
    r->add_option("--jobs", render.jobs, "Parallel tiles")->check(CLI::PositiveNumber);
    r->add_flag("--colorized-masks", render.colorized, "Also write palette-colored masks");
    r->callback([&] { action = [&] { return do_render(render, err); }; });

    DegradeArgs degrade;
    auto* d = app.add_subcommand("degrade", "Write a degraded copy of a dataset");
    d->add_option("--in", degrade.in, "Source dataset directory")->required()->check(CLI::ExistingDirectory);
    d->add_option("--out", degrade.out, "Output dataset directory")->required();
    d->add_option("--config", degrade.config, "Degradation config JSON (default: all effects on)")->check(CLI::ExistingFile);
    d->add_option("--seed", degrade.seed, "Master seed (overrides the config)");
    d->add_option("--jobs", degrade.jobs, "Parallel tiles")->check(CLI::PositiveNumber);
    d->callback([&] { action = [&] { return do_degrade(degrade, err); }; });

    SplitArgs split;
    auto* s = app.add_subcommand("split", "Deterministic train/validation split of a manifest");
    s->add_option("--manifest", split.manifest, "manifest.txt")->required()->check(CLI::ExistingFile);
    s->add_option("--ratio", split.ratio, "Training fraction in (0, 1)")->capture_default_str();
    s->add_option("--seed", split.seed, "Shuffle seed")->required();
    s->add_option("--out", split.out, "Split file (default: split.txt next to the manifest)");
    s->callback([&] { action = [&] { return do_split(split, err); }; });

    FidArgs fida;
    auto* f = app.add_subcommand("fid", "Frechet distance between two feature sets");
    f->add_option("--features-a", fida.features_a, "FVEC file")->check(CLI::ExistingFile);
    f->add_option("--features-b", fida.features_b, "FVEC file")->check(CLI::ExistingFile);
    f->add_option("--images-a", fida.images_a, "PNG directory (toy embedder)")->check(CLI::ExistingDirectory);
    f->add_option("--images-b", fida.images_b, "PNG directory (toy embedder)")->check(CLI::ExistingDirectory);
    f->callback([&] { action = [&] { return do_fid(fida, out, err); }; });

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Segmentation metrics of predicted against true masks");
    e->add_option("--pred", eval.pred, "Predicted mask directory")->required()->check(CLI::ExistingDirectory);
    e->add_option("--truth", eval.truth, "Ground-truth mask directory")->required()->check(CLI::ExistingDirectory);
    e->add_option("--classes", eval.classes, "Class count")->check(CLI::Range(1, 255))->capture_default_str();
    e->add_option("--report", eval.report, "Also write the text report here");
    e->add_option("--csv", eval.csv, "Write the per-class table as CSV");
    e->add_option("--jobs", eval.jobs, "Parallel mask pairs")->check(CLI::PositiveNumber);
    e->callback([&] { action = [&] { return do_eval(eval, out, err); }; });

    MosaicArgs mosaic;
    auto* m = app.add_subcommand("mosaic", "Stitch patches into a georeferenced mosaic");
    m->add_option("--layout", mosaic.layout, "Layout JSON")->required()->check(CLI::ExistingFile);
    m->add_option("--kind", mosaic.kind, "rgb or mask")->check(CLI::IsMember({"rgb", "mask"}))->capture_default_str();
    m->add_option("--out", mosaic.out, "Output PNG")->required();
    m->add_option("--worldfile", mosaic.worldfile, "World file path (default: output with .pgw)");
    m->add_option("--mask-overlap", mosaic.mask_overlap, "Mask overlap rule: vote or last")
        ->check(CLI::IsMember({"vote", "last"}))
        ->capture_default_str();
    m->callback([&] { action = [&] { return do_mosaic(mosaic, err); }; });

    ProbeArgs probe;
    auto* p = app.add_subcommand("probe-color", "Mean 5x5 color around a pixel");
    p->add_option("--image", probe.image, "RGB PNG")->required()->check(CLI::ExistingFile);
    p->add_option("--x", probe.x, "Column")->required();
    p->add_option("--y", probe.y, "Row")->required();
    p->callback([&] { action = [&] { return do_probe(probe, out); }; });

    DustArgs dust;
    auto* g = app.add_subcommand("dust-gen", "Generate a procedural dust asset (RGBA PNG)");
    g->add_option("--out", dust.out, "Output PNG")->required();
    g->add_option("--size", dust.size, "width,height")->expected(2)->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    g->add_option("--seed", dust.seed, "Generator seed")->required();
    g->callback([&] { action = [&] { return do_dust(dust, err); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        out << target->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "histmap 0.1.0\n";
        return 0;
    } catch (const CLI::ValidationError& ex) {
        err << "error: validation: " << ex.what() << '\n';
        return 1;
    } catch (const CLI::ParseError& ex) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        err << "error: usage: " << ex.what() << '\n' << target->help();
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const Error& ex) {
        err << "error: " << ex.kind() << ": " << ex.what() << '\n';
        return 1;
    } catch (const std::exception& ex) {
        err << "error: internal: " << ex.what() << '\n';
        return 1;
    }
}

} // namespace histmap::cli
