#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "histmap/dataset.hpp"
#include "histmap/degradation.hpp"
#include "histmap/errors.hpp"
#include "histmap/fid.hpp"
#include "histmap/geo_core.hpp"
#include "histmap/random.hpp"
#include "histmap/raster.hpp"
#include "histmap/renderer.hpp"
#include "histmap/seg_metrics.hpp"
#include "histmap/style.hpp"

namespace py = pybind11;
using namespace histmap;

namespace {

struct Features {
    std::vector<FeatureRecord> records;
    std::size_t skipped = 0;
};

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage to_image(const U8Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw ValidationError("expected an H x W x 3 uint8 array");
    RasterImage img(int(a.shape(1)), int(a.shape(0)));
    std::memcpy(img.bytes().data(), a.data(), img.bytes().size());
    return img;
}

U8Array from_image(const RasterImage& img) {
    U8Array a({py::ssize_t(img.height()), py::ssize_t(img.width()), py::ssize_t(3)});
    std::memcpy(a.mutable_data(), img.bytes().data(), img.bytes().size());
    return a;
}

ClassMask to_mask(const U8Array& a) {
    if (a.ndim() != 2) throw ValidationError("expected an H x W uint8 array");
    ClassMask m(int(a.shape(1)), int(a.shape(0)));
    std::memcpy(m.values().data(), a.data(), m.values().size());
    return m;
}

U8Array from_mask(const ClassMask& m) {
    U8Array a({py::ssize_t(m.height()), py::ssize_t(m.width())});
    std::memcpy(a.mutable_data(), m.values().data(), m.values().size());
    return a;
}

StyleSpec style_or_default(const std::optional<std::string>& json) {
    return json ? StyleSpec::from_json(*json) : StyleSpec::historical_default();
}

py::object opt(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict report_dict(const MetricsReport& r) {
    py::list per_class;
    for (const auto& c : r.per_class) {
        py::dict d;
        d["precision"] = opt(c.precision);
        d["recall"] = opt(c.recall);
        d["iou"] = opt(c.iou);
        d["f1"] = opt(c.f1);
        d["support"] = c.support;
        per_class.append(d);
    }
    py::dict d;
    d["per_class"] = per_class;
    d["accuracy"] = r.accuracy;
    d["kappa"] = r.kappa;
    d["micro_f1"] = r.micro_f1;
    d["macro_precision"] = opt(r.macro_precision);
    d["macro_recall"] = opt(r.macro_recall);
    d["macro_iou"] = opt(r.macro_iou);
    d["macro_f1"] = opt(r.macro_f1);
    d["total"] = r.total;
    return d;
}

GaussianSummary summarize(const Eigen::MatrixXd& data) {
    FeatureSet fs{data};
    return summarize_features(fs);
}

} // namespace

PYBIND11_MODULE(_histmap, m) {
    m.doc() = "Synthetic historical map dataset toolkit";

    static py::exception<Error> error(m, "HistmapError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, (e.kind() + ": " + e.what()).c_str());
        }
    });

    py::class_<TileWindow>(m, "TileWindow")
        .def(py::init([](double origin_x, double origin_y, int width_px, int height_px, double scale,
                         std::int64_t tile_id) {
                 TileWindow w{origin_x, origin_y, width_px, height_px, scale, tile_id};
                 w.validate();
                 return w;
             }),
             py::arg("origin_x"), py::arg("origin_y"), py::arg("width_px"), py::arg("height_px"),
             py::arg("scale") = 1.0, py::arg("tile_id") = 0)
        .def_readwrite("origin_x", &TileWindow::origin_x)
        .def_readwrite("origin_y", &TileWindow::origin_y)
        .def_readwrite("width_px", &TileWindow::width_px)
        .def_readwrite("height_px", &TileWindow::height_px)
        .def_readwrite("scale", &TileWindow::scale)
        .def_readwrite("tile_id", &TileWindow::tile_id)
        .def("__repr__", [](const TileWindow& w) {
            return "TileWindow(tile_id=" + std::to_string(w.tile_id) + ", origin=(" + std::to_string(w.origin_x) + ", " +
                   std::to_string(w.origin_y) + "), size=" + std::to_string(w.width_px) + "x" +
                   std::to_string(w.height_px) + ", scale=" + std::to_string(w.scale) + ")";
        });

    py::class_<Features>(m, "Features")
        .def("__len__", [](const Features& f) { return f.records.size(); })
        .def_readonly("skipped", &Features::skipped);

    m.def(
        "parse_features",
        [](const std::string& geojson, const std::optional<std::string>& class_map) {
            const auto cm = class_map ? ClassMap::from_json(*class_map) : ClassMap::osm_default();
            auto r = parse_feature_collection(geojson, cm);
            return Features{std::move(r.features), r.skipped};
        },
        py::arg("geojson"), py::arg("class_map") = py::none(), "Parse a GeoJSON FeatureCollection.");

    m.def(
        "tile_windows",
        [](std::array<double, 4> bbox, std::array<int, 2> patch, double scale, int overlap, const std::string& edge) {
            return tile_windows({bbox[0], bbox[1], bbox[2], bbox[3]}, patch, scale, overlap,
                                edge == "extend" ? EdgePolicy::extend : EdgePolicy::clamp);
        },
        py::arg("bbox"), py::arg("patch"), py::arg("scale") = 1.0, py::arg("overlap") = 0, py::arg("edge") = "clamp");

    m.def(
        "render_map",
        [](const Features& f, const TileWindow& w, const std::optional<std::string>& style) {
            return from_image(render_map_tile(f.records, style_or_default(style), w));
        },
        py::arg("features"), py::arg("window"), py::arg("style") = py::none(), "H x W x 3 uint8 map tile.");
    m.def(
        "render_mask",
        [](const Features& f, const TileWindow& w, const std::optional<std::string>& style) {
            return from_mask(render_mask_tile(f.records, style_or_default(style), w));
        },
        py::arg("features"), py::arg("window"), py::arg("style") = py::none(), "H x W uint8 class mask (1..5).");

    m.def("gaussian_blur_3x3", [](const U8Array& a) { return from_image(gaussian_blur_3x3(to_image(a))); });
    m.def(
        "degrade",
        [](const U8Array& a, std::uint64_t tile_id, const std::optional<std::string>& config) {
            const auto c = config ? DegradationConfig::from_json(*config) : DegradationConfig{};
            return from_image(degrade_tile(to_image(a), c, tile_id));
        },
        py::arg("image"), py::arg("tile_id"), py::arg("config") = py::none());
    m.def("derive_tile_seed", &derive_tile_seed, py::arg("master_seed"), py::arg("tile_id"));

    m.def(
        "split_ids",
        [](std::vector<std::string> ids, double ratio, std::uint64_t seed) {
            const auto s = split_ids(std::move(ids), ratio, seed);
            return py::make_tuple(std::vector<std::string>(s.train.begin(), s.train.end()),
                                  std::vector<std::string>(s.val.begin(), s.val.end()));
        },
        py::arg("ids"), py::arg("ratio"), py::arg("seed"), "Returns (train, val), each sorted.");

    m.def(
        "confusion",
        [](const U8Array& pred, const U8Array& truth, int classes) {
            ConfusionMatrix cm(classes);
            accumulate_confusion(to_mask(pred), to_mask(truth), cm);
            py::array_t<std::uint64_t> out({py::ssize_t(classes), py::ssize_t(classes)});
            auto v = out.mutable_unchecked<2>();
            for (int t = 0; t < classes; ++t)
                for (int p = 0; p < classes; ++p) v(t, p) = cm.at(t, p);
            return out;
        },
        py::arg("pred"), py::arg("truth"), py::arg("classes") = kClassCount, "Rows are true classes.");
    m.def(
        "metrics",
        [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& cm) {
            if (cm.ndim() != 2 || cm.shape(0) != cm.shape(1)) throw ValidationError("expected a square matrix");
            const auto n = int(cm.shape(0));
            return report_dict(metrics_report(
                ConfusionMatrix(n, std::vector<std::uint64_t>(cm.data(), cm.data() + std::size_t(n) * std::size_t(n)))));
        },
        py::arg("confusion"));
    m.def(
        "acw_weights",
        [](const std::vector<double>& f) { return acw_weights(f); }, py::arg("frequencies"));

    m.def(
        "write_mask_png", [](const std::string& path, const U8Array& mask) { write_png(path, to_mask(mask)); },
        py::arg("path"), py::arg("mask"));
    m.def(
        "read_mask_png", [](const std::string& path) { return from_mask(read_png_mask(path)); }, py::arg("path"));
    m.def(
        "write_image_png", [](const std::string& path, const U8Array& image) { write_png(path, to_image(image)); },
        py::arg("path"), py::arg("image"));

    m.def("sqrtm_psd", &sqrtm_psd, py::arg("matrix"));
    m.def(
        "fid", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return fid(summarize(a), summarize(b)); },
        py::arg("features_a"), py::arg("features_b"), "Frechet distance between two n x d feature arrays.");
    m.def("toy_embedder", [](const U8Array& a) { return toy_embedder(to_image(a)); });
    m.def(
        "read_feature_file", [](const std::filesystem::path& p) { return read_feature_file(p).data; }, py::arg("path"));
    m.def(
        "write_feature_file",
        [](const std::filesystem::path& p, const Eigen::MatrixXd& data) { write_feature_file(p, FeatureSet{data}); },
        py::arg("path"), py::arg("data"));
}
