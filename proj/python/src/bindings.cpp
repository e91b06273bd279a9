#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "geonet/datapipe.hpp"
#include "geonet/orient_group.hpp"
#include "geonet/raster.hpp"
#include "geonet/trainer.hpp"

namespace py = pybind11;
using namespace geonet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const FloatArray& a) {
    if (a.ndim() != 2) throw ConfigError("expected a 2-D array, got " + std::to_string(a.ndim()) + " dimensions");
    const auto h = static_cast<std::size_t>(a.shape(0));
    const auto w = static_cast<std::size_t>(a.shape(1));
    return GrayImage(h, w, std::vector<float>(a.data(), a.data() + h * w));
}

FloatArray to_array(const GrayImage& img) {
    FloatArray out({img.height(), img.width()});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

struct Model {
    Checkpoint ckpt;
};

py::dict metrics_dict(const EpochMetrics& m) {
    py::dict d;
    d["epoch"] = m.epoch;
    d["train_loss"] = m.train_loss;
    d["train_acc"] = m.train_accuracy;
    d["test_loss"] = m.test_loss;
    d["test_acc"] = m.test_accuracy;
    return d;
}

}  // namespace

PYBIND11_MODULE(_geonet, m) {
    m.doc() = "Orientation recognition for cardiac MR slices";

    m.def("transforms", [] {
        py::list out;
        for (const auto& t : enumerate_2d()) {
            py::list rows;
            for (const auto& r : t.matrix) rows.append(py::make_tuple(r[0], r[1]));
            out.append(py::make_tuple(t.label, rows, t.name()));
        }
        return out;
    }, "The eight planar transforms as (label, 2x2 matrix, name).");

    m.def("compose", [](int a, int b) { return compose_2d(orient_2d(a), orient_2d(b)).label; },
          "Label of a applied after b.");
    m.def("inverse", [](int a) { return inverse_2d(orient_2d(a)).label; });
    m.def("count_3d", [] {
        const auto& e = enumerate_3d();
        return py::make_tuple(e.raw_count(), e.distinct_count());
    }, "(candidates, distinct) of the flip-then-rotate enumeration.");

    m.def("apply", [](const FloatArray& img, int label) { return to_array(apply_2d(to_image(img), orient_2d(label))); },
          py::arg("img"), py::arg("label"));
    m.def("clahe", [](const FloatArray& img, std::size_t tile_rows, std::size_t tile_cols, double clip_limit) {
        return to_array(clahe(to_image(img), {tile_rows, tile_cols, clip_limit}));
    }, py::arg("img"), py::arg("tile_rows") = 8, py::arg("tile_cols") = 8, py::arg("clip_limit") = 2.0);
    m.def("histogram", [](const FloatArray& img) {
        const auto h = histogram(to_image(img));
        py::array_t<std::uint64_t> out(256);
        std::copy(h.bins.begin(), h.bins.end(), out.mutable_data());
        return out;
    });
    m.def("entropy", [](const FloatArray& img) { return entropy(histogram(to_image(img))); },
          "Shannon entropy in bits of the 256-bin histogram.");
    m.def("synth_phantom", [](std::uint64_t seed, std::size_t h, std::size_t w) { return to_array(synth_phantom(seed, h, w)); },
          py::arg("seed"), py::arg("height") = 96, py::arg("width") = 96);

    py::class_<Model>(m, "Model")
        .def_static("load", [](const std::filesystem::path& p) { return Model{load_checkpoint(p)}; })
        .def("save", [](const Model& self, const std::filesystem::path& p) {
            save_checkpoint(p, self.ckpt.model, self.ckpt.preprocess);
        })
        .def_property_readonly("input_size", [](const Model& self) { return self.ckpt.preprocess.input_size; })
        .def("predict", [](const Model& self, const FloatArray& img) {
            const auto p = predict_orientation(self.ckpt.model, self.ckpt.preprocess, to_image(img));
            return py::make_tuple(p.label, std::vector<double>(p.probabilities.begin(), p.probabilities.end()));
        }, "(label, probabilities) for the transform that produced img.")
        .def("fix", [](const Model& self, const FloatArray& img) {
            return to_array(fix_orientation(self.ckpt.model, self.ckpt.preprocess, to_image(img)));
        });

    m.def("train", [](std::size_t epochs, std::size_t batch_size, std::size_t input_size, std::size_t synthetic_slices,
                      std::size_t phantom_size, std::uint64_t seed, double learning_rate, int workers) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.input_size = input_size;
        cfg.synthetic_slices = synthetic_slices;
        cfg.phantom_size = phantom_size;
        cfg.seed = seed;
        cfg.learning_rate = learning_rate;
        cfg.workers = workers;
        TrainResult r;
        {
            py::gil_scoped_release release;
            r = train(cfg);
        }
        py::list metrics;
        for (const auto& e : r.metrics) metrics.append(metrics_dict(e));
        return py::make_tuple(Model{{std::move(r.model), r.preprocess}}, metrics);
    }, "Trains on synthetic phantoms; returns (model, per-epoch metrics).",
          py::arg("epochs") = 32, py::arg("batch_size") = 16, py::arg("input_size") = 64,
          py::arg("synthetic_slices") = 200, py::arg("phantom_size") = 96, py::arg("seed") = 0,
          py::arg("learning_rate") = 0.01, py::arg("workers") = 1);
}
