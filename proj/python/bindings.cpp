#include "bytesort/baselines.hpp"
#include "bytesort/corpus.hpp"
#include "bytesort/errors.hpp"
#include "bytesort/eval.hpp"
#include "bytesort/persist.hpp"
#include "bytesort/sgan.hpp"
#include "bytesort/synthetic.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace bytesort;

namespace {

Histogram to_histogram(const std::vector<double>& v) {
    if (v.size() != kBins) throw DimensionError("histogram needs 256 values, got " + std::to_string(v.size()));
    Histogram h;
    std::copy(v.begin(), v.end(), h.bins.begin());
    return h;
}

std::vector<double> from_histogram(const Histogram& h) { return {h.bins.begin(), h.bins.end()}; }

py::list history_rows(const TrainHistory& h) {
    py::list rows;
    for (const auto& e : h.epochs) {
        py::dict d;
        d["epoch"] = e.epoch;
        d["d_real_loss"] = e.d_real_loss ? py::cast(*e.d_real_loss) : py::none();
        d["c_loss"] = e.c_loss;
        d["d_fake_loss"] = e.d_fake_loss ? py::cast(*e.d_fake_loss) : py::none();
        d["g_loss"] = e.g_loss ? py::cast(*e.g_loss) : py::none();
        d["train_accuracy"] = e.train_accuracy;
        d["best"] = e.epoch == h.best_epoch;
        rows.append(d);
    }
    return rows;
}

TrainConfig make_config(std::size_t epochs, std::size_t batch, double lr, std::uint64_t seed) {
    TrainConfig c;
    c.max_epochs = epochs;
    c.batch_size = batch;
    c.lr_dc = lr;
    c.lr_g = lr;
    c.seed = seed;
    c.validate();
    return c;
}

// Model is a std::variant, which stl.h would otherwise unpack
struct PyModel {
    Model m;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "File-type identification from byte-value histograms";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<EmptyFile>(m, "EmptyFile", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<ChecksumError>(m, "ChecksumError", base.ptr());
    py::register_exception<EmptySupervisedSet>(m, "EmptySupervisedSet", base.ptr());
    py::register_exception<HashMismatch>(m, "HashMismatch", base.ptr());
    py::register_exception<BadMagic>(m, "BadMagic", base.ptr());
    py::register_exception<VersionUnsupported>(m, "VersionUnsupported", base.ptr());
    py::register_exception<CountMismatch>(m, "CountMismatch", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

    m.def("byte_histogram", [](const py::bytes& data) {
        const std::string_view s(data);
        return from_histogram(normalize(byte_histogram({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()})));
    }, py::arg("data"), "Normalised 256-bin histogram of a bytes object.");
    m.def("featurize_file", [](const std::filesystem::path& p) { return from_histogram(featurize_file(p)); }, py::arg("path"));

    py::class_<LabeledSample>(m, "Sample")
        .def_property_readonly("features", [](const LabeledSample& s) { return from_histogram(s.features); })
        .def_readonly("label", &LabeledSample::label)
        .def_readonly("source_path", &LabeledSample::source_path)
        .def_readonly("extension", &LabeledSample::original_extension);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("classes", [](const Dataset& d) { return d.classes.names; })
        .def_readonly("samples", &Dataset::samples)
        .def("__len__", [](const Dataset& d) { return d.samples.size(); });

    py::class_<DatasetSplit>(m, "Split")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("test", &DatasetSplit::test)
        .def_readonly("supervised_indices", &DatasetSplit::supervised_indices)
        .def_property_readonly("classes", [](const DatasetSplit& s) { return s.classes.names; });

    m.def("ingest", [](const std::filesystem::path& root, std::size_t min_class_size) {
        return ingest(root, min_class_size).dataset;
    }, py::arg("root"), py::arg("min_class_size") = kMinClassSize);
    m.def("save_features", &save_features, py::arg("dataset"), py::arg("path"));
    m.def("load_features", &load_features, py::arg("path"));
    m.def("shuffle_split", [](const Dataset& d, std::uint64_t seed) { return shuffle_split(d, seed); },
          py::arg("dataset"), py::arg("seed") = 42);
    m.def("select_supervised", &select_supervised, py::arg("split"), py::arg("n"), py::arg("seed"));

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("kind", [](const PyModel& pm) { return std::string(to_string(kind_of(pm.m))); })
        .def_property_readonly("classes", [](const PyModel& pm) { return classes_of(pm.m).names; })
        .def("predict", [](const PyModel& pm, const std::vector<double>& h) {
            const Prediction p = predict(pm.m, to_histogram(h));
            return py::make_tuple(classes_of(pm.m).names.at(p.label), p.probabilities);
        }, py::arg("histogram"), "Returns (class name, probabilities).")
        .def("classify_file", [](const PyModel& pm, const std::filesystem::path& p) {
            const Prediction pr = predict(pm.m, featurize_file(p));
            return py::make_tuple(classes_of(pm.m).names.at(pr.label), pr.probabilities);
        }, py::arg("path"))
        .def("evaluate", [](const PyModel& pm, const std::vector<LabeledSample>& samples) {
            const EvalResult r = evaluate([&](const Histogram& h) { return predict(pm.m, h).label; }, samples,
                                          classes_of(pm.m));
            return py::make_tuple(r.accuracy, r.confusion.counts);
        }, py::arg("samples"), "Returns (accuracy, confusion counts).")
        .def("save", [](const PyModel& pm, const std::filesystem::path& p) { save_model(pm.m, p); }, py::arg("path"))
        .def("to_bytes", [](const PyModel& pm) {
            const auto b = encode_model(pm.m);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        });

    m.def("load_model", [](const std::filesystem::path& p) { return PyModel{load_model(p)}; }, py::arg("path"));
    m.def("model_from_bytes", [](const py::bytes& data) {
        const std::string_view s(data);
        return PyModel{decode_model({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()})};
    }, py::arg("data"));

    m.def("train_sgan", [](const DatasetSplit& split, std::size_t epochs, std::size_t batch, double lr, std::uint64_t seed) {
        const TrainConfig cfg = make_config(epochs, batch, lr, seed);
        auto r = [&] {
            py::gil_scoped_release release;
            return train_sgan(split, cfg);
        }();
        return py::make_tuple(PyModel{Model{std::move(r.classifier)}}, history_rows(r.history));
    }, py::arg("split"), py::arg("epochs") = 300, py::arg("batch") = 32, py::arg("lr") = 0.0005, py::arg("seed") = 42,
       "Returns (model, history rows).");
    m.def("train_mlp", [](const DatasetSplit& split, std::size_t epochs, std::size_t batch, double lr, std::uint64_t seed) {
        const TrainConfig cfg = make_config(epochs, batch, lr, seed);
        auto r = [&] {
            py::gil_scoped_release release;
            return train_mlp(split, cfg);
        }();
        return py::make_tuple(PyModel{Model{std::move(r.classifier)}}, history_rows(r.history));
    }, py::arg("split"), py::arg("epochs") = 300, py::arg("batch") = 32, py::arg("lr") = 0.0005, py::arg("seed") = 42);
    m.def("fit_knn", [](const DatasetSplit& split, std::size_t k) {
        return PyModel{Model{KnnClassifier{KnnModel(split.supervised(), k), split.classes}}};
    }, py::arg("split"), py::arg("k") = 1);
    m.def("fit_tree", [](const DatasetSplit& split) {
        return PyModel{Model{TreeClassifier{tree_fit(split.supervised(), split.classes.size()), split.classes}}};
    }, py::arg("split"));

    m.def("parameter_counts", [](std::size_t n_classes) {
        const SganModel s = build_sgan(0, n_classes);
        py::dict d;
        d["trunk"] = s.trunk.parameter_count();
        d["disc_head"] = s.disc_head.parameter_count();
        d["generator"] = s.gen.parameter_count();
        d["total"] = s.parameter_count();
        return d;
    }, py::arg("n_classes") = 11);

    m.def("write_synthetic_corpus", [](const std::filesystem::path& dir, std::size_t per_class, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.files_per_class = per_class;
        spec.seed = seed;
        return write_synthetic_corpus(dir, spec);
    }, py::arg("dir"), py::arg("per_class") = 400, py::arg("seed") = 7);
}
