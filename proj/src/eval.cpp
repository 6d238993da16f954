#include "bytesort/eval.hpp"

#include "bytesort/baselines.hpp"
#include "bytesort/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace fs = std::filesystem;

namespace bytesort {

ConfusionMatrix::ConfusionMatrix(ClassMap cls) : classes(std::move(cls)) {
    counts.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
    const std::size_t need = std::max(truth, predicted) + 1;
    if (need > counts.size()) {
        counts.resize(need);
        for (auto& row : counts) row.resize(need, 0);
    }
    ++counts[truth][predicted];
}

std::size_t ConfusionMatrix::total() const noexcept {
    std::size_t t = 0;
    for (const auto& row : counts)
        for (std::size_t c : row) t += c;
    return t;
}

std::size_t ConfusionMatrix::correct() const noexcept {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

double ConfusionMatrix::accuracy() const noexcept {
    const std::size_t t = total();
    return t ? static_cast<double>(correct()) / static_cast<double>(t) : 0.0;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const noexcept {
    if (truth >= counts.size()) return 0;
    std::size_t t = 0;
    for (std::size_t c : counts[truth]) t += c;
    return t;
}

double ConfusionMatrix::recall(std::size_t truth) const noexcept {
    const std::size_t n = row_sum(truth);
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(counts[truth][truth]) / static_cast<double>(n);
}

EvalResult evaluate(const ClassifyFn& classify_fn, std::span<const LabeledSample> test, const ClassMap& classes) {
    if (test.empty()) throw InvalidArgument("empty test set");
    EvalResult r{0.0, ConfusionMatrix(classes), {}};
    r.predictions.reserve(test.size());
    for (const auto& s : test) {
        const std::size_t p = classify_fn(s.features);
        r.predictions.push_back(p);
        r.confusion.add(s.label, p);
    }
    r.accuracy = r.confusion.accuracy();
    return r;
}

EvalResult evaluate(const Classifier& clf, std::span<const LabeledSample> test) {
    if (test.empty()) throw InvalidArgument("empty test set");
    EvalResult r{0.0, ConfusionMatrix(clf.classes), {}};
    const auto preds = classify_all(clf, test);
    for (std::size_t i = 0; i < test.size(); ++i) {
        r.predictions.push_back(preds[i].label);
        r.confusion.add(test[i].label, preds[i].label);
    }
    r.accuracy = r.confusion.accuracy();
    return r;
}

// ---------------------------------------------------------------------------
// Sweep

const char* to_string(Algorithm a) noexcept {
    switch (a) {
    case Algorithm::sgan: return "sgan";
    case Algorithm::mlp: return "mlp";
    case Algorithm::tree: return "tree";
    case Algorithm::knn: return "knn";
    }
    return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
    for (Algorithm a : {Algorithm::sgan, Algorithm::mlp, Algorithm::tree, Algorithm::knn})
        if (name == to_string(a)) return a;
    throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

std::uint64_t subset_seed(std::uint64_t master, std::size_t budget, std::size_t replicate) noexcept {
    return derive_seed(derive_seed(derive_seed(master, 0x5B5E7), budget), replicate);
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t budget, Algorithm algo, std::size_t replicate) noexcept {
    return derive_seed(derive_seed(derive_seed(master, budget), static_cast<std::uint64_t>(algo)), replicate);
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

SweepResult run_sweep(const DatasetSplit& split, const SweepConfig& config) {
    if (config.replicates == 0) throw InvalidArgument("need at least one replicate");
    if (split.test.empty()) throw InvalidArgument("sweep needs a non-empty test set");
    for (std::size_t b : config.budgets)
        if (b < 1 || b > split.train.size())
            throw InvalidArgument("budget " + std::to_string(b) + " outside [1, " + std::to_string(split.train.size()) + "]");
    for (std::size_t k : config.knn_ks)
        if (k < 1 || k > kMaxK) throw InvalidArgument("kNN k must be in [1, 6]");

    SweepResult out;
    out.budgets = config.budgets;
    for (Algorithm a : config.algorithms) {
        if (a == Algorithm::knn)
            for (std::size_t k : config.knn_ks) out.columns.push_back("knn_k" + std::to_string(k));
        else
            out.columns.emplace_back(to_string(a));
    }
    out.runs.assign(config.budgets.size(),
                    std::vector<std::vector<double>>(out.columns.size(), std::vector<double>(config.replicates)));

    for (std::size_t bi = 0; bi < config.budgets.size(); ++bi) {
        const std::size_t budget = config.budgets[bi];
        for (std::size_t rep = 0; rep < config.replicates; ++rep) {
            const std::uint64_t sseed = subset_seed(config.master_seed, budget, rep);
            out.subset_seeds.push_back(sseed);
            const DatasetSplit cell_split = select_supervised(split, budget, sseed);
            const auto supervised = cell_split.supervised();
            const std::string suffix = "_n" + std::to_string(budget) + "_r" + std::to_string(rep);

            std::size_t col = 0;
            auto record = [&](const std::string& name, EvalResult r) {
                out.runs[bi][col++][rep] = r.accuracy;
                out.confusions.emplace_back(name + suffix, std::move(r.confusion));
            };
            for (Algorithm a : config.algorithms) {
                TrainConfig tc = config.train;
                tc.seed = cell_seed(config.master_seed, budget, a, rep);
                switch (a) {
                case Algorithm::sgan: {
                    auto res = train_sgan(cell_split, tc);
                    out.histories.emplace_back("sgan" + suffix, res.history);
                    record("sgan", evaluate(res.classifier, split.test));
                    break;
                }
                case Algorithm::mlp: {
                    auto res = train_mlp(cell_split, tc);
                    out.histories.emplace_back("mlp" + suffix, res.history);
                    record("mlp", evaluate(res.classifier, split.test));
                    break;
                }
                case Algorithm::tree: {
                    const auto tree = tree_fit(supervised, split.classes.size());
                    record("tree", evaluate([&](const Histogram& h) { return tree_predict(tree, h); }, split.test,
                                            split.classes));
                    break;
                }
                case Algorithm::knn:
                    for (std::size_t k : config.knn_ks) {
                        const KnnModel knn(supervised, k);
                        record("knn_k" + std::to_string(k),
                               evaluate([&](const Histogram& h) { return knn.predict(h); }, split.test, split.classes));
                    }
                    break;
                }
            }
        }
    }

    out.median.resize(config.budgets.size());
    for (std::size_t bi = 0; bi < config.budgets.size(); ++bi)
        for (const auto& runs : out.runs[bi]) out.median[bi].push_back(median(runs));
    return out;
}

// ---------------------------------------------------------------------------
// Header obfuscation

bool header_exempt(std::string_view ext) noexcept { return ext == "xml" || ext == "html" || ext == "txt"; }

void overwrite_header(std::span<std::uint8_t> bytes) {
    if (bytes.size() < kObfuscatedHeader.size())
        throw FileTooShort("file has " + std::to_string(bytes.size()) + " bytes, need 6");
    std::copy(kObfuscatedHeader.begin(), kObfuscatedHeader.end(), bytes.begin());
}

namespace {
std::vector<std::uint8_t> read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + p.string());
    return bytes;
}
} // namespace

PerturbResult perturb_headers(std::span<const LabeledSample> test, const fs::path& source_root) {
    PerturbResult out;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& s = test[i];
        if (header_exempt(s.original_extension)) {
            out.samples.push_back(s);
            out.kept.push_back(i);
            continue;
        }
        auto bytes = read_all(source_root / s.source_path);
        try {
            overwrite_header(bytes);
        } catch (const FileTooShort& e) {
            out.skipped.push_back({s.source_path, e.what()});
            continue;
        }
        LabeledSample p = s;
        p.features = normalize(byte_histogram(bytes));
        out.samples.push_back(std::move(p));
        out.kept.push_back(i);
    }
    return out;
}

RobustnessReport header_robustness(const ClassifyFn& classify_fn, std::span<const LabeledSample> test,
                                   const PerturbResult& perturbed, const ClassMap& classes) {
    std::vector<LabeledSample> original;
    original.reserve(perturbed.kept.size());
    for (std::size_t i : perturbed.kept) original.push_back(test[i]);
    RobustnessReport r;
    r.compared = original.size();
    r.skipped = perturbed.skipped.size();
    r.original_accuracy = evaluate(classify_fn, original, classes).accuracy;
    auto pe = evaluate(classify_fn, perturbed.samples, classes);
    r.perturbed_accuracy = pe.accuracy;
    r.perturbed_confusion = std::move(pe.confusion);
    return r;
}

EpochObserver perturbation_tracker(std::vector<LabeledSample> original, std::vector<LabeledSample> perturbed,
                                   std::vector<PerturbationEpoch>& out) {
    return [orig = std::move(original), pert = std::move(perturbed), &out](const EpochRecord& rec,
                                                                           const DenseNet& net) {
        out.push_back({rec.epoch, accuracy(net, orig), accuracy(net, pert)});
    };
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

std::string fmt(double v, const char* spec) {
    if (std::isnan(v)) return {};
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string class_name(const ClassMap& classes, std::size_t i) {
    return i < classes.size() && !classes.names[i].empty() ? classes.names[i] : "class" + std::to_string(i);
}

void check(std::ofstream& out, const fs::path& p) {
    out.flush();
    if (!out) throw IoError("write failed: " + p.string());
}

} // namespace

void write_sweep_csv(const SweepResult& sweep, const fs::path& path) {
    auto out = open_out(path);
    out << "n_supervised";
    for (const auto& c : sweep.columns) out << ',' << c;
    out << '\n';
    for (std::size_t bi = 0; bi < sweep.budgets.size(); ++bi) {
        out << sweep.budgets[bi];
        for (double v : sweep.median[bi]) out << ',' << fmt(v, "%.5f");
        out << '\n';
    }
    check(out, path);
}

void write_confusion_csv(const ConfusionMatrix& cm, const fs::path& path) {
    auto out = open_out(path);
    const std::size_t n = cm.counts.size();
    out << "kind,true";
    for (std::size_t c = 0; c < n; ++c) out << ',' << class_name(cm.classes, c);
    out << '\n';
    for (std::size_t t = 0; t < n; ++t) {
        const double row = static_cast<double>(cm.row_sum(t));
        out << "percent," << class_name(cm.classes, t);
        for (std::size_t p = 0; p < n; ++p)
            out << ',' << fmt(row > 0 ? 100.0 * static_cast<double>(cm.counts[t][p]) / row : 0.0, "%.4f");
        out << '\n';
    }
    for (std::size_t t = 0; t < n; ++t) {
        out << "count," << class_name(cm.classes, t);
        for (std::size_t p = 0; p < n; ++p) out << ',' << cm.counts[t][p];
        out << '\n';
    }
    check(out, path);
}

void write_history_csv(const TrainHistory& history, const fs::path& path) {
    auto out = open_out(path);
    const auto opt = [](const std::optional<double>& v) { return v ? fmt(*v, "%.9g") : std::string(); };
    out << "epoch,d_real_loss,c_loss,d_fake_loss,g_loss,train_accuracy,best\n";
    for (const auto& r : history.epochs) {
        out << r.epoch << ',' << opt(r.d_real_loss) << ',' << fmt(r.c_loss, "%.9g") << ',' << opt(r.d_fake_loss)
            << ',' << opt(r.g_loss) << ',' << fmt(r.train_accuracy, "%.6f") << ','
            << (r.epoch == history.best_epoch ? 1 : 0) << '\n';
    }
    check(out, path);
}

std::vector<fs::path> render_reports(const SweepResult& sweep,
                                     std::span<const std::pair<std::string, ConfusionMatrix>> confusions,
                                     const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw IoError("cannot create " + out_dir.string());
    std::vector<fs::path> written;
    written.push_back(out_dir / "sweep.csv");
    write_sweep_csv(sweep, written.back());
    for (const auto& [tag, cm] : confusions) {
        written.push_back(out_dir / ("confusion_" + tag + ".csv"));
        write_confusion_csv(cm, written.back());
    }
    for (const auto& [tag, h] : sweep.histories) {
        written.push_back(out_dir / ("history_" + tag + ".csv"));
        write_history_csv(h, written.back());
    }
    return written;
}

} // namespace bytesort
