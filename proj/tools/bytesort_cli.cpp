// bytesort command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include "bytesort/baselines.hpp"
#include "bytesort/corpus.hpp"
#include "bytesort/errors.hpp"
#include "bytesort/eval.hpp"
#include "bytesort/persist.hpp"
#include "bytesort/sgan.hpp"
#include "bytesort/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bytesort;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct TrainOptions {
    std::size_t epochs = 300;
    std::size_t batch = 32;
    double lr = 0.0005;
    std::uint64_t seed = 42;
    std::uint64_t split_seed = 42;
};

void add_train_options(CLI::App* cmd, TrainOptions& o) {
    cmd->add_option("--epochs", o.epochs, "Maximum training epochs")->capture_default_str();
    cmd->add_option("--batch", o.batch, "Batch size (even, >= 2)")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Training seed")->capture_default_str();
    cmd->add_option("--split-seed", o.split_seed, "Seed of the 80/20 train/test split")->capture_default_str();
}

TrainConfig to_config(const TrainOptions& o) {
    TrainConfig c;
    c.max_epochs = o.epochs;
    c.batch_size = o.batch;
    c.lr_dc = o.lr;
    c.lr_g = o.lr;
    c.seed = o.seed;
    c.validate();
    return c;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

// Maps samples onto the model's class indices by extension; drops unknown classes.
std::vector<LabeledSample> align_classes(std::vector<LabeledSample> samples, const ClassMap& classes) {
    std::vector<LabeledSample> out;
    std::size_t dropped = 0;
    for (auto& s : samples) {
        if (auto idx = classes.index_of(s.original_extension)) {
            s.label = *idx;
            out.push_back(std::move(s));
        } else {
            ++dropped;
        }
    }
    if (dropped) std::cerr << "warning: " << dropped << " samples belong to classes the model does not know\n";
    return out;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string dir;
    std::string out;
    std::size_t min_class = kMinClassSize;
};

int run_ingest(const IngestArgs& a) {
    std::cerr << "ingest: dir=" << a.dir << " out=" << a.out << " min_class=" << a.min_class << '\n';
    auto result = ingest(a.dir, a.min_class);
    const auto& r = result.report;
    std::cerr << "files seen: " << r.files_seen << ", samples kept: " << result.dataset.samples.size()
              << ", classes: " << result.dataset.classes.size() << '\n';
    for (const auto& [ext, n] : r.removed_classes) std::cerr << "removed class ." << ext << " (" << n << " files)\n";
    for (const auto& f : r.failures) std::cerr << "skipped " << f.path << ": " << f.reason << '\n';
    for (std::size_t c = 0; c < result.dataset.classes.size(); ++c) {
        std::size_t n = 0;
        for (const auto& s : result.dataset.samples) n += s.label == c;
        std::cerr << "  ." << result.dataset.classes.names[c] << ": " << n << '\n';
    }
    if (result.dataset.samples.empty()) std::cerr << "warning: no samples ingested\n";
    save_features(result.dataset, a.out);
    return 0;
}

struct TrainArgs {
    std::string features;
    std::string algo = "sgan";
    std::size_t labeled = 0;
    std::size_t k = 1;
    std::string out;
    std::string history;
    std::string checkpoint;
    TrainOptions opt;
};

int run_train(const TrainArgs& a) {
    const TrainConfig cfg = to_config(a.opt);
    std::cerr << "train: features=" << a.features << " algo=" << a.algo << " labeled=" << a.labeled
              << " seed=" << cfg.seed << " split_seed=" << a.opt.split_seed << " epochs=" << cfg.max_epochs
              << " batch=" << cfg.batch_size << " lr=" << cfg.lr_dc << " k=" << a.k << " out=" << a.out << '\n';
    if (a.labeled == 0) throw EmptySupervisedSet("--labeled must be at least 1");

    const Dataset data = load_features(a.features);
    const DatasetSplit split =
        select_supervised(shuffle_split(data, a.opt.split_seed), a.labeled, derive_seed(cfg.seed, a.labeled));
    const auto supervised = split.supervised();
    const std::string history_path = a.history.empty() ? a.out + ".history.csv" : a.history;

    switch (algorithm_from_string(a.algo)) {
    case Algorithm::sgan: {
        auto res = train_sgan(split, cfg);
        save_model(res.classifier, a.out);
        write_history_csv(res.history, history_path);
        if (!a.checkpoint.empty()) save_model(SganCheckpoint::from(res, split.classes), a.checkpoint);
        std::cerr << "best epoch " << res.history.best_epoch << '\n';
        break;
    }
    case Algorithm::mlp: {
        auto res = train_mlp(split, cfg);
        save_model(res.classifier, a.out);
        write_history_csv(res.history, history_path);
        std::cerr << "best epoch " << res.history.best_epoch << '\n';
        break;
    }
    case Algorithm::knn:
        save_model(KnnClassifier{KnnModel(supervised, a.k), split.classes}, a.out);
        break;
    case Algorithm::tree:
        save_model(TreeClassifier{tree_fit(supervised, split.classes.size()), split.classes}, a.out);
        break;
    }
    return 0;
}

struct EvaluateArgs {
    std::string model;
    std::string features;
    std::string split = "all";
    std::uint64_t split_seed = 42;
    bool perturb = false;
    std::string source_dir;
    std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
    std::cerr << "evaluate: model=" << a.model << " features=" << a.features << " split=" << a.split
              << " split_seed=" << a.split_seed << " perturb_headers=" << (a.perturb ? "yes" : "no")
              << " out=" << a.out << '\n';
    const Model model = load_model(a.model);
    const ClassMap& classes = classes_of(model);
    Dataset data = load_features(a.features);
    std::vector<LabeledSample> samples;
    if (a.split == "all") {
        samples = std::move(data.samples);
    } else {
        auto split = shuffle_split(data, a.split_seed);
        samples = a.split == "test" ? std::move(split.test) : std::move(split.train);
    }
    samples = align_classes(std::move(samples), classes);
    if (samples.empty()) throw InvalidArgument("no samples to evaluate");

    const ClassifyFn fn = [&](const Histogram& h) { return predict(model, h).label; };
    const EvalResult r = evaluate(fn, samples, classes);

    fs::create_directories(a.out);
    write_confusion_csv(r.confusion, fs::path(a.out) / "confusion_original.csv");
    std::ostringstream summary;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy);
    summary << "metric,value\nsamples," << samples.size() << "\naccuracy," << buf << '\n';
    std::cout << "accuracy\t" << buf << '\n';

    if (a.perturb) {
        const auto pert = perturb_headers(samples, a.source_dir);
        for (const auto& s : pert.skipped) std::cerr << "skipped " << s.path << ": " << s.reason << '\n';
        const auto rob = header_robustness(fn, samples, pert, classes);
        write_confusion_csv(rob.perturbed_confusion, fs::path(a.out) / "confusion_perturbed.csv");
        std::snprintf(buf, sizeof buf, "%.6f", rob.original_accuracy);
        summary << "compared," << rob.compared << "\nskipped_short," << rob.skipped << "\noriginal_accuracy," << buf << '\n';
        std::cout << "original_accuracy\t" << buf << '\n';
        std::snprintf(buf, sizeof buf, "%.6f", rob.perturbed_accuracy);
        summary << "perturbed_accuracy," << buf << '\n';
        std::cout << "perturbed_accuracy\t" << buf << '\n';
        std::snprintf(buf, sizeof buf, "%.6f", rob.delta());
        summary << "delta," << buf << '\n';
        std::cout << "delta\t" << buf << '\n';
    }
    std::ofstream(fs::path(a.out) / "summary.csv", std::ios::binary) << summary.str();
    return 0;
}

int run_classify(const std::string& model_path, const std::vector<std::string>& files) {
    const Model model = load_model(model_path);
    const ClassMap& classes = classes_of(model);
    std::size_t failed = 0;
    char buf[32];
    for (const auto& f : files) {
        try {
            const Prediction p = predict(model, featurize_file(f));
            std::string line = f + '\t' + classes.names.at(p.label) + '\t';
            std::snprintf(buf, sizeof buf, "%.6f", p.probabilities[p.label]);
            line += buf;
            line += '\t';
            for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%s%.6f", i ? "," : "", p.probabilities[i]);
                line += buf;
            }
            std::cout << line << '\n';
        } catch (const Error& e) {
            std::cerr << f << ": error: " << e.what() << '\n';
            ++failed;
        }
    }
    return failed == files.size() ? kExitFailure : 0;
}

struct SweepArgs {
    std::string features;
    std::vector<std::size_t> budgets{2288, 1144, 500, 100, 50};
    std::size_t seeds = 3;
    std::vector<std::string> algos{"sgan", "mlp", "tree", "knn"};
    std::vector<std::size_t> ks{1, 2, 3, 4, 5, 6};
    std::string out;
    std::string reports;
    TrainOptions opt;
};

int run_sweep_cmd(const SweepArgs& a) {
    SweepConfig cfg;
    cfg.budgets = a.budgets;
    cfg.algorithms.clear();
    for (const auto& s : a.algos) cfg.algorithms.push_back(algorithm_from_string(s));
    cfg.knn_ks = a.ks;
    cfg.replicates = a.seeds;
    cfg.master_seed = a.opt.seed;
    cfg.train = to_config(a.opt);
    std::cerr << "sweep: features=" << a.features << " budgets=" << join(a.budgets) << " seeds=" << a.seeds
              << " k=" << join(a.ks) << " seed=" << a.opt.seed << " split_seed=" << a.opt.split_seed
              << " epochs=" << a.opt.epochs << " batch=" << a.opt.batch << " lr=" << a.opt.lr << " out=" << a.out
              << '\n';

    const Dataset data = load_features(a.features);
    const DatasetSplit split = shuffle_split(data, a.opt.split_seed);
    const SweepResult res = run_sweep(split, cfg);
    write_sweep_csv(res, a.out);
    if (!a.reports.empty()) render_reports(res, res.confusions, a.reports);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bytesort: identify file types from byte-value histograms"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Featurize a directory tree into a feature cache");
    ingest_cmd->add_option("--dir", ingest_args.dir, "Corpus root")->required();
    ingest_cmd->add_option("--out", ingest_args.out, "Feature cache CSV")->required();
    ingest_cmd->add_option("--min-class", ingest_args.min_class, "Drop classes with fewer files")->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a classifier on the training split");
    train_cmd->add_option("--features", train_args.features, "Feature cache CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--algo", train_args.algo, "Algorithm")
        ->capture_default_str()
        ->check(CLI::IsMember({"sgan", "mlp", "knn", "tree"}));
    train_cmd->add_option("--labeled", train_args.labeled, "Number of supervised training samples")->required();
    train_cmd->add_option("--k", train_args.k, "kNN neighbours")->capture_default_str()->check(CLI::Range(1, 6));
    train_cmd->add_option("--out", train_args.out, "Model file")->required();
    train_cmd->add_option("--history", train_args.history, "Training history CSV (default <out>.history.csv)");
    train_cmd->add_option("--checkpoint", train_args.checkpoint, "Also save the full SGAN state here");
    add_train_options(train_cmd, train_args.opt);

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Accuracy and confusion matrix of a model");
    eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
    eval_cmd->add_option("--features", eval_args.features, "Feature cache CSV")->required();
    eval_cmd->add_option("--split", eval_args.split, "Which samples to evaluate")
        ->capture_default_str()
        ->check(CLI::IsMember({"all", "train", "test"}));
    eval_cmd->add_option("--split-seed", eval_args.split_seed, "Seed of the 80/20 split")->capture_default_str();
    auto* perturb_flag = eval_cmd->add_flag("--perturb-headers", eval_args.perturb, "Also evaluate with obfuscated headers");
    eval_cmd->add_option("--source-dir", eval_args.source_dir, "Corpus root the cache was built from")
        ->needs(perturb_flag)
        ->check(CLI::ExistingDirectory);
    perturb_flag->needs(eval_cmd->get_option("--source-dir"));
    eval_cmd->add_option("--out", eval_args.out, "Report directory")->required();

    std::string classify_model;
    std::vector<std::string> classify_files;
    auto* classify_cmd = app.add_subcommand("classify", "Classify files by content");
    classify_cmd->add_option("--model", classify_model, "Model file")->required();
    classify_cmd->add_option("files", classify_files, "Files to classify")->required();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy versus supervised budget for every algorithm");
    sweep_cmd->add_option("--features", sweep_args.features, "Feature cache CSV")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--budgets", sweep_args.budgets, "Supervised budgets")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--seeds", sweep_args.seeds, "Replicates per cell")->capture_default_str()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--algos", sweep_args.algos, "Algorithms")
        ->delimiter(',')
        ->capture_default_str()
        ->check(CLI::IsMember({"sgan", "mlp", "knn", "tree"}));
    sweep_cmd->add_option("--k", sweep_args.ks, "kNN neighbour counts")->delimiter(',')->check(CLI::Range(1, 6));
    sweep_cmd->add_option("--out", sweep_args.out, "Sweep CSV")->required();
    sweep_cmd->add_option("--reports", sweep_args.reports, "Directory for per-run confusion and history CSVs");
    add_train_options(sweep_cmd, sweep_args.opt);

    SyntheticSpec synth;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic five-class test corpus");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--per-class", synth.files_per_class, "Files per class")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--concentration", synth.concentration, "Dirichlet concentration")->capture_default_str();
    synth_cmd->add_option("--min-bytes", synth.min_bytes, "Smallest file size")->capture_default_str();
    synth_cmd->add_option("--max-bytes", synth.max_bytes, "Largest file size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*ingest_cmd) return run_ingest(ingest_args);
        if (*train_cmd) return run_train(train_args);
        if (*eval_cmd) return run_evaluate(eval_args);
        if (*classify_cmd) return run_classify(classify_model, classify_files);
        if (*sweep_cmd) return run_sweep_cmd(sweep_args);
        if (*synth_cmd) {
            std::cerr << "synth: out=" << synth_out << " per_class=" << synth.files_per_class << " seed=" << synth.seed << '\n';
            std::cerr << write_synthetic_corpus(synth_out, synth) << " files written\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
