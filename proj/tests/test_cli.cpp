#include "bytesort/persist.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#ifndef BYTESORT_CLI
#error "BYTESORT_CLI must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const std::string cmd =
        std::string("'") + BYTESORT_CLI + "' " + args + " > '" + out.string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, support::read_file(out)};
}

struct Workspace {
    support::TempDir dir;
    fs::path corpus = dir / "corpus";
    fs::path features = dir / "f.csv";

    Workspace() {
        REQUIRE(run("synth --out '" + corpus.string() + "' --per-class 25", dir.path()).code == 0);
        REQUIRE(run("ingest --dir '" + corpus.string() + "' --out '" + features.string() + "'", dir.path()).code == 0);
    }
    std::string q(const std::string& name) const { return "'" + (dir / name).string() + "'"; }
};

} // namespace

TEST_CASE("usage errors exit with 2") {
    support::TempDir dir;
    CHECK(run("", dir.path()).code == 2);
    CHECK(run("frobnicate", dir.path()).code == 2);
    CHECK(run("train --algo sgan", dir.path()).code == 2);
    CHECK(run("ingest --dir x", dir.path()).code == 2);
    CHECK(run("--help", dir.path()).code == 0);
}

TEST_CASE("runtime failures exit with 1") {
    support::TempDir dir;
    CHECK(run("ingest --dir '" + (dir / "missing").string() + "' --out '" + (dir / "f.csv").string() + "'", dir.path())
              .code == 1);
    support::write_file(dir / "junk.bin", "not a model at all, certainly not one with a hash");
    support::write_file(dir / "x.txt", "hello");
    CHECK(run("classify --model '" + (dir / "junk.bin").string() + "' '" + (dir / "x.txt").string() + "'", dir.path())
              .code == 1);
}

TEST_CASE("ingest, train, evaluate, classify") {
    Workspace ws;
    const auto data = bytesort::load_features(ws.features);
    CHECK(data.samples.size() == 125);

    SUBCASE("bad flag values are usage errors") {
        CHECK(run("train --features " + ws.q("f.csv") + " --algo svm --labeled 10 --out " + ws.q("m.bin"), ws.dir.path()).code == 2);
        CHECK(run("train --features " + ws.q("f.csv") + " --algo knn --k 9 --labeled 10 --out " + ws.q("m.bin"), ws.dir.path()).code == 2);
    }
    SUBCASE("zero labels is a runtime failure") {
        CHECK(run("train --features " + ws.q("f.csv") + " --algo sgan --labeled 0 --out " + ws.q("m.bin"), ws.dir.path()).code == 1);
        CHECK_FALSE(fs::exists(ws.dir / "m.bin"));
    }
    SUBCASE("tree model end to end") {
        REQUIRE(run("train --features " + ws.q("f.csv") + " --algo tree --labeled 100 --out " + ws.q("t.bin"), ws.dir.path()).code == 0);
        const Run ev = run("evaluate --model " + ws.q("t.bin") + " --features " + ws.q("f.csv") +
                               " --split test --perturb-headers --source-dir " + ws.q("corpus") + " --out " + ws.q("rep"),
                           ws.dir.path());
        CHECK(ev.code == 0);
        CHECK(ev.out.find("accuracy\t") != std::string::npos);
        CHECK(ev.out.find("delta\t") != std::string::npos);
        CHECK(fs::exists(ws.dir / "rep" / "confusion_original.csv"));
        CHECK(fs::exists(ws.dir / "rep" / "confusion_perturbed.csv"));

        const auto file = ws.corpus / data.samples[0].source_path;
        const Run cl = run("classify --model " + ws.q("t.bin") + " '" + file.string() + "'", ws.dir.path());
        CHECK(cl.code == 0);
        std::istringstream line(cl.out);
        std::string path, label, pmax, probs;
        std::getline(line, path, '\t');
        std::getline(line, label, '\t');
        std::getline(line, pmax, '\t');
        std::getline(line, probs);
        CHECK(path == file.string());
        CHECK(data.classes.index_of(label).has_value());
        CHECK(std::stod(pmax) == 1.0);
        CHECK(std::count(probs.begin(), probs.end(), ',') == 4);
    }
    SUBCASE("corrupted model file is rejected by evaluate") {
        REQUIRE(run("train --features " + ws.q("f.csv") + " --algo knn --k 2 --labeled 50 --out " + ws.q("k.bin"), ws.dir.path()).code == 0);
        std::string bytes = support::read_file(ws.dir / "k.bin");
        bytes[bytes.size() / 2] ^= 0x10;
        support::write_file(ws.dir / "k.bin", bytes);
        CHECK(run("evaluate --model " + ws.q("k.bin") + " --features " + ws.q("f.csv") + " --out " + ws.q("rep"), ws.dir.path())
                  .code == 1);
    }
    SUBCASE("sgan writes a model and a history") {
        REQUIRE(run("train --features " + ws.q("f.csv") + " --algo sgan --labeled 20 --epochs 2 --batch 16 --out " +
                        ws.q("s.bin") + " --checkpoint " + ws.q("full.bin"),
                    ws.dir.path())
                    .code == 0);
        CHECK(bytesort::kind_of(bytesort::load_model(ws.dir / "s.bin")) == bytesort::ModelKind::classifier);
        CHECK(bytesort::kind_of(bytesort::load_model(ws.dir / "full.bin")) == bytesort::ModelKind::sgan_full);
        const std::string hist = support::read_file(ws.dir / "s.bin.history.csv");
        CHECK(std::count(hist.begin(), hist.end(), '\n') == 3);
    }
    SUBCASE("sweep") {
        CHECK(run("sweep --features " + ws.q("f.csv") + " --budgets 100,10 --seeds 1 --algos tree,knn --k 1,2 --out " +
                      ws.q("s.csv") + " --reports " + ws.q("reports"),
                  ws.dir.path())
                  .code == 0);
        const std::string csv = support::read_file(ws.dir / "s.csv");
        CHECK(csv.rfind("n_supervised,tree,knn_k1,knn_k2\n100,", 0) == 0);
        CHECK(fs::exists(ws.dir / "reports" / "confusion_tree_n10_r0.csv"));
    }
}
