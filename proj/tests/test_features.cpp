#include "bytesort/errors.hpp"
#include "bytesort/features.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

using namespace bytesort;

TEST_CASE("histogram of a small buffer") {
    const std::vector<std::uint8_t> bytes{'a', 'a', 'b', 0, 255};
    const RawHistogram raw = byte_histogram(bytes);
    CHECK(raw.total_bytes == 5);
    CHECK(raw.counts['a'] == 2);
    CHECK(raw.counts['b'] == 1);
    CHECK(raw.counts[0] == 1);
    CHECK(raw.counts[255] == 1);
    const Histogram h = normalize(raw);
    CHECK(h.bins['a'] == doctest::Approx(0.4));
    CHECK(h.bins['c'] == 0.0);
}

TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(byte_histogram(std::vector<std::uint8_t>{}), EmptyFile);
    CHECK_THROWS_AS(normalize(RawHistogram{}), EmptyFile);
    support::TempDir dir;
    support::write_file(dir / "empty.txt", "");
    CHECK_THROWS_AS(featurize_file(dir / "empty.txt"), EmptyFile);
    CHECK_THROWS_AS(featurize_file(dir / "missing.txt"), IoError);
}

TEST_CASE("normalised bins lie in [0,1] and sum to 1") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> bytes(1 + rng.below(5000));
        const std::size_t alphabet = 1 + rng.below(256);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(alphabet));
        const Histogram h = normalize(byte_histogram(bytes));
        double s = 0.0;
        for (double v : h.bins) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("histogram ignores byte order") {
    Rng rng(4);
    std::vector<std::uint8_t> bytes(777);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
    auto shuffled = bytes;
    rng.shuffle(shuffled.begin(), shuffled.end());
    CHECK(byte_histogram(bytes) == byte_histogram(shuffled));
}

TEST_CASE("streamed file histogram equals in-memory histogram") {
    Rng rng(9);
    std::string content(200000, '\0');
    for (auto& c : content) c = static_cast<char>(rng.below(256));
    support::TempDir dir;
    support::write_file(dir / "big.bin", content);
    const std::vector<std::uint8_t> bytes(content.begin(), content.end());
    CHECK(byte_histogram_file(dir / "big.bin") == byte_histogram(bytes));
    CHECK(featurize_file(dir / "big.bin") == normalize(byte_histogram(bytes)));
}
