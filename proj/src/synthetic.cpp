#include "bytesort/synthetic.hpp"

#include "bytesort/errors.hpp"
#include "bytesort/ndmath.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <string_view>

namespace fs = std::filesystem;

namespace bytesort {

namespace {

using Profile = std::array<double, 256>;

void add(Profile& p, std::string_view chars, double w) {
    for (unsigned char c : chars) p[c] += w;
}

void add_range(Profile& p, int lo, int hi, double w) {
    for (int c = lo; c <= hi; ++c) p[static_cast<std::size_t>(c)] += w;
}

Profile prose() {
    Profile p{};
    add_range(p, 'a', 'z', 2.0);
    add(p, " ", 15.0);
    add(p, "e", 8.0);
    add(p, "taoinsh", 5.0);
    add(p, "rdlu", 2.0);
    add_range(p, 'A', 'Z', 0.6);
    add_range(p, '0', '9', 0.5);
    add(p, ".,;:'\"!?-()", 0.8);
    add(p, "\n", 2.0);
    return p;
}

Profile tabular() {
    Profile p{};
    add_range(p, '0', '9', 6.0);
    add_range(p, 'a', 'z', 1.5);
    add_range(p, 'A', 'Z', 2.0);
    add(p, " ", 8.0);
    add(p, ",", 4.0);
    add(p, ":-./", 2.0);
    add(p, "\n", 3.0);
    return p;
}

Profile markup(double prose_weight, double tag_weight) {
    Profile p = prose();
    for (double& v : p) v *= prose_weight;
    add(p, "<>", 4.0 * tag_weight);
    add(p, "/\"=", 3.0 * tag_weight);
    add(p, "divpanhrefclsy", 1.5 * tag_weight);
    add(p, "\t\n", 2.0 * tag_weight);
    return p;
}

Profile uniform() {
    Profile p;
    p.fill(1.0);
    return p;
}

Profile blend(const Profile& a, double wa, const Profile& b, double wb) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < 256; ++i) {
        sa += a[i];
        sb += b[i];
    }
    Profile out;
    for (std::size_t i = 0; i < 256; ++i) out[i] = wa * a[i] / sa + wb * b[i] / sb;
    return out;
}

Profile zero_heavy(bool with_strings) {
    Profile p = uniform();
    if (with_strings) {
        p[0x00] += 120.0;
        add_range(p, 0x20, 0x7E, 2.0);
    } else {
        p[0x00] += 300.0;
        add_range(p, 0x01, 0x1F, 5.0);
        p[0xFF] += 30.0;
    }
    return p;
}

Profile raw_profile(std::size_t cls, std::size_t component) {
    const bool second = component != 0;
    switch (cls) {
    case 0: return zero_heavy(second);
    case 1: return second ? markup(0.3, 2.0) : markup(0.7, 1.0);
    case 2: return second ? blend(prose(), 0.25, uniform(), 0.75) : blend(prose(), 0.5, uniform(), 0.5);
    case 3: return second ? tabular() : prose();
    case 4: {
        Profile p = uniform();
        if (second) {
            p[0x00] += 3.0;
            p[0xFF] += 1.0;
        }
        return p;
    }
    }
    throw InvalidArgument("synthetic class index out of range");
}

const std::array<std::string_view, 5> kNames{"bin", "html", "pdf", "txt", "zip"};
const std::array<std::string_view, 5> kMagic{"\x7F" "ELF\x02\x01", "", "%PDF-1", "", std::string_view("PK\x03\x04\x14\x00", 6)};

} // namespace

std::vector<std::string> synthetic_class_names() { return {kNames.begin(), kNames.end()}; }

std::vector<double> synthetic_profile(std::size_t cls, std::size_t component) {
    const Profile raw = raw_profile(cls, component);
    double sum = 0.0;
    for (double v : raw) sum += v;
    std::vector<double> out(raw.begin(), raw.end());
    for (double& v : out) v /= sum;
    return out;
}

std::vector<std::uint8_t> synthetic_file(const SyntheticSpec& spec, std::size_t cls, std::size_t index) {
    if (spec.min_bytes < 6 || spec.max_bytes < spec.min_bytes) throw InvalidArgument("bad synthetic file size range");
    Rng rng(derive_seed(derive_seed(spec.seed, cls), index));
    const std::size_t component = rng.bernoulli(0.5) ? 1 : 0;
    const auto profile = synthetic_profile(cls, component);

    std::vector<double> p(256);
    double sum = 0.0;
    for (std::size_t b = 0; b < 256; ++b) {
        const double alpha = spec.concentration * profile[b];
        p[b] = alpha > 0.0 ? std::gamma_distribution<double>(alpha, 1.0)(rng.engine()) : 0.0;
        sum += p[b];
    }
    for (double& v : p) v /= sum;

    const std::size_t len = spec.min_bytes + rng.below(spec.max_bytes - spec.min_bytes + 1);
    std::discrete_distribution<int> draw(p.begin(), p.end());
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(draw(rng.engine()));
    const auto magic = kMagic[cls];
    std::copy(magic.begin(), magic.end(), bytes.begin());
    return bytes;
}

std::size_t write_synthetic_corpus(const fs::path& dir, const SyntheticSpec& spec) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw IoError("cannot create " + dir.string());
    std::size_t written = 0;
    char name[64];
    for (std::size_t cls = 0; cls < kNames.size(); ++cls) {
        for (std::size_t i = 0; i < spec.files_per_class; ++i) {
            const auto bytes = synthetic_file(spec, cls, i);
            std::snprintf(name, sizeof name, "%s_%05zu.%s", kNames[cls].data(), i, kNames[cls].data());
            std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw IoError("write failed: " + (dir / name).string());
            ++written;
        }
    }
    return written;
}

} // namespace bytesort
