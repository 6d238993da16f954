#include "bytesort/corpus.hpp"

#include "bytesort/errors.hpp"
#include "bytesort/ndmath.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace bytesort {

std::optional<std::size_t> ClassMap::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

std::string extension_of(const fs::path& path) {
    std::string ext = path.filename().extension().string();
    if (ext.size() <= 1) return {};
    ext.erase(0, 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

IngestResult ingest(const fs::path& root, std::size_t min_class_size) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("not a readable directory: " + root.string());

    std::vector<fs::path> files;
    fs::recursive_directory_iterator it(root, ec), end;
    if (ec) throw IoError("cannot read " + root.string() + ": " + ec.message());
    for (; it != end; it.increment(ec)) {
        if (ec) throw IoError("walking " + root.string() + ": " + ec.message());
        if (it->is_regular_file(ec)) files.push_back(it->path());
    }
    std::sort(files.begin(), files.end());

    IngestResult result;
    auto& report = result.report;
    report.files_seen = files.size();

    std::vector<LabeledSample> all;
    std::map<std::string, std::size_t> counts;
    for (const auto& f : files) {
        const std::string rel = f.lexically_relative(root).generic_string();
        const std::string ext = extension_of(f);
        if (ext.empty()) {
            report.failures.push_back({rel, "no extension"});
            continue;
        }
        LabeledSample s;
        try {
            s.features = featurize_file(f);
        } catch (const EmptyFile&) {
            report.failures.push_back({rel, "empty file"});
            continue;
        } catch (const IoError& e) {
            report.failures.push_back({rel, e.what()});
            continue;
        }
        s.source_path = rel;
        s.original_extension = ext;
        ++counts[ext];
        all.push_back(std::move(s));
    }

    for (const auto& [ext, n] : counts) {
        if (n >= min_class_size)
            result.dataset.classes.names.push_back(ext);
        else
            report.removed_classes.emplace_back(ext, n);
    }
    for (auto& s : all) {
        if (auto idx = result.dataset.classes.index_of(s.original_extension)) {
            s.label = *idx;
            result.dataset.samples.push_back(std::move(s));
        } else {
            report.removed_files.push_back(s.source_path);
        }
    }
    return result;
}

std::vector<LabeledSample> DatasetSplit::supervised() const {
    std::vector<LabeledSample> out;
    out.reserve(supervised_indices.size());
    for (std::size_t i : supervised_indices) out.push_back(train[i]);
    return out;
}

DatasetSplit shuffle_split(const Dataset& data, std::uint64_t seed, double train_fraction) {
    const std::size_t n = data.samples.size();
    if (n < 2) throw InvalidArgument("need at least 2 samples to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must be in (0,1)");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());

    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    DatasetSplit split;
    split.seed = seed;
    split.classes = data.classes;
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? split.train : split.test).push_back(data.samples[order[i]]);
    split.supervised_indices.resize(split.train.size());
    for (std::size_t i = 0; i < split.train.size(); ++i) split.supervised_indices[i] = i;
    return split;
}

DatasetSplit select_supervised(DatasetSplit split, std::size_t n, std::uint64_t seed) {
    if (n < 1 || n > split.train.size())
        throw InvalidArgument("supervised budget " + std::to_string(n) + " outside [1, " +
                              std::to_string(split.train.size()) + "]");
    std::size_t n_classes = split.classes.size();
    for (const auto& s : split.train) n_classes = std::max(n_classes, s.label + 1);

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < split.train.size(); ++i) by_class[split.train[i].label].push_back(i);
    for (auto& members : by_class) rng.shuffle(members.begin(), members.end());

    std::vector<std::size_t> taken(n_classes, 0);
    std::vector<std::size_t> picked;
    picked.reserve(n);
    const std::size_t base = n / n_classes;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::size_t k = std::min(base, by_class[c].size());
        picked.insert(picked.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(k));
        taken[c] = k;
    }
    while (picked.size() < n) {
        std::vector<std::size_t> open;
        for (std::size_t c = 0; c < n_classes; ++c)
            if (taken[c] < by_class[c].size()) open.push_back(c);
        rng.shuffle(open.begin(), open.end());
        for (std::size_t c : open) {
            if (picked.size() == n) break;
            picked.push_back(by_class[c][taken[c]++]);
        }
    }
    std::sort(picked.begin(), picked.end());
    split.supervised_indices = std::move(picked);
    return split;
}

// ---------------------------------------------------------------------------
// Hashing

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
        throw Error("sha256 failed");
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Feature cache

namespace {

constexpr std::string_view kChecksumPrefix = "#sha256:";

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string header_line() {
    std::string h = "path,label,ext";
    for (std::size_t b = 0; b < kBins; ++b) h += ",b" + std::to_string(b);
    return h;
}

// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw FormatError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace

void save_features(const Dataset& data, const fs::path& path) {
    std::string body = header_line();
    body.push_back('\n');
    char buf[32];
    for (const auto& s : data.samples) {
        body += csv_quote(s.source_path);
        body += ',' + std::to_string(s.label) + ',' + csv_quote(s.original_extension);
        for (double v : s.features.bins) {
            std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(static_cast<float>(v)));
            body += buf;
        }
        body.push_back('\n');
    }
    const auto digest = sha256({reinterpret_cast<const std::uint8_t*>(body.data()), body.size()});
    body += std::string(kChecksumPrefix) + to_hex(digest) + '\n';

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_features(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    // Locate the checksum trailer: the last non-empty line.
    std::size_t end = text.size();
    while (end > 0 && (text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
    const std::size_t trailer_start = text.rfind('\n', end == 0 ? 0 : end - 1);
    const std::size_t body_len = trailer_start == std::string::npos ? 0 : trailer_start + 1;
    const std::string_view trailer(text.data() + body_len, end - body_len);
    const std::size_t trailer_line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(body_len), '\n')) + 1;
    if (!trailer.starts_with(kChecksumPrefix)) throw FormatError(trailer_line, "missing #sha256 trailer");
    const auto digest = sha256({reinterpret_cast<const std::uint8_t*>(text.data()), body_len});
    if (trailer.substr(kChecksumPrefix.size()) != to_hex(digest))
        throw ChecksumError("feature cache checksum mismatch: " + path.string());

    Dataset data;
    std::map<std::size_t, std::string> label_names;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < body_len) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos || nl > body_len) nl = body_len;
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line != header_line()) throw FormatError(1, "unexpected header");
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_csv(line, line_no);
        if (fields.size() != 3 + kBins)
            throw FormatError(line_no, "expected " + std::to_string(3 + kBins) + " columns, got " +
                                           std::to_string(fields.size()));
        LabeledSample s;
        s.source_path = fields[0];
        const auto& lf = fields[1];
        auto [lp, lec] = std::from_chars(lf.data(), lf.data() + lf.size(), s.label);
        if (lec != std::errc{} || lp != lf.data() + lf.size()) throw FormatError(line_no, "bad label '" + lf + "'");
        s.original_extension = fields[2];
        double sum = 0.0;
        for (std::size_t b = 0; b < kBins; ++b) {
            const auto& f = fields[3 + b];
            float v = 0.0f;
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || p != f.data() + f.size())
                throw FormatError(line_no, "bad value in column b" + std::to_string(b));
            if (!(v >= 0.0f && v <= 1.0f)) throw FormatError(line_no, "bin b" + std::to_string(b) + " outside [0,1]");
            s.features.bins[b] = v;
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-5) throw FormatError(line_no, "bins sum to " + std::to_string(sum) + ", not 1");
        auto [it, inserted] = label_names.emplace(s.label, s.original_extension);
        if (!inserted && it->second != s.original_extension)
            throw FormatError(line_no, "label " + std::to_string(s.label) + " used for two extensions");
        data.samples.push_back(std::move(s));
    }
    if (line_no == 0) throw FormatError(1, "missing header");

    if (!label_names.empty()) {
        data.classes.names.resize(label_names.rbegin()->first + 1);
        for (const auto& [label, name] : label_names) data.classes.names[label] = name;
    }
    return data;
}

} // namespace bytesort
