#include "bytesort/persist.hpp"

#include "bytesort/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace fs = std::filesystem;

namespace bytesort {

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'B', 'S', 'R', '1'};
constexpr std::size_t kHashSize = 32;
constexpr std::size_t kMinSize = 4 + 2 + 1 + kHashSize;

class Writer {
public:
    template <class T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void put_f32(double v) { put(static_cast<float>(v)); }
    void put_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    std::vector<std::uint8_t> take() && { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    double get_f32() { return static_cast<double>(get<float>()); }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw CountMismatch("model payload shorter than its declared counts");
    }
    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

template <class T>
T checked_cast(std::size_t v, const char* what) {
    if (v > std::numeric_limits<T>::max()) throw InvalidArgument(std::string(what) + " too large for model format");
    return static_cast<T>(v);
}

void put_classes(Writer& w, const ClassMap& classes) {
    w.put(checked_cast<std::uint16_t>(classes.size(), "class count"));
    for (const auto& n : classes.names) {
        w.put(checked_cast<std::uint16_t>(n.size(), "class name"));
        w.put_bytes(n.data(), n.size());
    }
}

ClassMap get_classes(Reader& r) {
    ClassMap m;
    const auto n = r.get<std::uint16_t>();
    for (std::uint16_t i = 0; i < n; ++i) m.names.push_back(r.get_string(r.get<std::uint16_t>()));
    return m;
}

void put_descriptors(Writer& w, const std::vector<const DenseNet*>& nets) {
    w.put(static_cast<std::uint16_t>(nets.size()));
    std::uint64_t params = 0;
    for (const DenseNet* net : nets) {
        w.put(checked_cast<std::uint16_t>(net->layers().size(), "layer count"));
        for (const auto& l : net->layers()) {
            w.put(checked_cast<std::uint32_t>(l.in_dim(), "layer width"));
            w.put(checked_cast<std::uint32_t>(l.out_dim(), "layer width"));
            w.put(static_cast<std::uint8_t>(l.activation));
            w.put(l.dropout_rate);
        }
        params += net->parameter_count();
    }
    w.put(params);
    for (const DenseNet* net : nets) {
        for (const auto& l : net->layers()) {
            for (double v : l.weights.data) w.put_f32(v);
            for (double v : l.biases) w.put_f32(v);
        }
    }
}

std::vector<DenseNet> get_networks(Reader& r) {
    const auto n_nets = r.get<std::uint16_t>();
    std::vector<std::vector<LayerSpec>> specs(n_nets);
    std::uint64_t expected = 0;
    for (auto& net_specs : specs) {
        const auto n_layers = r.get<std::uint16_t>();
        for (std::uint16_t i = 0; i < n_layers; ++i) {
            LayerSpec s;
            s.in = r.get<std::uint32_t>();
            s.out = r.get<std::uint32_t>();
            const auto act = r.get<std::uint8_t>();
            if (act > static_cast<std::uint8_t>(Activation::softmax))
                throw CountMismatch("unknown activation code " + std::to_string(act));
            s.activation = static_cast<Activation>(act);
            s.dropout_rate = r.get<double>();
            expected += static_cast<std::uint64_t>(s.out) * s.in + s.out;
            net_specs.push_back(s);
        }
    }
    const auto declared = r.get<std::uint64_t>();
    if (declared != expected)
        throw CountMismatch("declared " + std::to_string(declared) + " parameters, layers imply " +
                            std::to_string(expected));
    r.need(static_cast<std::size_t>(declared) * sizeof(float));

    std::vector<DenseNet> nets;
    for (const auto& net_specs : specs) {
        std::vector<DenseLayer> layers;
        for (const auto& s : net_specs) {
            DenseLayer l;
            l.weights = Matrix(s.out, s.in);
            for (double& v : l.weights.data) v = r.get_f32();
            l.biases.resize(s.out);
            for (double& v : l.biases) v = r.get_f32();
            l.activation = s.activation;
            l.dropout_rate = s.dropout_rate;
            layers.push_back(std::move(l));
        }
        try {
            nets.emplace_back(std::move(layers), Mode::inference);
        } catch (const Error& e) {
            throw CountMismatch(std::string("inconsistent layer descriptors: ") + e.what());
        }
    }
    return nets;
}

void put_adam(Writer& w, const AdamState& s) {
    w.put(s.t);
    w.put(s.config.lr);
    w.put(s.config.beta1);
    w.put(s.config.beta2);
    w.put(s.config.epsilon);
    for (const auto& m : s.m)
        for (double v : m) w.put_f32(v);
    for (const auto& v : s.v)
        for (double x : v) w.put_f32(x);
}

AdamState get_adam(Reader& r, std::span<const std::size_t> shapes) {
    AdamConfig cfg;
    const auto t = r.get<std::uint64_t>();
    cfg.lr = r.get<double>();
    cfg.beta1 = r.get<double>();
    cfg.beta2 = r.get<double>();
    cfg.epsilon = r.get<double>();
    AdamState s = AdamState::for_shapes(shapes, cfg);
    s.t = t;
    for (auto& m : s.m)
        for (double& v : m) v = r.get_f32();
    for (auto& v : s.v)
        for (double& x : v) x = r.get_f32();
    return s;
}

std::vector<std::size_t> disc_shapes(const SganModel& m) {
    auto shapes = parameter_shapes(m.trunk);
    const auto head = parameter_shapes(m.disc_head);
    shapes.insert(shapes.end(), head.begin(), head.end());
    return shapes;
}

void check_adam_shapes(const AdamState& s, std::span<const std::size_t> shapes) {
    if (s.m.size() != shapes.size() || s.v.size() != shapes.size())
        throw InvalidArgument("optimizer state does not match model");
    for (std::size_t i = 0; i < shapes.size(); ++i)
        if (s.m[i].size() != shapes[i] || s.v[i].size() != shapes[i])
            throw InvalidArgument("optimizer state does not match model");
}

void round_adam(AdamState& s) {
    for (auto& m : s.m)
        for (double& v : m) v = static_cast<double>(static_cast<float>(v));
    for (auto& v : s.v)
        for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

Prediction one_hot(std::size_t label, std::size_t n_classes) {
    Prediction p;
    p.label = label;
    p.probabilities.assign(std::max(n_classes, label + 1), 0.0);
    p.probabilities[label] = 1.0;
    return p;
}

} // namespace

const char* to_string(ModelKind k) noexcept {
    switch (k) {
    case ModelKind::classifier: return "classifier";
    case ModelKind::sgan_full: return "sgan_full";
    case ModelKind::knn: return "knn";
    case ModelKind::tree: return "tree";
    }
    return "?";
}

SganCheckpoint SganCheckpoint::from(const SganResult& result, const ClassMap& classes) {
    SganCheckpoint c{result.final_model, result.final_optimizers, classes};
    round_to_float(c.model.trunk);
    round_to_float(c.model.disc_head);
    round_to_float(c.model.gen);
    round_adam(c.optimizers.disc);
    round_adam(c.optimizers.cls);
    round_adam(c.optimizers.gen);
    return c;
}

ModelKind kind_of(const Model& m) noexcept { return static_cast<ModelKind>(m.index()); }

const ClassMap& classes_of(const Model& m) noexcept {
    return std::visit([](const auto& x) -> const ClassMap& { return x.classes; }, m);
}

Prediction predict(const Model& m, const Histogram& h) {
    struct Visitor {
        const Histogram& h;
        Prediction operator()(const Classifier& c) const { return classify(c, h); }
        Prediction operator()(const SganCheckpoint& c) const { return classify(Classifier{c.model.trunk, c.classes}, h); }
        Prediction operator()(const KnnClassifier& c) const { return one_hot(c.model.predict(h), c.classes.size()); }
        Prediction operator()(const TreeClassifier& c) const { return one_hot(tree_predict(c.tree, h), c.classes.size()); }
    };
    return std::visit(Visitor{h}, m);
}

std::vector<std::uint8_t> encode_model(const Model& m) {
    Writer w;
    w.put_bytes(kMagic, sizeof kMagic);
    w.put(kModelFormatVersion);
    w.put(static_cast<std::uint8_t>(kind_of(m)));
    put_classes(w, classes_of(m));

    switch (kind_of(m)) {
    case ModelKind::classifier:
        put_descriptors(w, {&std::get<Classifier>(m).net});
        break;
    case ModelKind::sgan_full: {
        const auto& c = std::get<SganCheckpoint>(m);
        check_adam_shapes(c.optimizers.disc, disc_shapes(c.model));
        check_adam_shapes(c.optimizers.cls, parameter_shapes(c.model.trunk));
        check_adam_shapes(c.optimizers.gen, parameter_shapes(c.model.gen));
        put_descriptors(w, {&c.model.trunk, &c.model.disc_head, &c.model.gen});
        put_adam(w, c.optimizers.disc);
        put_adam(w, c.optimizers.cls);
        put_adam(w, c.optimizers.gen);
        break;
    }
    case ModelKind::knn: {
        const auto& k = std::get<KnnClassifier>(m).model;
        put_descriptors(w, {});
        w.put(static_cast<std::uint32_t>(k.k()));
        w.put(static_cast<std::uint64_t>(k.points().size()));
        for (std::size_t i = 0; i < k.points().size(); ++i) {
            w.put(checked_cast<std::uint16_t>(k.labels()[i], "label"));
            for (double v : k.points()[i].bins) w.put(v);
        }
        break;
    }
    case ModelKind::tree: {
        const auto& t = std::get<TreeClassifier>(m).tree;
        put_descriptors(w, {});
        w.put(checked_cast<std::uint32_t>(t.n_classes, "class count"));
        w.put(checked_cast<std::uint32_t>(t.nodes.size(), "node count"));
        for (const auto& n : t.nodes) {
            w.put(n.feature);
            w.put(n.threshold);
            w.put(n.left);
            w.put(n.right);
            w.put(checked_cast<std::uint16_t>(n.label, "label"));
            if (n.class_counts.size() != t.n_classes) throw InvalidArgument("tree node class counts do not match");
            for (std::size_t c : n.class_counts) w.put(checked_cast<std::uint32_t>(c, "class count"));
        }
        break;
    }
    }

    auto bytes = std::move(w).take();
    const auto digest = sha256(bytes);
    bytes.insert(bytes.end(), digest.begin(), digest.end());
    return bytes;
}

Model decode_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw BadMagic("not a model file (bad magic)");
    if (bytes.size() < kMinSize) throw HashMismatch("model file truncated");
    std::uint16_t version = 0;
    std::memcpy(&version, bytes.data() + 4, sizeof version);
    if (version != kModelFormatVersion)
        throw VersionUnsupported("model format version " + std::to_string(version) + " is not supported");

    const auto payload = bytes.first(bytes.size() - kHashSize);
    const auto digest = sha256(payload);
    if (std::memcmp(digest.data(), bytes.data() + payload.size(), kHashSize) != 0)
        throw HashMismatch("model file integrity hash does not match");

    Reader r(payload);
    r.get_string(4);
    r.get<std::uint16_t>();
    const auto kind = r.get<std::uint8_t>();
    ClassMap classes = get_classes(r);
    std::vector<DenseNet> nets = get_networks(r);

    auto expect_nets = [&](std::size_t n) {
        if (nets.size() != n) throw CountMismatch("unexpected network count for model kind");
    };

    Model out;
    switch (kind) {
    case static_cast<std::uint8_t>(ModelKind::classifier):
        expect_nets(1);
        out = Classifier{std::move(nets[0]), std::move(classes)};
        break;
    case static_cast<std::uint8_t>(ModelKind::sgan_full): {
        expect_nets(3);
        SganCheckpoint c;
        c.model.trunk = std::move(nets[0]);
        c.model.disc_head = std::move(nets[1]);
        c.model.gen = std::move(nets[2]);
        c.model.trunk.set_mode(Mode::training);
        c.model.disc_head.set_mode(Mode::training);
        c.model.gen.set_mode(Mode::training);
        c.optimizers.disc = get_adam(r, disc_shapes(c.model));
        c.optimizers.cls = get_adam(r, parameter_shapes(c.model.trunk));
        c.optimizers.gen = get_adam(r, parameter_shapes(c.model.gen));
        c.classes = std::move(classes);
        out = std::move(c);
        break;
    }
    case static_cast<std::uint8_t>(ModelKind::knn): {
        expect_nets(0);
        const auto k = r.get<std::uint32_t>();
        const auto n = r.get<std::uint64_t>();
        r.need(static_cast<std::size_t>(n) * (sizeof(std::uint16_t) + kBins * sizeof(double)));
        std::vector<Histogram> points(static_cast<std::size_t>(n));
        std::vector<std::size_t> labels(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < points.size(); ++i) {
            labels[i] = r.get<std::uint16_t>();
            for (double& v : points[i].bins) v = r.get<double>();
        }
        try {
            out = KnnClassifier{KnnModel(std::move(points), std::move(labels), k), std::move(classes)};
        } catch (const InvalidArgument& e) {
            throw CountMismatch(e.what());
        }
        break;
    }
    case static_cast<std::uint8_t>(ModelKind::tree): {
        expect_nets(0);
        TreeClassifier t;
        t.tree.n_classes = r.get<std::uint32_t>();
        const auto n_nodes = r.get<std::uint32_t>();
        r.need(static_cast<std::size_t>(n_nodes) * (4 + 8 + 4 + 4 + 2 + 4 * t.tree.n_classes));
        t.tree.nodes.resize(n_nodes);
        for (auto& node : t.tree.nodes) {
            node.feature = r.get<std::int32_t>();
            node.threshold = r.get<double>();
            node.left = r.get<std::uint32_t>();
            node.right = r.get<std::uint32_t>();
            node.label = r.get<std::uint16_t>();
            node.class_counts.resize(t.tree.n_classes);
            for (auto& c : node.class_counts) c = r.get<std::uint32_t>();
            const bool bad_internal = !node.is_leaf() && (node.feature < 0 || node.feature >= static_cast<std::int32_t>(kBins) ||
                                                           node.left >= n_nodes || node.right >= n_nodes);
            if (bad_internal || (node.is_leaf() && node.feature != TreeNode::kLeaf))
                throw CountMismatch("tree node references out of range");
        }
        if (t.tree.nodes.empty()) throw CountMismatch("tree has no nodes");
        t.classes = std::move(classes);
        out = std::move(t);
        break;
    }
    default:
        throw CountMismatch("unknown model kind " + std::to_string(kind));
    }
    if (!r.done()) throw CountMismatch("trailing bytes after model payload");
    return out;
}

void save_model(const Model& m, const fs::path& path) {
    const auto bytes = encode_model(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Model load_model(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return decode_model(bytes);
}

} // namespace bytesort
