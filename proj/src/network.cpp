#include "negm/network.hpp"

#include <cmath>
#include <random>

#include "negm/errors.hpp"
#include "negm/io.hpp"
#include "negm/ops.hpp"
#include "negm/rng.hpp"

namespace negm {

const Tensor& ParameterSet::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ShapeError("missing parameter tensor: " + name);
    return it->second;
}

Tensor& ParameterSet::at(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ShapeError("missing parameter tensor: " + name);
    return it->second;
}

std::string ParameterSet::content_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [name, t] : tensors) {
        h = io::fnv1a64_str(name, h);
        h = io::fnv1a64(t.data(), static_cast<size_t>(t.size()) * sizeof(double), h);
    }
    return io::hex64(h);
}

namespace {

int64_t flat_features(const Shape3& s) { return static_cast<int64_t>(s.c) * s.h * s.w; }

Shape3 input_shape_of(const Genome& g, const std::map<int, Shape3>& shapes, int id) {
    return id == 0 ? g.input_spec : shapes.at(id);
}

}  // namespace

ParameterSet init_params(const Genome& g, uint64_t seed) {
    ValidationReport r = validate(g);
    if (!r.valid()) throw GenomeError("init_params on invalid genome: " + r.summary());
    auto shapes = infer_shapes(g);

    ParameterSet p;
    std::mt19937_64 rng = derive_rng(seed, kStreamInit);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto he_fill = [&](Tensor& t, int64_t fan_in) {
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (int64_t i = 0; i < t.size(); ++i) t[i] = std_dev * gauss(rng);
    };

    for (int id : topo_order(g)) {
        const BlockSpec& b = *g.find(id);
        const std::string sid = std::to_string(id);
        switch (b.kind) {
            case BlockKind::Conv:
            case BlockKind::StridedConv: {
                const Shape3 in = input_shape_of(g, shapes, b.inputs[0]);
                Tensor k({b.out_channels, in.c, b.kernel_size, b.kernel_size});
                he_fill(k, static_cast<int64_t>(in.c) * b.kernel_size * b.kernel_size);
                p.tensors["k" + sid] = std::move(k);
                p.tensors["b" + sid] = Tensor({b.out_channels});
                break;
            }
            case BlockKind::Dense: {
                const Shape3 in = input_shape_of(g, shapes, b.inputs[0]);
                Tensor w({b.units, static_cast<int>(flat_features(in))});
                he_fill(w, flat_features(in));
                p.tensors["w" + sid] = std::move(w);
                p.tensors["b" + sid] = Tensor({b.units});
                break;
            }
            default: break;  // pool/sum/concat carry no parameters
        }
    }
    return p;
}

void validate_params(const Genome& g, const ParameterSet& p) {
    ValidationReport r = validate(g);
    if (!r.valid()) throw GenomeError("invalid genome: " + r.summary());
    auto shapes = infer_shapes(g);
    size_t expected = 0;
    for (int id : topo_order(g)) {
        const BlockSpec& b = *g.find(id);
        const std::string sid = std::to_string(id);
        const Shape3 in = input_shape_of(g, shapes, b.inputs[0]);
        auto check = [&](const std::string& name, const std::vector<int>& shape) {
            ++expected;
            if (!p.has(name))
                throw ShapeError("block " + sid + ": missing parameter " + name);
            if (p.at(name).shape() != shape)
                throw ShapeError("block " + sid + ": parameter " + name + " has shape " +
                                 p.at(name).shape_str() + ", expected " +
                                 Tensor(shape).shape_str());
        };
        switch (b.kind) {
            case BlockKind::Conv:
            case BlockKind::StridedConv:
                check("k" + sid, {b.out_channels, in.c, b.kernel_size, b.kernel_size});
                check("b" + sid, {b.out_channels});
                break;
            case BlockKind::Dense:
                check("w" + sid, {b.units, static_cast<int>(flat_features(in))});
                check("b" + sid, {b.units});
                break;
            default: break;
        }
    }
    if (p.tensors.size() != expected)
        throw ShapeError("parameter set has " + std::to_string(p.tensors.size()) +
                         " tensors, genome expects " + std::to_string(expected));
}

std::vector<Value> ForwardLeaves::param_values() const {
    std::vector<Value> v;
    v.reserve(params.size());
    for (const auto& [name, val] : params) v.push_back(val);
    return v;
}

Value forward_graph(Tape& tape, const Genome& g, const ParameterSet& p, const Tensor& batch,
                    ForwardLeaves* leaves, bool input_requires_grad, bool params_require_grad) {
    validate_params(g, p);
    if (batch.rank() != 4 || batch.dim(1) != g.input_spec.c || batch.dim(2) != g.input_spec.h ||
        batch.dim(3) != g.input_spec.w)
        throw ShapeError("batch shape " + batch.shape_str() + " does not match genome input (" +
                         std::to_string(g.input_spec.c) + "," + std::to_string(g.input_spec.h) +
                         "," + std::to_string(g.input_spec.w) + ")");
    const int bsz = batch.dim(0);

    Value input = tape.leaf(batch, input_requires_grad);
    std::map<std::string, Value> pvals;
    for (const auto& [name, t] : p.tensors) pvals[name] = tape.leaf(t, params_require_grad);
    if (leaves) {
        leaves->input = input;
        leaves->params = pvals;
    }

    std::map<int, Value> outs;
    outs[0] = input;
    Value logits;
    for (int id : topo_order(g)) {
        const BlockSpec& b = *g.find(id);
        const std::string sid = std::to_string(id);
        Value in = outs.at(b.inputs[0]);
        Value v;
        switch (b.kind) {
            case BlockKind::Conv:
            case BlockKind::StridedConv: {
                const int stride = b.kind == BlockKind::Conv ? 1 : b.stride;
                v = ops::conv2d(in, pvals.at("k" + sid), stride);
                v = ops::add(v, ops::broadcast_axis1(pvals.at("b" + sid), v.shape()));
                v = ops::relu(v);
                break;
            }
            case BlockKind::Pool: v = ops::maxpool2(in); break;
            case BlockKind::Sum: {
                Value rhs = outs.at(b.inputs[1]);
                const int ca = in.shape()[1], cb = rhs.shape()[1];
                const int cm = std::max(ca, cb);
                Value a = ca < cm ? ops::pad_channels(in, 0, cm - ca) : in;
                Value c = cb < cm ? ops::pad_channels(rhs, 0, cm - cb) : rhs;
                v = ops::add(a, c);
                break;
            }
            case BlockKind::Concat: v = ops::concat_channels(in, outs.at(b.inputs[1])); break;
            case BlockKind::Dense: {
                const int64_t feats = in.tensor().size() / bsz;
                Value flat = ops::reshape(in, {bsz, static_cast<int>(feats)});
                v = ops::matmul(flat, ops::transpose2d(pvals.at("w" + sid)));
                v = ops::add(v, ops::broadcast_axis1(pvals.at("b" + sid), v.shape()));
                if (id != g.head_id) v = ops::relu(v);
                break;
            }
        }
        outs[id] = v;
        if (id == g.head_id) logits = v;
    }
    return logits;
}

Tensor evaluate_graph(const Genome& g, const ParameterSet& p, const Tensor& batch) {
    Tape tape;
    Value logits = forward_graph(tape, g, p, batch, nullptr, false, false);
    return logits.tensor();
}

void save_network(const std::string& path, const TrainedNetwork& net) {
    io::BinWriter w(path);
    w.magic("NEGMCKP1");
    std::map<std::string, std::string> meta{
        {"genome", serialize(net.genome)},
        {"config_hash", net.config_hash},
        {"reference_id", net.reference_id},
        {"epochs_completed", std::to_string(net.epochs_completed)},
        {"final_ce", io::format_double(net.final_ce)},
        {"final_gm", io::format_double(net.final_gm)},
    };
    w.meta(meta);
    w.u32(static_cast<uint32_t>(net.params.tensors.size()));
    for (const auto& [name, t] : net.params.tensors) {
        w.str(name);
        w.tensor(t);
    }
    w.close();
}

TrainedNetwork load_network(const std::string& path) {
    io::BinReader r(path);
    r.expect_magic("NEGMCKP1");
    auto meta = r.meta();
    TrainedNetwork net;
    net.genome = deserialize(meta.at("genome"));
    net.config_hash = meta.at("config_hash");
    net.reference_id = meta.at("reference_id");
    net.epochs_completed = std::stoi(meta.at("epochs_completed"));
    net.final_ce = std::stod(meta.at("final_ce"));
    net.final_gm = std::stod(meta.at("final_gm"));
    const uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        std::string name = r.str();
        net.params.tensors[name] = r.tensor();
    }
    validate_params(net.genome, net.params);
    return net;
}

}  // namespace negm
