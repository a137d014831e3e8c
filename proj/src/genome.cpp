#include "negm/genome.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "negm/errors.hpp"

namespace negm {

const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::Conv: return "conv";
        case BlockKind::StridedConv: return "strided";
        case BlockKind::Pool: return "pool";
        case BlockKind::Sum: return "sum";
        case BlockKind::Concat: return "concat";
        case BlockKind::Dense: return "dense";
    }
    return "?";
}

const BlockSpec* Genome::find(int id) const {
    for (const BlockSpec& b : blocks)
        if (b.id == id) return &b;
    return nullptr;
}

bool Genome::structurally_equal(const Genome& o) const {
    if (!(input_spec == o.input_spec) || num_classes != o.num_classes || head_id != o.head_id ||
        blocks.size() != o.blocks.size())
        return false;
    auto sorted = [](const Genome& g) {
        std::vector<BlockSpec> v = g.blocks;
        std::sort(v.begin(), v.end(), [](const BlockSpec& a, const BlockSpec& b) { return a.id < b.id; });
        return v;
    };
    return sorted(*this) == sorted(o);
}

std::string Spectrum::str() const {
    std::ostringstream os;
    os << '(' << counts[0] << ',' << counts[1] << ',' << counts[2] << ',' << counts[3] << ','
       << counts[4] << ')';
    return os.str();
}

std::string ValidationReport::summary() const {
    if (valid()) return "valid";
    std::ostringstream os;
    for (const auto& i : issues) {
        if (i.block_id) os << "block " << i.block_id << ": ";
        os << i.message << "; ";
    }
    return os.str();
}

std::map<int, std::vector<int>> consumer_map(const Genome& g) {
    std::map<int, std::vector<int>> out;
    out[0] = {};
    for (const BlockSpec& b : g.blocks) out[b.id] = {};
    for (const BlockSpec& b : g.blocks)
        for (int in : b.inputs) out[in].push_back(b.id);
    return out;
}

std::vector<int> topo_order(const Genome& g) {
    std::map<int, int> pending;  // unresolved input count per block
    std::map<int, std::vector<int>> consumers;
    for (const BlockSpec& b : g.blocks) {
        int n = 0;
        for (int in : b.inputs)
            if (in != 0) ++n;
        pending[b.id] = n;
        for (int in : b.inputs)
            if (in != 0) consumers[in].push_back(b.id);
    }
    std::vector<int> ready, order;
    for (auto& [id, n] : pending)
        if (n == 0) ready.push_back(id);
    while (!ready.empty()) {
        int id = ready.back();
        ready.pop_back();
        order.push_back(id);
        for (int c : consumers[id])
            if (--pending[c] == 0) ready.push_back(c);
    }
    if (order.size() != g.blocks.size()) throw GenomeError("genome contains a cycle");
    return order;
}

namespace {

// shape rules; throws GenomeError mentioning the block id
Shape3 block_output_shape(const Genome& g, const BlockSpec& b,
                          const std::map<int, Shape3>& resolved,
                          const std::set<int>& dense_outputs) {
    auto input_shape = [&](int id) -> Shape3 {
        if (id == 0) return g.input_spec;
        auto it = resolved.find(id);
        if (it == resolved.end())
            throw GenomeError("block " + std::to_string(b.id) + ": unresolved input " +
                              std::to_string(id));
        return it->second;
    };
    auto err = [&](const std::string& m) {
        return GenomeError("block " + std::to_string(b.id) + " (" + to_string(b.kind) + "): " + m);
    };
    auto require_spatial = [&](int id) {
        if (id != 0 && dense_outputs.count(id))
            throw err("dense outputs may only feed dense blocks");
    };

    switch (b.kind) {
        case BlockKind::Conv: {
            require_spatial(b.inputs[0]);
            Shape3 in = input_shape(b.inputs[0]);
            if (b.out_channels < 1) throw err("out_channels must be positive");
            if (b.kernel_size < 1 || b.kernel_size % 2 == 0)
                throw err("same-padded conv requires odd positive kernel size");
            return {b.out_channels, in.h, in.w};
        }
        case BlockKind::StridedConv: {
            require_spatial(b.inputs[0]);
            Shape3 in = input_shape(b.inputs[0]);
            if (b.out_channels < 1) throw err("out_channels must be positive");
            if (b.kernel_size < 1) throw err("kernel size must be positive");
            if (b.stride < 2) throw err("strided conv requires stride >= 2");
            if (in.h < b.kernel_size || in.w < b.kernel_size)
                throw err("input " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                          " smaller than kernel");
            return {b.out_channels, (in.h - b.kernel_size) / b.stride + 1,
                    (in.w - b.kernel_size) / b.stride + 1};
        }
        case BlockKind::Pool: {
            require_spatial(b.inputs[0]);
            Shape3 in = input_shape(b.inputs[0]);
            if (in.h < 2 || in.w < 2) throw err("pooling needs spatial dims >= 2");
            return {in.c, in.h / 2, in.w / 2};
        }
        case BlockKind::Sum:
        case BlockKind::Concat: {
            require_spatial(b.inputs[0]);
            require_spatial(b.inputs[1]);
            Shape3 a = input_shape(b.inputs[0]);
            Shape3 c = input_shape(b.inputs[1]);
            if (a.h != c.h || a.w != c.w)
                throw err("spatial mismatch " + std::to_string(a.h) + "x" + std::to_string(a.w) +
                          " vs " + std::to_string(c.h) + "x" + std::to_string(c.w));
            if (b.kind == BlockKind::Sum) return {std::max(a.c, c.c), a.h, a.w};
            return {a.c + c.c, a.h, a.w};
        }
        case BlockKind::Dense: {
            Shape3 in = input_shape(b.inputs[0]);
            if (b.units < 1) throw err("units must be positive");
            (void)in;
            return {b.units, 1, 1};
        }
    }
    throw err("unknown block kind");
}

}  // namespace

std::map<int, Shape3> infer_shapes(const Genome& g) {
    std::map<int, Shape3> resolved;
    std::set<int> dense_outputs;
    if (g.input_spec.c < 1 || g.input_spec.h < 1 || g.input_spec.w < 1)
        throw GenomeError("input spec dimensions must be positive");
    for (int id : topo_order(g)) {
        const BlockSpec& b = *g.find(id);
        Shape3 s = block_output_shape(g, b, resolved, dense_outputs);
        if (s.c < 1 || s.h < 1 || s.w < 1)
            throw GenomeError("block " + std::to_string(id) + ": output shape collapsed to zero");
        resolved[id] = s;
        if (b.kind == BlockKind::Dense) dense_outputs.insert(id);
    }
    return resolved;
}

ValidationReport validate(const Genome& g) {
    ValidationReport r;

    // ids and arity
    r.arity_ok = true;
    std::set<int> ids;
    for (const BlockSpec& b : g.blocks) {
        if (b.id <= 0) {
            r.arity_ok = false;
            r.issues.push_back({b.id, "block ids must be positive"});
        }
        if (!ids.insert(b.id).second) {
            r.arity_ok = false;
            r.issues.push_back({b.id, "duplicate block id"});
        }
    }
    for (const BlockSpec& b : g.blocks) {
        const size_t want = (b.kind == BlockKind::Sum || b.kind == BlockKind::Concat) ? 2 : 1;
        if (b.inputs.size() != want) {
            r.arity_ok = false;
            r.issues.push_back({b.id, "expected " + std::to_string(want) + " inputs, has " +
                                          std::to_string(b.inputs.size())});
            continue;
        }
        if (want == 2 && b.inputs[0] == b.inputs[1]) {
            r.arity_ok = false;
            r.issues.push_back({b.id, "sum/concat inputs must be distinct"});
        }
        for (int in : b.inputs)
            if (in != 0 && !ids.count(in)) {
                r.arity_ok = false;
                r.issues.push_back({b.id, "references unknown block " + std::to_string(in)});
            }
    }
    if (!r.arity_ok) return r;

    // acyclicity
    try {
        topo_order(g);
        r.acyclic = true;
    } catch (const GenomeError& e) {
        r.issues.push_back({0, e.what()});
        return r;
    }

    // single sink == head, a dense block with num_classes units
    auto consumers = consumer_map(g);
    std::vector<int> sinks;
    for (const BlockSpec& b : g.blocks)
        if (consumers[b.id].empty()) sinks.push_back(b.id);
    if (sinks.size() == 1 && sinks[0] == g.head_id) {
        const BlockSpec* head = g.find(g.head_id);
        if (head && head->kind == BlockKind::Dense && head->units == g.num_classes)
            r.single_sink = true;
        else
            r.issues.push_back({g.head_id, "head must be a dense block with num_classes units"});
    } else {
        std::ostringstream os;
        os << sinks.size() << " sinks found";
        r.issues.push_back({0, os.str()});
    }
    if (!r.single_sink) return r;

    // shape inference
    try {
        infer_shapes(g);
        r.shapes_ok = true;
    } catch (const GenomeError& e) {
        r.issues.push_back({0, e.what()});
    }
    return r;
}

Spectrum spectrum(const Genome& g) {
    Spectrum s;
    for (const BlockSpec& b : g.blocks) {
        switch (b.kind) {
            case BlockKind::Conv: s.counts[0]++; break;
            case BlockKind::Pool: s.counts[1]++; break;
            case BlockKind::StridedConv: s.counts[2]++; break;
            case BlockKind::Sum: s.counts[3]++; break;
            case BlockKind::Concat: s.counts[4]++; break;
            case BlockKind::Dense: break;
        }
    }
    return s;
}

double spectrum_distance(const Spectrum& a, const Spectrum& b) {
    int64_t q = 0;
    for (int i = 0; i < 5; ++i) {
        const int64_t d = a.counts[i] - b.counts[i];
        q += d * d;
    }
    return std::sqrt(static_cast<double>(q));
}

double distance(const Genome& a, const Genome& b) {
    return spectrum_distance(spectrum(a), spectrum(b));
}

std::string serialize(const Genome& g) {
    std::ostringstream os;
    os << "negm-genome v1\n";
    os << "input " << g.input_spec.c << ' ' << g.input_spec.h << ' ' << g.input_spec.w << '\n';
    os << "classes " << g.num_classes << '\n';
    for (int id : topo_order(g)) {
        const BlockSpec& b = *g.find(id);
        if (b.id == g.head_id) {
            os << "head " << b.id << ' ' << b.inputs[0] << '\n';
            continue;
        }
        os << "block " << b.id << ' ' << to_string(b.kind);
        switch (b.kind) {
            case BlockKind::Conv:
                os << ' ' << b.out_channels << ' ' << b.kernel_size << ' ' << b.inputs[0];
                break;
            case BlockKind::StridedConv:
                os << ' ' << b.out_channels << ' ' << b.kernel_size << ' ' << b.stride << ' '
                   << b.inputs[0];
                break;
            case BlockKind::Pool: os << ' ' << b.inputs[0]; break;
            case BlockKind::Sum:
            case BlockKind::Concat: os << ' ' << b.inputs[0] << ' ' << b.inputs[1]; break;
            case BlockKind::Dense: os << ' ' << b.units << ' ' << b.inputs[0]; break;
        }
        os << '\n';
    }
    return os.str();
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw GenomeError("genome parse error, line " + std::to_string(line) + ": " + msg);
}

int parse_int(std::istringstream& is, int line, const char* field) {
    int v;
    if (!(is >> v)) parse_fail(line, std::string("missing or bad field '") + field + "'");
    return v;
}

}  // namespace

Genome deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Genome g;
    bool got_header = false, got_input = false, got_classes = false, got_head = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string tok;
        is >> tok;
        if (!got_header) {
            std::string ver;
            is >> ver;
            if (tok != "negm-genome" || ver != "v1")
                parse_fail(lineno, "expected header 'negm-genome v1'");
            got_header = true;
            continue;
        }
        if (tok == "input") {
            g.input_spec.c = parse_int(is, lineno, "channels");
            g.input_spec.h = parse_int(is, lineno, "height");
            g.input_spec.w = parse_int(is, lineno, "width");
            got_input = true;
        } else if (tok == "classes") {
            g.num_classes = parse_int(is, lineno, "classes");
            got_classes = true;
        } else if (tok == "block") {
            BlockSpec b;
            b.id = parse_int(is, lineno, "id");
            std::string kind;
            if (!(is >> kind)) parse_fail(lineno, "missing block kind");
            if (kind == "conv") {
                b.kind = BlockKind::Conv;
                b.out_channels = parse_int(is, lineno, "out_channels");
                b.kernel_size = parse_int(is, lineno, "kernel_size");
                b.inputs = {parse_int(is, lineno, "input")};
            } else if (kind == "strided") {
                b.kind = BlockKind::StridedConv;
                b.out_channels = parse_int(is, lineno, "out_channels");
                b.kernel_size = parse_int(is, lineno, "kernel_size");
                b.stride = parse_int(is, lineno, "stride");
                b.inputs = {parse_int(is, lineno, "input")};
            } else if (kind == "pool") {
                b.kind = BlockKind::Pool;
                b.inputs = {parse_int(is, lineno, "input")};
            } else if (kind == "sum" || kind == "concat") {
                b.kind = kind == "sum" ? BlockKind::Sum : BlockKind::Concat;
                int a = parse_int(is, lineno, "input1");
                int c = parse_int(is, lineno, "input2");
                b.inputs = {a, c};
            } else if (kind == "dense") {
                b.kind = BlockKind::Dense;
                b.units = parse_int(is, lineno, "units");
                b.inputs = {parse_int(is, lineno, "input")};
            } else {
                parse_fail(lineno, "unknown block kind '" + kind + "'");
            }
            g.blocks.push_back(b);
        } else if (tok == "head") {
            if (!got_classes) parse_fail(lineno, "head before classes line");
            BlockSpec b;
            b.id = parse_int(is, lineno, "id");
            b.kind = BlockKind::Dense;
            b.units = g.num_classes;
            b.inputs = {parse_int(is, lineno, "input")};
            g.blocks.push_back(b);
            g.head_id = b.id;
            got_head = true;
        } else {
            parse_fail(lineno, "unknown directive '" + tok + "'");
        }
    }
    if (!got_header) parse_fail(lineno, "empty document");
    if (!got_input || !got_classes || !got_head)
        parse_fail(lineno, "truncated genome: missing input/classes/head");
    return g;
}

Genome load_genome_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw GenomeError("cannot open genome file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return deserialize(buf.str());
}

void save_genome_file(const Genome& g, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw GenomeError("cannot write genome file: " + path);
    f << serialize(g);
}

Genome empty_genome(Shape3 input_spec, int num_classes) {
    Genome g;
    g.input_spec = input_spec;
    g.num_classes = num_classes;
    BlockSpec head;
    head.id = 1;
    head.kind = BlockKind::Dense;
    head.units = num_classes;
    head.inputs = {0};
    g.blocks.push_back(head);
    g.head_id = 1;
    return g;
}

int max_block_id(const Genome& g) {
    int m = 0;
    for (const BlockSpec& b : g.blocks) m = std::max(m, b.id);
    return m;
}

}  // namespace negm
