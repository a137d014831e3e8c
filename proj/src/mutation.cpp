#include "negm/mutation.hpp"

#include <algorithm>
#include <set>

#include "negm/errors.hpp"

namespace negm {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
T pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1))];
}

constexpr std::array<BlockKind, 5> kKindOrder = {BlockKind::Conv, BlockKind::Pool,
                                                 BlockKind::StridedConv, BlockKind::Sum,
                                                 BlockKind::Concat};

struct Edge {
    int to_block;
    int slot;
};

std::vector<Edge> all_edges(const Genome& g) {
    std::vector<Edge> e;
    for (const BlockSpec& b : g.blocks)
        for (int s = 0; s < static_cast<int>(b.inputs.size()); ++s) e.push_back({b.id, s});
    return e;
}

// ids reachable downstream from `from`, inclusive
std::set<int> descendants(const Genome& g, int from) {
    auto consumers = consumer_map(g);
    std::set<int> seen;
    std::vector<int> stack{from};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        for (int c : consumers[id]) stack.push_back(c);
    }
    return seen;
}

int body_block_count(const Genome& g) {
    int n = 0;
    for (const BlockSpec& b : g.blocks)
        if (b.kind != BlockKind::Dense) ++n;
    return n;
}

bool try_add(Genome& g, BlockKind kind, const MutationConfig& cfg, std::mt19937_64& rng) {
    if (kind != BlockKind::Dense && body_block_count(g) >= cfg.max_body_blocks) return false;
    std::vector<Edge> edges = all_edges(g);
    Edge e = pick(rng, edges);
    BlockSpec* target = const_cast<BlockSpec*>(g.find(e.to_block));
    const int upstream = target->inputs[static_cast<size_t>(e.slot)];

    BlockSpec nb;
    nb.id = max_block_id(g) + 1;
    nb.kind = kind;
    switch (kind) {
        case BlockKind::Conv:
            nb.out_channels = uniform_int(rng, cfg.min_channels, cfg.max_channels);
            nb.kernel_size = pick(rng, cfg.kernel_sizes);
            nb.inputs = {upstream};
            break;
        case BlockKind::StridedConv:
            nb.out_channels = uniform_int(rng, cfg.min_channels, cfg.max_channels);
            nb.kernel_size = pick(rng, cfg.kernel_sizes);
            nb.stride = pick(rng, cfg.strides);
            nb.inputs = {upstream};
            break;
        case BlockKind::Pool: nb.inputs = {upstream}; break;
        case BlockKind::Sum:
        case BlockKind::Concat: {
            // second input: any node that is not downstream of the insertion
            // point (would close a cycle) and not the first input
            std::set<int> below = descendants(g, e.to_block);
            std::vector<int> candidates;
            if (upstream != 0 && !below.count(0)) candidates.push_back(0);
            for (const BlockSpec& b : g.blocks)
                if (b.id != upstream && !below.count(b.id)) candidates.push_back(b.id);
            if (candidates.empty()) return false;
            nb.inputs = {upstream, pick(rng, candidates)};
            break;
        }
        case BlockKind::Dense: return false;  // dense blocks are not mutated
    }
    target->inputs[static_cast<size_t>(e.slot)] = nb.id;
    g.blocks.push_back(nb);
    return true;
}

bool try_edit(Genome& g, BlockKind kind, const MutationConfig& cfg, std::mt19937_64& rng) {
    std::vector<int> ids;
    for (const BlockSpec& b : g.blocks)
        if (b.kind == kind) ids.push_back(b.id);
    if (ids.empty()) return false;
    BlockSpec* b = const_cast<BlockSpec*>(g.find(pick(rng, ids)));

    auto resample_excluding = [&](int current, int lo, int hi) -> int {
        if (lo == hi) return current;  // no alternative
        int v;
        do {
            v = uniform_int(rng, lo, hi);
        } while (v == current);
        return v;
    };
    auto resample_from = [&](int current, const std::vector<int>& opts) -> int {
        std::vector<int> alt;
        for (int o : opts)
            if (o != current) alt.push_back(o);
        if (alt.empty()) return current;
        return pick(rng, alt);
    };

    switch (kind) {
        case BlockKind::Conv: {
            if (uniform_int(rng, 0, 1) == 0) {
                int v = resample_excluding(b->out_channels, cfg.min_channels, cfg.max_channels);
                if (v == b->out_channels) return false;
                b->out_channels = v;
            } else {
                int v = resample_from(b->kernel_size, cfg.kernel_sizes);
                if (v == b->kernel_size) return false;
                b->kernel_size = v;
            }
            return true;
        }
        case BlockKind::StridedConv: {
            int which = uniform_int(rng, 0, 2);
            if (which == 0) {
                int v = resample_excluding(b->out_channels, cfg.min_channels, cfg.max_channels);
                if (v == b->out_channels) return false;
                b->out_channels = v;
            } else if (which == 1) {
                int v = resample_from(b->kernel_size, cfg.kernel_sizes);
                if (v == b->kernel_size) return false;
                b->kernel_size = v;
            } else {
                int v = resample_from(b->stride, cfg.strides);
                if (v == b->stride) return false;
                b->stride = v;
            }
            return true;
        }
        default: return false;  // no editable parameters
    }
}

bool try_delete(Genome& g, BlockKind kind, std::mt19937_64& rng) {
    std::vector<int> ids;
    for (const BlockSpec& b : g.blocks)
        if (b.kind == kind && b.id != g.head_id) ids.push_back(b.id);
    if (ids.empty()) return false;
    const int victim = pick(rng, ids);
    const int replacement = g.find(victim)->inputs[0];
    for (BlockSpec& b : g.blocks)
        for (int& in : b.inputs)
            if (in == victim) in = replacement;
    std::erase_if(g.blocks, [victim](const BlockSpec& b) { return b.id == victim; });
    return true;
}

}  // namespace

MutationConfig MutationConfig::add_only() {
    MutationConfig c;
    c.weights = {{{1, 1, 1, 1, 1}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}};
    return c;
}

MutationConfig MutationConfig::delete_only() {
    MutationConfig c;
    c.weights = {{{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}}};
    return c;
}

Genome mutate_once(const Genome& g, const MutationConfig& cfg, std::mt19937_64& rng) {
    std::vector<double> flat;
    flat.reserve(15);
    double total = 0.0;
    for (const auto& row : cfg.weights)
        for (double w : row) {
            if (w < 0.0) throw std::invalid_argument("mutation weights must be nonnegative");
            flat.push_back(w);
            total += w;
        }
    if (total <= 0.0) throw std::invalid_argument("at least one mutation weight must be positive");
    std::discrete_distribution<int> dist(flat.begin(), flat.end());

    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        const int cell = dist(rng);
        const auto action = static_cast<MutationAction>(cell / 5);
        const BlockKind kind = kKindOrder[static_cast<size_t>(cell % 5)];

        Genome candidate = g;
        bool applied = false;
        switch (action) {
            case kAdd: applied = try_add(candidate, kind, cfg, rng); break;
            case kEdit: applied = try_edit(candidate, kind, cfg, rng); break;
            case kDelete: applied = try_delete(candidate, kind, rng); break;
        }
        if (!applied) continue;
        if (validate(candidate).valid()) return candidate;
    }
    throw MutationExhausted("no valid mutation found after " + std::to_string(cfg.max_retries) +
                            " attempts");
}

Genome aggressive_mutate(const Genome& g, const MutationConfig& cfg, std::mt19937_64& rng) {
    if (cfg.aggression < 1) throw std::invalid_argument("aggression must be >= 1");
    Genome out = g;
    for (int i = 0; i < cfg.aggression; ++i) out = mutate_once(out, cfg, rng);
    return out;
}

Genome random_genome(const MutationConfig& cfg, std::mt19937_64& rng, Shape3 input_spec,
                     int num_classes) {
    MutationConfig grow = cfg;
    grow.weights = MutationConfig::add_only().weights;
    for (;;) {
        Genome g = empty_genome(input_spec, num_classes);
        const int target = uniform_int(rng, cfg.min_random_blocks, cfg.max_random_blocks);
        try {
            for (int i = 0; i < target; ++i) g = mutate_once(g, grow, rng);
        } catch (const MutationExhausted&) {
            continue;  // pathological draw; start over
        }
        if (validate(g).valid()) return g;
    }
}

}  // namespace negm
