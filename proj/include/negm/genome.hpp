#ifndef NEGM_GENOME_HPP
#define NEGM_GENOME_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

namespace negm {

enum class BlockKind { Conv, StridedConv, Pool, Sum, Concat, Dense };

const char* to_string(BlockKind k);

/// One node of the architecture DAG. Input id 0 refers to the genome input.
struct BlockSpec {
    int id = 0;
    BlockKind kind = BlockKind::Conv;
    int out_channels = 0;  // Conv/StridedConv
    int kernel_size = 0;   // Conv/StridedConv
    int stride = 1;        // StridedConv, >= 2
    int units = 0;         // Dense
    std::vector<int> inputs;

    bool operator==(const BlockSpec&) const = default;
};

struct Shape3 {
    int c = 0, h = 0, w = 0;
    bool operator==(const Shape3&) const = default;
};

/// Architecture DAG: single source (the input, id 0), single sink (the head,
/// a Dense block emitting num_classes logits). Immutable by convention after
/// construction; mutation operators return fresh genomes.
struct Genome {
    Shape3 input_spec;
    int num_classes = 0;
    std::vector<BlockSpec> blocks;
    int head_id = 0;

    const BlockSpec* find(int id) const;
    bool structurally_equal(const Genome& o) const;
};

/// counts of (conv, pool, strided conv, sum, concat); dense blocks and the
/// head are not represented
struct Spectrum {
    std::array<int, 5> counts{0, 0, 0, 0, 0};
    bool operator==(const Spectrum&) const = default;
    std::string str() const;
};

struct ValidationIssue {
    int block_id;  // 0 when genome-wide
    std::string message;
};

struct ValidationReport {
    bool acyclic = false;
    bool single_sink = false;
    bool arity_ok = false;
    bool shapes_ok = false;
    std::vector<ValidationIssue> issues;
    bool valid() const { return acyclic && single_sink && arity_ok && shapes_ok; }
    std::string summary() const;
};

ValidationReport validate(const Genome& g);

/// Resolved output shape per block id. Sum takes the max channel count
/// (zero-padding the smaller input), Concat the total; both require equal
/// spatial dims. Dense outputs are (units, 1, 1) and may only feed Dense
/// blocks. Throws GenomeError naming the offending block.
std::map<int, Shape3> infer_shapes(const Genome& g);

/// Block ids in dependency order (parents first). Throws on cycles.
std::vector<int> topo_order(const Genome& g);

/// ids of blocks consuming each block's output (key 0 = the input)
std::map<int, std::vector<int>> consumer_map(const Genome& g);

Spectrum spectrum(const Genome& g);
double spectrum_distance(const Spectrum& a, const Spectrum& b);
double distance(const Genome& a, const Genome& b);

std::string serialize(const Genome& g);
Genome deserialize(const std::string& text);
Genome load_genome_file(const std::string& path);
void save_genome_file(const Genome& g, const std::string& path);

/// input wired straight into the head dense block; the smallest valid genome
Genome empty_genome(Shape3 input_spec, int num_classes);

int max_block_id(const Genome& g);

}  // namespace negm

#endif
