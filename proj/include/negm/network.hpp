#ifndef NEGM_NETWORK_HPP
#define NEGM_NETWORK_HPP

#include <map>
#include <string>

#include "negm/genome.hpp"
#include "negm/tape.hpp"
#include "negm/tensor.hpp"

namespace negm {

/// Learned tensors keyed by block: "k<id>"/"b<id>" for convolutions,
/// "w<id>"/"b<id>" for dense blocks.
struct ParameterSet {
    std::map<std::string, Tensor> tensors;

    const Tensor& at(const std::string& name) const;
    Tensor& at(const std::string& name);
    bool has(const std::string& name) const { return tensors.count(name) > 0; }
    std::string content_hash() const;
};

/// He fan-in initialization for kernels/weights, zero biases; deterministic
/// per seed.
ParameterSet init_params(const Genome& g, uint64_t seed);

/// Shape-checks every parameter against the genome; throws ShapeError naming
/// the offending block, or GenomeError if the genome itself is invalid.
void validate_params(const Genome& g, const ParameterSet& p);

/// Handles to the leaves of one recorded forward pass.
struct ForwardLeaves {
    Value input;
    std::map<std::string, Value> params;
    std::vector<Value> param_values() const;
};

/// Records the genome's forward pass on `tape`; returns the logits value.
/// ReLU follows every conv/strided/dense block except the head.
Value forward_graph(Tape& tape, const Genome& g, const ParameterSet& p, const Tensor& batch,
                    ForwardLeaves* leaves, bool input_requires_grad, bool params_require_grad);

/// Plain forward pass: logits [batch, classes].
Tensor evaluate_graph(const Genome& g, const ParameterSet& p, const Tensor& batch);

/// A genome bound to learned parameters plus training provenance.
struct TrainedNetwork {
    Genome genome;
    ParameterSet params;
    std::string config_hash;
    std::string reference_id;  // empty when trained without a reference
    int epochs_completed = 0;
    double final_ce = 0.0;
    double final_gm = 0.0;

    std::string id() const { return params.content_hash(); }
};

// checkpoint container (see docs/formats.md); genome text is embedded
void save_network(const std::string& path, const TrainedNetwork& net);
TrainedNetwork load_network(const std::string& path);

}  // namespace negm

#endif
