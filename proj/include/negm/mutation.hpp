#ifndef NEGM_MUTATION_HPP
#define NEGM_MUTATION_HPP

#include <array>
#include <random>
#include <vector>

#include "negm/genome.hpp"

namespace negm {

enum MutationAction { kAdd = 0, kEdit = 1, kDelete = 2 };

/// Bounds and weights for the add/edit/delete operators. Weights index
/// [action][kind] with kinds ordered (conv, pool, strided, sum, concat).
/// Pool/sum/concat blocks have no editable parameters, so their edit weight
/// defaults to zero.
struct MutationConfig {
    int min_channels = 8;
    int max_channels = 128;
    std::vector<int> kernel_sizes = {3, 5};
    std::vector<int> strides = {2};
    int min_units = 16;
    int max_units = 256;
    int max_body_blocks = 32;
    int aggression = 5;  // mutations per child
    int max_retries = 50;
    int min_random_blocks = 2;
    int max_random_blocks = 8;
    std::array<std::array<double, 5>, 3> weights{{
        {1, 1, 1, 1, 1},  // add
        {1, 0, 1, 0, 0},  // edit
        {1, 1, 1, 1, 1},  // delete
    }};

    static MutationConfig add_only();
    static MutationConfig delete_only();
};

/// One applied mutation; the result always passes validate(). Invalid samples
/// are retried up to config.max_retries, after which MutationExhausted is
/// thrown (the genome cannot be mutated under this config).
Genome mutate_once(const Genome& g, const MutationConfig& cfg, std::mt19937_64& rng);

/// config.aggression sequential mutate_once applications
Genome aggressive_mutate(const Genome& g, const MutationConfig& cfg, std::mt19937_64& rng);

/// Valid random genome with a uniformly drawn number of body blocks in
/// [min_random_blocks, max_random_blocks]; retries internally until valid.
Genome random_genome(const MutationConfig& cfg, std::mt19937_64& rng, Shape3 input_spec,
                     int num_classes);

}  // namespace negm

#endif
