#ifndef NEGM_DATA_HPP
#define NEGM_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "negm/genome.hpp"
#include "negm/tensor.hpp"

namespace negm {

/// Labeled image set, pixels in [0,1], immutable after load.
struct Dataset {
    Tensor images;  // [N,C,H,W]
    std::vector<int> labels;
    int num_classes = 0;
    std::string split;  // train / validation / test
    std::string id;     // content hash

    int size() const { return images.empty() ? 0 : images.dim(0); }
    Shape3 input_spec() const { return {images.dim(1), images.dim(2), images.dim(3)}; }
    Tensor image(int i) const;  // [C,H,W]
    Tensor batch_images(const std::vector<int>& idx) const;
    std::vector<int> batch_labels(const std::vector<int>& idx) const;
    Dataset subset(const std::vector<int>& idx, const std::string& split_tag) const;
    void check_invariants() const;  // range, counts; throws
    void rehash();
};

/// Big-endian IDX pair (magic 0x803 images / 0x801 labels), bytes scaled 1/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// CIFAR-10 binary batches: 3073-byte records, channel-major pixels.
Dataset load_cifar_binary(const std::vector<std::string>& paths);

struct ReducedSplits {
    Dataset train, validation, test;
};

/// Per-class uniform sampling without replacement into balanced train/test
/// splits; a balanced validation split is carved out of the training portion
/// (validation_fraction of it). Splits are disjoint. Deterministic per seed.
ReducedSplits reduce(const Dataset& source, int per_class_train, int per_class_test,
                     uint64_t seed, double validation_fraction = 0.1);

/// Class-conditional smooth blob prototypes plus additive Gaussian noise;
/// linearly separable at noise 0. Fast stand-in task for tests.
Dataset synth_dataset(int num_classes, int samples_per_class, int image_size, uint64_t seed,
                      double noise = 0.25);

}  // namespace negm

#endif
