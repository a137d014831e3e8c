#ifndef NEGM_TAPE_HPP
#define NEGM_TAPE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "negm/tensor.hpp"

namespace negm {

class Tape;

/// Lightweight handle to a node on a Tape. Copying is free; the tensor data
/// lives in the tape node.
struct Value {
    Tape* tape = nullptr;
    int32_t id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& tensor() const;
    const std::vector<int>& shape() const;
    bool requires_grad() const;
};

/// Produces adjoint contributions for a node's parents, one Value per parent
/// (invalid Value where the parent needs no gradient). `self` is the node's
/// own output, usable when the derivative is cheaper in terms of the result
/// (exp, sqrt, div). `needs[j]` marks parents that actually require a
/// contribution: only those on a path to a requested gradient, so vjps skip
/// dead work. Vjps are written in terms of the op library, which is what
/// makes gradients differentiable a second time.
using VjpFn = std::function<std::vector<Value>(const Value& gy, const Value& self,
                                               const std::vector<char>& needs)>;

/// Reverse-mode tape. One tape per forward pass; tapes are single-worker
/// objects, independent tapes may live on independent workers.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Value leaf(Tensor t, bool requires_grad = true);
    Value constant(Tensor t) { return leaf(std::move(t), false); }
    Value record(Tensor out, std::vector<Value> parents, VjpFn vjp);

    /// Reverse pass from scalar `loss`; returns one gradient per `wrt` entry,
    /// exact zeros when no path connects it to the loss. When
    /// create_higher_order is set the returned gradients are themselves
    /// differentiable tape nodes; otherwise nodes created by this pass are
    /// marked non-persistent and a later pass through them is an error.
    std::vector<Value> gradients(const Value& loss, const std::vector<Value>& wrt,
                                 bool create_higher_order);

    size_t size() const { return nodes_.size(); }
    const Tensor& tensor_of(int32_t id) const { return nodes_[static_cast<size_t>(id)].value; }
    bool requires_grad_of(int32_t id) const {
        return nodes_[static_cast<size_t>(id)].requires_grad;
    }
    bool persistent_of(int32_t id) const { return nodes_[static_cast<size_t>(id)].persistent; }

private:
    struct Node {
        Tensor value;
        std::vector<int32_t> parents;
        VjpFn vjp;  // empty for leaves and constants
        bool requires_grad = false;
        bool persistent = true;
    };
    std::vector<Node> nodes_;
};

}  // namespace negm

#endif
