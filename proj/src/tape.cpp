#include "negm/tape.hpp"

#include <stdexcept>

#include "negm/errors.hpp"
#include "negm/ops.hpp"

namespace negm {

const Tensor& Value::tensor() const {
    if (!valid()) throw std::logic_error("tensor() on invalid Value");
    return tape->tensor_of(id);
}

const std::vector<int>& Value::shape() const { return tensor().shape(); }

bool Value::requires_grad() const { return valid() && tape->requires_grad_of(id); }

Value Tape::leaf(Tensor t, bool requires_grad) {
    Node n;
    n.value = std::move(t);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Value Tape::record(Tensor out, std::vector<Value> parents, VjpFn vjp) {
    Node n;
    n.value = std::move(out);
    n.parents.reserve(parents.size());
    for (const Value& p : parents) {
        if (p.tape != this) throw std::logic_error("record: parent from a different tape");
        n.parents.push_back(p.id);
        if (p.requires_grad()) n.requires_grad = true;
    }
    n.vjp = std::move(vjp);
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<int32_t>(nodes_.size() - 1)};
}

std::vector<Value> Tape::gradients(const Value& loss, const std::vector<Value>& wrt,
                                   bool create_higher_order) {
    if (loss.tape != this || loss.id < 0 || loss.id >= static_cast<int32_t>(nodes_.size()))
        throw std::invalid_argument("gradients: loss not on this tape");
    if (loss.tensor().size() != 1) throw ShapeError("gradients: loss must be scalar");
    for (const Value& v : wrt) {
        if (v.tape != this || v.id < 0 || v.id >= static_cast<int32_t>(nodes_.size()))
            throw std::invalid_argument("gradients: wrt tensor not on tape");
    }

    const size_t first_backward_node = nodes_.size();
    std::vector<Value> adj(nodes_.size());

    // a node is useful when a requested gradient is among its transitive
    // parents; adjoints elsewhere would be dead work
    std::vector<char> useful(nodes_.size(), 0);
    for (const Value& v : wrt) useful[static_cast<size_t>(v.id)] = 1;
    for (size_t i = 0; i <= static_cast<size_t>(loss.id); ++i) {
        if (useful[i]) continue;
        for (int32_t p : nodes_[i].parents)
            if (useful[static_cast<size_t>(p)]) {
                useful[i] = 1;
                break;
            }
    }

    if (nodes_[static_cast<size_t>(loss.id)].requires_grad &&
        useful[static_cast<size_t>(loss.id)]) {
        adj[static_cast<size_t>(loss.id)] = constant(Tensor::scalar(1.0));
        for (int32_t i = loss.id; i >= 0; --i) {
            const Value gy = adj[static_cast<size_t>(i)];
            if (!gy.valid()) continue;
            if (!nodes_[static_cast<size_t>(i)].vjp) continue;
            if (!nodes_[static_cast<size_t>(i)].persistent)
                throw std::logic_error(
                    "gradients: path crosses a non-persistent node; the earlier backward pass "
                    "was not created with higher-order support");
            // copies: the vjp records new nodes, which may reallocate nodes_
            // out from under a reference (including the executing lambda)
            const std::vector<int32_t> parents = nodes_[static_cast<size_t>(i)].parents;
            const VjpFn fn = nodes_[static_cast<size_t>(i)].vjp;
            std::vector<char> needs(parents.size(), 0);
            bool any = false;
            for (size_t j = 0; j < parents.size(); ++j) {
                const size_t p = static_cast<size_t>(parents[j]);
                needs[j] = nodes_[p].requires_grad && useful[p];
                any = any || needs[j];
            }
            if (!any) continue;
            std::vector<Value> contrib = fn(gy, Value{this, i}, needs);
            if (contrib.size() != parents.size())
                throw std::logic_error("gradients: vjp arity mismatch");
            for (size_t j = 0; j < parents.size(); ++j) {
                if (!needs[j] || !contrib[j].valid()) continue;
                const int32_t p = parents[j];
                if (contrib[j].shape() != nodes_[static_cast<size_t>(p)].value.shape())
                    throw ShapeError("gradients: vjp produced wrong-shaped adjoint");
                Value& slot = adj[static_cast<size_t>(p)];
                slot = slot.valid() ? ops::add(slot, contrib[j]) : contrib[j];
            }
        }
    }

    std::vector<Value> out;
    out.reserve(wrt.size());
    for (const Value& v : wrt) {
        Value g = adj[static_cast<size_t>(v.id)];
        if (!g.valid()) g = constant(Tensor(v.shape()));  // exact zeros, never NaN
        out.push_back(g);
    }

    if (!create_higher_order) {
        for (size_t i = first_backward_node; i < nodes_.size(); ++i) nodes_[i].persistent = false;
    }
    return out;
}

}  // namespace negm
