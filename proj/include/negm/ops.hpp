#ifndef NEGM_OPS_HPP
#define NEGM_OPS_HPP

#include <vector>

#include "negm/tape.hpp"

namespace negm::ops {

// Every op records one node whose vjp is expressed in terms of the ops below,
// so the set is closed under differentiation (double backprop works for any
// composite). relu and maxpool capture their masks/indices as constants,
// which is the usual almost-everywhere second derivative.

// elementwise (same shape)
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value div(const Value& a, const Value& b);
Value neg(const Value& a);
Value scale(const Value& a, double c);
Value add_scalar(const Value& a, double c);
Value exp(const Value& a);
Value log(const Value& a);
Value sqrt(const Value& a);
Value relu(const Value& a);

// shape
Value reshape(const Value& a, std::vector<int> shape);
Value transpose2d(const Value& a);

// reductions and their broadcast inverses
Value sum_all(const Value& a);                                   // -> [1]
Value broadcast_scalar(const Value& s, std::vector<int> shape);  // [1] -> shape
Value sum_samples(const Value& a);                               // [B,...] -> [B]
Value broadcast_samples(const Value& v, std::vector<int> shape);
Value sum_to_axis1(const Value& a);  // [B,C,...] -> [C]
Value broadcast_axis1(const Value& v, std::vector<int> shape);
Value mean_all(const Value& a);  // -> [1]

// per-sample class selection (labels are constants)
Value pick_class(const Value& logits, const std::vector<int>& labels);  // [B,C] -> [B]
Value scatter_class(const Value& v, const std::vector<int>& labels, int classes);

// channel plumbing for Sum/Concat blocks
Value concat_channels(const Value& a, const Value& b);
Value slice_channels(const Value& a, int c0, int c1);
Value pad_channels(const Value& a, int before, int after);

// linear algebra
Value matmul(const Value& a, const Value& b);  // [M,K]x[K,N] -> [M,N]

// convolution triple; the vjps of each member are the other two, which is
// what closes second-order differentiation through convolutions
Value conv2d(const Value& x, const Value& k, int stride);
Value conv2d_grad_input_op(const Value& gy, const Value& k, std::vector<int> x_shape, int stride);
Value conv2d_grad_kernel_op(const Value& x, const Value& gy, std::vector<int> k_shape, int stride);

// 2x2 max pooling pair (indices constant)
Value maxpool2(const Value& x);
Value maxpool2_scatter_op(const Value& gy, const Tensor& idx, std::vector<int> x_shape);
Value maxpool2_gather_op(const Value& u, const Tensor& idx);

// losses (autodiff core)
// mean over batch of -log softmax(true class); log-sum-exp stabilized
Value cross_entropy(const Value& logits, const std::vector<int>& labels);
// sum instead of mean; its input gradient carries each sample's own gradient
Value cross_entropy_sum(const Value& logits, const std::vector<int>& labels);

}  // namespace negm::ops

#endif
