#ifndef NEGM_AUTODIFF_HPP
#define NEGM_AUTODIFF_HPP

#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "negm/ops.hpp"
#include "negm/tape.hpp"

namespace negm {

/// d(loss)/d(w) for each w in wrt, via the tape the loss was recorded on.
inline std::vector<Value> gradients(const Value& loss, const std::vector<Value>& wrt,
                                    bool create_higher_order) {
    if (!loss.valid()) throw std::logic_error("gradients: invalid loss value");
    return loss.tape->gradients(loss, wrt, create_higher_order);
}

/// Central-difference check of an analytic gradient. Returns the max over
/// sampled coordinates of |analytic - central| / max(|analytic|, |central|,
/// floor). Throws if f evaluates non-finite at a perturbed point.
double finite_difference_check(const std::function<double(const Tensor&)>& f,
                               const Tensor& analytic_grad, const Tensor& point, double step,
                               int max_coords, std::mt19937_64& rng,
                               double floor = 1e-12);

}  // namespace negm

#endif
