#include "negm/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace negm {

double finite_difference_check(const std::function<double(const Tensor&)>& f,
                               const Tensor& analytic_grad, const Tensor& point, double step,
                               int max_coords, std::mt19937_64& rng, double floor) {
    if (step <= 0.0) throw std::invalid_argument("finite_difference_check: step must be > 0");
    if (!analytic_grad.same_shape(point))
        throw std::invalid_argument("finite_difference_check: gradient/point shape mismatch");

    std::vector<int64_t> coords(static_cast<size_t>(point.size()));
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords > 0 && max_coords < point.size()) {
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(static_cast<size_t>(max_coords));
    }

    double worst = 0.0;
    Tensor probe = point;
    for (int64_t c : coords) {
        const double orig = probe[c];
        probe[c] = orig + step;
        const double up = f(probe);
        probe[c] = orig - step;
        const double down = f(probe);
        probe[c] = orig;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw std::runtime_error("finite_difference_check: non-finite f at perturbed point");
        const double central = (up - down) / (2.0 * step);
        const double ana = analytic_grad[c];
        const double denom = std::max({std::fabs(ana), std::fabs(central), floor});
        worst = std::max(worst, std::fabs(ana - central) / denom);
    }
    return worst;
}

}  // namespace negm
