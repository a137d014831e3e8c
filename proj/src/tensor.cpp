#include "negm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace negm {

int64_t Tensor::numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimension must be positive");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(numel(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (numel(shape_) != static_cast<int64_t>(data_.size()))
        throw std::invalid_argument("tensor shape/data size mismatch");
}

Tensor Tensor::full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

namespace {
int64_t flat_offset(const std::vector<int>& shape, std::initializer_list<int> idx) {
    if (idx.size() != shape.size()) throw std::invalid_argument("tensor index rank mismatch");
    int64_t off = 0;
    auto it = idx.begin();
    for (size_t d = 0; d < shape.size(); ++d, ++it) {
        if (*it < 0 || *it >= shape[d]) throw std::out_of_range("tensor index out of range");
        off = off * shape[d] + *it;
    }
    return off;
}
}  // namespace

double& Tensor::at(std::initializer_list<int> idx) {
    return data_[static_cast<size_t>(flat_offset(shape_, idx))];
}

double Tensor::at(std::initializer_list<int> idx) const {
    return data_[static_cast<size_t>(flat_offset(shape_, idx))];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::item() const {
    if (data_.size() != 1) throw std::logic_error("item() on non-scalar tensor");
    return data_[0];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << ']';
    return os.str();
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (int64_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Tensor& a) {
    double m = 0;
    for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0;
    for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double max_rel_diff(const Tensor& a, const Tensor& b, double floor) {
    double m = 0;
    for (int64_t i = 0; i < a.size(); ++i) {
        double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        m = std::max(m, std::fabs(a[i] - b[i]) / denom);
    }
    return m;
}

}  // namespace negm
