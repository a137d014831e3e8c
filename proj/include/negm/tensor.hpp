#ifndef NEGM_TENSOR_HPP
#define NEGM_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace negm {

/// Dense row-major n-d array of doubles. Plain value type: copies are deep.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);  // zero-filled
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor full(std::vector<int> shape, double v);
    static Tensor scalar(double v);  // shape {1}

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // multi-index access, for tests and small code paths
    double& at(std::initializer_list<int> idx);
    double at(std::initializer_list<int> idx) const;

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

    double item() const;  // requires size()==1

    std::string shape_str() const;

    static int64_t numel(const std::vector<int>& shape);

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

// small raw-tensor helpers used outside the tape (attacks, optimizers, eval)
double dot(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& a);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
double max_rel_diff(const Tensor& a, const Tensor& b, double floor);

}  // namespace negm

#endif
