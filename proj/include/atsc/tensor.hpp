#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "atsc/errors.hpp"

namespace atsc {

// Dense row-major tensor of doubles. Small and deliberately simple; all the
// network math in nn/ works on raw pointers into these.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(numel(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != numel(shape_))
            throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
    }

    static std::size_t numel(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-d and 3-d indexed access (row-major).
    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    static std::string shape_string(const std::vector<std::size_t>& shape) {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << ")";
        return os.str();
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Parameter/gradient sets are plain vectors of tensors in canonical order.
using TensorSet = std::vector<Tensor>;

inline double global_norm(const TensorSet& ts) {
    double ss = 0.0;
    for (const Tensor& t : ts)
        for (double v : t.vec()) ss += v * v;
    return std::sqrt(ss);
}

inline void scale_all(TensorSet& ts, double k) {
    for (Tensor& t : ts)
        for (double& v : t.vec()) v *= k;
}

// Scales gradients in place so their global norm is at most max_norm.
// Returns the pre-clip norm.
inline double clip_global_norm(TensorSet& grads, double max_norm) {
    const double norm = global_norm(grads);
    if (norm > max_norm && norm > 0.0) scale_all(grads, max_norm / norm);
    return norm;
}

} // namespace atsc
