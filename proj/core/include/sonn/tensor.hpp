#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace sonn {

/// Dense row-major tensor of 64-bit floats. Feature maps are 4-D
/// [batch, channel, row, col], weights [out, in, k, k], biases 1-D.
/// The data length always equals the product of the extents.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, double value);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::size_t> shape, double value) {
        return Tensor(std::move(shape), value);
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const {
        assert(axis < shape_.size());
        return shape_[axis];
    }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) {
        assert(i < data_.size());
        return data_[i];
    }
    double operator[](std::size_t i) const {
        assert(i < data_.size());
        return data_[i];
    }

    /// Multi-index access, e.g. t(b, c, m, n) on a 4-D tensor.
    template <class... Ix>
    double& operator()(Ix... ix) {
        return data_[offset({static_cast<std::size_t>(ix)...})];
    }
    template <class... Ix>
    double operator()(Ix... ix) const {
        return data_[offset({static_cast<std::size_t>(ix)...})];
    }

    void fill(double value);

private:
    std::size_t offset(std::initializer_list<std::size_t> idx) const;

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

double dot(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& a);

}  // namespace sonn
