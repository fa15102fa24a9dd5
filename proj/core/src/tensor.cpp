#include "sonn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "sonn/errors.hpp"

namespace sonn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, double value)
    : shape_(std::move(shape)), data_(product(shape_), value) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != product(shape_))
        throw DimensionError("Tensor: value count does not match shape");
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
    assert(idx.size() == shape_.size());
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
        assert(i < shape_[axis]);
        off = off * shape_[axis] + i;
        ++axis;
    }
    return off;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw DimensionError("dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const Tensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw DimensionError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

bool all_finite(const Tensor& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

}  // namespace sonn
