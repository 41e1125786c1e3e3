#include "mtoc/tensor.hpp"

#include <cmath>
#include <string>

#include "mtoc/errors.hpp"

namespace mtoc {

std::int64_t shape_product(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_string(shape));
        n *= d;
    }
    return n;
}

std::string shape_string(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_product(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != static_cast<std::int64_t>(data_.size()))
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

void Tensor::reshape(std::vector<int> shape) {
    if (shape_product(shape) != size())
        throw ShapeError("reshape " + shape_string(shape_) + " -> " + shape_string(shape) +
                         " changes element count");
    shape_ = std::move(shape);
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
    Tensor t = *this;
    t.reshape(std::move(shape));
    return t;
}

void Tensor::fill(double value) {
    for (double& v : data_) v = value;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::gather_rows(std::span<const int> idx) const {
    if (shape_.empty()) throw ShapeError("gather_rows on rank-0 tensor");
    std::size_t row = static_cast<std::size_t>(size() / shape_[0]);
    std::vector<int> out_shape = shape_;
    out_shape[0] = static_cast<int>(idx.size());
    Tensor out(out_shape);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        int i = idx[r];
        if (i < 0 || i >= shape_[0]) throw ValueError("gather_rows index out of range");
        const double* src = data_.data() + static_cast<std::size_t>(i) * row;
        double* dst = out.data() + r * row;
        for (std::size_t k = 0; k < row; ++k) dst[k] = src[k];
    }
    return out;
}

}  // namespace mtoc
