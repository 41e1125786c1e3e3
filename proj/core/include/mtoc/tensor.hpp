#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mtoc {

/// Dense n-dimensional real array, row-major. The universal value type for
/// inputs, activations, parameters, and gradients.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    double& at(int i, int j) { return data_[idx2(i, j)]; }
    const double& at(int i, int j) const { return data_[idx2(i, j)]; }
    double& at(int i, int j, int k, int l) { return data_[idx4(i, j, k, l)]; }
    const double& at(int i, int j, int k, int l) const { return data_[idx4(i, j, k, l)]; }

    /// In-place reshape; element count must be preserved.
    void reshape(std::vector<int> shape);
    Tensor reshaped(std::vector<int> shape) const;

    void fill(double value);
    bool all_finite() const;

    /// Copy of the rows (first-dimension slices) selected by idx, in order.
    Tensor gather_rows(std::span<const int> idx) const;

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::size_t idx2(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(shape_[1]) +
               static_cast<std::size_t>(j);
    }
    std::size_t idx4(int i, int j, int k, int l) const {
        return ((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l;
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

std::int64_t shape_product(const std::vector<int>& shape);
std::string shape_string(const std::vector<int>& shape);

}  // namespace mtoc
