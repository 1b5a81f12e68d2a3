#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vfh::core {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
    ShapeError(const std::string& op, const Shape& a, const Shape& b)
        : std::invalid_argument(op + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b)) {}
};

class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major array of doubles. Copyable value type.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
        validate_shape();
        data_.assign(shape_numel(shape_), fill);
    }

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        validate_shape();
        if (shape_numel(shape_) != data_.size()) {
            throw ShapeError("Tensor: shape " + shape_str(shape_) + " needs " +
                             std::to_string(shape_numel(shape_)) + " values, got " +
                             std::to_string(data_.size()));
        }
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_, 0.0); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const {
        if (axis >= shape_.size()) throw ShapeError("Tensor::dim: axis out of range for " + shape_str(shape_));
        return shape_[axis];
    }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* ptr() noexcept { return data_.data(); }
    const double* ptr() const noexcept { return data_.data(); }
    std::vector<double>& storage() noexcept { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    template <typename... Idx>
    std::size_t offset(Idx... idx) const noexcept {
        const std::size_t ids[] = {static_cast<std::size_t>(idx)...};
        std::size_t off = 0;
        for (std::size_t i = 0; i < sizeof...(Idx); ++i) off = off * shape_[i] + ids[i];
        return off;
    }
    template <typename... Idx>
    double& at(Idx... idx) noexcept {
        return data_[offset(idx...)];
    }
    template <typename... Idx>
    double at(Idx... idx) const noexcept {
        return data_[offset(idx...)];
    }

    Tensor reshaped(Shape shape) const {
        if (shape_numel(shape) != data_.size()) throw ShapeError("reshape", shape_, shape);
        return Tensor(std::move(shape), data_);
    }

    void fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Tensor& operator+=(const Tensor& o) {
        if (o.shape_ != shape_) throw ShapeError("operator+=", shape_, o.shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Tensor& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }

    bool operator==(const Tensor& o) const noexcept { return shape_ == o.shape_ && data_ == o.data_; }

private:
    void validate_shape() const {
        for (std::size_t d : shape_)
            if (d == 0) throw ShapeError("Tensor: zero-sized dimension in " + shape_str(shape_));
    }

    Shape shape_;
    std::vector<double> data_;
};

inline void ensure_finite(const Tensor& t, const std::string& what) {
    if (!t.all_finite()) throw NonFiniteError(what + ": non-finite value");
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("max_abs_diff", a.shape(), b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double sum(const Tensor& t) noexcept {
    double s = 0.0;
    for (double v : t.data()) s += v;
    return s;
}

inline double dot(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("dot", a.shape(), b.shape());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace vfh::core
