#include "latentmark/tensor.hpp"

#include <cmath>
#include <string>

namespace latentmark {

namespace {

void check_nonzero(const Shape& s) {
    if (s.c == 0 || s.h == 0 || s.w == 0) {
        throw ShapeError("tensor dims must be nonzero, got (" + std::to_string(s.c) + ", " +
                         std::to_string(s.h) + ", " + std::to_string(s.w) + ")");
    }
}

void check_same(const Shape& a, const Shape& b) {
    if (!(a == b)) throw ShapeError("tensor shape mismatch");
}

}  // namespace

LatentTensor::LatentTensor(Shape shape) : shape_(shape) {
    check_nonzero(shape);
    data_.assign(shape.size(), 0.0);
}

LatentTensor::LatentTensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
    check_nonzero(shape);
    if (data_.size() != shape.size()) throw ShapeError("data length does not match shape");
}

bool LatentTensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

LatentTensor add(const LatentTensor& a, const LatentTensor& b) {
    check_same(a.shape(), b.shape());
    LatentTensor r(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

LatentTensor scale(const LatentTensor& a, double s) {
    LatentTensor r(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

LatentTensor linear_combine(double alpha, const LatentTensor& a, double beta,
                            const LatentTensor& b) {
    check_same(a.shape(), b.shape());
    LatentTensor r(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = alpha * a[i] + beta * b[i];
    return r;
}

double max_abs(const LatentTensor& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const LatentTensor& a, const LatentTensor& b) {
    check_same(a.shape(), b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double l2_norm(const LatentTensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double l2_diff(const LatentTensor& a, const LatentTensor& b) {
    check_same(a.shape(), b.shape());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace latentmark
