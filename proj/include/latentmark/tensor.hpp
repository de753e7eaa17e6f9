#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "latentmark/errors.hpp"

namespace latentmark {

struct Shape {
    std::uint32_t c = 0;
    std::uint32_t h = 0;
    std::uint32_t w = 0;

    std::size_t size() const { return std::size_t(c) * h * w; }
    bool operator==(const Shape&) const = default;
};

// Dense (c, h, w) tensor of doubles, row-major: index = (ch * h + y) * w + x.
class LatentTensor {
public:
    LatentTensor() = default;
    explicit LatentTensor(Shape shape);
    LatentTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::uint32_t ch, std::uint32_t y, std::uint32_t x) {
        return data_[(std::size_t(ch) * shape_.h + y) * shape_.w + x];
    }
    double at(std::uint32_t ch, std::uint32_t y, std::uint32_t x) const {
        return data_[(std::size_t(ch) * shape_.h + y) * shape_.w + x];
    }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool all_finite() const;

    template <class F>
    void apply(F&& f) {
        for (auto& v : data_) v = f(v);
    }

private:
    Shape shape_{};
    std::vector<double> data_;
};

LatentTensor add(const LatentTensor& a, const LatentTensor& b);
LatentTensor scale(const LatentTensor& a, double s);

// alpha * a + beta * b, shape checked
LatentTensor linear_combine(double alpha, const LatentTensor& a, double beta,
                            const LatentTensor& b);

double max_abs(const LatentTensor& a);
double max_abs_diff(const LatentTensor& a, const LatentTensor& b);
double l2_norm(const LatentTensor& a);
double l2_diff(const LatentTensor& a, const LatentTensor& b);

}  // namespace latentmark
