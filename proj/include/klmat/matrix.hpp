// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace klmat {

/// Dense row-major matrix of doubles. Rows are the unit of access everywhere
/// in this library (user/item factor vectors, design-matrix rows).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const {
        return std::span{data_}.subspan(i * cols_, cols_);
    }
    std::span<double> row(std::size_t i) {
        return std::span{data_}.subspan(i * cols_, cols_);
    }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::span<const double> flat() const { return std::span{data_}; }
    std::span<double> flat() { return std::span{data_}; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

inline double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline void scaled_add(std::span<double> x, double a, std::span<const double> v) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * v[i];
}

/// Order-insensitive accumulator (Kahan). Used where the contract asks for
/// shuffle-invariant sums at 1e-12.
class CompensatedSum {
public:
    void add(double x) {
        double y = x - carry_;
        double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const noexcept { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Uniform double in [0, 1) built from the raw mt19937_64 stream. The standard
/// distributions are implementation-defined, so seeded runs would not be
/// reproducible across standard libraries; this mapping is.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Fisher-Yates shuffle driven by the raw engine stream, for the same
/// reproducibility reason as uniform01.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace klmat
