#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace arc {

// Row-major dense matrix of doubles.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(size_t r) { return {data.data() + r * cols, cols}; }
};

}  // namespace arc
