#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace seqhygan {

// Dense row-major fp64 matrix. The whole training stack runs on doubles so
// finite-difference gradient checks have headroom.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const;
};

// Kernels. matmul/transpose parallelize over output rows; everything else is
// elementwise. None of them throw -- shape checks live in the callers.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
void add_in_place(Matrix& a, const Matrix& b);
void axpy_in_place(Matrix& a, double s, const Matrix& b); // a += s*b

bool all_finite(const Matrix& m);

// Deterministic uniform double in [0, 1) from the engine's raw 64-bit draws.
// std::uniform_real_distribution is implementation-defined; this is not.
double uniform_unit(std::mt19937_64& rng);

// Unbiased integer draw in [0, n) by rejection sampling.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

// Uniform Glorot-style init in +-sqrt(6/(fan_in+fan_out)), row-major fill order.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

} // namespace seqhygan
