#include "seqhygan/matrix.hpp"

#include <cmath>

#include "seqhygan/threading.hpp"

namespace seqhygan {

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    const std::size_t k_dim = a.cols;
    const std::size_t n_dim = b.cols;
    parallel_for(a.rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* arow = a.row_ptr(i);
            double* crow = c.row_ptr(i);
            for (std::size_t k = 0; k < k_dim; ++k) {
                const double av = arow[k];
                if (av == 0.0) continue; // one-hot inputs make this worthwhile
                const double* brow = b.row_ptr(k);
                for (std::size_t j = 0; j < n_dim; ++j) crow[j] += av * brow[j];
            }
        }
    });
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    parallel_for(a.rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* arow = a.row_ptr(i);
            for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = arow[j];
        }
    });
    return t;
}

void add_in_place(Matrix& a, const Matrix& b) {
    parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) a.data[i] += b.data[i];
    });
}

void axpy_in_place(Matrix& a, double s, const Matrix& b) {
    parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) a.data[i] += s * b.data[i];
    });
}

bool all_finite(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : m.data) v = (2.0 * uniform_unit(rng) - 1.0) * bound;
    return m;
}

} // namespace seqhygan
