#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace affectrag {

// Minimal dense row-major matrix. Index stores float32; statistics and PCA
// work in float64.
template <typename T>
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, T{}) {}

    T& at(size_t r, size_t c) { return data[r * cols + c]; }
    const T& at(size_t r, size_t c) const { return data[r * cols + c]; }

    std::span<T> row(size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const T> row(size_t r) const { return {data.data() + r * cols, cols}; }

    void push_row(std::span<const T> v) {
        if (cols == 0) cols = v.size();
        if (v.size() != cols) throw std::invalid_argument("push_row: width mismatch");
        data.insert(data.end(), v.begin(), v.end());
        ++rows;
    }

    bool empty() const { return rows == 0; }
};

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

inline MatrixD to_double(const MatrixF& m) {
    MatrixD out(m.rows, m.cols);
    for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<double>(m.data[i]);
    return out;
}

inline MatrixF to_float(const MatrixD& m) {
    MatrixF out(m.rows, m.cols);
    for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<float>(m.data[i]);
    return out;
}

}  // namespace affectrag
