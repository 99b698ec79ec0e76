#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "grapheye/errors.hpp"

namespace grapheye {

/// Row-major dense matrix of doubles. Small and value-semantic; all the
/// model's shapes are tiny, so no BLAS.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c), 0.0) {}

    double& at(int r, int c) { return data[size_t(r) * cols + c]; }
    double at(int r, int c) const { return data[size_t(r) * cols + c]; }

    const double* row(int r) const { return data.data() + size_t(r) * cols; }
    double* row(int r) { return data.data() + size_t(r) * cols; }

    bool operator==(const DenseMatrix&) const = default;

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    DenseMatrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

}  // namespace grapheye
