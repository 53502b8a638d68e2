#ifndef TOPEAX_MATRIX_HPP
#define TOPEAX_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "topeax/errors.hpp"

namespace topeax {

// Row-major dense matrix of doubles. The one numeric carrier used throughout:
// embeddings, distance matrices, density grids, probability tables and
// importance scores all live in this type.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    static DenseMatrix from_values(std::size_t rows, std::size_t cols,
                                   std::vector<double> values) {
        if (values.size() != rows * cols)
            throw InputError("DenseMatrix: value count does not match declared shape");
        DenseMatrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.values_ = std::move(values);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols_, cols_};
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> v) { return dot(v, v); }

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw NumericError("cosine similarity of a zero-norm vector is undefined");
    return dot(a, b) / (na * nb);
}

}  // namespace topeax

#endif  // TOPEAX_MATRIX_HPP
