#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tsc {

// Dense row-major matrix of doubles. The only linear-algebra container
// used throughout; everything here is small enough that hand-rolled
// loops beat pulling in a BLAS.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {a_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    void set_row(std::size_t i, std::span<const double> v) {
        for (std::size_t j = 0; j < cols_; ++j) a_[i * cols_ + j] = v[j];
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline std::vector<double> to_vector(std::span<const double> s) {
    return {s.begin(), s.end()};
}

}  // namespace tsc
