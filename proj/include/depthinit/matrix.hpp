#pragma once

#include <cstddef>
#include <vector>

namespace depthinit {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// All kernels accumulate in a fixed order; results do not depend on any
// runtime parallelism.
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T

void add_col_broadcast(Matrix& m, const std::vector<double>& bias);
Matrix relu(const Matrix& m);

/// out[i] = (pre[i] > 0) ? delta[i] : 0  (ReLU gate; derivative at 0 is 0).
Matrix relu_gate(const Matrix& delta, const Matrix& pre);

std::vector<double> row_sums(const Matrix& m);

double population_mean(const Matrix& m);
/// Population variance with a single mean over all entries.
double population_variance(const Matrix& m);

} // namespace depthinit
