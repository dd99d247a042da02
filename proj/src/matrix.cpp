#include "depthinit/matrix.hpp"

#include <stdexcept>

namespace depthinit {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c.data() + i * n;
        const double* ai = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("matmul_tn: inner dimensions differ");
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    Matrix c(m, n);
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a.data() + p * m;
        const double* bp = b.data() + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            double* ci = c.data() + i * n;
            const double api = ap[i];
            for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("matmul_nt: inner dimensions differ");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Matrix c(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.data() + i * k;
        double* ci = c.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b.data() + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = s;
        }
    }
    return c;
}

void add_col_broadcast(Matrix& m, const std::vector<double>& bias) {
    if (bias.size() != m.rows())
        throw std::invalid_argument("add_col_broadcast: bias length != rows");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* row = m.data() + i * m.cols();
        const double b = bias[i];
        for (std::size_t j = 0; j < m.cols(); ++j) row[j] += b;
    }
}

Matrix relu(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    const double* src = m.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < m.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
    return out;
}

Matrix relu_gate(const Matrix& delta, const Matrix& pre) {
    if (delta.rows() != pre.rows() || delta.cols() != pre.cols())
        throw std::invalid_argument("relu_gate: shape mismatch");
    Matrix out(delta.rows(), delta.cols());
    const double* d = delta.data();
    const double* p = pre.data();
    double* o = out.data();
    for (std::size_t i = 0; i < delta.size(); ++i) o[i] = p[i] > 0.0 ? d[i] : 0.0;
    return out;
}

std::vector<double> row_sums(const Matrix& m) {
    std::vector<double> sums(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.data() + i * m.cols();
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += row[j];
        sums[i] = s;
    }
    return sums;
}

double population_mean(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("population_mean: empty matrix");
    double s = 0.0;
    const double* d = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) s += d[i];
    return s / static_cast<double>(m.size());
}

double population_variance(const Matrix& m) {
    const double mean = population_mean(m);
    double s = 0.0;
    const double* d = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double dev = d[i] - mean;
        s += dev * dev;
    }
    return s / static_cast<double>(m.size());
}

} // namespace depthinit
