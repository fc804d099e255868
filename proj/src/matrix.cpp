#include "coalition_nash/matrix.hpp"

#include <cassert>
#include <cmath>

namespace coalition_nash {

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    DenseMatrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        assert(static_cast<int>(row.size()) == c);
        int j = 0;
        for (double v : row) m.at(i, j++) = v;
        ++i;
    }
    return m;
}

bool DenseMatrix::all_finite() const {
    for (double v : a_)
        if (!std::isfinite(v)) return false;
    return true;
}

DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.cols(), m.rows());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) t.at(c, r) = m.at(r, c);
    return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    assert(a.cols() == b.rows());
    DenseMatrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) out.at(i, j) += aik * b.at(k, j);
        }
    }
    return out;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    DenseMatrix out = a;
    for (size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    DenseMatrix out = a;
    for (size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

DenseMatrix scale(const DenseMatrix& a, double s) {
    DenseMatrix out = a;
    for (double& v : out.data()) v *= s;
    return out;
}

Vec matvec(const DenseMatrix& a, const Vec& x) {
    assert(static_cast<int>(x.size()) == a.cols());
    Vec y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < a.cols(); ++j) acc += a.at(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

double max_abs(const DenseMatrix& m) {
    double best = 0.0;
    for (double v : m.data()) best = std::max(best, std::fabs(v));
    return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    double best = 0.0;
    for (size_t i = 0; i < a.data().size(); ++i)
        best = std::max(best, std::fabs(a.data()[i] - b.data()[i]));
    return best;
}

double frobenius_norm(const DenseMatrix& m) {
    double acc = 0.0;
    for (double v : m.data()) acc += v * v;
    return std::sqrt(acc);
}

double quadratic_form(const DenseMatrix& a, const Vec& x, const Vec& y) {
    assert(a.rows() == static_cast<int>(x.size()) && a.cols() == static_cast<int>(y.size()));
    double acc = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (int j = 0; j < a.cols(); ++j) row += a.at(i, j) * y[j];
        acc += x[i] * row;
    }
    return acc;
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double best = 0.0;
    for (double v : a) best = std::max(best, std::fabs(v));
    return best;
}

bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace coalition_nash
