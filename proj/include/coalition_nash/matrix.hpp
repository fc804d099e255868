#pragma once

#include <cstddef>
#include <vector>

namespace coalition_nash {

using Vec = std::vector<double>;

// Dense row-major matrix of 64-bit floats. Desk-scale by design: the largest
// matrix the library ever builds is n_sum² × n_sum² in a test oracle.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

    static DenseMatrix identity(int n);
    // Rows are the inner initializer lists.
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& at(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    bool all_finite() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& a, double s);
Vec matvec(const DenseMatrix& a, const Vec& x);

// Largest absolute entry.
double max_abs(const DenseMatrix& m);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& m);

// x^T A y (A square, |x| = |y| = A.rows()).
double quadratic_form(const DenseMatrix& a, const Vec& x, const Vec& y);

// ---- small vector helpers ----
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
bool all_finite(const Vec& a);

}  // namespace coalition_nash
