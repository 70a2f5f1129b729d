#pragma once

// Dense exact-rational linear algebra: just enough for Gram matrices,
// positive-definiteness certificates, kernels and small inverses.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "freeprob/rational.hpp"

namespace freeprob {

class RatMatrix {
  public:
    RatMatrix() : rows_(0), cols_(0) {}
    RatMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, Rational(0)) {}

    static RatMatrix identity(int n) {
        RatMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Rational& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const Rational& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    bool operator==(const RatMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

    RatMatrix transposed() const {
        RatMatrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool is_symmetric() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    Eigen::MatrixXd to_double() const {
        Eigen::MatrixXd m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = freeprob::to_double((*this)(i, j));
        return m;
    }

  private:
    int rows_, cols_;
    std::vector<Rational> a_;
};

inline RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("RatMatrix product: dimension mismatch");
    RatMatrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const Rational& aik = a(i, k);
            if (is_zero(aik)) continue;
            for (int j = 0; j < b.cols(); ++j) {
                if (is_zero(b(k, j))) continue;
                c(i, j) += aik * b(k, j);
            }
        }
    return c;
}

inline RatMatrix operator-(const RatMatrix& a, const RatMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("RatMatrix difference: dimension mismatch");
    RatMatrix c(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

// Positive-definiteness of a symmetric matrix by exact LDL^T with greedy
// diagonal pivoting. PD iff every pivot is strictly positive.
inline bool is_positive_definite(const RatMatrix& m) {
    if (!m.is_symmetric()) return false;
    const int n = m.rows();
    RatMatrix s = m;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (s(perm[i], perm[i]) > s(perm[p], perm[p])) p = i;
        std::swap(perm[k], perm[p]);
        const Rational piv = s(perm[k], perm[k]);
        if (sgn(piv) <= 0) return false;
        for (int i = k + 1; i < n; ++i) {
            Rational f = s(perm[i], perm[k]) / piv;
            if (is_zero(f)) continue;
            for (int j = k + 1; j < n; ++j) s(perm[i], perm[j]) -= f * s(perm[k], perm[j]);
        }
    }
    return true;
}

// Solves A X = B exactly by Gauss-Jordan with partial (largest-absolute) pivoting.
// Returns nullopt when A is singular.
inline std::optional<RatMatrix> solve(const RatMatrix& a, const RatMatrix& b) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw std::invalid_argument("solve: dimension mismatch");
    const int n = a.rows(), m = b.cols();
    RatMatrix w = a, x = b;
    std::vector<int> col(n);
    for (int i = 0; i < n; ++i) col[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = -1;
        for (int i = k; i < n; ++i)
            if (!is_zero(w(i, k))) {
                if (p < 0 || abs(w(i, k)) > abs(w(p, k))) p = i;
            }
        if (p < 0) return std::nullopt;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(w(k, j), w(p, j));
            for (int j = 0; j < m; ++j) std::swap(x(k, j), x(p, j));
        }
        const Rational piv = w(k, k);
        for (int i = 0; i < n; ++i) {
            if (i == k || is_zero(w(i, k))) continue;
            Rational f = w(i, k) / piv;
            for (int j = k; j < n; ++j) w(i, j) -= f * w(k, j);
            for (int j = 0; j < m; ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) x(i, j) /= w(i, i);
    return x;
}

inline std::optional<RatMatrix> inverse(const RatMatrix& a) {
    return solve(a, RatMatrix::identity(a.rows()));
}

// Basis of the (right) kernel, by exact reduced row echelon form. The basis
// vectors come out in a deterministic order keyed to the free columns.
inline std::vector<std::vector<Rational>> kernel(const RatMatrix& a) {
    const int n = a.rows(), m = a.cols();
    RatMatrix w = a;
    std::vector<int> pivot_col;
    int row = 0;
    for (int c = 0; c < m && row < n; ++c) {
        int p = -1;
        for (int i = row; i < n; ++i)
            if (!is_zero(w(i, c))) { p = i; break; }
        if (p < 0) continue;
        if (p != row)
            for (int j = 0; j < m; ++j) std::swap(w(row, j), w(p, j));
        const Rational piv = w(row, c);
        for (int j = 0; j < m; ++j) w(row, j) /= piv;
        for (int i = 0; i < n; ++i) {
            if (i == row || is_zero(w(i, c))) continue;
            Rational f = w(i, c);
            for (int j = 0; j < m; ++j) w(i, j) -= f * w(row, j);
        }
        pivot_col.push_back(c);
        ++row;
    }
    std::vector<bool> is_pivot(m, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<std::vector<Rational>> basis;
    for (int c = 0; c < m; ++c) {
        if (is_pivot[c]) continue;
        std::vector<Rational> v(m, Rational(0));
        v[c] = 1;
        for (size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -w(int(r), c);
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace freeprob
