#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twoquad/rational.hpp"

namespace twoquad {

/// Dense row-major matrix over a scalar type (Rat or a ball type).
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) {
                throw DimensionMismatch("ragged matrix initializer");
            }
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
                throw DimensionMismatch("ragged matrix rows");
            }
            for (std::size_t j = 0; j < m.cols_; ++j) {
                m(i, j) = rows[i][j];
            }
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<T> row(std::size_t i) const {
        return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                              data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    void set_row(std::size_t i, const std::vector<T>& v) {
        if (v.size() != cols_) {
            throw DimensionMismatch("row length");
        }
        for (std::size_t j = 0; j < cols_; ++j) {
            (*this)(i, j) = v[j];
        }
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) {
            return;
        }
        for (std::size_t j = 0; j < cols_; ++j) {
            std::swap((*this)(a, j), (*this)(b, j));
        }
    }

    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) {
            return;
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            std::swap((*this)(i, a), (*this)(i, b));
        }
    }

    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RatMatrix = Matrix<Rat>;

template <class T>
Matrix<T> identity_matrix(std::size_t n, const T& one, const T& zero = T{}) {
    Matrix<T> m(n, n, zero);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = one;
    }
    return m;
}

inline RatMatrix identity_rat(std::size_t n) { return identity_matrix<Rat>(n, Rat(1), Rat(0)); }

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
    Matrix<T> t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("matrix product " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " by " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            T acc{};
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc = acc + a(i, k) * b(k, j);
            }
            c(i, j) = std::move(acc);
        }
    }
    return c;
}

template <class T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("matrix sum");
    }
    Matrix<T> c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            c(i, j) = a(i, j) + b(i, j);
        }
    }
    return c;
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("matrix difference");
    }
    Matrix<T> c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            c(i, j) = a(i, j) - b(i, j);
        }
    }
    return c;
}

template <class T>
Matrix<T> scaled(const Matrix<T>& a, const T& s) {
    Matrix<T> c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            c(i, j) = s * a(i, j);
        }
    }
    return c;
}

/// P Q P^t, computed on the upper triangle and mirrored so the result is exactly symmetric.
template <class T>
Matrix<T> congruence(const Matrix<T>& p, const Matrix<T>& q) {
    if (p.cols() != q.rows() || !q.square()) {
        throw DimensionMismatch("congruence");
    }
    Matrix<T> pq = p * q;
    Matrix<T> out(p.rows(), p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = i; j < p.rows(); ++j) {
            T acc{};
            for (std::size_t k = 0; k < q.cols(); ++k) {
                acc = acc + pq(i, k) * p(j, k);
            }
            out(i, j) = acc;
            if (i != j) {
                out(j, i) = std::move(acc);
            }
        }
    }
    return out;
}

/// x Q y^t.
template <class T>
T bilinear(const Matrix<T>& q, const std::vector<T>& x, const std::vector<T>& y) {
    if (x.size() != q.rows() || y.size() != q.cols()) {
        throw DimensionMismatch("bilinear form evaluation");
    }
    T acc{};
    for (std::size_t i = 0; i < q.rows(); ++i) {
        T row{};
        for (std::size_t j = 0; j < q.cols(); ++j) {
            row = row + q(i, j) * y[j];
        }
        acc = acc + x[i] * row;
    }
    return acc;
}

template <class T>
T quadratic(const Matrix<T>& q, const std::vector<T>& x) {
    return bilinear(q, x, x);
}

/// Row vector times matrix.
template <class T>
std::vector<T> row_times(const std::vector<T>& x, const Matrix<T>& m) {
    if (x.size() != m.rows()) {
        throw DimensionMismatch("vector-matrix product");
    }
    std::vector<T> out(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        T acc{};
        for (std::size_t i = 0; i < m.rows(); ++i) {
            acc = acc + x[i] * m(i, j);
        }
        out[j] = std::move(acc);
    }
    return out;
}

template <class T>
Matrix<T> submatrix(const Matrix<T>& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Matrix<T> out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(i, j) = m(rows[i], cols[j]);
        }
    }
    return out;
}

/// Block diagonal a (+) b.
template <class T>
Matrix<T> direct_sum(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> out(a.rows() + b.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = a(i, j);
        }
    }
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            out(a.rows() + i, a.cols() + j) = b(i, j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact rational linear algebra

inline RatVec unit_vector(std::size_t n, std::size_t i) {
    RatVec e(n, Rat(0));
    e.at(i) = 1;
    return e;
}

inline Rat determinant(const RatMatrix& a) {
    if (!a.square()) {
        throw DimensionMismatch("determinant of a non-square matrix");
    }
    RatMatrix m = a;
    const std::size_t n = m.rows();
    Rat det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && sgn(m(p, c)) == 0) {
            ++p;
        }
        if (p == n) {
            return 0;
        }
        if (p != c) {
            m.swap_rows(p, c);
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (sgn(m(i, c)) == 0) {
                continue;
            }
            Rat f = m(i, c) / m(c, c);
            for (std::size_t j = c; j < n; ++j) {
                m(i, j) -= f * m(c, j);
            }
        }
    }
    return det;
}

/// Reduced row echelon form; returns pivot columns.
inline std::vector<std::size_t> rref(RatMatrix& m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && sgn(m(p, c)) == 0) {
            ++p;
        }
        if (p == m.rows()) {
            continue;
        }
        m.swap_rows(p, r);
        Rat inv = 1 / m(r, c);
        for (std::size_t j = c; j < m.cols(); ++j) {
            m(r, j) *= inv;
        }
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || sgn(m(i, c)) == 0) {
                continue;
            }
            Rat f = m(i, c);
            for (std::size_t j = c; j < m.cols(); ++j) {
                m(i, j) -= f * m(r, j);
            }
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t rank(const RatMatrix& a) {
    RatMatrix m = a;
    return rref(m).size();
}

/// Basis of the right null space {x : A x = 0}, one rational vector per free column.
inline std::vector<RatVec> right_kernel(const RatMatrix& a) {
    RatMatrix m = a;
    std::vector<std::size_t> pivots = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::size_t p : pivots) {
        is_pivot[p] = true;
    }
    std::vector<RatVec> basis;
    for (std::size_t f = 0; f < m.cols(); ++f) {
        if (is_pivot[f]) {
            continue;
        }
        RatVec v(m.cols(), Rat(0));
        v[f] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            v[pivots[r]] = -m(r, f);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

inline std::optional<RatMatrix> inverse(const RatMatrix& a) {
    if (!a.square()) {
        throw DimensionMismatch("inverse of a non-square matrix");
    }
    const std::size_t n = a.rows();
    RatMatrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            aug(i, j) = a(i, j);
        }
        aug(i, n + i) = 1;
    }
    std::vector<std::size_t> pivots = rref(aug);
    if (pivots.size() < n || pivots[n - 1] != n - 1) {
        return std::nullopt;
    }
    RatMatrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            inv(i, j) = aug(i, n + j);
        }
    }
    return inv;
}

inline bool is_symmetric(const RatMatrix& a) {
    if (!a.square()) {
        return false;
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            if (a(i, j) != a(j, i)) {
                return false;
            }
        }
    }
    return true;
}

/// Symmetric rational matrix: the Gram matrix of a quadratic form.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : m_(n, n, Rat(0)) {}
    explicit SymMatrix(RatMatrix m) : m_(std::move(m)) {
        if (!is_symmetric(m_)) {
            throw PreconditionViolation("matrix is not symmetric");
        }
    }
    SymMatrix(std::initializer_list<std::initializer_list<Rat>> init) : SymMatrix(RatMatrix(init)) {}

    static SymMatrix diagonal(const RatVec& d) {
        SymMatrix s(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            s.m_(i, i) = d[i];
        }
        return s;
    }

    std::size_t n() const { return m_.rows(); }
    const Rat& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    void set(std::size_t i, std::size_t j, const Rat& v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }
    const RatMatrix& matrix() const { return m_; }

    friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

private:
    RatMatrix m_;
};

inline SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) { return SymMatrix(a.matrix() + b.matrix()); }
inline SymMatrix operator-(const SymMatrix& a) { return SymMatrix(scaled(a.matrix(), Rat(-1))); }
inline SymMatrix operator*(const Rat& s, const SymMatrix& a) { return SymMatrix(scaled(a.matrix(), s)); }

/// lambda Q0 + Q1.
inline SymMatrix pencil_member(const SymMatrix& q0, const SymMatrix& q1, const Rat& lambda) {
    if (q0.n() != q1.n()) {
        throw DimensionMismatch("pencil of forms of different sizes");
    }
    SymMatrix out(q0.n());
    for (std::size_t i = 0; i < q0.n(); ++i) {
        for (std::size_t j = i; j < q0.n(); ++j) {
            out.set(i, j, lambda * q0(i, j) + q1(i, j));
        }
    }
    return out;
}

inline Rat evaluate_form(const SymMatrix& q, const RatVec& x) { return quadratic(q.matrix(), x); }
inline Rat evaluate_bilinear(const SymMatrix& q, const RatVec& x, const RatVec& y) {
    return bilinear(q.matrix(), x, y);
}

inline Rat max_abs_entry(const RatMatrix& a) {
    Rat best = 0;
    for (const Rat& x : a.data()) {
        if (abs_rat(x) > best) {
            best = abs_rat(x);
        }
    }
    return best;
}

/// Invertible rational change of basis. Rows are the new basis vectors; a form Q becomes P Q P^t.
class Transform {
public:
    Transform() = default;
    explicit Transform(RatMatrix p) : p_(std::move(p)) {
        if (!p_.square() || sgn(determinant(p_)) == 0) {
            throw PreconditionViolation("transform is not invertible");
        }
    }
    static Transform identity(std::size_t n) { return Transform(identity_rat(n), unchecked{}); }
    static Transform permutation(const std::vector<std::size_t>& order) {
        RatMatrix p(order.size(), order.size(), Rat(0));
        for (std::size_t i = 0; i < order.size(); ++i) {
            p(i, order.at(i)) = 1;
        }
        return Transform(std::move(p));
    }

    std::size_t n() const { return p_.rows(); }
    const RatMatrix& matrix() const { return p_; }
    const Rat& operator()(std::size_t i, std::size_t j) const { return p_(i, j); }

    SymMatrix apply(const SymMatrix& q) const { return SymMatrix(congruence(p_, q.matrix())); }
    /// Coordinates x in the new basis to the original coordinates x P.
    RatVec map_row(const RatVec& x) const { return row_times(x, p_); }
    RatMatrix inverse_matrix() const { return *twoquad::inverse(p_); }

    /// (*this) applied after `first`: the composite maps Q to this (first Q first^t) this^t.
    Transform after(const Transform& first) const { return Transform(p_ * first.p_, unchecked{}); }

private:
    struct unchecked {};
    Transform(RatMatrix p, unchecked) : p_(std::move(p)) {}
    RatMatrix p_;
};

}  // namespace twoquad
