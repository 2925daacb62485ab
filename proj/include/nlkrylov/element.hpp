#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nlkrylov {

/// Shape tag for elements of the solve space: column vectors in R^n or
/// row-major matrices in R^{n x p}. A Vector(n) and a Matrix(n,1) carry the
/// same data and behave identically under every operation in this library.
enum class Kind { vector, matrix };

/// Value type the solvers operate on: an element of a finite-dimensional
/// inner product space. Vectors use the Euclidean inner product, matrices
/// the Frobenius one; both reduce to the same componentwise sum, so all
/// algorithms are written once against this type.
class Element {
public:
    Element() = default;

    static Element vector(std::size_t n, double fill = 0.0) {
        Element e;
        e.kind_ = Kind::vector;
        e.rows_ = n;
        e.cols_ = 1;
        e.a_.assign(n, fill);
        return e;
    }

    static Element matrix(std::size_t n, std::size_t p, double fill = 0.0) {
        Element e;
        e.kind_ = Kind::matrix;
        e.rows_ = n;
        e.cols_ = p;
        e.a_.assign(n * p, fill);
        return e;
    }

    Kind kind() const { return kind_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return a_.size(); }

    double& operator[](std::size_t i) { return a_[i]; }
    double operator[](std::size_t i) const { return a_[i]; }

    /// Row-major entry access for matrix-kind elements.
    double& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    /// Zero element of the same space.
    Element zero_like() const {
        Element e = *this;
        e.a_.assign(e.a_.size(), 0.0);
        return e;
    }

    void set_zero() { a_.assign(a_.size(), 0.0); }

    void scale(double s) {
        for (double& x : a_) x *= s;
    }

    void negate() {
        for (double& x : a_) x = -x;
    }

    /// this += s * y
    void axpy(double s, const Element& y) {
        check_same_space(y);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += s * y.a_[i];
    }

    Element& operator+=(const Element& y) {
        axpy(1.0, y);
        return *this;
    }

    Element& operator-=(const Element& y) {
        axpy(-1.0, y);
        return *this;
    }

    friend Element operator+(Element x, const Element& y) {
        x += y;
        return x;
    }

    friend Element operator-(Element x, const Element& y) {
        x -= y;
        return x;
    }

    friend Element operator*(double s, Element x) {
        x.scale(s);
        return x;
    }

    bool same_space(const Element& y) const {
        return kind_ == y.kind_ && rows_ == y.rows_ && cols_ == y.cols_;
    }

    bool is_finite() const {
        for (double x : a_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    void check_same_space(const Element& y) const {
        if (!same_space(y)) throw std::invalid_argument("element shape mismatch");
    }

    Kind kind_ = Kind::vector;
    std::size_t rows_ = 0;
    std::size_t cols_ = 1;
    std::vector<double> a_;
};

/// Euclidean inner product for vector kind, Frobenius for matrix kind.
inline double inner(const Element& x, const Element& y) {
    if (!x.same_space(y)) throw std::invalid_argument("inner: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm(const Element& x) { return std::sqrt(inner(x, x)); }

/// Max-magnitude entry; the restart monitor's ||.||_inf.
inline double inf_norm(const Element& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s = std::max(s, std::abs(x[i]));
    return s;
}

}  // namespace nlkrylov
