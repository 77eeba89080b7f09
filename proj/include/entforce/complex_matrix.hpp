#ifndef ENTFORCE_COMPLEX_MATRIX_HPP
#define ENTFORCE_COMPLEX_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Dense row-major complex matrix plus a cyclic-Jacobi Hermitian eigensolver.
// Everything in this project is small (at most 4(n+1) x 4(n+1) for the pulse
// dynamics), so clarity wins over blocking/vectorization tricks.

namespace entforce {

using cplx = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(ComplexMatrix a, double s) { return a *= cplx{s, 0.0}; }
    friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= cplx{s, 0.0}; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_)
            throw std::invalid_argument("ComplexMatrix::operator*: inner dimensions differ");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    out(i, j) += aik * b(k, j);
            }
        return out;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                out(j, i) = (*this)(i, j);
        return out;
    }

    ComplexMatrix conjugate() const {
        ComplexMatrix out(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = std::conj(data_[k]);
        return out;
    }

    cplx trace() const {
        if (rows_ != cols_)
            throw std::invalid_argument("ComplexMatrix::trace: matrix not square");
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    // M is Hermitian iff it equals its conjugate transpose within tol
    // (entrywise absolute comparison).
    bool is_hermitian(double tol = 1e-12) const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i; j < cols_; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
        return true;
    }

private:
    void require_same_shape(const ComplexMatrix& o, const char* who) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string("ComplexMatrix::") + who + ": shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> data_;
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{0.0, 0.0}) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    out(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return out;
}

struct HermitianEigen {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // eigenvectors in columns, same order
};

// Cyclic Jacobi with complex plane rotations. Each pivot (p,q) is first
// dephased so the 2x2 subproblem is real symmetric, then rotated by
// theta = atan2(2|g|, a_pp - a_qq)/2. Quadratic convergence once the
// off-diagonal mass is small; matrices here are tiny so we just sweep.
inline HermitianEigen hermitian_eigen(ComplexMatrix h, double tol = 1e-14) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("hermitian_eigen: matrix not square");
    if (!h.is_hermitian(1e-10 * std::max(1.0, h.max_abs())))
        throw std::invalid_argument("hermitian_eigen: matrix not Hermitian");

    const std::size_t n = h.rows();
    ComplexMatrix e = ComplexMatrix::identity(n);
    const double scale = std::max(h.max_abs(), 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off = std::max(off, std::abs(h(p, q)));
        if (off <= tol * scale) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx g = h(p, q);
                const double ag = std::abs(g);
                if (ag <= tol * scale) continue;
                const cplx phase = g / ag;          // e^{i phi}
                const cplx d = std::conj(phase);    // e^{-i phi}
                const double alpha = h(p, p).real();
                const double beta = h(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * ag, alpha - beta);
                const double c = std::cos(theta);
                const double s = std::sin(theta);

                // columns: H <- H V with V = [[c, -s],[s e^{-i phi}, c e^{-i phi}]]
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx hp = h(i, p), hq = h(i, q);
                    h(i, p) = c * hp + s * d * hq;
                    h(i, q) = -s * hp + c * d * hq;
                }
                // rows: H <- V^H H
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx hp = h(p, j), hq = h(q, j);
                    h(p, j) = c * hp + s * phase * hq;
                    h(q, j) = -s * hp + c * phase * hq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx ep = e(i, p), eq = e(i, q);
                    e(i, p) = c * ep + s * d * eq;
                    e(i, q) = -s * ep + c * d * eq;
                }
                h(p, q) = 0.0;
                h(q, p) = 0.0;
            }
        }
    }

    HermitianEigen out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = h(i, i).real();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return diag[a] < diag[b];
    });
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = e(i, order[j]);
    }
    return out;
}

} // namespace entforce

#endif
