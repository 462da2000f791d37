#include "core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace latcode {

Mat::Mat(int r, int c, std::vector<double> data) : rows(r), cols(c), a(std::move(data)) {
    if (a.size() != static_cast<size_t>(r) * c)
        throw ValidationError("matrix data size does not match rows*cols");
}

double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double sqnorm(const Vec& x) { return dot(x, x); }

double norm2(const Vec& x) { return std::sqrt(sqnorm(x)); }

double sqdist(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

Vec add(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

Vec sub(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

Vec scale(const Vec& x, double s) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] * s;
    return r;
}

void axpy(Vec& y, double a, const Vec& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

Vec matvec(const Mat& A, const Vec& x) {
    Vec r(static_cast<size_t>(A.rows), 0.0);
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        const double* row = &A.a[static_cast<size_t>(i) * A.cols];
        for (int j = 0; j < A.cols; ++j) s += row[j] * x[j];
        r[i] = s;
    }
    return r;
}

Vec matTvec(const Mat& A, const Vec& x) {
    Vec r(static_cast<size_t>(A.cols), 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double* row = &A.a[static_cast<size_t>(i) * A.cols];
        for (int j = 0; j < A.cols; ++j) r[j] += row[j] * x[i];
    }
    return r;
}

double entrywise_l1(const Mat& A) {
    double s = 0.0;
    for (double v : A.a) s += std::abs(v);
    return s;
}

double frobenius(const Mat& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

double spectral_norm(const Mat& A, double rel_tol) {
    if (A.rows == 0 || A.cols == 0) return 0.0;
    bool all_zero = true;
    for (double v : A.a)
        if (v != 0.0) { all_zero = false; break; }
    if (all_zero) return 0.0;
    if (A.cols == 1) {
        Vec col(A.a.begin(), A.a.end());
        return norm2(col);
    }

    // Power iteration on A^T A. The start vector mixes all coordinates with
    // distinct weights so it cannot be orthogonal to the top eigenspace for
    // typical inputs; stagnation is caught by the iteration cap.
    Vec v(static_cast<size_t>(A.cols));
    for (int j = 0; j < A.cols; ++j) v[j] = 1.0 + 0.37 * j / (A.cols + 1.0);
    double nv = norm2(v);
    for (auto& e : v) e /= nv;

    double sigma = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vec av = matvec(A, v);
        double s = norm2(av);
        if (s == 0.0) {
            // v landed in the null space; restart from a shifted vector.
            for (int j = 0; j < A.cols; ++j) v[j] = 1.0 + 0.61 * ((j * 7 + it) % A.cols);
            nv = norm2(v);
            for (auto& e : v) e /= nv;
            continue;
        }
        Vec w = matTvec(A, av);
        double nw = norm2(w);
        for (auto& e : w) e /= nw;
        v = std::move(w);
        if (it > 0 && std::abs(s - sigma) <= rel_tol * std::max(s, 1e-300)) {
            sigma = s;
            break;
        }
        sigma = s;
    }
    // One final multiply so the reported value corresponds to the last vector.
    Vec av = matvec(A, v);
    return std::max(sigma, norm2(av));
}

void eigen_sym(const Mat& S, Vec& eigenvalues, Mat& V) {
    if (S.rows != S.cols) throw ValidationError("eigen_sym: matrix must be square");
    const int n = S.rows;
    Mat A = S;
    V = Mat(n, n);
    for (int i = 0; i < n; ++i) V(i, i) = 1.0;

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off <= 1e-300) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    eigenvalues.assign(static_cast<size_t>(n), 0.0);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Vec diag(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) diag[i] = A(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return diag[x] > diag[y]; });
    Mat Vs(n, n);
    for (int j = 0; j < n; ++j) {
        eigenvalues[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) Vs(i, j) = V(i, order[j]);
    }
    V = std::move(Vs);
}

}  // namespace latcode
