#pragma once

#include <cstddef>
#include <vector>

namespace latcode {

using Vec = std::vector<double>;

// Dense row-major matrix. Small sizes only; everything here is O(n^3)
// at worst and meant for desk-scale problems.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
    Mat(int r, int c, std::vector<double> data);

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double sqnorm(const Vec& x);
double sqdist(const Vec& x, const Vec& y);

Vec add(const Vec& x, const Vec& y);
Vec sub(const Vec& x, const Vec& y);
Vec scale(const Vec& x, double s);
void axpy(Vec& y, double a, const Vec& x);  // y += a*x

Vec matvec(const Mat& A, const Vec& x);
Vec matTvec(const Mat& A, const Vec& x);  // A^T x

double entrywise_l1(const Mat& A);
double frobenius(const Mat& A);

// Largest singular value by power iteration on A^T A, run to a relative
// tolerance of rel_tol between successive estimates. Deterministic start
// vector. Exact (up to rounding) for rank-0 and 1-column matrices.
double spectral_norm(const Mat& A, double rel_tol = 1e-10);

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
// returned in descending order, eigenvectors as the matching columns of V.
void eigen_sym(const Mat& S, Vec& eigenvalues, Mat& V);

}  // namespace latcode
