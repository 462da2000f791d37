#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/linalg.hpp"
#include "test_util.hpp"

using namespace latcode;

TEST_CASE("vector kernels against hand values") {
    Vec x{1.0, -2.0, 3.0};
    Vec y{0.5, 4.0, -1.0};
    CHECK(dot(x, y) == doctest::Approx(0.5 - 8.0 - 3.0).epsilon(1e-15));
    CHECK(sqnorm(x) == doctest::Approx(14.0).epsilon(1e-15));
    CHECK(norm2(x) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
    CHECK(sqdist(x, y) == doctest::Approx(0.25 + 36.0 + 16.0).epsilon(1e-15));

    Vec z = add(x, y);
    CHECK(z[0] == 1.5);
    CHECK(z[1] == 2.0);
    CHECK(z[2] == 2.0);
    z = sub(x, y);
    CHECK(z[1] == -6.0);
    z = scale(x, -2.0);
    CHECK(z[2] == -6.0);
    z = x;
    axpy(z, 0.5, y);  // z += 0.5 y
    CHECK(z[0] == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("matvec and transpose matvec") {
    Mat A(2, 3, {1, 2, 3, 4, 5, 6});
    Vec h{1, 0, -1};
    Vec out = matvec(A, h);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(-2.0).epsilon(1e-15));

    Vec u{1, 1};
    Vec back = matTvec(A, u);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(back[1] == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(back[2] == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("entrywise l1 and frobenius") {
    Mat A(2, 2, {1, -2, -3, 4});
    CHECK(entrywise_l1(A) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(frobenius(A) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-15));
}

TEST_CASE("spectral norm hand cases") {
    CHECK(spectral_norm(Mat(3, 3, {3, 0, 0, 0, -7, 0, 0, 0, 2})) ==
          doctest::Approx(7.0).epsilon(1e-9));
    // single nonzero column (3,4): operator norm is its length
    CHECK(spectral_norm(Mat(2, 2, {3, 0, 4, 0})) == doctest::Approx(5.0).epsilon(1e-9));
    // rank one u v^T has norm |u||v|
    Vec u{1, 2, 2};  // norm 3
    Vec v{3, 4};     // norm 5
    Mat R(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) R.a[i * 2 + j] = u[i] * v[j];
    CHECK(spectral_norm(R) == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(spectral_norm(Mat(2, 2)) == 0.0);
}

TEST_CASE("spectral norm agrees with the top eigenvalue of A^T A") {
    StreamRng rng = StreamRng::derive(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 2 + static_cast<int>(rng.uniform_int(5));
        const int cols = 2 + static_cast<int>(rng.uniform_int(5));
        Mat A = testutil::rand_mat(rng, rows, cols);
        Mat S(cols, cols);
        for (int i = 0; i < cols; ++i)
            for (int j = 0; j < cols; ++j) {
                double s = 0;
                for (int r = 0; r < rows; ++r) s += A.a[r * cols + i] * A.a[r * cols + j];
                S.a[i * cols + j] = s;
            }
        Vec lam;
        Mat V;
        eigen_sym(S, lam, V);
        const double want = std::sqrt(std::max(0.0, lam[0]));
        CHECK(spectral_norm(A) == doctest::Approx(want).epsilon(1e-8));
        CHECK(spectral_norm(A) <= frobenius(A) + 1e-12);
        // probe lower bound |Ax|/|x|
        Vec x = testutil::rand_vec(rng, cols);
        if (norm2(x) > 1e-9)
            CHECK(spectral_norm(A) + 1e-9 >= norm2(matvec(A, x)) / norm2(x));
    }
}

TEST_CASE("symmetric eigendecomposition") {
    Mat S(2, 2, {2, 1, 1, 2});
    Vec lam;
    Mat V;
    eigen_sym(S, lam, V);
    REQUIRE(lam.size() == 2);
    CHECK(lam[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(lam[1] == doctest::Approx(1.0).epsilon(1e-12));

    StreamRng rng = StreamRng::derive(12);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(5));
        Mat A = testutil::rand_mat(rng, n, n);
        Mat Sym(n, n);
        double trace = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                Sym.a[i * n + j] = 0.5 * (A.a[i * n + j] + A.a[j * n + i]);
        for (int i = 0; i < n; ++i) trace += Sym.a[i * n + i];

        eigen_sym(Sym, lam, V);
        double lam_sum = 0;
        for (double l : lam) lam_sum += l;
        CHECK(lam_sum == doctest::Approx(trace).epsilon(1e-10));
        for (size_t i = 0; i + 1 < lam.size(); ++i) CHECK(lam[i] >= lam[i + 1] - 1e-12);

        // columns of V orthonormal, and S V = V diag(lam)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double g = 0;
                for (int r = 0; r < n; ++r) g += V.a[r * n + i] * V.a[r * n + j];
                CHECK(g == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
                double sv = 0;
                for (int c = 0; c < n; ++c) sv += Sym.a[i * n + c] * V.a[c * n + j];
                CHECK(sv == doctest::Approx(lam[j] * V.a[i * n + j]).epsilon(5e-9));
            }
    }
}
