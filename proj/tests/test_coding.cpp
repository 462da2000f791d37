#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/coding.hpp"
#include "core/errors.hpp"
#include "test_util.hpp"

using namespace latcode;
using testutil::rand_in_ball;
using testutil::rand_mat;
using testutil::rand_vec;

namespace {

// test-local brute force: best error over an explicit candidate list
double brute_best(const Vec& z, const ReconMap& f, const DataSpace& space,
                  const std::vector<Vec>& candidates) {
    double best = 1e300;
    for (const Vec& h : candidates) best = std::min(best, sqdist(z, eval(f, space, h)));
    return best;
}

}  // namespace

TEST_CASE("exhaustive encode over a finite latent set is exact") {
    StreamRng rng = StreamRng::derive(41);
    DataSpace space = DataSpace::ball(Vec(3, 0.0), 10.0);
    for (int trial = 0; trial < 30; ++trial) {
        LinearMap f{rand_mat(rng, 3, 2)};
        std::vector<Vec> atoms;
        for (int i = 0; i < 5; ++i) atoms.push_back(rand_vec(rng, 2));
        LatentSpace latent = LatentSpace::finite(atoms);
        Vec z = rand_in_ball(rng, space.center, space.radius);

        EncodeResult r = encode(z, f, space, latent, EncodeStrategy::exhaustive(0.1));
        CHECK(r.error == brute_best(z, f, space, atoms));
        CHECK(latent.contains(r.h));
        CHECK(r.error == doctest::Approx(sqdist(z, eval(f, space, r.h))).epsilon(1e-12));
    }
}

TEST_CASE("ties break to the lowest-index candidate") {
    LinearMap f{Mat(1, 1, {1.0})};
    DataSpace space = DataSpace::ball({0.0}, 5.0);
    LatentSpace latent = LatentSpace::finite({{-1.0}, {1.0}});
    EncodeResult r = encode({0.0}, f, space, latent, EncodeStrategy::exhaustive(0.1));
    CHECK(r.h[0] == -1.0);
}

TEST_CASE("refined encode solves the convex linear case") {
    // orthonormal columns: the optimum is h* = A^T z when it fits in the ball
    StreamRng rng = StreamRng::derive(42);
    Mat A(3, 2, {1, 0, 0, 1, 0, 0});
    LinearMap f{A};
    DataSpace space = DataSpace::ball(Vec(3, 0.0), 10.0);
    LatentSpace latent = LatentSpace::ball(2, 2.0);
    EncodeStrategy refined = EncodeStrategy::refined(0.5, 200, 0.2, 3);
    for (int trial = 0; trial < 20; ++trial) {
        Vec z = rand_vec(rng, 3, 1.5);
        const double want = z[2] * z[2];  // residual off the column span
        EncodeResult r = encode(z, f, space, latent, refined);
        CHECK(r.error <= want + 1e-6);
        CHECK(r.error >= want - 1e-9);  // cannot beat the true optimum
        CHECK(r.h[0] == doctest::Approx(z[0]).epsilon(1e-3));
    }
}

TEST_CASE("refined never loses to the exhaustive net") {
    StreamRng rng = StreamRng::derive(43);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 4.0);
    LatentSpace latent = LatentSpace::ball(2, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        DenseNet net = testutil::rand_dense(rng, {2, 4, 2},
                                            {Activation::tanh(), Activation::identity()},
                                            BudgetKind::Spectral);
        ReconMap f = net;
        Vec z = rand_in_ball(rng, space.center, space.radius);
        EncodeResult coarse = encode(z, f, space, latent, EncodeStrategy::exhaustive(0.3));
        EncodeResult polished = encode(z, f, space, latent, EncodeStrategy::refined(0.3, 40, 0.1, 2));
        CHECK(polished.error <= coarse.error + 1e-12);
    }
}

TEST_CASE("empirical risk is the mean encode error") {
    StreamRng rng = StreamRng::derive(44);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 6.0);
    LinearMap f{rand_mat(rng, 2, 2)};
    std::vector<Vec> atoms;
    for (int i = 0; i < 4; ++i) atoms.push_back(rand_vec(rng, 2));
    LatentSpace latent = LatentSpace::finite(atoms);

    std::vector<Vec> pts;
    for (int i = 0; i < 37; ++i) pts.push_back(rand_in_ball(rng, space.center, space.radius));
    Dataset data(space, pts);

    double want = 0;
    for (const Vec& z : pts) want += brute_best(z, f, space, atoms);
    want /= pts.size();

    const double got = empirical_risk(f, data, latent, EncodeStrategy::exhaustive(0.1));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("risk reduction is independent of the thread count") {
    StreamRng rng = StreamRng::derive(45);
    DataSpace space = DataSpace::ball(Vec(3, 0.0), 3.0);
    LatentSpace latent = LatentSpace::ball(2, 1.0);
    DenseNet net = testutil::rand_dense(rng, {2, 3, 3},
                                        {Activation::relu(), Activation::identity()},
                                        BudgetKind::Spectral);
    ReconMap f = net;
    std::vector<Vec> pts;
    for (int i = 0; i < 301; ++i) pts.push_back(rand_in_ball(rng, space.center, space.radius));
    Dataset data(space, pts);
    EncodeStrategy strat = EncodeStrategy::exhaustive(0.4);

    const double r1 = empirical_risk(f, data, latent, strat, 1);
    const double r3 = empirical_risk(f, data, latent, strat, 3);
    const double r8 = empirical_risk(f, data, latent, strat, 8);
    CHECK(r1 == r3);  // bitwise: fixed chunk reduction
    CHECK(r1 == r8);
}

TEST_CASE("weighted risk matches the hand sum") {
    DataSpace space = DataSpace::ball({0.0}, 4.0);
    LinearMap f{Mat(1, 1, {1.0})};
    LatentSpace latent = LatentSpace::finite({{0.0}, {2.0}});
    DiscreteMeasure P({{0.0}, {1.0}, {3.0}}, {0.5, 0.25, 0.25});
    // errors: 0 -> 0, 1 -> min(1,1) = 1, 3 -> min(9,1) = 1
    const double got = weighted_risk(f, space, P, latent, EncodeStrategy::exhaustive(0.1));
    CHECK(got == doctest::Approx(0.5 * 0.0 + 0.25 * 1.0 + 0.25 * 1.0).epsilon(1e-15));
}

TEST_CASE("pca matches the eigenvalue residual and beats random isometries") {
    StreamRng rng = StreamRng::derive(46);
    DataSpace space = DataSpace::ball(Vec(4, 0.0), 8.0);
    std::vector<Vec> pts;
    for (int i = 0; i < 120; ++i) {
        // energy concentrated on the first two axes
        Vec z{3.0 * rng.uniform(-1, 1), 2.0 * rng.uniform(-1, 1), 0.3 * rng.uniform(-1, 1),
              0.1 * rng.uniform(-1, 1)};
        pts.push_back(std::move(z));
    }
    Dataset data(space, pts);
    PcaResult pca = fit_pca(data, 2);

    // orthonormal columns
    const Mat& A = pca.map.A;
    REQUIRE(A.rows == 4);
    REQUIRE(A.cols == 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double g = 0;
            for (int r = 0; r < 4; ++r) g += A(r, i) * A(r, j);
            CHECK(g == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
        }

    // risk equals the residual spectrum of the second-moment matrix
    REQUIRE(pca.eigenvalues.size() == 4);
    CHECK(pca.risk == doctest::Approx(pca.eigenvalues[2] + pca.eigenvalues[3]).epsilon(1e-10));

    // and equals the mean projection residual computed directly
    double resid = 0;
    for (const Vec& z : pts) {
        Vec c = matTvec(A, z);
        resid += sqnorm(z) - sqnorm(c);
    }
    resid /= pts.size();
    CHECK(pca.risk == doctest::Approx(resid).epsilon(1e-9));

    // no random isometry does better (closed-form risk, no encoder needed)
    for (int t = 0; t < 25; ++t) {
        Mat G = rand_mat(rng, 4, 2, 1.0);
        // Gram-Schmidt
        for (int j = 0; j < 2; ++j) {
            for (int i = 0; i < j; ++i) {
                double g = 0;
                for (int r = 0; r < 4; ++r) g += G(r, i) * G(r, j);
                for (int r = 0; r < 4; ++r) G(r, j) -= g * G(r, i);
            }
            double nn = 0;
            for (int r = 0; r < 4; ++r) nn += G(r, j) * G(r, j);
            nn = std::sqrt(nn);
            for (int r = 0; r < 4; ++r) G(r, j) /= nn;
        }
        double risk_g = 0;
        for (const Vec& z : pts) risk_g += sqnorm(z) - sqnorm(matTvec(G, z));
        risk_g /= pts.size();
        CHECK(risk_g >= pca.risk - 1e-9);
    }
}

TEST_CASE("vq lloyd solves easy clusterings") {
    // k distinct points, k centroids: zero risk
    DataSpace space = DataSpace::box({-5.0, -5.0}, {5.0, 5.0});
    Dataset tiny(space, {{0.0, 0.0}, {4.0, 4.0}, {-4.0, 2.0}});
    VqResult exact = fit_vq_lloyd(tiny, 3, 7, 4);
    CHECK(exact.risk == doctest::Approx(0.0).epsilon(1e-12));

    // k = 1: centroid is the mean, risk the variance
    Dataset pair(space, {{1.0, 0.0}, {3.0, 0.0}});
    VqResult one = fit_vq_lloyd(pair, 1, 7);
    CHECK(one.map.A(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(one.risk == doctest::Approx(1.0).epsilon(1e-12));

    // two well-separated clusters: oracle optimum by enumerating 2-partitions
    StreamRng rng = StreamRng::derive(47);
    std::vector<Vec> pts;
    for (int i = 0; i < 4; ++i) pts.push_back({rng.uniform(-0.5, 0.5), rng.uniform(3.5, 4.5)});
    for (int i = 0; i < 4; ++i) pts.push_back({rng.uniform(3.5, 4.5), rng.uniform(-0.5, 0.5)});
    Dataset data(space, pts);
    double best = 1e300;
    for (int mask = 1; mask < (1 << 8) - 1; ++mask) {
        Vec c0(2, 0.0), c1(2, 0.0);
        int n0 = 0, n1 = 0;
        for (int i = 0; i < 8; ++i)
            if (mask & (1 << i)) { axpy(c0, 1.0, pts[i]); ++n0; }
            else { axpy(c1, 1.0, pts[i]); ++n1; }
        for (double& x : c0) x /= n0;
        for (double& x : c1) x /= n1;
        double cost = 0;
        for (int i = 0; i < 8; ++i)
            cost += sqdist(pts[i], (mask & (1 << i)) ? c0 : c1);
        best = std::min(best, cost / 8);
    }
    VqResult vq = fit_vq_lloyd(data, 2, 11, 6);
    CHECK(vq.risk == doctest::Approx(best).epsilon(1e-9));

    // the trace of lloyd iterations never increases
    for (size_t i = 0; i + 1 < vq.trace.size(); ++i) CHECK(vq.trace[i + 1] <= vq.trace[i] + 1e-12);

    // vq risk equals the coding risk of the centroid map over the basis codebook
    const double risk2 = empirical_risk(vq.map, data, LatentSpace::basis(2),
                                        EncodeStrategy::exhaustive(0.1));
    CHECK(risk2 == doctest::Approx(vq.risk).epsilon(1e-12));
}

TEST_CASE("lloyd_from refines explicit centroids") {
    DataSpace space = DataSpace::box({-5.0}, {5.0});
    Dataset data(space, {{-2.0}, {-1.0}, {1.0}, {2.0}});
    VqResult r = lloyd_from(data, {{-3.0}, {3.0}});
    CHECK(r.map.A(0, 0) == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(r.map.A(0, 1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r.risk == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("erm training lowers the risk and keeps a monotone trace") {
    StreamRng rng = StreamRng::derive(48);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 3.0);
    LatentSpace latent = LatentSpace::ball(1, 1.0);
    // data along a fixed direction: a linear map can fit it well
    std::vector<Vec> pts;
    for (int i = 0; i < 60; ++i) {
        const double t = rng.uniform(-1, 1);
        pts.push_back({2.0 * t, 1.0 * t});
    }
    Dataset data(space, pts);

    DenseNet init = testutil::rand_dense(rng, {1, 2}, {Activation::identity()},
                                         BudgetKind::Spectral, 0.3);
    init.layers[0].budget = 4.0;
    TrainConfig cfg;
    cfg.outer_iterations = 12;
    cfg.latent_strategy = EncodeStrategy::refined(0.2, 25, 0.1, 1);
    cfg.param_step_size = 0.2;
    cfg.param_steps_per_outer = 8;
    cfg.seed = 5;

    TrainResult r = erm_train(init, data, latent, cfg);
    REQUIRE(r.trace.size() == 13);  // initial risk + one per outer iteration
    for (size_t i = 0; i + 1 < r.trace.size(); ++i) CHECK(r.trace[i + 1] <= r.trace[i] + 1e-9);
    CHECK(r.trace.back() < 0.5 * r.trace.front());
    validate(r.map);  // budgets still hold after training
}

TEST_CASE("excess risk bound holds on a trained candidate set") {
    StreamRng rng = StreamRng::derive(49);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 2.0);
    LatentSpace latent = LatentSpace::finite({{-1.0}, {0.0}, {1.0}});
    std::vector<Vec> tr, te;
    for (int i = 0; i < 40; ++i) tr.push_back(rand_in_ball(rng, space.center, space.radius));
    for (int i = 0; i < 40; ++i) te.push_back(rand_in_ball(rng, space.center, space.radius));
    Dataset train(space, tr), test(space, te);

    LinearMap a{rand_mat(rng, 2, 1)};
    LinearMap b{rand_mat(rng, 2, 1)};
    LinearMap c{rand_mat(rng, 2, 1)};
    ReconMap ra = a, rb = b, rc = c;
    EncodeStrategy strat = EncodeStrategy::exhaustive(0.1);

    // pick the empirical minimizer as f_hat so the bound applies
    const ReconMap* cands[] = {&ra, &rb, &rc};
    const ReconMap* fhat = cands[0];
    double best = 1e300;
    for (const ReconMap* f : cands) {
        const double risk = empirical_risk(*f, train, latent, strat);
        if (risk < best) { best = risk; fhat = f; }
    }
    ExcessRiskReport rep = excess_risk_check(*fhat, {&ra, &rb, &rc}, train, test, latent, strat);
    CHECK(rep.fhat_minimizes_train);
    CHECK(rep.inequality_holds);
    CHECK(rep.excess <= rep.twice_sup_gap + 1e-9);
}

TEST_CASE("chunked loops cover every index once") {
    std::vector<int> hits(1003, 0);
    for_chunks(1003, 4, [&](int lo, int hi, int) {
        for (int i = lo; i < hi; ++i) ++hits[i];
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(chunk_count(1003) == (1003 + 63) / 64);
}

TEST_CASE("strategy validation") {
    CHECK_THROWS_AS(EncodeStrategy::exhaustive(0.0).check(), ValidationError);
    CHECK_THROWS_AS(EncodeStrategy::refined(0.1, -1, 0.1, 1).check(), ValidationError);
    TrainConfig bad;
    bad.outer_iterations = -1;
    CHECK_THROWS_AS(bad.check(), ValidationError);
}
