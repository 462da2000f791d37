#pragma once
// Shared fuzzing helpers for the test suites.
#include <algorithm>
#include <cmath>
#include <vector>

#include "core/linalg.hpp"
#include "core/maps.hpp"
#include "core/rng.hpp"
#include "core/spaces.hpp"

namespace testutil {

using latcode::Activation;
using latcode::BudgetKind;
using latcode::DenseLayer;
using latcode::DenseNet;
using latcode::Mat;
using latcode::StreamRng;
using latcode::Vec;

inline Vec rand_vec(StreamRng& rng, int n, double scale = 1.0) {
    Vec v(n);
    for (double& x : v) x = scale * rng.uniform(-1.0, 1.0);
    return v;
}

inline Mat rand_mat(StreamRng& rng, int rows, int cols, double scale = 1.0) {
    Mat A(rows, cols);
    for (double& x : A.a) x = scale * rng.uniform(-1.0, 1.0);
    return A;
}

inline double norm_for(const Mat& A, BudgetKind kind) {
    return kind == BudgetKind::EntrywiseL1 ? latcode::entrywise_l1(A) : latcode::spectral_norm(A);
}

// Random net whose budgets hold with a 25% margin (so validate passes and
// rescale_to_budgets is a no-op).
inline DenseNet rand_dense(StreamRng& rng, const std::vector<int>& widths,
                           const std::vector<Activation>& acts, BudgetKind kind,
                           double scale = 1.0) {
    DenseNet net;
    for (size_t j = 0; j + 1 < widths.size(); ++j) {
        DenseLayer layer;
        layer.A = rand_mat(rng, widths[j + 1], widths[j], scale);
        layer.act = acts.size() == 1 ? acts[0] : acts.at(j);
        layer.budget_kind = kind;
        layer.budget = std::max(norm_for(layer.A, kind) * 1.25, 0.1);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

// Point drawn uniformly from the ball by rejection from its bounding box.
inline Vec rand_in_ball(StreamRng& rng, const Vec& center, double radius) {
    const int d = static_cast<int>(center.size());
    for (;;) {
        Vec x = rand_vec(rng, d, radius);
        if (latcode::sqnorm(x) <= radius * radius) {
            for (int i = 0; i < d; ++i) x[i] += center[i];
            return x;
        }
    }
}

}  // namespace testutil
