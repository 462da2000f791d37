#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/maps.hpp"
#include "core/spaces.hpp"

namespace latcode {

// eps -> log covering number. Non-increasing in eps, zero beyond the class
// radius for the closed-form kinds.
struct CoveringFunction {
    enum class Kind { Maurey, Volumetric, Tabulated };

    Kind kind = Kind::Tabulated;
    // maurey
    double M = 0;
    int d_rows = 0, k_cols = 0;
    // volumetric: param_count * log(scale / eps), 0 for eps >= scale
    double param_count = 0, scale = 0;
    // tabulated: (eps, logN) sorted by eps; evaluation picks the last entry
    // with eps_i <= u (first entry below the table's range)
    std::vector<std::pair<double, double>> table;

    static CoveringFunction maurey(double M, int d_rows, int k_cols);
    static CoveringFunction volumetric(double param_count, double scale);
    static CoveringFunction tabulated(std::vector<std::pair<double, double>> entries);

    double log_cover(double eps) const;
};

// ceil(M^2/eps^2) * log(1 + 2 d k eps^2 / M^2) for eps <= M, else 0.
double maurey_logcover(double M, int d_rows, int k_cols, double eps);

// Draws k = ceil(M^2/eps^2) signed scaled basis vectors with mean v and
// averages; retries until the average lands within eps of v.
Vec maurey_sparsify(const Vec& v, double M, double eps, uint64_t seed);

// inf over alpha >= 0 of alpha sqrt(n)/6 + integral_alpha^{diam/2} of
// sqrt(logN(u)) du. Golden section over alpha (the objective is convex),
// adaptive Simpson quadrature for the integral.
double entropy_integral(const CoveringFunction& cover, double diam_Z, double n);
// Same objective at a fixed alpha; alpha = diam/(2 sqrt(n)) reproduces the
// printed theorem constants.
double entropy_integral_at(const CoveringFunction& cover, double diam_Z, double n, double alpha);

struct BoundReport {
    std::string name;
    double value = 0;
    double n = 0, delta = 0;
    bool vacuous = false;  // value > diam^2 when a diameter was supplied
    std::vector<std::pair<std::string, double>> constants;

    double constant(const std::string& key) const;
};

// Architecture summary feeding the bound calculators: widths or channel /
// filter dimensions, per-layer Lipschitz constants and norm budgets,
// optional output-norm bounds, the latent sup-norm and the data diameter.
struct ArchLayer {
    double lipschitz = 1;
    double budget = 1;
    std::optional<double> output_bound;
    bool zizo = true;
    std::vector<int> filter_dims;  // conv only
};

struct ArchitectureSpec {
    enum class Kind { Dense, Conv };

    Kind kind = Kind::Dense;
    std::vector<int> widths;    // dense: w_0..w_l
    std::vector<int> channels;  // conv: v_0..v_l
    std::vector<ArchLayer> layers;
    BudgetKind budget_kind = BudgetKind::EntrywiseL1;
    double latent_max_norm = 1;
    double data_diameter = 1;

    int depth() const { return static_cast<int>(layers.size()); }
    double lm_product() const;
    double m_product() const;
    void check() const;
};

// Summary of a concrete map against its spaces (budgets become the M_j).
ArchitectureSpec arch_of(const ReconMap& f, const LatentSpace& H, const DataSpace& Z);

// Moment-based bound for q > 2, d >= 3:
// C_{q,d} diam moment^{1/q} n^{-1/d} + diam^2 sqrt(2 log(1/delta) / n).
BoundReport bound_thm_wasserstein(double q, int d, double diam_Z, double moment_q, double n,
                                  double delta);
double wasserstein_constant(double q, int d);  // C_{q,d}

// Entropy-integral bound: 96 diam E / sqrt(n) + diam^2 sqrt(2 log(2/delta)/n).
// one_sided swaps 96 for the single-tail 48.
BoundReport bound_thm_complexity(double entropy_int_value, double diam_Z, double n, double delta,
                                 bool one_sided = false);

// Wide dense nets under l1 budgets and ZIZO activations.
BoundReport bound_dense_wide(const ArchitectureSpec& spec, double n, double delta);
// Deep dense nets under spectral budgets.
BoundReport bound_dense_deep(const ArchitectureSpec& spec, double n, double delta);
// Conv nets under filter (1,2)-norm budgets; 1-Lipschitz activations.
BoundReport bound_cnn(const ArchitectureSpec& spec, double n, double delta);
// Nets with layerwise-bounded outputs (sigmoid-type); B_0 = latent sup-norm.
BoundReport bound_sigmoid(const ArchitectureSpec& spec, double n, double delta);

// B (sqrt(d log(C sqrt(n)) / (2n)) + sqrt(log(1/delta) / (2n))) + 2/sqrt(n).
BoundReport bound_lemma21(double B, double d_cover, double C, double n, double delta);

}  // namespace latcode
