#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/bounds.hpp"
#include "core/coding.hpp"
#include "core/config.hpp"
#include "core/maps.hpp"
#include "core/spaces.hpp"

namespace latcode {

// Synthetic source distributions. Everything lands in the data space: the
// continuous kinds are clipped onto it by metric projection, the finite kind
// is validated against it.
struct Distribution {
    enum class Kind { UniformBox, GaussianMixture, Manifold, Finite };

    Kind kind = Kind::UniformBox;

    // gaussian mixture, diagonal covariances
    std::vector<Vec> means;
    std::vector<Vec> cov_diag;
    std::vector<double> component_weights;

    // low-dimensional manifold: a seeded linear embedding with a sine bend,
    // plus isotropic gaussian noise
    int intrinsic_dim = 1;
    double noise = 0.0;

    // finite support
    std::vector<Vec> atoms;
    std::vector<double> atom_weights;

    void check(const DataSpace& space) const;
};

// How the trained family is built. Linear and Dense instantiate a seeded
// dense net inside its budgets and train by alternating minimization; Vq and
// Pca use their dedicated fitters; Model starts from a serialized map.
struct FamilySpec {
    enum class Kind { Linear, Dense, Vq, Pca, Model };

    Kind kind = Kind::Linear;
    std::vector<int> widths;  // dense: w_0..w_l (w_0 = latent dim, w_l = data dim)
    std::vector<Activation> activations;  // per layer; empty = relu hidden, identity last
    BudgetKind budget_kind = BudgetKind::Spectral;
    std::vector<double> budgets;  // per layer, or a single value for all
    double init_scale = 0.5;      // fraction of each budget filled at init
    int vq_k = 0;
    int vq_restarts = 2;
    std::string model_path;
    std::optional<ReconMap> fixed_init;  // in-process alternative to model_path

    bool trains_by_gradient() const {
        return kind == Kind::Linear || kind == Kind::Dense || kind == Kind::Model;
    }
    ReconMap instantiate(int latent_dim, int data_dim, uint64_t master_seed,
                         uint64_t stream_id) const;
    void check() const;
};

struct ExperimentConfig {
    DataSpace space;
    LatentSpace latent;
    Distribution dist;
    FamilySpec family;
    size_t n_train = 100;
    size_t n_test = 1000;
    size_t replications = 1;
    uint64_t seed = 1;
    EncodeStrategy strategy;
    TrainConfig train;
    std::vector<std::string> bound_names;
    bool exact_population = false;  // finite support: tiled train set, exact test risk
    double delta = 0.05;            // confidence level handed to the bounds
    int threads = 1;

    void check() const;
};

struct GapRecord {
    size_t replication = 0;
    bool failed = false;
    std::string failure;
    double train_risk = std::numeric_limits<double>::quiet_NaN();
    double test_risk = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    // Monte Carlo slack of the test estimate: diam^2 sqrt(log(2/delta)/(2 n_test)),
    // zero when the population risk is computed exactly.
    double mc_slack = 0;
    double wall_seconds = 0;
    std::vector<std::pair<std::string, double>> bound_values;
};

struct RateRow {
    double n = 0;
    double median_gap = 0;
    double mean_gap = 0;
    size_t failures = 0;
    std::vector<std::pair<std::string, double>> bound_values;
};

struct RateStudy {
    std::vector<RateRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool slope_defined = false;
};

// Deterministic given (config.seed, stream_id); the draws never depend on
// other streams, so parallel replications cannot reorder them.
Dataset sample(const ExperimentConfig& config, size_t count, uint64_t stream_id);

// Per replication: draw a train set, fit the family, measure train risk and
// a fresh test-set risk, evaluate the requested bounds. Training divergence
// marks the record failed and the run continues. Records are ordered by
// replication id and identical for every thread count.
std::vector<GapRecord> measure_gap(const ExperimentConfig& config);

// measure_gap at each n in the grid plus a least-squares log-log slope of
// the median gap. All-zero or failed medians leave the slope undefined.
RateStudy rate_study(const ExperimentConfig& config, const std::vector<size_t>& n_grid);

// Architecture-driven bound evaluation by name: dense_wide, dense_deep,
// cnn, sigmoid.
std::vector<std::pair<std::string, double>> evaluate_bounds(const std::vector<std::string>& names,
                                                            const ArchitectureSpec& arch, double n,
                                                            double delta);

std::string gap_records_csv(const std::vector<GapRecord>& records);
std::string rate_study_csv(const RateStudy& study);

// Config-file builders (shared by the library surface and the CLI).
DataSpace data_space_from(const Config& cfg, const std::string& prefix = "space");
LatentSpace latent_space_from(const Config& cfg, const std::string& prefix = "latent");
EncodeStrategy encode_strategy_from(const Config& cfg);
TrainConfig train_config_from(const Config& cfg, uint64_t seed);
FamilySpec family_from(const Config& cfg);
Distribution distribution_from(const Config& cfg, int dim);
ExperimentConfig experiment_from(const Config& cfg);

}  // namespace latcode
