#include "core/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace latcode {

namespace {

bool near_one(double s) { return std::abs(s - 1.0) <= 1e-9; }

}  // namespace

void Distribution::check(const DataSpace& space) const {
    switch (kind) {
        case Kind::UniformBox:
            if (space.kind != DataSpace::Kind::Box)
                throw ValidationError("uniform-box sampling needs a box data space");
            break;
        case Kind::GaussianMixture: {
            if (means.empty()) throw ValidationError("gaussian mixture needs at least one component");
            if (cov_diag.size() != means.size() || component_weights.size() != means.size())
                throw ValidationError("gaussian mixture needs matching means, covariances, weights");
            double total = 0;
            for (size_t c = 0; c < means.size(); ++c) {
                if (static_cast<int>(means[c].size()) != space.dim ||
                    static_cast<int>(cov_diag[c].size()) != space.dim)
                    throw ValidationError("gaussian mixture component dimension mismatch");
                for (double v : cov_diag[c])
                    if (!(v >= 0)) throw ValidationError("gaussian variances must be >= 0");
                if (!(component_weights[c] > 0))
                    throw ValidationError("gaussian component weights must be positive");
                total += component_weights[c];
            }
            if (!near_one(total))
                throw ValidationError("gaussian component weights must sum to one");
            break;
        }
        case Kind::Manifold:
            if (intrinsic_dim < 1) throw ValidationError("manifold intrinsic dimension must be >= 1");
            if (!(noise >= 0)) throw ValidationError("manifold noise must be >= 0");
            break;
        case Kind::Finite: {
            if (atoms.empty()) throw ValidationError("finite distribution needs atoms");
            if (atom_weights.size() != atoms.size())
                throw ValidationError("finite distribution needs one weight per atom");
            double total = 0;
            for (size_t i = 0; i < atoms.size(); ++i) {
                if (static_cast<int>(atoms[i].size()) != space.dim)
                    throw ValidationError("finite distribution atom dimension mismatch");
                if (!space.contains(atoms[i])) {
                    std::ostringstream msg;
                    msg << "finite distribution atom " << i << " lies outside " << space.describe();
                    throw ValidationError(msg.str());
                }
                if (!(atom_weights[i] > 0))
                    throw ValidationError("finite distribution weights must be positive");
                total += atom_weights[i];
            }
            if (!near_one(total)) throw ValidationError("finite distribution weights must sum to one");
            break;
        }
    }
}

void FamilySpec::check() const {
    if (!(init_scale > 0) || !(init_scale <= 1))
        throw ValidationError("family init_scale must lie in (0, 1]");
    switch (kind) {
        case Kind::Linear:
            if (budgets.size() != 1 || !(budgets[0] > 0))
                throw ValidationError("linear family needs exactly one positive budget");
            if (budget_kind == BudgetKind::Filter12)
                throw ValidationError("filter budgets only apply to conv layers");
            break;
        case Kind::Dense: {
            if (widths.size() < 2) throw ValidationError("dense family needs widths w_0..w_l");
            for (int w : widths)
                if (w < 1) throw ValidationError("dense family widths must be positive");
            const size_t ell = widths.size() - 1;
            if (budgets.size() != 1 && budgets.size() != ell)
                throw ValidationError("dense family needs one budget per layer (or one for all)");
            for (double b : budgets)
                if (!(b > 0)) throw ValidationError("dense family budgets must be positive");
            if (!activations.empty() && activations.size() != 1 && activations.size() != ell)
                throw ValidationError("dense family needs one activation per layer (or one for all)");
            if (budget_kind == BudgetKind::Filter12)
                throw ValidationError("filter budgets only apply to conv layers");
            break;
        }
        case Kind::Vq:
            if (vq_k < 1) throw ValidationError("vq family needs k >= 1 codewords");
            if (vq_restarts < 1) throw ValidationError("vq family needs restarts >= 1");
            break;
        case Kind::Pca:
            break;
        case Kind::Model:
            if (model_path.empty() && !fixed_init)
                throw ValidationError("model family needs a model file");
            break;
    }
}

ReconMap FamilySpec::instantiate(int latent_dim_, int data_dim, uint64_t master_seed,
                                 uint64_t stream_id) const {
    check();
    if (kind == Kind::Vq || kind == Kind::Pca)
        throw ValidationError("vq/pca families are fitted directly, not instantiated");
    if (kind == Kind::Model) {
        ReconMap f = fixed_init ? *fixed_init : map_load(model_path);
        if (latent_dim(f) != latent_dim_ || output_dim(f) != data_dim)
            throw ValidationError("model dimensions do not match the configured spaces");
        return f;
    }

    std::vector<int> ws = kind == Kind::Linear ? std::vector<int>{latent_dim_, data_dim} : widths;
    if (ws.front() != latent_dim_)
        throw ValidationError("family input width must equal the latent dimension");
    if (ws.back() != data_dim)
        throw ValidationError("family output width must equal the data dimension");
    const size_t ell = ws.size() - 1;

    DenseNet net;
    for (size_t j = 0; j < ell; ++j) {
        DenseLayer layer;
        layer.A = Mat(ws[j + 1], ws[j]);
        if (kind == Kind::Linear) {
            layer.act = Activation::identity();
        } else if (activations.empty()) {
            layer.act = j + 1 < ell ? Activation::relu() : Activation::identity();
        } else {
            layer.act = activations.size() == 1 ? activations[0] : activations[j];
        }
        layer.budget_kind = budget_kind;
        layer.budget = budgets.size() == 1 ? budgets[0] : budgets[j];

        StreamRng rng = StreamRng::derive(master_seed, 0x696e6974, stream_id, j);
        for (double& w : layer.A.a) w = rng.gaussian();
        double norm = layer.budget_kind == BudgetKind::Spectral ? spectral_norm(layer.A)
                                                                : entrywise_l1(layer.A);
        double target = init_scale * layer.budget;
        if (norm > 0) {
            double s = target / norm;
            for (double& w : layer.A.a) w *= s;
        }
        net.layers.push_back(std::move(layer));
    }
    ReconMap f = net;
    validate(f);
    return f;
}

void ExperimentConfig::check() const {
    if (space.dim < 1) throw ValidationError("experiment needs a data space");
    if (latent.dim < 1 && family.kind != FamilySpec::Kind::Vq)
        throw ValidationError("experiment needs a latent space");
    dist.check(space);
    family.check();
    if (n_train < 1 || n_test < 1 || replications < 1)
        throw ValidationError("n_train, n_test, replications must all be >= 1");
    strategy.check();
    train.check();
    if (threads < 1) throw ValidationError("threads must be >= 1");
    if (!(delta > 0) || !(delta < 1)) throw ValidationError("delta must lie in (0, 1)");
    if (exact_population) {
        if (dist.kind != Distribution::Kind::Finite)
            throw ValidationError("exact_population needs a finite-support distribution");
        for (double w : dist.atom_weights)
            if (std::abs(w - dist.atom_weights[0]) > 1e-12)
                throw ValidationError("exact_population tiling needs uniform atom weights");
        if (n_train % dist.atoms.size() != 0)
            throw ValidationError("exact_population needs n_train divisible by the atom count");
    }
}

namespace {

// Fixed embedding for the manifold kind, derived from the master seed alone
// so every stream sees the same shape.
struct ManifoldShape {
    Mat A, B;
    Vec center, half;

    ManifoldShape(const ExperimentConfig& cfg) {
        const int d = cfg.space.dim, m = cfg.dist.intrinsic_dim;
        StreamRng rng = StreamRng::derive(cfg.seed, 0x6d616e69, 0, 0);
        A = Mat(d, m);
        B = Mat(d, m);
        const double s = 1.0 / std::sqrt(static_cast<double>(m));
        for (double& v : A.a) v = rng.gaussian() * s;
        for (double& v : B.a) v = rng.gaussian() * s;
        if (cfg.space.kind == DataSpace::Kind::Ball) {
            center = cfg.space.center;
            half.assign(d, cfg.space.radius);
        } else {
            center.resize(d);
            half.resize(d);
            for (int j = 0; j < d; ++j) {
                center[j] = 0.5 * (cfg.space.lower[j] + cfg.space.upper[j]);
                half[j] = 0.5 * (cfg.space.upper[j] - cfg.space.lower[j]);
            }
        }
    }

    Vec draw(StreamRng& rng, double noise) const {
        Vec h(A.cols);
        for (double& x : h) x = rng.uniform(-1.0, 1.0);
        Vec lin = matvec(A, h), bend = matvec(B, h);
        Vec z(A.rows);
        for (int j = 0; j < A.rows; ++j)
            z[j] = center[j] + 0.5 * half[j] * (lin[j] + 0.3 * std::sin(2.0 * bend[j]));
        if (noise > 0)
            for (double& x : z) x += noise * rng.gaussian();
        return z;
    }
};

size_t pick_index(StreamRng& rng, const std::vector<double>& weights) {
    double r = rng.uniform01(), cum = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (r < cum) return i;
    }
    return weights.size() - 1;
}

}  // namespace

Dataset sample(const ExperimentConfig& config, size_t count, uint64_t stream_id) {
    config.check();
    StreamRng rng = StreamRng::derive(config.seed, 0x64617461, stream_id, 0);
    std::vector<Vec> pts;
    pts.reserve(count);
    switch (config.dist.kind) {
        case Distribution::Kind::UniformBox:
            for (size_t i = 0; i < count; ++i) {
                Vec z(config.space.dim);
                for (int j = 0; j < config.space.dim; ++j)
                    z[j] = rng.uniform(config.space.lower[j], config.space.upper[j]);
                pts.push_back(std::move(z));
            }
            break;
        case Distribution::Kind::GaussianMixture:
            for (size_t i = 0; i < count; ++i) {
                size_t c = pick_index(rng, config.dist.component_weights);
                Vec z(config.space.dim);
                for (int j = 0; j < config.space.dim; ++j)
                    z[j] = config.dist.means[c][j] +
                           std::sqrt(config.dist.cov_diag[c][j]) * rng.gaussian();
                pts.push_back(config.space.project(z));
            }
            break;
        case Distribution::Kind::Manifold: {
            ManifoldShape shape(config);
            for (size_t i = 0; i < count; ++i)
                pts.push_back(config.space.project(shape.draw(rng, config.dist.noise)));
            break;
        }
        case Distribution::Kind::Finite:
            for (size_t i = 0; i < count; ++i)
                pts.push_back(config.dist.atoms[pick_index(rng, config.dist.atom_weights)]);
            break;
    }
    return Dataset(config.space, std::move(pts));
}

std::vector<std::pair<std::string, double>> evaluate_bounds(const std::vector<std::string>& names,
                                                            const ArchitectureSpec& arch, double n,
                                                            double delta) {
    std::vector<std::pair<std::string, double>> out;
    for (const std::string& name : names) {
        BoundReport r;
        if (name == "dense_wide")
            r = bound_dense_wide(arch, n, delta);
        else if (name == "dense_deep")
            r = bound_dense_deep(arch, n, delta);
        else if (name == "cnn")
            r = bound_cnn(arch, n, delta);
        else if (name == "sigmoid")
            r = bound_sigmoid(arch, n, delta);
        else
            throw ValidationError("unknown bound '" + name +
                                  "' (supported: dense_wide, dense_deep, cnn, sigmoid)");
        out.emplace_back(name, r.value);
    }
    return out;
}

namespace {

Dataset tiled_train_set(const ExperimentConfig& config) {
    std::vector<Vec> pts;
    pts.reserve(config.n_train);
    for (size_t i = 0; i < config.n_train; ++i)
        pts.push_back(config.dist.atoms[i % config.dist.atoms.size()]);
    return Dataset(config.space, std::move(pts));
}

void run_replication(const ExperimentConfig& config, size_t rep, int inner_threads,
                     GapRecord& rec) {
    rec.replication = rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const uint64_t base_stream = rep * 4;
        Dataset train = config.exact_population ? tiled_train_set(config)
                                                : sample(config, config.n_train, base_stream);

        ReconMap fitted = LinearMap{Mat(1, 1)};
        LatentSpace latent = config.latent;
        switch (config.family.kind) {
            case FamilySpec::Kind::Vq: {
                uint64_t s = StreamRng::derive(config.seed, 0x7671, rep, 0).next_u64();
                VqResult r = fit_vq_lloyd(train, config.family.vq_k, s, config.family.vq_restarts);
                fitted = r.map;
                latent = LatentSpace::basis(config.family.vq_k);
                break;
            }
            case FamilySpec::Kind::Pca: {
                PcaResult r = fit_pca(train, config.latent.dim);
                fitted = r.map;
                break;
            }
            default: {
                ReconMap init = config.family.instantiate(config.latent.dim, config.space.dim,
                                                          config.seed, base_stream + 2);
                TrainConfig tcfg = config.train;
                tcfg.seed = StreamRng::derive(config.seed, 0x7472, rep, 0).next_u64();
                TrainResult r = erm_train(std::move(init), train, latent, tcfg, inner_threads);
                fitted = std::move(r.map);
                break;
            }
        }

        rec.train_risk = empirical_risk(fitted, train, latent, config.strategy, inner_threads);
        if (config.exact_population) {
            DiscreteMeasure population(config.dist.atoms, config.dist.atom_weights);
            rec.test_risk = weighted_risk(fitted, config.space, population, latent,
                                          config.strategy, inner_threads);
            rec.mc_slack = 0;
        } else {
            Dataset test = sample(config, config.n_test, base_stream + 1);
            rec.test_risk = empirical_risk(fitted, test, latent, config.strategy, inner_threads);
            const double diam = config.space.diameter();
            rec.mc_slack = diam * diam *
                           std::sqrt(std::log(2.0 / config.delta) /
                                     (2.0 * static_cast<double>(config.n_test)));
        }
        rec.gap = std::abs(rec.train_risk - rec.test_risk);
        if (!config.bound_names.empty()) {
            ArchitectureSpec arch = arch_of(fitted, latent, config.space);
            rec.bound_values = evaluate_bounds(config.bound_names, arch,
                                               static_cast<double>(config.n_train), config.delta);
        }
    } catch (const NumericError& e) {
        rec.failed = true;
        rec.failure = e.what();
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<GapRecord> measure_gap(const ExperimentConfig& config) {
    config.check();
    const size_t reps = config.replications;
    std::vector<GapRecord> records(reps);
    const size_t nthreads = std::min(static_cast<size_t>(std::max(1, config.threads)), reps);
    const int inner = reps == 1 ? std::max(1, config.threads) : 1;

    if (nthreads <= 1) {
        for (size_t rep = 0; rep < reps; ++rep)
            run_replication(config, rep, inner, records[rep]);
        return records;
    }

    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    for (size_t t = 0; t < nthreads; ++t) {
        workers.emplace_back([&] {
            while (true) {
                size_t rep = next.fetch_add(1);
                if (rep >= reps) return;
                run_replication(config, rep, 1, records[rep]);
            }
        });
    }
    for (auto& w : workers) w.join();
    return records;
}

RateStudy rate_study(const ExperimentConfig& config, const std::vector<size_t>& n_grid) {
    config.check();
    if (n_grid.empty()) throw ValidationError("rate study needs a nonempty n grid");
    for (size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw ValidationError("rate study n grid must be strictly increasing");

    RateStudy out;
    for (size_t n : n_grid) {
        ExperimentConfig cfg = config;
        cfg.n_train = n;
        // fresh streams per grid point so draws at different n are independent
        cfg.seed = StreamRng::derive(config.seed, 0x72617465, n, 0).next_u64();
        std::vector<GapRecord> records = measure_gap(cfg);

        RateRow row;
        row.n = static_cast<double>(n);
        std::vector<double> gaps;
        double sum = 0;
        for (const GapRecord& rec : records) {
            if (rec.failed) {
                ++row.failures;
                continue;
            }
            gaps.push_back(rec.gap);
            sum += rec.gap;
            if (row.bound_values.empty()) row.bound_values = rec.bound_values;
        }
        if (gaps.empty()) {
            row.median_gap = row.mean_gap = std::numeric_limits<double>::quiet_NaN();
        } else {
            std::sort(gaps.begin(), gaps.end());
            const size_t m = gaps.size();
            row.median_gap = m % 2 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
            row.mean_gap = sum / static_cast<double>(m);
        }
        out.rows.push_back(std::move(row));
    }

    // log-log least squares on rows with a positive finite median
    std::vector<double> xs, ys;
    for (const RateRow& row : out.rows) {
        if (std::isfinite(row.median_gap) && row.median_gap > 0) {
            xs.push_back(std::log(row.n));
            ys.push_back(std::log(row.median_gap));
        }
    }
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= xs.size();
        my /= ys.size();
        double sxx = 0, sxy = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if (sxx > 0) {
            out.slope = sxy / sxx;
            out.slope_defined = std::isfinite(out.slope);
        }
    }
    return out;
}

std::string gap_records_csv(const std::vector<GapRecord>& records) {
    std::vector<std::string> header = {"replication", "failed",   "train_risk",
                                       "test_risk",   "gap",      "mc_slack"};
    std::vector<std::string> bound_names;
    for (const GapRecord& rec : records)
        if (!rec.bound_values.empty()) {
            for (const auto& [name, value] : rec.bound_values)
                bound_names.push_back("bound_" + name);
            break;
        }
    header.insert(header.end(), bound_names.begin(), bound_names.end());

    std::vector<Vec> rows;
    rows.reserve(records.size());
    for (const GapRecord& rec : records) {
        Vec row = {static_cast<double>(rec.replication),
                   rec.failed ? 1.0 : 0.0,
                   rec.train_risk,
                   rec.test_risk,
                   rec.gap,
                   rec.mc_slack};
        for (size_t b = 0; b < bound_names.size(); ++b)
            row.push_back(b < rec.bound_values.size() ? rec.bound_values[b].second
                                                      : std::numeric_limits<double>::quiet_NaN());
        rows.push_back(std::move(row));
    }
    return csv_format(rows, header);
}

std::string rate_study_csv(const RateStudy& study) {
    std::vector<std::string> header = {"n", "median_gap", "mean_gap", "failures"};
    std::vector<std::string> bound_names;
    for (const RateRow& row : study.rows)
        if (!row.bound_values.empty()) {
            for (const auto& [name, value] : row.bound_values)
                bound_names.push_back("bound_" + name);
            break;
        }
    header.insert(header.end(), bound_names.begin(), bound_names.end());

    std::vector<Vec> rows;
    rows.reserve(study.rows.size());
    for (const RateRow& r : study.rows) {
        Vec row = {r.n, r.median_gap, r.mean_gap, static_cast<double>(r.failures)};
        for (size_t b = 0; b < bound_names.size(); ++b)
            row.push_back(b < r.bound_values.size() ? r.bound_values[b].second
                                                    : std::numeric_limits<double>::quiet_NaN());
        rows.push_back(std::move(row));
    }
    return csv_format(rows, header);
}

namespace {

std::vector<int> as_int_list(const Config& cfg, const std::string& key) {
    std::vector<int> out;
    for (double x : cfg.get_num_list(key)) {
        if (x != std::floor(x) || std::abs(x) > 1e9)
            throw ValidationError("config key '" + key + "' needs integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

std::vector<Vec> as_points(const Config& cfg, const std::string& key, int dim) {
    std::vector<double> flat = cfg.get_num_list(key);
    if (flat.empty() || flat.size() % dim != 0)
        throw ValidationError("config key '" + key + "' needs a multiple of " +
                              std::to_string(dim) + " values");
    std::vector<Vec> pts;
    for (size_t i = 0; i < flat.size(); i += dim)
        pts.emplace_back(flat.begin() + i, flat.begin() + i + dim);
    return pts;
}

BudgetKind budget_kind_from(const std::string& name) {
    if (name == "entrywise_l1") return BudgetKind::EntrywiseL1;
    if (name == "spectral") return BudgetKind::Spectral;
    if (name == "filter_12") return BudgetKind::Filter12;
    throw ValidationError("unknown budget kind '" + name +
                          "' (expected entrywise_l1, spectral, filter_12)");
}

}  // namespace

DataSpace data_space_from(const Config& cfg, const std::string& prefix) {
    const std::string kind = cfg.get_str(prefix + ".kind");
    if (kind == "ball") {
        const double radius = cfg.get_num(prefix + ".radius");
        Vec center;
        if (cfg.has(prefix + ".center")) {
            center = cfg.get_num_list(prefix + ".center");
        } else {
            center.assign(static_cast<size_t>(cfg.get_int(prefix + ".dim")), 0.0);
        }
        return DataSpace::ball(std::move(center), radius);
    }
    if (kind == "box") {
        return DataSpace::box(cfg.get_num_list(prefix + ".lower"),
                              cfg.get_num_list(prefix + ".upper"));
    }
    throw ValidationError("config key '" + prefix + ".kind' must be ball or box");
}

LatentSpace latent_space_from(const Config& cfg, const std::string& prefix) {
    const std::string kind = cfg.get_str(prefix + ".kind");
    if (kind == "ball")
        return LatentSpace::ball(static_cast<int>(cfg.get_int(prefix + ".dim")),
                                 cfg.get_num(prefix + ".radius"));
    if (kind == "box")
        return LatentSpace::box(cfg.get_num_list(prefix + ".lower"),
                                cfg.get_num_list(prefix + ".upper"));
    if (kind == "basis") return LatentSpace::basis(static_cast<int>(cfg.get_int(prefix + ".k")));
    if (kind == "finite") {
        const int dim = static_cast<int>(cfg.get_int(prefix + ".dim"));
        if (dim < 1) throw ValidationError("config key '" + prefix + ".dim' must be >= 1");
        return LatentSpace::finite(as_points(cfg, prefix + ".points", dim));
    }
    throw ValidationError("config key '" + prefix + ".kind' must be ball, box, finite, or basis");
}

EncodeStrategy encode_strategy_from(const Config& cfg) {
    const std::string kind = cfg.get_str("encode.strategy", "exhaustive");
    const double eps = cfg.get_num("encode.net_eps", 0.1);
    if (kind == "exhaustive") return EncodeStrategy::exhaustive(eps);
    if (kind == "refined")
        return EncodeStrategy::refined(eps, static_cast<int>(cfg.get_int("encode.gd_steps", 20)),
                                       cfg.get_num("encode.step_size", 0.1),
                                       static_cast<int>(cfg.get_int("encode.restarts", 1)));
    throw ValidationError("config key 'encode.strategy' must be exhaustive or refined");
}

TrainConfig train_config_from(const Config& cfg, uint64_t seed) {
    TrainConfig t;
    t.outer_iterations = static_cast<int>(cfg.get_int("train.outer_iterations", 30));
    t.param_step_size = cfg.get_num("train.step_size", 0.1);
    t.param_steps_per_outer = static_cast<int>(cfg.get_int("train.param_steps", 10));
    t.latent_strategy = encode_strategy_from(cfg);
    t.seed = seed;
    t.check();
    return t;
}

FamilySpec family_from(const Config& cfg) {
    FamilySpec fam;
    const std::string kind = cfg.get_str("family.kind");
    if (kind == "linear") {
        fam.kind = FamilySpec::Kind::Linear;
    } else if (kind == "dense") {
        fam.kind = FamilySpec::Kind::Dense;
        fam.widths = as_int_list(cfg, "family.widths");
    } else if (kind == "vq") {
        fam.kind = FamilySpec::Kind::Vq;
        fam.vq_k = static_cast<int>(cfg.get_int("family.k"));
        fam.vq_restarts = static_cast<int>(cfg.get_int("family.restarts", 2));
    } else if (kind == "pca") {
        fam.kind = FamilySpec::Kind::Pca;
    } else if (kind == "model") {
        fam.kind = FamilySpec::Kind::Model;
        fam.model_path = cfg.get_str("family.model");
    } else {
        throw ValidationError("config key 'family.kind' must be linear, dense, vq, pca, or model");
    }

    if (fam.trains_by_gradient() && fam.kind != FamilySpec::Kind::Model) {
        fam.budget_kind = budget_kind_from(cfg.get_str("family.budget_kind", "spectral"));
        fam.budgets = cfg.get_num_list("family.budgets");
        fam.init_scale = cfg.get_num("family.init_scale", 0.5);
        if (cfg.has("family.activations")) {
            const double slope = cfg.get_num("family.leaky_slope", 0.01);
            for (const std::string& name : cfg.get_str_list("family.activations"))
                fam.activations.push_back(Activation::parse(name, slope));
        }
    }
    fam.check();
    return fam;
}

Distribution distribution_from(const Config& cfg, int dim) {
    Distribution dist;
    const std::string kind = cfg.get_str("dist.kind");
    if (kind == "uniform_box") {
        dist.kind = Distribution::Kind::UniformBox;
    } else if (kind == "gaussian_mixture") {
        dist.kind = Distribution::Kind::GaussianMixture;
        dist.means = as_points(cfg, "dist.means", dim);
        dist.cov_diag = as_points(cfg, "dist.covs", dim);
        if (cfg.has("dist.weights")) {
            dist.component_weights = cfg.get_num_list("dist.weights");
        } else {
            dist.component_weights.assign(dist.means.size(), 1.0 / dist.means.size());
        }
    } else if (kind == "manifold") {
        dist.kind = Distribution::Kind::Manifold;
        dist.intrinsic_dim = static_cast<int>(cfg.get_int("dist.intrinsic_dim", 1));
        dist.noise = cfg.get_num("dist.noise", 0.0);
    } else if (kind == "finite") {
        dist.kind = Distribution::Kind::Finite;
        dist.atoms = as_points(cfg, "dist.atoms", dim);
        if (cfg.has("dist.weights")) {
            dist.atom_weights = cfg.get_num_list("dist.weights");
        } else {
            dist.atom_weights.assign(dist.atoms.size(), 1.0 / dist.atoms.size());
        }
    } else {
        throw ValidationError(
            "config key 'dist.kind' must be uniform_box, gaussian_mixture, manifold, or finite");
    }
    return dist;
}

ExperimentConfig experiment_from(const Config& cfg) {
    ExperimentConfig ec;
    ec.space = data_space_from(cfg);
    ec.family = family_from(cfg);
    if (ec.family.kind == FamilySpec::Kind::Vq) {
        ec.latent = LatentSpace::basis(ec.family.vq_k);
    } else {
        ec.latent = latent_space_from(cfg);
    }
    ec.dist = distribution_from(cfg, ec.space.dim);
    ec.n_train = static_cast<size_t>(cfg.get_int("n_train", 100));
    ec.n_test = static_cast<size_t>(cfg.get_int("n_test", 1000));
    ec.replications = static_cast<size_t>(cfg.get_int("replications", 1));
    ec.seed = cfg.get_u64("seed", 1);
    ec.strategy = encode_strategy_from(cfg);
    ec.train = train_config_from(cfg, ec.seed);
    if (cfg.has("bounds")) ec.bound_names = cfg.get_str_list("bounds");
    ec.exact_population = cfg.get_bool("exact_population", false);
    ec.delta = cfg.get_num("delta", 0.05);
    ec.threads = static_cast<int>(cfg.get_int("threads", 1));
    ec.check();
    return ec;
}

}  // namespace latcode
