#include "latcode/latcode.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/bounds.hpp"
#include "core/coding.hpp"
#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/maps.hpp"
#include "core/rate_distortion.hpp"
#include "core/rng.hpp"
#include "core/spaces.hpp"
#include "core/transport.hpp"

using nlohmann::json;

struct latcode_buf {
    std::string text;
};
struct latcode_space {
    latcode::DataSpace v;
};
struct latcode_latent {
    latcode::LatentSpace v;
};
struct latcode_dataset {
    latcode::Dataset v;
};
struct latcode_measure {
    latcode::DiscreteMeasure v;
};
struct latcode_map {
    latcode::ReconMap v;
};

namespace {

thread_local std::string g_last_error = "no error";

template <typename Fn>
latcode_status guarded(Fn&& fn) {
    try {
        fn();
        return LATCODE_OK;
    } catch (const latcode::ValidationError& e) {
        g_last_error = e.what();
        return LATCODE_ERR_INVALID;
    } catch (const latcode::NumericError& e) {
        g_last_error = e.what();
        return LATCODE_ERR_NUMERIC;
    } catch (const latcode::IoError& e) {
        g_last_error = e.what();
        return LATCODE_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LATCODE_ERR_INVALID;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw latcode::ValidationError(std::string(what) + " must not be NULL");
}

std::vector<latcode::Vec> to_points(const double* flat, int count, int dim) {
    require(flat, "points");
    if (count < 1 || dim < 1)
        throw latcode::ValidationError("point arrays need positive count and dimension");
    std::vector<latcode::Vec> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i)
        pts.emplace_back(flat + static_cast<size_t>(i) * dim,
                         flat + static_cast<size_t>(i + 1) * dim);
    return pts;
}

latcode::EncodeStrategy strategy_from_args(int kind, double net_eps, int gd_steps,
                                           double step_size, int restarts) {
    if (kind == 0) return latcode::EncodeStrategy::exhaustive(net_eps);
    if (kind == 1) return latcode::EncodeStrategy::refined(net_eps, gd_steps, step_size, restarts);
    throw latcode::ValidationError("strategy_kind must be 0 (exhaustive) or 1 (refined)");
}

latcode::Config merged_config(const char* config_text, const char* overrides_text) {
    latcode::Config cfg = latcode::Config::parse(config_text ? config_text : "");
    if (overrides_text && *overrides_text) {
        latcode::Config extra = latcode::Config::parse(overrides_text);
        for (const auto& [k, v] : extra.items()) cfg.override_key(k, v);
    }
    return cfg;
}

latcode_buf* make_buf(std::string text) { return new latcode_buf{std::move(text)}; }

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string require_out_dir(const char* out_dir) {
    if (!out_dir || !*out_dir)
        throw latcode::ValidationError("this operation writes files and needs an output directory");
    if (!std::filesystem::is_directory(out_dir))
        throw latcode::ValidationError(std::string("output directory '") + out_dir +
                                       "' does not exist");
    return out_dir;
}

json number_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

extern "C" {

const char* latcode_last_error(void) { return g_last_error.c_str(); }

const char* latcode_buf_data(const latcode_buf* buf) { return buf ? buf->text.c_str() : ""; }
size_t latcode_buf_size(const latcode_buf* buf) { return buf ? buf->text.size() : 0; }
void latcode_buf_free(latcode_buf* buf) { delete buf; }

/* ----- data space ----- */

latcode_status latcode_space_ball(const double* center, int dim, double radius,
                                  latcode_space** out) {
    return guarded([&] {
        require(center, "center");
        require(out, "out");
        *out = new latcode_space{latcode::DataSpace::ball(latcode::Vec(center, center + dim),
                                                          radius)};
    });
}

latcode_status latcode_space_box(const double* lower, const double* upper, int dim,
                                 latcode_space** out) {
    return guarded([&] {
        require(lower, "lower");
        require(upper, "upper");
        require(out, "out");
        *out = new latcode_space{latcode::DataSpace::box(latcode::Vec(lower, lower + dim),
                                                         latcode::Vec(upper, upper + dim))};
    });
}

void latcode_space_free(latcode_space* space) { delete space; }

latcode_status latcode_space_diameter(const latcode_space* space, double* out) {
    return guarded([&] {
        require(space, "space");
        require(out, "out");
        *out = space->v.diameter();
    });
}

latcode_status latcode_space_project(const latcode_space* space, const double* x, int dim,
                                     double* out) {
    return guarded([&] {
        require(space, "space");
        require(x, "x");
        require(out, "out");
        if (dim != space->v.dim)
            throw latcode::ValidationError("projection input dimension mismatch");
        latcode::Vec px = space->v.project(latcode::Vec(x, x + dim));
        std::memcpy(out, px.data(), sizeof(double) * px.size());
    });
}

/* ----- latent space ----- */

latcode_status latcode_latent_ball(int dim, double radius, latcode_latent** out) {
    return guarded([&] {
        require(out, "out");
        *out = new latcode_latent{latcode::LatentSpace::ball(dim, radius)};
    });
}

latcode_status latcode_latent_box(const double* lower, const double* upper, int dim,
                                  latcode_latent** out) {
    return guarded([&] {
        require(lower, "lower");
        require(upper, "upper");
        require(out, "out");
        *out = new latcode_latent{latcode::LatentSpace::box(latcode::Vec(lower, lower + dim),
                                                            latcode::Vec(upper, upper + dim))};
    });
}

latcode_status latcode_latent_finite(const double* points, int count, int dim,
                                     latcode_latent** out) {
    return guarded([&] {
        require(out, "out");
        *out = new latcode_latent{latcode::LatentSpace::finite(to_points(points, count, dim))};
    });
}

latcode_status latcode_latent_basis(int k, latcode_latent** out) {
    return guarded([&] {
        require(out, "out");
        *out = new latcode_latent{latcode::LatentSpace::basis(k)};
    });
}

void latcode_latent_free(latcode_latent* latent) { delete latent; }

/* ----- dataset ----- */

latcode_status latcode_dataset_create(const latcode_space* space, const double* rows, int count,
                                      latcode_dataset** out) {
    return guarded([&] {
        require(space, "space");
        require(out, "out");
        *out = new latcode_dataset{
            latcode::Dataset(space->v, to_points(rows, count, space->v.dim))};
    });
}

latcode_status latcode_dataset_load(const latcode_space* space, const char* csv_path,
                                    latcode_dataset** out) {
    return guarded([&] {
        require(space, "space");
        require(csv_path, "csv_path");
        require(out, "out");
        *out = new latcode_dataset{
            latcode::Dataset(space->v, latcode::csv_read(csv_path, space->v.dim))};
    });
}

latcode_status latcode_dataset_size(const latcode_dataset* data, int* out) {
    return guarded([&] {
        require(data, "dataset");
        require(out, "out");
        *out = data->v.size();
    });
}

void latcode_dataset_free(latcode_dataset* data) { delete data; }

/* ----- discrete measure ----- */

latcode_status latcode_measure_create(const double* atoms, const double* weights, int count,
                                      int dim, latcode_measure** out) {
    return guarded([&] {
        require(weights, "weights");
        require(out, "out");
        *out = new latcode_measure{latcode::DiscreteMeasure(
            to_points(atoms, count, dim), latcode::Vec(weights, weights + count))};
    });
}

latcode_status latcode_measure_load(const char* csv_path, latcode_measure** out) {
    return guarded([&] {
        require(csv_path, "csv_path");
        require(out, "out");
        *out = new latcode_measure{latcode::measure_from_rows(latcode::csv_read(csv_path))};
    });
}

latcode_status latcode_measure_size(const latcode_measure* m, int* out) {
    return guarded([&] {
        require(m, "measure");
        require(out, "out");
        *out = m->v.size();
    });
}

void latcode_measure_free(latcode_measure* m) { delete m; }

/* ----- reconstruction map ----- */

latcode_status latcode_map_load(const char* json_path, latcode_map** out) {
    return guarded([&] {
        require(json_path, "json_path");
        require(out, "out");
        *out = new latcode_map{latcode::map_load(json_path)};
    });
}

latcode_status latcode_map_from_json(const char* text, latcode_map** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new latcode_map{latcode::map_from_json(text)};
    });
}

latcode_status latcode_map_to_json(const latcode_map* map, latcode_buf** out) {
    return guarded([&] {
        require(map, "map");
        require(out, "out");
        *out = make_buf(latcode::map_to_json(map->v));
    });
}

latcode_status latcode_map_save(const latcode_map* map, const char* json_path) {
    return guarded([&] {
        require(map, "map");
        require(json_path, "json_path");
        latcode::map_save(map->v, json_path);
    });
}

latcode_status latcode_map_latent_dim(const latcode_map* map, int* out) {
    return guarded([&] {
        require(map, "map");
        require(out, "out");
        *out = latcode::latent_dim(map->v);
    });
}

latcode_status latcode_map_output_dim(const latcode_map* map, int* out) {
    return guarded([&] {
        require(map, "map");
        require(out, "out");
        *out = latcode::output_dim(map->v);
    });
}

latcode_status latcode_map_forward(const latcode_map* map, const double* h, double* out) {
    return guarded([&] {
        require(map, "map");
        require(h, "h");
        require(out, "out");
        const int k = latcode::latent_dim(map->v);
        latcode::Vec z = latcode::forward(map->v, latcode::Vec(h, h + k));
        std::memcpy(out, z.data(), sizeof(double) * z.size());
    });
}

void latcode_map_free(latcode_map* map) { delete map; }

/* ----- encoding and risk ----- */

latcode_status latcode_encode_point(const latcode_map* map, const latcode_space* space,
                                    const latcode_latent* latent, int strategy_kind,
                                    double net_eps, int gd_steps, double step_size, int restarts,
                                    const double* z, double* h_out, double* error_out) {
    return guarded([&] {
        require(map, "map");
        require(space, "space");
        require(latent, "latent");
        require(z, "z");
        auto strat = strategy_from_args(strategy_kind, net_eps, gd_steps, step_size, restarts);
        latcode::EncodeResult r = latcode::encode(latcode::Vec(z, z + space->v.dim), map->v,
                                                  space->v, latent->v, strat);
        if (h_out) std::memcpy(h_out, r.h.data(), sizeof(double) * r.h.size());
        if (error_out) *error_out = r.error;
    });
}

latcode_status latcode_empirical_risk(const latcode_map* map, const latcode_dataset* data,
                                      const latcode_latent* latent, int strategy_kind,
                                      double net_eps, int gd_steps, double step_size, int restarts,
                                      int threads, double* out) {
    return guarded([&] {
        require(map, "map");
        require(data, "dataset");
        require(latent, "latent");
        require(out, "out");
        auto strat = strategy_from_args(strategy_kind, net_eps, gd_steps, step_size, restarts);
        *out = latcode::empirical_risk(map->v, data->v, latent->v, strat, threads);
    });
}

/* ----- optimal transport ----- */

latcode_status latcode_wasserstein(const latcode_measure* a, const latcode_measure* b, int p,
                                   double* distance_out, double* cost_out, int64_t* nnz_out) {
    return guarded([&] {
        require(a, "first measure");
        require(b, "second measure");
        latcode::TransportResult r = latcode::wasserstein(a->v, b->v, p);
        if (distance_out) *distance_out = r.distance;
        if (cost_out) *cost_out = r.cost;
        if (nnz_out) *nnz_out = r.coupling.nnz();
    });
}

latcode_status latcode_pollard_check(const latcode_measure* m, int k, double* e_k_out,
                                     double* w2sq_out) {
    return guarded([&] {
        require(m, "measure");
        latcode::PollardResult r = latcode::pollard_check(m->v, k);
        if (e_k_out) *e_k_out = r.e_k;
        if (w2sq_out) *w2sq_out = r.w2sq_min;
    });
}

/* ----- rate-distortion ----- */

latcode_status latcode_rd_point(const latcode_measure* source, const latcode_measure* reproduction,
                                double slope, double tol, int max_iter, double* rate_out,
                                double* distortion_out, double* gap_out, int* iterations_out) {
    return guarded([&] {
        require(source, "source");
        require(reproduction, "reproduction");
        latcode::RDProblem problem(source->v, reproduction->v.atoms);
        latcode::BlahutResult r = latcode::blahut(problem, slope, tol, max_iter);
        if (rate_out) *rate_out = r.rate;
        if (distortion_out) *distortion_out = r.distortion;
        if (gap_out) *gap_out = r.gap;
        if (iterations_out) *iterations_out = r.iterations;
    });
}

latcode_status latcode_rd_curve(const latcode_measure* source, const latcode_measure* reproduction,
                                const double* slopes, int n_slopes, double tol, int max_iter,
                                latcode_buf** csv_out) {
    return guarded([&] {
        require(source, "source");
        require(reproduction, "reproduction");
        require(slopes, "slopes");
        require(csv_out, "csv_out");
        latcode::RDProblem problem(source->v, reproduction->v.atoms);
        latcode::RDCurve curve =
            latcode::rd_curve(problem, std::vector<double>(slopes, slopes + n_slopes), tol,
                              max_iter);
        std::vector<latcode::Vec> rows;
        rows.reserve(curve.points.size());
        for (const auto& pt : curve.points) rows.push_back({pt.rate, pt.distortion});
        *csv_out = make_buf(latcode::csv_format(rows, {"rate_nats", "distortion"}));
    });
}

latcode_status latcode_distortion_at_rate(const latcode_measure* source,
                                          const latcode_measure* reproduction, double target_rate,
                                          double tol, int max_iter, double* distortion_out,
                                          double* rate_out) {
    return guarded([&] {
        require(source, "source");
        require(reproduction, "reproduction");
        latcode::RDProblem problem(source->v, reproduction->v.atoms);
        latcode::RateTargetResult r =
            latcode::distortion_at_rate(problem, target_rate, tol, max_iter);
        if (distortion_out) *distortion_out = r.distortion;
        if (rate_out) *rate_out = r.rate;
    });
}

/* ----- covering numbers ----- */

latcode_status latcode_maurey_logcover(double M, int d_rows, int k_cols, double eps, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = latcode::maurey_logcover(M, d_rows, k_cols, eps);
    });
}

/* ----- config-driven runners ----- */

namespace {

using latcode::Config;

// trace.csv: iteration index paired with the risk after that iteration
void write_trace(const std::string& path, const std::vector<double>& trace) {
    std::vector<latcode::Vec> rows;
    rows.reserve(trace.size());
    for (size_t i = 0; i < trace.size(); ++i)
        rows.push_back({static_cast<double>(i), trace[i]});
    latcode::csv_write(path, rows, {"iteration", "risk"});
}

latcode::Dataset load_config_dataset(const Config& cfg, const latcode::DataSpace& space) {
    const std::string path = cfg.get_str("data");
    return latcode::Dataset(space, latcode::csv_read(path, space.dim));
}

latcode::ArchitectureSpec arch_from_config(const Config& cfg) {
    if (cfg.has("model")) {
        latcode::ReconMap f = latcode::map_load(cfg.get_str("model"));
        return latcode::arch_of(f, latcode::latent_space_from(cfg),
                                latcode::data_space_from(cfg));
    }
    latcode::ArchitectureSpec arch;
    arch.kind = latcode::ArchitectureSpec::Kind::Dense;
    std::vector<double> widths = cfg.get_num_list("arch.widths");
    for (double w : widths) arch.widths.push_back(static_cast<int>(w));
    const size_t ell = arch.widths.size() - 1;
    std::vector<double> budgets = cfg.get_num_list("arch.budgets");
    std::vector<std::string> acts =
        cfg.has("arch.activations") ? cfg.get_str_list("arch.activations")
                                    : std::vector<std::string>{};
    const std::string bk = cfg.get_str("arch.budget_kind", "spectral");
    arch.budget_kind = bk == "entrywise_l1" ? latcode::BudgetKind::EntrywiseL1
                                            : latcode::BudgetKind::Spectral;
    if (bk != "entrywise_l1" && bk != "spectral")
        throw latcode::ValidationError("arch.budget_kind must be entrywise_l1 or spectral");
    for (size_t j = 0; j < ell; ++j) {
        latcode::ArchLayer layer;
        layer.budget = budgets.size() == 1 ? budgets[0] : budgets.at(j);
        if (!acts.empty()) {
            latcode::Activation a =
                latcode::Activation::parse(acts.size() == 1 ? acts[0] : acts.at(j));
            layer.lipschitz = a.lipschitz();
            layer.zizo = a.zizo();
            layer.output_bound = a.output_bound(arch.widths[j + 1]);
        }
        arch.layers.push_back(std::move(layer));
    }
    arch.latent_max_norm = cfg.get_num("arch.latent_max_norm");
    arch.data_diameter = cfg.get_num("arch.diam");
    arch.check();
    return arch;
}

json report_json(const latcode::BoundReport& r) {
    json constants = json::object();
    for (const auto& [k, v] : r.constants) constants[k] = v;
    return json{{"name", r.name},     {"value", r.value},       {"n", r.n},
                {"delta", r.delta},   {"vacuous", r.vacuous},   {"constants", constants}};
}

}  // namespace

latcode_status latcode_run_fit(const char* config_text, const char* overrides_text,
                               const char* out_dir, latcode_buf** json_out) {
    return guarded([&] {
        require(json_out, "json_out");
        Config cfg = merged_config(config_text, overrides_text);
        const std::string dir = require_out_dir(out_dir);

        latcode::DataSpace space = latcode::data_space_from(cfg);
        latcode::FamilySpec family = latcode::family_from(cfg);
        latcode::LatentSpace latent = family.kind == latcode::FamilySpec::Kind::Vq
                                          ? latcode::LatentSpace::basis(family.vq_k)
                                          : latcode::latent_space_from(cfg);
        latcode::Dataset data = load_config_dataset(cfg, space);
        const uint64_t seed = cfg.get_u64("seed", 1);
        const int threads = static_cast<int>(cfg.get_int("threads", 1));

        latcode::ReconMap fitted = latcode::LinearMap{latcode::Mat(1, 1)};
        std::vector<double> trace;
        switch (family.kind) {
            case latcode::FamilySpec::Kind::Vq: {
                uint64_t s = latcode::StreamRng::derive(seed, 0x7671, 0, 0).next_u64();
                latcode::VqResult r =
                    latcode::fit_vq_lloyd(data, family.vq_k, s, family.vq_restarts);
                fitted = r.map;
                trace = r.trace;
                break;
            }
            case latcode::FamilySpec::Kind::Pca: {
                latcode::PcaResult r = latcode::fit_pca(data, latent.dim);
                fitted = r.map;
                trace = {r.risk};
                break;
            }
            default: {
                latcode::TrainConfig tcfg = latcode::train_config_from(cfg, seed);
                latcode::ReconMap init =
                    family.instantiate(latent.dim, space.dim, seed, /*stream_id=*/2);
                latcode::TrainResult r =
                    latcode::erm_train(std::move(init), data, latent, tcfg, threads);
                fitted = std::move(r.map);
                trace = std::move(r.trace);
                break;
            }
        }

        const std::string model_path = join_path(dir, "model.json");
        const std::string trace_path = join_path(dir, "trace.csv");
        latcode::map_save(fitted, model_path);
        write_trace(trace_path, trace);

        json summary{{"model", model_path},
                     {"trace", trace_path},
                     {"train_risk", trace.empty() ? json(nullptr) : json(trace.back())},
                     {"iterations", trace.empty() ? 0 : trace.size() - 1},
                     {"samples", data.size()}};
        *json_out = make_buf(summary.dump(2) + "\n");
    });
}

latcode_status latcode_run_encode(const char* config_text, const char* overrides_text,
                                  const char* out_dir, latcode_buf** json_out) {
    return guarded([&] {
        require(json_out, "json_out");
        Config cfg = merged_config(config_text, overrides_text);
        const std::string dir = require_out_dir(out_dir);

        latcode::DataSpace space = latcode::data_space_from(cfg);
        latcode::LatentSpace latent = latcode::latent_space_from(cfg);
        latcode::EncodeStrategy strat = latcode::encode_strategy_from(cfg);
        latcode::ReconMap f = latcode::map_load(cfg.get_str("model"));
        latcode::Dataset data = load_config_dataset(cfg, space);

        latcode::Encoder encoder(f, space, latent, strat);
        std::vector<latcode::Vec> rows;
        rows.reserve(data.samples.size());
        double total = 0;
        for (const latcode::Vec& z : data.samples) {
            latcode::EncodeResult r = encoder.encode(z);
            latcode::Vec row = r.h;
            row.push_back(r.error);
            rows.push_back(std::move(row));
            total += r.error;
        }
        std::vector<std::string> header;
        for (int j = 0; j < latent.dim; ++j) header.push_back("h" + std::to_string(j));
        header.push_back("error");
        const std::string codes_path = join_path(dir, "codes.csv");
        latcode::csv_write(codes_path, rows, header);

        json summary{{"codes", codes_path},
                     {"count", data.size()},
                     {"mean_error", data.size() ? total / data.size() : 0.0}};
        *json_out = make_buf(summary.dump(2) + "\n");
    });
}

latcode_status latcode_run_risk(const char* config_text, const char* overrides_text,
                                latcode_buf** json_out) {
    return guarded([&] {
        require(json_out, "json_out");
        Config cfg = merged_config(config_text, overrides_text);

        latcode::DataSpace space = latcode::data_space_from(cfg);
        latcode::LatentSpace latent = latcode::latent_space_from(cfg);
        latcode::EncodeStrategy strat = latcode::encode_strategy_from(cfg);
        latcode::ReconMap f = latcode::map_load(cfg.get_str("model"));
        latcode::Dataset data = load_config_dataset(cfg, space);
        const int threads = static_cast<int>(cfg.get_int("threads", 1));

        const double risk = latcode::empirical_risk(f, data, latent, strat, threads);
        json summary{{"risk", risk}, {"count", data.size()}};
        *json_out = make_buf(summary.dump(2) + "\n");
    });
}

latcode_status latcode_run_gap(const char* config_text, const char* overrides_text,
                               const char* out_dir, latcode_buf** json_out) {
    return guarded([&] {
        require(json_out, "json_out");
        Config cfg = merged_config(config_text, overrides_text);
        latcode::ExperimentConfig ec = latcode::experiment_from(cfg);
        std::vector<latcode::GapRecord> records = latcode::measure_gap(ec);

        size_t failures = 0;
        std::vector<double> gaps;
        for (const auto& rec : records) {
            if (rec.failed) {
                ++failures;
                continue;
            }
            gaps.push_back(rec.gap);
        }
        std::sort(gaps.begin(), gaps.end());
        double mean = 0;
        for (double g : gaps) mean += g;
        if (!gaps.empty()) mean /= gaps.size();
        const double median = gaps.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : gaps.size() % 2
                                  ? gaps[gaps.size() / 2]
                                  : 0.5 * (gaps[gaps.size() / 2 - 1] + gaps[gaps.size() / 2]);

        json bounds = json::object();
        for (const auto& rec : records) {
            if (rec.failed) continue;
            for (const auto& [name, value] : rec.bound_values) bounds[name] = value;
            break;
        }

        json summary{{"replications", records.size()},
                     {"failures", failures},
                     {"mean_gap", gaps.empty() ? json(nullptr) : json(mean)},
                     {"median_gap", number_or_null(median)},
                     {"max_gap", gaps.empty() ? json(nullptr) : json(gaps.back())},
                     {"mc_slack", records.empty() ? 0.0 : records.front().mc_slack},
                     {"bounds", bounds}};
        if (out_dir && *out_dir) {
            const std::string dir = require_out_dir(out_dir);
            const std::string path = join_path(dir, "gap_records.csv");
            latcode::write_text_file(path, latcode::gap_records_csv(records));
            summary["records"] = path;
        }
        *json_out = make_buf(summary.dump(2) + "\n");
    });
}

latcode_status latcode_run_rate(const char* config_text, const char* overrides_text,
                                const char* out_dir, latcode_buf** json_out) {
    return guarded([&] {
        require(json_out, "json_out");
        Config cfg = merged_config(config_text, overrides_text);
        latcode::ExperimentConfig ec = latcode::experiment_from(cfg);
        std::vector<size_t> grid;
        for (double x : cfg.get_num_list("rate.n_grid")) {
            if (x < 1 || x != std::floor(x))
                throw latcode::ValidationError("rate.n_grid needs positive integers");
            grid.push_back(static_cast<size_t>(x));
        }
        latcode::RateStudy study = latcode::rate_study(ec, grid);

        json summary{{"slope", number_or_null(study.slope)},
                     {"slope_defined", study.slope_defined},
                     {"rows", study.rows.size()}};
        if (out_dir && *out_dir) {
            const std::string dir = require_out_dir(out_dir);
            const std::string path = join_path(dir, "rate.csv");
            latcode::write_text_file(path, latcode::rate_study_csv(study));
            summary["csv"] = path;
        }
        *json_out = make_buf(summary.dump(2) + "\n");
    });
}

latcode_status latcode_run_bound(const char* config_text, const char* overrides_text,
                                 latcode_buf** json_out) {
    return guarded([&] {
        require(json_out, "json_out");
        Config cfg = merged_config(config_text, overrides_text);
        const double n = cfg.get_num("n");
        const double delta = cfg.get_num("delta", 0.05);

        const bool has_arch = cfg.has("model") || cfg.has("arch.widths");
        latcode::ArchitectureSpec arch;
        if (has_arch) arch = arch_from_config(cfg);

        // No explicit list: report every architecture theorem that applies.
        if (!cfg.has("bounds")) {
            if (!has_arch)
                throw latcode::ValidationError(
                    "give a 'bounds' list, or a model / arch.* description to scan");
            json reports = json::array();
            using Calc = latcode::BoundReport (*)(const latcode::ArchitectureSpec&, double,
                                                  double);
            const Calc calcs[] = {latcode::bound_dense_wide, latcode::bound_dense_deep,
                                  latcode::bound_cnn, latcode::bound_sigmoid};
            for (Calc calc : calcs) {
                try {
                    reports.push_back(report_json(calc(arch, n, delta)));
                } catch (const latcode::ValidationError&) {
                    // theorem preconditions unmet for this architecture
                }
            }
            if (reports.empty())
                throw latcode::ValidationError(
                    "no bound applies to this architecture; check budgets and activations");
            *json_out = make_buf(reports.dump(2) + "\n");
            return;
        }

        const std::vector<std::string> names = cfg.get_str_list("bounds");
        if (names.empty()) throw latcode::ValidationError("config key 'bounds' names no bounds");
        auto need_arch = [&](const std::string& name) {
            if (!has_arch)
                throw latcode::ValidationError("bound '" + name +
                                               "' needs a model or arch.* description");
            return arch;
        };
        auto diam_for = [&](const std::string& name) {
            if (cfg.has("diam")) return cfg.get_num("diam");
            if (has_arch) return arch.data_diameter;
            throw latcode::ValidationError("bound '" + name + "' needs a 'diam' value");
        };

        json reports = json::array();
        for (const std::string& name : names) {
            latcode::BoundReport r;
            if (name == "dense_wide") {
                r = latcode::bound_dense_wide(need_arch(name), n, delta);
            } else if (name == "dense_deep") {
                r = latcode::bound_dense_deep(need_arch(name), n, delta);
            } else if (name == "cnn") {
                r = latcode::bound_cnn(need_arch(name), n, delta);
            } else if (name == "sigmoid") {
                r = latcode::bound_sigmoid(need_arch(name), n, delta);
            } else if (name == "wasserstein") {
                r = latcode::bound_thm_wasserstein(
                    cfg.get_num("bound.q"), static_cast<int>(cfg.get_int("bound.d")),
                    diam_for(name), cfg.get_num("bound.moment"), n, delta);
            } else if (name == "entropy" || name == "entropy_one_sided") {
                const std::string kind = cfg.get_str("cover.kind");
                latcode::CoveringFunction cover;
                if (kind == "maurey") {
                    cover = latcode::CoveringFunction::maurey(
                        cfg.get_num("cover.M"), static_cast<int>(cfg.get_int("cover.d")),
                        static_cast<int>(cfg.get_int("cover.k")));
                } else if (kind == "volumetric") {
                    cover = latcode::CoveringFunction::volumetric(cfg.get_num("cover.param_count"),
                                                                  cfg.get_num("cover.scale"));
                } else {
                    throw latcode::ValidationError("cover.kind must be maurey or volumetric");
                }
                const double diam = diam_for(name);
                double ent;
                const std::string alpha = cfg.get_str("cover.alpha", "infimum");
                if (alpha == "infimum") {
                    ent = latcode::entropy_integral(cover, diam, n);
                } else if (alpha == "preset") {
                    ent = latcode::entropy_integral_at(cover, diam, n, diam / (2.0 * std::sqrt(n)));
                } else {
                    throw latcode::ValidationError("cover.alpha must be infimum or preset");
                }
                r = latcode::bound_thm_complexity(ent, diam, n, delta,
                                                  name == "entropy_one_sided");
            } else if (name == "lemma21") {
                r = latcode::bound_lemma21(cfg.get_num("bound.B"), cfg.get_num("bound.d_cover"),
                                           cfg.get_num("bound.C"), n, delta);
            } else {
                throw latcode::ValidationError(
                    "unknown bound '" + name +
                    "' (supported: dense_wide, dense_deep, cnn, sigmoid, wasserstein, entropy, "
                    "entropy_one_sided, lemma21)");
            }
            reports.push_back(report_json(r));
        }
        *json_out = make_buf(reports.dump(2) + "\n");
    });
}

} /* extern "C" */
