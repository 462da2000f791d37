#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core/linalg.hpp"
#include "core/spaces.hpp"

namespace latcode {

struct Activation {
    enum class Kind { Relu, LeakyRelu, Tanh, Sigmoid, Identity };

    Kind kind = Kind::Identity;
    double leaky_slope = 0.01;  // leaky_relu only, must lie in [0, 1]

    static Activation relu() { return {Kind::Relu}; }
    static Activation leaky_relu(double slope);
    static Activation tanh() { return {Kind::Tanh}; }
    static Activation sigmoid() { return {Kind::Sigmoid}; }
    static Activation identity() { return {Kind::Identity}; }

    double lipschitz() const;
    // zero-in-zero-out: sigmoid is the one family member without it
    bool zizo() const;
    // sup of the euclidean output norm per layer width, when finite
    std::optional<double> output_bound(int width) const;

    double apply(double x) const;
    double deriv(double x) const;

    std::string name() const;
    static Activation parse(const std::string& name, double leaky_slope = 0.01);
};

// Dense multi-index array; shape lists spatial extents then channels last,
// flat storage is row-major (last index fastest).
struct Tensor {
    std::vector<int> shape;
    std::vector<double> a;

    Tensor() = default;
    explicit Tensor(std::vector<int> shp);
    int numel() const;
};

// out(r, c) = sum_{r', j} filter_c(r', j) * in(p, j) with the 1-based read
// position p_t = r'_t + s_t * (r_t - 1) + (1 - u_t) / 2 per spatial axis.
// Reads outside the grid contribute zero, as do non-integer positions
// (fractional strides make those legal). Output spatial extent is
// ceil(w_t / s_t).
Tensor conv_forward(const Tensor& in, const std::vector<Tensor>& filters,
                    const std::vector<double>& strides);

// sqrt(sum_c ||filter_c||_1^2): the norm the conv budgets constrain
double filter_norm_12(const std::vector<Tensor>& filters);

enum class BudgetKind { EntrywiseL1, Spectral, Filter12 };

struct LinearMap {
    Mat A;  // output_dim x latent_dim
};

struct DenseLayer {
    Mat A;  // out_width x in_width
    Activation act;
    BudgetKind budget_kind = BudgetKind::EntrywiseL1;
    double budget = 0;  // > 0
};

struct DenseNet {
    std::vector<DenseLayer> layers;
};

struct ConvLayer {
    bool is_pool = false;

    // conv
    std::vector<Tensor> filters;  // each [u_1..u_m, v_in]
    std::vector<double> strides;  // per spatial axis, > 0, may be fractional
    Activation act;
    double budget = 0;  // bound on filter_norm_12

    // pool: non-overlapping max over window (stride = window), channels kept
    std::vector<int> window;
};

struct ConvNet {
    std::vector<int> input_shape;  // [w_1..w_m, v_0]; product must equal latent_dim
    std::vector<ConvLayer> layers;
};

using ReconMap = std::variant<LinearMap, DenseNet, ConvNet>;

// Construction-time checks: dimensions chain, budgets hold within 1e-9,
// strides positive, activations valid. Throws ValidationError.
void validate(const ReconMap& f);

int latent_dim(const ReconMap& f);
int output_dim(const ReconMap& f);

// Raw map value f(h), no projection.
Vec forward(const ReconMap& f, const Vec& h);
// Reconstruction clipped onto the data space: project_Z(f(h)).
Vec eval(const ReconMap& f, const DataSpace& space, const Vec& h);

// Per-layer norms. spectral is reported for matrix layers only, filter_12
// for conv layers only; pool layers report nothing.
struct LayerNorms {
    std::string layer_kind;  // "linear", "dense", "conv", "pool"
    std::optional<double> entrywise_l1;
    std::optional<double> frobenius;
    std::optional<double> spectral;
    std::optional<double> filter_12;
    std::optional<double> budget;
};
std::vector<LayerNorms> layer_norms(const ReconMap& f);

// max_{h in net(eps)} |f(h) - g(h)|_2, a net approximation of the sup
// pseudometric; exact when the latent space is finite. Maps must agree on
// both dimensions.
double map_distance(const ReconMap& f, const ReconMap& g, const LatentSpace& latent, double eps);

// Flat parameter vector (layer order, filters in order, row-major blocks).
// Pool layers carry no parameters.
size_t num_params(const ReconMap& f);
Vec get_params(const ReconMap& f);
void set_params(ReconMap& f, const Vec& p);
// Scales any layer violating its budget back onto the budget sphere.
void rescale_to_budgets(ReconMap& f);

// Gradient of |z - project_Z(f(h))|^2.
struct LossGradients {
    double loss = 0;
    Vec wrt_latent;  // d loss / dh
    Vec wrt_params;  // d loss / dtheta, layout of get_params
};
LossGradients loss_gradients(const ReconMap& f, const DataSpace& space, const Vec& z,
                             const Vec& h, bool want_params, bool want_latent);

// Model JSON (serialize.cpp). Round trips are bit exact for every weight.
std::string map_to_json(const ReconMap& f);
ReconMap map_from_json(const std::string& text);
ReconMap map_load(const std::string& path);
void map_save(const ReconMap& f, const std::string& path);

}  // namespace latcode
