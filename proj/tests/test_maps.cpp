#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "core/errors.hpp"
#include "core/maps.hpp"
#include "test_util.hpp"

using namespace latcode;
using testutil::rand_mat;
using testutil::rand_vec;

TEST_CASE("activations") {
    Activation relu = Activation::relu();
    CHECK(relu.apply(-2.0) == 0.0);
    CHECK(relu.apply(3.0) == 3.0);
    CHECK(relu.deriv(3.0) == 1.0);
    CHECK(relu.deriv(-3.0) == 0.0);
    CHECK(relu.lipschitz() == 1.0);
    CHECK(relu.zizo());
    CHECK_FALSE(relu.output_bound(4).has_value());

    Activation leaky = Activation::leaky_relu(0.1);
    CHECK(leaky.apply(-2.0) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(leaky.deriv(-2.0) == 0.1);
    CHECK(leaky.zizo());
    CHECK_THROWS_AS(Activation::leaky_relu(1.5), ValidationError);

    Activation th = Activation::tanh();
    CHECK(th.apply(0.5) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
    CHECK(th.deriv(0.5) == doctest::Approx(1.0 - std::tanh(0.5) * std::tanh(0.5)).epsilon(1e-12));
    CHECK(th.zizo());
    CHECK(th.lipschitz() == 1.0);
    REQUIRE(th.output_bound(9).has_value());
    CHECK(*th.output_bound(9) == doctest::Approx(3.0).epsilon(1e-12));

    Activation sig = Activation::sigmoid();
    CHECK(sig.apply(0.0) == 0.5);
    CHECK(sig.deriv(0.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sig.lipschitz() == 0.25);
    CHECK_FALSE(sig.zizo());
    REQUIRE(sig.output_bound(4).has_value());
    CHECK(*sig.output_bound(4) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK(Activation::parse("relu").kind == Activation::Kind::Relu);
    CHECK(Activation::parse("identity").name() == "identity");
    CHECK_THROWS_AS(Activation::parse("swish"), ValidationError);
}

TEST_CASE("dense forward against hand arithmetic") {
    LinearMap lin{Mat(2, 3, {1, 2, 3, 4, 5, 6})};
    Vec out = forward(lin, {1.0, 0.0, -1.0});
    CHECK(out[0] == -2.0);
    CHECK(out[1] == -2.0);
    CHECK(latent_dim(lin) == 3);
    CHECK(output_dim(lin) == 2);

    DenseNet net;
    net.layers.push_back({Mat(2, 2, {1, -1, 2, 0}), Activation::relu(),
                          BudgetKind::EntrywiseL1, 4.0});
    net.layers.push_back({Mat(1, 2, {1, 1}), Activation::identity(), BudgetKind::EntrywiseL1,
                          2.0});
    validate(net);
    // h=(1,2): layer1 pre (-1, 2) -> relu (0, 2); layer2 -> 2
    out = forward(net, {1.0, 2.0});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 2.0);

    DataSpace space = DataSpace::ball({0.0}, 1.0);
    out = eval(net, space, {1.0, 2.0});  // clipped onto the ball
    CHECK(out[0] == 1.0);
}

TEST_CASE("validate rejects broken nets") {
    DenseNet bad;
    bad.layers.push_back({Mat(2, 2, {1, 0, 0, 1}), Activation::relu(), BudgetKind::EntrywiseL1,
                          4.0});
    bad.layers.push_back({Mat(1, 3, {1, 1, 1}), Activation::identity(),
                          BudgetKind::EntrywiseL1, 4.0});  // width mismatch
    CHECK_THROWS_AS(validate(bad), ValidationError);

    DenseNet over;
    over.layers.push_back({Mat(1, 1, {3.0}), Activation::relu(), BudgetKind::EntrywiseL1, 1.0});
    CHECK_THROWS_AS(validate(over), ValidationError);  // budget exceeded
}

TEST_CASE("conv forward: hand examples in one dimension") {
    // input extent 4, one channel; filter [1, 0, -1], stride 1
    Tensor in({4, 1});
    in.a = {1, 2, 3, 4};
    Tensor filt({3, 1});
    filt.a = {1, 0, -1};
    Tensor out = conv_forward(in, {filt}, {1.0});
    REQUIRE(out.shape == std::vector<int>{4, 1});
    // read position p = r' + (r-1) - 1, zero outside:
    // out(r') = in(r'-1) - in(r'+1) -> {-2, -2, -2, 3}
    CHECK(out.a[0] == -2.0);
    CHECK(out.a[1] == -2.0);
    CHECK(out.a[2] == -2.0);
    CHECK(out.a[3] == 3.0);

    // stride 2 halves the extent: ceil(4/2) = 2. Reads sit at
    // p = tap + 2(r-1) - 1, so out(r) = in(2r-2) - in(2r).
    out = conv_forward(in, {filt}, {2.0});
    REQUIRE(out.shape == std::vector<int>{2, 1});
    CHECK(out.a[0] == -2.0);
    CHECK(out.a[1] == -2.0);
}

TEST_CASE("conv forward matches a brute-force index evaluator") {
    // independent re-implementation of the 1-based read rule for 1-D
    StreamRng rng = StreamRng::derive(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = 3 + static_cast<int>(rng.uniform_int(6));
        const int cin = 1 + static_cast<int>(rng.uniform_int(2));
        const int cout = 1 + static_cast<int>(rng.uniform_int(2));
        const int u = 1 + static_cast<int>(rng.uniform_int(3));
        const double strides[] = {1.0, 2.0, 3.0, 0.5};
        const double s = strides[rng.uniform_int(4)];

        Tensor in({w, cin});
        for (double& x : in.a) x = rng.uniform(-1, 1);
        std::vector<Tensor> filters;
        for (int k = 0; k < cout; ++k) {
            Tensor f({u, cin});
            for (double& x : f.a) x = rng.uniform(-1, 1);
            filters.push_back(std::move(f));
        }
        Tensor out = conv_forward(in, filters, {s});

        const int wout = static_cast<int>(std::ceil(w / s));
        REQUIRE(out.shape == std::vector<int>{wout, cout});
        for (int rp = 1; rp <= wout; ++rp)
            for (int k = 0; k < cout; ++k) {
                double want = 0;
                for (int r = 1; r <= u; ++r) {  // r = 1-based tap, rp = 1-based output
                    const double p = r + s * (rp - 1) + (1.0 - u) / 2.0;
                    const double pr = std::round(p);
                    if (std::abs(p - pr) > 1e-9) continue;  // fractional read = 0
                    const int pi = static_cast<int>(pr);
                    if (pi < 1 || pi > w) continue;
                    for (int c = 0; c < cin; ++c)
                        want += filters[k].a[(r - 1) * cin + c] * in.a[(pi - 1) * cin + c];
                }
                CHECK(out.a[(rp - 1) * cout + k] == doctest::Approx(want).epsilon(1e-12));
            }
    }
}

TEST_CASE("fractional stride upsamples") {
    Tensor in({2, 1});
    in.a = {1.0, 10.0};
    Tensor filt({1, 1});
    filt.a = {1.0};
    Tensor out = conv_forward(in, {filt}, {0.5});
    // extent ceil(2/0.5) = 4; single tap reads p = r', r'=1..4 with halves empty
    REQUIRE(out.shape == std::vector<int>{4, 1});
    CHECK(out.a[0] == 1.0);
    CHECK(out.a[1] == 0.0);  // p = 1.5: non-integer -> zero
    CHECK(out.a[2] == 10.0);
    CHECK(out.a[3] == 0.0);
}

TEST_CASE("conv forward in two dimensions") {
    // 3x3 single-channel input, 3x3 ones filter, stride 1: a sliding window
    // sum with zero boundary
    Tensor in({3, 3, 1});
    in.a = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    Tensor filt({3, 3, 1});
    filt.a.assign(9, 1.0);
    Tensor out = conv_forward(in, {filt}, {1.0, 1.0});
    REQUIRE(out.shape == std::vector<int>{3, 3, 1});
    CHECK(out.a[4] == 45.0);                 // center sees the full grid
    CHECK(out.a[0] == 1.0 + 2 + 4 + 5);      // corner window clipped to 2x2
    CHECK(out.a[2] == 2.0 + 3 + 5 + 6);

    // even filter extents with integer strides read only half-integer
    // positions, which the index rule sends to zero
    Tensor even({2, 2, 1});
    even.a = {1, 1, 1, 1};
    Tensor zero = conv_forward(in, {even}, {1.0, 1.0});
    for (double x : zero.a) CHECK(x == 0.0);
}

TEST_CASE("filter (1,2) norm") {
    Tensor f1({2, 1});
    f1.a = {3.0, -1.0};  // l1 = 4
    Tensor f2({2, 1});
    f2.a = {0.0, 3.0};  // l1 = 3
    CHECK(filter_norm_12({f1, f2}) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("conv net forward with pooling") {
    ConvNet net;
    net.input_shape = {4, 1};
    ConvLayer conv;
    conv.filters = {Tensor({1, 1})};
    conv.filters[0].a = {2.0};
    conv.strides = {1.0};
    conv.act = Activation::identity();
    conv.budget = 2.5;
    net.layers.push_back(conv);
    ConvLayer pool;
    pool.is_pool = true;
    pool.window = {2};
    net.layers.push_back(pool);
    validate(net);

    CHECK(latent_dim(net) == 4);
    CHECK(output_dim(net) == 2);
    Vec out = forward(net, {1.0, 5.0, -2.0, 3.0});
    REQUIRE(out.size() == 2);
    CHECK(out[0] == 10.0);  // max(2, 10)
    CHECK(out[1] == 6.0);   // max(-4, 6)
}

TEST_CASE("layer norms report per-kind values") {
    DenseNet net;
    net.layers.push_back({Mat(2, 2, {1, -2, 0, 2}), Activation::relu(),
                          BudgetKind::EntrywiseL1, 6.0});
    auto norms = layer_norms(net);
    REQUIRE(norms.size() == 1);
    CHECK(norms[0].layer_kind == "dense");
    REQUIRE(norms[0].entrywise_l1.has_value());
    CHECK(*norms[0].entrywise_l1 == doctest::Approx(5.0).epsilon(1e-12));
    REQUIRE(norms[0].spectral.has_value());
    REQUIRE(norms[0].budget.has_value());
    CHECK(*norms[0].budget == 6.0);
}

TEST_CASE("parameter vector round trip") {
    StreamRng rng = StreamRng::derive(32);
    DenseNet net = testutil::rand_dense(rng, {2, 4, 3},
                                        {Activation::tanh(), Activation::identity()},
                                        BudgetKind::Spectral);
    ReconMap f = net;
    const size_t n = num_params(f);
    CHECK(n == 2 * 4 + 4 * 3);
    Vec p = get_params(f);
    REQUIRE(p.size() == n);
    Vec q = p;
    for (double& x : q) x *= 0.5;
    set_params(f, q);
    CHECK(get_params(f) == q);
    Vec h = rand_vec(rng, 2);
    // halving all weights of a 2-layer tanh net changes the output
    CHECK(forward(f, h) != forward(net, h));
}

TEST_CASE("rescale pulls layers back onto their budgets") {
    DenseNet net;
    net.layers.push_back({Mat(1, 2, {3.0, 4.0}), Activation::identity(), BudgetKind::Spectral,
                          10.0});
    ReconMap f = net;
    Vec p = get_params(f);
    for (double& x : p) x *= 100.0;  // blow past the budget
    set_params(f, p);
    rescale_to_budgets(f);
    auto norms = layer_norms(f);
    CHECK(*norms[0].spectral == doctest::Approx(10.0).epsilon(1e-9));
    validate(f);
}

TEST_CASE("analytic gradients match central differences") {
    StreamRng rng = StreamRng::derive(33);
    DataSpace space = DataSpace::ball(Vec(3, 0.0), 50.0);  // projection inactive
    for (int trial = 0; trial < 5; ++trial) {
        DenseNet net = testutil::rand_dense(rng, {2, 5, 3},
                                            {Activation::tanh(), Activation::sigmoid()},
                                            BudgetKind::Spectral);
        ReconMap f = net;
        Vec z = rand_vec(rng, 3);
        Vec h = rand_vec(rng, 2);
        LossGradients g = loss_gradients(f, space, z, h, true, true);
        CHECK(g.loss == doctest::Approx(sqdist(z, eval(f, space, h))).epsilon(1e-12));

        const double step = 1e-5;
        for (size_t i = 0; i < h.size(); ++i) {
            Vec hp = h, hm = h;
            hp[i] += step;
            hm[i] -= step;
            const double want = (sqdist(z, eval(f, space, hp)) - sqdist(z, eval(f, space, hm))) /
                                (2 * step);
            CHECK(g.wrt_latent[i] == doctest::Approx(want).epsilon(1e-5));
        }
        Vec p = get_params(f);
        for (size_t i = 0; i < p.size(); i += 7) {
            Vec pp = p, pm = p;
            pp[i] += step;
            pm[i] -= step;
            ReconMap fp = f, fm = f;
            set_params(fp, pp);
            set_params(fm, pm);
            const double want = (sqdist(z, eval(fp, space, h)) - sqdist(z, eval(fm, space, h))) /
                                (2 * step);
            CHECK(g.wrt_params[i] == doctest::Approx(want).epsilon(1e-5));
        }
    }
}

TEST_CASE("map distance over a finite net") {
    LinearMap a{Mat(2, 1, {1.0, 0.0})};
    LinearMap b{Mat(2, 1, {0.0, 1.0})};
    LatentSpace fin = LatentSpace::finite({{1.0}, {2.0}});
    CHECK(map_distance(a, b, fin, 0.1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(map_distance(a, a, fin, 0.1) == 0.0);
}

TEST_CASE("model json round trips bit exactly") {
    StreamRng rng = StreamRng::derive(34);
    DenseNet net = testutil::rand_dense(rng, {2, 3, 2},
                                        {Activation::leaky_relu(0.02), Activation::identity()},
                                        BudgetKind::EntrywiseL1);
    // throw in values that stress shortest-round-trip printing
    net.layers[0].A.a[0] = 0.1;
    net.layers[0].A.a[1] = 1e-17;
    net.layers[0].A.a[2] = -0.0;
    net.layers[0].budget = entrywise_l1(net.layers[0].A) * 1.25;
    ReconMap f = net;

    ReconMap g = map_from_json(map_to_json(f));
    Vec pf = get_params(f), pg = get_params(g);
    REQUIRE(pf.size() == pg.size());
    for (size_t i = 0; i < pf.size(); ++i) {
        uint64_t bf, bg;
        static_assert(sizeof bf == sizeof pf[i]);
        std::memcpy(&bf, &pf[i], 8);
        std::memcpy(&bg, &pg[i], 8);
        CHECK(bf == bg);
    }

    const std::string path =
        (std::filesystem::temp_directory_path() / "latcode_roundtrip.json").string();
    map_save(f, path);
    ReconMap h = map_load(path);
    CHECK(get_params(h) == get_params(f));
    std::filesystem::remove(path);

    ConvNet cnet;
    cnet.input_shape = {4, 1};
    ConvLayer layer;
    layer.filters = {Tensor({2, 1}), Tensor({2, 1})};
    layer.filters[0].a = {0.25, -0.5};
    layer.filters[1].a = {1.0 / 3.0, 0.125};
    layer.strides = {2.0};
    layer.act = Activation::relu();
    layer.budget = filter_norm_12(layer.filters) * 1.5;
    cnet.layers.push_back(layer);
    ReconMap cf = cnet;
    ReconMap cg = map_from_json(map_to_json(cf));
    CHECK(get_params(cg) == get_params(cf));
    CHECK(forward(cg, {1, 2, 3, 4}) == forward(cf, {1, 2, 3, 4}));
}

TEST_CASE("model json rejects junk") {
    CHECK_THROWS_AS(map_from_json("{"), ValidationError);
    CHECK_THROWS_AS(map_from_json("{\"format\":\"other\"}"), ValidationError);
    CHECK_THROWS_AS(map_load("/nonexistent/path/model.json"), IoError);
}
