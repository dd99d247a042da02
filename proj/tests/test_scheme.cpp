#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "depthinit/errors.hpp"
#include "depthinit/rng.hpp"
#include "depthinit/scheme.hpp"

using namespace depthinit;

TEST_CASE("base_variance formulas") {
    CHECK(base_variance(64, 64, BaseVarianceMode::HeFanIn) == 0.03125);
    CHECK(base_variance(64, 64, BaseVarianceMode::Glorot) == 0.015625);
    CHECK(base_variance(2, 8, BaseVarianceMode::HeFanIn) == 1.0);
    CHECK(base_variance(2, 8, BaseVarianceMode::HeFanOut) == 0.25);
    CHECK_THROWS_AS(base_variance(0, 8, BaseVarianceMode::HeFanIn), std::invalid_argument);
    CHECK_THROWS_AS(base_variance(8, -1, BaseVarianceMode::Glorot), std::invalid_argument);
}

TEST_CASE("depth_scale pinned values") {
    // exponent is exactly zero at l == K
    CHECK(depth_scale(8, 8.0, 0.03125, 0) == 1.0);
    // l = 64, K = 8: exponent -1/2, 0.03125^(-1/2) = sqrt(32)
    CHECK(depth_scale(64, 8.0, 0.03125, 0) ==
          doctest::Approx(5.656854249492381).epsilon(1e-12));
    // l = 2, K = 8: exponent +2, 0.03125^2
    CHECK(depth_scale(2, 8.0, 0.03125, 0) == doctest::Approx(9.765625e-4).epsilon(1e-12));
    // shift moves the crossing: l + c = K
    CHECK(depth_scale(6, 8.0, 0.03125, 2) == 1.0);
}

TEST_CASE("depth_scale rejects invalid domains") {
    CHECK_THROWS_AS(depth_scale(1, 8.0, 0.03125, 0), std::invalid_argument);
    CHECK_THROWS_AS(depth_scale(0, 8.0, 0.03125, 1), std::invalid_argument);
    CHECK_THROWS_AS(depth_scale(8, 1.0, 0.03125, 0), std::invalid_argument);
    CHECK_THROWS_AS(depth_scale(8, 0.5, 0.03125, 0), std::invalid_argument);
    CHECK_THROWS_AS(depth_scale(8, 8.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(depth_scale(8, 8.0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("depth_scale crossing and monotonicity over a randomized sweep") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const double k = rng.uniform(1.5, 200.0);
        const double alpha = rng.uniform(0.001, 0.999);
        const int shift = static_cast<int>(rng.below(4));
        const int l = 2 + static_cast<int>(rng.below(300));

        const double scale = depth_scale(l, k, alpha, shift);
        if (l + shift < k) CHECK(scale < 1.0);
        if (l + shift > k) CHECK(scale > 1.0);
        CHECK(depth_scale(l + 1, k, alpha, shift) > scale);

        // exact crossing at an integer K
        const int crossing_l = l;
        CHECK(depth_scale(crossing_l, static_cast<double>(crossing_l + shift), alpha, shift) ==
              1.0);
    }
}

TEST_CASE("log_inverse_sum values and bounds") {
    CHECK(log_inverse_sum(2) == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-15));

    // independent two-term oracle
    const double two_terms = 1.0 / std::log(2.0) + 1.0 / std::log(3.0);
    CHECK(log_inverse_sum(3) == doctest::Approx(two_terms).epsilon(1e-15));
    CHECK(log_inverse_sum(3) == doctest::Approx(2.3529342675158007).epsilon(1e-12));

    const double s54 = log_inverse_sum(54);
    CHECK(s54 > 53.0 / std::log(54.0));
    CHECK(s54 < 53.0 / std::log(2.0));

    CHECK_THROWS_AS(log_inverse_sum(1), std::invalid_argument);
}

TEST_CASE("solve_k pinned cases") {
    // V = 1 at L = 2 forces the depth scale at layer 2 to be 1, so K = 2
    CHECK(solve_k(2, 64, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

    // independent oracle: K = exp(53 / S(54)) with S computed by direct summation
    double s = 0.0;
    for (int l = 2; l <= 54; ++l) s += 1.0 / std::log(static_cast<double>(l));
    CHECK(solve_k(54, 64, 1.0) == doctest::Approx(std::exp(53.0 / s)).epsilon(1e-12));

    const KSolution sol = solve_k_detail(54, 64, 22.0);
    CHECK(sol.k > 1.0);
    CHECK(sol.alpha == 0.03125);
    CHECK(sol.sum == doctest::Approx(s).epsilon(1e-15));
}

TEST_CASE("solve_k error taxonomy") {
    CHECK_THROWS_AS(solve_k(54, 2, 22.0), unsupported_config_error);
    CHECK_THROWS_AS(solve_k(54, 1, 22.0), unsupported_config_error);
    // L = 2, n = 64: feasible only below (n/2)^(L-1) = 32
    CHECK_THROWS_AS(solve_k(2, 64, 40.0), no_valid_k_error);
    CHECK_THROWS_AS(solve_k(1, 64, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_k(54, 64, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_k(54, 64, -1.0), std::invalid_argument);
}

TEST_CASE("solve_k monotonicity in V and L") {
    double prev = solve_k(54, 64, 0.5);
    for (double v : {1.0, 2.0, 5.0, 22.0}) {
        const double k = solve_k(54, 64, v);
        CHECK(k < prev);  // strictly decreasing in V
        prev = k;
    }
    prev = solve_k(2, 64, 22.0);
    for (int layers : {3, 5, 10, 54, 200}) {
        const double k = solve_k(layers, 64, 22.0);
        CHECK(k > prev);  // strictly increasing in L for V >= 1
        prev = k;
    }
}

TEST_CASE("build_plan for He keeps every layer at the base variance") {
    const NetworkSpec spec = make_uniform_spec(6, 64);
    const LayerInitPlan plan = build_plan(spec, HeScheme{Distribution::Normal, FanMode::FanIn});
    for (const LayerInit& layer : plan.layers) {
        CHECK(layer.depth_scale == 1.0);
        CHECK(layer.weight_variance == 0.03125);
        CHECK(layer.dist_param == doctest::Approx(std::sqrt(0.03125)).epsilon(1e-15));
    }
    CHECK(gain_product(plan, spec, GainDirection::Forward) == 1.0);
    CHECK(gain_product(plan, spec, GainDirection::Backward) == 1.0);
}

TEST_CASE("build_plan constant scaling hits the target variance") {
    const NetworkSpec spec = make_uniform_spec(54, 64);
    const LayerInitPlan plan = build_plan(spec, ConstantScaledScheme{22.0, Distribution::Normal});

    const double expected = std::exp(std::log(22.0) / 53.0);  // 22^(1/53)
    CHECK(plan.layers[0].depth_scale == 1.0);
    double product = 1.0;
    for (int l = 2; l <= 54; ++l) {
        CHECK(plan.layers[static_cast<std::size_t>(l - 1)].depth_scale ==
              doctest::Approx(expected).epsilon(1e-14));
        product *= expected;
    }
    CHECK(product == doctest::Approx(22.0).epsilon(1e-12));
    CHECK(gain_product(plan, spec, GainDirection::Forward) ==
          doctest::Approx(22.0).epsilon(1e-9));
}

TEST_CASE("build_plan depthwise increasing yields a strictly rising scale") {
    const NetworkSpec spec = make_uniform_spec(54, 64);
    DepthwiseLogScheme scheme;
    scheme.k_source = KSource::solve_from_v(22.0);
    const LayerInitPlan plan = build_plan(spec, scheme);

    CHECK(plan.solved_k.has_value());
    CHECK(plan.layers[0].depth_scale == 1.0);
    for (int l = 3; l <= 54; ++l)
        CHECK(plan.layers[static_cast<std::size_t>(l - 1)].depth_scale >
              plan.layers[static_cast<std::size_t>(l - 2)].depth_scale);

    // independent product oracle over the 53 scaled layers
    double product = 1.0;
    for (int l = 2; l <= 54; ++l)
        product *= 0.5 * 64 * plan.layers[static_cast<std::size_t>(l - 1)].weight_variance;
    CHECK(product == doctest::Approx(22.0).epsilon(1e-9));
    CHECK(gain_product(plan, spec, GainDirection::Forward) ==
          doctest::Approx(22.0).epsilon(1e-9));
}

TEST_CASE("decreasing direction reverses the increasing sequence and keeps the product") {
    const NetworkSpec spec = make_uniform_spec(54, 64);
    DepthwiseLogScheme inc;
    inc.k_source = KSource::solve_from_v(22.0);
    DepthwiseLogScheme dec = inc;
    dec.direction = Direction::Decreasing;

    const LayerInitPlan plan_inc = build_plan(spec, inc);
    const LayerInitPlan plan_dec = build_plan(spec, dec);
    for (int l = 2; l <= 54; ++l)
        CHECK(plan_dec.layers[static_cast<std::size_t>(l - 1)].depth_scale ==
              plan_inc.layers[static_cast<std::size_t>(54 + 2 - l - 1)].depth_scale);
    CHECK(gain_product(plan_dec, spec, GainDirection::Forward) ==
          doctest::Approx(gain_product(plan_inc, spec, GainDirection::Forward))
              .epsilon(1e-12));
}

TEST_CASE("product identity sweep over L, n, V") {
    for (int layers : {2, 5, 10, 54}) {
        for (int n : {8, 64, 256}) {
            for (double v : {0.5, 1.0, 22.0}) {
                const NetworkSpec spec = make_uniform_spec(layers, n);
                DepthwiseLogScheme scheme;
                scheme.k_source = KSource::solve_from_v(v);
                // L=2, n=8 cannot reach V=22: (n/2)^(L-1) = 4 < 22
                if (layers == 2 && n == 8 && v == 22.0) {
                    CHECK_THROWS_AS(build_plan(spec, scheme), no_valid_k_error);
                    continue;
                }
                const LayerInitPlan plan = build_plan(spec, scheme);
                CHECK(gain_product(plan, spec, GainDirection::Forward) ==
                      doctest::Approx(v).epsilon(1e-9));
                CHECK(gain_product(plan, spec, GainDirection::Backward) ==
                      doctest::Approx(v).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("solved depthwise plans honor the shift constant") {
    const NetworkSpec spec = make_uniform_spec(10, 64);
    DepthwiseLogScheme scheme;
    scheme.k_source = KSource::solve_from_v(5.0);
    scheme.shift = 3;
    const LayerInitPlan plan = build_plan(spec, scheme);
    CHECK(gain_product(plan, spec, GainDirection::Forward) ==
          doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("solving K requires uniform hidden widths") {
    NetworkSpec spec;
    spec.input_dim = 16;
    spec.layer_widths = {16, 32, 16, 10};
    DepthwiseLogScheme scheme;
    scheme.k_source = KSource::solve_from_v(4.0);
    CHECK_THROWS_AS(build_plan(spec, scheme), unsupported_config_error);

    // a classifier head narrower than the hidden stack is fine
    spec.layer_widths = {16, 16, 16, 10};
    const LayerInitPlan plan = build_plan(spec, scheme);
    CHECK(gain_product(plan, spec, GainDirection::Backward) ==
          doctest::Approx(4.0).epsilon(1e-9));

    // explicit K never needs uniformity
    spec.layer_widths = {16, 32, 16, 10};
    DepthwiseLogScheme explicit_scheme;
    explicit_scheme.k_source = KSource::explicit_k(3.0);
    CHECK_NOTHROW(build_plan(spec, explicit_scheme));
}

TEST_CASE("gain_product shape checks and L=2 single factor") {
    const NetworkSpec spec = make_uniform_spec(2, 16);
    const LayerInitPlan plan = build_plan(spec, HeScheme{});
    CHECK(gain_product(plan, spec, GainDirection::Forward) == 1.0);

    const NetworkSpec other = make_uniform_spec(3, 16);
    CHECK_THROWS_AS(gain_product(plan, other, GainDirection::Forward),
                    std::invalid_argument);
}

TEST_CASE("sample_matrix realizes the planned variance") {
    Rng rng(99);
    const Matrix zero = sample_matrix(rng, 8, 8, 0.0, Distribution::Normal);
    for (std::size_t i = 0; i < zero.size(); ++i) CHECK(zero.data()[i] == 0.0);

    // uniform half-width sqrt(3 * 0.03125)
    const double half_width = std::sqrt(3.0 * 0.03125);
    CHECK(half_width == doctest::Approx(0.30618621784789724).epsilon(1e-12));
    Rng rng_u(7);
    const Matrix u = sample_matrix(rng_u, 100, 100, 0.03125, Distribution::Uniform);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        max_abs = std::max(max_abs, std::fabs(u.data()[i]));
    CHECK(max_abs <= half_width);
    CHECK(max_abs > 0.9 * half_width);

    for (Distribution dist : {Distribution::Normal, Distribution::Uniform}) {
        Rng r(123);
        const Matrix m = sample_matrix(r, 1000, 1000, 0.03125, dist);
        const double var = population_variance(m);
        CHECK(var == doctest::Approx(0.03125).epsilon(0.01));
        const double std_err_bound = 3.0 * std::sqrt(0.03125) / 1000.0;
        CHECK(std::fabs(population_mean(m)) < std_err_bound);
    }

    CHECK_THROWS_AS(sample_matrix(rng, 2, 2, -0.1, Distribution::Normal),
                    std::invalid_argument);
}

TEST_CASE("sample_matrix is deterministic per seed") {
    Rng a(5), b(5);
    const Matrix ma = sample_matrix(a, 16, 16, 0.5, Distribution::Normal);
    const Matrix mb = sample_matrix(b, 16, 16, 0.5, Distribution::Normal);
    CHECK(ma == mb);
}

TEST_CASE("scheme descriptors name the configuration") {
    CHECK(scheme_descriptor(HeScheme{}) == "he(normal,fan_out)");
    CHECK(scheme_descriptor(GlorotScheme{Distribution::Uniform}) == "glorot(uniform)");
    CHECK(scheme_descriptor(ConstantScaledScheme{22.0, Distribution::Normal}) ==
          "const(V=22,normal)");
    DepthwiseLogScheme d;
    d.k_source = KSource::solve_from_v(22.0);
    d.direction = Direction::Decreasing;
    d.distribution = Distribution::Uniform;
    CHECK(scheme_descriptor(d) == "depthwise-dec(V=22,uniform)");
}
