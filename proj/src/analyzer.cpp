#include "depthinit/analyzer.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "depthinit/rng.hpp"

namespace depthinit {

const char* input_kind_name(InputKind k) {
    return k == InputKind::UnitNormal ? "unit_normal" : "zero_one_uniform";
}

VarianceProfile theoretical_profile(const NetworkSpec& spec, const LayerInitPlan& plan) {
    spec.validate();
    if (plan.layer_count() != spec.layer_count())
        throw std::invalid_argument("theoretical_profile: plan and spec layer counts differ");
    const int layers = spec.layer_count();

    VarianceProfile profile;
    profile.scheme = plan.descriptor;
    profile.theoretical_forward.resize(static_cast<std::size_t>(layers));
    profile.theoretical_backward.resize(static_cast<std::size_t>(layers));

    double running = 1.0;  // empty product at layer 1
    profile.theoretical_forward[0] = running;
    for (int l = 2; l <= layers; ++l) {
        running *= 0.5 * spec.fan_in(l) *
                   plan.layers[static_cast<std::size_t>(l - 1)].weight_variance;
        profile.theoretical_forward[static_cast<std::size_t>(l - 1)] = running;
    }
    running = 1.0;
    for (int l = layers; l >= 1; --l) {
        running *= 0.5 * spec.fan_out(l) *
                   plan.layers[static_cast<std::size_t>(l - 1)].weight_variance;
        profile.theoretical_backward[static_cast<std::size_t>(l - 1)] = running;
    }
    return profile;
}

namespace {

struct TrialResult {
    std::vector<double> act_var;
    std::vector<double> grad_var;
    double out_grad_var = 0.0;
};

TrialResult run_trial(const NetworkSpec& spec, const LayerInitPlan& plan,
                      const ProfileOptions& options, int trial) {
    const std::uint64_t trial_seed = derive_seed(options.seed, static_cast<std::uint64_t>(trial));
    DenseNetwork net = init_network(spec, plan, trial_seed);
    Rng io_rng(derive_seed(trial_seed, 1));

    const int layers = spec.layer_count();
    Matrix batch(static_cast<std::size_t>(spec.input_dim),
                 static_cast<std::size_t>(options.batch));
    for (std::size_t i = 0; i < batch.size(); ++i)
        batch.data()[i] =
            options.input == InputKind::UnitNormal ? io_rng.normal() : io_rng.uniform01();

    TrialResult result;
    result.act_var.resize(static_cast<std::size_t>(layers));
    result.grad_var.resize(static_cast<std::size_t>(layers));

    const BatchActivations acts = forward(net, batch);
    for (int l = 1; l <= layers; ++l)
        result.act_var[static_cast<std::size_t>(l - 1)] =
            population_variance(acts.pre[static_cast<std::size_t>(l - 1)]);

    // Synthetic unit-variance gradient at the output, gated through ReLU at
    // every layer so the measurement matches the all-ReLU recursion.
    Matrix delta(static_cast<std::size_t>(spec.fan_out(layers)),
                 static_cast<std::size_t>(options.batch));
    for (std::size_t i = 0; i < delta.size(); ++i) delta.data()[i] = io_rng.normal();
    result.out_grad_var = population_variance(delta);

    for (int l = layers; l >= 1; --l) {
        const std::size_t li = static_cast<std::size_t>(l - 1);
        const Matrix delta_y = relu_gate(delta, acts.pre[li]);
        delta = matmul_tn(net.weights[li], delta_y);
        result.grad_var[li] = population_variance(delta);
    }
    return result;
}

} // namespace

VarianceProfile empirical_profile(const NetworkSpec& spec, const LayerInitPlan& plan,
                                  const ProfileOptions& options) {
    spec.validate();
    if (options.trials < 1) throw std::invalid_argument("empirical_profile: trials must be >= 1");
    if (options.batch < 1) throw std::invalid_argument("empirical_profile: batch must be >= 1");

    VarianceProfile profile = theoretical_profile(spec, plan);
    profile.trials = options.trials;
    profile.batch = options.batch;
    profile.seed = options.seed;
    profile.input_kind = input_kind_name(options.input);

    std::vector<TrialResult> slots(static_cast<std::size_t>(options.trials));
    int workers = options.threads == 0
                      ? static_cast<int>(std::thread::hardware_concurrency())
                      : options.threads;
    if (workers < 1) workers = 1;
    if (workers > options.trials) workers = options.trials;

    if (workers == 1) {
        for (int t = 0; t < options.trials; ++t)
            slots[static_cast<std::size_t>(t)] = run_trial(spec, plan, options, t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (int t = w; t < options.trials; t += workers)
                    slots[static_cast<std::size_t>(t)] = run_trial(spec, plan, options, t);
            });
        }
        for (auto& th : pool) th.join();
    }

    const int layers = spec.layer_count();
    profile.empirical_act_var.assign(static_cast<std::size_t>(layers), 0.0);
    profile.empirical_grad_var.assign(static_cast<std::size_t>(layers), 0.0);
    profile.empirical_output_grad_var = 0.0;
    // Fixed-order reduction: aggregates are identical for any worker count.
    for (const TrialResult& trial : slots) {
        for (int l = 0; l < layers; ++l) {
            profile.empirical_act_var[static_cast<std::size_t>(l)] +=
                trial.act_var[static_cast<std::size_t>(l)];
            profile.empirical_grad_var[static_cast<std::size_t>(l)] +=
                trial.grad_var[static_cast<std::size_t>(l)];
        }
        profile.empirical_output_grad_var += trial.out_grad_var;
    }
    const double inv_trials = 1.0 / options.trials;
    for (int l = 0; l < layers; ++l) {
        profile.empirical_act_var[static_cast<std::size_t>(l)] *= inv_trials;
        profile.empirical_grad_var[static_cast<std::size_t>(l)] *= inv_trials;
    }
    profile.empirical_output_grad_var *= inv_trials;
    return profile;
}

VarianceProfile empirical_profile(const NetworkSpec& spec, const InitScheme& scheme,
                                  const ProfileOptions& options) {
    return empirical_profile(spec, build_plan(spec, scheme), options);
}

bool ProfileComparison::any_dead() const {
    for (bool f : dead_forward)
        if (f) return true;
    for (bool f : dead_backward)
        if (f) return true;
    return false;
}

ProfileComparison compare_profiles(const VarianceProfile& profile) {
    if (!profile.has_empirical())
        throw std::invalid_argument("compare_profiles: profile lacks empirical fields");
    const int layers = profile.layer_count();
    if (static_cast<int>(profile.empirical_act_var.size()) != layers ||
        static_cast<int>(profile.empirical_grad_var.size()) != layers)
        throw std::invalid_argument("compare_profiles: field lengths differ");

    ProfileComparison cmp;
    cmp.rel_err_forward.resize(static_cast<std::size_t>(layers));
    cmp.rel_err_backward.resize(static_cast<std::size_t>(layers));
    cmp.dead_forward.resize(static_cast<std::size_t>(layers));
    cmp.dead_backward.resize(static_cast<std::size_t>(layers));

    const double act_base = profile.empirical_act_var[0];
    const double grad_base = profile.empirical_output_grad_var;
    for (int l = 0; l < layers; ++l) {
        const std::size_t li = static_cast<std::size_t>(l);
        cmp.dead_forward[li] = profile.empirical_act_var[li] < kDeadSignalThreshold;
        cmp.dead_backward[li] = profile.empirical_grad_var[li] < kDeadSignalThreshold;

        const double fwd_ratio = profile.empirical_act_var[li] / act_base;
        const double bwd_ratio = profile.empirical_grad_var[li] / grad_base;
        cmp.rel_err_forward[li] = fwd_ratio / profile.theoretical_forward[li] - 1.0;
        cmp.rel_err_backward[li] = bwd_ratio / profile.theoretical_backward[li] - 1.0;
        if (std::isfinite(cmp.rel_err_forward[li]))
            cmp.max_abs_rel_err_forward =
                std::max(cmp.max_abs_rel_err_forward, std::fabs(cmp.rel_err_forward[li]));
        if (std::isfinite(cmp.rel_err_backward[li]))
            cmp.max_abs_rel_err_backward =
                std::max(cmp.max_abs_rel_err_backward, std::fabs(cmp.rel_err_backward[li]));
    }
    return cmp;
}

} // namespace depthinit
