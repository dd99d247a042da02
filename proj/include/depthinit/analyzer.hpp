#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depthinit/network.hpp"
#include "depthinit/scheme.hpp"

namespace depthinit {

/// Per-layer variance amplification, theoretical and measured. Forward
/// entries are Var[y_l]/Var[y_1]; backward entries are
/// Var[dx_l]/Var[dx_{L+1}] where dx_{L+1} is the synthetic gradient injected
/// at the output. The profiling pass gates the gradient through ReLU at
/// every layer, so the half factor applies to each product term.
struct VarianceProfile {
    std::vector<double> theoretical_forward;
    std::vector<double> theoretical_backward;
    std::vector<double> empirical_act_var;      // Var[y_l], raw
    std::vector<double> empirical_grad_var;     // Var[dx_l], raw
    double empirical_output_grad_var = 0.0;     // Var of the injected gradient
    int trials = 0;
    int batch = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string input_kind;

    int layer_count() const { return static_cast<int>(theoretical_forward.size()); }
    bool has_empirical() const { return !empirical_act_var.empty(); }
};

enum class InputKind { UnitNormal, ZeroOneUniform };

const char* input_kind_name(InputKind k);

struct ProfileOptions {
    int trials = 16;
    int batch = 256;
    std::uint64_t seed = 0;
    InputKind input = InputKind::UnitNormal;
    /// Worker threads for the trial loop; 0 means hardware concurrency.
    /// Aggregates are reduced in trial order and do not depend on this.
    int threads = 1;
};

/// Theoretical fields only. Forward ratio at layer l is the product over
/// j = 2..l of (1/2) * fan_in(j) * Var[w_j]; backward ratio at layer l is the
/// product over j = l..L of (1/2) * fan_out(j) * Var[w_j].
VarianceProfile theoretical_profile(const NetworkSpec& spec, const LayerInitPlan& plan);

/// Monte Carlo measurement over `trials` freshly initialized networks.
/// Per-trial seeds derive from (seed, trial index). Empirical act variance is
/// the across-trial mean of Var[y_l]; grad variance the mean of Var[dx_l]
/// after injecting a unit-variance synthetic gradient at the output.
VarianceProfile empirical_profile(const NetworkSpec& spec, const LayerInitPlan& plan,
                                  const ProfileOptions& options);
VarianceProfile empirical_profile(const NetworkSpec& spec, const InitScheme& scheme,
                                  const ProfileOptions& options);

inline constexpr double kDeadSignalThreshold = 1e-30;

/// Per-layer relative error of measured amplification against theory, plus
/// dead-signal flags for variances that underflow kDeadSignalThreshold.
/// Entries with a degenerate 0/0 normalization come out as NaN.
struct ProfileComparison {
    std::vector<double> rel_err_forward;
    std::vector<double> rel_err_backward;
    double max_abs_rel_err_forward = 0.0;
    double max_abs_rel_err_backward = 0.0;
    std::vector<bool> dead_forward;
    std::vector<bool> dead_backward;
    bool any_dead() const;
};

ProfileComparison compare_profiles(const VarianceProfile& profile);

} // namespace depthinit
