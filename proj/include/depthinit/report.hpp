#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthinit/analyzer.hpp"
#include "depthinit/data.hpp"
#include "depthinit/scheme.hpp"

namespace depthinit {

struct DataConfig {
    std::string source = "synthetic";  // "synthetic" | "cifar10"
    std::string path;                  // cifar10 batch file
    std::optional<int> limit;
    int samples = 2048;
    int dims = 32;
    int classes = 10;
    double separation = 4.0;
    std::uint64_t seed = 7;
    Scaling scaling = Scaling::ZeroOne;

    Dataset load() const;
};

/// Serializable scheme selection. Validation of flag conflicts (for example
/// a variance passed to glorot) happens in to_scheme().
struct SchemeConfig {
    std::string kind = "he";  // glorot | he | const | depthwise-inc | depthwise-dec
    std::string distribution = "normal";
    std::string fan_mode = "fan_out";  // he only
    std::optional<double> variance;
    std::optional<double> k;
    int shift = 0;

    InitScheme to_scheme() const;
};

/// Everything a run needs; embedded verbatim in every report so any report
/// can be reproduced from its own config.
struct RunConfig {
    std::string command = "train";  // train | profile | compare | solve-k
    SchemeConfig scheme;
    int layers = 54;
    int width = 64;
    DataConfig data;
    int epochs = 20;
    double lr = 1e-3;
    int batch = 64;
    std::uint64_t seed = 42;
    /// When false, biases stay at their zero initialization, matching the
    /// bias-free model the variance recursions are derived for.
    bool train_bias = true;
    int trials = 16;                    // profile
    std::string input = "unit_normal";  // profile input kind
    int threads = 1;                    // profile trial workers
    std::vector<std::string> schemes;   // compare rows, e.g. "he:normal"

    /// Network trained by this config: layers-1 hidden layers of `width`
    /// plus an output layer sized to the dataset's class count.
    NetworkSpec train_spec(int input_dim, int classes) const;
};

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

struct EpochRecord {
    int epoch = 0;  // 0 is the pre-training baseline
    double loss = 0.0;
    double accuracy = 0.0;
};

struct GradSnapshot {
    int epoch = 0;  // network state after this many epochs
    std::vector<double> grad_variance;
};

struct TrainReport {
    RunConfig config;
    std::vector<EpochRecord> epochs;  // size = requested epochs + 1
    std::vector<GradSnapshot> grad_snapshots;
    std::vector<double> final_weight_variance;
    double wall_clock_seconds = 0.0;

    double final_loss() const { return epochs.back().loss; }
    double initial_loss() const { return epochs.front().loss; }
};

struct CompareReport {
    struct Row {
        std::string spec;        // e.g. "depthwise-inc:normal"
        std::string descriptor;  // resolved scheme descriptor
        bool ok = false;
        std::string error;
        std::optional<TrainReport> report;
    };
    RunConfig config;
    std::vector<Row> rows;     // scheme-list order
    std::vector<int> ranking;  // row indices, final loss ascending, failures last
    double wall_clock_seconds = 0.0;

    int succeeded() const;
};

/// Deterministic given the config. Throws numeric_divergence_error when the
/// loss leaves the finite range.
TrainReport train_run(const RunConfig& config);

/// One training run per scheme row under identical seed and data; a failing
/// row is recorded without aborting the others.
CompareReport compare_run(const RunConfig& config);

/// Empirical + theoretical profile over the uniform layers x width network.
VarianceProfile profile_run(const RunConfig& config);

/// Solve K for the config and verify the resulting plan's gain product.
KSolution solve_run(const RunConfig& config, double& gain_product_check);

std::vector<std::string> default_compare_grid();
SchemeConfig parse_scheme_spec(const std::string& spec, const SchemeConfig& base);

nlohmann::json train_report_json(const TrainReport& report);
TrainReport train_report_from_json(const nlohmann::json& j);
void write_train_csv(const TrainReport& report, std::ostream& out);

nlohmann::json profile_report_json(const VarianceProfile& profile, const RunConfig& config);
void write_profile_csv(const VarianceProfile& profile, std::ostream& out);

nlohmann::json compare_report_json(const CompareReport& report);
nlohmann::json solve_report_json(const RunConfig& config, const KSolution& solution,
                                 double gain_product_check);

/// Re-run the command recorded in a report's embedded config and return the
/// fresh report. Supports solve-k, profile, train and compare reports.
nlohmann::json rerun_from_report(const nlohmann::json& report);

/// Serialized report with every wall-clock field removed; two runs of the
/// same config compare equal on these bytes.
std::string canonical_report_bytes(nlohmann::json report);

/// Where a report should go: the explicit path if given, else default_name
/// inside `env_dir` (the DEPTHINIT_OUT_DIR value) if set, else nowhere
/// (meaning stdout).
std::optional<std::string> resolve_output_path(const std::string& out_flag,
                                               const char* env_dir,
                                               const std::string& default_name);

} // namespace depthinit
