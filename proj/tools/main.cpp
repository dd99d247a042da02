#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "depthinit/errors.hpp"
#include "depthinit/report.hpp"

namespace {

using depthinit::RunConfig;
using nlohmann::json;

constexpr const char* kOutDirEnv = "DEPTHINIT_OUT_DIR";

// Exit codes: 0 ok, 2 solver infeasible, 3 numeric divergence, 64 usage,
// 66 data error.
enum ExitCode { kOk = 0, kInfeasible = 2, kDiverged = 3, kUsage = 64, kDataError = 66 };

std::optional<std::string> resolve_out(const std::string& out_flag,
                                       const std::string& default_name) {
    return depthinit::resolve_output_path(out_flag, std::getenv(kOutDirEnv), default_name);
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void emit_json(const json& report, const std::optional<std::string>& path) {
    if (path) {
        write_text(report.dump(2) + "\n", *path);
        std::cerr << "wrote " << *path << "\n";
    } else {
        std::cout << report.dump(2) << "\n";
    }
}

std::string strip_json_suffix(const std::string& path) {
    const std::string suffix = ".json";
    if (path.size() > suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size());
    return path;
}

void parse_data_flag(const std::string& value, RunConfig& config) {
    if (value == "synthetic") {
        config.data.source = "synthetic";
        return;
    }
    const std::string prefix = "cifar10:";
    if (value.rfind(prefix, 0) == 0) {
        config.data.source = "cifar10";
        config.data.path = value.substr(prefix.size());
        return;
    }
    throw CLI::ValidationError("--data", "expected 'synthetic' or 'cifar10:PATH'");
}

int run_solve_k(const RunConfig& config, const std::string& out_flag) {
    double check = 0.0;
    const depthinit::KSolution solution = depthinit::solve_run(config, check);
    emit_json(depthinit::solve_report_json(config, solution, check),
              resolve_out(out_flag, "solve_k.json"));
    return kOk;
}

int run_profile(const RunConfig& config, const std::string& out_flag) {
    const depthinit::VarianceProfile profile = depthinit::profile_run(config);
    const json report = depthinit::profile_report_json(profile, config);
    const auto out = resolve_out(out_flag, "profile");
    if (out) {
        const std::string base = strip_json_suffix(*out);
        write_text(report.dump(2) + "\n", base + ".json");
        std::ostringstream csv;
        depthinit::write_profile_csv(profile, csv);
        write_text(csv.str(), base + ".csv");
        std::cerr << "wrote " << base << ".json and " << base << ".csv\n";
    } else {
        std::cout << report.dump(2) << "\n";
    }
    return kOk;
}

int run_train(const RunConfig& config, const std::string& out_flag,
              const std::string& format) {
    const depthinit::TrainReport report = depthinit::train_run(config);
    const auto out = resolve_out(out_flag, "train_report.json");
    if (out) {
        const std::string base = strip_json_suffix(*out);
        if (format == "json" || format == "both")
            write_text(depthinit::train_report_json(report).dump(2) + "\n", base + ".json");
        if (format == "csv" || format == "both") {
            std::ostringstream csv;
            depthinit::write_train_csv(report, csv);
            write_text(csv.str(), base + ".csv");
        }
        std::cerr << "wrote " << base << (format == "csv" ? ".csv" : ".json") << "\n";
    } else if (format == "csv") {
        depthinit::write_train_csv(report, std::cout);
    } else {
        std::cout << depthinit::train_report_json(report).dump(2) << "\n";
    }
    return kOk;
}

int run_compare(const RunConfig& config, const std::string& out_flag) {
    const depthinit::CompareReport report = depthinit::compare_run(config);
    emit_json(depthinit::compare_report_json(report),
              resolve_out(out_flag, "compare_report.json"));

    std::cerr << "\nrank  final_loss    spec\n";
    int rank = 1;
    for (int idx : report.ranking) {
        const auto& row = report.rows[static_cast<std::size_t>(idx)];
        std::cerr << rank++ << "     ";
        if (row.ok)
            std::cerr << row.report->final_loss() << "    " << row.spec << "\n";
        else
            std::cerr << "FAILED (" << row.error << ")    " << row.spec << "\n";
    }
    return report.succeeded() > 0 ? kOk : 1;
}

int run_rerun(const std::string& report_path, const std::string& out_flag) {
    std::ifstream in(report_path);
    if (!in) throw depthinit::data_error("cannot open report " + report_path);
    json report;
    in >> report;
    emit_json(depthinit::rerun_from_report(report), resolve_out(out_flag, "rerun.json"));
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"depthinit: depth-aware weight initialization toolkit"};
    app.require_subcommand(1);

    RunConfig config;
    config.scheme.kind.clear();
    std::string out_flag;
    std::string format = "json";
    std::string data_flag = "synthetic";
    std::string report_path;
    long long limit = 0;

    auto add_scheme_flags = [&](CLI::App* cmd, bool required_scheme) {
        auto* opt = cmd->add_option("--scheme", config.scheme.kind,
                                    "glorot|he|const|depthwise-inc|depthwise-dec");
        if (required_scheme) opt->required();
        cmd->add_option("--dist", config.scheme.distribution, "normal|uniform");
        cmd->add_option("--fan-mode", config.scheme.fan_mode, "fan_in|fan_out (he only)");
        cmd->add_option("--variance", config.scheme.variance, "target network variance V")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--k", config.scheme.k, "explicit crossing depth K (> 1)");
        cmd->add_option("--shift", config.scheme.shift, "constant added to the log base")
            ->check(CLI::NonNegativeNumber);
    };
    auto add_net_flags = [&](CLI::App* cmd) {
        cmd->add_option("--layers", config.layers, "layer count L")
            ->check(CLI::Range(2, 1000000));
        cmd->add_option("--width", config.width, "hidden width n")->check(CLI::PositiveNumber);
    };
    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--data", data_flag, "synthetic | cifar10:PATH");
        cmd->add_option("--limit", limit, "max records to load")->check(CLI::PositiveNumber);
        cmd->add_option("--samples", config.data.samples, "synthetic sample count")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--dims", config.data.dims, "synthetic feature count")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--classes", config.data.classes, "synthetic class count")
            ->check(CLI::Range(2, 1000));
        cmd->add_option("--separation", config.data.separation, "synthetic class separation");
        cmd->add_option("--data-seed", config.data.seed, "synthetic generator seed");
        cmd->add_option("--scaling", config.data.scaling,
                        "zero_one|standardized|raw (synthetic only)")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, depthinit::Scaling>{
                    {"zero_one", depthinit::Scaling::ZeroOne},
                    {"standardized", depthinit::Scaling::Standardized},
                    {"raw", depthinit::Scaling::Raw}},
                CLI::ignore_case));
        cmd->add_option("--epochs", config.epochs, "training epochs")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--lr", config.lr, "SGD learning rate")->check(CLI::PositiveNumber);
        cmd->add_option("--batch", config.batch, "minibatch size")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", config.seed, "initialization + shuffle seed");
        cmd->add_flag("--train-bias,!--no-train-bias", config.train_bias,
                      "update biases during training (off reproduces the bias-free model)");
        cmd->add_option("--out", out_flag, "output path (stdout when absent)");
        cmd->add_option("--format", format, "json|csv|both")
            ->check(CLI::IsMember({"json", "csv", "both"}));
    };

    CLI::App* solve = app.add_subcommand("solve-k", "solve the crossing depth K from V");
    solve->add_option("--layers", config.layers, "layer count L")
        ->required()
        ->check(CLI::Range(2, 1000000));
    solve->add_option("--width", config.width, "uniform width n")
        ->required()
        ->check(CLI::PositiveNumber);
    solve->add_option("--variance", config.scheme.variance, "target network variance V")
        ->required()
        ->check(CLI::PositiveNumber);
    solve->add_option("--shift", config.scheme.shift, "constant added to the log base")
        ->check(CLI::NonNegativeNumber);
    solve->add_option("--out", out_flag, "output path (stdout when absent)");

    CLI::App* profile = app.add_subcommand("profile", "signal-propagation variance profile");
    add_scheme_flags(profile, true);
    add_net_flags(profile);
    profile->add_option("--trials", config.trials, "Monte Carlo trials")
        ->check(CLI::PositiveNumber);
    profile->add_option("--batch", config.batch, "batch size per trial")
        ->check(CLI::PositiveNumber);
    profile->add_option("--seed", config.seed, "master seed");
    profile->add_option("--input", config.input, "unit_normal|zero_one_uniform")
        ->check(CLI::IsMember({"unit_normal", "zero_one_uniform"}));
    profile->add_option("--threads", config.threads, "trial workers (0 = hardware)")
        ->check(CLI::NonNegativeNumber);
    profile->add_option("--out", out_flag, "output base path (stdout when absent)");

    CLI::App* train = app.add_subcommand("train", "train one scheme and report");
    add_scheme_flags(train, true);
    add_net_flags(train);
    add_train_flags(train);

    CLI::App* compare = app.add_subcommand("compare", "train several schemes, rank them");
    add_scheme_flags(compare, false);
    add_net_flags(compare);
    add_train_flags(compare);
    std::string schemes_flag;
    compare->add_option("--schemes", schemes_flag,
                        "comma list of kind[:dist] rows (default reproduces the "
                        "he/const/depthwise grid under both distributions)");

    CLI::App* rerun = app.add_subcommand("rerun", "re-run a report from its embedded config");
    rerun->add_option("--report", report_path, "existing report JSON")->required();
    rerun->add_option("--out", out_flag, "output path (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    config.batch = profile->parsed() && !profile->count("--batch") ? 256 : config.batch;
    if (limit > 0) config.data.limit = static_cast<int>(limit);
    if (data_flag != "synthetic") {
        try {
            parse_data_flag(data_flag, config);
        } catch (const CLI::Error& e) {
            std::cerr << e.what() << "\n";
            return kUsage;
        }
    }

    try {
        if (solve->parsed()) {
            config.command = "solve-k";
            return run_solve_k(config, out_flag);
        }
        if (profile->parsed()) {
            config.command = "profile";
            return run_profile(config, out_flag);
        }
        if (train->parsed()) {
            config.command = "train";
            return run_train(config, out_flag, format);
        }
        if (compare->parsed()) {
            config.command = "compare";
            if (config.scheme.kind.empty()) config.scheme.kind = "he";
            if (!config.scheme.variance) config.scheme.variance = 22.0;
            if (!schemes_flag.empty()) {
                std::stringstream ss(schemes_flag);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) config.schemes.push_back(item);
            }
            return run_compare(config, out_flag);
        }
        if (rerun->parsed()) return run_rerun(report_path, out_flag);
    } catch (const depthinit::no_valid_k_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInfeasible;
    } catch (const depthinit::unsupported_config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInfeasible;
    } catch (const depthinit::numeric_divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDiverged;
    } catch (const depthinit::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "run with --help for flag descriptions\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kUsage;
}
