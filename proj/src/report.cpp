#include "depthinit/report.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace depthinit {

using nlohmann::json;

namespace {

json optional_to_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json optional_to_json(const std::optional<int>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace

json config_to_json(const RunConfig& config) {
    json scheme{{"kind", config.scheme.kind},
                {"distribution", config.scheme.distribution},
                {"fan_mode", config.scheme.fan_mode},
                {"variance", optional_to_json(config.scheme.variance)},
                {"k", optional_to_json(config.scheme.k)},
                {"shift", config.scheme.shift}};
    json data{{"source", config.data.source},
              {"path", config.data.path},
              {"limit", optional_to_json(config.data.limit)},
              {"samples", config.data.samples},
              {"dims", config.data.dims},
              {"classes", config.data.classes},
              {"separation", config.data.separation},
              {"seed", config.data.seed},
              {"scaling", scaling_name(config.data.scaling)}};
    return json{{"command", config.command},
                {"scheme", scheme},
                {"layers", config.layers},
                {"width", config.width},
                {"data", data},
                {"epochs", config.epochs},
                {"lr", config.lr},
                {"batch", config.batch},
                {"seed", config.seed},
                {"train_bias", config.train_bias},
                {"trials", config.trials},
                {"input", config.input},
                {"threads", config.threads},
                {"schemes", config.schemes}};
}

RunConfig config_from_json(const json& j) {
    RunConfig config;
    config.command = j.at("command").get<std::string>();
    const json& s = j.at("scheme");
    config.scheme.kind = s.at("kind").get<std::string>();
    config.scheme.distribution = s.at("distribution").get<std::string>();
    config.scheme.fan_mode = s.at("fan_mode").get<std::string>();
    config.scheme.variance = optional_from_json<double>(s, "variance");
    config.scheme.k = optional_from_json<double>(s, "k");
    config.scheme.shift = s.at("shift").get<int>();
    config.layers = j.at("layers").get<int>();
    config.width = j.at("width").get<int>();
    const json& d = j.at("data");
    config.data.source = d.at("source").get<std::string>();
    config.data.path = d.at("path").get<std::string>();
    config.data.limit = optional_from_json<int>(d, "limit");
    config.data.samples = d.at("samples").get<int>();
    config.data.dims = d.at("dims").get<int>();
    config.data.classes = d.at("classes").get<int>();
    config.data.separation = d.at("separation").get<double>();
    config.data.seed = d.at("seed").get<std::uint64_t>();
    config.data.scaling = parse_scaling(d.at("scaling").get<std::string>());
    config.epochs = j.at("epochs").get<int>();
    config.lr = j.at("lr").get<double>();
    config.batch = j.at("batch").get<int>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.train_bias = j.at("train_bias").get<bool>();
    config.trials = j.at("trials").get<int>();
    config.input = j.at("input").get<std::string>();
    config.threads = j.at("threads").get<int>();
    config.schemes = j.at("schemes").get<std::vector<std::string>>();
    return config;
}

json train_report_json(const TrainReport& report) {
    json epochs = json::array();
    for (const EpochRecord& e : report.epochs)
        epochs.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
    json snapshots = json::array();
    for (const GradSnapshot& s : report.grad_snapshots)
        snapshots.push_back({{"epoch", s.epoch}, {"grad_variance", s.grad_variance}});
    return json{{"config", config_to_json(report.config)},
                {"epochs", epochs},
                {"grad_snapshots", snapshots},
                {"final_weight_variance", report.final_weight_variance},
                {"wall_clock_seconds", report.wall_clock_seconds}};
}

TrainReport train_report_from_json(const json& j) {
    TrainReport report;
    report.config = config_from_json(j.at("config"));
    for (const json& e : j.at("epochs"))
        report.epochs.push_back({e.at("epoch").get<int>(), e.at("loss").get<double>(),
                                 e.at("accuracy").get<double>()});
    for (const json& s : j.at("grad_snapshots"))
        report.grad_snapshots.push_back(
            {s.at("epoch").get<int>(), s.at("grad_variance").get<std::vector<double>>()});
    report.final_weight_variance = j.at("final_weight_variance").get<std::vector<double>>();
    report.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    return report;
}

void write_train_csv(const TrainReport& report, std::ostream& out) {
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "epoch,loss,accuracy\n";
    for (const EpochRecord& e : report.epochs)
        out << e.epoch << ',' << e.loss << ',' << e.accuracy << '\n';
}

json profile_report_json(const VarianceProfile& profile, const RunConfig& config) {
    json layers = json::array();
    const bool empirical = profile.has_empirical();
    ProfileComparison cmp;
    if (empirical) cmp = compare_profiles(profile);
    for (int l = 0; l < profile.layer_count(); ++l) {
        const std::size_t li = static_cast<std::size_t>(l);
        json row{{"layer", l + 1},
                 {"theo_fwd", profile.theoretical_forward[li]},
                 {"theo_bwd", profile.theoretical_backward[li]}};
        if (empirical) {
            row["emp_act_var"] = profile.empirical_act_var[li];
            row["emp_grad_var"] = profile.empirical_grad_var[li];
            row["rel_err_fwd"] = cmp.rel_err_forward[li];
            row["rel_err_bwd"] = cmp.rel_err_backward[li];
            row["dead_fwd"] = static_cast<bool>(cmp.dead_forward[li]);
            row["dead_bwd"] = static_cast<bool>(cmp.dead_backward[li]);
        }
        layers.push_back(std::move(row));
    }
    json body{{"scheme", profile.scheme},
              {"trials", profile.trials},
              {"batch", profile.batch},
              {"seed", profile.seed},
              {"input_kind", profile.input_kind},
              {"layers", layers}};
    if (empirical) {
        body["empirical_output_grad_var"] = profile.empirical_output_grad_var;
        body["max_abs_rel_err_fwd"] = cmp.max_abs_rel_err_forward;
        body["max_abs_rel_err_bwd"] = cmp.max_abs_rel_err_backward;
        body["any_dead"] = cmp.any_dead();
    }
    return json{{"config", config_to_json(config)}, {"profile", body}};
}

void write_profile_csv(const VarianceProfile& profile, std::ostream& out) {
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "layer,theo_fwd,theo_bwd,emp_act_var,emp_grad_var,rel_err_fwd,rel_err_bwd\n";
    const bool empirical = profile.has_empirical();
    ProfileComparison cmp;
    if (empirical) cmp = compare_profiles(profile);
    for (int l = 0; l < profile.layer_count(); ++l) {
        const std::size_t li = static_cast<std::size_t>(l);
        out << (l + 1) << ',' << profile.theoretical_forward[li] << ','
            << profile.theoretical_backward[li] << ',';
        if (empirical)
            out << profile.empirical_act_var[li] << ',' << profile.empirical_grad_var[li]
                << ',' << cmp.rel_err_forward[li] << ',' << cmp.rel_err_backward[li];
        else
            out << ",,,";
        out << '\n';
    }
}

json compare_report_json(const CompareReport& report) {
    json rows = json::array();
    for (const CompareReport::Row& row : report.rows) {
        json r{{"spec", row.spec},
               {"descriptor", row.descriptor},
               {"ok", row.ok},
               {"error", row.error}};
        if (row.report) {
            r["final_loss"] = row.report->final_loss();
            r["final_accuracy"] = row.report->epochs.back().accuracy;
            r["report"] = train_report_json(*row.report);
        } else {
            r["final_loss"] = nullptr;
            r["final_accuracy"] = nullptr;
            r["report"] = nullptr;
        }
        rows.push_back(std::move(r));
    }
    json ranking = json::array();
    int rank = 1;
    for (int idx : report.ranking) {
        const auto& row = report.rows[static_cast<std::size_t>(idx)];
        ranking.push_back({{"rank", rank++},
                           {"spec", row.spec},
                           {"ok", row.ok},
                           {"final_loss", row.ok ? json(row.report->final_loss()) : json(nullptr)}});
    }
    return json{{"config", config_to_json(report.config)},
                {"rows", rows},
                {"ranking", ranking},
                {"wall_clock_seconds", report.wall_clock_seconds}};
}

json solve_report_json(const RunConfig& config, const KSolution& solution,
                       double gain_product_check) {
    return json{{"config", config_to_json(config)},
                {"K", solution.k},
                {"S", solution.sum},
                {"alpha", solution.alpha},
                {"V", config.scheme.variance ? json(*config.scheme.variance) : json(nullptr)},
                {"L", config.layers},
                {"n", config.width},
                {"shift", config.scheme.shift},
                {"gain_product_check", gain_product_check}};
}

json rerun_from_report(const json& report) {
    const RunConfig config = config_from_json(report.at("config"));
    if (config.command == "train") return train_report_json(train_run(config));
    if (config.command == "compare") return compare_report_json(compare_run(config));
    if (config.command == "profile")
        return profile_report_json(profile_run(config), config);
    if (config.command == "solve-k") {
        double check = 0.0;
        const KSolution solution = solve_run(config, check);
        return solve_report_json(config, solution, check);
    }
    throw std::invalid_argument("rerun: unknown command in embedded config: " +
                                config.command);
}

namespace {

void strip_wall_clock(json& j) {
    if (j.is_object()) {
        j.erase("wall_clock_seconds");
        for (auto& [key, value] : j.items()) strip_wall_clock(value);
    } else if (j.is_array()) {
        for (json& item : j) strip_wall_clock(item);
    }
}

} // namespace

std::string canonical_report_bytes(json report) {
    strip_wall_clock(report);
    return report.dump(2);
}

std::optional<std::string> resolve_output_path(const std::string& out_flag,
                                               const char* env_dir,
                                               const std::string& default_name) {
    if (!out_flag.empty()) return out_flag;
    if (env_dir != nullptr && env_dir[0] != '\0')
        return std::string(env_dir) + "/" + default_name;
    return std::nullopt;
}

} // namespace depthinit
