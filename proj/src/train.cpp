#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "depthinit/errors.hpp"
#include "depthinit/network.hpp"
#include "depthinit/report.hpp"
#include "depthinit/rng.hpp"

namespace depthinit {

Dataset DataConfig::load() const {
    if (source == "synthetic")
        return gen_synthetic(seed, samples, dims, classes, separation, scaling);
    if (source == "cifar10") return load_cifar10_binary(path, limit);
    throw std::invalid_argument("unknown data source: " + source);
}

InitScheme SchemeConfig::to_scheme() const {
    Distribution dist;
    if (distribution == "normal")
        dist = Distribution::Normal;
    else if (distribution == "uniform")
        dist = Distribution::Uniform;
    else
        throw std::invalid_argument("unknown distribution: " + distribution);

    if (kind == "glorot" || kind == "he") {
        if (variance || k)
            throw std::invalid_argument("scheme '" + kind +
                                        "' does not take a variance or K");
        if (kind == "glorot") return GlorotScheme{dist};
        FanMode mode;
        if (fan_mode == "fan_in")
            mode = FanMode::FanIn;
        else if (fan_mode == "fan_out")
            mode = FanMode::FanOut;
        else
            throw std::invalid_argument("unknown fan mode: " + fan_mode);
        return HeScheme{dist, mode};
    }
    if (kind == "const") {
        if (!variance) throw std::invalid_argument("scheme 'const' requires a variance");
        if (k) throw std::invalid_argument("scheme 'const' does not take K");
        return ConstantScaledScheme{*variance, dist};
    }
    if (kind == "depthwise-inc" || kind == "depthwise-dec") {
        if (variance && k)
            throw std::invalid_argument("pass either a variance or K, not both");
        if (!variance && !k)
            throw std::invalid_argument("scheme '" + kind + "' requires a variance or K");
        DepthwiseLogScheme scheme;
        scheme.k_source = k ? KSource::explicit_k(*k) : KSource::solve_from_v(*variance);
        scheme.shift = shift;
        scheme.direction =
            kind == "depthwise-inc" ? Direction::Increasing : Direction::Decreasing;
        scheme.distribution = dist;
        return scheme;
    }
    throw std::invalid_argument("unknown scheme kind: " + kind);
}

NetworkSpec RunConfig::train_spec(int input_dim, int classes) const {
    if (layers < 2) throw std::invalid_argument("at least 2 layers required");
    NetworkSpec spec;
    spec.input_dim = input_dim;
    spec.layer_widths.assign(static_cast<std::size_t>(layers - 1), width);
    spec.layer_widths.push_back(classes);
    spec.validate();
    return spec;
}

namespace {

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

EvalResult evaluate(const DenseNetwork& net, const Dataset& ds,
                    const std::vector<int>& indices, int batch) {
    const int total = static_cast<int>(indices.size());
    double loss_sum = 0.0;
    int correct = 0;
    for (int begin = 0; begin < total; begin += batch) {
        const int count = std::min(batch, total - begin);
        const Matrix x = gather_batch(ds, indices, begin, count);
        const std::vector<int> labels = gather_labels(ds, indices, begin, count);
        const BatchActivations acts = forward(net, x);
        loss_sum += loss_softmax_ce(acts.pre.back(), labels) * count;
        const std::vector<int> pred = argmax_per_column(acts.pre.back());
        for (int j = 0; j < count; ++j)
            if (pred[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(j)])
                ++correct;
    }
    return {loss_sum / total, static_cast<double>(correct) / total};
}

void shuffle_indices(std::vector<int>& indices, Rng& rng) {
    for (std::size_t i = indices.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(indices[i], indices[j]);
    }
}

std::vector<double> weight_grad_variances(const GradientSet& grads) {
    std::vector<double> vars;
    vars.reserve(grads.weight_grads.size());
    for (const Matrix& g : grads.weight_grads) vars.push_back(population_variance(g));
    return vars;
}

} // namespace

TrainReport train_run(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
    if (!(config.lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");

    const Dataset ds = config.data.load();
    const NetworkSpec spec = config.train_spec(ds.dims(), ds.num_classes);
    const LayerInitPlan plan = build_plan(spec, config.scheme.to_scheme());
    DenseNetwork net = init_network(spec, plan, config.seed);

    TrainReport report;
    report.config = config;

    const int total = static_cast<int>(ds.size());
    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);

    const EvalResult baseline = evaluate(net, ds, order, config.batch);
    report.epochs.push_back({0, baseline.loss, baseline.accuracy});

    // Gradient snapshots describe the network state after 0, mid and all
    // epochs; each is the first minibatch gradient at that state.
    const int mid = config.epochs / 2;
    auto wants_snapshot = [&](int after_epochs) {
        return after_epochs == 0 || after_epochs == mid || after_epochs == config.epochs;
    };

    Rng shuffle_rng(derive_seed(config.seed, 1));
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        double loss_sum = 0.0;
        int correct = 0;
        bool first_batch = true;
        for (int begin = 0; begin < total; begin += config.batch) {
            const int count = std::min(config.batch, total - begin);
            const Matrix x = gather_batch(ds, order, begin, count);
            const std::vector<int> labels = gather_labels(ds, order, begin, count);
            const BatchActivations acts = forward(net, x);
            const double batch_loss = loss_softmax_ce(acts.pre.back(), labels);
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "train: loss became non-finite at epoch " << epoch << ", sample offset "
                    << begin << " (exploding-gradient signature; lower the learning rate "
                    << "or the target variance)";
                throw numeric_divergence_error(msg.str());
            }
            loss_sum += batch_loss * count;
            const std::vector<int> pred = argmax_per_column(acts.pre.back());
            for (int j = 0; j < count; ++j)
                if (pred[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(j)])
                    ++correct;

            GradientSet grads = backward(net, acts, labels);
            if (first_batch && wants_snapshot(epoch - 1))
                report.grad_snapshots.push_back({epoch - 1, weight_grad_variances(grads)});
            first_batch = false;
            if (!config.train_bias)
                for (auto& bias_grad : grads.bias_grads)
                    std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
            sgd_step(net, grads, config.lr);
        }
        report.epochs.push_back(
            {epoch, loss_sum / total, static_cast<double>(correct) / total});
    }

    if (wants_snapshot(config.epochs)) {
        shuffle_indices(order, shuffle_rng);
        const int count = std::min(config.batch, total);
        const Matrix x = gather_batch(ds, order, 0, count);
        const std::vector<int> labels = gather_labels(ds, order, 0, count);
        const GradientSet grads = backward(net, forward(net, x), labels);
        report.grad_snapshots.push_back({config.epochs, weight_grad_variances(grads)});
    }

    for (const Matrix& w : net.weights)
        report.final_weight_variance.push_back(population_variance(w));

    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<std::string> default_compare_grid() {
    return {"he:normal",            "he:uniform",
            "const:normal",         "const:uniform",
            "depthwise-inc:normal", "depthwise-inc:uniform",
            "depthwise-dec:normal", "depthwise-dec:uniform"};
}

SchemeConfig parse_scheme_spec(const std::string& spec, const SchemeConfig& base) {
    SchemeConfig config;
    const auto colon = spec.find(':');
    config.kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    config.distribution = colon == std::string::npos ? "normal" : spec.substr(colon + 1);
    config.fan_mode = base.fan_mode;
    if (config.kind == "const" || config.kind == "depthwise-inc" ||
        config.kind == "depthwise-dec") {
        config.variance = base.variance;
        config.k = base.k;
        config.shift = base.shift;
    }
    config.to_scheme();  // validate eagerly
    return config;
}

int CompareReport::succeeded() const {
    int n = 0;
    for (const Row& row : rows)
        if (row.ok) ++n;
    return n;
}

CompareReport compare_run(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    CompareReport report;
    report.config = config;
    if (report.config.schemes.empty()) report.config.schemes = default_compare_grid();

    for (const std::string& spec : report.config.schemes) {
        CompareReport::Row row;
        row.spec = spec;
        try {
            RunConfig row_config = report.config;
            row_config.command = "train";
            row_config.scheme = parse_scheme_spec(spec, config.scheme);
            row_config.schemes.clear();
            row.descriptor = scheme_descriptor(row_config.scheme.to_scheme());
            row.report = train_run(row_config);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }

    report.ranking.resize(report.rows.size());
    std::iota(report.ranking.begin(), report.ranking.end(), 0);
    std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](int a, int b) {
        const auto& ra = report.rows[static_cast<std::size_t>(a)];
        const auto& rb = report.rows[static_cast<std::size_t>(b)];
        if (ra.ok != rb.ok) return ra.ok;
        if (!ra.ok) return false;
        return ra.report->final_loss() < rb.report->final_loss();
    });

    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

VarianceProfile profile_run(const RunConfig& config) {
    const NetworkSpec spec = make_uniform_spec(config.layers, config.width);
    ProfileOptions options;
    options.trials = config.trials;
    options.batch = config.batch;
    options.seed = config.seed;
    options.threads = config.threads;
    if (config.input == "unit_normal")
        options.input = InputKind::UnitNormal;
    else if (config.input == "zero_one_uniform")
        options.input = InputKind::ZeroOneUniform;
    else
        throw std::invalid_argument("unknown profile input kind: " + config.input);
    return empirical_profile(spec, config.scheme.to_scheme(), options);
}

KSolution solve_run(const RunConfig& config, double& gain_product_check) {
    if (!config.scheme.variance)
        throw std::invalid_argument("solve-k requires a target variance");
    const KSolution solution = solve_k_detail(config.layers, config.width,
                                              *config.scheme.variance, config.scheme.shift);
    const NetworkSpec spec = make_uniform_spec(config.layers, config.width);
    DepthwiseLogScheme scheme;
    scheme.k_source = KSource::explicit_k(solution.k);
    scheme.shift = config.scheme.shift;
    gain_product_check = gain_product(build_plan(spec, scheme), spec, GainDirection::Forward);
    return solution;
}

} // namespace depthinit
