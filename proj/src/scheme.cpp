#include "depthinit/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "depthinit/errors.hpp"

namespace depthinit {

bool NetworkSpec::uniform_hidden_widths() const {
    const int hidden = layer_count() - 1;
    for (int i = 1; i < hidden; ++i)
        if (layer_widths[static_cast<std::size_t>(i)] != layer_widths[0]) return false;
    return true;
}

void NetworkSpec::validate() const {
    if (layer_count() < 2)
        throw std::invalid_argument("NetworkSpec: at least 2 layers required");
    if (input_dim < 1) throw std::invalid_argument("NetworkSpec: input_dim must be positive");
    for (int w : layer_widths)
        if (w < 1) throw std::invalid_argument("NetworkSpec: layer widths must be positive");
}

NetworkSpec make_uniform_spec(int layers, int width) {
    NetworkSpec spec;
    spec.input_dim = width;
    spec.layer_widths.assign(static_cast<std::size_t>(layers), width);
    spec.validate();
    return spec;
}

Distribution scheme_distribution(const InitScheme& scheme) {
    return std::visit([](const auto& s) { return s.distribution; }, scheme);
}

namespace {

const char* dist_name(Distribution d) {
    return d == Distribution::Normal ? "normal" : "uniform";
}

} // namespace

std::string scheme_descriptor(const InitScheme& scheme) {
    std::ostringstream out;
    if (const auto* g = std::get_if<GlorotScheme>(&scheme)) {
        out << "glorot(" << dist_name(g->distribution) << ")";
    } else if (const auto* h = std::get_if<HeScheme>(&scheme)) {
        out << "he(" << dist_name(h->distribution) << ","
            << (h->fan_mode == FanMode::FanIn ? "fan_in" : "fan_out") << ")";
    } else if (const auto* c = std::get_if<ConstantScaledScheme>(&scheme)) {
        out << "const(V=" << c->target_variance << "," << dist_name(c->distribution) << ")";
    } else {
        const auto& d = std::get<DepthwiseLogScheme>(scheme);
        out << (d.direction == Direction::Increasing ? "depthwise-inc(" : "depthwise-dec(");
        if (d.k_source.kind == KSource::Kind::Explicit)
            out << "K=" << d.k_source.value;
        else
            out << "V=" << d.k_source.value;
        if (d.shift != 0) out << ",c=" << d.shift;
        out << "," << dist_name(d.distribution) << ")";
    }
    return out.str();
}

double base_variance(int fan_in, int fan_out, BaseVarianceMode mode) {
    if (fan_in < 1 || fan_out < 1)
        throw std::invalid_argument("base_variance: fan counts must be positive");
    switch (mode) {
        case BaseVarianceMode::HeFanIn: return 2.0 / fan_in;
        case BaseVarianceMode::HeFanOut: return 2.0 / fan_out;
        case BaseVarianceMode::Glorot: return 2.0 / (static_cast<double>(fan_in) + fan_out);
    }
    throw std::invalid_argument("base_variance: unknown mode");
}

double depth_scale(int l, double k, double alpha, int shift) {
    const int base = l + shift;
    if (base <= 1) throw std::invalid_argument("depth_scale: log base l + shift must exceed 1");
    if (!(k > 1.0)) throw std::invalid_argument("depth_scale: K must exceed 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("depth_scale: alpha must lie in (0, 1)");
    // alpha^(1/log_K(base) - 1) == alpha^(log_base(K) - 1)
    const double exponent = std::log(k) / std::log(static_cast<double>(base)) - 1.0;
    return std::pow(alpha, exponent);
}

double log_inverse_sum_shifted(int layer_count, int shift) {
    if (layer_count < 2) throw std::invalid_argument("log_inverse_sum: L must be >= 2");
    if (shift < 0) throw std::invalid_argument("log_inverse_sum: shift must be >= 0");
    double s = 0.0;
    for (int l = 2; l <= layer_count; ++l) s += 1.0 / std::log(static_cast<double>(l + shift));
    return s;
}

double log_inverse_sum(int layer_count) { return log_inverse_sum_shifted(layer_count, 0); }

KSolution solve_k_detail(int layer_count, int width, double target_variance, int shift) {
    if (layer_count < 2) throw std::invalid_argument("solve_k: L must be >= 2");
    if (width < 1) throw std::invalid_argument("solve_k: width must be positive");
    if (!(target_variance > 0.0))
        throw std::invalid_argument("solve_k: V must be positive");
    if (width <= 2)
        throw unsupported_config_error(
            "solve_k: width <= 2 gives alpha = 2/n >= 1; the scheme needs alpha in (0, 1)");

    KSolution sol;
    sol.alpha = 2.0 / width;
    sol.sum = log_inverse_sum_shifted(layer_count, shift);
    // sum_{l=2..L} log_{l+c}(K) = log_alpha(V) + (L-1)
    sol.rhs = std::log(target_variance) / std::log(sol.alpha) + (layer_count - 1);
    if (!(sol.rhs > 0.0)) {
        std::ostringstream msg;
        msg << "solve_k: no K > 1 for L=" << layer_count << ", n=" << width
            << ", V=" << target_variance << " (rhs=" << sol.rhs
            << "; V must be below (n/2)^(L-1) = "
            << std::pow(width / 2.0, layer_count - 1) << ")";
        throw no_valid_k_error(msg.str());
    }
    sol.k = std::exp(sol.rhs / sol.sum);
    return sol;
}

double solve_k(int layer_count, int width, double target_variance) {
    return solve_k_detail(layer_count, width, target_variance).k;
}

namespace {

double realize_dist_param(double variance, Distribution dist) {
    return dist == Distribution::Normal ? std::sqrt(variance) : std::sqrt(3.0 * variance);
}

LayerInit make_layer(double alpha, double beta, Distribution dist) {
    LayerInit layer;
    layer.base_variance = alpha;
    layer.depth_scale = beta;
    layer.weight_variance = alpha * beta;
    layer.dist_param = realize_dist_param(layer.weight_variance, dist);
    return layer;
}

} // namespace

LayerInitPlan build_plan(const NetworkSpec& spec, const InitScheme& scheme) {
    spec.validate();
    const int layers = spec.layer_count();

    LayerInitPlan plan;
    plan.distribution = scheme_distribution(scheme);
    plan.descriptor = scheme_descriptor(scheme);
    plan.layers.reserve(static_cast<std::size_t>(layers));

    if (const auto* g = std::get_if<GlorotScheme>(&scheme)) {
        for (int l = 1; l <= layers; ++l) {
            const double a =
                base_variance(spec.fan_in(l), spec.fan_out(l), BaseVarianceMode::Glorot);
            plan.layers.push_back(make_layer(a, 1.0, g->distribution));
        }
        return plan;
    }
    if (const auto* h = std::get_if<HeScheme>(&scheme)) {
        const auto mode = h->fan_mode == FanMode::FanIn ? BaseVarianceMode::HeFanIn
                                                        : BaseVarianceMode::HeFanOut;
        for (int l = 1; l <= layers; ++l) {
            const double a = base_variance(spec.fan_in(l), spec.fan_out(l), mode);
            plan.layers.push_back(make_layer(a, 1.0, h->distribution));
        }
        return plan;
    }
    if (const auto* c = std::get_if<ConstantScaledScheme>(&scheme)) {
        if (!(c->target_variance > 0.0))
            throw std::invalid_argument("build_plan: target variance must be positive");
        const double beta =
            std::exp(std::log(c->target_variance) / (layers - 1));  // V^(1/(L-1))
        for (int l = 1; l <= layers; ++l) {
            const double a =
                base_variance(spec.fan_in(l), spec.fan_out(l), BaseVarianceMode::HeFanOut);
            plan.layers.push_back(make_layer(a, l == 1 ? 1.0 : beta, c->distribution));
        }
        return plan;
    }

    const auto& d = std::get<DepthwiseLogScheme>(scheme);
    if (d.shift < 0) throw std::invalid_argument("build_plan: shift must be >= 0");
    double k;
    std::optional<double> solved;
    if (d.k_source.kind == KSource::Kind::Explicit) {
        k = d.k_source.value;
        if (!(k > 1.0)) throw std::invalid_argument("build_plan: explicit K must exceed 1");
    } else {
        if (!spec.uniform_hidden_widths())
            throw unsupported_config_error(
                "build_plan: solving K from V requires uniform hidden widths; "
                "pass an explicit K for this shape");
        k = solve_k_detail(layers, spec.layer_widths[0], d.k_source.value, d.shift).k;
        solved = k;
    }
    // The depth-scale exponent uses the solver's constant alpha = 2/n (the
    // uniform hidden width); per-layer base variances still follow fan-out.
    const double alpha_const = 2.0 / spec.layer_widths[0];
    if (!(alpha_const > 0.0 && alpha_const < 1.0))
        throw unsupported_config_error(
            "build_plan: depth-wise scheme needs hidden width n >= 3 so 2/n < 1");

    std::vector<double> betas;
    betas.reserve(static_cast<std::size_t>(layers - 1));
    for (int l = 2; l <= layers; ++l) betas.push_back(depth_scale(l, k, alpha_const, d.shift));
    if (d.direction == Direction::Decreasing) std::reverse(betas.begin(), betas.end());

    plan.solved_k = solved;
    for (int l = 1; l <= layers; ++l) {
        const double a =
            base_variance(spec.fan_in(l), spec.fan_out(l), BaseVarianceMode::HeFanOut);
        const double beta = l == 1 ? 1.0 : betas[static_cast<std::size_t>(l - 2)];
        plan.layers.push_back(make_layer(a, beta, d.distribution));
    }
    return plan;
}

double gain_product(const LayerInitPlan& plan, const NetworkSpec& spec,
                    GainDirection direction) {
    spec.validate();
    if (plan.layer_count() != spec.layer_count())
        throw std::invalid_argument("gain_product: plan and spec layer counts differ");
    double product = 1.0;
    for (int l = 2; l <= spec.layer_count(); ++l) {
        const int fan =
            direction == GainDirection::Forward ? spec.fan_in(l) : spec.fan_out(l);
        product *= 0.5 * fan * plan.layers[static_cast<std::size_t>(l - 1)].weight_variance;
    }
    return product;
}

Matrix sample_matrix(Rng& rng, std::size_t rows, std::size_t cols, double variance,
                     Distribution distribution) {
    if (variance < 0.0) throw std::invalid_argument("sample_matrix: variance must be >= 0");
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("sample_matrix: dimensions must be positive");
    Matrix m(rows, cols);
    double* d = m.data();
    if (distribution == Distribution::Normal) {
        const double stddev = std::sqrt(variance);
        for (std::size_t i = 0; i < m.size(); ++i) d[i] = stddev * rng.normal();
    } else {
        const double half_width = std::sqrt(3.0 * variance);
        for (std::size_t i = 0; i < m.size(); ++i)
            d[i] = half_width * (2.0 * rng.uniform01() - 1.0);
    }
    return m;
}

} // namespace depthinit
