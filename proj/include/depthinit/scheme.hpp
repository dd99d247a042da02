#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "depthinit/matrix.hpp"
#include "depthinit/rng.hpp"

namespace depthinit {

enum class Activation { ReLU };
enum class Distribution { Normal, Uniform };
enum class FanMode { FanIn, FanOut };
enum class Direction { Increasing, Decreasing };
enum class GainDirection { Forward, Backward };

/// Fully-connected network shape. Layers are 1-based, l = 1..L, and layer L
/// is the output layer. fan_in(1) == input_dim, fan_in(l) == width(l-1),
/// fan_out(l) == width(l).
struct NetworkSpec {
    int input_dim = 0;
    std::vector<int> layer_widths;
    Activation activation = Activation::ReLU;

    int layer_count() const { return static_cast<int>(layer_widths.size()); }
    int width(int l) const { return layer_widths[static_cast<std::size_t>(l) - 1]; }
    int fan_in(int l) const { return l == 1 ? input_dim : width(l - 1); }
    int fan_out(int l) const { return width(l); }

    /// True when all widths except the output layer's are equal.
    bool uniform_hidden_widths() const;

    /// Throws std::invalid_argument unless L >= 2 and all dims positive.
    void validate() const;
};

/// Uniform-width spec (input_dim = width), the shape used by profiling runs.
NetworkSpec make_uniform_spec(int layers, int width);

struct GlorotScheme {
    Distribution distribution = Distribution::Normal;
};

struct HeScheme {
    Distribution distribution = Distribution::Normal;
    FanMode fan_mode = FanMode::FanOut;
};

/// Every layer's base variance scaled by the same factor V^(1/(L-1)).
struct ConstantScaledScheme {
    double target_variance = 1.0;
    Distribution distribution = Distribution::Normal;
};

/// Where the depth-wise scheme's crossing depth K comes from.
struct KSource {
    enum class Kind { Explicit, SolveFromV };
    Kind kind = Kind::SolveFromV;
    double value = 1.0;  // K when Explicit, V when SolveFromV

    static KSource explicit_k(double k) { return {Kind::Explicit, k}; }
    static KSource solve_from_v(double v) { return {Kind::SolveFromV, v}; }
};

/// Depth-wise logarithmic scheme: layer l's base variance is scaled by
/// depth_scale(l, K, alpha, shift). The scale crosses 1 at l + shift = K.
struct DepthwiseLogScheme {
    KSource k_source = KSource::solve_from_v(1.0);
    int shift = 0;  // constant added to the log base, softens small depths
    Direction direction = Direction::Increasing;
    Distribution distribution = Distribution::Normal;
};

using InitScheme =
    std::variant<GlorotScheme, HeScheme, ConstantScaledScheme, DepthwiseLogScheme>;

Distribution scheme_distribution(const InitScheme& scheme);
std::string scheme_descriptor(const InitScheme& scheme);

enum class BaseVarianceMode { HeFanIn, HeFanOut, Glorot };

/// He base 2/fan (either fan), or Glorot 2/(fan_in + fan_out).
double base_variance(int fan_in, int fan_out, BaseVarianceMode mode);

/// Depth scale for layer l: alpha^(1/log_K(l + shift) - 1). Equals 1 exactly
/// at l + shift == K, is below 1 before the crossing and above it after
/// (for alpha in (0,1)), and is strictly increasing in l.
double depth_scale(int l, double k, double alpha, int shift = 0);

/// S(L) = sum_{l=2..L} 1/ln(l). Bounded by (L-1)/ln(L) and (L-1)/ln(2).
double log_inverse_sum(int layer_count);

/// Shifted variant: sum_{l=2..L} 1/ln(l + shift).
double log_inverse_sum_shifted(int layer_count, int shift);

struct KSolution {
    double k = 0.0;      // solved crossing depth, > 1
    double sum = 0.0;    // S used by the solve
    double alpha = 0.0;  // 2/n
    double rhs = 0.0;    // log_{2/n}(V) + (L-1)
};

/// Solve sum_{l=2..L} log_{l+shift}(K) = log_{2/n}(V) + (L-1) for K.
/// The solved K makes the layer gains multiply out to exactly V.
/// Throws unsupported_config_error when n <= 2 (alpha >= 1) and
/// no_valid_k_error when the right-hand side is <= 0 (K would be <= 1).
KSolution solve_k_detail(int layer_count, int width, double target_variance,
                         int shift = 0);
double solve_k(int layer_count, int width, double target_variance);

/// One layer of a realized plan: Var[w_l] = base_variance * depth_scale.
/// dist_param is the std for Normal draws, the half-width for Uniform.
/// Biases always initialize to zero.
struct LayerInit {
    double base_variance = 0.0;   // alpha_l
    double depth_scale = 1.0;     // beta_l
    double weight_variance = 0.0; // alpha_l * beta_l
    double dist_param = 0.0;
};

struct LayerInitPlan {
    std::vector<LayerInit> layers;  // [0] is layer 1
    Distribution distribution = Distribution::Normal;
    std::optional<double> solved_k; // set when the plan solved K from V
    std::string descriptor;

    int layer_count() const { return static_cast<int>(layers.size()); }
};

/// Realize a scheme against a network shape. Layer 1 is never depth-scaled.
/// The Decreasing direction reverses the Increasing depth-scale sequence over
/// layers 2..L, which preserves the gain product.
LayerInitPlan build_plan(const NetworkSpec& spec, const InitScheme& scheme);

/// Forward:  product over l = 2..L of (1/2) * fan_in(l)  * Var[w_l]   (V_A)
/// Backward: product over l = 2..L of (1/2) * fan_out(l) * Var[w_l]   (V_G)
double gain_product(const LayerInitPlan& plan, const NetworkSpec& spec,
                    GainDirection direction);

/// Zero-mean draws with population variance `variance`. Uniform draws cover
/// [-sqrt(3*variance), +sqrt(3*variance)]. Entries are standard draws scaled
/// afterwards, so the raw stream is identical across variances.
Matrix sample_matrix(Rng& rng, std::size_t rows, std::size_t cols, double variance,
                     Distribution distribution);

} // namespace depthinit
