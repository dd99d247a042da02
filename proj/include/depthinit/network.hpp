#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depthinit/matrix.hpp"
#include "depthinit/scheme.hpp"

namespace depthinit {

/// Fully-connected ReLU network. W_l has shape width(l) x fan_in(l); batches
/// are matrices with one column per sample.
struct DenseNetwork {
    NetworkSpec spec;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::string init_descriptor;
    std::uint64_t init_seed = 0;

    int layer_count() const { return spec.layer_count(); }
};

/// Pre-activations y_l (l = 1..L) and post-activations x_{l+1} = relu(y_l)
/// (l = 1..L-1); the output layer emits raw logits.
struct BatchActivations {
    Matrix input;              // x_1
    std::vector<Matrix> pre;   // y_l
    std::vector<Matrix> post;  // x_{l+1}, hidden layers only
};

struct GradientSet {
    std::vector<Matrix> weight_grads;
    std::vector<std::vector<double>> bias_grads;
    std::vector<Matrix> delta_pre;  // dLoss/dy_l
    std::vector<Matrix> delta_act;  // dLoss/dx_l
};

/// Deterministic for fixed (spec, plan, seed). Biases start at zero.
DenseNetwork init_network(const NetworkSpec& spec, const LayerInitPlan& plan,
                          std::uint64_t seed);

BatchActivations forward(const DenseNetwork& net, const Matrix& batch);

/// Batch-mean softmax cross-entropy, stabilized by max subtraction.
double loss_softmax_ce(const Matrix& logits, const std::vector<int>& labels);

/// Exact gradients of loss_softmax_ce. ReLU's derivative at 0 is taken as 0.
GradientSet backward(const DenseNetwork& net, const BatchActivations& acts,
                     const std::vector<int>& labels);

/// Central-difference check of backward. Returns the max over parameters of
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
double gradcheck_finite_diff(const DenseNetwork& net, const Matrix& batch,
                             const std::vector<int>& labels, double epsilon = 1e-5);

/// w <- w - lr * g for all weights and biases.
void sgd_step(DenseNetwork& net, const GradientSet& grads, double learning_rate);

Matrix softmax_columns(const Matrix& logits);
std::vector<int> argmax_per_column(const Matrix& m);

} // namespace depthinit
