#include "depthinit/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace depthinit {

DenseNetwork init_network(const NetworkSpec& spec, const LayerInitPlan& plan,
                          std::uint64_t seed) {
    spec.validate();
    if (plan.layer_count() != spec.layer_count())
        throw std::invalid_argument("init_network: plan and spec layer counts differ");

    DenseNetwork net;
    net.spec = spec;
    net.init_descriptor = plan.descriptor;
    net.init_seed = seed;
    Rng rng(seed);
    for (int l = 1; l <= spec.layer_count(); ++l) {
        const auto& layer = plan.layers[static_cast<std::size_t>(l - 1)];
        net.weights.push_back(sample_matrix(rng, static_cast<std::size_t>(spec.fan_out(l)),
                                            static_cast<std::size_t>(spec.fan_in(l)),
                                            layer.weight_variance, plan.distribution));
        net.biases.emplace_back(static_cast<std::size_t>(spec.fan_out(l)), 0.0);
    }
    return net;
}

BatchActivations forward(const DenseNetwork& net, const Matrix& batch) {
    if (batch.rows() != static_cast<std::size_t>(net.spec.input_dim))
        throw std::invalid_argument("forward: batch feature dimension != input_dim");
    if (batch.cols() == 0) throw std::invalid_argument("forward: empty batch");

    BatchActivations acts;
    acts.input = batch;
    const Matrix* x = &acts.input;
    const int layers = net.layer_count();
    for (int l = 1; l <= layers; ++l) {
        Matrix y = matmul(net.weights[static_cast<std::size_t>(l - 1)], *x);
        add_col_broadcast(y, net.biases[static_cast<std::size_t>(l - 1)]);
        acts.pre.push_back(std::move(y));
        if (l < layers) {
            acts.post.push_back(relu(acts.pre.back()));
            x = &acts.post.back();
        }
    }
    return acts;
}

Matrix softmax_columns(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        double mx = logits(0, j);
        for (std::size_t i = 1; i < logits.rows(); ++i) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i) {
            const double e = std::exp(logits(i, j) - mx);
            out(i, j) = e;
            sum += e;
        }
        for (std::size_t i = 0; i < logits.rows(); ++i) out(i, j) /= sum;
    }
    return out;
}

std::vector<int> argmax_per_column(const Matrix& m) {
    std::vector<int> idx(m.cols(), 0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double best = m(0, j);
        int best_i = 0;
        for (std::size_t i = 1; i < m.rows(); ++i) {
            if (m(i, j) > best) {
                best = m(i, j);
                best_i = static_cast<int>(i);
            }
        }
        idx[j] = best_i;
    }
    return idx;
}

namespace {

void check_labels(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.cols())
        throw std::invalid_argument("labels count != batch size");
    for (int lab : labels)
        if (lab < 0 || static_cast<std::size_t>(lab) >= logits.rows())
            throw std::invalid_argument("label out of range");
}

} // namespace

double loss_softmax_ce(const Matrix& logits, const std::vector<int>& labels) {
    check_labels(logits, labels);
    double total = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        double mx = logits(0, j);
        for (std::size_t i = 1; i < logits.rows(); ++i) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i) sum += std::exp(logits(i, j) - mx);
        const double log_z = mx + std::log(sum);
        total += log_z - logits(static_cast<std::size_t>(labels[j]), j);
    }
    return total / static_cast<double>(logits.cols());
}

GradientSet backward(const DenseNetwork& net, const BatchActivations& acts,
                     const std::vector<int>& labels) {
    const int layers = net.layer_count();
    if (static_cast<int>(acts.pre.size()) != layers)
        throw std::invalid_argument("backward: activations do not match network");
    const Matrix& logits = acts.pre.back();
    check_labels(logits, labels);
    const double batch = static_cast<double>(logits.cols());

    GradientSet grads;
    grads.weight_grads.resize(static_cast<std::size_t>(layers));
    grads.bias_grads.resize(static_cast<std::size_t>(layers));
    grads.delta_pre.resize(static_cast<std::size_t>(layers));
    grads.delta_act.resize(static_cast<std::size_t>(layers));

    // dLoss/dlogits = (softmax - onehot) / batch
    Matrix delta_y = softmax_columns(logits);
    for (std::size_t j = 0; j < delta_y.cols(); ++j)
        delta_y(static_cast<std::size_t>(labels[j]), j) -= 1.0;
    for (std::size_t i = 0; i < delta_y.size(); ++i) delta_y.data()[i] /= batch;

    for (int l = layers; l >= 1; --l) {
        const std::size_t li = static_cast<std::size_t>(l - 1);
        const Matrix& x_l = l == 1 ? acts.input : acts.post[static_cast<std::size_t>(l - 2)];
        grads.weight_grads[li] = matmul_nt(delta_y, x_l);
        grads.bias_grads[li] = row_sums(delta_y);
        grads.delta_act[li] = matmul_tn(net.weights[li], delta_y);
        grads.delta_pre[li] = std::move(delta_y);
        if (l > 1)
            delta_y = relu_gate(grads.delta_act[li], acts.pre[static_cast<std::size_t>(l - 2)]);
    }
    return grads;
}

double gradcheck_finite_diff(const DenseNetwork& net, const Matrix& batch,
                             const std::vector<int>& labels, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("gradcheck: epsilon must be positive");

    const GradientSet analytic = backward(net, forward(net, batch), labels);
    DenseNetwork probe = net;
    double max_rel_err = 0.0;

    auto probe_loss = [&]() { return loss_softmax_ce(forward(probe, batch).pre.back(), labels); };
    auto accumulate = [&](double analytic_g, double& param) {
        const double saved = param;
        param = saved + epsilon;
        const double plus = probe_loss();
        param = saved - epsilon;
        const double minus = probe_loss();
        param = saved;
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double denom = std::max({std::fabs(analytic_g), std::fabs(numeric), 1e-12});
        max_rel_err = std::max(max_rel_err, std::fabs(analytic_g - numeric) / denom);
    };

    for (int l = 0; l < net.layer_count(); ++l) {
        const std::size_t li = static_cast<std::size_t>(l);
        Matrix& w = probe.weights[li];
        for (std::size_t i = 0; i < w.size(); ++i)
            accumulate(analytic.weight_grads[li].data()[i], w.data()[i]);
        for (std::size_t i = 0; i < probe.biases[li].size(); ++i)
            accumulate(analytic.bias_grads[li][i], probe.biases[li][i]);
    }
    return max_rel_err;
}

void sgd_step(DenseNetwork& net, const GradientSet& grads, double learning_rate) {
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("sgd_step: learning rate must be positive");
    if (grads.weight_grads.size() != net.weights.size())
        throw std::invalid_argument("sgd_step: gradient shapes do not match network");
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        Matrix& w = net.weights[l];
        const Matrix& g = grads.weight_grads[l];
        if (g.rows() != w.rows() || g.cols() != w.cols())
            throw std::invalid_argument("sgd_step: gradient shapes do not match network");
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= learning_rate * g.data()[i];
        for (std::size_t i = 0; i < net.biases[l].size(); ++i)
            net.biases[l][i] -= learning_rate * grads.bias_grads[l][i];
    }
}

} // namespace depthinit
