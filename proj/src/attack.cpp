#include "advlab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advlab/error.hpp"

namespace advlab {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Descent direction d; the caller applies x -= lr * d.
std::vector<double> step_direction(std::span<const double> grad, std::span<const double> x,
                                   NormKind kind) {
    std::vector<double> d(grad.size(), 0.0);
    switch (kind) {
        case NormKind::linf:
            std::transform(grad.begin(), grad.end(), d.begin(), sign);
            break;
        case NormKind::l2: {
            const double length = norm(grad, NormKind::l2);
            if (length >= 1e-12) {
                for (std::size_t i = 0; i < grad.size(); ++i) d[i] = grad[i] / length;
            }
            break;
        }
        case NormKind::l1: {
            // Pixels pinned at 0 or 1 in the descent direction cannot move;
            // picking one would stall the attack on the same coordinate forever.
            std::size_t best = grad.size();
            double best_mag = 0.0;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                const double g = grad[i];
                if ((g > 0.0 && x[i] <= 0.0) || (g < 0.0 && x[i] >= 1.0)) continue;
                if (std::abs(g) > best_mag) {
                    best_mag = std::abs(g);
                    best = i;
                }
            }
            if (best < grad.size()) d[best] = sign(grad[best]);
            break;
        }
    }
    return d;
}

}  // namespace

void AttackConfig::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ParameterError("attack budget beta must be > 0, got " + std::to_string(beta));
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ParameterError("attack learning rate must be > 0, got " + std::to_string(learning_rate));
    }
    if (max_iterations < 1) throw ParameterError("attack needs at least one iteration");
}

AttackResult craft(const Classifier& f, const Image& x_true, const AttackConfig& config) {
    config.validate();
    if (x_true.shape() != f.input_shape()) {
        throw ShapeError("attack input shape " + x_true.shape().str() +
                         " does not match classifier input " + f.input_shape().str());
    }
    if (config.target_label >= f.num_classes()) {
        throw ParameterError("target label " + std::to_string(config.target_label) +
                             " out of range for " + std::to_string(f.num_classes()) + " classes");
    }

    const auto original = x_true.pixels();
    const std::size_t n = original.size();
    std::vector<double> adv(original.begin(), original.end());
    std::vector<double> delta(n, 0.0);

    AttackResult result;
    Image current = x_true;
    PredictionWithGradient state = predict_with_gradient(f, current, config.target_label);
    std::size_t it = 0;
    while (it < config.max_iterations && state.prediction.argmax_label != config.target_label) {
        for (double g : state.gradient.values()) {
            if (!std::isfinite(g)) {
                throw NumericError("non-finite input gradient at attack iteration " + std::to_string(it));
            }
        }
        const std::vector<double> dir = step_direction(state.gradient.values(), adv, config.norm_kind);
        for (std::size_t i = 0; i < n; ++i) delta[i] = adv[i] - config.learning_rate * dir[i] - original[i];
        delta = project_to_ball(delta, config.norm_kind, config.beta);
        for (std::size_t i = 0; i < n; ++i) adv[i] = std::clamp(original[i] + delta[i], 0.0, 1.0);

        current = Image(x_true.shape(), adv);
        state = predict_with_gradient(f, current, config.target_label);
        ++it;
        for (std::size_t i = 0; i < n; ++i) delta[i] = adv[i] - original[i];
        result.trace.push_back(
            {-std::log(std::max(state.prediction.probabilities[config.target_label], 1e-12)),
             norm(delta, config.norm_kind)});
    }

    const Prediction& pred = state.prediction;
    result.success = pred.argmax_label == config.target_label;
    result.iterations_used = it;
    result.final_perturbation_norm = distance(current, x_true, config.norm_kind);
    result.final_target_probability = pred.probabilities[config.target_label];
    result.adversarial = std::move(current);
    return result;
}

}  // namespace advlab
