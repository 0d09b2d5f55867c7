#pragma once

#include <cstddef>
#include <vector>

#include "advlab/classifier.hpp"
#include "advlab/norms.hpp"

namespace advlab {

struct AttackConfig {
    NormKind norm_kind = NormKind::linf;
    double beta = 0.1;            // budget, in [0, 1] pixel units
    double learning_rate = 0.01;  // step length per iteration
    std::size_t max_iterations = 500;
    std::size_t target_label = 0;

    // Throws ParameterError unless beta > 0, learning_rate > 0, max_iterations >= 1.
    void validate() const;
};

struct AttackStep {
    double loss = 0.0;               // targeted cross-entropy after the step
    double perturbation_norm = 0.0;  // norm(x_adv - x_true) after the step
};

struct AttackResult {
    Image adversarial;
    bool success = false;  // argmax(f(adversarial)) == target_label
    std::size_t iterations_used = 0;
    double final_perturbation_norm = 0.0;
    double final_target_probability = 0.0;
    std::vector<AttackStep> trace;
};

// Targeted iterative attack: repeatedly step against the gradient of the
// target-class cross-entropy, project the perturbation back into the
// norm ball of radius beta, and clamp pixels to [0, 1]. Stops as soon as the
// classifier predicts the target label or the iteration cap is reached.
//
// Step direction per norm: LINF sign(g); L2 g / ||g||_2; L1 a single
// coordinate, the largest |g_i| among pixels that can still move in the
// descent direction (lowest index on ties).
//
// Throws ShapeError/ParameterError on bad inputs and NumericError if the
// gradient becomes non-finite.
AttackResult craft(const Classifier& f, const Image& x_true, const AttackConfig& config);

}  // namespace advlab
