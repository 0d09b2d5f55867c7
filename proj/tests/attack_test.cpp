#include <gtest/gtest.h>

#include <cmath>

#include "advlab/attack.hpp"
#include "advlab/error.hpp"
#include "test_support.hpp"

namespace advlab {
namespace {

constexpr NormKind kAllNorms[] = {NormKind::l1, NormKind::l2, NormKind::linf};

AttackConfig config_for(NormKind kind, std::size_t target) {
    AttackConfig c;
    c.norm_kind = kind;
    c.beta = kind == NormKind::l1 ? 4.0 : kind == NormKind::l2 ? 1.0 : 0.1;
    c.learning_rate = 0.01;
    c.max_iterations = 60;
    c.target_label = target;
    return c;
}

TEST(AttackConfigTest, Validation) {
    AttackConfig c;
    EXPECT_NO_THROW(c.validate());
    c.beta = 0.0;
    EXPECT_THROW(c.validate(), ParameterError);
    c = AttackConfig{};
    c.learning_rate = -1.0;
    EXPECT_THROW(c.validate(), ParameterError);
    c = AttackConfig{};
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(AttackTest, AlreadyTargetedInputIsReturnedUntouched) {
    const Classifier f = make_default_classifier({8, 8, 1}, 3, 4);
    SplitMix64 rng(2);
    const Image x = testing::random_image({8, 8, 1}, rng);
    const std::size_t predicted = forward(f, x).argmax_label;
    const AttackResult r = craft(f, x, config_for(NormKind::linf, predicted));
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.iterations_used, 0u);
    EXPECT_EQ(r.adversarial, x);
    EXPECT_EQ(r.final_perturbation_norm, 0.0);
    EXPECT_TRUE(r.trace.empty());
}

TEST(AttackTest, RejectsBadInputs) {
    const Classifier f = make_default_classifier({8, 8, 1}, 3, 4);
    EXPECT_THROW(craft(f, Image({4, 4, 1}), config_for(NormKind::l2, 1)), ShapeError);
    EXPECT_THROW(craft(f, Image({8, 8, 1}), config_for(NormKind::l2, 3)), ParameterError);
}

TEST(AttackTest, BudgetAndRangeHoldForEveryNorm) {
    const Classifier& f = testing::trained_shape_classifier();
    const LabeledDataset& data = testing::held_out_shapes();
    for (NormKind kind : kAllNorms) {
        for (std::size_t i = 0; i < 6; ++i) {
            const auto& item = data[i * 31];
            const AttackConfig c = config_for(kind, (item.label + 1 + i % 3) % 4);
            const AttackResult r = craft(f, item.image, c);
            EXPECT_LE(distance(r.adversarial, item.image, kind), c.beta + 1e-6);
            for (double v : r.adversarial.pixels()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
            EXPECT_EQ(r.trace.size(), r.iterations_used);
            for (const auto& step : r.trace) EXPECT_LE(step.perturbation_norm, c.beta + 1e-6);
            EXPECT_EQ(r.success, forward(f, r.adversarial).argmax_label == c.target_label);
            EXPECT_DOUBLE_EQ(r.final_target_probability, forward(f, r.adversarial).probabilities[c.target_label]);
        }
    }
}

TEST(AttackTest, IsDeterministicAndPure) {
    const Classifier& f = testing::trained_shape_classifier();
    const Image x = testing::held_out_shapes()[5].image;
    const Image copy = x;
    for (NormKind kind : kAllNorms) {
        const AttackConfig c = config_for(kind, (testing::held_out_shapes()[5].label + 2) % 4);
        const AttackResult a = craft(f, x, c);
        const AttackResult b = craft(f, x, c);
        EXPECT_EQ(a.adversarial, b.adversarial);
        EXPECT_EQ(a.iterations_used, b.iterations_used);
        EXPECT_EQ(a.final_perturbation_norm, b.final_perturbation_norm);
        ASSERT_EQ(a.trace.size(), b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].loss, b.trace[i].loss);
    }
    EXPECT_EQ(x, copy);
}

TEST(AttackTest, StopsEarlyOnSuccess) {
    const Classifier& f = testing::trained_shape_classifier();
    const auto& item = testing::held_out_shapes()[60];
    AttackConfig c = config_for(NormKind::linf, (item.label + 1) % 4);
    c.beta = 0.3;
    c.max_iterations = 500;
    const AttackResult r = craft(f, item.image, c);
    ASSERT_TRUE(r.success);
    EXPECT_LT(r.iterations_used, c.max_iterations);
}

TEST(AttackTest, LinfStepsAreSignSized) {
    // With a budget larger than the step, the first iterate moves each
    // unclamped pixel by exactly the learning rate.
    const Classifier& f = testing::trained_shape_classifier();
    const auto& item = testing::held_out_shapes()[3];
    AttackConfig c = config_for(NormKind::linf, (item.label + 1) % 4);
    c.max_iterations = 1;
    c.learning_rate = 0.01;
    const AttackResult r = craft(f, item.image, c);
    for (std::size_t i = 0; i < item.image.size(); ++i) {
        const double moved = std::abs(r.adversarial.pixels()[i] - item.image.pixels()[i]);
        const double v = item.image.pixels()[i];
        if (v > 0.01 && v < 0.99) ASSERT_NEAR(moved, 0.01, 1e-12) << i;
    }
}

TEST(AttackTest, L1ChangesOnePixelPerStep) {
    const Classifier& f = testing::trained_shape_classifier();
    const auto& item = testing::held_out_shapes()[7];
    AttackConfig c = config_for(NormKind::l1, (item.label + 1) % 4);
    c.max_iterations = 3;
    const AttackResult r = craft(f, item.image, c);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < item.image.size(); ++i)
        changed += r.adversarial.pixels()[i] != item.image.pixels()[i];
    EXPECT_GE(changed, 1u);
    EXPECT_LE(changed, 3u);
}

TEST(AttackTest, LinfSucceedsOnMostHeldOutImages) {
    const Classifier& f = testing::trained_shape_classifier();
    const LabeledDataset& data = testing::held_out_shapes();
    std::size_t tried = 0, succeeded = 0;
    for (std::size_t i = 0; i < data.size() && tried < 20; i += 9) {
        const auto& item = data[i];
        if (forward(f, item.image).argmax_label != item.label) continue;
        AttackConfig c = config_for(NormKind::linf, (item.label + 1 + i % 3) % 4);
        c.max_iterations = 500;
        succeeded += craft(f, item.image, c).success;
        ++tried;
    }
    EXPECT_GE(static_cast<double>(succeeded), 0.8 * static_cast<double>(tried));
}

}  // namespace
}  // namespace advlab
