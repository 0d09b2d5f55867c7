#include "advlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "advlab/error.hpp"

namespace advlab {
namespace {

// Sort-and-threshold projection onto the L1 ball (beta > 0, ||v||_1 > beta).
std::vector<double> project_l1(std::span<const double> v, double beta) {
    std::vector<double> mags(v.size());
    std::transform(v.begin(), v.end(), mags.begin(), [](double x) { return std::abs(x); });
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumulative += sorted[j];
        const double candidate = (cumulative - beta) / static_cast<double>(j + 1);
        if (sorted[j] > candidate) theta = candidate;
    }

    auto shrink = [&](double t) {
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            z[i] = std::copysign(std::max(mags[i] - t, 0.0), v[i]);
        }
        return z;
    };
    std::vector<double> z = shrink(theta);
    // Rounding can leave the sum a few ulps above beta; nudge theta up until
    // the computed norm is inside.
    for (double total = norm(z, NormKind::l1); total > beta; total = norm(z, NormKind::l1)) {
        const auto active = static_cast<double>(
            std::count_if(z.begin(), z.end(), [](double x) { return x != 0.0; }));
        theta = std::max(std::nextafter(theta, std::numeric_limits<double>::infinity()),
                         theta + (total - beta) / active);
        z = shrink(theta);
    }
    return z;
}

std::vector<double> project_l2(std::span<const double> v, double beta, double current) {
    double scale = beta / current;
    std::vector<double> z(v.size());
    for (;;) {
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = v[i] * scale;
        if (norm(z, NormKind::l2) <= beta) return z;
        scale = std::nextafter(scale, 0.0);
    }
}

}  // namespace

std::string_view to_string(NormKind kind) {
    switch (kind) {
        case NormKind::l1: return "l1";
        case NormKind::l2: return "l2";
        case NormKind::linf: return "linf";
    }
    return "?";
}

NormKind parse_norm_kind(std::string_view name) {
    if (name == "l1") return NormKind::l1;
    if (name == "l2") return NormKind::l2;
    if (name == "linf") return NormKind::linf;
    throw ParameterError("unknown norm '" + std::string(name) + "' (expected l1, l2 or linf)");
}

double norm(std::span<const double> v, NormKind kind) {
    switch (kind) {
        case NormKind::l1: {
            double sum = 0.0;
            for (double x : v) sum += std::abs(x);
            return sum;
        }
        case NormKind::l2: {
            double sum = 0.0;
            for (double x : v) sum += x * x;
            return std::sqrt(sum);
        }
        case NormKind::linf: {
            double best = 0.0;
            for (double x : v) best = std::max(best, std::abs(x));
            return best;
        }
    }
    return 0.0;
}

double norm(const Tensor& v, NormKind kind) { return norm(v.values(), kind); }

double distance(const Image& x, const Image& y, NormKind kind) {
    if (x.shape() != y.shape()) {
        throw ShapeError("distance between images of shape " + x.shape().str() + " and " + y.shape().str());
    }
    std::vector<double> diff(x.size());
    const auto a = x.pixels();
    const auto b = y.pixels();
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
    return norm(diff, kind);
}

std::vector<double> project_to_ball(std::span<const double> delta, NormKind kind, double beta) {
    if (!(beta >= 0.0)) throw ParameterError("ball radius must be >= 0, got " + std::to_string(beta));
    const double current = norm(delta, kind);
    if (current <= beta) return {delta.begin(), delta.end()};
    if (beta == 0.0) return std::vector<double>(delta.size(), 0.0);

    switch (kind) {
        case NormKind::linf: {
            std::vector<double> z(delta.begin(), delta.end());
            for (double& x : z) x = std::clamp(x, -beta, beta);
            return z;
        }
        case NormKind::l2:
            return project_l2(delta, beta, current);
        case NormKind::l1:
            return project_l1(delta, beta);
    }
    return {};
}

Tensor project_to_ball(const Tensor& delta, NormKind kind, double beta) {
    return Tensor(delta.shape(), project_to_ball(delta.values(), kind, beta));
}

}  // namespace advlab
