#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "advlab/tensor.hpp"

namespace advlab {

enum class NormKind { l1, l2, linf };

std::string_view to_string(NormKind kind);
// Accepts "l1", "l2", "linf". Throws ParameterError otherwise.
NormKind parse_norm_kind(std::string_view name);

// L1: sum |v|, L2: sqrt(sum v^2), LINF: max |v|. Zero for an empty vector.
double norm(std::span<const double> v, NormKind kind);
double norm(const Tensor& v, NormKind kind);

// norm(x - y). Throws ShapeError on mismatched shapes.
double distance(const Image& x, const Image& y, NormKind kind);

// Euclidean projection onto {z : norm(z, kind) <= beta}. Vectors already
// inside the ball are returned unchanged, and the result always satisfies
// norm(result, kind) <= beta as computed by norm() above, so projecting
// twice is the same as projecting once. Throws ParameterError if beta < 0.
std::vector<double> project_to_ball(std::span<const double> delta, NormKind kind, double beta);
Tensor project_to_ball(const Tensor& delta, NormKind kind, double beta);

}  // namespace advlab
