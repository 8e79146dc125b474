#pragma once

#include <span>
#include <vector>

namespace webcp::embedding {

/// u.v / (|u| |v|), accumulated in double. Throws DomainError on dimension
/// mismatch or a zero-norm input. The result is clamped to [-1, 1].
double cosine(std::span<const float> u, std::span<const float> v);

/// exp(z_i / T) / sum_j exp(z_j / T) with max subtraction. Throws
/// DomainError if T <= 0 or any logit is non-finite.
std::vector<double> softmax(std::span<const double> logits, double temperature);

}  // namespace webcp::embedding
