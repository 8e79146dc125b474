#include "webcp/embedding/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "webcp/common/error.hpp"

namespace webcp::embedding {

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw DomainError("cosine: dimension mismatch " + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw DomainError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("softmax: temperature must be a positive finite number");
  }
  if (logits.empty()) return {};
  double max = -INFINITY;
  for (double z : logits) {
    if (!std::isfinite(z)) throw DomainError("softmax: non-finite logit");
    max = std::max(max, z);
  }
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - max) / temperature);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

}  // namespace webcp::embedding
