#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

#include <unistd.h>

namespace webcp::testing {

namespace {
std::atomic<int> counter{0};
}

TempDir::TempDir(const std::string& tag) {
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path fixture_dir() { return WEBCP_FIXTURE_DIR; }
std::filesystem::path cli_path() { return WEBCP_CLI; }

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

namespace {

std::size_t matches_in(const std::string& a, std::size_t alo, std::size_t ahi, const std::string& b,
                       std::size_t blo, std::size_t bhi) {
  std::size_t best = 0, bi = 0, bj = 0;
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best) {
        best = k;
        bi = i;
        bj = j;
      }
    }
  }
  if (best == 0) return 0;
  return best + matches_in(a, alo, bi, b, blo, bj) +
         matches_in(a, bi + best, ahi, b, bj + best, bhi);
}

}  // namespace

std::size_t reference_matches(const std::string& a, const std::string& b) {
  return matches_in(a, 0, a.size(), b, 0, b.size());
}

double reference_ratio(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(reference_matches(a, b)) /
         static_cast<double>(a.size() + b.size());
}

double reference_mc_threshold(const std::vector<std::vector<double>>& iterations, double alpha) {
  std::set<double> candidates;
  for (const auto& it : iterations) candidates.insert(it.begin(), it.end());
  candidates.insert(std::numeric_limits<double>::infinity());
  for (double g : candidates) {
    double total = 0.0;
    for (const auto& it : iterations) {
      std::size_t count = 0;
      for (double x : it) count += x <= g ? 1 : 0;
      total += static_cast<double>(count + 1) / static_cast<double>(it.size() + 1);
    }
    if (total / static_cast<double>(iterations.size()) > 1.0 - alpha) return g;
  }
  return std::numeric_limits<double>::infinity();
}

double reference_split_threshold(const std::vector<double>& scores, double alpha) {
  const double n = static_cast<double>(scores.size());
  std::set<double> candidates(scores.begin(), scores.end());
  for (double g : candidates) {
    const double count = static_cast<double>(std::count_if(
        scores.begin(), scores.end(), [g](double x) { return x <= g; }));
    // count >= (n + 1)(1 - alpha), compared without rounding the product.
    if (count >= std::ceil((n + 1.0) * (1.0 - alpha) - 1e-9)) return g;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace webcp::testing
