#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "test_support.hpp"
#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/philox.hpp"
#include "webcp/embedding/kernels.hpp"
#include "webcp/embedding/matrix.hpp"
#include "webcp/embedding/wcpe.hpp"

namespace {

using namespace webcp;
using namespace webcp::embedding;

EmbeddingMatrix random_matrix(RandomStream& rng, std::size_t dim, std::size_t count) {
  std::vector<std::string> ids;
  std::vector<float> data;
  for (std::size_t i = 0; i < count; ++i) {
    std::string id = "id-" + std::to_string(i);
    // Vary id length, including multi-byte UTF-8.
    for (std::uint64_t k = rng.below(4); k > 0; --k) id += "\xc3\xa9";
    ids.push_back(std::move(id));
  }
  data.reserve(dim * count);
  for (std::size_t i = 0; i < dim * count; ++i) {
    data.push_back(static_cast<float>(rng.normal() * std::pow(10.0, rng.below(7)) * 1e-3));
  }
  return EmbeddingMatrix(dim, std::move(ids), std::move(data));
}

// Hand-built little-endian file, independent of the encoder.
std::string handmade_file(std::uint32_t dim, std::uint64_t count,
                          const std::vector<std::string>& ids, const std::vector<float>& data) {
  std::string out = "WCPEMB01";
  out.append(reinterpret_cast<const char*>(&dim), 4);
  out.append(reinterpret_cast<const char*>(&count), 8);
  for (const auto& id : ids) {
    const auto len = static_cast<std::uint16_t>(id.size());
    out.append(reinterpret_cast<const char*>(&len), 2);
    out += id;
  }
  out.append(reinterpret_cast<const char*>(data.data()), data.size() * 4);
  return out;
}

TEST(Wcpe, LayoutMatchesHandmadeBytes) {
  EmbeddingMatrix m(2, {"a", "bc"}, {1.0f, -2.0f, 0.5f, 3.25f});
  EXPECT_EQ(encode_wcpe(m), handmade_file(2, 2, {"a", "bc"}, {1.0f, -2.0f, 0.5f, 3.25f}));
}

TEST(Wcpe, RoundTripRandomMatrices) {
  RandomStream rng(42, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng.below(1024);
    const std::size_t count = rng.below(1001);
    const auto m = random_matrix(rng, dim, count);
    const auto back = decode_wcpe(encode_wcpe(m));
    ASSERT_EQ(back.dim(), dim);
    ASSERT_EQ(back.ids(), m.ids());
    ASSERT_EQ(back.data().size(), m.data().size());
    ASSERT_EQ(std::memcmp(back.data().data(), m.data().data(), m.data().size() * 4), 0);
  }
}

TEST(Wcpe, EmptyMatrixIsValid) {
  webcp::testing::TempDir dir;
  EmbeddingMatrix m(512, {}, {});
  store_embeddings(m, dir / "empty.wcpe");
  EXPECT_EQ(io::read_file(dir / "empty.wcpe").size(), 20u);
  const auto back = load_embeddings(dir / "empty.wcpe");
  EXPECT_EQ(back.dim(), 512u);
  EXPECT_TRUE(back.empty());
}

TEST(Wcpe, TruncatedPayloadReportsOffset) {
  const std::vector<std::string> ids{"r0", "row1", "x"};
  const std::vector<float> two_rows(2 * 4, 1.0f);
  const std::string bytes = handmade_file(4, 3, ids, two_rows);
  const std::uint64_t header = 8 + 4 + 8 + (2 + 2) + (2 + 4) + (2 + 1);
  try {
    decode_wcpe(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), header + 2 * 4 * 4);
  }
}

TEST(Wcpe, MalformedFilesRejected) {
  auto offset_of = [](const std::string& bytes) -> std::uint64_t {
    try {
      decode_wcpe(bytes);
    } catch (const FormatError& e) {
      return e.offset();
    }
    return std::numeric_limits<std::uint64_t>::max();
  };
  const std::string good = handmade_file(1, 2, {"a", "b"}, {1.0f, 2.0f});
  EXPECT_EQ(offset_of("WCPEMB02" + good.substr(8)), 0u);
  EXPECT_EQ(offset_of(good.substr(0, 5)), 0u);
  EXPECT_EQ(offset_of(handmade_file(1, 2, {"a", "a"}, {1.0f, 2.0f})), 8 + 4 + 8 + 3u);
  EXPECT_EQ(offset_of(good + "x"), good.size());
  EXPECT_EQ(offset_of(handmade_file(0, 0, {}, {})), 8u);
  EXPECT_EQ(offset_of(good.substr(0, 22)), 12u);  // count cannot fit
  EXPECT_EQ(offset_of(good.substr(0, 25)), 25u);  // second id bytes cut
  const float nan = std::numeric_limits<float>::quiet_NaN();
  EXPECT_NE(offset_of(handmade_file(1, 1, {"a"}, {nan})), std::numeric_limits<std::uint64_t>::max());
}

TEST(Matrix, InvariantsEnforced) {
  EXPECT_THROW(EmbeddingMatrix(0, {}, {}), DomainError);
  EXPECT_THROW(EmbeddingMatrix(2, {"a"}, {1.0f}), DomainError);
  EXPECT_THROW(EmbeddingMatrix(1, {"a", "a"}, {1.0f, 2.0f}), DomainError);
  EXPECT_THROW(EmbeddingMatrix(1, {"a"}, {std::numeric_limits<float>::infinity()}), DomainError);
  EmbeddingMatrix m(2, {"a", "b"}, {1, 2, 3, 4});
  EXPECT_EQ(m.at("b")[1], 4.0f);
  EXPECT_FALSE(m.find("c"));
  try {
    m.at("c");
    FAIL();
  } catch (const MissingEmbeddingError& e) {
    EXPECT_EQ(e.id(), "c");
  }
}

TEST(Cosine, Examples) {
  const std::vector<float> v{0.3f, -1.2f, 5.0f};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
  EXPECT_EQ(cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<float>{1, 1}, std::vector<float>{1, 0}), 1.0 / std::sqrt(2.0),
              1e-15);
  EXPECT_THROW(cosine(std::vector<float>{0, 0}, std::vector<float>{1, 0}), DomainError);
  EXPECT_THROW(cosine(std::vector<float>{1}, std::vector<float>{1, 0}), DomainError);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  RandomStream rng(7, 1);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 1 + rng.below(64);
    std::vector<float> u(d), v(d), au(d), bv(d);
    // Power-of-two scales are exact in float.
    const float a = std::ldexp(1.0f, static_cast<int>(rng.below(8)) - 3), b = 0.25f;
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = static_cast<float>(rng.normal());
      v[i] = static_cast<float>(rng.normal());
      au[i] = a * u[i];
      bv[i] = b * v[i];
    }
    const double c = cosine(u, v);
    EXPECT_EQ(c, cosine(v, u));
    EXPECT_NEAR(cosine(au, bv), c, 1e-15);
    EXPECT_LE(std::abs(c), 1.0);
  }
}

TEST(Softmax, Examples) {
  for (double t : {0.01, 1.0, 100.0}) {
    for (double p : softmax(std::vector<double>{2.5, 2.5, 2.5}, t)) EXPECT_NEAR(p, 1.0 / 3, 1e-15);
  }
  const auto p = softmax(std::vector<double>{std::log(2.0), 0.0}, 1.0);
  EXPECT_NEAR(p[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3, 1e-15);
  EXPECT_THROW(softmax(std::vector<double>{1.0}, 0.0), DomainError);
  EXPECT_THROW(softmax(std::vector<double>{1.0}, -1.0), DomainError);
  EXPECT_THROW(softmax(std::vector<double>{std::nan("")}, 1.0), DomainError);
}

TEST(Softmax, FlattensMonotonicallyWithTemperature) {
  double prev = 1.0;
  for (double t = 0.5; t <= 1e6; t *= 2) {
    const double top = softmax(std::vector<double>{5.0, 0.0}, t)[0];
    EXPECT_LT(top, prev);
    EXPECT_GT(top, 0.5);
    prev = top;
  }
  EXPECT_NEAR(prev, 0.5, 1e-5);
}

TEST(Softmax, ProbabilityVectorForExtremeLogits) {
  RandomStream rng(9, 2);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<double> z(n);
    for (auto& x : z) x = (rng.uniform() * 2 - 1) * 1e4;
    const double temp = 1e-3 + rng.uniform() * 10;
    const auto p = softmax(z, temp);
    double sum = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    std::vector<double> shifted(z);
    for (auto& x : shifted) x += 123.0;
    const auto q = softmax(shifted, temp);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], q[i], 1e-9);
  }
}

}  // namespace
