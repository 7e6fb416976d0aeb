#include "doctest.h"

#include "pfr/formats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

using namespace pfr;

namespace {

PrecisionFormat fmt34() { return {3, 4, -1}; }

// Every representable value of a format, with its mantissa field for
// tie-to-even decisions.
struct Repr {
  double value;
  std::uint64_t mantissa;
};

std::vector<Repr> enumerate(const PrecisionFormat &fmt) {
  std::vector<Repr> out;
  const std::uint64_t count = 1ULL << fmt.width();
  const std::uint64_t mant_mask = (1ULL << fmt.mantissa_bits) - 1;
  out.reserve(count);
  for (std::uint64_t p = 0; p < count; ++p) out.push_back({decode_pattern(p, fmt), p & mant_mask});
  return out;
}

// Brute-force nearest representable with round-half-to-even on exact ties.
double nearest_oracle(double x, const std::vector<Repr> &reprs) {
  double best = reprs.front().value;
  std::uint64_t best_m = reprs.front().mantissa;
  double best_d = std::abs(x - best);
  for (const Repr &r : reprs) {
    const double d = std::abs(x - r.value);
    if (d < best_d || (d == best_d && r.value != best &&
                       (r.mantissa % 2 == 0) && (best_m % 2 == 1))) {
      best = r.value;
      best_m = r.mantissa;
      best_d = d;
    }
  }
  return best;
}

} // namespace

TEST_CASE("bit pattern decoding") {
  const PrecisionFormat f = fmt34();
  CHECK(f.effective_bias() == 7);
  CHECK(f.width() == 8);

  CHECK(decode_bits("01110000", f) == (1.0));
  CHECK(decode_bits("11111000", f) == (-1.5));
  CHECK(decode_bits("00000000", f) == 0.0);

  SUBCASE("subnormal band uses exponent 1 - bias") {
    // e = 0, m = 3: 2^-6 * 3/16
    CHECK(decode_bits("00000011", f) == (3.0 / 1024.0));
    CHECK(decode_bits("10000001", f) == (-1.0 / 1024.0));
  }

  SUBCASE("pattern and string forms agree") {
    for (std::uint64_t p = 0; p < 256; ++p) {
      std::string bits(8, '0');
      for (int b = 0; b < 8; ++b)
        if (p >> (7 - b) & 1) bits[static_cast<std::size_t>(b)] = '1';
      CHECK(decode_bits(bits, f) == decode_pattern(p, f));
    }
  }

  SUBCASE("explicit bias shifts the scale") {
    PrecisionFormat g{3, 4, 3};
    CHECK(decode_bits("01110000", g) == (16.0));
  }

  SUBCASE("rejects malformed input") {
    CHECK_THROWS_AS(decode_bits("0111000", f), std::invalid_argument);
    CHECK_THROWS_AS(decode_bits("01110002", f), std::invalid_argument);
    CHECK_THROWS_AS((void)decode_pattern(1ULL << 8, f), std::invalid_argument);
  }
}

TEST_CASE("format validation") {
  auto reject = [](int e, int m, int bias) {
    PrecisionFormat f{e, m, bias};
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  };
  reject(0, 4, -1);
  reject(3, -1, -1);
  reject(3, 53, -1);
  reject(12, 52, -1);
  CHECK_NOTHROW(fmt34().validate());
  const PrecisionFormat same{3, 4, 7};
  CHECK(fmt34() == same);
}

TEST_CASE("quantize rounds to the nearest representable") {
  const PrecisionFormat f = fmt34();
  const std::vector<Repr> reprs = enumerate(f);

  CHECK(quantize(0.0, f) == 0.0);
  CHECK(max_value(f) == (1.9375));

  SUBCASE("pinned case with brute-force confirmation") {
    CHECK(quantize(0.1, f) == (0.1015625));
    CHECK(quantize(0.1, f) == nearest_oracle(0.1, reprs));
  }

  SUBCASE("exact ties go to the even mantissa") {
    // midpoint of [1.0 (m=0), 1.0625 (m=1)] and of [1.0625 (m=1), 1.125 (m=2)]
    CHECK(quantize(1.03125, f) == 1.0);
    CHECK(quantize(1.09375, f) == 1.125);
  }

  SUBCASE("matches the oracle on random inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-2.2, 2.2);
    for (int t = 0; t < 2000; ++t) {
      const double x = dist(rng);
      CHECK(quantize(x, f) == nearest_oracle(x, reprs));
    }
  }

  SUBCASE("idempotent on every representable value") {
    for (const Repr &r : reprs) CHECK(quantize(r.value, f) == r.value);
  }

  SUBCASE("monotone and odd-symmetric") {
    std::vector<double> vals;
    for (const Repr &r : reprs) vals.push_back(r.value);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    double prev = quantize(vals.front() - 0.25, f);
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double mid = 0.5 * (vals[i] + vals[i + 1]);
      for (double x : {vals[i], std::nextafter(mid, -10.0), std::nextafter(mid, 10.0)}) {
        const double q = quantize(x, f);
        CHECK(q >= prev);
        prev = q;
        CHECK(quantize(-x, f) == -q);
      }
    }
  }

  SUBCASE("error bounded by half the local gap") {
    std::vector<double> vals;
    for (const Repr &r : reprs) vals.push_back(r.value);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dist(-1.9, 1.9);
    for (int t = 0; t < 500; ++t) {
      const double x = dist(rng);
      auto hi = std::upper_bound(vals.begin(), vals.end(), x);
      if (hi == vals.begin() || hi == vals.end()) continue;
      const double gap = *hi - *(hi - 1);
      CHECK(std::abs(quantize(x, f) - x) <= 0.5 * gap + 1e-15);
    }
  }

  SUBCASE("saturates beyond the largest magnitude") {
    CHECK(quantize(100.0, f) == max_value(f));
    CHECK(quantize(-100.0, f) == -max_value(f));
    CHECK_THROWS_AS((void)quantize(std::nan(""), f), std::invalid_argument);
  }

  SUBCASE("encode/decode round trip preserves the value") {
    for (std::uint64_t p = 0; p < 256; ++p) {
      const double v = decode_pattern(p, f);
      CHECK(decode_pattern(encode_nearest(v, f), f) == v);
    }
  }
}

TEST_CASE("memory model") {
  PrecisionConfig cfg;
  cfg.format_a = {3, 4, -1};  // 8 bits
  cfg.format_b = {5, 10, -1}; // 16 bits
  ArchitectureDescriptor arch{1000, 500, 32, 2.0};

  const MemoryBreakdown b = memory_bytes(cfg, arch);
  CHECK(b.weights_bytes == (1000.0));
  CHECK(b.activations_bytes == (16000.0));
  CHECK(b.optimizer_bytes == (4000.0));
  CHECK(b.total_bytes == (21000.0));

  SUBCASE("zero batch removes the activation component") {
    arch.batch_size = 0;
    CHECK(memory_bytes(cfg, arch).activations_bytes == 0.0);
  }

  SUBCASE("doubling width A doubles weights and activations") {
    PrecisionConfig wide = cfg;
    wide.format_a = {4, 11, -1}; // 16 bits
    const MemoryBreakdown w = memory_bytes(wide, arch);
    CHECK(w.weights_bytes == (2.0 * b.weights_bytes));
    CHECK(w.activations_bytes == (2.0 * b.activations_bytes));
    CHECK(w.optimizer_bytes == (b.optimizer_bytes));
  }

  SUBCASE("negative counts are rejected") {
    arch.weight_count = -1;
    CHECK_THROWS_AS((void)memory_bytes(cfg, arch), std::invalid_argument);
  }
}
