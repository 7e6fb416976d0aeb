#include "pfr/formats.hpp"

#include <cfenv>
#include <cmath>
#include <stdexcept>

namespace pfr {

int PrecisionFormat::effective_bias() const {
  if (bias >= 0) return bias;
  return (1 << exponent_bits) - 1;
}

void PrecisionFormat::validate() const {
  if (exponent_bits < 1) throw std::invalid_argument("format: exponent_bits must be >= 1");
  if (mantissa_bits < 0 || mantissa_bits > 52)
    throw std::invalid_argument("format: mantissa_bits must be in [0, 52]");
  if (width() > 64) throw std::invalid_argument("format: width exceeds 64 bits");
  if (exponent_bits > 30) throw std::invalid_argument("format: exponent_bits too large");
  const int b = effective_bias();
  const int emax = (1 << exponent_bits) - 1;
  if (emax - b > 960 || 1 - b - mantissa_bits < -960)
    throw std::invalid_argument("format: bias places values outside double range");
}

namespace {

std::uint64_t make_pattern(bool sign, std::uint64_t exponent, std::uint64_t mantissa,
                           const PrecisionFormat &fmt) {
  return (static_cast<std::uint64_t>(sign) << (fmt.exponent_bits + fmt.mantissa_bits)) |
         (exponent << fmt.mantissa_bits) | mantissa;
}

} // namespace

double decode_pattern(std::uint64_t pattern, const PrecisionFormat &fmt) {
  fmt.validate();
  if (fmt.width() < 64 && (pattern >> fmt.width()) != 0)
    throw std::invalid_argument("decode: pattern wider than format");
  const int mb = fmt.mantissa_bits;
  const std::uint64_t mant_mask = (mb == 0) ? 0 : ((std::uint64_t{1} << mb) - 1);
  const std::uint64_t exp_mask = (std::uint64_t{1} << fmt.exponent_bits) - 1;
  const std::uint64_t m = pattern & mant_mask;
  const std::uint64_t e = (pattern >> mb) & exp_mask;
  const bool sign = ((pattern >> (fmt.exponent_bits + mb)) & 1) != 0;
  const int b = fmt.effective_bias();

  double mag;
  if (e == 0) {
    mag = std::ldexp(static_cast<double>(m), 1 - b - mb); // subnormal: 2^(1-bias) * m/2^mb
  } else {
    mag = std::ldexp(static_cast<double>(m) + std::ldexp(1.0, mb), static_cast<int>(e) - b - mb);
  }
  return sign ? -mag : mag;
}

double decode_bits(std::string_view bits, const PrecisionFormat &fmt) {
  fmt.validate();
  if (static_cast<int>(bits.size()) != fmt.width())
    throw std::invalid_argument("decode: bit string length does not match format width");
  std::uint64_t pattern = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("decode: bit string must be 0/1");
    pattern = (pattern << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return decode_pattern(pattern, fmt);
}

double max_value(const PrecisionFormat &fmt) {
  fmt.validate();
  const int emax = (1 << fmt.exponent_bits) - 1;
  return std::ldexp(2.0 - std::ldexp(1.0, -fmt.mantissa_bits), emax - fmt.effective_bias());
}

std::uint64_t encode_nearest(double x, const PrecisionFormat &fmt) {
  fmt.validate();
  if (std::isnan(x)) throw std::invalid_argument("encode: NaN has no representation");
  const bool sign = std::signbit(x);
  const double a = std::fabs(x);
  const int mb = fmt.mantissa_bits;
  const int b = fmt.effective_bias();
  const std::uint64_t emax = (std::uint64_t{1} << fmt.exponent_bits) - 1;
  const std::uint64_t mmax = (mb == 0) ? 0 : ((std::uint64_t{1} << mb) - 1);

  if (a == 0.0) return make_pattern(sign, 0, 0, fmt);
  if (a >= max_value(fmt)) return make_pattern(sign, emax, mmax, fmt);

  int ex = 0;
  std::frexp(a, &ex); // a = f * 2^ex, f in [0.5, 1)
  const int ereal = ex - 1;
  const long long biased = static_cast<long long>(ereal) + b;

  // Spacing of representable values in the band containing a; division by a
  // power of two is exact, so nearbyint sees the true tie cases.
  double step;
  if (biased < 1)
    step = std::ldexp(1.0, 1 - b - mb);
  else
    step = std::ldexp(1.0, ereal - mb);

  const double units = std::nearbyint(a / step); // ties to even under FE_TONEAREST
  if (units == 0.0) return make_pattern(sign, 0, 0, fmt);

  if (biased < 1) {
    const auto u = static_cast<std::uint64_t>(units);
    if (u <= mmax) return make_pattern(sign, 0, u, fmt);
    return make_pattern(sign, 1, 0, fmt); // rounded up into the first normal
  }
  const auto u = static_cast<std::uint64_t>(units); // in [2^mb, 2^(mb+1)]
  const std::uint64_t one = std::uint64_t{1} << mb;
  if (u < 2 * one) return make_pattern(sign, static_cast<std::uint64_t>(biased), u - one, fmt);
  return make_pattern(sign, static_cast<std::uint64_t>(biased) + 1, 0, fmt);
}

double quantize(double x, const PrecisionFormat &fmt) {
  return decode_pattern(encode_nearest(x, fmt), fmt);
}

MemoryBreakdown memory_bytes(const PrecisionConfig &config, const ArchitectureDescriptor &arch) {
  if (arch.weight_count < 0 || arch.activation_elements_per_sample < 0 || arch.batch_size < 0 ||
      arch.optimizer_state_multiplier < 0)
    throw std::invalid_argument("memory: architecture fields must be non-negative");
  const double wa = static_cast<double>(config.format_a.width());
  const double wb = static_cast<double>(config.format_b.width());
  const double weights = static_cast<double>(arch.weight_count);
  const double acts = static_cast<double>(arch.batch_size) *
                      static_cast<double>(arch.activation_elements_per_sample);

  MemoryBreakdown out;
  out.weights_bytes = wa * weights / 8.0;
  out.activations_bytes = wa * acts / 8.0;
  out.optimizer_bytes = wb * arch.optimizer_state_multiplier * weights / 8.0;
  out.total_bytes = out.weights_bytes + out.activations_bytes + out.optimizer_bytes;
  return out;
}

} // namespace pfr
