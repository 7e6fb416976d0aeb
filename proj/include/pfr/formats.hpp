#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pfr {

// A custom floating-point format: 1 sign bit, `exponent_bits` exponent bits,
// `mantissa_bits` mantissa bits. Exponent field 0 holds subnormals; every
// other exponent value is an ordinary normal number, so there is no Inf/NaN
// and the top of the range saturates instead.
struct PrecisionFormat {
  int exponent_bits = 0;
  int mantissa_bits = 0;
  int bias = -1; // negative means "use the default", 2^exponent_bits - 1

  int effective_bias() const;
  int width() const { return 1 + exponent_bits + mantissa_bits; }

  // Throws std::invalid_argument if the format cannot be represented
  // exactly in double arithmetic (exponent_bits < 1, mantissa_bits < 0 or
  // > 52, width > 64, or a bias that pushes values outside double range).
  void validate() const;

  bool operator==(const PrecisionFormat &o) const {
    return exponent_bits == o.exponent_bits && mantissa_bits == o.mantissa_bits &&
           effective_bias() == o.effective_bias();
  }
};

// A training configuration: format A stores weights and activations,
// format B stores optimizer state.
struct PrecisionConfig {
  int id = 0;
  PrecisionFormat format_a;
  PrecisionFormat format_b;
};

// Per-model quantities the memory model needs.
struct ArchitectureDescriptor {
  std::int64_t weight_count = 0;
  std::int64_t activation_elements_per_sample = 0;
  std::int64_t batch_size = 0;
  double optimizer_state_multiplier = 0.0;
};

struct MemoryBreakdown {
  double weights_bytes = 0.0;
  double activations_bytes = 0.0;
  double optimizer_bytes = 0.0;
  double total_bytes = 0.0;
};

// Value of the bit pattern `pattern` (low `width()` bits, layout
// sign | exponent | mantissa from most to least significant).
double decode_pattern(std::uint64_t pattern, const PrecisionFormat &fmt);

// Same, from a string of '0'/'1' of exactly fmt.width() characters.
double decode_bits(std::string_view bits, const PrecisionFormat &fmt);

// Bit pattern of the representable value nearest to x (ties to even
// mantissa, overflow saturates to the largest magnitude). x must not be NaN.
std::uint64_t encode_nearest(double x, const PrecisionFormat &fmt);

// Nearest representable value itself: decode_pattern(encode_nearest(x)).
double quantize(double x, const PrecisionFormat &fmt);

// Largest representable magnitude.
double max_value(const PrecisionFormat &fmt);

MemoryBreakdown memory_bytes(const PrecisionConfig &config, const ArchitectureDescriptor &arch);

} // namespace pfr
