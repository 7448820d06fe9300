#pragma once

#include <cstdint>
#include <random>

namespace burgerslab {

/// Independent substream families. Each (family, seed, counter) triple keys
/// its own engine, so draws never depend on execution order or thread count.
enum class Stream : std::uint32_t {
  noise = 0x6e6f6973,
  brownian = 0x62726f77,
  test_data = 0x74657374,
};

using Engine = std::mt19937_64;

Engine make_engine(Stream family, std::uint64_t seed, std::uint64_t counter);

/// Standard normal draws; a thin wrapper so every module samples the same way.
class NormalSource {
 public:
  NormalSource(Stream family, std::uint64_t seed, std::uint64_t counter)
      : engine_(make_engine(family, seed, counter)) {}

  double operator()() { return dist_(engine_); }

 private:
  Engine engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace burgerslab
