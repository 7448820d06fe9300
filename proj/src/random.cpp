#include "burgerslab/random.hpp"

namespace burgerslab {

Engine make_engine(Stream family, std::uint64_t seed, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(family),
                    static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(counter & 0xffffffffu),
                    static_cast<std::uint32_t>(counter >> 32)};
  return Engine(seq);
}

}  // namespace burgerslab
