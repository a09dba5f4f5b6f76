#include "ssflab/rng.hpp"

namespace ssflab {
namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
}

StreamRng::StreamRng(const StreamKey& key) noexcept {
  // Each field passes through the finalizer before being folded in, so keys
  // that differ in one field only still land far apart.
  std::uint64_t k = mix64(key.master_seed ^ 0x6a09e667f3bcc908ull);
  k = mix64(k ^ mix64(key.realization + 0xbb67ae8584caa73bull));
  k = mix64(k ^ mix64(key.component + 0x3c6ef372fe94f82bull));
  key_ = k;
}

StreamRng::result_type StreamRng::at(std::uint64_t counter) const noexcept {
  return mix64(key_ + (counter + 1) * kGolden);
}

StreamRng::result_type StreamRng::operator()() noexcept { return at(counter_++); }

double StreamRng::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

}  // namespace ssflab
