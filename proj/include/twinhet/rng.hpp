#pragma once

// Counter-based random streams. Every variate is addressed by (key, counter),
// so any sample can be regenerated independently of how the work is split
// across threads.

#include <array>
#include <cstdint>
#include <string_view>

namespace twinhet {

/// Philox4x32-10 block cipher (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over a name, used to turn "module/channel" labels into stream ids.
constexpr std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct NormalPair {
  double first;
  double second;
};

/// One named stream derived from a run seed.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);
  RngStream(std::uint64_t seed, std::string_view name) : RngStream(seed, stream_id(name)) {}

  /// Child stream, e.g. one bootstrap replica or one detector channel.
  RngStream derive(std::uint64_t child) const;

  /// Two uniforms in the open interval (0, 1) for (index, slot).
  std::array<double, 2> uniform_pair(std::uint64_t index, std::uint32_t slot = 0) const;
  /// Two independent standard normals (Box-Muller) for (index, slot).
  NormalPair normal_pair(std::uint64_t index, std::uint32_t slot = 0) const;

  std::array<std::uint32_t, 2> key() const { return key_; }

 private:
  explicit RngStream(std::array<std::uint32_t, 2> key) : key_(key) {}
  std::array<std::uint32_t, 2> key_;
};

}  // namespace twinhet
