#ifndef LORADEX_CHECKSUM_HPP
#define LORADEX_CHECKSUM_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace loradex {

/// 64-bit FNV-1a, used for file integrity and content-derived ids.
class Fnv1a64 {
 public:
  void update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  [[nodiscard]] std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  Fnv1a64 h;
  h.update(bytes);
  return h.digest();
}

inline std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace loradex

#endif  // LORADEX_CHECKSUM_HPP
