#include "cardioinfer/common.hpp"

#include <array>

namespace cardioinfer {

std::string fnv1a64_hex(std::string_view bytes) {
  const std::uint64_t h = fnv1a64(bytes);
  static const char* digits = "0123456789abcdef";
  std::array<char, 16> out{};
  for (int i = 0; i < 16; ++i) {
    out[15 - i] = digits[(h >> (4 * i)) & 0xf];
  }
  return std::string(out.data(), out.size());
}

}  // namespace cardioinfer
