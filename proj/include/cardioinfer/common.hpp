#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cardioinfer {

/// Malformed input text (mesh files, CSV, config). Messages carry a line
/// number or field name where one is known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structurally well-formed input that violates a domain invariant
/// (disconnected mesh, non-positive edge length, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad run configuration (missing file, absent seed, inconsistent budgets).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure that survived all recovery attempts (e.g. Cholesky
/// still failing at the maximum jitter level).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FNV-1a 64-bit hash. Used for config hashes and artifact checksums in
/// run manifests; not cryptographic.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data);

}  // namespace cardioinfer
