#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ilmlab::util {

/// 64-bit FNV-1a. Stable across platforms; used for content hashes in
/// manifests and estimator files, not for security.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes) noexcept;
  void update(std::string_view text) noexcept;
  void update_u64(std::uint64_t v) noexcept;
  void update_f64(double v) noexcept;
  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t v);
std::uint64_t hash_bytes(std::string_view bytes) noexcept;
/// Hash of a file's full contents; throws InputError if unreadable.
std::string hash_file(const std::string& path);

}  // namespace ilmlab::util
