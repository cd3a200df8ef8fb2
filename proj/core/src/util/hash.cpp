#include "ilmlab/util/hash.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "ilmlab/util/error.hpp"

namespace ilmlab::util {

namespace {
constexpr std::uint64_t kPrime = 0x100000001b3ULL;
}

void Fnv1a::update(std::span<const std::uint8_t> bytes) noexcept {
  for (std::uint8_t b : bytes) {
    state_ ^= b;
    state_ *= kPrime;
  }
}

void Fnv1a::update(std::string_view text) noexcept {
  for (char ch : text) {
    state_ ^= static_cast<std::uint8_t>(ch);
    state_ *= kPrime;
  }
}

void Fnv1a::update_u64(std::uint64_t v) noexcept {
  for (int i = 0; i < 8; ++i) {
    state_ ^= static_cast<std::uint8_t>(v >> (8 * i));
    state_ *= kPrime;
  }
}

void Fnv1a::update_f64(double v) noexcept { update_u64(std::bit_cast<std::uint64_t>(v)); }

std::string Fnv1a::hex() const { return hex64(state_); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_bytes(std::string_view bytes) noexcept {
  Fnv1a h;
  h.update(bytes);
  return h.digest();
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(hash_bytes(content));
}

}  // namespace ilmlab::util
