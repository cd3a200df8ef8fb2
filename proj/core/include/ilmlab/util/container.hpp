#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ilmlab::util {

/// One named tensor in a container: shape plus row-major float64 values.
struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

/// Versioned binary container shared by model checkpoints and estimator
/// files. Layout (all integers little-endian):
///
///   "ILMC"  u32 format_version
///   str kind
///   u32 n_meta   { str key, str value } * n_meta
///   u32 n_vocab  { str token } * n_vocab
///   u32 n_arrays { str name, u32 rank, u64 dim * rank, f64 value * prod(dims) } * n_arrays
///
/// where str is u32 length followed by raw bytes. Doubles are stored as their
/// IEEE-754 bit pattern, so save/load is bit-exact.
struct Container {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> vocab;
  std::vector<NamedArray> arrays;

  std::string encode() const;
  static Container decode(const std::string& bytes);

  void save(const std::string& path) const;
  static Container load(const std::string& path);

  /// Hash of the encoded bytes.
  std::string content_hash() const;

  const std::string& meta_value(const std::string& key) const;
  bool has_meta(const std::string& key) const;
  const NamedArray& array(const std::string& name) const;
};

}  // namespace ilmlab::util
