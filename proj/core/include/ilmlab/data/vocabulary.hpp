#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ilmlab::data {

/// Reserved ids: every vocabulary starts with the begin and end sentinels.
inline constexpr std::size_t kBos = 0;
inline constexpr std::size_t kEos = 1;
inline constexpr std::size_t kFirstLabel = 2;

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Tokens in id order; the first two must be the sentinels.
  explicit Vocabulary(std::vector<std::string> tokens);
  /// "<s>", "</s>", then w00, w01, ... for `num_labels` ordinary labels.
  static Vocabulary synthetic(std::size_t num_labels);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t num_labels() const noexcept { return tokens_.size() - kFirstLabel; }
  const std::string& token(std::size_t id) const;
  std::size_t id(const std::string& token) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

  std::string render(const std::vector<std::size_t>& ids) const;

 private:
  std::vector<std::string> tokens_;
};

}  // namespace ilmlab::data
