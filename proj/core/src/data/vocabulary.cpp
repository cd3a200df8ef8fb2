#include "ilmlab/data/vocabulary.hpp"

#include <algorithm>
#include <cstdio>

#include "ilmlab/util/error.hpp"

namespace ilmlab::data {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kFirstLabel + 1 || tokens_[kBos] != "<s>" || tokens_[kEos] != "</s>")
    throw ConfigError("vocabulary must start with <s>, </s> and hold at least one label");
}

Vocabulary Vocabulary::synthetic(std::size_t num_labels) {
  if (num_labels == 0) throw ConfigError("vocabulary needs at least one label");
  std::vector<std::string> tokens = {"<s>", "</s>"};
  for (std::size_t i = 0; i < num_labels; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "w%02zu", i);
    tokens.emplace_back(buf);
  }
  return Vocabulary(std::move(tokens));
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) throw IndexError("label id " + std::to_string(id) + " outside vocabulary");
  return tokens_[id];
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) throw IndexError("unknown token '" + token + "'");
  return static_cast<std::size_t>(it - tokens_.begin());
}

std::string Vocabulary::render(const std::vector<std::size_t>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

}  // namespace ilmlab::data
