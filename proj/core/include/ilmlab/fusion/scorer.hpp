#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ilmlab/ilm/context.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/lm.hpp"

namespace ilmlab::fusion {

using NodeId = std::uint32_t;

/// Label prefixes of one utterance's search. Node 0 is the empty prefix.
class PrefixTrie {
 public:
  static constexpr NodeId kRoot = 0;

  PrefixTrie();
  /// The node for prefix(node) + label, created on first use.
  NodeId child(NodeId node, std::size_t label);
  NodeId parent(NodeId node) const { return nodes_[node].parent; }
  std::size_t label(NodeId node) const { return nodes_[node].label; }
  std::size_t depth(NodeId node) const { return nodes_[node].depth; }
  std::vector<std::size_t> labels(NodeId node) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    NodeId parent;
    std::size_t label;
    std::size_t depth;
  };
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, NodeId> children_;
};

/// A label-synchronous model evaluated along trie prefixes. log_probs(n) is
/// the distribution of the label following prefix(n); results are memoized.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual std::span<const double> log_probs(const PrefixTrie& trie, NodeId node) = 0;
  /// Number of model steps actually computed.
  virtual std::size_t evaluations() const = 0;
};

/// Memoizing StepScorer over a model with an explicit state type. The state
/// of a node is the model state after consuming the node's last label (the
/// begin sentinel for the root).
template <typename State>
class CachedScorer : public StepScorer {
 public:
  std::span<const double> log_probs(const PrefixTrie& trie, NodeId node) override { return ensure(trie, node).logp; }
  std::size_t evaluations() const override { return evaluations_; }

 protected:
  virtual State initial() const = 0;
  /// Consumes y_prev; returns the next state and log-distribution.
  virtual std::pair<State, num::Tensor> advance(const State& state, std::size_t y_prev) const = 0;

 private:
  struct Entry {
    State state;
    std::vector<double> logp;
  };

  const Entry& ensure(const PrefixTrie& trie, NodeId node) {
    if (node >= entries_.size()) entries_.resize(trie.size());
    if (entries_[node]) return *entries_[node];
    std::pair<State, num::Tensor> next;
    if (node == PrefixTrie::kRoot) {
      next = advance(initial(), data::kBos);
    } else {
      const NodeId parent = trie.parent(node);
      const State& parent_state = ensure(trie, parent).state;
      next = advance(parent_state, trie.label(node));
    }
    ++evaluations_;
    if (node >= entries_.size()) entries_.resize(trie.size());
    auto values = next.second.values();
    entries_[node] = std::make_unique<Entry>(Entry{std::move(next.first), {values.begin(), values.end()}});
    return *entries_[node];
  }

  // Entries are heap-allocated so spans handed out stay valid as the cache
  // grows.
  std::vector<std::unique_ptr<Entry>> entries_;
  std::size_t evaluations_ = 0;
};

/// AED conditioned on one utterance; the encoder runs once at construction.
std::unique_ptr<StepScorer> make_aed_scorer(const model::AedModel& aed, const num::Tensor& features);
std::unique_ptr<StepScorer> make_lm_scorer(const model::LanguageModel& lm);
/// `enc` is needed only for E_x[h].
std::unique_ptr<StepScorer> make_ilm_scorer(const model::AedModel& aed, const ilm::ContextSource& source,
                                            const model::EncoderOutput* enc);

}  // namespace ilmlab::fusion
