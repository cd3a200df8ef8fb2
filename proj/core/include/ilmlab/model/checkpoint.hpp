#pragma once

#include <string>

#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/lm.hpp"
#include "ilmlab/util/container.hpp"

namespace ilmlab::model {

/// Checkpoints use the shared container: kind "aed" or "lm", the topology
/// config as header key-value pairs, the vocabulary, and every parameter
/// tensor by name. Save/load round-trips are bit-exact.
util::Container to_container(const AedModel& model);
util::Container to_container(const LanguageModel& lm);
AedModel aed_from_container(const util::Container& c);
LanguageModel lm_from_container(const util::Container& c);

void save_aed(const AedModel& model, const std::string& path);
AedModel load_aed(const std::string& path);
void save_lm(const LanguageModel& lm, const std::string& path);
LanguageModel load_lm(const std::string& path);

}  // namespace ilmlab::model
