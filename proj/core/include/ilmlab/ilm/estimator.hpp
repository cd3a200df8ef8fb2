#pragma once

#include <string>

#include "ilmlab/ilm/context.hpp"
#include "ilmlab/util/container.hpp"

namespace ilmlab::ilm {

// Estimator files use the checkpoint container with kind "ilm-estimator".
// Metadata records the method, the content hash of the AED checkpoint the
// estimate belongs to and the step-zero rule; arrays hold either ĉ or the
// Mini-LSTM tensors. E_x[h] and zero have no arrays.

util::Container estimator_to_container(const ContextSource& source, const std::string& aed_hash);
/// Throws ConfigError if the file was produced for a different AED.
ContextSource estimator_from_container(const util::Container& c, const model::AedModel& aed);

void save_estimator(const ContextSource& source, const model::AedModel& aed, const std::string& path);
ContextSource load_estimator(const std::string& path, const model::AedModel& aed);

}  // namespace ilmlab::ilm
