#include "ilmlab/model/checkpoint.hpp"

#include "ilmlab/util/error.hpp"

namespace ilmlab::model {

namespace {

template <typename Model>
util::Container encode_model(const Model& m, const char* kind) {
  util::Container c;
  c.kind = kind;
  const auto config = m.config().to_kv();
  for (const auto& [k, v] : config.entries()) c.meta.emplace_back(k, v);
  c.vocab = m.vocabulary().tokens();
  m.params().export_to(c.arrays);
  return c;
}

util::KeyValues meta_kv(const util::Container& c) {
  util::KeyValues kv;
  for (const auto& [k, v] : c.meta) kv.set(k, v);
  return kv;
}

}  // namespace

util::Container to_container(const AedModel& model) { return encode_model(model, "aed"); }
util::Container to_container(const LanguageModel& lm) { return encode_model(lm, "lm"); }

AedModel aed_from_container(const util::Container& c) {
  if (c.kind != "aed") throw FormatError("expected an AED checkpoint, found kind '" + c.kind + "'", 0);
  AedModel model(AedConfig::from_kv(meta_kv(c)), data::Vocabulary(c.vocab));
  model.params().import_from(c);
  return model;
}

LanguageModel lm_from_container(const util::Container& c) {
  if (c.kind != "lm") throw FormatError("expected an LM checkpoint, found kind '" + c.kind + "'", 0);
  LanguageModel lm(LmConfig::from_kv(meta_kv(c)), data::Vocabulary(c.vocab));
  lm.params().import_from(c);
  return lm;
}

void save_aed(const AedModel& model, const std::string& path) { to_container(model).save(path); }
AedModel load_aed(const std::string& path) { return aed_from_container(util::Container::load(path)); }
void save_lm(const LanguageModel& lm, const std::string& path) { to_container(lm).save(path); }
LanguageModel load_lm(const std::string& path) { return lm_from_container(util::Container::load(path)); }

std::string model_hash(const AedModel& model) { return to_container(model).content_hash(); }

}  // namespace ilmlab::model
