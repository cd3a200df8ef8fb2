#include "ilmlab/ilm/estimator.hpp"

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/kv.hpp"

namespace ilmlab::ilm {

namespace {
constexpr const char* kKind = "ilm-estimator";
}

util::Container estimator_to_container(const ContextSource& source, const std::string& aed_hash) {
  if (!source.resolved()) throw UsageError("cannot save an unresolved ILM estimator");
  util::Container c;
  c.kind = kKind;
  c.meta.emplace_back("method", method_name(source.method()));
  c.meta.emplace_back("aed_hash", aed_hash);
  c.meta.emplace_back("dim", std::to_string(source.dim()));
  c.meta.emplace_back("zero_at_step_zero", source.zero_at_step_zero() ? "true" : "false");
  switch (source.method()) {
    case Method::kContextAverage:
    case Method::kEncoderAverage: {
      const auto& avg = source.average();
      c.arrays.push_back({"c_hat", avg.shape(), {avg.values().begin(), avg.values().end()}});
      break;
    }
    case Method::kMiniLstm: {
      const auto& cfg = source.mini().config();
      c.meta.emplace_back("mini_hidden", std::to_string(cfg.hidden));
      c.meta.emplace_back("mini_seed", std::to_string(static_cast<std::int64_t>(cfg.seed)));
      source.mini().params().export_to(c.arrays);
      break;
    }
    default: break;
  }
  return c;
}

ContextSource estimator_from_container(const util::Container& c, const model::AedModel& aed) {
  if (c.kind != kKind) throw FormatError("container kind '" + c.kind + "' is not an ILM estimator", 0);
  const std::string expected = model::model_hash(aed);
  if (c.meta_value("aed_hash") != expected)
    throw ConfigError("ILM estimator was computed for AED " + c.meta_value("aed_hash") + ", but the loaded AED is " +
                      expected);
  const Method method = parse_method(c.meta_value("method"));
  if (static_cast<std::size_t>(util::parse_int(c.meta_value("dim"), "dim")) != aed.encoder_dim())
    throw DimensionError("ILM estimator width does not match the AED encoder");
  ContextSource source = ContextSource::zero(aed.encoder_dim());
  switch (method) {
    case Method::kZero: break;
    case Method::kContextAverage:
    case Method::kEncoderAverage: {
      const auto& a = c.array("c_hat");
      num::Tensor avg(a.shape, a.values);
      source = method == Method::kContextAverage ? ContextSource::context_average(std::move(avg))
                                                 : ContextSource::encoder_average(std::move(avg));
      break;
    }
    case Method::kSequenceEncoderAverage: source = ContextSource::sequence_encoder_average(aed.encoder_dim()); break;
    case Method::kMiniLstm: {
      MiniLstmConfig cfg;
      cfg.hidden = static_cast<std::size_t>(util::parse_int(c.meta_value("mini_hidden"), "mini_hidden"));
      cfg.seed = static_cast<std::uint64_t>(util::parse_int(c.meta_value("mini_seed"), "mini_seed"));
      auto mini = std::make_shared<MiniLstm>(aed, cfg);
      mini->params().import_from(c);
      source = ContextSource::mini_lstm(std::move(mini));
      break;
    }
  }
  source.set_zero_at_step_zero(c.meta_value("zero_at_step_zero") == "true");
  return source;
}

void save_estimator(const ContextSource& source, const model::AedModel& aed, const std::string& path) {
  estimator_to_container(source, model::model_hash(aed)).save(path);
}

ContextSource load_estimator(const std::string& path, const model::AedModel& aed) {
  return estimator_from_container(util::Container::load(path), aed);
}

}  // namespace ilmlab::ilm
