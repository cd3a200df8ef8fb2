#include "ilmlab/model/params.hpp"

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/hash.hpp"

namespace ilmlab::model {

num::Tensor& ParamStore::create(const std::string& name, num::Shape shape, util::Rng& rng, double scale) {
  if (contains(name)) throw UsageError("parameter '" + name + "' registered twice");
  std::vector<double> values(num::element_count(shape));
  for (double& v : values) v = rng.uniform(-scale, scale);
  auto [it, ok] = tensors_.emplace(name, num::Tensor(std::move(shape), std::move(values), true));
  return it->second;
}

num::Tensor& ParamStore::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw UsageError("no parameter named '" + name + "'");
  return it->second;
}

const num::Tensor& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw UsageError("no parameter named '" + name + "'");
  return it->second;
}

std::vector<num::Tensor*> ParamStore::all() {
  std::vector<num::Tensor*> out;
  for (auto& [name, t] : tensors_) out.push_back(&t);
  return out;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : tensors_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

void ParamStore::set_requires_grad(bool on) {
  for (auto& [name, t] : tensors_) t.set_requires_grad(on);
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : tensors_) t.zero_grad();
}

std::string ParamStore::checksum() const {
  util::Fnv1a h;
  for (const auto& [name, t] : tensors_) {
    h.update(name);
    for (auto d : t.shape()) h.update_u64(d);
    for (double v : t.values()) h.update_f64(v);
  }
  return h.hex();
}

void ParamStore::export_to(std::vector<util::NamedArray>& arrays, const std::string& prefix) const {
  for (const auto& [name, t] : tensors_)
    arrays.push_back({prefix + name, t.shape(), std::vector<double>(t.values().begin(), t.values().end())});
}

void ParamStore::import_from(const util::Container& c, const std::string& prefix) {
  for (auto& [name, t] : tensors_) {
    const auto& a = c.array(prefix + name);
    if (a.shape != t.shape())
      throw FormatError("tensor '" + prefix + name + "' has shape " + num::shape_string(a.shape) + ", expected " +
                            num::shape_string(t.shape()),
                        0);
    num::Tensor loaded(a.shape, a.values, t.requires_grad());
    t = std::move(loaded);
  }
}

}  // namespace ilmlab::model
