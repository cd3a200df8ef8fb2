#pragma once

#include <map>
#include <string>
#include <vector>

#include "ilmlab/numcore/tensor.hpp"
#include "ilmlab/util/container.hpp"
#include "ilmlab/util/random.hpp"

namespace ilmlab::model {

/// Named trainable tensors, iterated in name order.
class ParamStore {
 public:
  /// Registers a tensor initialized uniformly in [-scale, scale].
  num::Tensor& create(const std::string& name, num::Shape shape, util::Rng& rng, double scale);

  num::Tensor& get(const std::string& name);
  const num::Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  std::vector<num::Tensor*> all();
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;
  void set_requires_grad(bool on);
  void zero_grad();

  /// Hash over names, shapes and value bits.
  std::string checksum() const;

  void export_to(std::vector<util::NamedArray>& arrays, const std::string& prefix = "") const;
  /// Overwrites values from arrays named `prefix + name`; every tensor must
  /// be present with a matching shape.
  void import_from(const util::Container& c, const std::string& prefix = "");

 private:
  std::map<std::string, num::Tensor> tensors_;
};

}  // namespace ilmlab::model
