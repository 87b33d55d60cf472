#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dgnn/rng.hpp"
#include "dgnn/tensor.hpp"

namespace dgnn {

/// Named learnable tensors in registration order. Names are the checkpoint
/// keys, so they must stay stable.
class ParameterSet {
 public:
  Tensor& add(std::string name, Tensor value);
  /// Glorot-uniform weight [fan_in×fan_out], limit sqrt(6/(fan_in+fan_out)).
  Tensor& add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  Tensor& add_uniform(const std::string& name, Shape shape, double limit, Rng& rng);
  Tensor& add_constant(const std::string& name, Shape shape, double value);

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);

  std::size_t size() const { return entries_.size(); }
  std::size_t total_elements() const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  void zero_grad();
  /// Deep copy; the copy's tensors are independent leaves.
  ParameterSet clone() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace dgnn
