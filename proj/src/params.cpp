#include "dgnn/params.hpp"

#include <cmath>
#include <utility>

namespace dgnn {

Tensor& ParameterSet::add(std::string name, Tensor value) {
  if (index_.count(name)) throw Error("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), value.clone(/*requires_grad=*/true));
  return entries_.back().second;
}

Tensor& ParameterSet::add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                                 Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return add_uniform(name, Shape{fan_in, fan_out}, limit, rng);
}

Tensor& ParameterSet::add_uniform(const std::string& name, Shape shape, double limit, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-limit, limit);
  return add(name, Tensor(std::move(shape), std::move(v)));
}

Tensor& ParameterSet::add_constant(const std::string& name, Shape shape, double value) {
  return add(name, Tensor::full(std::move(shape), value));
}

bool ParameterSet::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

const Tensor& ParameterSet::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].second;
}

Tensor& ParameterSet::get(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& [name, t] : entries_) out.add(name, t);
  return out;
}

}  // namespace dgnn
