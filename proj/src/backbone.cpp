#include "dgnn/backbone.hpp"

#include <cmath>
#include <numbers>

#include "dgnn/error.hpp"
#include "dgnn/ops.hpp"

namespace dgnn {

void BackboneConfig::validate() const {
  if (hidden_dim < 4 || hidden_dim % 2 != 0) {
    throw ValidationError("backbone hidden_dim must be even and >= 4, got " + std::to_string(hidden_dim));
  }
  if (rbf_count < 2) throw ValidationError("backbone rbf_count must be >= 2");
  if (num_interactions < 1) throw ValidationError("backbone num_interactions must be >= 1");
  if (!(rbf_gamma > 0.0)) throw ValidationError("backbone rbf_gamma must be positive");
  if (!(cutoff > 0.0)) throw ValidationError("backbone cutoff must be positive");
}

std::vector<double> rbf_expand(double distance, const BackboneConfig& config) {
  const auto k = static_cast<std::size_t>(config.rbf_count);
  const double step = config.cutoff / static_cast<double>(k - 1);
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double diff = distance - step * static_cast<double>(i);
    out[i] = std::exp(-config.rbf_gamma * diff * diff);
  }
  return out;
}

double cosine_envelope(double distance, double cutoff) {
  if (distance >= cutoff) return 0.0;
  return 0.5 * (std::cos(std::numbers::pi * distance / cutoff) + 1.0);
}

Tensor Backbone::interact(int layer, const Tensor& h, const SubGraph& graph, const EdgeBasis& basis) const {
  return ops::add(h, interaction_update(layer, h, graph, basis));
}

Tensor Backbone::encode(const SubGraph& graph) const {
  const EdgeBasis basis = edge_basis(graph);
  Tensor h = embed(graph);
  for (int l = 0; l < num_layers(); ++l) h = interact(l, h, graph, basis);
  return h;
}

void SchNetBackbone::register_parameters(ParameterSet& params, const std::string& prefix,
                                         const BackboneConfig& config, OutputMode mode, Rng& rng) {
  config.validate();
  const auto h = static_cast<std::size_t>(config.hidden_dim);
  const auto k = static_cast<std::size_t>(config.rbf_count);
  params.add_uniform(prefix + ".embed.atom", Shape{100, h}, std::sqrt(3.0), rng);
  if (config.use_tag_embedding) params.add_uniform(prefix + ".embed.tag", Shape{3, h}, std::sqrt(3.0), rng);
  for (int l = 0; l < config.num_interactions; ++l) {
    const std::string b = prefix + ".block" + std::to_string(l);
    params.add_glorot(b + ".w1.weight", h, h, rng);
    params.add_glorot(b + ".filter.0.weight", k, h, rng);
    params.add_constant(b + ".filter.0.bias", Shape{h}, 0.0);
    params.add_glorot(b + ".filter.1.weight", h, h, rng);
    params.add_constant(b + ".filter.1.bias", Shape{h}, 0.0);
    params.add_glorot(b + ".w3.weight", h, h, rng);
    params.add_constant(b + ".w3.bias", Shape{h}, 0.0);
    params.add_glorot(b + ".w2.weight", h, h, rng);
    params.add_constant(b + ".w2.bias", Shape{h}, 0.0);
  }
  const std::size_t half = h / 2;
  const std::size_t out_width = mode == OutputMode::Scalar ? 1 : half;
  params.add_glorot(prefix + ".out.0.weight", h, half, rng);
  params.add_constant(prefix + ".out.0.bias", Shape{half}, 0.0);
  params.add_glorot(prefix + ".out.1.weight", half, out_width, rng);
  params.add_constant(prefix + ".out.1.bias", Shape{out_width}, 0.0);
}

SchNetBackbone::SchNetBackbone(const ParameterSet& params, std::string prefix, BackboneConfig config,
                               OutputMode mode)
    : params_(&params), prefix_(std::move(prefix)), config_(config), mode_(mode) {
  config_.validate();
}

const Tensor& SchNetBackbone::param(const std::string& suffix) const {
  return params_->get(prefix_ + "." + suffix);
}

EdgeBasis SchNetBackbone::edge_basis(const SubGraph& graph) const {
  const std::size_t e = graph.num_edges();
  const auto k = static_cast<std::size_t>(config_.rbf_count);
  std::vector<double> rbf;
  rbf.reserve(e * k);
  std::vector<double> env(e);
  for (std::size_t i = 0; i < e; ++i) {
    const auto row = rbf_expand(graph.edge_distance[i], config_);
    rbf.insert(rbf.end(), row.begin(), row.end());
    env[i] = cosine_envelope(graph.edge_distance[i], config_.cutoff);
  }
  return {Tensor(Shape{e, k}, std::move(rbf)), Tensor::vector(std::move(env))};
}

Tensor SchNetBackbone::embed(const SubGraph& graph) const {
  std::vector<int> rows(graph.num_nodes);
  for (std::size_t i = 0; i < graph.num_nodes; ++i) {
    const int z = graph.atomic_numbers[i];
    if (z < 1 || z > 100) {
      throw ValidationError("atomic number " + std::to_string(z) + " at node " + std::to_string(i) +
                            " outside [1, 100]");
    }
    rows[i] = z - 1;
  }
  Tensor h = ops::gather_rows(param("embed.atom"), rows);
  if (config_.use_tag_embedding) h = ops::add(h, ops::gather_rows(param("embed.tag"), graph.tags));
  return h;
}

Tensor SchNetBackbone::interaction_update(int layer, const Tensor& h, const SubGraph& graph,
                                          const EdgeBasis& basis) const {
  if (h.rows() != graph.num_nodes) {
    throw ShapeError("interaction: state has " + std::to_string(h.rows()) + " rows for " +
                     std::to_string(graph.num_nodes) + " nodes");
  }
  const std::string b = "block" + std::to_string(layer) + ".";
  const Tensor x = ops::linear(h, param(b + "w1.weight"));
  Tensor filter = ops::shifted_softplus(ops::linear(basis.rbf, param(b + "filter.0.weight"), param(b + "filter.0.bias")));
  filter = ops::linear(filter, param(b + "filter.1.weight"), param(b + "filter.1.bias"));
  filter = ops::scale_rows(filter, basis.envelope);
  const Tensor messages = ops::mul(ops::gather_rows(x, graph.edge_src), filter);
  const Tensor m = ops::scatter_add(messages, graph.edge_dst, graph.num_nodes);
  const Tensor v = ops::shifted_softplus(ops::linear(m, param(b + "w3.weight"), param(b + "w3.bias")));
  return ops::linear(v, param(b + "w2.weight"), param(b + "w2.bias"));
}

Tensor SchNetBackbone::output_scalar(const Tensor& h) const {
  if (mode_ != OutputMode::Scalar) throw Error("backbone " + prefix_ + " was built for hidden output");
  const Tensor y = ops::shifted_softplus(ops::linear(h, param("out.0.weight"), param("out.0.bias")));
  const Tensor s = ops::linear(y, param("out.1.weight"), param("out.1.bias"));
  return ops::reshape(s, Shape{s.rows()});
}

Tensor SchNetBackbone::output_hidden(const Tensor& h) const {
  if (mode_ != OutputMode::Hidden) throw Error("backbone " + prefix_ + " was built for scalar output");
  const Tensor y = ops::shifted_softplus(ops::linear(h, param("out.0.weight"), param("out.0.bias")));
  return ops::linear(y, param("out.1.weight"), param("out.1.bias"));
}

}  // namespace dgnn
