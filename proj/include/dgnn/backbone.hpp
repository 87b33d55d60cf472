#pragma once

#include <string>
#include <vector>

#include "dgnn/params.hpp"
#include "dgnn/tensor.hpp"

namespace dgnn {

struct BackboneConfig {
  int hidden_dim = 128;        // H
  int num_interactions = 4;    // L
  int rbf_count = 50;          // K
  double rbf_gamma = 10.0;     // Å⁻²
  double cutoff = 6.0;         // Å
  bool use_tag_embedding = true;

  /// H even and ≥ 4, K ≥ 2, L ≥ 1, γ > 0, cutoff > 0.
  void validate() const;
  bool operator==(const BackboneConfig&) const = default;
};

/// A batch of disjoint graphs flattened into one node/edge list. Node i
/// belongs to graph `graph_index[i]`.
struct SubGraph {
  std::size_t num_nodes = 0;
  std::vector<int> atomic_numbers;
  std::vector<int> tags;
  std::vector<int> graph_index;
  std::vector<int> edge_src;
  std::vector<int> edge_dst;
  std::vector<double> edge_distance;

  std::size_t num_edges() const { return edge_src.size(); }
};

/// Precomputed, parameter-free edge features.
struct EdgeBasis {
  Tensor rbf;       // [E×K]
  Tensor envelope;  // [E]
};

enum class OutputMode { Scalar, Hidden };

/// The pipeline a variant head drives: embed, a fixed number of interaction
/// layers, and an output block. `interaction_update` returns the update F(h)
/// without the residual; `interact` adds it back.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual int hidden_dim() const = 0;
  virtual int num_layers() const = 0;
  virtual EdgeBasis edge_basis(const SubGraph& graph) const = 0;
  virtual Tensor embed(const SubGraph& graph) const = 0;
  virtual Tensor interaction_update(int layer, const Tensor& h, const SubGraph& graph,
                                    const EdgeBasis& basis) const = 0;
  /// [N×H] -> [N]
  virtual Tensor output_scalar(const Tensor& h) const = 0;
  /// [N×H] -> [N×H/2]
  virtual Tensor output_hidden(const Tensor& h) const = 0;

  Tensor interact(int layer, const Tensor& h, const SubGraph& graph, const EdgeBasis& basis) const;
  /// embed + all interaction layers.
  Tensor encode(const SubGraph& graph) const;
};

/// Gaussian expansion exp(−γ(d − μ_k)²) with μ_k evenly spaced on [0, cutoff].
std::vector<double> rbf_expand(double distance, const BackboneConfig& config);

/// 0.5·(cos(πd/cutoff) + 1) inside the cutoff, 0 outside.
double cosine_envelope(double distance, double cutoff);

/// SchNet-style continuous-filter convolution backbone.
///
/// Parameters (prefix defaults to "backbone"):
///   {prefix}.embed.atom                     [100×H]
///   {prefix}.embed.tag                      [3×H]     (use_tag_embedding)
///   {prefix}.block{l}.w1.weight             [H×H]
///   {prefix}.block{l}.filter.0.{weight,bias} [K×H],[H]
///   {prefix}.block{l}.filter.1.{weight,bias} [H×H],[H]
///   {prefix}.block{l}.w3.{weight,bias}      [H×H],[H]
///   {prefix}.block{l}.w2.{weight,bias}      [H×H],[H]
///   {prefix}.out.0.{weight,bias}            [H×H/2],[H/2]
///   {prefix}.out.1.{weight,bias}            [H/2×1],[1] scalar mode; [H/2×H/2],[H/2] hidden mode
///
/// Interaction: m_i = Σ_{j→i} (h_j W1) ⊙ filter(rbf(d_ji))·envelope(d_ji),
/// update = ssp(m W3 + b3) W2 + b2.
class SchNetBackbone final : public Backbone {
 public:
  /// Registers freshly initialized parameters into `params`.
  static void register_parameters(ParameterSet& params, const std::string& prefix,
                                  const BackboneConfig& config, OutputMode mode, Rng& rng);

  /// Binds to parameters already present in `params` (which must outlive this).
  SchNetBackbone(const ParameterSet& params, std::string prefix, BackboneConfig config, OutputMode mode);

  int hidden_dim() const override { return config_.hidden_dim; }
  int num_layers() const override { return config_.num_interactions; }
  const BackboneConfig& config() const { return config_; }
  OutputMode output_mode() const { return mode_; }

  EdgeBasis edge_basis(const SubGraph& graph) const override;
  Tensor embed(const SubGraph& graph) const override;
  Tensor interaction_update(int layer, const Tensor& h, const SubGraph& graph,
                            const EdgeBasis& basis) const override;
  Tensor output_scalar(const Tensor& h) const override;
  Tensor output_hidden(const Tensor& h) const override;

 private:
  const Tensor& param(const std::string& suffix) const;

  const ParameterSet* params_;
  std::string prefix_;
  BackboneConfig config_;
  OutputMode mode_;
};

}  // namespace dgnn
