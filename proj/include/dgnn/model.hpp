#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgnn/backbone.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/params.hpp"
#include "dgnn/system.hpp"

namespace dgnn {

enum class VariantKind { Connected, DisconnectedBaseline, IndependentPooling, IndependentBackbones, Attention };

inline constexpr VariantKind kAllVariants[] = {VariantKind::Connected, VariantKind::DisconnectedBaseline,
                                               VariantKind::IndependentPooling,
                                               VariantKind::IndependentBackbones, VariantKind::Attention};

std::string_view to_string(VariantKind kind);
VariantKind parse_variant(std::string_view name);

/// Heads that pool each component separately and combine them with an MLP.
bool uses_pooling_head(VariantKind kind);
/// Heads with a second, independently parameterized backbone.
bool uses_second_backbone(VariantKind kind);

struct AttentionConfig {
  int edge_rbf_count = 16;  // K′
  int heads = 1;
  double leaky_slope = 0.2;
  bool operator==(const AttentionConfig&) const = default;
};

struct GraphConfig {
  int max_neighbors = 50;
  bool remove_tag0 = true;
  bool center_z_on_surface = false;
  bool operator==(const GraphConfig&) const = default;
};

struct ModelSpec {
  VariantKind variant = VariantKind::Connected;
  BackboneConfig backbone;
  std::optional<BackboneConfig> second_backbone;
  std::vector<int> head_mlp_dims;  // pooling heads: [2·(H/2), ..., 1]
  AttentionConfig attention;
  GraphConfig graph;

  /// Spec with defaults filled in for `variant`: second backbone copied from
  /// the first where needed, head [H, H, 1] for pooling heads.
  static ModelSpec defaults(VariantKind variant, const BackboneConfig& backbone = {});
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

/// Energies are modeled as mean + std·raw.
struct Normalizer {
  double mean = 0.0;
  double std = 1.0;
  bool operator==(const Normalizer&) const = default;
};

/// Graph construction results for one system, shaped for the spec's variant.
/// Node order within `adsorbate`/`catalyst` follows ascending original index.
struct PreparedSystem {
  SubGraph whole;      // Connected, DisconnectedBaseline, IndependentPooling
  SubGraph adsorbate;  // IndependentBackbones, Attention
  SubGraph catalyst;   // IndependentBackbones, Attention
  ComponentMasks masks;
  CrossEdgeSet cross;  // Attention only; indices over [adsorbate…, catalyst…]
  double z_scale = 1.0;  // max |z| over catalyst atoms, floored at 1 Å
};

PreparedSystem prepare_system(const ModelSpec& spec, const AtomicSystem& system);

struct Batch {
  std::size_t num_graphs = 0;
  SubGraph whole;
  SubGraph adsorbate;
  SubGraph catalyst;
  std::vector<int> adsorbate_rows;  // rows of `whole` by component
  std::vector<int> catalyst_rows;
  std::vector<int> cross_src;  // over concat(adsorbate, catalyst) nodes
  std::vector<int> cross_dst;
  std::vector<double> cross_weight;
  std::vector<double> cross_scale;  // per cross edge: its system's z_scale
};

Batch collate(std::span<const PreparedSystem* const> systems);

/// Gaussian expansion of signed cross-edge weights: K′ centers evenly spaced
/// on [−s, s] with γ = 1/Δ², Δ = 2s/(K′−1), where s is the system's z_scale.
std::vector<double> cross_edge_rbf(double weight, double z_scale, int count);

/// Parameters of one attention inter-layer, laid out for the dense oracle.
struct AttentionLayerParams {
  Tensor w;          // [H×H] shared node projection
  Tensor edge_w;     // [K′×H]
  Tensor edge_b;     // [H]
  std::vector<Tensor> att_src, att_dst, att_edge;  // per head, [H/heads × 1]
  Tensor value;      // [H×H]
  Tensor norm_ads_gamma, norm_ads_beta, norm_cat_gamma, norm_cat_beta;  // [H]
};

/// Everything below the backbones: embedding tables, heads and attention
/// blocks are all in one ParameterSet. The model owns its parameters.
class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);
  /// Adopts `params`; names and shapes must match what `spec` registers.
  Model(ModelSpec spec, ParameterSet params, Normalizer normalizer = {});
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;
  ~Model();

  const ModelSpec& spec() const { return spec_; }
  const ParameterSet& parameters() const { return params_; }
  ParameterSet& parameters() { return params_; }
  const Normalizer& normalizer() const { return normalizer_; }
  void set_normalizer(Normalizer n) { normalizer_ = n; }

  const Backbone& backbone() const { return *backbone_; }
  const Backbone& second_backbone() const;

  /// Raw (normalized-space) energies, one per graph: [B].
  Tensor forward(const Batch& batch) const;
  /// Per-node scalar contributions for scalar heads: [N] over batch.whole.
  Tensor node_energies(const Batch& batch) const;

  double predict(const AtomicSystem& system) const;
  std::vector<double> predict(std::span<const AtomicSystem> systems, std::size_t batch_size = 32) const;

  AttentionLayerParams attention_layer_params(int layer) const;

 private:
  void bind();
  Tensor forward_scalar(const Batch& batch) const;
  Tensor forward_pooling(const Batch& batch) const;
  Tensor forward_independent(const Batch& batch) const;
  Tensor forward_attention(const Batch& batch) const;
  Tensor head(const Tensor& pooled) const;

  ModelSpec spec_;
  ParameterSet params_;
  Normalizer normalizer_;
  std::unique_ptr<SchNetBackbone> backbone_;
  std::unique_ptr<SchNetBackbone> second_;
};

void register_model_parameters(ParameterSet& params, const ModelSpec& spec, std::uint64_t seed);

/// One inter-layer of the attention head. Runs both intra-updates F_ads, F_cat,
/// attends over the weighted cross edges and applies the residual norm.
struct AttentionLayerOutput {
  Tensor adsorbate;
  Tensor catalyst;
};
AttentionLayerOutput attention_inter_layer(const Tensor& h_ads, const Tensor& h_cat,
                                           const Tensor& update_ads, const Tensor& update_cat,
                                           const Batch& batch, const AttentionLayerParams& params,
                                           const AttentionConfig& config);

// Variant-specific entry points; each checks spec.variant. Energies in eV.
double predict_connected(const Model& model, const AtomicSystem& system);
double predict_disconnected_baseline(const Model& model, const AtomicSystem& system);
double predict_independent_pooling(const Model& model, const AtomicSystem& system);
double predict_independent_backbones(const Model& model, const AtomicSystem& system);
double predict_attention(const Model& model, const AtomicSystem& system);

}  // namespace dgnn
