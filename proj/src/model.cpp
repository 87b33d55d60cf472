#include "dgnn/model.hpp"

#include <algorithm>
#include <cmath>

#include "dgnn/error.hpp"
#include "dgnn/ops.hpp"

namespace dgnn {

std::string_view to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::Connected: return "Connected";
    case VariantKind::DisconnectedBaseline: return "DisconnectedBaseline";
    case VariantKind::IndependentPooling: return "IndependentPooling";
    case VariantKind::IndependentBackbones: return "IndependentBackbones";
    case VariantKind::Attention: return "Attention";
  }
  return "?";
}

VariantKind parse_variant(std::string_view name) {
  for (auto k : kAllVariants)
    if (to_string(k) == name) return k;
  throw ValidationError("unknown variant '" + std::string(name) + "'");
}

bool uses_pooling_head(VariantKind kind) {
  return kind == VariantKind::IndependentPooling || kind == VariantKind::IndependentBackbones ||
         kind == VariantKind::Attention;
}

bool uses_second_backbone(VariantKind kind) {
  return kind == VariantKind::IndependentBackbones || kind == VariantKind::Attention;
}

ModelSpec ModelSpec::defaults(VariantKind variant, const BackboneConfig& backbone) {
  ModelSpec s;
  s.variant = variant;
  s.backbone = backbone;
  if (uses_second_backbone(variant)) s.second_backbone = backbone;
  if (uses_pooling_head(variant)) {
    const int h = backbone.hidden_dim;
    s.head_mlp_dims = {2 * (h / 2), h, 1};
  }
  return s;
}

void ModelSpec::validate() const {
  backbone.validate();
  if (uses_second_backbone(variant) != second_backbone.has_value()) {
    throw ValidationError(std::string("second_backbone must be present exactly for IndependentBackbones and "
                                      "Attention (variant ") + std::string(to_string(variant)) + ")");
  }
  if (second_backbone) {
    second_backbone->validate();
    if (second_backbone->hidden_dim != backbone.hidden_dim) {
      throw ValidationError("second_backbone hidden_dim must equal backbone hidden_dim");
    }
    if (second_backbone->cutoff != backbone.cutoff) {
      throw ValidationError("second_backbone cutoff must equal backbone cutoff");
    }
    if (variant == VariantKind::Attention && second_backbone->num_interactions != backbone.num_interactions) {
      throw ValidationError("Attention needs equal num_interactions in both backbones");
    }
  }
  if (uses_pooling_head(variant)) {
    const int half = backbone.hidden_dim / 2;
    if (head_mlp_dims.size() < 2 || head_mlp_dims.front() != 2 * half || head_mlp_dims.back() != 1) {
      throw ValidationError("head_mlp_dims must start at " + std::to_string(2 * half) + " and end at 1");
    }
    for (int d : head_mlp_dims)
      if (d < 1) throw ValidationError("head_mlp_dims entries must be positive");
  }
  if (variant == VariantKind::Attention) {
    if (attention.edge_rbf_count < 2) throw ValidationError("attention edge_rbf_count must be >= 2");
    if (attention.heads < 1 || backbone.hidden_dim % attention.heads != 0) {
      throw ValidationError("attention heads must divide hidden_dim");
    }
  }
  if (graph.max_neighbors < 1) throw ValidationError("max_neighbors must be >= 1");
}

// ---------------------------------------------------------------------------
// Graph preparation

namespace {

SubGraph induced_subgraph(const AtomicSystem& sys, const GraphTopology& topo, const std::vector<int>& nodes) {
  std::vector<int> local(sys.size(), -1);
  SubGraph g;
  g.num_nodes = nodes.size();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto i = static_cast<std::size_t>(nodes[k]);
    local[i] = static_cast<int>(k);
    g.atomic_numbers.push_back(sys.atomic_numbers[i]);
    g.tags.push_back(sys.tags[i]);
  }
  g.graph_index.assign(g.num_nodes, 0);
  for (std::size_t e = 0; e < topo.num_edges(); ++e) {
    const int s = local[static_cast<std::size_t>(topo.edge_src[e])];
    const int d = local[static_cast<std::size_t>(topo.edge_dst[e])];
    if (s < 0 || d < 0) continue;
    g.edge_src.push_back(s);
    g.edge_dst.push_back(d);
    g.edge_distance.push_back(topo.edge_distance[e]);
  }
  return g;
}

SubGraph whole_graph(const AtomicSystem& sys, const GraphTopology& topo) {
  SubGraph g;
  g.num_nodes = sys.size();
  g.atomic_numbers = sys.atomic_numbers;
  g.tags = sys.tags;
  g.graph_index.assign(g.num_nodes, 0);
  g.edge_src = topo.edge_src;
  g.edge_dst = topo.edge_dst;
  g.edge_distance = topo.edge_distance;
  return g;
}

void append(SubGraph& into, const SubGraph& part, int graph) {
  const int offset = static_cast<int>(into.num_nodes);
  into.num_nodes += part.num_nodes;
  into.atomic_numbers.insert(into.atomic_numbers.end(), part.atomic_numbers.begin(), part.atomic_numbers.end());
  into.tags.insert(into.tags.end(), part.tags.begin(), part.tags.end());
  into.graph_index.insert(into.graph_index.end(), part.num_nodes, graph);
  for (std::size_t e = 0; e < part.num_edges(); ++e) {
    into.edge_src.push_back(part.edge_src[e] + offset);
    into.edge_dst.push_back(part.edge_dst[e] + offset);
  }
  into.edge_distance.insert(into.edge_distance.end(), part.edge_distance.begin(), part.edge_distance.end());
}

}  // namespace

PreparedSystem prepare_system(const ModelSpec& spec, const AtomicSystem& input) {
  const VariantKind v = spec.variant;
  // Scalar heads also accept single-component systems.
  input.validate(/*require_components=*/uses_pooling_head(v));
  const AtomicSystem sys = spec.graph.remove_tag0 ? remove_tag0_atoms(input) : input;
  const GraphTopology full = build_radius_graph(sys, {spec.backbone.cutoff, spec.graph.max_neighbors});

  PreparedSystem p;
  if (v == VariantKind::Connected) {
    p.whole = whole_graph(sys, full);
    return p;
  }
  const GraphTopology cut = disconnect_graph(full, sys.tags);
  if (v == VariantKind::DisconnectedBaseline) {
    p.whole = whole_graph(sys, cut);
    return p;
  }
  p.masks = component_masks(sys.tags);
  if (v == VariantKind::IndependentPooling) {
    p.whole = whole_graph(sys, cut);
    return p;
  }
  p.adsorbate = induced_subgraph(sys, cut, p.masks.adsorbate);
  p.catalyst = induced_subgraph(sys, cut, p.masks.catalyst);
  if (v == VariantKind::Attention) {
    const CrossEdgeSet raw = build_cross_attention_edges(sys, spec.graph.center_z_on_surface);
    std::vector<int> local(sys.size(), -1);
    const auto na = static_cast<int>(p.masks.adsorbate.size());
    for (std::size_t k = 0; k < p.masks.adsorbate.size(); ++k)
      local[static_cast<std::size_t>(p.masks.adsorbate[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < p.masks.catalyst.size(); ++k)
      local[static_cast<std::size_t>(p.masks.catalyst[k])] = na + static_cast<int>(k);
    double scale = 0.0;
    for (std::size_t e = 0; e < raw.size(); ++e) {
      p.cross.src.push_back(local[static_cast<std::size_t>(raw.src[e])]);
      p.cross.dst.push_back(local[static_cast<std::size_t>(raw.dst[e])]);
      p.cross.weight.push_back(raw.weight[e]);
      scale = std::max(scale, std::fabs(raw.weight[e]));
    }
    p.z_scale = std::max(scale, 1.0);
  }
  return p;
}

Batch collate(std::span<const PreparedSystem* const> systems) {
  Batch b;
  b.num_graphs = systems.size();
  std::size_t total_ads = 0;
  for (const auto* s : systems) total_ads += s->adsorbate.num_nodes;

  std::size_t ads_off = 0, cat_off = 0;
  for (std::size_t g = 0; g < systems.size(); ++g) {
    const PreparedSystem& s = *systems[g];
    const int gi = static_cast<int>(g);
    const int whole_off = static_cast<int>(b.whole.num_nodes);
    for (int r : s.masks.adsorbate) b.adsorbate_rows.push_back(r + whole_off);
    for (int r : s.masks.catalyst) b.catalyst_rows.push_back(r + whole_off);
    append(b.whole, s.whole, gi);
    append(b.adsorbate, s.adsorbate, gi);
    append(b.catalyst, s.catalyst, gi);

    const auto na = static_cast<int>(s.adsorbate.num_nodes);
    const auto remap = [&](int idx) {
      return idx < na ? static_cast<int>(ads_off) + idx
                      : static_cast<int>(total_ads + cat_off) + (idx - na);
    };
    for (std::size_t e = 0; e < s.cross.size(); ++e) {
      b.cross_src.push_back(remap(s.cross.src[e]));
      b.cross_dst.push_back(remap(s.cross.dst[e]));
      b.cross_weight.push_back(s.cross.weight[e]);
      b.cross_scale.push_back(s.z_scale);
    }
    ads_off += s.adsorbate.num_nodes;
    cat_off += s.catalyst.num_nodes;
  }
  return b;
}

std::vector<double> cross_edge_rbf(double weight, double z_scale, int count) {
  const double step = 2.0 * z_scale / static_cast<double>(count - 1);
  const double gamma = 1.0 / (step * step);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double diff = weight - (-z_scale + step * k);
    out[static_cast<std::size_t>(k)] = std::exp(-gamma * diff * diff);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameters

void register_model_parameters(ParameterSet& params, const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Rng root(seed);
  const OutputMode mode = uses_pooling_head(spec.variant) ? OutputMode::Hidden : OutputMode::Scalar;
  Rng r1 = root.fork(1);
  SchNetBackbone::register_parameters(params, "backbone", spec.backbone, mode, r1);
  if (spec.second_backbone) {
    Rng r2 = root.fork(2);
    SchNetBackbone::register_parameters(params, "second_backbone", *spec.second_backbone, mode, r2);
  }
  const auto h = static_cast<std::size_t>(spec.backbone.hidden_dim);
  if (spec.variant == VariantKind::Attention) {
    Rng r3 = root.fork(3);
    const auto k = static_cast<std::size_t>(spec.attention.edge_rbf_count);
    const auto heads = static_cast<std::size_t>(spec.attention.heads);
    const std::size_t d = h / heads;
    for (int l = 0; l < spec.backbone.num_interactions; ++l) {
      const std::string p = "attention.layer" + std::to_string(l);
      params.add_glorot(p + ".w", h, h, r3);
      params.add_glorot(p + ".edge.weight", k, h, r3);
      params.add_constant(p + ".edge.bias", Shape{h}, 0.0);
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::string q = p + ".head" + std::to_string(hd);
        params.add_glorot(q + ".src", d, 1, r3);
        params.add_glorot(q + ".dst", d, 1, r3);
        params.add_glorot(q + ".edge", d, 1, r3);
      }
      params.add_glorot(p + ".value", h, h, r3);
      params.add_constant(p + ".norm_ads.gamma", Shape{h}, 1.0);
      params.add_constant(p + ".norm_ads.beta", Shape{h}, 0.0);
      params.add_constant(p + ".norm_cat.gamma", Shape{h}, 1.0);
      params.add_constant(p + ".norm_cat.beta", Shape{h}, 0.0);
    }
  }
  if (uses_pooling_head(spec.variant)) {
    Rng r4 = root.fork(4);
    for (std::size_t i = 0; i + 1 < spec.head_mlp_dims.size(); ++i) {
      const auto in = static_cast<std::size_t>(spec.head_mlp_dims[i]);
      const auto out = static_cast<std::size_t>(spec.head_mlp_dims[i + 1]);
      params.add_glorot("head." + std::to_string(i) + ".weight", in, out, r4);
      params.add_constant("head." + std::to_string(i) + ".bias", Shape{out}, 0.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  register_model_parameters(params_, spec_, seed);
  bind();
}

Model::Model(ModelSpec spec, ParameterSet params, Normalizer normalizer)
    : spec_(std::move(spec)), normalizer_(normalizer) {
  ParameterSet expected;
  register_model_parameters(expected, spec_, 0);
  if (params.size() != expected.size()) {
    throw ValidationError("parameter count " + std::to_string(params.size()) + " does not match the " +
                          std::to_string(expected.size()) + " required by the model spec");
  }
  for (const auto& [name, t] : expected.entries()) {
    if (!params.contains(name)) throw ValidationError("missing parameter '" + name + "'");
    if (params.get(name).shape() != t.shape()) {
      throw ValidationError("parameter '" + name + "' has shape " + shape_str(params.get(name).shape()) +
                            ", expected " + shape_str(t.shape()));
    }
  }
  // Keep the canonical registration order.
  for (const auto& [name, _] : expected.entries()) params_.add(name, params.get(name));
  if (!(normalizer_.std > 0.0) || !std::isfinite(normalizer_.mean)) {
    throw ValidationError("normalizer std must be positive and mean finite");
  }
  bind();
}

Model::Model(const Model& other)
    : spec_(other.spec_), params_(other.params_.clone()), normalizer_(other.normalizer_) {
  bind();
}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    spec_ = other.spec_;
    params_ = other.params_.clone();
    normalizer_ = other.normalizer_;
    bind();
  }
  return *this;
}

Model::Model(Model&& other) noexcept
    : spec_(std::move(other.spec_)), params_(std::move(other.params_)), normalizer_(other.normalizer_) {
  bind();
}

Model& Model::operator=(Model&& other) noexcept {
  spec_ = std::move(other.spec_);
  params_ = std::move(other.params_);
  normalizer_ = other.normalizer_;
  bind();
  return *this;
}

Model::~Model() = default;

void Model::bind() {
  const OutputMode mode = uses_pooling_head(spec_.variant) ? OutputMode::Hidden : OutputMode::Scalar;
  backbone_ = std::make_unique<SchNetBackbone>(params_, "backbone", spec_.backbone, mode);
  second_.reset();
  if (spec_.second_backbone) {
    second_ = std::make_unique<SchNetBackbone>(params_, "second_backbone", *spec_.second_backbone, mode);
  }
}

const Backbone& Model::second_backbone() const {
  if (!second_) throw Error("variant " + std::string(to_string(spec_.variant)) + " has no second backbone");
  return *second_;
}

AttentionLayerParams Model::attention_layer_params(int layer) const {
  const std::string p = "attention.layer" + std::to_string(layer);
  AttentionLayerParams a;
  a.w = params_.get(p + ".w");
  a.edge_w = params_.get(p + ".edge.weight");
  a.edge_b = params_.get(p + ".edge.bias");
  for (int hd = 0; hd < spec_.attention.heads; ++hd) {
    const std::string q = p + ".head" + std::to_string(hd);
    a.att_src.push_back(params_.get(q + ".src"));
    a.att_dst.push_back(params_.get(q + ".dst"));
    a.att_edge.push_back(params_.get(q + ".edge"));
  }
  a.value = params_.get(p + ".value");
  a.norm_ads_gamma = params_.get(p + ".norm_ads.gamma");
  a.norm_ads_beta = params_.get(p + ".norm_ads.beta");
  a.norm_cat_gamma = params_.get(p + ".norm_cat.gamma");
  a.norm_cat_beta = params_.get(p + ".norm_cat.beta");
  return a;
}

Tensor Model::head(const Tensor& pooled) const {
  Tensor x = pooled;
  const std::size_t layers = spec_.head_mlp_dims.size() - 1;
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string n = "head." + std::to_string(i);
    x = ops::linear(x, params_.get(n + ".weight"), params_.get(n + ".bias"));
    if (i + 1 < layers) x = ops::shifted_softplus(x);
  }
  return ops::reshape(x, Shape{x.rows()});
}

namespace {

Tensor pool(const Tensor& rows, std::span<const int> graph_index, std::size_t num_graphs) {
  return ops::scatter_add(rows, graph_index, num_graphs);
}

}  // namespace

Tensor Model::node_energies(const Batch& batch) const {
  if (uses_pooling_head(spec_.variant)) throw Error("node energies exist only for scalar heads");
  return backbone_->output_scalar(backbone_->encode(batch.whole));
}

Tensor Model::forward_scalar(const Batch& batch) const {
  const Tensor s = node_energies(batch);
  const Tensor pooled = pool(ops::reshape(s, Shape{s.numel(), 1}), batch.whole.graph_index, batch.num_graphs);
  return ops::reshape(pooled, Shape{batch.num_graphs});
}

Tensor Model::forward_pooling(const Batch& batch) const {
  const Tensor hidden = backbone_->output_hidden(backbone_->encode(batch.whole));
  std::vector<int> ads_graph, cat_graph;
  for (int r : batch.adsorbate_rows) ads_graph.push_back(batch.whole.graph_index[static_cast<std::size_t>(r)]);
  for (int r : batch.catalyst_rows) cat_graph.push_back(batch.whole.graph_index[static_cast<std::size_t>(r)]);
  const Tensor ads = pool(ops::gather_rows(hidden, batch.adsorbate_rows), ads_graph, batch.num_graphs);
  const Tensor cat = pool(ops::gather_rows(hidden, batch.catalyst_rows), cat_graph, batch.num_graphs);
  return head(ops::concat_cols(ads, cat));
}

Tensor Model::forward_independent(const Batch& batch) const {
  const Tensor ha = backbone_->output_hidden(backbone_->encode(batch.adsorbate));
  const Tensor hc = second_->output_hidden(second_->encode(batch.catalyst));
  const Tensor ads = pool(ha, batch.adsorbate.graph_index, batch.num_graphs);
  const Tensor cat = pool(hc, batch.catalyst.graph_index, batch.num_graphs);
  return head(ops::concat_cols(ads, cat));
}

Tensor Model::forward_attention(const Batch& batch) const {
  if (batch.cross_src.empty()) throw ValidationError("attention head needs cross edges; batch has none");
  const EdgeBasis basis_a = backbone_->edge_basis(batch.adsorbate);
  const EdgeBasis basis_c = second_->edge_basis(batch.catalyst);
  Tensor ha = backbone_->embed(batch.adsorbate);
  Tensor hc = second_->embed(batch.catalyst);
  for (int l = 0; l < spec_.backbone.num_interactions; ++l) {
    const Tensor ua = backbone_->interaction_update(l, ha, batch.adsorbate, basis_a);
    const Tensor uc = second_->interaction_update(l, hc, batch.catalyst, basis_c);
    auto out = attention_inter_layer(ha, hc, ua, uc, batch, attention_layer_params(l), spec_.attention);
    ha = std::move(out.adsorbate);
    hc = std::move(out.catalyst);
  }
  const Tensor ads = pool(backbone_->output_hidden(ha), batch.adsorbate.graph_index, batch.num_graphs);
  const Tensor cat = pool(second_->output_hidden(hc), batch.catalyst.graph_index, batch.num_graphs);
  return head(ops::concat_cols(ads, cat));
}

Tensor Model::forward(const Batch& batch) const {
  switch (spec_.variant) {
    case VariantKind::Connected:
    case VariantKind::DisconnectedBaseline: return forward_scalar(batch);
    case VariantKind::IndependentPooling: return forward_pooling(batch);
    case VariantKind::IndependentBackbones: return forward_independent(batch);
    case VariantKind::Attention: return forward_attention(batch);
  }
  throw Error("unreachable variant");
}

double Model::predict(const AtomicSystem& system) const {
  const PreparedSystem p = prepare_system(spec_, system);
  const PreparedSystem* ptr = &p;
  const Tensor raw = forward(collate(std::span<const PreparedSystem* const>(&ptr, 1)));
  return normalizer_.mean + normalizer_.std * raw.item();
}

std::vector<double> Model::predict(std::span<const AtomicSystem> systems, std::size_t batch_size) const {
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  std::vector<double> out;
  out.reserve(systems.size());
  for (std::size_t start = 0; start < systems.size(); start += batch_size) {
    const std::size_t end = std::min(systems.size(), start + batch_size);
    std::vector<PreparedSystem> prepared;
    prepared.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) prepared.push_back(prepare_system(spec_, systems[i]));
    std::vector<const PreparedSystem*> ptrs;
    for (const auto& p : prepared) ptrs.push_back(&p);
    const Tensor raw = forward(collate(ptrs));
    for (double r : raw.data()) out.push_back(normalizer_.mean + normalizer_.std * r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attention inter-layer

AttentionLayerOutput attention_inter_layer(const Tensor& h_ads, const Tensor& h_cat, const Tensor& update_ads,
                                           const Tensor& update_cat, const Batch& batch,
                                           const AttentionLayerParams& p, const AttentionConfig& config) {
  if (batch.cross_src.empty()) throw ValidationError("attention layer: no cross edges");
  const std::size_t na = h_ads.rows(), nc = h_cat.rows(), n = na + nc;
  const std::size_t hdim = h_ads.cols();
  const auto heads = static_cast<std::size_t>(config.heads);
  const std::size_t d = hdim / heads;
  const std::size_t e = batch.cross_src.size();

  const Tensor hp = ops::concat_rows(update_ads, update_cat);
  const Tensor wh = ops::matmul(hp, p.w);

  std::vector<double> rbf;
  rbf.reserve(e * static_cast<std::size_t>(config.edge_rbf_count));
  for (std::size_t k = 0; k < e; ++k) {
    const auto row = cross_edge_rbf(batch.cross_weight[k], batch.cross_scale[k], config.edge_rbf_count);
    rbf.insert(rbf.end(), row.begin(), row.end());
  }
  const Tensor edge_feat = ops::linear(
      Tensor(Shape{e, static_cast<std::size_t>(config.edge_rbf_count)}, std::move(rbf)), p.edge_w, p.edge_b);

  Tensor aggregated;
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const Tensor whk = heads == 1 ? wh : ops::slice_cols(wh, hd * d, (hd + 1) * d);
    const Tensor ek = heads == 1 ? edge_feat : ops::slice_cols(edge_feat, hd * d, (hd + 1) * d);
    const Tensor s_src = ops::gather_rows(ops::matmul(whk, p.att_src[hd]), batch.cross_src);
    const Tensor s_dst = ops::gather_rows(ops::matmul(whk, p.att_dst[hd]), batch.cross_dst);
    const Tensor s_edge = ops::matmul(ek, p.att_edge[hd]);
    const Tensor score = ops::leaky_relu(ops::add(ops::add(s_src, s_dst), s_edge), config.leaky_slope);
    const Tensor alpha = ops::segment_softmax(ops::reshape(score, Shape{e}), batch.cross_dst);
    const Tensor msg = ops::scale_rows(ops::gather_rows(whk, batch.cross_src), alpha);
    const Tensor agg = ops::scatter_add(msg, batch.cross_dst, n);
    aggregated = hd == 0 ? agg : ops::concat_cols(aggregated, agg);
  }
  const Tensor combined = ops::add(hp, ops::matmul(aggregated, p.value));
  const Tensor ads = ops::add(ops::slice_rows(combined, 0, na), h_ads);
  const Tensor cat = ops::add(ops::slice_rows(combined, na, n), h_cat);
  return {ops::layer_norm(ads, p.norm_ads_gamma, p.norm_ads_beta),
          ops::layer_norm(cat, p.norm_cat_gamma, p.norm_cat_beta)};
}

// ---------------------------------------------------------------------------

namespace {

double predict_checked(const Model& model, const AtomicSystem& system, VariantKind expected) {
  if (model.spec().variant != expected) {
    throw ValidationError("model variant is " + std::string(to_string(model.spec().variant)) + ", expected " +
                          std::string(to_string(expected)));
  }
  return model.predict(system);
}

}  // namespace

double predict_connected(const Model& m, const AtomicSystem& s) {
  return predict_checked(m, s, VariantKind::Connected);
}
double predict_disconnected_baseline(const Model& m, const AtomicSystem& s) {
  return predict_checked(m, s, VariantKind::DisconnectedBaseline);
}
double predict_independent_pooling(const Model& m, const AtomicSystem& s) {
  return predict_checked(m, s, VariantKind::IndependentPooling);
}
double predict_independent_backbones(const Model& m, const AtomicSystem& s) {
  return predict_checked(m, s, VariantKind::IndependentBackbones);
}
double predict_attention(const Model& m, const AtomicSystem& s) {
  return predict_checked(m, s, VariantKind::Attention);
}

}  // namespace dgnn
