#include "dgnn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <numbers>
#include <map>
#include <set>
#include <tuple>

#include "dgnn/dataset.hpp"
#include "dgnn/error.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/harness.hpp"
#include "dgnn/model.hpp"
#include "dgnn/ops.hpp"

namespace dgnn {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

// ---------------------------------------------------------------------------
// Fixtures

Tensor random_tensor(Rng& rng, Shape shape, bool requires_grad = true) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

AtomicSystem random_adslab(Rng& rng, int n_ads, int n_cat) {
  AtomicSystem s;
  s.id = "verify";
  constexpr int metals[] = {26, 28, 29, 46, 78};
  constexpr int light[] = {1, 6, 7, 8};
  for (int i = 0; i < n_cat; ++i) {
    const double z = rng.uniform(0.0, 3.0);
    s.atomic_numbers.push_back(metals[rng.below(5)]);
    s.positions.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), z});
    s.tags.push_back(i < 2 ? i % 2 : (z > 1.5 ? kSurface : kSubsurface));
  }
  for (int i = 0; i < n_ads; ++i) {
    s.atomic_numbers.push_back(light[rng.below(4)]);
    s.positions.push_back({rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0), rng.uniform(4.5, 6.5)});
    s.tags.push_back(kAdsorbate);
  }
  return s;
}

Mat3 random_rotation(Rng& rng) {
  const double tau = 2.0 * std::numbers::pi;
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  const double x = a * std::sin(tau * u2), y = a * std::cos(tau * u2);
  const double z = b * std::sin(tau * u3), w = b * std::cos(tau * u3);
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

Vec3 transform(const Mat3& r, const Vec3& p, const Vec3& t) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + t[i];
  return out;
}

AtomicSystem permuted(const AtomicSystem& s, Rng& rng) {
  std::vector<std::size_t> perm(s.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(perm);
  AtomicSystem out;
  out.id = s.id;
  for (std::size_t i : perm) {
    out.atomic_numbers.push_back(s.atomic_numbers[i]);
    out.positions.push_back(s.positions[i]);
    out.tags.push_back(s.tags[i]);
  }
  return out;
}

AtomicSystem component(const AtomicSystem& s, bool adsorbate) {
  AtomicSystem out;
  out.id = s.id;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_adsorbate(s.tags[i]) == adsorbate) {
      out.atomic_numbers.push_back(s.atomic_numbers[i]);
      out.positions.push_back(s.positions[i]);
      out.tags.push_back(s.tags[i]);
    }
  return out;
}

ModelSpec small_spec(VariantKind v) {
  BackboneConfig b;
  b.hidden_dim = 8;
  b.num_interactions = 2;
  b.rbf_count = 6;
  b.cutoff = 4.0;
  ModelSpec s = ModelSpec::defaults(v, b);
  s.attention.edge_rbf_count = 6;
  return s;
}

Model random_model(VariantKind v, std::uint64_t seed) {
  Model m(small_spec(v), seed);
  Rng rng = Rng(seed).fork(99);
  for (auto& [name, t] : m.parameters().entries()) {
    if (name.ends_with(".bias") || name.ends_with(".beta"))
      for (auto& x : t.mutable_data()) x = rng.uniform(-0.3, 0.3);
    if (name.ends_with(".gamma"))
      for (auto& x : t.mutable_data()) x = rng.uniform(0.5, 1.5);
  }
  return m;
}

double fd_error(const std::function<Tensor()>& loss, std::vector<Tensor> leaves, double eps = 1e-5) {
  for (auto& l : leaves) l.zero_grad();
  loss().backward();
  double worst = 0.0;
  for (auto& leaf : leaves) {
    std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
    if (analytic.empty()) analytic.assign(leaf.numel(), 0.0);
    auto x = leaf.mutable_data();
    double max_diff = 0.0, max_num = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + eps;
      const double up = loss().item();
      x[i] = keep - eps;
      const double down = loss().item();
      x[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      max_diff = std::max(max_diff, std::fabs(numeric - analytic[i]));
      max_num = std::max(max_num, std::fabs(numeric));
    }
    worst = std::max(worst, max_diff / std::max(max_num, 1e-6));
  }
  return worst;
}

class Suite {
 public:
  Suite(VerifyReport& report, std::string scope) : report_(report), scope_(std::move(scope)) {}

  void check(const std::string& name, double value, double tolerance, std::string detail = {}) {
    report_.checks.push_back({scope_, name, std::isfinite(value) && value <= tolerance, value, tolerance,
                              std::move(detail)});
  }

  /// Runs `body`; an exception becomes a failed check with its message.
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      report_.checks.push_back({scope_, name, false, INFINITY, 0.0, std::string("threw: ") + e.what()});
    }
  }

 private:
  VerifyReport& report_;
  std::string scope_;
};

// ---------------------------------------------------------------------------
// tensor-autodiff

void verify_tensor(Suite& s, Rng& rng) {
  s.guarded("op gradients", [&] {
    double worst = 0.0;
    Tensor a = random_tensor(rng, {4, 3}), b = random_tensor(rng, {3, 5}), w = random_tensor(rng, {4, 5}, false);
    worst = std::max(worst, fd_error([&] { return ops::sum(ops::mul(ops::matmul(a, b), w)); }, {a, b}));
    Tensor x = random_tensor(rng, {5, 4}), g = random_tensor(rng, {4}), bt = random_tensor(rng, {4});
    const Tensor wx = random_tensor(rng, {5, 4}, false);
    worst = std::max(worst, fd_error([&] { return ops::sum(ops::mul(ops::layer_norm(x, g, bt), wx)); }, {x, g, bt}));
    worst = std::max(worst, fd_error([&] { return ops::sum(ops::mul(ops::shifted_softplus(x), wx)); }, {x}));
    const std::vector<int> idx{0, 2, 2, 1, 0};
    worst = std::max(worst, fd_error([&] {
      return ops::sum(ops::mul(ops::gather_rows(ops::scatter_add(x, idx, 3), idx), wx));
    }, {x}));
    Tensor logits = random_tensor(rng, {6});
    const Tensor lw = random_tensor(rng, {6}, false);
    const std::vector<int> seg{0, 0, 1, 2, 2, 2};
    worst = std::max(worst, fd_error([&] { return ops::sum(ops::mul(ops::segment_softmax(logits, seg), lw)); }, {logits}));
    s.check("finite-difference gradients of matmul, layer_norm, shifted_softplus, scatter/gather, segment_softmax",
            worst, 1e-4, "max rel. err");
  });
  s.guarded("scatter_add loop oracle", [&] {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + rng.below(12), out = 1 + rng.below(5), w = 1 + rng.below(4);
      const Tensor v = random_tensor(rng, {n, w}, false);
      std::vector<int> index(n);
      for (auto& i : index) i = static_cast<int>(rng.below(out));
      const Tensor got = ops::scatter_add(v, index, out);
      std::vector<double> want(out * w, 0.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) want[static_cast<std::size_t>(index[r]) * w + c] += v.at(r, c);
      for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::fabs(got.data()[i] - want[i]));
    }
    s.check("scatter_add equals a per-row loop", worst, 0.0, "max abs diff");
  });
  s.guarded("segment_softmax normalization", [&] {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + rng.below(20);
      std::vector<int> seg(n);
      for (auto& x : seg) x = static_cast<int>(rng.below(4));
      std::vector<double> l(n);
      for (auto& x : l) x = rng.uniform(-30, 30);
      const Tensor p = ops::segment_softmax(Tensor::vector(l), seg);
      std::map<int, double> sums;
      for (std::size_t i = 0; i < n; ++i) sums[seg[i]] += p.data()[i];
      for (const auto& [_, v] : sums) worst = std::max(worst, std::fabs(v - 1.0));
    }
    s.check("segment_softmax sums to one per segment", worst, 1e-12, "max |sum - 1|");
  });
}

// ---------------------------------------------------------------------------
// atomic-graph

void verify_graph(Suite& s, Rng& rng, bool inject) {
  s.guarded("radius graph brute force", [&] {
    double mismatches = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const AtomicSystem sys = random_adslab(rng, 3, 8);
      const double cutoff = rng.uniform(1.5, 4.0);
      const GraphTopology g = build_radius_graph(sys, {cutoff, 1000});
      std::set<std::pair<int, int>> got, want;
      for (std::size_t e = 0; e < g.num_edges(); ++e) got.insert({g.edge_src[e], g.edge_dst[e]});
      for (std::size_t i = 0; i < sys.size(); ++i)
        for (std::size_t j = 0; j < sys.size(); ++j) {
          if (i == j) continue;
          const auto& a = sys.positions[i];
          const auto& b = sys.positions[j];
          const double d = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
          if (d <= cutoff) want.insert({static_cast<int>(j), static_cast<int>(i)});
        }
      mismatches += static_cast<double>(got.size() + want.size()) -
                     2.0 * static_cast<double>(std::count_if(got.begin(), got.end(),
                                                             [&](const auto& e) { return want.count(e) > 0; }));
    }
    s.check("radius graph equals the O(n^2) brute-force edge set", mismatches, 0.0, "mismatched edges");
  });
  s.guarded("disconnection", [&] {
    double cross = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const AtomicSystem sys = random_adslab(rng, 3, 8);
      GraphTopology g = disconnect_graph(build_radius_graph(sys, {6.0, 50}), sys.tags);
      if (inject && trial == 0) {
        const auto masks = component_masks(sys.tags);
        g.edge_src.push_back(masks.adsorbate[0]);
        g.edge_dst.push_back(masks.catalyst[0]);
        g.edge_distance.push_back(1.0);
        g.edge_vector.push_back({0, 0, 1});
      }
      for (std::size_t e = 0; e < g.num_edges(); ++e)
        if (is_adsorbate(sys.tags[static_cast<std::size_t>(g.edge_src[e])]) !=
            is_adsorbate(sys.tags[static_cast<std::size_t>(g.edge_dst[e])]))
          ++cross;
    }
    s.check("disconnection: no adsorbate-catalyst edges remain", cross, 0.0,
            inject ? "cross edges (one injected as a negative control)" : "cross edges");
  });
  s.guarded("cross-edge antisymmetry", [&] {
    double bad = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const AtomicSystem sys = random_adslab(rng, 3, 8);
      const CrossEdgeSet c = build_cross_attention_edges(sys);
      if (c.size() % 2 != 0) ++bad;
      for (std::size_t e = 0; e + 1 < c.size(); e += 2) {
        if (c.src[e] != c.dst[e + 1] || c.dst[e] != c.src[e + 1] || c.weight[e] != -c.weight[e + 1]) ++bad;
        if (c.weight[e] != sys.positions[static_cast<std::size_t>(c.src[e])][2]) ++bad;
      }
    }
    s.check("cross edges come in (z, -z) pairs", bad, 0.0, "violations");
  });
}

// ---------------------------------------------------------------------------
// backbone

void verify_backbone(Suite& s, Rng& rng, std::uint64_t seed) {
  s.guarded("rbf formula", [&] {
    BackboneConfig c;
    const double mu = c.cutoff / (c.rbf_count - 1) * 3;
    s.check("rbf component at mu + 0.1 equals exp(-0.1) for gamma = 10",
            std::fabs(rbf_expand(mu + 0.1, c)[3] - std::exp(-0.1)), 1e-14, "abs err");
  });
  const Model m = random_model(VariantKind::Connected, seed);
  const auto energy = [&](const AtomicSystem& sys) { return m.predict(sys); };
  s.guarded("rigid motion", [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const AtomicSystem sys = random_adslab(rng, 3, 8);
      AtomicSystem moved = sys;
      const Mat3 r = random_rotation(rng);
      const Vec3 shift{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      for (auto& p : moved.positions) p = transform(r, p, shift);
      worst = std::max(worst, std::fabs(energy(moved) - energy(sys)));
    }
    s.check("energy invariant under global rotation + translation", worst, 1e-9, "max abs diff, eV");
  });
  s.guarded("permutation", [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const AtomicSystem sys = random_adslab(rng, 3, 8);
      worst = std::max(worst, std::fabs(energy(permuted(sys, rng)) - energy(sys)));
    }
    s.check("energy invariant under atom permutation", worst, 1e-10, "max abs diff, eV");
  });
  s.guarded("gradient", [&] {
    Model g = random_model(VariantKind::Connected, seed + 1);
    double worst = 0.0;
    for (const auto& [name, e] : gradient_check(g, {random_adslab(rng, 2, 5)})) worst = std::max(worst, e);
    s.check("backbone parameter gradients match central differences", worst, 1e-4, "max rel. err");
  });
}

// ---------------------------------------------------------------------------
// variants

void verify_variants(Suite& s, Rng& rng, std::uint64_t seed) {
  for (VariantKind v : kAllVariants) {
    const std::string name(to_string(v));
    const Model m = random_model(v, seed);
    s.guarded(name + " invariances", [&] {
      double perm = 0.0, planar = 0.0, ads = 0.0, rigid = 0.0;
      for (int t = 0; t < 5; ++t) {
        const AtomicSystem sys = random_adslab(rng, 3, 8);
        const double e0 = m.predict(sys);
        perm = std::max(perm, std::fabs(m.predict(permuted(sys, rng)) - e0));
        const double angle = rng.uniform(0.0, 2 * std::numbers::pi);
        const Mat3 rz{{{std::cos(angle), -std::sin(angle), 0}, {std::sin(angle), std::cos(angle), 0}, {0, 0, 1}}};
        const Vec3 shift{rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0};
        AtomicSystem moved = sys;
        for (auto& p : moved.positions) p = transform(rz, p, shift);
        planar = std::max(planar, std::fabs(m.predict(moved) - e0));
        if (v == VariantKind::Connected) {
          const Mat3 r = random_rotation(rng);
          const Vec3 t3{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
          AtomicSystem any = sys;
          for (auto& p : any.positions) p = transform(r, p, t3);
          rigid = std::max(rigid, std::fabs(m.predict(any) - e0));
        } else {
          const Mat3 r = random_rotation(rng);
          const Vec3 t3{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 3)};
          AtomicSystem any = sys;
          Vec3 c{};
          int n = 0;
          for (std::size_t i = 0; i < sys.size(); ++i)
            if (is_adsorbate(sys.tags[i])) {
              for (int k = 0; k < 3; ++k) c[k] += sys.positions[i][k];
              ++n;
            }
          for (auto& x : c) x /= n;
          for (std::size_t i = 0; i < sys.size(); ++i)
            if (is_adsorbate(sys.tags[i])) {
              const Vec3 rel{sys.positions[i][0] - c[0], sys.positions[i][1] - c[1], sys.positions[i][2] - c[2]};
              any.positions[i] = transform(r, rel, {c[0] + t3[0], c[1] + t3[1], c[2] + t3[2]});
            }
          ads = std::max(ads, std::fabs(m.predict(any) - e0));
        }
      }
      s.check(name + ": permutation invariance", perm, 1e-10, "max abs diff, eV");
      s.check(name + ": z-rotation and x-y translation invariance", planar, 1e-9, "max abs diff, eV");
      if (v == VariantKind::Connected) s.check(name + ": global rigid-motion invariance", rigid, 1e-9, "max abs diff, eV");
      else s.check(name + ": adsorbate-only rigid-motion invariance", ads, 1e-9, "max abs diff, eV");
    });
    s.guarded(name + " gradient", [&] {
      Model g = random_model(v, seed + 7);
      double worst = 0.0;
      for (const auto& [_, e] : gradient_check(g, {random_adslab(rng, 3, 5)})) worst = std::max(worst, e);
      s.check(name + ": parameter gradients match central differences", worst, 1e-4, "max rel. err");
    });
  }
  s.guarded("decomposition", [&] {
    const Model m = random_model(VariantKind::DisconnectedBaseline, seed);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const AtomicSystem sys = random_adslab(rng, 3, 8);
      worst = std::max(worst, std::fabs(m.predict(sys) - m.predict(component(sys, true)) -
                                        m.predict(component(sys, false))));
    }
    s.check("DisconnectedBaseline equals the sum of its component predictions", worst, 1e-9, "max abs diff, eV");
  });
  s.guarded("attention zero value projection", [&] {
    Model m = random_model(VariantKind::Attention, seed);
    for (auto& x : m.parameters().get("attention.layer0.value").mutable_data()) x = 0.0;
    const AtomicSystem sys = random_adslab(rng, 3, 8);
    const PreparedSystem p = prepare_system(m.spec(), sys);
    const PreparedSystem* ptr = &p;
    const Batch b = collate(std::span<const PreparedSystem* const>(&ptr, 1));
    const Tensor ha = random_tensor(rng, {b.adsorbate.num_nodes, 8}, false);
    const Tensor hc = random_tensor(rng, {b.catalyst.num_nodes, 8}, false);
    const Tensor ua = random_tensor(rng, {b.adsorbate.num_nodes, 8}, false);
    const Tensor uc = random_tensor(rng, {b.catalyst.num_nodes, 8}, false);
    const auto lp = m.attention_layer_params(0);
    const auto out = attention_inter_layer(ha, hc, ua, uc, b, lp, m.spec().attention);
    const Tensor want_a = ops::layer_norm(ops::add(ua, ha), lp.norm_ads_gamma, lp.norm_ads_beta);
    const Tensor want_c = ops::layer_norm(ops::add(uc, hc), lp.norm_cat_gamma, lp.norm_cat_beta);
    double worst = 0.0;
    for (std::size_t i = 0; i < want_a.numel(); ++i) worst = std::max(worst, std::fabs(out.adsorbate.data()[i] - want_a.data()[i]));
    for (std::size_t i = 0; i < want_c.numel(); ++i) worst = std::max(worst, std::fabs(out.catalyst.data()[i] - want_c.data()[i]));
    s.check("attention with zero value projection reduces to Norm(F(h) + h)", worst, 1e-12, "max abs diff");
  });
}

// ---------------------------------------------------------------------------
// data-io

SyntheticConfig tiny_synthetic(std::uint64_t seed, InteractionMode mode, double noise) {
  SyntheticConfig c;
  c.seed = seed;
  c.n_train = 40;
  c.n_val_per_split = 8;
  c.interaction_mode = mode;
  c.noise_std = noise;
  return c;
}

void verify_data(Suite& s, std::uint64_t seed) {
  s.guarded("generator determinism", [&] {
    const auto c = tiny_synthetic(seed, InteractionMode::Binding, 0.05);
    s.check("same seed gives byte-identical datasets",
            format_dataset(generate_synthetic(c)) == format_dataset(generate_synthetic(c)) ? 0.0 : 1.0, 0.0);
  });
  s.guarded("round trip", [&] {
    const std::string text = format_dataset(generate_synthetic(tiny_synthetic(seed, InteractionMode::Binding, 0.05)));
    s.check("write -> read -> write is byte-identical", format_dataset(parse_dataset(text)) == text ? 0.0 : 1.0, 0.0);
  });
  s.guarded("separable targets", [&] {
    const auto c = tiny_synthetic(seed, InteractionMode::Separable, 0.0);
    double worst = 0.0;
    for (const auto& sys : generate_synthetic(c).systems) {
      const auto t = synthetic_terms(c, sys);
      worst = std::max(worst, std::fabs(*sys.target_energy - t.adsorbate_term - t.catalyst_term));
    }
    s.check("separable mode without noise: E - f - g == 0", worst, 0.0, "max abs, eV");
  });
  s.guarded("duplicate statistic", [&] {
    const auto make = [](std::string id, std::string ads, double target) {
      AtomicSystem a;
      a.id = std::move(id);
      a.atomic_numbers = {8, 29};
      a.positions = {{0, 0, 2}, {0, 0, 0}};
      a.tags = {kAdsorbate, kSurface};
      a.target_energy = target;
      a.metadata.adsorbate_id = std::move(ads);
      a.metadata.bulk_id = "b";
      a.metadata.cell_hash = "none";
      return a;
    };
    const Dataset unique{{make("a", "x", 1.0), make("b", "y", 1.0)}};
    const Dataset fixture{{make("a", "x", 1.0), make("b", "x", 2.0), make("c", "y", 1.0)}};
    const double err = std::fabs(duplicate_target_stats(unique).fraction_multi_target) +
                       std::fabs(duplicate_target_stats(fixture).fraction_multi_target - 2.0 / 3.0);
    s.check("duplicate-target fraction fixtures (0 and 2/3)", err, 1e-15, "abs err");
  });
}

// ---------------------------------------------------------------------------
// harness-cli

void verify_harness(Suite& s, std::uint64_t seed) {
  const Dataset data = generate_synthetic(tiny_synthetic(seed, InteractionMode::Binding, 0.05));
  TrainConfig cfg = TrainConfig::defaults(VariantKind::DisconnectedBaseline);
  cfg.model = small_spec(VariantKind::DisconnectedBaseline);
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.seed = seed;
  s.guarded("lr zero", [&] {
    cfg.optimizer.lr = 0.0;
    const TrainResult r = train(cfg, data);
    const Model fresh(cfg.model, cfg.seed);
    double diff = 0.0;
    for (const auto& [name, t] : fresh.parameters().entries()) {
      const auto got = r.checkpoint.model.parameters().get(name).data();
      for (std::size_t i = 0; i < got.size(); ++i) diff = std::max(diff, std::fabs(got[i] - t.data()[i]));
    }
    s.check("training with lr = 0 leaves parameters bit-identical", diff, 0.0, "max abs diff");
  });
  s.guarded("checkpoint and evaluation", [&] {
    cfg.optimizer.lr = 3e-3;
    const TrainResult r = train(cfg, data);
    const std::string text = format_checkpoint(r.checkpoint);
    const Checkpoint back = parse_checkpoint(text);
    s.check("checkpoint format -> parse -> format is byte-identical", format_checkpoint(back) == text ? 0.0 : 1.0, 0.0);
    const EvalReport report = evaluate(back.model, data);
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& p : report.predictions)
      if (p.split == "val_id") {
        total += std::fabs(p.pred - p.target);
        ++n;
      }
    const double recomputed = total / static_cast<double>(n);
    s.check("val_id MAE matches a recomputation over the prediction dump",
            std::fabs(report.mae_per_split.at("val_id").mae - recomputed), 1e-12, "abs diff, eV");
    s.check("reloaded checkpoint reproduces the logged val_id MAE",
            std::fabs(report.mae_per_split.at("val_id").mae - *r.checkpoint.val_id_mae), 1e-9, "abs diff, eV");
  });
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options) {
  const bool all = options.scope == "all";
  if (!all && std::find(std::begin(kVerifyScopes), std::end(kVerifyScopes), options.scope) == std::end(kVerifyScopes)) {
    throw ValidationError("unknown verify scope '" + options.scope + "'");
  }
  VerifyReport report;
  const auto want = [&](std::string_view scope) { return all || options.scope == scope; };
  const Rng root(options.seed);
  if (want("tensor-autodiff")) {
    Suite s(report, "tensor-autodiff");
    Rng rng = root.fork(1);
    verify_tensor(s, rng);
  }
  if (want("atomic-graph")) {
    Suite s(report, "atomic-graph");
    Rng rng = root.fork(2);
    verify_graph(s, rng, options.inject_cross_edge);
  }
  if (want("backbone")) {
    Suite s(report, "backbone");
    Rng rng = root.fork(3);
    verify_backbone(s, rng, options.seed);
  }
  if (want("variants")) {
    Suite s(report, "variants");
    Rng rng = root.fork(4);
    verify_variants(s, rng, options.seed);
  }
  if (want("data-io")) {
    Suite s(report, "data-io");
    verify_data(s, options.seed);
  }
  if (want("harness-cli")) {
    Suite s(report, "harness-cli");
    verify_harness(s, options.seed);
  }
  return report;
}

std::string format_verify_report(const VerifyReport& report) {
  std::string out;
  char line[512];
  std::size_t failed = 0;
  for (const auto& c : report.checks) {
    failed += c.passed ? 0 : 1;
    std::snprintf(line, sizeof(line), "[%s] %-15s %s: %.3g (tol %.3g%s%s)\n", c.passed ? "PASS" : "FAIL",
                  c.scope.c_str(), c.name.c_str(), c.value, c.tolerance, c.detail.empty() ? "" : ", ",
                  c.detail.c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%zu checks, %zu failed\n", report.checks.size(), failed);
  out += line;
  return out;
}

}  // namespace dgnn
