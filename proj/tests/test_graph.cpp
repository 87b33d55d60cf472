#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "dgnn/error.hpp"
#include "dgnn/graph.hpp"
#include "test_support.hpp"

using namespace dgnn;

namespace {

AtomicSystem make_system(std::vector<Vec3> pos, std::vector<int> tags) {
  AtomicSystem s;
  s.id = "t";
  s.positions = std::move(pos);
  s.tags = std::move(tags);
  s.atomic_numbers.assign(s.positions.size(), 6);
  return s;
}

AtomicSystem random_system(Rng& rng, std::size_t n) {
  AtomicSystem s;
  s.id = "r";
  for (std::size_t i = 0; i < n; ++i) {
    s.positions.push_back({rng.uniform(0, 8), rng.uniform(0, 8), rng.uniform(0, 8)});
    s.atomic_numbers.push_back(1 + static_cast<int>(rng.below(30)));
    s.tags.push_back(static_cast<int>(rng.below(3)));
  }
  s.tags[0] = 2;
  s.tags[1] = 1;
  return s;
}

using EdgeKey = std::tuple<int, int>;

std::set<EdgeKey> edge_set(const GraphTopology& g) {
  std::set<EdgeKey> out;
  for (std::size_t e = 0; e < g.num_edges(); ++e) out.emplace(g.edge_src[e], g.edge_dst[e]);
  return out;
}

// O(N²) oracle without periodic images or caps.
std::set<EdgeKey> brute_force_edges(const AtomicSystem& s, double cutoff) {
  std::set<EdgeKey> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) d2 += std::pow(s.positions[i][k] - s.positions[j][k], 2);
      if (std::sqrt(d2) <= cutoff) out.emplace(static_cast<int>(j), static_cast<int>(i));
    }
  return out;
}

}  // namespace

TEST_CASE("build_radius_graph") {
  SUBCASE("two atoms inside the cutoff") {
    const auto g = build_radius_graph(make_system({{0, 0, 0}, {1, 0, 0}}, {1, 2}), {6.0, 50});
    CHECK(edge_set(g) == std::set<EdgeKey>{{0, 1}, {1, 0}});
    CHECK(g.edge_distance == std::vector<double>{1.0, 1.0});
  }
  SUBCASE("two atoms outside the cutoff") {
    const auto g = build_radius_graph(make_system({{0, 0, 0}, {7, 0, 0}}, {1, 2}), {6.0, 50});
    CHECK(g.num_edges() == 0);
  }
  SUBCASE("cubic cluster matches brute force") {
    std::vector<Vec3> pos;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z) pos.push_back({2.0 * x, 2.0 * y, 2.0 * z});
    const auto sys = make_system(pos, {0, 0, 0, 0, 1, 1, 2, 2});
    for (double cutoff : {2.0, 2.9, 3.5}) {
      CHECK(edge_set(build_radius_graph(sys, {cutoff, 50})) == brute_force_edges(sys, cutoff));
    }
    CHECK(build_radius_graph(sys, {2.0, 50}).num_edges() == 24);
  }
  SUBCASE("random systems match brute force and respect distance invariants") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const auto sys = random_system(rng, 5 + rng.below(20));
      const auto g = build_radius_graph(sys, {4.0, 1000});
      CHECK(edge_set(g) == brute_force_edges(sys, 4.0));
      for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& v = g.edge_vector[e];
        CHECK(std::fabs(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - g.edge_distance[e]) < 1e-9);
        CHECK(g.edge_src[e] != g.edge_dst[e]);
      }
      // symmetric before any cap
      for (const auto& [s, d] : edge_set(g)) CHECK(edge_set(g).count({d, s}) == 1);
    }
  }
  SUBCASE("neighbor cap keeps the nearest, ties to lower source") {
    // Node 0 at origin; nodes 1..4 on a unit circle around it (all tied), node 5 farther.
    const auto sys = make_system({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 0, 1.5}},
                                 {1, 1, 1, 1, 1, 2});
    const auto g = build_radius_graph(sys, {6.0, 2});
    std::vector<int> into_zero;
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      if (g.edge_dst[e] == 0) into_zero.push_back(g.edge_src[e]);
    CHECK(into_zero == std::vector<int>{1, 2});
  }
  SUBCASE("periodic cell finds image neighbors") {
    auto sys = make_system({{0.5, 5, 5}, {9.5, 5, 5}}, {1, 2});
    sys.cell = Mat3{{{10, 0, 0}, {0, 10, 0}, {0, 0, 10}}};
    const auto g = build_radius_graph(sys, {6.0, 50});
    // Minimum image is 1 Å apart; the direct 9 Å pair is outside the cutoff.
    CHECK(g.num_edges() == 2);
    CHECK(g.edge_distance[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("degenerate and too-thin cells are rejected") {
    auto sys = make_system({{0, 0, 0}, {1, 0, 0}}, {1, 2});
    sys.cell = Mat3{{{10, 0, 0}, {20, 0, 0}, {0, 0, 10}}};
    CHECK_THROWS_AS(build_radius_graph(sys, {6.0, 50}), ValidationError);
    sys.cell = Mat3{{{4, 0, 0}, {0, 10, 0}, {0, 0, 10}}};
    CHECK_THROWS_AS(build_radius_graph(sys, {6.0, 50}), ValidationError);
  }
  SUBCASE("input is not modified") {
    Rng rng(4);
    const auto sys = random_system(rng, 10);
    const auto copy = sys;
    build_radius_graph(sys, {5.0, 3});
    CHECK(sys == copy);
  }
}

TEST_CASE("disconnect_graph") {
  SUBCASE("single cross pair removed") {
    GraphTopology g;
    g.num_nodes = 2;
    g.edge_src = {0, 1};
    g.edge_dst = {1, 0};
    g.edge_distance = {1, 1};
    g.edge_vector = {{1, 0, 0}, {-1, 0, 0}};
    CHECK(disconnect_graph(g, {2, 1}).num_edges() == 0);
  }
  SUBCASE("one cross edge among three") {
    GraphTopology g;
    g.num_nodes = 4;
    g.edge_src = {0, 2, 1};
    g.edge_dst = {1, 3, 2};
    g.edge_distance = {1, 1, 1};
    g.edge_vector = {{1, 0, 0}, {1, 0, 0}, {1, 0, 0}};
    const auto out = disconnect_graph(g, {2, 2, 1, 1});
    CHECK(edge_set(out) == std::set<EdgeKey>{{0, 1}, {2, 3}});
  }
  SUBCASE("random graphs: removed edges are exactly the cross-component ones") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
      const auto sys = random_system(rng, 20);
      const auto g = build_radius_graph(sys, {5.0, 50});
      const auto out = disconnect_graph(g, sys.tags);
      std::set<EdgeKey> removed;
      for (const auto& e : edge_set(g))
        if (!edge_set(out).count(e)) removed.insert(e);
      std::set<EdgeKey> expected;
      for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const bool a = sys.tags[static_cast<std::size_t>(g.edge_src[e])] == 2;
        const bool b = sys.tags[static_cast<std::size_t>(g.edge_dst[e])] == 2;
        if (a != b) expected.emplace(g.edge_src[e], g.edge_dst[e]);
      }
      CHECK(removed == expected);
      CHECK(disconnect_graph(out, sys.tags) == out);  // idempotent

      // union-find: no component mixes adsorbate and catalyst
      std::vector<int> parent(sys.size());
      std::iota(parent.begin(), parent.end(), 0);
      const std::function<int(int)> find = [&](int x) {
        return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]);
      };
      for (std::size_t e = 0; e < out.num_edges(); ++e) parent[static_cast<std::size_t>(find(out.edge_src[e]))] = find(out.edge_dst[e]);
      std::map<int, std::set<bool>> sides;
      for (std::size_t i = 0; i < sys.size(); ++i) sides[find(static_cast<int>(i))].insert(sys.tags[i] == 2);
      for (const auto& [_, s] : sides) CHECK(s.size() == 1);
    }
  }
  SUBCASE("tag count mismatch") {
    GraphTopology g;
    g.num_nodes = 3;
    CHECK_THROWS_AS(disconnect_graph(g, {1, 2}), ValidationError);
  }
}

TEST_CASE("remove_tag0_atoms") {
  SUBCASE("drops tag 0") {
    auto sys = make_system({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {0, 1, 2});
    sys.metadata.bulk_id = "b";
    const auto out = remove_tag0_atoms(sys);
    CHECK(out.tags == std::vector<int>{1, 2});
    CHECK(out.positions[0] == Vec3{1, 0, 0});
    CHECK(out.metadata == sys.metadata);
  }
  SUBCASE("identity without tag 0") {
    const auto sys = make_system({{0, 0, 0}, {1, 0, 0}}, {1, 2});
    CHECK(remove_tag0_atoms(sys) == sys);
  }
  SUBCASE("30 atoms with 12 tag-0 atoms") {
    Rng rng(8);
    auto sys = random_system(rng, 30);
    std::vector<std::size_t> order(30);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t k = 0; k < 30; ++k) sys.tags[order[k]] = k < 12 ? 0 : (k < 20 ? 1 : 2);
    const auto out = remove_tag0_atoms(sys);
    CHECK(out.size() == 18);
    std::vector<Vec3> survivors;
    for (std::size_t i = 0; i < 30; ++i)
      if (sys.tags[i] != 0) survivors.push_back(sys.positions[i]);
    CHECK(out.positions == survivors);
  }
  SUBCASE("all tag 0 is an error") {
    CHECK_THROWS_AS(remove_tag0_atoms(make_system({{0, 0, 0}}, {0})), ValidationError);
  }
}

TEST_CASE("build_cross_attention_edges") {
  SUBCASE("one pair carries z and -z") {
    const auto c = build_cross_attention_edges(make_system({{0, 0, 3.2}, {1, 1, 5}}, {1, 2}));
    CHECK(c.src == std::vector<int>{0, 1});
    CHECK(c.dst == std::vector<int>{1, 0});
    CHECK(c.weight == std::vector<double>{3.2, -3.2});
  }
  SUBCASE("2 catalyst x 3 adsorbate") {
    const auto c = build_cross_attention_edges(
        make_system({{0, 0, 1}, {0, 0, 2}, {0, 0, 3}, {0, 0, 4}, {0, 0, 5}}, {0, 1, 2, 2, 2}));
    CHECK(c.size() == 12);
  }
  SUBCASE("antisymmetric pairs and translation behavior") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
      auto sys = random_system(rng, 12);
      const auto c = build_cross_attention_edges(sys);
      REQUIRE(c.size() % 2 == 0);
      for (std::size_t e = 0; e < c.size(); e += 2) {
        CHECK(c.src[e] == c.dst[e + 1]);
        CHECK(c.dst[e] == c.src[e + 1]);
        CHECK(c.weight[e] == -c.weight[e + 1]);
        CHECK(is_catalyst(sys.tags[static_cast<std::size_t>(c.src[e])]));
        CHECK(is_adsorbate(sys.tags[static_cast<std::size_t>(c.dst[e])]));
      }
      auto moved_ads = sys;
      for (std::size_t i = 0; i < sys.size(); ++i)
        if (is_adsorbate(sys.tags[i])) moved_ads.positions[i] = {sys.positions[i][0] + 3, sys.positions[i][1] - 1, sys.positions[i][2] + 2};
      CHECK(build_cross_attention_edges(moved_ads) == c);
      auto lifted = sys;
      for (std::size_t i = 0; i < sys.size(); ++i)
        if (is_catalyst(sys.tags[i])) lifted.positions[i][2] += 1.5;
      const auto c2 = build_cross_attention_edges(lifted);
      for (std::size_t e = 0; e < c.size(); e += 2) {
        CHECK(c2.weight[e] == doctest::Approx(c.weight[e] + 1.5).epsilon(1e-14));
        CHECK(c2.weight[e + 1] == doctest::Approx(c.weight[e + 1] - 1.5).epsilon(1e-14));
      }
      // centering removes the shift entirely
      CHECK(build_cross_attention_edges(lifted, true).weight.size() == c.size());
      const auto centered = build_cross_attention_edges(sys, true);
      const auto centered_lifted = build_cross_attention_edges(lifted, true);
      for (std::size_t e = 0; e < c.size(); ++e)
        CHECK(centered_lifted.weight[e] == doctest::Approx(centered.weight[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("component_masks") {
  {
    const auto m = component_masks({2, 1, 0, 2});
    CHECK(m.adsorbate == std::vector<int>{0, 3});
    CHECK(m.catalyst == std::vector<int>{1, 2});
  }
  {
    const auto m = component_masks({2, 1});
    CHECK(m.adsorbate == std::vector<int>{0});
    CHECK(m.catalyst == std::vector<int>{1});
  }
  CHECK_THROWS_AS(component_masks({1, 1}), ValidationError);
  CHECK_THROWS_AS(component_masks({2, 2}), ValidationError);
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> tags(2 + rng.below(20));
    for (auto& t : tags) t = static_cast<int>(rng.below(3));
    tags[0] = 2;
    tags[1] = static_cast<int>(rng.below(2));
    const auto m = component_masks(tags);
    std::set<int> all(m.adsorbate.begin(), m.adsorbate.end());
    for (int c : m.catalyst) CHECK(all.insert(c).second);  // disjoint
    CHECK(all.size() == tags.size());
    CHECK(std::is_sorted(m.adsorbate.begin(), m.adsorbate.end()));
    CHECK(std::is_sorted(m.catalyst.begin(), m.catalyst.end()));
  }
}
