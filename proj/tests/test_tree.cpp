#include <doctest.h>

#include <functional>
#include <set>

#include "treeshift/tree.hpp"

using namespace treeshift;

namespace {

TreeSpec chain_spec(int depth, Real w = 1.0) {
  TreeSpec s{depth, "r", {}};
  std::string prev = "r";
  for (int j = 1; j <= depth; ++j) {
    const std::string next = "v" + std::to_string(j);
    s.edges.push_back({prev, next, w});
    prev = next;
  }
  return s;
}

}  // namespace

TEST_CASE("tree specs build trees") {
  SUBCASE("unilateral chain") {
    const WeightedTree wt = build_tree(chain_spec(4));
    CHECK(wt.tree.size() == 5);
    CHECK(enumerate_paths(wt.tree).size() == 1);
    CHECK(wt.tree.label(wt.tree.root()) == "r");
  }
  SUBCASE("two rays") {
    const WeightedTree wt = generate_example(ExampleName::T2, 6, {0.5});
    CHECK(wt.tree.size() == 13);
    CHECK(wt.tree.generation_size(3) == 2);
  }
  SUBCASE("zero weight") {
    TreeSpec s = chain_spec(3);
    s.edges[1].weight = 0.0;
    CHECK_THROWS_AS(build_tree(s), NonpositiveWeight);
  }
  SUBCASE("two parents") {
    TreeSpec s = chain_spec(2);
    s.edges.push_back({"r", "v2", 1.0});
    CHECK_THROWS_AS(build_tree(s), MalformedSpec);
  }
  SUBCASE("edge into root") {
    TreeSpec s = chain_spec(2);
    s.edges.push_back({"v2", "r", 1.0});
    CHECK_THROWS_AS(build_tree(s), MalformedSpec);
  }
  SUBCASE("detached cycle") {
    TreeSpec s = chain_spec(2);
    s.edges.push_back({"a", "b", 1.0});
    s.edges.push_back({"b", "a", 1.0});
    CHECK_THROWS_AS(build_tree(s), MalformedSpec);
  }
  SUBCASE("early leaf") {
    TreeSpec s = chain_spec(3);
    s.edges.push_back({"r", "stub", 1.0});
    CHECK_THROWS_AS(build_tree(s), MalformedSpec);
  }
  SUBCASE("too deep") {
    TreeSpec s = chain_spec(3);
    s.depth = 2;
    CHECK_THROWS_AS(build_tree(s), MalformedSpec);
  }
}

TEST_CASE("children keep input order and generations are contiguous") {
  TreeSpec s{2, "r", {{"r", "b", 1.0}, {"r", "a", 2.0}, {"a", "a1", 1.0}, {"b", "b1", 1.0}, {"b", "b2", 3.0}}};
  const WeightedTree wt = build_tree(s);
  const Tree& t = wt.tree;
  REQUIRE(t.size() == 6);
  CHECK(t.label(1) == "b");
  CHECK(t.label(2) == "a");
  CHECK(wt.weights[2] == 2.0);
  for (VertexId v = 1; v < t.size(); ++v) CHECK(t.generation(v) == t.generation(t.parent(v)) + 1);
  for (VertexId v = 0; v < t.size(); ++v)
    for (VertexId c : t.children(v)) CHECK(t.parent(c) == v);
  CHECK(t.generation_begin(2) == 3);
  CHECK(t.generation_end(2) == 6);
  CHECK(*t.find("b2") == 4);
  CHECK(*t.find("a1") == 5);
}

TEST_CASE("built-in examples") {
  SUBCASE("two rays at depth 3") {
    const WeightedTree wt = generate_example(ExampleName::T2, 3, {0.5});
    const Tree& t = wt.tree;
    CHECK(t.size() == 7);
    for (int j = 1; j <= 3; ++j) {
      CHECK(wt.weights[*t.find("(1," + std::to_string(j) + ")")] == 1.0);
      CHECK(wt.weights[*t.find("(2," + std::to_string(j) + ")")] == 0.5);
    }
  }
  SUBCASE("fast-branching tree at depth 2") {
    const WeightedTree wt = generate_example(ExampleName::T4, 2, {});
    CHECK(wt.tree.generation_size(1) == 4);
    CHECK(wt.tree.generation_size(2) == 64);
    for (VertexId v = wt.tree.generation_begin(1); v < wt.tree.generation_end(1); ++v) CHECK(wt.weights[v] == 0.5);
    for (VertexId v = wt.tree.generation_begin(2); v < wt.tree.generation_end(2); ++v) CHECK(wt.weights[v] == 0.25);
  }
  SUBCASE("fast-branching tree at depth 3") {
    const WeightedTree wt = generate_example(ExampleName::T4, 3, {});
    CHECK(wt.tree.generation_size(3) == 4096);
    CHECK_THROWS_AS(generate_example(ExampleName::T4, 4, {}), DepthTooLargeForMemory);
  }
  SUBCASE("chain") {
    const WeightedTree wt = generate_example(ExampleName::Unilateral, 2, {1.0, 1.0});
    CHECK(wt.tree.size() == 3);
    CHECK(wt.weights[2] == 1.0);
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(generate_example(ExampleName::T2, 3, {1.5}), BadParams);
    CHECK_THROWS_AS(generate_example(ExampleName::T2, 3, {}), BadParams);
    CHECK_THROWS_AS(generate_example(ExampleName::T4, 2, {1.0}), BadParams);
    CHECK_THROWS_AS(generate_example(ExampleName::Unilateral, 3, {1.0}), BadParams);
    CHECK_THROWS_AS(parse_example_name("T3"), UnknownExample);
  }
}

TEST_CASE("weight products along paths") {
  const WeightedTree wt = generate_example(ExampleName::T2, 4, {0.5});
  const Tree& t = wt.tree;
  const VertexId leaf = *t.find("(2,3)");
  CHECK(lambda_product(t, wt.weights, leaf, leaf) == 1.0);
  CHECK(lambda_product(t, wt.weights, 0, leaf) == doctest::Approx(0.125));
  CHECK(lambda_product(t, wt.weights, *t.find("(2,1)"), leaf) == doctest::Approx(0.25));
  CHECK_THROWS_AS(lambda_product(t, wt.weights, *t.find("(1,1)"), leaf), NotDescendant);
  CHECK_THROWS_AS(wt.weights.at(0), std::out_of_range);
}

TEST_CASE("paths") {
  CHECK(enumerate_paths(generate_example(ExampleName::T2, 7, {0.5}).tree).size() == 2);
  const Tree t4 = generate_example(ExampleName::T4, 2, {}).tree;
  // Leaves counted by a recursive walk over children.
  std::function<std::size_t(VertexId)> leaves = [&](VertexId v) -> std::size_t {
    if (t4.child_count(v) == 0) return 1;
    std::size_t n = 0;
    for (VertexId c : t4.children(v)) n += leaves(c);
    return n;
  };
  const auto paths = enumerate_paths(t4);
  CHECK(paths.size() == leaves(0));
  CHECK(paths.size() == 64);
  std::set<VertexId> ends;
  for (const auto& p : paths) {
    CHECK(p.vertices.front() == 0);
    for (std::size_t g = 1; g < p.vertices.size(); ++g) CHECK(t4.parent(p.vertices[g]) == p.vertices[g - 1]);
    ends.insert(p.vertices.back());
  }
  CHECK(ends.size() == paths.size());
}

TEST_CASE("random trees") {
  const WeightedTree a = random_tree(6, 3, 42), b = random_tree(6, 3, 42), c = random_tree(6, 3, 43);
  CHECK(dump_tree_spec(to_tree_spec(a)) == dump_tree_spec(to_tree_spec(b)));
  CHECK(dump_tree_spec(to_tree_spec(a)) != dump_tree_spec(to_tree_spec(c)));
  for (VertexId v = 0; v < a.tree.size(); ++v) {
    if (a.tree.generation(v) < 6) {
      CHECK(a.tree.child_count(v) >= 1);
      CHECK(a.tree.child_count(v) <= 3);
    }
    if (v > 0) {
      CHECK(a.weights[v] >= 0.5);
      CHECK(a.weights[v] <= 1.5);
    }
  }
}

TEST_CASE("balanced rays carry the requested generation norms") {
  const WeightedTree wt = balanced_rays(3, 4, {2.0, 1.5});
  const Tree& t = wt.tree;
  Real root = 0.0;
  for (VertexId c : t.children(0)) root += wt.weights[c] * wt.weights[c];
  CHECK(std::sqrt(root) == doctest::Approx(2.0));
  for (VertexId v = t.generation_begin(1); v < t.generation_begin(3); ++v)
    CHECK(wt.weights[t.children(v)[0]] == doctest::Approx(1.5));
}

TEST_CASE("tree spec JSON round trip") {
  const WeightedTree wt = random_tree(4, 3, 7);
  const std::string text = dump_tree_spec(to_tree_spec(wt));
  const WeightedTree back = build_tree(parse_tree_spec(text));
  REQUIRE(back.tree.size() == wt.tree.size());
  for (VertexId v = 0; v < wt.tree.size(); ++v) {
    CHECK(back.tree.label(v) == wt.tree.label(v));
    CHECK(back.tree.parent(v) == wt.tree.parent(v));
    if (v > 0) CHECK(back.weights[v] == wt.weights[v]);
  }
  CHECK_THROWS_AS(parse_tree_spec("{"), MalformedSpec);
  CHECK_THROWS_AS(parse_tree_spec(R"({"depth": 2})"), MalformedSpec);
  CHECK_THROWS_AS(load_tree_spec("/nonexistent/tree.json"), MalformedSpec);
}
