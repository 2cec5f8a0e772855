#include "treeshift/tree.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace treeshift {

namespace {

std::string pair_label(long long a, long long b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

void check_depth(GenerationIndex depth) {
  if (depth < 0) throw BadParams("tree depth must be non-negative");
}

}  // namespace

Tree Tree::from_parents(GenerationIndex depth, std::vector<std::string> labels,
                        const std::vector<VertexId>& parent) {
  check_depth(depth);
  const auto n = static_cast<VertexId>(labels.size());
  if (static_cast<VertexId>(parent.size()) != n) throw MalformedSpec("label and parent arrays differ in length");
  if (n == 0) throw MalformedSpec("tree has no vertices");
  if (n > kMaxVertices) throw DepthTooLargeForMemory("tree exceeds the vertex cap");

  VertexId root = kNoParent;
  std::vector<std::vector<VertexId>> kids(n);
  for (VertexId i = 0; i < n; ++i) {
    if (parent[i] == kNoParent) {
      if (root != kNoParent) throw MalformedSpec("multiple roots: '" + labels[root] + "' and '" + labels[i] + "'");
      root = i;
      continue;
    }
    if (parent[i] < 0 || parent[i] >= n || parent[i] == i) throw MalformedSpec("invalid parent for '" + labels[i] + "'");
    kids[parent[i]].push_back(i);
  }
  if (root == kNoParent) throw MalformedSpec("no root (every vertex has a parent, so the graph has a cycle)");

  // Breadth-first order; unreachable vertices sit on a cycle or hang off one.
  std::vector<VertexId> order;
  order.reserve(n);
  std::vector<GenerationIndex> gen_old(n, -1);
  order.push_back(root);
  gen_old[root] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const VertexId v = order[head];
    for (VertexId c : kids[v]) {
      gen_old[c] = gen_old[v] + 1;
      order.push_back(c);
    }
  }
  if (static_cast<VertexId>(order.size()) != n) throw MalformedSpec("graph is not a rooted tree (cycle or orphan vertex)");

  std::vector<VertexId> new_index(n);
  for (VertexId k = 0; k < n; ++k) new_index[order[k]] = k;

  Tree t;
  t.depth_ = depth;
  t.labels_.resize(n);
  t.parent_.resize(n);
  t.generation_.resize(n);
  t.first_child_.assign(n, 0);
  t.child_count_.assign(n, 0);
  t.child_list_.resize(n);
  for (VertexId k = 0; k < n; ++k) {
    const VertexId old = order[k];
    t.labels_[k] = std::move(labels[old]);
    t.parent_[k] = parent[old] == kNoParent ? kNoParent : new_index[parent[old]];
    t.generation_[k] = gen_old[old];
    t.child_list_[k] = k;
    if (gen_old[old] > depth) throw MalformedSpec("vertex '" + t.labels_[k] + "' lies below the truncation depth");
  }
  // Children of a vertex are consecutive in breadth-first order.
  for (VertexId k = 0; k < n; ++k) {
    const VertexId old = order[k];
    t.child_count_[k] = static_cast<VertexId>(kids[old].size());
    t.first_child_[k] = kids[old].empty() ? 0 : new_index[kids[old].front()];
    if (t.generation_[k] < depth && kids[old].empty())
      throw MalformedSpec("vertex '" + t.labels_[k] + "' is a leaf above the truncation depth");
  }
  t.generation_offsets_.assign(static_cast<std::size_t>(depth) + 2, n);
  for (VertexId k = n - 1; k >= 0; --k) t.generation_offsets_[t.generation_[k]] = k;
  return t;
}

VertexId Tree::generation_begin(GenerationIndex g) const {
  if (g < 0 || g > depth_) return size();
  return generation_offsets_[g];
}

VertexId Tree::generation_end(GenerationIndex g) const {
  if (g < 0 || g > depth_) return size();
  return generation_offsets_[g + 1];
}

VertexId Tree::ancestor(VertexId v, GenerationIndex k) const {
  for (GenerationIndex i = 0; i < k; ++i) {
    v = parent_[v];
    if (v == kNoParent) throw NotDescendant("ancestor requested above the root");
  }
  return v;
}

bool Tree::is_descendant(VertexId u, VertexId v) const {
  const GenerationIndex gap = generation_[v] - generation_[u];
  if (gap < 0) return false;
  return ancestor(v, gap) == u;
}

std::optional<VertexId> Tree::find(std::string_view label) const {
  for (VertexId v = 0; v < size(); ++v)
    if (labels_[v] == label) return v;
  return std::nullopt;
}

WeightMap::WeightMap(std::vector<Real> weights) : weights_(std::move(weights)) {
  for (std::size_t v = 1; v < weights_.size(); ++v)
    if (!(weights_[v] > 0.0) || !std::isfinite(weights_[v]))
      throw NonpositiveWeight("weight of vertex " + std::to_string(v) + " is not a positive finite number");
}

Real WeightMap::at(VertexId v) const {
  if (v <= 0 || v >= size()) throw std::out_of_range("the root carries no weight");
  return weights_[v];
}

namespace {

// Builds a tree from parent pointers and per-vertex weights given in input
// order, permuting the weights into the tree's breadth-first order.
WeightedTree assemble(GenerationIndex depth, std::vector<std::string> labels,
                      const std::vector<VertexId>& parent, const std::vector<Real>& weight) {
  std::vector<std::string> copy = labels;
  Tree tree = Tree::from_parents(depth, std::move(copy), parent);
  std::unordered_map<std::string, VertexId> by_label;
  by_label.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) by_label.emplace(labels[i], static_cast<VertexId>(i));
  std::vector<Real> w(static_cast<std::size_t>(tree.size()), 0.0);
  for (VertexId v = 1; v < tree.size(); ++v) w[v] = weight[by_label.at(tree.label(v))];
  return {std::move(tree), WeightMap(std::move(w))};
}

}  // namespace

WeightedTree build_tree(const TreeSpec& spec) {
  check_depth(spec.depth);
  if (spec.root.empty()) throw MalformedSpec("root label is empty");
  std::unordered_map<std::string, VertexId> index;
  std::vector<std::string> labels;
  std::vector<VertexId> parent;
  std::vector<Real> weight;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<VertexId>(labels.size()));
    if (inserted) {
      labels.push_back(label);
      parent.push_back(kNoParent);
      weight.push_back(0.0);
    }
    return it->second;
  };
  intern(spec.root);
  for (const auto& e : spec.edges) {
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw NonpositiveWeight("edge " + e.from + " -> " + e.to + " has non-positive weight");
    const VertexId from = intern(e.from);
    const VertexId to = intern(e.to);
    if (to == 0) throw MalformedSpec("edge " + e.from + " -> " + e.to + " points into the root");
    if (parent[to] != kNoParent) throw MalformedSpec("vertex '" + e.to + "' has more than one incoming edge");
    parent[to] = from;
    weight[to] = e.weight;
  }
  return assemble(spec.depth, std::move(labels), parent, weight);
}

ExampleName parse_example_name(std::string_view name) {
  if (name == "T2" || name == "t2") return ExampleName::T2;
  if (name == "T4" || name == "t4") return ExampleName::T4;
  if (name == "UNILATERAL" || name == "unilateral") return ExampleName::Unilateral;
  throw UnknownExample("unknown example '" + std::string(name) + "'");
}

std::string_view to_string(ExampleName name) {
  switch (name) {
    case ExampleName::T2: return "T2";
    case ExampleName::T4: return "T4";
    case ExampleName::Unilateral: return "UNILATERAL";
  }
  return "?";
}

WeightedTree generate_example(ExampleName name, GenerationIndex depth, const std::vector<Real>& params) {
  check_depth(depth);
  std::vector<std::string> labels;
  std::vector<VertexId> parent;
  std::vector<Real> weight;
  auto add = [&](std::string label, VertexId par, Real w) {
    labels.push_back(std::move(label));
    parent.push_back(par);
    weight.push_back(w);
    return static_cast<VertexId>(labels.size() - 1);
  };

  switch (name) {
    case ExampleName::T2: {
      if (params.size() != 1 || !(params[0] > 0.0 && params[0] < 1.0))
        throw BadParams("T2 expects a single parameter 0 < alpha < 1");
      const Real alpha = params[0];
      const VertexId root = add("(0,0)", kNoParent, 0.0);
      VertexId tip1 = root, tip2 = root;
      for (GenerationIndex j = 1; j <= depth; ++j) {
        tip1 = add(pair_label(1, j), tip1, 1.0);
        tip2 = add(pair_label(2, j), tip2, alpha);
      }
      break;
    }
    case ExampleName::T4: {
      if (!params.empty()) throw BadParams("T4 takes no parameters");
      VertexId total = 0;
      for (GenerationIndex m = 0; m <= depth; ++m) {
        const long long bits = static_cast<long long>(m) * (m + 1);
        if (bits >= 40 || (total += VertexId{1} << bits) > kMaxVertices)
          throw DepthTooLargeForMemory("T4 at depth " + std::to_string(depth) + " exceeds the vertex cap");
      }
      add("(0,0)", kNoParent, 0.0);
      VertexId prev_begin = 0;
      for (GenerationIndex m = 0; m < depth; ++m) {
        const VertexId count = VertexId{1} << (m * (m + 1));
        const VertexId fan = VertexId{1} << (2 * m + 2);
        const Real w = std::ldexp(1.0, -(m + 1));
        const VertexId begin = static_cast<VertexId>(labels.size());
        for (VertexId n = 0; n < count; ++n)
          for (VertexId k = n * fan; k < (n + 1) * fan; ++k) add(pair_label(m + 1, k), prev_begin + n, w);
        prev_begin = begin;
      }
      break;
    }
    case ExampleName::Unilateral: {
      if (!params.empty() && static_cast<GenerationIndex>(params.size()) != depth)
        throw BadParams("UNILATERAL expects no parameters or exactly one weight per edge");
      VertexId tip = add(pair_label(0, 0), kNoParent, 0.0);
      for (GenerationIndex j = 1; j <= depth; ++j) tip = add(pair_label(j, 0), tip, params.empty() ? 1.0 : params[j - 1]);
      break;
    }
  }
  return assemble(depth, std::move(labels), parent, weight);
}

WeightedTree random_tree(GenerationIndex depth, int max_branching, std::uint64_t seed) {
  check_depth(depth);
  if (max_branching < 1) throw BadParams("max_branching must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> branching(1, max_branching);
  std::uniform_real_distribution<Real> weight_dist(0.5, 1.5);

  std::vector<std::string> labels{pair_label(0, 0)};
  std::vector<VertexId> parent{kNoParent};
  std::vector<Real> weight{0.0};
  VertexId begin = 0, end = 1;
  for (GenerationIndex m = 0; m < depth; ++m) {
    VertexId index_in_generation = 0;
    for (VertexId v = begin; v < end; ++v) {
      const int kids = branching(rng);
      for (int c = 0; c < kids; ++c) {
        labels.push_back(pair_label(m + 1, index_in_generation++));
        parent.push_back(v);
        weight.push_back(weight_dist(rng));
      }
    }
    begin = end;
    end = static_cast<VertexId>(labels.size());
    if (end > kMaxVertices) throw DepthTooLargeForMemory("random tree exceeds the vertex cap");
  }
  return assemble(depth, std::move(labels), parent, weight);
}

WeightedTree balanced_rays(int rays, GenerationIndex depth, const std::vector<Real>& generation_norms) {
  check_depth(depth);
  if (rays < 1 || generation_norms.empty()) throw BadParams("balanced_rays needs rays >= 1 and at least one norm");
  for (Real c : generation_norms)
    if (!(c > 0.0)) throw NonpositiveWeight("generation norms must be positive");
  auto norm_at = [&](GenerationIndex m) {
    return generation_norms[std::min<std::size_t>(m, generation_norms.size() - 1)];
  };
  std::vector<std::string> labels{pair_label(0, 0)};
  std::vector<VertexId> parent{kNoParent};
  std::vector<Real> weight{0.0};
  std::vector<VertexId> tips(rays, 0);
  for (GenerationIndex j = 1; j <= depth; ++j) {
    const Real w = j == 1 ? norm_at(0) / std::sqrt(static_cast<Real>(rays)) : norm_at(j - 1);
    for (int r = 0; r < rays; ++r) {
      labels.push_back(pair_label(r + 1, j));
      parent.push_back(tips[r]);
      weight.push_back(w);
      tips[r] = static_cast<VertexId>(labels.size() - 1);
    }
  }
  return assemble(depth, std::move(labels), parent, weight);
}

Real lambda_product(const Tree& tree, const WeightMap& weights, VertexId u, VertexId v) {
  if (!tree.is_descendant(u, v))
    throw NotDescendant("'" + tree.label(v) + "' is not a descendant of '" + tree.label(u) + "'");
  Real product = 1.0;
  for (VertexId x = v; x != u; x = tree.parent(x)) product *= weights[x];
  return product;
}

std::vector<PathSubtree> enumerate_paths(const Tree& tree) {
  std::vector<PathSubtree> paths;
  const GenerationIndex d = tree.depth();
  for (VertexId leaf = tree.generation_begin(d); leaf < tree.generation_end(d); ++leaf) {
    PathSubtree p;
    p.vertices.resize(static_cast<std::size_t>(d) + 1);
    VertexId x = leaf;
    for (GenerationIndex g = d; g >= 0; --g) {
      p.vertices[g] = x;
      x = tree.parent(x);
    }
    paths.push_back(std::move(p));
  }
  return paths;
}

TreeSpec parse_tree_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedSpec(std::string("tree spec is not valid JSON: ") + e.what());
  }
  TreeSpec spec;
  try {
    spec.depth = j.at("depth").get<GenerationIndex>();
    spec.root = j.at("root").get<std::string>();
    for (const auto& e : j.at("edges"))
      spec.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("weight").get<Real>()});
  } catch (const nlohmann::json::exception& e) {
    throw MalformedSpec(std::string("tree spec is missing a field: ") + e.what());
  }
  return spec;
}

TreeSpec load_tree_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedSpec("cannot open tree spec '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tree_spec(ss.str());
}

std::string dump_tree_spec(const TreeSpec& spec) {
  nlohmann::json j;
  j["depth"] = spec.depth;
  j["root"] = spec.root;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : spec.edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
  return j.dump(2);
}

TreeSpec to_tree_spec(const WeightedTree& wt) {
  TreeSpec spec;
  spec.depth = wt.tree.depth();
  spec.root = wt.tree.label(wt.tree.root());
  for (VertexId v = 1; v < wt.tree.size(); ++v)
    spec.edges.push_back({wt.tree.label(wt.tree.parent(v)), wt.tree.label(v), wt.weights[v]});
  return spec;
}

}  // namespace treeshift
