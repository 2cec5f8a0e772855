#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeshift/common.hpp"

namespace treeshift {

/// Hard cap on the number of stored vertices of a truncated tree.
inline constexpr VertexId kMaxVertices = VertexId{1} << 20;

/// Rooted directed tree truncated at a fixed generation depth.
///
/// Vertices are stored in breadth-first order with children kept in their
/// insertion order, so every generation and every sibling group occupies a
/// contiguous index range. The root has index 0.
class Tree {
 public:
  Tree() = default;

  /// Validates and reorders a parent-pointer description. `parent[i]` is the
  /// index of the parent of vertex `i` or `kNoParent`; the relative order of
  /// vertices sharing a parent is kept as their child order.
  static Tree from_parents(GenerationIndex depth, std::vector<std::string> labels,
                           const std::vector<VertexId>& parent);

  VertexId size() const { return static_cast<VertexId>(parent_.size()); }
  GenerationIndex depth() const { return depth_; }
  VertexId root() const { return 0; }

  VertexId parent(VertexId v) const { return parent_[v]; }
  GenerationIndex generation(VertexId v) const { return generation_[v]; }
  const std::string& label(VertexId v) const { return labels_[v]; }

  VertexId first_child(VertexId v) const { return first_child_[v]; }
  VertexId child_count(VertexId v) const { return child_count_[v]; }
  std::span<const VertexId> children(VertexId v) const {
    return {child_list_.data() + first_child_[v], static_cast<std::size_t>(child_count_[v])};
  }

  /// Index range [begin, end) of generation g (empty when g > depth).
  VertexId generation_begin(GenerationIndex g) const;
  VertexId generation_end(GenerationIndex g) const;
  VertexId generation_size(GenerationIndex g) const {
    return generation_end(g) - generation_begin(g);
  }

  /// par^k(v); requires k <= |v|.
  VertexId ancestor(VertexId v, GenerationIndex k) const;
  /// True when v ∈ Des(u), i.e. u lies on the path from the root to v.
  bool is_descendant(VertexId u, VertexId v) const;

  std::optional<VertexId> find(std::string_view label) const;

 private:
  GenerationIndex depth_ = 0;
  std::vector<std::string> labels_;
  std::vector<VertexId> parent_;
  std::vector<GenerationIndex> generation_;
  std::vector<VertexId> first_child_;
  std::vector<VertexId> child_count_;
  std::vector<VertexId> child_list_;
  std::vector<VertexId> generation_offsets_;
};

/// Positive weights λ_v on the non-root vertices, indexed like the tree.
class WeightMap {
 public:
  WeightMap() = default;
  explicit WeightMap(std::vector<Real> weights);

  /// λ_v; throws for the root, which carries no weight.
  Real at(VertexId v) const;
  Real operator[](VertexId v) const { return weights_[v]; }
  VertexId size() const { return static_cast<VertexId>(weights_.size()); }

 private:
  std::vector<Real> weights_;
};

struct WeightedTree {
  Tree tree;
  WeightMap weights;
};

struct TreeEdge {
  std::string from;
  std::string to;
  Real weight = 0.0;
};

/// In-memory form of the tree-spec JSON file.
struct TreeSpec {
  GenerationIndex depth = 0;
  std::string root;
  std::vector<TreeEdge> edges;
};

struct PathSubtree {
  std::vector<VertexId> vertices;
};

enum class ExampleName { T2, T4, Unilateral };

ExampleName parse_example_name(std::string_view name);
std::string_view to_string(ExampleName name);

WeightedTree build_tree(const TreeSpec& spec);

/// T2: two rays with weights 1 and α; params = {α}, 0 < α < 1.
/// T4: generation m has 2^{m(m+1)} vertices with weights 2^{-m}; params empty.
/// Unilateral: a single ray; params empty (unit weights) or one weight per edge.
WeightedTree generate_example(ExampleName name, GenerationIndex depth,
                              const std::vector<Real>& params);

/// Seeded random locally finite tree; every vertex above the last generation
/// gets between 1 and `max_branching` children, weights uniform in [0.5, 1.5].
WeightedTree random_tree(GenerationIndex depth, int max_branching, std::uint64_t seed);

/// Balanced tree made of `rays` rays leaving the root. `generation_norms[m]`
/// is ||S e_u|| for every u with |u| = m; when shorter than depth the last
/// entry is repeated.
WeightedTree balanced_rays(int rays, GenerationIndex depth, const std::vector<Real>& generation_norms);

/// λ_{u|v}: product of the weights on the path from u down to v.
Real lambda_product(const Tree& tree, const WeightMap& weights, VertexId u, VertexId v);

/// All root-to-last-generation chains of the truncation.
std::vector<PathSubtree> enumerate_paths(const Tree& tree);

TreeSpec parse_tree_spec(std::string_view json_text);
TreeSpec load_tree_spec(const std::string& path);
std::string dump_tree_spec(const TreeSpec& spec);
TreeSpec to_tree_spec(const WeightedTree& wt);

}  // namespace treeshift
