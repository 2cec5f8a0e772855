#pragma once

#include <string>
#include <vector>

#include "treeshift/linalg.hpp"
#include "treeshift/tree.hpp"

namespace fixtures {

using namespace treeshift;

struct NamedTree {
  std::string name;
  WeightedTree tree;
};

/// Trees small enough for the dense oracles.
inline std::vector<NamedTree> small_trees() {
  std::vector<NamedTree> out;
  out.push_back({"two rays", generate_example(ExampleName::T2, 8, {0.5})});
  out.push_back({"fast branching depth 2", generate_example(ExampleName::T4, 2, {})});
  out.push_back({"chain", generate_example(ExampleName::Unilateral, 6, {1.0, 2.0, 0.5, 1.5, 1.0, 3.0})});
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    out.push_back({"random " + std::to_string(seed), random_tree(4, 3, seed)});
  return out;
}

inline Vector random_unit(Eigen::Index n, Rng& rng) { return random_vector(n, rng).normalized(); }

/// Random vector vanishing on the last generation.
inline Vector random_above_last(const Tree& t, Rng& rng) {
  Vector f = random_vector(t.size(), rng);
  f.tail(t.size() - t.generation_begin(t.depth())).setZero();
  return f;
}

}  // namespace fixtures
