#pragma once

// Symbolic refinement tree over perception propositions and its compilation
// into environment assumptions.
//
// Every node name doubles as a Boolean environment atom that becomes true when
// the perception module reports that level of detail. The root stands for
// "some object is present"; each child refines its parent.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gr1/expr.hpp"

namespace gr1 {

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RefinementTree {
 public:
  using Edge = std::pair<std::string, std::string>;

  const std::string& root() const { return nodes_.at(root_); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(const std::string& n) const { return index_.count(n) != 0; }

  const std::vector<std::string>& children(const std::string& n) const { return children_.at(idx(n)); }
  bool is_leaf(const std::string& n) const { return children(n).empty(); }

  std::optional<std::string> parent(const std::string& n) const {
    int p = parent_.at(idx(n));
    if (p < 0) return std::nullopt;
    return nodes_[static_cast<std::size_t>(p)];
  }

  // Root has depth 0.
  std::size_t depth(const std::string& n) const { return depth_.at(idx(n)); }

  // Number of levels; a single node has one level.
  std::size_t levels() const { return *std::max_element(depth_.begin(), depth_.end()) + 1; }

  std::vector<std::string> level(std::size_t d) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (depth_[i] == d) out.push_back(nodes_[i]);
    return out;
  }

  // root, ..., n
  std::vector<std::string> path_to(const std::string& n) const {
    std::vector<std::string> out;
    int i = static_cast<int>(idx(n));
    while (i >= 0) {
      out.push_back(nodes_[static_cast<std::size_t>(i)]);
      i = parent_[static_cast<std::size_t>(i)];
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  bool is_ancestor(const std::string& a, const std::string& d) const {
    auto p = path_to(d);
    return std::find(p.begin(), p.end(), a) != p.end();
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (const auto& c : children_[i]) out.emplace_back(nodes_[i], c);
    return out;
  }

  friend RefinementTree build_tree(const std::vector<std::string>& nodes, const std::vector<Edge>& edges);

 private:
  std::size_t idx(const std::string& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) throw TreeError("unknown tree node '" + n + "'");
    return it->second;
  }

  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t> index_;
  std::vector<int> parent_;
  std::vector<std::vector<std::string>> children_;
  std::vector<std::size_t> depth_;
  std::size_t root_ = 0;
};

inline RefinementTree build_tree(const std::vector<std::string>& nodes,
                                 const std::vector<RefinementTree::Edge>& edges) {
  RefinementTree t;
  if (nodes.empty()) throw TreeError("tree has no nodes");
  for (const auto& n : nodes) {
    if (t.index_.count(n)) throw TreeError("node '" + n + "' listed twice");
    t.index_[n] = t.nodes_.size();
    t.nodes_.push_back(n);
  }
  const std::size_t n = nodes.size();
  t.parent_.assign(n, -1);
  t.children_.assign(n, {});
  for (const auto& [from, to] : edges) {
    auto a = t.index_.find(from);
    auto b = t.index_.find(to);
    if (a == t.index_.end()) throw TreeError("edge endpoint '" + from + "' is not a node");
    if (b == t.index_.end()) throw TreeError("edge endpoint '" + to + "' is not a node");
    if (a->second == b->second) throw TreeError("cycle detected: self-loop on '" + from + "'");
    if (t.parent_[b->second] >= 0)
      throw TreeError("node '" + to + "' has multiple parents ('" + t.nodes_[t.parent_[b->second]] +
                      "' and '" + from + "')");
    t.parent_[b->second] = static_cast<int>(a->second);
    t.children_[a->second].push_back(to);
  }
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i)
    if (t.parent_[i] < 0) roots.push_back(i);
  if (roots.empty()) throw TreeError("cycle detected: every node has a parent");
  if (roots.size() > 1) {
    for (std::size_t r : roots)
      if (t.children_[r].empty())
        throw TreeError("disconnected node '" + t.nodes_[r] + "'");
    throw TreeError("multiple roots ('" + t.nodes_[roots[0]] + "' and '" + t.nodes_[roots[1]] + "')");
  }
  t.root_ = roots.front();
  // With one root and single parents, anything unreachable from the root sits on a cycle.
  t.depth_.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{t.root_};
  seen[t.root_] = true;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (const auto& c : t.children_[u]) {
      std::size_t v = t.index_.at(c);
      seen[v] = true;
      t.depth_[v] = t.depth_[u] + 1;
      stack.push_back(v);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw TreeError("cycle detected through '" + t.nodes_[i] + "'");
  return t;
}

struct VariablePartition {
  std::set<std::string> ground;   // leaves
  std::set<std::string> derived;  // internal nodes
};

inline VariablePartition partition(const RefinementTree& tree) {
  VariablePartition p;
  for (const auto& n : tree.nodes()) (tree.is_leaf(n) ? p.ground : p.derived).insert(n);
  return p;
}

// Detection persistence: a set node stays set or is replaced by a refinement,
//   v [& !release] -> next(v | c1 | ... | ck)
// `release` marks the steps after which the tracked object may leave the
// perception (e.g. once it has been passed).
inline std::vector<BoolExpr> compile_persistence(const RefinementTree& tree,
                                                 const std::optional<BoolExpr>& release = std::nullopt) {
  std::vector<BoolExpr> out;
  for (const auto& v : tree.nodes()) {
    BoolExpr premise = BoolExpr::atom(v);
    if (release) premise = BoolExpr::conj(premise, BoolExpr::negate(*release));
    std::vector<BoolExpr> keep{BoolExpr::atom(v, "true", true)};
    for (const auto& c : tree.children(v)) keep.push_back(BoolExpr::atom(c, "true", true));
    out.push_back(BoolExpr::implies(premise, BoolExpr::disj(keep)));
  }
  return out;
}

// A refinement asserts its ancestors, and at most one child of any node holds
// (one active root-to-node path). Primed form for env_safety, unprimed for env_init.
inline std::vector<BoolExpr> compile_consistency(const RefinementTree& tree, bool primed = true) {
  std::vector<BoolExpr> out;
  auto atom = [&](const std::string& n) { return BoolExpr::atom(n, "true", primed); };
  for (const auto& v : tree.nodes())
    if (auto p = tree.parent(v)) out.push_back(BoolExpr::implies(atom(v), atom(*p)));
  for (const auto& v : tree.nodes()) {
    const auto& cs = tree.children(v);
    for (std::size_t i = 0; i < cs.size(); ++i)
      for (std::size_t j = i + 1; j < cs.size(); ++j)
        out.push_back(BoolExpr::negate(BoolExpr::conj(atom(cs[i]), atom(cs[j]))));
  }
  return out;
}

// One cell of the ego-frame perception corridor. Cell 1 is nearest to the ego.
struct PerceptionCell {
  std::size_t index = 1;
  std::vector<std::string> domain;  // includes the empty value

  std::string var() const { return "o" + std::to_string(index); }
};

inline constexpr const char* kEmptyCell = "empty";

// Cells 1..levels_per_cell.size(); cell i carries the nodes of tree level
// levels_per_cell[i-1] plus the empty value.
inline std::vector<PerceptionCell> make_pipeline_cells(const RefinementTree& tree,
                                                       const std::vector<std::size_t>& levels_per_cell) {
  std::vector<PerceptionCell> cells;
  for (std::size_t i = 0; i < levels_per_cell.size(); ++i) {
    PerceptionCell c{i + 1, {kEmptyCell}};
    for (const auto& n : tree.level(levels_per_cell[i])) c.domain.push_back(n);
    cells.push_back(std::move(c));
  }
  return cells;
}

// Seven cells: the two farthest see only the root, the next two the first
// refinement, the three nearest the leaves.
inline std::vector<PerceptionCell> corridor_cells_7(const RefinementTree& tree) {
  return make_pipeline_cells(tree, {2, 2, 2, 1, 1, 0, 0});
}

inline std::vector<VarDecl> pipeline_var_decls(const std::vector<PerceptionCell>& cells) {
  std::vector<VarDecl> out;
  for (const auto& c : cells) out.push_back({c.var(), Owner::Environment, c.domain});
  return out;
}

struct PipelineConstraint {
  std::string schema;  // "empty-shift", "shift", "refine"
  std::size_t from_cell = 0;
  BoolExpr formula;
};

// Shift-and-refine relation: each step the contents of cell i move to cell i-1.
// An object keeps its value when both cells share a tree level, and is replaced
// by one of its children when cell i-1 sits one level deeper.
inline std::vector<PipelineConstraint> compile_pipeline(const std::vector<PerceptionCell>& cells,
                                                        const RefinementTree& tree) {
  std::map<std::size_t, const PerceptionCell*> by_index;
  std::map<std::size_t, std::size_t> level_of;
  for (const auto& c : cells) {
    if (by_index.count(c.index)) throw TreeError("cell o" + std::to_string(c.index) + " listed twice");
    by_index[c.index] = &c;
    if (std::find(c.domain.begin(), c.domain.end(), kEmptyCell) == c.domain.end())
      throw TreeError("cell " + c.var() + " lacks the '" + std::string(kEmptyCell) + "' value");
    std::optional<std::size_t> lvl;
    std::vector<std::string> values;
    for (const auto& v : c.domain) {
      if (v == kEmptyCell) continue;
      if (!tree.contains(v)) throw TreeError("cell " + c.var() + " value '" + v + "' is not a tree node");
      std::size_t d = tree.depth(v);
      if (lvl && *lvl != d) throw TreeError("cell " + c.var() + " mixes tree levels");
      lvl = d;
      values.push_back(v);
    }
    if (!lvl) throw TreeError("cell " + c.var() + " has no object values");
    auto expected = tree.level(*lvl);
    std::sort(values.begin(), values.end());
    std::sort(expected.begin(), expected.end());
    if (values != expected)
      throw TreeError("cell " + c.var() + " domain does not match tree level " + std::to_string(*lvl));
    level_of[c.index] = *lvl;
  }
  if (by_index.empty() || by_index.begin()->first != 1 || by_index.rbegin()->first != by_index.size())
    throw TreeError("cells must be numbered 1..n");

  std::vector<PipelineConstraint> out;
  const std::size_t n = by_index.size();
  for (std::size_t i = n; i >= 2; --i) {
    const PerceptionCell& far = *by_index[i];
    const PerceptionCell& near = *by_index[i - 1];
    const std::size_t lf = level_of[i], ln = level_of[i - 1];
    if (ln != lf && ln != lf + 1)
      throw TreeError("cell " + near.var() + " must sit on the same level as " + far.var() + " or one deeper");
    auto at = [](const PerceptionCell& c, const std::string& v, bool primed) {
      return BoolExpr::atom(c.var(), v, primed);
    };
    out.push_back({"empty-shift", i,
                   BoolExpr::implies(at(far, kEmptyCell, false), at(near, kEmptyCell, true))});
    for (const auto& v : far.domain) {
      if (v == kEmptyCell) continue;
      if (ln == lf) {
        out.push_back({"shift", i, BoolExpr::implies(at(far, v, false), at(near, v, true))});
      } else {
        std::vector<BoolExpr> opts;
        for (const auto& c : tree.children(v)) opts.push_back(at(near, c, true));
        out.push_back({"refine", i, BoolExpr::implies(at(far, v, false), BoolExpr::disj(opts))});
      }
    }
  }
  return out;
}

inline RefinementTree tree_from_json(const nlohmann::json& j) {
  std::vector<std::string> nodes = j.at("nodes").get<std::vector<std::string>>();
  std::vector<RefinementTree::Edge> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  RefinementTree t = build_tree(nodes, edges);
  if (j.contains("root") && j.at("root").get<std::string>() != t.root())
    throw TreeError("declared root '" + j.at("root").get<std::string>() + "' differs from actual root '" +
                    t.root() + "'");
  return t;
}

inline nlohmann::json to_json(const RefinementTree& t) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : t.edges()) edges.push_back({a, b});
  return {{"root", t.root()}, {"nodes", t.nodes()}, {"edges", edges}};
}

inline std::string to_dot(const RefinementTree& t, const std::string& name = "refinement_tree") {
  std::string out = "digraph " + name + " {\n  rankdir=TB;\n";
  const auto p = partition(t);
  for (const auto& n : t.nodes())
    out += "  \"" + n + "\" [shape=" + (p.ground.count(n) ? "box" : "ellipse") + "];\n";
  for (const auto& [a, b] : t.edges()) out += "  \"" + a + "\" -> \"" + b + "\";\n";
  out += "}\n";
  return out;
}

}  // namespace gr1
