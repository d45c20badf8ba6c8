#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ktree/errors.hpp"
#include "ktree/omega.hpp"

namespace ktree {

enum class Color : unsigned char { White, Black };

// Bipartite labelled (k,Omega)-front coding tree.  White nodes carry derived
// front labels (only the root front is stored; the rest follow from the
// substitution rule), black nodes carry explicit integer labels.  Children of
// a white node are unordered between themselves; children of a black node are
// the k position-distinguished slots and are never reordered.
struct CodingTree {
  struct Node {
    Color color;
    int parent;  // -1 for the root
    int label;   // black label, -1 when unset (shapes) or white
    std::vector<int> children;
  };

  int k = 1;
  std::vector<int> root_front;  // ordered front labels; empty for pure shapes
  std::vector<Node> nodes;
  int root = 0;

  static CodingTree make_root(int k, std::vector<int> front = {}) {
    CodingTree c;
    c.k = k;
    c.root_front = std::move(front);
    c.nodes.push_back(Node{Color::White, -1, -1, {}});
    return c;
  }

  int add_node(Color color, int parent, int label = -1) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{color, parent, label, {}});
    if (parent >= 0) nodes[parent].children.push_back(id);
    return id;
  }

  int n_black() const {
    int n = 0;
    for (const Node& nd : nodes) n += nd.color == Color::Black;
    return n;
  }

  std::vector<int> black_ids() const {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
      if (nodes[i].color == Color::Black) ids.push_back(i);
    return ids;
  }

  // Sort the black children of every white node by label (the canonical form
  // of the unordered sibling sets).  Slot order under black nodes is kept.
  void sort_children_by_label() {
    for (Node& nd : nodes)
      if (nd.color == Color::White)
        std::sort(nd.children.begin(), nd.children.end(),
                  [&](int a, int b) { return nodes[a].label < nodes[b].label; });
  }

  // Ordered front tuple for every white node, by the substitution rule: the
  // i-th slot of a black node labelled r inherits the parent front with
  // position i replaced by r.  Index by node id; black entries stay empty.
  std::vector<std::vector<int>> propagate_fronts() const {
    std::vector<std::vector<int>> front(nodes.size());
    if (static_cast<int>(root_front.size()) != k)
      throw InvalidCodingTree("root front must have k labels");
    front[root] = root_front;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      for (int b : nodes[w].children) {
        const Node& bn = nodes[b];
        if (bn.label < 0) throw InvalidCodingTree("unlabelled black node");
        for (int i = 0; i < static_cast<int>(bn.children.size()); ++i) {
          const int cw = bn.children[i];
          front[cw] = front[w];
          front[cw][i] = bn.label;
          stack.push_back(cw);
        }
      }
    }
    return front;
  }

  // Structural and (when labelled) label invariants.  Pass omega to also
  // check the degree constraints.
  void validate(const OmegaSet* omega = nullptr) const {
    if (nodes.empty() || nodes[root].color != Color::White)
      throw InvalidCodingTree("root must be a white node");
    int blacks = 0;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const Node& nd = nodes[i];
      for (int ch : nodes[i].children) {
        if (nodes[ch].parent != i)
          throw InvalidCodingTree("broken parent link");
        if (nodes[ch].color == nd.color)
          throw InvalidCodingTree("color alternation violated");
      }
      if (nd.color == Color::Black) {
        ++blacks;
        if (static_cast<int>(nd.children.size()) != k)
          throw InvalidCodingTree("black node without exactly k white children");
      }
      if (omega && nd.color == Color::White) {
        const int d = static_cast<int>(nd.children.size());
        if (i == root ? !omega->contains(d) : !omega->out_contains(d))
          throw InvalidCodingTree("white outdegree outside the degree set");
      }
    }
    if (!root_front.empty()) {
      if (static_cast<int>(root_front.size()) != k)
        throw InvalidCodingTree("root front size != k");
      std::set<int> seen(root_front.begin(), root_front.end());
      if (static_cast<int>(seen.size()) != k)
        throw InvalidCodingTree("root front labels not distinct");
      for (const Node& nd : nodes)
        if (nd.color == Color::Black && !seen.insert(nd.label).second)
          throw InvalidCodingTree("duplicate label");
      const int total = blacks + k;
      for (int v : seen)
        if (v < 1 || v > total)
          throw InvalidCodingTree("labels must be exactly 1..n+k");
    }
  }
};

// Ordered rooted tree (the white plane tree of the coupling construction).
struct PlaneTree {
  struct Node {
    int parent;
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = 0;

  static PlaneTree single() {
    PlaneTree t;
    t.nodes.push_back(Node{-1, {}});
    return t;
  }

  int add_child(int parent) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{parent, {}});
    nodes[parent].children.push_back(id);
    return id;
  }

  int size() const { return static_cast<int>(nodes.size()); }

  // Build from a depth-first preorder outdegree sequence.
  static PlaneTree from_outdegrees(const std::vector<int>& degs) {
    PlaneTree t = single();
    std::vector<std::pair<int, int>> stack{{0, degs.at(0)}};  // node, children left
    std::size_t pos = 1;
    while (!stack.empty()) {
      auto& [v, left] = stack.back();
      if (left == 0) {
        stack.pop_back();
        continue;
      }
      --left;
      const int c = t.add_child(v);
      if (pos >= degs.size()) throw Error("outdegree sequence too short");
      stack.push_back({c, degs[pos++]});
    }
    if (pos != degs.size()) throw Error("outdegree sequence does not close");
    return t;
  }

  int height() const {
    std::vector<int> depth(nodes.size(), 0);
    int h = 0;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int c : nodes[v].children) {
        depth[c] = depth[v] + 1;
        h = std::max(h, depth[c]);
        stack.push_back(c);
      }
    }
    return h;
  }

  // Copy of the first h levels.
  PlaneTree truncated(int h) const {
    PlaneTree out = single();
    std::vector<std::pair<int, int>> stack;  // (node here, node in out)
    std::vector<int> depth(nodes.size(), 0);
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto [v, w] = stack.back();
      stack.pop_back();
      if (depth[v] >= h) continue;
      for (int c : nodes[v].children) {
        depth[c] = depth[v] + 1;
        stack.push_back({c, out.add_child(w)});
      }
    }
    return out;
  }
};

// Rooted labelled graph view of an Omega-k-tree.  Vertices are 1..n+k.
struct KTreeGraph {
  int k = 1;
  std::vector<int> root_front;           // ordered k-tuple
  std::vector<std::vector<int>> adj;     // adj[0] unused

  int vertex_count() const { return static_cast<int>(adj.size()) - 1; }
  int hedron_count() const { return vertex_count() - k; }

  void init_vertices(int n_vertices) {
    adj.assign(static_cast<std::size_t>(n_vertices) + 1, {});
  }

  void add_edge(int u, int v) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  bool has_edge(int u, int v) const {
    const auto& a = adj[u].size() <= adj[v].size() ? adj[u] : adj[v];
    const int t = adj[u].size() <= adj[v].size() ? v : u;
    return std::find(a.begin(), a.end(), t) != a.end();
  }

  void sort_neighbors() {
    for (auto& a : adj) std::sort(a.begin(), a.end());
  }

  // k-tree recognition by simplicial elimination: repeatedly delete a vertex
  // of degree k whose neighborhood is a clique, never touching the root
  // front, until only the root front remains.
  bool is_ktree() const {
    const int n = vertex_count();
    if (n < k) return false;
    std::vector<char> alive(n + 1, 1), in_front(n + 1, 0);
    for (int v : root_front) in_front[v] = 1;
    std::vector<int> degree(n + 1, 0);
    for (int v = 1; v <= n; ++v) degree[v] = static_cast<int>(adj[v].size());

    auto alive_neighbors = [&](int v) {
      std::vector<int> out;
      for (int u : adj[v])
        if (alive[u]) out.push_back(u);
      return out;
    };
    auto is_clique = [&](const std::vector<int>& vs) {
      for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j)
          if (!has_edge(vs[i], vs[j])) return false;
      return true;
    };

    std::vector<int> queue;
    for (int v = 1; v <= n; ++v)
      if (!in_front[v] && degree[v] == k) queue.push_back(v);
    int removed = 0;
    while (!queue.empty()) {
      const int v = queue.back();
      queue.pop_back();
      if (!alive[v] || in_front[v] || degree[v] != k) continue;
      const auto nb = alive_neighbors(v);
      if (static_cast<int>(nb.size()) != k || !is_clique(nb)) continue;
      alive[v] = 0;
      ++removed;
      for (int u : nb) {
        if (--degree[u] == k && !in_front[u]) queue.push_back(u);
      }
    }
    if (removed != n - k) return false;
    std::vector<int> rest;
    for (int v = 1; v <= n; ++v)
      if (alive[v]) rest.push_back(v);
    std::vector<int> front_sorted(root_front.begin(), root_front.end());
    std::sort(front_sorted.begin(), front_sorted.end());
    return rest == front_sorted && is_clique(rest);
  }
};

// --- bijection phi ---------------------------------------------------------

// Coding tree -> Omega-k-tree.  The vertex set is the root front plus the
// black labels; each hedron contributes the k edges between its new vertex
// and its attaching front.
inline KTreeGraph phi_inverse(const CodingTree& c) {
  c.validate();
  if (c.root_front.empty())
    throw InvalidCodingTree("phi_inverse needs a labelled coding tree");
  const auto fronts = c.propagate_fronts();
  const int n = c.n_black();
  KTreeGraph g;
  g.k = c.k;
  g.root_front = c.root_front;
  g.init_vertices(n + c.k);
  for (std::size_t i = 0; i < c.root_front.size(); ++i)
    for (std::size_t j = i + 1; j < c.root_front.size(); ++j)
      g.add_edge(c.root_front[i], c.root_front[j]);
  for (int b = 0; b < static_cast<int>(c.nodes.size()); ++b) {
    const auto& nd = c.nodes[b];
    if (nd.color != Color::Black) continue;
    for (int a : fronts[nd.parent]) g.add_edge(nd.label, a);
  }
  g.sort_neighbors();
  return g;
}

// Omega-k-tree -> coding tree, breadth-first over fronts and hedra from the
// root front.  Inverse of phi_inverse.
inline CodingTree phi(const KTreeGraph& g) {
  if (static_cast<int>(g.root_front.size()) != g.k)
    throw DisconnectedRoot("root front must list k vertices");
  for (std::size_t i = 0; i < g.root_front.size(); ++i)
    for (std::size_t j = i + 1; j < g.root_front.size(); ++j)
      if (!g.has_edge(g.root_front[i], g.root_front[j]))
        throw DisconnectedRoot("root front is not a clique");
  if (!g.is_ktree()) throw NotAKTree("simplicial elimination failed");

  const int total = g.vertex_count();
  CodingTree c = CodingTree::make_root(g.k, g.root_front);
  std::vector<int> cnt(total + 1, 0), last(total + 1, 0);
  int stamp = 0;

  struct Item {
    int white;
    std::vector<int> front;
    int exclude;  // vertex of the parent hedron not in this front, 0 if none
  };
  std::vector<Item> stack{{c.root, g.root_front, 0}};
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    // vertices adjacent to the whole front extend it to a hedron
    ++stamp;
    std::vector<int> candidates;
    for (int a : it.front) {
      for (int u : g.adj[a]) {
        if (last[u] != stamp) {
          last[u] = stamp;
          cnt[u] = 0;
        }
        if (++cnt[u] == g.k) candidates.push_back(u);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    for (int v : candidates) {
      if (v == it.exclude) continue;
      const int b = c.add_node(Color::Black, it.white, v);
      for (int i = 0; i < g.k; ++i) {
        const int w = c.add_node(Color::White, b);
        std::vector<int> child_front = it.front;
        const int dropped = child_front[i];
        child_front[i] = v;
        stack.push_back({w, std::move(child_front), dropped});
      }
    }
  }
  if (c.n_black() != g.hedron_count())
    throw NotAKTree("front search did not reach every hedron");
  c.sort_children_by_label();
  return c;
}

// --- construction psi -------------------------------------------------------

// Plane tree with all outdegrees divisible by k -> coding tree shape: the
// offspring of each vertex is split into consecutive groups of k, one black
// node inserted per group.
inline CodingTree psi(const PlaneTree& t, int k) {
  CodingTree c = CodingTree::make_root(k);
  std::vector<std::pair<int, int>> stack{{t.root, c.root}};  // plane node, white id
  while (!stack.empty()) {
    auto [v, w] = stack.back();
    stack.pop_back();
    const auto& ch = t.nodes[v].children;
    if (ch.size() % k != 0)
      throw BadOutdegree("outdegree not a multiple of k");
    for (std::size_t i = 0; i < ch.size(); i += k) {
      const int b = c.add_node(Color::Black, w);
      for (int j = 0; j < k; ++j)
        stack.push_back({ch[i + j], c.add_node(Color::White, b)});
    }
  }
  return c;
}

// Inverse: contract every black node, concatenating its k white children in
// slot order into the parent's child list.
inline PlaneTree psi_inverse(const CodingTree& c) {
  PlaneTree t = PlaneTree::single();
  // map white id -> plane id, process whites in DFS order preserving order
  std::vector<int> plane_of(c.nodes.size(), -1);
  plane_of[c.root] = t.root;
  std::vector<int> stack{c.root};
  while (!stack.empty()) {
    const int w = stack.back();
    stack.pop_back();
    std::vector<int> grandchildren;
    for (int b : c.nodes[w].children)
      for (int cw : c.nodes[b].children) grandchildren.push_back(cw);
    for (int cw : grandchildren) plane_of[cw] = t.add_child(plane_of[w]);
    for (auto it = grandchildren.rbegin(); it != grandchildren.rend(); ++it)
      stack.push_back(*it);
  }
  return t;
}

// --- black tree -------------------------------------------------------------

// Tree on the black nodes: every white node is contracted away, each black
// node's parent being its white parent's black parent.  A coding tree whose
// root has r >= 2 black children yields a forest; we attach a virtual root in
// that case and flag it so distance statistics can skip it.
struct BlackTree {
  std::vector<int> coding_node;            // black index -> coding node id
  std::vector<int> parent;                 // -1 for the root
  std::vector<std::vector<int>> children;  // black index -> child indices
  std::vector<int> label;
  bool has_virtual_root = false;  // children of index 0 are the root blacks
  int root = 0;

  int size() const { return static_cast<int>(parent.size()) - (has_virtual_root ? 1 : 0); }
};

inline BlackTree black_tree(const CodingTree& c) {
  BlackTree t;
  const auto& root_children = c.nodes[c.root].children;
  t.has_virtual_root = root_children.size() != 1;
  std::vector<int> index_of(c.nodes.size(), -1);
  auto push = [&](int coding_id, int parent_idx) {
    const int idx = static_cast<int>(t.parent.size());
    t.coding_node.push_back(coding_id);
    t.parent.push_back(parent_idx);
    t.children.emplace_back();
    t.label.push_back(coding_id >= 0 ? c.nodes[coding_id].label : -1);
    if (parent_idx >= 0) t.children[parent_idx].push_back(idx);
    if (coding_id >= 0) index_of[coding_id] = idx;
    return idx;
  };
  if (t.has_virtual_root) push(-1, -1);
  std::vector<int> stack;
  for (auto it = root_children.rbegin(); it != root_children.rend(); ++it)
    stack.push_back(*it);
  // DFS so that a black's parent black is indexed before it
  std::vector<int> order;
  while (!stack.empty()) {
    const int b = stack.back();
    stack.pop_back();
    order.push_back(b);
    for (int w : c.nodes[b].children)
      for (int bb : c.nodes[w].children) stack.push_back(bb);
  }
  for (int b : order) {
    const int pw = c.nodes[b].parent;
    const int pb = c.nodes[pw].parent;
    const int parent_idx = pb < 0 ? (t.has_virtual_root ? 0 : -1) : index_of[pb];
    push(b, parent_idx);
  }
  t.root = 0;
  return t;
}

// --- canonical codes --------------------------------------------------------

enum class CodeMode {
  Labeled,         // sibling blacks sorted by label, labels embedded
  ShapeSlotted,    // labels dropped, slot order under blacks kept
  ShapeUnordered,  // labels dropped, all sibling lists sorted (AHU)
};

namespace detail {

// AHU-style code over an arbitrary child-list tree.  Iterative post-order so
// deep paths cannot blow the call stack.  `sort_at(v)` says whether v's child
// codes are order-free (sorted) or positional (kept as-is).
template <typename ChildrenOf, typename Decorate, typename SortAt>
std::string tree_code(int root, ChildrenOf&& children_of, Decorate&& decorate,
                      SortAt&& sort_at) {
  struct Frame {
    int node;
    std::size_t next = 0;
    std::vector<std::string> parts;
  };
  std::vector<Frame> stack;
  stack.push_back({root});
  std::string result;
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& ch = children_of(f.node);
    if (f.next < ch.size()) {
      stack.push_back({ch[f.next++]});
      continue;
    }
    if (sort_at(f.node)) std::sort(f.parts.begin(), f.parts.end());
    std::string code = decorate(f.node) + "(";
    for (const auto& p : f.parts) code += p;
    code += ")";
    stack.pop_back();
    if (stack.empty())
      result = std::move(code);
    else
      stack.back().parts.push_back(std::move(code));
  }
  return result;
}

}  // namespace detail

// Canonical strings for coding trees.  Black children of a white node are
// unordered, so they are always emitted sorted; the k slots under a black
// node are positional and stay put except in ShapeUnordered, which quotients
// them too (a graph-isomorphism invariant of the underlying k-tree).
inline std::string canonical_code(const CodingTree& c, CodeMode mode) {
  auto children_of = [&](int v) -> const std::vector<int>& {
    return c.nodes[v].children;
  };
  auto sort_whites_only = [&](int v) { return c.nodes[v].color == Color::White; };
  switch (mode) {
    case CodeMode::Labeled:
      return detail::tree_code(
          c.root, children_of,
          [&](int v) {
            return c.nodes[v].color == Color::Black
                       ? std::to_string(c.nodes[v].label)
                       : std::string();
          },
          sort_whites_only);
    case CodeMode::ShapeSlotted:
      return detail::tree_code(
          c.root, children_of, [](int) { return std::string(); },
          sort_whites_only);
    case CodeMode::ShapeUnordered:
      return detail::tree_code(
          c.root, children_of, [](int) { return std::string(); },
          [](int) { return true; });
  }
  return {};
}

// Rooted-tree codes: equal strings iff isomorphic as rooted (ordered or
// unordered) trees.
inline std::string canonical_code(const PlaneTree& t, bool ordered = false) {
  return detail::tree_code(
      t.root, [&](int v) -> const std::vector<int>& { return t.nodes[v].children; },
      [](int) { return std::string(); }, [&](int) { return !ordered; });
}

inline std::string canonical_code(const BlackTree& t) {
  return detail::tree_code(
      t.root, [&](int v) -> const std::vector<int>& { return t.children[v]; },
      [](int) { return std::string(); }, [](int) { return true; });
}

// --- serialization ----------------------------------------------------------

inline std::string ktree_edge_list(const KTreeGraph& g) {
  std::string s = "# ktree k=" + std::to_string(g.k) +
                  " n=" + std::to_string(g.hedron_count()) + " root=";
  for (std::size_t i = 0; i < g.root_front.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(g.root_front[i]);
  }
  s += "\n";
  for (int u = 1; u <= g.vertex_count(); ++u)
    for (int v : g.adj[u])
      if (u < v) s += std::to_string(u) + " " + std::to_string(v) + "\n";
  return s;
}

namespace detail {

// Nested-parentheses shape with colors implied by alternation.
inline std::string coding_shape_string(const CodingTree& c) {
  return tree_code(
      c.root, [&](int v) -> const std::vector<int>& { return c.nodes[v].children; },
      [](int) { return std::string(); }, [](int) { return false; });
}

}  // namespace detail

inline nlohmann::json coding_tree_to_json(const CodingTree& c) {
  nlohmann::json j;
  j["k"] = c.k;
  j["root_front"] = c.root_front;
  j["shape"] = detail::coding_shape_string(c);
  std::vector<int> labels;
  // preorder black labels, matching the shape string's traversal
  std::vector<int> stack{c.root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (c.nodes[v].color == Color::Black) labels.push_back(c.nodes[v].label);
    const auto& ch = c.nodes[v].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  j["black_labels"] = labels;
  return j;
}

inline CodingTree coding_tree_from_json(const nlohmann::json& j) {
  const int k = j.at("k").get<int>();
  CodingTree c = CodingTree::make_root(k, j.at("root_front").get<std::vector<int>>());
  const std::string shape = j.at("shape").get<std::string>();
  const auto labels = j.at("black_labels").get<std::vector<int>>();
  std::size_t li = 0;
  std::vector<int> stack{c.root};
  for (std::size_t i = 1; i + 1 < shape.size(); ++i) {
    if (shape[i] == '(') {
      const int parent = stack.back();
      const Color color =
          c.nodes[parent].color == Color::White ? Color::Black : Color::White;
      int label = -1;
      if (color == Color::Black) {
        if (li >= labels.size()) throw Error("coding tree json: labels short");
        label = labels[li++];
      }
      stack.push_back(c.add_node(color, parent, label));
    } else if (shape[i] == ')') {
      stack.pop_back();
    } else {
      throw Error("coding tree json: bad shape string");
    }
  }
  c.validate();
  return c;
}

}  // namespace ktree
