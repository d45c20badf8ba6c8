#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ktree/errors.hpp"
#include "ktree/rng.hpp"
#include "ktree/trees.hpp"

namespace ktree {

// --- Algorithm 1: distances in an Omega-k-tree -------------------------------

// Distance marks: one integer per black node, one k-tuple per white node.
struct DistanceTable {
  std::vector<int> black_dist;             // node id -> distance, -1 on whites
  std::vector<std::vector<int>> white_seq; // node id -> sequence, empty on blacks
  std::vector<int> by_label;               // vertex label -> distance

  int dist_of_label(int v) const { return by_label.at(v); }
};

// Recursive marking rule p := min(a_i) + 1 with child-sequence substitution
// at the child's slot.  The default input sequence (0, 1^{k-1}) yields exact
// distances to vertex 1; (0^k) yields distances to the root front.
inline DistanceTable algorithm1(const CodingTree& c,
                                std::vector<int> root_seq = {}) {
  if (root_seq.empty()) {
    root_seq.assign(c.k, 1);
    root_seq[0] = 0;
  }
  if (static_cast<int>(root_seq.size()) != c.k)
    throw Error("algorithm1: root sequence must have k entries");
  DistanceTable dt;
  dt.black_dist.assign(c.nodes.size(), -1);
  dt.white_seq.assign(c.nodes.size(), {});
  dt.white_seq[c.root] = root_seq;
  const bool labelled = !c.root_front.empty();
  if (labelled) {
    dt.by_label.assign(c.n_black() + c.k + 1, -1);
    for (int i = 0; i < c.k; ++i) dt.by_label[c.root_front[i]] = root_seq[i];
  }
  std::vector<int> stack{c.root};
  while (!stack.empty()) {
    const int w = stack.back();
    stack.pop_back();
    const auto& seq = dt.white_seq[w];
    int p = seq[0];
    for (int v : seq) p = std::min(p, v);
    ++p;
    for (int b : c.nodes[w].children) {
      dt.black_dist[b] = p;
      if (labelled) dt.by_label[c.nodes[b].label] = p;
      const auto& slots = c.nodes[b].children;
      for (int i = 0; i < static_cast<int>(slots.size()); ++i) {
        dt.white_seq[slots[i]] = seq;
        dt.white_seq[slots[i]][i] = p;
        stack.push_back(slots[i]);
      }
    }
  }
  return dt;
}

// --- BFS ground truth ---------------------------------------------------------

inline std::vector<int> bfs_distances(const KTreeGraph& g,
                                      const std::vector<int>& sources) {
  std::vector<int> dist(g.vertex_count() + 1, -1);
  std::deque<int> queue;
  for (int s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : g.adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

inline std::vector<int> bfs_distances(const KTreeGraph& g, int src) {
  return bfs_distances(g, std::vector<int>{src});
}

// --- block decomposition -------------------------------------------------------

struct BlockDecomposition {
  struct Block {
    int root_white;  // node id of the block's root white node
    int level;       // blacks in this block sit at this distance
    int parent;      // block index, -1 for the first block
    int depth;       // in the block tree
    std::vector<int> blacks;
    int good_count = 0;
  };
  std::vector<Block> blocks;
  std::vector<int> block_of;  // node id -> block index (blacks only, else -1)

  int block_tree_distance(int bx, int by) const {
    int a = bx, b = by, d = 0;
    while (blocks[a].depth > blocks[b].depth) {
      a = blocks[a].parent;
      ++d;
    }
    while (blocks[b].depth > blocks[a].depth) {
      b = blocks[b].parent;
      ++d;
    }
    while (a != b) {
      a = blocks[a].parent;
      b = blocks[b].parent;
      d += 2;
    }
    return d;
  }
};

// Partition the black nodes into blocks: the first block is rooted at the
// tree root, every other one at a white node with a constant distance
// sequence; a black node is good when one of its white children carries a
// constant sequence.
inline BlockDecomposition block_decompose(const CodingTree& c,
                                          const DistanceTable& dt) {
  BlockDecomposition bd;
  bd.block_of.assign(c.nodes.size(), -1);
  const auto constant_seq = [&](int w) {
    const auto& s = dt.white_seq[w];
    for (int v : s)
      if (v != s[0]) return false;
    return true;
  };
  int root_min = dt.white_seq[c.root][0];
  for (int v : dt.white_seq[c.root]) root_min = std::min(root_min, v);
  bd.blocks.push_back({c.root, root_min + 1, -1, 0, {}, 0});
  std::vector<std::pair<int, int>> stack{{c.root, 0}};  // white, block index
  while (!stack.empty()) {
    auto [w, blk] = stack.back();
    stack.pop_back();
    for (int b : c.nodes[w].children) {
      bd.block_of[b] = blk;
      bd.blocks[blk].blacks.push_back(b);
      bool good = false;
      for (int cw : c.nodes[b].children) good |= constant_seq(cw);
      bd.blocks[blk].good_count += good;
      for (int cw : c.nodes[b].children) {
        if (constant_seq(cw)) {
          const int nb = static_cast<int>(bd.blocks.size());
          bd.blocks.push_back({cw, dt.white_seq[cw][0] + 1, blk,
                               bd.blocks[blk].depth + 1, {}, 0});
          stack.push_back({cw, nb});
        } else {
          stack.push_back({cw, blk});
        }
      }
    }
  }
  return bd;
}

// delta(x, y): one less than the minimal number of blocks covering the path
// between two black nodes; equals their block-tree distance.
inline int block_distance(const BlockDecomposition& bd, int black_x, int black_y) {
  return bd.block_tree_distance(bd.block_of.at(black_x), bd.block_of.at(black_y));
}

// --- dist vs delta (the transfer lemma) ----------------------------------------

struct DistDeltaReport {
  std::array<std::uint64_t, 4> histogram{};  // counts of i = dist - delta
  std::uint64_t pairs = 0;
};

// Check dist_G(x,y) = delta(x,y) + i with i in {0,1,2,3} over black pairs,
// exhaustively or on sampled sources when a budget is given.
inline DistDeltaReport check_dist_delta(const KTreeGraph& g, const CodingTree& c,
                                        const BlockDecomposition& bd,
                                        RngHandle* rng = nullptr,
                                        std::uint64_t pair_budget = 0) {
  DistDeltaReport rep;
  const auto blacks = c.black_ids();
  const int nb = static_cast<int>(blacks.size());
  if (nb < 2) return rep;
  std::vector<int> source_ids;
  if (pair_budget == 0 || !rng) {
    source_ids.resize(nb);
    for (int i = 0; i < nb; ++i) source_ids[i] = i;
  } else {
    const std::uint64_t wanted = (pair_budget + nb - 1) / nb;
    for (std::uint64_t s = 0; s < wanted; ++s)
      source_ids.push_back(static_cast<int>(rng->below(nb)));
  }
  for (int si : source_ids) {
    const int x = blacks[si];
    const auto dist = bfs_distances(g, c.nodes[x].label);
    for (int yj = 0; yj < nb; ++yj) {
      const int y = blacks[yj];
      if (y == x) continue;
      const int d = dist[c.nodes[y].label];
      const int delta = block_distance(bd, x, y);
      const int i = d - delta;
      if (i < 0 || i > 3)
        throw LemmaViolation("dist - delta = " + std::to_string(i) +
                             " outside {0,1,2,3}");
      ++rep.histogram[static_cast<std::size_t>(i)];
      ++rep.pairs;
    }
  }
  return rep;
}

// --- Gromov-Hausdorff, brute force ---------------------------------------------

struct FiniteMetricSpace {
  std::vector<std::vector<double>> d;
  int base = 0;

  int size() const { return static_cast<int>(d.size()); }

  void validate(double tol = 1e-9) const {
    const int n = size();
    for (int i = 0; i < n; ++i) {
      if (std::abs(d[i][i]) > tol) throw Error("metric: nonzero diagonal");
      for (int j = 0; j < n; ++j) {
        if (d[i][j] < -tol) throw Error("metric: negative distance");
        if (std::abs(d[i][j] - d[j][i]) > tol) throw Error("metric: asymmetric");
        for (int l = 0; l < n; ++l)
          if (d[i][j] > d[i][l] + d[l][j] + tol)
            throw Error("metric: triangle inequality violated");
      }
    }
  }

  static FiniteMetricSpace from_graph(const KTreeGraph& g) {
    FiniteMetricSpace m;
    const int n = g.vertex_count();
    m.d.assign(n, std::vector<double>(n, 0.0));
    for (int v = 1; v <= n; ++v) {
      const auto dist = bfs_distances(g, v);
      for (int u = 1; u <= n; ++u) m.d[v - 1][u - 1] = dist[u];
    }
    return m;
  }
};

struct GhOptions {
  bool pointed = false;
  int cap = 7;
};

// Exact d_GH by minimizing the distortion over correspondences of the form
// graph(f) with graph(g) transposed; distortion is monotone under taking
// sub-correspondences, so this family attains the infimum.
inline double gh_bruteforce(const FiniteMetricSpace& X, const FiniteMetricSpace& Y,
                            const GhOptions& opts = {}) {
  const int nx = X.size(), ny = Y.size();
  if (nx > opts.cap || ny > opts.cap)
    throw TooLarge("gh_bruteforce capped at " + std::to_string(opts.cap) +
                   " points");
  if (nx == 0 || ny == 0) throw Error("empty metric space");

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> f(nx, 0), g(ny, 0);
  const auto cross = [&](const std::vector<int>& ff, const std::vector<int>& gg) {
    double m = 0.0;
    // pairs inside graph(f)
    for (int a = 0; a < nx; ++a)
      for (int b = a + 1; b < nx; ++b)
        m = std::max(m, std::abs(X.d[a][b] - Y.d[ff[a]][ff[b]]));
    // pairs inside graph(g)
    for (int a = 0; a < ny; ++a)
      for (int b = a + 1; b < ny; ++b)
        m = std::max(m, std::abs(X.d[gg[a]][gg[b]] - Y.d[a][b]));
    // mixed pairs
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < ny; ++b)
        m = std::max(m, std::abs(X.d[a][gg[b]] - Y.d[ff[a]][b]));
    return m;
  };

  for (;;) {
    if (!opts.pointed || f[X.base] == Y.base) {
      for (;;) {
        if (!opts.pointed || g[Y.base] == X.base)
          best = std::min(best, cross(f, g));
        int i = 0;
        while (i < ny && ++g[i] == nx) g[i++] = 0;
        if (i == ny) break;
      }
    }
    int i = 0;
    while (i < nx && ++f[i] == ny) f[i++] = 0;
    if (i == nx) break;
  }
  return best / 2.0;
}

// --- neighborhoods and the local metric -----------------------------------------

// Ancestry-closed sub-coding-tree of the blacks selected by `keep` (a black
// survives only if its black ancestors do too).
inline CodingTree coding_subtree(const CodingTree& c,
                                 const std::vector<char>& keep) {
  CodingTree out = CodingTree::make_root(c.k, c.root_front);
  std::vector<std::pair<int, int>> stack{{c.root, out.root}};
  while (!stack.empty()) {
    auto [w, ow] = stack.back();
    stack.pop_back();
    for (int b : c.nodes[w].children) {
      if (!keep[b]) continue;
      const int ob = out.add_node(Color::Black, ow, c.nodes[b].label);
      for (int cw : c.nodes[b].children)
        stack.push_back({cw, out.add_node(Color::White, ob)});
    }
  }
  return out;
}

// U_ell as a sub-coding-tree: the hedra whose new vertex lies within graph
// distance ell of the root front.  Front distance marks come from Algorithm 1
// with the all-zero input sequence.
inline CodingTree neighborhood_subtree(const CodingTree& c, int ell) {
  const DistanceTable dt = algorithm1(c, std::vector<int>(c.k, 0));
  std::vector<char> keep(c.nodes.size(), 0);
  for (int b = 0; b < static_cast<int>(c.nodes.size()); ++b)
    if (c.nodes[b].color == Color::Black)
      keep[b] = dt.black_dist[b] <= ell;
  return coding_subtree(c, keep);
}

inline std::string neighborhood_code(const CodingTree& c, int ell) {
  return canonical_code(neighborhood_subtree(c, ell), CodeMode::ShapeUnordered);
}

struct NeighborhoodResult {
  std::vector<int> vertices;  // sorted vertex labels of U_ell
  std::string code;           // canonical form, unlabeled and front-rooted
};

// U_ell of a front-rooted Omega-k-tree: the induced subgraph on all vertices
// within distance ell (min over the front) of the root front, reported as the
// vertex list plus the canonical code of the matching coding subtree.
inline NeighborhoodResult neighborhood(const KTreeGraph& g, int ell) {
  NeighborhoodResult res;
  const auto dist = bfs_distances(g, g.root_front);
  for (int v = 1; v <= g.vertex_count(); ++v)
    if (dist[v] >= 0 && dist[v] <= ell) res.vertices.push_back(v);
  res.code = neighborhood_code(phi(g), ell);
  return res;
}

namespace detail {

// Exact rooted-isomorphism test on small graphs: map roots to roots
// (setwise), then extend by backtracking with degree pruning.
inline bool rooted_graph_isomorphic(const std::vector<std::vector<int>>& a,
                                    const std::vector<char>& root_a,
                                    const std::vector<std::vector<int>>& b,
                                    const std::vector<char>& root_b) {
  const int n = static_cast<int>(a.size());
  if (static_cast<int>(b.size()) != n) return false;
  std::vector<int> map_ab(n, -1), map_ba(n, -1), order;
  // BFS order from the roots keeps the partial mapping connected
  {
    std::vector<char> seen(n, 0);
    std::deque<int> q;
    for (int v = 0; v < n; ++v)
      if (root_a[v]) {
        q.push_back(v);
        seen[v] = 1;
      }
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      order.push_back(v);
      for (int u : a[v])
        if (!seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
    }
    if (static_cast<int>(order.size()) != n) return false;  // disconnected
  }
  const std::function<bool(std::size_t)> extend = [&](std::size_t pos) -> bool {
    if (pos == order.size()) return true;
    const int v = order[pos];
    for (int w = 0; w < n; ++w) {
      if (map_ba[w] >= 0) continue;
      if (root_a[v] != root_b[w]) continue;
      if (a[v].size() != b[w].size()) continue;
      bool ok = true;
      for (int u : a[v]) {
        if (map_ab[u] < 0) continue;
        bool adj = false;
        for (int x : b[w]) adj |= (x == map_ab[u]);
        if (!adj) {
          ok = false;
          break;
        }
      }
      if (ok) {
        int mapped_neighbors_v = 0, mapped_neighbors_w = 0;
        for (int u : a[v]) mapped_neighbors_v += map_ab[u] >= 0;
        for (int x : b[w]) mapped_neighbors_w += map_ba[x] >= 0;
        if (mapped_neighbors_v != mapped_neighbors_w) ok = false;
      }
      if (!ok) continue;
      map_ab[v] = w;
      map_ba[w] = v;
      if (extend(pos + 1)) return true;
      map_ab[v] = -1;
      map_ba[w] = -1;
    }
    return false;
  };
  return extend(0);
}

// Induced subgraph of the vertices within distance ell of the root front,
// locally re-indexed, with root flags.
inline std::pair<std::vector<std::vector<int>>, std::vector<char>>
induced_ball(const KTreeGraph& g, int ell) {
  const auto dist = bfs_distances(g, g.root_front);
  std::vector<int> local(g.vertex_count() + 1, -1);
  std::vector<int> verts;
  for (int v = 1; v <= g.vertex_count(); ++v)
    if (dist[v] >= 0 && dist[v] <= ell) {
      local[v] = static_cast<int>(verts.size());
      verts.push_back(v);
    }
  std::vector<std::vector<int>> adj(verts.size());
  std::vector<char> roots(verts.size(), 0);
  for (int v : g.root_front) roots[local[v]] = 1;
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (int u : g.adj[verts[i]])
      if (local[u] >= 0) adj[i].push_back(local[u]);
  return {std::move(adj), std::move(roots)};
}

}  // namespace detail

struct LocalMetricValue {
  double value;  // 2^{-m*}, or the 2^{-cap} bound when all levels agree
  bool exact;    // false when every U_m up to the cap matched
};

// d(G*, H*) = 2^{-sup{m <= cap : U_m isomorphic}}.  U_0 is the root front in
// both graphs, so the value is at most 1; when every level up to the cap
// matches the result is only an upper bound.
inline LocalMetricValue local_metric(const KTreeGraph& a, const KTreeGraph& b,
                                     int cap) {
  int agree = -1;
  for (int m = 0; m <= cap; ++m) {
    auto [adj_a, roots_a] = detail::induced_ball(a, m);
    auto [adj_b, roots_b] = detail::induced_ball(b, m);
    if (!detail::rooted_graph_isomorphic(adj_a, roots_a, adj_b, roots_b)) break;
    agree = m;
  }
  if (agree < 0) return {1.0, true};  // not even the fronts match
  if (agree == cap) return {std::pow(2.0, -cap), false};
  return {std::pow(2.0, -agree), true};
}

// --- scalar tree statistics -----------------------------------------------------

struct TreeStats {
  int height = 0;            // eccentricity of vertex 1
  int diameter = 0;          // exact below the cap, sampled lower bound above
  int root_to_uniform = 0;   // distance vertex 1 -> uniform vertex
  int uniform_pair = 0;      // distance between two uniform vertices
  bool diameter_exact = true;
};

inline TreeStats tree_stats(const KTreeGraph& g, RngHandle& rng,
                            int exact_diameter_cap = 2048) {
  TreeStats st;
  const int n = g.vertex_count();
  const auto d1 = bfs_distances(g, 1);
  for (int v = 1; v <= n; ++v) st.height = std::max(st.height, d1[v]);
  st.root_to_uniform = d1[1 + static_cast<int>(rng.below(n))];
  const int u = 1 + static_cast<int>(rng.below(n));
  const int v = 1 + static_cast<int>(rng.below(n));
  st.uniform_pair = bfs_distances(g, u)[v];
  if (n <= exact_diameter_cap) {
    for (int s = 1; s <= n; ++s) {
      const auto ds = bfs_distances(g, s);
      for (int t = 1; t <= n; ++t) st.diameter = std::max(st.diameter, ds[t]);
    }
  } else {
    st.diameter_exact = false;
    int far = 1;
    for (int v2 = 1; v2 <= n; ++v2)
      if (d1[v2] > d1[far]) far = v2;
    const auto d2 = bfs_distances(g, far);  // double sweep from a far vertex
    for (int v2 = 1; v2 <= n; ++v2) st.diameter = std::max(st.diameter, d2[v2]);
    for (int s = 0; s < 64; ++s) {
      const auto ds = bfs_distances(g, 1 + static_cast<int>(rng.below(n)));
      for (int t = 1; t <= n; ++t) st.diameter = std::max(st.diameter, ds[t]);
    }
  }
  return st;
}

// Height and exact diameter of the black tree (double BFS is exact on trees).
struct BlackTreeStats {
  int height = 0;
  int diameter = 0;
};

inline BlackTreeStats black_tree_stats(const BlackTree& t) {
  BlackTreeStats st;
  const int n = static_cast<int>(t.parent.size());
  if (n == 0) return st;
  const auto bfs = [&](int src) {
    std::vector<int> dist(n, -1);
    std::deque<int> q{src};
    dist[src] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      if (t.parent[v] >= 0 && dist[t.parent[v]] < 0) {
        dist[t.parent[v]] = dist[v] + 1;
        q.push_back(t.parent[v]);
      }
      for (int c : t.children[v])
        if (dist[c] < 0) {
          dist[c] = dist[v] + 1;
          q.push_back(c);
        }
    }
    return dist;
  };
  const auto d0 = bfs(t.root);
  int far = t.root;
  for (int v = 0; v < n; ++v) {
    st.height = std::max(st.height, d0[v]);
    if (d0[v] > d0[far]) far = v;
  }
  const auto d1 = bfs(far);
  for (int v = 0; v < n; ++v) st.diameter = std::max(st.diameter, d1[v]);
  return st;
}

}  // namespace ktree
