#pragma once
// Small random generators for property tests. Deterministic per seed.

#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "twinworld/kg_store.hpp"
#include "twinworld/nav_builder.hpp"

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Relation name -> group size, between 1 and `max_groups` groups.
inline std::map<std::string, std::size_t> group_sizes(Source& s, int max_groups = 12, int max_size = 5000) {
  std::map<std::string, std::size_t> out;
  int groups = s.integer(1, max_groups);
  for (int i = 0; i < groups; ++i) out["P" + std::to_string(i + 1)] = static_cast<std::size_t>(s.integer(1, max_size));
  return out;
}

// Symmetric adjacency matrix without self loops.
inline std::vector<std::vector<bool>> undirected_matrix(Source& s, int n, double p) {
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (s.coin(p)) adj[i][j] = adj[j][i] = true;
    }
  }
  return adj;
}

inline std::string node_id(int i) { return "Q" + std::to_string(1000 + i); }

// Knowledge graph with one entity per matrix row and one fact per edge, in a
// random direction.
inline twinworld::KnowledgeGraph graph_from_matrix(Source& s, const std::vector<std::vector<bool>>& adj) {
  std::vector<twinworld::Entity> ents;
  std::vector<twinworld::Fact> facts;
  const int n = static_cast<int>(adj.size());
  for (int i = 0; i < n; ++i) {
    twinworld::Entity e;
    e.id = node_id(i);
    e.label = "Node " + std::string(1, static_cast<char>('A' + i % 26)) + std::to_string(i);
    e.is_named = true;
    ents.push_back(e);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!adj[i][j]) continue;
      twinworld::Fact f;
      bool flip = s.coin();
      f.subject = node_id(flip ? j : i);
      f.property = "P" + std::to_string(s.integer(1, 4));
      f.property_label = "rel";
      f.object.entity = node_id(flip ? i : j);
      facts.push_back(f);
    }
  }
  return twinworld::KnowledgeGraph::build(ents, facts);
}

// Connected undirected graph as neighbour lists: a random spanning tree plus
// extra edges.
inline std::vector<std::vector<int>> connected_graph(Source& s, int n, double extra) {
  std::vector<std::set<int>> nb(n);
  for (int v = 1; v < n; ++v) {
    int u = s.integer(0, v - 1);
    nb[u].insert(v);
    nb[v].insert(u);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (s.coin(extra)) {
        nb[i].insert(j);
        nb[j].insert(i);
      }
    }
  }
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i) out[i].assign(nb[i].begin(), nb[i].end());
  return out;
}

// DocGraph whose links run both ways along every undirected edge.
inline twinworld::DocGraph doc_graph(const std::vector<std::vector<int>>& nbrs) {
  std::map<std::string, std::set<std::string>> links;
  for (std::size_t v = 0; v < nbrs.size(); ++v) {
    auto& l = links[node_id(static_cast<int>(v))];
    for (int w : nbrs[v]) l.insert(node_id(w));
  }
  return twinworld::DocGraph(links);
}

// Random directed link map over n pages.
inline std::map<std::string, std::set<std::string>> directed_links(Source& s, int n, double p) {
  std::map<std::string, std::set<std::string>> links;
  for (int i = 0; i < n; ++i) {
    auto& l = links[node_id(i)];
    for (int j = 0; j < n; ++j) {
      if (i != j && s.coin(p)) l.insert(node_id(j));
    }
  }
  return links;
}

// Timestamp "YYYY-MM-DD" with a valid day for the month.
inline std::string date(Source& s, int lo_year, int hi_year) {
  int y = s.integer(lo_year, hi_year);
  int m = s.integer(1, 12);
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  int dmax = days[m - 1] + (m == 2 && leap ? 1 : 0);
  int d = s.integer(1, dmax);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

// Random string over a small alphabet that includes multi-byte code points,
// so edits land on repeated letters and transpositions are common.
inline std::u32string code_points(Source& s, int max_len) {
  static const char32_t alphabet[] = {U'a', U'b', U'c', U'd', U' ', U'é', U'ß', U'世'};
  std::u32string out;
  int n = s.integer(0, max_len);
  for (int i = 0; i < n; ++i) out.push_back(alphabet[s.integer(0, 7)]);
  return out;
}

// Applies `edits` random substitutions, insertions, deletions or adjacent
// swaps to `base`.
inline std::u32string mutate(Source& s, std::u32string base, int edits) {
  static const char32_t alphabet[] = {U'a', U'b', U'c', U'x', U'é'};
  for (int e = 0; e < edits; ++e) {
    int op = s.integer(0, 3);
    if (base.empty()) op = 1;
    std::size_t pos = base.empty() ? 0 : static_cast<std::size_t>(s.integer(0, static_cast<int>(base.size()) - 1));
    char32_t c = alphabet[s.integer(0, 4)];
    switch (op) {
      case 0: base[pos] = c; break;
      case 1: base.insert(base.begin() + static_cast<std::ptrdiff_t>(pos), c); break;
      case 2: base.erase(pos, 1); break;
      default:
        if (pos + 1 < base.size()) std::swap(base[pos], base[pos + 1]);
        break;
    }
  }
  return base;
}

}  // namespace gen
