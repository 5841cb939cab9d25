#pragma once
// Reference implementations used to check the library. Each one is written
// the slow, obvious way and shares no code with src/.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

// p(r) = n_r^a / sum n^a with a = 1 - uniformity, in 50-digit arithmetic.
inline std::map<std::string, big> relation_distribution(const std::map<std::string, std::size_t>& sizes,
                                                        double uniformity) {
  big alpha = big(1) - big(uniformity);
  std::map<std::string, big> p;
  big total = 0;
  for (const auto& [r, n] : sizes) {
    if (n == 0) continue;
    big w = boost::multiprecision::pow(big(n), alpha);
    p[r] = w;
    total += w;
  }
  for (auto& [r, w] : p) w /= total;
  return p;
}

// Repeatedly deletes every vertex of degree < k until nothing changes.
// Adjacency matrix over vertices 0..n-1.
inline std::set<int> k_core(const std::vector<std::vector<bool>>& adj, int k) {
  const int n = static_cast<int>(adj.size());
  std::vector<bool> alive(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      int d = 0;
      for (int w = 0; w < n; ++w) d += (w != v && alive[w] && adj[v][w]) ? 1 : 0;
      if (d < k) {
        alive[v] = false;
        changed = true;
      }
    }
  }
  std::set<int> out;
  for (int v = 0; v < n; ++v) {
    if (alive[v]) out.insert(v);
  }
  return out;
}

// Optimal string alignment distance, full (|a|+1) x (|b|+1) table.
inline std::size_t osa_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  }
  return d[a.size()][b.size()];
}

inline std::string utf8(const std::u32string& s) {
  std::string out;
  for (char32_t c : s) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

// Mean number of steps of a simple random walk on an undirected graph from
// `source` until it first reaches `target`, averaged over `walks` runs.
inline double monte_carlo_hitting_time(const std::vector<std::vector<int>>& nbrs, int source, int target, int walks,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double total = 0.0;
  for (int w = 0; w < walks; ++w) {
    int v = source;
    long steps = 0;
    while (v != target) {
      const auto& n = nbrs[v];
      v = n[std::uniform_int_distribution<std::size_t>(0, n.size() - 1)(rng)];
      ++steps;
    }
    total += static_cast<double>(steps);
  }
  return total / walks;
}

// Directed BFS distances from `source`; -1 when unreachable.
inline std::vector<int> bfs_distances(const std::vector<std::vector<int>>& out, int source) {
  std::vector<int> dist(out.size(), -1);
  std::deque<int> q{source};
  dist[source] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : out[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace oracle
