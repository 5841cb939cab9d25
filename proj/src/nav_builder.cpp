#include "twinworld/nav_builder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "twinworld/errors.hpp"
#include "twinworld/text.hpp"

namespace twinworld {

using nlohmann::json;

DocGraph::DocGraph(const std::map<std::string, std::set<std::string>>& links) {
  std::set<std::string> all;
  for (const auto& [u, targets] : links) {
    all.insert(u);
    all.insert(targets.begin(), targets.end());
  }
  ids_.assign(all.begin(), all.end());
  for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = i;
  out_.resize(ids_.size());
  std::vector<std::set<std::size_t>> und(ids_.size());
  for (const auto& [u, targets] : links) {
    std::size_t a = index_.at(u);
    for (const auto& t : targets) {
      std::size_t b = index_.at(t);
      if (a == b) continue;
      out_[a].push_back(b);
      und[a].insert(b);
      und[b].insert(a);
    }
    std::sort(out_[a].begin(), out_[a].end());
    out_[a].erase(std::unique(out_[a].begin(), out_[a].end()), out_[a].end());
  }
  und_.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) und_[i].assign(und[i].begin(), und[i].end());
}

std::optional<std::size_t> DocGraph::index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::set<std::pair<std::string, std::string>> DocGraph::edges() const {
  std::set<std::pair<std::string, std::string>> e;
  for (std::size_t a = 0; a < out_.size(); ++a) {
    for (std::size_t b : out_[a]) e.emplace(ids_[a], ids_[b]);
  }
  return e;
}

std::size_t DocGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& o : out_) n += o.size();
  return n;
}

std::vector<std::size_t> DocGraph::bfs_path(std::size_t from, std::size_t to) const {
  std::vector<std::size_t> parent(size(), SIZE_MAX);
  std::deque<std::size_t> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    if (v == to) break;
    for (std::size_t w : out_[v]) {
      if (parent[w] == SIZE_MAX) {
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  if (parent[to] == SIZE_MAX) return {};
  std::vector<std::size_t> path{to};
  while (path.back() != from) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<int> DocGraph::shortest_path(std::size_t from, std::size_t to) const {
  auto p = bfs_path(from, to);
  if (p.empty()) return std::nullopt;
  return static_cast<int>(p.size()) - 1;
}

DocGraph build_doc_graph(const Corpus& corpus, Variant v) { return DocGraph(corpus.hyperlinks(v)); }

HittingTimes::HittingTimes(const DocGraph& g, std::size_t target, double tolerance) {
  const std::size_t n = g.size();
  if (target >= n) throw InputError("hitting time target out of range");
  h_.assign(n, kUnreachable);
  h_[target] = 0.0;

  // Undirected component of the target; everything else never hits it.
  std::vector<char> in_comp(n, 0);
  std::deque<std::size_t> queue{target};
  in_comp[target] = 1;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : g.neighbors(v)) {
      if (!in_comp[w]) {
        in_comp[w] = 1;
        queue.push_back(w);
      }
    }
  }
  std::vector<long> col(n, -1);
  std::vector<std::size_t> unknowns;
  for (std::size_t v = 0; v < n; ++v) {
    if (in_comp[v] && v != target) {
      col[v] = static_cast<long>(unknowns.size());
      unknowns.push_back(v);
    }
  }
  const auto m = static_cast<Eigen::Index>(unknowns.size());
  if (m == 0) return;

  // deg(u) h_u - sum_{w ~ u, w != t} h_w = deg(u)
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    std::size_t u = unknowns[static_cast<std::size_t>(r)];
    const auto& nb = g.neighbors(u);
    auto deg = static_cast<double>(nb.size());
    trips.emplace_back(r, r, deg);
    b[r] = deg;
    for (std::size_t w : nb) {
      if (w != target) trips.emplace_back(r, col[w], -1.0);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::input, "hitting-time factorisation failed");
  Eigen::VectorXd x = solver.solve(b);
  auto rel_residual = [&] { return (A * x - b).norm() / b.norm(); };
  residual_ = rel_residual();
  for (int k = 0; k < 3 && residual_ > tolerance; ++k) {
    x += solver.solve(b - A * x);
    residual_ = rel_residual();
  }
  if (!(residual_ <= tolerance)) {
    throw Error(ErrorKind::input, "hitting-time solve residual " + std::to_string(residual_) + " above tolerance");
  }
  for (Eigen::Index r = 0; r < m; ++r) h_[unknowns[static_cast<std::size_t>(r)]] = x[r];
}

double expected_hitting_time(const DocGraph& graph, std::size_t source, std::size_t target) {
  if (source == target) throw InputError("hitting time needs distinct source and target");
  return HittingTimes(graph, target).from(source);
}

double expected_hitting_time(const DocGraph& graph, const std::string& source, const std::string& target) {
  auto s = graph.index(source);
  auto t = graph.index(target);
  if (!s || !t) throw InputError("unknown page in hitting-time query");
  return expected_hitting_time(graph, *s, *t);
}

std::vector<double> directed_hitting_times(const DocGraph& g, std::size_t target) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::size_t>> rev(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b : g.out(a)) rev[b].push_back(a);
  }
  auto reach = [&](const std::vector<std::size_t>& starts, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> q(starts.begin(), starts.end());
    for (auto s : starts) seen[s] = 1;
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop_front();
      for (std::size_t w : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          q.push_back(w);
        }
      }
    }
    return seen;
  };
  auto can_reach_target = reach({target}, rev);
  std::vector<std::size_t> dead;
  for (std::size_t v = 0; v < n; ++v) {
    if (!can_reach_target[v]) dead.push_back(v);
  }
  // A walk that can wander into a dead state has infinite expectation.
  std::vector<char> doomed(n, 0);
  if (!dead.empty()) {
    std::vector<std::vector<std::size_t>> rev_no_t(n);
    for (std::size_t a = 0; a < n; ++a) {
      if (a == target) continue;
      for (std::size_t b : g.out(a)) rev_no_t[b].push_back(a);
    }
    doomed = reach(dead, rev_no_t);
  }
  std::vector<double> h(n, kUnreachable);
  h[target] = 0.0;
  std::vector<long> col(n, -1);
  std::vector<std::size_t> unknowns;
  for (std::size_t v = 0; v < n; ++v) {
    if (v != target && !doomed[v]) {
      col[v] = static_cast<long>(unknowns.size());
      unknowns.push_back(v);
    }
  }
  if (unknowns.empty()) return h;
  const auto m = static_cast<Eigen::Index>(unknowns.size());
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd b = Eigen::VectorXd::Ones(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    std::size_t u = unknowns[static_cast<std::size_t>(r)];
    trips.emplace_back(r, r, 1.0);
    double p = 1.0 / static_cast<double>(g.out(u).size());
    for (std::size_t w : g.out(u)) {
      if (w != target) trips.emplace_back(r, col[w], -p);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return h;
  Eigen::VectorXd x = lu.solve(b);
  for (Eigen::Index r = 0; r < m; ++r) h[unknowns[static_cast<std::size_t>(r)]] = x[r];
  return h;
}

const std::array<Bucket, 5>& difficulty_buckets() {
  static const std::array<Bucket, 5> buckets{{{"50-1K", 50.0, 1e3},
                                              {"1K-10K", 1e3, 1e4},
                                              {"10K-100K", 1e4, 1e5},
                                              {"100K-1M", 1e5, 1e6},
                                              {"1M-10M", 1e6, 1e7}}};
  return buckets;
}

std::optional<std::size_t> bucket_of(double distance) {
  const auto& b = difficulty_buckets();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (distance >= b[i].lo && distance < b[i].hi) return i;
  }
  return std::nullopt;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void to_json(json& j, const NavTask& t) {
  j = json{{"pair_id", t.pair_id},
           {"source", t.source},
           {"target", t.target},
           {"expected_rw_distance", t.expected_rw_distance},
           {"bucket", t.bucket},
           {"shortest_path_len", t.shortest_path_len},
           {"diagnostics", {{"directed_rw_distance", finite_or_null(t.directed_rw_distance)}}}};
}

void from_json(const json& j, NavTask& t) {
  t.pair_id = j.at("pair_id").get<std::string>();
  t.source = j.at("source").get<std::string>();
  t.target = j.at("target").get<std::string>();
  t.expected_rw_distance = j.at("expected_rw_distance").get<double>();
  t.bucket = j.at("bucket").get<std::string>();
  t.shortest_path_len = j.at("shortest_path_len").get<int>();
  t.directed_rw_distance = kUnreachable;
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"].value("directed_rw_distance", json(nullptr));
    if (d.is_number()) t.directed_rw_distance = d.get<double>();
  }
}

NavSampleResult sample_nav_pairs(const DocGraph& graph, int per_bucket, std::uint64_t rng_seed, int max_path) {
  if (per_bucket < 0) throw ConfigError("per_bucket must be >= 0");
  const auto& buckets = difficulty_buckets();
  const std::size_t nb = buckets.size();
  std::vector<std::vector<NavTask>> found(nb);
  NavSampleResult result;
  if (graph.size() < 2 || per_bucket == 0) {
    result.shortfall = json::object();
    for (const auto& b : buckets) result.shortfall[b.name] = {{"requested", per_bucket}, {"found", 0}, {"attempts", 0}};
    return result;
  }

  const std::uint64_t budget = 200ULL * static_cast<std::uint64_t>(per_bucket) * nb;
  Rng rng(rng_seed);
  std::map<std::size_t, HittingTimes> undirected;
  std::map<std::size_t, std::vector<double>> directed;
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<std::uint64_t> hits(nb, 0);
  std::uint64_t attempts = 0, below = 0, unreachable = 0, too_long = 0;
  auto full = [&] {
    return std::all_of(found.begin(), found.end(), [&](const auto& f) { return static_cast<int>(f.size()) >= per_bucket; });
  };
  while (attempts < budget && !full()) {
    ++attempts;
    std::size_t t = rng.index(graph.size());
    std::size_t s = rng.index(graph.size() - 1);
    if (s >= t) ++s;
    if (used.count({s, t})) continue;
    auto it = undirected.find(t);
    if (it == undirected.end()) it = undirected.emplace(t, HittingTimes(graph, t)).first;
    double d = it->second.from(s);
    auto bi = bucket_of(d);
    if (!bi) {
      if (d < buckets[0].lo) ++below;
      continue;
    }
    ++hits[*bi];
    if (static_cast<int>(found[*bi].size()) >= per_bucket) continue;
    auto sp = graph.shortest_path(s, t);
    if (!sp) {
      ++unreachable;
      continue;
    }
    if (*sp > max_path) {
      ++too_long;
      continue;
    }
    auto dit = directed.find(t);
    if (dit == directed.end()) dit = directed.emplace(t, directed_hitting_times(graph, t)).first;
    used.insert({s, t});
    NavTask task;
    task.source = graph.ids()[s];
    task.target = graph.ids()[t];
    task.expected_rw_distance = d;
    task.bucket = buckets[*bi].name;
    task.shortest_path_len = *sp;
    task.directed_rw_distance = dit->second[s];
    found[*bi].push_back(std::move(task));
  }

  std::size_t k = 0;
  result.shortfall = json::object();
  for (std::size_t b = 0; b < nb; ++b) {
    for (auto& task : found[b]) {
      std::ostringstream id;
      id << "nav-" << std::setw(5) << std::setfill('0') << k++;
      task.pair_id = id.str();
      result.tasks.push_back(std::move(task));
    }
    result.shortfall[buckets[b].name] = {{"requested", per_bucket},
                                         {"found", found[b].size()},
                                         {"candidates_in_range", hits[b]}};
  }
  result.shortfall["attempts"] = attempts;
  result.shortfall["attempt_budget"] = budget;
  result.shortfall["rejected_below_range"] = below;
  result.shortfall["rejected_unreachable"] = unreachable;
  result.shortfall["rejected_too_long"] = too_long;
  return result;
}

}  // namespace twinworld
