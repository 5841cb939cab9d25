#pragma once
// Hyperlink graph over retained pages and navigation tasks bucketed by the
// expected hitting time of a random walk.

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinworld/corpus_builder.hpp"

namespace twinworld {

class DocGraph {
 public:
  DocGraph() = default;
  // Self-loops are dropped and duplicate links collapse to one edge.
  explicit DocGraph(const std::map<std::string, std::set<std::string>>& links);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<std::size_t> index(const std::string& id) const;
  const std::vector<std::size_t>& out(std::size_t v) const { return out_[v]; }
  // Undirected neighbour lists (union of both directions).
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return und_[v]; }
  std::set<std::pair<std::string, std::string>> edges() const;
  std::size_t edge_count() const;

  // Directed BFS distance; nullopt when unreachable.
  std::optional<int> shortest_path(std::size_t from, std::size_t to) const;
  // Directed BFS path including both endpoints; empty when unreachable.
  std::vector<std::size_t> bfs_path(std::size_t from, std::size_t to) const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> und_;
};

DocGraph build_doc_graph(const Corpus& corpus, Variant v = Variant::sm);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Expected hitting times into one target for every start vertex, on the
// undirected view. Solves the reduced Laplacian system L' h = deg with a
// sparse Cholesky factorisation and checks the residual. Vertices that cannot
// reach the target get kUnreachable.
class HittingTimes {
 public:
  HittingTimes(const DocGraph& graph, std::size_t target, double tolerance = 1e-8);
  double from(std::size_t source) const { return h_[source]; }
  const std::vector<double>& all() const { return h_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> h_;
  double residual_ = 0.0;
};

double expected_hitting_time(const DocGraph& graph, std::size_t source, std::size_t target);
double expected_hitting_time(const DocGraph& graph, const std::string& source, const std::string& target);

// Same quantity for a walk that follows out-links only; kUnreachable when some
// reachable state cannot reach the target. Diagnostics only.
std::vector<double> directed_hitting_times(const DocGraph& graph, std::size_t target);

struct Bucket {
  std::string name;
  double lo;
  double hi;  // half-open [lo, hi)
};
const std::array<Bucket, 5>& difficulty_buckets();
// Index into difficulty_buckets(), or nullopt outside every range.
std::optional<std::size_t> bucket_of(double distance);

struct NavTask {
  std::string pair_id;
  std::string source;
  std::string target;
  double expected_rw_distance = 0.0;
  std::string bucket;
  int shortest_path_len = 0;
  double directed_rw_distance = kUnreachable;
};

void to_json(nlohmann::json& j, const NavTask& t);
void from_json(const nlohmann::json& j, NavTask& t);

struct NavSampleResult {
  std::vector<NavTask> tasks;
  nlohmann::json shortfall;  // bucket -> {requested, found, attempts}
};

// Rejection sampling with an attempt budget of 200 * per_bucket per bucket.
// Pairs without a directed path of at most `max_path` links are rejected.
NavSampleResult sample_nav_pairs(const DocGraph& graph, int per_bucket, std::uint64_t rng_seed, int max_path = 30);

}  // namespace twinworld
