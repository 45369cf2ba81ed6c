#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace capflow {

/// Dinic max-flow on real capacities. Residuals at or below `eps` count as
/// saturated. Single-threaded and deterministic: arcs are explored in
/// insertion order.
class MaxFlow {
 public:
  struct Arc {
    int to;
    int rev;  // index of the paired arc in adjacency of `to`
    double cap;
  };

  struct Stats {
    std::size_t phases = 0;
    std::size_t augmentations = 0;
  };

  explicit MaxFlow(int nodes) : adj_(nodes) {}

  int nodes() const { return static_cast<int>(adj_.size()); }

  void add_edge(int u, int v, double cap, double rev_cap = 0.0) {
    const int iu = static_cast<int>(adj_[u].size());
    const int iv = static_cast<int>(adj_[v].size()) + (u == v ? 1 : 0);
    adj_[u].push_back({v, iv, cap});
    adj_[v].push_back({u, iu, rev_cap});
  }

  double solve(int s, int t, double eps) {
    eps_ = eps;
    double total = 0.0;
    level_.assign(adj_.size(), -1);
    it_.assign(adj_.size(), 0);
    while (bfs(s, t)) {
      ++stats_.phases;
      std::fill(it_.begin(), it_.end(), 0);
      while (true) {
        const double f = augment(s, t);
        if (f <= 0.0) break;
        total += f;
        ++stats_.augmentations;
      }
    }
    return total;
  }

  /// Nodes reachable from s through arcs with residual > eps.
  std::vector<char> reachable_from(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const Arc& a : adj_[u]) {
        if (a.cap > eps_ && !seen[a.to]) {
          seen[a.to] = 1;
          stack.push_back(a.to);
        }
      }
    }
    return seen;
  }

  /// Nodes that can reach t through arcs with residual > eps.
  std::vector<char> reaching(int t) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{t};
    seen[t] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const Arc& a : adj_[v]) {
        // a is v -> u; its pair u -> v has residual adj_[u][a.rev].cap.
        const Arc& back = adj_[a.to][a.rev];
        if (back.cap > eps_ && !seen[a.to]) {
          seen[a.to] = 1;
          stack.push_back(a.to);
        }
      }
    }
    return seen;
  }

  const Stats& stats() const { return stats_; }
  const std::vector<std::vector<Arc>>& arcs() const { return adj_; }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int> queue{s};
    level_[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (const Arc& a : adj_[u]) {
        if (a.cap > eps_ && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  // One blocking-flow augmentation along the level graph, iterative DFS.
  double augment(int s, int t) {
    path_.clear();
    int u = s;
    while (true) {
      if (u == t) {
        double f = std::numeric_limits<double>::infinity();
        for (const auto& [node, arc] : path_) f = std::min(f, adj_[node][arc].cap);
        for (const auto& [node, arc] : path_) {
          Arc& a = adj_[node][arc];
          a.cap -= f;
          adj_[a.to][a.rev].cap += f;
        }
        return f;
      }
      bool advanced = false;
      for (std::size_t& i = it_[u]; i < adj_[u].size(); ++i) {
        const Arc& a = adj_[u][i];
        if (a.cap > eps_ && level_[a.to] == level_[u] + 1) {
          path_.push_back({u, static_cast<int>(i)});
          u = a.to;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      // Dead end: retreat and retire the arc that led here.
      level_[u] = -1;
      if (path_.empty()) return 0.0;
      u = path_.back().first;
      path_.pop_back();
      ++it_[u];
    }
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
  std::vector<std::pair<int, int>> path_;
  double eps_ = 0.0;
  Stats stats_;
};

}  // namespace capflow
