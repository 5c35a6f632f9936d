#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "corrda/common.hpp"
#include "corrda/objective.hpp"

namespace corrda {

// Balanced, uncapacitated bipartite transportation problem. Costs may be
// negative (they are gradient entries in the solver's main use).
struct TransportationInstance {
  Eigen::MatrixXd costs;      // n_s x n_t
  Eigen::VectorXd supplies;   // n_s, all > 0
  Eigen::VectorXd demands;    // n_t, all > 0
  // Marginals are exactly 1/n_s and 1/n_t. Solvers then work in integer
  // flow units scaled by lcm(n_s, n_t) so balance holds exactly.
  bool uniform = false;

  TransportationInstance(Eigen::MatrixXd c, Eigen::VectorXd sup, Eigen::VectorXd dem)
      : costs(std::move(c)), supplies(std::move(sup)), demands(std::move(dem)) {
    if (costs.rows() < 1 || costs.cols() < 1)
      throw data_error("transportation instance needs at least one source and one sink");
    if (supplies.size() != costs.rows() || demands.size() != costs.cols())
      throw data_error("supply/demand vector lengths do not match the cost matrix");
    if (!costs.allFinite()) throw data_error("non-finite cost entry");
    if ((supplies.array() <= 0.0).any() || (demands.array() <= 0.0).any())
      throw data_error("supplies and demands must be strictly positive");
    if (std::abs(supplies.sum() - demands.sum()) > 1e-12)
      throw data_error("unbalanced instance: total supply != total demand");
  }

  static TransportationInstance uniform_marginals(Eigen::MatrixXd c) {
    const auto ns = c.rows(), nt = c.cols();
    TransportationInstance inst(std::move(c),
                                Eigen::VectorXd::Constant(ns, 1.0 / static_cast<double>(ns)),
                                Eigen::VectorXd::Constant(nt, 1.0 / static_cast<double>(nt)));
    inst.uniform = true;
    return inst;
  }

  int source_n() const { return static_cast<int>(costs.rows()); }
  int target_n() const { return static_cast<int>(costs.cols()); }
};

struct FlowSolution {
  Eigen::MatrixXd flow;  // n_s x n_t, >= 0
  double objective = 0.0;
  int basis_size = 0;  // diagnostic: tree size of the final basis
};

namespace detail {

// Primal network simplex specialized to the dense bipartite transportation
// graph. Node ids: 0..ns-1 sources, ns..ns+nt-1 sinks; arc a = i*nt + j runs
// source i -> sink j. The basis is a spanning tree held as parent pointers
// plus doubly-linked children lists; pivots update only the subtree cut off
// by the leaving arc. Flow is templated: exact integers for the scaled
// uniform-marginal instances, doubles for general ones.
template <class Flow>
class NetworkSimplex {
 public:
  NetworkSimplex(const Eigen::MatrixXd& costs, std::vector<Flow> supplies,
                 std::vector<Flow> demands)
      : ns_(static_cast<int>(costs.rows())),
        nt_(static_cast<int>(costs.cols())),
        nodes_(ns_ + nt_),
        arcs_(ns_ * nt_),
        sup_(std::move(supplies)),
        dem_(std::move(demands)) {
    // Arc-order copy of the costs: the pricing scan walks arc ids linearly
    // and must not stride across a column-major matrix.
    cost_.resize(arcs_);
    for (int i = 0; i < ns_; ++i)
      for (int j = 0; j < nt_; ++j) cost_[i * nt_ + j] = costs(i, j);
    double cmax = 0.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    eps_ = 1e-12 * (1.0 + cmax);
    flow_.assign(arcs_, Flow(0));
    in_tree_.assign(arcs_, 0);
    pi_.assign(nodes_, 0.0);
    parent_.assign(nodes_, -1);
    pred_arc_.assign(nodes_, -1);
    depth_.assign(nodes_, 0);
    child_.assign(nodes_, -1);
    next_sib_.assign(nodes_, -1);
    prev_sib_.assign(nodes_, -1);
  }

  void solve() {
    northwest_corner();
    build_tree();
    run_pivots();
  }

  const std::vector<Flow>& flows() const { return flow_; }

  std::vector<int> basis_arcs() const {
    std::vector<int> out;
    out.reserve(nodes_ - 1);
    for (int a = 0; a < arcs_; ++a)
      if (in_tree_[a]) out.push_back(a);
    return out;
  }

 private:
  int tail(int a) const { return a / nt_; }
  int head(int a) const { return ns_ + a % nt_; }
  double cost(int a) const { return cost_[a]; }
  double reduced_cost(int a) const { return cost_[a] - pi_[a / nt_] + pi_[ns_ + a % nt_]; }

  // Staircase initial basis: exactly ns + nt - 1 cells, possibly with
  // degenerate zero flows when a supply and a demand run out together.
  void northwest_corner() {
    int i = 0, j = 0;
    Flow rs = sup_[0], rd = dem_[0];
    while (true) {
      const int a = i * nt_ + j;
      const Flow q = std::min(rs, rd);
      flow_[a] = q;
      in_tree_[a] = 1;
      rs -= q;
      rd -= q;
      if (i == ns_ - 1 && j == nt_ - 1) break;
      if (rs <= Flow(0) && i < ns_ - 1) {
        ++i;
        rs = sup_[i];
      } else if (j < nt_ - 1) {
        ++j;
        rd = dem_[j];
      } else {
        ++i;
        rs = sup_[i];
      }
    }
  }

  void attach(int node, int par) {
    prev_sib_[node] = -1;
    next_sib_[node] = child_[par];
    if (child_[par] >= 0) prev_sib_[child_[par]] = node;
    child_[par] = node;
  }

  void detach(int node) {
    const int par = parent_[node];
    if (par < 0) return;
    if (prev_sib_[node] >= 0)
      next_sib_[prev_sib_[node]] = next_sib_[node];
    else
      child_[par] = next_sib_[node];
    if (next_sib_[node] >= 0) prev_sib_[next_sib_[node]] = prev_sib_[node];
    prev_sib_[node] = next_sib_[node] = -1;
  }

  // BFS over the staircase to orient the tree away from node 0 and assign
  // potentials making every tree arc's reduced cost zero.
  void build_tree() {
    std::vector<std::vector<std::pair<int, int>>> adj(nodes_);  // (neighbor, arc)
    for (int a = 0; a < arcs_; ++a) {
      if (!in_tree_[a]) continue;
      adj[tail(a)].push_back({head(a), a});
      adj[head(a)].push_back({tail(a), a});
    }
    std::vector<int> stack{0};
    std::vector<char> seen(nodes_, 0);
    seen[0] = 1;
    parent_[0] = -1;
    pred_arc_[0] = -1;
    depth_[0] = 0;
    pi_[0] = 0.0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (auto [w, a] : adj[u]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = u;
        pred_arc_[w] = a;
        depth_[w] = depth_[u] + 1;
        attach(w, u);
        pi_[w] = (tail(a) == u) ? pi_[u] - cost(a) : pi_[u] + cost(a);
        stack.push_back(w);
      }
    }
    for (int v = 0; v < nodes_; ++v)
      if (!seen[v]) throw solver_error("initial basis is not a spanning tree");
  }

  // Recompute potentials from the tree to shed accumulated rounding.
  void refresh_potentials() {
    std::vector<int> order;
    order.reserve(nodes_);
    order.push_back(0);
    pi_[0] = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      for (int w = child_[order[k]]; w >= 0; w = next_sib_[w]) {
        const int a = pred_arc_[w];
        pi_[w] = (head(a) == w) ? pi_[parent_[w]] - cost(a) : pi_[parent_[w]] + cost(a);
        order.push_back(w);
      }
    }
  }

  int find_entering(bool bland) {
    if (bland) {
      for (int a = 0; a < arcs_; ++a)
        if (!in_tree_[a] && reduced_cost(a) < -eps_) return a;
      return -1;
    }
    // Block pricing: walk the arcs cyclically in ~sqrt(arcs) blocks and take
    // the most negative candidate from the first block that has one. Far
    // fewer pivots than first-eligible, far cheaper than full Dantzig scans.
    const int block = std::max(64, static_cast<int>(std::sqrt(static_cast<double>(arcs_))));
    int remaining = arcs_;
    while (remaining > 0) {
      const int len = std::min(block, remaining);
      int best = -1;
      double best_rc = -eps_;
      int a = scan_pos_;
      int i = a / nt_, j = a - i * nt_;
      for (int k = 0; k < len; ++k) {
        if (!in_tree_[a]) {
          const double rc = cost_[a] - pi_[i] + pi_[ns_ + j];
          if (rc < best_rc) {
            best_rc = rc;
            best = a;
          }
        }
        ++a;
        if (++j == nt_) {
          j = 0;
          ++i;
        }
        if (a == arcs_) {
          a = 0;
          i = 0;
          j = 0;
        }
      }
      scan_pos_ = a;
      remaining -= len;
      if (best >= 0) return best;
    }
    return -1;
  }

  void run_pivots() {
    long long degen_streak = 0;
    bool bland = false;
    const long long streak_limit = 2LL * nodes_ + 64;
    const long long pivot_cap = 64LL * arcs_ + 1000000;
    std::vector<int> up_arcs, down_arcs;  // +delta / -delta tree arcs
    for (long long pivots = 0;; ++pivots) {
      if (pivots > pivot_cap) throw solver_error("network simplex failed to terminate");
      if ((pivots & 4095) == 4095) refresh_potentials();
      const int e = find_entering(bland);
      if (e < 0) break;  // full sweep found no eligible arc: optimal
      const Flow delta = pivot(e);
      if (delta == Flow(0)) {
        if (++degen_streak > streak_limit) bland = true;
      } else {
        degen_streak = 0;
        bland = false;
      }
    }
  }

  // One simplex pivot around entering arc e. Returns the pushed flow.
  Flow pivot(int e) {
    const int u = tail(e), v = head(e);
    const double rc_e = reduced_cost(e);

    up_path_.clear();
    down_path_.clear();
    int x = u, y = v;
    while (depth_[x] > depth_[y]) {
      down_path_.push_back(x);
      x = parent_[x];
    }
    while (depth_[y] > depth_[x]) {
      up_path_.push_back(y);
      y = parent_[y];
    }
    while (x != y) {
      down_path_.push_back(x);
      up_path_.push_back(y);
      x = parent_[x];
      y = parent_[y];
    }
    // Cycle direction: u -e-> v, then v up to the meeting node, then down to
    // u. On the v side traversal follows node->parent; on the u side it is
    // parent->node (reversed).
    Flow delta = std::numeric_limits<Flow>::max();
    int leaving = -1;
    auto consider = [&](int node, bool traversal_up) {
      const int a = pred_arc_[node];
      const bool arc_up = tail(a) == node;  // arc oriented node -> parent
      const bool forward = (arc_up == traversal_up);
      if (forward) return;
      if (flow_[a] < delta || (flow_[a] == delta && (leaving < 0 || a < leaving))) {
        delta = flow_[a];
        leaving = a;
      }
    };
    for (int n : up_path_) consider(n, true);
    for (int n : down_path_) consider(n, false);
    if (leaving < 0) throw solver_error("unbounded pivot on a balanced instance");

    if (delta != Flow(0)) {
      auto apply = [&](int node, bool traversal_up) {
        const int a = pred_arc_[node];
        const bool arc_up = tail(a) == node;
        if (arc_up == traversal_up)
          flow_[a] += delta;
        else
          flow_[a] -= delta;
      };
      for (int n : up_path_) apply(n, true);
      for (int n : down_path_) apply(n, false);
      flow_[e] += delta;
      flow_[leaving] = Flow(0);  // exact, kills float residue
    }

    // Swap the basis: subtree below the leaving arc is re-rooted at the
    // entering arc's endpoint inside it and re-hung from the other endpoint.
    const int cut = parent_[tail(leaving)] == head(leaving) ? tail(leaving) : head(leaving);
    const bool u_inside = in_subtree(cut, u);
    const int inside = u_inside ? u : v;
    const int outside = u_inside ? v : u;
    in_tree_[e] = 1;
    in_tree_[leaving] = 0;

    int cur = inside;
    int old_parent = parent_[cur];
    int old_arc = pred_arc_[cur];
    detach(cur);
    parent_[cur] = outside;
    pred_arc_[cur] = e;
    attach(cur, outside);
    while (cur != cut) {
      const int nxt = old_parent;
      const int nxt_parent = parent_[nxt];
      const int nxt_arc = pred_arc_[nxt];
      detach(nxt);
      parent_[nxt] = cur;
      pred_arc_[nxt] = old_arc;
      attach(nxt, cur);
      cur = nxt;
      old_parent = nxt_parent;
      old_arc = nxt_arc;
    }

    // Potentials on the moved subtree shift by a constant; depths follow the
    // new parent chain.
    const double shift = u_inside ? rc_e : -rc_e;
    dfs_stack_.clear();
    dfs_stack_.push_back(inside);
    depth_[inside] = depth_[outside] + 1;
    pi_[inside] += shift;
    while (!dfs_stack_.empty()) {
      const int n = dfs_stack_.back();
      dfs_stack_.pop_back();
      for (int w = child_[n]; w >= 0; w = next_sib_[w]) {
        depth_[w] = depth_[n] + 1;
        pi_[w] += shift;
        dfs_stack_.push_back(w);
      }
    }
    return delta;
  }

  bool in_subtree(int root, int node) const {
    int x = node;
    while (x >= 0) {
      if (x == root) return true;
      x = parent_[x];
    }
    return false;
  }

  std::vector<double> cost_;
  int ns_, nt_, nodes_, arcs_;
  std::vector<Flow> sup_, dem_;
  std::vector<Flow> flow_;
  std::vector<char> in_tree_;
  std::vector<double> pi_;
  std::vector<int> parent_, pred_arc_, depth_;
  std::vector<int> child_, next_sib_, prev_sib_;
  std::vector<int> up_path_, down_path_, dfs_stack_;
  double eps_ = 0.0;
  int scan_pos_ = 0;
};

// Successive shortest augmenting paths with node potentials. Structurally
// independent of the simplex solver; used as its verification oracle.
// live_eps: residuals at or below it count as exhausted. Zero for integer
// flows; fractional marginals need a dust threshold because repeated
// subtraction leaves O(ulp) residue that would otherwise strand a source.
template <class Flow>
std::vector<Flow> ssp_solve(const Eigen::MatrixXd& costs, std::vector<Flow> res_sup,
                            std::vector<Flow> res_dem, Flow live_eps = Flow(0)) {
  const int ns = static_cast<int>(costs.rows());
  const int nt = static_cast<int>(costs.cols());
  const int nodes = ns + nt;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Flow> flow(static_cast<std::size_t>(ns) * nt, Flow(0));
  std::vector<double> pot(nodes, 0.0);
  for (int j = 0; j < nt; ++j) pot[ns + j] = costs.col(j).minCoeff();

  std::vector<double> dist(nodes);
  std::vector<int> parent(nodes);
  std::vector<char> done(nodes);
  long long guard = 4LL * nodes * nodes + 10000;
  while (true) {
    bool live = false;
    for (int i = 0; i < ns && !live; ++i) live = res_sup[i] > live_eps;
    if (!live) break;
    if (--guard < 0) throw solver_error("reference flow solver failed to terminate");

    // Multi-source Dijkstra on reduced costs (dense, the graph is complete).
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < ns; ++i)
      if (res_sup[i] > live_eps) dist[i] = 0.0;
    for (int round = 0; round < nodes; ++round) {
      int best = -1;
      for (int v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < inf && (best < 0 || dist[v] < dist[best])) best = v;
      if (best < 0) break;
      done[best] = 1;
      if (best < ns) {
        for (int j = 0; j < nt; ++j) {
          const double w = std::max(0.0, costs(best, j) + pot[best] - pot[ns + j]);
          if (dist[best] + w < dist[ns + j]) {
            dist[ns + j] = dist[best] + w;
            parent[ns + j] = best;
          }
        }
      } else {
        const int j = best - ns;
        for (int i = 0; i < ns; ++i) {
          if (flow[static_cast<std::size_t>(i) * nt + j] <= Flow(0)) continue;
          const double w = std::max(0.0, -costs(i, j) + pot[best] - pot[i]);
          if (dist[best] + w < dist[i]) {
            dist[i] = dist[best] + w;
            parent[i] = best;
          }
        }
      }
    }
    int sink = -1;
    for (int j = 0; j < nt; ++j)
      if (res_dem[j] > live_eps && dist[ns + j] < inf &&
          (sink < 0 || dist[ns + j] < dist[sink]))
        sink = ns + j;
    if (sink < 0) throw solver_error("no augmenting path on a balanced instance");
    for (int v = 0; v < nodes; ++v)
      if (dist[v] < inf) pot[v] += std::min(dist[v], dist[sink]);

    // Bottleneck along the path, then augment.
    Flow delta = res_dem[sink - ns];
    int v = sink;
    while (parent[v] >= 0) {
      const int p = parent[v];
      if (p < ns)  // forward arc p -> v, uncapacitated
        ;
      else  // backward arc: limited by current flow on (v, p-ns)
        delta = std::min(delta, flow[static_cast<std::size_t>(v) * nt + (p - ns)]);
      v = p;
    }
    delta = std::min(delta, res_sup[v]);

    const int start = v;
    v = sink;
    while (parent[v] >= 0) {
      const int p = parent[v];
      if (p < ns) {
        flow[static_cast<std::size_t>(p) * nt + (v - ns)] += delta;
      } else {
        auto& f = flow[static_cast<std::size_t>(v) * nt + (p - ns)];
        f = (f == delta) ? Flow(0) : f - delta;
      }
      v = p;
    }
    res_sup[start] = (res_sup[start] == delta) ? Flow(0) : res_sup[start] - delta;
    res_dem[sink - ns] =
        (res_dem[sink - ns] == delta) ? Flow(0) : res_dem[sink - ns] - delta;
  }
  return flow;
}

inline long long uniform_scale(int ns, int nt) {
  return std::lcm(static_cast<long long>(ns), static_cast<long long>(nt));
}

inline FlowSolution pack_solution(const TransportationInstance& inst,
                                  const Eigen::MatrixXd& flow) {
  FlowSolution out;
  out.flow = flow;
  out.objective = (inst.costs.array() * flow.array()).sum();
  out.basis_size = inst.source_n() + inst.target_n() - 1;
  const double row_err =
      (flow.rowwise().sum() - inst.supplies).cwiseAbs().maxCoeff();
  const double col_err =
      (flow.colwise().sum().transpose() - inst.demands).cwiseAbs().maxCoeff();
  if (std::max(row_err, col_err) > 1e-9)
    throw solver_error("flow marginals drifted beyond tolerance");
  if ((flow.array() < -1e-12).any()) throw solver_error("negative flow entry");
  return out;
}

}  // namespace detail

// Optimal basic solution by primal network simplex. For uniform-marginal
// instances the solve runs in exact integer flow units.
inline FlowSolution solve_network_simplex(const TransportationInstance& inst,
                                          std::vector<int>* basis_out = nullptr) {
  const int ns = inst.source_n(), nt = inst.target_n();
  Eigen::MatrixXd flow(ns, nt);
  if (inst.uniform) {
    const long long scale = detail::uniform_scale(ns, nt);
    detail::NetworkSimplex<long long> solver(
        inst.costs, std::vector<long long>(ns, scale / ns),
        std::vector<long long>(nt, scale / nt));
    solver.solve();
    const auto& f = solver.flows();
    const double inv = 1.0 / static_cast<double>(scale);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j) flow(i, j) = static_cast<double>(f[i * nt + j]) * inv;
    if (basis_out) *basis_out = solver.basis_arcs();
  } else {
    detail::NetworkSimplex<double> solver(
        inst.costs, std::vector<double>(inst.supplies.data(), inst.supplies.data() + ns),
        std::vector<double>(inst.demands.data(), inst.demands.data() + nt));
    solver.solve();
    const auto& f = solver.flows();
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j) flow(i, j) = f[i * nt + j];
    if (basis_out) *basis_out = solver.basis_arcs();
  }
  return detail::pack_solution(inst, flow);
}

// Same contract as solve_network_simplex via successive shortest paths.
inline FlowSolution solve_reference(const TransportationInstance& inst) {
  const int ns = inst.source_n(), nt = inst.target_n();
  Eigen::MatrixXd flow(ns, nt);
  if (inst.uniform) {
    const long long scale = detail::uniform_scale(ns, nt);
    const auto f = detail::ssp_solve<long long>(
        inst.costs, std::vector<long long>(ns, scale / ns),
        std::vector<long long>(nt, scale / nt));
    const double inv = 1.0 / static_cast<double>(scale);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j) flow(i, j) = static_cast<double>(f[i * nt + j]) * inv;
  } else {
    const auto f = detail::ssp_solve<double>(
        inst.costs, std::vector<double>(inst.supplies.data(), inst.supplies.data() + ns),
        std::vector<double>(inst.demands.data(), inst.demands.data() + nt),
        1e-12 * inst.supplies.sum());
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j) flow(i, j) = f[i * nt + j];
  }
  return detail::pack_solution(inst, flow);
}

// The conditional-gradient linear subproblem: minimize Tr(grad^T C) over the
// correspondence polytope. Scales the gradient by n_s, solves the
// 1/n_s-supply transportation instance, and returns C_d = n_s * T*.
inline CorrespondenceMatrix lp_subproblem(const Eigen::MatrixXd& gradient) {
  if (!gradient.allFinite()) throw data_error("non-finite gradient entry");
  const double ns = static_cast<double>(gradient.rows());
  auto inst = TransportationInstance::uniform_marginals(ns * gradient);
  const FlowSolution sol = solve_network_simplex(inst);
  return CorrespondenceMatrix{ns * sol.flow};
}

}  // namespace corrda
