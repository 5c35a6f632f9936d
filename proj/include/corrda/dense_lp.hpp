#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "corrda/transport.hpp"

namespace corrda {

// Naive dense LP baseline for the same transportation problem: a textbook
// full-tableau primal simplex. Every pivot rewrites the whole m x (N+1)
// tableau, exactly like a small general-purpose LP code with no knowledge of
// network structure. It exists to be measured against solve_network_simplex
// (and doubles as a third correctness cross-check at small sizes).
//
// The redundant last demand constraint is dropped (rank m = ns + nt - 1) and
// the walk starts from the northwest-corner basic feasible solution, so no
// artificial variables are needed. Memory is m * (ns*nt + 1) doubles: about
// 1 GB at ns = nt = 400, which is the point of the exercise.
inline FlowSolution solve_dense_baseline(const TransportationInstance& inst) {
  const int ns = inst.source_n(), nt = inst.target_n();
  const int m = ns + nt - 1;          // basis size
  const std::int64_t ncols = static_cast<std::int64_t>(ns) * nt;
  const std::int64_t width = ncols + 1;  // + RHS column

  // --- northwest-corner start (flows + basic cells) ---
  std::vector<int> basic;  // arc id per tableau row
  std::vector<double> basic_flow;
  basic.reserve(m);
  basic_flow.reserve(m);
  {
    int i = 0, j = 0;
    double rs = inst.supplies[0], rd = inst.demands[0];
    while (true) {
      const double q = std::min(rs, rd);
      basic.push_back(i * nt + j);
      basic_flow.push_back(q);
      rs -= q;
      rd -= q;
      if (i == ns - 1 && j == nt - 1) break;
      if (rs <= 0.0 && i < ns - 1) {
        ++i;
        rs = inst.supplies[i];
      } else if (j < nt - 1) {
        ++j;
        rd = inst.demands[j];
      } else {
        ++i;
        rs = inst.supplies[i];
      }
    }
  }

  // --- tree of the starting basis, to fill the initial tableau ---
  const int nodes = ns + nt;
  std::vector<int> parent(nodes, -1), pred_arc(nodes, -1), depth(nodes, 0);
  std::vector<int> row_of_arc(static_cast<std::size_t>(ncols), -1);
  std::vector<double> pi(nodes, 0.0);
  {
    for (int r = 0; r < m; ++r) row_of_arc[basic[r]] = r;
    std::vector<std::vector<std::pair<int, int>>> adj(nodes);
    for (int a : basic) {
      const int u = a / nt, w = ns + a % nt;
      adj[u].push_back({w, a});
      adj[w].push_back({u, a});
    }
    std::vector<int> stack{0};
    std::vector<char> seen(nodes, 0);
    seen[0] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (auto [w, a] : adj[u]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent[w] = u;
        pred_arc[w] = a;
        depth[w] = depth[u] + 1;
        const double c = inst.costs(a / nt, a % nt);
        pi[w] = (a / nt == u) ? pi[u] - c : pi[u] + c;
        stack.push_back(w);
      }
    }
  }

  // --- initial tableau: column of arc (i,j) is the signed indicator of the
  // tree path i -> j (+1 traversed tail->head, -1 otherwise); reduced costs
  // come from the tree potentials ---
  std::vector<double> tab(static_cast<std::size_t>(m) * width, 0.0);
  std::vector<double> obj(static_cast<std::size_t>(width), 0.0);
  auto row = [&](int r) { return tab.data() + static_cast<std::size_t>(r) * width; };
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j) {
      const std::int64_t c = static_cast<std::int64_t>(i) * nt + j;
      obj[c] = inst.costs(i, j) - pi[i] + pi[ns + j];
      int x = i, y = ns + j;
      while (depth[x] > depth[y]) {
        const int a = pred_arc[x];
        row(row_of_arc[a])[c] = (a / nt == x) ? 1.0 : -1.0;
        x = parent[x];
      }
      while (depth[y] > depth[x]) {
        const int a = pred_arc[y];
        row(row_of_arc[a])[c] = (ns + a % nt == y) ? 1.0 : -1.0;
        y = parent[y];
      }
      while (x != y) {
        const int ax = pred_arc[x];
        row(row_of_arc[ax])[c] = (ax / nt == x) ? 1.0 : -1.0;
        x = parent[x];
        const int ay = pred_arc[y];
        row(row_of_arc[ay])[c] = (ns + ay % nt == y) ? 1.0 : -1.0;
        y = parent[y];
      }
    }
  }
  for (int r = 0; r < m; ++r) row(r)[ncols] = basic_flow[r];

  // --- simplex iterations: Dantzig pricing, Bland fallback on degeneracy ---
  const double eps_in = 1e-10 * (1.0 + inst.costs.cwiseAbs().maxCoeff());
  const double eps_piv = 1e-9;
  long long degen_streak = 0;
  bool bland = false;
  const long long streak_limit = 2LL * m + 64;
  const long long pivot_cap = 512LL * m + 200000;
  for (long long pivots = 0;; ++pivots) {
    if (pivots > pivot_cap) throw solver_error("dense simplex failed to terminate");
    std::int64_t enter = -1;
    if (bland) {
      for (std::int64_t c = 0; c < ncols; ++c)
        if (obj[c] < -eps_in) {
          enter = c;
          break;
        }
    } else {
      double best = -eps_in;
      for (std::int64_t c = 0; c < ncols; ++c)
        if (obj[c] < best) {
          best = obj[c];
          enter = c;
        }
    }
    if (enter < 0) break;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      const double a = row(r)[enter];
      if (a <= eps_piv) continue;
      const double ratio = row(r)[ncols] / a;
      if (ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 && (leave < 0 || basic[r] < basic[leave]))) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave < 0) throw solver_error("dense simplex: unbounded direction");

    if (best_ratio <= 1e-12) {
      if (++degen_streak > streak_limit) bland = true;
    } else {
      degen_streak = 0;
      bland = false;
    }

    // Normalize the pivot row, then eliminate the entering column from every
    // other row and the objective row (full dense sweeps).
    double* pr = row(leave);
    const double inv = 1.0 / pr[enter];
    for (std::int64_t c = 0; c < width; ++c) pr[c] *= inv;
    pr[enter] = 1.0;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      const double f = row(r)[enter];
      if (f == 0.0) continue;
      double* rr = row(r);
      for (std::int64_t c = 0; c < width; ++c) rr[c] -= f * pr[c];
      rr[enter] = 0.0;
    }
    const double fo = obj[enter];
    if (fo != 0.0) {
      for (std::int64_t c = 0; c < width; ++c) obj[c] -= fo * pr[c];
      obj[enter] = 0.0;
    }
    basic[leave] = static_cast<int>(enter);
  }

  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(ns, nt);
  for (int r = 0; r < m; ++r) {
    const double f = std::max(0.0, row(r)[ncols]);
    flow(basic[r] / nt, basic[r] % nt) += f;
  }
  return detail::pack_solution(inst, flow);
}

}  // namespace corrda
