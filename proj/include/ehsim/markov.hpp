#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehsim {

struct DegenerateChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Strongly connected components (iterative Tarjan) of the directed graph
/// with an edge i->j whenever P[i][j] > eps.
inline std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<double>& p, int n, double eps) {
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0), stack;
  std::vector<std::vector<int>> comps;
  int counter = 0;
  struct Frame { int v; int next_j; };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      bool descended = false;
      for (int j = f.next_j; j < n; ++j) {
        if (p[static_cast<std::size_t>(f.v) * n + j] <= eps) continue;
        f.next_j = j + 1;
        if (index[j] == -1) {
          index[j] = low[j] = counter++;
          stack.push_back(j);
          on_stack[j] = 1;
          call.push_back({j, 0});
          descended = true;
          break;
        }
        if (on_stack[j]) low[f.v] = std::min(low[f.v], index[j]);
      }
      if (descended) continue;
      // all out-edges handled: close the vertex
      const int v = f.v;
      if (low[v] == index[v]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        comps.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comps;
}

}  // namespace detail

/// Closed communicating classes of a row-stochastic matrix: SCCs with no
/// transition mass leaving the class.
inline std::vector<std::vector<int>> closed_classes(const std::vector<double>& p,
                                                    int n, double eps = 1e-14) {
  auto comps = detail::strongly_connected_components(p, n, eps);
  std::vector<int> comp_of(n, -1);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
  std::vector<std::vector<int>> closed;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    bool is_closed = true;
    for (int v : comps[c]) {
      for (int j = 0; j < n && is_closed; ++j)
        if (p[static_cast<std::size_t>(v) * n + j] > eps && comp_of[j] != static_cast<int>(c))
          is_closed = false;
      if (!is_closed) break;
    }
    if (is_closed) closed.push_back(comps[c]);
  }
  return closed;
}

/// Stationary distribution of a row-stochastic matrix (row-major, n x n):
/// solves pi P = pi, sum pi = 1 by dense Gaussian elimination with partial
/// pivoting, the normalization row replacing one redundant balance equation.
/// Throws DegenerateChainError when the chain has more than one closed
/// communicating class (the stationary vector is not unique) or when the
/// residual exceeds 1e-10.
inline std::vector<double> stationary_distribution(const std::vector<double>& p, int n) {
  if (n <= 0 || p.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("stationary_distribution: bad dimensions");
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += p[static_cast<std::size_t>(i) * n + j];
    if (std::abs(row - 1.0) > 1e-12)
      throw std::invalid_argument("stationary_distribution: row " + std::to_string(i) +
                                  " sums to " + std::to_string(row));
  }

  auto closed = closed_classes(p, n);
  if (closed.size() > 1) {
    std::string msg = "degenerate chain: " + std::to_string(closed.size()) +
                      " closed classes:";
    for (const auto& cls : closed) {
      msg += " {";
      for (std::size_t i = 0; i < cls.size(); ++i)
        msg += (i ? "," : "") + std::to_string(cls[i]);
      msg += "}";
    }
    throw DegenerateChainError(msg);
  }

  // A = P^T - I with the last row replaced by ones; b = e_n.
  const int m = n;
  std::vector<double> a(static_cast<std::size_t>(m) * (m + 1), 0.0);
  auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * (m + 1) + c]; };
  for (int r = 0; r < m - 1; ++r)
    for (int c = 0; c < m; ++c)
      at(r, c) = p[static_cast<std::size_t>(c) * n + r] - (r == c ? 1.0 : 0.0);
  for (int c = 0; c < m; ++c) at(m - 1, c) = 1.0;
  at(m - 1, m) = 1.0;

  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
    if (std::abs(at(piv, col)) < 1e-300)
      throw DegenerateChainError("stationary_distribution: singular balance system");
    if (piv != col)
      for (int c = col; c <= m; ++c) std::swap(at(piv, c), at(col, c));
    for (int r = col + 1; r < m; ++r) {
      const double f = at(r, col) / at(col, col);
      if (f == 0.0) continue;
      for (int c = col; c <= m; ++c) at(r, c) -= f * at(col, c);
    }
  }
  std::vector<double> pi(m, 0.0);
  for (int r = m - 1; r >= 0; --r) {
    double v = at(r, m);
    for (int c = r + 1; c < m; ++c) v -= at(r, c) * pi[c];
    pi[r] = v / at(r, r);
  }

  double residual = 0.0;
  for (int j = 0; j < m; ++j) {
    double col = 0.0;
    for (int i = 0; i < m; ++i) col += pi[i] * p[static_cast<std::size_t>(i) * n + j];
    residual = std::max(residual, std::abs(col - pi[j]));
  }
  if (residual > 1e-10)
    throw DegenerateChainError("stationary_distribution: residual " + std::to_string(residual));
  for (double& v : pi) {
    if (v < 0.0) {
      if (v < -1e-12)
        throw DegenerateChainError("stationary_distribution: negative mass " + std::to_string(v));
      v = 0.0;
    }
  }
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;
  return pi;
}

}  // namespace ehsim
