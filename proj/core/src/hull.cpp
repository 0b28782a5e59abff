#include "countergm/hull.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "countergm/errors.hpp"

namespace countergm {

namespace {

constexpr double kEps = 1e-10;

// Dense simplex tableau for: min c'x, A x = b, x >= 0 (b >= 0).
class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, -1) {}

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  double& cost(int c) { return at(m_, c); }
  int rows() const { return m_; }
  int cols() const { return n_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= n_; ++c) at(pr, c) *= inv;
    for (int r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Returns false if unbounded. Columns >= allowed_cols never enter.
  bool optimize(int allowed_cols) {
    int degenerate_streak = 0;
    for (int iter = 0; iter < 100000; ++iter) {
      const bool bland = degenerate_streak > 50;
      int pc = -1;
      double best = -kEps;
      for (int c = 0; c < allowed_cols; ++c) {
        if (cost(c) < best) {
          pc = c;
          if (bland) break;
          best = cost(c);
        }
      }
      if (pc < 0) return true;
      int pr = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m_; ++r) {
        const double a = at(r, pc);
        if (a > kEps) {
          const double q = rhs(r) / a;
          if (q < ratio - kEps || (q <= ratio + kEps && pr >= 0 && basis_[r] < basis_[pr])) {
            ratio = q;
            pr = r;
          }
        }
      }
      if (pr < 0) return false;
      degenerate_streak = ratio < kEps ? degenerate_streak + 1 : 0;
      pivot(pr, pc);
    }
    throw EstimationError("simplex iteration limit reached in hull test");
  }

 private:
  int m_;
  int n_;
  std::vector<double> t_;
  std::vector<int> basis_;
};

}  // namespace

double ray_hull_extent(const Eigen::MatrixXd& points, const Eigen::VectorXd& origin,
                       const Eigen::VectorXd& direction) {
  const int s = static_cast<int>(points.rows());
  const int k = static_cast<int>(points.cols());
  if (s == 0) throw DomainError("hull of an empty point set");
  if (origin.size() != k || direction.size() != k) throw DomainError("hull dimension mismatch");

  Eigen::VectorXd scale(k);
  for (int c = 0; c < k; ++c) {
    const double sd = std::sqrt((points.col(c).array() - points.col(c).mean()).square().mean());
    const double spread = std::max(sd, std::abs(direction[c]));
    scale[c] = spread > 0.0 ? spread : 1.0;
  }
  const Eigen::VectorXd d = direction.cwiseQuotient(scale);
  const bool zero_direction = d.cwiseAbs().maxCoeff() < 1e-14;

  // Variables: w_0..w_{s-1}, t, artificial a_0..a_k. Rows: k coordinate rows + 1 simplex row.
  const int m = k + 1;
  const int t_col = s;
  const int art0 = s + 1;
  Tableau tab(m, s + 1 + m);
  for (int r = 0; r < k; ++r) {
    for (int j = 0; j < s; ++j) tab.at(r, j) = (points(j, r) - origin[r]) / scale[r];
    tab.at(r, t_col) = -d[r];
    tab.rhs(r) = 0.0;
  }
  for (int j = 0; j < s; ++j) tab.at(k, j) = 1.0;
  tab.rhs(k) = 1.0;
  for (int r = 0; r < m; ++r) {
    tab.at(r, art0 + r) = 1.0;
    tab.basis()[r] = art0 + r;
  }

  // Phase 1: minimize the sum of artificials.
  for (int c = 0; c <= tab.cols(); ++c) {
    double sum = 0.0;
    for (int r = 0; r < m; ++r) sum += tab.at(r, c);
    tab.cost(c) = (c >= art0 && c < tab.cols()) ? 0.0 : -sum;
  }
  tab.optimize(art0);
  if (-tab.cost(tab.cols()) > 1e-8) return -1.0;  // origin outside the hull

  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < art0) continue;
    for (int c = 0; c < art0; ++c)
      if (std::abs(tab.at(r, c)) > 1e-9) {
        tab.pivot(r, c);
        break;
      }
  }
  if (zero_direction) return std::numeric_limits<double>::infinity();

  // Phase 2: minimize -t over the feasible set.
  for (int c = 0; c <= tab.cols(); ++c) tab.cost(c) = 0.0;
  tab.cost(t_col) = -1.0;
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis()[r];
    const double f = tab.cost(b);
    if (f == 0.0) continue;
    for (int c = 0; c <= tab.cols(); ++c) tab.cost(c) -= f * tab.at(r, c);
  }
  if (!tab.optimize(art0)) return std::numeric_limits<double>::infinity();
  for (int r = 0; r < m; ++r)
    if (tab.basis()[r] == t_col) return std::max(0.0, tab.rhs(r));
  return 0.0;
}

bool strictly_inside_hull(const Eigen::MatrixXd& points, const Eigen::VectorXd& x) {
  const Eigen::VectorXd centroid = points.colwise().mean().transpose();
  const double t = ray_hull_extent(points, centroid, x - centroid);
  return t > 1.0 + 1e-7;
}

}  // namespace countergm
