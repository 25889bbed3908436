#include "brickgen/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace brickgen::lp {

int LinearProgram::add_column(double cost, std::string name) {
  cost_.push_back(cost);
  if (name.empty()) name = "x" + std::to_string(cost_.size() - 1);
  col_names_.push_back(std::move(name));
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::add_row(double rhs, std::string name) {
  rhs_.push_back(rhs);
  if (name.empty()) name = "c" + std::to_string(rhs_.size() - 1);
  row_names_.push_back(std::move(name));
  return static_cast<int>(rhs_.size()) - 1;
}

void LinearProgram::add_entry(int row, int col, double value) {
  if (value != 0.0) entries_.push_back({row, col, value});
}

void LinearProgram::write_lp_format(std::ostream& out) const {
  out.precision(17);
  auto term = [&out](double v, const std::string& name, bool first) {
    if (v < 0) {
      out << " - " << -v << ' ' << name;
    } else {
      out << (first ? " " : " + ") << v << ' ' << name;
    }
  };
  out << "\\ brickgen stability program\nMinimize\n obj:";
  bool first = true;
  for (int c = 0; c < num_cols(); ++c) {
    if (cost_[c] == 0.0) continue;
    term(cost_[c], col_names_[c], first);
    first = false;
    if (c % 8 == 7) out << "\n     ";
  }
  if (first) out << " 0 " << (col_names_.empty() ? "x0" : col_names_[0]);
  out << "\nSubject To\n";
  std::vector<std::vector<Entry>> rows(rhs_.size());
  for (const auto& e : entries_) rows[e.row].push_back(e);
  for (int r = 0; r < num_rows(); ++r) {
    out << ' ' << row_names_[r] << ':';
    bool f = true;
    for (const auto& e : rows[r]) {
      term(e.value, col_names_[e.col], f);
      f = false;
    }
    if (f) out << " 0 " << col_names_.front();
    out << " = " << rhs_[r] << '\n';
  }
  out << "End\n";
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::iteration_limit: return "iteration_limit";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

// Largest step in (0, 1] keeping v + a*dv >= 0.
double max_step(const Vec& v, const Vec& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
  }
  return a;
}

// Normal equations A diag(d) A' with a small diagonal shift; solves are
// refined against the unshifted operator.
class NormalSolver {
 public:
  explicit NormalSolver(const SpMat& A) : A_(A), At_(A.transpose()) {}

  bool factor(const Vec& d, double reg = 1e-12) {
    d_ = d;
    SpMat M = A_ * d.asDiagonal() * At_;
    for (int attempt = 0; attempt < 10; ++attempt) {
      SpMat R = M;
      for (Eigen::Index i = 0; i < R.rows(); ++i) R.coeffRef(i, i) += reg;
      R.makeCompressed();
      if (!analyzed_ || R.nonZeros() != pattern_nnz_) {
        ldlt_.analyzePattern(R);
        analyzed_ = true;
        pattern_nnz_ = R.nonZeros();
      }
      ldlt_.factorize(R);
      if (ldlt_.info() == Eigen::Success) return true;
      reg *= 100.0;
    }
    return false;
  }

  Vec solve(const Vec& rhs) const {
    Vec v = ldlt_.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    for (int k = 0; k < 3; ++k) {
      Vec r = rhs - A_ * d_.cwiseProduct(At_ * v);
      if (!r.allFinite() || r.lpNorm<Eigen::Infinity>() <= 1e-15 * scale) break;
      v += ldlt_.solve(r);
    }
    return v;
  }

 private:
  const SpMat& A_;
  SpMat At_;
  Vec d_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  Eigen::Index pattern_nnz_ = -1;
};

}  // namespace

Solution solve(const LinearProgram& program, const Options& options) {
  const int m = program.num_rows();
  const int n = program.num_cols();
  Solution sol;
  if (n == 0) {
    sol.status = Status::optimal;
    return sol;
  }
  SpMat A(m, n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(program.entries().size());
    for (const auto& e : program.entries()) trip.emplace_back(e.row, e.col, e.value);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
  }
  const Vec b = Eigen::Map<const Vec>(program.rhs().data(), m);
  const Vec c = Eigen::Map<const Vec>(program.cost().data(), n);

  const double rho = options.primal_regularization;
  NormalSolver normal(A);
  Vec x(n), y = Vec::Zero(m), z(n);

  // Mehrotra's starting point.
  {
    if (!normal.factor(Vec::Ones(n))) return sol;
    Vec xt = A.transpose() * normal.solve(b);
    Vec yt = normal.solve(A * c);
    Vec zt = c - A.transpose() * yt;
    double dx = std::max(-1.5 * xt.minCoeff(), 0.0);
    double dz = std::max(-1.5 * zt.minCoeff(), 0.0);
    xt.array() += dx;
    zt.array() += dz;
    double xz = xt.dot(zt);
    double dxh = xz > 0 ? 0.5 * xz / std::max(zt.sum(), 1e-300) : 0.0;
    double dzh = xz > 0 ? 0.5 * xz / std::max(xt.sum(), 1e-300) : 0.0;
    x = xt.array() + dxh;
    z = zt.array() + dzh;
    // Guard against an all-zero start (e.g. b = 0 and c = 0).
    for (int i = 0; i < n; ++i) {
      x[i] = std::max(x[i], 1e-4);
      z[i] = std::max(z[i], 1e-4);
    }
    y = yt;
  }

  const double b_norm = b.lpNorm<Eigen::Infinity>();
  const double c_norm = c.lpNorm<Eigen::Infinity>();
  const bool trace = std::getenv("BRICKGEN_LP_TRACE") != nullptr;

  // Best iterate by the worst of the three relative measures.
  Vec best_x = x, best_y = y;
  double best_merit = std::numeric_limits<double>::infinity();
  double best_pr = 0, best_dr = 0, best_gap = 0;
  int best_iter = 0, stalled = 0;
  double ref_merit = std::numeric_limits<double>::infinity();

  sol.status = Status::iteration_limit;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Vec rp = b - A * x;
    Vec rd = c - A.transpose() * y - z;
    const double primal_obj = c.dot(x);
    const double pr = rp.lpNorm<Eigen::Infinity>() / (1.0 + b_norm);
    const double dr = rd.lpNorm<Eigen::Infinity>() / (1.0 + c_norm);
    // Complementarity rather than c'x - b'y: the latter is swamped by
    // residual-times-norm terms once both residuals are at rounding level.
    const double gap = x.dot(z) / (1.0 + std::abs(primal_obj));
    const double merit = std::max({pr, dr, gap});
    if (!std::isfinite(merit)) break;
    if (merit < 0.5 * ref_merit) {
      ref_merit = merit;
      stalled = 0;
    }
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_pr = pr, best_dr = dr, best_gap = gap;
      best_iter = iter;
    }
    if (merit <= options.tolerance) break;
    // No halving of the merit in a long while: the iterates have stagnated.
    if (++stalled > 30) break;
    const double mu = x.dot(z) / n;
    if (trace) {
      std::fprintf(stderr, "it %d pr %.3e dr %.3e gap %.3e mu %.3e obj %.6e\n", iter, pr, dr, gap, mu, primal_obj);
    }
    // Primal proximal term: D = (Z/X + rho)^-1 keeps the normal matrix bounded.
    Vec d = (z.cwiseQuotient(x).array() + rho).inverse().matrix();
    Vec dx, dy, dz;
    double sigma = 0.0;
    bool finite = false;
    // A tiny pivot can survive factorization and blow up the solve; retry with a larger shift.
    for (double shift : {1e-12, 1e-9, 1e-6}) {
      if (!normal.factor(d, shift)) break;
      auto direction = [&](const Vec& rxz, Vec& dx_, Vec& dy_, Vec& dz_) {
        Vec t = rxz.cwiseQuotient(x) - rd;
        dy_ = normal.solve(rp - A * d.cwiseProduct(t));
        dx_ = d.cwiseProduct(t + A.transpose() * dy_);
        dz_ = rd - A.transpose() * dy_ + rho * dx_;
      };
      Vec dx_aff, dy_aff, dz_aff;
      Vec rxz = -x.cwiseProduct(z);
      direction(rxz, dx_aff, dy_aff, dz_aff);
      const double ap_aff = max_step(x, dx_aff);
      const double ad_aff = max_step(z, dz_aff);
      const double mu_aff = (x + ap_aff * dx_aff).dot(z + ad_aff * dz_aff) / n;
      sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);

      rxz.array() += -dx_aff.array() * dz_aff.array() + sigma * mu;
      direction(rxz, dx, dy, dz);
      finite = dx.allFinite() && dy.allFinite() && dz.allFinite();
      if (finite) break;
      if (trace) std::fprintf(stderr, "   non-finite direction at shift %.0e\n", shift);
    }
    if (!finite) break;
    const double ap = std::min(1.0, options.step_factor * max_step(x, dx));
    const double ad = std::min(1.0, options.step_factor * max_step(z, dz));
    if (trace) std::fprintf(stderr, "   ap %.3e ad %.3e sigma %.3e\n", ap, ad, sigma);
    x += ap * dx;
    y += ad * dy;
    z += ad * dz;
  }
  x = best_x;
  y = best_y;
  sol.primal_residual = best_pr;
  sol.dual_residual = best_dr;
  sol.gap = best_gap;
  sol.iterations = best_iter;
  if (best_merit <= options.tolerance) {
    sol.status = Status::optimal;
  } else if (!std::isfinite(best_merit)) {
    sol.status = Status::numerical_failure;
  } else {
    sol.status = Status::iteration_limit;
  }
  sol.x.assign(x.data(), x.data() + n);
  for (double& v : sol.x) v = std::max(v, 0.0);
  sol.y.assign(y.data(), y.data() + m);
  sol.objective = 0.0;
  for (int i = 0; i < n; ++i) sol.objective += program.cost()[i] * sol.x[i];
  return sol;
}

}  // namespace brickgen::lp
