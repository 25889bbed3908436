#include "brickgen/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "brickgen/geometry.hpp"

namespace brickgen {

double Vec3::l1() const { return std::abs(x) + std::abs(y) + std::abs(z); }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

const char* to_string(ForceClass c) {
  switch (c) {
    case ForceClass::gravity: return "gravity";
    case ForceClass::support: return "support";
    case ForceClass::drag: return "drag";
    case ForceClass::shear_pos_x: return "shear+x";
    case ForceClass::shear_neg_x: return "shear-x";
    case ForceClass::shear_pos_y: return "shear+y";
    case ForceClass::shear_neg_y: return "shear-y";
    case ForceClass::side_contact: return "side";
  }
  return "unknown";
}

ForceModel build_force_model(const BrickStructure& s, const PhysicalParams& p) {
  OccupancyMap::build(s);  // rejects colliding structures

  ForceModel m;
  m.grid = s.grid;
  const double pitch = s.grid.stud_pitch_mm * 1e-3;
  const double layer = s.grid.layer_height_mm * 1e-3;
  const std::size_t n = s.size();
  m.weight.resize(n);
  m.center.resize(n);
  m.candidates.resize(n);
  m.drag_set.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Brick& b = s.bricks[i];
    m.weight[i] = p.stud_mass * b.area() * p.gravity;
    m.center[i] = {(b.x + 0.5 * b.dims.h) * pitch, (b.y + 0.5 * b.dims.w) * pitch, (b.z + 0.5) * layer};
    m.candidates[i].push_back({ForceClass::gravity, -1, {0, 0, -1}, {0, 0, 0}});
  }

  auto add = [&](ForceClass cls, int first, int second, Vec3 point, Vec3 dir, int knob) {
    int id = static_cast<int>(m.variables.size());
    m.variables.push_back({cls, first, second, point, dir, knob});
    m.candidates[first].push_back({cls, id, dir, point - m.center[first]});
    if (second >= 0) m.candidates[second].push_back({cls, id, dir * -1.0, point - m.center[second]});
    return id;
  };

  int knob_id = 0;
  for (const auto& c : connections(s)) {
    const int z = s.bricks[c.upper].z;
    for (const auto& k : c.knobs) {
      const Vec3 point{(k.x + 0.5) * pitch, (k.y + 0.5) * pitch, z * layer};
      int sup = add(ForceClass::support, c.upper, c.lower, point, {0, 0, 1}, knob_id);
      int drg = add(ForceClass::drag, c.upper, c.lower, point, {0, 0, -1}, knob_id);
      add(ForceClass::shear_pos_x, c.upper, c.lower, point, {1, 0, 0}, knob_id);
      add(ForceClass::shear_neg_x, c.upper, c.lower, point, {-1, 0, 0}, knob_id);
      add(ForceClass::shear_pos_y, c.upper, c.lower, point, {0, 1, 0}, knob_id);
      add(ForceClass::shear_neg_y, c.upper, c.lower, point, {0, -1, 0}, knob_id);
      m.drag_set[c.upper].push_back(drg);
      m.forbidden_pairs.emplace_back(sup, drg);
      ++knob_id;
    }
  }
  for (const auto& sc : side_contacts(s)) {
    for (const auto& v : sc.cells) {
      // `a` is pushed toward -axis, `b` toward +axis, at the shared face-cell center.
      Vec3 point, dir;
      if (sc.axis == Axis::x) {
        point = {(v.x + 1.0) * pitch, (v.y + 0.5) * pitch, (v.z + 0.5) * layer};
        dir = {-1, 0, 0};
      } else {
        point = {(v.x + 0.5) * pitch, (v.y + 1.0) * pitch, (v.z + 0.5) * layer};
        dir = {0, -1, 0};
      }
      add(ForceClass::side_contact, sc.a, sc.b, point, dir, -1);
    }
  }
  return m;
}

void reduce_opposing_pairs(const ForceModel& m, std::vector<double>& mag) {
  auto reduce = [&mag](int a, int b) {
    double t = std::min(mag[a], mag[b]);
    mag[a] -= t;
    mag[b] -= t;
  };
  for (const auto& [sup, drg] : m.forbidden_pairs) {
    reduce(sup, drg);
    // Shear variables follow the drag at fixed offsets (+x, -x, +y, -y).
    reduce(drg + 1, drg + 2);
    reduce(drg + 3, drg + 4);
  }
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> equilibrium_residuals(const ForceModel& m,
                                                                      const std::vector<double>& mag) {
  const std::size_t n = m.brick_count();
  std::vector<Vec3> force(n), torque(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : m.candidates[i]) {
      const double f = c.variable < 0 ? m.weight[i] : mag[c.variable];
      const Vec3 F = c.direction * f;
      force[i] += F;
      torque[i] += cross(c.lever, F);
    }
  }
  return {force, torque};
}

std::vector<double> max_drag_per_brick(const ForceModel& m, const std::vector<double>& mag) {
  std::vector<double> out(m.brick_count(), 0.0);
  for (std::size_t i = 0; i < m.brick_count(); ++i) {
    for (int v : m.drag_set[i]) out[i] = std::max(out[i], mag[v]);
  }
  return out;
}

double objective_value(const ForceModel& m, const std::vector<double>& mag, const PhysicalParams& p) {
  auto [force, torque] = equilibrium_residuals(m, mag);
  const auto dmax = max_drag_per_brick(m, mag);
  const double pitch = m.stud_pitch_m();
  double total = 0.0;
  for (std::size_t i = 0; i < m.brick_count(); ++i) {
    double drag_sum = 0.0;
    for (int v : m.drag_set[i]) drag_sum += mag[v];
    total += force[i].l1() + torque[i].l1() / pitch + p.alpha * dmax[i] + p.beta * drag_sum;
  }
  return total;
}

ForceSolution solve_equilibrium(const ForceModel& m, const PhysicalParams& p, const SolveOptions& opts) {
  // Internal units: force in stud weights, torque in stud weights x stud pitch.
  const double unit = p.stud_mass * p.gravity;
  const double pitch = m.stud_pitch_m();
  const std::size_t n = m.brick_count();

  lp::LinearProgram program;
  std::vector<int> eq_row(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    eq_row[i] = program.num_rows();
    static const char* axes[6] = {"fx", "fy", "fz", "tx", "ty", "tz"};
    for (int k = 0; k < 6; ++k) {
      double rhs = k == 2 ? m.weight[i] / unit : 0.0;  // gravity moved to the right-hand side
      program.add_row(rhs, std::string(axes[k]) + "_" + std::to_string(i));
    }
  }
  const int nvar = static_cast<int>(m.variables.size());
  for (int v = 0; v < nvar; ++v) {
    const auto& fv = m.variables[v];
    double cost = p.regularization;
    if (fv.cls == ForceClass::drag) cost += p.beta;
    int col = program.add_column(cost, std::string(to_string(fv.cls)) + "_" + std::to_string(v));
    (void)col;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : m.candidates[i]) {
      if (c.variable < 0) continue;
      const Vec3 t = cross(c.lever, c.direction) * (1.0 / pitch);
      const double coeffs[6] = {c.direction.x, c.direction.y, c.direction.z, t.x, t.y, t.z};
      for (int k = 0; k < 6; ++k) program.add_entry(eq_row[i] + k, c.variable, coeffs[k]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 6; ++k) {
      int plus = program.add_column(1.0, "rp" + std::to_string(i) + "_" + std::to_string(k));
      int minus = program.add_column(1.0, "rm" + std::to_string(i) + "_" + std::to_string(k));
      program.add_entry(eq_row[i] + k, plus, 1.0);
      program.add_entry(eq_row[i] + k, minus, -1.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.drag_set[i].empty()) continue;
    int dmax = program.add_column(p.alpha, "dmax_" + std::to_string(i));
    for (int v : m.drag_set[i]) {
      int row = program.add_row(0.0, "epi_" + std::to_string(v));
      int slack = program.add_column(0.0, "u_" + std::to_string(v));
      program.add_entry(row, v, 1.0);
      program.add_entry(row, dmax, -1.0);
      program.add_entry(row, slack, 1.0);
    }
  }
  if (opts.lp_dump) program.write_lp_format(*opts.lp_dump);

  ForceSolution sol;
  sol.lever_unit = pitch;
  std::vector<double> mag(nvar, 0.0);
  if (program.num_rows() > 0) {
    lp::Solution lps = lp::solve(program, opts.lp);
    sol.status = lps.status;
    sol.iterations = lps.iterations;
    sol.lp_objective = lps.objective;
    if (lps.status == lp::Status::numerical_failure) {
      throw Error(ErrorCode::solver_failure, "equilibrium solve broke down numerically");
    }
    // Accept a stalled but nearly converged iterate; anything looser is a failure.
    if (lps.status == lp::Status::iteration_limit &&
        std::max({lps.primal_residual, lps.dual_residual, lps.gap}) > 1e-6) {
      throw Error(ErrorCode::solver_failure, "equilibrium solve did not converge");
    }
    for (int v = 0; v < nvar; ++v) mag[v] = lps.x[v] * unit;
  }
  sol.objective_before_reduction = objective_value(m, mag, p);
  reduce_opposing_pairs(m, mag);
  sol.magnitudes = mag;
  std::tie(sol.force_residual, sol.torque_residual) = equilibrium_residuals(m, mag);
  sol.max_drag = max_drag_per_brick(m, mag);
  sol.objective = objective_value(m, mag, p);
  return sol;
}

double StabilityReport::min_score() const {
  return scores.empty() ? 1.0 : *std::min_element(scores.begin(), scores.end());
}

double StabilityReport::mean_score() const {
  return scores.empty() ? 1.0 : std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
}

StabilityReport stability_scores(const ForceSolution& sol, const PhysicalParams& p) {
  StabilityReport r;
  const std::size_t n = sol.max_drag.size();
  r.scores.resize(n);
  r.max_drag = sol.max_drag;
  r.objective = sol.objective;
  r.solver_status = lp::to_string(sol.status);
  for (std::size_t i = 0; i < n; ++i) {
    const bool force_ok = sol.force_residual[i].l1() <= p.eq_tolerance;
    const bool torque_ok = sol.torque_residual[i].l1() / sol.lever_unit <= p.eq_tolerance;
    const double dmax = sol.max_drag[i];
    if (!force_ok || !torque_ok || dmax > p.friction_capacity) {
      r.scores[i] = 0.0;
      r.unstable.push_back(static_cast<int>(i));
    } else {
      r.scores[i] = (p.friction_capacity - dmax) / p.friction_capacity;
    }
  }
  r.stable = r.unstable.empty();
  return r;
}

StabilityReport analyze(const BrickStructure& s, const PhysicalParams& p, const SolveOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  StabilityReport r;
  if (!s.empty()) {
    const ForceModel model = build_force_model(s, p);
    const ForceSolution sol = solve_equilibrium(model, p, opts);
    r = stability_scores(sol, p);
  }
  r.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::optional<int> check_buildability(const BrickStructure& s, const PhysicalParams& p) {
  BrickStructure prefix{s.grid, {}};
  for (std::size_t k = 0; k < s.size(); ++k) {
    prefix.bricks.push_back(s.bricks[k]);
    if (!analyze(prefix, p).stable) return static_cast<int>(k + 1);
  }
  return std::nullopt;
}

nlohmann::json to_json(const StabilityReport& r) {
  return {
      {"stable", r.stable},
      {"scores", r.scores},
      {"unstable", r.unstable},
      {"max_drag", r.max_drag},
      {"min_score", r.min_score()},
      {"mean_score", r.mean_score()},
      {"objective", r.objective},
      {"solver_status", r.solver_status},
      {"solve_seconds", r.solve_seconds},
  };
}

}  // namespace brickgen
