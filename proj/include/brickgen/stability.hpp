#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "brickgen/core.hpp"
#include "brickgen/lp.hpp"

namespace brickgen {

struct PhysicalParams {
  double friction_capacity = 0.98;       // F_T, newtons
  double alpha = 1e-3;                   // weight on per-brick max drag
  double beta = 1e-6;                    // weight on summed drag
  double stud_mass = 0.29e-3;            // kg per stud of brick area
  double gravity = 9.8;                  // m/s^2
  double eq_tolerance = 1e-6;            // newtons (torques compared after dividing by stud pitch)
  double complementarity_tolerance = 1e-9;
  double regularization = 1e-9;          // cost on otherwise free force variables, per stud weight
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double l1() const;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};
Vec3 cross(const Vec3& a, const Vec3& b);

enum class ForceClass {
  gravity,
  support,      // up on the upper brick, pressing down on the lower one
  drag,         // clutch friction: down on the upper brick, pulling up the lower one
  shear_pos_x,
  shear_neg_x,
  shear_pos_y,
  shear_neg_y,
  side_contact, // compressive normal between same-layer neighbours
};
const char* to_string(ForceClass c);

/// One unknown magnitude shared by a Newton pair: `first` receives
/// +direction, `second` (a brick or kBaseplate) receives -direction.
struct ForceVariable {
  ForceClass cls = ForceClass::support;
  int first = 0;
  int second = -1;
  Vec3 point;      // metres
  Vec3 direction;  // unit, as seen by `first`
  int knob = -1;   // stud connection id for knob forces, -1 otherwise
};

/// A force acting on one brick: either gravity (variable == -1) or a signed view of a variable.
struct Candidate {
  ForceClass cls = ForceClass::gravity;
  int variable = -1;
  Vec3 direction;  // unit direction on this brick
  Vec3 lever;      // application point minus the brick's center of mass, metres
};

struct ForceModel {
  GridWorld grid;
  std::vector<double> weight;  // newtons
  std::vector<Vec3> center;    // metres
  std::vector<ForceVariable> variables;
  std::vector<std::vector<Candidate>> candidates;  // per brick, gravity first
  std::vector<std::vector<int>> drag_set;          // drag variables owned by each brick
  std::vector<std::pair<int, int>> forbidden_pairs;  // (support, drag) at the same knob

  std::size_t brick_count() const { return weight.size(); }
  double stud_pitch_m() const { return grid.stud_pitch_mm * 1e-3; }
};

ForceModel build_force_model(const BrickStructure& s, const PhysicalParams& p = {});

struct ForceSolution {
  std::vector<double> magnitudes;      // newtons, per variable, after pair reduction
  std::vector<Vec3> force_residual;    // newtons, per brick
  std::vector<Vec3> torque_residual;   // newton-metres, per brick
  std::vector<double> max_drag;        // newtons, per brick
  double objective = 0.0;              // recomputed after reduction
  double objective_before_reduction = 0.0;
  double lp_objective = 0.0;           // solver units (stud weights)
  double lever_unit = 0.008;           // torque residuals are divided by this before thresholding
  lp::Status status = lp::Status::optimal;
  int iterations = 0;
};

struct SolveOptions {
  lp::Options lp;
  std::ostream* lp_dump = nullptr;  // receives the program in CPLEX LP format
};

/// Throws Error(solver_failure) on numerical breakdown.
ForceSolution solve_equilibrium(const ForceModel& m, const PhysicalParams& p = {},
                                const SolveOptions& opts = {});

/// Subtracts min(a, b) from both magnitudes of every opposing pair at one
/// point: (support, drag) and the two shear pairs at each knob.
void reduce_opposing_pairs(const ForceModel& m, std::vector<double>& magnitudes);

/// Net force and torque per brick (gravity included).
std::pair<std::vector<Vec3>, std::vector<Vec3>> equilibrium_residuals(const ForceModel& m,
                                                                      const std::vector<double>& magnitudes);
std::vector<double> max_drag_per_brick(const ForceModel& m, const std::vector<double>& magnitudes);
/// sum_i |F_i|_1 + |tau_i|_1 / pitch + alpha * Dmax_i + beta * sum(D_i)
double objective_value(const ForceModel& m, const std::vector<double>& magnitudes, const PhysicalParams& p);

struct StabilityReport {
  std::vector<double> scores;
  std::vector<int> unstable;  // ascending indices with s_i = 0
  std::vector<double> max_drag;
  bool stable = true;
  double solve_seconds = 0.0;
  double objective = 0.0;
  std::string solver_status = "optimal";

  double min_score() const;
  double mean_score() const;
};

StabilityReport stability_scores(const ForceSolution& sol, const PhysicalParams& p = {});

StabilityReport analyze(const BrickStructure& s, const PhysicalParams& p = {}, const SolveOptions& opts = {});

/// Smallest k such that the prefix of k bricks is unstable; nullopt if every prefix is stable.
std::optional<int> check_buildability(const BrickStructure& s, const PhysicalParams& p = {});

nlohmann::json to_json(const StabilityReport& r);

}  // namespace brickgen
