#pragma once

// Successive approximations for the TCM. Iterate 1 is the low-pass data held
// constant in time; iterate n+1 solves the linear system
//
//   u_t + mu (-Lap)^alpha u = P[-u_n.grad u - div(v_n (x) v_n)]
//   v_t + nu (-Lap)^alpha v = -u_n.grad v - grad theta_n - v_n.grad u_n
//   theta_t                 = -u_n.grad theta - div v_n
//
// from S_{n+1} of the data, with (u_n, v_n, theta_n) frozen from the
// previous trajectory.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tcm/model.hpp"

namespace tcm::picard {

using model::ModelParams;
using model::TCMState;

struct BudgetY {
  double M = 0.0;
  double delta = 0.5;
  double T = 0.0;
  double s_uv = 0.0;
  double s_theta = 0.0;
  double s_smooth = 0.0;

  /// M = 2 (|u0|_{B^{s_uv}} + |v0|_{B^{s_uv}} + |theta0|_{B^{s_theta}}), all B_{2,1}.
  static BudgetY from_data(const TCMState& data, double alpha, double delta, double T,
                           const lp::DyadicPartition& part);
};

struct BudgetCheck {
  // u, v in L~inf B^{s_uv}; theta in L~inf B^{s_theta}; u, v in L1 B^{s_smooth}
  double u_inf = 0.0, v_inf = 0.0, theta_inf = 0.0, u_l1 = 0.0, v_l1 = 0.0;
  bool pass = true;
  std::string violated;                   // name of the first violated norm
  std::optional<double> violation_time;   // earliest sample time it is exceeded
};

/// A posteriori block-norm budget of one linear solve. Each entry is
/// sum_j 2^{js} int_0^T X_j dt with the structural constant set to 1.
struct TermBreakdown {
  std::array<double, 5> J{};  // u equation
  std::array<double, 7> K{};  // v equation
  std::array<double, 4> I{};  // theta equation
  // sum_j 2^{js} max(0, sup_t |Delta_j y(t)| - |Delta_j y(0)|)
  double growth_u = 0.0, growth_v = 0.0, growth_theta = 0.0;

  double J_total() const;
  double K_total() const;
  double I_total() const;
  /// Largest of growth / term total over the three equations (0 when no growth).
  double dominance_ratio() const;
};

struct IterateTrajectory {
  int n = 1;
  std::vector<TCMState> samples;
  BudgetCheck budget;
  TermBreakdown terms;

  double dt() const;
  /// Frozen coefficients at time t: sample values, linear in between.
  TCMState at(double t) const;
};

/// Initial value of iterate n+1: S_{n+1} applied to every field. Throws
/// std::invalid_argument if u0 is not divergence-free.
TCMState init_iterate(const TCMState& data, int n, const lp::DyadicPartition& part);

/// Iterate 1, constant in time on [0, T] with the given step.
IterateTrajectory first_iterate(const TCMState& data, double T, double dt,
                                const lp::DyadicPartition& part);

/// Linear solve for iterate prev.n + 1 on the time samples of prev.
IterateTrajectory advance_iterate(const IterateTrajectory& prev, const TCMState& data,
                                  const model::Stepper& stepper, const BudgetY& budget, double dt);

BudgetCheck check_budget(const std::vector<TCMState>& samples, const BudgetY& budget,
                         const lp::DyadicPartition& part);
TermBreakdown term_breakdown(const IterateTrajectory& prev, const std::vector<TCMState>& next,
                             const BudgetY& budget, const lp::DyadicPartition& part);

/// Difference of two trajectories on shared samples:
/// |du|_{L~inf B^{s_uv}} + |dv|_{L~inf B^{s_uv}} + |dtheta|_{L~inf B^{s_theta}}.
double difference_norm(const std::vector<TCMState>& a, const std::vector<TCMState>& b,
                       const BudgetY& budget, const lp::DyadicPartition& part);

enum class SchemeStatus { Converged, BudgetViolation, NonContraction, BlowUp };
std::string to_string(SchemeStatus s);

struct ContractionRow {
  int n = 0;            // difference between iterates n and n+1
  double difference = 0.0;
  double ratio = 0.0;   // difference / previous difference (0 for the first row)
  BudgetCheck budget;   // of iterate n+1
  TermBreakdown terms;  // of iterate n+1
};

struct SchemeOptions {
  int n_max = 40;
  double contraction_tol = 1e-8;
  bool keep_all = false;
};

struct SchemeResult {
  SchemeStatus status = SchemeStatus::NonContraction;
  std::vector<ContractionRow> table;
  std::vector<IterateTrajectory> trajectories;  // last one only unless keep_all
  bool all_in_budget = true;
  std::optional<double> blow_up_time;
  std::string message;
};

SchemeResult run_scheme(const TCMState& data, const ModelParams& params, const BudgetY& budget,
                        double dt, const SchemeOptions& options = {});

/// max_i |y_{i+1} - step(y_i)| / |y_0| for the full nonlinear step.
double fixed_point_residual(const std::vector<TCMState>& samples, const model::Stepper& stepper);

}  // namespace tcm::picard
