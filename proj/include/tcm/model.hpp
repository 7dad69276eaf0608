#pragma once

// Tropical climate model with alpha = beta and no thermal diffusion:
//
//   u_t + u.grad u + mu (-Lap)^alpha u + div(v (x) v) + grad p = 0
//   v_t + u.grad v + nu (-Lap)^alpha v + v.grad u + grad theta = 0
//   theta_t + u.grad theta + div v = 0,     div u = 0
//
// The pressure is removed by the Leray projection. Time stepping uses an
// integrating-factor Heun scheme: dissipation is integrated exactly per
// mode, the remaining terms with a second-order explicit predictor-corrector.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcm/littlewood_paley.hpp"
#include "tcm/spectral_field.hpp"

namespace tcm::model {

struct ModelParams {
  double mu = 1.0;
  double nu = 1.0;
  double alpha = 1.0;

  /// Throws std::invalid_argument unless mu, nu >= 0 and 1 <= alpha < 1 + d/4.
  void validate(int d) const;
};

struct TCMState {
  VectorField u;
  VectorField v;
  SpectralField theta;
  double t = 0.0;

  explicit TCMState(const Grid& grid) : u(grid), v(grid), theta(grid) {}
  TCMState(VectorField u_, VectorField v_, SpectralField theta_, double t_ = 0.0)
      : u(std::move(u_)), v(std::move(v_)), theta(std::move(theta_)), t(t_) {}

  const Grid& grid() const { return theta.grid(); }

  /// this += s * other (time untouched)
  TCMState& add_scaled(double s, const TCMState& other);
};

/// Time derivative contributions (u, v, theta) excluding dissipation.
using Tendency = TCMState;

/// sqrt(|u|^2 + |v|^2 + |theta|^2) in lattice-mean L^2.
double l2_norm(const TCMState& s);
/// 1/2 (|u|^2 + |v|^2 + |theta|^2).
double energy(const TCMState& s);
/// mu |Lambda^alpha u|^2 + nu |Lambda^alpha v|^2.
double dissipation_rate(const TCMState& s, const ModelParams& params);
/// |div u| / |u| (0 for u = 0).
double divergence_residual(const VectorField& u);
bool all_finite(const TCMState& s);

VectorField leray_project(const VectorField& w);

/// Nonlinear and coupling terms:
///   du/dt = -P[u.grad u + div(v (x) v)]
///   dv/dt = -u.grad v - v.grad u - grad theta
///   dtheta/dt = -u.grad theta - div v
/// All products dealiased.
Tendency rhs(const TCMState& state, const ModelParams& params);

/// Transport-type products with separate advecting and advected fields.
/// Returns sum_i a_i d_i b for each component of b (dealiased).
VectorField advect(const VectorField& a, const VectorField& b);
SpectralField advect(const VectorField& a, const SpectralField& b);
/// sum_i d_i (a_i b_j) for each j (dealiased, divergence form).
VectorField divergence_of_tensor(const VectorField& a, const VectorField& b);

/// Raised when a coefficient becomes non-finite or the u Besov norm runs away.
class BlowUp : public std::runtime_error {
 public:
  BlowUp(double t, const std::string& what);
  double time() const { return t_; }

 private:
  double t_;
};

inline constexpr double kBlowUpBesovThreshold = 1e6;

/// Integrating-factor Heun stepper with cached decay tables.
class Stepper {
 public:
  Stepper(const Grid& grid, const ModelParams& params);

  const ModelParams& params() const { return params_; }
  const lp::DyadicPartition& partition() const { return partition_; }

  /// Generic IF-Heun step for tendency N(state, t):
  ///   k1 = N(y, t), y* = E(y + dt k1), k2 = N(y*, t + dt),
  ///   y' = E y + dt/2 (E k1 + k2), u re-projected.
  TCMState heun(const TCMState& y, double dt,
                const std::function<Tendency(const TCMState&, double)>& tendency) const;

  /// One step of the full nonlinear model. Throws BlowUp.
  TCMState step(const TCMState& y, double dt) const;

  /// Applies exp(-mu |k|^{2 alpha} dt) to u and exp(-nu |k|^{2 alpha} dt) to v.
  void apply_decay(TCMState& y, double dt) const;

  /// Throws BlowUp if y has non-finite coefficients or an oversized u norm.
  void check_blow_up(const TCMState& y) const;

 private:
  Grid grid_;
  ModelParams params_;
  lp::DyadicPartition partition_;
  std::vector<double> symbol_;  // |k|^{2 alpha}, 0 at k = 0
};

/// Convenience wrapper around Stepper::step.
TCMState step(const TCMState& state, const ModelParams& params, double dt);

struct EnergyBalance {
  std::vector<double> residual;  // per interval, relative to energy_scale
  double energy_scale = 0.0;
  double total = 0.0;            // sum of residual
};

/// Per-interval residual of d/dt E = -D on uniformly sampled states. The
/// dissipation integral over [t_i, t_{i+1}] uses the quadratic through three
/// neighbouring samples. Throws for fewer than 3 samples or non-uniform spacing.
EnergyBalance energy_balance(const std::vector<TCMState>& samples, const ModelParams& params);

}  // namespace tcm::model
