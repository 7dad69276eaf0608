#include "tcm/picard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tcm::picard {

using lp::BesovIndex;
using lp::Summability;

BudgetY BudgetY::from_data(const TCMState& data, double alpha, double delta, double T,
                           const lp::DyadicPartition& part) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  const int d = data.grid().dim();
  BudgetY b;
  b.delta = delta;
  b.T = T;
  b.s_uv = 1.0 + d / 2.0 - 2.0 * alpha;
  b.s_theta = 1.0 + d / 2.0 - alpha;
  b.s_smooth = 1.0 + d / 2.0;
  b.M = 2.0 * (lp::besov_norm(data.u, {b.s_uv, Summability::One}, part) +
               lp::besov_norm(data.v, {b.s_uv, Summability::One}, part) +
               lp::besov_norm(data.theta, {b.s_theta, Summability::One}, part));
  return b;
}

double TermBreakdown::J_total() const {
  double s = 0.0;
  for (double x : J) s += x;
  return s;
}
double TermBreakdown::K_total() const {
  double s = 0.0;
  for (double x : K) s += x;
  return s;
}
double TermBreakdown::I_total() const {
  double s = 0.0;
  for (double x : I) s += x;
  return s;
}

double TermBreakdown::dominance_ratio() const {
  auto ratio = [](double growth, double total) {
    if (growth <= 0.0) return 0.0;
    return total > 0.0 ? growth / total : INFINITY;
  };
  return std::max({ratio(growth_u, J_total()), ratio(growth_v, K_total()),
                   ratio(growth_theta, I_total())});
}

double IterateTrajectory::dt() const {
  if (samples.size() < 2) return 0.0;
  return samples[1].t - samples[0].t;
}

TCMState IterateTrajectory::at(double t) const {
  if (samples.empty()) throw std::logic_error("empty trajectory");
  if (samples.size() == 1) return samples.front();
  const double h = dt();
  const double pos = (t - samples.front().t) / h;
  const double last = static_cast<double>(samples.size() - 1);
  if (pos < -1e-9 || pos > last + 1e-9) {
    std::ostringstream msg;
    msg << "time " << t << " outside stored trajectory";
    throw std::out_of_range(msg.str());
  }
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) return samples[static_cast<std::size_t>(nearest)];
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double w = pos - static_cast<double>(i);
  TCMState out = samples[i];
  out.add_scaled(-w, samples[i]);
  out.add_scaled(w, samples[i + 1]);
  out.t = t;
  return out;
}

TCMState init_iterate(const TCMState& data, int n, const lp::DyadicPartition& part) {
  if (n < 0) throw std::invalid_argument("iterate index must be >= 0");
  if (model::divergence_residual(data.u) > 1e-10) {
    throw std::invalid_argument("initial velocity u0 is not divergence-free");
  }
  TCMState out(lp::low_cutoff(data.u, n + 1, part), lp::low_cutoff(data.v, n + 1, part),
               lp::low_cutoff(data.theta, n + 1, part), 0.0);
  return out;
}

namespace {

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("T and dt must be positive");
  const double steps = std::round(T / dt);
  if (steps < 1.0 || std::abs(steps * dt - T) > 1e-9 * T) {
    throw std::invalid_argument("T must be an integer multiple of dt");
  }
  return static_cast<std::size_t>(steps);
}

// Parts of the right-hand side that depend on the frozen iterate only.
TCMState frozen_forcing(const TCMState& prev) {
  TCMState f(prev.grid());
  f.u = model::leray_project(model::divergence_of_tensor(prev.v, prev.v));
  f.u *= -1.0;
  f.v = gradient(prev.theta);
  f.v += model::advect(prev.v, prev.u);
  f.v *= -1.0;
  f.theta = divergence(prev.v);
  f.theta *= -1.0;
  f.t = prev.t;
  return f;
}

double pow2(double e) { return std::exp2(e); }

}  // namespace

IterateTrajectory first_iterate(const TCMState& data, double T, double dt,
                                const lp::DyadicPartition& part) {
  const std::size_t steps = step_count(T, dt);
  IterateTrajectory traj;
  traj.n = 1;
  TCMState s = init_iterate(data, 0, part);
  traj.samples.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    s.t = static_cast<double>(i) * dt;
    traj.samples.push_back(s);
  }
  return traj;
}

IterateTrajectory advance_iterate(const IterateTrajectory& prev, const TCMState& data,
                                  const model::Stepper& stepper, const BudgetY& budget, double dt) {
  if (prev.samples.empty()) throw std::invalid_argument("previous iterate is empty");
  const double T = prev.samples.back().t;
  const std::size_t steps = step_count(T, dt);
  const auto& part = stepper.partition();

  // Forcing is linear in the frozen iterate, so interpolating it between
  // samples is the same as forcing the interpolated iterate.
  IterateTrajectory forcing;
  forcing.samples.reserve(prev.samples.size());
  for (const auto& s : prev.samples) forcing.samples.push_back(frozen_forcing(s));

  auto tendency = [&](const TCMState& y, double t) {
    const TCMState coeff = prev.at(t);
    model::Tendency out = forcing.at(t);
    VectorField adv = model::leray_project(model::advect(coeff.u, y.u));
    out.u -= adv;
    out.v -= model::advect(coeff.u, y.v);
    out.theta -= model::advect(coeff.u, y.theta);
    return out;
  };

  IterateTrajectory next;
  next.n = prev.n + 1;
  next.samples.reserve(steps + 1);
  TCMState y = init_iterate(data, next.n - 1, part);
  y.t = 0.0;
  next.samples.push_back(y);
  for (std::size_t i = 1; i <= steps; ++i) {
    y = stepper.heun(y, dt, tendency);
    y.t = static_cast<double>(i) * dt;
    stepper.check_blow_up(y);
    next.samples.push_back(y);
  }
  next.budget = check_budget(next.samples, budget, part);
  next.terms = term_breakdown(prev, next.samples, budget, part);
  return next;
}

BudgetCheck check_budget(const std::vector<TCMState>& samples, const BudgetY& budget,
                         const lp::DyadicPartition& part) {
  BudgetCheck out;
  if (samples.empty()) return out;
  const std::size_t nb = static_cast<std::size_t>(part.block_count());
  std::vector<double> max_u(nb, 0.0), max_v(nb, 0.0), max_th(nb, 0.0);
  const double slack = 1.0 + 1e-12;
  double prev_su = 0.0, prev_sv = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    auto bu = lp::block_norms(s.u, part);
    auto bv = lp::block_norms(s.v, part);
    auto bt = lp::block_norms(s.theta, part);
    for (std::size_t b = 0; b < nb; ++b) {
      max_u[b] = std::max(max_u[b], bu[b]);
      max_v[b] = std::max(max_v[b], bv[b]);
      max_th[b] = std::max(max_th[b], bt[b]);
    }
    out.u_inf = lp::besov_from_blocks(max_u, {budget.s_uv, Summability::One});
    out.v_inf = lp::besov_from_blocks(max_v, {budget.s_uv, Summability::One});
    out.theta_inf = lp::besov_from_blocks(max_th, {budget.s_theta, Summability::One});
    const double su = lp::besov_from_blocks(bu, {budget.s_smooth, Summability::One});
    const double sv = lp::besov_from_blocks(bv, {budget.s_smooth, Summability::One});
    if (i > 0) {
      const double h = s.t - samples[i - 1].t;
      out.u_l1 += 0.5 * h * (su + prev_su);
      out.v_l1 += 0.5 * h * (sv + prev_sv);
    }
    prev_su = su;
    prev_sv = sv;

    if (out.pass) {
      const std::pair<const char*, bool> checks[] = {
          {"u_inf", out.u_inf > budget.M * slack},
          {"v_inf", out.v_inf > budget.M * slack},
          {"theta_inf", out.theta_inf > budget.M * slack},
          {"u_l1", out.u_l1 > budget.delta * slack},
          {"v_l1", out.v_l1 > budget.delta * slack},
      };
      for (const auto& [name, bad] : checks) {
        if (bad) {
          out.pass = false;
          out.violated = name;
          out.violation_time = s.t;
          break;
        }
      }
    }
  }
  return out;
}

namespace {

struct Blocks {
  std::vector<double> u, v, theta, u_tilde, v_tilde, theta_tilde;
};

Blocks blocks_of(const TCMState& s, const lp::DyadicPartition& part) {
  return {lp::block_norms(s.u, part),         lp::block_norms(s.v, part),
          lp::block_norms(s.theta, part),     lp::tilde_block_norms(s.u, part),
          lp::tilde_block_norms(s.v, part),   lp::tilde_block_norms(s.theta, part)};
}

// sum_{m <= j-1} 2^{w m} A_m
double low_sum(const std::vector<double>& a, int j, double w) {
  double s = 0.0;
  for (int m = -1; m <= j - 1 && m + 1 < static_cast<int>(a.size()); ++m) s += pow2(w * m) * a[m + 1];
  return s;
}

// 2^j sum_{k >= j-4} 2^{dk/2} A_k B~_k
double high_sum(const std::vector<double>& a, const std::vector<double>& b_tilde, int j, int d) {
  double s = 0.0;
  for (int k = std::max(-1, j - 4); k + 1 < static_cast<int>(a.size()); ++k) {
    s += pow2(0.5 * d * k) * a[k + 1] * b_tilde[k + 1];
  }
  return pow2(j) * s;
}

}  // namespace

TermBreakdown term_breakdown(const IterateTrajectory& prev, const std::vector<TCMState>& next,
                             const BudgetY& budget, const lp::DyadicPartition& part) {
  TermBreakdown out;
  if (next.empty()) return out;
  const int d = part.grid().dim();
  const int jmax = part.j_max();
  const double w1 = 1.0 + d / 2.0, w0 = d / 2.0;

  // terms[i][eq][j] at every sample
  std::vector<std::array<double, 16>> prev_row(part.block_count());
  std::array<double, 16> acc{};
  std::vector<std::array<double, 16>> row(part.block_count());
  const Blocks first = blocks_of(next.front(), part);
  std::vector<double> sup_u = first.u, sup_v = first.v, sup_t = first.theta;

  for (std::size_t i = 0; i < next.size(); ++i) {
    const TCMState c = prev.at(next[i].t);
    const Blocks A = blocks_of(c, part);
    const Blocks B = i == 0 ? first : blocks_of(next[i], part);
    for (int j = -1; j <= jmax; ++j) {
      const std::size_t jj = j + 1;
      auto& r = row[jj];
      const double two_j = pow2(j);
      // J: A = u_n, B = u_{n+1}; v_n in J4, J5
      r[0] = B.u[jj] * low_sum(A.u, j, w1);
      r[1] = A.u[jj] * low_sum(B.u, j, w1);
      r[2] = high_sum(A.u, B.u_tilde, j, d);
      r[3] = two_j * A.v[jj] * low_sum(A.v, j, w0);
      r[4] = high_sum(A.v, A.v_tilde, j, d);
      // K: B = v_{n+1}
      r[5] = B.v[jj] * low_sum(A.u, j, w1);
      r[6] = A.u[jj] * low_sum(B.v, j, w1);
      r[7] = high_sum(A.u, B.v_tilde, j, d);
      r[8] = two_j * A.u[jj] * low_sum(A.v, j, w0);
      r[9] = A.v[jj] * low_sum(A.u, j, w1);
      r[10] = high_sum(A.v, A.u_tilde, j, d);
      r[11] = two_j * A.theta[jj];
      // I: B = theta_{n+1}
      r[12] = B.theta[jj] * low_sum(A.u, j, w1);
      r[13] = A.u[jj] * low_sum(B.theta, j, w1);
      r[14] = high_sum(A.u, B.theta_tilde, j, d);
      r[15] = two_j * A.v[jj];
      if (i > 0) {
        const double h = next[i].t - next[i - 1].t;
        for (std::size_t q = 0; q < 16; ++q) {
          const double sj = q < 12 ? budget.s_uv : budget.s_theta;
          acc[q] += pow2(sj * j) * 0.5 * h * (r[q] + prev_row[jj][q]);
        }
      }
      sup_u[jj] = std::max(sup_u[jj], B.u[jj]);
      sup_v[jj] = std::max(sup_v[jj], B.v[jj]);
      sup_t[jj] = std::max(sup_t[jj], B.theta[jj]);
    }
    prev_row = row;
  }
  for (std::size_t q = 0; q < 5; ++q) out.J[q] = acc[q];
  for (std::size_t q = 0; q < 7; ++q) out.K[q] = acc[5 + q];
  for (std::size_t q = 0; q < 4; ++q) out.I[q] = acc[12 + q];
  for (int j = -1; j <= jmax; ++j) {
    const std::size_t jj = j + 1;
    out.growth_u += pow2(budget.s_uv * j) * std::max(0.0, sup_u[jj] - first.u[jj]);
    out.growth_v += pow2(budget.s_uv * j) * std::max(0.0, sup_v[jj] - first.v[jj]);
    out.growth_theta += pow2(budget.s_theta * j) * std::max(0.0, sup_t[jj] - first.theta[jj]);
  }
  return out;
}

double difference_norm(const std::vector<TCMState>& a, const std::vector<TCMState>& b,
                       const BudgetY& budget, const lp::DyadicPartition& part) {
  if (a.size() != b.size()) throw std::invalid_argument("trajectories have different lengths");
  const std::size_t nb = static_cast<std::size_t>(part.block_count());
  std::vector<double> mu(nb, 0.0), mv(nb, 0.0), mt(nb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].t - b[i].t) > 1e-12 * std::max(1.0, std::abs(a[i].t))) {
      throw std::invalid_argument("trajectories sampled at different times");
    }
    TCMState diff = a[i];
    diff.add_scaled(-1.0, b[i]);
    auto bu = lp::block_norms(diff.u, part);
    auto bv = lp::block_norms(diff.v, part);
    auto bt = lp::block_norms(diff.theta, part);
    for (std::size_t k = 0; k < nb; ++k) {
      mu[k] = std::max(mu[k], bu[k]);
      mv[k] = std::max(mv[k], bv[k]);
      mt[k] = std::max(mt[k], bt[k]);
    }
  }
  return lp::besov_from_blocks(mu, {budget.s_uv, Summability::One}) +
         lp::besov_from_blocks(mv, {budget.s_uv, Summability::One}) +
         lp::besov_from_blocks(mt, {budget.s_theta, Summability::One});
}

std::string to_string(SchemeStatus s) {
  switch (s) {
    case SchemeStatus::Converged: return "converged";
    case SchemeStatus::BudgetViolation: return "budget-violation";
    case SchemeStatus::NonContraction: return "non-contraction";
    case SchemeStatus::BlowUp: return "blow-up";
  }
  return "unknown";
}

SchemeResult run_scheme(const TCMState& data, const ModelParams& params, const BudgetY& budget,
                        double dt, const SchemeOptions& options) {
  if (options.n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const model::Stepper stepper(data.grid(), params);
  const auto& part = stepper.partition();
  SchemeResult result;

  IterateTrajectory current = first_iterate(data, budget.T, dt, part);
  current.budget = check_budget(current.samples, budget, part);
  result.all_in_budget = current.budget.pass;
  if (options.keep_all) result.trajectories.push_back(current);

  bool converged = false;
  double last_diff = 0.0;
  try {
    for (int n = 1; n < options.n_max; ++n) {
      IterateTrajectory next = advance_iterate(current, data, stepper, budget, dt);
      ContractionRow row;
      row.n = n;
      row.difference = difference_norm(next.samples, current.samples, budget, part);
      row.ratio = (n > 1 && last_diff > 0.0) ? row.difference / last_diff : 0.0;
      row.budget = next.budget;
      row.terms = next.terms;
      last_diff = row.difference;
      result.table.push_back(row);
      result.all_in_budget = result.all_in_budget && next.budget.pass;
      if (options.keep_all) result.trajectories.push_back(next);
      current = std::move(next);
      if (row.difference < options.contraction_tol) {
        converged = true;
        break;
      }
    }
  } catch (const model::BlowUp& e) {
    result.status = SchemeStatus::BlowUp;
    result.blow_up_time = e.time();
    result.message = e.what();
    if (!options.keep_all) result.trajectories.push_back(std::move(current));
    return result;
  }
  if (!options.keep_all) result.trajectories.push_back(std::move(current));

  if (!converged) {
    result.status = SchemeStatus::NonContraction;
    std::ostringstream msg;
    msg << "difference " << last_diff << " above tolerance " << options.contraction_tol
        << " after " << options.n_max << " iterates";
    result.message = msg.str();
  } else if (!result.all_in_budget) {
    result.status = SchemeStatus::BudgetViolation;
    for (const auto& row : result.table) {
      if (row.budget.pass) continue;
      std::ostringstream msg;
      msg << "iterate " << row.n + 1 << " exceeds the budget in " << row.budget.violated
          << " at t = " << *row.budget.violation_time;
      result.message = msg.str();
      break;
    }
    if (result.message.empty()) result.message = "iterate 1 exceeds the budget";
  } else {
    result.status = SchemeStatus::Converged;
  }
  return result;
}

double fixed_point_residual(const std::vector<TCMState>& samples, const model::Stepper& stepper) {
  if (samples.size() < 2) return 0.0;
  const double scale = model::l2_norm(samples.front());
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    TCMState stepped = stepper.step(samples[i], samples[i + 1].t - samples[i].t);
    stepped.add_scaled(-1.0, samples[i + 1]);
    worst = std::max(worst, model::l2_norm(stepped));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace tcm::picard
