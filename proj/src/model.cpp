#include "tcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcm/kernels.hpp"

namespace tcm::model {

void ModelParams::validate(int d) const {
  if (!(mu >= 0.0) || !(nu >= 0.0)) {
    throw std::invalid_argument("viscosities mu and nu must be >= 0");
  }
  const double upper = 1.0 + d / 4.0;
  if (!(alpha >= 1.0 && alpha < upper)) {
    std::ostringstream msg;
    msg << "alpha must lie in [1, " << upper << ") for d = " << d << ", got " << alpha;
    throw std::invalid_argument(msg.str());
  }
}

TCMState& TCMState::add_scaled(double s, const TCMState& other) {
  u.add_scaled(s, other.u);
  v.add_scaled(s, other.v);
  theta.add_scaled(s, other.theta);
  return *this;
}

double l2_norm(const TCMState& s) {
  const double a = tcm::l2_norm(s.u), b = tcm::l2_norm(s.v), c = tcm::l2_norm(s.theta);
  return std::sqrt(a * a + b * b + c * c);
}

double energy(const TCMState& s) {
  const double n = l2_norm(s);
  return 0.5 * n * n;
}

double dissipation_rate(const TCMState& s, const ModelParams& params) {
  const auto& geo = geometry(s.grid());
  std::vector<double> symbol(geo.k_norm.size());
  for (std::size_t i = 0; i < symbol.size(); ++i) {
    const double r = geo.k_norm[i];
    symbol[i] = r == 0.0 ? 0.0 : std::pow(r, 2.0 * params.alpha);
  }
  double du = 0.0, dv = 0.0;
  for (const auto& c : s.u) du += kernels::weighted_energy(c.coeffs(), symbol);
  for (const auto& c : s.v) dv += kernels::weighted_energy(c.coeffs(), symbol);
  return params.mu * du + params.nu * dv;
}

double divergence_residual(const VectorField& u) {
  const double norm = tcm::l2_norm(u);
  if (norm == 0.0) return 0.0;
  return tcm::l2_norm(divergence(u)) / norm;
}

bool all_finite(const TCMState& s) {
  auto ok = [](const SpectralField& f) { return std::isfinite(kernels::max_abs(f.coeffs())); };
  for (const auto& c : s.u) if (!ok(c)) return false;
  for (const auto& c : s.v) if (!ok(c)) return false;
  return ok(s.theta);
}

VectorField leray_project(const VectorField& w) {
  const Grid& grid = w.grid();
  const auto& geo = geometry(grid);
  const int d = grid.dim();
  const int nyq = -grid.modes() / 2;
  VectorField out(w);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Use the wavevector seen by derivative(): Nyquist components act as 0.
    double k[3] = {0.0, 0.0, 0.0};
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      k[a] = geo.k[i][a] == nyq ? 0.0 : geo.k[i][a];
      k2 += k[a] * k[a];
    }
    if (k2 == 0.0) continue;
    cplx kw{};
    for (int a = 0; a < d; ++a) kw += k[a] * w[a].coeffs()[i];
    for (int a = 0; a < d; ++a) out[a].coeffs()[i] -= k[a] * kw / k2;
  }
  return out;
}

namespace {

std::vector<double> physical(const SpectralField& f) { return inverse_transform(truncate(f)); }

SpectralField to_spectral(const Grid& grid, const std::vector<double>& phys) {
  auto out = forward_transform(grid, phys);
  truncate_in_place(out);
  return out;
}

}  // namespace

VectorField advect(const VectorField& a, const VectorField& b) {
  const Grid& grid = a.grid();
  ensure_same_grid(grid, b.grid());
  const int d = grid.dim();
  std::vector<std::vector<double>> ap(d);
  for (int i = 0; i < d; ++i) ap[i] = physical(a[i]);
  std::vector<SpectralField> comps;
  for (int j = 0; j < d; ++j) {
    std::vector<double> acc(grid.size(), 0.0);
    for (int i = 0; i < d; ++i) {
      kernels::accumulate_product(ap[i], physical(derivative(b[j], i)), acc);
    }
    comps.push_back(to_spectral(grid, acc));
  }
  return VectorField(std::move(comps));
}

SpectralField advect(const VectorField& a, const SpectralField& b) {
  const Grid& grid = a.grid();
  ensure_same_grid(grid, b.grid());
  std::vector<double> acc(grid.size(), 0.0);
  for (int i = 0; i < grid.dim(); ++i) {
    kernels::accumulate_product(physical(a[i]), physical(derivative(b, i)), acc);
  }
  return to_spectral(grid, acc);
}

VectorField divergence_of_tensor(const VectorField& a, const VectorField& b) {
  const Grid& grid = a.grid();
  ensure_same_grid(grid, b.grid());
  const int d = grid.dim();
  std::vector<std::vector<double>> ap(d), bp(d);
  for (int i = 0; i < d; ++i) {
    ap[i] = physical(a[i]);
    bp[i] = physical(b[i]);
  }
  std::vector<SpectralField> comps;
  for (int j = 0; j < d; ++j) {
    SpectralField acc(grid);
    for (int i = 0; i < d; ++i) {
      std::vector<double> prod(grid.size(), 0.0);
      kernels::accumulate_product(ap[i], bp[j], prod);
      acc += derivative(to_spectral(grid, prod), i);
    }
    comps.push_back(std::move(acc));
  }
  return VectorField(std::move(comps));
}

Tendency rhs(const TCMState& state, const ModelParams& /*params*/) {
  const Grid& grid = state.grid();
  Tendency out(grid);
  out.t = state.t;

  VectorField fu = advect(state.u, state.u);
  fu += divergence_of_tensor(state.v, state.v);
  out.u = leray_project(fu);
  out.u *= -1.0;

  out.v = advect(state.u, state.v);
  out.v += advect(state.v, state.u);
  out.v += gradient(state.theta);
  out.v *= -1.0;

  out.theta = advect(state.u, state.theta);
  out.theta += divergence(state.v);
  out.theta *= -1.0;
  return out;
}

BlowUp::BlowUp(double t, const std::string& what) : std::runtime_error(what), t_(t) {}

Stepper::Stepper(const Grid& grid, const ModelParams& params)
    : grid_(grid), params_(params), partition_(grid) {
  params_.validate(grid.dim());
  const auto& geo = geometry(grid);
  symbol_.resize(grid.size());
  for (std::size_t i = 0; i < symbol_.size(); ++i) {
    const double r = geo.k_norm[i];
    symbol_[i] = r == 0.0 ? 0.0 : std::pow(r, 2.0 * params_.alpha);
  }
}

void Stepper::apply_decay(TCMState& y, double dt) const {
  std::vector<double> eu(symbol_.size()), ev(symbol_.size());
  for (std::size_t i = 0; i < symbol_.size(); ++i) {
    eu[i] = std::exp(-params_.mu * symbol_[i] * dt);
    ev[i] = std::exp(-params_.nu * symbol_[i] * dt);
  }
  for (auto& c : y.u) kernels::scale(c.coeffs(), eu, c.coeffs());
  for (auto& c : y.v) kernels::scale(c.coeffs(), ev, c.coeffs());
}

TCMState Stepper::heun(const TCMState& y, double dt,
                       const std::function<Tendency(const TCMState&, double)>& tendency) const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const Tendency k1 = tendency(y, y.t);

  TCMState predictor = y;
  predictor.add_scaled(dt, k1);
  apply_decay(predictor, dt);
  predictor.t = y.t + dt;
  const Tendency k2 = tendency(predictor, predictor.t);

  TCMState out = y;
  out.add_scaled(0.5 * dt, k1);
  apply_decay(out, dt);
  out.add_scaled(0.5 * dt, k2);
  out.u = leray_project(out.u);
  out.t = y.t + dt;
  return out;
}

void Stepper::check_blow_up(const TCMState& y) const {
  if (!all_finite(y)) {
    std::ostringstream msg;
    msg << "non-finite coefficient at t = " << y.t;
    throw BlowUp(y.t, msg.str());
  }
  const double s_uv = 1.0 + grid_.dim() / 2.0 - 2.0 * params_.alpha;
  const double norm = lp::besov_norm(y.u, {s_uv, lp::Summability::One}, partition_);
  if (norm > kBlowUpBesovThreshold) {
    std::ostringstream msg;
    msg << "u Besov norm " << norm << " exceeds " << kBlowUpBesovThreshold << " at t = " << y.t;
    throw BlowUp(y.t, msg.str());
  }
}

TCMState Stepper::step(const TCMState& y, double dt) const {
  auto out = heun(y, dt, [&](const TCMState& s, double) { return rhs(s, params_); });
  check_blow_up(out);
  return out;
}

TCMState step(const TCMState& state, const ModelParams& params, double dt) {
  return Stepper(state.grid(), params).step(state, dt);
}

EnergyBalance energy_balance(const std::vector<TCMState>& samples, const ModelParams& params) {
  if (samples.size() < 3) {
    throw std::invalid_argument("energy balance needs at least 3 samples");
  }
  const double h = samples[1].t - samples[0].t;
  if (!(h > 0.0)) throw std::invalid_argument("samples must be increasing in time");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (std::abs((samples[i].t - samples[i - 1].t) - h) > 1e-9 * h) {
      throw std::invalid_argument("energy balance needs uniform sampling");
    }
  }
  std::vector<double> e(samples.size()), dis(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    e[i] = energy(samples[i]);
    dis[i] = dissipation_rate(samples[i], params);
  }
  EnergyBalance out;
  out.energy_scale = *std::max_element(e.begin(), e.end());
  out.residual.resize(samples.size() - 1, 0.0);
  if (out.energy_scale == 0.0) return out;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    double integral;
    if (i == 0) {
      integral = h * (5.0 * dis[0] + 8.0 * dis[1] - dis[2]) / 12.0;
    } else {
      integral = h * (-dis[i - 1] + 8.0 * dis[i] + 5.0 * dis[i + 1]) / 12.0;
    }
    out.residual[i] = std::abs(e[i + 1] - e[i] + integral) / out.energy_scale;
    out.total += out.residual[i];
  }
  return out;
}

}  // namespace tcm::model
