#include "tcm/data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tcm::data {

double SplitMix64::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Family parse_family(const std::string& name) {
  if (name == "random-besov") return Family::RandomBesov;
  if (name == "taylor-green-like") return Family::TaylorGreenLike;
  if (name == "single-shell") return Family::SingleShell;
  throw std::invalid_argument("unknown data family '" + name +
                              "' (expected random-besov, taylor-green-like or single-shell)");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::RandomBesov: return "random-besov";
    case Family::TaylorGreenLike: return "taylor-green-like";
    case Family::SingleShell: return "single-shell";
  }
  return "unknown";
}

namespace {

int shell_of(double r) {
  if (r < 1.0) return -1;
  int j = 0;
  while (std::exp2(j + 1) <= r) ++j;
  return j;
}

SpectralField gaussian_field(const Grid& grid, SplitMix64& rng, int only_shell) {
  const auto& geo = geometry(grid);
  SpectralField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!geo.resolved[i] || geo.mirror[i] < i || geo.k_norm[i] == 0.0) continue;
    const double re = rng.normal();
    const double im = rng.normal();
    if (only_shell >= 0 && shell_of(geo.k_norm[i]) != only_shell) continue;
    f.set_mode(geo.k[i], cplx(re, im));
  }
  return f;
}

// Rescales every shell of the components so that its joint L^2 norm is amp 2^{-js}.
void normalize_shells(std::vector<SpectralField*> comps, double amp, double s) {
  const Grid& grid = comps.front()->grid();
  const auto& geo = geometry(grid);
  std::vector<double> energy(64, 0.0);
  for (auto* c : comps) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const int j = shell_of(geo.k_norm[i]);
      if (j >= 0) energy[j] += std::norm(c->coeffs()[i]);
    }
  }
  for (auto* c : comps) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const int j = shell_of(geo.k_norm[i]);
      if (j < 0 || energy[j] == 0.0) continue;
      c->coeffs()[i] *= amp * std::exp2(-j * s) / std::sqrt(energy[j]);
    }
  }
}

model::TCMState random_state(const Grid& grid, SplitMix64& rng, double amp, double s_uv,
                             double s_theta, int only_shell) {
  const int d = grid.dim();
  std::vector<SpectralField> u, v;
  for (int a = 0; a < d; ++a) u.push_back(gaussian_field(grid, rng, only_shell));
  for (int a = 0; a < d; ++a) v.push_back(gaussian_field(grid, rng, only_shell));
  model::TCMState st(model::leray_project(VectorField(std::move(u))), VectorField(std::move(v)),
                     gaussian_field(grid, rng, only_shell));
  std::vector<SpectralField*> pu, pv;
  for (auto& c : st.u) pu.push_back(&c);
  for (auto& c : st.v) pv.push_back(&c);
  normalize_shells(pu, amp, s_uv);
  normalize_shells(pv, amp, s_uv);
  normalize_shells({&st.theta}, amp, s_theta);
  return st;
}

model::TCMState taylor_green(const Grid& grid, double amp) {
  const int d = grid.dim();
  const int n = grid.modes();
  std::vector<std::vector<double>> u(d, std::vector<double>(grid.size())), v = u;
  std::vector<double> th(grid.size());
  const double h = 2.0 * std::numbers::pi / n;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    double x[3] = {0.0, 0.0, 0.0};
    std::size_t rem = idx;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = h * static_cast<double>(rem % n);
      rem /= n;
    }
    const double cz = d == 3 ? std::cos(x[2]) : 1.0;
    u[0][idx] = amp * std::sin(x[0]) * std::cos(x[1]) * cz;
    u[1][idx] = -amp * std::cos(x[0]) * std::sin(x[1]) * cz;
    v[0][idx] = amp * std::cos(x[0]) * std::sin(x[1]) * cz;
    v[1][idx] = amp * std::sin(x[0]) * std::cos(x[1]) * cz;
    if (d == 3) {
      u[2][idx] = 0.0;
      v[2][idx] = amp * std::cos(x[0]) * std::cos(x[1]) * std::sin(x[2]);
    }
    th[idx] = amp * std::cos(x[0]) * std::cos(x[1]) * cz;
  }
  std::vector<SpectralField> uf, vf;
  for (int a = 0; a < d; ++a) {
    uf.push_back(truncate(forward_transform(grid, u[a])));
    vf.push_back(truncate(forward_transform(grid, v[a])));
  }
  return model::TCMState(model::leray_project(VectorField(std::move(uf))),
                         VectorField(std::move(vf)), truncate(forward_transform(grid, th)));
}

}  // namespace

InitialData generate_data(const DataSpec& spec, const Grid& grid, double alpha) {
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude)) {
    throw std::invalid_argument("amplitude must be finite and >= 0");
  }
  const int d = grid.dim();
  const double s_uv = 1.0 + d / 2.0 - 2.0 * alpha;
  const double s_theta = 1.0 + d / 2.0 - alpha;
  SplitMix64 rng(spec.seed);
  InitialData out{model::TCMState(grid)};
  switch (spec.family) {
    case Family::RandomBesov:
      out.state = random_state(grid, rng, spec.amplitude, s_uv, s_theta, -1);
      break;
    case Family::SingleShell:
      if (spec.shell < 0) throw std::invalid_argument("shell must be >= 0");
      out.state = random_state(grid, rng, spec.amplitude, s_uv, s_theta, spec.shell);
      break;
    case Family::TaylorGreenLike:
      out.state = taylor_green(grid, spec.amplitude);
      break;
  }
  lp::DyadicPartition part(grid);
  out.u_norm = lp::besov_norm(out.state.u, {s_uv, lp::Summability::One}, part);
  out.v_norm = lp::besov_norm(out.state.v, {s_uv, lp::Summability::One}, part);
  out.theta_norm = lp::besov_norm(out.state.theta, {s_theta, lp::Summability::One}, part);
  out.M = 2.0 * (out.u_norm + out.v_norm + out.theta_norm);
  return out;
}

}  // namespace tcm::data
