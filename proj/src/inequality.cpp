#include "tcm/inequality.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tcm/data.hpp"
#include "tcm/keyvalue.hpp"
#include "tcm/picard.hpp"

namespace tcm::ineq {

using lp::Summability;

double BoundCheck::ratio() const {
  if (skipped) throw std::logic_error("ratio of a skipped check (" + context + ")");
  return lhs / rhs_shape;
}

std::string to_string(TripleVariant v) {
  switch (v) {
    case TripleVariant::Transport: return "triple_transport";
    case TripleVariant::Commutator: return "triple_commutator";
    case TripleVariant::Product: return "triple_product";
  }
  return "unknown";
}

namespace {

double pow2(double e) { return std::exp2(e); }

// sum_{m <= j-1} 2^{w m} A_m
double low_sum(const std::vector<double>& a, int j, double w) {
  double s = 0.0;
  for (int m = -1; m <= j - 1 && m + 1 < static_cast<int>(a.size()); ++m) s += pow2(w * m) * a[m + 1];
  return s;
}

// sum_{|j-k| <= 2} A_k
double near_sum(const std::vector<double>& a, int j) {
  double s = 0.0;
  for (int k = std::max(-1, j - 2); k <= j + 2 && k + 1 < static_cast<int>(a.size()); ++k) s += a[k + 1];
  return s;
}

// sum_{k >= j-4} 2^{dk/2} A_k B~_k
double high_sum(const std::vector<double>& a, const std::vector<double>& bt, int j, int d) {
  double s = 0.0;
  for (int k = std::max(-1, j - 4); k + 1 < static_cast<int>(a.size()); ++k) {
    s += pow2(0.5 * d * k) * a[k + 1] * bt[k + 1];
  }
  return s;
}

}  // namespace

BoundCheck check_triple_product(TripleVariant variant, const VectorField& u, const VectorField& v,
                                const VectorField& w, int j, const lp::DyadicPartition& part) {
  if (j < -1 || j > part.j_max()) {
    throw std::out_of_range("block index " + std::to_string(j) + " outside partition");
  }
  const int d = part.grid().dim();
  const double two_j = pow2(j);
  BoundCheck out;
  std::ostringstream ctx;
  ctx << to_string(variant) << " j=" << j;
  out.context = ctx.str();

  double test = 0.0;
  switch (variant) {
    case TripleVariant::Transport: {
      const auto U = lp::block_norms(u, part), Ut = lp::tilde_block_norms(u, part);
      const auto V = lp::block_norms(v, part);
      const auto W = lp::block_norms(w, part);
      const VectorField F = model::advect(v, u);
      out.lhs = std::abs(inner(lp::dyadic_block(F, j, part), lp::dyadic_block(w, j, part)));
      test = W[j + 1];
      out.rhs_parts = {two_j * low_sum(V, j, d / 2.0) * near_sum(U, j),
                       near_sum(V, j) * low_sum(U, j, 1.0 + d / 2.0), two_j * high_sum(V, Ut, j, d)};
      break;
    }
    case TripleVariant::Commutator: {
      if (model::divergence_residual(u) > 1e-10) {
        throw std::invalid_argument("commutator variant needs a divergence-free u");
      }
      const auto U = lp::block_norms(u, part);
      const auto V = lp::block_norms(v, part), Vt = lp::tilde_block_norms(v, part);
      const VectorField F = model::advect(u, v);
      const VectorField vj = lp::dyadic_block(v, j, part);
      out.lhs = std::abs(inner(lp::dyadic_block(F, j, part), vj));
      test = V[j + 1];
      out.rhs_parts = {low_sum(U, j, 1.0 + d / 2.0) * near_sum(V, j),
                       near_sum(U, j) * low_sum(V, j, 1.0 + d / 2.0), two_j * high_sum(U, Vt, j, d)};
      break;
    }
    case TripleVariant::Product: {
      const auto U = lp::block_norms(u, part);
      const auto V = lp::block_norms(v, part);
      const auto W = lp::block_norms(w, part), Wt = lp::tilde_block_norms(w, part);
      double acc = 0.0;
      for (int i = 0; i < d; ++i) {
        const SpectralField p = dealiased_product(v[i], w[i]);
        acc += inner(lp::dyadic_block(p, j, part), lp::dyadic_block(u[i], j, part));
      }
      out.lhs = std::abs(acc);
      test = U[j + 1];
      out.rhs_parts = {low_sum(V, j, d / 2.0) * near_sum(W, j),
                       near_sum(V, j) * low_sum(W, j, d / 2.0), high_sum(V, Wt, j, d)};
      break;
    }
  }
  out.rhs_shape = test * (out.rhs_parts[0] + out.rhs_parts[1] + out.rhs_parts[2]);
  out.skipped = !(out.rhs_shape > 0.0);
  return out;
}

BoundCheck check_log_interpolation(const lp::NormSeries& series, int d) {
  BoundCheck out;
  out.context = "log_interpolation";
  if (series.empty()) throw std::invalid_argument("empty norm series");
  const double hd = d / 2.0;
  out.lhs = lp::lebesgue_besov(series, {hd, Summability::One}, lp::TimeNorm::L1);
  const double weak = lp::chemin_lerner(series, {hd, Summability::Infinity}, lp::TimeNorm::L1);
  const double smooth = lp::lebesgue_besov(series, {1.0 + hd, Summability::One}, lp::TimeNorm::L1);
  if (!(weak > 0.0)) {
    out.skipped = true;
    out.context += " (degenerate)";
    return out;
  }
  out.rhs_parts = {weak, smooth, 0.0};
  out.rhs_shape = weak * std::log(std::numbers::e + smooth / weak);
  return out;
}

// Osgood ------------------------------------------------------------------

double Modulus::operator()(double r) const {
  if (kind == Kind::Linear) return r;
  return r * std::log(std::numbers::e + C / r);
}

namespace {

// r / mu(r) at r = e^s
double log_integrand(const Modulus& mu, double s) {
  if (mu.kind == Modulus::Kind::Linear) return 1.0;
  return 1.0 / std::log(std::numbers::e + mu.C * std::exp(-s));
}

double integral_in_log(const Modulus& mu, double s0, double s1) {
  if (s1 == s0) return 0.0;
  if (mu.kind == Modulus::Kind::Linear) return s1 - s0;
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double s) { return log_integrand(mu, s); };
  // a single rule is exact to rounding on short spans, where the adaptive
  // error estimate is all roundoff and would recurse to full depth
  const unsigned depth = std::abs(s1 - s0) < 1e-2 ? 0 : 12;
  return gauss_kronrod<double, 21>::integrate(f, s0, s1, depth, 1e-13);
}

}  // namespace

double modulus_integral(const Modulus& mu, double x, double y) {
  if (!(x > 0.0) || !(y >= x)) throw std::invalid_argument("modulus_integral needs 0 < x <= y");
  return integral_in_log(mu, std::log(x), std::log(y));
}

double psi(const Modulus& mu, double x, double a) {
  return x <= a ? modulus_integral(mu, x, a) : -modulus_integral(mu, a, x);
}

OsgoodBound::OsgoodBound(OsgoodProblem problem) : p_(std::move(problem)) {
  if (!(p_.a > 0.0 && p_.a < 1.0)) throw std::invalid_argument("a must lie in (0, 1)");
  if (!(p_.c >= 0.0)) throw std::invalid_argument("c must be >= 0");
  if (p_.c >= p_.a) {
    std::ostringstream msg;
    msg << "vacuous bound: c = " << p_.c << " >= a = " << p_.a;
    throw std::domain_error(msg.str());
  }
  if (p_.times.empty() || p_.times.size() != p_.phi.size()) {
    throw std::invalid_argument("phi needs one sample per time");
  }
  for (std::size_t i = 0; i < p_.times.size(); ++i) {
    if (!(p_.phi[i] >= 0.0)) throw std::invalid_argument("phi samples must be >= 0");
    if (i > 0 && !(p_.times[i] > p_.times[i - 1])) {
      throw std::invalid_argument("times must be strictly increasing");
    }
  }
  if (p_.modulus.kind == Modulus::Kind::Log && !(p_.modulus.C >= 0.0)) {
    throw std::invalid_argument("modulus constant must be >= 0");
  }
  cumulative_.assign(p_.times.size(), 0.0);
  for (std::size_t i = 1; i < p_.times.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] +
                     0.5 * (p_.times[i] - p_.times[i - 1]) * (p_.phi[i] + p_.phi[i - 1]);
  }
}

double OsgoodBound::phi_integral(double t) const {
  const auto& ts = p_.times;
  if (t <= ts.front()) return 0.0;
  if (t >= ts.back()) {
    if (t > ts.back() * (1 + 1e-12) + 1e-300) throw std::out_of_range("t beyond phi samples");
    return cumulative_.back();
  }
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
  const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
  const double phi_t = (1 - w) * p_.phi[i] + w * p_.phi[i + 1];
  return cumulative_[i] + 0.5 * (t - ts[i]) * (p_.phi[i] + phi_t);
}

double OsgoodBound::operator()(double t) const {
  if (p_.c == 0.0) return 0.0;
  const double target = phi_integral(t);
  if (target == 0.0) return p_.c;
  const Modulus& mu = p_.modulus;
  const double s0 = std::log(p_.c);
  // G(s) = int_{s0}^{s} r / mu(r) ds is increasing with G' in (0, 1].
  double lo = s0 + target;  // G(lo) <= target because G' <= 1
  double hi = lo;
  if (mu.kind == Modulus::Kind::Log) hi = s0 + target * std::log(std::numbers::e + mu.C / p_.c);
  double g_lo = integral_in_log(mu, s0, lo);
  if (g_lo >= target) return std::exp(lo);
  double s = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++iter) {
    const double g = integral_in_log(mu, s0, s);
    if (g < target) {
      lo = s;
    } else {
      hi = s;
    }
    // safeguarded Newton step from the current point
    double next = s - (g - target) / log_integrand(mu, s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-13 * std::max(1.0, std::abs(s))) {
      lo = hi = next;
      break;
    }
    s = next;
  }
  return std::exp(0.5 * (lo + hi));
}

std::vector<double> OsgoodBound::at_samples() const {
  std::vector<double> out;
  out.reserve(p_.times.size());
  for (double t : p_.times) out.push_back((*this)(t));
  return out;
}

OsgoodBound osgood_bound(const OsgoodProblem& problem) { return OsgoodBound(problem); }

// Uniqueness --------------------------------------------------------------

namespace {

struct RunningNorms {
  // per-block trapezoid integrals of |Delta_j f| and |Delta_j f|^2
  std::vector<double> int1, int2, last;
  double besov_l1 = 0.0, last_besov = 0.0;
  bool started = false;

  void push(const std::vector<double>& blocks, double h, double s_l1) {
    const double b = lp::besov_from_blocks(blocks, {s_l1, Summability::One});
    if (!started) {
      int1.assign(blocks.size(), 0.0);
      int2.assign(blocks.size(), 0.0);
      started = true;
    } else {
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        int1[k] += 0.5 * h * (blocks[k] + last[k]);
        int2[k] += 0.5 * h * (blocks[k] * blocks[k] + last[k] * last[k]);
      }
      besov_l1 += 0.5 * h * (b + last_besov);
    }
    last = blocks;
    last_besov = b;
  }
  double tilde_l1(double s, Summability q) const { return lp::besov_from_blocks(int1, {s, q}); }
  double tilde_l2(double s) const {
    std::vector<double> r(int2.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::sqrt(int2[k]);
    return lp::besov_from_blocks(r, {s, Summability::One});
  }
};

}  // namespace

UniquenessMeasurement measure_uniqueness(const model::TCMState& data, const UniquenessConfig& cfg) {
  const Grid& grid = data.grid();
  const int d = grid.dim();
  const double alpha = cfg.params.alpha;
  const model::Stepper stepper(grid, cfg.params);
  const auto& part = stepper.partition();
  if (!(cfg.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (!(cfg.dt > 0.0) || !(cfg.T1 >= cfg.dt)) throw std::invalid_argument("need T1 >= dt > 0");

  model::TCMState perturbed = data;
  if (cfg.epsilon > 0.0) {
    auto pert = data::generate_data(
        {data::Family::RandomBesov, cfg.epsilon, cfg.perturbation_seed}, grid, alpha);
    perturbed.add_scaled(1.0, pert.state);
  }

  const auto steps = static_cast<std::size_t>(std::llround(cfg.T1 / cfg.dt));
  std::vector<model::TCMState> a{data}, b{perturbed};
  a.front().t = b.front().t = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    a.push_back(stepper.step(a.back(), cfg.dt));
    b.push_back(stepper.step(b.back(), cfg.dt));
  }

  const double s_smooth = 1.0 + d / 2.0;
  const double s_v2 = 1.0 + d / 2.0 - alpha;
  // smallness value at every sample index
  std::vector<double> smallness(steps + 1, 0.0);
  {
    RunningNorms u1, u2, v1, v2x, v2y;
    for (std::size_t i = 0; i <= steps; ++i) {
      const double h = i == 0 ? 0.0 : a[i].t - a[i - 1].t;
      u1.push(lp::block_norms(a[i].u, part), h, s_smooth);
      u2.push(lp::block_norms(b[i].u, part), h, s_smooth);
      v1.push(lp::block_norms(a[i].v, part), h, s_smooth);
      v2x.push(lp::block_norms(a[i].v, part), h, s_smooth);
      v2y.push(lp::block_norms(b[i].v, part), h, s_smooth);
      smallness[i] = cfg.smallness_constant * (u1.besov_l1 + u2.besov_l1 + v1.besov_l1 +
                                               v2x.tilde_l2(s_v2) + v2y.tilde_l2(s_v2));
    }
  }

  UniquenessMeasurement m;
  std::size_t end = steps;
  while (smallness[end] > 0.25) {
    if (m.halvings >= cfg.max_halvings || end / 2 == 0) {
      std::ostringstream msg;
      msg << "smallness condition fails: measured " << smallness[end] << " > 1/4 at T1 = "
          << a[end].t << " after " << m.halvings << " halvings";
      throw std::runtime_error(msg.str());
    }
    end /= 2;
    ++m.halvings;
  }
  m.T1 = a[end].t;
  m.smallness = smallness[end];

  const double s_half = d / 2.0;
  const double s_low = d / 2.0 - 2.0 * alpha;
  const double s_theta_diff = 1.0 + d / 2.0 - 2.0 * alpha;
  const double s_theta = 1.0 + d / 2.0 - alpha;
  RunningNorms du, dv;
  for (std::size_t i = 0; i <= end; ++i) {
    model::TCMState diff = a[i];
    diff.add_scaled(-1.0, b[i]);
    const double h = i == 0 ? 0.0 : a[i].t - a[i - 1].t;
    du.push(lp::block_norms(diff.u, part), h, s_smooth);
    dv.push(lp::block_norms(diff.v, part), h, s_smooth);
    m.times.push_back(a[i].t);
    m.f.push_back(du.tilde_l1(s_half, Summability::Infinity) +
                  dv.tilde_l1(s_half, Summability::Infinity));
    m.theta_diff.push_back(lp::besov_norm(diff.theta, {s_theta_diff, Summability::Infinity}, part));
    m.u_diff_l2.push_back(tcm::l2_norm(diff.u));
    m.v_diff_l2.push_back(tcm::l2_norm(diff.v));
    m.theta_diff_l2.push_back(tcm::l2_norm(diff.theta));
    m.theta1_norm = std::max(m.theta1_norm,
                             lp::besov_norm(a[i].theta, {s_theta, Summability::One}, part));
    if (i == 0) {
      m.initial_uv = lp::besov_norm(diff.u, {s_low, Summability::Infinity}, part) +
                     lp::besov_norm(diff.v, {s_low, Summability::Infinity}, part);
      m.initial_theta = m.theta_diff.front();
    }
  }
  m.smooth_norm = du.besov_l1 + dv.besov_l1;
  return m;
}

Envelope envelope(const UniquenessMeasurement& m, double C_env) {
  Envelope e;
  e.C_env = C_env;
  e.c = C_env * (m.initial_uv + m.T1 * m.initial_theta);
  e.phi = C_env * (1.0 + m.theta1_norm);
  e.C_O = m.smooth_norm;
  if (e.c == 0.0) {
    e.bound.assign(m.times.size(), 0.0);
  } else {
    OsgoodProblem p;
    p.c = e.c;
    p.times = m.times;
    p.phi.assign(m.times.size(), e.phi);
    p.modulus = Modulus::log(e.C_O);
    p.a = 0.5;
    if (p.times.size() == 1) {
      e.bound = {e.c};
    } else {
      e.bound = OsgoodBound(p).at_samples();
    }
  }
  for (std::size_t i = 0; i < m.f.size(); ++i) {
    if (m.f[i] > e.bound[i] * (1.0 + 1e-12)) e.inside = false;
    if (e.bound[i] > 0.0) e.worst_ratio = std::max(e.worst_ratio, m.f[i] / e.bound[i]);
    else if (m.f[i] > 0.0) e.worst_ratio = INFINITY;
  }
  return e;
}

double minimal_envelope_constant(const UniquenessMeasurement& m) {
  if (std::all_of(m.f.begin(), m.f.end(), [](double x) { return x == 0.0; })) return 0.0;
  auto inside = [&](double C) {
    try {
      return envelope(m, C).inside;
    } catch (const std::domain_error&) {
      return true;  // bound is vacuous
    }
  };
  double lo = 1e-8, hi = 1e8;
  if (inside(lo)) return lo;
  if (!inside(hi)) return INFINITY;
  while (hi / lo > 1.0 + 1e-6) {
    const double mid = std::sqrt(lo * hi);
    if (inside(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

// Suites ------------------------------------------------------------------

namespace {

VectorField random_vector(const Grid& grid, data::SplitMix64& rng, double decay, bool project) {
  const auto& geo = geometry(grid);
  std::vector<SpectralField> comps;
  for (int a = 0; a < grid.dim(); ++a) {
    SpectralField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!geo.resolved[i] || geo.mirror[i] < i) continue;
      const double re = rng.normal(), im = rng.normal();
      f.set_mode(geo.k[i], std::pow(1.0 + geo.k_norm[i], -decay) * cplx(re, im));
    }
    comps.push_back(std::move(f));
  }
  VectorField out(std::move(comps));
  return project ? model::leray_project(out) : out;
}

void finish(SuiteResult& r) {
  r.max_ratio = r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  data::SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1)));
  return mix.next();
}

}  // namespace

SuiteResult triple_product_suite(TripleVariant variant, const Grid& grid, int trials,
                                 std::uint64_t seed) {
  lp::DyadicPartition part(grid);
  SuiteResult r;
  r.name = to_string(variant);
  for (int t = 0; t < trials; ++t) {
    data::SplitMix64 rng(trial_seed(seed, t));
    const double du = 0.5 + 2.0 * rng.uniform();
    const double dv = 0.5 + 2.0 * rng.uniform();
    const double dw = 0.5 + 2.0 * rng.uniform();
    const bool project_u = variant != TripleVariant::Product || rng.uniform() < 0.5;
    VectorField u = random_vector(grid, rng, du, project_u);
    VectorField v = random_vector(grid, rng, dv, false);
    VectorField w = random_vector(grid, rng, dw, false);
    for (int j = -1; j <= part.j_max(); ++j) {
      const BoundCheck c = check_triple_product(variant, u, v, w, j, part);
      if (c.skipped) {
        ++r.skipped;
        continue;
      }
      r.ratios.push_back(c.ratio());
    }
  }
  finish(r);
  return r;
}

SuiteResult log_interpolation_suite(const Grid& grid, int trials, std::uint64_t seed) {
  SuiteResult r;
  r.name = "log_interpolation";
  const int d = grid.dim();
  for (int t = 0; t < trials; ++t) {
    data::SplitMix64 rng(trial_seed(seed, t));
    const double alpha = 1.0 + (d / 4.0) * 0.9 * rng.uniform();
    const double amp = std::pow(10.0, -3.0 + 2.5 * rng.uniform());
    const auto family = rng.uniform() < 0.8 ? data::Family::RandomBesov : data::Family::SingleShell;
    const int top = static_cast<int>(std::floor(std::log2(grid.dealias_cutoff())));
    const int shell = static_cast<int>(rng.next() % static_cast<std::uint64_t>(top + 1));
    auto init = data::generate_data({family, amp, rng.next(), shell}, grid, alpha);
    model::Stepper stepper(grid, {1.0, 1.0, alpha});
    const auto& part = stepper.partition();
    lp::NormSeries series;
    model::TCMState s = init.state;
    series.push(0.0, lp::block_norms(s.u, part));
    for (int k = 0; k < 20; ++k) {
      s = stepper.step(s, 1e-3);
      series.push(s.t, lp::block_norms(s.u, part));
    }
    const BoundCheck c = check_log_interpolation(series, d);
    if (c.skipped) {
      ++r.skipped;
      continue;
    }
    r.ratios.push_back(c.ratio());
  }
  finish(r);
  return r;
}

SuiteResult picard_dominance_suite(const Grid& grid, int trials, std::uint64_t seed) {
  SuiteResult r;
  r.name = "picard_dominance";
  lp::DyadicPartition part(grid);
  for (int t = 0; t < trials; ++t) {
    data::SplitMix64 rng(trial_seed(seed, t));
    const double alpha = 1.0 + (grid.dim() / 4.0) * 0.9 * rng.uniform();
    const double amp = std::pow(10.0, -3.0 + 2.0 * rng.uniform());
    auto init = data::generate_data({data::Family::RandomBesov, amp, rng.next()}, grid, alpha);
    auto budget = picard::BudgetY::from_data(init.state, alpha, 0.5, 0.02, part);
    picard::SchemeOptions opts;
    opts.n_max = 12;
    auto res = picard::run_scheme(init.state, {1.0, 1.0, alpha}, budget, 2e-3, opts);
    for (const auto& row : res.table) {
      const auto& tb = row.terms;
      // growth above the integrator floor against the structural total
      const std::pair<double, double> eqs[] = {
          {tb.growth_u, tb.J_total()}, {tb.growth_v, tb.K_total()}, {tb.growth_theta, tb.I_total()}};
      for (const auto& [growth, total] : eqs) {
        const double g = std::max(0.0, growth - 1e-6);
        if (total > 0.0) r.ratios.push_back(g / total);
        else ++r.skipped;
      }
    }
  }
  finish(r);
  return r;
}

SuiteResult uniqueness_envelope_suite(const Grid& grid, int trials, std::uint64_t seed) {
  SuiteResult r;
  r.name = "uniqueness_envelope";
  for (int t = 0; t < trials; ++t) {
    data::SplitMix64 rng(trial_seed(seed, t));
    const double alpha = 1.0 + (grid.dim() / 4.0) * 0.5 * rng.uniform();
    const double amp = std::pow(10.0, -3.0 + 1.0 * rng.uniform());
    auto init = data::generate_data({data::Family::RandomBesov, amp, rng.next()}, grid, alpha);
    UniquenessConfig cfg;
    cfg.params = {1.0, 1.0, alpha};
    cfg.epsilon = 1e-6;
    cfg.T1 = 0.02;
    cfg.perturbation_seed = rng.next();
    try {
      r.ratios.push_back(minimal_envelope_constant(measure_uniqueness(init.state, cfg)));
    } catch (const std::runtime_error&) {
      ++r.skipped;
    }
  }
  finish(r);
  return r;
}

namespace {

constexpr int kUniquenessTrials = 20;
constexpr int kPicardTrials = 20;

std::vector<SuiteResult> all_suites(const Grid& grid, int trials, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(triple_product_suite(TripleVariant::Transport, grid, trials, seed));
  out.push_back(triple_product_suite(TripleVariant::Commutator, grid, trials, seed + 1));
  out.push_back(triple_product_suite(TripleVariant::Product, grid, trials, seed + 2));
  out.push_back(log_interpolation_suite(grid, trials, seed + 3));
  out.push_back(picard_dominance_suite(grid, std::min(trials, kPicardTrials), seed + 4));
  out.push_back(uniqueness_envelope_suite(grid, std::min(trials, kUniquenessTrials), seed + 5));
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Calibration calibrate(const Grid& grid, int trials, std::uint64_t seed, double margin,
                      std::vector<SuiteResult>* suites) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(margin >= 1.0)) throw std::invalid_argument("margin must be >= 1");
  Calibration cal;
  cal.d = grid.dim();
  cal.n = grid.modes();
  cal.seed = seed;
  cal.trials = trials;
  cal.margin = margin;
  auto results = all_suites(grid, trials, seed);
  for (const auto& s : results) cal.constants[s.name] = margin * s.max_ratio;
  if (suites) *suites = std::move(results);
  return cal;
}

std::vector<AssertionResult> assert_calibration(const Calibration& cal, const Grid& grid,
                                                int trials, std::uint64_t seed,
                                                std::vector<SuiteResult>* suites) {
  auto results = all_suites(grid, trials, seed);
  std::vector<AssertionResult> out;
  for (const auto& s : results) {
    AssertionResult a;
    a.name = s.name;
    auto it = cal.constants.find(s.name);
    if (it == cal.constants.end()) throw std::invalid_argument("calibration lacks " + s.name);
    a.constant = it->second;
    a.max_ratio = s.max_ratio;
    a.checks = static_cast<int>(s.ratios.size());
    for (double x : s.ratios) a.violations += x > a.constant ? 1 : 0;
    out.push_back(a);
  }
  if (suites) *suites = std::move(results);
  return out;
}

void write_calibration(const std::filesystem::path& path, const Calibration& cal) {
  kv::KeyValue out;
  out.set("grid.d", std::to_string(cal.d));
  out.set("grid.n", std::to_string(cal.n));
  out.set("seed", std::to_string(cal.seed));
  out.set("trials", std::to_string(cal.trials));
  out.set("margin", format_double(cal.margin));
  for (const auto& [name, value] : cal.constants) out.set("constant." + name, format_double(value));
  out.save(path, "calibrated constants: margin * max observed ratio");
}

Calibration read_calibration(const std::filesystem::path& path) {
  const auto in = kv::KeyValue::load(path);
  Calibration cal;
  cal.d = static_cast<int>(in.get_int("grid.d"));
  cal.n = static_cast<int>(in.get_int("grid.n"));
  cal.seed = in.get_u64("seed");
  cal.trials = static_cast<int>(in.get_int("trials"));
  cal.margin = in.get_double("margin");
  const std::string prefix = "constant.";
  for (const auto& [key, value] : in.entries()) {
    if (key.rfind(prefix, 0) == 0) cal.constants[key.substr(prefix.size())] = in.get_double(key);
  }
  return cal;
}

}  // namespace tcm::ineq
