#include "tcm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "tcm/checkpoint.hpp"
#include "tcm/csv.hpp"
#include "tcm/inequality.hpp"
#include "tcm/picard.hpp"

namespace tcm::exp {

using nlohmann::json;

Mode parse_mode(const std::string& name) {
  if (name == "direct") return Mode::Direct;
  if (name == "picard") return Mode::Picard;
  if (name == "uniqueness") return Mode::Uniqueness;
  if (name == "inequalities") return Mode::Inequalities;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected direct, picard, uniqueness or inequalities)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Direct: return "direct";
    case Mode::Picard: return "picard";
    case Mode::Uniqueness: return "uniqueness";
    case Mode::Inequalities: return "inequalities";
  }
  return "unknown";
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode",
      "grid.d",
      "grid.n",
      "model.mu",
      "model.nu",
      "model.alpha",
      "data.family",
      "data.amplitude",
      "data.seed",
      "data.shell",
      "time.dt",
      "time.T",
      "output.dir",
      "output.checkpoint_every",
      "picard.delta",
      "picard.n_max",
      "picard.tol",
      "uniqueness.epsilon",
      "uniqueness.T1",
      "uniqueness.perturbation_seed",
      "uniqueness.smallness_constant",
      "uniqueness.envelope_constant",
      "inequalities.trials",
      "inequalities.calibration_n",
      "inequalities.assert_n",
      "inequalities.margin",
      "inequalities.seed",
      "inequalities.bins",
  };
  return keys;
}

namespace {

// Wraps a KeyValue accessor so parse failures name the field.
template <class F>
auto field(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    const std::string prefix = "key '" + key + "': ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw ConfigError(key, msg);
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    const std::string t = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError(key, "cannot parse '" + t + "' as a number");
    }
    out.push_back(x);
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += csv::format_number(xs[i]);
  }
  return out;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

ExperimentConfig ExperimentConfig::from_keyvalue(const kv::KeyValue& kv) {
  const auto& known = config_keys();
  for (const auto& [key, value] : kv.entries()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(key, "unknown key");
    }
  }
  ExperimentConfig c;
  auto get_int = [&](const std::string& key, int& dst) {
    if (kv.has(key)) dst = static_cast<int>(field(key, [&] { return kv.get_int(key); }));
  };
  auto get_double = [&](const std::string& key, double& dst) {
    if (kv.has(key)) dst = field(key, [&] { return kv.get_double(key); });
  };
  auto get_u64 = [&](const std::string& key, std::uint64_t& dst) {
    if (kv.has(key)) dst = field(key, [&] { return kv.get_u64(key); });
  };
  if (kv.has("mode")) c.mode = field("mode", [&] { return parse_mode(kv.get("mode")); });
  get_int("grid.d", c.d);
  get_int("grid.n", c.n);
  get_double("model.mu", c.params.mu);
  get_double("model.nu", c.params.nu);
  get_double("model.alpha", c.params.alpha);
  if (kv.has("data.family")) {
    c.data.family = field("data.family", [&] { return data::parse_family(kv.get("data.family")); });
  }
  get_double("data.amplitude", c.data.amplitude);
  get_u64("data.seed", c.data.seed);
  get_int("data.shell", c.data.shell);
  get_double("time.dt", c.dt);
  get_double("time.T", c.T);
  if (kv.has("output.dir")) c.out = kv.get("output.dir");
  get_int("output.checkpoint_every", c.checkpoint_every);
  get_double("picard.delta", c.delta);
  get_int("picard.n_max", c.n_max);
  get_double("picard.tol", c.contraction_tol);
  if (kv.has("uniqueness.epsilon")) {
    c.epsilons = parse_list("uniqueness.epsilon", kv.get("uniqueness.epsilon"));
  }
  get_double("uniqueness.T1", c.T1);
  get_u64("uniqueness.perturbation_seed", c.perturbation_seed);
  get_double("uniqueness.smallness_constant", c.smallness_constant);
  get_double("uniqueness.envelope_constant", c.envelope_constant);
  get_int("inequalities.trials", c.trials);
  get_int("inequalities.calibration_n", c.calibration_n);
  get_int("inequalities.assert_n", c.assert_n);
  get_double("inequalities.margin", c.margin);
  get_u64("inequalities.seed", c.suite_seed);
  get_int("inequalities.bins", c.histogram_bins);
  c.validate();
  return c;
}

kv::KeyValue ExperimentConfig::to_keyvalue() const {
  kv::KeyValue kv;
  auto num = [](double x) { return csv::format_number(x); };
  kv.set("mode", to_string(mode));
  kv.set("grid.d", std::to_string(d));
  kv.set("grid.n", std::to_string(n));
  kv.set("model.mu", num(params.mu));
  kv.set("model.nu", num(params.nu));
  kv.set("model.alpha", num(params.alpha));
  kv.set("data.family", data::to_string(data.family));
  kv.set("data.amplitude", num(data.amplitude));
  kv.set("data.seed", std::to_string(data.seed));
  kv.set("data.shell", std::to_string(data.shell));
  kv.set("time.dt", num(dt));
  kv.set("time.T", num(T));
  kv.set("output.dir", out.string());
  kv.set("output.checkpoint_every", std::to_string(checkpoint_every));
  kv.set("picard.delta", num(delta));
  kv.set("picard.n_max", std::to_string(n_max));
  kv.set("picard.tol", num(contraction_tol));
  kv.set("uniqueness.epsilon", join(epsilons));
  kv.set("uniqueness.T1", num(T1));
  kv.set("uniqueness.perturbation_seed", std::to_string(perturbation_seed));
  kv.set("uniqueness.smallness_constant", num(smallness_constant));
  kv.set("uniqueness.envelope_constant", num(envelope_constant));
  kv.set("inequalities.trials", std::to_string(trials));
  kv.set("inequalities.calibration_n", std::to_string(calibration_n));
  kv.set("inequalities.assert_n", std::to_string(assert_n));
  kv.set("inequalities.margin", num(margin));
  kv.set("inequalities.seed", std::to_string(suite_seed));
  kv.set("inequalities.bins", std::to_string(histogram_bins));
  return kv;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ConfigError(key, msg);
  };
  require(d == 2 || d == 3, "grid.d", "must be 2 or 3, got " + std::to_string(d));
  require(power_of_two(n) && n >= 8, "grid.n", "must be a power of two >= 8, got " + std::to_string(n));
  require(std::isfinite(params.mu) && params.mu >= 0, "model.mu", "must be >= 0");
  require(std::isfinite(params.nu) && params.nu >= 0, "model.nu", "must be >= 0");
  {
    std::ostringstream msg;
    msg << "must lie in [1, " << 1.0 + d / 4.0 << "), got " << params.alpha;
    require(params.alpha >= 1.0 && params.alpha < 1.0 + d / 4.0, "model.alpha", msg.str());
  }
  require(std::isfinite(data.amplitude) && data.amplitude >= 0, "data.amplitude", "must be >= 0");
  require(data.shell >= 0, "data.shell", "must be >= 0");
  require(std::isfinite(dt) && dt > 0, "time.dt", "must be > 0");
  require(std::isfinite(T) && T > 0, "time.T", "must be > 0");
  const double steps = T / dt;
  require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps), "time.dt",
          "must divide time.T into a whole number of steps");
  require(checkpoint_every >= 0, "output.checkpoint_every", "must be >= 0");
  require(delta > 0 && delta < 1, "picard.delta", "must lie in (0, 1)");
  require(n_max >= 1, "picard.n_max", "must be >= 1");
  require(contraction_tol > 0, "picard.tol", "must be > 0");
  require(!epsilons.empty(), "uniqueness.epsilon", "needs at least one value");
  for (double e : epsilons) {
    require(std::isfinite(e) && e >= 0, "uniqueness.epsilon", "values must be >= 0");
  }
  require(T1 >= dt, "uniqueness.T1", "must be >= time.dt");
  require(smallness_constant > 0, "uniqueness.smallness_constant", "must be > 0");
  require(envelope_constant > 0, "uniqueness.envelope_constant", "must be > 0");
  require(trials >= 1, "inequalities.trials", "must be >= 1");
  require(power_of_two(calibration_n) && calibration_n >= 8, "inequalities.calibration_n",
          "must be a power of two >= 8");
  require(power_of_two(assert_n) && assert_n >= 8, "inequalities.assert_n",
          "must be a power of two >= 8");
  require(margin >= 1, "inequalities.margin", "must be >= 1");
  require(histogram_bins >= 1, "inequalities.bins", "must be >= 1");
}

// Reports -----------------------------------------------------------------

json RunReport::to_json() const {
  json j;
  j["mode"] = mode;
  j["status"] = status;
  j["exit_code"] = exit_code;
  j["message"] = message;
  j["files"] = files;
  j["budget_pass"] = budget_pass ? json(*budget_pass) : json(nullptr);
  j["blow_up"] = blow_up;
  j["blow_up_time"] = blow_up_time ? json(*blow_up_time) : json(nullptr);
  j["steps"] = steps;
  j["details"] = details;
  return j;
}

RunReport RunReport::from_json(const json& j) {
  RunReport r;
  r.mode = j.at("mode").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.exit_code = j.at("exit_code").get<int>();
  r.message = j.at("message").get<std::string>();
  r.files = j.at("files").get<std::vector<std::string>>();
  if (!j.at("budget_pass").is_null()) r.budget_pass = j.at("budget_pass").get<bool>();
  r.blow_up = j.at("blow_up").get<bool>();
  if (!j.at("blow_up_time").is_null()) r.blow_up_time = j.at("blow_up_time").get<double>();
  r.steps = j.at("steps").get<std::size_t>();
  r.details = j.at("details");
  return r;
}

std::vector<std::string> norms_header(int j_max) {
  std::vector<std::string> h{"t"};
  for (const char* f : {"u", "v", "theta"}) {
    for (int j = -1; j <= j_max; ++j) h.push_back(std::string(f) + "_block_" + std::to_string(j));
  }
  for (const char* f : {"u", "v", "theta"}) {
    for (const char* s : {"s_uv", "s_theta", "s_smooth"}) {
      h.push_back(std::string(f) + "_besov_" + s);
    }
  }
  return h;
}

namespace {

struct Indices {
  double s_uv, s_theta, s_smooth;
};

Indices indices(int d, double alpha) {
  return {1.0 + d / 2.0 - 2.0 * alpha, 1.0 + d / 2.0 - alpha, 1.0 + d / 2.0};
}

class NormsWriter {
 public:
  NormsWriter(const std::filesystem::path& path, const lp::DyadicPartition& part, Indices s)
      : part_(part), s_(s), w_(path, norms_header(part.j_max())) {}

  void row(const model::TCMState& y) {
    std::vector<double> r{y.t};
    const auto bu = lp::block_norms(y.u, part_);
    const auto bv = lp::block_norms(y.v, part_);
    const auto bt = lp::block_norms(y.theta, part_);
    for (const auto* b : {&bu, &bv, &bt}) r.insert(r.end(), b->begin(), b->end());
    for (const auto* b : {&bu, &bv, &bt}) {
      for (double s : {s_.s_uv, s_.s_theta, s_.s_smooth}) {
        r.push_back(lp::besov_from_blocks(*b, {s, lp::Summability::One}));
      }
    }
    w_.row(r);
  }
  void close() { w_.close(); }

 private:
  const lp::DyadicPartition& part_;
  Indices s_;
  csv::Writer w_;
};

std::vector<SpectralField> state_fields(const model::TCMState& y) {
  std::vector<SpectralField> f;
  for (const auto& c : y.u) f.push_back(c);
  for (const auto& c : y.v) f.push_back(c);
  f.push_back(y.theta);
  return f;
}

class Output {
 public:
  Output(const std::filesystem::path& dir, RunReport& report) : dir_(dir), report_(report) {}

  std::filesystem::path file(const std::string& rel) {
    report_.files.push_back(rel);
    return dir_ / rel;
  }

  void checkpoint(const model::TCMState& y, std::size_t step) {
    char name[64];
    std::snprintf(name, sizeof name, "checkpoints/step_%08zu.tcmf", step);
    std::filesystem::create_directories(dir_ / "checkpoints");
    write_checkpoint(file(name), state_fields(y));
  }

 private:
  std::filesystem::path dir_;
  RunReport& report_;
};

void maybe_checkpoint(Output& out, const ExperimentConfig& cfg, const model::TCMState& y,
                      std::size_t step, std::size_t last) {
  if (cfg.checkpoint_every == 0) return;
  if (step % static_cast<std::size_t>(cfg.checkpoint_every) == 0 || step == last) {
    out.checkpoint(y, step);
  }
}

double max_velocity(const model::TCMState& y) {
  double m = 0.0;
  for (const VectorField* w : {&y.u, &y.v}) {
    for (const auto& c : *w) {
      for (double x : inverse_transform(c)) m = std::max(m, std::abs(x));
    }
  }
  return m;
}

void log_cfl(const ExperimentConfig& cfg, const model::TCMState& y, const Logger& log) {
  const double dx = 2.0 * std::numbers::pi / cfg.n;
  const double cfl = max_velocity(y) * cfg.dt / dx;
  std::ostringstream msg;
  msg << "advisory: CFL number " << std::setprecision(3) << cfl << " (max velocity * dt / dx)";
  if (cfl > 0.5) msg << ", above 0.5; consider a smaller time.dt";
  log(msg.str());
}

json data_json(const data::InitialData& init) {
  return {{"u_norm", init.u_norm},
          {"v_norm", init.v_norm},
          {"theta_norm", init.theta_norm},
          {"M", init.M}};
}

void run_direct(const ExperimentConfig& cfg, const data::InitialData& init, Output& out,
                RunReport& rep, const Logger& log) {
  const Grid grid(cfg.d, cfg.n);
  const model::Stepper stepper(grid, cfg.params);
  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  NormsWriter norms(out.file("norms.csv"), stepper.partition(), indices(cfg.d, cfg.params.alpha));
  model::TCMState y = init.state;
  y.t = 0.0;
  norms.row(y);
  maybe_checkpoint(out, cfg, y, 0, steps);
  double max_div = model::divergence_residual(y.u);
  try {
    for (std::size_t i = 1; i <= steps; ++i) {
      y = stepper.step(y, cfg.dt);
      y.t = static_cast<double>(i) * cfg.dt;
      norms.row(y);
      maybe_checkpoint(out, cfg, y, i, steps);
      max_div = std::max(max_div, model::divergence_residual(y.u));
      rep.steps = i;
    }
  } catch (const model::BlowUp& e) {
    rep.blow_up = true;
    rep.blow_up_time = e.time();
    rep.status = "blow-up";
    rep.exit_code = kBlowUp;
    rep.message = e.what();
    log(std::string("blow-up: ") + e.what());
  }
  norms.close();
  rep.details["final_time"] = y.t;
  rep.details["final_l2"] = model::l2_norm(y);
  rep.details["max_divergence_residual"] = max_div;
}

void run_picard(const ExperimentConfig& cfg, const data::InitialData& init, Output& out,
                RunReport& rep, const Logger& log) {
  const Grid grid(cfg.d, cfg.n);
  const model::Stepper stepper(grid, cfg.params);
  const auto& part = stepper.partition();
  const auto budget =
      picard::BudgetY::from_data(init.state, cfg.params.alpha, cfg.delta, cfg.T, part);
  picard::SchemeOptions opts;
  opts.n_max = cfg.n_max;
  opts.contraction_tol = cfg.contraction_tol;
  const auto res = picard::run_scheme(init.state, cfg.params, budget, cfg.dt, opts);

  csv::Writer table(out.file("contraction.csv"),
                    {"n", "difference", "ratio", "budget_pass", "u_inf", "v_inf", "theta_inf",
                     "u_l1", "v_l1", "J_total", "K_total", "I_total", "growth_u", "growth_v",
                     "growth_theta", "dominance_ratio"});
  json rows = json::array();
  for (const auto& r : res.table) {
    const auto& b = r.budget;
    const auto& tb = r.terms;
    table.row(std::vector<std::string>{
        std::to_string(r.n), csv::format_number(r.difference), csv::format_number(r.ratio),
        b.pass ? "1" : "0", csv::format_number(b.u_inf), csv::format_number(b.v_inf),
        csv::format_number(b.theta_inf), csv::format_number(b.u_l1), csv::format_number(b.v_l1),
        csv::format_number(tb.J_total()), csv::format_number(tb.K_total()),
        csv::format_number(tb.I_total()), csv::format_number(tb.growth_u),
        csv::format_number(tb.growth_v), csv::format_number(tb.growth_theta),
        csv::format_number(tb.dominance_ratio())});
    rows.push_back({{"n", r.n}, {"difference", r.difference}, {"ratio", r.ratio},
                    {"budget_pass", b.pass}});
    std::ostringstream msg;
    msg << "iterate " << r.n + 1 << ": difference " << std::setprecision(4) << r.difference
        << " ratio " << r.ratio << (b.pass ? "" : " (budget violated: " + b.violated + ")");
    log(msg.str());
  }
  table.close();

  rep.budget_pass = res.all_in_budget;
  rep.status = picard::to_string(res.status);
  rep.message = res.message;
  rep.details["budget"] = {{"M", budget.M}, {"delta", budget.delta}, {"T", budget.T},
                           {"s_uv", budget.s_uv}, {"s_theta", budget.s_theta},
                           {"s_smooth", budget.s_smooth}};
  rep.details["contraction"] = rows;
  rep.details["iterates"] = res.table.empty() ? 1 : res.table.back().n + 1;
  switch (res.status) {
    case picard::SchemeStatus::Converged: rep.exit_code = kSuccess; rep.status = "success"; break;
    case picard::SchemeStatus::BudgetViolation: rep.exit_code = kBudgetViolation; break;
    case picard::SchemeStatus::NonContraction: rep.exit_code = kNonContraction; break;
    case picard::SchemeStatus::BlowUp:
      rep.exit_code = kBlowUp;
      rep.blow_up = true;
      rep.blow_up_time = res.blow_up_time;
      break;
  }
  if (!res.trajectories.empty()) {
    const auto& last = res.trajectories.back();
    NormsWriter norms(out.file("norms.csv"), part, indices(cfg.d, cfg.params.alpha));
    for (std::size_t i = 0; i < last.samples.size(); ++i) {
      norms.row(last.samples[i]);
      maybe_checkpoint(out, cfg, last.samples[i], i, last.samples.size() - 1);
    }
    norms.close();
    rep.steps = last.samples.size() - 1;
    rep.details["fixed_point_residual"] = picard::fixed_point_residual(last.samples, stepper);
  }
}

void run_uniqueness(const ExperimentConfig& cfg, const data::InitialData& init, Output& out,
                    RunReport& rep, const Logger& log) {
  std::vector<double> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

  csv::Writer table(out.file("uniqueness.csv"),
                    {"epsilon", "t", "f_uv", "theta_diff", "u_diff_l2", "v_diff_l2",
                     "theta_diff_l2", "envelope"});
  json runs = json::array();
  std::vector<ineq::UniquenessMeasurement> ms;
  bool all_inside = true;
  for (double e : eps) {
    ineq::UniquenessConfig uc;
    uc.params = cfg.params;
    uc.epsilon = e;
    uc.dt = cfg.dt;
    uc.T1 = cfg.T1;
    uc.perturbation_seed = cfg.perturbation_seed;
    uc.smallness_constant = cfg.smallness_constant;
    ineq::UniquenessMeasurement m;
    try {
      m = ineq::measure_uniqueness(init.state, uc);
    } catch (const std::runtime_error& err) {
      rep.status = "budget-violation";
      rep.exit_code = kBudgetViolation;
      rep.message = std::string("epsilon ") + csv::format_number(e) + ": " + err.what();
      log(rep.message);
      break;
    }
    std::vector<double> bound(m.f.size(), NAN);
    json run = {{"epsilon", e}, {"T1", m.T1}, {"halvings", m.halvings},
                {"smallness", m.smallness}, {"final_f", m.f.back()}};
    try {
      const auto env = ineq::envelope(m, cfg.envelope_constant);
      bound = env.bound;
      run["inside"] = env.inside;
      run["worst_ratio"] = env.worst_ratio;
      all_inside = all_inside && env.inside;
    } catch (const std::domain_error& err) {
      run["inside"] = nullptr;
      run["envelope_error"] = err.what();
    }
    run["minimal_envelope_constant"] = ineq::minimal_envelope_constant(m);
    for (std::size_t i = 0; i < m.times.size(); ++i) {
      table.row(std::vector<double>{e, m.times[i], m.f[i], m.theta_diff[i], m.u_diff_l2[i],
                                    m.v_diff_l2[i], m.theta_diff_l2[i], bound[i]});
    }
    std::ostringstream msg;
    msg << "epsilon " << e << ": T1 " << m.T1 << ", final difference " << m.f.back();
    log(msg.str());
    runs.push_back(run);
    ms.push_back(std::move(m));
  }
  table.close();

  // ordering in epsilon on the common time prefix
  bool monotone = true;
  for (std::size_t k = 1; k < ms.size(); ++k) {
    const std::size_t len = std::min(ms[k].f.size(), ms[k - 1].f.size());
    for (std::size_t i = 0; i < len; ++i) monotone = monotone && ms[k].f[i] >= ms[k - 1].f[i];
  }
  rep.details["runs"] = runs;
  rep.details["monotone_in_epsilon"] = monotone;
  rep.details["all_inside_envelope"] = all_inside;
  rep.budget_pass = rep.exit_code == kSuccess;
  if (rep.exit_code == kSuccess && !all_inside) {
    rep.status = "budget-violation";
    rep.exit_code = kBudgetViolation;
    rep.message = "difference leaves the Osgood envelope";
  }
  rep.steps = ms.empty() ? 0 : ms.back().times.size() - 1;
}

void histogram_rows(csv::Writer& w, const std::string& phase, const ineq::SuiteResult& s, int bins) {
  const double hi = s.max_ratio > 0 ? s.max_ratio : 1.0;
  std::vector<int> count(bins, 0);
  for (double r : s.ratios) {
    int b = static_cast<int>(r / hi * bins);
    count[std::clamp(b, 0, bins - 1)]++;
  }
  for (int b = 0; b < bins; ++b) {
    w.row(std::vector<std::string>{phase, s.name, std::to_string(b),
                                   csv::format_number(hi * b / bins),
                                   csv::format_number(hi * (b + 1) / bins), std::to_string(count[b])});
  }
}

void run_inequalities(const ExperimentConfig& cfg, Output& out, RunReport& rep, const Logger& log) {
  std::vector<ineq::SuiteResult> cal_suites, check_suites;
  const Grid coarse(cfg.d, cfg.calibration_n), fine(cfg.d, cfg.assert_n);
  log("calibrating on n = " + std::to_string(cfg.calibration_n));
  const auto cal = ineq::calibrate(coarse, cfg.trials, cfg.suite_seed, cfg.margin, &cal_suites);
  ineq::write_calibration(out.file("calibration.txt"), cal);
  log("asserting on n = " + std::to_string(cfg.assert_n));
  const auto checks = ineq::assert_calibration(cal, fine, cfg.trials,
                                               cfg.suite_seed ^ 0x5DEECE66DULL, &check_suites);

  csv::Writer hist(out.file("histograms.csv"), {"phase", "check", "bin", "lo", "hi", "count"});
  for (const auto& s : cal_suites) histogram_rows(hist, "calibration", s, cfg.histogram_bins);
  for (const auto& s : check_suites) histogram_rows(hist, "assertion", s, cfg.histogram_bins);
  hist.close();

  json table = json::array();
  int violations = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& a = checks[i];
    violations += a.violations;
    table.push_back({{"check", a.name},
                     {"constant", a.constant},
                     {"calibration_max", cal_suites[i].max_ratio},
                     {"calibration_skipped", cal_suites[i].skipped},
                     {"assertion_max", a.max_ratio},
                     {"checks", a.checks},
                     {"violations", a.violations}});
    std::ostringstream msg;
    msg << a.name << ": constant " << a.constant << ", max ratio " << a.max_ratio << ", "
        << a.violations << " / " << a.checks << " violations";
    log(msg.str());
  }
  rep.details["checks"] = table;
  rep.budget_pass = violations == 0;
  if (violations) {
    rep.status = "budget-violation";
    rep.exit_code = kBudgetViolation;
    rep.message = std::to_string(violations) + " ratios exceed their calibrated constants";
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

RunReport run(const ExperimentConfig& config, const Logger& logger) {
  config.validate();
  const Logger log = logger ? logger : [](const std::string&) {};
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec || !std::filesystem::is_directory(config.out)) {
    throw ConfigError("output.dir", "cannot create '" + config.out.string() + "'");
  }
  {
    std::ofstream probe(config.out / "config.txt");
    if (!probe) throw ConfigError("output.dir", "'" + config.out.string() + "' is not writable");
  }

  RunReport rep;
  rep.mode = to_string(config.mode);
  Output out(config.out, rep);
  config.to_keyvalue().save(out.file("config.txt"), "resolved experiment configuration");

  if (config.mode == Mode::Inequalities) {
    run_inequalities(config, out, rep, log);
  } else {
    const Grid grid(config.d, config.n);
    const auto init = data::generate_data(config.data, grid, config.params.alpha);
    rep.details["data"] = data_json(init);
    log_cfl(config, init.state, log);
    switch (config.mode) {
      case Mode::Direct: run_direct(config, init, out, rep, log); break;
      case Mode::Picard: run_picard(config, init, out, rep, log); break;
      case Mode::Uniqueness: run_uniqueness(config, init, out, rep, log); break;
      case Mode::Inequalities: break;
    }
  }

  rep.files.push_back("report.json");
  rep.files.push_back("timing.json");
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(config.out / "report.json", rep.to_json());
  write_json(config.out / "timing.json", {{"wall_seconds", rep.wall_seconds}});
  return rep;
}

RunReport load_report(const std::filesystem::path& dir) {
  std::ifstream f(dir / "report.json");
  if (!f) throw std::runtime_error("no report.json in " + dir.string());
  RunReport rep = RunReport::from_json(json::parse(f));
  std::ifstream t(dir / "timing.json");
  if (t) rep.wall_seconds = json::parse(t).value("wall_seconds", 0.0);
  for (const auto& file : rep.files) {
    if (!std::filesystem::exists(dir / file)) {
      throw std::runtime_error("report lists missing file " + (dir / file).string());
    }
  }
  return rep;
}

std::string summarize(const RunReport& r) {
  std::ostringstream s;
  s << "mode:        " << r.mode << '\n'
    << "status:      " << r.status << " (exit " << r.exit_code << ")\n";
  if (!r.message.empty()) s << "message:     " << r.message << '\n';
  if (r.budget_pass) s << "budget:      " << (*r.budget_pass ? "pass" : "FAIL") << '\n';
  if (r.blow_up) {
    s << "blow-up:     yes";
    if (r.blow_up_time) s << " at t = " << *r.blow_up_time;
    s << '\n';
  }
  s << "steps:       " << r.steps << '\n'
    << "wall clock:  " << std::fixed << std::setprecision(2) << r.wall_seconds << " s\n";
  s.unsetf(std::ios::floatfield);
  s << std::setprecision(6);
  if (r.details.contains("contraction")) {
    s << "contraction:\n";
    for (const auto& row : r.details["contraction"]) {
      s << "  n=" << std::setw(3) << row["n"].get<int>() << "  difference "
        << std::setw(12) << row["difference"].get<double>() << "  ratio " << row["ratio"].get<double>()
        << '\n';
    }
  }
  if (r.details.contains("checks")) {
    s << "checks:\n";
    for (const auto& row : r.details["checks"]) {
      s << "  " << std::left << std::setw(22) << row["check"].get<std::string>() << std::right
        << " constant " << row["constant"].get<double>() << "  max " << row["assertion_max"].get<double>()
        << "  violations " << row["violations"].get<int>() << '\n';
    }
  }
  if (r.details.contains("runs")) {
    s << "uniqueness:\n";
    for (const auto& row : r.details["runs"]) {
      s << "  epsilon " << row["epsilon"].get<double>() << "  T1 " << row["T1"].get<double>()
        << "  final difference " << row["final_f"].get<double>() << '\n';
    }
  }
  s << "files:\n";
  for (const auto& f : r.files) s << "  " << f << '\n';
  return s.str();
}

}  // namespace tcm::exp
