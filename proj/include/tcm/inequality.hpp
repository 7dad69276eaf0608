#pragma once

// Sampled harmonic-analysis estimates, the Osgood comparison bound and the
// two-run uniqueness experiment. Structural right-hand sides are evaluated
// with the constant set to 1; constants are measured by the suites below.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tcm/littlewood_paley.hpp"
#include "tcm/model.hpp"

namespace tcm::ineq {

struct BoundCheck {
  double lhs = 0.0;
  double rhs_shape = 0.0;
  std::array<double, 3> rhs_parts{};  // low-high, high-low, high-high sums
  bool skipped = false;               // rhs_shape == 0 or degenerate input
  std::string context;

  /// lhs / rhs_shape; throws std::logic_error when skipped.
  double ratio() const;
};

enum class TripleVariant {
  Transport,       // |int Delta_j(v.grad u) . Delta_j w|
  Commutator,      // |int Delta_j(u.grad v) . Delta_j v|, div u = 0
  Product,         // |sum_i int Delta_j(v_i w_i) Delta_j u_i|
};
std::string to_string(TripleVariant v);

/// For Commutator only u and v are used (w ignored). Throws
/// std::out_of_range for j outside the partition and std::invalid_argument
/// for a divergent u in the Commutator variant.
BoundCheck check_triple_product(TripleVariant variant, const VectorField& u, const VectorField& v,
                                const VectorField& w, int j, const lp::DyadicPartition& part);

/// |u|_{L1_t B^{d/2}_{2,1}} against |u|_{L~1_t B^{d/2}_{2,inf}} log(e + |u|_{L1_t B^{1+d/2}_{2,1}} / same).
/// All-zero series are skipped.
BoundCheck check_log_interpolation(const lp::NormSeries& series, int d);

// Osgood comparison -------------------------------------------------------

struct Modulus {
  enum class Kind { Linear, Log } kind = Kind::Log;
  double C = 1.0;  // Log: r log(e + C / r)

  double operator()(double r) const;
  static Modulus linear() { return {Kind::Linear, 0.0}; }
  static Modulus log(double C) { return {Kind::Log, C}; }
};

struct OsgoodProblem {
  double c = 0.0;
  std::vector<double> times;  // t_0 < t_1 < ...
  std::vector<double> phi;    // phi(times[i]) >= 0
  Modulus modulus;
  double a = 0.5;             // 0 < a < 1
};

/// int_x^y dr / mu(r) for 0 < x <= y, adaptive Gauss-Kronrod in log r.
double modulus_integral(const Modulus& mu, double x, double y);
/// psi(x) = int_x^a dr / mu(r).
double psi(const Modulus& mu, double x, double a);

class OsgoodBound {
 public:
  /// Validates the problem; throws std::domain_error when c >= a.
  explicit OsgoodBound(OsgoodProblem problem);

  /// Largest f with int_c^f dr / mu(r) <= int_{t_0}^t phi (bisection in log f).
  double operator()(double t) const;
  /// Bound evaluated at every sample time.
  std::vector<double> at_samples() const;

 private:
  double phi_integral(double t) const;
  OsgoodProblem p_;
  std::vector<double> cumulative_;  // trapezoid integral of phi at samples
};

OsgoodBound osgood_bound(const OsgoodProblem& problem);

// Uniqueness experiment ---------------------------------------------------

struct UniquenessConfig {
  model::ModelParams params;
  double epsilon = 1e-6;
  double dt = 1e-3;
  double T1 = 0.05;
  std::uint64_t perturbation_seed = 7;
  double smallness_constant = 1.0;  // C in the smallness condition
  int max_halvings = 20;
};

/// Measured norms of two runs from data and data + epsilon * perturbation.
struct UniquenessMeasurement {
  double T1 = 0.0;
  int halvings = 0;
  double smallness = 0.0;            // value compared against 1/4
  std::vector<double> times;
  std::vector<double> f;             // |u~|_{L~1_t B^{d/2}_{2,inf}} + same for v~
  std::vector<double> theta_diff;    // |theta~(t)|_{B^{1+d/2-2 alpha}_{2,inf}}
  std::vector<double> u_diff_l2;     // plain L^2 of the differences
  std::vector<double> v_diff_l2;
  std::vector<double> theta_diff_l2;
  double initial_uv = 0.0;           // |(u~0, v~0)|_{B^{d/2-2 alpha}_{2,inf}}
  double initial_theta = 0.0;        // |theta~0|_{B^{1+d/2-2 alpha}_{2,inf}}
  double theta1_norm = 0.0;          // |theta_1|_{L^inf_T B^{1+d/2-alpha}_{2,1}}
  double smooth_norm = 0.0;          // |(u~, v~)|_{L1_T B^{1+d/2}_{2,1}}
};

/// Throws std::runtime_error with the measured value if the smallness
/// condition cannot be met by halving T1.
UniquenessMeasurement measure_uniqueness(const model::TCMState& data, const UniquenessConfig& cfg);

struct Envelope {
  double C_env = 0.0;
  double c = 0.0;
  double phi = 0.0;
  double C_O = 0.0;
  std::vector<double> bound;
  bool inside = true;
  double worst_ratio = 0.0;  // max f / bound over samples with bound > 0
};

/// c = C_env (initial_uv + T1 initial_theta), phi = C_env (1 + theta1_norm),
/// modulus r log(e + C_O / r) with C_O = smooth_norm, a = 1/2.
Envelope envelope(const UniquenessMeasurement& m, double C_env);
/// Smallest C_env with f inside the envelope (bisection on log C_env).
double minimal_envelope_constant(const UniquenessMeasurement& m);

// Calibration suites ------------------------------------------------------

struct SuiteResult {
  std::string name;
  std::vector<double> ratios;  // one per evaluated check
  int skipped = 0;
  double max_ratio = 0.0;
};

SuiteResult triple_product_suite(TripleVariant variant, const Grid& grid, int trials,
                                 std::uint64_t seed);
SuiteResult log_interpolation_suite(const Grid& grid, int trials, std::uint64_t seed);
SuiteResult picard_dominance_suite(const Grid& grid, int trials, std::uint64_t seed);
SuiteResult uniqueness_envelope_suite(const Grid& grid, int trials, std::uint64_t seed);

struct Calibration {
  int d = 2;
  int n = 16;
  std::uint64_t seed = 0;
  int trials = 200;
  double margin = 1.5;
  std::map<std::string, double> constants;  // check name -> calibrated constant
};

/// Runs every suite on the given grid; constants = margin * max ratio.
Calibration calibrate(const Grid& grid, int trials, std::uint64_t seed, double margin,
                      std::vector<SuiteResult>* suites = nullptr);

struct AssertionResult {
  std::string name;
  double constant = 0.0;
  double max_ratio = 0.0;
  int checks = 0;
  int violations = 0;
};

/// Reruns the suites on another grid with fresh seeds and counts ratios above
/// the calibrated constants.
std::vector<AssertionResult> assert_calibration(const Calibration& cal, const Grid& grid,
                                                int trials, std::uint64_t seed,
                                                std::vector<SuiteResult>* suites = nullptr);

void write_calibration(const std::filesystem::path& path, const Calibration& cal);
Calibration read_calibration(const std::filesystem::path& path);

}  // namespace tcm::ineq
