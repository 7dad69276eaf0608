#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tcm/csv.hpp"
#include "tcm/experiment.hpp"
#include "tcm/inequality.hpp"
#include "tcm/keyvalue.hpp"

using namespace tcm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("tcm_exp_" + name);
  fs::remove_all(p);
  return p;
}

exp::ExperimentConfig small_config(exp::Mode mode, const fs::path& out) {
  exp::ExperimentConfig c;
  c.mode = mode;
  c.n = 16;
  c.T = 0.02;
  c.dt = 1e-3;
  c.T1 = 0.02;
  c.out = out;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Parses every CSV listed in the report and checks numeric cells.
void check_all_csv(const fs::path& dir, const exp::RunReport& rep) {
  for (const auto& f : rep.files) {
    ASSERT_TRUE(fs::exists(dir / f)) << f;
    if (fs::path(f).extension() != ".csv") continue;
    const auto t = csv::read(dir / f);
    EXPECT_FALSE(t.header.empty()) << f;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (const auto& name : t.header) {
        if (name == "phase" || name == "check") continue;
        EXPECT_NO_THROW(t.number(r, name)) << f << " row " << r << " column " << name;
      }
    }
  }
}

exp::ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return exp::ExperimentConfig::from_keyvalue(kv::KeyValue::parse(in, "test"));
}

}  // namespace

// CSV ---------------------------------------------------------------------

TEST(Csv, QuotingRoundTrip) {
  const auto path = scratch("quote.csv");
  const std::vector<std::string> header{"plain", "with,comma", "with \"quote\"", "multi\nline"};
  const std::vector<std::string> row{"a", "b,c", "\"", "x\r\ny"};
  {
    csv::Writer w(path, header);
    w.row(row);
    w.row(std::vector<std::string>{"", "", "", ""});
    w.close();
  }
  const auto t = csv::read(path);
  EXPECT_EQ(t.header, header);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], row);
  EXPECT_EQ(t.rows[1], std::vector<std::string>(4, ""));
  EXPECT_NE(slurp(path).find("\"with \"\"quote\"\"\""), std::string::npos);
  fs::remove(path);
}

TEST(Csv, NumbersRoundTripExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-30, 30);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(U(rng), static_cast<int>(U(rng)));
    std::istringstream in("x\n" + csv::format_number(x) + "\n");
    EXPECT_EQ(csv::parse(in).number(0, "x"), x);
  }
  EXPECT_EQ(csv::format_number(0.1), "0.1");
  EXPECT_EQ(csv::format_number(1e-300), "1e-300");
  EXPECT_EQ(csv::format_number(NAN), "nan");
}

TEST(Csv, AcceptsLfAndRejectsMalformed) {
  std::istringstream lf("a,b\n1,2\n3,4");
  const auto t = csv::parse(lf);
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(1, "b"), 4.0);
  EXPECT_THROW(t.column("c"), std::out_of_range);
  std::istringstream ragged("a,b\r\n1\r\n");
  EXPECT_THROW(csv::parse(ragged), std::invalid_argument);
  std::istringstream open("a\r\n\"x\r\n");
  EXPECT_THROW(csv::parse(open), std::invalid_argument);
  std::istringstream text("a\r\nfoo\r\n");
  EXPECT_THROW(csv::parse(text).number(0, "a"), std::invalid_argument);
  EXPECT_THROW(csv::Writer(scratch("w.csv"), {"a", "b"}).row(std::vector<double>{1.0}),
               std::invalid_argument);
}

// Key-value files ---------------------------------------------------------

TEST(KeyValue, ParseErrorsCarryLineNumbers) {
  std::istringstream ok("# comment\n\na = 1\n b.c-d_e = two words \n");
  const auto kv = kv::KeyValue::parse(ok, "f.txt");
  EXPECT_EQ(kv.get("a"), "1");
  EXPECT_EQ(kv.get("b.c-d_e"), "two words");
  EXPECT_EQ(kv.get_int("a"), 1);
  EXPECT_THROW(kv.get_double("b.c-d_e"), std::invalid_argument);
  EXPECT_EQ(kv.get_or("zzz", "fallback"), "fallback");

  std::istringstream dup("a = 1\na = 2\n");
  try {
    kv::KeyValue::parse(dup, "f.txt");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("f.txt:2:", 0), 0u) << e.what();
  }
  std::istringstream noeq("a = 1\njunk\n");
  EXPECT_THROW(kv::KeyValue::parse(noeq), std::invalid_argument);
  std::istringstream badkey("a b = 1\n");
  EXPECT_THROW(kv::KeyValue::parse(badkey), std::invalid_argument);
}

TEST(KeyValue, OverridesAndSaveLoad) {
  kv::KeyValue kv;
  kv.apply_override("time.dt=5e-4");
  kv.apply_override(" grid.n = 64 ");
  EXPECT_EQ(kv.get_double("time.dt"), 5e-4);
  EXPECT_EQ(kv.get_int("grid.n"), 64);
  EXPECT_THROW(kv.apply_override("novalue"), std::invalid_argument);
  const auto path = scratch("kv.txt");
  kv.save(path, "two\nlines");
  EXPECT_EQ(slurp(path).rfind("# two\n# lines\n", 0), 0u);
  EXPECT_EQ(kv::KeyValue::load(path).entries(), kv.entries());
  fs::remove(path);
}

// Configuration -----------------------------------------------------------

TEST(Config, DefaultsValidAndRoundTrip) {
  exp::ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.mode = exp::Mode::Uniqueness;
  c.epsilons = {0.0, 1e-7};
  c.data.family = data::Family::SingleShell;
  const auto back = exp::ExperimentConfig::from_keyvalue(c.to_keyvalue());
  EXPECT_EQ(back.to_keyvalue().entries(), c.to_keyvalue().entries());
  EXPECT_EQ(back.epsilons, c.epsilons);
  EXPECT_EQ(back.mode, exp::Mode::Uniqueness);
  EXPECT_EQ(exp::config_keys().size(), c.to_keyvalue().entries().size());
}

TEST(Config, FieldLevelErrors) {
  auto field_of = [](const std::string& text) -> std::string {
    try {
      parse_config(text);
    } catch (const exp::ConfigError& e) {
      return e.field();
    }
    return "";
  };
  EXPECT_EQ(field_of("model.alpha = 1.5\n"), "model.alpha");        // d = 2: alpha < 1.5
  EXPECT_EQ(field_of("model.alpha = 0.9\n"), "model.alpha");
  EXPECT_EQ(field_of("grid.n = 24\n"), "grid.n");
  EXPECT_EQ(field_of("grid.d = 4\n"), "grid.d");
  EXPECT_EQ(field_of("time.dt = 0\n"), "time.dt");
  EXPECT_EQ(field_of("time.dt = 3e-3\n"), "time.dt");              // 0.1 / 3e-3 not whole
  EXPECT_EQ(field_of("time.T = -1\n"), "time.T");
  EXPECT_EQ(field_of("time.T = abc\n"), "time.T");
  EXPECT_EQ(field_of("mode = sideways\n"), "mode");
  EXPECT_EQ(field_of("data.family = noise\n"), "data.family");
  EXPECT_EQ(field_of("data.seed = -3\n"), "data.seed");
  EXPECT_EQ(field_of("picard.delta = 1\n"), "picard.delta");
  EXPECT_EQ(field_of("uniqueness.epsilon = 0, x\n"), "uniqueness.epsilon");
  EXPECT_EQ(field_of("colour = red\n"), "colour");
  EXPECT_EQ(field_of("grid.d = 3\nmodel.alpha = 1.7\n"), "");       // 3D allows alpha < 1.75
  EXPECT_EQ(parse_config("uniqueness.epsilon = 0, 1e-8 ,1e-6\n").epsilons,
            (std::vector<double>{0.0, 1e-8, 1e-6}));
}

// Runs --------------------------------------------------------------------

TEST(Run, DirectZeroDataIsFlatZero) {
  const auto dir = scratch("direct_zero");
  auto c = small_config(exp::Mode::Direct, dir);
  c.data.amplitude = 0.0;
  c.checkpoint_every = 10;
  const auto rep = exp::run(c);
  EXPECT_EQ(rep.exit_code, exp::kSuccess);
  EXPECT_EQ(rep.steps, 20u);
  check_all_csv(dir, rep);
  const auto t = csv::read(dir / "norms.csv");
  EXPECT_EQ(t.header, exp::norms_header(3));
  ASSERT_EQ(t.rows.size(), 21u);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    EXPECT_NEAR(t.number(r, "t"), r * 1e-3, 1e-15);
    for (const auto& h : t.header) {
      if (h != "t") EXPECT_EQ(t.number(r, h), 0.0) << h;
    }
  }
  for (const char* cp : {"checkpoints/step_00000000.tcmf", "checkpoints/step_00000010.tcmf",
                         "checkpoints/step_00000020.tcmf"}) {
    EXPECT_TRUE(fs::exists(dir / cp)) << cp;
  }
  fs::remove_all(dir);
}

TEST(Run, DirectIsBitReproducible) {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  auto ca = small_config(exp::Mode::Direct, a);
  auto cb = small_config(exp::Mode::Direct, b);
  ca.data.amplitude = cb.data.amplitude = 0.05;
  ca.checkpoint_every = cb.checkpoint_every = 20;
  exp::run(ca);
  exp::run(cb);
  EXPECT_EQ(slurp(a / "norms.csv"), slurp(b / "norms.csv"));
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "checkpoints/step_00000020.tcmf"), slurp(b / "checkpoints/step_00000020.tcmf"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, PicardWritesContractionTable) {
  const auto dir = scratch("picard");
  const auto rep = exp::run(small_config(exp::Mode::Picard, dir));
  EXPECT_EQ(rep.exit_code, exp::kSuccess);
  ASSERT_TRUE(rep.budget_pass.has_value());
  EXPECT_TRUE(*rep.budget_pass);
  check_all_csv(dir, rep);
  const auto t = csv::read(dir / "contraction.csv");
  ASSERT_GE(t.rows.size(), 3u);
  EXPECT_LT(t.number(t.rows.size() - 1, "difference"), 1e-8);
  for (std::size_t r = 0; r < t.rows.size(); ++r) EXPECT_EQ(t.number(r, "budget_pass"), 1.0);
  EXPECT_LT(rep.details["fixed_point_residual"].get<double>(), 1e-6);

  const auto loaded = exp::load_report(dir);
  EXPECT_EQ(loaded.to_json(), rep.to_json());
  EXPECT_NE(exp::summarize(loaded).find("contraction"), std::string::npos);
  fs::remove(dir / "norms.csv");
  EXPECT_THROW(exp::load_report(dir), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Run, PicardNonContractionExitCode) {
  const auto dir = scratch("picard_nmax");
  auto c = small_config(exp::Mode::Picard, dir);
  c.n_max = 2;
  const auto rep = exp::run(c);
  EXPECT_EQ(rep.exit_code, exp::kNonContraction);
  EXPECT_EQ(rep.status, "non-contraction");
  fs::remove_all(dir);
}

TEST(Run, PicardBudgetViolationExitCode) {
  const auto dir = scratch("picard_budget");
  auto c = small_config(exp::Mode::Picard, dir);
  c.data.amplitude = 1.0;
  c.delta = 1e-9;
  const auto rep = exp::run(c);
  EXPECT_EQ(rep.exit_code, exp::kBudgetViolation);
  EXPECT_FALSE(rep.budget_pass.value_or(true));
  fs::remove_all(dir);
}

TEST(Run, BlowUpExitCode) {
  const auto dir = scratch("blowup");
  auto c = small_config(exp::Mode::Direct, dir);
  c.data.amplitude = 1e7;
  const auto rep = exp::run(c);
  EXPECT_EQ(rep.exit_code, exp::kBlowUp);
  EXPECT_TRUE(rep.blow_up);
  EXPECT_TRUE(rep.blow_up_time.has_value());
  check_all_csv(dir, rep);
  fs::remove_all(dir);
}

TEST(Run, UniquenessTable) {
  const auto dir = scratch("uniq");
  const auto rep = exp::run(small_config(exp::Mode::Uniqueness, dir));
  EXPECT_EQ(rep.exit_code, exp::kSuccess);
  check_all_csv(dir, rep);
  EXPECT_TRUE(rep.details["monotone_in_epsilon"].get<bool>());
  EXPECT_TRUE(rep.details["all_inside_envelope"].get<bool>());
  const auto t = csv::read(dir / "uniqueness.csv");
  EXPECT_EQ(t.rows.size(), 3u * 21u);
  for (std::size_t r = 0; r < 21; ++r) EXPECT_EQ(t.number(r, "f_uv"), 0.0);
  fs::remove_all(dir);
}

TEST(Run, InequalitiesWritesCalibrationAndHistograms) {
  const auto dir = scratch("ineq");
  auto c = small_config(exp::Mode::Inequalities, dir);
  c.trials = 2;
  c.histogram_bins = 5;
  const auto rep = exp::run(c);
  EXPECT_EQ(rep.exit_code, exp::kSuccess);
  check_all_csv(dir, rep);
  const auto cal = ineq::read_calibration(dir / "calibration.txt");
  EXPECT_EQ(cal.constants.size(), 6u);
  EXPECT_EQ(cal.n, 16);
  EXPECT_EQ(csv::read(dir / "histograms.csv").rows.size(), 2u * 6u * 5u);
  fs::remove_all(dir);
}

TEST(Run, UnwritableOutputIsConfigError) {
  const auto file = scratch("not_a_dir");
  std::ofstream(file) << "x";
  auto c = small_config(exp::Mode::Direct, file / "sub");
  EXPECT_THROW(exp::run(c), exp::ConfigError);
  fs::remove(file);
}
