// Flat key = value experiment configuration: parsing, defaults, validation,
// and materialization of field/coefficient selections.

#include "fracback/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "fracback/errors.hpp"

namespace fracback {
namespace {

TEST(ParseTextTest, CommentsBlanksAndValues) {
  const ConfigMap map = parse_config_text(
      "# leading comment\n"
      "\n"
      "problem.id = demo   # trailing comment\n"
      "  problem.beta=0.75\n"
      "trials = 12\n");
  EXPECT_EQ(map.size(), 3u);
  EXPECT_EQ(map.at("problem.id"), "demo");
  EXPECT_EQ(map.at("problem.beta"), "0.75");
  EXPECT_EQ(map.at("trials"), "12");
}

TEST(ParseTextTest, RejectsMalformedLinesWithLineNumbers) {
  try {
    (void)parse_config_text("problem.id = ok\nnot a pair\n");
    FAIL() << "expected validation_error";
  } catch (const validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos)
        << "message was: " << e.what();
  }
  EXPECT_THROW((void)parse_config_text("key =\n"), validation_error)
      << "empty value";
  EXPECT_THROW((void)parse_config_text("= value\n"), validation_error)
      << "empty key";
}

TEST(ParseTextTest, RejectsDuplicateKeys) {
  EXPECT_THROW((void)parse_config_text("trials = 1\ntrials = 2\n"),
               validation_error);
}

TEST(ConfigFromMapTest, DefaultsSurviveEmptyInput) {
  const ExperimentConfig c = config_from_map({});
  EXPECT_EQ(c.id, "experiment");
  EXPECT_EQ(c.method, Method::first_truncation);
  EXPECT_EQ(c.n, 256u);
  EXPECT_EQ(c.trials, 1u);
  EXPECT_EQ(c.M_n, 0u) << "0 means: select the cutoff from n";
  EXPECT_TRUE(std::isinf(c.Q_n)) << "no clamping by default";
  EXPECT_EQ(c.bound_kind, "estimate1");
  EXPECT_NO_THROW(validate(c));
}

TEST(ConfigFromMapTest, AllKeysLand) {
  const ConfigMap map = parse_config_text(
      "problem.id = full\n"
      "method = quasi_reversibility\n"
      "problem.beta = 0.8\n"
      "problem.T = 0.3\n"
      "problem.a0 = 1.5\n"
      "problem.coefficient = affine:0.5,0.25\n"
      "problem.nonlinearity = cubic\n"
      "problem.u0 = modes:1=1,3=0.25\n"
      "problem.source = phi:2\n"
      "n = 128\n"
      "noise.sigma = 0.05\n"
      "noise.V_max = 0.2\n"
      "noise.vartheta = 0.1\n"
      "noise.eps = 0.02\n"
      "seed = 99\n"
      "params.M_n = 4\n"
      "params.sigma_rate = 0.9\n"
      "params.Q_n = 2.5\n"
      "params.picard_tol = 1e-8\n"
      "params.picard_max_iters = 50\n"
      "grid.steps = 48\n"
      "grid.cap = 24\n"
      "trials = 32\n"
      "workers = 4\n"
      "sweep.n_list = 64,128,256\n"
      "eval.times = 0.1,0.3\n"
      "out.dir = out\n"
      "bounds.kind = qr\n"
      "bounds.alpha = 1.5\n"
      "bounds.gamma_source = 2.5\n"
      "bounds.E2 = 0.5\n"
      "bounds.P1 = 1.25\n"
      "bounds.P2 = 2.25\n"
      "bounds.gamma_u = 1.0\n"
      "bounds.delta = 2.0\n");
  const ExperimentConfig c = config_from_map(map);
  EXPECT_EQ(c.id, "full");
  EXPECT_EQ(c.method, Method::quasi_reversibility);
  EXPECT_DOUBLE_EQ(c.beta, 0.8);
  EXPECT_DOUBLE_EQ(c.T, 0.3);
  EXPECT_DOUBLE_EQ(c.a0, 1.5);
  EXPECT_EQ(c.nonlinearity_name, "cubic");
  EXPECT_EQ(c.n, 128u);
  EXPECT_DOUBLE_EQ(c.noise_sigma, 0.05);
  EXPECT_DOUBLE_EQ(c.V_max, 0.2);
  EXPECT_DOUBLE_EQ(c.vartheta, 0.1);
  EXPECT_DOUBLE_EQ(c.eps, 0.02);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.M_n, 4u);
  EXPECT_DOUBLE_EQ(c.sigma_rate, 0.9);
  EXPECT_DOUBLE_EQ(c.Q_n, 2.5);
  EXPECT_EQ(c.picard_max_iters, 50u);
  EXPECT_EQ(c.grid_steps, 48u);
  EXPECT_EQ(c.cap, 24u);
  EXPECT_EQ(c.trials, 32u);
  EXPECT_EQ(c.workers, 4u);
  ASSERT_EQ(c.sweep_n.size(), 3u);
  EXPECT_EQ(c.sweep_n[2], 256u);
  ASSERT_EQ(c.eval_times.size(), 2u);
  EXPECT_DOUBLE_EQ(c.eval_times[1], 0.3);
  EXPECT_EQ(c.out_dir, "out");
  EXPECT_EQ(c.bound_kind, "qr");
  EXPECT_DOUBLE_EQ(c.delta, 2.0);
  EXPECT_NO_THROW(validate(c));
}

TEST(ConfigFromMapTest, UnknownKeyIsNamed) {
  try {
    (void)config_from_map({{"problem.betaa", "1.0"}});
    FAIL() << "expected validation_error";
  } catch (const validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("problem.betaa"), std::string::npos);
  }
}

TEST(ConfigFromMapTest, NumbersMustParseCompletely) {
  EXPECT_THROW((void)config_from_map({{"problem.T", "0.1x"}}),
               validation_error);
  EXPECT_THROW((void)config_from_map({{"trials", "-3"}}), validation_error);
  EXPECT_THROW((void)config_from_map({{"n", "12.5"}}), validation_error);
}

TEST(MethodNameTest, RoundTripsAndRejects) {
  EXPECT_EQ(method_by_name("first_truncation"), Method::first_truncation);
  EXPECT_EQ(method_by_name("second_truncation"), Method::second_truncation);
  EXPECT_EQ(method_by_name("quasi_reversibility"),
            Method::quasi_reversibility);
  EXPECT_EQ(method_name(Method::second_truncation), "second_truncation");
  EXPECT_THROW((void)method_by_name("fourier"), validation_error);
}

TEST(ValidateTest, CrossFieldInvariants) {
  ExperimentConfig c;
  c.trials = 0;
  EXPECT_THROW(validate(c), validation_error);
  c = ExperimentConfig{};
  c.n = 1;
  EXPECT_THROW(validate(c), validation_error);
  c = ExperimentConfig{};
  c.sweep_n = {64, 64};
  EXPECT_THROW(validate(c), validation_error) << "must increase strictly";
  c = ExperimentConfig{};
  c.eval_times = {1.5};  // T defaults to 1.0
  EXPECT_THROW(validate(c), validation_error);
  c = ExperimentConfig{};
  c.eval_times = {-0.1};
  EXPECT_THROW(validate(c), validation_error);
  c = ExperimentConfig{};
  c.bound_kind = "estimate3";
  EXPECT_THROW(validate(c), validation_error);
  c = ExperimentConfig{};
  c.u0_text = "waves:3";
  EXPECT_THROW(validate(c), validation_error);
  c = ExperimentConfig{};
  c.coefficient_text = "affine:1";
  EXPECT_THROW(validate(c), validation_error) << "affine needs two numbers";
  c = ExperimentConfig{};
  c.nonlinearity_name = "tanh";
  EXPECT_THROW(validate(c), validation_error);
}

TEST(ParseFieldTest, SelectionsMaterialize) {
  const SpectralField zero = parse_field("zero");
  EXPECT_EQ(zero.cap(), 0u);
  EXPECT_EQ(zero.at(0), 0.0);

  const SpectralField phi3 = parse_field("phi:3");
  EXPECT_EQ(phi3.cap(), 3u);
  EXPECT_DOUBLE_EQ(phi3.at(3), 1.0);
  EXPECT_DOUBLE_EQ(phi3.at(1), 0.0);

  const SpectralField mix = parse_field("modes:1=1,4=-0.5,2=0.25");
  EXPECT_EQ(mix.cap(), 4u);
  EXPECT_DOUBLE_EQ(mix.at(1), 1.0);
  EXPECT_DOUBLE_EQ(mix.at(2), 0.25);
  EXPECT_DOUBLE_EQ(mix.at(4), -0.5);

  EXPECT_THROW((void)parse_field("modes:1"), validation_error)
      << "entries must look like p=c";
}

TEST(ParseCoefficientTest, SelectionsMaterialize) {
  EXPECT_DOUBLE_EQ(parse_coefficient("one")(0.7), 1.0);
  EXPECT_DOUBLE_EQ(parse_coefficient("constant:0.35")(0.2), 0.35);
  const auto affine = parse_coefficient("affine:0.5,0.25");
  EXPECT_DOUBLE_EQ(affine(0.0), 0.5);
  EXPECT_DOUBLE_EQ(affine(2.0), 1.0);
  EXPECT_THROW((void)parse_coefficient("quadratic:1,2,3"), validation_error);
}

TEST(BuildInstanceTest, MaterializesProblemFields) {
  ExperimentConfig c;
  c.beta = 0.8;
  c.T = 0.3;
  c.a0 = 1.5;
  c.coefficient_text = "affine:0.5,0.25";
  c.nonlinearity_name = "sin";
  c.u0_text = "modes:1=1,2=0.5";
  c.source_text = "phi:1";
  const ProblemInstance instance = build_instance(c);
  EXPECT_DOUBLE_EQ(instance.beta, 0.8);
  EXPECT_DOUBLE_EQ(instance.T, 0.3);
  EXPECT_DOUBLE_EQ(instance.a0, 1.5);
  EXPECT_DOUBLE_EQ(instance.coefficient(0.4), 0.6);
  EXPECT_EQ(instance.nonlinearity.name, "sin");
  EXPECT_DOUBLE_EQ(instance.initial_state.at(2), 0.5);
  ASSERT_TRUE(static_cast<bool>(instance.source));
  EXPECT_DOUBLE_EQ(instance.source(0.1).at(1), 1.0);
}

TEST(BuildInstanceTest, ZeroSourceStaysEmpty) {
  ExperimentConfig c;
  const ProblemInstance instance = build_instance(c);
  EXPECT_FALSE(static_cast<bool>(instance.source))
      << "a zero source must stay absent so solvers can skip its quadrature";
}

TEST(LoadConfigTest, FileRoundTripAndMissingFile) {
  const std::string path = "config_test_round_trip.cfg";
  {
    std::ofstream out(path);
    out << "problem.id = round_trip\n"
        << "method = second_truncation\n"
        << "problem.T = 0.25\n"
        << "eval.times = 0.1, 0.2\n";
  }
  const ExperimentConfig c = load_config(path);
  EXPECT_EQ(c.id, "round_trip");
  EXPECT_EQ(c.method, Method::second_truncation);
  EXPECT_DOUBLE_EQ(c.T, 0.25);
  ASSERT_EQ(c.eval_times.size(), 2u);
  EXPECT_DOUBLE_EQ(c.eval_times[0], 0.1);
  std::remove(path.c_str());
  EXPECT_THROW((void)load_config("does_not_exist.cfg"), validation_error);
}

TEST(LoadConfigTest, ValidationRunsOnLoad) {
  const std::string path = "config_test_invalid.cfg";
  {
    std::ofstream out(path);
    out << "problem.T = 0.1\neval.times = 0.5\n";
  }
  EXPECT_THROW((void)load_config(path), validation_error)
      << "evaluation time outside [0, T] must fail at load time";
  std::remove(path.c_str());
}

}  // namespace
}  // namespace fracback
