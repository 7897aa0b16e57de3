#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "cvc/experiment.hpp"

using namespace cvc;

TEST_CASE("config round-trip through the canonical text form") {
  SUBCASE("defaults") {
    ExperimentConfig c;
    CHECK(parse_config_text(serialize_config(c)) == c);
  }
  SUBCASE("every preset") {
    for (const std::string& name : preset_names()) {
      ExperimentConfig c = preset(name);
      CHECK(parse_config_text(serialize_config(c)) == c);
    }
  }
  SUBCASE("mutated fields survive") {
    ExperimentConfig c = preset("fig4-kerr");
    c.seed = 424242;
    c.cutoff = 37;
    c.schedule_r = {0.05, 0.71, 2.25};
    c.opt_f_tol = 3.5e-11;
    c.target_params = {2.125};
    c.out = "records.csv";
    CHECK(parse_config_text(serialize_config(c)) == c);
  }
}

TEST_CASE("config parser errors carry location information") {
  CHECK_THROWS_AS(parse_config_text("command = compile\nbogus_key = 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("command = warp\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("seed 12\n"), std::invalid_argument);
  try {
    parse_config_text("seed = 1\ncutoff = x\n");
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  // comments and blank lines are fine
  ExperimentConfig c = parse_config_text("# header\n\nseed = 9 # trailing\n");
  CHECK(c.seed == 9);
}

TEST_CASE("unknown preset is rejected") {
  CHECK_THROWS_AS(preset("fig7-unobtainium"), std::invalid_argument);
}

TEST_CASE("experiment records embed a re-parseable config echo") {
  ExperimentConfig c = preset("nfl-thm1");
  c.seed = 77;
  c.nfl_samples = 50;
  ExperimentRecord rec = run(c);
  std::ostringstream os;
  rec.write(os);
  const std::string text = os.str();
  REQUIRE(text.rfind("# ", 0) == 0);
  const std::string header_line = text.substr(2, text.find('\n') - 2);
  nlohmann::json header = nlohmann::json::parse(header_line);
  CHECK(header.contains("build"));
  ExperimentConfig echoed = parse_config_text(header["config"].get<std::string>());
  CHECK(echoed == c);

  // CSV body: header row plus one row per grid cell
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // json header
  std::getline(is, line);
  CHECK(line.rfind("experiment,", 0) == 0);
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3 + 5 + 7);  // thm1 grid over m = 1..3, |S| = 0..2m
}

TEST_CASE("reproducibility of record rows for a fixed seed") {
  ExperimentConfig c = preset("nfl-thm2");
  c.seed = 31;
  c.nfl_samples = 200;
  ExperimentRecord a = run(c);
  ExperimentRecord b = run(c);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i] == b.rows[i]);
}

TEST_CASE("elliptic target guard keeps the truncated exponential converged") {
  ExperimentConfig c = preset("fig5-acs-k1");
  CHECK(c.target_elliptic);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    c.seed = seed;
    RngStream rng(seed);
    CompileTarget t = make_target(c, rng);
    const double beta = std::hypot(t.true_params(2), t.true_params(3));
    CHECK(t.true_params(4) >= 1.35 * 2.0 * beta + 0.3);
    // the cutoff-50 operator agrees with a higher-cutoff build on low levels;
    // hyperbolic draws would deviate at the 0.4 level, guarded draws stay
    // below ~1e-2 (worst internal squeezing ratio e^2)
    Operator big = gaussian_unitary(Complex(t.true_params(0), t.true_params(1)),
                                    Complex(t.true_params(2), t.true_params(3)),
                                    t.true_params(4), 120);
    CHECK((t.op.mat.topLeftCorner(8, 8) - big.mat.topLeftCorner(8, 8))
              .cwiseAbs()
              .maxCoeff() < 0.02);
  }
}

TEST_CASE("resource guard") {
  ExperimentConfig c = preset("fig4-gaussian");
  c.cutoff = 5000;  // 5000^2 > 2^24 for the TMSS pair space
  CHECK_THROWS_AS(check_resources(c), resource_refusal);
  c.allow_large = true;
  CHECK_NOTHROW(check_resources(c));

  ExperimentConfig bs = preset("fig4-beamsplitter");
  bs.cutoff = 80;  // 80^4 = 4.1e7 amplitudes in the two-pair space
  CHECK_THROWS_AS(check_resources(bs), resource_refusal);
  bs.cutoff = 14;
  CHECK_NOTHROW(check_resources(bs));
}

TEST_CASE("infeasible nfl cells are marked skipped") {
  ExperimentConfig c = preset("nfl-thm2");
  c.seed = 5;
  c.nfl_samples = 100;
  ExperimentRecord rec = run(c);
  int skipped = 0;
  for (const auto& row : rec.rows)
    if (row.back() == "1") ++skipped;
  CHECK(skipped == 1);  // exactly the (m=2, rank=2, |S|=3) cell
}

TEST_CASE("compile runner smoke test with a tiny budget") {
  ExperimentConfig c = preset("fig4-gaussian");
  c.seed = 2;
  c.cutoff = 12;
  c.schedule_r = {0.1, 0.5};
  c.opt_max_evals = 2500;
  c.opt_cost_floor = 1e-8;
  c.opt_retries = 2;
  c.opt_stage0_starts = 2;
  ExperimentRecord rec = run_compile(c);
  REQUIRE(!rec.rows.empty());
  // final summary row carries the last stage's best cost
  const auto& last = rec.rows.back();
  CHECK(std::stod(last[4]) < 1e-4);
}
