#include <stdexcept>
#include <doctest.h>

#include "tfn/run_config.hpp"

using namespace tfn;
using namespace tfn::io;

TEST_SUITE_BEGIN("run_config");

TEST_CASE("defaults come from the task, explicit keys override") {
  const RunConfig config = parse_run_config_text("task=gravity\nseed=12\noptimizer.lr=2e-3\n");
  CHECK(config.task == "gravity");
  CHECK(config.seed == 12);
  CHECK(config.adam.lr == doctest::Approx(2e-3));
  CHECK(config.radial.r_max == doctest::Approx(2.0));  // task default
  CHECK(config.epochs == 20);
  CHECK(config.batch_size == 1);
}

TEST_CASE("comments and blank lines are ignored") {
  const RunConfig config = parse_run_config_text("# a comment\n\ntask=tetris # trailing\n  seed = 4 \n");
  CHECK(config.task == "tetris");
  CHECK(config.seed == 4);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_run_config_text("task=tetris\nlearning_rate=1\n"),
                       doctest::Contains("unknown key"), std::invalid_argument);
}

TEST_CASE("missing task and malformed lines are rejected") {
  CHECK_THROWS_AS(parse_run_config_text("seed=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\nnonsense\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\nseed=1\nseed=2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=warp_drive\n"), std::invalid_argument);
}

TEST_CASE("range validation") {
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\noptimizer.lr=0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\noptimizer.beta1=1.0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\nbatch_size=2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\nradial.rmin=2\nradial.rmax=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\nepochs=0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=inertia\nl_max=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config_text("task=tetris\nseed=abc\n"), std::invalid_argument);
}

TEST_CASE("the hash is stable and sensitive to every field") {
  const RunConfig a = parse_run_config_text("task=gravity\nseed=1\n");
  const RunConfig b = parse_run_config_text("task=gravity\nseed=1\n");
  const RunConfig c = parse_run_config_text("task=gravity\nseed=2\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("to_train_config carries the tuned fields over") {
  const RunConfig config = parse_run_config_text("task=inertia\nchannels=3\nepochs=7\n");
  const tasks::TrainConfig tc = config.to_train_config();
  CHECK(tc.task == "inertia");
  CHECK(tc.channels == 3);
  CHECK(tc.epochs == 7);
  CHECK(tc.radial.n_basis == 30);
}

TEST_SUITE_END();
