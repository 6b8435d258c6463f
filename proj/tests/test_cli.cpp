#include <doctest.h>

#include <cstdlib>
#include <string>

#include "support/testutil.hpp"

namespace {

// Runs the CLI and returns its exit status (0 ok, 1 invalid, 2 unknown,
// 3 usage).
int run_cli(const std::string& args) {
  std::string cmd = std::string(ATTRCAT_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string data(const std::string& name) { return attrcat::testutil::data_path(name); }

}  // namespace

TEST_CASE("exit status: success paths") {
  CHECK(run_cli("check " + data("robot_ball.attr")) == 0);
  CHECK(run_cli("emit-pddl " + data("robot_ball.attr")) == 0);
  CHECK(run_cli("validate-plan " + data("robot_ball.attr") + " " + data("robot_ball.prob") + " " +
                data("robot_ball.plan")) == 0);
  CHECK(run_cli("prove " + data("robot_ball.attr") + " --lhs @fetch_pick --rhs @fetch_pick_checked" +
                " --terms " + data("robot_ball.terms")) == 0);
  CHECK(run_cli("render " + data("robot_ball.attr") + " --term id[R]") == 0);
}

TEST_CASE("exit status: invalid plan is 1") {
  // A plan that picks before moving fails validation.
  std::string bad = "/tmp/attrcat_bad_plan.txt";
  std::string cmd = "printf '(pick r b rb)\\n' > " + bad;
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(run_cli("validate-plan " + data("robot_ball.attr") + " " + data("robot_ball.prob") + " " +
                bad) == 1);
}

TEST_CASE("exit status: budget exhaustion is 2") {
  // Only the inequality holds, so the equality search must exhaust.
  CHECK(run_cli("prove " + data("robot_ball.attr") +
                " --lhs 'set[loc_R] ; get[loc_R]' --rhs 'id[R] * id[L]' --budget 300") == 2);
  // ... while the leq variant proves.
  CHECK(run_cli("prove " + data("robot_ball.attr") +
                " --lhs 'set[loc_R] ; get[loc_R]' --rhs 'id[R] * id[L]' --leq") == 0);
}

TEST_CASE("exit status: usage and parse errors are 3") {
  CHECK(run_cli("prove " + data("robot_ball.attr") + " --lhs id[R] --rhs id[L]") == 3);
  CHECK(run_cli("check /nonexistent.attr") == 3);
  CHECK(run_cli("frobnicate") == 3);
  CHECK(run_cli("render " + data("robot_ball.attr") + " --term id[R] --format svg") == 3);
}
