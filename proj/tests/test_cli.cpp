#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "supdtl/cli.hpp"
#include "supdtl/error.hpp"
#include "supdtl/normal.hpp"

using namespace supdtl;
namespace fs = std::filesystem;

namespace {

// Two arms with a fixed per-stage size keeps every workflow fast.
const char* kSmall = R"(
[design]
arms = 2
shape = obf
n_per_stage = 40

[endpoint]
type = normal
theta_prime = 0.5
theta_zero = 0.1
sigma_sq = 1

[calibration]
alpha = 0.025
power = 0.8
omega = 1e-4

[run]
seed = 11
reps = 2000
tol = 1e-4

[effects]
null = 0, 0
lfc = theta_prime, theta_zero
)";

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "supdtl_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_config(const std::string& name, const std::string& text) {
  auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cmd(cli::RunConfig rc, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int status = cli::run(rc, out, err);
  if (err_text) *err_text = err.str();
  return status;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("design then evaluate round-trips through the record") {
    cli::RunConfig d;
    d.command = "design";
    d.config_path = write_config("small.cfg", kSmall);
    d.out_path = scratch("design.json");
    REQUIRE(run_cmd(d) == 0);
    const auto design = nlohmann::json::parse(slurp(*d.out_path));
    CHECK(design["design"]["n_per_stage"] == 40);
    CHECK(design["design"]["boundaries"].size() == 2);

    cli::RunConfig from_record;
    from_record.command = "evaluate";
    from_record.config_path = d.config_path;
    from_record.design_path = d.out_path;
    from_record.out_path = scratch("eval_record.json");
    REQUIRE(run_cmd(from_record) == 0);

    cli::RunConfig direct = from_record;
    direct.design_path.reset();
    direct.out_path = scratch("eval_direct.json");
    REQUIRE(run_cmd(direct) == 0);

    auto a = nlohmann::json::parse(slurp(*from_record.out_path));
    auto b = nlohmann::json::parse(slurp(*direct.out_path));
    CHECK(a == b);
    CHECK(a["scenarios"].contains("lfc"));
  }

  TEST_CASE("simulate is byte-identical for a fixed seed") {
    cli::RunConfig s;
    s.command = "simulate";
    s.config_path = write_config("small.cfg", kSmall);
    s.seed = 7;
    s.reps = 1000;
    s.out_path = scratch("sim_a.json");
    REQUIRE(run_cmd(s) == 0);
    s.out_path = scratch("sim_b.json");
    REQUIRE(run_cmd(s) == 0);
    CHECK(slurp(scratch("sim_a.json")) == slurp(scratch("sim_b.json")));
    auto j = nlohmann::json::parse(slurp(scratch("sim_a.json")));
    CHECK(j["replicates"] == 1000);
    CHECK(j["seed"] == 7);
    std::int64_t total = 0;
    for (auto c : j["scenarios"]["null"]["stop_histogram"]) total += c.get<std::int64_t>();
    CHECK(total == 1000);
  }

  TEST_CASE("compare labels the rows it does not compute") {
    cli::RunConfig c;
    c.command = "compare";
    c.config_path = write_config("small.cfg", kSmall);
    c.out_path = scratch("compare.json");
    REQUIRE(run_cmd(c) == 0);
    auto j = nlohmann::json::parse(slurp(*c.out_path));
    int computed = 0, skipped = 0;
    for (const auto& r : j["rows"]) (r["status"] == "computed" ? computed : skipped)++;
    CHECK(computed == 4);
    CHECK(skipped == 4);
  }

  TEST_CASE("errors give a nonzero status and a structured diagnostic") {
    std::string err;
    cli::RunConfig bad;
    bad.command = "design";
    bad.config_path = write_config("empty.cfg", "");
    CHECK(run_cmd(bad, &err) != 0);
    auto diag = nlohmann::json::parse(err);
    CHECK(diag["error"]["kind"] == "parse");

    bad.config_path = write_config("small.cfg", kSmall);
    bad.alpha = 1.5;
    CHECK(run_cmd(bad, &err) != 0);
    diag = nlohmann::json::parse(err);
    CHECK(diag["error"]["kind"] == "validation");
    CHECK(diag["error"]["field"] == "calibration.alpha");

    cli::RunConfig missing;
    missing.command = "evaluate";
    missing.config_path = scratch("does_not_exist.cfg");
    CHECK(run_cmd(missing, &err) != 0);

    cli::RunConfig unknown;
    unknown.command = "plot";
    unknown.config_path = write_config("small.cfg", kSmall);
    CHECK(run_cmd(unknown, &err) != 0);
  }

  TEST_CASE("design records keep disabled looks") {
    TrialDesign d;
    d.arms = 3;
    d.stages = 3;
    d.n_per_stage = 203;
    d.boundaries = {kInf, kInf, 1.96};
    auto j = cli::design_to_json(d);
    CHECK(j["boundaries"][0].is_null());
    auto back = cli::design_from_json(nlohmann::json::parse(j.dump()));
    CHECK(std::isinf(back.boundaries[0]));
    CHECK(back.boundaries[2] == 1.96);
    CHECK(back.n_per_stage == 203);
  }
}
