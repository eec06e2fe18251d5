#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result invoke(const std::string& args) {
  const std::string cmd = std::string(PCFLOW_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pcflow_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

const char* kTorus =
    "geometry.kind = torus\n"
    "geometry.nx = 32\n"
    "geometry.ny = 32\n"
    "geometry.length = 2*pi\n"
    "geometry.sigma0_modes = 1, 1, 0.2\n"
    "initial.kind = modes\n"
    "initial.modes = 1, 0, 0.3; 0, 2, 0.1\n"
    "flow.t_end = 0.2\n"
    "flow.checkpoint_every = 0.1\n"
    "output.record_every = 3\n";

}  // namespace

TEST_CASE("print-config shows the effective configuration") {
  const auto dir = scratch("print");
  const auto cfg = write_config(dir, kTorus);
  const auto r = invoke("print-config " + cfg.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("flow.cfl = 0.2\n") != std::string::npos);
  CHECK(r.out.find("geometry.nx = 32\n") != std::string::npos);

  const auto o = invoke("print-config " + cfg.string() + " --set flow.cfl=0.1");
  CHECK(o.out.find("flow.cfl = 0.1\n") != std::string::npos);
}

TEST_CASE("exit codes follow the status values") {
  const auto dir = scratch("codes");
  const auto bad_parse = write_config(dir, "geometry.kind torus\n");
  CHECK(invoke("print-config " + bad_parse.string()).code == 2);

  const auto bad_value = write_config(dir, std::string(kTorus) + "flow.cfl = 2\n");
  CHECK(invoke("run " + bad_value.string()).code == 3);

  CHECK(invoke("run " + (dir / "missing.cfg").string()).code == 5);

  // Every step would end below the acceptance floor.
  const auto floor =
      write_config(dir, std::string(kTorus) + "flow.rho_floor = 0.95\nflow.max_halvings = 3\n");
  const auto r = invoke("run " + floor.string() + " -o " + (dir / "floor").string());
  CHECK(r.code == 4);
  CHECK(r.out.find("StepFloorHit") != std::string::npos);
}

TEST_CASE("run writes trace, checkpoints and final state; resume reproduces them") {
  const auto dir = scratch("run");
  const auto cfg = write_config(dir, kTorus);
  const auto a = invoke("run " + cfg.string() + " -o " + (dir / "a").string());
  REQUIRE(a.code == 0);
  CHECK(a.out.find("ReachedTEnd") != std::string::npos);
  for (const char* f : {"trace.csv", "checkpoint_0001.pcf", "checkpoint_0002.pcf", "final.pcf"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  CHECK(slurp(dir / "a" / "checkpoint_0002.pcf") == slurp(dir / "a" / "final.pcf"));

  SUBCASE("repeat runs are byte identical") {
    REQUIRE(invoke("run " + cfg.string() + " -o " + (dir / "b").string()).code == 0);
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    CHECK(slurp(dir / "a" / "final.pcf") == slurp(dir / "b" / "final.pcf"));
  }
  SUBCASE("resume from the first checkpoint lands on the same bytes") {
    const auto r = invoke("resume " + (dir / "a" / "checkpoint_0001.pcf").string() + " " +
                          cfg.string() + " -o " + (dir / "c").string());
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "a" / "final.pcf") == slurp(dir / "c" / "final.pcf"));
  }
  SUBCASE("resume with a mismatched grid is rejected") {
    const auto other = dir / "other.cfg";
    std::string text = kTorus;
    text.replace(text.find("nx = 32"), 7, "nx = 64");
    std::ofstream(other) << text;
    const auto r = invoke("resume " + (dir / "a" / "checkpoint_0001.pcf").string() + " " +
                          other.string() + " -o " + (dir / "d").string());
    CHECK(r.code == 3);
  }
}

TEST_CASE("field output, crosscheck and probe") {
  const auto dir = scratch("extras");
  const auto cfg = write_config(dir, std::string(kTorus) + "output.emit_fields = true\n");
  REQUIRE(invoke("run " + cfg.string() + " -o " + (dir / "f").string()).code == 0);
  CHECK(fs::exists(dir / "f" / "field_000000.pcf"));

  const auto sphere = write_config(
      dir, "geometry.kind = sphere\ngeometry.nmu = 64\ninitial.kind = polynomial\n"
           "initial.coefficients = 0, 0, 0.1\nflow.t_end = 0.02\n");
  const auto cc = invoke("crosscheck " + sphere.string() + " -o " + (dir / "cc").string());
  CHECK(cc.code == 0);
  for (const char* f : {"pcf.csv", "nkrf.csv", "divergence.csv"}) CHECK(fs::exists(dir / "cc" / f));

  CHECK(invoke("probe " + sphere.string() + " -o " + (dir / "p").string()).code == 0);
  CHECK(fs::exists(dir / "p" / "probe.csv"));
}
