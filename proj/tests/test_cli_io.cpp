#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pcflow/config.hpp"
#include "pcflow/error.hpp"
#include "pcflow/io.hpp"
#include "support.hpp"

using namespace pcflow;
using namespace testing_support;

namespace {

const char* kMinimalTorus =
    "geometry.kind = torus\n"
    "geometry.nx = 64\n"
    "geometry.ny = 32\n"
    "geometry.length = 2*pi\n";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error for: " << text);
  return ErrorKind::InvalidArgument;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pcflow_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto c = parse_config(kMinimalTorus);
  CHECK(c.geometry.kind == GeometryKind::Torus);
  CHECK(c.geometry.nx == 64);
  CHECK(c.geometry.ny == 32);
  CHECK(c.geometry.length == 2 * kPi);
  CHECK(c.flow == FlowConfig{});
  CHECK(c.flow.cfl == 0.2);
  CHECK(c.initial.kind == InitialKind::Zero);
  CHECK(c.output.path == "pcflow_out");
  CHECK(to_text(c).find("flow.cfl = 0.2\n") != std::string::npos);
}

TEST_CASE("config errors") {
  CHECK(kind_of("geometry.kind = klein_bottle\n") == ErrorKind::ValidationError);
  CHECK(kind_of(std::string(kMinimalTorus) + "flow.cfl = 1.5\n") == ErrorKind::ValidationError);
  CHECK(kind_of(std::string(kMinimalTorus) + "flow.colour = red\n") == ErrorKind::ValidationError);
  CHECK(kind_of(std::string(kMinimalTorus) + "geometry.nmu = 64\n") == ErrorKind::ValidationError);
  CHECK(kind_of(std::string(kMinimalTorus) + "initial.target_sup_F = 1.5\n"
                                             "initial.kind = random_smooth\n") ==
        ErrorKind::ValidationError);
  CHECK(kind_of("geometry.kind = torus\ngeometry.nx = 64\n") == ErrorKind::ValidationError);
  CHECK(kind_of("geometry.kind = torus\ngeometry.length = -1\n") == ErrorKind::ValidationError);
  CHECK(kind_of("geometry.kind = sphere\ngeometry.nmu = 16\n") == ErrorKind::ValidationError);
  try {
    parse_config(std::string(kMinimalTorus) + "flow.t_end = 1\nflow.t_end = 2\n");
    FAIL("duplicate accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
  }
  try {
    parse_config(std::string(kMinimalTorus) + "\n# comment\nflow.dt_init = fast\n");
    FAIL("bad real accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  CHECK(kind_of("geometry.kind torus\n") == ErrorKind::ParseError);
}

TEST_CASE("print/parse round trip") {
  CHECK(parse_config(to_text(parse_config(kMinimalTorus))) == parse_config(kMinimalTorus));
  const std::string sphere =
      "geometry.kind = sphere  # KE reference\n"
      "geometry.nmu = 128\n"
      "initial.kind = polynomial\n"
      "initial.coefficients = 0, 0, 0.1\n"
      "flow.kind = nkrf\n"
      "flow.scheme = semi_implicit\n"
      "flow.checkpoint_every = 0.125\n"
      "output.emit_fields = true\n"
      "output.p_list = 1.5, 3\n";
  const auto c = parse_config(sphere);
  CHECK(c.flow.flow_kind == FlowKind::NKRF);
  CHECK(c.flow.p_list == std::vector<double>{1.5, 3.0});
  CHECK(parse_config(to_text(c)) == c);

  // Random configurations.
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    std::ostringstream t;
    t.precision(17);
    t << "geometry.kind = torus\n"
      << "geometry.nx = " << (16 << (rng() % 4)) << "\n"
      << "geometry.length = " << uniform(rng, 0.5, 10) << "\n"
      << "geometry.sigma0_modes = 1, 0, " << uniform(rng, -0.5, 0.5) << "; 0, 2, "
      << uniform(rng, -0.3, 0.3) << "\n"
      << "initial.kind = random_smooth\n"
      << "initial.seed = " << rng() << "\n"
      << "initial.decay = " << uniform(rng, 1, 2) << "\n"
      << "initial.target_sup_F = " << uniform(rng, 0.01, 1) << "\n"
      << "flow.dt_init = " << uniform(rng, 1e-5, 1) << "\n"
      << "flow.cfl = " << uniform(rng, 0.01, 1) << "\n"
      << "flow.t_end = " << uniform(rng, 0.1, 30) << "\n"
      << "output.record_every = " << 1 + rng() % 100 << "\n";
    const auto r = parse_config(t.str());
    CHECK(parse_config(to_text(r)) == r);
    CHECK(to_text(parse_config(to_text(r))) == to_text(r));
  }
}

TEST_CASE("initial potentials") {
  auto c = parse_config(std::string(kMinimalTorus) + "initial.kind = modes\ninitial.modes = 1, 0, 0.5\n");
  auto g = make_geometry(c.geometry);
  const auto& t = dynamic_cast<const TorusGeometry&>(*g);
  const auto phi = make_initial(*g, c.initial);
  for (int iy = 0; iy < t.ny(); ++iy)
    for (int ix = 0; ix < t.nx(); ++ix)
      CHECK(phi[t.index(ix, iy)] == 0.5 * std::cos(2 * kPi / t.length() * (1 * t.x(ix) + 0 * t.y(iy))));

  c = parse_config(std::string(kMinimalTorus) +
                   "initial.kind = random_smooth\ninitial.seed = 7\ninitial.target_sup_F = 0.05\n");
  const auto a = make_initial(*g, c.initial), b = make_initial(*g, c.initial);
  CHECK(a == b);
  const auto st = validate_kahler(*g, a);
  CHECK(max_abs(st.big_f) >= 0.0495);
  CHECK(max_abs(st.big_f) <= 0.0505);
  c.initial.seed = 8;
  CHECK(make_initial(*g, c.initial) != a);

  const auto sc = parse_config(
      "geometry.kind = sphere\ngeometry.nmu = 256\ninitial.kind = random_smooth\n"
      "initial.target_sup_F = 0.2\n");
  auto sg = make_geometry(sc.geometry);
  const auto sp = make_initial(*sg, sc.initial);
  CHECK(std::abs(max_abs(validate_kahler(*sg, sp).big_f) - 0.2) <= 0.002);
}

TEST_CASE("checkpoint format") {
  auto g = build_torus_geometry(16, 32, 1.25, {});
  std::mt19937_64 rng(1);
  const auto phi = random_torus_field(*g, rng, 0.1);
  const auto bytes = encode_checkpoint(*g, 0.75, phi);

  // Independent decode of the documented layout.
  REQUIRE(bytes.size() == 4 + 4 + 1 + 8 + 8 + 8 + 8 + 8 * phi.size() + 4);
  CHECK(std::memcmp(bytes.data(), "PCF1", 4) == 0);
  auto u32 = [&](std::size_t at) {
    return std::uint32_t(bytes[at]) | std::uint32_t(bytes[at + 1]) << 8 |
           std::uint32_t(bytes[at + 2]) << 16 | std::uint32_t(bytes[at + 3]) << 24;
  };
  auto u64 = [&](std::size_t at) { return std::uint64_t(u32(at)) | std::uint64_t(u32(at + 4)) << 32; };
  auto f64 = [&](std::size_t at) { return std::bit_cast<double>(u64(at)); };
  CHECK(u32(4) == 1);
  CHECK(bytes[8] == 1);
  CHECK(u64(9) == 16);
  CHECK(u64(17) == 32);
  CHECK(f64(25) == 1.25);
  CHECK(f64(33) == 0.75);
  for (std::size_t i = 0; i < phi.size(); ++i) CHECK(f64(41 + 8 * i) == phi[i]);
  const uLong crc = crc32(0L, bytes.data() + 4, static_cast<uInt>(bytes.size() - 8));
  CHECK(u32(bytes.size() - 4) == crc);

  const auto back = decode_checkpoint(*g, bytes);
  CHECK(back.time == 0.75);
  CHECK(back.phi == phi);

  auto expect_kind = [&](std::vector<std::uint8_t> b, const Geometry& geom, ErrorKind k) {
    try {
      decode_checkpoint(geom, b);
      FAIL("decode accepted bad input");
    } catch (const Error& e) {
      CHECK(e.kind() == k);
    }
  };
  auto flipped = bytes;
  flipped[100] ^= 0x10;
  expect_kind(flipped, *g, ErrorKind::IoError);
  auto magic = bytes;
  magic[0] = 'X';
  expect_kind(magic, *g, ErrorKind::IoError);
  expect_kind(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 9), *g, ErrorKind::IoError);
  expect_kind(bytes, *build_torus_geometry(32, 32, 1.25, {}), ErrorKind::ValidationError);
  expect_kind(bytes, *build_sphere_geometry(512), ErrorKind::ValidationError);

  auto s = build_sphere_geometry(64);
  const auto sb = encode_checkpoint(*s, 2.0, s->nodes());
  CHECK(sb.size() == 4 + 4 + 1 + 8 + 8 + 8 * 64 + 4);
  CHECK(decode_checkpoint(*s, sb).phi == s->nodes());

  const auto path = scratch("roundtrip.pcf");
  write_checkpoint(path.string(), *g, 0.75, phi);
  CHECK(read_checkpoint(path.string(), *g).phi == phi);
  CHECK_THROWS_AS(read_checkpoint(scratch("missing.pcf").string(), *g), Error);
}

TEST_CASE("csv output") {
  CHECK(csv_header({1, 2, 4}) ==
        "t,dt,sup_F,inf_F,sup_P,entropy,j_neg_ric,k_energy,i_functional,dissipation,"
        "calabi_energy,rho_min,volume,poisson_residual,grad_F_Lp1,trace0_Lp1,grad_F_Lp2,"
        "trace0_Lp2,grad_F_Lp4,trace0_Lp4");
  CHECK(csv_header({1.5}).find("grad_F_Lp1.5,trace0_Lp1.5") != std::string::npos);

  auto s = build_sphere_geometry(64);
  FlowConfig cfg;
  cfg.t_end = 0.02;
  cfg.record_every = 5;
  cfg.dt_init = 0.002;
  cfg.scheme = Scheme::SemiImplicit;
  const auto traj = run(*s, ScalarField(s->size(), 0.0), cfg);
  REQUIRE(traj.records.size() == 3);
  const auto path = scratch("trace.csv");
  emit_csv(traj.records, cfg.p_list, path.string());
  const std::string text = slurp(path);
  CHECK(text.find('\r') == std::string::npos);
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == csv_header(cfg.p_list));
  // Stationary: every column past t and dt agrees.
  auto tail = [](const std::string& l) { return l.substr(l.find(',', l.find(',') + 1)); };
  CHECK(tail(lines[1]) == tail(lines[2]));
  CHECK(tail(lines[2]) == tail(lines[3]));

  // 17 significant digits: every value parses back exactly.
  std::istringstream cells(lines[2]);
  std::vector<double> values;
  for (std::string cell; std::getline(cells, cell, ',');) values.push_back(std::strtod(cell.c_str(), nullptr));
  CHECK(values[0] == traj.records[1].time);
  CHECK(values[11] == traj.records[1].rho_min);
  CHECK(values[12] == traj.records[1].volume);
  CHECK(format_real(0.1) == "0.10000000000000001");

  CHECK_THROWS_AS(emit_csv(traj.records, cfg.p_list, "/nonexistent/dir/trace.csv"), Error);
}

TEST_CASE("row count contract") {
  auto s = build_sphere_geometry(32);
  FlowConfig cfg;
  cfg.scheme = Scheme::SemiImplicit;
  cfg.dt_init = 0.01;
  cfg.t_end = 1.0;
  cfg.record_every = 10;
  CHECK(run(*s, ScalarField(s->size(), 0.0), cfg).records.size() == 11);
  cfg.t_end = 1.05;
  CHECK(run(*s, ScalarField(s->size(), 0.0), cfg).records.size() == 12);
}
