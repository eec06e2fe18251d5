#include "pcflow/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/legendre.hpp>

#include "pcflow/error.hpp"
#include "pcflow/io.hpp"
#include "pcflow/kahler_ops.hpp"

namespace pcflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

struct Entry {
  std::string value;
  int line = 0;
};

double parse_real(const Entry& e) {
  std::string v = e.value;
  double scale = 1.0;
  if (v == "pi") return std::numbers::pi;
  if (v.size() > 3 && v.compare(v.size() - 3, 3, "*pi") == 0) {
    scale = std::numbers::pi;
    v = trim(v.substr(0, v.size() - 3));
  }
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
    throw ParseError(e.line, "expected a real number, got '" + e.value + "'");
  }
  return x * scale;
}

long long parse_integer(const Entry& e) {
  char* end = nullptr;
  const long long x = std::strtoll(e.value.c_str(), &end, 10);
  if (e.value.empty() || end != e.value.c_str() + e.value.size()) {
    throw ParseError(e.line, "expected an integer, got '" + e.value + "'");
  }
  return x;
}

std::uint64_t parse_unsigned(const Entry& e) {
  char* end = nullptr;
  if (!e.value.empty() && e.value[0] == '-') {
    throw ParseError(e.line, "expected a non-negative integer, got '" + e.value + "'");
  }
  const unsigned long long x = std::strtoull(e.value.c_str(), &end, 10);
  if (e.value.empty() || end != e.value.c_str() + e.value.size()) {
    throw ParseError(e.line, "expected a non-negative integer, got '" + e.value + "'");
  }
  return x;
}

bool parse_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ParseError(e.line, "expected true or false, got '" + e.value + "'");
}

std::vector<double> parse_real_list(const Entry& e) {
  std::vector<double> out;
  if (e.value.empty()) return out;
  for (const auto& part : split(e.value, ',')) out.push_back(parse_real({part, e.line}));
  return out;
}

// "kx, ky, amplitude; kx, ky, amplitude; ..."
std::vector<CosineMode> parse_modes(const Entry& e) {
  std::vector<CosineMode> out;
  if (e.value.empty()) return out;
  for (const auto& group : split(e.value, ';')) {
    if (group.empty()) continue;
    const auto parts = split(group, ',');
    if (parts.size() != 3) {
      throw ParseError(e.line, "mode '" + group + "' needs kx, ky, amplitude");
    }
    CosineMode m;
    m.kx = static_cast<int>(parse_integer({parts[0], e.line}));
    m.ky = static_cast<int>(parse_integer({parts[1], e.line}));
    m.amplitude = parse_real({parts[2], e.line});
    out.push_back(m);
  }
  return out;
}

bool power_of_two_at_least(int n, int lo) { return n >= lo && (n & (n - 1)) == 0; }

void validate_geometry(const GeometryBlock& g) {
  if (g.kind == GeometryKind::Sphere) {
    if (g.nmu < 32) throw ValidationError("geometry.nmu", "must be >= 32");
    return;
  }
  if (!power_of_two_at_least(g.nx, 16)) {
    throw ValidationError("geometry.nx", "must be a power of two >= 16");
  }
  if (!power_of_two_at_least(g.ny, 16)) {
    throw ValidationError("geometry.ny", "must be a power of two >= 16");
  }
  if (!(g.length > 0.0) || !std::isfinite(g.length)) {
    throw ValidationError("geometry.length", "must be positive");
  }
  // σ₀ sampled on the grid it will live on.
  const double w = 2.0 * std::numbers::pi / g.length;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      double s = 1.0;
      for (const auto& m : g.sigma0_modes) {
        s += m.amplitude * std::cos(w * (m.kx * g.length * ix / g.nx + m.ky * g.length * iy / g.ny));
      }
      if (!(s > 0.0)) throw ValidationError("geometry.sigma0_modes", "reference density must stay positive");
    }
  }
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int to_int(const std::string& key, long long v) {
  if (v < -2147483647LL || v > 2147483647LL) throw ValidationError(key, "out of range");
  return static_cast<int>(v);
}

std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += shortest(v[i]);
  }
  return s;
}

std::string join_modes(const std::vector<CosineMode>& modes) {
  std::string s;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) s += "; ";
    s += std::to_string(modes[i].kx) + ", " + std::to_string(modes[i].ky) + ", " +
         shortest(modes[i].amplitude);
  }
  return s;
}

const char* initial_kind_name(InitialKind k) {
  switch (k) {
    case InitialKind::Zero: return "zero";
    case InitialKind::Modes: return "modes";
    case InitialKind::Polynomial: return "polynomial";
    case InitialKind::RandomSmooth: return "random_smooth";
  }
  return "zero";
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  std::map<std::string, Entry> entries;
  {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty() || key.find('.') == std::string::npos) {
        throw ParseError(line_no, "keys take the form section.name");
      }
      if (entries.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
      entries[key] = Entry{trim(line.substr(eq + 1)), line_no};
    }
  }

  ScenarioConfig cfg;
  std::map<std::string, bool> used;
  auto take = [&](const std::string& key) -> const Entry* {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    used[key] = true;
    return &it->second;
  };

  // geometry
  const Entry* kind = take("geometry.kind");
  if (!kind) throw ValidationError("geometry.kind", "required");
  if (kind->value == "torus") {
    cfg.geometry.kind = GeometryKind::Torus;
    const Entry* nx = take("geometry.nx");
    const Entry* ny = take("geometry.ny");
    const Entry* length = take("geometry.length");
    if (!length) throw ValidationError("geometry.length", "required for a torus");
    if (nx) cfg.geometry.nx = to_int("geometry.nx", parse_integer(*nx));
    if (ny) cfg.geometry.ny = to_int("geometry.ny", parse_integer(*ny));
    cfg.geometry.length = parse_real(*length);
    if (const Entry* m = take("geometry.sigma0_modes")) cfg.geometry.sigma0_modes = parse_modes(*m);
  } else if (kind->value == "sphere") {
    cfg.geometry.kind = GeometryKind::Sphere;
    const Entry* nmu = take("geometry.nmu");
    if (nmu) cfg.geometry.nmu = to_int("geometry.nmu", parse_integer(*nmu));
  } else {
    throw ValidationError("geometry.kind", "unknown geometry '" + kind->value + "'");
  }

  // initial
  if (const Entry* ik = take("initial.kind")) {
    if (ik->value == "zero") cfg.initial.kind = InitialKind::Zero;
    else if (ik->value == "modes") cfg.initial.kind = InitialKind::Modes;
    else if (ik->value == "polynomial") cfg.initial.kind = InitialKind::Polynomial;
    else if (ik->value == "random_smooth") cfg.initial.kind = InitialKind::RandomSmooth;
    else throw ValidationError("initial.kind", "unknown initial data '" + ik->value + "'");
  }
  const bool torus = cfg.geometry.kind == GeometryKind::Torus;
  switch (cfg.initial.kind) {
    case InitialKind::Zero:
      break;
    case InitialKind::Modes:
      if (!torus) throw ValidationError("initial.kind", "modes requires a torus");
      if (const Entry* m = take("initial.modes")) cfg.initial.modes = parse_modes(*m);
      break;
    case InitialKind::Polynomial:
      if (torus) throw ValidationError("initial.kind", "polynomial requires a sphere");
      if (const Entry* c = take("initial.coefficients")) {
        cfg.initial.coefficients = parse_real_list(*c);
      }
      break;
    case InitialKind::RandomSmooth:
      if (const Entry* e = take("initial.seed")) cfg.initial.seed = parse_unsigned(*e);
      if (const Entry* e = take("initial.max_mode")) {
        cfg.initial.max_mode = to_int("initial.max_mode", parse_integer(*e));
      }
      if (const Entry* e = take("initial.decay")) cfg.initial.decay = parse_real(*e);
      if (const Entry* e = take("initial.target_sup_F")) cfg.initial.target_sup_f = parse_real(*e);
      if (cfg.initial.max_mode < 1) throw ValidationError("initial.max_mode", "must be >= 1");
      if (!(cfg.initial.decay >= 0.0)) throw ValidationError("initial.decay", "must be >= 0");
      if (!(cfg.initial.target_sup_f > 0.0 && cfg.initial.target_sup_f <= 1.0)) {
        throw ValidationError("initial.target_sup_F", "must lie in (0, 1]");
      }
      break;
  }

  // flow
  if (const Entry* e = take("flow.kind")) {
    if (e->value == "pcf") cfg.flow.flow_kind = FlowKind::PCF;
    else if (e->value == "nkrf") cfg.flow.flow_kind = FlowKind::NKRF;
    else throw ValidationError("flow.kind", "expected pcf or nkrf");
  }
  if (const Entry* e = take("flow.scheme")) {
    if (e->value == "rk4") cfg.flow.scheme = Scheme::RK4;
    else if (e->value == "semi_implicit") cfg.flow.scheme = Scheme::SemiImplicit;
    else throw ValidationError("flow.scheme", "expected rk4 or semi_implicit");
  }
  if (const Entry* e = take("flow.dt_init")) cfg.flow.dt_init = parse_real(*e);
  if (const Entry* e = take("flow.cfl")) cfg.flow.cfl = parse_real(*e);
  if (const Entry* e = take("flow.t_end")) cfg.flow.t_end = parse_real(*e);
  if (const Entry* e = take("flow.rho_floor")) cfg.flow.rho_floor = parse_real(*e);
  if (const Entry* e = take("flow.max_halvings")) {
    cfg.flow.max_halvings = to_int("flow.max_halvings", parse_integer(*e));
  }
  if (const Entry* e = take("flow.poisson_tol")) cfg.flow.poisson_tol = parse_real(*e);
  if (const Entry* e = take("flow.checkpoint_every")) cfg.flow.checkpoint_every = parse_real(*e);

  // output
  if (const Entry* e = take("output.path")) cfg.output.path = e->value;
  if (const Entry* e = take("output.record_every")) {
    cfg.flow.record_every = to_int("output.record_every", parse_integer(*e));
  }
  if (const Entry* e = take("output.emit_fields")) cfg.output.emit_fields = parse_bool(*e);
  if (const Entry* e = take("output.p_list")) cfg.flow.p_list = parse_real_list(*e);
  if (cfg.output.path.empty()) throw ValidationError("output.path", "must not be empty");

  for (const auto& [key, entry] : entries) {
    if (!used.count(key)) throw ValidationError(key, "unknown or inapplicable key");
  }
  validate_geometry(cfg.geometry);
  cfg.flow.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_text(const ScenarioConfig& c) {
  std::ostringstream out;
  const bool torus = c.geometry.kind == GeometryKind::Torus;
  out << "geometry.kind = " << (torus ? "torus" : "sphere") << "\n";
  if (torus) {
    out << "geometry.nx = " << c.geometry.nx << "\n";
    out << "geometry.ny = " << c.geometry.ny << "\n";
    out << "geometry.length = " << shortest(c.geometry.length) << "\n";
    out << "geometry.sigma0_modes = " << join_modes(c.geometry.sigma0_modes) << "\n";
  } else {
    out << "geometry.nmu = " << c.geometry.nmu << "\n";
  }
  out << "initial.kind = " << initial_kind_name(c.initial.kind) << "\n";
  switch (c.initial.kind) {
    case InitialKind::Zero:
      break;
    case InitialKind::Modes:
      out << "initial.modes = " << join_modes(c.initial.modes) << "\n";
      break;
    case InitialKind::Polynomial:
      out << "initial.coefficients = " << join_reals(c.initial.coefficients) << "\n";
      break;
    case InitialKind::RandomSmooth:
      out << "initial.seed = " << c.initial.seed << "\n";
      out << "initial.max_mode = " << c.initial.max_mode << "\n";
      out << "initial.decay = " << shortest(c.initial.decay) << "\n";
      out << "initial.target_sup_F = " << shortest(c.initial.target_sup_f) << "\n";
      break;
  }
  out << "flow.kind = " << to_string(c.flow.flow_kind) << "\n";
  out << "flow.scheme = " << to_string(c.flow.scheme) << "\n";
  out << "flow.dt_init = " << shortest(c.flow.dt_init) << "\n";
  out << "flow.cfl = " << shortest(c.flow.cfl) << "\n";
  out << "flow.t_end = " << shortest(c.flow.t_end) << "\n";
  out << "flow.rho_floor = " << shortest(c.flow.rho_floor) << "\n";
  out << "flow.max_halvings = " << c.flow.max_halvings << "\n";
  out << "flow.poisson_tol = " << shortest(c.flow.poisson_tol) << "\n";
  out << "flow.checkpoint_every = " << shortest(c.flow.checkpoint_every) << "\n";
  out << "output.path = " << c.output.path << "\n";
  out << "output.record_every = " << c.flow.record_every << "\n";
  out << "output.emit_fields = " << (c.output.emit_fields ? "true" : "false") << "\n";
  out << "output.p_list = " << join_reals(c.flow.p_list) << "\n";
  return out.str();
}

GeometryPtr make_geometry(const GeometryBlock& block) {
  if (block.kind == GeometryKind::Torus) {
    return build_torus_geometry(block.nx, block.ny, block.length, block.sigma0_modes);
  }
  return build_sphere_geometry(block.nmu);
}

namespace {

// Portable draws: mt19937_64 is bit-specified; the distributions in <random>
// are not, so uniforms and normals are built by hand.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

ScalarField random_torus(const TorusGeometry& torus, const InitialBlock& b) {
  Sampler rng(b.seed);
  ScalarField phi(torus.size(), 0.0);
  const double w = 2.0 * std::numbers::pi / torus.length();
  for (int kx = 0; kx <= b.max_mode; ++kx) {
    for (int ky = -b.max_mode; ky <= b.max_mode; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const double scale = std::pow(std::hypot(kx, ky), -b.decay);
      const double a = rng.normal() * scale;
      const double c = rng.normal() * scale;
      for (int iy = 0; iy < torus.ny(); ++iy) {
        for (int ix = 0; ix < torus.nx(); ++ix) {
          const double arg = w * (kx * torus.x(ix) + ky * torus.y(iy));
          phi[torus.index(ix, iy)] += a * std::cos(arg) + c * std::sin(arg);
        }
      }
    }
  }
  return phi;
}

ScalarField random_sphere(const SphereGeometry& sphere, const InitialBlock& b) {
  Sampler rng(b.seed);
  ScalarField phi(sphere.size(), 0.0);
  for (int k = 1; k <= b.max_mode; ++k) {
    const double a = rng.normal() * std::pow(static_cast<double>(k), -b.decay);
    for (int i = 0; i < sphere.nmu(); ++i) {
      phi[i] += a * boost::math::legendre_p(k, 2.0 * sphere.mu(i) - 1.0);
    }
  }
  return phi;
}

// sup|F| of s·φ, or +inf outside the Kähler cone.
double sup_f_scaled(const Geometry& geom, const ScalarField& d_phi, double s) {
  const auto& s0 = geom.reference_density();
  double sup = 0.0;
  for (std::size_t i = 0; i < d_phi.size(); ++i) {
    const double rho = 1.0 + s * d_phi[i] / s0[i];
    if (!(rho > kDefaultRhoFloor)) return INFINITY;
    sup = std::max(sup, std::abs(std::log(rho)));
  }
  return sup;
}

ScalarField rescale_to_target(const Geometry& geom, ScalarField phi, double target) {
  const ScalarField d_phi = geom.mixed_second_derivative(phi);
  if (max_abs(d_phi) == 0.0) {
    throw NotKahlerError(1.0);  // constant draw; cannot reach any target
  }
  double lo = 0.0;
  double hi = 1.0;
  while (sup_f_scaled(geom, d_phi, hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorKind::NotKahler, "cannot reach target sup|F|");
  }
  double s = hi;
  for (int it = 0; it < 200; ++it) {
    s = 0.5 * (lo + hi);
    const double g = sup_f_scaled(geom, d_phi, s);
    if (std::abs(g - target) <= 1e-6 * target) break;
    (g < target ? lo : hi) = s;
  }
  const double achieved = sup_f_scaled(geom, d_phi, s);
  if (!(std::abs(achieved - target) <= 0.01 * target)) {
    throw Error(ErrorKind::NotKahler,
                "rescaling reached sup|F| = " + format_real(achieved) + " instead of " +
                    format_real(target));
  }
  for (double& v : phi) v *= s;
  return phi;
}

}  // namespace

ScalarField make_initial(const Geometry& geom, const InitialBlock& block) {
  ScalarField phi(geom.size(), 0.0);
  switch (block.kind) {
    case InitialKind::Zero:
      return phi;
    case InitialKind::Modes: {
      const auto* torus = dynamic_cast<const TorusGeometry*>(&geom);
      if (!torus) throw ValidationError("initial.kind", "modes requires a torus");
      const double w = 2.0 * std::numbers::pi / torus->length();
      for (int iy = 0; iy < torus->ny(); ++iy) {
        for (int ix = 0; ix < torus->nx(); ++ix) {
          double v = 0.0;
          for (const auto& m : block.modes) {
            v += m.amplitude * std::cos(w * (m.kx * torus->x(ix) + m.ky * torus->y(iy)));
          }
          phi[torus->index(ix, iy)] = v;
        }
      }
      return phi;
    }
    case InitialKind::Polynomial: {
      const auto* sphere = dynamic_cast<const SphereGeometry*>(&geom);
      if (!sphere) throw ValidationError("initial.kind", "polynomial requires a sphere");
      for (int i = 0; i < sphere->nmu(); ++i) {
        double v = 0.0;
        for (auto it = block.coefficients.rbegin(); it != block.coefficients.rend(); ++it) {
          v = v * sphere->mu(i) + *it;
        }
        phi[i] = v;
      }
      return phi;
    }
    case InitialKind::RandomSmooth: {
      if (const auto* torus = dynamic_cast<const TorusGeometry*>(&geom)) {
        phi = random_torus(*torus, block);
      } else {
        phi = random_sphere(dynamic_cast<const SphereGeometry&>(geom), block);
      }
      return rescale_to_target(geom, std::move(phi), block.target_sup_f);
    }
  }
  return phi;
}

}  // namespace pcflow
