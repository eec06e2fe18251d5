// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pcflow/config.hpp"
#include "pcflow/elliptic.hpp"
#include "pcflow/io.hpp"
#include "pcflow/parallel.hpp"

using namespace pcflow;

namespace {

// Pinned tolerances.
constexpr double kMonotoneSlackRel = 1e-8;     // K non-increasing, relative to 1+|K|
constexpr double kDissipationRelErr = 0.02;    // centered dK/dt vs −dissipation
constexpr double kDissipationActive = 1e-6;
constexpr double kISlack = 1e-8;
constexpr double kEntropyFloor = -1e-12;
constexpr double kEnergyBudgetSec = 120.0;
constexpr double kRhoDivergence = 1e-5;
constexpr double kPIdentity = 1e-8;
constexpr double kSphereBudgetSec = 180.0;
constexpr double kDecaySlack = 1e-9;
constexpr double kFinalSupF = 1e-6;
constexpr double kFitResidual = 0.5;
constexpr double kCouplingFactor = 10.0;
constexpr double kSmoothingFactor = 10.0;
constexpr double kSmoothingRefTime = 0.1;
constexpr double kSmoothingP = 2.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ScenarioConfig preset(const std::string& name) {
  return load_config(std::string(PCFLOW_PRESETS) + "/" + name + ".cfg");
}

struct Scenario {
  ScenarioConfig cfg;
  GeometryPtr geom;
  ScalarField phi0;
};

Scenario prepare(ScenarioConfig cfg) {
  Scenario s{std::move(cfg), nullptr, {}};
  s.geom = make_geometry(s.cfg.geometry);
  s.phi0 = make_initial(*s.geom, s.cfg.initial);
  return s;
}

double probe_value(const ExponentTable& table, double p) {
  for (const auto& [q, v] : table)
    if (q == p) return v;
  return std::nan("");
}

// Criteria 1 and 2 share one run.
struct EnergyRun {
  Trajectory traj;
  double seconds = 0.0;
};

EnergyRun& energy_run() {
  static EnergyRun r = [] {
    auto s = prepare(preset("energy"));
    s.cfg.flow.keep_states = false;
    const auto t0 = std::chrono::steady_clock::now();
    EnergyRun out{run(*s.geom, s.phi0, s.cfg.flow), 0.0};
    out.seconds = seconds_since(t0);
    return out;
  }();
  return r;
}

Outcome criterion1() {
  const auto& e = energy_run();
  const auto& rec = e.traj.records;
  Outcome o;
  o.pass = e.traj.terminated == Termination::ReachedTEnd && e.seconds <= kEnergyBudgetSec;
  double worst_rise = 0.0, worst_rel = 0.0;
  for (size_t i = 1; i < rec.size(); ++i) {
    const double rise = rec[i].k_energy - rec[i - 1].k_energy;
    worst_rise = std::max(worst_rise, rise / (1.0 + std::abs(rec[i].k_energy)));
  }
  for (size_t i = 1; i + 1 < rec.size(); ++i) {
    if (rec[i].dissipation <= kDissipationActive) continue;
    const double dk = (rec[i + 1].k_energy - rec[i - 1].k_energy) / (rec[i + 1].time - rec[i - 1].time);
    worst_rel = std::max(worst_rel, std::abs(dk + rec[i].dissipation) / rec[i].dissipation);
  }
  o.pass = o.pass && worst_rise <= kMonotoneSlackRel && worst_rel <= kDissipationRelErr;
  o.detail = std::to_string(rec.size()) + " records, max relative K rise " + fmt("%.2e", worst_rise) +
             ", max |dK/dt + dissipation|/dissipation " + fmt("%.2e", worst_rel) + ", " +
             fmt("%.1f s", e.seconds);
  return o;
}

Outcome criterion2() {
  const auto& rec = energy_run().traj.records;
  double worst_drop = 0.0, min_entropy = INFINITY;
  for (size_t i = 0; i < rec.size(); ++i) {
    if (i > 0) worst_drop = std::max(worst_drop, rec[i - 1].i_functional - rec[i].i_functional);
    min_entropy = std::min(min_entropy, rec[i].entropy);
  }
  Outcome o;
  o.pass = !rec.empty() && worst_drop <= kISlack && min_entropy >= kEntropyFloor;
  o.detail = "max I drop " + fmt("%.2e", worst_drop) + ", min entropy " + fmt("%.3e", min_entropy);
  return o;
}

Outcome criterion3() {
  auto s = prepare(preset("sphere"));
  s.cfg.flow.keep_states = false;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cc = crosscheck(*s.geom, s.phi0, s.cfg.flow);
  const double secs = seconds_since(t0);

  // Elliptic identity on random valid states: P = φ − avg_{ω_φ} φ.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& sphere = static_cast<const SphereGeometry&>(*s.geom);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    ScalarField phi(sphere.size());
    double c[5] = {0, 0, 0, 0, 0};
    for (int k = 1; k <= 4; ++k) c[k] = u(rng) / k;
    for (int i = 0; i < sphere.nmu(); ++i) {
      double v = 0.0;
      for (int k = 4; k >= 1; --k) v = (v + c[k]) * sphere.mu(i);
      phi[i] = v;
    }
    const auto rho = ma_density(sphere, phi);
    double dev = 0.0;
    for (double r : rho) dev = std::max(dev, std::abs(r - 1.0));
    const double scale = (0.05 + 0.75 * (0.5 + 0.5 * u(rng))) / std::max(dev, 1e-12);
    for (auto& v : phi) v *= scale;
    const auto st = validate_kahler(sphere, phi);
    const auto p = solve_P(sphere, st);
    const double avg = sphere.integrate(st.phi, st.rho) / sphere.integrate(st.rho);
    for (size_t i = 0; i < p.field.size(); ++i)
      worst = std::max(worst, std::abs(p.field[i] - (st.phi[i] - avg)));
  }
  Outcome o;
  o.pass = cc.pcf.terminated == Termination::ReachedTEnd &&
           cc.nkrf.terminated == Termination::ReachedTEnd &&
           cc.pcf.step_sizes == cc.nkrf.step_sizes && cc.max_divergence <= kRhoDivergence &&
           worst <= kPIdentity && secs <= kSphereBudgetSec;
  o.detail = "max sup|rho_PCF - rho_NKRF| " + fmt("%.2e", cc.max_divergence) + ", " +
             std::to_string(cc.pcf.steps) + " shared steps, P identity " + fmt("%.2e", worst) +
             ", " + fmt("%.1f s", secs);
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = preset("convergence");
    cfg.initial.seed = seed;
    auto s = prepare(cfg);
    s.cfg.flow.keep_states = false;
    const auto traj = run(*s.geom, s.phi0, s.cfg.flow);
    const auto& rec = traj.records;
    double worst_rise = -INFINITY;
    for (size_t i = 1; i < rec.size(); ++i)
      if (rec[i - 1].time >= 1.0) worst_rise = std::max(worst_rise, rec[i].sup_f - rec[i - 1].sup_f);
    // Least-squares line through log sup|F| on [5, 20].
    std::vector<double> t, y;
    for (const auto& r : rec)
      if (r.time >= 5.0 && r.time <= 20.0 + 1e-12) {
        t.push_back(r.time);
        y.push_back(std::log(r.sup_f));
      }
    const double n = t.size();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < t.size(); ++i) {
      st += t[i]; sy += y[i]; stt += t[i] * t[i]; sty += t[i] * y[i];
    }
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    const double icept = (sy - slope * st) / n;
    double resid = 0.0;
    for (size_t i = 0; i < t.size(); ++i) resid = std::max(resid, std::abs(y[i] - icept - slope * t[i]));
    const double final_f = rec.empty() ? INFINITY : rec.back().sup_f;
    const bool ok = traj.terminated == Termination::ReachedTEnd && worst_rise <= kDecaySlack &&
                    final_f < kFinalSupF && slope < 0.0 && resid < kFitResidual;
    o.pass = o.pass && ok;
    o.detail += (seed > 1 ? "; " : "") + std::string("seed ") + std::to_string(seed) + " final " +
                fmt("%.2e", final_f) + " slope " + fmt("%.3f", slope) + " resid " + fmt("%.3f", resid) +
                (ok ? "" : " (fail)");
  }
  return o;
}

Outcome criterion5() {
  auto s = prepare(preset("coupling"));
  s.cfg.flow.keep_states = false;
  const auto traj = run(*s.geom, s.phi0, s.cfg.flow);
  const auto& rec = traj.records;
  double worst = 0.0, alpha = -INFINITY;
  for (const auto& r : rec) {
    worst = std::max(worst, r.sup_p / (kCouplingFactor * (r.sup_f + 1.0)));
    if (r.time > 0.0) alpha = std::max(alpha, std::log(r.sup_f / rec.front().sup_f) / r.time);
  }
  Outcome o;
  o.pass = traj.terminated == Termination::ReachedTEnd && worst <= 1.0;
  o.detail = "max sup_P / (10(sup_F+1)) " + fmt("%.3e", worst) + ", sup_P(0) " +
             fmt("%.4f", rec.front().sup_p) + ", sup_P(end) " + fmt("%.4f", rec.back().sup_p) +
             ", smallest alpha with sup_F(t) <= sup_F(0)e^{alpha t}: " + fmt("%.3f", alpha);
  return o;
}

Outcome criterion6() {
  auto s = prepare(preset("smoothing"));
  s.cfg.flow.keep_states = false;
  const auto traj = run(*s.geom, s.phi0, s.cfg.flow);
  const auto& rec = traj.records;
  std::vector<double> t, w;
  for (const auto& r : rec) {
    t.push_back(r.time);
    w.push_back(std::pow(r.time, kSmoothingP + 1.0) * probe_value(r.lp_grad_f, kSmoothingP));
  }
  // Reference value at t = 0.1, linear between the neighbouring records.
  double ref = std::nan("");
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i - 1] <= kSmoothingRefTime && kSmoothingRefTime <= t[i]) {
      const double a = (kSmoothingRefTime - t[i - 1]) / (t[i] - t[i - 1]);
      ref = (1 - a) * w[i - 1] + a * w[i];
      break;
    }
  double worst = 0.0, at = 0.0;
  for (size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0.0 && t[i] <= 1.0 && w[i] / ref > worst) {
      worst = w[i] / ref;
      at = t[i];
    }
  Outcome o;
  o.pass = traj.terminated == Termination::ReachedTEnd && std::isfinite(ref) && ref > 0.0 &&
           worst <= kSmoothingFactor;
  o.detail = "max t^3 W / W(0.1) " + fmt("%.3f", worst) + " at t = " + fmt("%.4f", at) + ", " +
             std::to_string(rec.size()) + " records";
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::stringstream list(PCFLOW_SUITES);
  std::string path;
  int ran = 0;
  while (std::getline(list, path, '|')) {
    const std::string cmd = "\"" + path + "\" > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    ++ran;
    if (rc != 0) {
      o.pass = false;
      o.detail += "failed: " + path + "; ";
    }
  }
  o.detail += std::to_string(ran) + " property suites run";
  return o;
}

std::string csv_text(const Trajectory& traj) {
  std::string s = csv_header(traj.config.p_list);
  for (const auto& r : traj.records) s += csv_row(r);
  return s;
}

Outcome criterion8() {
  Outcome o;
  for (const char* name : {"flat_torus", "sphere"}) {
    auto s = prepare(preset(name));
    s.cfg.flow.keep_states = false;
    const auto a = run(*s.geom, s.phi0, s.cfg.flow);
    const auto b = run(*s.geom, s.phi0, s.cfg.flow);
    const bool same =
        csv_text(a) == csv_text(b) &&
        encode_checkpoint(*s.geom, a.final_state.time, a.final_state.phi) ==
            encode_checkpoint(*s.geom, b.final_state.time, b.final_state.phi);
    o.pass = o.pass && same;
    o.detail += std::string(name) + (same ? " repeat identical; " : " repeat DIFFERS; ");
  }

  // Direct run to t = 1 against a resume from the t = 0.5 checkpoint.
  auto s = prepare(preset("flat_torus"));
  s.cfg.flow.keep_states = false;
  s.cfg.flow.t_end = 1.0;
  s.cfg.flow.checkpoint_every = 0.5;
  std::vector<std::uint8_t> saved;
  RunHooks hooks;
  hooks.on_checkpoint = [&](const MetricState& st) {
    if (st.time == 0.5) saved = encode_checkpoint(*s.geom, st.time, st.phi);
  };
  const auto direct = run(*s.geom, s.phi0, s.cfg.flow, hooks);
  const auto cp = decode_checkpoint(*s.geom, saved);
  const auto resumed = run(*s.geom, cp.phi, s.cfg.flow, {}, cp.time);
  const bool exact = !saved.empty() &&
                     encode_checkpoint(*s.geom, direct.final_state.time, direct.final_state.phi) ==
                         encode_checkpoint(*s.geom, resumed.final_state.time, resumed.final_state.phi);
  o.pass = o.pass && exact;
  o.detail += exact ? "resume at 0.5 bitwise exact" : "resume at 0.5 DIFFERS";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // The reference behavior is sequential.
  unsetenv("PCFLOW_THREADS");
  set_thread_count(0);

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  struct Entry {
    int id;
    const char* title;
    Outcome (*fn)();
  };
  const Entry all[] = {
      {1, "K-energy dissipation identity", criterion1},
      {2, "I-functional monotonicity", criterion2},
      {3, "PCF equals NKRF on the round sphere", criterion3},
      {4, "convergence on the flat torus", criterion4},
      {5, "sup|P| controlled by sup|F|", criterion5},
      {6, "gradient smoothing probe", criterion6},
      {7, "operator and solver property suites", criterion7},
      {8, "determinism and bitwise resume", criterion8},
  };
  int failed = 0;
  for (const auto& e : all) {
    if (!wanted.empty() && !wanted.count(e.id)) continue;
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("criterion %d: %s  %s  [%s]\n", e.id, o.pass ? "PASS" : "FAIL", e.title,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
