#include "pcflow/flow.hpp"

#include <cmath>
#include <string>

#include "pcflow/error.hpp"

namespace pcflow {

const char* to_string(Scheme s) {
  return s == Scheme::RK4 ? "rk4" : "semi_implicit";
}

const char* to_string(FlowKind k) { return k == FlowKind::PCF ? "pcf" : "nkrf"; }

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTEnd: return "ReachedTEnd";
    case Termination::StepFloorHit: return "StepFloorHit";
    case Termination::NotKahler: return "NotKahler";
  }
  return "Unknown";
}

void FlowConfig::validate() const {
  if (!(dt_init > 0.0)) throw ValidationError("flow.dt_init", "must be > 0");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ValidationError("flow.cfl", "must lie in (0, 1]");
  if (!(t_end > 0.0)) throw ValidationError("flow.t_end", "must be > 0");
  if (!(rho_floor > 0.0 && rho_floor < 1.0)) {
    throw ValidationError("flow.rho_floor", "must lie in (0, 1)");
  }
  if (max_halvings < 0) throw ValidationError("flow.max_halvings", "must be >= 0");
  if (!(poisson_tol > 0.0)) throw ValidationError("flow.poisson_tol", "must be > 0");
  if (record_every < 1) throw ValidationError("output.record_every", "must be >= 1");
  if (!(checkpoint_every >= 0.0)) {
    throw ValidationError("flow.checkpoint_every", "must be >= 0");
  }
  for (double p : p_list) {
    if (!(p >= 1.0 && p <= 8.0)) throw ValidationError("output.p_list", "exponents must lie in [1, 8]");
  }
}

TraceRecord make_trace_record(const Geometry& geom, const MetricState& state, double dt,
                              const std::vector<double>& p_list, double poisson_tol) {
  const PoissonSolution p = solve_P(geom, state, poisson_tol);
  TraceRecord rec;
  rec.time = state.time;
  rec.dt = dt;
  rec.sup_f = max_abs(state.big_f);
  rec.inf_f = min_value(state.big_f);
  rec.sup_p = max_abs(p.field);
  rec.entropy = entropy(geom, state);
  rec.j_neg_ric = j_chi_path(geom, minus_ricci_form(geom), state.phi);
  rec.k_energy = rec.entropy + rec.j_neg_ric;
  rec.i_functional = i_functional(geom, state);
  rec.dissipation = dissipation(geom, state, p.field);
  rec.calabi_energy = calabi_energy(geom, state);
  rec.rho_min = min_value(state.rho);
  rec.volume = geom.integrate(ScalarField(geom.size(), 1.0), state.rho);
  rec.poisson_residual = p.residual_linf;
  const EstimateProbes probes = estimate_probes(geom, state, p.field, p_list);
  rec.lp_grad_f = probes.grad_f;
  rec.lp_trace0 = probes.trace0;
  return rec;
}

RhsEvaluation pcf_rhs(const Geometry& geom, const MetricState& state, double poisson_tol) {
  RhsEvaluation out;
  out.solution = solve_P(geom, state, poisson_tol);
  out.rhs = state.big_f;
  for (std::size_t i = 0; i < out.rhs.size(); ++i) out.rhs[i] += out.solution.field[i];
  return out;
}

RhsEvaluation nkrf_rhs(const Geometry& geom, const MetricState& state, double poisson_tol) {
  RhsEvaluation out;
  out.solution = solve_ricci_potential(geom, state, poisson_tol);
  out.rhs = out.solution.field;
  for (double& v : out.rhs) v = -v;
  return out;
}

RhsEvaluation flow_rhs(const Geometry& geom, const MetricState& state, FlowKind kind,
                       double poisson_tol) {
  return kind == FlowKind::PCF ? pcf_rhs(geom, state, poisson_tol)
                               : nkrf_rhs(geom, state, poisson_tol);
}

namespace {

ScalarField band_limited_rhs(const Geometry& geom, const MetricState& state,
                             const StepOptions& options) {
  ScalarField rhs = flow_rhs(geom, state, options.kind, options.poisson_tol).rhs;
  geom.band_limit(rhs);
  return rhs;
}

MetricState stage_state(const Geometry& geom, ScalarField phi, double time, double rho_floor,
                        int stage) {
  try {
    return validate_kahler(geom, std::move(phi), time, rho_floor);
  } catch (const NotKahlerError& e) {
    throw NotKahlerError(e.min_rho(), stage);
  }
}

}  // namespace

MetricState rk4_step(const Geometry& geom, const MetricState& state, double dt,
                     const StepOptions& options) {
  const std::size_t n = geom.size();
  const ScalarField k1 = band_limited_rhs(geom, state, options);

  auto offset = [&](const ScalarField& k, double scale) {
    ScalarField phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = state.phi[i] + scale * k[i];
    return phi;
  };

  const MetricState s2 =
      stage_state(geom, offset(k1, 0.5 * dt), state.time + 0.5 * dt, options.rho_floor, 2);
  const ScalarField k2 = band_limited_rhs(geom, s2, options);
  const MetricState s3 =
      stage_state(geom, offset(k2, 0.5 * dt), state.time + 0.5 * dt, options.rho_floor, 3);
  const ScalarField k3 = band_limited_rhs(geom, s3, options);
  const MetricState s4 =
      stage_state(geom, offset(k3, dt), state.time + dt, options.rho_floor, 4);
  const ScalarField k4 = band_limited_rhs(geom, s4, options);

  ScalarField phi(n);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = state.phi[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return stage_state(geom, std::move(phi), state.time + dt, options.rho_floor, 5);
}

MetricState semi_implicit_step(const Geometry& geom, const MetricState& state, double dt,
                               const StepOptions& options) {
  const std::size_t n = geom.size();
  const ScalarField rhs = band_limited_rhs(geom, state, options);
  const auto& s0 = geom.reference_density();
  double min_density = s0[0] * state.rho[0];
  for (std::size_t i = 0; i < n; ++i) min_density = std::min(min_density, s0[i] * state.rho[i]);
  const double c = 1.0 / min_density;

  const ScalarField d_phi = geom.mixed_second_derivative(state.phi);
  ScalarField b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = state.phi[i] + dt * (rhs[i] - c * d_phi[i]);
  ScalarField phi(n);
  geom.solve_shifted(dt * c, b, phi);
  return stage_state(geom, std::move(phi), state.time + dt, options.rho_floor, 1);
}

double suggest_dt(const Geometry& geom, const MetricState& state, double cfl) {
  const auto& s0 = geom.reference_density();
  double min_density = s0[0] * state.rho[0];
  for (std::size_t i = 0; i < geom.size(); ++i) {
    min_density = std::min(min_density, s0[i] * state.rho[i]);
  }
  const double h = geom.min_spacing();
  return cfl * h * h * 4.0 * min_density;
}

namespace {

// Shared driver: advances one state per flow kind with a common step sequence.
std::vector<Trajectory> drive(const Geometry& geom, const ScalarField& phi0,
                              const std::vector<FlowKind>& kinds, const FlowConfig& config,
                              const RunHooks& hooks, double t0) {
  config.validate();
  std::vector<Trajectory> trajs(kinds.size());
  std::vector<MetricState> states;
  for (std::size_t f = 0; f < kinds.size(); ++f) {
    trajs[f].config = config;
    trajs[f].config.flow_kind = kinds[f];
  }
  try {
    for (std::size_t f = 0; f < kinds.size(); ++f) {
      states.push_back(validate_kahler(geom, phi0, t0));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotKahler) throw;
    for (auto& t : trajs) t.terminated = Termination::NotKahler;
    return trajs;
  }

  auto record = [&](double dt) {
    for (std::size_t f = 0; f < kinds.size(); ++f) {
      trajs[f].records.push_back(
          make_trace_record(geom, states[f], dt, config.p_list, config.poisson_tol));
      if (config.keep_states) trajs[f].states.push_back(states[f]);
    }
  };

  record(0.0);
  long steps = 0;
  bool recorded_last = true;
  double last_dt = 0.0;
  double t = t0;
  Termination status = Termination::ReachedTEnd;

  while (t < config.t_end) {
    double dt_base = config.dt_init;
    if (config.scheme == Scheme::RK4) {
      for (const auto& s : states) dt_base = std::min(dt_base, suggest_dt(geom, s, config.cfl));
    }
    double target = config.t_end;
    bool checkpoint_target = false;
    if (config.checkpoint_every > 0.0) {
      double next = (std::floor(t / config.checkpoint_every) + 1.0) * config.checkpoint_every;
      if (next <= t) next += config.checkpoint_every;
      if (next < target) {
        target = next;
        checkpoint_target = true;
      } else if (next == target) {
        checkpoint_target = true;
      }
    }
    const double remaining = target - t;
    // Absorb rounding in the accumulated time instead of taking a sliver step.
    const bool lands = remaining <= dt_base * (1.0 + 1e-9);
    double dt = lands ? remaining : dt_base;

    std::vector<MetricState> next;
    bool ok = false;
    for (int attempt = 0; attempt <= config.max_halvings && !ok; ++attempt) {
      try {
        next.clear();
        for (std::size_t f = 0; f < kinds.size(); ++f) {
          const StepOptions opts{kinds[f], config.rho_floor, config.poisson_tol};
          next.push_back(config.scheme == Scheme::RK4
                             ? rk4_step(geom, states[f], dt, opts)
                             : semi_implicit_step(geom, states[f], dt, opts));
        }
        ok = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotKahler && e.kind() != ErrorKind::ToleranceNotMet) throw;
        dt *= 0.5;
      }
    }
    if (!ok) {
      status = Termination::StepFloorHit;
      break;
    }
    const bool landed = lands && dt == remaining;
    t = landed ? target : t + dt;
    for (auto& s : next) s.time = t;
    states = std::move(next);
    ++steps;
    last_dt = dt;
    for (auto& tr : trajs) tr.step_sizes.push_back(dt);

    recorded_last = false;
    if (steps % config.record_every == 0) {
      record(dt);
      recorded_last = true;
    }
    if (landed && checkpoint_target && hooks.on_checkpoint && kinds.size() == 1) {
      hooks.on_checkpoint(states[0]);
    }
  }
  if (!recorded_last) record(last_dt);

  for (std::size_t f = 0; f < kinds.size(); ++f) {
    trajs[f].terminated = status;
    trajs[f].steps = steps;
    trajs[f].final_state = states[f];
  }
  return trajs;
}

}  // namespace

Trajectory run(const Geometry& geom, ScalarField phi0, const FlowConfig& config,
               const RunHooks& hooks, double t0) {
  auto trajs = drive(geom, phi0, {config.flow_kind}, config, hooks, t0);
  return std::move(trajs.front());
}

Crosscheck crosscheck(const Geometry& geom, ScalarField phi0, const FlowConfig& config) {
  FlowConfig cfg = config;
  cfg.keep_states = true;
  auto trajs = drive(geom, phi0, {FlowKind::PCF, FlowKind::NKRF}, cfg, {}, 0.0);
  Crosscheck out;
  out.pcf = std::move(trajs[0]);
  out.nkrf = std::move(trajs[1]);
  const std::size_t count = std::min(out.pcf.states.size(), out.nkrf.states.size());
  for (std::size_t r = 0; r < count; ++r) {
    double d = 0.0;
    const auto& a = out.pcf.states[r].rho;
    const auto& b = out.nkrf.states[r].rho;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    out.rho_divergence.push_back(d);
    out.max_divergence = std::max(out.max_divergence, d);
  }
  if (!config.keep_states) {
    out.pcf.states.clear();
    out.nkrf.states.clear();
  }
  return out;
}

}  // namespace pcflow
