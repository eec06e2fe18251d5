#pragma once

// Time integration of the pseudo Calabi flow (∂tφ = F + P) and of the
// normalized Kähler–Ricci flow (∂tφ = −h_φ).

#include <functional>
#include <vector>

#include "pcflow/functionals.hpp"

namespace pcflow {

enum class Scheme { RK4, SemiImplicit };
enum class FlowKind { PCF, NKRF };
enum class Termination { ReachedTEnd, StepFloorHit, NotKahler };

const char* to_string(Scheme s);
const char* to_string(FlowKind k);
const char* to_string(Termination t);

struct FlowConfig {
  Scheme scheme = Scheme::RK4;
  FlowKind flow_kind = FlowKind::PCF;
  double dt_init = 1e-2;
  double cfl = 0.2;
  double t_end = 1.0;
  double rho_floor = 0.05;     // step acceptance
  int max_halvings = 12;
  double poisson_tol = kDefaultPoissonTol;
  int record_every = 10;
  double checkpoint_every = 0.0;  // 0 disables
  std::vector<double> p_list = {1.0, 2.0, 4.0};
  bool keep_states = true;

  void validate() const;

  friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

struct TraceRecord {
  double time = 0.0;
  double dt = 0.0;
  double sup_f = 0.0;  // ‖F‖₀
  double inf_f = 0.0;  // min F
  double sup_p = 0.0;  // ‖P‖₀
  double entropy = 0.0;
  double j_neg_ric = 0.0;
  double k_energy = 0.0;
  double i_functional = 0.0;
  double dissipation = 0.0;
  double calabi_energy = 0.0;
  double rho_min = 0.0;
  double volume = 0.0;
  double poisson_residual = 0.0;
  ExponentTable lp_grad_f;
  ExponentTable lp_trace0;
};

TraceRecord make_trace_record(const Geometry& geom, const MetricState& state, double dt,
                              const std::vector<double>& p_list,
                              double poisson_tol = kDefaultPoissonTol);

struct Trajectory {
  std::vector<MetricState> states;  // recorded states (empty unless keep_states)
  std::vector<TraceRecord> records;
  FlowConfig config;
  Termination terminated = Termination::ReachedTEnd;
  MetricState final_state;
  long steps = 0;
  std::vector<double> step_sizes;
};

struct RhsEvaluation {
  ScalarField rhs;
  PoissonSolution solution;
};

// F + P.
RhsEvaluation pcf_rhs(const Geometry& geom, const MetricState& state,
                      double poisson_tol = kDefaultPoissonTol);
// −h_φ with the exp-mass normalization.
RhsEvaluation nkrf_rhs(const Geometry& geom, const MetricState& state,
                       double poisson_tol = kDefaultPoissonTol);
RhsEvaluation flow_rhs(const Geometry& geom, const MetricState& state, FlowKind kind,
                       double poisson_tol = kDefaultPoissonTol);

struct StepOptions {
  FlowKind kind = FlowKind::PCF;
  double rho_floor = 0.05;
  double poisson_tol = kDefaultPoissonTol;
};

// Classical RK4; every stage revalidates the potential and re-solves the
// elliptic problem. Throws NotKahlerError carrying the failing stage.
MetricState rk4_step(const Geometry& geom, const MetricState& state, double dt,
                     const StepOptions& options);

// Solves (I − dt·c·D)φ' = φ + dt·(rhs − c·D(φ)) with c = 1/min(s₀ρ): the
// constant-coefficient chart operator is implicit, the remainder explicit.
// First order.
MetricState semi_implicit_step(const Geometry& geom, const MetricState& state, double dt,
                               const StepOptions& options);

// cfl·h²·4·min(s₀ρ).
double suggest_dt(const Geometry& geom, const MetricState& state, double cfl);

struct RunHooks {
  // Called after landing exactly on a multiple of checkpoint_every.
  std::function<void(const MetricState&)> on_checkpoint;
};

// Advances from phi0 at time t0 to config.t_end. Failures are reported in
// Trajectory::terminated, never thrown.
Trajectory run(const Geometry& geom, ScalarField phi0, const FlowConfig& config,
               const RunHooks& hooks = {}, double t0 = 0.0);

// PCF and NKRF advanced with one shared step sequence.
struct Crosscheck {
  Trajectory pcf;
  Trajectory nkrf;
  std::vector<double> rho_divergence;  // sup|ρ_PCF − ρ_NKRF| per record
  double max_divergence = 0.0;
};

Crosscheck crosscheck(const Geometry& geom, ScalarField phi0, const FlowConfig& config);

}  // namespace pcflow
