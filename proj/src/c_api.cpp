#include "pcflow/pcflow.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "pcflow/config.hpp"
#include "pcflow/error.hpp"
#include "pcflow/io.hpp"

struct pcf_config_s {
  pcflow::ScenarioConfig config;
};

struct pcf_geometry_s {
  pcflow::GeometryPtr geometry;
};

struct pcf_trajectory_s {
  pcflow::Trajectory trajectory;
};

struct pcf_crosscheck_s {
  pcflow::Crosscheck result;
};

namespace {

thread_local std::string g_last_error;

pcf_status status_for(pcflow::ErrorKind kind) {
  using pcflow::ErrorKind;
  switch (kind) {
    case ErrorKind::ParseError: return PCF_ERR_PARSE;
    case ErrorKind::ValidationError:
    case ErrorKind::BadGrid:
    case ErrorKind::NonPositiveDensity: return PCF_ERR_VALIDATION;
    case ErrorKind::IoError: return PCF_ERR_IO;
    case ErrorKind::ShapeError:
    case ErrorKind::InvalidArgument: return PCF_ERR_ARGUMENT;
    case ErrorKind::NotKahler:
    case ErrorKind::SingularSolve:
    case ErrorKind::ToleranceNotMet: return PCF_ERR_RUNTIME;
  }
  return PCF_ERR_RUNTIME;
}

template <class Fn>
pcf_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return PCF_OK;
  } catch (const pcflow::Error& e) {
    g_last_error = std::string(pcflow::to_string(e.kind())) + ": " + e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PCF_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PCF_ERR_RUNTIME;
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw pcflow::Error(pcflow::ErrorKind::InvalidArgument, message);
}

void require_size(const pcf_geometry_s* geom, size_t n) {
  require(geom != nullptr, "null geometry");
  require(n == geom->geometry->size(), "buffer length does not match geometry");
}

pcf_record to_c(const pcflow::TraceRecord& r) {
  return pcf_record{r.time,         r.dt,          r.sup_f,         r.inf_f,
                    r.sup_p,        r.entropy,     r.j_neg_ric,     r.k_energy,
                    r.i_functional, r.dissipation, r.calabi_energy, r.rho_min,
                    r.volume,       r.poisson_residual};
}

}  // namespace

extern "C" {

const char* pcf_last_error(void) { return g_last_error.c_str(); }

const char* pcf_version(void) { return "1.0.0"; }

pcf_status pcf_config_parse(const char* text, pcf_config* out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new pcf_config_s{pcflow::parse_config(text)};
  });
}

pcf_status pcf_config_load(const char* path, pcf_config* out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new pcf_config_s{pcflow::load_config(path)};
  });
}

pcf_status pcf_config_set(pcf_config cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    const std::string prefix = std::string(key) + " =";
    std::string text;
    std::string line;
    std::istringstream in(pcflow::to_text(cfg->config));
    while (std::getline(in, line)) {
      if (line.rfind(prefix, 0) != 0) text += line + "\n";
    }
    text += std::string(key) + " = " + value + "\n";
    cfg->config = pcflow::parse_config(text);
  });
}

pcf_status pcf_config_to_text(pcf_config cfg, char* buf, size_t cap, size_t* len) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    const std::string text = pcflow::to_text(cfg->config);
    if (len) *len = text.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

const char* pcf_config_output_path(pcf_config cfg) {
  return cfg ? cfg->config.output.path.c_str() : "";
}

int pcf_config_emit_fields(pcf_config cfg) { return cfg && cfg->config.output.emit_fields; }

size_t pcf_config_p_count(pcf_config cfg) { return cfg ? cfg->config.flow.p_list.size() : 0; }

void pcf_config_free(pcf_config cfg) { delete cfg; }

pcf_status pcf_geometry_from_config(pcf_config cfg, pcf_geometry* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = new pcf_geometry_s{pcflow::make_geometry(cfg->config.geometry)};
  });
}

pcf_status pcf_geometry_torus(int nx, int ny, double length, const int* kx, const int* ky,
                              const double* amplitude, size_t n_modes, pcf_geometry* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(n_modes == 0 || (kx && ky && amplitude), "null mode arrays");
    std::vector<pcflow::CosineMode> modes;
    for (size_t i = 0; i < n_modes; ++i) modes.push_back({kx[i], ky[i], amplitude[i]});
    *out = new pcf_geometry_s{pcflow::build_torus_geometry(nx, ny, length, std::move(modes))};
  });
}

pcf_status pcf_geometry_sphere(int nmu, pcf_geometry* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new pcf_geometry_s{pcflow::build_sphere_geometry(nmu)};
  });
}

size_t pcf_geometry_size(pcf_geometry geom) { return geom ? geom->geometry->size() : 0; }

double pcf_geometry_volume(pcf_geometry geom) { return geom ? geom->geometry->volume() : 0.0; }

void pcf_geometry_free(pcf_geometry geom) { delete geom; }

pcf_status pcf_initial_potential(pcf_config cfg, pcf_geometry geom, double* phi, size_t n) {
  return guarded([&] {
    require(cfg && phi, "null argument");
    require_size(geom, n);
    const auto field = pcflow::make_initial(*geom->geometry, cfg->config.initial);
    std::copy(field.begin(), field.end(), phi);
  });
}

pcf_status pcf_checkpoint_write(const char* path, pcf_geometry geom, double time,
                                const double* phi, size_t n) {
  return guarded([&] {
    require(path && phi, "null argument");
    require_size(geom, n);
    pcflow::write_checkpoint(path, *geom->geometry, time, std::span(phi, n));
  });
}

pcf_status pcf_checkpoint_read(const char* path, pcf_geometry geom, double* time, double* phi,
                               size_t n) {
  return guarded([&] {
    require(path && phi && time, "null argument");
    require_size(geom, n);
    const auto cp = pcflow::read_checkpoint(path, *geom->geometry);
    *time = cp.time;
    std::copy(cp.phi.begin(), cp.phi.end(), phi);
  });
}

pcf_status pcf_run(pcf_config cfg, pcf_geometry geom, const double* phi0, size_t n, double t0,
                   pcf_checkpoint_fn on_checkpoint, void* user, pcf_trajectory* out) {
  return guarded([&] {
    require(cfg && phi0 && out, "null argument");
    require_size(geom, n);
    pcflow::FlowConfig flow = cfg->config.flow;
    flow.keep_states = cfg->config.output.emit_fields;
    pcflow::RunHooks hooks;
    if (on_checkpoint) {
      hooks.on_checkpoint = [&](const pcflow::MetricState& s) {
        on_checkpoint(s.time, s.phi.data(), s.phi.size(), user);
      };
    }
    auto traj = pcflow::run(*geom->geometry, pcflow::ScalarField(phi0, phi0 + n), flow, hooks, t0);
    *out = new pcf_trajectory_s{std::move(traj)};
  });
}

pcf_termination pcf_trajectory_status(pcf_trajectory traj) {
  if (!traj) return PCF_NOT_KAHLER;
  switch (traj->trajectory.terminated) {
    case pcflow::Termination::ReachedTEnd: return PCF_REACHED_T_END;
    case pcflow::Termination::StepFloorHit: return PCF_STEP_FLOOR_HIT;
    case pcflow::Termination::NotKahler: return PCF_NOT_KAHLER;
  }
  return PCF_NOT_KAHLER;
}

long pcf_trajectory_steps(pcf_trajectory traj) { return traj ? traj->trajectory.steps : 0; }

size_t pcf_trajectory_record_count(pcf_trajectory traj) {
  return traj ? traj->trajectory.records.size() : 0;
}

pcf_status pcf_trajectory_record(pcf_trajectory traj, size_t index, pcf_record* out) {
  return guarded([&] {
    require(traj && out, "null argument");
    require(index < traj->trajectory.records.size(), "record index out of range");
    *out = to_c(traj->trajectory.records[index]);
  });
}

pcf_status pcf_trajectory_probe(pcf_trajectory traj, size_t index, size_t p_index,
                                double* grad_f, double* trace0) {
  return guarded([&] {
    require(traj && grad_f && trace0, "null argument");
    require(index < traj->trajectory.records.size(), "record index out of range");
    const auto& rec = traj->trajectory.records[index];
    require(p_index < rec.lp_grad_f.size(), "exponent index out of range");
    *grad_f = rec.lp_grad_f[p_index].second;
    *trace0 = rec.lp_trace0[p_index].second;
  });
}

size_t pcf_trajectory_state_count(pcf_trajectory traj) {
  return traj ? traj->trajectory.states.size() : 0;
}

pcf_status pcf_trajectory_state(pcf_trajectory traj, size_t index, double* time, double* phi,
                                size_t n) {
  return guarded([&] {
    require(traj && time && phi, "null argument");
    require(index < traj->trajectory.states.size(), "state index out of range");
    const auto& s = traj->trajectory.states[index];
    require(n == s.phi.size(), "buffer length does not match state");
    *time = s.time;
    std::copy(s.phi.begin(), s.phi.end(), phi);
  });
}

pcf_status pcf_trajectory_final(pcf_trajectory traj, double* time, double* phi, size_t n) {
  return guarded([&] {
    require(traj && time && phi, "null argument");
    const auto& s = traj->trajectory.final_state;
    require(!s.phi.empty(), "trajectory has no final state");
    require(n == s.phi.size(), "buffer length does not match state");
    *time = s.time;
    std::copy(s.phi.begin(), s.phi.end(), phi);
  });
}

pcf_status pcf_trajectory_write_csv(pcf_trajectory traj, const char* path) {
  return guarded([&] {
    require(traj && path, "null argument");
    pcflow::emit_csv(traj->trajectory.records, traj->trajectory.config.p_list, path);
  });
}

void pcf_trajectory_free(pcf_trajectory traj) { delete traj; }

pcf_status pcf_crosscheck_run(pcf_config cfg, pcf_geometry geom, const double* phi0, size_t n,
                              pcf_crosscheck* out) {
  return guarded([&] {
    require(cfg && phi0 && out, "null argument");
    require_size(geom, n);
    pcflow::FlowConfig flow = cfg->config.flow;
    flow.keep_states = false;
    auto result =
        pcflow::crosscheck(*geom->geometry, pcflow::ScalarField(phi0, phi0 + n), flow);
    *out = new pcf_crosscheck_s{std::move(result)};
  });
}

double pcf_crosscheck_max_divergence(pcf_crosscheck cc) {
  return cc ? cc->result.max_divergence : 0.0;
}

pcf_status pcf_crosscheck_write(pcf_crosscheck cc, const char* directory) {
  return guarded([&] {
    require(cc && directory, "null argument");
    const std::string dir(directory);
    const auto& r = cc->result;
    pcflow::emit_csv(r.pcf.records, r.pcf.config.p_list, dir + "/pcf.csv");
    pcflow::emit_csv(r.nkrf.records, r.nkrf.config.p_list, dir + "/nkrf.csv");
    std::ofstream out(dir + "/divergence.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw pcflow::Error(pcflow::ErrorKind::IoError, "cannot write divergence.csv");
    out << "t,rho_divergence\n";
    for (size_t i = 0; i < r.rho_divergence.size(); ++i) {
      out << pcflow::format_real(r.pcf.records[i].time) << ','
          << pcflow::format_real(r.rho_divergence[i]) << '\n';
    }
    if (!out) throw pcflow::Error(pcflow::ErrorKind::IoError, "write failed for divergence.csv");
  });
}

void pcf_crosscheck_free(pcf_crosscheck cc) { delete cc; }

pcf_status pcf_probe_write(pcf_config cfg, pcf_geometry geom, const double* phi, size_t n,
                           const char* path) {
  return guarded([&] {
    require(cfg && phi && path, "null argument");
    require_size(geom, n);
    const auto& g = *geom->geometry;
    const auto& flow = cfg->config.flow;
    const auto state = pcflow::validate_kahler(g, pcflow::ScalarField(phi, phi + n));
    const auto rec = pcflow::make_trace_record(g, state, 0.0, flow.p_list, flow.poisson_tol);
    const auto p = pcflow::solve_P(g, state, flow.poisson_tol);
    const auto probes = pcflow::estimate_probes(g, state, p.field, flow.p_list);
    const auto curvature = pcflow::scalar_curvature_forms(g, state);
    const auto chi = pcflow::minus_ricci_form(g);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw pcflow::Error(pcflow::ErrorKind::IoError, std::string("cannot write ") + path);
    out << pcflow::csv_header(flow.p_list)
        << ",j_neg_ric_closed_form,i_dd_bar_phi_energy,curvature_form_discrepancy,"
           "p_compat_defect";
    for (const auto& [e, v] : probes.grad_p) out << ",grad_P_Lp" << e;
    out << '\n' << pcflow::csv_row(rec) << ','
        << pcflow::format_real(pcflow::j_chi_closed_form(g, chi, state.phi)) << ','
        << pcflow::format_real(g.dirichlet_energy(state.phi)) << ','
        << pcflow::format_real(curvature.form_discrepancy) << ','
        << pcflow::format_real(p.compat_defect);
    for (const auto& [e, v] : probes.grad_p) out << ',' << pcflow::format_real(v);
    out << '\n';
    if (!out) throw pcflow::Error(pcflow::ErrorKind::IoError, std::string("write failed for ") + path);
  });
}

}  // extern "C"
