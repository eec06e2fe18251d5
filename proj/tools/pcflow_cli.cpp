// pcflow command-line driver. Links only the C API.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcflow/pcflow.h"

namespace {

struct Failure {
  pcf_status status;
};

void check(pcf_status status) {
  if (status != PCF_OK) throw Failure{status};
}

struct ConfigHandle {
  pcf_config h = nullptr;
  ~ConfigHandle() { pcf_config_free(h); }
};
struct GeometryHandle {
  pcf_geometry h = nullptr;
  ~GeometryHandle() { pcf_geometry_free(h); }
};
struct TrajectoryHandle {
  pcf_trajectory h = nullptr;
  ~TrajectoryHandle() { pcf_trajectory_free(h); }
};
struct CrosscheckHandle {
  pcf_crosscheck h = nullptr;
  ~CrosscheckHandle() { pcf_crosscheck_free(h); }
};

struct Options {
  std::string config_path;
  std::string checkpoint_path;
  std::string output;
  std::vector<std::string> overrides;
};

void load(const Options& opt, ConfigHandle& cfg) {
  check(pcf_config_load(opt.config_path.c_str(), &cfg.h));
  if (!opt.output.empty()) check(pcf_config_set(cfg.h, "output.path", opt.output.c_str()));
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      throw Failure{PCF_ERR_PARSE};
    }
    check(pcf_config_set(cfg.h, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
}

std::string output_dir(const ConfigHandle& cfg) {
  const std::string dir = pcf_config_output_path(cfg.h);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create '%s': %s\n", dir.c_str(), ec.message().c_str());
    throw Failure{PCF_ERR_IO};
  }
  return dir;
}

struct CheckpointSink {
  pcf_geometry geom;
  std::string dir;
  int count = 0;
  pcf_status status = PCF_OK;
};

void write_checkpoint(double time, const double* phi, size_t n, void* user) {
  auto* sink = static_cast<CheckpointSink*>(user);
  char name[64];
  std::snprintf(name, sizeof name, "/checkpoint_%04d.pcf", ++sink->count);
  const pcf_status s = pcf_checkpoint_write((sink->dir + name).c_str(), sink->geom, time, phi, n);
  if (s != PCF_OK && sink->status == PCF_OK) sink->status = s;
}

const char* termination_name(pcf_termination t) {
  switch (t) {
    case PCF_REACHED_T_END: return "ReachedTEnd";
    case PCF_STEP_FLOOR_HIT: return "StepFloorHit";
    case PCF_NOT_KAHLER: return "NotKahler";
  }
  return "Unknown";
}

int advance(const Options& opt, bool resume) {
  ConfigHandle cfg;
  load(opt, cfg);
  GeometryHandle geom;
  check(pcf_geometry_from_config(cfg.h, &geom.h));
  const size_t n = pcf_geometry_size(geom.h);
  std::vector<double> phi(n);
  double t0 = 0.0;
  if (resume) {
    check(pcf_checkpoint_read(opt.checkpoint_path.c_str(), geom.h, &t0, phi.data(), n));
  } else {
    check(pcf_initial_potential(cfg.h, geom.h, phi.data(), n));
  }
  const std::string dir = output_dir(cfg);

  CheckpointSink sink{geom.h, dir};
  TrajectoryHandle traj;
  check(pcf_run(cfg.h, geom.h, phi.data(), n, t0, write_checkpoint, &sink, &traj.h));
  check(sink.status);
  check(pcf_trajectory_write_csv(traj.h, (dir + "/trace.csv").c_str()));

  double t_final = 0.0;
  if (pcf_trajectory_final(traj.h, &t_final, phi.data(), n) == PCF_OK) {
    check(pcf_checkpoint_write((dir + "/final.pcf").c_str(), geom.h, t_final, phi.data(), n));
  }
  if (pcf_config_emit_fields(cfg.h)) {
    for (size_t i = 0; i < pcf_trajectory_state_count(traj.h); ++i) {
      double t = 0.0;
      check(pcf_trajectory_state(traj.h, i, &t, phi.data(), n));
      char name[64];
      std::snprintf(name, sizeof name, "/field_%06zu.pcf", i);
      check(pcf_checkpoint_write((dir + name).c_str(), geom.h, t, phi.data(), n));
    }
  }

  const pcf_termination status = pcf_trajectory_status(traj.h);
  const size_t records = pcf_trajectory_record_count(traj.h);
  std::printf("status %s, %ld steps, %zu records\n", termination_name(status),
              pcf_trajectory_steps(traj.h), records);
  if (records > 0) {
    pcf_record last{};
    check(pcf_trajectory_record(traj.h, records - 1, &last));
    std::printf("t = %.6g  sup|F| = %.6e  K = %.12e  rho_min = %.6g\n", last.time, last.sup_F,
                last.k_energy, last.rho_min);
  }
  if (status != PCF_REACHED_T_END) {
    std::fprintf(stderr, "error: run terminated with %s\n", termination_name(status));
    return PCF_ERR_RUNTIME;
  }
  return 0;
}

int crosscheck(const Options& opt) {
  ConfigHandle cfg;
  load(opt, cfg);
  GeometryHandle geom;
  check(pcf_geometry_from_config(cfg.h, &geom.h));
  const size_t n = pcf_geometry_size(geom.h);
  std::vector<double> phi(n);
  check(pcf_initial_potential(cfg.h, geom.h, phi.data(), n));
  const std::string dir = output_dir(cfg);
  CrosscheckHandle cc;
  check(pcf_crosscheck_run(cfg.h, geom.h, phi.data(), n, &cc.h));
  check(pcf_crosscheck_write(cc.h, dir.c_str()));
  std::printf("max sup|rho_PCF - rho_NKRF| = %.6e\n", pcf_crosscheck_max_divergence(cc.h));
  return 0;
}

int probe(const Options& opt) {
  ConfigHandle cfg;
  load(opt, cfg);
  GeometryHandle geom;
  check(pcf_geometry_from_config(cfg.h, &geom.h));
  const size_t n = pcf_geometry_size(geom.h);
  std::vector<double> phi(n);
  check(pcf_initial_potential(cfg.h, geom.h, phi.data(), n));
  const std::string dir = output_dir(cfg);
  check(pcf_probe_write(cfg.h, geom.h, phi.data(), n, (dir + "/probe.csv").c_str()));
  std::printf("wrote %s/probe.csv\n", dir.c_str());
  return 0;
}

int print_config(const Options& opt) {
  ConfigHandle cfg;
  load(opt, cfg);
  size_t len = 0;
  check(pcf_config_to_text(cfg.h, nullptr, 0, &len));
  std::string text(len + 1, '\0');
  check(pcf_config_to_text(cfg.h, text.data(), text.size(), &len));
  text.resize(len);
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcflow: pseudo Calabi flow laboratory"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-o,--output", opt.output, "Output directory (overrides output.path)");
    sub->add_option("--set", opt.overrides, "Override a config key, key=value");
  };

  auto* run_cmd = app.add_subcommand("run", "Integrate the configured flow");
  run_cmd->add_option("config", opt.config_path)->required();
  add_common(run_cmd);

  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from a checkpoint");
  resume_cmd->add_option("checkpoint", opt.checkpoint_path)->required();
  resume_cmd->add_option("config", opt.config_path)->required();
  add_common(resume_cmd);

  auto* cross_cmd = app.add_subcommand("crosscheck", "Run PCF and NKRF side by side");
  cross_cmd->add_option("config", opt.config_path)->required();
  add_common(cross_cmd);

  auto* probe_cmd = app.add_subcommand("probe", "Evaluate functionals on the initial state");
  probe_cmd->add_option("config", opt.config_path)->required();
  add_common(probe_cmd);

  auto* print_cmd = app.add_subcommand("print-config", "Print the effective configuration");
  print_cmd->add_option("config", opt.config_path)->required();
  print_cmd->add_option("--set", opt.overrides, "Override a config key, key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return advance(opt, false);
    if (*resume_cmd) return advance(opt, true);
    if (*cross_cmd) return crosscheck(opt);
    if (*probe_cmd) return probe(opt);
    if (*print_cmd) return print_config(opt);
  } catch (const Failure& f) {
    if (*pcf_last_error()) std::fprintf(stderr, "error: %s\n", pcf_last_error());
    return f.status;
  }
  return 1;
}
