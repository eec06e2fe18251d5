#pragma once

// Scenario files: line-oriented `section.key = value`, '#' starts a comment.

#include <cstdint>
#include <string>
#include <vector>

#include "pcflow/flow.hpp"

namespace pcflow {

struct GeometryBlock {
  GeometryKind kind = GeometryKind::Torus;
  int nx = 256;
  int ny = 256;
  double length = 0.0;  // required for tori
  std::vector<CosineMode> sigma0_modes;
  int nmu = 512;

  friend bool operator==(const GeometryBlock&, const GeometryBlock&) = default;
};

enum class InitialKind { Zero, Modes, Polynomial, RandomSmooth };

struct InitialBlock {
  InitialKind kind = InitialKind::Zero;
  std::vector<CosineMode> modes;       // torus cosines
  std::vector<double> coefficients;    // sphere: Σ c_k μ^k
  std::uint64_t seed = 1;
  int max_mode = 8;
  double decay = 1.5;
  double target_sup_f = 0.05;

  friend bool operator==(const InitialBlock&, const InitialBlock&) = default;
};

struct OutputBlock {
  std::string path = "pcflow_out";
  bool emit_fields = false;

  friend bool operator==(const OutputBlock&, const OutputBlock&) = default;
};

struct ScenarioConfig {
  GeometryBlock geometry;
  InitialBlock initial;
  FlowConfig flow;  // output.record_every and output.p_list land here
  OutputBlock output;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Every key with its effective value; parse_config(to_text(c)) == c.
std::string to_text(const ScenarioConfig& config);

GeometryPtr make_geometry(const GeometryBlock& block);

// Initial potential. random_smooth data is rescaled by bisection until
// sup|F| matches target_sup_f to 1e-6 relative.
ScalarField make_initial(const Geometry& geom, const InitialBlock& block);

}  // namespace pcflow
