#pragma once

// Binary checkpoints and CSV trace output.
//
// Checkpoint layout (little-endian):
//   "PCF1" | version u32 | kind u8 | torus: nx u64, ny u64, length f64
//                                  | sphere: nmu u64
//   | time f64 | φ f64 × nodes (row-major, x fastest) | CRC32 u32
// The CRC covers every byte between the magic and the CRC field.

#include <cstdint>
#include <string>
#include <vector>

#include "pcflow/flow.hpp"

namespace pcflow {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  double time = 0.0;
  ScalarField phi;
};

std::vector<std::uint8_t> encode_checkpoint(const Geometry& geom, double time,
                                            std::span<const double> phi);
// Throws IoError on corruption and ValidationError when the stored grid
// does not match geom.
Checkpoint decode_checkpoint(const Geometry& geom, std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::string& path, const Geometry& geom, double time,
                      std::span<const double> phi);
Checkpoint read_checkpoint(const std::string& path, const Geometry& geom);

std::string csv_header(const std::vector<double>& p_list);
std::string csv_row(const TraceRecord& record);
void emit_csv(const std::vector<TraceRecord>& records, const std::vector<double>& p_list,
              const std::string& path);

// Formats a real so that it parses back to the same double.
std::string format_real(double v);

}  // namespace pcflow
