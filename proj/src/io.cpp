#include "pcflow/io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pcflow/error.hpp"

namespace pcflow {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'F', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t u64() { return read(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(read(1)); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t offset() const { return pos_; }

 private:
  std::uint64_t read(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::IoError, "checkpoint truncated");
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < n; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Geometry& geom, double time,
                                            std::span<const double> phi) {
  geom.check_shape(phi);
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  out.push_back(static_cast<std::uint8_t>(geom.kind()));
  if (const auto* torus = dynamic_cast<const TorusGeometry*>(&geom)) {
    put_u64(out, static_cast<std::uint64_t>(torus->nx()));
    put_u64(out, static_cast<std::uint64_t>(torus->ny()));
    put_f64(out, torus->length());
  } else {
    put_u64(out, static_cast<std::uint64_t>(dynamic_cast<const SphereGeometry&>(geom).nmu()));
  }
  put_f64(out, time);
  for (double v : phi) put_f64(out, v);
  put_u32(out, crc_of(std::span(out).subspan(sizeof kMagic)));
  return out;
}

Checkpoint decode_checkpoint(const Geometry& geom, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 4 ||
      std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::IoError, "not a checkpoint (bad magic)");
  }
  const std::size_t body_end = bytes.size() - 4;
  Reader tail(bytes.subspan(body_end));
  if (tail.u32() != crc_of(bytes.subspan(sizeof kMagic, body_end - sizeof kMagic))) {
    throw Error(ErrorKind::IoError, "checkpoint CRC mismatch");
  }
  Reader in(bytes.subspan(sizeof kMagic, body_end - sizeof kMagic));
  if (const auto version = in.u32(); version != kCheckpointVersion) {
    throw Error(ErrorKind::IoError, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto kind = static_cast<GeometryKind>(in.u8());
  if (kind != geom.kind()) throw ValidationError("checkpoint", "geometry kind differs from config");
  if (const auto* torus = dynamic_cast<const TorusGeometry*>(&geom)) {
    const auto nx = in.u64();
    const auto ny = in.u64();
    const double length = in.f64();
    if (nx != static_cast<std::uint64_t>(torus->nx()) ||
        ny != static_cast<std::uint64_t>(torus->ny()) || length != torus->length()) {
      throw ValidationError("checkpoint", "torus grid differs from config");
    }
  } else {
    const auto nmu = in.u64();
    if (nmu != static_cast<std::uint64_t>(dynamic_cast<const SphereGeometry&>(geom).nmu())) {
      throw ValidationError("checkpoint", "sphere grid differs from config");
    }
  }
  Checkpoint cp;
  cp.time = in.f64();
  cp.phi.resize(geom.size());
  for (double& v : cp.phi) v = in.f64();
  if (in.offset() != body_end - sizeof kMagic) {
    throw Error(ErrorKind::IoError, "checkpoint has trailing bytes");
  }
  return cp;
}

void write_checkpoint(const std::string& path, const Geometry& geom, double time,
                      std::span<const double> phi) {
  const auto bytes = encode_checkpoint(geom, time, phi);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path, const Geometry& geom) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(geom, bytes);
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
std::string exponent_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}
}  // namespace

std::string csv_header(const std::vector<double>& p_list) {
  std::string h =
      "t,dt,sup_F,inf_F,sup_P,entropy,j_neg_ric,k_energy,i_functional,dissipation,"
      "calabi_energy,rho_min,volume,poisson_residual";
  for (double p : p_list) {
    h += ",grad_F_Lp" + exponent_label(p);
    h += ",trace0_Lp" + exponent_label(p);
  }
  return h;
}

std::string csv_row(const TraceRecord& r) {
  std::string row;
  for (double v : {r.time, r.dt, r.sup_f, r.inf_f, r.sup_p, r.entropy, r.j_neg_ric, r.k_energy,
                   r.i_functional, r.dissipation, r.calabi_energy, r.rho_min, r.volume,
                   r.poisson_residual}) {
    if (!row.empty()) row += ',';
    row += format_real(v);
  }
  for (std::size_t i = 0; i < r.lp_grad_f.size(); ++i) {
    row += ',' + format_real(r.lp_grad_f[i].second);
    row += ',' + format_real(r.lp_trace0[i].second);
  }
  return row;
}

void emit_csv(const std::vector<TraceRecord>& records, const std::vector<double>& p_list,
              const std::string& path) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "trajectory has no records");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << csv_header(p_list) << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace pcflow
