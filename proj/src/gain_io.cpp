#include "netlqg/gain_io.hpp"

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netlqg/layout.hpp"

namespace netlqg {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'Q', 'G', 'G', 'S', '1', '\n'};

void put_u32(std::string& b, std::uint32_t v) {
  for (int j = 0; j < 4; ++j) b.push_back(static_cast<char>((v >> (8 * j)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
  for (int j = 0; j < 8; ++j) b.push_back(static_cast<char>((v >> (8 * j)) & 0xff));
}

void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

struct Cursor {
  const std::string& bytes;
  std::size_t off = 0;

  void need(std::size_t n) const {
    if (off + n > bytes.size()) {
      throw std::runtime_error("gain container truncated at byte " + std::to_string(off));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int j = 0; j < 4; ++j) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + j])) << (8 * j);
    }
    off += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int j = 0; j < 8; ++j) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + j])) << (8 * j);
    }
    off += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

// Shortest exact decimal: 17 significant digits round-trip any double.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void hash_text(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
}

void hash_matrix(std::uint64_t& h, const Matrix& m) {
  hash_text(h, std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ":");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) hash_text(h, fmt(m(r, c)) + ",");
  }
}

}  // namespace

std::uint64_t spec_hash(const PlantSpec& plant, const NetworkSpec& network) {
  std::uint64_t h = 1469598103934665603ULL;
  hash_text(h, "plant.A;");
  hash_matrix(h, plant.A);
  for (const auto& b : plant.B) {
    hash_text(h, "plant.B;");
    hash_matrix(h, b);
  }
  hash_text(h, "plant.T;" + fmt(plant.T) + ";plant.N;" + std::to_string(plant.N) + ";");
  hash_text(h, "plant.Q_N;");
  hash_matrix(h, plant.Q_N);
  hash_text(h, "plant.Q_1;");
  hash_matrix(h, plant.Q_1);
  for (const auto& r : plant.R) {
    hash_text(h, "plant.R;");
    hash_matrix(h, r);
  }
  hash_text(h, "plant.x0;");
  hash_matrix(h, plant.x0);

  hash_text(h, "network.p;" + std::to_string(network.p) + ";");
  for (double v : network.delay_alpha) hash_text(h, "alpha;" + fmt(v) + ";");
  for (double v : network.p_sc) hash_text(h, "sc;" + fmt(v) + ";");
  for (double v : network.p_ca) hash_text(h, "ca;" + fmt(v) + ";");
  for (const auto& row : network.p_link) {
    for (double v : row) hash_text(h, "link;" + fmt(v) + ";");
  }
  hash_text(h, "mode;" + to_string(network.info_mode) + ";");
  return h;
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " +
                             std::strerror(err));
  }
}

void save_gains(const GainSchedule& schedule, const std::string& path) {
  schedule.validate();
  std::string b;
  b.append(kMagic, sizeof(kMagic));
  put_u32(b, schedule.mode == InfoMode::kPerfect ? 0u : 1u);
  put_u32(b, static_cast<std::uint32_t>(schedule.M));
  put_u32(b, static_cast<std::uint32_t>(schedule.K));
  put_u32(b, static_cast<std::uint32_t>(schedule.p));
  put_u32(b, static_cast<std::uint32_t>(schedule.N));
  put_u64(b, static_cast<std::uint64_t>(schedule.n_samples));
  put_u64(b, schedule.seed);
  put_u64(b, schedule.spec_hash);
  for (double v : schedule.sigma) put_f64(b, v);
  for (const auto& row : schedule.pi) {
    for (double v : row) put_f64(b, v);
  }
  for (int i = 0; i < schedule.p; ++i) {
    for (int k = 0; k < schedule.N; ++k) {
      const Matrix& L = schedule.L[i][k];
      for (Eigen::Index r = 0; r < L.rows(); ++r) {
        for (Eigen::Index c = 0; c < L.cols(); ++c) put_f64(b, L(r, c));
      }
    }
  }
  atomic_write_file(path, b);
}

GainSchedule load_gains(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open gain container: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a gain container: " + path);
  }
  Cursor cur{bytes, sizeof(kMagic)};

  GainSchedule s;
  const std::uint32_t mode = cur.u32();
  if (mode > 1) throw std::runtime_error("gain container: unknown mode " + std::to_string(mode));
  s.mode = mode == 0 ? InfoMode::kPerfect : InfoMode::kImperfect;
  s.M = static_cast<int>(cur.u32());
  s.K = static_cast<int>(cur.u32());
  s.p = static_cast<int>(cur.u32());
  s.N = static_cast<int>(cur.u32());
  const std::uint64_t n_samples = cur.u64();
  if (n_samples > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw std::runtime_error("gain container: n_samples out of range");
  }
  s.n_samples = static_cast<int>(n_samples);
  s.seed = cur.u64();
  s.spec_hash = cur.u64();
  if (s.M < 1 || s.K < 1 || s.p < 1 || s.N < 1) {
    throw std::runtime_error("gain container: bad dimensions");
  }

  s.sigma.resize(s.p);
  for (int i = 0; i < s.p; ++i) s.sigma[i] = cur.f64();
  s.pi.assign(s.p, std::vector<double>(s.p, 0.0));
  for (int i = 0; i < s.p; ++i) {
    for (int m = 0; m < s.p; ++m) s.pi[i][m] = cur.f64();
  }

  s.L.assign(s.p, std::vector<Matrix>(s.N));
  s.A.assign(s.p, std::vector<Matrix>(s.N));
  s.alpha.resize(s.p);
  for (int i = 0; i < s.p; ++i) s.alpha[i].resize(s.N);
  for (int i = 0; i < s.p; ++i) {
    for (int k = 0; k < s.N; ++k) {
      const AugmentedLayout layout{s.M, s.K, s.p, k};
      Matrix L(s.K, layout.dim());
      for (Eigen::Index r = 0; r < L.rows(); ++r) {
        for (Eigen::Index c = 0; c < L.cols(); ++c) L(r, c) = cur.f64();
      }
      s.L[i][k] = L;
      s.A[i][k] = -L.leftCols(s.M);
      s.alpha[i][k].assign(s.p, std::vector<Matrix>(k));
      for (int m = 0; m < s.p; ++m) {
        for (int n = 1; n <= k; ++n) {
          s.alpha[i][k][m][n - 1] = -L.block(0, layout.history_offset(m, n), s.K, s.K);
        }
      }
    }
  }
  if (cur.off != bytes.size()) {
    throw std::runtime_error("gain container: " +
                             std::to_string(bytes.size() - cur.off) +
                             " trailing bytes in " + path);
  }
  s.validate();
  return s;
}

void write_gain_csv(const GainSchedule& schedule, const std::string& path) {
  schedule.validate();
  std::ostringstream os;
  os << "i,k";
  for (int r = 1; r <= schedule.K; ++r) {
    for (int c = 1; c <= schedule.M; ++c) os << ",A_" << r << "_" << c;
  }
  os << "\n";
  for (int i = 0; i < schedule.p; ++i) {
    for (int k = 0; k < schedule.N; ++k) {
      os << (i + 1) << "," << k;
      const Matrix& A = schedule.A[i][k];
      for (Eigen::Index r = 0; r < A.rows(); ++r) {
        for (Eigen::Index c = 0; c < A.cols(); ++c) os << "," << fmt(A(r, c));
      }
      os << "\n";
    }
  }
  atomic_write_file(path, os.str());
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ostringstream os;
  os << "k";
  for (int c = 1; c <= trace.M; ++c) os << ",x_" << c;
  for (int i = 1; i <= trace.p; ++i) {
    for (int c = 1; c <= trace.K; ++c) os << ",u_" << i << "_" << c;
  }
  for (int i = 1; i <= trace.p; ++i) {
    for (int c = 1; c <= trace.K; ++c) os << ",uh_" << i << "_" << c;
  }
  for (int i = 1; i <= trace.p; ++i) os << ",theta_sc_" << i;
  for (int i = 1; i <= trace.p; ++i) os << ",theta_ca_" << i;
  for (int i = 1; i <= trace.p; ++i) os << ",theta_" << i;
  for (int i = 1; i <= trace.p; ++i) os << ",tau_" << i;
  os << "\n";

  const int blank_cols = 2 * trace.p * trace.K + 4 * trace.p;
  for (int k = 0; k <= trace.N; ++k) {
    os << k;
    for (int c = 0; c < trace.M; ++c) os << "," << fmt(trace.x[k](c));
    if (k == trace.N) {
      for (int c = 0; c < blank_cols; ++c) os << ",";
      os << "\n";
      break;
    }
    for (int i = 0; i < trace.p; ++i) {
      for (int c = 0; c < trace.K; ++c) os << "," << fmt(trace.u[i][k](c));
    }
    for (int i = 0; i < trace.p; ++i) {
      for (int c = 0; c < trace.K; ++c) os << "," << fmt(trace.u_applied[i][k](c));
    }
    for (int i = 0; i < trace.p; ++i) {
      os << "," << static_cast<int>(trace.realization.theta_sc[k][i]);
    }
    for (int i = 0; i < trace.p; ++i) {
      os << "," << static_cast<int>(trace.realization.theta_ca[k][i]);
    }
    for (int i = 0; i < trace.p; ++i) {
      os << "," << static_cast<int>(trace.realization.theta[k][i]);
    }
    for (int i = 0; i < trace.p; ++i) {
      os << "," << fmt(trace.realization.tau[k][i]);
    }
    os << "\n";
  }
  atomic_write_file(path, os.str());
}

void write_summary_csv(const std::vector<CostSummary>& summaries,
                       const std::string& path) {
  std::ostringstream os;
  os << "schedule,controller,mean,std_error,runs\n";
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      os << s.name << "," << (i + 1) << "," << fmt(s.mean[i]) << ","
         << fmt(s.std_error[i]) << "," << s.runs << "\n";
    }
    os << s.name << ",joint," << fmt(s.joint_mean) << "," << fmt(s.joint_std_error)
       << "," << s.runs << "\n";
  }
  atomic_write_file(path, os.str());
}

}  // namespace netlqg
