#include "gwf/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gwf {
namespace {

using nlohmann::json;

// Sidecar payloads are raw float64, interleaved (re, im). The host is assumed
// little-endian; the headers carry enough metadata to validate sizes on load.

void write_raw(const std::string& path, const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write: " + path);
}

std::vector<double> read_raw(const std::string& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(double))
    throw std::runtime_error("sidecar size mismatch: " + path);
  std::vector<double> data(count);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("short read: " + path);
  return data;
}

json write_header(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << dump_json(j);
  return j;
}

json read_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  json j;
  in >> j;
  return j;
}

json real_array(const RVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_real(v[i]));
  return a;
}

RVec array_real(const json& a) {
  RVec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json json_real(double v) {
  if (!std::isfinite(v)) {
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  }
  return std::stod(format_sci(v));
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void save_signal(const SampledSignal& f, const std::string& path_base) {
  json header;
  header["n_points"] = f.grid.n_points;
  header["extent"] = json_real(f.grid.extent);
  header["label"] = f.label;
  write_header(path_base + ".json", header);

  std::vector<double> raw(2 * static_cast<std::size_t>(f.values.size()));
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    raw[2 * i] = f.values[i].real();
    raw[2 * i + 1] = f.values[i].imag();
  }
  write_raw(path_base + ".f64", raw);
}

void save_snapshot(const SampledSignal& f, double t,
                   const std::string& path_base) {
  save_signal(f, path_base);
  json header = read_header(path_base + ".json");
  header["t"] = json_real(t);
  write_header(path_base + ".json", header);
}

SampledSignal load_signal(const std::string& path_base) {
  const json header = read_header(path_base + ".json");
  SampledSignal f;
  f.grid.n_points = header.at("n_points").get<int>();
  f.grid.extent = header.at("extent").get<double>();
  f.label = header.at("label").get<std::string>();
  if (f.grid.n_points <= 0 || f.grid.extent <= 0)
    throw std::runtime_error("invalid signal header: " + path_base);

  const auto raw =
      read_raw(path_base + ".f64", 2 * static_cast<std::size_t>(f.grid.n_points));
  f.values.resize(f.grid.n_points);
  for (int i = 0; i < f.grid.n_points; ++i)
    f.values[i] = cd(raw[2 * i], raw[2 * i + 1]);
  return f;
}

void save_tfarray(const TFArray& F, const std::string& path_base) {
  json header;
  header["n_points"] = F.grid.n_points;
  header["extent"] = json_real(F.grid.extent);
  header["window_label"] = F.window_label;
  header["x_points"] = real_array(F.lattice.x_points);
  header["xi_points"] = real_array(F.lattice.xi_points);
  write_header(path_base + ".json", header);

  const Eigen::Index rows = F.values.rows(), cols = F.values.cols();
  std::vector<double> raw(2 * static_cast<std::size_t>(rows * cols));
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      raw[p++] = F.values(i, j).real();
      raw[p++] = F.values(i, j).imag();
    }
  write_raw(path_base + ".f64", raw);
}

TFArray load_tfarray(const std::string& path_base) {
  const json header = read_header(path_base + ".json");
  TFArray F;
  F.grid.n_points = header.at("n_points").get<int>();
  F.grid.extent = header.at("extent").get<double>();
  F.window_label = header.at("window_label").get<std::string>();
  F.lattice.x_points = array_real(header.at("x_points"));
  F.lattice.xi_points = array_real(header.at("xi_points"));

  const Eigen::Index rows = F.lattice.x_points.size();
  const Eigen::Index cols = F.lattice.xi_points.size();
  const auto raw = read_raw(path_base + ".f64",
                            2 * static_cast<std::size_t>(rows * cols));
  F.values.resize(rows, cols);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      F.values(i, j) = cd(raw[p], raw[p + 1]);
      p += 2;
    }
  return F;
}

void save_gabor_matrix(const GaborMatrixSample& s,
                       const std::string& path_base) {
  json header;
  header["n_points"] = s.grid.n_points;
  header["extent"] = json_real(s.grid.extent);
  header["t"] = json_real(s.t);
  header["window_label"] = s.window_label;
  json wl = json::array();
  for (const auto& w : s.w_lattice)
    wl.push_back(json::array({json_real(w.x), json_real(w.xi)}));
  header["w_lattice"] = std::move(wl);
  header["z_x_points"] = real_array(s.z_x_axis);
  header["z_xi_points"] = real_array(s.z_xi_axis);
  header["flagged_rows"] = s.flagged_rows;
  write_header(path_base + ".json", header);

  const Eigen::Index rows = s.values.rows(), cols = s.values.cols();
  std::vector<double> raw(2 * static_cast<std::size_t>(rows * cols));
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      raw[p++] = s.values(i, j).real();
      raw[p++] = s.values(i, j).imag();
    }
  write_raw(path_base + ".f64", raw);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& columns, const RMat& rows) {
  if (static_cast<Eigen::Index>(columns.size()) != rows.cols())
    throw std::invalid_argument("csv header width does not match data");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t j = 0; j < columns.size(); ++j)
    out << (j ? "," : "") << columns[j];
  out << "\n";
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
      out << (j ? "," : "") << format_sci(rows(i, j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

nlohmann::json wf_to_json(const WFEstimate& est) {
  json j;
  j["r"] = json_real(est.r_param);
  j["p"] = json_real(est.p_param);
  j["inner_radius"] = json_real(est.inner_radius);
  j["R_max"] = json_real(est.R_max);
  j["n_bins"] = static_cast<int>(est.bins.size());
  j["flags"] = est.flags;
  json bins = json::array();
  for (const auto& b : est.bins) {
    json bj;
    bj["angle"] = json_real(b.angle);
    bj["score"] = json_real(b.score);
    bj["exponent_hat"] = json_real(b.exponent_hat);
    bj["in_wf"] = b.in_wf;
    bins.push_back(std::move(bj));
  }
  j["bins"] = std::move(bins);
  j["in_bins"] = est.in_bins();
  json arcs = json::array();
  for (const auto& [a, b] : est.arcs()) arcs.push_back(json::array({a, b}));
  j["arcs"] = std::move(arcs);
  return j;
}

nlohmann::json decay_fit_to_json(const DecayFit& fit) {
  json j;
  j["exponent_hat"] = json_real(fit.exponent_hat);
  j["constant_hat"] = json_real(fit.constant_hat);
  j["residual"] = json_real(fit.residual);
  j["m_min"] = fit.m_min;
  j["m_max"] = fit.m_max;
  j["superpolynomial"] = fit.superpolynomial;
  j["shell_max"] = real_array(fit.shell_max);
  return j;
}

nlohmann::json envelope_fit_to_json(const EnvelopeFit& fit) {
  json j;
  j["s_hat"] = json_real(fit.s_hat);
  j["C_hat"] = json_real(fit.C_hat);
  j["violations"] = fit.violations;
  j["superpolynomial"] = fit.superpolynomial;
  j["residual"] = json_real(fit.residual);
  j["m_min"] = fit.m_min;
  j["shell_max"] = real_array(fit.shell_max);
  return j;
}

}  // namespace gwf
