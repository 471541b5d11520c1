#pragma once

// Artifact I/O: JSON headers with raw little-endian float64 sidecars for
// arrays, CSV profiles for plotting, and deterministic JSON rendering (every
// floating-point value is normalized through a fixed %.12e round-trip so two
// runs of the same config produce byte-identical reports).

#include <cstdint>
#include <string>

#include "json.hpp"

#include "gwf/gabormatrix.hpp"
#include "gwf/modspace.hpp"
#include "gwf/stft.hpp"
#include "gwf/wavefront.hpp"

namespace gwf {

std::string format_sci(double v);  // %.12e

// FNV-1a 64-bit over raw bytes; used for config hashes in manifests.
std::uint64_t fnv1a64(const std::string& bytes);

// Doubles normalized to 1e-12 precision; non-finite values become strings.
nlohmann::json json_real(double v);

// 2-space indent, trailing newline, keys in lexicographic order.
std::string dump_json(const nlohmann::json& j);

// path_base.json header + path_base.f64 sidecar (interleaved re, im).
void save_signal(const SampledSignal& f, const std::string& path_base);
SampledSignal load_signal(const std::string& path_base);

// Evolution snapshot: same layout as save_signal plus a "t" tag.
void save_snapshot(const SampledSignal& f, double t,
                   const std::string& path_base);

// Header with grid, lattice axes and window label; values row-major over
// (x, xi), interleaved re, im.
void save_tfarray(const TFArray& F, const std::string& path_base);
TFArray load_tfarray(const std::string& path_base);

// Header with grid, t, w lattice, z axes and flagged rows; values row-major
// over (w, z), interleaved re, im.
void save_gabor_matrix(const GaborMatrixSample& s, const std::string& path_base);

// rows x cols numeric CSV with a header line.
void write_csv(const std::string& path,
               const std::vector<std::string>& columns, const RMat& rows);

nlohmann::json wf_to_json(const WFEstimate& est);
nlohmann::json decay_fit_to_json(const DecayFit& fit);
nlohmann::json envelope_fit_to_json(const EnvelopeFit& fit);

}  // namespace gwf
