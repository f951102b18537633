#pragma once

#include <string>

#include "qpair/records.hpp"
#include "qpair/source.hpp"

namespace qpair {

// Count-data CSV, header:
//   theta_a_deg,qwp_a_deg,theta_b_deg,qwp_b_deg,coinc,singles_a,singles_b,duration_s
// An empty qwp field means "no QWP".  Parse errors carry line/column;
// schema violations (negative counts, non-positive duration) carry the line.
std::vector<CoincidenceRecord> read_counts_csv(const std::string& path);
void write_counts_csv(std::span<const CoincidenceRecord> records, const std::string& path);

// JSON mirror of the CSV schema: {"records":[{...same fields...}]}; qwp
// fields are null when absent.
std::vector<CoincidenceRecord> read_counts_json(const std::string& path);
void write_counts_json(std::span<const CoincidenceRecord> records, const std::string& path);

// Correlation-curve JSON adds "fixed_arm" ("A"|"B") to the same per-record
// fields.
CorrelationCurve read_curve_json(const std::string& path);
void write_curve_json(std::span<const CoincidenceRecord> records, char fixed_arm,
                      const std::string& path);

// Plottable curve export: theta_deg,rate_hz,rate_err_hz rows.
void write_curve_csv(const CorrelationCurve& curve, const std::string& path);

// Density-matrix JSON: {"dim":4, "re":[[...]x4], "im":[[...]x4],
// "basis":"HH,HV,VH,VV"}.  The reader accepts raw (non-physical) matrices;
// callers decide whether to project.
Mat4 read_density_json(const std::string& path);
void write_density_json(const Mat4& rho, const std::string& path);

// Source-parameter JSON config; unknown keys are rejected to catch typos.
SourceParams read_source_json(const std::string& path);
void write_source_json(const SourceParams& params, const std::string& path);

// FNV-1a 64-bit content hash, hex-encoded; used for report provenance.
std::string file_hash_hex(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace qpair
