#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "qpair/chsh.hpp"
#include "qpair/source.hpp"
#include "qpair/tomography.hpp"

namespace qpair {

inline constexpr const char* kVersion = "0.1.0";

// Seed-splitting stage ids; every stochastic consumer uses
// derive_seed(seed, {stage, index...}) so partial re-runs and parallel
// execution agree with the sequential result.
enum : std::uint64_t {
  kStageSimulate = 0,
  kStageVisibility = 1,
  kStageChsh = 2,
};

// Per-basis visibility block: min/max and sinusoid-fit estimates, Poisson
// error bars, and (when trials >= 2) bootstrap cross-checks.
nlohmann::ordered_json visibility_block_json(const CorrelationCurve& curve, int bootstrap_trials,
                                             std::uint64_t seed);

// CHSH block: S, propagated and Monte-Carlo delta_s (mc_trials >= 100
// enables the resampling), violation significance, and the E table.
nlohmann::ordered_json chsh_block_json(std::span<const CoincidenceRecord> records,
                                       const ChshAngles& angles, int mc_trials, std::uint64_t seed,
                                       int threads);

// Tomography block: reconstruction metrics against the target plus
// convergence diagnostics and the reconstructed matrix.
nlohmann::ordered_json tomography_block_json(const TomographyResult& result,
                                             const TomographySet& set, Likelihood likelihood,
                                             const std::string& target_name, const Mat4& target);

// State metrics + spectrum for a standalone matrix.
nlohmann::ordered_json metrics_block_json(const Mat4& rho, const Mat4& target,
                                          const std::string& target_name);

nlohmann::ordered_json brightness_block_json(const MeasuredRates& rates, const SourceParams& src,
                                             PairCorrection correction,
                                             const std::string& rates_origin);

nlohmann::ordered_json density_json(const Mat4& rho);

struct ReportOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  bool stamp = false;  // add a wall-clock timestamp to provenance (off by default
                       // so identical runs are byte-identical)
};

// Full characterization pipeline (visibility -> CHSH -> tomography ->
// metrics -> brightness) over a bundle config.
//
// The bundle JSON references the input files:
//   {
//     "source": "source.json",
//     "visibility": {"hv": "curve_hv.json", "pm": "curve_pm.json",
//                    "bootstrap_trials": 1000},
//     "chsh": {"counts": "chsh.csv", "angles": [0, 45, 22.5, 67.5],
//              "mc_trials": 1000},
//     "tomography": {"counts": "tomo.csv", "set": "james16",
//                    "likelihood": "poisson", "target": "psi-minus"},
//     "brightness": {"correction": "coupling-ratio", "rates": "model"}
//   }
// Relative paths resolve against QPAIR_FIXTURE_DIR when set, otherwise
// against the config file's directory.  Stage failures are collected and
// raised together, each attributed to its stage.
nlohmann::ordered_json run_full_characterization(const std::string& config_path,
                                                 const ReportOptions& opts);

// Plain-text rendering of the report's summary table.
std::string render_report_text(const nlohmann::ordered_json& report);

}  // namespace qpair
