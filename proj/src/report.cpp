#include "qpair/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpair/io.hpp"
#include "qpair/rng.hpp"
#include "qpair/visibility.hpp"

namespace qpair {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string resolve_input(const std::string& config_path, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p.string();
  if (const char* dir = std::getenv("QPAIR_FIXTURE_DIR"); dir && *dir)
    return (fs::path(dir) / p).string();
  return (fs::path(config_path).parent_path() / p).string();
}

ordered_json provenance_entry(const std::string& path) {
  ordered_json j;
  j["path"] = path;
  j["fnv64"] = file_hash_hex(path);
  return j;
}

}  // namespace

nlohmann::ordered_json density_json(const Mat4& rho) {
  ordered_json j;
  j["dim"] = 4;
  auto rows = [&](auto pick) {
    ordered_json rs = ordered_json::array();
    for (int r = 0; r < 4; ++r) {
      ordered_json row = ordered_json::array();
      for (int c = 0; c < 4; ++c) row.push_back(pick(rho(r, c)));
      rs.push_back(row);
    }
    return rs;
  };
  j["re"] = rows([](Cplx v) { return v.real(); });
  j["im"] = rows([](Cplx v) { return v.imag(); });
  j["basis"] = "HH,HV,VH,VV";
  return j;
}

nlohmann::ordered_json visibility_block_json(const CorrelationCurve& curve, int bootstrap_trials,
                                             std::uint64_t seed) {
  ordered_json j;
  j["fixed_arm"] = std::string(1, curve.fixed_arm);
  j["fixed_angle_deg"] = curve.fixed_setting.pol_deg;
  j["n_samples"] = curve.samples.size();
  j["span_deg"] = curve.span_deg();

  VisibilityEstimate mm = visibility_minmax(curve);
  j["minmax"] = {{"v", mm.v},
                 {"dv_poisson", mm.dv},
                 {"c_max_hz", mm.c_max_hz},
                 {"c_min_hz", mm.c_min_hz}};

  bool have_fit = false;
  VisibilityFit fit;
  try {
    fit = visibility_fit(curve);
    have_fit = true;
    j["fit"] = {{"v", fit.v},
                {"dv_poisson", fit.dv},
                {"amplitude_hz", fit.amplitude_hz},
                {"amplitude_err_hz", fit.amplitude_err_hz},
                {"offset_hz", fit.offset_hz},
                {"offset_err_hz", fit.offset_err_hz},
                {"phase_deg", fit.phase_deg},
                {"phase_err_deg", fit.phase_err_deg},
                {"degenerate", fit.degenerate}};
  } catch (const Error& e) {
    j["fit"] = {{"error", e.what()}};
  }

  if (bootstrap_trials >= 2) {
    j["minmax"]["dv_bootstrap"] =
        visibility_bootstrap(curve, VisibilityMethod::MinMax, bootstrap_trials, derive_seed(seed, {0}));
    if (have_fit)
      j["fit"]["dv_bootstrap"] =
          visibility_bootstrap(curve, VisibilityMethod::Fit, bootstrap_trials, derive_seed(seed, {1}));
  }

  j["v"] = have_fit ? fit.v : mm.v;
  j["dv"] = have_fit ? fit.dv : mm.dv;
  return j;
}

nlohmann::ordered_json chsh_block_json(std::span<const CoincidenceRecord> records,
                                       const ChshAngles& angles, int mc_trials, std::uint64_t seed,
                                       int threads) {
  ChshResult res = chsh_s(records, angles);
  ordered_json block;
  block["angles_deg"] = {angles.alpha, angles.alpha_prime, angles.beta, angles.beta_prime};
  block["s"] = res.s;
  block["abs_s"] = std::abs(res.s);
  block["delta_s"] = res.delta_s;
  if (mc_trials >= 100) {
    block["delta_s_mc"] = chsh_sigma_montecarlo(records, angles, mc_trials, seed, threads);
    block["mc_trials"] = mc_trials;
  }
  block["n_sigma"] = res.n_sigma;
  block["n_sigma_floor"] = static_cast<long long>(std::floor(res.n_sigma));
  ordered_json etab = ordered_json::array();
  for (const auto& e : res.e_table)
    etab.push_back({{"alpha_deg", e.alpha_deg}, {"beta_deg", e.beta_deg}, {"e", e.e}, {"de", e.de}});
  block["e_table"] = etab;
  return block;
}

nlohmann::ordered_json tomography_block_json(const TomographyResult& result,
                                             const TomographySet& set, Likelihood likelihood,
                                             const std::string& target_name, const Mat4& target) {
  TomoReport tr = tomography_report(result, target);
  ordered_json block;
  block["set"] = set.name;
  block["likelihood"] = likelihood_name(likelihood);
  block["target"] = target_name;
  block["metrics"] = {{"concurrence", tr.metrics.concurrence},
                      {"fidelity_to_target", tr.metrics.fidelity_to_target},
                      {"purity", tr.metrics.purity}};
  block["eigenvalues"] = {tr.eigenvalues(0), tr.eigenvalues(1), tr.eigenvalues(2), tr.eigenvalues(3)};
  block["converged"] = tr.converged;
  block["iterations"] = tr.iterations;
  block["gradient_norm"] = result.gradient_norm;
  block["neg_log_likelihood"] = tr.neg_log_likelihood;
  block["intensity_hz"] = tr.intensity_hz;
  block["rho_ml"] = density_json(result.rho_ml);
  return block;
}

nlohmann::ordered_json metrics_block_json(const Mat4& rho, const Mat4& target,
                                          const std::string& target_name) {
  StateMetrics m = state_metrics(rho, target);
  Eigen::SelfAdjointEigenSolver<Mat4> es(rho, Eigen::EigenvaluesOnly);
  Eigen::Vector4d lam = es.eigenvalues().reverse();
  ordered_json j;
  j["target"] = target_name;
  j["concurrence"] = m.concurrence;
  j["fidelity_to_target"] = m.fidelity_to_target;
  j["purity"] = m.purity;
  j["eigenvalues"] = {lam(0), lam(1), lam(2), lam(3)};
  return j;
}

nlohmann::ordered_json brightness_block_json(const MeasuredRates& rates, const SourceParams& src,
                                             PairCorrection correction,
                                             const std::string& rates_origin) {
  BrightnessReport br = brightness_report(rates, src, correction);
  ordered_json block;
  block["rates_origin"] = rates_origin;
  block["s_c_hz"] = rates.s_c_hz;
  block["s_i_hz"] = rates.s_i_hz;
  block["s_s_hz"] = rates.s_s_hz;
  block["coupling_ratio"] = br.eta_c;
  block["delta_lambda_nm"] = br.delta_lambda_nm;
  block["pairs_generated_hz"] = br.pairs_generated_hz;
  block["pump_power_mw"] = src.pump_power_mw;
  block["brightness_per_mw_s"] = br.brightness;
  block["spectral_brightness_per_mw_s_nm"] = br.spectral_brightness;
  block["correction"] = pair_correction_name(br.correction);
  return block;
}

nlohmann::ordered_json run_full_characterization(const std::string& config_path,
                                                 const ReportOptions& opts) {
  nlohmann::json cfg = nlohmann::json::parse(read_text_file(config_path), nullptr, true, true);

  ordered_json report;
  report["schema"] = "qpair-report/1";
  ordered_json prov;
  prov["version"] = kVersion;
  prov["seed"] = opts.seed;
  prov["inputs"] = ordered_json::object();
  if (opts.stamp) {
    auto now = std::chrono::system_clock::now();
    prov["generated_at"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  }

  std::vector<std::string> failures;
  auto stage = [&failures](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      failures.push_back(std::string(name) + ": " + e.what());
    }
  };

  SourceParams src;
  stage("source", [&] {
    if (!cfg.contains("source")) raise(Err::Schema, "bundle config missing 'source'");
    std::string path = resolve_input(config_path, cfg["source"].get<std::string>());
    src = read_source_json(path);
    prov["inputs"]["source"] = provenance_entry(path);
  });
  bool have_src = failures.empty();

  stage("visibility", [&] {
    if (!cfg.contains("visibility")) raise(Err::Schema, "bundle config missing 'visibility'");
    const auto& vcfg = cfg["visibility"];
    int btrials = vcfg.value("bootstrap_trials", 1000);
    ordered_json block;
    std::uint64_t basis_index = 0;
    for (const char* basis : {"hv", "pm"}) {
      if (!vcfg.contains(basis))
        raise(Err::Schema, std::string("visibility config missing '") + basis + "'");
      std::string path = resolve_input(config_path, vcfg[basis].get<std::string>());
      CorrelationCurve curve = read_curve_json(path);
      prov["inputs"][std::string("curve_") + basis] = provenance_entry(path);
      block[basis] = visibility_block_json(curve, btrials,
                                           derive_seed(opts.seed, {kStageVisibility, basis_index}));
      ++basis_index;
    }
    report["visibility"] = block;
  });

  stage("chsh", [&] {
    if (!cfg.contains("chsh")) raise(Err::Schema, "bundle config missing 'chsh'");
    const auto& ccfg = cfg["chsh"];
    std::string path = resolve_input(config_path, ccfg.at("counts").get<std::string>());
    auto records = read_counts_csv(path);
    prov["inputs"]["chsh_counts"] = provenance_entry(path);
    ChshAngles angles = ChshAngles::canonical();
    if (ccfg.contains("angles")) {
      auto a = ccfg["angles"];
      if (!a.is_array() || a.size() != 4) raise(Err::Schema, "chsh angles must be [a, a', b, b']");
      angles = {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
    }
    report["chsh"] = chsh_block_json(records, angles, ccfg.value("mc_trials", 1000),
                                     derive_seed(opts.seed, {kStageChsh}), opts.threads);
  });

  stage("tomography", [&] {
    if (!cfg.contains("tomography")) raise(Err::Schema, "bundle config missing 'tomography'");
    const auto& tcfg = cfg["tomography"];
    std::string path = resolve_input(config_path, tcfg.at("counts").get<std::string>());
    auto records = read_counts_csv(path);
    prov["inputs"]["tomo_counts"] = provenance_entry(path);
    TomographySet set = standard_set(tcfg.value("set", "james16"));
    MlOptions ml;
    ml.likelihood = likelihood_from_name(tcfg.value("likelihood", "poisson"));
    TomographyResult res = ml_reconstruct(records, set, ml);
    std::string target_name = tcfg.value("target", "psi-minus");
    Mat4 target = density_from_ket(bell_state(bell_from_name(target_name)));
    report["tomography"] = tomography_block_json(res, set, ml.likelihood, target_name, target);
  });

  stage("brightness", [&] {
    if (!have_src) raise(Err::Schema, "source stage failed; cannot compute brightness");
    PairCorrection correction = PairCorrection::CouplingRatio;
    MeasuredRates rates = predicted_raw_rates(src);
    std::string rates_origin = "model";
    if (cfg.contains("brightness")) {
      const auto& bcfg = cfg["brightness"];
      if (bcfg.contains("correction"))
        correction = pair_correction_from_name(bcfg["correction"].get<std::string>());
      if (bcfg.contains("rates") && bcfg["rates"].is_object()) {
        rates.s_c_hz = bcfg["rates"].at("s_c_hz").get<double>();
        rates.s_i_hz = bcfg["rates"].at("s_i_hz").get<double>();
        rates.s_s_hz = bcfg["rates"].at("s_s_hz").get<double>();
        rates_origin = "measured";
      }
    }
    report["brightness"] = brightness_block_json(rates, src, correction, rates_origin);
  });

  if (!failures.empty()) {
    std::string all = "characterization failed in " + std::to_string(failures.size()) + " stage(s): ";
    for (std::size_t i = 0; i < failures.size(); ++i) {
      if (i) all += "; ";
      all += failures[i];
    }
    raise(Err::NumericalFailure, all);
  }

  // Table-2-style summary, value +/- uncertainty where one is defined
  ordered_json summary;
  summary["brightness_per_mw_s"] = report["brightness"]["brightness_per_mw_s"];
  summary["spectral_brightness_per_mw_s_nm"] = report["brightness"]["spectral_brightness_per_mw_s_nm"];
  summary["visibility_hv"] = {{"value", report["visibility"]["hv"]["v"]},
                              {"error", report["visibility"]["hv"]["dv"]}};
  summary["visibility_pm"] = {{"value", report["visibility"]["pm"]["v"]},
                              {"error", report["visibility"]["pm"]["dv"]}};
  summary["chsh_abs_s"] = {{"value", report["chsh"]["abs_s"]}, {"error", report["chsh"]["delta_s"]}};
  summary["concurrence"] = report["tomography"]["metrics"]["concurrence"];
  summary["fidelity"] = report["tomography"]["metrics"]["fidelity_to_target"];
  summary["purity"] = report["tomography"]["metrics"]["purity"];
  report["summary"] = summary;
  report["provenance"] = prov;
  return report;
}

std::string render_report_text(const nlohmann::ordered_json& report) {
  std::ostringstream os;
  auto line = [&os](const std::string& label, const std::string& value) {
    os << "  " << label;
    for (std::size_t i = label.size(); i < 34; ++i) os << ' ';
    os << value << '\n';
  };
  auto num = [](double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
  };
  const auto& sum = report.at("summary");
  os << "Output parameters of the entangled-photon source\n";
  os << "------------------------------------------------\n";
  line("Brightness (mW s)^-1", num(sum.at("brightness_per_mw_s").get<double>(), 5));
  line("Spectral brightness (mW s nm)^-1",
       num(sum.at("spectral_brightness_per_mw_s_nm").get<double>(), 5));
  line("V_H/V visibility", num(sum.at("visibility_hv").at("value").get<double>()) + " +/- " +
                               num(sum.at("visibility_hv").at("error").get<double>(), 2));
  line("V_+/- visibility", num(sum.at("visibility_pm").at("value").get<double>()) + " +/- " +
                               num(sum.at("visibility_pm").at("error").get<double>(), 2));
  line("Bell-CHSH |S|", num(sum.at("chsh_abs_s").at("value").get<double>()) + " +/- " +
                            num(sum.at("chsh_abs_s").at("error").get<double>(), 2));
  line("Concurrence", num(sum.at("concurrence").get<double>()));
  line("Fidelity", num(sum.at("fidelity").get<double>()));
  line("Purity", num(sum.at("purity").get<double>()));
  return os.str();
}

}  // namespace qpair
