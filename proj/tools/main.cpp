// qpair command-line front end.  Talks to the library exclusively through
// the C API in qpair.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpair.h"

namespace {

int exit_code_for(qp_status s) {
  switch (s) {
    case QP_OK:
      return 0;
    case QP_ERR_INVALID_ARGUMENT:
    case QP_ERR_INVALID_PARAMS:
    case QP_ERR_PARSE:
    case QP_ERR_SCHEMA:
    case QP_ERR_IO:
    case QP_ERR_UNKNOWN_SET:
    case QP_ERR_MISSING_SETTING:
    case QP_ERR_INSUFFICIENT_DATA:
    case QP_ERR_NONPOSITIVE_LENGTH:
    case QP_ERR_INFEASIBLE:
      return 2;  // validation
    default:
      return 3;  // numerical failure
  }
}

[[noreturn]] void fail(const std::string& where, qp_status s) {
  std::fprintf(stderr, "qpair: %s: %s (%s)\n", where.c_str(), qp_last_error(), qp_status_name(s));
  std::exit(exit_code_for(s));
}

void check(const std::string& where, qp_status s) {
  if (s != QP_OK) fail(where, s);
}

struct StringOut {
  char* ptr = nullptr;
  ~StringOut() { qp_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

using StatePtr = std::unique_ptr<qp_state, decltype(&qp_state_free)>;
using SourcePtr = std::unique_ptr<qp_source, decltype(&qp_source_free)>;
using RecordsPtr = std::unique_ptr<qp_records, decltype(&qp_records_free)>;
using TomoPtr = std::unique_ptr<qp_tomo, decltype(&qp_tomo_free)>;

StatePtr make_state(qp_state* p = nullptr) { return StatePtr(p, &qp_state_free); }
SourcePtr make_source(qp_source* p = nullptr) { return SourcePtr(p, &qp_source_free); }
RecordsPtr make_records(qp_records* p = nullptr) { return RecordsPtr(p, &qp_records_free); }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    if (!text.empty() && text.back() != '\n') std::fputc('\n', stdout);
    return;
  }
  std::FILE* f = std::fopen(out_path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "qpair: cannot open '%s' for writing\n", out_path.c_str());
    std::exit(2);
  }
  std::fwrite(text.data(), 1, text.size(), f);
  std::fputc('\n', f);
  std::fclose(f);
}

StatePtr load_target(const std::string& target, const std::string& target_file) {
  qp_state* t = nullptr;
  if (!target_file.empty()) {
    check("target", qp_state_load(target_file.c_str(), /*project=*/1, &t));
  } else {
    check("target", qp_state_bell(target.c_str(), &t));
  }
  return make_state(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled photon-pair source simulation and characterization"};
  app.set_version_flag("--version", qp_version());
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "Generate synthetic coincidence datasets");
  std::string sim_what, sim_source, sim_state, sim_out, sim_set = "james16", sim_format = "csv";
  std::vector<double> sim_angles = {0.0, 45.0, 22.5, 67.5};
  double sim_duration = 1.0, sim_fixed_angle = 0.0, sim_span = 360.0;
  std::string sim_fixed_arm = "A";
  int sim_points = 16;
  std::uint64_t sim_seed = 0;
  sim->add_option("--what", sim_what, "chsh | tomo | curve")->required();
  sim->add_option("--source", sim_source, "source-parameter JSON")->required();
  sim->add_option("--state", sim_state,
                  "density-matrix JSON overriding the source-model state (projected on load)");
  sim->add_option("--duration", sim_duration, "seconds per setting")->required();
  sim->add_option("--seed", sim_seed, "base RNG seed")->required();
  sim->add_option("--out", sim_out, "output file")->required();
  sim->add_option("--angles", sim_angles, "CHSH angles a,a',b,b' (deg)")->delimiter(',')->expected(4);
  sim->add_option("--set", sim_set, "tomography set (james16 | full36)");
  sim->add_option("--fixed-arm", sim_fixed_arm, "curve: fixed arm (A | B)");
  sim->add_option("--fixed-angle", sim_fixed_angle, "curve: fixed polarizer angle (deg)");
  sim->add_option("--points", sim_points, "curve: sweep points");
  sim->add_option("--span", sim_span, "curve: sweep span (deg)");
  sim->add_option("--format", sim_format, "csv | json");

  // ---- visibility ----
  auto* vis = app.add_subcommand("visibility", "Correlation-curve visibility");
  std::string vis_input, vis_report, vis_fixed_arm = "auto";
  int vis_bootstrap = 1000;
  std::uint64_t vis_seed = 0;
  bool vis_seed_set = false;
  vis->add_option("--input", vis_input, "curve JSON or counts CSV")->required();
  vis->add_option("--fixed-arm", vis_fixed_arm, "A | B | auto (CSV input only)");
  vis->add_option("--bootstrap", vis_bootstrap, "bootstrap resamples (0 disables)");
  vis->add_option("--seed", vis_seed, "base RNG seed (required when bootstrapping)")
      ->each([&vis_seed_set](const std::string&) { vis_seed_set = true; });
  vis->add_option("--report", vis_report, "write the JSON report here (default stdout)");
  std::string vis_emit;
  vis->add_option("--emit", vis_emit, "also write a plottable theta/rate/error CSV here");

  // ---- chsh ----
  auto* chsh = app.add_subcommand("chsh", "Bell-CHSH analysis of 16 coincidence records");
  std::string chsh_input, chsh_report;
  std::vector<double> chsh_angles = {0.0, 45.0, 22.5, 67.5};
  int chsh_mc = 1000, chsh_threads = 1;
  std::uint64_t chsh_seed = 0;
  bool chsh_seed_set = false;
  chsh->add_option("--input", chsh_input, "counts CSV")->required();
  chsh->add_option("--angles", chsh_angles, "a,a',b,b' (deg)")->delimiter(',')->expected(4);
  chsh->add_option("--mc-trials", chsh_mc, "Monte-Carlo resamples for delta_s (0 disables)");
  chsh->add_option("--seed", chsh_seed, "base RNG seed (required when resampling)")
      ->each([&chsh_seed_set](const std::string&) { chsh_seed_set = true; });
  chsh->add_option("--threads", chsh_threads, "worker threads for the resampling");
  chsh->add_option("--report", chsh_report, "write the JSON report here (default stdout)");

  // ---- tomo ----
  auto* tomo = app.add_subcommand("tomo", "Maximum-likelihood state tomography");
  std::string tomo_input, tomo_set = "james16", tomo_like = "poisson", tomo_target = "psi-minus";
  std::string tomo_target_file, tomo_out, tomo_report;
  tomo->add_option("--input", tomo_input, "counts CSV")->required();
  tomo->add_option("--set", tomo_set, "james16 | full36");
  tomo->add_option("--likelihood", tomo_like, "poisson | gaussian");
  tomo->add_option("--target", tomo_target, "Bell-state name for the fidelity metric");
  tomo->add_option("--target-file", tomo_target_file, "density-matrix JSON target (overrides --target)");
  tomo->add_option("--out", tomo_out, "write the reconstructed density matrix here");
  tomo->add_option("--report", tomo_report, "write the JSON report here (default stdout)");

  // ---- metrics ----
  auto* met = app.add_subcommand("metrics", "Concurrence / fidelity / purity of a density matrix");
  std::string met_input, met_target = "psi-minus", met_target_file, met_report;
  bool met_no_project = false;
  met->add_option("--input", met_input, "density-matrix JSON")->required();
  met->add_option("--target", met_target, "Bell-state name for the fidelity metric");
  met->add_option("--target-file", met_target_file, "density-matrix JSON target (overrides --target)");
  met->add_flag("--no-project", met_no_project,
                "use the matrix as stored instead of projecting to the nearest physical state");
  met->add_option("--report", met_report, "write the JSON report here (default stdout)");

  // ---- report-all ----
  auto* rep = app.add_subcommand("report-all", "Full characterization pipeline over a bundle");
  std::string rep_config, rep_out, rep_text;
  int rep_threads = 1;
  std::uint64_t rep_seed = 0;
  bool rep_stamp = false;
  rep->add_option("--config", rep_config, "bundle config JSON")->required();
  rep->add_option("--seed", rep_seed, "base RNG seed")->required();
  rep->add_option("--threads", rep_threads, "worker threads for Monte-Carlo stages");
  rep->add_flag("--stamp", rep_stamp, "add a wall-clock timestamp to provenance");
  rep->add_option("--out", rep_out, "write the report JSON here (default stdout)");
  rep->add_option("--text", rep_text, "also write a plain-text summary table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad usage is a validation error
  }

  if (sim->parsed()) {
    auto source = make_source();
    {
      qp_source* s = nullptr;
      check("simulate: source", qp_source_load(sim_source.c_str(), &s));
      source.reset(s);
    }
    auto state = make_state();
    {
      qp_state* st = nullptr;
      if (!sim_state.empty()) {
        check("simulate: state", qp_state_load(sim_state.c_str(), /*project=*/1, &st));
      } else {
        check("simulate: state", qp_source_state(source.get(), &st));
      }
      state.reset(st);
    }
    qp_records* recs = nullptr;
    if (sim_what == "chsh") {
      check("simulate",
            qp_simulate_chsh(state.get(), source.get(), sim_angles.data(), sim_duration, sim_seed, &recs));
    } else if (sim_what == "tomo") {
      check("simulate", qp_simulate_tomo(state.get(), source.get(), sim_set.c_str(), sim_duration,
                                         sim_seed, &recs));
    } else if (sim_what == "curve") {
      check("simulate",
            qp_simulate_curve(state.get(), source.get(), sim_fixed_arm.empty() ? 'A' : sim_fixed_arm[0],
                              sim_fixed_angle, sim_points, sim_span, sim_duration, sim_seed, &recs));
    } else {
      std::fprintf(stderr, "qpair: simulate: --what must be chsh, tomo or curve\n");
      return 2;
    }
    auto records = make_records(recs);
    if (sim_what == "curve" && sim_format == "json") {
      check("simulate: write", qp_records_save_curve_json(records.get(),
                                                          sim_fixed_arm.empty() ? 'A' : sim_fixed_arm[0],
                                                          sim_out.c_str()));
    } else if (sim_format == "csv") {
      check("simulate: write", qp_records_save_csv(records.get(), sim_out.c_str()));
    } else {
      std::fprintf(stderr, "qpair: simulate: --format json is only available for curves\n");
      return 2;
    }
    return 0;
  }

  if (vis->parsed()) {
    if (vis_bootstrap >= 2 && !vis_seed_set) {
      std::fprintf(stderr, "qpair: visibility: --seed is required when bootstrapping "
                           "(pass --bootstrap 0 to disable)\n");
      return 2;
    }
    qp_records* recs = nullptr;
    char arm_from_file = 0;
    std::string arm = vis_fixed_arm;
    if (ends_with(vis_input, ".json")) {
      check("visibility: input", qp_records_load_curve_json(vis_input.c_str(), &arm_from_file, &recs));
      if (arm == "auto") arm = std::string(1, arm_from_file);
    } else {
      check("visibility: input", qp_records_load_csv(vis_input.c_str(), &recs));
    }
    auto records = make_records(recs);
    StringOut out;
    check("visibility",
          qp_visibility_json(records.get(), arm.c_str(), vis_bootstrap, vis_seed, &out.ptr));
    if (!vis_emit.empty()) {
      check("visibility: emit",
            qp_records_save_curve_csv(records.get(), arm.c_str(), vis_emit.c_str()));
    }
    emit(out.str(), vis_report);
    return 0;
  }

  if (chsh->parsed()) {
    if (chsh_mc >= 100 && !chsh_seed_set) {
      std::fprintf(stderr, "qpair: chsh: --seed is required when --mc-trials >= 100 "
                           "(pass --mc-trials 0 to disable)\n");
      return 2;
    }
    qp_records* recs = nullptr;
    check("chsh: input", qp_records_load_csv(chsh_input.c_str(), &recs));
    auto records = make_records(recs);
    StringOut out;
    check("chsh", qp_chsh_json(records.get(), chsh_angles.data(), chsh_mc, chsh_seed, chsh_threads,
                               &out.ptr));
    emit(out.str(), chsh_report);
    return 0;
  }

  if (tomo->parsed()) {
    qp_records* recs = nullptr;
    check("tomo: input", qp_records_load_csv(tomo_input.c_str(), &recs));
    auto records = make_records(recs);
    qp_tomo* t = nullptr;
    check("tomo", qp_tomography(records.get(), tomo_set.c_str(), tomo_like.c_str(), &t));
    TomoPtr result(t, &qp_tomo_free);
    auto target = load_target(tomo_target, tomo_target_file);
    StringOut out;
    check("tomo: report",
          qp_tomo_report_json(result.get(), target.get(),
                              tomo_target_file.empty() ? tomo_target.c_str() : "custom", &out.ptr));
    if (!tomo_out.empty()) {
      qp_state* ml = nullptr;
      check("tomo: state", qp_tomo_state(result.get(), &ml));
      auto state = make_state(ml);
      check("tomo: write", qp_state_save(state.get(), tomo_out.c_str()));
    }
    emit(out.str(), tomo_report);
    return 0;
  }

  if (met->parsed()) {
    qp_state* st = nullptr;
    check("metrics: input", qp_state_load(met_input.c_str(), met_no_project ? 0 : 1, &st));
    auto state = make_state(st);
    auto target = load_target(met_target, met_target_file);
    StringOut out;
    check("metrics", qp_metrics_json(state.get(), target.get(),
                                     met_target_file.empty() ? met_target.c_str() : "custom",
                                     &out.ptr));
    emit(out.str(), met_report);
    return 0;
  }

  if (rep->parsed()) {
    StringOut out;
    check("report-all", qp_report_all(rep_config.c_str(), rep_seed, rep_threads, rep_stamp ? 1 : 0,
                                      &out.ptr));
    if (!rep_text.empty()) {
      StringOut text;
      check("report-all: text", qp_report_render_text(out.ptr, &text.ptr));
      emit(text.str(), rep_text);
    }
    emit(out.str(), rep_out);
    return 0;
  }

  return 0;
}
