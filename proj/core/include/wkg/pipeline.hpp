#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wkg/bootstrap_monitor.hpp"
#include "wkg/ray_ode.hpp"
#include "wkg/run_config.hpp"
#include "wkg/slice_diag.hpp"
#include "wkg/wave_decomp.hpp"

namespace wkg {

enum class Verdict { pass, fail, skipped };
const char* verdict_name(Verdict v);

struct CheckResult {
  std::string name;
  std::string statement;  // what is being certified, in words
  Verdict verdict = Verdict::skipped;
  std::string detail;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
  bool passed() const { return verdict == Verdict::pass; }
};

// What to record while the fields evolve.
struct MonitorPlan {
  int n_eff = -1;  // word order for slice diagnostics; −1 disables words
  bool decomposition = false;
  bool profiles = false;  // keep a thinned set of slices for output
  std::vector<std::pair<double, double>> ray_bases;
  RaySpec ray_spec;
  double ray_step = 0.0;
  Retention retention = Retention::ring;
};

struct MainRun {
  double dr = 0.0, dt = 0.0;
  double kappa = 0.0;
  std::vector<SliceReport> slices;
  std::vector<SliceData> profiles;
  AxisMonitor axis;
  std::vector<RayTrace> rays;
  std::optional<SignReport> sign;
  bool blew_up = false;
  double blowup_t = 0.0, blowup_r = 0.0;
  std::string blowup_what;
  std::uint64_t digest = 0;  // FNV-1a over the final state and slice energies
};

MainRun evolve_monitored(const RunConfig& cfg, const MonitorPlan& plan);

// Ray base points spread over s ∈ [6, s_hi] and r/t ∈ [0, 0.6], all with t ≤ t_hi.
std::vector<std::pair<double, double>> ray_bases(int count, double s_hi, double t_hi);

// Property suites.
CheckResult check_frame(std::uint64_t seed, int points = 1000);
CheckResult check_box_identity(double h = 0.02);
CheckResult check_ode(std::uint64_t seed, int problems = 100);

// Run evaluations.
struct Drift {
  double u = 0.0, v = 0.0;
  double max() const { return std::max(u, v); }
};
Drift energy_drift(const std::vector<SliceReport>& slices, double s_lo = 3.0, double s_hi = 20.0);
CheckResult check_conservation(const std::vector<SliceReport>& slices, double tol = 1e-3);
CheckResult check_ks(const std::vector<SliceReport>& slices, double tol = 0.25);
CheckResult check_kg_decay(const AxisMonitor& axis, double mass, double tol = 0.1);
CheckResult check_sharp_decay(const std::vector<SliceReport>& slices, const AxisMonitor& axis,
                              double mass);
CheckResult check_bootstrap(const std::vector<SliceReport>& slices, const BootstrapConfig& cfg,
                            BootstrapReport* out = nullptr);
CheckResult check_recursion(const std::vector<SliceReport>& slices, const BootstrapConfig& cfg,
                            RecursionReport* out = nullptr);

// Checks that launch their own runs.
struct RayConvergence {
  std::vector<RayTrace> coarse, fine;
  std::vector<double> residual, self_error;
  std::vector<double> w_change;  // c²·max|w_h − w_{h/2}|
};
RayConvergence ray_convergence(const RunConfig& cfg, int rays, double t_max = 16.0);
CheckResult check_rays(const RayConvergence& rc, double factor = 5.0);

struct DecompositionConvergence {
  std::vector<double> dr, residual;
  double order = 0.0;
};
DecompositionConvergence decomposition_convergence(const RunConfig& cfg, double t_max = 20.0);
CheckResult check_decomposition(const MainRun& run, const DecompositionConvergence& conv,
                                double min_order = 1.8);

CheckResult check_probe(const RunConfig& cfg, double t_final = 100.0);
CheckResult check_damping(const RunConfig& cfg, DampingComparison* out = nullptr);
CheckResult check_determinism(const RunConfig& cfg, double t_max = 20.0);

struct PipelineResult {
  std::vector<CheckResult> checks;
  std::string error;
  int exit_code = 0;  // 0 ok, 1 check failed, 2 config error, 3 blow-up
};

// Evolve, evaluate the requested checks and write the artifacts to cfg.output.
PipelineResult run_pipeline(const RunConfig& cfg);

// Cartesian sweep over epsilon, B, c and dr; one pipeline per point.
// Writes sweep.csv to the output directory and returns its rows.
struct SweepRow {
  double epsilon = 0.0, B = 0.0, c = 0.0, dr = 0.0;
  int exit_code = 0;
  std::string error;
  std::vector<CheckResult> checks;
};
std::vector<SweepRow> run_sweep(const RunConfig& base, const nlohmann::json& grid);

// Artifacts.
void write_energies_csv(const std::filesystem::path& path, const std::vector<SliceReport>& slices);
void write_decomposition_csv(const std::filesystem::path& path,
                             const std::vector<SliceReport>& slices);
void write_profiles(const std::filesystem::path& dir, const std::vector<SliceData>& profiles,
                    int thin = 10);
void write_rays(const std::filesystem::path& dir, const std::vector<RayTrace>& rays);
void write_certification(const std::filesystem::path& path, const RunConfig& cfg,
                         const std::vector<CheckResult>& checks);
nlohmann::json to_json(const CheckResult& c);

}  // namespace wkg
