#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "wkg/frame_geometry.hpp"
#include "wkg/history.hpp"
#include "wkg/radial_grid.hpp"

namespace wkg {

enum class Mode { coupled, wave_only, kg_only, linear_with_source };
Mode mode_from_name(std::string_view name);

// Stage-local fields handed to source callbacks. Arrays cover nodes 0..m;
// vr is the centered ∂_r v used by the wave source.
struct StageView {
  double t = 0.0;
  double dr = 0.0;
  int m = 0;
  const double* u = nullptr;
  const double* p = nullptr;
  const double* v = nullptr;
  const double* q = nullptr;
  const double* vr = nullptr;
};

// Fills out[0..m] with a source evaluated on the grid at stage time.
using NodeSource = std::function<void(const StageView&, std::span<double> out)>;
using PointSource = std::function<double(double t, double r)>;

NodeSource from_point_source(PointSource f);
// Samples a stored field by interpolation at the stage time.
NodeSource from_history(const History& h, Channel c);

struct EvolverOptions {
  double cfl = 0.4;
  // Skip nodes beyond r = t - 1 + front_pad, where compactly supported data
  // vanish. Disable for data that are not compactly supported.
  bool active_region = true;
  double front_pad = 1.0;
};

struct RunPlan {
  double t_final = 0.0;
  int stride = 5;  // solver steps per stored level
  Retention retention = Retention::full;
  std::size_t ring_capacity = 16;
};

class RunObserver {
 public:
  virtual ~RunObserver() = default;
  // Every t ≤ t_ready can be sampled with centered time stencils.
  virtual void on_level(const History& h, double t_ready) = 0;
  virtual void on_finish(const History& h) { on_level(h, h.t_last()); }
};

// Method of lines: second-order centered differences in r, classical RK4 in t.
class Evolver {
 public:
  Evolver(RadialGrid grid, CoefficientSet coeffs, Mode mode, EvolverOptions opt = {});

  const RadialGrid& grid() const { return grid_; }
  const CoefficientSet& coeffs() const { return coeffs_; }
  Mode mode() const { return mode_; }
  const EvolverOptions& options() const { return opt_; }

  // Source of □u in linear_with_source mode.
  void set_source(NodeSource f);
  // Adds □a = f for the value channel a, co-evolved with the main fields.
  void add_aux_wave(Channel value, NodeSource f);

  // Last node that may be nonzero at time t.
  int active_last(double t) const;

  // Time derivative over nodes 0..m; absent channels read as zero.
  void rhs(const FieldState& s, FieldState& ds, int m) const;

  void step(FieldState& s, double dt);

  // Steps s to plan.t_final with dt = t-span / ceil(t-span / (cfl·dr)),
  // storing every plan.stride steps. The initial state is stored first.
  History run(FieldState& s, const RunPlan& plan, std::span<RunObserver* const> observers = {});

 private:
  struct Pair {
    Channel value;
    NodeSource source;
  };
  void eval(double t, const std::array<const double*, kChannelCount>& cur,
            std::array<double*, kChannelCount>& k, int m) const;
  void check_finite(const FieldState& s, int m) const;
  std::vector<Channel> evolved() const;

  RadialGrid grid_;
  CoefficientSet coeffs_;
  Mode mode_;
  EvolverOptions opt_;
  NodeSource source_;
  std::vector<Pair> aux_;
  std::vector<double> lap_plus_, lap_minus_;
  std::vector<double> zeros_;
  mutable std::vector<double> vr_, src_;
  // RK workspace
  std::array<std::vector<double>, kChannelCount> stage_, k_, acc_;
  int last_m_ = -1;  // largest node written into stage_
};

// Free-function forms.
FieldState rhs(const FieldState& s, const RadialGrid& grid, const CoefficientSet& coeffs,
               Mode mode);
FieldState step_rk4(const FieldState& s, double dt, const RadialGrid& grid,
                    const CoefficientSet& coeffs, Mode mode, double cfl = 0.4);

// □φ = f with the data in channels u, p of `data`.
History solve_linear_wave(const RadialGrid& grid, NodeSource source, const FieldState& data,
                          const RunPlan& plan, EvolverOptions opt = {},
                          std::span<RunObserver* const> observers = {});

}  // namespace wkg
