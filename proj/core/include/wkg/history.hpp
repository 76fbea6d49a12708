#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <filesystem>

#include "wkg/radial_grid.hpp"

namespace wkg {

enum class Retention { full, ring };

// Mixed partial derivatives ∂_t^a ∂_r^b at one point, a + b ≤ order ≤ 7.
struct Jet {
  int order = 0;
  std::array<double, 64> d{};

  double operator()(int a, int b) const { return d[a * 8 + b]; }
  double& at(int a, int b) { return d[a * 8 + b]; }
};

enum class CheckpointFormat { binary, csv };

// Time-indexed stack of field states with uniform spacing. Levels are stored
// truncated to their active length; nodes beyond it read as zero, nodes at
// r < 0 read through even reflection.
class History {
 public:
  History(RadialGrid grid, double dt, Retention retention = Retention::full,
          std::size_t ring_capacity = 16);

  const RadialGrid& grid() const { return grid_; }
  double dt() const { return dt_; }
  Retention retention() const { return retention_; }

  // Copies the first active_len nodes (all nodes when negative). Enforces
  // uniform spacing and strictly increasing t.
  void append(const FieldState& s, int active_len = -1);

  std::size_t count() const { return first_ + levels_.size(); }
  std::size_t first_index() const { return first_; }
  bool empty() const { return levels_.empty(); }
  double t0() const { return t0_; }
  double time_of(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }
  double t_first() const { return time_of(first_); }
  double t_last() const { return time_of(count() - 1); }
  bool has_channel(Channel c) const { return (channel_mask_ >> c) & 1u; }

  const FieldState& level(std::size_t k) const;
  double at(Channel c, std::size_t k, int i) const;

  // Cubic (4-point) Lagrange in t and r; derivative orders ≤ 2 each. Time
  // derivatives of a value channel are taken from its stored rate channel.
  double interp(Channel c, double t, double r, int dt_order = 0, int dr_order = 0) const;

  // All derivatives of a value channel up to `order` from width-point stencils.
  Jet jet(Channel c, double t, double r, int order, int width = 6) const;

  void write_checkpoint(const std::filesystem::path& path,
                        CheckpointFormat format = CheckpointFormat::binary) const;
  static History read_checkpoint(const std::filesystem::path& path);

 private:
  struct Stencil {
    int first = 0;
    std::array<double, 8 * 8> w{};  // [order * width + j]
  };
  Stencil time_stencil(double t, int width, int max_order) const;
  Stencil space_stencil(double r, int width, int max_order) const;

  RadialGrid grid_;
  double dt_;
  Retention retention_;
  std::size_t capacity_;
  std::size_t first_ = 0;
  double t0_ = 0.0;
  unsigned channel_mask_ = 0;
  std::deque<FieldState> levels_;
};

}  // namespace wkg
