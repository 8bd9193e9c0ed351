#pragma once

#include <functional>
#include <vector>

#include "bilctrl/torus.hpp"

namespace bilctrl {

/// Uniform time grid on [0, T] with n_steps intervals (n_steps + 1 nodes).
class TimeGrid {
 public:
  TimeGrid(double horizon, int n_steps);

  double horizon() const { return horizon_; }
  int n_steps() const { return n_steps_; }
  int n_nodes() const { return n_steps_ + 1; }
  double dt() const { return horizon_ / n_steps_; }
  double time(int j) const { return dt() * j; }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.horizon_ == b.horizon_ && a.n_steps_ == b.n_steps_;
  }

 private:
  double horizon_;
  int n_steps_;
};

/// Time-indexed sequence of Fields (one snapshot per time node).
class SpaceTimeField {
 public:
  SpaceTimeField(TimeGrid time_grid, TorusGrid space_grid, double fill = 0.0);
  SpaceTimeField(TimeGrid time_grid, std::vector<Field> snapshots);

  /// Constant-in-time wrapper around one spatial field.
  static SpaceTimeField constant_in_time(TimeGrid tg, const Field& f);
  /// Sample a function of (t, x) on the full grid.
  static SpaceTimeField sample(TimeGrid tg, TorusGrid sg,
                               const std::function<double(double, double)>& f);

  const TimeGrid& time_grid() const { return tg_; }
  const TorusGrid& space_grid() const { return snaps_.front().grid(); }
  int n_nodes() const { return static_cast<int>(snaps_.size()); }

  const Field& snapshot(int j) const { return snaps_[static_cast<size_t>(j)]; }
  Field& snapshot(int j) { return snaps_[static_cast<size_t>(j)]; }
  const Field& initial() const { return snaps_.front(); }
  const Field& terminal() const { return snaps_.back(); }

  /// Snapshots in reversed time order (t -> T - t).
  SpaceTimeField time_reversed() const;

  double min_value() const;
  double max_value() const;
  bool all_finite() const;

 private:
  TimeGrid tg_;
  std::vector<Field> snaps_;
};

/// Trapezoid rule in time applied to a per-snapshot functional.
double time_trapezoid(const SpaceTimeField& u,
                      const std::function<double(int, const Field&)>& fn);

/// Trapezoid rule restricted to t in [0, t_upper] (snapshots at nodes <=
/// t_upper; the partial cell beyond the last included node is dropped).
double time_trapezoid_until(const SpaceTimeField& u, double t_upper,
                            const std::function<double(int, const Field&)>& fn);

/// iint u * v dt dx by trapezoid in time, rectangle in space.
double spacetime_inner(const SpaceTimeField& u, const SpaceTimeField& v);

}  // namespace bilctrl
