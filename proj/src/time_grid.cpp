#include "bilctrl/time_grid.hpp"

#include <algorithm>
#include <cmath>

namespace bilctrl {

TimeGrid::TimeGrid(double horizon, int n_steps)
    : horizon_(horizon), n_steps_(n_steps) {
  if (!(horizon > 0.0) || n_steps < 1) {
    throw Error("TimeGrid: horizon must be positive and n_steps >= 1");
  }
}

SpaceTimeField::SpaceTimeField(TimeGrid time_grid, TorusGrid space_grid,
                               double fill)
    : tg_(time_grid),
      snaps_(static_cast<size_t>(time_grid.n_nodes()),
             Field(space_grid, fill)) {}

SpaceTimeField::SpaceTimeField(TimeGrid time_grid, std::vector<Field> snapshots)
    : tg_(time_grid), snaps_(std::move(snapshots)) {
  if (static_cast<int>(snaps_.size()) != tg_.n_nodes()) {
    throw Error("SpaceTimeField: expected one snapshot per time node");
  }
}

SpaceTimeField SpaceTimeField::constant_in_time(TimeGrid tg, const Field& f) {
  std::vector<Field> snaps(static_cast<size_t>(tg.n_nodes()), f);
  return SpaceTimeField(tg, std::move(snaps));
}

SpaceTimeField SpaceTimeField::sample(
    TimeGrid tg, TorusGrid sg, const std::function<double(double, double)>& f) {
  std::vector<Field> snaps;
  snaps.reserve(static_cast<size_t>(tg.n_nodes()));
  for (int j = 0; j < tg.n_nodes(); ++j) {
    const double t = tg.time(j);
    snaps.push_back(Field::sample(sg, [&](double x) { return f(t, x); }));
  }
  return SpaceTimeField(tg, std::move(snaps));
}

SpaceTimeField SpaceTimeField::time_reversed() const {
  std::vector<Field> snaps(snaps_.rbegin(), snaps_.rend());
  return SpaceTimeField(tg_, std::move(snaps));
}

double SpaceTimeField::min_value() const {
  double m = snaps_.front().min_value();
  for (const Field& f : snaps_) m = std::min(m, f.min_value());
  return m;
}

double SpaceTimeField::max_value() const {
  double m = snaps_.front().max_value();
  for (const Field& f : snaps_) m = std::max(m, f.max_value());
  return m;
}

bool SpaceTimeField::all_finite() const {
  return std::all_of(snaps_.begin(), snaps_.end(),
                     [](const Field& f) { return f.all_finite(); });
}

double time_trapezoid(const SpaceTimeField& u,
                      const std::function<double(int, const Field&)>& fn) {
  const int n = u.n_nodes();
  const double dt = u.time_grid().dt();
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    acc += w * fn(j, u.snapshot(j));
  }
  return acc * dt;
}

double time_trapezoid_until(const SpaceTimeField& u, double t_upper,
                            const std::function<double(int, const Field&)>& fn) {
  const double dt = u.time_grid().dt();
  int last = static_cast<int>(std::floor(t_upper / dt + 1e-12));
  last = std::clamp(last, 0, u.n_nodes() - 1);
  if (last == 0) return 0.0;
  double acc = 0.0;
  for (int j = 0; j <= last; ++j) {
    const double w = (j == 0 || j == last) ? 0.5 : 1.0;
    acc += w * fn(j, u.snapshot(j));
  }
  return acc * dt;
}

double spacetime_inner(const SpaceTimeField& u, const SpaceTimeField& v) {
  return time_trapezoid(u, [&](int j, const Field& f) {
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += f[i] * v.snapshot(j)[i];
    return s * f.grid().spacing();
  });
}

}  // namespace bilctrl
