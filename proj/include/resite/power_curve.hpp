#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "resite/error.hpp"
#include "resite/time_series.hpp"

namespace resite {

struct CurvePoint {
  double speed;  // m/s
  double power;  // per unit

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// Piecewise-linear turbine or farm transfer function.
//
// Between breakpoints the power is interpolated linearly; outside the breakpoint
// range the end values are held. Power is forced to zero below `cut_in` and above
// `cut_out`.
class PowerCurve {
public:
  PowerCurve(std::vector<CurvePoint> points, double cut_in, double rated_speed, double cut_out)
      : points_(std::move(points)), cut_in_(cut_in), rated_(rated_speed), cut_out_(cut_out) {
    if (points_.empty()) throw InvalidInput("power curve needs at least one breakpoint");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (!std::isfinite(p.speed) || p.speed < 0.0)
        throw InvalidInput("power curve speeds must be finite and non-negative");
      if (!(p.power >= 0.0 && p.power <= 1.0))
        throw InvalidInput("power curve values must lie in [0, 1]");
      if (i > 0 && !(p.speed > points_[i - 1].speed))
        throw InvalidInput("power curve speeds must be strictly increasing");
    }
    if (!(cut_in_ >= 0.0 && cut_in_ <= rated_ && rated_ <= cut_out_))
      throw InvalidInput("power curve requires 0 <= cut_in <= rated <= cut_out");
    // non-decreasing on [cut_in, rated]
    double prev = -1.0;
    for (double v = cut_in_;; v = std::min(rated_, v + 0.05)) {
      const double p = evaluate(v);
      if (p + 1e-12 < prev) throw InvalidInput("power curve decreases between cut-in and rated");
      prev = p;
      if (v >= rated_) break;
    }
  }

  // Standard shape: zero to cut-in, linear ramp to 1 at rated, flat to cut-out.
  static PowerCurve linear_ramp(double cut_in, double rated_speed, double cut_out) {
    std::vector<CurvePoint> pts{{0.0, 0.0}, {cut_in, 0.0}, {rated_speed, 1.0}, {cut_out, 1.0}};
    if (cut_in == 0.0) pts.erase(pts.begin());
    return PowerCurve(std::move(pts), cut_in, rated_speed, cut_out);
  }

  // Derives cut-in (last zero before the first positive point), rated speed (first
  // point reaching the maximum) and cut-out (last positive point) from breakpoints.
  static PowerCurve from_points(std::vector<CurvePoint> pts) {
    if (pts.empty()) throw InvalidInput("power curve needs at least one breakpoint");
    std::size_t first_pos = pts.size();
    double peak = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].power > 0.0 && first_pos == pts.size()) first_pos = i;
      peak = std::max(peak, pts[i].power);
    }
    if (first_pos == pts.size()) {
      const double s = pts.back().speed;
      return PowerCurve(std::move(pts), s, s, s);
    }
    const double cut_in = first_pos == 0 ? pts[0].speed : pts[first_pos - 1].speed;
    double rated = pts.back().speed;
    for (const auto& p : pts)
      if (p.power >= peak) {
        rated = p.speed;
        break;
      }
    double cut_out = rated;
    for (const auto& p : pts)
      if (p.power > 0.0) cut_out = p.speed;
    return PowerCurve(std::move(pts), cut_in, rated, cut_out);
  }

  double evaluate(double speed) const {
    if (speed < cut_in_ || speed > cut_out_) return 0.0;
    if (speed <= points_.front().speed) return points_.front().power;
    if (speed >= points_.back().speed) return points_.back().power;
    const auto it = std::upper_bound(points_.begin(), points_.end(), speed,
                                     [](double v, const CurvePoint& p) { return v < p.speed; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double frac = (speed - lo.speed) / (hi.speed - lo.speed);
    return std::clamp(lo.power + frac * (hi.power - lo.power), 0.0, 1.0);
  }

  const std::vector<CurvePoint>& points() const { return points_; }
  double cut_in() const { return cut_in_; }
  double rated_speed() const { return rated_; }
  double cut_out() const { return cut_out_; }

private:
  std::vector<CurvePoint> points_;
  double cut_in_;
  double rated_;
  double cut_out_;
};

// Speed grid used for smoothed curves: 0 to 35 m/s in 0.1 m/s steps.
inline constexpr int kCurveGridSteps = 350;
inline double curve_grid_speed(int i) { return static_cast<double>(i) / 10.0; }

// Gaussian-kernel smoothing of a power curve, standing in for the spatial spread of
// wind speeds across a farm. The kernel is truncated at +-3 sigma and renormalised
// over its support inside the grid; the integral is a trapezoid rule with step
// sigma/100. Results are sampled on the fixed grid and clipped to [0, 1].
inline PowerCurve smooth_power_curve(const PowerCurve& curve, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("smoothing sigma must be >= 0");
  const double grid_max = curve_grid_speed(kCurveGridSteps);
  std::vector<CurvePoint> pts;
  pts.reserve(kCurveGridSteps + 1);
  const int half_nodes = 300;
  const double h = 3.0 * sigma / half_nodes;
  for (int i = 0; i <= kCurveGridSteps; ++i) {
    const double v = curve_grid_speed(i);
    double p;
    if (sigma == 0.0) {
      p = curve.evaluate(v);
    } else {
      double num = 0.0;
      double den = 0.0;
      for (int j = -half_nodes; j <= half_nodes; ++j) {
        const double u = v + j * h;
        if (u < 0.0 || u > grid_max) continue;
        const double z = (u - v) / sigma;
        double w = std::exp(-0.5 * z * z);
        if (j == -half_nodes || j == half_nodes) w *= 0.5;
        num += w * curve.evaluate(u);
        den += w;
      }
      p = den > 0.0 ? num / den : curve.evaluate(v);
    }
    pts.push_back({v, std::clamp(p, 0.0, 1.0)});
  }
  double peak = 0.0;
  double rated = 0.0;
  for (const auto& p : pts)
    if (p.power > peak) {
      peak = p.power;
      rated = p.speed;
    }
  return PowerCurve(std::move(pts), 0.0, rated, grid_max);
}

// Per-period capacity factors from wind speeds.
inline TimeSeries apply_transfer(const PowerCurve& curve, const TimeSeries& speeds) {
  std::vector<double> out(speeds.size());
  for (std::size_t t = 0; t < speeds.size(); ++t) {
    if (speeds[t] < 0.0)
      throw InvalidInput("negative wind speed at period " + std::to_string(t));
    out[t] = curve.evaluate(speeds[t]);
  }
  return speeds.with_values(std::move(out));
}

// Maps a long-term mean wind speed to a turbine curve id. Entries are sorted by
// `min_speed`; the first entry must start at 0 so the table covers [0, inf).
struct TurbineClass {
  double min_speed;
  std::string curve_id;
};

using TurbineClassTable = std::vector<TurbineClass>;

inline TurbineClassTable default_turbine_classes() { return {{0.0, "V90"}, {8.0, "V164"}}; }

inline std::string select_turbine(double mean_wind_speed, const TurbineClassTable& table) {
  if (table.empty() || table.front().min_speed > 0.0)
    throw InvalidInput("turbine class table must cover [0, inf)");
  if (mean_wind_speed < 0.0) throw InvalidInput("mean wind speed must be non-negative");
  const TurbineClass* hit = &table.front();
  for (const auto& c : table)
    if (mean_wind_speed >= c.min_speed) hit = &c;
  return hit->curve_id;
}

// Default smoothing width: 15% of the site's mean wind speed.
inline double default_smoothing_sigma(double mean_wind_speed) { return 0.15 * mean_wind_speed; }

}  // namespace resite
