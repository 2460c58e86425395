#pragma once

#include <string>
#include <vector>

namespace spinflip {

enum class AxisScale { Linear, Log };

struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  int count = 2;
  AxisScale scale = AxisScale::Linear;

  /// Throws CONFIG_INVALID (naming the axis) unless count >= 2, min < max
  /// and, for log axes, min > 0.
  void validate() const;
  /// Inclusive grid from min to max.
  std::vector<double> values() const;
};

AxisScale axis_scale_from_string(const std::string& name);

/// Cartesian product of named axes in row-major order: the last axis varies
/// fastest.
class SweepGrid {
 public:
  explicit SweepGrid(std::vector<SweepAxis> axes);

  const std::vector<SweepAxis>& axes() const { return axes_; }
  std::size_t size() const;
  /// Coordinates of point `index`, one value per axis.
  std::vector<double> point(std::size_t index) const;
  std::vector<std::vector<double>> points() const;

 private:
  std::vector<SweepAxis> axes_;
  std::vector<std::vector<double>> values_;
};

}  // namespace spinflip
