#include "spinflip/sweep_grid.hpp"

#include <cmath>

#include "spinflip/errors.hpp"

namespace spinflip {

void SweepAxis::validate() const {
  const std::string field = name.empty() ? "axis" : name;
  if (count < 2) throw Error(ErrorCode::ConfigInvalid, field + ": count must be at least 2", field);
  if (!(std::isfinite(min) && std::isfinite(max) && min < max)) {
    throw Error(ErrorCode::ConfigInvalid, field + ": need finite min < max", field);
  }
  if (scale == AxisScale::Log && !(min > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, field + ": log axis needs min > 0", field);
  }
}

std::vector<double> SweepAxis::values() const {
  validate();
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double f = static_cast<double>(k) / (count - 1);
    v[k] = scale == AxisScale::Linear ? min + f * (max - min)
                                      : std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
  }
  // Pin the end points so they are exact.
  v.front() = min;
  v.back() = max;
  return v;
}

AxisScale axis_scale_from_string(const std::string& name) {
  if (name == "linear") return AxisScale::Linear;
  if (name == "log") return AxisScale::Log;
  throw Error(ErrorCode::ConfigInvalid, "axis scale must be 'linear' or 'log'", "scale");
}

SweepGrid::SweepGrid(std::vector<SweepAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw Error(ErrorCode::ConfigInvalid, "sweep needs at least one axis", "axes");
  for (const auto& a : axes_) values_.push_back(a.values());
}

std::size_t SweepGrid::size() const {
  std::size_t n = 1;
  for (const auto& v : values_) n *= v.size();
  return n;
}

std::vector<double> SweepGrid::point(std::size_t index) const {
  if (index >= size()) throw Error(ErrorCode::InvalidArgument, "grid index out of range");
  std::vector<double> p(values_.size());
  for (std::size_t a = values_.size(); a-- > 0;) {
    p[a] = values_[a][index % values_[a].size()];
    index /= values_[a].size();
  }
  return p;
}

std::vector<std::vector<double>> SweepGrid::points() const {
  std::vector<std::vector<double>> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) out.push_back(point(k));
  return out;
}

}  // namespace spinflip
