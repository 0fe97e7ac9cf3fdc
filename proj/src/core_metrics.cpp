#include "sci/core_metrics.hpp"

namespace sci {

AlarmSummary alarm_summary(std::span<const std::optional<double>> series, double tau,
                           std::chrono::minutes bin) {
  if (series.empty()) throw InsufficientDataError("alarm summary: empty series");
  auto above = [&](std::size_t i) { return series[i] && *series[i] > tau; };

  AlarmSummary out;
  std::size_t bins_above = 0;
  std::optional<std::size_t> peak;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (above(i)) {
      ++bins_above;
      if (!out.onset) out.onset = static_cast<Eigen::Index>(i);
    }
    if (series[i] && (!peak || *series[i] > *series[*peak])) peak = i;
  }
  out.duration = bin * static_cast<long>(bins_above);
  out.sustained = out.duration > kSustainedAlarm;
  if (!out.onset) return out;

  out.peak = static_cast<Eigen::Index>(*peak);
  for (std::size_t j = *peak + 1; j < series.size(); ++j) {
    if (!above(j)) {
      out.decay_time = bin * static_cast<long>(j - *peak);
      break;
    }
  }
  return out;
}

}  // namespace sci
