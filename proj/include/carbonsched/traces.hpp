// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "carbonsched/errors.hpp"

namespace carbonsched {

/// Ordered set of region identifiers. The ordering is fixed at load time and
/// shared by every matrix/vector in the system (index i <=> region i).
class RegionSet {
 public:
  RegionSet() = default;
  explicit RegionSet(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  /// Index of `name`, or -1 when absent.
  int index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

/// n x n matrix of expected one-way request latency in milliseconds.
/// No symmetry or triangle assumption; entries only need to be finite and >= 0.
class LatencyMatrix {
 public:
  LatencyMatrix() = default;
  LatencyMatrix(int n, std::vector<double> row_major_ms);

  int size() const { return n_; }
  double at(int from, int to) const { return values_[from * n_ + to]; }

 private:
  int n_ = 0;
  std::vector<double> values_;
};

/// Hourly series per region over one contiguous hour range shared by all
/// regions. Used for both carbon intensity (g CO2eq/kWh) and workload
/// (mean requests per second).
class HourlyTrace {
 public:
  HourlyTrace() = default;
  HourlyTrace(long long start_hour, std::vector<std::vector<double>> values);

  int region_count() const { return static_cast<int>(values_.size()); }
  long long start_hour() const { return start_; }
  long long hour_count() const {
    return values_.empty() ? 0 : static_cast<long long>(values_[0].size());
  }
  bool covers(long long hour) const {
    return hour >= start_ && hour < start_ + hour_count();
  }
  double at(int region, long long hour) const;

 private:
  long long start_ = 0;
  std::vector<std::vector<double>> values_;  // [region][hour - start_]
};

enum class ForecastKind { oracle, persistence };

ForecastKind forecast_kind_from_string(std::string_view s);
const char* to_string(ForecastKind kind);

struct Forecaster {
  ForecastKind kind = ForecastKind::oracle;
  int horizon_hours = 1;
};

/// oracle: the true trace value at `hour` (OutOfRange outside the domain).
/// persistence: the value 24 hours earlier, clamped into the trace domain
/// while preserving the hour-of-day, so simulations can start at hour 0.
double forecast(const Forecaster& f, const HourlyTrace& trace, int region,
                long long hour);

RegionSet load_region_set(const std::string& path);
LatencyMatrix load_latency_matrix(const std::string& path, const RegionSet& rs);
HourlyTrace load_carbon_trace(const std::string& path, const RegionSet& rs);
HourlyTrace load_workload_trace(const std::string& path, const RegionSet& rs);

/// Writes `region,hour,value` rows in the same format the loaders accept.
/// Values keep full double precision so a load/write/load cycle is exact.
void write_trace_csv(const std::string& path, const HourlyTrace& trace,
                     const RegionSet& rs);

/// Everything one simulation needs; immutable after loading and safe to share
/// across concurrent readers.
struct TraceSet {
  RegionSet regions;
  LatencyMatrix latency;
  HourlyTrace carbon;
  HourlyTrace workload;
};

/// Loads and cross-validates all four inputs (carbon and workload must cover
/// the same hour range).
TraceSet load_trace_set(const std::string& regions_path,
                        const std::string& latency_path,
                        const std::string& carbon_path,
                        const std::string& workload_path);

}  // namespace carbonsched
