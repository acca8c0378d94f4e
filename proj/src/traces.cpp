// Copyright 2026 the carbonsched authors
// SPDX-License-Identifier: Apache-2.0

#include "carbonsched/traces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

namespace carbonsched {

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    raise(errc::parse_error, context + ": not a number: '" + s + "'");
  if (!std::isfinite(value))
    raise(errc::parse_error, context + ": non-finite value '" + s + "'");
  return value;
}

long long parse_int(const std::string& s, const std::string& context) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    raise(errc::parse_error, context + ": not an integer: '" + s + "'");
  return value;
}

std::ifstream open_or_raise(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open " + path);
  return in;
}

}  // namespace

const char* errc_name(errc code) {
  switch (code) {
    case errc::parse_error: return "ParseError";
    case errc::duplicate_region: return "DuplicateRegion";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::unknown_region: return "UnknownRegion";
    case errc::negative_latency: return "NegativeLatency";
    case errc::missing_hour: return "MissingHour";
    case errc::negative_value: return "NegativeValue";
    case errc::out_of_range: return "OutOfRange";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::invalid_param: return "InvalidParam";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::trace_exhausted: return "TraceExhausted";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::io_error: return "IoError";
  }
  return "Error";
}

RegionSet::RegionSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) raise(errc::invalid_param, "region set is empty");
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) raise(errc::parse_error, "empty region identifier");
    if (!seen.insert(name).second)
      raise(errc::duplicate_region, "region '" + name + "' listed twice");
  }
}

int RegionSet::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  return -1;
}

LatencyMatrix::LatencyMatrix(int n, std::vector<double> row_major_ms)
    : n_(n), values_(std::move(row_major_ms)) {
  if (n_ < 1 || values_.size() != static_cast<size_t>(n_) * n_)
    raise(errc::shape_mismatch, "latency matrix is not n x n");
  for (double v : values_) {
    if (!std::isfinite(v))
      raise(errc::parse_error, "latency entries must be finite");
    if (v < 0) raise(errc::negative_latency, "latency entries must be >= 0");
  }
}

HourlyTrace::HourlyTrace(long long start_hour,
                         std::vector<std::vector<double>> values)
    : start_(start_hour), values_(std::move(values)) {
  if (values_.empty()) raise(errc::invalid_param, "trace has no regions");
  for (const auto& series : values_) {
    if (series.size() != values_[0].size())
      raise(errc::missing_hour, "regions cover different hour ranges");
    for (double v : series) {
      if (!std::isfinite(v)) raise(errc::parse_error, "non-finite trace value");
      if (v < 0) raise(errc::negative_value, "trace values must be >= 0");
    }
  }
}

double HourlyTrace::at(int region, long long hour) const {
  if (region < 0 || region >= region_count())
    raise(errc::out_of_range, "region index " + std::to_string(region));
  if (!covers(hour))
    raise(errc::out_of_range, "hour " + std::to_string(hour) +
                                  " outside trace domain [" +
                                  std::to_string(start_) + ", " +
                                  std::to_string(start_ + hour_count()) + ")");
  return values_[region][static_cast<size_t>(hour - start_)];
}

ForecastKind forecast_kind_from_string(std::string_view s) {
  if (s == "oracle") return ForecastKind::oracle;
  if (s == "persistence") return ForecastKind::persistence;
  raise(errc::invalid_param, "unknown forecaster '" + std::string(s) + "'");
}

const char* to_string(ForecastKind kind) {
  return kind == ForecastKind::oracle ? "oracle" : "persistence";
}

double forecast(const Forecaster& f, const HourlyTrace& trace, int region,
                long long hour) {
  if (f.kind == ForecastKind::oracle) return trace.at(region, hour);
  // Persistence: look one day back, clamped into the trace domain while
  // keeping the hour-of-day so the first simulated day still has a forecast.
  long long target = hour - 24;
  const long long first = trace.start_hour();
  const long long last = trace.start_hour() + trace.hour_count() - 1;
  while (target < first) target += 24;
  while (target > last) target -= 24;
  if (target < first) target = first;  // trace shorter than one day
  return trace.at(region, target);
}

RegionSet load_region_set(const std::string& path) {
  auto in = open_or_raise(path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    std::string id = trim(line);
    if (id.empty()) continue;
    names.push_back(std::move(id));
  }
  if (names.empty()) raise(errc::parse_error, path + ": no regions listed");
  return RegionSet(std::move(names));
}

LatencyMatrix load_latency_matrix(const std::string& path,
                                  const RegionSet& rs) {
  auto in = open_or_raise(path);
  const int n = rs.size();
  std::string line;
  if (!std::getline(in, line)) raise(errc::parse_error, path + ": empty file");
  auto header = split_csv(line);
  if (static_cast<int>(header.size()) != n + 1)
    raise(errc::shape_mismatch,
          path + ": header has " + std::to_string(header.size() - 1) +
              " destination columns, expected " + std::to_string(n));
  std::vector<int> col_region(n);
  for (int c = 0; c < n; ++c) {
    int idx = rs.index_of(header[c + 1]);
    if (idx < 0)
      raise(errc::unknown_region, path + ": header region '" + header[c + 1] + "'");
    col_region[c] = idx;
  }
  std::vector<double> values(static_cast<size_t>(n) * n,
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> row_seen(n, false);
  int rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != n + 1)
      raise(errc::shape_mismatch, path + ": row '" + fields[0] + "' has " +
                                      std::to_string(fields.size() - 1) +
                                      " values, expected " + std::to_string(n));
    int from = rs.index_of(fields[0]);
    if (from < 0) raise(errc::unknown_region, path + ": row region '" + fields[0] + "'");
    if (row_seen[from])
      raise(errc::parse_error, path + ": duplicate row for '" + fields[0] + "'");
    row_seen[from] = true;
    ++rows;
    for (int c = 0; c < n; ++c) {
      double v = parse_double(fields[c + 1], path);
      if (v < 0)
        raise(errc::negative_latency, path + ": negative latency from '" +
                                          fields[0] + "' to '" + header[c + 1] + "'");
      values[static_cast<size_t>(from) * n + col_region[c]] = v;
    }
  }
  if (rows != n)
    raise(errc::shape_mismatch, path + ": " + std::to_string(rows) +
                                    " data rows, expected " + std::to_string(n));
  return LatencyMatrix(n, std::move(values));
}

namespace {

HourlyTrace load_series_csv(const std::string& path, const RegionSet& rs) {
  auto in = open_or_raise(path);
  std::string line;
  if (!std::getline(in, line)) raise(errc::parse_error, path + ": empty file");
  auto header = split_csv(line);
  if (header.size() != 3 || header[0] != "region" || header[1] != "hour" ||
      header[2] != "value")
    raise(errc::parse_error, path + ": expected header 'region,hour,value'");

  // region -> hour -> value
  std::vector<std::map<long long, double>> rows(rs.size());
  long long lo = std::numeric_limits<long long>::max();
  long long hi = std::numeric_limits<long long>::min();
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 3)
      raise(errc::parse_error, path + ": malformed row '" + line + "'");
    int region = rs.index_of(fields[0]);
    if (region < 0) raise(errc::unknown_region, path + ": region '" + fields[0] + "'");
    long long hour = parse_int(fields[1], path);
    double value = parse_double(fields[2], path);
    if (value < 0)
      raise(errc::negative_value, path + ": negative value for " + fields[0] +
                                      " at hour " + fields[1]);
    if (!rows[region].emplace(hour, value).second)
      raise(errc::parse_error, path + ": duplicate entry for " + fields[0] +
                                   " at hour " + fields[1]);
    lo = std::min(lo, hour);
    hi = std::max(hi, hour);
  }
  if (lo > hi) raise(errc::parse_error, path + ": no data rows");

  std::vector<std::vector<double>> values(rs.size());
  for (int r = 0; r < rs.size(); ++r) {
    values[r].reserve(static_cast<size_t>(hi - lo + 1));
    for (long long h = lo; h <= hi; ++h) {
      auto it = rows[r].find(h);
      if (it == rows[r].end())
        raise(errc::missing_hour, path + ": region '" + rs.name(r) +
                                      "' missing hour " + std::to_string(h));
      values[r].push_back(it->second);
    }
  }
  return HourlyTrace(lo, std::move(values));
}

}  // namespace

HourlyTrace load_carbon_trace(const std::string& path, const RegionSet& rs) {
  return load_series_csv(path, rs);
}

HourlyTrace load_workload_trace(const std::string& path, const RegionSet& rs) {
  return load_series_csv(path, rs);
}

void write_trace_csv(const std::string& path, const HourlyTrace& trace,
                     const RegionSet& rs) {
  if (trace.region_count() != rs.size())
    raise(errc::dimension_mismatch, "trace does not match region set");
  std::ofstream out(path);
  if (!out) raise(errc::io_error, "cannot write " + path);
  out << "region,hour,value\n";
  char buf[64];
  for (int r = 0; r < rs.size(); ++r) {
    for (long long h = trace.start_hour();
         h < trace.start_hour() + trace.hour_count(); ++h) {
      std::snprintf(buf, sizeof(buf), "%.17g", trace.at(r, h));
      out << rs.name(r) << ',' << h << ',' << buf << '\n';
    }
  }
}

TraceSet load_trace_set(const std::string& regions_path,
                        const std::string& latency_path,
                        const std::string& carbon_path,
                        const std::string& workload_path) {
  TraceSet ts;
  ts.regions = load_region_set(regions_path);
  ts.latency = load_latency_matrix(latency_path, ts.regions);
  ts.carbon = load_carbon_trace(carbon_path, ts.regions);
  ts.workload = load_workload_trace(workload_path, ts.regions);
  if (ts.carbon.start_hour() != ts.workload.start_hour() ||
      ts.carbon.hour_count() != ts.workload.hour_count())
    raise(errc::missing_hour,
          "carbon and workload traces cover different hour ranges");
  return ts;
}

}  // namespace carbonsched
