#pragma once

// Structured command reports. Keys keep insertion order and numbers are
// written in shortest round-trip form, so identical inputs give identical bytes.

#include <string>

#include <json.hpp>

#include "conefield/grid.hpp"
#include "conefield/linalg.hpp"

namespace conefield {

using Json = nlohmann::ordered_json;

enum class Status { ok, fail, error };
std::string_view to_string(Status s);

struct Report {
  std::string command;
  Json inputs = Json::object();
  Json grid = Json::object();
  Json result = Json::object();
  Json diagnostics = Json::object();
  Status status = Status::ok;

  Json to_json() const;
  std::string dump() const;
};

Json grid_json(const GridConfig& config);
// [{level, radius, value}, ...]
Json series_json(const LevelSeries& series, const Grid& grid);
Json verdict_json(const Verdict& verdict);
// A value tagged with the level (and its box radius) it was computed on.
Json level_value(double value, int level, const Grid& grid);
Json matrix_json(const Mat& m);
Json point_json(const Point& x, int dim);
// NaN and infinities become null.
Json number(double v);

}  // namespace conefield
