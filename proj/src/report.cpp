#include "conefield/report.hpp"

#include <cmath>

namespace conefield {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::fail: return "fail";
    case Status::error: return "error";
  }
  return "error";
}

Json Report::to_json() const {
  Json j;
  j["command"] = command;
  j["inputs"] = inputs;
  j["grid"] = grid;
  j["result"] = result;
  j["diagnostics"] = diagnostics;
  j["status"] = std::string(to_string(status));
  return j;
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json grid_json(const GridConfig& config) {
  Json j;
  j["dim"] = config.dim;
  j["base_radius"] = number(config.base_radius);
  j["levels"] = config.levels;
  j["points_per_unit"] = config.points_per_unit;
  return j;
}

Json level_value(double value, int level, const Grid& grid) {
  Json j;
  j["value"] = number(value);
  j["level"] = level;
  j["radius"] = number(grid.radius(level));
  return j;
}

Json series_json(const LevelSeries& series, const Grid& grid) {
  Json a = Json::array();
  for (std::size_t i = 0; i < series.values.size(); ++i)
    a.push_back(level_value(series.values[i], static_cast<int>(i), grid));
  return a;
}

Json verdict_json(const Verdict& verdict) {
  Json j;
  j["status"] = std::string(to_string(verdict.status));
  j["value"] = number(verdict.value);
  Json inc = Json::array();
  for (double d : verdict.increments) inc.push_back(number(d));
  j["increments"] = inc;
  if (!verdict.note.empty()) j["note"] = verdict.note;
  return j;
}

Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.dim(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Json point_json(const Point& x, int dim) {
  Json a = Json::array();
  for (int i = 0; i < dim; ++i) a.push_back(number(x[static_cast<std::size_t>(i)]));
  return a;
}

}  // namespace conefield
