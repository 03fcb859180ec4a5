#include "conefield/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <ostream>
#include <sstream>

#include "conefield/ebin.hpp"
#include "conefield/error.hpp"
#include "conefield/gauge.hpp"
#include "conefield/report.hpp"
#include "conefield/suites.hpp"

namespace conefield {

namespace {

struct Options {
  int dim = 0;
  double base_radius = 4.0;
  int levels = 3;
  int points_per_unit = 16;
  int order = 0;
  std::string cone = "orthant";
  int directions = 64;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::string suite;
  int trials = 0;

  std::string sigma, gauge, g, h, k, center, a, b, gauge1, gauge2, point;
  std::vector<std::string> fields;
  double eps = 0.0;
};

// A field file together with its parsed spec, so the dimension can be
// resolved before any field is built.
struct Loaded {
  std::string path;
  FieldSpec spec;
};

class Session {
 public:
  Session(const std::string& command, const Options& o) : o_(o) { report_.command = command; }

  Report& report() { return report_; }

  const Loaded& load(const std::string& flag, const std::string& path) {
    if (path.empty()) throw Error(Errc::invalid_argument, "missing required flag --" + flag);
    loaded_.push_back({path, load_field_spec(path)});
    report_.inputs[flag] = path;
    return loaded_.back();
  }

  int dim() {
    if (dim_ > 0) return dim_;
    dim_ = o_.dim;
    for (const auto& l : loaded_)
      if (dim_ == 0 && l.spec.dim > 0) dim_ = l.spec.dim;
    if (dim_ == 0) throw Error(Errc::invalid_argument, "dimension not given: pass --dim or set dim in a field file");
    return dim_;
  }

  SymTensorField field(const std::string& flag, const std::string& path) {
    const Loaded& l = load(flag, path);
    try {
      return build_field(l.spec, dim());
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what(), e.offset());
    }
  }

  const Grid& grid() {
    if (!grid_) {
      GridConfig c;
      c.dim = dim();
      c.base_radius = o_.base_radius;
      c.levels = o_.levels;
      c.points_per_unit = o_.points_per_unit;
      grid_ = Grid::build(c);
      report_.grid = grid_json(c);
    }
    return *grid_;
  }

  ConeSpec cone() { return ConeSpec::parse(o_.cone, dim(), o_.directions); }

  CalcOptions calc() const {
    CalcOptions c;
    c.tol_rel = o_.tol;
    return c;
  }

  void echo_calc(bool with_order) {
    if (with_order) {
      report_.inputs["order"] = o_.order;
      report_.inputs["cone"] = o_.cone;
      report_.inputs["directions"] = o_.directions;
    }
    report_.inputs["tol"] = o_.tol;
  }

 private:
  const Options& o_;
  Report report_;
  std::vector<Loaded> loaded_;
  int dim_ = 0;
  std::optional<Grid> grid_;
};

// Reported values are the last level's; the verdict says whether the
// exhaustion has settled.
Json norm_json(const NormResult& r, const Grid& grid) {
  Json j;
  j["value"] = number(r.series.values.back());
  j["level"] = grid.levels() - 1;
  j["verdict"] = verdict_json(r.verdict);
  j["argmax"] = point_json(r.argmax, grid.dim());
  j["argmax_order"] = r.argmax_order;
  return j;
}

Json norm_diagnostics(const NormResult& r, const Grid& grid) {
  Json d;
  d["levels"] = series_json(r.series, grid);
  Json orders = Json::array();
  for (const auto& per : r.per_order) {
    LevelSeries s;
    s.values = per;
    orders.push_back(series_json(s, grid));
  }
  d["per_order"] = orders;
  return d;
}

Json margins_json(const GaugeSection& z, const Grid& grid) {
  Json j;
  LevelSeries m;
  m.values = z.margin;
  LevelSeries e;
  e.values = z.min_eigenvalue;
  j["margin"] = series_json(m, grid);
  j["min_eigenvalue"] = series_json(e, grid);
  j["margin_decays"] = z.margin_decays;
  return j;
}

Point parse_point(const std::string& text, int dim) {
  Point x{};
  int count = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, comma - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || count >= dim)
      throw Error(Errc::invalid_argument, "--point must be " + std::to_string(dim) + " comma-separated numbers");
    x[static_cast<std::size_t>(count++)] = v;
    start = comma + 1;
  }
  if (count != dim) throw Error(Errc::invalid_argument, "--point must be " + std::to_string(dim) + " comma-separated numbers");
  return x;
}

Status cmd_classify(Session& s, const Options& o) {
  const SymTensorField sigma = s.field("sigma", o.sigma);
  Report& r = s.report();
  if (!o.point.empty()) {
    const Point x = parse_point(o.point, s.dim());
    const Mat v = sigma.checked(x);
    const FiberClass c = classify(v, 1e-10);
    r.inputs["point"] = point_json(x, s.dim());
    r.result["value"] = matrix_json(v);
    r.result["membership"] = std::string(to_string(c.membership));
    r.result["inertia"] = {{"positive", c.inertia.positive}, {"negative", c.inertia.negative}, {"zero", c.inertia.zero}};
    r.result["margin"] = number(interior_margin(v));
    return Status::ok;
  }
  s.echo_calc(true);
  const Grid& grid = s.grid();
  const PositivityResult p = is_positive(sigma, o.order, s.cone(), grid, s.calc());
  r.result["positive"] = p.positive;
  r.result["level"] = grid.levels() - 1;
  r.result["worst_point"] = point_json(p.worst_point, grid.dim());
  r.result["worst_order"] = p.worst_order;
  Json per = Json::array();
  for (int j = 0; j < grid.levels(); ++j) {
    Json e = level_value(p.min_margin[static_cast<std::size_t>(j)], j, grid);
    e["positive"] = static_cast<bool>(p.per_level[static_cast<std::size_t>(j)]);
    per.push_back(e);
  }
  r.diagnostics["min_margin"] = per;
  return Status::ok;
}

Status cmd_norm(Session& s, const Options& o) {
  const SymTensorField sigma = s.field("sigma", o.sigma);
  const SymTensorField zeta = s.field("gauge", o.gauge);
  s.echo_calc(true);
  const Grid& grid = s.grid();
  const GaugeSection z = gauge_admissible(zeta, o.order, s.cone(), grid, s.calc());
  const NormResult n = zeta_norm(sigma, z, o.order, grid, s.calc());
  Report& r = s.report();
  r.result = norm_json(n, grid);
  r.result["measurable"] = n.verdict.converged();
  r.diagnostics = norm_diagnostics(n, grid);
  r.diagnostics["gauge"] = margins_json(z, grid);
  return Status::ok;
}

Status cmd_order(Session& s, const Options& o) {
  const SymTensorField a = s.field("a", o.a);
  const SymTensorField b = s.field("b", o.b);
  s.echo_calc(true);
  const Grid& grid = s.grid();
  const SectionOrder ord = compare_sections(a, b, o.order, s.cone(), grid, s.calc());
  Report& r = s.report();
  r.result["relation"] = std::string(to_string(ord.relation));
  r.result["level"] = grid.levels() - 1;
  Json per = Json::array();
  for (int j = 0; j < grid.levels(); ++j)
    per.push_back({{"level", j}, {"radius", grid.radius(j)}, {"relation", std::string(to_string(ord.per_level[static_cast<std::size_t>(j)]))}});
  r.diagnostics["levels"] = per;
  return Status::ok;
}

Status cmd_ball(Session& s, const Options& o) {
  const SymTensorField center = s.field("center", o.center);
  const SymTensorField sigma = s.field("sigma", o.sigma);
  const SymTensorField zeta = s.field("gauge", o.gauge);
  s.report().inputs["eps"] = o.eps;
  s.echo_calc(true);
  const Grid& grid = s.grid();
  const GaugeSection z = gauge_admissible(zeta, o.order, s.cone(), grid, s.calc());
  const NormResult n = zeta_norm(sigma - center, z, o.order, grid, s.calc());
  const bool ball = ball_member(center, o.eps, z, o.order, sigma, grid, s.calc());
  const bool interval = interval_member(center, o.eps, z, o.order, sigma, grid);
  Report& r = s.report();
  r.result["member"] = ball;
  r.result["interval_member"] = interval;
  r.result["distance"] = norm_json(n, grid);
  r.diagnostics = norm_diagnostics(n, grid);
  return Status::ok;
}

Status cmd_decompose(Session& s, const Options& o) {
  const SymTensorField sigma = s.field("sigma", o.sigma);
  const SymTensorField zeta = s.field("gauge", o.gauge);
  s.echo_calc(false);
  const Grid& grid = s.grid();
  const GaugeSection z = gauge_admissible(zeta, 0, ConeSpec::orthant(), grid, s.calc());
  const Decomposition d = decompose(sigma, z, grid, s.calc());
  Report& r = s.report();
  r.result["lambda"] = level_value(d.lambda, grid.levels() - 1, grid);
  r.result["already_positive"] = d.already_positive;
  r.result["zeta1"] = d.positive.describe();
  r.result["zeta2"] = d.negative.describe();
  r.diagnostics["zeta1_positive"] = is_positive(d.positive, 0, ConeSpec::orthant(), grid, s.calc()).positive;
  r.diagnostics["zeta2_positive"] = is_positive(d.negative, 0, ConeSpec::orthant(), grid, s.calc()).positive;
  return Status::ok;
}

Status cmd_chart(Session& s, const Options& o) {
  const SymTensorField sigma = s.field("sigma", o.sigma);
  s.echo_calc(false);
  const Grid& grid = s.grid();
  const Chart c = chart_for(sigma, grid, s.calc());
  Report& r = s.report();
  r.result["gauge"] = c.gauge.field.describe();
  r.result["norm"] = norm_json(c.norm, grid);
  r.diagnostics = norm_diagnostics(c.norm, grid);
  r.diagnostics["gauge"] = margins_json(c.gauge, grid);
  return Status::ok;
}

Status cmd_join(Session& s, const Options& o) {
  const SymTensorField z1f = s.field("gauge1", o.gauge1);
  const SymTensorField z2f = s.field("gauge2", o.gauge2);
  std::optional<SymTensorField> sigma;
  if (!o.sigma.empty()) sigma = s.field("sigma", o.sigma);
  s.echo_calc(true);
  const Grid& grid = s.grid();
  const ConeSpec cone = s.cone();
  const GaugeSection z1 = gauge_admissible(z1f, o.order, cone, grid, s.calc());
  const GaugeSection z2 = gauge_admissible(z2f, o.order, cone, grid, s.calc());
  const GaugeSection j = join(z1, z2, s.calc());
  Report& r = s.report();
  r.result["gauge"] = j.field.describe();
  r.result["dominates_gauge1"] = std::string(to_string(compare_sections(z1f, j.field, o.order, cone, grid, s.calc()).relation));
  r.result["dominates_gauge2"] = std::string(to_string(compare_sections(z2f, j.field, o.order, cone, grid, s.calc()).relation));
  if (sigma) {
    r.result["norm_gauge1"] = norm_json(zeta_norm(*sigma, z1, o.order, grid, s.calc()), grid);
    r.result["norm_gauge2"] = norm_json(zeta_norm(*sigma, z2, o.order, grid, s.calc()), grid);
    r.result["norm_join"] = norm_json(zeta_norm(*sigma, j, o.order, grid, s.calc()), grid);
  }
  r.diagnostics["gauge"] = margins_json(j, grid);
  return Status::ok;
}

Json metric_json(const MetricField& m, const Grid& grid) {
  LevelSeries e;
  e.values = m.min_eigenvalue;
  Json j;
  j["min_eigenvalue"] = series_json(e, grid);
  j["eigenvalue_decays"] = m.eigenvalue_decays;
  return j;
}

Status cmd_volume(Session& s, const Options& o) {
  const SymTensorField g = s.field("g", o.g);
  s.echo_calc(false);
  const Grid& grid = s.grid();
  const MetricField m = make_metric(g, grid);
  const VolumeResult v = volume(m, grid, o.tol);
  Report& r = s.report();
  r.result["value"] = number(v.series.values.back());
  r.result["level"] = grid.levels() - 1;
  r.result["finite"] = v.verdict.converged();
  r.result["verdict"] = verdict_json(v.verdict);
  r.diagnostics["levels"] = series_json(v.series, grid);
  r.diagnostics["metric"] = metric_json(m, grid);
  return Status::ok;
}

Status cmd_ebin(Session& s, const Options& o) {
  const SymTensorField g = s.field("g", o.g);
  const SymTensorField h = s.field("h", o.h);
  const SymTensorField k = s.field("k", o.k);
  s.echo_calc(false);
  const Grid& grid = s.grid();
  const MetricField m = make_metric(g, grid);
  const InnerResult trace = ebin_inner(m, h, k, grid, o.tol);
  const InnerResult frame = ebin_inner_frame(m, h, k, grid, o.tol);
  Report& r = s.report();
  r.result["value"] = number(trace.series.values.back());
  r.result["level"] = grid.levels() - 1;
  r.result["verdict"] = verdict_json(trace.verdict);
  r.result["frame_value"] = number(frame.series.values.back());
  r.diagnostics["levels"] = series_json(trace.series, grid);
  r.diagnostics["frame_levels"] = series_json(frame.series, grid);
  r.diagnostics["metric"] = metric_json(m, grid);
  return Status::ok;
}

Status cmd_bound(Session& s, const Options& o) {
  const SymTensorField g = s.field("g", o.g);
  const SymTensorField h = s.field("h", o.h);
  const SymTensorField k = s.field("k", o.k);
  s.echo_calc(false);
  const Grid& grid = s.grid();
  const BoundCertificate c = bound_certificate(make_metric(g, grid), h, k, grid, s.calc());
  Report& r = s.report();
  r.result["value"] = number(c.value);
  r.result["level"] = grid.levels() - 1;
  r.result["n"] = c.n;
  r.result["h_norm"] = number(c.h_norm);
  r.result["k_norm"] = number(c.k_norm);
  r.result["volume"] = number(c.volume);
  r.result["bound"] = number(c.bound);
  r.result["slack"] = number(c.slack);
  r.result["pass"] = c.pass;
  Json per = Json::array();
  for (int j = 0; j < grid.levels(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    Json e = level_value(c.level_values[u], j, grid);
    e["bound"] = number(c.level_bounds[u]);
    e["slack"] = number(c.level_slack[u]);
    per.push_back(e);
  }
  r.diagnostics["levels"] = per;
  return c.pass ? Status::ok : Status::fail;
}

Status cmd_gram(Session& s, const Options& o) {
  const SymTensorField g = s.field("g", o.g);
  std::vector<SymTensorField> list;
  for (std::size_t i = 0; i < o.fields.size(); ++i) list.push_back(s.field("fields." + std::to_string(i), o.fields[i]));
  s.echo_calc(false);
  const Grid& grid = s.grid();
  const auto m = gram(make_metric(g, grid), list, grid, o.tol);
  Report& r = s.report();
  Json rows = Json::array();
  for (const auto& row : m) {
    Json jr = Json::array();
    for (double v : row) jr.push_back(number(v));
    rows.push_back(jr);
  }
  r.result["matrix"] = rows;
  r.result["level"] = grid.levels() - 1;
  return Status::ok;
}

Status cmd_verify(Session& s, const Options& o) {
  Report& r = s.report();
  r.inputs["seed"] = o.seed;
  r.inputs["suite"] = o.suite.empty() ? Json("all") : Json(o.suite);
  r.inputs["trials"] = o.trials;
  VerifyConfig c;
  c.seed = o.seed;
  c.suite = o.suite;
  c.trials = o.trials;
  const SuiteReport rep = verify_all(c);
  r.result = rep.to_json();
  return rep.pass() ? Status::ok : Status::fail;
}

int exit_code(Status s) {
  switch (s) {
    case Status::ok: return 0;
    case Status::fail: return 1;
    case Status::error: return 3;
  }
  return 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cone-field calculus and the L2 metric on Riemannian metrics over truncated domains", "conefield"};
  app.require_subcommand(1);
  Options o;

  auto add_grid = [&](CLI::App* c) {
    c->add_option("--dim", o.dim, "Dimension (1-4); defaults to the field files' dim")->check(CLI::Range(1, 4));
    c->add_option("--base-radius", o.base_radius, "Level-0 box half-width")->capture_default_str();
    c->add_option("--levels", o.levels, "Number of truncation levels")->capture_default_str();
    c->add_option("--points-per-unit", o.points_per_unit, "Lattice resolution")->capture_default_str();
    c->add_option("--tol", o.tol, "Relative tolerance of convergence verdicts")->capture_default_str();
  };
  auto add_jet = [&](CLI::App* c) {
    c->add_option("--order", o.order, "Jet order k (0-2)")->capture_default_str();
    c->add_option("--cone", o.cone, "Tangent cone: orthant | ray:+eK | ray:-eK")->capture_default_str();
    c->add_option("--directions", o.directions, "Sampled directions for order 2")->capture_default_str();
  };

  struct Command {
    const char* name;
    const char* help;
    Status (*run)(Session&, const Options&);
  };
  const Command commands[] = {
      {"classify", "Fiber classification at a point, or positivity over the grid", cmd_classify},
      {"norm", "Gauge norm |sigma|^k_zeta with its convergence verdict", cmd_norm},
      {"order", "Section order between --a and --b", cmd_order},
      {"ball", "Ball membership |sigma - center| < eps, cross-checked against the order interval", cmd_ball},
      {"decompose", "sigma = zeta1 - zeta2 with both parts positive", cmd_decompose},
      {"chart", "Frobenius-envelope gauge with norm <= 1", cmd_chart},
      {"join", "Dominating gauge zeta1 + zeta2", cmd_join},
      {"volume", "Volume of a metric and its finiteness verdict", cmd_volume},
      {"ebin", "G_g(h, k) in trace and frame form", cmd_ebin},
      {"bound", "Certificate |G_g(h, k)| <= n |h|_g |k|_g Vol(g)", cmd_bound},
      {"gram", "Matrix of G_g over --fields", cmd_gram},
      {"verify", "Seeded property suites", cmd_verify},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    // --h is a field flag, so help is long-form only.
    sub->set_help_flag("--help", "Print this help message and exit");
    subs.emplace_back(sub, &c);
    const std::string name = c.name;
    if (name == "verify") {
      sub->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
      sub->add_option("--suite", o.suite, "Run one suite")->check(CLI::IsMember(suite_names()));
      sub->add_option("--trials", o.trials, "Trials per suite (0: suite default)")->check(CLI::NonNegativeNumber);
      continue;
    }
    add_grid(sub);
    if (name == "classify") {
      sub->add_option("--sigma", o.sigma, "Field file")->required();
      sub->add_option("--point", o.point, "Classify sigma at this point (comma separated)");
      add_jet(sub);
    } else if (name == "norm") {
      sub->add_option("--sigma", o.sigma, "Field file")->required();
      sub->add_option("--gauge", o.gauge, "Gauge field file")->required();
      add_jet(sub);
    } else if (name == "order") {
      sub->add_option("--a", o.a, "Field file")->required();
      sub->add_option("--b", o.b, "Field file")->required();
      add_jet(sub);
    } else if (name == "ball") {
      sub->add_option("--center", o.center, "Field file")->required();
      sub->add_option("--sigma", o.sigma, "Field file")->required();
      sub->add_option("--gauge", o.gauge, "Gauge field file")->required();
      sub->add_option("--eps", o.eps, "Radius")->required()->check(CLI::PositiveNumber);
      add_jet(sub);
    } else if (name == "decompose") {
      sub->add_option("--sigma", o.sigma, "Field file")->required();
      sub->add_option("--gauge", o.gauge, "Gauge field file")->required();
    } else if (name == "chart") {
      sub->add_option("--sigma", o.sigma, "Field file")->required();
    } else if (name == "join") {
      sub->add_option("--gauge1", o.gauge1, "Gauge field file")->required();
      sub->add_option("--gauge2", o.gauge2, "Gauge field file")->required();
      sub->add_option("--sigma", o.sigma, "Optional field to measure against both gauges and the join");
      add_jet(sub);
    } else if (name == "volume") {
      sub->add_option("--g", o.g, "Metric field file")->required();
    } else if (name == "ebin" || name == "bound") {
      sub->add_option("--g", o.g, "Metric field file")->required();
      sub->add_option("--h", o.h, "Field file")->required();
      sub->add_option("--k", o.k, "Field file")->required();
    } else if (name == "gram") {
      sub->add_option("--g", o.g, "Metric field file")->required();
      sub->add_option("--fields", o.fields, "Field files")->delimiter(',');
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    // Subcommand help lands here too.
    if (e.get_exit_code() == 0) {
      for (const auto& [sub, cmd] : subs)
        if (sub->parsed()) out << sub->help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    Session session(cmd->name, o);
    Status status = Status::ok;
    int code = 0;
    try {
      status = cmd->run(session, o);
      code = exit_code(status);
    } catch (const Error& e) {
      Report& r = session.report();
      r.status = Status::error;
      r.result = Json::object();
      r.result["error"] = std::string(errc_name(e.code()));
      r.result["message"] = e.what();
      if (e.offset()) r.result["offset"] = *e.offset();
      out << r.dump();
      err << "error: " << e.what() << "\n";
      return is_config_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 3;
    }
    session.report().status = status;
    out << session.report().dump();
    if (status == Status::fail) err << cmd->name << ": verification failed\n";
    return code;
  }
  return 2;
}

}  // namespace conefield
