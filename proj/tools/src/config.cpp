#include "stlopt_cli/config.hpp"

#include <set>

#include "stlopt/errors.hpp"
#include "stlopt/io.hpp"

namespace stlopt::cli {

namespace {

using nlohmann::json;

// Reads the members of one JSON object, rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  /// Throws if the object holds keys that were never asked for.
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
    out = j_.at(key).get<double>();
  }

  void get(const std::string& key, int& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
    out = j_.at(key).get<int>();
  }

  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) throw ConfigError(where_ + "." + key + ": expected true or false");
    out = j_.at(key).get<bool>();
  }

  void get_complex(const std::string& re, const std::string& im, Complex& out) {
    double r = out.real(), i = out.imag();
    get(re, r);
    get(im, i);
    out = {r, i};
  }

  const json& at(const std::string& key) const { return j_.at(key); }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

FrequencyBand parse_band(const json& j, const std::string& where) {
  FrequencyBand b;
  if (j.is_array()) {
    // shorthand [f_minus, f_plus] or [f_minus, f_plus, n_samples]
    if (j.size() < 2 || j.size() > 3 || !j[0].is_number() || !j[1].is_number() ||
        (j.size() == 3 && !j[2].is_number_integer())) {
      throw ConfigError(where + ": expected [f_minus, f_plus] or [f_minus, f_plus, n_samples]");
    }
    b.f_minus = j[0].get<double>();
    b.f_plus = j[1].get<double>();
    if (j.size() == 3) b.n_samples = j[2].get<int>();
    return b;
  }
  ObjectReader r(j, where);
  r.get("f_minus", b.f_minus);
  r.get("f_plus", b.f_plus);
  r.get("n_samples", b.n_samples);
  r.done();
  return b;
}

StrategyKind parse_strategy_value(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a strategy name");
  return parse_strategy(j.get<std::string>());
}

// Wraps the core validators so a bad value is reported as a config error.
template <class F>
void check(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  check("grid", [&] { grid.validate(); });
  check("materials", [&] { materials.validate(); });
  check("filter", [&] { filter().validate(); });
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0)) throw ConfigError("volume_fraction must lie in (0,1)");
  if (bands.empty()) throw ConfigError("at least one band is required");
  for (const auto& b : bands) check("bands", [&] { b.validate(); });
  if (strategies.empty()) throw ConfigError("at least one strategy is required");
  check("mma", [&] { mma.validate(); });
  check("convergence", [&] { convergence.validate(); });
  if (!(move_limit.initial > 0.0 && move_limit.initial <= 1.0)) throw ConfigError("move_limit.initial must be in (0,1]");
  if (!(move_limit.growth > 1.0)) throw ConfigError("move_limit.growth must exceed 1");
  if (move_limit.window < 1) throw ConfigError("move_limit.window must be positive");
  if (!(move_limit.floor > 0.0)) throw ConfigError("move_limit.floor must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  if (runs_per_cell < 1) throw ConfigError("campaign.runs_per_cell must be positive");
  if (workers < 1) throw ConfigError("campaign.workers must be positive");
  if (output.empty()) throw ConfigError("output must not be empty");
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto ml = [](const MoveLimitController::Params& p) {
    return std::tie(p.initial, p.threshold_db, p.improvement_db, p.window, p.growth, p.floor);
  };
  return grid == o.grid && materials == o.materials && filter_r1 == o.filter_r1 && filter_r2 == o.filter_r2 &&
         eta_b == o.eta_b && eta_e2 == o.eta_e2 && eta_d2 == o.eta_d2 && volume_fraction == o.volume_fraction &&
         bands == o.bands && strategies == o.strategies && mma == o.mma && convergence == o.convergence &&
         ml(move_limit) == ml(o.move_limit) && max_iterations == o.max_iterations &&
         runs_per_cell == o.runs_per_cell && workers == o.workers && write_designs == o.write_designs &&
         write_histories == o.write_histories && seed == o.seed && output == o.output;
}

FilterSpec RunConfig::filter() const {
  FilterSpec f = FilterSpec::for_grid(grid, filter_r1, filter_r2);
  f.eta_b = eta_b;
  f.eta_e2 = eta_e2;
  f.eta_d2 = eta_d2;
  return f;
}

OptimizationSettings RunConfig::settings(StrategyKind kind) const {
  OptimizationSettings s;
  s.strategy = StrategyVariant::make(kind);
  s.mma = mma;
  s.convergence = convergence;
  s.move_limit = move_limit;
  s.max_iterations = max_iterations;
  return s;
}

CampaignSpec RunConfig::campaign() const {
  CampaignSpec c;
  c.grid = grid;
  c.materials = materials;
  c.filter_r1 = filter_r1;
  c.filter_r2 = filter_r2;
  c.volume_fraction = volume_fraction;
  c.bands = bands;
  c.strategies = strategies;
  c.runs_per_cell = runs_per_cell;
  c.seed = seed;
  c.settings = settings(strategies.front());
  c.workers = workers;
  c.write_designs = write_designs;
  c.write_histories = write_histories;
  return c;
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  {
    ObjectReader top(j, "config");
    if (top.has("grid")) {
      ObjectReader g(top.at("grid"), "grid");
      if (g.has("n")) {
        int n = 0;
        g.get("n", n);
        if (n < 1) throw ConfigError("grid.n must be positive");
        double cell = 0.05, plate = 0.005;
        g.get("cell_size", cell);
        g.get("plate_thickness", plate);
        check("grid", [&] { c.grid = GridSpec::square(n, cell, plate); });
      } else {
        g.get("nx", c.grid.nx);
        g.get("ny", c.grid.ny);
        g.get("element_size", c.grid.element_size);
        g.get("fixed_rows", c.grid.fixed_rows);
      }
      g.done();
    }
    if (top.has("materials")) {
      ObjectReader m(top.at("materials"), "materials");
      MaterialCatalog& cat = c.materials;
      m.get_complex("E", "E_imag", cat.E);
      m.get("rho_s", cat.rho_s);
      m.get("nu", cat.nu);
      m.get("rho_a", cat.rho_a);
      m.get_complex("c_a", "c_a_imag", cat.c_a);
      m.get("c_halfspace", cat.c_halfspace);
      m.get("q", cat.q);
      m.get_complex("E_v", "E_v_imag", cat.E_v);
      m.get("rho_v", cat.rho_v);
      m.get_complex("kappa_r", "kappa_r_imag", cat.kappa_r);
      m.get("rho_r", cat.rho_r);
      m.done();
    }
    if (top.has("filter")) {
      ObjectReader f(top.at("filter"), "filter");
      f.get("r1", c.filter_r1);
      f.get("r2", c.filter_r2);
      f.get("eta_b", c.eta_b);
      f.get("eta_e2", c.eta_e2);
      f.get("eta_d2", c.eta_d2);
      f.done();
    }
    top.get("volume_fraction", c.volume_fraction);
    const bool one_band = top.has("band"), many_bands = top.has("bands");
    if (one_band && many_bands) throw ConfigError("config: give either 'band' or 'bands'");
    if (one_band) c.bands = {parse_band(top.at("band"), "band")};
    if (many_bands) {
      const json& arr = top.at("bands");
      if (!arr.is_array()) throw ConfigError("bands: expected an array");
      c.bands.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) c.bands.push_back(parse_band(arr[i], "bands[" + std::to_string(i) + "]"));
    }
    const bool one_s = top.has("strategy"), many_s = top.has("strategies");
    if (one_s && many_s) throw ConfigError("config: give either 'strategy' or 'strategies'");
    if (one_s) c.strategies = {parse_strategy_value(top.at("strategy"), "strategy")};
    if (many_s) {
      const json& arr = top.at("strategies");
      if (!arr.is_array()) throw ConfigError("strategies: expected an array");
      c.strategies.clear();
      for (const auto& s : arr) c.strategies.push_back(parse_strategy_value(s, "strategies"));
    }
    if (top.has("mma")) {
      ObjectReader m(top.at("mma"), "mma");
      m.get("s_init", c.mma.s_init);
      m.get("s_decr", c.mma.s_decr);
      m.get("s_incr", c.mma.s_incr);
      m.get("move", c.mma.move);
      m.get("albefa", c.mma.albefa);
      m.get("raa0", c.mma.raa0);
      m.get("asy_min", c.mma.asy_min);
      m.get("asy_max", c.mma.asy_max);
      m.get("a0", c.mma.a0);
      m.get("c", c.mma.c);
      m.get("d", c.mma.d);
      m.get("epsimin", c.mma.epsimin);
      m.done();
    }
    if (top.has("convergence")) {
      ObjectReader m(top.at("convergence"), "convergence");
      m.get("constraint_tol", c.convergence.constraint_tol);
      m.get("stl_tol", c.convergence.stl_tol);
      m.get("window", c.convergence.window);
      m.done();
    }
    if (top.has("move_limit")) {
      ObjectReader m(top.at("move_limit"), "move_limit");
      m.get("initial", c.move_limit.initial);
      m.get("threshold_db", c.move_limit.threshold_db);
      m.get("improvement_db", c.move_limit.improvement_db);
      m.get("window", c.move_limit.window);
      m.get("growth", c.move_limit.growth);
      m.get("floor", c.move_limit.floor);
      m.done();
    }
    top.get("max_iterations", c.max_iterations);
    if (top.has("campaign")) {
      ObjectReader m(top.at("campaign"), "campaign");
      m.get("runs_per_cell", c.runs_per_cell);
      m.get("workers", c.workers);
      m.get("write_designs", c.write_designs);
      m.get("write_histories", c.write_histories);
      m.done();
    }
    if (top.has("seed")) {
      if (!top.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
      c.seed = top.at("seed").get<std::uint64_t>();
    }
    top.get("output", c.output);
    top.done();
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j);
}

json emit_config(const RunConfig& c) {
  json j;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"element_size", c.grid.element_size},
               {"fixed_rows", c.grid.fixed_rows}};
  const MaterialCatalog& m = c.materials;
  j["materials"] = {{"E", m.E.real()},         {"E_imag", m.E.imag()},         {"rho_s", m.rho_s},
                    {"nu", m.nu},              {"rho_a", m.rho_a},             {"c_a", m.c_a.real()},
                    {"c_a_imag", m.c_a.imag()}, {"c_halfspace", m.c_halfspace}, {"q", m.q},
                    {"E_v", m.E_v.real()},     {"E_v_imag", m.E_v.imag()},     {"rho_v", m.rho_v},
                    {"kappa_r", m.kappa_r.real()}, {"kappa_r_imag", m.kappa_r.imag()}, {"rho_r", m.rho_r}};
  j["filter"] = {{"r1", c.filter_r1}, {"r2", c.filter_r2}, {"eta_b", c.eta_b}, {"eta_e2", c.eta_e2},
                 {"eta_d2", c.eta_d2}};
  j["volume_fraction"] = c.volume_fraction;
  j["bands"] = json::array();
  for (const auto& b : c.bands) {
    j["bands"].push_back({{"f_minus", b.f_minus}, {"f_plus", b.f_plus}, {"n_samples", b.n_samples}});
  }
  j["strategies"] = json::array();
  for (StrategyKind s : c.strategies) j["strategies"].push_back(to_string(s));
  const MmaConfig& a = c.mma;
  j["mma"] = {{"s_init", a.s_init}, {"s_decr", a.s_decr}, {"s_incr", a.s_incr}, {"move", a.move},
              {"albefa", a.albefa}, {"raa0", a.raa0},     {"asy_min", a.asy_min}, {"asy_max", a.asy_max},
              {"a0", a.a0},         {"c", a.c},           {"d", a.d},           {"epsimin", a.epsimin}};
  j["convergence"] = {{"constraint_tol", c.convergence.constraint_tol},
                      {"stl_tol", c.convergence.stl_tol},
                      {"window", c.convergence.window}};
  const auto& ml = c.move_limit;
  j["move_limit"] = {{"initial", ml.initial}, {"threshold_db", ml.threshold_db}, {"improvement_db", ml.improvement_db},
                     {"window", ml.window},   {"growth", ml.growth},             {"floor", ml.floor}};
  j["max_iterations"] = c.max_iterations;
  j["campaign"] = {{"runs_per_cell", c.runs_per_cell},
                   {"workers", c.workers},
                   {"write_designs", c.write_designs},
                   {"write_histories", c.write_histories}};
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j;
}

}  // namespace stlopt::cli
