#include "stlopt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include "stlopt/errors.hpp"

namespace stlopt {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string format_design(const Field& values, const GridSpec& grid) {
  if (values.size() != grid.num_elements()) throw DimensionError("design length does not match the grid");
  std::ostringstream os;
  os << grid.nx << ' ' << grid.ny << ' ' << std::setprecision(17) << grid.element_size << ' ' << grid.fixed_rows
     << '\n';
  os << std::fixed << std::setprecision(6);
  for (int iy = grid.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (ix) os << ' ';
      os << values[grid.element_index(ix, iy)];
    }
    os << '\n';
  }
  return os.str();
}

DesignVector parse_design(const std::string& text) {
  std::istringstream is(text);
  GridSpec g;
  if (!(is >> g.nx >> g.ny >> g.element_size >> g.fixed_rows)) throw DimensionError("malformed design header");
  g.validate();
  Field v(g.num_elements());
  for (int iy = g.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      double x;
      if (!(is >> x)) throw DimensionError("design file has too few values");
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError("design value outside [0,1]");
      v[g.element_index(ix, iy)] = x;
    }
  }
  std::string extra;
  if (is >> extra) throw DimensionError("design file has trailing data");
  return DesignVector(std::move(v), g);
}

void write_design(const fs::path& path, const Field& values, const GridSpec& grid) {
  atomic_write(path, format_design(values, grid));
}

DesignVector read_design(const fs::path& path) { return parse_design(read_file(path)); }

std::string format_spectrum_csv(const std::vector<SpectrumResult>& spectra) {
  std::ostringstream os;
  os << "omega_hz,tau,stl_db,design_tag\n" << std::setprecision(12);
  for (const auto& s : spectra) {
    for (const auto& p : s.samples) {
      os << p.frequency_hz << ',' << p.tau << ',' << p.stl_db << ',' << to_string(s.tag) << '\n';
    }
  }
  return os.str();
}

namespace {

void put(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
  } else {
    os << v;
  }
}

}  // namespace

std::string format_history_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream os;
  os << "iter,stage,stl_b,stl_e,stl_d,stl_star,J_vol,J_conn,J_min,beta1,delta_eta,omega_star,mu2,formulation,"
        "step_inf,kkt\n";
  os << std::setprecision(10);
  for (const auto& r : history) {
    os << r.iteration << ',' << r.stage << ',';
    put(os, r.stl_b);
    os << ',';
    put(os, r.stl_e);
    os << ',';
    put(os, r.stl_d);
    os << ',' << r.stl_star << ',' << r.J_vol << ',' << r.J_conn << ',';
    if (r.j_min) os << *r.j_min;
    os << ',' << r.beta1 << ',' << r.delta_eta << ',' << r.omega_star << ',' << r.mu2 << ','
       << to_string(r.formulation) << ',' << r.step_inf << ',' << r.kkt << '\n';
  }
  return os.str();
}

std::string format_transitions_csv(const std::vector<StageTransition>& transitions) {
  std::ostringstream os;
  os << "iter,from_stage,to_stage,rules,beta1,beta2,delta_eta,omega_star,J_min,formulation\n" << std::setprecision(12);
  for (const auto& t : transitions) {
    os << t.iteration << ',' << t.from_stage << ',' << t.to_stage << ',';
    for (std::size_t k = 0; k < t.rules.size(); ++k) os << (k ? "+" : "") << t.rules[k];
    os << ',' << t.stage.beta1 << ',' << t.stage.beta2 << ',' << t.stage.delta_eta << ',' << t.stage.omega_star << ',';
    if (t.stage.j_min) os << *t.stage.j_min;
    os << ',' << to_string(t.stage.formulation) << '\n';
  }
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace stlopt
