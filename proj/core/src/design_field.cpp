#include "stlopt/design_field.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stlopt/errors.hpp"

namespace stlopt {

DesignVector::DesignVector(Field v, const GridSpec& g) : values(std::move(v)), grid(g) {
  if (values.size() != grid.num_elements()) {
    throw DimensionError("design vector length does not match the grid");
  }
}

void DesignVector::apply_mask() { apply_plate_mask(values, grid); }

void DesignVector::validate() const {
  if (values.size() != grid.num_elements()) {
    throw DimensionError("design vector length does not match the grid");
  }
  for (int e = 0; e < values.size(); ++e) {
    const double v = values[e];
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("design variable outside [0,1]");
    if (grid.is_fixed(e) && v != 1.0) throw DomainError("plate element is not solid");
  }
}

void apply_plate_mask(Field& field, const GridSpec& grid) {
  if (field.size() != grid.num_elements()) throw DimensionError("field length mismatch");
  for (int iy = 0; iy < grid.ny; ++iy) {
    if (!grid.is_fixed_row(iy)) continue;
    field.segment(iy * grid.nx, grid.nx).setOnes();
  }
}

void zero_plate_entries(Field& gradient, const GridSpec& grid) {
  if (gradient.size() != grid.num_elements()) throw DimensionError("field length mismatch");
  for (int iy = 0; iy < grid.ny; ++iy) {
    if (!grid.is_fixed_row(iy)) continue;
    gradient.segment(iy * grid.nx, grid.nx).setZero();
  }
}

void FilterSpec::validate() const {
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw InvalidParameter("filter radii must be positive");
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw InvalidParameter("projection steepness must be positive");
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(eta_e()) || !open_unit(eta_d())) {
    throw InvalidParameter("eta_b +/- delta_eta must lie in (0,1)");
  }
  if (delta_eta < 0.0) throw InvalidParameter("delta_eta must be nonnegative");
  if (!(eta_d2 > 0.0 && eta_d2 < eta_b && eta_b < eta_e2 && eta_e2 < 1.0)) {
    throw InvalidParameter("thresholds must satisfy 0 < eta_d2 < eta_b < eta_e2 < 1");
  }
}

FilterSpec FilterSpec::for_grid(const GridSpec& grid, double r1_m, double r2_m) {
  FilterSpec spec;
  spec.r1 = r1_m / grid.element_size;
  spec.r2 = r2_m / grid.element_size;
  return spec;
}

const Field& field_for(const PhysicalDesignSet& set, DesignTag tag) {
  switch (tag) {
    case DesignTag::blueprint: return set.b;
    case DesignTag::eroded: return set.e;
    case DesignTag::dilated: return set.d;
  }
  throw InvalidParameter("unknown design tag");
}

const char* to_string(DesignTag tag) {
  switch (tag) {
    case DesignTag::blueprint: return "b";
    case DesignTag::eroded: return "e";
    case DesignTag::dilated: return "d";
  }
  return "?";
}

SmoothingFilter::SmoothingFilter(const GridSpec& grid, double radius)
    : grid_(grid), radius_(radius) {
  if (!(radius > 0.0)) throw InvalidParameter("smoothing radius must be positive");
  grid.validate();
  const int nx = grid.nx;
  const int ny = grid.ny;
  const int reach = static_cast<int>(std::ceil(radius));
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.num_elements()) * (2 * reach + 1) * (2 * reach + 1));
  std::vector<std::pair<int, double>> row;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      row.clear();
      double total = 0.0;
      for (int dy = -reach; dy <= reach; ++dy) {
        const int jy = iy + dy;
        if (jy < 0 || jy >= ny) continue;
        for (int jx = 0; jx < nx; ++jx) {
          // minimal image in x
          int dx = ((jx - ix) % nx + nx) % nx;
          if (dx > nx / 2) dx -= nx;
          if (std::abs(dx) > reach) continue;
          const double w = radius - std::hypot(static_cast<double>(dx), static_cast<double>(dy));
          if (w <= 0.0) continue;
          row.emplace_back(jy * nx + jx, w);
          total += w;
        }
      }
      const int e = iy * nx + ix;
      for (const auto& [j, w] : row) triplets.emplace_back(e, j, w / total);
    }
  }
  weights_.resize(grid.num_elements(), grid.num_elements());
  weights_.setFromTriplets(triplets.begin(), triplets.end());
  weights_.makeCompressed();
}

Field SmoothingFilter::apply(const Field& field) const {
  if (field.size() != weights_.cols()) throw DimensionError("field length mismatch in smoothing");
  return weights_ * field;
}

Field SmoothingFilter::apply_transpose(const Field& gradient) const {
  if (gradient.size() != weights_.rows()) throw DimensionError("gradient length mismatch in smoothing");
  return weights_.transpose() * gradient;
}

Field smooth_filter(const Field& field, double radius, const GridSpec& grid) {
  if (field.size() != grid.num_elements()) throw DimensionError("field length mismatch in smoothing");
  return SmoothingFilter(grid, radius).apply(field);
}

namespace {

void check_projection(double eta, double beta) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidParameter("projection threshold outside (0,1)");
  if (!(beta > 0.0)) throw InvalidParameter("projection steepness must be positive");
}

}  // namespace

double heaviside_project(double value, double eta, double beta) {
  const double num = std::tanh(eta * beta) + std::tanh((value - eta) * beta);
  const double den = std::tanh(eta * beta) + std::tanh((1.0 - eta) * beta);
  return num / den;
}

double heaviside_derivative(double value, double eta, double beta) {
  const double den = std::tanh(eta * beta) + std::tanh((1.0 - eta) * beta);
  const double t = std::tanh((value - eta) * beta);
  return beta * (1.0 - t * t) / den;
}

Field heaviside_project(const Field& field, double eta, double beta) {
  check_projection(eta, beta);
  Field out(field.size());
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    // clamp guards against roundoff at the endpoints
    out[i] = std::clamp(heaviside_project(field[i], eta, beta), 0.0, 1.0);
  }
  return out;
}

Field heaviside_derivative(const Field& field, double eta, double beta) {
  check_projection(eta, beta);
  Field out(field.size());
  for (Eigen::Index i = 0; i < field.size(); ++i) out[i] = heaviside_derivative(field[i], eta, beta);
  return out;
}

FilterChain::FilterChain(const GridSpec& grid, double r1, double r2)
    : grid_(grid), first_(grid, r1), second_(grid, r2) {}

ChainState FilterChain::forward(const Field& xi, const FilterSpec& spec) const {
  spec.validate();
  if (spec.r1 != first_.radius() || spec.r2 != second_.radius()) {
    throw StateError("filter spec radii differ from the chain");
  }
  if (xi.size() != grid_.num_elements()) throw DimensionError("design length mismatch");
  ChainState s;
  s.spec = spec;
  s.masked = xi;
  apply_plate_mask(s.masked, grid_);
  s.smoothed1 = first_.apply(s.masked);
  s.projected1 = heaviside_project(s.smoothed1, spec.eta_b, spec.beta1);
  s.smoothed2 = second_.apply(s.projected1);
  s.fields.b = heaviside_project(s.smoothed2, spec.eta_b, spec.beta2);
  s.fields.e = heaviside_project(s.smoothed2, spec.eta_e(), spec.beta2);
  s.fields.d = heaviside_project(s.smoothed2, spec.eta_d(), spec.beta2);
  s.fields.e2 = heaviside_project(s.smoothed2, spec.eta_e2, spec.beta2);
  s.fields.d2 = heaviside_project(s.smoothed2, spec.eta_d2, spec.beta2);
  for (Field* f : {&s.fields.b, &s.fields.e, &s.fields.d, &s.fields.e2, &s.fields.d2}) {
    apply_plate_mask(*f, grid_);
  }
  return s;
}

Field FilterChain::backprop(const ChainState& state, const FieldGradients& upstream) const {
  if (state.spec.r1 != first_.radius() || state.spec.r2 != second_.radius()) {
    throw StateError("chain state was produced with different filter radii");
  }
  const int n = grid_.num_elements();
  const FilterSpec& spec = state.spec;
  Field g2 = Field::Zero(n);
  auto accumulate = [&](const Field& up, double eta) {
    if (up.size() == 0) return;
    if (up.size() != n) throw DimensionError("upstream gradient length mismatch");
    Field masked = up;
    zero_plate_entries(masked, grid_);
    g2.array() += masked.array() * heaviside_derivative(state.smoothed2, eta, spec.beta2).array();
  };
  accumulate(upstream.b, spec.eta_b);
  accumulate(upstream.e, spec.eta_e());
  accumulate(upstream.d, spec.eta_d());
  accumulate(upstream.e2, spec.eta_e2);
  accumulate(upstream.d2, spec.eta_d2);
  Field g1 = second_.apply_transpose(g2);
  g1.array() *= heaviside_derivative(state.smoothed1, spec.eta_b, spec.beta1).array();
  Field g0 = first_.apply_transpose(g1);
  zero_plate_entries(g0, grid_);
  return g0;
}

PhysicalDesignSet build_physical_designs(const DesignVector& xi, const FilterSpec& spec) {
  FilterChain chain(xi.grid, spec);
  return chain.forward(xi.values, spec).fields;
}

}  // namespace stlopt
