#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stlopt/design_field.hpp"
#include "stlopt/fem.hpp"
#include "stlopt/transmission.hpp"

namespace stlopt {

/// Band-averaged STL of one physical field and, optionally, its gradient
/// with respect to the element densities.
struct BandEvaluation {
  SpectrumResult spectrum;
  Field gradient;  ///< d STL(band) / d xi_P; empty unless requested
};

/// Forward and adjoint transmission analysis over a frequency band.
///
/// The assembler is built once; every evaluation assembles, factorizes
/// each band sample once, and reuses the factorization for the adjoint.
class BandAnalysis {
 public:
  BandAnalysis(const GridSpec& grid, const MaterialCatalog& cat, const FrequencyBand& band, double theta = 0.0);

  BandEvaluation evaluate(const Field& density, bool with_gradient, DesignTag tag = DesignTag::blueprint) const;

  const FrequencyBand& band() const { return band_; }
  const MaterialCatalog& catalog() const { return cat_; }
  const GridSpec& grid() const { return grid_; }
  void set_band(const FrequencyBand& band);

 private:
  GridSpec grid_;
  MaterialCatalog cat_;
  FrequencyBand band_;
  double theta_;
  ReducedAssembler assembler_;
};

/// d STL / d xi_P at one frequency from a retained forward solution.
///
/// Throws StateError when the result carries no factorization.
Field adjoint_stl_gradient(const ReducedAssembler& assembler, const Field& density, const MaterialCatalog& cat,
                           const TransmissionResult& forward);

/// Derivatives of the objectives and constraints with respect to raw xi.
struct GradientBundle {
  Field dJ_b, dJ_e, dJ_d, dJ_vol, dJ_conn;
};

/// Largest relative central-difference error over `n_probes` random
/// components of `xi` that are not on plate rows (all components when
/// `grid` is null). The relative error uses max(|fd|, |adj|, floor) as scale.
struct FdReport {
  double max_rel_error = 0.0;
  std::vector<int> probes;
  std::vector<double> adjoint;
  std::vector<double> finite_difference;
};

FdReport fd_check(const std::function<double(const Field&)>& functional, const Field& xi, const Field& gradient,
                  int n_probes, double step, std::uint64_t seed, const GridSpec* grid = nullptr,
                  double floor = 1e-12);

}  // namespace stlopt
