#include "stlopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stlopt/errors.hpp"

namespace stlopt {

double ProblemEvaluation::stl_star() const {
  if (stl.empty()) throw StateError("evaluation has no STL values");
  return *std::min_element(stl.begin(), stl.end());
}

FemDesignProblem::FemDesignProblem(const GridSpec& grid, const MaterialCatalog& cat, const FilterSpec& filter,
                                   const FrequencyBand& band, double volume_fraction)
    : grid_(grid),
      cat_(cat),
      filter_(filter),
      band_(band),
      volume_fraction_(volume_fraction),
      chain_(grid, filter),
      self_weight_(grid, cat),
      analysis_(grid, cat, band) {
  filter.validate();
}

std::vector<int> FemDesignProblem::free_variables() const {
  std::vector<int> idx;
  for (int e = 0; e < grid_.num_elements(); ++e) {
    if (!grid_.is_fixed(e)) idx.push_back(e);
  }
  return idx;
}

FilterSpec FemDesignProblem::filter_for(const StageState& stage) const {
  FilterSpec f = filter_;
  f.beta1 = stage.beta1;
  f.beta2 = stage.beta2;
  f.delta_eta = stage.delta_eta;
  return f;
}

PhysicalDesignSet FemDesignProblem::physical_designs(const Field& xi, const StageState& stage) const {
  return chain_.forward(xi, filter_for(stage)).fields;
}

double FemDesignProblem::mass_law_reference(double shift) const {
  const double m = equal_mass_surface_density(grid_, cat_, volume_fraction_);
  return mass_law_band(m, band_.shifted(shift), 0.0, cat_.rho_a, cat_.c_halfspace);
}

ProblemEvaluation FemDesignProblem::evaluate(const Field& xi, const StageState& stage, bool with_gradient) {
  const ChainState state = chain_.forward(xi, filter_for(stage));
  analysis_.set_band(band_.shifted(stage.omega_star));
  ProblemEvaluation ev;
  if (stage.formulation == Formulation::blueprint_only) {
    ev.designs = {DesignTag::blueprint};
  } else {
    ev.designs = {DesignTag::blueprint, DesignTag::eroded, DesignTag::dilated};
  }
  std::vector<const Field*> evaluated;
  std::vector<BandEvaluation> results;
  for (DesignTag tag : ev.designs) {
    const Field& rho = field_for(state.fields, tag);
    // identical realizations (delta_eta = 0) share one analysis
    std::size_t hit = evaluated.size();
    for (std::size_t k = 0; k < evaluated.size(); ++k) {
      if (*evaluated[k] == rho) hit = k;
    }
    if (hit == evaluated.size()) {
      evaluated.push_back(&rho);
      results.push_back(analysis_.evaluate(rho, with_gradient, tag));
    }
    ev.stl.push_back(results[hit].spectrum.band_average);
    if (with_gradient) {
      FieldGradients up;
      switch (tag) {
        case DesignTag::blueprint: up.b = results[hit].gradient; break;
        case DesignTag::eroded: up.e = results[hit].gradient; break;
        case DesignTag::dilated: up.d = results[hit].gradient; break;
      }
      ev.dstl.push_back(chain_.backprop(state, up));
    }
  }
  const VolumeResult vol = volume_constraint(state.fields.d2, volume_fraction_);
  ev.J_vol = vol.value;
  const SelfWeightResult sw = self_weight_.evaluate(state.fields.b, state.fields.e2, with_gradient);
  ev.J_conn = sw.J_conn;
  if (with_gradient) {
    FieldGradients gv;
    gv.d2 = vol.gradient;
    ev.dJ_vol = chain_.backprop(state, gv);
    FieldGradients gc;
    gc.b = sw.dJ_dxi_b;
    gc.e2 = sw.dJ_dxi_e2;
    ev.dJ_conn = chain_.backprop(state, gc);
  }
  return ev;
}

namespace {

Eigen::VectorXd restrict(const Field& full, const std::vector<int>& idx) {
  Eigen::VectorXd r(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[k] = full[idx[k]];
  return r;
}

SubproblemSpec build_subproblem(const ProblemEvaluation& ev, const StageState& stage, const std::vector<int>& idx) {
  std::vector<ObjectiveTerm> obj;
  for (std::size_t k = 0; k < ev.stl.size(); ++k) {
    obj.push_back({normalized_objective(ev.stl[k]), -restrict(ev.dstl[k], idx) / kStlNormalization});
  }
  std::vector<ConstraintTerm> cons;
  cons.push_back({"J_vol", ev.J_vol, restrict(ev.dJ_vol, idx)});
  cons.push_back({"J_conn", ev.J_conn, restrict(ev.dJ_conn, idx)});
  if (stage.j_min) {
    cons.push_back({"J_min", connectivity_lower_bound(ev.J_conn, *stage.j_min), -restrict(ev.dJ_conn, idx)});
  }
  if (stage.formulation == Formulation::minmax) return formulate_minmax(obj, cons);
  return formulate_aggregated(obj, cons);
}

ConvergenceSample sample_of(const ProblemEvaluation& ev, const StageState& stage) {
  ConvergenceSample s;
  s.min_stl = ev.stl_star();
  s.constraints = {ev.J_vol, ev.J_conn};
  if (stage.j_min) s.constraints.push_back(connectivity_lower_bound(ev.J_conn, *stage.j_min));
  return s;
}

}  // namespace

OptimizationResult run_optimization(DesignProblem& problem, const Field& xi0, const OptimizationSettings& settings,
                                    const IterationCallback& on_iteration) {
  settings.mma.validate();
  settings.convergence.validate();
  if (settings.max_iterations < 1) throw InvalidParameter("iteration budget must be positive");
  if (xi0.size() != problem.num_variables()) throw DimensionError("initial design length mismatch");
  const std::vector<int> idx = problem.free_variables();
  if (idx.empty()) throw InvalidParameter("problem has no free variables");
  const int n = static_cast<int>(idx.size());
  const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd xmax = Eigen::VectorXd::Ones(n);

  ContinuationController controller(settings.strategy);
  MmaSolver mma(n, settings.mma);
  MoveLimitController move(settings.move_limit);
  OptimizationResult out;
  out.xi = xi0;
  StageState stage = controller.initial_stage();
  std::vector<ConvergenceSample> stage_history;
  double last_step = 0.0;
  double last_kkt = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  while (true) {
    if (out.iterations >= settings.max_iterations) {
      out.termination = "budget";
      break;
    }
    ProblemEvaluation ev = problem.evaluate(out.xi, stage, true);
    ++out.iterations;

    IterationRecord rec;
    rec.iteration = out.iterations;
    rec.stage = stage.stage_index;
    rec.stl_b = rec.stl_e = rec.stl_d = nan;
    for (std::size_t k = 0; k < ev.designs.size(); ++k) {
      switch (ev.designs[k]) {
        case DesignTag::blueprint: rec.stl_b = ev.stl[k]; break;
        case DesignTag::eroded: rec.stl_e = ev.stl[k]; break;
        case DesignTag::dilated: rec.stl_d = ev.stl[k]; break;
      }
    }
    rec.stl_star = ev.stl_star();
    rec.J_vol = ev.J_vol;
    rec.J_conn = ev.J_conn;
    rec.j_min = stage.j_min;
    rec.beta1 = stage.beta1;
    rec.delta_eta = stage.delta_eta;
    rec.omega_star = stage.omega_star;
    rec.formulation = stage.formulation;
    rec.step_inf = last_step;
    rec.kkt = last_kkt;
    if (!stage_history.empty()) move.update(ev.stl, last_step);
    rec.mu2 = move.mu2();
    out.history.push_back(rec);
    if (on_iteration) on_iteration(rec);

    stage_history.push_back(sample_of(ev, stage));
    out.final_evaluation = ev;
    out.stl_star = rec.stl_star;

    if (check_convergence(stage_history, settings.convergence)) {
      ConvergenceInfo info;
      info.J_conn = ev.J_conn;
      info.stl_star = ev.stl_star();
      info.stl_mass_law = problem.mass_law_reference(stage.omega_star);
      const StageDecision d = controller.on_convergence(stage, info);
      if (d.finished) {
        out.converged = true;
        out.termination = "converged";
        break;
      }
      out.transitions.push_back({out.iterations, stage.stage_index, d.next.stage_index, d.rules, d.next});
      stage = d.next;
      stage_history.clear();
      move.reset_stage();
      last_step = 0.0;
      continue;
    }

    const SubproblemSpec sp = build_subproblem(ev, stage, idx);
    const Eigen::VectorXd x = restrict(out.xi, idx);
    const Eigen::VectorXd lo = (x.array() - move.mu2()).max(0.0).matrix();
    const Eigen::VectorXd hi = (x.array() + move.mu2()).min(1.0).matrix();
    const MmaResult r = mma.step(x, sp, xmin, xmax, &lo, &hi);
    last_step = (r.x - x).cwiseAbs().maxCoeff();
    last_kkt = r.kkt_residual;
    for (int k = 0; k < n; ++k) out.xi[idx[k]] = std::clamp(r.x[k], 0.0, 1.0);
  }
  out.final_stage = stage;
  return out;
}

}  // namespace stlopt
