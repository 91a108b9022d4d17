#include "stlopt/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "stlopt/constraints.hpp"
#include "stlopt/errors.hpp"

namespace stlopt {

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::minmax: return "minmax";
    case Formulation::aggregated: return "aggregated";
    case Formulation::blueprint_only: return "blueprint";
  }
  return "?";
}

Formulation parse_formulation(const std::string& s) {
  if (s == "minmax") return Formulation::minmax;
  if (s == "aggregated") return Formulation::aggregated;
  if (s == "blueprint") return Formulation::blueprint_only;
  throw ConfigError("unknown formulation '" + s + "'");
}

bool StageState::same_parameters(const StageState& o) const {
  return beta1 == o.beta1 && beta2 == o.beta2 && delta_eta == o.delta_eta && omega_star == o.omega_star &&
         j_min == o.j_min && formulation == o.formulation;
}

void ConvergenceCriterion::validate() const {
  if (!(constraint_tol > 0.0) || !(stl_tol > 0.0) || window < 1) {
    throw InvalidParameter("convergence tolerances and window must be positive");
  }
}

bool check_convergence(const std::vector<ConvergenceSample>& h, const ConvergenceCriterion& crit) {
  crit.validate();
  const std::size_t w = static_cast<std::size_t>(crit.window);
  if (h.size() < w + 1) return false;
  for (std::size_t k = h.size() - w; k < h.size(); ++k) {
    if (!(std::abs(h[k].min_stl - h[k - 1].min_stl) < crit.stl_tol)) return false;
  }
  const auto& last = h.back().constraints;
  const auto& prev = h[h.size() - 2].constraints;
  if (last.size() != prev.size()) return false;
  const bool feasible = std::all_of(last.begin(), last.end(), [](double g) { return g <= 0.0; });
  if (feasible) return true;
  for (std::size_t i = 0; i < last.size(); ++i) {
    if (!(std::abs(last[i] - prev[i]) < crit.constraint_tol)) return false;
  }
  return true;
}

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::baseline: return "baseline";
    case StrategyKind::E1: return "e1";
    case StrategyKind::E2: return "e2";
    case StrategyKind::E3: return "e3";
    case StrategyKind::F1: return "f1";
    case StrategyKind::F2: return "f2";
    case StrategyKind::F3: return "f3";
    case StrategyKind::F4: return "f4";
    case StrategyKind::R1: return "r1";
    case StrategyKind::R2: return "r2";
    case StrategyKind::R3: return "r3";
  }
  return "?";
}

StrategyKind parse_strategy(const std::string& key) {
  for (auto k : {StrategyKind::baseline, StrategyKind::E1, StrategyKind::E2, StrategyKind::E3, StrategyKind::F1,
                 StrategyKind::F2, StrategyKind::F3, StrategyKind::F4, StrategyKind::R1, StrategyKind::R2,
                 StrategyKind::R3}) {
    if (key == to_string(k)) return k;
  }
  throw ConfigError("unknown strategy '" + key + "'");
}

namespace {

bool is_frequency(StrategyKind k) {
  return k == StrategyKind::F1 || k == StrategyKind::F2 || k == StrategyKind::F3 || k == StrategyKind::F4;
}

bool is_robustness_stepping(StrategyKind k) { return k == StrategyKind::R2 || k == StrategyKind::R3; }

}  // namespace

StrategyVariant StrategyVariant::make(StrategyKind kind) {
  StrategyVariant v;
  v.kind = kind;
  return v;
}

double StrategyVariant::initial_omega_star() const {
  switch (kind) {
    case StrategyKind::F1: return 1000.0;
    case StrategyKind::F2: return 2000.0;
    case StrategyKind::F3: return 3000.0;
    case StrategyKind::F4: return 4000.0;
    default: return 0.0;
  }
}

double beta_after_steps(int k, double factor, double beta_max) {
  if (k < 0) throw InvalidParameter("step count must be nonnegative");
  return std::min(std::pow(factor, k), beta_max);
}

ContinuationController::ContinuationController(const StrategyVariant& variant) : variant_(variant) {
  if (!(variant.beta_factor > 1.0) || !(variant.beta_max >= 1.0)) throw InvalidParameter("invalid beta schedule");
}

StageState ContinuationController::initial_stage() const {
  StageState s;
  s.beta1 = 1.0;
  s.beta2 = 0.5;
  s.delta_eta = variant_.delta_eta_final;
  s.omega_star = variant_.initial_omega_star();
  switch (variant_.kind) {
    case StrategyKind::E1: s.j_min = -0.5; break;
    case StrategyKind::E2: s.j_min = -0.05; break;
    case StrategyKind::R1: s.formulation = Formulation::aggregated; break;
    case StrategyKind::R2:
      s.formulation = Formulation::blueprint_only;
      s.delta_eta = 0.0;
      break;
    case StrategyKind::R3: s.delta_eta = 0.0; break;
    default: break;
  }
  return s;
}

StageState ContinuationController::beta_step(const StageState& s) const {
  StageState n = s;
  if (s.beta1 >= variant_.beta_max) return n;
  n.beta1 = std::min(s.beta1 * variant_.beta_factor, variant_.beta_max);
  n.beta2 = n.beta1 / 2.0;
  n.beta_steps = s.beta_steps + 1;
  return n;
}

bool ContinuationController::triggered(const StageState& s, const ConvergenceInfo& info) const {
  return info.stl_star >= variant_.trigger_ratio * info.stl_mass_law || s.beta1 > variant_.trigger_beta;
}

StageDecision ContinuationController::on_convergence(const StageState& stage, const ConvergenceInfo& info) {
  StageDecision d;
  StageState n = stage;
  bool beta_paused = false;
  const StrategyKind k = variant_.kind;

  if (k == StrategyKind::E3 && stage.beta1 > variant_.exclusion_beta) {
    const double bound = adaptive_connectivity_bound(info.J_conn, stage.j_min, variant_.bound_step);
    if (!stage.j_min || *stage.j_min != bound) {
      n.j_min = bound;
      d.rules.push_back("exclusion-bound");
    }
  }

  if (is_frequency(k)) {
    if (phase_ == 0 && triggered(stage, info)) phase_ = 1;
    if (phase_ == 1) {
      n.omega_star = std::max(0.0, stage.omega_star - variant_.frequency_step);
      d.rules.push_back("frequency-shift");
      beta_paused = true;
      if (n.omega_star <= 0.0) {
        n.omega_star = 0.0;
        phase_ = 2;
      }
    }
  }

  if (is_robustness_stepping(k)) {
    if (phase_ == 0 && triggered(stage, info)) {
      phase_ = 1;
      n.delta_eta = variant_.eta_step;
      if (k == StrategyKind::R2) n.formulation = Formulation::aggregated;
      d.rules.push_back("robustness-start");
      beta_paused = true;
    } else if (phase_ == 1) {
      n.delta_eta = std::min(variant_.delta_eta_final, stage.delta_eta + variant_.eta_step);
      // snap accumulated roundoff onto the grid of steps
      n.delta_eta = std::round(n.delta_eta / variant_.eta_step) * variant_.eta_step;
      d.rules.push_back("robustness-step");
      beta_paused = true;
      if (n.delta_eta >= variant_.delta_eta_final - 1e-12) {
        n.delta_eta = variant_.delta_eta_final;
        phase_ = 2;
      }
    }
  }

  if (!beta_paused && stage.beta1 < variant_.beta_max) {
    n = beta_step(n);
    d.rules.push_back("beta-step");
    const bool last = n.beta1 >= variant_.beta_max;
    if (last && n.formulation == Formulation::aggregated &&
        (k == StrategyKind::R1 || k == StrategyKind::R2)) {
      n.formulation = Formulation::minmax;
      d.rules.push_back("formulation-minmax");
    }
  }

  if (n.same_parameters(stage)) {
    d.finished = true;
    d.next = stage;
    d.rules.clear();
    return d;
  }
  n.stage_index = stage.stage_index + 1;
  d.next = n;
  return d;
}

}  // namespace stlopt
