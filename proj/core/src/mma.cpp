#include "stlopt/mma.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "stlopt/errors.hpp"

namespace stlopt {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void MmaConfig::validate() const {
  if (!(s_decr > 0.0 && s_decr < 1.0 && s_incr > 1.0)) throw InvalidParameter("MMA needs 0 < s_decr < 1 < s_incr");
  if (!(s_init > 0.0)) throw InvalidParameter("MMA s_init must be positive");
  if (!(move > 0.0 && move <= 1.0)) throw InvalidParameter("MMA move limit must lie in (0,1]");
  if (!(albefa > 0.0 && albefa < 1.0)) throw InvalidParameter("MMA albefa must lie in (0,1)");
  if (!(asy_min > 0.0 && asy_min < asy_max)) throw InvalidParameter("MMA asymptote limits must satisfy 0 < min < max");
  if (!(a0 > 0.0) || !(c >= 0.0) || !(d >= 0.0) || !(epsimin > 0.0)) throw InvalidParameter("invalid MMA constants");
}

namespace {

void append_rows(SubproblemSpec& sp, const std::vector<ConstraintTerm>& cons, int n, int first) {
  for (std::size_t k = 0; k < cons.size(); ++k) {
    if (cons[k].gradient.size() != n) throw DimensionError("constraint gradient length mismatch");
    sp.fval[first + static_cast<int>(k)] = cons[k].value;
    sp.dfdx.row(first + static_cast<int>(k)) = cons[k].gradient.transpose();
    sp.labels.push_back(cons[k].label);
  }
}

int common_size(const std::vector<ObjectiveTerm>& obj) {
  if (obj.empty()) throw InvalidParameter("at least one objective term is required");
  const auto n = obj.front().gradient.size();
  for (const auto& t : obj) {
    if (t.gradient.size() != n) throw DimensionError("objective gradient lengths differ");
  }
  return static_cast<int>(n);
}

}  // namespace

SubproblemSpec formulate_minmax(const std::vector<ObjectiveTerm>& objectives,
                                const std::vector<ConstraintTerm>& constraints) {
  const int n = common_size(objectives);
  const int no = static_cast<int>(objectives.size());
  const int m = no + static_cast<int>(constraints.size());
  SubproblemSpec sp;
  sp.f0 = 0.0;
  sp.df0 = VectorXd::Zero(n);
  sp.fval.resize(m);
  sp.dfdx.resize(m, n);
  sp.a = VectorXd::Zero(m);
  for (int k = 0; k < no; ++k) {
    sp.fval[k] = objectives[k].value;
    sp.dfdx.row(k) = objectives[k].gradient.transpose();
    sp.a[k] = 1.0;
    sp.labels.push_back("J" + std::to_string(k));
  }
  append_rows(sp, constraints, n, no);
  return sp;
}

SubproblemSpec formulate_aggregated(const std::vector<ObjectiveTerm>& objectives,
                                    const std::vector<ConstraintTerm>& constraints) {
  const int n = common_size(objectives);
  const int m = static_cast<int>(constraints.size());
  SubproblemSpec sp;
  sp.df0 = VectorXd::Zero(n);
  for (const auto& t : objectives) {
    sp.f0 += t.value;
    sp.df0 += t.gradient;
  }
  sp.fval.resize(m);
  sp.dfdx.resize(m, n);
  sp.a = VectorXd::Zero(m);
  append_rows(sp, constraints, n, 0);
  return sp;
}

namespace {

struct SubInput {
  int m, n;
  double epsimin;
  VectorXd low, upp, alfa, beta, p0, q0;
  MatrixXd P, Q;
  double a0;
  VectorXd a, b, c, d;
};

struct SubState {
  VectorXd x, y, lam, xsi, eta, mu, s;
  double z, zet;
};

// Residual of the perturbed KKT system at barrier parameter epsi.
VectorXd kkt_residual(const SubInput& in, const SubState& st, double epsi) {
  const int m = in.m, n = in.n;
  const ArrayXd ux1 = (in.upp - st.x).array();
  const ArrayXd xl1 = (st.x - in.low).array();
  const VectorXd plam = in.p0 + in.P.transpose() * st.lam;
  const VectorXd qlam = in.q0 + in.Q.transpose() * st.lam;
  const VectorXd gvec = in.P * (1.0 / ux1).matrix() + in.Q * (1.0 / xl1).matrix();
  const ArrayXd dpsidx = plam.array() / ux1.square() - qlam.array() / xl1.square();
  VectorXd r(3 * n + 4 * m + 2);
  int k = 0;
  r.segment(k, n) = (dpsidx - st.xsi.array() + st.eta.array()).matrix(); k += n;
  r.segment(k, m) = (in.c.array() + in.d.array() * st.y.array() - st.mu.array() - st.lam.array()).matrix(); k += m;
  r[k++] = in.a0 - st.zet - in.a.dot(st.lam);
  r.segment(k, m) = gvec - in.a * st.z - st.y + st.s - in.b; k += m;
  r.segment(k, n) = (st.xsi.array() * (st.x - in.alfa).array() - epsi).matrix(); k += n;
  r.segment(k, n) = (st.eta.array() * (in.beta - st.x).array() - epsi).matrix(); k += n;
  r.segment(k, m) = (st.mu.array() * st.y.array() - epsi).matrix(); k += m;
  r[k++] = st.zet * st.z - epsi;
  r.segment(k, m) = (st.lam.array() * st.s.array() - epsi).matrix();
  return r;
}

// Primal-dual interior point method for the MMA subproblem.
SubState subsolv(const SubInput& in, int& newton_iterations) {
  const int m = in.m, n = in.n;
  SubState st;
  double epsi = 1.0;
  st.x = 0.5 * (in.alfa + in.beta);
  st.y = VectorXd::Ones(m);
  st.z = 1.0;
  st.lam = VectorXd::Ones(m);
  st.xsi = (1.0 / (st.x - in.alfa).array()).max(1.0).matrix();
  st.eta = (1.0 / (in.beta - st.x).array()).max(1.0).matrix();
  st.mu = (0.5 * in.c.array()).max(1.0).matrix();
  st.zet = 1.0;
  st.s = VectorXd::Ones(m);
  newton_iterations = 0;

  while (epsi > in.epsimin) {
    VectorXd residu = kkt_residual(in, st, epsi);
    double residunorm = residu.norm();
    double residumax = residu.cwiseAbs().maxCoeff();
    int ittt = 0;
    while (residumax > 0.9 * epsi && ittt < 200) {
      ++ittt;
      ++newton_iterations;
      const ArrayXd ux1 = (in.upp - st.x).array();
      const ArrayXd xl1 = (st.x - in.low).array();
      const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
      const ArrayXd ux3 = ux1 * ux2, xl3 = xl1 * xl2;
      const VectorXd plam = in.p0 + in.P.transpose() * st.lam;
      const VectorXd qlam = in.q0 + in.Q.transpose() * st.lam;
      const VectorXd gvec = in.P * (1.0 / ux1).matrix() + in.Q * (1.0 / xl1).matrix();
      const MatrixXd GG = in.P * (1.0 / ux2).matrix().asDiagonal() - in.Q * (1.0 / xl2).matrix().asDiagonal();
      const ArrayXd dpsidx = plam.array() / ux2 - qlam.array() / xl2;
      const ArrayXd xa = (st.x - in.alfa).array();
      const ArrayXd bx = (in.beta - st.x).array();
      const ArrayXd delx = dpsidx - epsi / xa + epsi / bx;
      const ArrayXd dely = in.c.array() + in.d.array() * st.y.array() - st.lam.array() - epsi / st.y.array();
      const double delz = in.a0 - in.a.dot(st.lam) - epsi / st.z;
      const ArrayXd dellam = (gvec - in.a * st.z - st.y - in.b).array() + epsi / st.lam.array();
      const ArrayXd diagx = 2.0 * (plam.array() / ux3 + qlam.array() / xl3) + st.xsi.array() / xa + st.eta.array() / bx;
      const ArrayXd diagxinv = 1.0 / diagx;
      const ArrayXd diagy = in.d.array() + st.mu.array() / st.y.array();
      const ArrayXd diagyinv = 1.0 / diagy;
      const ArrayXd diaglam = st.s.array() / st.lam.array();
      const ArrayXd diaglamyi = diaglam + diagyinv;

      VectorXd dx, dlam;
      double dz = 0.0;
      if (m < n) {
        const VectorXd blam = (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
        MatrixXd AA(m + 1, m + 1);
        AA.topLeftCorner(m, m) = GG * diagxinv.matrix().asDiagonal() * GG.transpose();
        AA.topLeftCorner(m, m).diagonal() += diaglamyi.matrix();
        AA.block(0, m, m, 1) = in.a;
        AA.block(m, 0, 1, m) = in.a.transpose();
        AA(m, m) = -st.zet / st.z;
        VectorXd bb(m + 1);
        bb.head(m) = blam;
        bb[m] = delz;
        const VectorXd sol = AA.partialPivLu().solve(bb);
        dlam = sol.head(m);
        dz = sol[m];
        dx = (-delx / diagx).matrix() - ((GG.transpose() * dlam).array() / diagx).matrix();
      } else {
        const ArrayXd diaglamyiinv = 1.0 / diaglamyi;
        const ArrayXd dellamyi = dellam + dely / diagy;
        MatrixXd Axx = GG.transpose() * diaglamyiinv.matrix().asDiagonal() * GG;
        Axx.diagonal() += diagx.matrix();
        const double azz = st.zet / st.z + in.a.dot((in.a.array() / diaglamyi).matrix());
        const VectorXd axz = -GG.transpose() * (in.a.array() / diaglamyi).matrix();
        const VectorXd bxv = delx.matrix() + GG.transpose() * (dellamyi / diaglamyi).matrix();
        const double bz = delz - in.a.dot((dellamyi / diaglamyi).matrix());
        MatrixXd AA(n + 1, n + 1);
        AA.topLeftCorner(n, n) = Axx;
        AA.block(0, n, n, 1) = axz;
        AA.block(n, 0, 1, n) = axz.transpose();
        AA(n, n) = azz;
        VectorXd bb(n + 1);
        bb.head(n) = -bxv;
        bb[n] = -bz;
        const VectorXd sol = AA.partialPivLu().solve(bb);
        dx = sol.head(n);
        dz = sol[n];
        dlam = ((GG * dx).array() / diaglamyi - dz * (in.a.array() / diaglamyi) + dellamyi / diaglamyi).matrix();
      }
      const VectorXd dy = (-dely / diagy + dlam.array() / diagy).matrix();
      const VectorXd dxsi = (-st.xsi.array() + epsi / xa - (st.xsi.array() * dx.array()) / xa).matrix();
      const VectorXd deta = (-st.eta.array() + epsi / bx + (st.eta.array() * dx.array()) / bx).matrix();
      const VectorXd dmu = (-st.mu.array() + epsi / st.y.array() - (st.mu.array() * dy.array()) / st.y.array()).matrix();
      const double dzet = -st.zet + epsi / st.z - st.zet * dz / st.z;
      const VectorXd ds = (-st.s.array() + epsi / st.lam.array() - (st.s.array() * dlam.array()) / st.lam.array()).matrix();

      double stmxx = 0.0;
      auto upd = [&stmxx](const VectorXd& v, const VectorXd& dv) {
        for (Eigen::Index i = 0; i < v.size(); ++i) stmxx = std::max(stmxx, -1.01 * dv[i] / v[i]);
      };
      upd(st.y, dy);
      stmxx = std::max(stmxx, -1.01 * dz / st.z);
      upd(st.lam, dlam);
      upd(st.xsi, dxsi);
      upd(st.eta, deta);
      upd(st.mu, dmu);
      stmxx = std::max(stmxx, -1.01 * dzet / st.zet);
      upd(st.s, ds);
      double stmalbe = 0.0;
      for (int i = 0; i < n; ++i) {
        stmalbe = std::max(stmalbe, -1.01 * dx[i] / xa[i]);
        stmalbe = std::max(stmalbe, 1.01 * dx[i] / bx[i]);
      }
      double steg = 1.0 / std::max({stmalbe, stmxx, 1.0});

      const SubState old = st;
      int itto = 0;
      double resinew = 2.0 * residunorm;
      while (resinew > residunorm && itto < 50) {
        ++itto;
        st.x = old.x + steg * dx;
        st.y = old.y + steg * dy;
        st.z = old.z + steg * dz;
        st.lam = old.lam + steg * dlam;
        st.xsi = old.xsi + steg * dxsi;
        st.eta = old.eta + steg * deta;
        st.mu = old.mu + steg * dmu;
        st.zet = old.zet + steg * dzet;
        st.s = old.s + steg * ds;
        residu = kkt_residual(in, st, epsi);
        resinew = residu.norm();
        steg *= 0.5;
      }
      residunorm = resinew;
      residumax = residu.cwiseAbs().maxCoeff();
    }
    epsi *= 0.1;
  }
  return st;
}

}  // namespace

MmaSolver::MmaSolver(int n, const MmaConfig& cfg) : n_(n), cfg_(cfg) {
  if (n <= 0) throw InvalidParameter("MMA needs at least one variable");
  cfg.validate();
}

void MmaSolver::reset() {
  iter_ = 0;
  xold1_.resize(0);
  xold2_.resize(0);
  low_.resize(0);
  upp_.resize(0);
  factor_.resize(0);
}

MmaResult MmaSolver::step(const VectorXd& x, const SubproblemSpec& sp, const VectorXd& xmin, const VectorXd& xmax,
                          const VectorXd* box_lo, const VectorXd* box_hi) {
  const int n = n_;
  if (x.size() != n || xmin.size() != n || xmax.size() != n || sp.df0.size() != n) {
    throw DimensionError("MMA input length mismatch");
  }
  if ((box_lo && box_lo->size() != n) || (box_hi && box_hi->size() != n)) throw DimensionError("MMA box length mismatch");
  int m = sp.num_constraints();
  if (sp.dfdx.rows() != m || (m > 0 && sp.dfdx.cols() != n) || sp.a.size() != m) {
    throw DimensionError("MMA constraint data shape mismatch");
  }
  if (!x.allFinite() || !sp.df0.allFinite() || !sp.dfdx.allFinite() || !sp.fval.allFinite() || !std::isfinite(sp.f0)) {
    throw DomainError("MMA received non-finite values");
  }
  ++iter_;
  const ArrayXd range = (xmax - xmin).array();
  factor_ = VectorXd::Ones(n);
  if (iter_ <= 2) {
    low_ = (x.array() - cfg_.s_init * range).matrix();
    upp_ = (x.array() + cfg_.s_init * range).matrix();
  } else {
    for (int i = 0; i < n; ++i) {
      const double zzz = (x[i] - xold1_[i]) * (xold1_[i] - xold2_[i]);
      if (zzz > 0.0) factor_[i] = cfg_.s_incr;
      if (zzz < 0.0) factor_[i] = cfg_.s_decr;
    }
    low_ = (x.array() - factor_.array() * (xold1_ - low_).array()).matrix();
    upp_ = (x.array() + factor_.array() * (upp_ - xold1_).array()).matrix();
    for (int i = 0; i < n; ++i) {
      low_[i] = std::clamp(low_[i], x[i] - cfg_.asy_max * range[i], x[i] - cfg_.asy_min * range[i]);
      upp_[i] = std::clamp(upp_[i], x[i] + cfg_.asy_min * range[i], x[i] + cfg_.asy_max * range[i]);
    }
  }

  SubInput in;
  // an empty constraint set is padded with one inactive row
  const bool padded = m == 0;
  if (padded) m = 1;
  in.m = m;
  in.n = n;
  in.epsimin = cfg_.epsimin;
  in.low = low_;
  in.upp = upp_;
  in.alfa.resize(n);
  in.beta.resize(n);
  for (int i = 0; i < n; ++i) {
    double lo = std::max({low_[i] + cfg_.albefa * (x[i] - low_[i]), x[i] - cfg_.move * range[i], xmin[i]});
    double hi = std::min({upp_[i] - cfg_.albefa * (upp_[i] - x[i]), x[i] + cfg_.move * range[i], xmax[i]});
    if (box_lo) lo = std::max(lo, (*box_lo)[i]);
    if (box_hi) hi = std::min(hi, (*box_hi)[i]);
    if (!(lo <= hi)) throw DomainError("empty MMA variable box");
    if (lo == hi) {
      // a degenerate box is widened by a hair so the interior point method has room
      hi = lo + 1e-14 * std::max(1.0, std::abs(lo));
    }
    in.alfa[i] = lo;
    in.beta[i] = hi;
  }
  const ArrayXd xmamiinv = 1.0 / range.max(1e-5);
  const ArrayXd ux1 = (upp_ - x).array();
  const ArrayXd xl1 = (x - low_).array();
  const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
  {
    ArrayXd p0 = sp.df0.array().max(0.0);
    ArrayXd q0 = (-sp.df0.array()).max(0.0);
    const ArrayXd pq0 = 0.001 * (p0 + q0) + cfg_.raa0 * xmamiinv;
    in.p0 = ((p0 + pq0) * ux2).matrix();
    in.q0 = ((q0 + pq0) * xl2).matrix();
  }
  MatrixXd dfdx = padded ? MatrixXd::Zero(1, n) : sp.dfdx;
  VectorXd fval = padded ? VectorXd::Constant(1, -1.0) : sp.fval;
  in.P.resize(m, n);
  in.Q.resize(m, n);
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i < n; ++i) {
      const double pp = std::max(dfdx(r, i), 0.0);
      const double qq = std::max(-dfdx(r, i), 0.0);
      const double pq = 0.001 * (pp + qq) + cfg_.raa0 * xmamiinv[i];
      in.P(r, i) = (pp + pq) * ux2[i];
      in.Q(r, i) = (qq + pq) * xl2[i];
    }
  }
  in.b = in.P * (1.0 / ux1).matrix() + in.Q * (1.0 / xl1).matrix() - fval;
  in.a0 = cfg_.a0;
  in.a = padded ? VectorXd::Zero(1) : sp.a;
  in.c = VectorXd::Constant(m, cfg_.c);
  in.d = VectorXd::Constant(m, cfg_.d);

  MmaResult res;
  const SubState st = subsolv(in, res.newton_iterations);
  res.x = st.x;
  res.z = st.z;
  res.y = padded ? VectorXd() : st.y;
  res.lambda = padded ? VectorXd() : st.lam;
  res.kkt_residual = kkt_residual(in, st, 0.0).cwiseAbs().maxCoeff();

  xold2_ = xold1_.size() ? xold1_ : x;
  xold1_ = x;
  return res;
}

MoveLimitController::MoveLimitController(const Params& p) : p_(p) {
  if (!(p.initial > 0.0 && p.initial <= 1.0)) throw InvalidParameter("initial move limit must lie in (0,1]");
  if (p.window < 1) throw InvalidParameter("move-limit window must be positive");
  reset_stage();
}

void MoveLimitController::reset_stage() {
  state_ = MoveLimitState{};
  state_.mu2 = p_.initial;
  state_.mu2_max = 1.0;
  last_stl_.reset();
  last_delta_.reset();
}

const MoveLimitState& MoveLimitController::update(const std::vector<double>& stl, double step_inf) {
  if (stl.empty()) throw InvalidParameter("move-limit update needs STL values");
  if (!last_stl_) {
    last_stl_ = stl;
    return state_;
  }
  if (last_stl_->size() != stl.size()) throw DimensionError("STL history length changed");
  std::vector<double> delta(stl.size());
  for (std::size_t k = 0; k < stl.size(); ++k) delta[k] = stl[k] - (*last_stl_)[k];

  bool oscillating = false;
  if (last_delta_) {
    for (std::size_t k = 0; k < stl.size(); ++k) {
      const double a = (*last_delta_)[k], b = delta[k];
      if (a * b < 0.0 && std::abs(a) > p_.threshold_db && std::abs(b) > p_.threshold_db) oscillating = true;
    }
  }
  const double min_now = *std::min_element(stl.begin(), stl.end());
  const double min_before = *std::min_element(last_stl_->begin(), last_stl_->end());
  const bool improving = min_now - min_before > p_.improvement_db;

  state_.oscillation_count = oscillating ? state_.oscillation_count + 1 : 0;
  state_.improvement_count = improving ? state_.improvement_count + 1 : 0;
  if (state_.oscillation_count >= p_.window) {
    state_.mu2_max = std::min(state_.mu2_max, state_.mu2);
    state_.mu2 = std::max(0.5 * step_inf, p_.floor);
    state_.oscillation_count = 0;
  } else if (state_.improvement_count >= p_.window) {
    state_.mu2 = std::min(p_.growth * state_.mu2, state_.mu2_max);
    state_.improvement_count = 0;
  }
  last_stl_ = stl;
  last_delta_ = delta;
  return state_;
}

}  // namespace stlopt
