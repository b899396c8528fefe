#include "alab/apath.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "alab/error.hpp"

namespace alab {

Chart time_chart() {
  static const Chart chart = make_chart("I", {Interval{0.0, 1.0}}, {"t"});
  return chart;
}

APath make_apath(std::string label, const Algebroid& a, const std::vector<std::string>& coef,
                 const std::vector<std::string>& base) {
  if (static_cast<int>(coef.size()) != a->rank) {
    fail(ErrorKind::RankMismatch, "path '" + label + "' has " + std::to_string(coef.size()) + " coefficients for rank " +
                                      std::to_string(a->rank));
  }
  if (static_cast<int>(base.size()) != a->base->dim()) {
    fail(ErrorKind::RankMismatch, "path '" + label + "' base curve has the wrong number of components");
  }
  const std::vector<std::string> names{"t"};
  APathSegment seg;
  for (const auto& c : coef) seg.coef.push_back(parse_expression(c, names));
  for (const auto& c : base) seg.base.push_back(parse_expression(c, names));
  return APath{std::move(label), a, {std::move(seg)}};
}

namespace {

double total_duration(const APath& p) {
  return std::accumulate(p.segments.begin(), p.segments.end(), 0.0,
                         [](double s, const APathSegment& g) { return s + g.duration; });
}

// Segment index and local parameter for global time t.
std::pair<std::size_t, double> locate(const APath& p, double t) {
  const double total = total_duration(p);
  double start = 0.0;
  for (std::size_t k = 0; k < p.segments.size(); ++k) {
    double len = p.segments[k].duration / total;
    if (t <= start + len || k + 1 == p.segments.size()) return {k, std::clamp((t - start) / len, 0.0, 1.0)};
    start += len;
  }
  return {0, 0.0};
}

Eigen::VectorXd eval_at(const std::vector<Expr>& comps, double s) {
  const double pt[1] = {s};
  return eval(comps, pt);
}

void require_path(const APath& p) {
  if (p.segments.empty()) fail(ErrorKind::InvalidArgument, "path '" + p.label + "' has no segments");
}

}  // namespace

APath concatenate(const APath& first, const APath& second) {
  require_path(first);
  require_path(second);
  if (first.algebroid != second.algebroid) fail(ErrorKind::AlgebroidMismatch, "concatenated paths use different algebroids");
  APath out{first.label + "*" + second.label, first.algebroid, {}};
  const double t1 = total_duration(first);
  const double t2 = total_duration(second);
  for (auto g : first.segments) {
    g.duration = 0.5 * g.duration / t1;
    out.segments.push_back(g);
  }
  for (auto g : second.segments) {
    g.duration = 0.5 * g.duration / t2;
    out.segments.push_back(g);
  }
  return out;
}

APath reparametrize_square(const APath& p) {
  APath out = p;
  out.label = p.label + "(t^2)";
  const Expr t = Expr::variable(0);
  const std::vector<Expr> sq{t * t};
  for (auto& g : out.segments) {
    for (auto& c : g.coef) c = c.substitute(sq) * (Expr(2) * t);
    for (auto& c : g.base) c = c.substitute(sq);
  }
  return out;
}

std::vector<double> coefficients_at(const APath& p, double t) {
  require_path(p);
  auto [k, s] = locate(p, t);
  const auto& g = p.segments[k];
  const double rate = total_duration(p) / g.duration;
  Eigen::VectorXd a = eval_at(g.coef, s);
  std::vector<double> out(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = a(i) * rate;
  return out;
}

Eigen::VectorXd base_at(const APath& p, double t) {
  require_path(p);
  auto [k, s] = locate(p, t);
  return eval_at(p.segments[k].base, s);
}

CheckReport validate_apath(const APath& p, const CheckOptions& opt, int time_samples) {
  require_path(p);
  const auto& A = *p.algebroid;
  CheckReport rep;
  rep.kind = "apath_valid";
  rep.id = p.label;
  ResidualTracker t;
  t.declare("anchor");
  t.declare("junction");
  const int n = A.base->dim();
  for (std::size_t k = 0; k < p.segments.size(); ++k) {
    const auto& g = p.segments[k];
    std::vector<Expr> velocity;
    for (const auto& c : g.base) velocity.push_back(c.diff(0));
    for (int q = 0; q < time_samples; ++q) {
      double s = time_samples == 1 ? 0.0 : static_cast<double>(q) / (time_samples - 1);
      Eigen::VectorXd c = eval_at(g.base, s);
      Eigen::VectorXd a = eval_at(g.coef, s);
      std::span<const double> cs(c.data(), static_cast<std::size_t>(n));
      Eigen::VectorXd r = -eval_at(velocity, s);
      for (int i = 0; i < A.rank; ++i) {
        if (a(i) != 0.0) r += a(i) * eval(A.anchor[static_cast<std::size_t>(i)].comp, cs);
      }
      t.add("anchor", r.norm(), {s});
    }
    if (k + 1 < p.segments.size()) {
      double jump = (eval_at(g.base, 1.0) - eval_at(p.segments[k + 1].base, 0.0)).norm();
      t.add("junction", jump, {static_cast<double>(k + 1)});
    }
  }
  t.finish(rep, opt.tolerance);
  return rep;
}

std::string Trajectory::csv() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << times[k];
    for (Eigen::Index i = 0; i < states[k].size(); ++i) out << ',' << states[k](i);
    out << '\n';
  }
  return out.str();
}

// Integration ------------------------------------------------------------------

namespace {

constexpr int kMaxDepth = 20;
constexpr double kBlowUp = 1e12;

class Stepper {
 public:
  Stepper(const APathSegment& seg, const ActionModel& act, double max_error)
      : seg_(seg), act_(act), sign_(side_sign(act.side)), max_error_(max_error) {}

  Eigen::VectorXd field(double s, const Eigen::VectorXd& u) const {
    Eigen::VectorXd a = eval_at(seg_.coef, s);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(u.size());
    std::span<const double> us(u.data(), static_cast<std::size_t>(u.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a(i) != 0.0) v += a(i) * eval(act_.fields[static_cast<std::size_t>(i)].comp, us);
    }
    return sign_ * v;
  }

  Eigen::VectorXd rk4(double s, const Eigen::VectorXd& u, double h) const {
    Eigen::VectorXd k1 = field(s, u);
    Eigen::VectorXd k2 = field(s + 0.5 * h, u + 0.5 * h * k1);
    Eigen::VectorXd k3 = field(s + 0.5 * h, u + 0.5 * h * k2);
    Eigen::VectorXd k4 = field(s + h, u + h * k3);
    return u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }

  Eigen::VectorXd step(double s, const Eigen::VectorXd& u, double h, int depth) {
    Eigen::VectorXd full = rk4(s, u, h);
    Eigen::VectorXd half = rk4(s + 0.5 * h, rk4(s, u, 0.5 * h), 0.5 * h);
    double err = (half - full).norm() / 15.0;
    if (!std::isfinite(err) || !full.allFinite() || full.norm() > kBlowUp) {
      fail(ErrorKind::StepCollapse, "trajectory blew up near s = " + std::to_string(s));
    }
    if (err <= max_error_) return full;
    if (depth >= kMaxDepth) {
      fail(ErrorKind::StepCollapse, "step size collapsed near s = " + std::to_string(s) + " (error " + std::to_string(err) + ")");
    }
    ++subdivisions;
    Eigen::VectorXd mid = step(s, u, 0.5 * h, depth + 1);
    return step(s + 0.5 * h, mid, 0.5 * h, depth + 1);
  }

  int subdivisions = 0;

 private:
  const APathSegment& seg_;
  const ActionModel& act_;
  double sign_;
  double max_error_;
};

Eigen::VectorXd flow(const VectorField& x, double time, Eigen::VectorXd u) {
  constexpr double kFlowStep = 0.01;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(time) / kFlowStep)));
  const double h = time / steps;
  auto f = [&](const Eigen::VectorXd& z) {
    return eval(x.comp, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
  };
  for (int n = 0; n < steps; ++n) {
    Eigen::VectorXd k1 = f(u);
    Eigen::VectorXd k2 = f(u + 0.5 * h * k1);
    Eigen::VectorXd k3 = f(u + 0.5 * h * k2);
    Eigen::VectorXd k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

}  // namespace

Trajectory integrate_apath(const APath& p, const ActionModel& act, std::span<const double> x0,
                           const IntegratorConfig& cfg) {
  require_path(p);
  if (!(cfg.h > 0) || !(cfg.max_error > 0)) fail(ErrorKind::InvalidArgument, "integrator step and error bound must be positive");
  if (p.algebroid != act.algebroid) fail(ErrorKind::AlgebroidMismatch, "path and action use different algebroids");
  if (static_cast<int>(x0.size()) != act.total->dim()) {
    fail(ErrorKind::InvalidArgument, "initial point has the wrong dimension");
  }
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  double gap = (apply_map(act.momentum, x0) - base_at(p, 0.0)).norm();
  if (gap > cfg.max_error) {
    fail(ErrorKind::InitialFiberMismatch, "mu(x0) is " + std::to_string(gap) + " away from c(0)");
  }
  const int stride = std::max(1, cfg.output_stride);
  Trajectory tr;
  auto record = [&](double t, const Eigen::VectorXd& y) {
    tr.times.push_back(t);
    tr.states.push_back(y);
    std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    tr.base_tracking = std::max(tr.base_tracking, (apply_map(act.momentum, ys) - base_at(p, t)).norm());
  };
  record(0.0, u);
  const double total = total_duration(p);
  double start = 0.0;
  for (const auto& seg : p.segments) {
    const double len = seg.duration / total;
    const int steps = std::max(1, static_cast<int>(std::lround(len / cfg.h)));
    const double hs = 1.0 / steps;
    Stepper stepper(seg, act, cfg.max_error);
    try {
      for (int n = 0; n < steps; ++n) {
        u = stepper.step(n * hs, u, hs, 0);
        if ((n + 1) % stride == 0 || n + 1 == steps) record(start + len * (n + 1) * hs, u);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EvaluationPole) throw;
      fail(ErrorKind::StepCollapse, std::string("trajectory reached a pole: ") + e.what());
    }
    tr.subdivisions += stepper.subdivisions;
    start += len;
  }
  return tr;
}

CheckReport check_transport_invariances(const APath& p, const ActionModel& act, std::span<const double> x0,
                                        const IntegratorConfig& cfg, const MoritaWitness* w, const CheckOptions& opt) {
  CheckReport rep;
  rep.kind = "transport_invariances";
  rep.id = p.label;
  ResidualTracker t;
  Point start(x0.begin(), x0.end());
  Trajectory tr = integrate_apath(p, act, x0, cfg);
  t.add("base_tracking", tr.base_tracking, start);
  Trajectory sq = integrate_apath(reparametrize_square(p), act, x0, cfg);
  t.add("reparametrization", (sq.end() - tr.end()).norm(), start);

  if (w) {
    const SmoothMap* other = nullptr;
    if (act.momentum.comp == w->j1.comp) {
      other = &w->j2;
    } else if (act.momentum.comp == w->j2.comp) {
      other = &w->j1;
    } else {
      fail(ErrorKind::InvalidArgument, "action is not one of the witness actions");
    }
    Eigen::VectorXd f0 = apply_map(*other, x0);
    for (const auto& u : tr.states) {
      std::span<const double> us(u.data(), static_cast<std::size_t>(u.size()));
      t.add("fiber_drift", (apply_map(*other, us) - f0).norm(), start);
    }
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
    t.declare("flow_commutation");
    for (const auto& a : w->left.fields) {
      for (const auto& b : w->right.fields) {
        for (int i = 0; i < 5; ++i) {
          for (int j = 0; j < 5; ++j) {
            double ta = 0.25 * i;
            double sb = 0.25 * j;
            Eigen::VectorXd ab = flow(a, ta, flow(b, sb, x));
            Eigen::VectorXd ba = flow(b, sb, flow(a, ta, x));
            t.add("flow_commutation", (ab - ba).norm(), {ta, sb});
          }
        }
      }
    }
  }
  t.finish(rep, opt.tolerance);
  rep.notes["subdivisions"] = std::to_string(tr.subdivisions);
  return rep;
}

PsiResult psi_transport(const MoritaWitness& w, std::span<const double> x_prime, std::span<const double> x,
                        const ActionModel& module, std::span<const double> n0, const APath& path,
                        const IntegratorConfig& cfg, const std::optional<ModuleMorphism>& morphism,
                        const CheckOptions& opt) {
  const Algebroid& a1 = w.left.algebroid;
  if (module.algebroid != a1 || path.algebroid != a1) {
    fail(ErrorKind::AlgebroidMismatch, "module and path must be over the left algebroid of the witness");
  }
  const double tol = std::max(opt.tolerance, cfg.max_error);
  if ((apply_map(w.j2, x_prime) - apply_map(w.j2, x)).norm() > tol) {
    fail(ErrorKind::BasePointMismatch, "J2(x') and J2(x) differ, so (x', x) is not in the fiber product");
  }
  if ((base_at(path, 0.0) - apply_map(w.j1, x_prime)).norm() > tol ||
      (base_at(path, 1.0) - apply_map(w.j1, x)).norm() > tol) {
    fail(ErrorKind::NoConnectingPath, "path '" + path.label + "' does not run from J1(x') to J1(x)");
  }
  auto valid = validate_apath(path, opt);
  if (!valid.passed()) {
    fail(ErrorKind::NoConnectingPath, "path '" + path.label + "' is not an A-path (residual " +
                                          std::to_string(valid.residual) + ")");
  }
  PsiResult res;
  res.trajectory = integrate_apath(path, module, n0, cfg);
  res.point = res.trajectory.end();
  CheckReport& rep = res.report;
  rep.kind = "psi_transport";
  rep.id = path.label;
  ResidualTracker t;
  Point start(n0.begin(), n0.end());
  t.add("base_tracking", res.trajectory.base_tracking, start);
  if (morphism) {
    if (morphism->target.algebroid != a1) fail(ErrorKind::AlgebroidMismatch, "morphism target is over another algebroid");
    Eigen::VectorXd fn0 = apply_map(morphism->map, n0);
    Trajectory moved = integrate_apath(path, morphism->target,
                                       std::span<const double>(fn0.data(), static_cast<std::size_t>(fn0.size())), cfg);
    Eigen::VectorXd f_end = apply_map(morphism->map, std::span<const double>(res.point.data(), static_cast<std::size_t>(res.point.size())));
    t.add("square", (f_end - moved.end()).norm(), start);
  }
  t.finish(rep, opt.tolerance);
  return res;
}

}  // namespace alab
