#include "alab/action.hpp"

#include <cmath>

#include "alab/error.hpp"
#include "alab/linalg.hpp"

namespace alab {

std::string_view to_string(Side s) { return s == Side::Right ? "right" : "left"; }

ActionModel make_action(std::string label, Algebroid a, SmoothMap momentum, std::vector<VectorField> fields, Side side,
                        double horizon) {
  require_same_chart(momentum.target, a->base, "action '" + label + "' momentum target");
  if (static_cast<int>(fields.size()) != a->rank) {
    fail(ErrorKind::RankMismatch, "action '" + label + "' has " + std::to_string(fields.size()) + " fields for rank " +
                                      std::to_string(a->rank));
  }
  for (const auto& f : fields) require_same_chart(f.chart, momentum.source, "action '" + label + "' field");
  if (!(horizon > 0)) fail(ErrorKind::InvalidArgument, "horizon must be positive");
  ActionModel m;
  m.label = std::move(label);
  m.algebroid = std::move(a);
  m.total = momentum.source;
  m.momentum = std::move(momentum);
  m.fields = std::move(fields);
  m.side = side;
  m.horizon = horizon;
  return m;
}

VectorField act(const ActionModel& a, const AlgebroidSection& s) {
  if (s.algebroid != a.algebroid) fail(ErrorKind::AlgebroidMismatch, "section is not of the acting algebroid");
  VectorField v = zero_vector_field(a.total);
  for (int i = 0; i < a.algebroid->rank; ++i) {
    const Expr& f = s.coef[static_cast<std::size_t>(i)];
    if (!f.is_zero()) v = v + pullback(a.momentum, f) * a.fields[static_cast<std::size_t>(i)];
  }
  return v;
}

namespace {

double norm_at(const std::vector<Expr>& comps, const Point& p) {
  double s = 0.0;
  for (const auto& e : comps) {
    if (e.is_zero()) continue;
    double v = e.eval(p);
    s += v * v;
  }
  return std::sqrt(s);
}

std::vector<Expr> mat_vec(const ExprMatrix& m, const std::vector<Expr>& v) {
  std::vector<Expr> out(static_cast<std::size_t>(m.rows));
  for (int i = 0; i < m.rows; ++i) {
    Expr s;
    for (int j = 0; j < m.cols; ++j) {
      if (!m(i, j).is_zero() && !v[static_cast<std::size_t>(j)].is_zero()) s += m(i, j) * v[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

Eigen::MatrixXd field_matrix(const std::vector<VectorField>& fields, int dim, const Point& p) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = eval(fields[i].comp, p);
  return m;
}

Status combine(Status a, Status b) {
  auto rank = [](Status s) {
    switch (s) {
      case Status::Pass: return 0;
      case Status::Inconclusive: return 1;
      case Status::Fail: return 2;
      case Status::Error: return 3;
    }
    return 3;
  };
  return rank(a) >= rank(b) ? a : b;
}

int submersion_defect(const SmoothMap& f, const Point& p) {
  return f.target->dim() - numeric_rank(jacobian_at(f, p));
}

}  // namespace

CheckReport check_action(const ActionModel& a, const CheckOptions& opt) {
  const auto& A = *a.algebroid;
  const double s = side_sign(a.side);
  ExprMatrix dmu = jacobian(a.momentum);
  std::vector<std::vector<Expr>> compat;
  for (int i = 0; i < A.rank; ++i) {
    auto lhs = mat_vec(dmu, a.fields[static_cast<std::size_t>(i)].comp);
    for (int k = 0; k < A.base->dim(); ++k) {
      Expr rho = pullback(a.momentum, A.anchor[static_cast<std::size_t>(i)].comp[static_cast<std::size_t>(k)]);
      lhs[static_cast<std::size_t>(k)] -= s > 0 ? rho : -rho;
    }
    compat.push_back(std::move(lhs));
  }
  std::vector<std::vector<Expr>> hom;
  for (int i = 0; i < A.rank; ++i) {
    for (int j = i + 1; j < A.rank; ++j) {
      VectorField d = lie_bracket(a.fields[static_cast<std::size_t>(i)], a.fields[static_cast<std::size_t>(j)]);
      for (int k = 0; k < A.rank; ++k) {
        Expr c = A.c(k, i, j);
        if (c.is_zero()) continue;
        d = d - (Expr(Number::real(s)) * pullback(a.momentum, c)) * a.fields[static_cast<std::size_t>(k)];
      }
      hom.push_back(d.comp);
    }
  }
  CheckReport rep;
  rep.kind = "action";
  rep.id = a.label;
  ResidualTracker t;
  t.declare("compatibility");
  t.declare("homomorphism");
  for (const auto& p : sample_points(a.total, opt.samples, opt.seed)) {
    for (const auto& d : compat) t.add("compatibility", norm_at(d, p), p);
    for (const auto& d : hom) t.add("homomorphism", norm_at(d, p), p);
  }
  t.finish(rep, opt.tolerance);
  rep.notes["side"] = std::string(to_string(a.side));
  return rep;
}

// Completeness ---------------------------------------------------------------------

namespace {

enum class FlowOutcome { Finite, BlowUp, Pole };

struct FlowRun {
  FlowOutcome outcome = FlowOutcome::Finite;
  Eigen::VectorXd end;
  double max_norm = 0.0;
};

FlowRun flow(const VectorField& x, Eigen::VectorXd y, double duration, int steps, double bound) {
  FlowRun run;
  const double h = duration / steps;
  auto f = [&](const Eigen::VectorXd& z) {
    return eval(x.comp, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
  };
  try {
    for (int n = 0; n < steps; ++n) {
      Eigen::VectorXd k1 = f(y);
      Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
      Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
      Eigen::VectorXd k4 = f(y + h * k3);
      y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      double nrm = y.norm();
      run.max_norm = std::max(run.max_norm, nrm);
      if (!std::isfinite(nrm) || nrm > bound) {
        run.outcome = FlowOutcome::BlowUp;
        run.end = y;
        return run;
      }
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EvaluationPole) throw;
    run.outcome = FlowOutcome::Pole;
  }
  run.end = y;
  return run;
}

}  // namespace

CompletenessResult probe_completeness(const std::vector<VectorField>& fields, const Chart& chart, double horizon,
                                      const CheckOptions& opt) {
  constexpr int kSteps = 400;
  CompletenessResult res;
  if (chart->dim() == 0 || fields.empty()) return res;
  auto starts = sample_points(chart, std::min(opt.samples, 16), opt.seed);
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    for (const auto& p : starts) {
      Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
      double speed = eval(fields[fi].comp, p).norm();
      // Far beyond anything linear growth from x0 could reach in time T.
      double bound = 1e6 * (1.0 + x0.norm() + chart->radius() + horizon * speed);
      for (double dir : {1.0, -1.0}) {
        VectorField v = Expr(Number::real(dir)) * fields[fi];
        FlowRun coarse = flow(v, x0, horizon, kSteps, bound);
        res.max_norm = std::max(res.max_norm, coarse.max_norm);
        std::string where = "field " + std::to_string(fi + 1) + (dir > 0 ? " forward" : " backward");
        if (coarse.outcome == FlowOutcome::BlowUp) {
          res.status = Status::Fail;
          res.detail = where + ": blow-up before t = " + std::to_string(horizon);
          return res;
        }
        if (coarse.outcome == FlowOutcome::Pole) {
          res.status = Status::Inconclusive;
          res.detail = where + ": trajectory reached a pole of the field";
          continue;
        }
        FlowRun fine = flow(v, x0, horizon, 2 * kSteps, bound);
        if (fine.outcome == FlowOutcome::BlowUp) {
          res.status = Status::Fail;
          res.detail = where + ": blow-up before t = " + std::to_string(horizon);
          return res;
        }
        if (fine.outcome == FlowOutcome::Pole || (coarse.end - fine.end).norm() > 1e-3 * (1.0 + fine.end.norm())) {
          res.status = Status::Inconclusive;
          res.detail = where + ": step-halving disagreement";
        }
      }
    }
  }
  return res;
}

CheckReport check_module(const ActionModel& a, const CheckOptions& opt) {
  CheckReport rep = check_action(a, opt);
  rep.kind = "module";
  int defect = 0;
  for (const auto& p : sample_points(a.total, opt.samples, opt.seed)) defect = std::max(defect, submersion_defect(a.momentum, p));
  rep.components["submersion_defect"] = defect;
  if (defect > 0) {
    rep.status = Status::Fail;
    rep.residual = std::max(rep.residual, static_cast<double>(defect));
  }
  auto comp = probe_completeness(a.fields, a.total, a.horizon, opt);
  rep.notes["completeness"] = std::string(to_string(comp.status));
  if (!comp.detail.empty()) rep.notes["completeness_detail"] = comp.detail;
  rep.status = combine(rep.status, comp.status);
  return rep;
}

ActionModel unique_lift_action(const Algebroid& a, const SmoothMap& j, const CheckOptions& opt) {
  require_same_chart(j.target, a->base, "unique lift");
  const int n = j.source->dim();
  const int r = a->rank;
  auto pts = sample_points(j.source, opt.samples, opt.seed);
  Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(n + r, n);
  tangent.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  for (const auto& p : pts) {
    Eigen::MatrixXd fiber = pullback_fiber(*a, j, p);
    if (intersection_dim(fiber, tangent) > 0) {
      fail(ErrorKind::IntersectionNontrivial, "pullback fiber meets the tangent space of '" + j.source->name() +
                                                  "' nontrivially, so lifts are not unique");
    }
  }
  if (j.target->dim() != n) fail(ErrorKind::InvalidArgument, "unique lift needs J to be a local diffeomorphism");
  ExprMatrix rhs(n, r);
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < n; ++k) rhs(k, i) = pullback(j, a->anchor[static_cast<std::size_t>(i)].comp[static_cast<std::size_t>(k)]);
  }
  ExprMatrix u = solve_symbolic(jacobian(j), rhs, pts);
  std::vector<VectorField> fields;
  for (int i = 0; i < r; ++i) {
    VectorField v = zero_vector_field(j.source);
    for (int k = 0; k < n; ++k) v.comp[static_cast<std::size_t>(k)] = u(k, i);
    fields.push_back(v);
  }
  return make_action(a->label + "^!", a, j, std::move(fields), Side::Right);
}

// Quotients ----------------------------------------------------------------------------

CheckReport check_quotient(const QuotientChartModel& q, const CheckOptions& opt) {
  require_same_chart(q.projection.source, q.total, "quotient projection");
  require_same_chart(q.projection.target, q.leaf, "quotient projection");
  require_same_chart(q.section.source, q.leaf, "quotient section");
  require_same_chart(q.section.target, q.total, "quotient section");
  CheckReport rep;
  rep.kind = "quotient";
  rep.id = q.total->name() + "/" + q.leaf->name();
  ResidualTracker t;
  t.declare("section");
  t.declare("projection_rank_defect");
  SmoothMap round = compose(q.projection, q.section);
  for (const auto& l : sample_points(q.leaf, opt.samples, opt.seed)) {
    Eigen::VectorXd lv = Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
    t.add("section", (apply_map(round, l) - lv).norm(), l);
  }
  for (const auto& x : sample_points(q.total, opt.samples, opt.seed)) {
    t.add("projection_rank_defect", submersion_defect(q.projection, x), x);
  }
  t.finish(rep, opt.tolerance);
  return rep;
}

CheckReport leaf_action_check(const ActionModel& a, const QuotientChartModel& q, const CheckOptions& opt) {
  require_same_chart(a.total, q.total, "leaf action");
  auto qrep = check_quotient(q, opt);
  if (!qrep.passed()) {
    fail(ErrorKind::ProjectionIllDefined, "quotient chart is inconsistent (residual " + std::to_string(qrep.residual) + ")");
  }
  ExprMatrix dpi = jacobian(q.projection);
  std::vector<std::vector<Expr>> pushed;
  for (const auto& x : a.fields) pushed.push_back(mat_vec(dpi, x.comp));

  double worst = 0.0;
  Point worst_at;
  for (const auto& x : sample_points(a.total, opt.samples, opt.seed)) {
    Eigen::VectorXd l = apply_map(q.projection, x);
    Eigen::VectorXd xs = apply_map(q.section, std::span<const double>(l.data(), static_cast<std::size_t>(l.size())));
    std::span<const double> xs_span(xs.data(), static_cast<std::size_t>(xs.size()));
    double r = (apply_map(a.momentum, x) - apply_map(a.momentum, xs_span)).norm();
    for (const auto& v : pushed) r = std::max(r, (eval(v, x) - eval(v, xs_span)).norm());
    if (r > worst) {
      worst = r;
      worst_at = x;
    }
  }
  if (!(worst < opt.tolerance)) {
    fail(ErrorKind::ProjectionIllDefined, "projected fields depend on the point in the fiber (residual " +
                                              std::to_string(worst) + ")");
  }
  std::vector<VectorField> projected;
  for (const auto& v : pushed) {
    VectorField w = zero_vector_field(q.leaf);
    for (std::size_t k = 0; k < v.size(); ++k) w.comp[k] = v[k].substitute(q.section.comp);
    projected.push_back(w);
  }
  ActionModel bar = make_action(a.label + "/" + q.leaf->name(), a.algebroid, compose(a.momentum, q.section),
                                std::move(projected), a.side, a.horizon);
  CheckReport rep = check_action(bar, opt);
  rep.kind = "leaf_action";
  rep.components["fiber_dependence"] = worst;
  return rep;
}

// Morita witnesses ------------------------------------------------------------------------

namespace {

void require_witness_shape(const MoritaWitness& w) {
  require_same_chart(w.j1.source, w.total, "witness J1");
  require_same_chart(w.j2.source, w.total, "witness J2");
  require_same_chart(w.left.total, w.total, "witness left action");
  require_same_chart(w.right.total, w.total, "witness right action");
  if (w.left.side != Side::Left || w.right.side != Side::Right) {
    fail(ErrorKind::InvalidArgument, "witness needs a left action of A1 and a right action of A2");
  }
  if (!(w.left.momentum.comp == w.j1.comp) || !(w.right.momentum.comp == w.j2.comp)) {
    fail(ErrorKind::InvalidArgument, "witness actions must use J1 and J2 as momentum maps");
  }
}

}  // namespace

CheckReport check_quasi_equivalence(const MoritaWitness& w, const CheckOptions& opt) {
  require_witness_shape(w);
  auto lrep = check_action(w.left, opt);
  auto rrep = check_action(w.right, opt);
  CheckReport rep;
  rep.kind = "quasi_equivalence";
  rep.id = w.label;
  ResidualTracker t;
  t.declare("left_span_vs_ker_dJ2");
  t.declare("right_span_vs_ker_dJ1");
  t.declare("submersion_defect");
  const int n = w.total->dim();
  int rank_ok = 0;
  auto pts = sample_points(w.total, opt.samples, opt.seed);
  for (const auto& p : pts) {
    Eigen::MatrixXd s1 = field_matrix(w.left.fields, n, p);
    Eigen::MatrixXd s2 = field_matrix(w.right.fields, n, p);
    Eigen::MatrixXd k2 = null_space(jacobian_at(w.j2, p));
    Eigen::MatrixXd k1 = null_space(jacobian_at(w.j1, p));
    if (n == 0) {
      k1.resize(0, 0);
      k2.resize(0, 0);
    }
    t.add("left_span_vs_ker_dJ2", n == 0 ? 0.0 : subspace_distance(s1, k2), p);
    t.add("right_span_vs_ker_dJ1", n == 0 ? 0.0 : subspace_distance(s2, k1), p);
    bool eq = n == 0 || (compare_subspaces(s1, k2).equal() && compare_subspaces(s2, k1).equal());
    rank_ok += eq ? 1 : 0;
    t.add("submersion_defect", std::max(submersion_defect(w.j1, p), submersion_defect(w.j2, p)), p);
  }
  t.add("left_action", lrep.residual, lrep.worst_point);
  t.add("right_action", rrep.residual, rrep.worst_point);
  t.finish(rep, opt.tolerance);
  rep.notes["rank_equalities"] = std::to_string(rank_ok) + "/" + std::to_string(pts.size());
  if (rank_ok != static_cast<int>(pts.size())) rep.status = Status::Fail;
  // With the subbundles represented as graphs of the two actions, the
  // zero-section and projection conditions hold by construction.
  rep.notes["zero_section_condition"] = "derived";
  rep.notes["projection_condition"] = "derived";
  return rep;
}

CheckReport check_strong_morita(const MoritaWitness& w, const CheckOptions& opt) {
  CheckReport rep = check_quasi_equivalence(w, opt);
  rep.kind = "strong_morita";
  std::vector<std::vector<Expr>> comms;
  for (const auto& x : w.left.fields) {
    for (const auto& y : w.right.fields) comms.push_back(lie_bracket(x, y).comp);
  }
  double worst = 0.0;
  for (const auto& p : sample_points(w.total, opt.samples, opt.seed)) {
    for (const auto& c : comms) worst = std::max(worst, norm_at(c, p));
  }
  rep.components["commutators"] = worst;
  rep.residual = std::max(rep.residual, worst);
  if (!(worst < opt.tolerance)) rep.status = Status::Fail;
  auto cl = probe_completeness(w.left.fields, w.total, w.horizon, opt);
  auto cr = probe_completeness(w.right.fields, w.total, w.horizon, opt);
  rep.notes["completeness_left"] = std::string(to_string(cl.status));
  rep.notes["completeness_right"] = std::string(to_string(cr.status));
  if (!cl.detail.empty()) rep.notes["completeness_left_detail"] = cl.detail;
  if (!cr.detail.empty()) rep.notes["completeness_right_detail"] = cr.detail;
  rep.status = combine(rep.status, combine(cl.status, cr.status));
  return rep;
}

ActionModel poisson_map_action(std::string label, const Algebroid& cotangent, const Bivector& pi_x, const SmoothMap& j,
                               Side side, double horizon) {
  require_same_chart(pi_x.chart, j.source, "Poisson map action");
  std::vector<VectorField> fields;
  for (int i = 0; i < j.target->dim(); ++i) {
    fields.push_back(Expr(-1) * sharp(pi_x, pullback(j, coordinate_differential(j.target, i))));
  }
  return make_action(std::move(label), cotangent, j, std::move(fields), side, horizon);
}

MoritaWitness make_dual_pair_witness(std::string label, const Bivector& pi_x, const Algebroid& a1, const SmoothMap& j1,
                                     const Algebroid& a2, const SmoothMap& j2, double horizon) {
  MoritaWitness w;
  w.label = std::move(label);
  w.total = pi_x.chart;
  w.j1 = j1;
  w.j2 = j2;
  w.left = poisson_map_action(w.label + ".left", a1, pi_x, j1, Side::Left, horizon);
  w.right = poisson_map_action(w.label + ".right", a2, pi_x, j2, Side::Right, horizon);
  w.horizon = horizon;
  return w;
}

ActionModel reverse_side(const ActionModel& a) {
  ActionModel r = a;
  r.algebroid = make_opposite(a.algebroid);
  r.side = a.side == Side::Left ? Side::Right : Side::Left;
  return r;
}

ActionModel change_frame(const ActionModel& a, const ExprMatrix& g, const std::vector<Point>& samples) {
  ActionModel r = a;
  r.algebroid = change_frame(a.algebroid, g, samples);
  r.momentum.target = r.algebroid->base;
  r.fields.clear();
  for (int i = 0; i < g.cols; ++i) {
    VectorField v = zero_vector_field(a.total);
    for (int j = 0; j < g.rows; ++j) {
      if (!g(j, i).is_zero()) v = v + pullback(a.momentum, g(j, i)) * a.fields[static_cast<std::size_t>(j)];
    }
    r.fields.push_back(v);
  }
  return r;
}

// Tensor distribution --------------------------------------------------------------------

namespace {

VectorField embed(const VectorField& v, const Chart& product, int offset, double sign) {
  VectorField w = zero_vector_field(product);
  const int n = v.chart->dim();
  for (int k = 0; k < n; ++k) {
    Expr e = shift_variables(v.comp[static_cast<std::size_t>(k)], offset, n);
    w.comp[static_cast<std::size_t>(offset + k)] = sign > 0 ? e : -e;
  }
  return w;
}

SmoothMap embed_map(const SmoothMap& f, const Chart& product, int offset) {
  SmoothMap g{product, f.target, {}};
  for (const auto& c : f.comp) g.comp.push_back(shift_variables(c, offset, f.source->dim()));
  return g;
}

}  // namespace

TensorResult tensor_distribution(const TensorData& d, std::span<const double> x, std::span<const double> y,
                                 const CheckOptions& opt) {
  if (d.right.side != Side::Right || d.left.side != Side::Left) {
    fail(ErrorKind::InvalidArgument, "tensor product needs a right action on X and a left action on Y");
  }
  if (d.right.algebroid->rank != d.left.algebroid->rank || !same_chart(d.right.algebroid->base, d.left.algebroid->base)) {
    fail(ErrorKind::AlgebroidMismatch, "the two actions are not over the same algebroid");
  }
  Eigen::VectorXd jx = apply_map(d.right.momentum, x);
  Eigen::VectorXd ky = apply_map(d.left.momentum, y);
  if ((jx - ky).norm() > std::max(opt.tolerance, 1e-8)) {
    fail(ErrorKind::BasePointMismatch, "(x, y) is not on the fiber product");
  }
  const Chart& cx = d.right.total;
  const Chart& cy = d.left.total;
  Chart prod = product_chart(cx, cy);
  const int nx = cx->dim();
  std::vector<VectorField> gens;
  for (std::size_t i = 0; i < d.right.fields.size(); ++i) {
    gens.push_back(embed(d.right.fields[i], prod, 0, 1.0) + embed(d.left.fields[i], prod, nx, -1.0));
  }
  Point z(x.begin(), x.end());
  z.insert(z.end(), y.begin(), y.end());

  TensorResult out;
  out.basis = orthonormal_basis(field_matrix(gens, prod->dim(), z));
  CheckReport& rep = out.report;
  rep.kind = "tensor_distribution";
  rep.id = d.right.label + "*" + d.left.label;
  ResidualTracker t;
  t.declare("involutivity");
  std::vector<VectorField> brackets;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = i + 1; j < gens.size(); ++j) brackets.push_back(lie_bracket(gens[i], gens[j]));
  }
  auto pts = sample_points(prod, opt.samples, opt.seed);
  pts.insert(pts.begin(), z);
  for (const auto& p : pts) {
    Eigen::MatrixXd span = field_matrix(gens, prod->dim(), p);
    for (const auto& b : brackets) t.add("involutivity", span_residual(span, eval(b.comp, p)), p);
  }

  if (d.quotient && d.outer_left && d.outer_right) {
    const auto& q = *d.quotient;
    require_same_chart(q.total, prod, "tensor quotient");
    ExprMatrix dpi = jacobian(q.projection);
    std::vector<VectorField> xi1;
    for (const auto& v : d.outer_left->fields) xi1.push_back(embed(v, prod, 0, 1.0));
    std::vector<VectorField> eta3;
    for (const auto& v : d.outer_right->fields) eta3.push_back(embed(v, prod, nx, 1.0));
    SmoothMap j1 = compose(embed_map(d.outer_left->momentum, prod, 0), q.section);
    SmoothMap k3 = compose(embed_map(d.outer_right->momentum, prod, nx), q.section);
    t.declare("kernel_J1");
    t.declare("kernel_K3");
    for (const auto& l : sample_points(q.leaf, opt.samples, opt.seed)) {
      Eigen::VectorXd s = apply_map(q.section, l);
      std::span<const double> sp(s.data(), static_cast<std::size_t>(s.size()));
      Eigen::MatrixXd dp = dpi.eval(sp);
      Eigen::MatrixXd xi_hat = dp * field_matrix(xi1, prod->dim(), Point(s.data(), s.data() + s.size()));
      Eigen::MatrixXd eta_hat = dp * field_matrix(eta3, prod->dim(), Point(s.data(), s.data() + s.size()));
      t.add("kernel_J1", subspace_distance(null_space(jacobian_at(j1, l)), eta_hat), l);
      t.add("kernel_K3", subspace_distance(null_space(jacobian_at(k3, l)), xi_hat), l);
    }
  }
  t.finish(rep, opt.tolerance);
  rep.notes["rank"] = std::to_string(out.basis.cols());
  return out;
}

}  // namespace alab
