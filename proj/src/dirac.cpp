#include "alab/dirac.hpp"

#include "alab/error.hpp"
#include "alab/linalg.hpp"

namespace alab {

GeneralizedSection generalized(const VectorField& x, const OneForm& a) {
  require_same_chart(x.chart, a.chart, "generalized section");
  return {x, a};
}

GeneralizedSection operator+(const GeneralizedSection& a, const GeneralizedSection& b) {
  return {a.vec + b.vec, a.form + b.form};
}

GeneralizedSection operator*(const Expr& f, const GeneralizedSection& a) { return {f * a.vec, f * a.form}; }

bool operator==(const GeneralizedSection& a, const GeneralizedSection& b) { return a.vec == b.vec && a.form == b.form; }

ScalarField pairing(const GeneralizedSection& s1, const GeneralizedSection& s2) {
  require_same_chart(s1.vec.chart, s2.vec.chart, "pairing");
  return ScalarField{s1.vec.chart, interior(s1.vec, s2.form).expr + interior(s2.vec, s1.form).expr};
}

GeneralizedSection dorfman_bracket(const GeneralizedSection& s1, const GeneralizedSection& s2) {
  require_same_chart(s1.vec.chart, s2.vec.chart, "bracket");
  return {lie_bracket(s1.vec, s2.vec), lie_derivative(s1.vec, s2.form) - interior(s2.vec, exterior_d(s1.form))};
}

GeneralizedSection courant_bracket(const GeneralizedSection& s1, const GeneralizedSection& s2) {
  require_same_chart(s1.vec.chart, s2.vec.chart, "bracket");
  const Chart& c = s1.vec.chart;
  Expr skew = interior(s1.vec, s2.form).expr - interior(s2.vec, s1.form).expr;
  OneForm form = lie_derivative(s1.vec, s2.form) - lie_derivative(s2.vec, s1.form) -
                 Expr(Number::rational(1, 2)) * exterior_d(ScalarField{c, skew});
  return {lie_bracket(s1.vec, s2.vec), form};
}

Eigen::MatrixXd DiracStructureModel::frame_matrix(std::span<const double> p) const {
  const auto n = static_cast<Eigen::Index>(chart->dim());
  Eigen::MatrixXd m(2 * n, static_cast<Eigen::Index>(frame.size()));
  for (std::size_t a = 0; a < frame.size(); ++a) {
    auto col = static_cast<Eigen::Index>(a);
    m.block(0, col, n, 1) = eval(frame[a].vec.comp, p);
    m.block(n, col, n, 1) = eval(frame[a].form.comp, p);
  }
  return m;
}

DiracStructureModel make_dirac(std::string label, const Chart& chart, std::vector<GeneralizedSection> frame) {
  if (static_cast<int>(frame.size()) != chart->dim()) {
    fail(ErrorKind::RankMismatch, "Dirac structure '" + label + "' needs " + std::to_string(chart->dim()) +
                                      " frame sections, got " + std::to_string(frame.size()));
  }
  for (const auto& s : frame) {
    require_same_chart(s.vec.chart, chart, "Dirac frame");
    require_same_chart(s.form.chart, chart, "Dirac frame");
  }
  return DiracStructureModel{std::move(label), chart, std::move(frame), std::nullopt};
}

DiracStructureModel graph_of_bivector(const Bivector& pi, std::string label) {
  std::vector<GeneralizedSection> frame;
  for (int i = 0; i < pi.chart->dim(); ++i) {
    OneForm dx = coordinate_differential(pi.chart, i);
    frame.push_back({sharp(pi, dx), dx});
  }
  return make_dirac(std::move(label), pi.chart, std::move(frame));
}

DiracStructureModel graph_of_two_form(const TwoForm& b, std::string label) {
  std::vector<GeneralizedSection> frame;
  for (int i = 0; i < b.chart->dim(); ++i) {
    VectorField d = coordinate_field(b.chart, i);
    frame.push_back({d, interior(d, b)});
  }
  return make_dirac(std::move(label), b.chart, std::move(frame));
}

CheckReport check_dirac(const DiracStructureModel& d, const CheckOptions& opt) {
  const std::size_t n = d.frame.size();
  std::vector<Expr> pairings;
  std::vector<GeneralizedSection> brackets;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) pairings.push_back(pairing(d.frame[a], d.frame[b]).expr);
    for (std::size_t b = a + 1; b < n; ++b) brackets.push_back(courant_bracket(d.frame[a], d.frame[b]));
  }
  CheckReport rep;
  rep.kind = "dirac";
  rep.id = d.label;
  ResidualTracker t;
  t.declare("isotropy");
  t.declare("rank_deficit");
  t.declare("involutivity");
  for (const auto& p : sample_points(d.chart, opt.samples, opt.seed)) {
    for (const auto& e : pairings) t.add("isotropy", std::abs(e.eval(p)), p);
    Eigen::MatrixXd f = d.frame_matrix(p);
    t.add("rank_deficit", static_cast<double>(static_cast<int>(n) - numeric_rank(f)), p);
    for (const auto& s : brackets) {
      Eigen::VectorXd v(f.rows());
      v << eval(s.vec.comp, p), eval(s.form.comp, p);
      t.add("involutivity", span_residual(f, v), p);
    }
  }
  t.finish(rep, opt.tolerance);
  return rep;
}

DiracStructureModel certify(const DiracStructureModel& d, const CheckOptions& opt) {
  DiracStructureModel out = d;
  out.certificate = check_dirac(d, opt);
  return out;
}

GaugeResult gauge_transform(const DiracStructureModel& d, const TwoForm& b, const CheckOptions& opt) {
  require_same_chart(b.chart, d.chart, "gauge transform");
  GaugeResult res;
  std::vector<GeneralizedSection> frame;
  for (const auto& s : d.frame) frame.push_back({s.vec, s.form + interior(s.vec, b)});
  res.structure = make_dirac("tau(" + d.label + ")", d.chart, std::move(frame));
  ThreeForm db = exterior_d(b);
  for (const auto& p : sample_points(d.chart, opt.samples, opt.seed)) {
    double s = 0.0;
    for (const auto& e : db.upper) {
      if (e.is_zero()) continue;
      double v = e.eval(p);
      s += v * v;
    }
    res.closedness_residual = std::max(res.closedness_residual, std::sqrt(s));
  }
  res.closed = res.closedness_residual < opt.tolerance;
  if (d.certificate) res.structure = certify(res.structure, opt);
  return res;
}

double frame_span_distance(const DiracStructureModel& a, const DiracStructureModel& b, const CheckOptions& opt) {
  require_same_chart(a.chart, b.chart, "frame comparison");
  double worst = 0.0;
  for (const auto& p : sample_points(a.chart, opt.samples, opt.seed)) {
    worst = std::max(worst, subspace_distance(a.frame_matrix(p), b.frame_matrix(p)));
  }
  return worst;
}

CheckReport check_dirac_map(const DiracMapData& dm, DiracMapMode mode, const CheckOptions& opt) {
  require_same_chart(dm.map.source, dm.source.chart, "Dirac map source");
  require_same_chart(dm.map.target, dm.target.chart, "Dirac map target");
  const auto nn = static_cast<Eigen::Index>(dm.source.chart->dim());
  const auto nm = static_cast<Eigen::Index>(dm.target.chart->dim());
  CheckReport rep;
  rep.kind = "dirac_map";
  rep.id = dm.source.label + "->" + dm.target.label;
  ResidualTracker t;
  t.declare("forward");
  if (mode == DiracMapMode::Strong) t.declare("kernel_intersection");
  int rank_ok = 0;
  auto pts = sample_points(dm.source.chart, opt.samples, opt.seed);
  for (const auto& p : pts) {
    Eigen::MatrixXd fn = dm.source.frame_matrix(p);
    Eigen::MatrixXd vn = fn.topRows(nn);
    Eigen::MatrixXd an = fn.bottomRows(nn);
    Eigen::MatrixXd j = jacobian_at(dm.map, p);
    // (c, b) with an c = J^T b; the image is (J vn c, b).
    Eigen::MatrixXd sys(nn, nn + nm);
    sys << an, -j.transpose();
    Eigen::MatrixXd ker = null_space(sys);
    Eigen::MatrixXd image(2 * nm, ker.cols());
    if (ker.cols() > 0) image << j * vn * ker.topRows(nn), ker.bottomRows(nm);
    Eigen::VectorXd fp = apply_map(dm.map, p);
    Eigen::MatrixXd target = dm.target.frame_matrix(std::span<const double>(fp.data(), static_cast<std::size_t>(fp.size())));
    t.add("forward", subspace_distance(image, target), p);
    rank_ok += compare_subspaces(image, target).equal() ? 1 : 0;
    if (mode == DiracMapMode::Strong) {
      Eigen::MatrixXd kn = null_space(an);
      Eigen::MatrixXd kernel_d = kn.cols() ? Eigen::MatrixXd(vn * kn) : Eigen::MatrixXd(nn, 0);
      Eigen::MatrixXd kernel_f = null_space(j);
      if (kernel_f.cols() == 0) kernel_f.resize(nn, 0);
      t.add("kernel_intersection", intersection_dim(kernel_f, kernel_d), p);
    }
  }
  t.finish(rep, opt.tolerance);
  rep.notes["mode"] = mode == DiracMapMode::Strong ? "strong" : "forward";
  rep.notes["rank_equalities"] = std::to_string(rank_ok) + "/" + std::to_string(pts.size());
  if (rank_ok != static_cast<int>(pts.size())) rep.status = Status::Fail;
  return rep;
}

namespace {

ExprMatrix frame_expr(const DiracStructureModel& d) {
  const int n = d.chart->dim();
  ExprMatrix m(2 * n, static_cast<int>(d.frame.size()));
  for (std::size_t a = 0; a < d.frame.size(); ++a) {
    for (int k = 0; k < n; ++k) {
      m(k, static_cast<int>(a)) = d.frame[a].vec.comp[static_cast<std::size_t>(k)];
      m(n + k, static_cast<int>(a)) = d.frame[a].form.comp[static_cast<std::size_t>(k)];
    }
  }
  return m;
}

}  // namespace

Algebroid make_dirac_algebroid(const DiracStructureModel& d, const CheckOptions& opt) {
  DiracStructureModel c = d.certificate ? d : certify(d, opt);
  if (!c.certified()) {
    fail(ErrorKind::InvalidArgument, "'" + d.label + "' is not a Dirac structure (residual " +
                                         std::to_string(c.certificate->residual) + ")");
  }
  const int n = d.chart->dim();
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  ExprMatrix rhs(2 * n, static_cast<int>(pairs.size()));
  for (std::size_t col = 0; col < pairs.size(); ++col) {
    auto s = courant_bracket(d.frame[static_cast<std::size_t>(pairs[col].first)],
                             d.frame[static_cast<std::size_t>(pairs[col].second)]);
    for (int k = 0; k < n; ++k) {
      rhs(k, static_cast<int>(col)) = s.vec.comp[static_cast<std::size_t>(k)];
      rhs(n + k, static_cast<int>(col)) = s.form.comp[static_cast<std::size_t>(k)];
    }
  }
  std::vector<AntisymmetricTable> structure(static_cast<std::size_t>(n), AntisymmetricTable(n));
  if (!pairs.empty()) {
    ExprMatrix coef = solve_symbolic(frame_expr(d), rhs, sample_points(d.chart, opt.samples, opt.seed));
    for (std::size_t col = 0; col < pairs.size(); ++col) {
      for (int k = 0; k < n; ++k) structure[static_cast<std::size_t>(k)].set(pairs[col].first, pairs[col].second, coef(k, static_cast<int>(col)));
    }
  }
  std::vector<VectorField> anchor;
  for (const auto& s : d.frame) anchor.push_back(s.vec);
  return make_algebroid(d.label, d.chart, std::move(anchor), std::move(structure));
}

ActionModel induced_dirac_action(const DiracMapData& dm, const CheckOptions& opt) {
  auto strong = check_dirac_map(dm, DiracMapMode::Strong, opt);
  DiracStructureModel src = dm.source.certificate ? dm.source : certify(dm.source, opt);
  if (!strong.passed() || !src.certified()) {
    fail(ErrorKind::NotCertifiedStrong, "'" + dm.source.label + "' -> '" + dm.target.label +
                                            "' is not a certified strong Dirac map");
  }
  Algebroid target = make_dirac_algebroid(dm.target, opt);
  const int nn = dm.source.chart->dim();
  const int nm = dm.target.chart->dim();
  ExprMatrix fn = frame_expr(dm.source);
  ExprMatrix j = jacobian(dm.map);
  // [form(F_N); J vec(F_N)] c = [J^T (b_a o F); V_a o F]
  ExprMatrix lhs(nn + nm, nn);
  for (int r = 0; r < nn; ++r) {
    for (int c = 0; c < nn; ++c) lhs(r, c) = fn(nn + r, c);
  }
  for (int r = 0; r < nm; ++r) {
    for (int c = 0; c < nn; ++c) {
      Expr s;
      for (int k = 0; k < nn; ++k) {
        if (!j(r, k).is_zero() && !fn(k, c).is_zero()) s += j(r, k) * fn(k, c);
      }
      lhs(nn + r, c) = s;
    }
  }
  const int rank = static_cast<int>(dm.target.frame.size());
  ExprMatrix rhs(nn + nm, rank);
  for (int a = 0; a < rank; ++a) {
    const auto& sec = dm.target.frame[static_cast<std::size_t>(a)];
    for (int r = 0; r < nn; ++r) {
      Expr s;
      for (int k = 0; k < nm; ++k) {
        if (!j(k, r).is_zero()) s += j(k, r) * pullback(dm.map, sec.form.comp[static_cast<std::size_t>(k)]);
      }
      rhs(r, a) = s;
    }
    for (int k = 0; k < nm; ++k) rhs(nn + k, a) = pullback(dm.map, sec.vec.comp[static_cast<std::size_t>(k)]);
  }
  ExprMatrix coef;
  try {
    coef = solve_symbolic(lhs, rhs, sample_points(dm.source.chart, opt.samples, opt.seed));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RankMismatch) throw;
    fail(ErrorKind::UniquenessFailure, std::string("induced action is not unique: ") + e.what());
  }
  std::vector<VectorField> fields;
  for (int a = 0; a < rank; ++a) {
    VectorField z = zero_vector_field(dm.source.chart);
    for (int c = 0; c < nn; ++c) {
      if (coef(c, a).is_zero()) continue;
      z = z + coef(c, a) * dm.source.frame[static_cast<std::size_t>(c)].vec;
    }
    fields.push_back(z);
  }
  return make_action("zeta(" + dm.source.label + "->" + dm.target.label + ")", target, dm.map, std::move(fields),
                     Side::Right);
}

DiracMapData gauge_dirac_map(const DiracMapData& dm, const TwoForm& b, const CheckOptions& opt) {
  auto tm = gauge_transform(dm.target, b, opt);
  auto tn = gauge_transform(dm.source, pullback(dm.map, b), opt);
  return DiracMapData{tn.structure, tm.structure, dm.map};
}

}  // namespace alab
