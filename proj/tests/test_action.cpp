#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "alab/action.hpp"
#include "alab/error.hpp"
#include "alab/linalg.hpp"

using namespace alab;

namespace {

Expr P(const char* s, int dim) { return parse_expression(s, dim); }

struct DualPair {
  Chart x = make_cube("X", 4, -2, 2);
  Chart m = make_cube("M", 2, -2, 2);
  // Coordinates (x1, y1, x2, y2) are x1..x4.
  Bivector pi_s = bivector(x, {{0, 1, "1"}, {2, 3, "-1"}});
  Algebroid a = make_cotangent(bivector(m, {{0, 1, "1"}}), "A");
  SmoothMap j1 = smooth_map(x, m, {"x1", "x2"});
  SmoothMap j2 = smooth_map(x, m, {"x3", "x4"});
  MoritaWitness w = make_dual_pair_witness("dual", pi_s, a, j1, a, j2);
};

ExprMatrix random_frame(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_int_distribution<int> var(0, dim - 1);
  // Unit upper triangular times a diagonal that never vanishes.
  ExprMatrix g(2, 2);
  g(0, 0) = Expr(2) + P("sin(x1)", dim);
  g(1, 1) = Expr(1 + std::abs(coef(rng)));
  g(0, 1) = Expr(coef(rng)) * Expr::variable(var(rng)) + Expr(coef(rng));
  g(1, 0) = Expr();
  return g;
}

}  // namespace

TEST_CASE("tangent action") {
  auto r2 = make_cube("R2", 2, -1, 1);
  auto t = make_tangent(r2);
  auto a = make_action("id", t, identity_map(r2), {coordinate_field(r2, 0), coordinate_field(r2, 1)}, Side::Right);
  auto rep = check_action(a);
  CHECK(rep.status == Status::Pass);
  CHECK(rep.residual == 0.0);
  auto v = act(a, section(t, {P("x2", 2), Expr(3)}));
  CHECK(v.comp == std::vector<Expr>{P("x2", 2), Expr(3)});
}

TEST_CASE("cotangent action from a Poisson bivector") {
  // Pi = d1^d2, so Pi#dx1 = -d2 and Pi#dx2 = d1. X_i = -Pi#(dx_i) gives
  // X_1 = d2, X_2 = -d1 while rho(e_1) = -d2, rho(e_2) = d1.
  auto r2 = make_cube("R2", 2, -1, 1);
  auto pi = bivector(r2, {{0, 1, "1"}});
  auto a = make_cotangent(pi);
  auto act_left = poisson_map_action("q", a, pi, identity_map(r2), Side::Left);
  CHECK(act_left.fields[0].comp == std::vector<Expr>{Expr(), Expr(1)});
  CHECK(act_left.fields[1].comp == std::vector<Expr>{Expr(-1), Expr()});
  CHECK(check_action(act_left).status == Status::Pass);

  auto flipped = act_left;
  flipped.fields[1] = Expr(-1) * flipped.fields[1];
  auto rep = check_action(flipped);
  CHECK(rep.status == Status::Fail);
  // |X_2 + rho(e_2)| after the flip is |d1 + d1| = 2 |rho(e_2)|.
  CHECK(rep.component("compatibility") == doctest::Approx(2.0));
  CHECK(rep.component("homomorphism") == doctest::Approx(0.0));

  // As a right action of the opposite algebroid nothing changes.
  auto rev = reverse_side(act_left);
  CHECK(rev.side == Side::Right);
  CHECK(check_action(rev).status == Status::Pass);
  auto wrong_side = act_left;
  wrong_side.side = Side::Right;
  CHECK(check_action(wrong_side).status == Status::Fail);
}

TEST_CASE("curved cotangent action and frame change") {
  auto r2 = make_cube("R2", 2, -1, 1);
  auto pi = bivector(r2, {{0, 1, "x1"}});
  auto a = make_cotangent(pi);
  auto good = poisson_map_action("q", a, pi, identity_map(r2), Side::Left);
  auto bad = good;
  bad.fields[0] = bad.fields[0] + coordinate_field(r2, 0);
  auto bad_hom = good;
  bad_hom.fields[0] = P("1+x2^2", 2) * bad_hom.fields[0];
  REQUIRE(check_action(good).status == Status::Pass);
  REQUIRE(check_action(bad).status == Status::Fail);
  REQUIRE(check_action(bad_hom).status == Status::Fail);

  std::mt19937_64 rng(7);
  auto pts = sample_points(r2, 16, 3);
  for (int trial = 0; trial < 5; ++trial) {
    ExprMatrix g = random_frame(rng, 2);
    CHECK(check_action(change_frame(good, g, pts)).status == Status::Pass);
    CHECK(check_action(change_frame(bad, g, pts)).status == Status::Fail);
    CHECK(check_action(change_frame(bad_hom, g, pts)).status == Status::Fail);
  }
}

TEST_CASE("modules and completeness") {
  DualPair d;
  auto mod = check_module(d.w.left);
  CHECK(mod.status == Status::Pass);
  CHECK(mod.component("submersion_defect") == 0.0);
  CHECK(check_module(d.w.right).status == Status::Pass);

  auto constant = d.w.left;
  constant.momentum = smooth_map(d.x, d.m, {"0", "0"});
  // Compatibility also breaks, but the submersion defect is what matters here.
  auto rep = check_module(constant);
  CHECK(rep.status == Status::Fail);
  CHECK(rep.component("submersion_defect") == 2.0);

  auto r1 = make_cube("R1", 1, -1, 1);
  auto blow = probe_completeness({vector_field(r1, {"x1^2"})}, r1, 10.0);
  CHECK(blow.status == Status::Fail);
  CHECK(blow.detail.find("blow-up") != std::string::npos);

  // Constant and linear fields leave the box long before t = 10; that is not blow-up.
  CHECK(probe_completeness({vector_field(r1, {"3"})}, r1, 10.0).status == Status::Pass);
  CHECK(probe_completeness({vector_field(r1, {"x1"})}, r1, 10.0).status == Status::Pass);
  auto r3 = make_cube("R3", 3, -1, 1);
  CHECK(probe_completeness({vector_field(r3, {"1", "-2", "0.5"}), vector_field(r3, {"x2", "-x1", "0"})}, r3, 10.0).status ==
        Status::Pass);
  // Reaching a pole of the field cannot be classified.
  CHECK(probe_completeness({vector_field(r1, {"-1/x1"})}, make_cube("R1+", 1, 0.5, 1), 10.0).status !=
        Status::Pass);
}

TEST_CASE("unique lifts") {
  auto r2 = make_cube("R2", 2, -1, 1);
  auto t2 = make_tangent(r2);
  auto id = unique_lift_action(t2, identity_map(r2));
  CHECK(id.fields[0].comp == coordinate_field(r2, 0).comp);
  CHECK(id.fields[1].comp == coordinate_field(r2, 1).comp);

  auto r1 = make_cube("R1", 1, -1, 1);
  auto half = unique_lift_action(make_tangent(r1), smooth_map(r1, r1, {"2*x1"}));
  CHECK(half.fields[0].comp == std::vector<Expr>{P("1/2", 1)});
  CHECK(check_action(half).status == Status::Pass);

  auto r4 = make_cube("R4", 4, -1, 1);
  CHECK_THROWS_WITH_AS(unique_lift_action(t2, smooth_map(r4, r2, {"x1", "x2"})), doctest::Contains("IntersectionNontrivial"),
                       Error);

  // Cotangent of a nondegenerate Poisson structure through a diffeomorphism.
  auto pi = bivector(r2, {{0, 1, "1+x1^2"}});
  auto a = make_cotangent(pi);
  auto lift = unique_lift_action(a, smooth_map(r2, r2, {"x1+x2^3", "x2"}));
  CHECK(check_action(lift).status == Status::Pass);
}

TEST_CASE("leaf actions") {
  auto r3 = make_cube("R3", 3, -1, 1);
  auto r2 = make_cube("R2", 2, -1, 1);
  auto t = make_tangent(r2);
  auto j = smooth_map(r3, r2, {"x1", "x2"});
  QuotientChartModel q{r3, r2, j, smooth_map(r2, r3, {"x1", "x2", "0"})};
  CHECK(check_quotient(q).status == Status::Pass);

  auto plain = make_action("p", t, j, {vector_field(r3, {"1", "0", "0"}), vector_field(r3, {"0", "1", "0"})}, Side::Right);
  auto rep = leaf_action_check(plain, q);
  CHECK(rep.status == Status::Pass);
  CHECK(rep.component("fiber_dependence") == 0.0);

  auto vertical = plain;
  vertical.fields[0] = vector_field(r3, {"1", "0", "x3"});
  CHECK(leaf_action_check(vertical, q).status == Status::Pass);

  auto tilted = plain;
  tilted.fields[0] = vector_field(r3, {"1", "x3", "0"});
  CHECK_THROWS_WITH_AS(leaf_action_check(tilted, q), doctest::Contains("ProjectionIllDefined"), Error);

  QuotientChartModel broken{r3, r2, j, smooth_map(r2, r3, {"x2", "x1", "0"})};
  CHECK(check_quotient(broken).status == Status::Fail);
}

TEST_CASE("dual pair quasi-equivalence and strong Morita") {
  DualPair d;
  // Oracle: Pi_S#dx1 = -dy1 (coordinate 2), Pi_S#dy1 = dx1, Pi_S#dx2 = dy2,
  // Pi_S#dy2 = -dx2, so xi1 spans {d/dx1, d/dy1} and xi2 spans {d/dx2, d/dy2}.
  CHECK(d.w.left.fields[0].comp == std::vector<Expr>{Expr(), Expr(1), Expr(), Expr()});
  CHECK(d.w.left.fields[1].comp == std::vector<Expr>{Expr(-1), Expr(), Expr(), Expr()});
  CHECK(d.w.right.fields[0].comp == std::vector<Expr>{Expr(), Expr(), Expr(), Expr(-1)});
  CHECK(d.w.right.fields[1].comp == std::vector<Expr>{Expr(), Expr(), Expr(1), Expr()});

  auto q = check_quasi_equivalence(d.w);
  CHECK(q.status == Status::Pass);
  CHECK(q.notes["rank_equalities"] == "64/64");
  CHECK(q.notes["zero_section_condition"] == "derived");
  auto s = check_strong_morita(d.w);
  CHECK(s.status == Status::Pass);
  CHECK(s.component("commutators") == 0.0);
  CHECK(s.notes["completeness_left"] == "pass");

  // J2 = J1: both kernels are {d/dx2, d/dy2} but xi1 spans the other plane.
  auto same = d.w;
  same.j2 = d.j1;
  same.right = poisson_map_action("r", d.a, d.pi_s, d.j1, Side::Right);
  auto bad = check_quasi_equivalence(same);
  CHECK(bad.status == Status::Fail);
  CHECK(bad.component("left_span_vs_ker_dJ2") > 0.5);

  // Perturbing xi2 inside ker dJ1 breaks the commutators with xi1. It also
  // moves dJ2 xi2 away from the anchor, so quasi-equivalence fails too.
  auto perturbed = d.w;
  perturbed.right.fields[0] = perturbed.right.fields[0] + Expr::variable(0) * coordinate_field(d.x, 2);
  auto p = check_strong_morita(perturbed);
  CHECK(p.status == Status::Fail);
  CHECK(p.component("commutators") == doctest::Approx(1.0));
}

TEST_CASE("rank-0 witnesses") {
  auto pt = make_point_chart();
  auto zero = make_zero(pt);
  auto plane = make_cube("X", 2, -1, 1);
  auto c = smooth_map(plane, pt, {});
  MoritaWitness w{"w", plane, c, c, make_action("l", zero, c, {}, Side::Left), make_action("r", zero, c, {}, Side::Right)};
  CHECK(check_quasi_equivalence(w).status == Status::Fail);

  auto p2 = smooth_map(pt, pt, {});
  MoritaWitness v{"v", pt, p2, p2, make_action("l", zero, p2, {}, Side::Left), make_action("r", zero, p2, {}, Side::Right)};
  CHECK(check_quasi_equivalence(v).status == Status::Pass);
  CHECK(check_strong_morita(v).status == Status::Pass);
}

TEST_CASE("tensor distribution") {
  DualPair d;
  // Compose X with a second copy Y over A: right A-action on X via J2, left
  // A-action on Y via its J1.
  TensorData td{d.w.right, d.w.left, d.w.left, d.w.right, std::nullopt};
  Chart prod = product_chart(d.x, d.x);
  td.quotient = QuotientChartModel{prod, make_cube("L", 4, -2, 2), smooth_map(prod, make_cube("L", 4, -2, 2), {"x1", "x2", "x7", "x8"}),
                                   smooth_map(make_cube("L", 4, -2, 2), prod, {"x1", "x2", "0", "0", "0", "0", "x3", "x4"})};
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  std::vector<double> y{0.3, 0.4, -0.5, 0.7};
  auto res = tensor_distribution(td, x, y);
  CHECK(res.basis.cols() == 2);
  CHECK(res.report.status == Status::Pass);
  CHECK(res.report.component("involutivity") == 0.0);
  CHECK(res.report.component("kernel_J1") < 1e-12);
  CHECK(res.report.component("kernel_K3") < 1e-12);
  // Generators (xi2(e_i)_x, -eta(e_i)_y): (0,0,0,-1 | 0,-1,0,0) and (0,0,1,0 | 1,0,0,0).
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(8, 2);
  expect(3, 0) = -1;
  expect(5, 0) = -1;
  expect(2, 1) = 1;
  expect(4, 1) = 1;
  CHECK(subspace_distance(res.basis, expect) < 1e-12);

  std::vector<double> off{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_WITH_AS(tensor_distribution(td, x, off), doctest::Contains("BasePointMismatch"), Error);

  auto pt = make_point_chart();
  auto zero = make_zero(pt);
  auto r1 = make_cube("R1", 1, -1, 1);
  auto c = smooth_map(r1, pt, {});
  TensorData triv{make_action("r", zero, c, {}, Side::Right), make_action("l", zero, c, {}, Side::Left), std::nullopt,
                  std::nullopt, std::nullopt};
  std::vector<double> a{0.5};
  auto t0 = tensor_distribution(triv, a, a);
  CHECK(t0.basis.cols() == 0);
  CHECK(t0.report.status == Status::Pass);
}
