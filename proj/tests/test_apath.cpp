#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "alab/apath.hpp"
#include "alab/error.hpp"

using namespace alab;

namespace {

struct DualPair {
  Chart x = make_cube("X", 4, -2, 2);
  Chart m = make_cube("M", 2, -2, 2);
  Bivector pi_s = bivector(x, {{0, 1, "1"}, {2, 3, "-1"}});
  Algebroid a = make_cotangent(bivector(m, {{0, 1, "1"}}), "A");
  SmoothMap j1 = smooth_map(x, m, {"x1", "x2"});
  SmoothMap j2 = smooth_map(x, m, {"x3", "x4"});
  MoritaWitness w = make_dual_pair_witness("dual", pi_s, a, j1, a, j2);
  // The canonical right module: M itself with mu = id and X_i = rho(e_i).
  ActionModel canonical = make_action("M", a, identity_map(m), a->anchor, Side::Right);
};

void check_point(const Eigen::VectorXd& got, std::vector<double> want, double tol) {
  REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got(static_cast<Eigen::Index>(i)) - want[i]) <= tol);
}

}  // namespace

TEST_CASE("validate A-paths") {
  DualPair d;
  CHECK(validate_apath(make_apath("p", d.a, {"1", "0"}, {"0", "-t"})).status == Status::Pass);
  CHECK(validate_apath(make_apath("z", d.a, {"0", "0"}, {"0.5", "1"})).status == Status::Pass);
  auto bad = validate_apath(make_apath("b", d.a, {"1", "0"}, {"0", "0"}));
  CHECK(bad.status == Status::Fail);
  CHECK(bad.component("anchor") == doctest::Approx(1.0));

  auto first = make_apath("p", d.a, {"1", "0"}, {"0", "-t"});
  auto second = make_apath("q", d.a, {"0", "1"}, {"t", "-1"});
  auto joined = concatenate(first, second);
  CHECK(validate_apath(joined).status == Status::Pass);
  check_point(base_at(joined, 0.5), {0.0, -1.0}, 1e-15);
  check_point(base_at(joined, 0.75), {0.5, -1.0}, 1e-15);
  // Squeezing into half the time doubles the coefficients.
  CHECK(coefficients_at(joined, 0.25) == std::vector<double>{2.0, 0.0});
  auto gap = concatenate(first, make_apath("r", d.a, {"0", "1"}, {"t", "0"}));
  CHECK(validate_apath(gap).component("junction") == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(make_apath("s", d.a, {"1"}, {"0", "0"}), doctest::Contains("RankMismatch"), Error);
}

TEST_CASE("integrate along the dual pair") {
  DualPair d;
  auto p = make_apath("p", d.a, {"1", "0"}, {"0", "-t"});
  std::vector<double> origin{0, 0, 0, 0};
  auto tr = integrate_apath(p, d.w.left, origin);
  check_point(tr.end(), {0, -1, 0, 0}, 1e-12);
  CHECK(tr.base_tracking < 1e-12);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(1.0));
  CHECK(tr.csv().rfind("0,0,0,0,0\n", 0) == 0);

  auto still = make_apath("z", d.a, {"0", "0"}, {"0", "0"});
  std::vector<double> x0{0, 0, 0.3, -0.7};
  check_point(integrate_apath(still, d.w.left, x0).end(), {0, 0, 0.3, -0.7}, 0.0);

  std::vector<double> off{1, 0, 0, 0};
  CHECK_THROWS_WITH_AS(integrate_apath(p, d.w.left, off), doctest::Contains("InitialFiberMismatch"), Error);
  auto other = make_cotangent(bivector(d.m, {{0, 1, "1"}}), "A'");
  CHECK_THROWS_WITH_AS(integrate_apath(make_apath("o", other, {"1", "0"}, {"0", "-t"}), d.w.left, origin),
                       doctest::Contains("AlgebroidMismatch"), Error);
}

TEST_CASE("exponential flow and convergence order") {
  auto r2 = make_cube("R2", 2, 0, 3);
  auto a = make_cotangent(bivector(r2, {{0, 1, "x1"}}));
  auto act = make_action("M", a, identity_map(r2), a->anchor, Side::Right);
  auto p = make_apath("exp", a, {"0", "1"}, {"exp(t)", "0"});
  REQUIRE(validate_apath(p).status == Status::Pass);
  std::vector<double> x0{1, 0};
  auto tr = integrate_apath(p, act, x0);
  check_point(tr.end(), {std::exp(1.0), 0}, 1e-8);
  CHECK(tr.base_tracking < 1e-8);

  IntegratorConfig coarse{0.1, 1.0, 1};
  IntegratorConfig fine{0.05, 1.0, 1};
  double e1 = std::abs(integrate_apath(p, act, x0, coarse).end()(0) - std::exp(1.0));
  double e2 = std::abs(integrate_apath(p, act, x0, fine).end()(0) - std::exp(1.0));
  double ratio = e1 / e2;
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 32.0);
}

TEST_CASE("blow-up collapses the step") {
  auto r1 = make_cube("R1", 1, -1, 1);
  auto r2 = make_cube("R2", 2, -1, 1);
  auto t = make_tangent(r1);
  auto act = make_action("n", t, smooth_map(r2, r1, {"x1"}), {vector_field(r2, {"1", "x2^2"})}, Side::Right);
  REQUIRE(check_action(act).status == Status::Pass);
  auto p = make_apath("p", t, {"1"}, {"t"});
  std::vector<double> x0{0, 2};
  // x2' = x2^2 from 2 blows up at t = 1/2.
  CHECK_THROWS_WITH_AS(integrate_apath(p, act, x0), doctest::Contains("StepCollapse"), Error);
}

TEST_CASE("transport invariances") {
  DualPair d;
  auto p = make_apath("p", d.a, {"1", "0"}, {"0", "-t"});
  std::vector<double> origin{0, 0, 0, 0};
  auto sq = reparametrize_square(p);
  CHECK(validate_apath(sq).status == Status::Pass);
  check_point(integrate_apath(sq, d.w.left, origin).end(), {0, -1, 0, 0}, 1e-12);

  auto rep = check_transport_invariances(p, d.w.left, origin, {}, &d.w);
  CHECK(rep.status == Status::Pass);
  CHECK(rep.component("fiber_drift") == 0.0);
  CHECK(rep.component("flow_commutation") == 0.0);
  CHECK(rep.component("reparametrization") < 1e-12);

  // Randomized constant-coefficient witnesses: Pi_S = l d1^d2 - m d3^d4,
  // A1 = T*(l d1^d2), A2 = T*(m d1^d2), paths a(t) = u + 2 v t.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  for (int trial = 0; trial < 8; ++trial) {
    double l = coef(rng);
    double m = coef(rng);
    if (std::abs(l) < 0.2) l += 0.5;
    if (std::abs(m) < 0.2) m -= 0.5;
    auto ls = Number::real(l).to_string();
    auto ms = Number::real(m).to_string();
    auto x = make_cube("X", 4, -2, 2);
    auto base = make_cube("M", 2, -2, 2);
    auto pi = bivector(x, {{0, 1, ls}, {2, 3, "-(" + ms + ")"}});
    auto a1 = make_cotangent(bivector(base, {{0, 1, ls}}), "A1");
    auto a2 = make_cotangent(bivector(base, {{0, 1, ms}}), "A2");
    auto w = make_dual_pair_witness("w", pi, a1, smooth_map(x, base, {"x1", "x2"}), a2, smooth_map(x, base, {"x3", "x4"}));
    REQUIRE(check_quasi_equivalence(w).status == Status::Pass);
    double u1 = coef(rng), u2 = coef(rng), v1 = coef(rng), v2 = coef(rng);
    std::vector<double> x0{coef(rng), coef(rng), coef(rng), coef(rng)};
    // rho(dx1) = -l d2, rho(dx2) = l d1, so c' = (l a2, -l a1).
    auto num = [](double v) { return "(" + Number::real(v).to_string() + ")"; };
    std::string a1t = num(u1) + "+2*" + num(v1) + "*t";
    std::string a2t = num(u2) + "+2*" + num(v2) + "*t";
    std::string c1 = num(x0[0]) + "+" + num(l) + "*(" + num(u2) + "*t+" + num(v2) + "*t^2)";
    std::string c2 = num(x0[1]) + "-" + num(l) + "*(" + num(u1) + "*t+" + num(v1) + "*t^2)";
    auto path = make_apath("r", a1, {a1t, a2t}, {c1, c2});
    REQUIRE(validate_apath(path).status == Status::Pass);
    auto r = check_transport_invariances(path, w.left, x0, {}, &w);
    CHECK(r.status == Status::Pass);
    CHECK(r.component("fiber_drift") < 1e-12);
  }
}

TEST_CASE("transport through a module") {
  DualPair d;
  auto p = make_apath("p", d.a, {"1", "0"}, {"0", "-t"});
  std::vector<double> xp{0, 0, 0, 0};
  std::vector<double> x{0, -1, 0, 0};
  std::vector<double> n0{0, 0};
  auto res = psi_transport(d.w, xp, x, d.canonical, n0, p);
  check_point(res.point, {0, -1}, 1e-12);
  CHECK(res.report.status == Status::Pass);

  auto still = make_apath("z", d.a, {"0", "0"}, {"0", "0"});
  std::vector<double> n1{0, 0};
  check_point(psi_transport(d.w, xp, xp, d.canonical, n1, still).point, {0, 0}, 0.0);

  // Translation by (1, 0) is a module morphism onto the shifted copy.
  auto shifted = make_action("M+", d.a, smooth_map(d.m, d.m, {"x1-1", "x2"}), d.a->anchor, Side::Right);
  ModuleMorphism f{smooth_map(d.m, d.m, {"x1+1", "x2"}), shifted};
  auto sq = psi_transport(d.w, xp, x, d.canonical, n0, p, {}, f);
  CHECK(sq.report.component("square") == 0.0);

  std::vector<double> far{0, -1, 0.5, 0};
  CHECK_THROWS_WITH_AS(psi_transport(d.w, xp, far, d.canonical, n0, p), doctest::Contains("BasePointMismatch"), Error);
  std::vector<double> elsewhere{1, -1, 0, 0};
  CHECK_THROWS_WITH_AS(psi_transport(d.w, xp, elsewhere, d.canonical, n0, p), doctest::Contains("NoConnectingPath"), Error);
  auto fake = make_apath("f", d.a, {"0", "0"}, {"0", "-t"});
  CHECK_THROWS_WITH_AS(psi_transport(d.w, xp, x, d.canonical, n0, fake), doctest::Contains("NoConnectingPath"), Error);
  std::vector<double> wrong{0.5, 0};
  CHECK_THROWS_WITH_AS(psi_transport(d.w, xp, x, d.canonical, wrong, p), doctest::Contains("InitialFiberMismatch"), Error);

  // Concatenation: a then b equals transporting along a and then along b.
  auto b = make_apath("q", d.a, {"0", "1"}, {"t", "-1"});
  std::vector<double> x2{1, -1, 0, 0};
  auto both = psi_transport(d.w, xp, x2, d.canonical, n0, concatenate(p, b));
  Eigen::VectorXd mid = psi_transport(d.w, xp, x, d.canonical, n0, p).point;
  std::vector<double> mid_n{mid(0), mid(1)};
  auto step = psi_transport(d.w, x, x2, d.canonical, mid_n, b);
  check_point(both.point, {1, -1}, 1e-12);
  check_point(both.point, {step.point(0), step.point(1)}, 1e-12);
}
