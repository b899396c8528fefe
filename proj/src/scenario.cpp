#include "alab/scenario.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "alab/apath.hpp"
#include "alab/dirac.hpp"
#include "alab/error.hpp"
#include "alab/linalg.hpp"

namespace alab {

using nlohmann::json;

namespace {

const std::set<std::string> kSections{"manifolds", "vector_fields", "bivectors", "two_forms", "maps",
                                      "algebroids", "dirac",         "dirac_maps", "morphisms", "actions",
                                      "quotients", "witnesses",     "paths"};

std::string strip_kind(const std::string& what) {
  auto pos = what.find(": ");
  return pos == std::string::npos ? what : what.substr(pos + 2);
}

const json& req(const json& o, const std::string& key, const std::string& ctx) {
  if (!o.is_object()) fail(ErrorKind::SchemaViolation, ctx + " must be an object");
  auto it = o.find(key);
  if (it == o.end()) fail(ErrorKind::SchemaViolation, ctx + " is missing '" + key + "'");
  return *it;
}

std::string str(const json& o, const std::string& key, const std::string& ctx) {
  const json& v = req(o, key, ctx);
  if (!v.is_string()) fail(ErrorKind::SchemaViolation, ctx + "." + key + " must be a string");
  return v.get<std::string>();
}

double number(const json& v, const std::string& ctx) {
  if (!v.is_number()) fail(ErrorKind::SchemaViolation, ctx + " must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& ctx) {
  if (!v.is_number_integer()) fail(ErrorKind::SchemaViolation, ctx + " must be an integer");
  return v.get<int>();
}

Point point(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail(ErrorKind::SchemaViolation, ctx + " must be an array of numbers");
  Point p;
  for (std::size_t i = 0; i < v.size(); ++i) p.push_back(number(v[i], ctx + "[" + std::to_string(i) + "]"));
  return p;
}

std::vector<std::string> strings(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail(ErrorKind::SchemaViolation, ctx + " must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) fail(ErrorKind::SchemaViolation, ctx + "[" + std::to_string(i) + "] must be a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

Expr expression(const std::string& text, const Chart& chart, const std::string& ctx) {
  try {
    return parse_expression(text, chart->coordinates());
  } catch (const ParseError& e) {
    throw ParseError(e.position(), ctx + ": " + strip_kind(e.what()));
  }
}

std::vector<Expr> expressions(const json& v, const Chart& chart, const std::string& ctx) {
  std::vector<Expr> out;
  auto texts = strings(v, ctx);
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(expression(texts[i], chart, ctx + "[" + std::to_string(i) + "]"));
  return out;
}

void require_length(std::size_t got, int want, const std::string& ctx) {
  if (static_cast<int>(got) != want) {
    fail(ErrorKind::SchemaViolation, ctx + " has " + std::to_string(got) + " entries, expected " + std::to_string(want));
  }
}

Side side_from(const std::string& s, const std::string& ctx) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  fail(ErrorKind::SchemaViolation, ctx + ".side must be 'left' or 'right'");
}

// Antisymmetric entries [i, j, "expr"] with 1-based indices.
AntisymmetricTable table(const json& v, const Chart& chart, const std::string& ctx) {
  const int n = chart->dim();
  AntisymmetricTable t(n);
  if (!v.is_array()) fail(ErrorKind::SchemaViolation, ctx + " must be an array of [i, j, expr]");
  for (std::size_t e = 0; e < v.size(); ++e) {
    std::string c = ctx + "[" + std::to_string(e) + "]";
    const json& row = v[e];
    if (!row.is_array() || row.size() != 3 || !row[2].is_string()) fail(ErrorKind::SchemaViolation, c + " must be [i, j, expr]");
    int i = integer(row[0], c) - 1;
    int j = integer(row[1], c) - 1;
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) fail(ErrorKind::SchemaViolation, c + " has indices out of range");
    Expr val = expression(row[2].get<std::string>(), chart, c);
    if (i < j) {
      t.set(i, j, t.get(i, j) + val);
    } else {
      t.set(j, i, t.get(j, i) - val);
    }
  }
  return t;
}

struct Registry {
  explicit Registry(json d) : doc(std::move(d)) {}

  json doc;
  std::set<std::string> visiting;
  std::map<std::string, Chart> charts;
  std::map<std::string, VectorField> fields;
  std::map<std::string, Bivector> bivectors;
  std::map<std::string, TwoForm> two_forms;
  std::map<std::string, SmoothMap> maps;
  std::map<std::string, Algebroid> algebroids;
  std::map<std::string, DiracStructureModel> diracs;
  std::map<std::string, DiracMapData> dirac_maps;
  std::map<std::string, MorphismData> morphisms;
  std::map<std::string, ActionModel> actions;
  std::map<std::string, QuotientChartModel> quotients;
  std::map<std::string, MoritaWitness> witnesses;
  std::map<std::string, APath> paths;

  template <class T, class Build>
  const T& resolve(const std::string& section, const std::string& label, std::map<std::string, T>& cache, Build build) {
    auto it = cache.find(label);
    if (it != cache.end()) return it->second;
    const std::string key = section + "." + label;
    auto sec = doc.find(section);
    if (sec == doc.end() || !sec->contains(label)) fail(ErrorKind::UnresolvedLabel, "no " + section + " entry named '" + label + "'");
    if (visiting.count(key)) fail(ErrorKind::SchemaViolation, "cyclic definition through " + key);
    visiting.insert(key);
    T value = build((*sec)[label], key);
    visiting.erase(key);
    return cache.emplace(label, std::move(value)).first->second;
  }

  Chart chart(const std::string& label) {
    return resolve("manifolds", label, charts, [&](const json& s, const std::string& ctx) -> Chart {
      if (s.contains("product")) {
        auto parts = strings(s["product"], ctx + ".product");
        require_length(parts.size(), 2, ctx + ".product");
        return product_chart(chart(parts[0]), chart(parts[1]));
      }
      const int dim = integer(req(s, "dim", ctx), ctx + ".dim");
      if (dim == 0) return make_point_chart(label);
      std::vector<Interval> box;
      if (s.contains("box")) {
        const json& b = s["box"];
        if (!b.is_array()) fail(ErrorKind::SchemaViolation, ctx + ".box must be an array of [lower, upper]");
        require_length(b.size(), dim, ctx + ".box");
        for (std::size_t i = 0; i < b.size(); ++i) {
          Point iv = point(b[i], ctx + ".box[" + std::to_string(i) + "]");
          require_length(iv.size(), 2, ctx + ".box[" + std::to_string(i) + "]");
          box.push_back({iv[0], iv[1]});
        }
      } else {
        double lo = s.contains("lower") ? number(s["lower"], ctx + ".lower") : -1.0;
        double hi = s.contains("upper") ? number(s["upper"], ctx + ".upper") : 1.0;
        box.assign(static_cast<std::size_t>(std::max(dim, 0)), Interval{lo, hi});
      }
      std::vector<std::string> names;
      if (s.contains("coordinates")) names = strings(s["coordinates"], ctx + ".coordinates");
      return make_chart(label, std::move(box), std::move(names));
    });
  }

  // A field given inline as an array of component strings or by label.
  VectorField field(const json& v, const Chart& c, const std::string& ctx) {
    if (v.is_string()) {
      const VectorField& f = named_field(v.get<std::string>());
      require_same_chart(f.chart, c, ctx);
      return f;
    }
    auto comp = expressions(v, c, ctx);
    require_length(comp.size(), c->dim(), ctx);
    return VectorField{c, std::move(comp)};
  }

  const VectorField& named_field(const std::string& label) {
    return resolve("vector_fields", label, fields, [&](const json& s, const std::string& ctx) {
      Chart c = chart(str(s, "chart", ctx));
      return field(req(s, "components", ctx), c, ctx + ".components");
    });
  }

  std::vector<VectorField> field_list(const json& v, const Chart& c, const std::string& ctx) {
    if (!v.is_array()) fail(ErrorKind::SchemaViolation, ctx + " must be an array of fields");
    std::vector<VectorField> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(field(v[i], c, ctx + "[" + std::to_string(i) + "]"));
    return out;
  }

  const Bivector& bivector(const std::string& label) {
    return resolve("bivectors", label, bivectors, [&](const json& s, const std::string& ctx) {
      Chart c = chart(str(s, "chart", ctx));
      return Bivector{c, table(req(s, "entries", ctx), c, ctx + ".entries")};
    });
  }

  const TwoForm& two_form(const std::string& label) {
    return resolve("two_forms", label, two_forms, [&](const json& s, const std::string& ctx) {
      Chart c = chart(str(s, "chart", ctx));
      return TwoForm{c, table(req(s, "entries", ctx), c, ctx + ".entries")};
    });
  }

  const SmoothMap& map(const std::string& label) {
    return resolve("maps", label, maps, [&](const json& s, const std::string& ctx) {
      Chart src = chart(str(s, "source", ctx));
      Chart tgt = chart(str(s, "target", ctx));
      if (s.contains("identity") && s["identity"] == true) return identity_map(src);
      auto comp = expressions(req(s, "components", ctx), src, ctx + ".components");
      require_length(comp.size(), tgt->dim(), ctx + ".components");
      return SmoothMap{src, tgt, std::move(comp)};
    });
  }

  const Algebroid& algebroid(const std::string& label) {
    return resolve("algebroids", label, algebroids, [&](const json& s, const std::string& ctx) -> Algebroid {
      const std::string type = str(s, "type", ctx);
      if (type == "tangent") return make_tangent(chart(str(s, "chart", ctx)), label);
      if (type == "zero") return make_zero(chart(str(s, "chart", ctx)), label);
      // Unchecked on purpose: the algebroid_axioms check reports non-Poisson input.
      if (type == "cotangent") return cotangent_model(bivector(str(s, "bivector", ctx)), label);
      if (type == "opposite") return make_opposite(algebroid(str(s, "of", ctx)));
      if (type == "dirac") return make_dirac_algebroid(dirac(str(s, "dirac", ctx)));
      if (type == "product") {
        auto parts = strings(req(s, "factors", ctx), ctx + ".factors");
        require_length(parts.size(), 2, ctx + ".factors");
        return product_algebroid(algebroid(parts[0]), algebroid(parts[1]));
      }
      if (type == "frame" || type == "transformation") {
        Chart c = chart(str(s, "chart", ctx));
        const bool frame = type == "frame";
        auto anchor = field_list(req(s, frame ? "anchor" : "action", ctx), c, ctx + (frame ? ".anchor" : ".action"));
        const int r = static_cast<int>(anchor.size());
        std::vector<AntisymmetricTable> structure(static_cast<std::size_t>(r), AntisymmetricTable(r));
        const std::string key = frame ? "structure" : "constants";
        if (s.contains(key)) {
          const json& entries = s[key];
          if (!entries.is_array()) fail(ErrorKind::SchemaViolation, ctx + "." + key + " must be an array of [k, i, j, expr]");
          for (std::size_t e = 0; e < entries.size(); ++e) {
            std::string cc = ctx + "." + key + "[" + std::to_string(e) + "]";
            const json& row = entries[e];
            if (!row.is_array() || row.size() != 4 || !row[3].is_string()) fail(ErrorKind::SchemaViolation, cc + " must be [k, i, j, expr]");
            int k = integer(row[0], cc) - 1;
            int i = integer(row[1], cc) - 1;
            int j = integer(row[2], cc) - 1;
            if (k < 0 || i < 0 || j < 0 || k >= r || i >= r || j >= r || i == j) fail(ErrorKind::SchemaViolation, cc + " has indices out of range");
            Expr val = expression(row[3].get<std::string>(), c, cc);
            auto& t = structure[static_cast<std::size_t>(k)];
            if (i < j) {
              t.set(i, j, t.get(i, j) + val);
            } else {
              t.set(j, i, t.get(j, i) - val);
            }
          }
        }
        if (frame) return make_algebroid(label, c, std::move(anchor), std::move(structure));
        return make_transformation(c, structure, anchor, label);
      }
      fail(ErrorKind::SchemaViolation, ctx + ".type '" + type + "' is not an algebroid type");
    });
  }

  const DiracStructureModel& dirac(const std::string& label) {
    return resolve("dirac", label, diracs, [&](const json& s, const std::string& ctx) -> DiracStructureModel {
      const std::string type = str(s, "type", ctx);
      if (type == "graph_of_bivector") return graph_of_bivector(bivector(str(s, "bivector", ctx)), label);
      if (type == "graph_of_two_form") return graph_of_two_form(two_form(str(s, "two_form", ctx)), label);
      if (type == "gauge") {
        auto g = gauge_transform(dirac(str(s, "of", ctx)), two_form(str(s, "two_form", ctx)));
        g.structure.label = label;
        return g.structure;
      }
      if (type == "frame") {
        Chart c = chart(str(s, "chart", ctx));
        const json& f = req(s, "frame", ctx);
        if (!f.is_array()) fail(ErrorKind::SchemaViolation, ctx + ".frame must be an array");
        std::vector<GeneralizedSection> frame;
        for (std::size_t i = 0; i < f.size(); ++i) {
          std::string cc = ctx + ".frame[" + std::to_string(i) + "]";
          VectorField v = field(req(f[i], "vector", cc), c, cc + ".vector");
          auto form = expressions(req(f[i], "form", cc), c, cc + ".form");
          require_length(form.size(), c->dim(), cc + ".form");
          frame.push_back({v, OneForm{c, std::move(form)}});
        }
        return make_dirac(label, c, std::move(frame));
      }
      fail(ErrorKind::SchemaViolation, ctx + ".type '" + type + "' is not a Dirac structure type");
    });
  }

  const DiracMapData& dirac_map(const std::string& label) {
    return resolve("dirac_maps", label, dirac_maps, [&](const json& s, const std::string& ctx) {
      return DiracMapData{dirac(str(s, "source", ctx)), dirac(str(s, "target", ctx)), map(str(s, "map", ctx))};
    });
  }

  const MorphismData& morphism(const std::string& label) {
    return resolve("morphisms", label, morphisms, [&](const json& s, const std::string& ctx) {
      MorphismData m;
      m.source = algebroid(str(s, "source", ctx));
      m.target = algebroid(str(s, "target", ctx));
      m.base_map = map(str(s, "base_map", ctx));
      const json& rows = req(s, "matrix", ctx);
      if (!rows.is_array()) fail(ErrorKind::SchemaViolation, ctx + ".matrix must be an array of rows");
      require_length(rows.size(), m.target->rank, ctx + ".matrix");
      m.matrix = ExprMatrix(m.target->rank, m.source->rank);
      for (int a = 0; a < m.target->rank; ++a) {
        std::string cc = ctx + ".matrix[" + std::to_string(a) + "]";
        auto row = expressions(rows[static_cast<std::size_t>(a)], m.source->base, cc);
        require_length(row.size(), m.source->rank, cc);
        for (int i = 0; i < m.source->rank; ++i) m.matrix(a, i) = row[static_cast<std::size_t>(i)];
      }
      return m;
    });
  }

  const ActionModel& action(const std::string& label) {
    return resolve("actions", label, actions, [&](const json& s, const std::string& ctx) -> ActionModel {
      const std::string type = s.contains("type") ? str(s, "type", ctx) : "fields";
      const double horizon = s.contains("horizon") ? number(s["horizon"], ctx + ".horizon") : 10.0;
      ActionModel out;
      if (type == "fields") {
        Algebroid a = algebroid(str(s, "algebroid", ctx));
        SmoothMap mu = map(str(s, "momentum", ctx));
        auto fl = field_list(req(s, "fields", ctx), mu.source, ctx + ".fields");
        out = make_action(label, a, mu, std::move(fl), side_from(str(s, "side", ctx), ctx), horizon);
      } else if (type == "poisson_map") {
        out = poisson_map_action(label, algebroid(str(s, "algebroid", ctx)), bivector(str(s, "bivector", ctx)),
                                 map(str(s, "momentum", ctx)), side_from(str(s, "side", ctx), ctx), horizon);
      } else if (type == "canonical") {
        Algebroid a = algebroid(str(s, "algebroid", ctx));
        out = make_action(label, a, identity_map(a->base), a->anchor, Side::Right, horizon);
      } else if (type == "unique_lift") {
        out = unique_lift_action(algebroid(str(s, "algebroid", ctx)), map(str(s, "map", ctx)));
        out.label = label;
        out.horizon = horizon;
      } else if (type == "induced_dirac") {
        out = induced_dirac_action(dirac_map(str(s, "dirac_map", ctx)));
        out.label = label;
        out.horizon = horizon;
      } else if (type == "reverse") {
        out = reverse_side(action(str(s, "of", ctx)));
        out.label = label;
      } else {
        fail(ErrorKind::SchemaViolation, ctx + ".type '" + type + "' is not an action type");
      }
      return out;
    });
  }

  const QuotientChartModel& quotient(const std::string& label) {
    return resolve("quotients", label, quotients, [&](const json& s, const std::string& ctx) {
      SmoothMap pi = map(str(s, "projection", ctx));
      SmoothMap sigma = map(str(s, "section", ctx));
      return QuotientChartModel{pi.source, pi.target, pi, sigma};
    });
  }

  const MoritaWitness& witness(const std::string& label) {
    return resolve("witnesses", label, witnesses, [&](const json& s, const std::string& ctx) {
      const double horizon = s.contains("horizon") ? number(s["horizon"], ctx + ".horizon") : 10.0;
      const std::string type = s.contains("type") ? str(s, "type", ctx) : "actions";
      if (type == "dual_pair") {
        return make_dual_pair_witness(label, bivector(str(s, "bivector", ctx)), algebroid(str(s, "a1", ctx)),
                                      map(str(s, "j1", ctx)), algebroid(str(s, "a2", ctx)), map(str(s, "j2", ctx)),
                                      horizon);
      }
      if (type != "actions") fail(ErrorKind::SchemaViolation, ctx + ".type '" + type + "' is not a witness type");
      MoritaWitness w;
      w.label = label;
      w.left = action(str(s, "left", ctx));
      w.right = action(str(s, "right", ctx));
      w.total = w.left.total;
      w.j1 = w.left.momentum;
      w.j2 = w.right.momentum;
      w.horizon = horizon;
      return w;
    });
  }

  const APath& path(const std::string& label) {
    return resolve("paths", label, paths, [&](const json& s, const std::string& ctx) {
      if (s.contains("concatenate")) {
        auto parts = strings(s["concatenate"], ctx + ".concatenate");
        if (parts.empty()) fail(ErrorKind::SchemaViolation, ctx + ".concatenate is empty");
        APath p = path(parts[0]);
        for (std::size_t i = 1; i < parts.size(); ++i) p = concatenate(p, path(parts[i]));
        p.label = label;
        return p;
      }
      Algebroid a = algebroid(str(s, "algebroid", ctx));
      auto coef = strings(req(s, "coefficients", ctx), ctx + ".coefficients");
      auto base = strings(req(s, "base", ctx), ctx + ".base");
      try {
        return make_apath(label, a, coef, base);
      } catch (const ParseError& e) {
        throw ParseError(e.position(), ctx + ": " + strip_kind(e.what()));
      }
    });
  }
};

// Checks -------------------------------------------------------------------------

IntegratorConfig integrator(const json& c) {
  IntegratorConfig cfg;
  if (!c.contains("integrator")) return cfg;
  const json& s = c["integrator"];
  if (s.contains("h")) cfg.h = number(s["h"], "integrator.h");
  if (s.contains("max_error")) cfg.max_error = number(s["max_error"], "integrator.max_error");
  if (s.contains("output_stride")) cfg.output_stride = integer(s["output_stride"], "integrator.output_stride");
  if (!(cfg.h > 0)) fail(ErrorKind::SchemaViolation, "integrator.h must be positive");
  return cfg;
}

std::span<const double> span_of(const Point& p) { return {p.data(), p.size()}; }

// Residual of basis against the linear system it should solve, plus an
// optional expected dimension.
CheckReport fiber_report(const Eigen::MatrixXd& system, const Eigen::MatrixXd& basis, const json& c, double tol,
                         const Point& where) {
  CheckReport rep;
  ResidualTracker t;
  t.declare("kernel");
  if (basis.cols() > 0) t.add("kernel", (system * basis).norm(), where);
  t.finish(rep, tol);
  rep.components["dimension"] = static_cast<double>(basis.cols());
  if (c.contains("expect_dimension")) {
    int want = integer(c["expect_dimension"], "expect_dimension");
    rep.notes["expected_dimension"] = std::to_string(want);
    if (want != basis.cols()) rep.status = Status::Fail;
  }
  return rep;
}

void expect_endpoint(CheckReport& rep, const Eigen::VectorXd& got, const json& c, double tol) {
  if (!c.contains("expect")) return;
  Point want = point(c["expect"], "expect");
  if (static_cast<Eigen::Index>(want.size()) != got.size()) fail(ErrorKind::SchemaViolation, "expect has the wrong dimension");
  double d = (got - Eigen::Map<const Eigen::VectorXd>(want.data(), got.size())).norm();
  rep.components["endpoint"] = d;
  rep.residual = std::max(rep.residual, d);
  if (!(d < tol)) rep.status = Status::Fail;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

using Runner = std::function<CheckReport(const CheckOptions&)>;

struct Built {
  std::string target;
  Runner run;
  bool ode = false;
};

Built build_check(const std::shared_ptr<Registry>& reg, const std::string& kind, const json& c, const std::string& ctx) {
  Registry& r = *reg;
  auto label = [&](const char* key) { return str(c, key, ctx); };
  if (kind == "algebroid_axioms") {
    Algebroid a = r.algebroid(label("target"));
    return {a->label, [a](const CheckOptions& o) { return check_algebroid_axioms(*a, o); }};
  }
  if (kind == "morphism") {
    MorphismData m = r.morphism(label("target"));
    return {label("target"), [m](const CheckOptions& o) { return check_morphism(m, o); }};
  }
  if (kind == "pullback_fiber") {
    Algebroid a = r.algebroid(label("target"));
    SmoothMap f = r.map(label("map"));
    Point x = point(req(c, "point", ctx), ctx + ".point");
    return {a->label, [a, f, x, c](const CheckOptions& o) {
              Eigen::MatrixXd basis = pullback_fiber(*a, f, span_of(x));
              Eigen::VectorXd fx = apply_map(f, span_of(x));
              Eigen::MatrixXd sys(f.target->dim(), f.source->dim() + a->rank);
              sys << jacobian_at(f, span_of(x)), -a->anchor_matrix().eval(span_of(to_vector(fx)));
              return fiber_report(sys, basis, c, o.tolerance, x);
            }};
  }
  if (kind == "fibered_product") {
    auto names = strings(req(c, "morphisms", ctx), ctx + ".morphisms");
    require_length(names.size(), 2, ctx + ".morphisms");
    MorphismData m1 = r.morphism(names[0]);
    MorphismData m2 = r.morphism(names[1]);
    Point p = point(req(c, "p", ctx), ctx + ".p");
    Point q = point(req(c, "q", ctx), ctx + ".q");
    return {names[0] + "," + names[1], [m1, m2, p, q, c](const CheckOptions& o) {
              Eigen::MatrixXd basis = fibered_product_fiber(m1, m2, span_of(p), span_of(q), o.tolerance);
              Eigen::MatrixXd a = m1.matrix.eval(span_of(p));
              Eigen::MatrixXd b = m2.matrix.eval(span_of(q));
              Eigen::MatrixXd sys(a.rows(), a.cols() + b.cols());
              sys << a, -b;
              Point both = p;
              both.insert(both.end(), q.begin(), q.end());
              return fiber_report(sys, basis, c, o.tolerance, both);
            }};
  }
  if (kind == "dirac") {
    DiracStructureModel d = r.dirac(label("target"));
    return {d.label, [d](const CheckOptions& o) { return check_dirac(d, o); }};
  }
  if (kind == "gauge") {
    DiracStructureModel d = r.dirac(label("target"));
    TwoForm b = r.two_form(label("two_form"));
    return {d.label, [d, b](const CheckOptions& o) {
              auto g = gauge_transform(d, b, o);
              CheckReport rep = check_dirac(g.structure, o);
              rep.components["closedness"] = g.closedness_residual;
              rep.residual = std::max(rep.residual, g.closedness_residual);
              rep.notes["closed"] = g.closed ? "true" : "false";
              if (!g.closed) rep.status = Status::Fail;
              return rep;
            }};
  }
  if (kind == "dirac_map") {
    DiracMapData dm = r.dirac_map(label("target"));
    std::string mode = c.contains("mode") ? str(c, "mode", ctx) : "strong";
    if (mode != "strong" && mode != "forward") fail(ErrorKind::SchemaViolation, ctx + ".mode must be 'forward' or 'strong'");
    DiracMapMode m = mode == "strong" ? DiracMapMode::Strong : DiracMapMode::Forward;
    return {label("target"), [dm, m](const CheckOptions& o) { return check_dirac_map(dm, m, o); }};
  }
  if (kind == "induced_action") {
    DiracMapData dm = r.dirac_map(label("target"));
    std::optional<TwoForm> b;
    if (c.contains("gauge")) b = r.two_form(label("gauge"));
    return {label("target"), [dm, b](const CheckOptions& o) {
              DiracMapData use = dm;
              if (b) use = gauge_dirac_map({certify(dm.source, o), certify(dm.target, o), dm.map}, *b, o);
              CheckReport rep = check_action(induced_dirac_action(use, o), o);
              if (b) {
                rep.notes["gauged_source_certified"] = use.source.certified() ? "true" : "false";
                rep.notes["gauged_target_certified"] = use.target.certified() ? "true" : "false";
              }
              return rep;
            }};
  }
  if (kind == "action" || kind == "module") {
    ActionModel a = r.action(label("target"));
    if (c.contains("horizon")) a.horizon = number(c["horizon"], ctx + ".horizon");
    bool module = kind == "module";
    return {a.label, [a, module](const CheckOptions& o) { return module ? check_module(a, o) : check_action(a, o); }};
  }
  if (kind == "unique_lift") {
    Algebroid a = r.algebroid(label("target"));
    SmoothMap j = r.map(label("map"));
    return {a->label, [a, j](const CheckOptions& o) { return check_action(unique_lift_action(a, j, o), o); }};
  }
  if (kind == "leaf_action") {
    ActionModel a = r.action(label("target"));
    QuotientChartModel q = r.quotient(label("quotient"));
    return {a.label, [a, q](const CheckOptions& o) { return leaf_action_check(a, q, o); }};
  }
  if (kind == "quasi_equivalence" || kind == "strong_morita") {
    MoritaWitness w = r.witness(label("target"));
    if (c.contains("horizon")) w.horizon = number(c["horizon"], ctx + ".horizon");
    bool strong = kind == "strong_morita";
    return {w.label, [w, strong](const CheckOptions& o) {
              return strong ? check_strong_morita(w, o) : check_quasi_equivalence(w, o);
            }};
  }
  if (kind == "tensor_distribution") {
    TensorData d{r.action(label("right")), r.action(label("left")), std::nullopt, std::nullopt, std::nullopt};
    if (c.contains("outer_left")) d.outer_left = r.action(label("outer_left"));
    if (c.contains("outer_right")) d.outer_right = r.action(label("outer_right"));
    if (c.contains("quotient")) d.quotient = r.quotient(label("quotient"));
    Point x = point(req(c, "x", ctx), ctx + ".x");
    Point y = point(req(c, "y", ctx), ctx + ".y");
    return {d.right.label + "," + d.left.label, [d, x, y, c](const CheckOptions& o) {
              auto res = tensor_distribution(d, span_of(x), span_of(y), o);
              res.report.components["dimension"] = static_cast<double>(res.basis.cols());
              if (c.contains("expect_dimension") && integer(c["expect_dimension"], "expect_dimension") != res.basis.cols()) {
                res.report.status = Status::Fail;
              }
              return res.report;
            }};
  }
  if (kind == "apath_valid") {
    APath p = r.path(label("target"));
    int ts = c.contains("time_samples") ? integer(c["time_samples"], ctx + ".time_samples") : 65;
    return {p.label, [p, ts](const CheckOptions& o) { return validate_apath(p, o, ts); }};
  }
  if (kind == "apath_integrate") {
    APath p = r.path(label("target"));
    ActionModel a = r.action(label("action"));
    Point x0 = point(req(c, "x0", ctx), ctx + ".x0");
    IntegratorConfig cfg = integrator(c);
    return {p.label,
            [p, a, x0, cfg, c](const CheckOptions& o) {
              Trajectory tr = integrate_apath(p, a, span_of(x0), cfg);
              CheckReport rep;
              ResidualTracker t;
              t.add("base_tracking", tr.base_tracking, x0);
              t.finish(rep, o.tolerance);
              rep.notes["endpoint"] = nlohmann::json(to_vector(tr.end())).dump();
              expect_endpoint(rep, tr.end(), c, o.tolerance);
              return rep;
            },
            true};
  }
  if (kind == "transport_invariances") {
    APath p = r.path(label("target"));
    ActionModel a = r.action(label("action"));
    Point x0 = point(req(c, "x0", ctx), ctx + ".x0");
    std::optional<MoritaWitness> w;
    if (c.contains("witness")) w = r.witness(label("witness"));
    IntegratorConfig cfg = integrator(c);
    return {p.label,
            [p, a, x0, w, cfg](const CheckOptions& o) {
              return check_transport_invariances(p, a, span_of(x0), cfg, w ? &*w : nullptr, o);
            },
            true};
  }
  if (kind == "psi_transport") {
    MoritaWitness w = r.witness(label("target"));
    ActionModel m = r.action(label("module"));
    APath p = r.path(label("path"));
    Point xp = point(req(c, "x_prime", ctx), ctx + ".x_prime");
    Point x = point(req(c, "x", ctx), ctx + ".x");
    Point n0 = point(req(c, "n0", ctx), ctx + ".n0");
    std::optional<ModuleMorphism> f;
    if (c.contains("morphism")) {
      const json& s = c["morphism"];
      f = ModuleMorphism{r.map(str(s, "map", ctx + ".morphism")), r.action(str(s, "target", ctx + ".morphism"))};
    }
    IntegratorConfig cfg = integrator(c);
    return {w.label,
            [w, m, p, xp, x, n0, f, cfg, c](const CheckOptions& o) {
              auto res = psi_transport(w, span_of(xp), span_of(x), m, span_of(n0), p, cfg, f, o);
              res.report.notes["endpoint"] = nlohmann::json(to_vector(res.point)).dump();
              expect_endpoint(res.report, res.point, c, o.tolerance);
              return res.report;
            },
            true};
  }
  fail(ErrorKind::SchemaViolation, ctx + ".kind '" + kind + "' is not a known check kind");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, "invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) fail(ErrorKind::SchemaViolation, "scenario must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "name") {
      if (!value.is_string()) fail(ErrorKind::SchemaViolation, "name must be a string");
    } else if (key == "checks" || key == "description") {
    } else if (!kSections.count(key)) {
      fail(ErrorKind::SchemaViolation, "unknown top-level key '" + key + "'");
    } else if (!value.is_object()) {
      fail(ErrorKind::SchemaViolation, key + " must be an object of named declarations");
    }
  }
  Scenario s;
  s.name = doc.value("name", name);
  auto reg = std::make_shared<Registry>(doc);
  s.state = reg;

  // Resolve every declaration so that broken entries are reported at load.
  for (const auto& section : kSections) {
    if (!doc.contains(section)) continue;
    for (const auto& [label, value] : doc[section].items()) {
      (void)value;
      if (section == "manifolds") reg->chart(label);
      else if (section == "vector_fields") reg->named_field(label);
      else if (section == "bivectors") reg->bivector(label);
      else if (section == "two_forms") reg->two_form(label);
      else if (section == "maps") reg->map(label);
      else if (section == "algebroids") reg->algebroid(label);
      else if (section == "dirac") reg->dirac(label);
      else if (section == "dirac_maps") reg->dirac_map(label);
      else if (section == "morphisms") reg->morphism(label);
      else if (section == "actions") reg->action(label);
      else if (section == "quotients") reg->quotient(label);
      else if (section == "witnesses") reg->witness(label);
      else if (section == "paths") reg->path(label);
    }
  }

  if (doc.contains("checks")) {
    const json& checks = doc["checks"];
    if (!checks.is_array()) fail(ErrorKind::SchemaViolation, "checks must be an array");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const json& c = checks[i];
      std::string ctx = "checks[" + std::to_string(i) + "]";
      ScenarioCheck sc;
      sc.kind = str(c, "kind", ctx);
      Built b = build_check(reg, sc.kind, c, ctx);
      if (c.contains("id")) {
        sc.id = str(c, "id", ctx);
      } else {
        sc.id = sc.kind + ":" + (c.contains("target") ? str(c, "target", ctx) : b.target);
      }
      sc.run = std::move(b.run);
      sc.default_tolerance = b.ode ? 1e-6 : 1e-8;
      if (c.contains("tolerance")) sc.tolerance = number(c["tolerance"], ctx + ".tolerance");
      if (c.contains("samples")) sc.samples = integer(c["samples"], ctx + ".samples");
      if (c.contains("seed")) {
        if (!c["seed"].is_number_unsigned()) fail(ErrorKind::SchemaViolation, ctx + ".seed must be a non-negative integer");
        sc.seed = c["seed"].get<std::uint64_t>();
      }
      s.checks.push_back(std::move(sc));
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot read scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.stem().string());
}

int RunResult::exit_code() const {
  int code = 0;
  for (const auto& r : reports) {
    if (r.status == Status::Error) return 2;
    if (r.status != Status::Pass) code = 1;
  }
  return code;
}

namespace {

CheckReport run_one(const ScenarioCheck& c, const RunOptions& opt) {
  CheckOptions o;
  o.tolerance = c.tolerance.value_or(opt.tolerance.value_or(c.default_tolerance));
  o.samples = c.samples.value_or(opt.samples.value_or(64));
  o.seed = c.seed.value_or(opt.seed.value_or(0));
  auto start = std::chrono::steady_clock::now();
  CheckReport rep;
  try {
    rep = c.run(o);
  } catch (const std::exception& e) {
    rep = CheckReport{};
    rep.status = Status::Error;
    rep.residual = 0.0;
    rep.message = e.what();
  }
  auto stop = std::chrono::steady_clock::now();
  rep.id = c.id;
  rep.kind = c.kind;
  rep.tolerance = o.tolerance;
  rep.ms = opt.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  return rep;
}

}  // namespace

RunResult run_checks(const Scenario& s, const RunOptions& opt) {
  RunResult out;
  out.scenario = s.name;
  out.reports.resize(s.checks.size());
  const int jobs = std::max(1, std::min(opt.jobs, static_cast<int>(s.checks.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < s.checks.size(); ++i) out.reports[i] = run_one(s.checks[i], opt);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < s.checks.size(); i = next++) out.reports[i] = run_one(s.checks[i], opt);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

nlohmann::json to_json(const RunResult& r) {
  json j;
  j["scenario"] = r.scenario;
  j["reports"] = json::array();
  for (const auto& rep : r.reports) j["reports"].push_back(to_json(rep));
  return j;
}

RunResult run_result_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("scenario") || !j["scenario"].is_string() || !j.contains("reports") ||
      !j["reports"].is_array()) {
    fail(ErrorKind::SchemaViolation, "report document needs 'scenario' and 'reports'");
  }
  RunResult r;
  r.scenario = j["scenario"].get<std::string>();
  for (const auto& rep : j["reports"]) r.reports.push_back(report_from_json(rep));
  return r;
}

std::string to_text(const RunResult& r) {
  std::ostringstream out;
  out << "scenario " << r.scenario << "\n";
  int counts[4] = {0, 0, 0, 0};
  for (const auto& rep : r.reports) {
    out << to_text(rep);
    counts[static_cast<int>(rep.status)] += 1;
  }
  out << r.reports.size() << " checks: " << counts[0] << " pass, " << counts[1] << " fail, " << counts[2]
      << " inconclusive, " << counts[3] << " error\n";
  return out.str();
}

}  // namespace alab
