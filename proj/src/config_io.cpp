#include "calderonlab/config_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace calderonlab {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) { throw_input(where + ": " + what); }

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where + "." + key, "missing");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) bad(where + "." + it.key(), "unknown key");
  }
}

Json read_file(const fs::path& p, const std::string& where) {
  std::ifstream in(p);
  if (!in) bad(where, "cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad(where, std::string("malformed JSON in ") + p.string() + ": " + e.what());
  }
}

std::vector<double> grid_from_json(const Json& j, const std::string& where) {
  std::vector<double> g;
  if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i) g.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  } else if (j.is_object()) {
    only_keys(j, {"start", "stop", "count"}, where);
    const double a = number(field(j, "start", where), where + ".start");
    const double b = number(field(j, "stop", where), where + ".stop");
    const int n = integer(field(j, "count", where), where + ".count");
    if (n < 1) bad(where + ".count", "must be positive");
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  } else {
    bad(where, "expected an array or {start, stop, count}");
  }
  if (g.empty()) bad(where, "empty grid");
  return g;
}

}  // namespace

CoefficientSeries coefficient_from_json(const Json& j, Index rank, const std::string& where) {
  only_keys(j, {"P", "M_max", "coeffs"}, where);
  const int P = integer(field(j, "P", where), where + ".P");
  const int M = integer(field(j, "M_max", where), where + ".M_max");
  if (P < 0 || M < 0) bad(where, "P and M_max must be nonnegative");
  const Json& c = field(j, "coeffs", where);
  const std::string cw = where + ".coeffs";
  if (!c.is_array() || c.size() != size_t(P + 1)) bad(cw, "expected P+1 entries");
  CoefficientSeries s(rank, P, M);
  for (int p = 0; p <= P; ++p) {
    const std::string pw = cw + "[" + std::to_string(p) + "]";
    if (!c[p].is_array() || c[p].size() != size_t(2 * M + 1)) bad(pw, "expected 2*M_max+1 entries");
    for (int m = 0; m < 2 * M + 1; ++m) {
      const std::string mw = pw + "[" + std::to_string(m) + "]";
      const Json& mat = c[p][m];
      if (!mat.is_array() || mat.size() != size_t(rank)) bad(mw, "expected " + std::to_string(rank) + " rows");
      for (Index r = 0; r < rank; ++r) {
        const std::string rw = mw + "[" + std::to_string(r) + "]";
        if (!mat[r].is_array() || mat[r].size() != size_t(rank)) bad(rw, "expected " + std::to_string(rank) + " columns");
        for (Index q = 0; q < rank; ++q) {
          const Json& z = mat[r][q];
          const std::string zw = rw + "[" + std::to_string(q) + "]";
          if (!z.is_array() || z.size() != 2) bad(zw, "expected [re, im]");
          s.term(p, m - M)(r, q) = Complex(number(z[0], zw), number(z[1], zw));
        }
      }
    }
  }
  if (!s.is_finite()) bad(where, "non-finite coefficient");
  return s;
}

Json coefficient_to_json(const CoefficientSeries& c) {
  Json coeffs = Json::array();
  for (int p = 0; p <= c.P(); ++p) {
    Json ms = Json::array();
    for (int m = -c.M_max(); m <= c.M_max(); ++m) {
      Json mat = Json::array();
      for (Index r = 0; r < c.rank(); ++r) {
        Json row = Json::array();
        for (Index q = 0; q < c.rank(); ++q) row.push_back({c.term(p, m)(r, q).real(), c.term(p, m)(r, q).imag()});
        mat.push_back(row);
      }
      ms.push_back(mat);
    }
    coeffs.push_back(ms);
  }
  return {{"P", c.P()}, {"M_max", c.M_max()}, {"coeffs", coeffs}};
}

OperatorSpec operator_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  only_keys(j, {"name", "model", "geometry", "J", "beta1", "beta0", "C", "boundary_morphism"}, where);
  const Json& g = field(j, "geometry", where);
  const std::string gw = where + ".geometry";
  only_keys(g, {"length", "n_theta", "n_x", "rank"}, gw);
  GeometryConfig geo;
  geo.length = number(field(g, "length", gw), gw + ".length");
  geo.n_theta = integer(field(g, "n_theta", gw), gw + ".n_theta");
  geo.n_x = integer(field(g, "n_x", gw), gw + ".n_x");
  geo.rank = g.contains("rank") ? integer(g["rank"], gw + ".rank") : 1;

  OperatorSpec spec;
  if (j.contains("model")) {
    if (!j["model"].is_string()) bad(where + ".model", "expected a string");
    const std::string model = j["model"];
    if (model == "cauchy_riemann") spec = cauchy_riemann_spec(geo.length, geo.n_theta, geo.n_x);
    else if (model == "dirac") spec = dirac_spec(geo.length, geo.n_theta, geo.n_x);
    else bad(where + ".model", "unknown model '" + model + "'");
    if (g.contains("rank") && geo.rank != spec.geometry.rank) bad(gw + ".rank", "does not match the model");
    geo.rank = spec.geometry.rank;
  } else {
    spec.geometry = geo;
    spec.J = coefficient_from_json(field(j, "J", where), geo.rank, where + ".J");
    spec.beta1 = coefficient_from_json(field(j, "beta1", where), geo.rank, where + ".beta1");
    spec.beta0 = j.contains("beta0") ? coefficient_from_json(j["beta0"], geo.rank, where + ".beta0")
                                     : CoefficientSeries::zero(geo.rank);
    spec.C = j.contains("C") ? coefficient_from_json(j["C"], geo.rank, where + ".C") : CoefficientSeries::zero(geo.rank);
  }
  spec.geometry = geo;
  if (j.contains("name")) {
    if (!j["name"].is_string()) bad(where + ".name", "expected a string");
    spec.name = j["name"];
  } else if (spec.name.empty()) {
    spec.name = "custom";
  }
  if (j.contains("model") && (j.contains("J") || j.contains("beta1") || j.contains("beta0") || j.contains("C"))) {
    const std::string keys[] = {"J", "beta1", "beta0", "C"};
    CoefficientSeries* slots[] = {&spec.J, &spec.beta1, &spec.beta0, &spec.C};
    for (int i = 0; i < 4; ++i)
      if (j.contains(keys[i])) *slots[i] = coefficient_from_json(j[keys[i]], geo.rank, where + "." + keys[i]);
  }
  if (j.contains("boundary_morphism")) {
    const Json& t = j["boundary_morphism"];
    const std::string tw = where + ".boundary_morphism";
    if (t.is_string()) {
      const std::string kind = t;
      if (kind == "inverse_J_adjoint") spec.T.kind = MorphismKind::inverse_J_adjoint;
      else if (kind == "J_unitary_part") spec.T.kind = MorphismKind::J_unitary_part;
      else bad(tw, "unknown boundary morphism '" + kind + "'");
    } else if (t.is_object()) {
      only_keys(t, {"explicit"}, tw);
      const Json& e = field(t, "explicit", tw);
      only_keys(e, {"x0", "xL"}, tw + ".explicit");
      spec.T.kind = MorphismKind::explicit_matrix;
      spec.T.explicit_T[0] = coefficient_from_json(field(e, "x0", tw + ".explicit"), geo.rank, tw + ".explicit.x0");
      spec.T.explicit_T[1] = coefficient_from_json(field(e, "xL", tw + ".explicit"), geo.rank, tw + ".explicit.xL");
    } else {
      bad(tw, "expected a string or {explicit: {x0, xL}}");
    }
  }
  spec.validate();
  return spec;
}

Json operator_to_json(const OperatorSpec& spec) {
  Json j;
  j["name"] = spec.name;
  j["geometry"] = {{"length", spec.geometry.length},
                   {"n_theta", spec.geometry.n_theta},
                   {"n_x", spec.geometry.n_x},
                   {"rank", spec.geometry.rank}};
  j["J"] = coefficient_to_json(spec.J);
  j["beta1"] = coefficient_to_json(spec.beta1);
  j["beta0"] = coefficient_to_json(spec.beta0);
  j["C"] = coefficient_to_json(spec.C);
  if (spec.T.kind == MorphismKind::explicit_matrix)
    j["boundary_morphism"] = {{"explicit",
                               {{"x0", coefficient_to_json(spec.T.explicit_T[0])},
                                {"xL", coefficient_to_json(spec.T.explicit_T[1])}}}};
  else
    j["boundary_morphism"] = spec.T.name();
  return j;
}

RunConfig run_config_from_json(const Json& j, const std::string& base_dir) {
  const std::string w = "config";
  if (!j.is_object()) bad(w, "expected an object");
  only_keys(j, {"command", "operator", "tolerances", "contour", "sweep", "ucp", "oracle"}, w);
  RunConfig cfg;
  cfg.echo = j;
  if (j.contains("command")) {
    if (!j["command"].is_string()) bad("config.command", "expected a string");
    cfg.command = j["command"];
  }
  const Json& op = field(j, "operator", w);
  if (op.is_string()) {
    fs::path p = op.get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    cfg.spec = operator_from_json(read_file(p, "config.operator"), "operator");
  } else {
    cfg.spec = operator_from_json(op, "config.operator");
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    if (!t.is_object()) bad("config.tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string kw = "config.tolerances." + it.key();
      const double v = number(it.value(), kw);
      try {
        cfg.tol.set(it.key(), v);
      } catch (const Error& e) {
        bad(kw, e.what());
      }
    }
  }
  if (j.contains("contour")) {
    const Json& c = j["contour"];
    const std::string cw = "config.contour";
    if (!c.is_object()) bad(cw, "expected an object");
    only_keys(c, {"cut_radius", "leg_angle", "truncation_radius", "n_quad"}, cw);
    if (c.contains("cut_radius")) cfg.contour.cut_radius = number(c["cut_radius"], cw + ".cut_radius");
    if (c.contains("leg_angle")) cfg.contour.leg_angle = number(c["leg_angle"], cw + ".leg_angle");
    if (c.contains("truncation_radius"))
      cfg.contour.truncation_radius = number(c["truncation_radius"], cw + ".truncation_radius");
    if (c.contains("n_quad")) cfg.contour.n_quad = integer(c["n_quad"], cw + ".n_quad");
  }
  if (j.contains("sweep")) {
    const Json& s = j["sweep"];
    const std::string sw = "config.sweep";
    if (!s.is_object()) bad(sw, "expected an object");
    only_keys(s, {"family", "parameter", "direction", "grid", "sobolev_s", "expect_jump"}, sw);
    SweepConfig sc;
    sc.family = s.contains("family") ? s["family"].get<std::string>() : "custom";
    if (sc.family == "custom") {
      if (!field(s, "parameter", sw).is_string()) bad(sw + ".parameter", "expected a string");
      try {
        sc.parameter = parse_sweep_parameter(s["parameter"]);
      } catch (const Error&) {
        bad(sw + ".parameter", "unknown parameter");
      }
      sc.direction = coefficient_from_json(field(s, "direction", sw), cfg.spec.geometry.rank, sw + ".direction");
    } else if (sc.family != "zeroth_order" && sc.family != "crossing") {
      bad(sw + ".family", "unknown family '" + sc.family + "'");
    }
    sc.grid = grid_from_json(field(s, "grid", sw), sw + ".grid");
    if (s.contains("sobolev_s")) sc.sobolev_s = number(s["sobolev_s"], sw + ".sobolev_s");
    if (std::abs(sc.sobolev_s) > 0.5) bad(sw + ".sobolev_s", "must lie in [-1/2, 1/2]");
    if (s.contains("expect_jump")) {
      if (!s["expect_jump"].is_boolean()) bad(sw + ".expect_jump", "expected a boolean");
      sc.expect_jump = s["expect_jump"].get<bool>();
    }
    cfg.sweep = sc;
  }
  if (j.contains("ucp")) {
    const Json& u = j["ucp"];
    const std::string uw = "config.ucp";
    if (!u.is_object()) bad(uw, "expected an object");
    only_keys(u, {"x_samples", "suite"}, uw);
    if (u.contains("x_samples")) cfg.ucp_samples = grid_from_json(u["x_samples"], uw + ".x_samples");
    if (u.contains("suite")) {
      if (!u["suite"].is_boolean()) bad(uw + ".suite", "expected a boolean");
      cfg.ucp_suite = u["suite"];
    }
  }
  if (j.contains("oracle")) {
    const Json& o = j["oracle"];
    if (!o.is_object()) bad("config.oracle", "expected an object");
    only_keys(o, {"mode_limit"}, "config.oracle");
    if (o.contains("mode_limit")) cfg.mode_limit = integer(o["mode_limit"], "config.oracle.mode_limit");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  const Json j = read_file(path, "config");
  RunConfig cfg = run_config_from_json(j, fs::path(path).parent_path().string());
  cfg.source = path;
  return cfg;
}

}  // namespace calderonlab
