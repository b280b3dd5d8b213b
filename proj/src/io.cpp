#include "conics/io.hpp"

#include <fstream>

namespace conics {

namespace {

enum class Encoding { Unknown, Strings, Numbers };

Rational read_coord(const json& v, Encoding& enc) {
  Encoding here;
  Rational q;
  if (v.is_string()) {
    here = Encoding::Strings;
    try {
      q = parse_rational(v.get<std::string>());
    } catch (const std::exception& e) {
      throw InvalidInput("bad rational \"" + v.get<std::string>() + "\": " + e.what());
    }
  } else if (v.is_number_integer()) {
    here = Encoding::Numbers;
    q = Rational(v.get<long>());
  } else if (v.is_number()) {
    here = Encoding::Numbers;
    q = rational_from_double(v.get<double>());
  } else {
    throw InvalidInput("coordinate must be a string or a number");
  }
  if (enc == Encoding::Unknown) enc = here;
  if (enc != here) throw InvalidInput("mixed rational strings and floating point numbers");
  return q;
}

template <std::size_t N>
std::array<Rational, N> read_vec(const json& j, const char* what, Encoding& enc) {
  if (!j.is_array() || j.size() != N)
    throw InvalidInput(std::string(what) + " must be an array of " + std::to_string(N) + " coordinates");
  std::array<Rational, N> out;
  for (std::size_t k = 0; k < N; ++k) out[k] = read_coord(j[k], enc);
  return out;
}

template <std::size_t N>
json write_vec(const std::array<Rational, N>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

json chart_json(const Chart& c) { return json::array({c.i, c.j}); }

Chart read_chart(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("chart must be [i, j]");
  try {
    return Chart(j[0].get<int>(), j[1].get<int>());
  } catch (const std::out_of_range& e) {
    throw InvalidInput(e.what());
  }
}

json record_json(const ChartIndexRecord<Fp>& r) {
  json a = json::array(), b = json::array();
  for (const auto& x : r.point.a) a.push_back(x.value());
  for (const auto& x : r.point.b) b.push_back(x.value());
  return {{"chart", chart_json(r.chart)}, {"a", a}, {"b", b}, {"det", r.determinant.value()},
          {"oriented", r.oriented.value()}};
}

json record_json(const ChartIndexRecord<Fp2>& r) {
  json a = json::array(), b = json::array();
  for (const auto& x : r.point.a) a.push_back({x.c0(), x.c1()});
  for (const auto& x : r.point.b) b.push_back({x.c0(), x.c1()});
  return {{"chart", chart_json(r.chart)}, {"a", a}, {"b", b}, {"det", {r.determinant.c0(), r.determinant.c1()}},
          {"oriented", {r.oriented.c0(), r.oriented.c1()}}};
}

json value_json(const Fp& x) { return x.value(); }
json value_json(const Fp2& x) { return json::array({x.c0(), x.c1()}); }

template <class T>
json brute_json(const BruteForceResult<T>& r) {
  json sols = json::array();
  for (const auto& s : r.solutions) {
    json plane = json::array(), conic = json::array(), charts = json::array();
    for (const auto& x : s.plane.a) plane.push_back(value_json(x));
    for (const auto& x : s.conic) conic.push_back(value_json(x));
    for (const auto& rec : s.charts) charts.push_back(record_json(rec));
    json entry = {{"plane", plane},       {"plane_chart", s.plane_chart}, {"conic", conic},
                  {"over_base_field", s.over_base_field}, {"singular", s.singular()}, {"charts", charts}};
    if (!s.singular()) {
      entry["compatible"] = chart_compatible(s);
      entry["index"] = to_json(fq_local_index(s));
    }
    sols.push_back(entry);
  }
  return {{"p", r.p},
          {"degree", r.degree},
          {"candidates", r.candidates},
          {"chart_evaluations", r.chart_evaluations},
          {"discrepancies", r.discrepancies},
          {"solutions", sols}};
}

}  // namespace

Instance instance_from_json(const json& j) {
  if (!j.is_object() || !j.contains("lines")) throw InvalidInput("expected an object with a \"lines\" array");
  const json& ls = j["lines"];
  if (!ls.is_array() || ls.size() != 8) throw InvalidInput("\"lines\" must hold exactly 8 lines");
  Encoding enc = Encoding::Unknown;
  std::vector<Line3<Rational>> lines;
  for (const auto& l : ls) {
    if (!l.is_object() || !l.contains("p") || !l.contains("s")) throw InvalidInput("each line needs \"p\" and \"s\"");
    try {
      lines.emplace_back(read_vec<4>(l["p"], "p", enc), read_vec<4>(l["s"], "s", enc));
    } catch (const DegenerateLine&) {
      throw InvalidInput("line " + std::to_string(lines.size()) + " has proportional p and s");
    }
  }
  Instance inst{{lines[0], lines[1], lines[2], lines[3], lines[4], lines[5], lines[6], lines[7]}, "file", std::nullopt, std::nullopt};

  if (j.contains("kind")) inst.kind = j["kind"].get<std::string>();
  if (j.contains("seed") && !j["seed"].is_null()) inst.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("planted") && !j["planted"].is_null()) {
    const json& pj = j["planted"];
    Encoding penc = Encoding::Unknown;
    ChartPoint<Rational> pt;
    pt.chart = read_chart(pj.at("chart"));
    pt.a = read_vec<3>(pj.at("a"), "planted a", penc);
    pt.b = read_vec<5>(pj.at("b"), "planted b", penc);
    inst.planted = pt;
  }
  return inst;
}

json instance_to_json(const Instance& inst) {
  json ls = json::array();
  for (const auto& l : inst.lines) ls.push_back({{"p", write_vec(l.p())}, {"s", write_vec(l.s())}});
  json j = {{"lines", ls}, {"kind", inst.kind}};
  if (inst.seed) j["seed"] = *inst.seed;
  if (inst.planted)
    j["planted"] = {{"chart", chart_json(inst.planted->chart)},
                    {"a", write_vec(inst.planted->a)},
                    {"b", write_vec(inst.planted->b)}};
  return j;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return instance_from_json(j);
}

void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }
json to_json(const Fp& x) { return {{"p", x.modulus()}, {"v", x.value()}}; }
json to_json(const Fp2& x) { return {{"p", x.modulus()}, {"c", {x.c0(), x.c1()}}}; }

json to_json(const GwForm& f) {
  json terms = json::array();
  for (const auto& [rep, mult] : f.terms()) terms.push_back({{"class", std::to_string(rep)}, {"mult", mult}});
  return {{"field", f.field().name()}, {"terms", terms}, {"text", f.str()}};
}

json to_json(const ChartPoint<Complex>& pt) {
  json a = json::array(), b = json::array();
  for (const auto& x : pt.a) a.push_back(to_json(x));
  for (const auto& x : pt.b) b.push_back(to_json(x));
  return {{"chart", chart_json(pt.chart)}, {"a", a}, {"b", b}};
}

json to_json(const SolutionSet& set) {
  json sols = json::array();
  auto emit = [&](const ChartPoint<Complex>& pt, const ConicSolution& s, Complex det) {
    json e = to_json(pt);
    e["jacobian"] = to_json(det);
    e["reality"] = to_string(s.reality);
    e["sign"] = s.reality == Reality::Real ? json(s.sign) : json(nullptr);
    e["residual"] = s.residual;
    sols.push_back(e);
  };
  for (const auto& s : set.solutions) {
    emit(s.point, s, s.jacobian);
    if (s.reality == Reality::Pair) emit(conjugate(s.point), s, std::conj(s.jacobian));
  }
  return {{"chart", chart_json(set.chart)},
          {"count", set.total()},
          {"real", set.real_count()},
          {"positive", set.positive()},
          {"negative", set.negative()},
          {"paths", set.paths},
          {"converged", set.converged},
          {"diverged", set.diverged},
          {"failed", set.failed},
          {"retries", set.retries},
          {"seconds", set.seconds},
          {"solutions", sols}};
}

json to_json(const VerificationReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  const GwInvariants inv = invariants(rep.gw);
  json j = {{"passed", rep.passed()},
            {"count", rep.count},
            {"real", rep.real},
            {"positive", rep.positive},
            {"negative", rep.negative},
            {"gw", to_json(rep.gw)},
            {"rank", inv.rank},
            {"signature", inv.signature ? json(*inv.signature) : json(nullptr)},
            {"verdict", to_string(rep.verdict)},
            {"checks", checks}};
  return j;
}

json to_json(const BruteForceResult<Fp>& r) { return brute_json(r); }
json to_json(const BruteForceResult<Fp2>& r) { return brute_json(r); }

}  // namespace conics
