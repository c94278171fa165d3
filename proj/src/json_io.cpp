#include "bdlab/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bdlab/error.hpp"

namespace bdlab::json_io {

namespace {

// Wraps decoding so library errors keep their kind and JSON shape errors
// become usage errors.
template <class Fn>
auto decode(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::usage, std::string("malformed ") + what + ": " + e.what());
  }
}

// nlohmann writes non-finite doubles as null; keep that explicit.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Json matrix(const std::vector<std::vector<double>>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) out.push_back(numbers(r));
  return out;
}

Json functions(std::span<const L1Fun> fs) {
  Json out = Json::array();
  for (const auto& f : fs) out.push_back(numbers(f.values));
  return out;
}

}  // namespace

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::usage, std::string("malformed JSON: ") + e.what());
  }
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::usage, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::usage, "malformed JSON in " + path + ": " + e.what());
  }
}

void write_file(const std::string& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::usage, "cannot write " + path);
  out << value.dump(2) << '\n';
}

Json to_json(const AtomSpace& space) {
  return {{"kind", space.kind() == MeasureKind::counting ? "counting" : "probability"},
          {"weights", numbers(space.weights())}};
}

AtomSpace atom_space_from_json(const Json& j) {
  return decode("atom space", [&] {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "counting" && kind != "probability") {
      throw Error(ErrorKind::usage, "atom space kind must be counting or probability");
    }
    if (j.contains("size") && !j.contains("weights")) {
      const auto n = j.at("size").get<std::size_t>();
      return kind == "counting" ? AtomSpace::counting(n) : AtomSpace::uniform(n);
    }
    return AtomSpace(kind == "counting" ? MeasureKind::counting : MeasureKind::probability,
                     j.at("weights").get<std::vector<double>>());
  });
}

Json to_json(const L1Fun& f) { return {{"values", numbers(f.values)}}; }

L1Fun l1fun_from_json(const Json& j) {
  return decode("function", [&] {
    return L1Fun(j.is_array() ? j.get<std::vector<double>>() : j.at("values").get<std::vector<double>>());
  });
}

Json to_json(const AtomSet& set) { return Json(std::vector<std::size_t>(set.indices().begin(), set.indices().end())); }

AtomSet atom_set_from_json(const Json& j) {
  return decode("atom set", [&] { return AtomSet(j.get<std::vector<std::size_t>>()); });
}

Json to_json(const DomainShape& shape) {
  return {{"blocks", std::vector<std::size_t>(shape.blocks().begin(), shape.blocks().end())}};
}

DomainShape domain_from_json(const Json& j) {
  return decode("domain", [&] { return DomainShape(j.at("blocks").get<std::vector<std::size_t>>()); });
}

Json to_json(const FiniteOperator& op) {
  return {{"domain", to_json(op.domain())},
          {"range", to_json(op.range())},
          {"columns", functions(op.columns())},
          {"symmetric", op.symmetric_entries()}};
}

FiniteOperator operator_from_json(const Json& j) {
  return decode("operator", [&] {
    std::vector<L1Fun> columns;
    for (const auto& c : j.at("columns")) columns.push_back(l1fun_from_json(c));
    return FiniteOperator(domain_from_json(j.at("domain")), atom_space_from_json(j.at("range")), std::move(columns),
                          j.value("symmetric", false));
  });
}

Json to_json(const ExtremePoint& point) {
  Json out = Json::array();
  for (const auto& c : point.choices) out.push_back({c.coord, c.sign});
  return out;
}

Json to_json(const SymmetricDistribution& law) {
  Json support = Json::array();
  for (const auto& [v, p] : law.support()) support.push_back({v, p});
  return {{"support", support}};
}

SymmetricDistribution distribution_from_json(const Json& j) {
  return decode("distribution", [&] {
    std::vector<std::pair<double, double>> support;
    for (const auto& point : j.at("support")) support.emplace_back(point.at(0).get<double>(), point.at(1).get<double>());
    return SymmetricDistribution(std::move(support));
  });
}

Json to_json(const SymmetricRandomMatrixSpec& spec) {
  Json entries = Json::array();
  for (const auto& e : spec.entries) entries.push_back(to_json(e));
  Json backend = spec.exact ? Json{{"kind", "exact"}}
                            : Json{{"kind", "monte-carlo"},
                                   {"samples", spec.monte_carlo.samples},
                                   {"seed", spec.monte_carlo.seed}};
  return {{"m", spec.m}, {"entries", entries}, {"backend", backend}};
}

SymmetricRandomMatrixSpec random_spec_from_json(const Json& j) {
  return decode("random matrix spec", [&] {
    SymmetricRandomMatrixSpec spec;
    spec.m = j.at("m").get<std::size_t>();
    if (j.contains("support")) {
      spec.entries.push_back(distribution_from_json(j));
    } else {
      for (const auto& e : j.at("entries")) spec.entries.push_back(distribution_from_json(e));
    }
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      const auto kind = b.at("kind").get<std::string>();
      if (kind == "monte-carlo") {
        spec.exact = false;
        spec.monte_carlo.samples = b.value("samples", spec.monte_carlo.samples);
        spec.monte_carlo.seed = b.value("seed", spec.monte_carlo.seed);
      } else if (kind != "exact") {
        throw Error(ErrorKind::usage, "backend kind must be exact or monte-carlo");
      }
    }
    return spec;
  });
}

Json to_json(const NormResult& r) {
  return {{"value", number(r.value)}, {"lower_bound", r.lower_bound}, {"witness", to_json(r.witness)},
          {"evaluated", r.evaluated}};
}

Json to_json(const L1EquivalenceCert& c) {
  return {{"lower", number(c.lower)}, {"upper", number(c.upper)}, {"ratio", number(c.ratio())},
          {"minimizer", numbers(c.minimizer)}, {"orthant", c.orthant}};
}

Json to_json(const LatticeBoundCert& c) {
  return {{"bound", numbers(c.bound.values)}, {"mass", number(c.mass)}, {"epsilon", number(c.epsilon)},
          {"worst_excess", number(c.worst_excess)}, {"witness", to_json(c.witness)},
          {"passed", c.passed}, {"exhaustive", c.exhaustive}};
}

Json to_json(const DisjointFamily& f) {
  Json pieces = Json::array();
  for (const auto& p : f.pieces) pieces.push_back({{"f", numbers(p.f.values)}, {"support", to_json(p.support)}});
  return {{"delta", number(f.delta)}, {"pieces", pieces}};
}

Json to_json(const EscapeTrace& t) {
  Json points = Json::array();
  for (const auto& p : t.points) points.push_back(to_json(p));
  Json regions = Json::array();
  for (const auto& r : t.regions) regions.push_back(to_json(r));
  return {{"floor_steps", t.floor_steps}, {"steps", t.steps}, {"bumped", t.bumped},
          {"points", points}, {"gains", numbers(t.gains)}, {"regions", regions},
          {"chain", t.chain}, {"cross_excess", matrix(t.cross_excess)}, {"outcome", t.outcome}};
}

Json to_json(const EscapeResult& r) {
  Json out{{"trace", to_json(r.trace)}};
  if (r.found_bound()) {
    out["lattice_bound"] = to_json(r.bound());
  } else {
    out["disjoint_family"] = to_json(r.family());
  }
  return out;
}

Json to_json(const SelectionResult& r) {
  return {{"selected", r.selected}, {"row_sums", numbers(r.row_sums)}, {"equivalence", to_json(r.cert)},
          {"rounds", r.rounds}, {"seed", r.seed}};
}

Json to_json(const ConflictBound& c) {
  return {{"certified", number(c.certified)}, {"closed_form", number(c.closed_form)},
          {"worst_excess", number(c.worst_excess)}, {"precondition_held", c.precondition_held}};
}

Json to_json(const JamesResult& r) {
  return {{"blocks", matrix(r.blocks)}, {"equivalence", to_json(r.cert)}, {"level", r.level},
          {"tuple", r.tuple}, {"threshold", number(r.threshold)}, {"level_ratios", matrix(r.level_ratios)}};
}

Json to_json(const ProjectionCert& c) {
  return {{"functionals", functions(c.functionals)}, {"norm", number(c.norm)}, {"lp_value", number(c.lp_value)},
          {"biorthogonality_residual", number(c.biorthogonality_residual)}};
}

Json to_json(const FactorizationCert& c) {
  return {{"k", c.k}, {"a_columns", matrix(c.a_columns)}, {"b_rows", matrix(c.b_rows)},
          {"a_norm", number(c.a_norm)}, {"b_norm", number(c.b_norm)}, {"product", number(c.product())},
          {"residual", number(c.residual)}, {"lambda", number(c.lambda)},
          {"measured_ratio", number(c.measured_ratio)}, {"projection_norm", number(c.projection_norm)},
          {"product_bound", number(c.product_bound)}};
}

Json to_json(const Pi2Lower& p) {
  return {{"value", number(p.value)}, {"best", p.best}, {"numerator", number(p.numerator)},
          {"denominator", number(p.denominator)}};
}

Json to_json(const ColumnFunction& f) { return Json(f.j); }

Json to_json(const CaseSplit& c) {
  Json family = Json::array();
  for (const auto& f : c.family) family.push_back(to_json(f));
  return {{"case", c.case_a ? "A" : "B"}, {"family", family}, {"family_tails", numbers(c.family_tails)},
          {"residual_tail", number(c.residual_tail)}, {"residual_witness", to_json(c.residual_witness)},
          {"heuristic", c.heuristic}, {"families_checked", c.families_checked}};
}

Json to_json(const DisjointifyResult& d) {
  Json sets = Json::array();
  for (const auto& s : d.level_sets) sets.push_back(to_json(s));
  return {{"family", to_json(d.family)}, {"level_sets", sets},
          {"level_probability", numbers(d.level_probability)}, {"levy_bound", numbers(d.levy_bound)},
          {"tails", numbers(d.tails)}, {"empty", d.empty}, {"hypothesis_held", d.hypothesis_held},
          {"guaranteed", number(d.guaranteed)}};
}

Json to_json(const HjResult& r) {
  return {{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"delta0", number(r.delta0)}, {"ratio", number(r.ratio)}};
}

Json to_json(const LevyResult& r) { return {{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"holds", r.holds}}; }

Json to_json(const KhintchineResult& r) {
  return {{"mean_abs", number(r.mean_abs)}, {"lower", number(r.lower)}, {"upper", number(r.upper)},
          {"holds", r.holds}};
}

Json to_json(const SquareFunctionResult& r) {
  return {{"square", number(r.square)}, {"sum", number(r.sum)}, {"holds", r.holds}};
}

Json to_json(const counterexample::TxLower& t) {
  return {{"m", t.m}, {"k0", t.k0}, {"norm", number(t.norm)}, {"threshold", number(t.threshold)},
          {"passes", t.passes}, {"coords", numbers(t.coords)}, {"pairing", number(t.pairing)},
          {"level_sums", numbers(t.level_sums)}, {"level_drop_ok", t.level_drop_ok}};
}

Json to_json(const counterexample::AdmissibleMax& a) {
  return {{"value", number(a.value)}, {"closed_form", number(a.closed_form)}, {"a", numbers(a.a)},
          {"range_empty", a.range_empty}};
}

Json to_json(const counterexample::PerturbationGap& g) {
  return {{"tx_norm", number(g.tx_norm)}, {"sx_max", number(g.sx_max)}, {"gap", number(g.gap)},
          {"analytic_cap", number(g.analytic_cap)}, {"threshold", number(g.threshold)},
          {"range_empty", g.range_empty}, {"verdict", g.verdict}};
}

Json to_json(const counterexample::DiagGap& g) {
  return {{"ax_norm", number(g.ax_norm)}, {"sx_max", number(g.sx_max)}, {"gap", number(g.gap)},
          {"bound", number(g.bound)}, {"holds", g.holds}};
}

Json to_json(const counterexample::BinomReport& b) {
  return {{"size_lemma_holds", b.size_lemma_holds}, {"pairs_checked", b.pairs_checked},
          {"worst_size_ratio", number(b.worst_size_ratio)}, {"u_estimate", number(b.u_estimate)},
          {"even_trend_increasing", b.even_trend_increasing}, {"ratios_computed", b.ratios.size()}};
}

}  // namespace bdlab::json_io
