#include "bdlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "bdlab/counterexample.hpp"
#include "bdlab/dichotomy.hpp"
#include "bdlab/error.hpp"
#include "bdlab/factorization.hpp"
#include "bdlab/l1_geometry.hpp"
#include "bdlab/random_ops.hpp"

namespace bdlab::cli {

using json_io::Json;
using json_io::to_json;

namespace {

constexpr const char* kSchema = "bdlab/1";

struct Config {
  std::string op_path;
  std::string generator;
  std::string out_path;
  std::string replay_path;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultEnumerationCap;

  double eps = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t r = 1;
  double delta = 0.0;
  double lambda = 0.0;
  double level = 0.0;
  std::size_t m = 0;
  std::size_t k0 = 1;

  std::string family_path;
  std::string family_generator;
  std::string ys_path;
  std::string bound_path;
  std::string spec_path;
  std::string law = "rademacher:1";
  std::string backend = "exact";
  std::size_t samples = 10000;
  std::size_t family_size = 4;
  std::size_t iterations = 300;
  std::size_t restarts = 4;
  std::size_t count = 1000;
  std::vector<std::size_t> ms;
  std::vector<std::size_t> k0s;
  std::string csv_path;
  bool khintchine = false;
  bool levy = false;
  bool hj = false;
};

class Report {
 public:
  Json result = Json::object();

  void check(const std::string& name, bool passed, Json detail = Json::object()) {
    checks_.push_back({{"name", name}, {"passed", passed}, {"detail", std::move(detail)}});
    if (!passed) falsified_ = true;
  }
  void skip(const std::string& name, const std::string& reason) {
    checks_.push_back({{"name", name}, {"passed", nullptr}, {"detail", {{"skipped", reason}}}});
  }
  bool falsified() const noexcept { return falsified_; }
  const Json& checks() const noexcept { return checks_; }

 private:
  Json checks_ = Json::array();
  bool falsified_ = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

std::size_t to_size(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::usage, "expected a nonnegative integer for " + what + ", got '" + text + "'");
  }
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::usage, "expected a number for " + what + ", got '" + text + "'");
  }
}

SymmetricDistribution parse_law(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 2 && parts[0] == "rademacher") return SymmetricDistribution::rademacher(to_double(parts[1], "law"));
  if (parts.size() == 4 && parts[0] == "two-level") {
    return SymmetricDistribution::two_level(to_double(parts[1], "law"), to_double(parts[2], "law"),
                                            to_double(parts[3], "law"));
  }
  throw Error(ErrorKind::usage, "law must be rademacher:V or two-level:SMALL:LARGE:P");
}

// Column i = (1 - leak) e_i + leak/(N-1) sum_{j != i} e_j on counting N.
FiniteOperator near_identity(std::size_t n, double leak) {
  if (n < 2 || !(leak >= 0.0 && leak <= 1.0)) throw Error(ErrorKind::usage, "near-identity needs N >= 2, 0 <= leak <= 1");
  std::vector<L1Fun> columns;
  for (std::size_t i = 0; i < n; ++i) {
    L1Fun c(std::vector<double>(n, leak / static_cast<double>(n - 1)));
    c[i] = 1.0 - leak;
    columns.push_back(std::move(c));
  }
  return FiniteOperator(DomainShape::single_block(n), AtomSpace::counting(n), std::move(columns));
}

FiniteOperator generate(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw Error(ErrorKind::usage, "empty generator");
  const auto& kind = parts[0];
  if (kind == "identity" && parts.size() == 2) return FiniteOperator::identity(to_size(parts[1], "identity size"));
  if (kind == "zero" && parts.size() == 2) {
    const auto n = to_size(parts[1], "zero size");
    return FiniteOperator::zero(DomainShape::single_block(n), AtomSpace::counting(n));
  }
  if (kind == "rademacher" && parts.size() == 2) {
    return counterexample::build_rademacher_T(to_size(parts[1], "m")).materialize();
  }
  if (kind == "near-identity" && parts.size() == 3) {
    return near_identity(to_size(parts[1], "size"), to_double(parts[2], "leak"));
  }
  if (kind == "random" && parts.size() == 3) {
    SymmetricRandomMatrixSpec spec;
    spec.m = to_size(parts[1], "m");
    spec.entries.push_back(parse_law(text.substr(text.find(':', text.find(':') + 1) + 1)));
    return build_symmetric_matrix(spec);
  }
  if (kind == "random" && parts.size() > 3) {
    SymmetricRandomMatrixSpec spec;
    spec.m = to_size(parts[1], "m");
    spec.entries.push_back(parse_law(text.substr(text.find(':', text.find(':') + 1) + 1)));
    return build_symmetric_matrix(spec);
  }
  throw Error(ErrorKind::usage, "unknown generator '" + text +
                                    "' (identity:N, zero:N, rademacher:M, near-identity:N:LEAK, random:M:LAW)");
}

FiniteOperator load_operator(const Config& c) {
  if (!c.op_path.empty() && !c.generator.empty()) throw Error(ErrorKind::usage, "give either --op or --gen");
  if (!c.generator.empty()) return generate(c.generator);
  if (c.op_path.empty()) throw Error(ErrorKind::usage, "an operator is required (--op FILE or --gen SPEC)");
  const auto j = json_io::read_file(c.op_path);
  if (j.contains("generator")) return generate(j.at("generator").get<std::string>());
  return json_io::operator_from_json(j);
}

bool enumerable(const FiniteOperator& op, std::uint64_t cap) {
  return op.domain().extreme_point_count() <= cap;
}

// ---- subcommands ---------------------------------------------------------

void run_dichotomy(const Config& c, Report& report) {
  const auto op = load_operator(c);
  const auto escape = greedy_escape(op, c.eps, c.n, c.cap);
  report.result["escape"] = to_json(escape);
  if (escape.found_bound()) {
    report.check("lattice bound verified", escape.bound().passed,
                 {{"mass", escape.bound().mass}, {"worst_excess", escape.bound().worst_excess}});
    return;
  }
  const auto& family = escape.family();
  const auto shape = check_family(op.range(), family);
  report.check("family supports disjoint", shape.disjoint);
  report.check("family delta >= eps/2", family.delta >= c.eps / 2.0 - 1e-12,
               {{"delta", family.delta}, {"min_restricted", shape.min_restricted}});
  if (!enumerable(op, c.cap)) {
    report.skip("conflict bound", "extreme points exceed the enumeration cap");
    return;
  }
  const double eps_prime = c.eps / 4.0;
  const auto best = min_approx_lattice_bound(op, eps_prime, c.cap);
  const auto conflict = conflict_bound(op.range(), family, best.bound.values, eps_prime);
  report.result["min_bound_at_eps_over_4"] = to_json(best);
  report.result["conflict"] = to_json(conflict);
  report.check("conflict sum <= ||g||", conflict.certified <= best.mass + 1e-9,
               {{"certified", conflict.certified}, {"mass", best.mass}});
  report.check("||g|| >= n eps/4", best.mass >= static_cast<double>(c.n) * eps_prime - 1e-6,
               {{"mass", best.mass}, {"required", static_cast<double>(c.n) * eps_prime}});
}

struct FamilyInput {
  AtomSpace space;
  std::vector<L1Fun> fs;
  std::vector<AtomSet> sets;
};

FamilyInput load_family(const Config& c) {
  if (!c.family_generator.empty()) {
    const auto parts = split(c.family_generator, ':');
    if (parts.size() != 3 || parts[0] != "leaky") throw Error(ErrorKind::usage, "family generator must be leaky:N:LEAK");
    const auto n = to_size(parts[1], "family size");
    const double leak = to_double(parts[2], "leak");
    if (n < 2 || !(leak >= 0.0 && leak < 1.0)) throw Error(ErrorKind::usage, "leaky family needs N >= 2, 0 <= leak < 1");
    FamilyInput in{AtomSpace::uniform(n), {}, {}};
    const double scale = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      L1Fun f(std::vector<double>(n, scale * leak / static_cast<double>(n - 1)));
      f[i] = scale * (1.0 - leak);
      in.fs.push_back(std::move(f));
      in.sets.push_back(AtomSet{i});
    }
    return in;
  }
  if (c.family_path.empty()) throw Error(ErrorKind::usage, "select needs --family FILE or --gen-family leaky:N:LEAK");
  const auto j = json_io::read_file(c.family_path);
  FamilyInput in{json_io::atom_space_from_json(j.at("space")), {}, {}};
  for (const auto& f : j.at("functions")) in.fs.push_back(json_io::l1fun_from_json(f));
  for (const auto& s : j.at("sets")) in.sets.push_back(json_io::atom_set_from_json(s));
  return in;
}

void run_select(const Config& c, Report& report) {
  const auto in = load_family(c);
  const auto sel = rosenthal_select(in.space, in.fs, in.sets, c.delta, c.k, c.seed);
  report.result["selection"] = to_json(sel);
  report.check("selected lower constant >= delta/2", sel.cert.lower >= c.delta / 2.0 - 1e-6,
               {{"lower", sel.cert.lower}, {"required", c.delta / 2.0}});
}

void run_factorize(const Config& c, Report& report) {
  const auto op = load_operator(c);
  std::size_t total = 1;
  for (std::size_t i = 0; i < c.r; ++i) total *= c.k;
  std::vector<Coefficients> ys;
  if (!c.ys_path.empty()) {
    const auto j = json_io::read_file(c.ys_path);
    ys = j.get<std::vector<Coefficients>>();
  } else {
    if (total > op.num_columns()) throw Error(ErrorKind::usage, "default unit vectors need k^r <= domain dimension");
    for (std::size_t i = 0; i < total; ++i) {
      Coefficients y(op.num_columns(), 0.0);
      y[i] = 1.0;
      ys.push_back(std::move(y));
    }
  }
  const auto james = james_improve(op, ys, c.k, c.r, c.delta);
  report.result["james"] = to_json(james);
  const double lambda = c.lambda > 0.0 ? c.lambda : james.cert.ratio();
  if (!(lambda * lambda < 2.0)) {
    report.check("block distortion below sqrt 2", false, {{"lambda", lambda}});
    return;
  }
  const auto f = build_l1_factorization(op, james.blocks, lambda, c.delta);
  report.result["factorization"] = to_json(f);
  report.check("B T A = id", f.residual <= 1e-6, {{"residual", f.residual}});
  report.check("projection within the lambda bound", f.projection_norm <= dor_bound(lambda) + 1e-6,
               {{"projection", f.projection_norm}, {"bound", dor_bound(lambda)}});
  report.check("||A|| ||B|| within (2 lambda/delta) times the projection bound", f.product() <= f.product_bound + 1e-6,
               {{"product", f.product()}, {"bound", f.product_bound}});
}

void run_latticebound(const Config& c, Report& report) {
  const auto op = load_operator(c);
  if (!c.bound_path.empty()) {
    const auto bound = json_io::l1fun_from_json(json_io::read_file(c.bound_path));
    const auto cert = certify_lattice_bound(op, bound, c.eps, {.cap = c.cap, .seed = c.seed});
    report.result["certificate"] = to_json(cert);
    report.check("bound within eps", cert.passed, {{"worst_excess", cert.worst_excess}});
    return;
  }
  const auto cert = min_approx_lattice_bound(op, c.eps, c.cap);
  report.result["minimal_bound"] = to_json(cert);
  report.check("bound within eps", cert.passed, {{"worst_excess", cert.worst_excess}});
}

struct Pi2Bundle {
  Json json = Json::object();
  double lower = 0.0;
  double upper = 0.0;
};

Pi2Bundle pi2_all(const FiniteOperator& op, const Config& c) {
  Pi2Bundle b;
  const NormOptions norm{.mode = enumerable(op, c.cap) ? NormMode::exact
                                                      : (op.symmetric_entries() ? NormMode::symmetric : NormMode::search),
                         .seed = c.seed,
                         .cap = c.cap};
  const auto groth = pi2_groth(op, norm);
  b.json["groth"] = {{"value", groth.value}, {"lower_bound_based", groth.lower_bound_based}};
  b.upper = groth.value;
  if (op.symmetric_entries()) {
    const double sym = pi2_upper_sym(op);
    b.json["upper_sym"] = sym;
    b.upper = std::min(b.upper, sym);
  } else {
    b.json["upper_sym"] = nullptr;
  }
  const auto lower = pi2_lower_search(op, {.family_size = c.family_size,
                                           .iterations = c.iterations,
                                           .restarts = c.restarts,
                                           .seed = c.seed});
  b.json["lower"] = to_json(lower);
  b.lower = lower.value;
  return b;
}

void run_pi2(const Config& c, Report& report) {
  const auto op = load_operator(c);
  const auto b = pi2_all(op, c);
  report.result["pi2"] = b.json;
  // Upper estimates resting on a searched norm are not certified.
  if (!b.json["groth"]["lower_bound_based"].get<bool>() || op.symmetric_entries()) {
    report.check("lower <= upper", b.lower <= b.upper + 1e-6, {{"lower", b.lower}, {"upper", b.upper}});
  } else {
    report.skip("lower <= upper", "norm estimate is a search lower bound");
  }
}

void run_random(const Config& c, Report& report) {
  SymmetricRandomMatrixSpec spec;
  if (!c.spec_path.empty()) {
    spec = json_io::random_spec_from_json(json_io::read_file(c.spec_path));
  } else {
    if (c.m == 0) throw Error(ErrorKind::usage, "random needs --spec FILE or --m with --law");
    spec.m = c.m;
    spec.entries.push_back(parse_law(c.law));
    if (c.backend == "mc" || c.backend == "monte-carlo") {
      spec.exact = false;
      spec.monte_carlo = {c.samples, c.seed};
    } else if (c.backend != "exact") {
      throw Error(ErrorKind::usage, "backend must be exact or mc");
    }
  }
  const auto op = build_symmetric_matrix(spec);
  report.result["spec"] = to_json(spec);
  report.result["atoms"] = op.num_atoms();
  const auto split_case = case_split_test(op, c.eps, c.level, c.n, {.seed = c.seed});
  report.result["case_split"] = to_json(split_case);
  const auto parts = truncation_split(op, c.level, c.n);
  const NormOptions norm{.mode = enumerable(op, c.cap) ? NormMode::exact
                                                      : (op.symmetric_entries() ? NormMode::symmetric : NormMode::search),
                         .seed = c.seed,
                         .cap = c.cap};
  const auto remainder = operator_norm(parts.remainder, norm);
  report.result["remainder_norm"] = to_json(remainder);
  const auto b = pi2_all(parts.truncated, c);
  report.result["pi2_truncated"] = b.json;
  if (parts.truncated.symmetric_entries()) {
    report.check("pi2 sandwich on S2", b.lower <= b.upper + 1e-6, {{"lower", b.lower}, {"upper", b.upper}});
  }
}

void run_counterexample_verify(const Config& c, Report& report) {
  namespace ce = counterexample;
  const auto t = ce::build_rademacher_T(c.m);
  Json lemmas = Json::object();
  lemmas["norm_T"] = t.exact_norm();
  report.check("||T_m|| <= 1", t.exact_norm() <= 1.0 + 1e-9, {{"norm", t.exact_norm()}});
  if (c.m <= 4) {
    const double enumerated = operator_norm(t.materialize()).value;
    report.check("||T_m|| by enumeration", std::abs(enumerated - t.exact_norm()) <= 1e-12, {{"norm", enumerated}});
  }
  if (c.m % 2 != 0) throw Error(ErrorKind::usage, "counterexample verify needs an even m");

  if (c.m <= ce::kMaxBruteForceM) {
    std::size_t compared = 0;
    bool equal = true;
    for (std::size_t k = std::max<std::size_t>(c.k0, 1); k + c.k0 <= c.m; ++k) {
      for (std::size_t j = 1; j <= c.m; ++j) {
        equal = equal && ce::d_coefficient(c.m, k) == ce::d_coefficient_bruteforce(c.m, k, j);
        ++compared;
      }
    }
    report.check("d(m,k) closed form = enumeration", equal, {{"pairs", compared}});
  } else {
    report.skip("d(m,k) closed form = enumeration", "m above the enumeration cap");
  }

  const auto binom = ce::binom_checks(std::min<std::size_t>(c.m, 40), ce::kUEstimateRange);
  lemmas["binomial"] = to_json(binom);
  report.check("d(m,k) size lemma", binom.size_lemma_holds, {{"worst_ratio", binom.worst_size_ratio}});

  const auto tx = ce::tx_lower(c.m, c.k0);
  lemmas["tx"] = to_json(tx);
  report.check("||T x|| >= 1/(4K)", tx.passes, {{"norm", tx.norm}, {"threshold", tx.threshold}});
  report.check("level sums drop slowly", tx.level_drop_ok);

  // One-level S saturating the budget: a_k = C / (2 m binom(m-1, k-1)).
  bool extremal_ok = true;
  double extremal_cap = 0.0;
  for (std::size_t k = std::max<std::size_t>(c.k0, 1); k + c.k0 <= c.m; ++k) {
    double choose = 1.0;
    for (std::size_t i = 1; i < k; ++i) choose = choose * static_cast<double>(c.m - i) / static_cast<double>(i);
    ce::SymmetricSCoefficients s{c.m, std::vector<double>(c.m, 0.0)};
    s.a[k - 1] = c.level / (2.0 * static_cast<double>(c.m) * choose);
    const auto b = ce::symmetric_S_bounds(s, c.level, c.k0);
    extremal_cap = b.analytic_cap;
    extremal_ok = extremal_ok && b.admissible && b.sx_norm <= b.analytic_cap + 1e-12;
  }
  report.check("one-level S stays below 2UC/sqrt(k0)", extremal_ok, {{"cap", extremal_cap}});

  const auto best = ce::max_admissible_sx(c.m, c.level, c.k0);
  lemmas["admissible_max"] = to_json(best);
  report.check("admissible LP = closed form", std::abs(best.value - best.closed_form) <= 1e-9 * std::max(1.0, best.closed_form),
               {{"lp", best.value}, {"closed_form", best.closed_form}});
  try {
    const auto gap = ce::perturbation_gap(c.m, c.level, c.eps, c.k0);
    lemmas["perturbation_gap"] = to_json(gap);
    report.check("admissible S stays eps away from T", gap.verdict,
                 {{"gap", gap.gap}, {"eps", c.eps}, {"range_empty", gap.range_empty}});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::regime) throw;
    lemmas["perturbation_gap"] = {{"regime_error", e.what()}};
    report.skip("admissible S stays eps away from T", e.what());
  }
  const auto diag = ce::diag_gap(c.m, c.level);
  lemmas["diag_gap"] = to_json(diag);
  report.check("diagonal gap >= 1 - 3C/sqrt(m)", diag.holds, {{"gap", diag.gap}, {"bound", diag.bound}});
  report.result["lemmas"] = lemmas;
}

void run_counterexample_sweep(const Config& c, Report& report, std::ostream& out) {
  const auto rows = counterexample::sweep(c.ms, c.k0s, c.level, c.eps);
  Json table = Json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "m,k0,tx_norm,cap,sx_max,gap,regime_ok\n";
  for (const auto& r : rows) {
    table.push_back({{"m", r.m}, {"k0", r.k0}, {"tx_norm", r.tx_norm}, {"cap", r.cap}, {"sx_max", r.sx_max},
                     {"gap", r.gap}, {"regime_ok", r.regime_ok}});
    csv << r.m << ',' << r.k0 << ',' << r.tx_norm << ',' << r.cap << ',' << r.sx_max << ',' << r.gap << ','
        << (r.regime_ok ? 1 : 0) << '\n';
  }
  report.result["rows"] = table;
  if (!c.csv_path.empty()) {
    std::ofstream file(c.csv_path);
    if (!file) throw Error(ErrorKind::usage, "cannot write " + c.csv_path);
    file << csv.str();
  } else if (c.out_path.empty()) {
    out << csv.str();
  }
}

void run_inequalities(const Config& c, Report& report) {
  if (!c.khintchine && !c.levy && !c.hj) throw Error(ErrorKind::usage, "choose --khintchine, --levy and/or --hj");
  std::mt19937_64 rng(c.seed);
  if (c.khintchine) {
    if (c.m == 0 || c.m > kMaxKhintchineLength) throw Error(ErrorKind::usage, "--m must lie in 1..20");
    std::size_t violations = 0;
    std::size_t checked = 0;
    for (std::size_t len = 1; len <= c.m; ++len) {
      violations += khintchine_square_check(std::vector<double>(len, 1.0)).holds ? 0 : 1;
      ++checked;
    }
    std::uniform_int_distribution<std::size_t> length(1, c.m);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (std::size_t t = 0; t < c.count; ++t) {
      std::vector<double> a(length(rng));
      for (auto& v : a) v = coeff(rng);
      violations += khintchine_square_check(a).holds ? 0 : 1;
      ++checked;
    }
    const auto pair = khintchine_square_check(std::vector<double>{1.0, 1.0});
    report.result["khintchine"] = {{"checked", checked}, {"violations", violations}, {"pair", to_json(pair)}};
    report.check("Khintchine bounds with K = sqrt 2", violations == 0, {{"violations", violations}});
    report.check("a = (1,1) attains the lower constant", pair.mean_abs == 1.0 && std::abs(pair.lower - 1.0) <= 1e-15);
  }
  auto random_laws = [&](std::size_t max_count) {
    std::uniform_int_distribution<std::size_t> count(1, max_count);
    std::uniform_real_distribution<double> small(0.05, 1.0);
    std::uniform_real_distribution<double> ratio(1.1, 6.0);
    std::uniform_real_distribution<double> prob(0.02, 0.9);
    std::vector<SymmetricDistribution> laws;
    const std::size_t size = count(rng);
    for (std::size_t i = 0; i < size; ++i) {
      const double s = small(rng);
      laws.push_back(SymmetricDistribution::two_level(s, s * ratio(rng), prob(rng)));
    }
    return laws;
  };
  if (c.levy) {
    std::size_t violations = 0;
    std::uniform_real_distribution<double> level(0.0, 4.0);
    for (std::size_t t = 0; t < c.count; ++t) {
      const auto laws = random_laws(5);
      violations += levy_check(laws, level(rng)).holds ? 0 : 1;
    }
    report.result["levy"] = {{"checked", c.count}, {"violations", violations}};
    report.check("Levy maximal inequality", violations == 0, {{"violations", violations}});
  }
  if (c.hj) {
    double worst = 0.0;
    std::size_t square_violations = 0;
    for (std::size_t t = 0; t < c.count; ++t) {
      const auto laws = random_laws(5);
      worst = std::max(worst, hj_check(laws, 1, 1).ratio);
      const auto [space, fs] = product_space(laws);
      square_violations += square_function_check(space, fs).holds ? 0 : 1;
    }
    report.result["hoffmann_jorgensen"] = {{"checked", c.count}, {"max_ratio", worst}};
    report.result["square_function"] = {{"checked", c.count}, {"violations", square_violations}};
    report.check("square function bounds", square_violations == 0, {{"violations", square_violations}});
  }
}

int code_for(const Error& e) {
  return e.kind() == ErrorKind::internal_invariant ? kFalsified : kUsage;
}

Json error_report(const std::string& command, const std::vector<std::string>& args, const Error& e) {
  return {{"schema", kSchema},
          {"command", command},
          {"config", {{"args", args}}},
          {"status", "error"},
          {"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}};
}

Json replay(const Config& c, int& exit_code, std::ostream& err) {
  const auto original = json_io::read_file(c.replay_path);
  if (!original.contains("config") || !original["config"].contains("args")) {
    throw Error(ErrorKind::usage, "report has no recorded arguments");
  }
  auto args = original["config"]["args"].get<std::vector<std::string>>();
  int code = 0;
  std::ostringstream sink;
  auto again = execute(args, code, sink, err);
  // Round-trip through text so both sides went through the same encoding.
  again = json_io::parse(again.dump());
  Json differences = Json::array();
  for (const char* key : {"result", "checks", "status"}) {
    if (original.value(key, Json()) != again.value(key, Json())) differences.push_back(key);
  }
  exit_code = differences.empty() ? kOk : kFalsified;
  return {{"schema", kSchema},
          {"command", "replay"},
          {"replayed", original.value("command", "")},
          {"config", {{"args", std::vector<std::string>{"--replay", c.replay_path}}}},
          {"identical", differences.empty()},
          {"differences", differences},
          {"status", differences.empty() ? "ok" : "falsified"}};
}

}  // namespace

Json execute(const std::vector<std::string>& args, int& exit_code, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Finite-dimensional experiments on operators into L1."};
  app.set_help_all_flag("--help-all");
  app.add_option("--replay", c.replay_path, "Re-run a report and compare its numbers");
  app.require_subcommand(0, 1);

  auto common = [&c](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Seed recorded in the report");
    sub->add_option("--out", c.out_path, "Write the JSON report here instead of stdout");
  };
  auto op_source = [&c](CLI::App* sub) {
    sub->add_option("--op", c.op_path, "Operator JSON file");
    sub->add_option("--gen", c.generator, "identity:N | zero:N | rademacher:M | near-identity:N:LEAK | random:M:LAW");
    sub->add_option("--cap", c.cap, "Extreme-point enumeration cap");
  };

  auto* dichotomy = app.add_subcommand("dichotomy", "Greedy escape and the conflict bound");
  common(dichotomy);
  op_source(dichotomy);
  dichotomy->add_option("--eps", c.eps, "Excess tolerance")->required();
  dichotomy->add_option("--n", c.n, "Family size")->required();

  auto* select = app.add_subcommand("select", "Random submatrix selection of almost disjoint functions");
  common(select);
  select->add_option("--family", c.family_path, "JSON with space, functions and sets");
  select->add_option("--gen-family", c.family_generator, "leaky:N:LEAK");
  select->add_option("--delta", c.delta, "Restricted norm lower bound")->required();
  select->add_option("--k", c.k, "Number of functions to select")->required();

  auto* factorize = app.add_subcommand("factorize", "James blocks and the l1^k factorization");
  common(factorize);
  op_source(factorize);
  factorize->add_option("--k", c.k, "Block count")->required();
  factorize->add_option("--r", c.r, "Levels, K = k^r");
  factorize->add_option("--delta", c.delta, "Lower bound on the family constant")->required();
  factorize->add_option("--lambda", c.lambda, "Declared distortion (default: measured)");
  factorize->add_option("--ys", c.ys_path, "JSON array of K domain coefficient vectors");

  auto* lattice = app.add_subcommand("latticebound", "Minimal or verified approximate lattice bounds");
  common(lattice);
  op_source(lattice);
  lattice->add_option("--eps", c.eps, "Excess tolerance")->required();
  lattice->add_option("--verify", c.bound_path, "Verify this bound instead of minimizing");

  auto* pi2 = app.add_subcommand("pi2", "2-summing norm estimates");
  common(pi2);
  op_source(pi2);
  pi2->add_option("--family-size", c.family_size);
  pi2->add_option("--iterations", c.iterations);
  pi2->add_option("--restarts", c.restarts);

  auto* random = app.add_subcommand("random", "Symmetric random matrices: case split, truncation, pi2 budget");
  common(random);
  random->add_option("--spec", c.spec_path, "Random matrix spec JSON");
  random->add_option("--m", c.m, "Matrix size");
  random->add_option("--law", c.law, "rademacher:V | two-level:SMALL:LARGE:P");
  random->add_option("--backend", c.backend, "exact | mc");
  random->add_option("--samples", c.samples, "Monte Carlo samples");
  random->add_option("--eps", c.eps, "Tail threshold")->required();
  random->add_option("--C", c.level, "Truncation level")->required();
  random->add_option("--n", c.n, "Kept columns / family size")->required();
  random->add_option("--cap", c.cap, "Extreme-point enumeration cap");
  random->add_option("--family-size", c.family_size);
  random->add_option("--iterations", c.iterations);
  random->add_option("--restarts", c.restarts);

  auto* counter = app.add_subcommand("counterexample", "Rademacher operators that resist perturbation");
  counter->require_subcommand(1);
  auto* verify = counter->add_subcommand("verify", "Lemma-by-lemma report at one (m, k0)");
  common(verify);
  verify->add_option("--m", c.m, "Even dimension")->required();
  verify->add_option("--k0", c.k0, "Level cut-off");
  c.level = 0.1;
  c.eps = 0.05;
  verify->add_option("--C", c.level, "Lattice bound constant");
  verify->add_option("--eps", c.eps, "Perturbation size");
  auto* sweep = counter->add_subcommand("sweep", "CSV of (m, k0, ||Tx||, cap, gap)");
  common(sweep);
  sweep->add_option("--ms", c.ms, "Even dimensions")->delimiter(',')->required();
  sweep->add_option("--k0s", c.k0s, "Level cut-offs")->delimiter(',')->required();
  sweep->add_option("--C", c.level, "Lattice bound constant");
  sweep->add_option("--eps", c.eps, "Perturbation size");
  sweep->add_option("--csv", c.csv_path, "CSV output path");

  auto* inequalities = app.add_subcommand("inequalities", "Khintchine, Levy and Hoffmann-Jorgensen batteries");
  common(inequalities);
  inequalities->add_flag("--khintchine", c.khintchine);
  inequalities->add_flag("--levy", c.levy);
  inequalities->add_flag("--hj", c.hj);
  inequalities->add_option("--m", c.m, "Longest coefficient vector");
  inequalities->add_option("--count", c.count, "Random instances per battery");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    exit_code = app.exit(e, out, err);
    return nullptr;
  } catch (const CLI::CallForAllHelp& e) {
    exit_code = app.exit(e, out, err);
    return nullptr;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    exit_code = kUsage;
    Error wrapped(ErrorKind::usage, e.what());
    return error_report("", args, wrapped);
  }

  std::string command;
  try {
    if (!c.replay_path.empty()) {
      if (!app.get_subcommands().empty()) throw Error(ErrorKind::usage, "--replay takes no subcommand");
      return replay(c, exit_code, err);
    }
    Report report;
    if (dichotomy->parsed()) {
      command = "dichotomy";
      run_dichotomy(c, report);
    } else if (select->parsed()) {
      command = "select";
      run_select(c, report);
    } else if (factorize->parsed()) {
      command = "factorize";
      run_factorize(c, report);
    } else if (lattice->parsed()) {
      command = "latticebound";
      run_latticebound(c, report);
    } else if (pi2->parsed()) {
      command = "pi2";
      run_pi2(c, report);
    } else if (random->parsed()) {
      command = "random";
      run_random(c, report);
    } else if (verify->parsed()) {
      command = "counterexample verify";
      run_counterexample_verify(c, report);
    } else if (sweep->parsed()) {
      command = "counterexample sweep";
      run_counterexample_sweep(c, report, out);
    } else if (inequalities->parsed()) {
      command = "inequalities";
      run_inequalities(c, report);
    } else {
      throw Error(ErrorKind::usage, "no command given; see --help");
    }
    exit_code = report.falsified() ? kFalsified : kOk;
    return {{"schema", kSchema},
            {"command", command},
            {"config", {{"args", args}, {"seed", c.seed}}},
            {"result", report.result},
            {"checks", report.checks()},
            {"status", report.falsified() ? "falsified" : "ok"}};
  } catch (const Error& e) {
    err << e.what() << '\n';
    exit_code = code_for(e);
    return error_report(command, args, e);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  int code = kOk;
  const auto report = execute(args, code, out, err);
  if (report.is_null()) return code;
  std::string out_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") out_path = args[i + 1];
  }
  const bool is_sweep_csv = report.value("command", "") == "counterexample sweep" && out_path.empty() &&
                            std::find(args.begin(), args.end(), "--csv") == args.end();
  try {
    if (!out_path.empty()) {
      json_io::write_file(out_path, report);
    } else if (!is_sweep_csv) {
      out << report.dump(2) << '\n';
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  return code;
}

}  // namespace bdlab::cli
