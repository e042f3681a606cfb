#include "cltb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cltb/error.hpp"
#include "cltb/text.hpp"

namespace cltb {

using nlohmann::json;

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScanAxis parse_scan_axis(std::string_view text) {
  if (text == "n") return ScanAxis::n;
  if (text == "k") return ScanAxis::k;
  fail(ErrorCode::config, "scan axis must be n or k, got '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::config, where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) ==
        keys.end())
      bad(where, "unknown key '" + key + "'");
  }
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) bad(where, std::string("missing '") + key + "'");
  return obj.at(key);
}

double get_double(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number()) bad(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_u64(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    bad(where, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& v, const std::string& where) {
  if (!v.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(where, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ScalarLaw parse_law(const json& spec, const std::string& where) {
  const std::string kind = get_string(need(spec, "kind", where), where + ".kind");
  if (kind == "rademacher") {
    only_keys(spec, where, {"kind"});
    return ScalarLaw::rademacher();
  }
  if (kind == "uniform") {
    only_keys(spec, where, {"kind"});
    return ScalarLaw::uniform();
  }
  if (kind == "exponential") {
    only_keys(spec, where, {"kind"});
    return ScalarLaw::centered_exponential();
  }
  if (kind == "two_point") {
    only_keys(spec, where, {"kind", "p"});
    return ScalarLaw::two_point(get_double(spec, "p", where));
  }
  if (kind == "discrete") {
    only_keys(spec, where, {"kind", "values", "probs", "abs3", "fourth"});
    std::optional<double> abs3, fourth;
    if (spec.contains("abs3")) abs3 = get_double(spec, "abs3", where);
    if (spec.contains("fourth")) fourth = get_double(spec, "fourth", where);
    return ScalarLaw::discrete(get_doubles(need(spec, "values", where), where + ".values"),
                               get_doubles(need(spec, "probs", where), where + ".probs"), abs3,
                               fourth);
  }
  bad(where, "unknown law kind '" + kind +
                 "' (rademacher, uniform, two_point, exponential, discrete)");
}

bool is_law_kind(const std::string& kind) {
  return kind == "rademacher" || kind == "uniform" || kind == "exponential" ||
         kind == "two_point" || kind == "discrete";
}

// Whether the model pins its own dimension (so n cannot be scanned).
std::optional<std::size_t> model_fixed_n(const json& spec, const std::string& base_dir) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "independent" && spec.contains("coordinates")) return spec.at("coordinates").size();
  if (kind == "exchangeable" && spec.contains("population")) return spec.at("population").size();
  if (kind == "exchangeable" && spec.contains("population_file")) {
    const std::filesystem::path p =
        std::filesystem::path(base_dir) / spec.at("population_file").get<std::string>();
    return read_population_file(p.string()).size();
  }
  return std::nullopt;
}

Model parse_model(const json& spec, std::size_t n, const std::string& base_dir,
                  std::vector<std::string>* warnings) {
  const std::string where = "model";
  const std::string kind = get_string(need(spec, "kind", where), "model.kind");
  if (is_law_kind(kind)) return IIDModel{parse_law(spec, where), n};
  if (kind == "independent") {
    only_keys(spec, where, {"kind", "coordinates", "pattern"});
    if (spec.contains("coordinates") == spec.contains("pattern"))
      bad(where, "independent needs exactly one of 'coordinates' or 'pattern'");
    const bool explicit_list = spec.contains("coordinates");
    const json& list = spec.at(explicit_list ? "coordinates" : "pattern");
    if (!list.is_array() || list.empty()) bad(where, "coordinate list must be a non-empty array");
    std::vector<ScalarLaw> proto;
    for (std::size_t i = 0; i < list.size(); ++i)
      proto.push_back(parse_law(list[i], where + "[" + std::to_string(i) + "]"));
    if (explicit_list && proto.size() != n)
      bad(where, "has " + std::to_string(proto.size()) + " coordinates but directions have n=" +
                     std::to_string(n));
    IndependentModel m;
    for (std::size_t r = 0; r < n; ++r) m.laws.push_back(proto[r % proto.size()]);
    return m;
  }
  if (kind == "exchangeable") {
    only_keys(spec, where, {"kind", "population", "population_file", "family"});
    const int given = int(spec.contains("population")) + int(spec.contains("population_file")) +
                      int(spec.contains("family"));
    if (given != 1)
      bad(where, "exchangeable needs exactly one of 'population', 'population_file', 'family'");
    std::vector<double> raw;
    if (spec.contains("family")) {
      const std::string family = get_string(spec.at("family"), "model.family");
      if (family == "skewed") {
        if (n % 4 != 0) bad(where, "the skewed family needs n divisible by 4");
        return ExchangeableModel(skewed_population(n));
      }
      if (family == "linear") return ExchangeableModel(linear_population(n));
      bad(where, "unknown family '" + family + "' (skewed, linear)");
    }
    if (spec.contains("population")) {
      raw = get_doubles(spec.at("population"), "model.population");
    } else {
      const std::filesystem::path p =
          std::filesystem::path(base_dir) /
          get_string(spec.at("population_file"), "model.population_file");
      raw = read_population_file(p.string());
    }
    if (raw.size() != n)
      bad(where, "population has " + std::to_string(raw.size()) +
                     " entries but directions have n=" + std::to_string(n));
    return ExchangeableModel::standardized(std::move(raw), warnings);
  }
  bad(where, "unknown model kind '" + kind + "'");
}

DirectionSet parse_directions_spec(const json& spec, std::size_t n, std::size_t k,
                                   const std::string& base_dir) {
  const std::string where = "directions";
  const std::string kind = get_string(need(spec, "kind", where), "directions.kind");
  const bool centered = spec.value("centered", false);
  const std::uint64_t seed = spec.contains("seed") ? get_u64(spec.at("seed"), "directions.seed") : 1;
  if (kind == "hypercube") return hypercube_directions(n, k, centered);
  if (kind == "random") return random_orthonormal(n, k, seed, centered);
  if (kind == "random_unit") return random_unit(n, k, seed, centered);
  if (kind == "file") {
    const std::filesystem::path p =
        std::filesystem::path(base_dir) / get_string(need(spec, "path", where), "directions.path");
    std::ifstream in(p);
    if (!in) fail(ErrorCode::io, "cannot open directions file '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    DirectionSet ds = parse_directions(ss.str());
    if (centered && !ds.centered()) bad(where, "file directions are not centered");
    return ds;
  }
  bad(where, "unknown kind '" + kind + "' (hypercube, random, random_unit, file)");
}

TestFunction parse_test_function(const json& spec, std::size_t k) {
  const std::string where = "test_function";
  const std::string kind = get_string(need(spec, "kind", where), "test_function.kind");
  std::optional<TestFunction> g;
  if (kind == "cosine") {
    only_keys(spec, where, {"kind", "a", "norm", "phase", "scale", "offset"});
    if (spec.contains("a") && spec.contains("norm")) bad(where, "give either 'a' or 'norm'");
    std::vector<double> a;
    if (spec.contains("a")) {
      a = get_doubles(spec.at("a"), "test_function.a");
      if (a.size() != k)
        bad(where, "'a' has length " + std::to_string(a.size()) + " but k=" + std::to_string(k));
    } else {
      const double norm = spec.contains("norm") ? get_double(spec, "norm", where) : 1.0;
      a.assign(k, norm / std::sqrt(static_cast<double>(k)));
    }
    g = TestFunction::cosine(std::move(a), spec.contains("phase") ? get_double(spec, "phase", where) : 0.0);
  } else if (kind == "bump" || kind == "product_bump") {
    only_keys(spec, where, {"kind", "radius", "scale", "offset"});
    const double r = get_double(spec, "radius", where);
    g = kind == "bump" ? TestFunction::bump(r, k) : TestFunction::product_bump(r, k);
  } else {
    bad(where, "unknown kind '" + kind + "' (cosine, bump, product_bump)");
  }
  if (spec.contains("scale") || spec.contains("offset"))
    g = g->affine(spec.contains("scale") ? get_double(spec, "scale", where) : 1.0,
                 spec.contains("offset") ? get_double(spec, "offset", where) : 0.0);
  return *g;
}

std::vector<std::string> theorem_ids(const json& v) {
  std::vector<std::string> ids;
  if (v.is_string()) {
    for (auto part : split(v.get<std::string>(), ',')) ids.emplace_back(trim(part));
  } else if (v.is_array()) {
    for (const auto& e : v) ids.push_back(get_string(e, "theorem"));
  } else {
    bad("theorem", "expected a string or an array of strings");
  }
  if (ids.empty()) bad("theorem", "no theorem selected");
  return ids;
}

Theorem auto_theorem(const DirectionSet& ds, const Model& model) {
  const bool orth = ds.kind() != DirectionKind::linearly_independent;
  if (is_exchangeable(model)) return orth ? Theorem::t4 : Theorem::t5;
  return orth ? Theorem::t2 : Theorem::t3;
}

std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

}  // namespace

std::string CheckReport::to_text() const {
  std::string out = std::string(kSchemaLine) + "\ncheck,value,tolerance,pass\n";
  for (const auto& l : lines)
    out += l.name + "," + fmt17(l.value) + "," + fmt17(l.tolerance) + "," +
           (l.pass ? "1" : "0") + "\n";
  return out;
}

Experiment Experiment::from_json(std::string_view text, const std::string& base_dir,
                                 const Overrides& overrides) {
  json cfg;
  try {
    cfg = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(cfg, "config",
            {"model", "directions", "test_function", "theorem", "constants", "samples", "seed",
             "threads", "gaussian", "pair_samples", "output"});
  if (overrides.seed) cfg["seed"] = *overrides.seed;
  if (overrides.samples) cfg["samples"] = *overrides.samples;
  if (overrides.theorem) cfg["theorem"] = *overrides.theorem;
  if (overrides.threads) cfg["threads"] = *overrides.threads;
  if (overrides.output) cfg["output"] = *overrides.output;

  Experiment ex;
  ex.base_dir_ = base_dir;
  try {
    if (cfg.contains("samples")) ex.samples_ = get_u64(cfg.at("samples"), "samples");
    if (ex.samples_ < 1000) bad("samples", "must be at least 1000");
    if (cfg.contains("seed")) ex.seed_ = get_u64(cfg.at("seed"), "seed");
    if (cfg.contains("threads")) ex.threads_ = static_cast<unsigned>(get_u64(cfg.at("threads"), "threads"));
    if (ex.threads_ == 0) ex.threads_ = std::max(1u, std::thread::hardware_concurrency());
    if (cfg.contains("pair_samples"))
      ex.pair_samples_ = get_u64(cfg.at("pair_samples"), "pair_samples");
    if (ex.pair_samples_ < 100) bad("pair_samples", "must be at least 100");
    if (cfg.contains("output")) ex.output_ = get_string(cfg.at("output"), "output");
    if (cfg.contains("constants")) {
      const json& c = cfg.at("constants");
      only_keys(c, "constants", {"a", "b", "c"});
      if (c.contains("a")) ex.constants_.a = get_double(c, "a", "constants");
      if (c.contains("b")) ex.constants_.b = get_double(c, "b", "constants");
      if (c.contains("c")) ex.constants_.c = get_double(c, "c", "constants");
      if (ex.constants_.a < 0 || ex.constants_.b < 0 || ex.constants_.c < 0)
        bad("constants", "must be non-negative");
    }
    if (cfg.contains("gaussian")) {
      const json& gs = cfg.at("gaussian");
      only_keys(gs, "gaussian", {"method", "nodes", "samples", "seed"});
      if (gs.contains("method")) {
        const std::string m = get_string(gs.at("method"), "gaussian.method");
        ex.gaussian_auto_ = m == "auto";
        if (m == "closed_form") ex.gaussian_method_ = ExpectationMethod::closed_form;
        else if (m == "quadrature") ex.gaussian_method_ = ExpectationMethod::quadrature;
        else if (m == "monte_carlo") ex.gaussian_method_ = ExpectationMethod::monte_carlo;
        else if (m != "auto")
          bad("gaussian.method", "unknown method '" + m + "' (auto, closed_form, quadrature, monte_carlo)");
      }
      if (gs.contains("nodes")) ex.gaussian_budget_.nodes = get_u64(gs.at("nodes"), "gaussian.nodes");
      if (gs.contains("samples"))
        ex.gaussian_budget_.samples = get_u64(gs.at("samples"), "gaussian.samples");
      if (gs.contains("seed")) ex.gaussian_budget_.seed = get_u64(gs.at("seed"), "gaussian.seed");
    }
    const json& dirs = need(cfg, "directions", "config");
    only_keys(dirs, "directions", {"kind", "n", "k", "seed", "centered", "path"});
    need(cfg, "model", "config");
    need(cfg, "test_function", "config");
    if (dirs.contains("centered") && !dirs.at("centered").is_boolean())
      bad("directions.centered", "must be true or false");
    if (cfg.contains("theorem")) theorem_ids(cfg.at("theorem"));
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("config: ") + e.what());
  }

  json digest_view = cfg;
  digest_view.erase("threads");
  digest_view.erase("output");
  ex.canonical_ = digest_view.dump();
  ex.digest_ = fnv1a_hex(ex.canonical_);
  ex.config_ = cfg.dump();

  const json& dirs = cfg.at("directions");
  std::size_t n = 0, k = 0;
  if (dirs.at("kind") == "file") {
    if (dirs.contains("n") || dirs.contains("k"))
      bad("directions", "n and k come from the file for kind 'file'");
  } else {
    n = get_u64(need(dirs, "n", "directions"), "directions.n");
    k = get_u64(need(dirs, "k", "directions"), "directions.k");
  }
  ex.cells_.push_back(ex.build_cell(n, k, &ex.warnings_));
  return ex;
}

Cell Experiment::build_cell(std::size_t n, std::size_t k,
                             std::vector<std::string>* warnings) const {
  const json cfg = json::parse(config_);
  try {
    const json& dirs = cfg.at("directions");
    std::optional<DirectionSet> ds;
    try {
      ds = parse_directions_spec(dirs, n, k, base_dir_);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config || e.code() == ErrorCode::io) throw;
      fail(e.code(), std::string("directions: ") + e.what());
    }
    Model model = parse_model(cfg.at("model"), ds->n(), base_dir_, warnings);
    TestFunction g = parse_test_function(cfg.at("test_function"), ds->k());
    std::vector<Theorem> theorems;
    if (cfg.contains("theorem")) {
      for (const auto& id : theorem_ids(cfg.at("theorem")))
        theorems.push_back(id == "auto" ? auto_theorem(*ds, model) : parse_theorem(id));
    } else {
      theorems.push_back(auto_theorem(*ds, model));
    }
    for (Theorem t : theorems) {
      check_theorem_applicable(t, *ds, model);
      if (t == Theorem::t1 || t == Theorem::t2 || t == Theorem::t3 || t == Theorem::t4 ||
          t == Theorem::t5)
        (void)model_moments(model);
    }
    return Cell{std::move(model), std::move(*ds), std::move(g), std::move(theorems)};
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("config: ") + e.what());
  }
}

void Experiment::set_shrink(double factor) {
  require(std::isfinite(factor) && factor > 0.0, ErrorCode::config,
          "shrink factor must be positive");
  shrink_ = factor;
}

void Experiment::set_lambda_scale(double scale) {
  require(std::isfinite(scale) && scale > 0.0, ErrorCode::config,
          "lambda scale must be positive");
  lambda_scale_ = scale;
}

std::string bound_csv(const std::vector<BoundReport>& rows) {
  std::string out = std::string(kSchemaLine) + "\n" + bound_csv_header() + "\n";
  for (const auto& r : rows) out += to_csv_row(r) + "\n";
  return out;
}

std::vector<BoundReport> Experiment::bounds() const {
  const Cell& c = cell();
  TheoremInputs inputs{constants_, pair_samples_, seed_ ^ 0x9a1fd5c3e1b07e55ull, threads_};
  std::vector<BoundReport> out;
  for (Theorem t : c.theorems) out.push_back(evaluate_theorem(t, c.directions, c.model, c.g, inputs));
  return out;
}

std::string Experiment::bound_csv() const { return cltb::bound_csv(bounds()); }

VerificationReport Experiment::verify_one(const Cell& c, Theorem theorem) const {
  TheoremInputs inputs{constants_, pair_samples_, seed_ ^ 0x9a1fd5c3e1b07e55ull, threads_};
  VerificationReport r;
  r.bound = evaluate_theorem(theorem, c.directions, c.model, c.g, inputs);
  DiscrepancyOptions opts;
  opts.threads = threads_;
  opts.gaussian_budget = gaussian_budget_;
  if (gaussian_auto_) {
    opts.gaussian_method = c.g.kind() == TestFunctionKind::cosine ? ExpectationMethod::closed_form
                           : c.g.k() <= 4                          ? ExpectationMethod::quadrature
                                                                   : ExpectationMethod::monte_carlo;
  } else {
    opts.gaussian_method = gaussian_method_;
  }
  r.estimate = estimate_discrepancy(c.directions, c.model, c.g, comparison_covariance(c.directions),
                                    samples_, seed_, opts);
  r.bound_total = r.bound.total * shrink_;
  r.pass = verification_passes(r.estimate.discrepancy, r.bound_total, r.estimate.ci_halfwidth);
  r.digest = digest_;
  return r;
}

std::vector<VerificationReport> Experiment::verify() const {
  std::vector<VerificationReport> out;
  for (Theorem t : cell().theorems) out.push_back(verify_one(cell(), t));
  return out;
}

std::string Experiment::verify_csv(const std::vector<VerificationReport>& rows) const {
  std::string out = std::string(kSchemaLine) + "\n" + verification_csv_header() + "\n";
  for (const auto& r : rows) out += to_csv_row(r) + "\n";
  return out;
}

ScanResult Experiment::scan(ScanAxis axis, const std::vector<std::size_t>& values) const {
  require(!values.empty(), ErrorCode::config, "scan needs at least one axis value");
  const json cfg = json::parse(config_);
  if (cfg.at("directions").at("kind") == "file")
    fail(ErrorCode::config, "file directions cannot be scanned");
  if (axis == ScanAxis::n) {
    if (auto fixed = model_fixed_n(cfg.at("model"), base_dir_))
      fail(ErrorCode::config, "the model fixes n=" + std::to_string(*fixed) + "; it cannot be scanned");
  }
  // Build and validate every point before running anything.
  std::vector<Cell> cells;
  for (std::size_t v : values) {
    const std::size_t n = axis == ScanAxis::n ? v : cell().directions.n();
    const std::size_t k = axis == ScanAxis::k ? v : cell().directions.k();
    try {
      cells.push_back(build_cell(n, k, nullptr));
    } catch (const Error& e) {
      fail(ErrorCode::config, std::string("scan value ") + std::to_string(v) + ": " + e.what());
    }
  }
  ScanResult out;
  out.csv = std::string(kSchemaLine) + "\n" + verification_csv_header() +
            ",lambda,term_fourth,term_third,term_mixed,total\n";
  for (const Cell& c : cells)
    for (Theorem t : c.theorems) {
      VerificationReport r = verify_one(c, t);
      out.pass = out.pass && r.pass;
      out.csv += to_csv_row(r) + "," + fmt17(r.bound.lambda) + "," + fmt17(r.bound.term_fourth) +
                 "," + fmt17(r.bound.term_third) + "," + fmt17(r.bound.term_mixed) + "," +
                 fmt17(r.bound.total) + "\n";
      out.rows.push_back(std::move(r));
    }
  return out;
}

CheckReport Experiment::check() const {
  CheckReport report;
  auto add = [&](std::string name, double value, double tol) {
    const bool ok = value <= tol;
    report.lines.push_back({std::move(name), value, tol, ok});
    report.pass = report.pass && ok;
  };
  const Cell& c = cell();
  const PairKind kind = natural_pair_kind(c.model);
  const std::uint64_t seed = seed_ ^ 0x3c6ef372fe94f82bull;

  add(std::string("linearity_") + to_string(kind),
      conditional_linearity_check(c.directions, c.model, kind, 200, seed, lambda_scale_), 1e-10);

  // Closed-form E_ij against enumeration; on the config itself when it is
  // small, otherwise on a small stand-in of the same family.
  {
    const std::size_t limit = kind == PairKind::resampling ? 8 : 6;
    std::optional<DirectionSet> ds;
    std::optional<Model> model;
    if (c.directions.n() <= limit) {
      ds = c.directions;
      model = c.model;
    } else {
      const std::size_t k = std::min<std::size_t>(c.directions.k(), 3);
      if (kind == PairKind::resampling) {
        ds = random_orthonormal(limit, k, seed, false);
        model = IIDModel{coordinate_law(c.model, 0), limit};
      } else {
        ds = random_orthonormal(limit, k, seed, true);
        model = ExchangeableModel(linear_population(limit));
      }
    }
    const double lambda = stein_lambda(kind, ds->n());
    double worst = 0.0;
    std::vector<double> x(ds->n());
    for (std::size_t t = 0; t < 50; ++t) {
      Rng rng = stream_rng(seed + 1, t);
      sample_into(*model, rng, x);
      Matrix e = eij_closed_form(x, *ds, kind);
      Matrix m = conditional_second_moment(x, *ds, *model, kind);
      for (std::size_t i = 0; i < ds->k(); ++i) m(i, i) -= 2.0 * lambda;
      worst = std::max(worst, max_abs_diff(e, m));
    }
    add(std::string("eij_enumeration_") + to_string(kind), worst, 1e-12);
  }

  // Declared moments against Monte Carlo, at 4 standard errors.
  const std::size_t mc = 200000;
  if (const auto* ex = std::get_if<ExchangeableModel>(&c.model)) {
    if (ex->n() >= 4) {
      const MomentSummary m = exchangeable_moments(*ex);
      const auto est = estimate_mixed_moments(*ex, mc, seed + 2);
      add("mixed_4_oracle_se", std::abs(est.mixed_4.mean - *m.mixed_4) / std::max(est.mixed_4.se, 1e-300), 4.0);
      add("mixed_var_oracle_se", std::abs(est.mixed_var.mean - *m.mixed_var) / std::max(est.mixed_var.se, 1e-300), 4.0);
    }
  } else {
    std::vector<const ScalarLaw*> seen;
    for (std::size_t r = 0; r < c.directions.n(); ++r) {
      const ScalarLaw& law = coordinate_law(c.model, r);
      if (std::any_of(seen.begin(), seen.end(), [&](const ScalarLaw* s) { return *s == law; }))
        continue;
      seen.push_back(&law);
      const auto est = estimate_law_moments(law, mc, seed + 3 + seen.size());
      auto z = [](const Estimate& e, double truth) {
        const double d = std::abs(e.mean - truth);
        return e.se > 0.0 ? d / e.se : (d <= 1e-12 ? 0.0 : INFINITY);
      };
      add("abs3_oracle_se_" + law.name(), z(est.abs3, law.abs3()), 4.0);
      add("fourth_oracle_se_" + law.name(), z(est.m4, law.fourth()), 4.0);
    }
  }
  return report;
}

MomentSummary Experiment::moments() const { return model_moments(cell().model); }

std::string moments_csv_header() { return "abs3_max,fourth_max,abs3,fourth,mixed_4,mixed_var"; }

std::string to_csv_row(const MomentSummary& m) {
  return fmt17(m.abs3_max) + "," + fmt17(m.fourth_max) + "," + fmt17(m.abs3) + "," +
         fmt17(m.fourth) + "," + opt17(m.mixed_4) + "," + opt17(m.mixed_var);
}

std::string Experiment::moments_csv() const {
  return std::string(kSchemaLine) + "\n" + moments_csv_header() + "\n" + to_csv_row(moments()) + "\n";
}

}  // namespace cltb
