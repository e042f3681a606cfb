// Command-line front end over the C interface.
//
// Exit status: 0 pass, 1 bound or invariant violation, 2 configuration or
// input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cltb/cltb.h"

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kConfigError = 2;

struct Failure {
  std::string message;
};

void check(cltb_status s, const char* stage) {
  if (s != CLTB_OK) throw Failure{std::string(stage) + ": " + cltb_last_error()};
}

struct StringOwner {
  char* p = nullptr;
  ~StringOwner() { cltb_string_free(p); }
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> output;
  std::optional<std::string> theorem;
  std::optional<unsigned> threads;
  std::optional<double> shrink;
  std::optional<double> tamper_lambda;
  std::string axis;
  std::vector<std::size_t> values;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read config '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string parent_dir(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? "." : path.substr(0, slash ? slash : 1);
}

void emit(const cltb_experiment* ex, const std::string& text) {
  const char* path = cltb_experiment_output(ex);
  if (!path || std::string(path) == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{std::string("cannot write output '") + path + "'"};
  out << text;
  if (!out) throw Failure{std::string("failed writing output '") + path + "'"};
}

int run(const std::string& command, const Options& o) {
  const std::string json = read_file(o.config);
  cltb_overrides ov{};
  if (o.seed) ov.has_seed = 1, ov.seed = *o.seed;
  if (o.samples) ov.has_samples = 1, ov.samples = *o.samples;
  if (o.threads) ov.has_threads = 1, ov.threads = *o.threads;
  ov.theorem = o.theorem ? o.theorem->c_str() : nullptr;
  ov.output = o.output ? o.output->c_str() : nullptr;

  cltb_experiment* raw = nullptr;
  check(cltb_experiment_create(json.c_str(), parent_dir(o.config).c_str(), &ov, &raw), "config");
  std::unique_ptr<cltb_experiment, decltype(&cltb_experiment_free)> ex(raw, cltb_experiment_free);
  if (o.shrink) check(cltb_experiment_set_shrink(ex.get(), *o.shrink), "config");
  if (o.tamper_lambda) check(cltb_experiment_set_lambda_scale(ex.get(), *o.tamper_lambda), "config");
  {
    StringOwner w;
    check(cltb_experiment_warnings(ex.get(), &w.p), "config");
    if (w.p && *w.p) std::fprintf(stderr, "warning: %s", w.p);
  }

  StringOwner text;
  int pass = 1;
  if (command == "bound") {
    check(cltb_experiment_bound_csv(ex.get(), &text.p), "bound");
  } else if (command == "verify") {
    check(cltb_experiment_verify(ex.get(), &text.p, &pass), "verify");
  } else if (command == "scan") {
    if (o.values.empty()) throw Failure{"scan: --values must list at least one value"};
    check(cltb_experiment_scan(ex.get(), o.axis.c_str(), o.values.data(), o.values.size(),
                               &text.p, &pass),
          "scan");
  } else if (command == "check") {
    check(cltb_experiment_check(ex.get(), &text.p, &pass), "check");
  } else {
    check(cltb_experiment_moments_csv(ex.get(), &text.p), "moments");
  }
  emit(ex.get(), text.p);
  return pass ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-approximation bounds for low-dimensional projections"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", o.config, "JSON experiment config")->required();
    sub->add_option("--seed", o.seed, "Monte Carlo seed");
    sub->add_option("--samples", o.samples, "Monte Carlo sample count");
    sub->add_option("--output,-o", o.output, "CSV output path ('-' for stdout)");
    sub->add_option("--theorem", o.theorem, "theorem ids, comma separated (T1..T5, abstract, auto)");
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
  };

  auto* bound = app.add_subcommand("bound", "evaluate the bound right-hand sides");
  auto* verify = app.add_subcommand("verify", "compare a Monte Carlo discrepancy to the bound");
  auto* scan = app.add_subcommand("scan", "verify along an n or k axis");
  auto* chk = app.add_subcommand("check", "run the identity and moment diagnostics");
  auto* moments = app.add_subcommand("moments", "print the moment summary of the model");
  for (auto* sub : {bound, verify, scan, chk, moments}) common(sub);
  for (auto* sub : {verify, scan})
    sub->add_option("--shrink-bound", o.shrink, "multiply the bound by this factor");
  scan->add_option("--axis", o.axis, "n or k")->required();
  scan->add_option("--values", o.values, "axis values")->delimiter(',')->required();
  chk->add_option("--tamper-lambda", o.tamper_lambda)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kConfigError;
  }

  std::string command;
  for (auto* sub : {bound, verify, scan, chk, moments})
    if (sub->parsed()) command = sub->get_name();
  try {
    return run(command, o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
}
