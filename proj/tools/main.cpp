// SPDX-License-Identifier: MIT
//
// Thin command-line front end: every subcommand collects its flags into a
// flat key=value config and hands it to run_study, so a config file alone
// reproduces any run and the binary contains no math of its own.
#include <iostream>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "semiboost/study.hpp"

namespace {

using semiboost::StudyConfig;

struct FlagSet {
  CLI::App* cmd = nullptr;
  std::string kind;
  std::string config_path;
  /// (key, values, is_list) in declaration order; singles keep the last
  /// occurrence, lists keep every occurrence and split on commas.
  std::vector<std::tuple<std::string, std::shared_ptr<std::vector<std::string>>, bool>> entries;

  void opt(const std::string& key, const std::string& help) { add(key, help, false); }
  void list(const std::string& key, const std::string& help) { add(key, help, true); }

  void add(const std::string& key, const std::string& help, bool is_list) {
    auto store = std::make_shared<std::vector<std::string>>();
    auto* o = cmd->add_option("--" + key, *store, help);
    o->delimiter(',');
    if (!is_list) o->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    entries.emplace_back(key, store, is_list);
  }

  StudyConfig collect() const {
    StudyConfig cfg;
    cfg.append("study", kind);
    for (const auto& [key, store, is_list] : entries) {
      if (store->empty()) continue;
      if (is_list)
        for (const auto& v : *store) cfg.append(key, v);
      else
        cfg.append(key, store->back());
    }
    if (!config_path.empty()) cfg.override_with(StudyConfig::load_file(config_path));
    return cfg;
  }
};

int dispatch(const FlagSet& flags) {
  try {
    return semiboost::run_study(flags.collect(), std::cout, std::cerr);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

void add_scheme_flags(FlagSet& f) {
  f.opt("scheme", "diffusion scheme: ou | brownian");
  f.opt("a", "mean reversion rate (ou)");
  f.opt("sigma", "diffusion coefficient (ou)");
  f.opt("x0", "initial state");
  f.opt("noise", "innovation law: gaussian | uniform | rademacher");
}

void add_mc_flags(FlagSet& f) {
  f.opt("samples", "Monte Carlo sample count");
  f.opt("seed", "root seed");
  f.opt("workers", "thread cap; does not affect results");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boosted semigroup approximation studies on random grids"};
  app.require_subcommand(1);

  int rc = 0;
  std::vector<std::unique_ptr<FlagSet>> sets;
  const auto make = [&](const std::string& kind, const std::string& help) -> FlagSet& {
    auto fs = std::make_unique<FlagSet>();
    fs->kind = kind;
    fs->cmd = app.add_subcommand(kind, help);
    fs->cmd->add_option("--config", fs->config_path,
                        "key=value config file; its entries override flags");
    FlagSet& ref = *fs;
    ref.cmd->callback([&rc, &ref] { rc = dispatch(ref); });
    sets.push_back(std::move(fs));
    return ref;
  };

  {
    auto& f = make("params", "per-level stage counts, orders and derivative budgets");
    f.opt("nu", "target approximation order");
    f.opt("alpha", "base scheme order");
    f.opt("beta", "derivative cost exponent");
    f.opt("n", "grid refinement factor");
    f.opt("T", "time horizon");
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("expand", "recursive word expansion of the boosted step");
    f.opt("nu", "target approximation order");
    f.opt("alpha", "base scheme order");
    f.opt("beta", "derivative cost exponent");
    f.opt("n", "grid refinement factor");
    f.opt("level", "grid level of the expanded step");
    f.opt("T", "time horizon");
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("matrix-convergence", "total-variation error of the boosted transition");
    f.list("nu", "target orders");
    f.list("n", "grid refinement factors");
    f.opt("alpha", "base scheme order");
    f.opt("beta", "derivative cost exponent");
    f.opt("T", "time horizon");
    f.list("generator_row", "one quoted space-separated generator row per flag");
    f.opt("states", "random generator size (used when no rows are given)");
    f.opt("generator_seed", "random generator seed");
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("sde-base-error", "weak error of the plain scheme against the oracle");
    add_scheme_flags(f);
    f.opt("f", "payoff: poly | cos | mean | indicator:K");
    f.opt("T", "time horizon");
    f.list("n", "grid refinement factors");
    add_mc_flags(f);
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("sde-weak-error", "weak error of the boosted estimator across orders");
    add_scheme_flags(f);
    f.opt("f", "payoff: poly | cos | mean | indicator:K");
    f.opt("T", "time horizon");
    f.opt("alpha", "base scheme order");
    f.opt("beta", "derivative cost exponent");
    f.list("nu", "target orders");
    f.list("n", "grid refinement factors");
    add_mc_flags(f);
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("tv-study", "weak error on an indicator payoff (total-variation probe)");
    add_scheme_flags(f);
    f.opt("threshold", "indicator threshold K for f(x) = 1{x <= K}");
    f.opt("T", "time horizon");
    f.opt("alpha", "base scheme order");
    f.opt("beta", "derivative cost exponent");
    f.list("nu", "target orders");
    f.list("n", "grid refinement factors");
    add_mc_flags(f);
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("density-compare", "blurred density of the boosted estimator vs the oracle");
    add_scheme_flags(f);
    f.opt("theta", "blur exponent; kernel width is delta^theta");
    f.opt("T", "time horizon");
    f.opt("alpha", "base scheme order");
    f.opt("beta", "derivative cost exponent");
    f.list("nu", "target orders");
    f.list("n", "grid refinement factors");
    f.opt("grid", "evaluation grid lo:hi:points");
    add_mc_flags(f);
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("splitting-check", "invariants of the noise splitting and localization");
    f.opt("noise", "innovation law: gaussian | uniform");
    f.opt("r_star", "splitting ball radius");
    f.opt("z_star", "splitting ball center");
    f.opt("delta", "step size; must be a reciprocal step count");
    f.opt("samples", "Monte Carlo sample count");
    f.opt("seed", "root seed");
    f.opt("out", "CSV output path");
  }
  {
    auto& f = make("hypothesis-report", "measured thresholds of the regularization conditions");
    add_scheme_flags(f);
    f.opt("T", "time horizon");
    f.list("n", "grid refinement factors");
    f.list("t", "evaluation times");
    f.opt("z_star", "splitting ball center");
    f.opt("r_star", "splitting ball radius");
    f.opt("samples", "Monte Carlo sample count");
    f.opt("seed", "root seed");
    f.opt("out", "CSV output path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
