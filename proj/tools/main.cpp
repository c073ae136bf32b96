#include <exception>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "parity_forge/error.hpp"
#include "pipeline.hpp"

namespace {

void common(CLI::App* sub, pf_cli::Overrides& o, bool config_required) {
  auto* cfg = sub->add_option("--config", o.config, "JSON run configuration");
  if (config_required) cfg->required();
  sub->add_option("--out", o.out, "output directory (overrides config 'out')");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--threads", o.threads, "worker threads (default: PARITY_FORGE_THREADS)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjust covariates to independence from protected attributes and audit the result"};
  app.require_subcommand(1);
  pf_cli::Overrides o;

  auto* sim = app.add_subcommand("simulate", "simulate the two-covariate study and compare adjustments");
  common(sim, o, false);
  sim->add_option("--n", o.n, "sample size (>= 100)");
  sim->add_option("--m", o.m, "replicates per adjusted regime");

  auto* tr = app.add_subcommand("transform", "write an ensemble of adjusted datasets");
  common(tr, o, true);
  tr->add_option("--m", o.m, "number of adjusted replicates");
  tr->add_option("--mode", o.mode, "mutual | pairwise | none");

  auto* dg = app.add_subcommand("diagnose", "pairwise G-tests on the data and an adjusted ensemble");
  common(dg, o, true);
  dg->add_option("--ensemble", o.ensemble, "directory of *.adjusted.<m>.csv files");

  auto* pr = app.add_subcommand("predict", "train predictors on unadjusted and adjusted data");
  common(pr, o, true);
  pr->add_option("--ensemble", o.ensemble, "directory of adjusted replicates (default: transform now)");
  pr->add_option("--m", o.m, "replicates when transforming in place");
  pr->add_option("--mode", o.mode, "mutual | pairwise | none");
  pr->add_option("--model", o.model, "rf | logistic");
  pr->add_option("--threshold", o.threshold, "classification threshold in (0, 1)");

  auto* rp = app.add_subcommand("report", "transform, diagnose and predict in one run");
  common(rp, o, true);
  rp->add_option("--m", o.m, "number of adjusted replicates");
  rp->add_option("--mode", o.mode, "mutual | pairwise | none");
  rp->add_option("--model", o.model, "rf | logistic");
  rp->add_option("--threshold", o.threshold, "classification threshold in (0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::function<void(const pf_cli::Overrides&)> run;
  if (sim->parsed()) run = pf_cli::cmd_simulate;
  if (tr->parsed()) run = pf_cli::cmd_transform;
  if (dg->parsed()) run = pf_cli::cmd_diagnose;
  if (pr->parsed()) run = pf_cli::cmd_predict;
  if (rp->parsed()) run = pf_cli::cmd_report;

  try {
    run(o);
  } catch (const parity_forge::Error& e) {
    std::cerr << "error (" << parity_forge::to_string(e.kind()) << "): " << e.what() << "\n";
    return parity_forge::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
