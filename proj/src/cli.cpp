#include "unmeasure/cli.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "unmeasure/altmin.hpp"
#include "unmeasure/divergence.hpp"
#include "unmeasure/dutchbook.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/gof.hpp"
#include "unmeasure/poisson_ops.hpp"
#include "unmeasure/poly_ineq.hpp"
#include "unmeasure/projections.hpp"

#ifndef UNMEASURE_VERSION
#define UNMEASURE_VERSION "0.0.0"
#endif

namespace unmeasure::cli {

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Inline JSON when the argument starts with '{' or '[', otherwise a path.
json load_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  const std::string text =
      first != std::string::npos && (arg[first] == '{' || arg[first] == '[') ? arg : slurp(arg);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json extended(const ExtendedReal& x) {
  return x.is_finite() ? json(x.value()) : json("inf");
}

FDivergenceSpec spec_by_name(const std::string& name) {
  if (name == "kl") return kl_spec();
  if (name == "reverse-kl") return reverse_kl_spec();
  throw InputError("unknown divergence '" + name + "'");
}

std::vector<MomentConstraint> moments_from_json(const json& j) {
  std::vector<MomentConstraint> out;
  for (const auto& item : j.value("equalities", json::array())) {
    out.push_back({item.at("g").get<std::vector<double>>(), item.at("target").get<double>()});
  }
  if (j.contains("inequalities") && !j.at("inequalities").empty()) {
    throw InputError("altmin accepts equality constraints only");
  }
  return out;
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv);

 private:
  void emit(const std::string& text) {
    if (out_path_.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(out_path_, std::ios::binary | std::ios::trunc);
    if (!file) throw InputError("cannot write " + out_path_);
    file << text;
  }

  void emit_json(const std::string& command, json body) {
    body["command"] = command;
    body["version"] = version();
    body["seed"] = seed_;
    emit(body.dump(2) + "\n");
  }

  /// CSV table; with --out the summary JSON goes to stdout.
  void emit_table(const std::string& command, const QqTable& table) {
    emit(qq_to_csv(table));
    if (out_path_.empty()) return;
    const json summary{{"command", command},
                       {"version", version()},
                       {"seed", seed_},
                       {"gap", table.gap},
                       {"bracket_violation", table.bracket_violation},
                       {"truncated_mass", table.truncated_mass},
                       {"atoms", table.rows.size()}};
    out_ << summary.dump(2) << "\n";
  }

  void error(const std::string& type, const std::string& message) {
    err_ << json{{"error", {{"type", type}, {"message", message}}}}.dump() << "\n";
  }

  std::ostream& out_;
  std::ostream& err_;
  std::string out_path_;
  std::uint64_t seed_ = 0;
};

int Runner::run(int argc, const char* const* argv) {
  CLI::App app{"Unnormalized measures, divergences and projections", "unmeasure"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(version()));

  if (const char* env = std::getenv("UNMEASURE_SEED")) {
    try {
      seed_ = std::stoull(env);
    } catch (const std::exception&) {
      error("usage_error", "UNMEASURE_SEED must be a non-negative integer");
      return kExitUsageError;
    }
  }
  app.add_option("--seed", seed_, "Random seed (falls back to UNMEASURE_SEED)");
  app.add_option("--out", out_path_, "Output file (default: stdout)");

  // divergence
  std::string p_arg, q_arg, div_name = "extended";
  auto* divergence = app.add_subcommand("divergence", "Divergence between two measures");
  divergence->add_option("--p", p_arg, "Measure JSON or path")->required();
  divergence->add_option("--q", q_arg, "Measure JSON or path")->required();
  divergence->add_option("--spec", div_name, "extended | kl | reverse-kl")
      ->check(CLI::IsMember({"extended", "kl", "reverse-kl"}));

  // thin
  double alpha = 0.5, lambda = 0.0, bin_p = 0.0;
  int bin_n = 0;
  std::string dist_arg;
  auto* thin_cmd = app.add_subcommand("thin", "Binomial thinning of a count distribution");
  thin_cmd->add_option("--alpha", alpha, "Keep probability in [0, 1]")->required();
  auto* thin_poisson = thin_cmd->add_option("--poisson", lambda, "Po(lambda) input");
  auto* thin_n = thin_cmd->add_option("--binomial-n", bin_n, "bin(n, p) input");
  thin_cmd->add_option("--binomial-p", bin_p, "bin(n, p) input")->needs(thin_n);
  auto* thin_dist = thin_cmd->add_option("--dist", dist_arg, "CountDistribution JSON or path");
  thin_poisson->excludes(thin_n)->excludes(thin_dist);
  thin_n->excludes(thin_dist);

  // thin-law
  std::string bern_arg;
  std::vector<int> n_list{1, 2, 4, 8, 16, 32, 64, 128, 256};
  auto* thin_law = app.add_subcommand("thin-law", "Thinned convolution powers of a Bernoulli vector");
  thin_law->add_option("--p", bern_arg, "Bernoulli vector as Measure JSON or path")->required();
  thin_law->add_option("--n", n_list, "Convolution powers")->delimiter(',');

  // gof-classical / gof-poisson
  int gof_n = 20;
  auto* gof_classical = app.add_subcommand("gof-classical", "Exact G^2 QQ table under bin(n, 1/2)");
  gof_classical->add_option("--n", gof_n, "Sample size")->required();
  double intensity = 20.0;
  int cutoff = 0;
  auto* gof_poisson = app.add_subcommand("gof-poisson", "Exact G^2 QQ table under the Poisson model");
  gof_poisson->add_option("--intensity", intensity, "Total intensity")->required();
  gof_poisson->add_option("--cutoff", cutoff, "Largest total count (default: tail <= 1e-12)");

  // project
  std::string constraints_arg, proj_spec = "kl";
  double tol = 1e-9;
  auto* project_cmd = app.add_subcommand("project", "f-divergence projection onto a constraint set");
  project_cmd->add_option("--q", q_arg, "Measure JSON or path")->required();
  project_cmd->add_option("--constraints", constraints_arg, "ConstraintSet JSON or path")->required();
  project_cmd->add_option("--spec", proj_spec, "kl | reverse-kl")->check(CLI::IsMember({"kl", "reverse-kl"}));
  project_cmd->add_option("--tol", tol, "Solver tolerance");

  // altmin
  std::string variant = "unnormalized";
  double alt_tol = 1e-10;
  int max_cycles = 200'000;
  auto* altmin = app.add_subcommand("altmin", "Cyclic KL projections onto moment constraints");
  altmin->add_option("--q", q_arg, "Measure JSON or path")->required();
  altmin->add_option("--constraints", constraints_arg, "ConstraintSet JSON or path (equalities)")->required();
  altmin->add_option("--variant", variant, "normalized | unnormalized | orthogonalized")
      ->check(CLI::IsMember({"normalized", "unnormalized", "orthogonalized"}));
  altmin->add_option("--tol", alt_tol, "Stopping tolerance");
  altmin->add_option("--max-cycles", max_cycles, "Cycle cap");

  // ineq-scan
  std::string base = "charlier";
  double scan_lambda = 1.0, scan_p = 0.25, epsilon = 0.05;
  int scan_n = 20, degree = 1;
  long samples = 100'000;
  auto* scan = app.add_subcommand("ineq-scan", "Random search for violations of D >= (E_P f)^2 / 2");
  scan->add_option("--base", base, "charlier | krawtchouk")->check(CLI::IsMember({"charlier", "krawtchouk"}));
  scan->add_option("--lambda", scan_lambda, "Poisson mean");
  scan->add_option("--n", scan_n, "Binomial trials");
  scan->add_option("--p", scan_p, "Binomial success probability");
  scan->add_option("--degree", degree, "Polynomial degree");
  scan->add_option("--epsilon", epsilon, "Mean window [-epsilon, 0]");
  scan->add_option("--samples", samples, "Accepted samples");

  // dutchbook
  std::string matrix_path;
  double db_tol = 1e-12;
  auto* dutchbook = app.add_subcommand("dutchbook", "Arbitrage or supporting measure for a payoff matrix");
  dutchbook->add_option("--matrix", matrix_path, "CSV file, one payoff function per row")
      ->required()
      ->check(CLI::ExistingFile);
  dutchbook->add_option("--tol", db_tol, "Arbitrage margin threshold");

  // mach-zehnder
  std::string scenario = "blocked";
  int count_1 = -1, count_2 = -1;
  auto* mz = app.add_subcommand("mach-zehnder", "Two-detector Poisson test, blocked or open arm");
  mz->add_option("--scenario", scenario, "blocked | unblocked")->check(CLI::IsMember({"blocked", "unblocked"}));
  mz->add_option("--intensity", intensity, "Per-detector intensity when blocked")->required();
  mz->add_option("--count1", count_1, "Observed count at detector 1");
  mz->add_option("--count2", count_2, "Observed count at detector 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out_ << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out_ << version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error("usage_error", e.what());
    return kExitUsageError;
  }

  try {
    if (*divergence) {
      const Measure p = measure_from_json(load_json(p_arg));
      const Measure q = measure_from_json(load_json(q_arg));
      const ExtendedReal value =
          div_name == "extended" ? kl_extended(p, q) : f_divergence(p, q, spec_by_name(div_name));
      emit_json("divergence", {{"spec", div_name}, {"value", extended(value)}});
    } else if (*thin_cmd) {
      CountDistribution dist = CountDistribution::point_mass({0});
      if (thin_poisson->count() > 0) {
        dist = poisson_pmf(lambda);
      } else if (thin_n->count() > 0) {
        dist = binomial_distribution(bin_n, bin_p);
      } else if (thin_dist->count() > 0) {
        dist = count_distribution_from_json(load_json(dist_arg));
      } else {
        throw InputError("one of --poisson, --binomial-n or --dist is required");
      }
      emit_json("thin", {{"alpha", alpha}, {"result", thin(dist, alpha)}});
    } else if (*thin_law) {
      const Measure p = measure_from_json(load_json(bern_arg));
      const ThinLawTable table = thin_law_experiment(bernoulli_vector(p), p, n_list);
      std::string csv = "n,divergence,total_variation,entropy,mean_error\n";
      for (const auto& row : table.rows) {
        csv += std::to_string(row.n) + "," +
               (row.divergence.is_finite() ? format_double(row.divergence.value()) : "inf") + "," +
               format_double(row.total_variation) + "," + format_double(row.entropy) + "," +
               format_double(row.mean_error) + "\n";
      }
      emit(csv);
    } else if (*gof_classical) {
      emit_table("gof-classical", classical_qq(gof_n));
    } else if (*gof_poisson) {
      emit_table("gof-poisson", poisson_qq(intensity, cutoff));
    } else if (*project_cmd) {
      const Measure q = measure_from_json(load_json(q_arg));
      const ConstraintSet set = constraint_set_from_json(load_json(constraints_arg));
      ProjectOptions options;
      options.tol = tol;
      json result = project(q, set, spec_by_name(proj_spec), options);
      emit_json("project", {{"spec", proj_spec}, {"tol", tol}, {"result", std::move(result)}});
    } else if (*altmin) {
      const Measure q = measure_from_json(load_json(q_arg));
      const auto constraints = moments_from_json(load_json(constraints_arg));
      const AltMinTrace trace =
          variant == "orthogonalized" ? altmin_accelerated(q, constraints, alt_tol, max_cycles)
                                      : altmin_cyclic(q, constraints, variant == "unnormalized", alt_tol,
                                                      max_cycles);
      emit(trace_to_csv(trace));
      if (!trace.converged) {
        error("convergence_error", "cycle cap reached before the residuals fell below tol");
        return kExitDomainError;
      }
    } else if (*scan) {
      const OrthoPoly f = base == "charlier" ? charlier(scan_lambda, degree) : krawtchouk(scan_n, scan_p, degree);
      json report = inequality_scan(f, epsilon, samples, seed_);
      report["sampling_law"] =
          "P = Q(1 + t f + sum_j c_j h_j) + jitter; t ~ U[-epsilon, 0], h_j orthonormal up to "
          "degree 3 with the f-component removed, per-sample mt19937_64 seeded from (seed, index)";
      report["hypotheses"] = "E_Q f = 0, E_Q f^2 = 1, E_Q f^3 > 0 assumed jointly";
      emit_json("ineq-scan", std::move(report));
    } else if (*dutchbook) {
      const PayoffSystem system = PayoffSystem::from_csv(slurp(matrix_path));
      const DichotomyCertificate cert = decide(system, db_tol);
      json body = cert;
      body["verified"] = verify(system, cert);
      emit_json("dutchbook", std::move(body));
    } else if (*mz) {
      const auto sc = scenario == "blocked" ? MachZehnderScenario::kBlocked : MachZehnderScenario::kUnblocked;
      const MachZehnderReport r = mach_zehnder(sc, intensity, count_1, count_2);
      emit_json("mach-zehnder", {{"scenario", to_string(r.scenario)},
                                 {"intensity_1", r.intensity_1},
                                 {"intensity_2", r.intensity_2},
                                 {"count_1", r.count_1},
                                 {"count_2", r.count_2},
                                 {"g", r.statistic.g},
                                 {"g2", r.statistic.g2},
                                 {"poisson_divergence", r.poisson_divergence},
                                 {"p_value_exact", r.p_value_exact},
                                 {"p_value_chi2", r.p_value_chi2},
                                 {"qq_gap", r.table.gap}});
    }
  } catch (const InfeasibleError& e) {
    error("infeasible", e.what());
    return kExitDomainError;
  } catch (const ConvergenceError& e) {
    error("convergence_error", e.what());
    return kExitDomainError;
  } catch (const DomainError& e) {
    error("domain_error", e.what());
    return kExitDomainError;
  } catch (const InputError& e) {
    error("input_error", e.what());
    return kExitDomainError;
  } catch (const json::exception& e) {
    error("input_error", e.what());
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace

const char* version() { return UNMEASURE_VERSION; }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Runner runner(out, err);
  return runner.run(argc, argv);
}

}  // namespace unmeasure::cli
