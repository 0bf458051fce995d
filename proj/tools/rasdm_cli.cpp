#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rasdm/rasdm.h"

namespace {

// exit codes: 0 ok, 1 usage or input, 2 infeasible or empty intersection,
// 3 a checked property failed, 4 solver trouble
int exit_code(rasdm_status s) {
  switch (s) {
    case RASDM_OK: return 0;
    case RASDM_INVALID: return 1;
    case RASDM_INFEASIBLE:
    case RASDM_EMPTY_INTERSECTION: return 2;
    case RASDM_CHECK_FAILED: return 3;
    default: return 4;
  }
}

bool read_text(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_text(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

// --x takes a file, inline JSON, or a comma-separated list
std::string commitment_text(const std::string& arg) {
  std::string text;
  if (std::filesystem::is_regular_file(arg) && read_text(arg, text)) return text;
  if (arg.find(',') != std::string::npos && arg.find_first_of("[{") == std::string::npos) return "[" + arg + "]";
  return arg;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

struct Run {
  std::string output;
  std::string trace;

  int finish(rasdm_status st, rasdm_report* rep) {
    if (rep) {
      if (!write_text(output, rasdm_report_json(rep))) {
        std::fprintf(stderr, "error: cannot write %s\n", output.c_str());
        rasdm_report_free(rep);
        return 1;
      }
      if (!trace.empty()) {
        rasdm_report* t = nullptr;
        if (rasdm_report_extract(rep, "/result/trace", &t) == RASDM_OK) {
          const bool ok = write_text(trace, rasdm_report_json(t));
          rasdm_report_free(t);
          if (!ok) {
            std::fprintf(stderr, "error: cannot write %s\n", trace.c_str());
            rasdm_report_free(rep);
            return 1;
          }
        }
      }
      rasdm_report_free(rep);
    }
    if (st != RASDM_OK) {
      const char* msg = rasdm_last_error();
      std::fprintf(stderr, "error (%s): %s\n", rasdm_status_name(st), *msg ? msg : "see report");
    }
    return exit_code(st);
  }
};

rasdm_instance* open_instance(const std::string& path, int& code) {
  rasdm_instance* inst = nullptr;
  const auto st = rasdm_instance_from_file(path.c_str(), &inst);
  if (st != RASDM_OK) {
    std::fprintf(stderr, "error (%s): %s\n", rasdm_status_name(st), rasdm_last_error());
    code = exit_code(st);
    return nullptr;
  }
  return inst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage stochastic electricity market clearing with risk trading"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rasdm_version());

  Run run;
  std::string instance, scenario, x_arg, suite = "all", verify, distribution, mode = "no-trading", sweep;
  rasdm_options opt;
  rasdm_options_default(&opt);
  double r_u = 0.0, r_v = 0.0, kappa = 0.0, beta_bar = 1.0;
  bool iterate = false;

  auto add_io = [&](CLI::App* c, bool needs_instance = true) {
    if (needs_instance) c->add_option("-i,--instance", instance, "instance JSON file")->required();
    c->add_option("-o,--output", run.output, "report file (default stdout)");
  };

  auto* sdm = app.add_subcommand("solve-sdm", "stochastic dispatch without risk trading");
  add_io(sdm);

  auto* rec = app.add_subcommand("recourse", "real-time dispatch at a fixed pre-commitment");
  add_io(rec);
  rec->add_option("--x", x_arg, "pre-commitment: file, JSON, or comma list")->required();
  rec->add_option("--scenario", scenario, "scenario id (default: all)");

  auto* ras = app.add_subcommand("solve-raslp", "risk-adjusted dispatch with risk securities");
  add_io(ras);

  auto* nv = app.add_subcommand("newsvendor", "closed-form pre-commitment against the brute-force oracle");
  add_io(nv, false);
  nv->add_option("-d,--distribution", distribution, "distribution JSON {support, probs}")->required();
  nv->add_option("--r-u", r_u, "cost of producing above the pre-commitment")->required();
  nv->add_option("--r-v", r_v, "cost of producing below it")->required();
  nv->add_option("--kappa", kappa, "risk weight");
  nv->add_option("--beta-bar", beta_bar, "mean spectrum level");
  nv->add_option("--mode", mode, "no-trading or with-trading")
      ->check(CLI::IsMember({"no-trading", "with-trading"}));

  auto* eq = app.add_subcommand("equilibrium", "risk-averse equilibrium search or verification");
  add_io(eq);
  auto* it_flag = eq->add_flag("--iterate", iterate, "run the damped fixed point");
  auto* ver_opt = eq->add_option("--verify", verify, "candidate or solve-sdm report to verify");
  auto* sw_opt = eq->add_option("--sweep", sweep, "comma list of kappa values for a comparative static");
  it_flag->excludes(ver_opt)->excludes(sw_opt);
  ver_opt->excludes(sw_opt);
  eq->add_option("--trace", run.trace, "write the iteration trace here");
  eq->add_option("--tol", opt.tol, "gap tolerance");
  eq->add_option("--max-iters", opt.max_iters, "fixed-point iteration cap");
  eq->add_option("--damping", opt.damping, "fixed-point step in (0, 1]");

  auto* props = app.add_subcommand("check-properties", "run invariant suites against an instance");
  add_io(props);
  props->add_option("--suite", suite, "suite name or all");
  props->add_option("--tol", opt.tol, "property tolerance");
  props->add_option("--seed", opt.seed, "seed for randomized suites");
  props->add_option("--trials", opt.trials, "draws per randomized property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  rasdm_report* rep = nullptr;

  if (*nv) {
    std::string text;
    if (!read_text(distribution, text)) {
      std::fprintf(stderr, "error: cannot read %s\n", distribution.c_str());
      return 1;
    }
    const rasdm_newsvendor_args a{r_u, r_v, kappa, beta_bar, mode == "with-trading" ? RASDM_WITH_TRADING : RASDM_NO_TRADING};
    const rasdm_status st = rasdm_newsvendor(text.c_str(), &a, &rep);
    return run.finish(st, rep);
  }

  int code = 0;
  rasdm_instance* inst = open_instance(instance, code);
  if (!inst) return code;
  rasdm_status st = RASDM_OK;

  if (*sdm) {
    st = rasdm_solve_sdm(inst, &rep);
  } else if (*rec) {
    const std::string x = commitment_text(x_arg);
    st = rasdm_recourse(inst, x.c_str(), scenario.empty() ? nullptr : scenario.c_str(), &rep);
  } else if (*ras) {
    st = rasdm_solve_raslp(inst, &rep);
  } else if (*eq) {
    if (!verify.empty()) {
      std::string text;
      if (!read_text(verify, text)) {
        std::fprintf(stderr, "error: cannot read %s\n", verify.c_str());
        rasdm_instance_free(inst);
        return 1;
      }
      st = rasdm_equilibrium_verify(inst, text.c_str(), &opt, &rep);
    } else if (!sweep.empty()) {
      std::vector<double> ks;
      try {
        ks = parse_list(sweep);
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: --sweep expects numbers separated by commas\n");
        rasdm_instance_free(inst);
        return 1;
      }
      st = rasdm_equilibrium_sweep(inst, ks.data(), ks.size(), &opt, &rep);
    } else {
      st = rasdm_equilibrium_iterate(inst, &opt, &rep);
    }
  } else if (*props) {
    st = rasdm_check_properties(inst, suite.c_str(), &opt, &rep);
  }
  rasdm_instance_free(inst);
  return run.finish(st, rep);
}
