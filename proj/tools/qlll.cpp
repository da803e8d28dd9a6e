// qlll command-line front end: gen, check, brute, montecarlo, cnf.
//
// Exit status is 0 whenever the command ran, whatever the verdict; certificates are data.
// Nonzero means an operational error (bad flags, unreadable or malformed input, I/O).

#include "qlll/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

/// Relative output paths resolve against $QLLL_OUTPUT_DIR when it is set.
fs::path output_path(const std::string &p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char *dir = std::getenv("QLLL_OUTPUT_DIR"); dir && *dir) path = fs::path(dir) / path;
  }
  return path;
}

std::string read_input(const std::string &p) {
  if (p == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input '" + p + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string &p, const std::string &bytes) {
  if (p.empty() || p == "-") {
    std::cout << bytes;
    return;
  }
  const auto path = output_path(p);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << bytes;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void add_tolerance_flags(CLI::App *cmd, qlll::ToleranceConfig &tol) {
  cmd->add_option("--max-qubits", tol.max_qubits, "Brute-force qubit bound")->capture_default_str();
  cmd->add_option("--tau-rank", tol.tau_rank, "Relative rank threshold")->capture_default_str();
  cmd->add_option("--tau-residual", tol.tau_residual, "Residual threshold")->capture_default_str();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Quantum Lovasz Local Lemma certificates for k-QSAT"};
  app.set_version_flag("--version", std::string("qlll ") + qlll::kVersion);
  app.require_subcommand(1);

  qlll::harness::GenConfig gen;
  std::string gen_out;
  auto *gen_cmd = app.add_subcommand("gen", "Generate a random k-QSAT instance");
  gen_cmd->add_option("--n", gen.n, "Number of qubits")->required();
  gen_cmd->add_option("--k", gen.k, "Locality")->capture_default_str();
  gen_cmd->add_option("--ensemble", gen.ensemble, "gknm | gknp | regular")->capture_default_str();
  gen_cmd->add_option("--alpha", gen.alpha, "Density m/n (gknm)");
  gen_cmd->add_option("--m", gen.m, "Edge count (gknm)");
  gen_cmd->add_option("--p", gen.p, "Edge probability (gknp)");
  gen_cmd->add_option("--degree", gen.degree, "Vertex degree D (regular)");
  gen_cmd->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  gen_cmd->add_flag("--graph-only", gen.graph_only, "Write the hypergraph text format instead of JSON");
  gen_cmd->add_option("-o,--out", gen_out, "Output file (default stdout)");

  qlll::harness::CheckConfig check;
  qlll::ToleranceConfig check_tol;
  std::string check_in, check_out;
  auto *check_cmd = app.add_subcommand("check", "Certify satisfiability of an instance");
  check_cmd->add_option("input", check_in, "Instance JSON or hypergraph text ('-' for stdin)")->required();
  check_cmd->add_option("--mode", check.mode, "qlll | asymmetric | matching | hybrid")->capture_default_str();
  check_cmd->add_option("--r-max", check.r_max, "Largest projector rank")->capture_default_str();
  check_cmd->add_option("--D", check.cutoff, "V_H cutoff degree (default 2^k/(4ek))");
  check_cmd->add_option("--alpha", check.alpha, "Density for the region report (default m/n)");
  check_cmd->add_option("-o,--out", check_out, "Output file (default stdout)");

  qlll::ToleranceConfig brute_tol;
  std::string brute_in, brute_out, brute_state;
  auto *brute_cmd = app.add_subcommand("brute", "Exact intersection dimension by dense linear algebra");
  brute_cmd->add_option("input", brute_in, "Instance JSON ('-' for stdin)")->required();
  brute_cmd->add_option("--state-out", brute_state, "Write a satisfying state here");
  brute_cmd->add_option("-o,--out", brute_out, "Output file (default stdout)");
  add_tolerance_flags(brute_cmd, brute_tol);

  qlll::harness::MonteCarloConfig mc;
  std::string mc_csv = "montecarlo.csv", mc_summary = "montecarlo.json";
  auto *mc_cmd = app.add_subcommand("montecarlo", "Seeded trial sweep over densities");
  mc_cmd->add_option("--mode", mc.mode, "matching | hybrid")->capture_default_str();
  mc_cmd->add_option("--n", mc.n, "Number of qubits")->required();
  mc_cmd->add_option("--k", mc.k, "Locality")->capture_default_str();
  mc_cmd->add_option("--alpha", mc.alphas, "Densities (comma separated or repeated)")->required()->delimiter(',');
  mc_cmd->add_option("--trials", mc.trials, "Trials per density")->capture_default_str();
  mc_cmd->add_option("--seed", mc.seed, "Master seed")->capture_default_str();
  mc_cmd->add_option("--workers", mc.workers, "Worker threads (output does not depend on it)")->capture_default_str();
  mc_cmd->add_option("--D", mc.cutoff, "V_H cutoff degree (default 2^k/(4ek))");
  mc_cmd->add_flag("--record-timings", mc.record_timings, "Fill the ms_elapsed column (breaks byte reproducibility)");
  mc_cmd->add_option("--csv", mc_csv, "Per-trial CSV path")->capture_default_str();
  mc_cmd->add_option("--summary", mc_summary, "Summary JSON path")->capture_default_str();

  std::string cnf_in, cnf_out;
  auto *cnf_cmd = app.add_subcommand("cnf", "Classical LLL certificate for a uniform k-CNF (DIMACS)");
  cnf_cmd->add_option("input", cnf_in, "DIMACS file ('-' for stdin)")->required();
  cnf_cmd->add_option("-o,--out", cnf_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      write_output(gen_out, qlll::harness::cmd_gen(gen));
    } else if (check_cmd->parsed()) {
      write_output(check_out, qlll::harness::cmd_check(check, read_input(check_in), check_tol));
    } else if (brute_cmd->parsed()) {
      const auto res = qlll::harness::cmd_brute(read_input(brute_in), !brute_state.empty(), brute_tol);
      write_output(brute_out, res.report);
      if (!brute_state.empty() && res.state) write_output(brute_state, *res.state);
    } else if (mc_cmd->parsed()) {
      const auto res = qlll::harness::cmd_montecarlo(mc);
      write_output(mc_csv, res.csv);
      write_output(mc_summary, res.summary);
    } else if (cnf_cmd->parsed()) {
      write_output(cnf_out, qlll::harness::cmd_cnf(read_input(cnf_in)));
    }
  } catch (const std::exception &e) {
    std::cerr << "qlll: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
