#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nhyp/cli.hpp"

int main(int argc, char** argv) {
  nhyp::CliOptions opt;
  std::string positional, cmd, eps, lambda, g;

  CLI::App app{"Equilibria, spectra and level-set identities for (a u')' + f(u) = 0 with Neumann ends"};
  app.add_option("command", positional, "solve|spectrum|levelsums|exceptional|perturb|sweep|verify");
  app.add_option("--cmd", cmd, "command name (alternative to the positional form)");
  app.add_option("--spec", opt.spec_path, "spec file (key=value)");
  app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", opt.format, "json or csv")->capture_default_str();
  app.add_option("--q-grid", opt.q_grid, "levels per profile for levelsums")->capture_default_str();
  app.add_option("--eps-list", eps, "comma-separated eps values for perturb");
  app.add_option("--g-coeffs", g, "comma-separated coefficients of the perturbation g (g(0) = 0)");
  app.add_option("--lambda-range", lambda, "LO:HI:N for sweep");
  app.add_option("--threads", opt.threads, "worker threads")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    if (!cmd.empty() && !positional.empty() && cmd != positional)
      throw nhyp::Error(nhyp::ErrorKind::InvalidArgument, "conflicting command names");
    opt.command = cmd.empty() ? positional : cmd;
    if (opt.command.empty()) throw nhyp::Error(nhyp::ErrorKind::MissingKey, "no command given");
    if (!eps.empty()) opt.eps_list = nhyp::parse_number_list("eps-list", eps);
    if (!g.empty()) opt.g_coeffs = nhyp::parse_number_list("g-coeffs", g);
    if (!lambda.empty()) opt.lambda_range = nhyp::parse_lambda_range(lambda);
  } catch (const nhyp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nhyp::exit_input;
  }
  return nhyp::run(opt, std::cout, std::cerr);
}
