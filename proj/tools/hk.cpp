#include "hk/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{"Periodic homogenization toolkit: cell problems, effective laws, corrector studies"};
  app.require_subcommand(1, 1);
  hk::AppOptions opts;
  std::string out;
  int threads = 0;
  for (const auto& name : hk::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hk::kExitConfigError;
  }
  opts.subcommand = app.get_subcommands().front()->get_name();
  if (!out.empty()) opts.out_dir = out;
  if (threads > 0) {
    opts.threads = threads;
  } else if (const char* env = std::getenv("HK_THREADS")) {
    char* end = nullptr;
    const long t = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || t < 1) {
      std::cerr << "HK_THREADS must be a positive integer\n";
      return hk::kExitConfigError;
    }
    opts.threads = static_cast<int>(t);
  }
  return hk::run_app(opts, std::cout, std::cerr);
}
