// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.
//   slaterec_acceptance --suite tabular|simulator [--criterion N] [--out DIR]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slaterec/harness/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string suite;
  int criterion = 0;
  std::string out = "accept_out";
  app.add_option("--suite", suite, "tabular | simulator")->required();
  app.add_option("--criterion", criterion, "run only this criterion");
  app.add_option("--out", out, "scratch directory for end-to-end runs");
  CLI11_PARSE(app, argc, argv);

  namespace h = slaterec::harness;
  h::AcceptanceContext ctx;
  ctx.out_root = out;
  try {
    const auto criteria = h::criteria_for_suite(suite);
    bool all = true;
    bool ran = false;
    for (const auto& [id, fn] : criteria) {
      if (criterion != 0 && id != criterion) continue;
      const auto r = h::run_criterion(fn, id, ctx);
      std::cout << h::format_result(r) << std::endl;
      all = all && r.passed;
      ran = true;
    }
    if (!ran) {
      std::cerr << "criterion " << criterion << " is not part of suite " << suite << "\n";
      return 1;
    }
    return all ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
