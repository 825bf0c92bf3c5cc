// Generates tests for the bank classes, prints the error report and the
// shrunk form of the first failing test case.

#include <cstdlib>
#include <iostream>

#include "seqgen/corpus/bank.hpp"
#include "seqgen/seqgen.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;

  seqgen::Registry registry;
  seqgen::corpus::register_bank(registry);
  registry.change_creation_probability("Account", seqgen::threshold_probability(1));

  seqgen::GenerateOptions options;
  options.name = "BankTest";
  options.corpus = "bank";
  options.seed = seed;
  auto [artifact, report] = seqgen::generate(registry, options);
  std::cout << seqgen::render_report(report);

  for (const auto& v : report.verdicts) {
    if (v.outcome != seqgen::Outcome::Error) continue;
    const auto* test = artifact.find(v.test_id);
    const auto result = seqgen::shrink(*test, registry);
    std::cout << "\n// test" << v.test_id << ": " << result.original_length << " -> " << result.minimal_length
              << " steps\n"
              << seqgen::render_test_source({result.test_id, result.steps});
    break;
  }
  return 0;
}
