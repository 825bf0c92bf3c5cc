#pragma once

#include <algorithm>
#include <future>
#include <thread>
#include <vector>

#include "seqgen/artifact.hpp"
#include "seqgen/executor.hpp"
#include "seqgen/verdict.hpp"

namespace seqgen {

/// Re-executes a recorded sequence. An entry precondition that no longer
/// holds, or a step that no longer fits the registry, makes the test
/// inconclusive; oracle violations are errors. Execution stops at the first
/// of either.
inline Verdict run_steps(const Registry& registry, std::uint32_t test_id, const std::vector<CallStep>& steps) {
  Verdict v;
  v.test_id = test_id;
  TestCaseRunner runner(registry);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto out = runner.run(steps[i]);
    if (out.status == StepStatus::Ok) continue;
    v.step = i;
    if (out.status == StepStatus::Violation) {
      v.outcome = Outcome::Error;
      v.error = out.error;
    } else {
      v.outcome = Outcome::Inconclusive;
      v.message = out.status == StepStatus::Drift ? "registry drift: " + out.message : out.message;
    }
    break;
  }
  v.harness_error = run_teardown(registry, runner.pool());
  return v;
}

inline Verdict run_test_case(const Registry& registry, const TestCase& test) {
  return run_steps(registry, test.id, test.steps);
}

struct ReplayOptions {
  bool parallel = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Replays every test case of the artifact. Freezes the registry.
inline GenerationReport replay(const TestArtifact& artifact, Registry& registry, const ReplayOptions& options = {}) {
  registry.freeze();
  GenerationReport report;
  report.seed = artifact.header.seed;
  report.attempts_per_test = artifact.header.attempts_per_test;
  report.verdicts.resize(artifact.tests.size());
  for (const auto& t : artifact.tests) report.calls_emitted.push_back(t.steps.size());

  const Registry& frozen = registry;
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) report.verdicts[i] = run_test_case(frozen, artifact.tests[i]);
  };

  const std::size_t n = artifact.tests.size();
  unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  if (!options.parallel || workers < 2 || n < 2) {
    run_range(0, n);
    return report;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    jobs.push_back(std::async(std::launch::async, run_range, begin, std::min(n, begin + chunk)));
  }
  for (auto& j : jobs) j.get();
  return report;
}

/// True when the artifact was generated against a registry configured
/// exactly like this one.
inline bool digest_matches(const TestArtifact& artifact, const Registry& registry) {
  return artifact.header.registry_digest == registry.digest();
}

}  // namespace seqgen
