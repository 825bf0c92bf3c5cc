#pragma once

// Command-line binding of the library: generate, replay, shrink, render.
// Exit codes: 0 no error found, 1 at least one error verdict, 2 bad
// configuration or input.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqgen/corpus/catalog.hpp"
#include "seqgen/seqgen.hpp"

namespace seqgen::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitErrors = 1;
inline constexpr int kExitConfig = 2;

struct Overrides {
  std::vector<std::string> weights;     // SELECTOR=W
  std::vector<std::string> thresholds;  // TYPE=S
  std::vector<std::string> constants;   // TYPE=P
};

inline std::pair<std::string, std::string> split_assignment(const std::string& text, const char* what) {
  const auto eq = text.rfind('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError(std::string("malformed ") + what + " '" + text + "', expected NAME=VALUE");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

inline double parse_number(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw ConfigError(std::string("malformed ") + what + " '" + text + "'");
  return v;
}

/// Selectors: "Type" (class weight), "Type.*" (all methods), "Type.name"
/// (all overloads), "Type.name(int,History)" (one overload). A name equal
/// to the type name selects constructors.
inline void apply_weight(Registry& registry, const std::string& assignment) {
  const auto [selector, value] = split_assignment(assignment, "weight");
  const double weight = parse_number(value, "weight");
  const auto dot = selector.find('.');
  if (dot == std::string::npos) {
    registry.set_type_weight(selector, weight);
    return;
  }
  const std::string type = selector.substr(0, dot);
  std::string name = selector.substr(dot + 1);
  std::optional<std::vector<std::string>> signature;
  if (const auto open = name.find('('); open != std::string::npos) {
    if (name.back() != ')') throw ConfigError("malformed selector '" + selector + "'");
    const std::string inner = name.substr(open + 1, name.size() - open - 2);
    name = name.substr(0, open);
    signature.emplace();
    std::stringstream parts(inner);
    for (std::string part; std::getline(parts, part, ',');) {
      if (part.empty()) throw ConfigError("malformed selector '" + selector + "'");
      signature->push_back(part);
    }
  }
  if (name == "*") {
    registry.change_all_methods_weight(type, weight);
  } else if (name == type) {
    registry.change_constructor_weight(type, signature, weight);
  } else if (signature) {
    registry.change_method_weight(type, name, *signature, weight);
  } else {
    registry.change_method_weight(type, name, weight);
  }
}

inline void apply_overrides(Registry& registry, const Overrides& o) {
  for (const auto& w : o.weights) apply_weight(registry, w);
  for (const auto& t : o.thresholds) {
    const auto [type, value] = split_assignment(t, "threshold");
    const double s = parse_number(value, "threshold");
    if (s != static_cast<double>(static_cast<std::int64_t>(s))) throw ConfigError("threshold must be an integer");
    registry.change_creation_probability(type, threshold_probability(static_cast<std::int64_t>(s)));
  }
  for (const auto& c : o.constants) {
    const auto [type, value] = split_assignment(c, "creation probability");
    registry.change_creation_probability(type, constant_probability(parse_number(value, "creation probability")));
  }
}

inline Registry build_registry(const std::string& corpus_name, const Overrides& overrides) {
  const auto* entry = corpus::find_corpus(corpus_name);
  if (!entry) {
    std::string known;
    for (const auto& e : corpus::catalog()) known += (known.empty() ? "" : ", ") + e.name;
    throw ConfigError("unknown corpus '" + corpus_name + "' (known: " + known + ")");
  }
  Registry registry;
  entry->install(registry);
  apply_overrides(registry, overrides);
  return registry;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArtifactError("cannot open '" + path.string() + "' for writing");
  out << text;
}

inline void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--weight", o.weights, "Weight override SELECTOR=W (Type, Type.*, Type.method, Type.method(int))");
  cmd->add_option("--threshold", o.thresholds, "At most S instances: TYPE=S");
  cmd->add_option("--constant", o.constants, "Creation probability p for n >= 1: TYPE=P");
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random generation, replay and shrinking of contract-checked call sequences"};
  app.set_config("--config", "", "Configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  struct {
    std::string corpus = "bank";
    std::string name = "Tests";
    std::int64_t tests = 100;
    std::int64_t attempts = 50;
    std::uint64_t seed = 0;
    std::string out = "tests.json";
    bool timestamp = false;
    Overrides overrides;
  } gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a test artifact");
  generate_cmd->add_option("--corpus", gen.corpus, "Corpus name")->capture_default_str();
  generate_cmd->add_option("--name", gen.name, "Artifact name")->capture_default_str();
  generate_cmd->add_option("--tests", gen.tests, "Number of test cases")->capture_default_str();
  generate_cmd->add_option("--attempts", gen.attempts, "Call attempts per test case")->capture_default_str();
  generate_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate_cmd->add_option("--out", gen.out, "Artifact path; the report goes to PATH.report.txt")->capture_default_str();
  generate_cmd->add_flag("--timestamp", gen.timestamp, "Record the creation time in the header");
  add_overrides(generate_cmd, gen.overrides);

  struct {
    std::string artifact;
    std::string corpus;
    bool parallel = false;
    Overrides overrides;
  } rep;
  auto* replay_cmd = app.add_subcommand("replay", "Replay an artifact against a corpus");
  replay_cmd->add_option("artifact", rep.artifact, "Artifact path")->required();
  replay_cmd->add_option("--corpus", rep.corpus, "Corpus name (default: the one recorded in the artifact)");
  replay_cmd->add_flag("--parallel", rep.parallel, "Replay test cases concurrently");
  add_overrides(replay_cmd, rep.overrides);

  struct {
    std::string artifact;
    std::string corpus;
    std::uint32_t test = 0;
    std::size_t budget = 10000;
    std::string out;
    bool arguments = false;
    Overrides overrides;
  } shr;
  auto* shrink_cmd = app.add_subcommand("shrink", "Reduce a failing test case to a 1-minimal sequence");
  shrink_cmd->add_option("artifact", shr.artifact, "Artifact path")->required();
  shrink_cmd->add_option("--test", shr.test, "Test id")->required();
  shrink_cmd->add_option("--budget", shr.budget, "Maximum candidate executions")->capture_default_str();
  shrink_cmd->add_option("--out", shr.out, "Output artifact (default: ARTIFACT.testN.min.json)");
  shrink_cmd->add_option("--corpus", shr.corpus, "Corpus name (default: the one recorded in the artifact)");
  shrink_cmd->add_flag("--arguments", shr.arguments, "Also move int arguments toward 0");
  add_overrides(shrink_cmd, shr.overrides);

  struct {
    std::string artifact;
    std::optional<std::uint32_t> test;
  } ren;
  auto* render_cmd = app.add_subcommand("render", "Print test cases as source listings");
  render_cmd->add_option("artifact", ren.artifact, "Artifact path")->required();
  render_cmd->add_option("--test", ren.test, "Only this test id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitClean : kExitConfig;
  }

  try {
    if (*generate_cmd) {
      auto registry = build_registry(gen.corpus, gen.overrides);
      GenerateOptions options;
      options.name = gen.name;
      options.corpus = gen.corpus;
      options.tests = gen.tests;
      options.attempts_per_test = gen.attempts;
      options.seed = gen.seed;
      if (gen.timestamp) options.created = utc_timestamp();
      auto [artifact, report] = generate(registry, options);
      write_artifact(artifact, gen.out);
      const auto text = render_report(report);
      write_text(gen.out + ".report.txt", text);
      out << text;
      return report.errors() > 0 ? kExitErrors : kExitClean;
    }

    if (*replay_cmd) {
      const auto artifact = read_artifact(rep.artifact);
      auto registry = build_registry(rep.corpus.empty() ? artifact.header.corpus : rep.corpus, rep.overrides);
      if (!digest_matches(artifact, registry)) {
        out << "WARNING: registry digest " << registry.digest() << " differs from the artifact's "
            << artifact.header.registry_digest << "; contracts or configuration changed since generation.\n";
      }
      ReplayOptions options;
      options.parallel = rep.parallel;
      const auto report = replay(artifact, registry, options);
      out << render_report(report);
      if (report.inconclusive() > 0) {
        const double ratio = 100.0 * static_cast<double>(report.inconclusive()) / static_cast<double>(report.tests());
        out << "WARNING: " << report.inconclusive() << " of " << report.tests() << " tests are inconclusive ("
            << std::fixed << std::setprecision(1) << ratio << "%).";
        if (ratio > 50.0) {
          out << " The test file is no longer relevant; regenerate it.";
        } else {
          out << " A high number of inconclusive tests indicates that the test file is no longer relevant.";
        }
        out << "\n";
      }
      return report.errors() > 0 ? kExitErrors : kExitClean;
    }

    if (*shrink_cmd) {
      const auto artifact = read_artifact(shr.artifact);
      const auto* test = artifact.find(shr.test);
      if (!test) {
        err << "no test" << shr.test << " in " << shr.artifact << "\n";
        return kExitConfig;
      }
      auto registry = build_registry(shr.corpus.empty() ? artifact.header.corpus : shr.corpus, shr.overrides);
      registry.freeze();
      ShrinkOptions options;
      options.budget = shr.budget;
      options.shrink_arguments = shr.arguments;
      const auto result = shrink(*test, registry, options);

      TestArtifact minimal;
      minimal.header = artifact.header;
      minimal.header.name = artifact.header.name + "-test" + std::to_string(shr.test) + "-min";
      minimal.tests.push_back(TestCase{result.test_id, result.steps});
      const std::string path = shr.out.empty() ? shr.artifact + ".test" + std::to_string(shr.test) + ".min.json" : shr.out;
      write_artifact(minimal, path);

      out << "Shrunk test" << result.test_id << " from " << result.original_length << " to " << result.minimal_length
          << " steps in " << result.iterations << " executions";
      if (result.budget_exhausted) out << " (budget exhausted, result may not be 1-minimal)";
      out << "\nFailure: " << to_string(result.failure.kind) << " \"" << result.failure.contract << "\" of class \""
          << result.failure.type << "\" in " << result.failure.operation << "\n";
      out << "// Test case number " << result.test_id << "\n" << render_test_source(minimal.tests.front());
      out << "Written to " << path << "\n";
      return kExitClean;
    }

    if (*render_cmd) {
      const auto artifact = read_artifact(ren.artifact);
      bool any = false;
      for (const auto& t : artifact.tests) {
        if (ren.test && t.id != *ren.test) continue;
        any = true;
        out << "// Test case number " << t.id << "\n" << render_test_source(t);
      }
      if (ren.test && !any) {
        err << "no test" << *ren.test << " in " << ren.artifact << "\n";
        return kExitConfig;
      }
      return kExitClean;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GenerationError& e) {
    err << "generation error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArtifactError& e) {
    err << "artifact error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShrinkError& e) {
    err << "shrink refused: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace seqgen::cli
