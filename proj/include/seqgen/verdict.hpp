#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqgen {

enum class ErrorKind : std::uint8_t { Invariant, Postcondition, InternalPrecondition, UnexpectedException };

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::Postcondition: return "postcondition";
    case ErrorKind::InternalPrecondition: return "internal-precondition";
    case ErrorKind::UnexpectedException: return "unexpected-exception";
  }
  return "?";
}

/// A contract violation detected by the oracle.
struct ErrorInfo {
  ErrorKind kind = ErrorKind::Invariant;
  std::string type;       // class owning the violated contract
  std::string operation;  // operation during which it was detected
  std::string contract;   // label of the violated predicate
  std::string message;
  int depth = 0;  // call nesting level, 0 is the harness call

  /// The part that identifies "the same failure" across replays.
  bool same_failure(const ErrorInfo& other) const {
    return kind == other.kind && type == other.type && operation == other.operation && contract == other.contract;
  }

  friend bool operator==(const ErrorInfo&, const ErrorInfo&) = default;
};

enum class AssertionKind : std::uint8_t { Precondition, Postcondition, Invariant };
enum class Phase : std::uint8_t { Generation, Replay };

enum class FailureClass : std::uint8_t {
  Rejected,      // entry precondition at generation: the call is dropped
  Inconclusive,  // entry precondition at replay
  InternalPrecondition,
  Postcondition,
  Invariant,
};

/// Entry preconditions (depth 0) blame the test, everything else blames the
/// code or its contracts.
constexpr FailureClass classify_assertion_failure(int depth, AssertionKind assertion, Phase phase) {
  switch (assertion) {
    case AssertionKind::Precondition:
      if (depth > 0) return FailureClass::InternalPrecondition;
      return phase == Phase::Generation ? FailureClass::Rejected : FailureClass::Inconclusive;
    case AssertionKind::Postcondition: return FailureClass::Postcondition;
    case AssertionKind::Invariant: return FailureClass::Invariant;
  }
  return FailureClass::Invariant;
}

enum class Outcome : std::uint8_t { Pass, Error, Inconclusive };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Error: return "error";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Verdict {
  std::uint32_t test_id = 0;
  Outcome outcome = Outcome::Pass;
  std::optional<ErrorInfo> error;   // Outcome::Error
  std::optional<std::size_t> step;  // 0-based index of the failing or inconclusive step
  std::string message;              // inconclusive reason
  std::optional<std::string> harness_error;  // teardown failure; never alters the outcome

  /// Outcome, error identity and step; ignores free-form messages.
  bool same_result(const Verdict& o) const {
    if (outcome != o.outcome || step != o.step || error.has_value() != o.error.has_value()) return false;
    return !error || error->same_failure(*o.error);
  }
};

struct OperationStats {
  std::uint64_t selected = 0;  // chosen as the operation of an attempt
  std::uint64_t rejected = 0;  // entry precondition false
  std::uint64_t declined = 0;  // construction refused by the creation probability
  std::uint64_t emitted = 0;   // executed and recorded
};

struct GenerationReport {
  std::uint64_t seed = 0;
  std::uint32_t attempts_per_test = 0;
  std::vector<Verdict> verdicts;            // test-id order
  std::vector<std::size_t> calls_emitted;   // per test
  std::map<std::string, OperationStats> operations;  // keyed by qualified name

  std::size_t tests() const { return verdicts.size(); }
  std::size_t count(Outcome o) const {
    std::size_t n = 0;
    for (const auto& v : verdicts) n += v.outcome == o;
    return n;
  }
  std::size_t errors() const { return count(Outcome::Error); }
  std::size_t inconclusive() const { return count(Outcome::Inconclusive); }
  std::size_t passes() const { return count(Outcome::Pass); }
  std::size_t harness_errors() const {
    std::size_t n = 0;
    for (const auto& v : verdicts) n += v.harness_error.has_value();
    return n;
  }
};

}  // namespace seqgen
