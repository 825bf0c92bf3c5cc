#pragma once

#include <sstream>
#include <string>

#include "seqgen/sequence.hpp"
#include "seqgen/verdict.hpp"

namespace seqgen {

inline std::string render_error_line(std::size_t ordinal, const Verdict& v) {
  std::ostringstream out;
  out << ordinal << ") Error detected in test" << v.test_id;
  if (v.step) out << " at call " << (*v.step + 1);
  out << ": ";
  if (!v.error) return out.str() + "unknown error";
  const auto& e = *v.error;
  switch (e.kind) {
    case ErrorKind::UnexpectedException:
      out << "unexpected-exception \"" << e.message << "\" escaped method \"" << e.operation << "\" of class \""
          << e.type << "\" [" << e.contract << "]";
      break;
    case ErrorKind::InternalPrecondition:
      out << "internal-precondition \"" << e.contract << "\" of class \"" << e.type << "\" violated by method \""
          << e.operation << "@pre\"";
      break;
    default:
      out << to_string(e.kind) << " \"" << e.contract << "\" of class \"" << e.type << "\" violated by method \""
          << e.operation << "@post\"";
      break;
  }
  return out.str();
}

/// One line per error, one per harness failure, then the three summary
/// lines: tests, errors, inconclusive tests.
inline std::string render_report(const GenerationReport& report) {
  std::ostringstream out;
  std::size_t ordinal = 0;
  for (const auto& v : report.verdicts) {
    if (v.outcome == Outcome::Error) out << render_error_line(++ordinal, v) << "\n";
  }
  for (const auto& v : report.verdicts) {
    if (v.harness_error) out << "Harness error in test" << v.test_id << ": " << *v.harness_error << "\n";
  }
  out << "Number of tests: " << report.tests() << "\n";
  out << "Number of errors: " << report.errors() << "\n";
  out << "Number of inconclusive tests: " << report.inconclusive() << "\n";
  return out.str();
}

inline std::string render_argument(const Argument& a) {
  if (const auto* id = std::get_if<ObjectId>(&a)) return id->str();
  if (const auto* n = std::get_if<std::int32_t>(&a)) return std::to_string(*n);
  if (const auto* b = std::get_if<bool>(&a)) return *b ? "true" : "false";
  return "null";
}

inline std::string render_step(const CallStep& s) {
  std::string args;
  for (std::size_t i = 0; i < s.args.size(); ++i) {
    if (i) args += ", ";
    args += render_argument(s.args[i]);
  }
  std::string lhs;
  if (s.result) lhs = s.result->type + " " + s.result->id.str() + " = ";
  if (s.kind == OperationKind::Constructor) return lhs + "new " + s.type + "(" + args + ");";
  return lhs + (s.receiver ? s.receiver->str() : std::string("?")) + "." + s.operation + "(" + args + ");";
}

/// Java-like listing of a test case, one statement per line.
inline std::string render_test_source(const TestCase& test) {
  std::string out;
  for (const auto& s : test.steps) out += render_step(s) + "\n";
  return out;
}

}  // namespace seqgen
