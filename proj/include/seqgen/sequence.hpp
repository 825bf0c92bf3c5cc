#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seqgen/contract.hpp"

namespace seqgen {

/// Name of a value bound by an earlier step; serialized as "ob<k>".
struct ObjectId {
  std::uint32_t value = 0;

  std::string str() const { return "ob" + std::to_string(value); }

  static std::optional<ObjectId> parse(std::string_view s) {
    if (s.size() < 3 || s.substr(0, 2) != "ob") return std::nullopt;
    std::uint32_t v = 0;
    const auto* first = s.data() + 2;
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || v == 0 || *first == '0') return std::nullopt;
    return ObjectId{v};
  }

  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

struct NullLiteral {
  friend bool operator==(NullLiteral, NullLiteral) = default;
};

/// A recorded argument: a literal or a reference to an earlier binding.
using Argument = std::variant<NullLiteral, std::int32_t, bool, ObjectId>;

/// The variable a step's result is bound to, with its declared type.
struct Binding {
  ObjectId id;
  std::string type;  // "int", "boolean" or a type name

  friend bool operator==(const Binding&, const Binding&) = default;
};

struct CallStep {
  OperationKind kind = OperationKind::Method;
  std::string type;
  std::string operation;
  std::vector<std::string> signature;
  std::optional<ObjectId> receiver;  // methods only
  std::vector<Argument> args;
  std::optional<Binding> result;  // non-void results
  bool fixture = false;            // part of the fixture preamble

  /// Every object id the step reads.
  std::vector<ObjectId> uses() const {
    std::vector<ObjectId> out;
    if (receiver) out.push_back(*receiver);
    for (const auto& a : args) {
      if (const auto* id = std::get_if<ObjectId>(&a)) out.push_back(*id);
    }
    return out;
  }

  std::string qualified_name() const { return type + "." + operation + "(" + signature_string(signature) + ")"; }

  friend bool operator==(const CallStep&, const CallStep&) = default;
};

struct TestCase {
  std::uint32_t id = 0;
  std::vector<CallStep> steps;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

/// Returns the index of the first step that reads an id not bound by an
/// earlier step, or nothing when the sequence is referentially intact.
inline std::optional<std::size_t> first_unbound_use(const std::vector<CallStep>& steps) {
  std::vector<ObjectId> bound;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& id : steps[i].uses()) {
      bool found = false;
      for (const auto& b : bound) found = found || b == id;
      if (!found) return i;
    }
    if (steps[i].result) bound.push_back(steps[i].result->id);
  }
  return std::nullopt;
}

}  // namespace seqgen
