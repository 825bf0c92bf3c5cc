#pragma once

// Helpers shared by the unit tests and the acceptance binary: step
// construction, the three known bank failures as literal sequences, and an
// error-class oracle that reads the sequence rather than the engine.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqgen/corpus/bank.hpp"
#include "seqgen/seqgen.hpp"

namespace seqgen::testing {

inline CallStep ctor(std::string type, std::vector<std::string> sig, std::vector<Argument> args, std::uint32_t bind) {
  CallStep s;
  s.kind = OperationKind::Constructor;
  s.operation = type;
  s.type = std::move(type);
  s.signature = std::move(sig);
  s.args = std::move(args);
  s.result = Binding{ObjectId{bind}, s.type};
  return s;
}

inline CallStep call(std::string type, std::string op, std::vector<std::string> sig, std::uint32_t receiver,
                     std::vector<Argument> args = {}, std::optional<Binding> result = std::nullopt) {
  CallStep s;
  s.kind = OperationKind::Method;
  s.type = std::move(type);
  s.operation = std::move(op);
  s.signature = std::move(sig);
  s.receiver = ObjectId{receiver};
  s.args = std::move(args);
  s.result = std::move(result);
  return s;
}

inline CallStep account(std::int32_t balance, std::int32_t min, std::uint32_t bind) {
  return ctor("Account", {"int", "int"}, {balance, min}, bind);
}
inline CallStep credit(std::uint32_t acc, std::int32_t amount) { return call("Account", "credit", {"int"}, acc, {amount}); }
inline CallStep debit(std::uint32_t acc, std::int32_t amount) { return call("Account", "debit", {"int"}, acc, {amount}); }
inline CallStep set_min(std::uint32_t acc, std::int32_t min) { return call("Account", "setMin", {"int"}, acc, {min}); }
inline CallStep cancel(std::uint32_t acc) { return call("Account", "cancel", {}, acc); }
inline CallStep get_balance(std::uint32_t acc, std::uint32_t bind) {
  return call("Account", "getBalance", {}, acc, {}, Binding{ObjectId{bind}, "int"});
}
inline CallStep history(std::int32_t balance, std::optional<std::uint32_t> prec, std::uint32_t bind) {
  return ctor("History", {"int", "History"}, {balance, prec ? Argument{ObjectId{*prec}} : Argument{NullLiteral{}}}, bind);
}

/// Credit overflow: 250000000 + 2000000000 wraps to a negative balance.
inline TestCase error1_listing() { return {1, {account(250000000, 0, 1), credit(1, 2000000000)}}; }

/// Cancel after raising the minimum restores a balance below it.
inline TestCase error2_listing() {
  return {2, {account(-50, -100, 1), credit(1, 100), set_min(1, 0), cancel(1)}};
}

/// Debit overflow to a positive balance, then the cancel of Error 2.
inline TestCase error3_listing() {
  return {3, {account(-1500000000, -2000000000, 1), debit(1, 800000000), set_min(1, 0), cancel(1)}};
}

inline Registry bank_registry(const corpus::BankOptions& options = {}) {
  Registry r;
  corpus::register_bank(r, options);
  r.freeze();
  return r;
}

enum class BankErrorClass { CreditOverflow, SetMinCancel, DebitOverflowCancel, Other };

inline const char* to_string(BankErrorClass c) {
  switch (c) {
    case BankErrorClass::CreditOverflow: return "credit-overflow";
    case BankErrorClass::SetMinCancel: return "setMin-cancel";
    case BankErrorClass::DebitOverflowCancel: return "debit-overflow-cancel";
    case BankErrorClass::Other: return "other";
  }
  return "?";
}

/// Classifies an error verdict by violated contract and triggering
/// operation. For a failing cancel the sequence is walked to find which
/// operation pushed the history entry being undone: without overflow a debit
/// leaves a balance above the restored one, so only an overflowing debit can
/// be undone into a violation.
inline BankErrorClass classify_bank_error(const TestCase& test, const Verdict& v) {
  if (v.outcome != Outcome::Error || !v.error || !v.step) return BankErrorClass::Other;
  const auto& e = *v.error;
  if (e.kind != ErrorKind::Invariant || e.type != "Account") return BankErrorClass::Other;
  if (e.operation == "credit") return BankErrorClass::CreditOverflow;
  if (e.operation != "cancel") return BankErrorClass::Other;

  std::map<std::uint32_t, std::vector<std::string>> undo;
  for (std::size_t i = 0; i < *v.step; ++i) {
    const auto& s = test.steps[i];
    if (s.type != "Account" || !s.receiver) continue;
    auto& stack = undo[s.receiver->value];
    if (s.operation == "credit" || s.operation == "debit") stack.push_back(s.operation);
    if (s.operation == "cancel" && !stack.empty()) stack.pop_back();
  }
  const auto& stack = undo[test.steps[*v.step].receiver->value];
  if (stack.empty()) return BankErrorClass::Other;
  return stack.back() == "debit" ? BankErrorClass::DebitOverflowCancel : BankErrorClass::SetMinCancel;
}

/// Structurally valid artifact with arbitrary contents: every id a step
/// reads was bound by an earlier step of the same test case.
inline TestArtifact random_artifact(Rng& rng) {
  static const std::vector<std::string> kTypes = {"Account", "History", "T\u00e9st \"q\"", "x"};
  TestArtifact a;
  a.header.name = "random-" + std::to_string(rng.below(1000));
  a.header.corpus = rng.coin() ? "bank" : "";
  a.header.seed = rng.next_u64();
  a.header.attempts_per_test = static_cast<std::uint32_t>(rng.below(1u << 20));
  a.header.registry_digest = std::to_string(rng.next_u64());
  a.header.rng = std::string(Rng::kId);
  if (rng.coin()) a.header.created = "2026-01-0" + std::to_string(1 + rng.below(9)) + "T00:00:00Z";
  const auto tests = rng.below(6);
  for (std::uint32_t t = 0; t < tests; ++t) {
    TestCase tc;
    tc.id = static_cast<std::uint32_t>(rng.below(100000)) + 1;
    std::vector<ObjectId> bound;
    std::uint32_t next = 1;
    const auto steps = rng.below(12);
    for (std::uint64_t k = 0; k < steps; ++k) {
      CallStep s;
      s.kind = bound.empty() || rng.coin() ? OperationKind::Constructor : OperationKind::Method;
      s.type = kTypes[rng.below(kTypes.size())];
      s.operation = s.kind == OperationKind::Constructor ? s.type : "op" + std::to_string(rng.below(4));
      if (s.kind == OperationKind::Method) s.receiver = bound[rng.below(bound.size())];
      const auto arity = rng.below(4);
      for (std::uint64_t i = 0; i < arity; ++i) {
        switch (rng.below(4)) {
          case 0: s.args.emplace_back(NullLiteral{}); s.signature.push_back(s.type); break;
          case 1: s.args.emplace_back(rng.int32()); s.signature.push_back("int"); break;
          case 2: s.args.emplace_back(rng.coin()); s.signature.push_back("boolean"); break;
          default:
            if (bound.empty()) {
              s.args.emplace_back(std::int32_t{0});
              s.signature.push_back("int");
            } else {
              s.args.emplace_back(bound[rng.below(bound.size())]);
              s.signature.push_back("History");
            }
        }
      }
      if (s.kind == OperationKind::Constructor || rng.coin()) {
        s.result = Binding{ObjectId{next++}, rng.coin() ? "int" : s.type};
        bound.push_back(s.result->id);
      }
      s.fixture = rng.below(5) == 0;
      tc.steps.push_back(std::move(s));
    }
    a.tests.push_back(std::move(tc));
  }
  return a;
}

/// Error 2 hidden among unrelated steps on two other accounts and a
/// history chain.
inline TestCase embedded_error2() {
  std::vector<CallStep> s;
  s.push_back(account(5000, 0, 1));
  s.push_back(account(-50, -100, 2));
  s.push_back(history(7, std::nullopt, 3));
  s.push_back(account(800, 100, 4));
  std::uint32_t next = 5;
  for (int i = 0; i < 20; ++i) {
    s.push_back(credit(1, 10 + i));
    s.push_back(get_balance(4, next++));
    if (i == 8) s.push_back(credit(2, 100));
    if (i == 14) s.push_back(set_min(2, 0));
  }
  s.push_back(get_balance(1, next++));
  s.push_back(history(11, 3, next++));
  s.push_back(debit(4, 3));
  s.push_back(cancel(2));
  return {9, s};
}

/// Error 2 on a fresh account whose four steps sit at random positions of a
/// `length`-step sequence, the cancel last. Filler works on other accounts
/// and histories, plus pure reads of the target, and never fails.
inline TestCase random_embedded_error2(Rng& rng, std::size_t length = 50) {
  std::vector<std::size_t> slots(length - 1);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  for (std::size_t i = 0; i < 3; ++i) std::swap(slots[i], slots[i + rng.below(slots.size() - i)]);
  std::vector<std::size_t> key(slots.begin(), slots.begin() + 3);
  std::sort(key.begin(), key.end());

  std::vector<CallStep> s;
  std::uint32_t next = 1;
  std::uint32_t target = 0;
  std::vector<std::uint32_t> others;
  std::vector<std::uint32_t> histories;
  for (std::size_t pos = 0; pos + 1 < length; ++pos) {
    if (pos == key[0]) {
      target = next;
      s.push_back(account(-50, -100, next++));
      continue;
    }
    if (pos == key[1]) {
      s.push_back(credit(target, 100));
      continue;
    }
    if (pos == key[2]) {
      s.push_back(set_min(target, 0));
      continue;
    }
    const auto pick = others.empty() ? 0 : rng.below(6);
    if (pick == 0) {
      others.push_back(next);
      s.push_back(account(static_cast<std::int32_t>(1000000 + rng.below(1000)), 0, next++));
    } else if (pick == 1) {
      s.push_back(credit(others[rng.below(others.size())], static_cast<std::int32_t>(rng.below(1000))));
    } else if (pick == 2) {
      s.push_back(debit(others[rng.below(others.size())], static_cast<std::int32_t>(rng.below(100))));
    } else if (pick == 3) {
      std::optional<std::uint32_t> prec;
      if (!histories.empty() && rng.coin()) prec = histories[rng.below(histories.size())];
      histories.push_back(next);
      s.push_back(history(rng.int32(), prec, next++));
    } else if (pick == 4 && target != 0) {
      s.push_back(get_balance(target, next++));
    } else {
      s.push_back(get_balance(others[rng.below(others.size())], next++));
    }
  }
  s.push_back(cancel(target));
  return {1, s};
}

/// Reference account over int64 with an explicit undo stack.
struct ModelAccount {
  std::int64_t balance;
  std::int64_t min;
  std::vector<std::int64_t> undo;
};

}  // namespace seqgen::testing
