#pragma once

#include <exception>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seqgen/registry.hpp"
#include "seqgen/sequence.hpp"
#include "seqgen/verdict.hpp"

namespace seqgen {

/// Thrown when the oracle detects a violation inside a call. Carries the
/// already-classified error.
class ContractViolation : public std::exception {
 public:
  explicit ContractViolation(ErrorInfo info) : info_(std::move(info)), what_(describe(info_)) {}

  const ErrorInfo& info() const noexcept { return info_; }
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  static std::string describe(const ErrorInfo& e) {
    return std::string(to_string(e.kind)) + " violated in " + e.type + "." + e.operation + ": " + e.contract;
  }

  ErrorInfo info_;
  std::string what_;
};

/// Live instances of the current test case, per type, plus the number of
/// constructions performed for each type.
class ObjectPool {
 public:
  const std::vector<ObjectId>& instances(std::string_view type) const {
    static const std::vector<ObjectId> empty;
    auto it = live_.find(type);
    return it == live_.end() ? empty : it->second;
  }

  std::uint64_t created_count(std::string_view type) const {
    auto it = created_.find(type);
    return it == created_.end() ? 0 : it->second;
  }

  /// Adds the instance unless an object with the same identity is pooled.
  bool admit(std::string_view type, ObjectId id, std::uint64_t identity) {
    if (identity != 0 && !identities_.emplace(identity, id).second) return false;
    auto it = live_.find(type);
    if (it == live_.end()) it = live_.emplace(std::string(type), std::vector<ObjectId>{}).first;
    it->second.push_back(id);
    return true;
  }

  void count_creation(std::string_view type) {
    auto it = created_.find(type);
    if (it == created_.end()) it = created_.emplace(std::string(type), 0).first;
    ++it->second;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [_, ids] : live_) n += ids.size();
    return n;
  }

 private:
  std::map<std::string, std::vector<ObjectId>, std::less<>> live_;
  std::map<std::string, std::uint64_t, std::less<>> created_;
  std::unordered_map<std::uint64_t, ObjectId> identities_;
};

Value checked_call(const Registry& registry, Heap& heap, const TypeUnderTest& type, const OperationSpec& op,
                   Instance* receiver, const std::vector<Value>& args, int depth);

/// Handed to operation bodies. Gives access to the heap and lets a body call
/// other registered operations with full contract checking; preconditions of
/// such nested calls are internal preconditions.
class CallContext {
 public:
  CallContext(const Registry& registry, Heap& heap, int depth) : registry_(registry), heap_(heap), depth_(depth) {}

  /// Nesting level of calls made through this context (1 for calls made by
  /// the body of a harness call).
  int depth() const { return depth_; }

  Heap& heap() { return heap_; }

  template <class T, class... A>
  std::shared_ptr<T> make(A&&... args) {
    return heap_.make<T>(std::forward<A>(args)...);
  }

  /// Runs a registered constructor of `type` whose signature matches `args`.
  template <class T = Instance>
  std::shared_ptr<T> construct(std::string_view type, std::vector<Value> args) {
    const auto& t = registry_.type(type);
    const auto& op = resolve(t, t.constructors, t.name, args);
    auto v = checked_call(registry_, heap_, t, op, nullptr, args, depth_);
    return std::static_pointer_cast<T>(v.as_ref());
  }

  /// Runs a registered method on `receiver`.
  Value invoke(Instance& receiver, std::string_view method, std::vector<Value> args) {
    const auto& t = registry_.type(receiver.type_name());
    const auto& op = resolve(t, t.methods, method, args);
    return checked_call(registry_, heap_, t, op, &receiver, args, depth_);
  }

 private:
  static const OperationSpec& resolve(const TypeUnderTest& t, const std::vector<OperationSpec>& ops,
                                      std::string_view name, const std::vector<Value>& args) {
    for (const auto& op : ops) {
      if (op.name != name || op.signature.size() != args.size()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < args.size() && ok; ++i) ok = args[i].matches(op.signature[i]);
      if (ok) return op;
    }
    throw std::logic_error("no operation " + t.name + "." + std::string(name) + " accepts these arguments");
  }

  const Registry& registry_;
  Heap& heap_;
  int depth_;
};

/// Evaluates one call with its contracts. At depth 0 the caller has already
/// checked the entry precondition; deeper preconditions are checked here and
/// fail as internal preconditions. Order after the body: exception policy,
/// postcondition, invariant of the receiver (or of the constructed object).
inline Value checked_call(const Registry& registry, Heap& heap, const TypeUnderTest& type, const OperationSpec& op,
                          Instance* receiver, const std::vector<Value>& args, int depth) {
  Args view{std::span<const Value>(args)};
  auto fail = [&](ErrorKind kind, std::string contract, std::string message = {}) -> ContractViolation {
    return ContractViolation(ErrorInfo{kind, type.name, op.name, std::move(contract), std::move(message), depth});
  };

  if (depth > 0 && op.precondition) {
    bool ok = false;
    try {
      ok = op.precondition.fn(receiver, view);
    } catch (...) {
    }
    if (!ok) throw fail(ErrorKind::InternalPrecondition, op.precondition.label);
  }

  std::optional<StateSnapshot> old;
  if (receiver != nullptr) old.emplace(snapshot_state(*receiver));
  const auto watermark = heap.watermark();

  Value result;
  bool threw = false;
  try {
    CallContext ctx(registry, heap, depth + 1);
    result = op.body(ctx, receiver, view);
  } catch (const ContractViolation&) {
    throw;
  } catch (...) {
    auto ex = std::current_exception();
    bool allowed = false;
    if (op.exceptions.fn) {
      try {
        allowed = op.exceptions.fn(ex);
      } catch (...) {
      }
    }
    if (!allowed) {
      std::string what = "non-standard exception";
      try {
        std::rethrow_exception(ex);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      throw fail(ErrorKind::UnexpectedException, op.exceptions.label, what);
    }
    threw = true;
  }

  const Instance* self = receiver;
  if (op.is_constructor() && !threw) {
    if (!result.is_reference() || result.is_null()) {
      throw fail(ErrorKind::UnexpectedException, op.exceptions.label, "constructor produced no object");
    }
    self = result.as_ref().get();
  }

  if (!threw && op.postcondition) {
    PostState post{old ? &old->get() : nullptr, self, view, &result, watermark};
    bool ok = false;
    try {
      ok = op.postcondition.fn(post);
    } catch (...) {
    }
    if (!ok) throw fail(ErrorKind::Postcondition, op.postcondition.label);
  }

  if (self != nullptr && type.invariant) {
    bool ok = false;
    try {
      ok = type.invariant.fn(*self);
    } catch (...) {
    }
    if (!ok) throw fail(ErrorKind::Invariant, type.invariant.label);
  }
  return result;
}

enum class StepStatus : std::uint8_t {
  Ok,
  PreconditionFailed,  // entry precondition false; nothing executed
  Violation,           // oracle detected an error
  Drift,               // the step no longer fits the registry or the bindings
};

struct StepOutcome {
  StepStatus status = StepStatus::Ok;
  std::optional<ErrorInfo> error;
  std::string message;
  Value result;
};

/// Executes recorded steps one at a time against a registry, keeping the
/// bindings and the object pool of one test case.
class TestCaseRunner {
 public:
  explicit TestCaseRunner(const Registry& registry) : registry_(registry) {}

  StepOutcome run(const CallStep& step) {
    const auto* type = registry_.find_type(step.type);
    if (!type) return drift("unknown type '" + step.type + "'");
    const auto* op = registry_.find_operation(step.type, step.kind, step.operation, step.signature);
    if (!op) return drift("unknown operation " + step.qualified_name());
    if (op->signature.size() != step.args.size()) return drift("arity mismatch for " + step.qualified_name());
    if (op->is_constructor() == step.receiver.has_value()) return drift("receiver mismatch for " + step.qualified_name());

    InstanceRef receiver;
    if (step.receiver) {
      const auto* v = lookup(*step.receiver);
      if (!v) return drift("receiver " + step.receiver->str() + " is not bound");
      if (!v->is_reference() || v->is_null()) return drift("receiver " + step.receiver->str() + " is null");
      if (v->as_ref()->type_name() != type->name) return drift("receiver " + step.receiver->str() + " has another type");
      receiver = v->as_ref();
    }

    std::vector<Value> args;
    args.reserve(step.args.size());
    for (std::size_t i = 0; i < step.args.size(); ++i) {
      Value v;
      if (const auto* id = std::get_if<ObjectId>(&step.args[i])) {
        const auto* bound = lookup(*id);
        if (!bound) return drift("argument " + id->str() + " is not bound");
        v = *bound;
      } else if (const auto* n = std::get_if<std::int32_t>(&step.args[i])) {
        v = Value::int32(*n);
      } else if (const auto* b = std::get_if<bool>(&step.args[i])) {
        v = Value::boolean(*b);
      } else {
        v = Value::null();
      }
      if (!v.matches(op->signature[i])) {
        return drift("argument " + std::to_string(i) + " of " + step.qualified_name() + " is " + v.kind_name());
      }
      args.push_back(std::move(v));
    }

    bool admitted = true;
    if (op->precondition) {
      try {
        admitted = op->precondition.fn(receiver.get(), Args{std::span<const Value>(args)});
      } catch (...) {
        admitted = false;
      }
    }
    if (!admitted) {
      StepOutcome out;
      out.status = StepStatus::PreconditionFailed;
      out.message = "entry precondition of " + step.qualified_name() + " is false: " + op->precondition.label;
      return out;
    }

    StepOutcome out;
    try {
      out.result = checked_call(registry_, heap_, *type, *op, receiver.get(), args, 0);
    } catch (const ContractViolation& v) {
      out.status = StepStatus::Violation;
      out.error = v.info();
      out.message = v.what();
      return out;
    }

    if (op->is_constructor()) pool_.count_creation(type->name);
    if (step.result && !out.result.is_void()) {
      bindings_[step.result->id] = out.result;
      if (next_id_ <= step.result->id.value) next_id_ = step.result->id.value + 1;
      if (out.result.is_reference() && !out.result.is_null()) {
        const auto& obj = out.result.as_ref();
        pool_.admit(obj->type_name(), step.result->id, obj->identity());
      }
    }
    return out;
  }

  const Value* lookup(ObjectId id) const {
    auto it = bindings_.find(id);
    return it == bindings_.end() ? nullptr : &it->second;
  }

  /// The id the next binding should use.
  ObjectId next_id() const { return ObjectId{next_id_}; }

  const ObjectPool& pool() const { return pool_; }
  const Registry& registry() const { return registry_; }
  Heap& heap() { return heap_; }

 private:
  static StepOutcome drift(std::string message) {
    StepOutcome out;
    out.status = StepStatus::Drift;
    out.message = std::move(message);
    return out;
  }

  const Registry& registry_;
  Heap heap_;
  std::map<ObjectId, Value> bindings_;
  ObjectPool pool_;
  std::uint32_t next_id_ = 1;
};

/// Runs the registry's teardown, if any. Returns the failure message when it
/// throws.
inline std::optional<std::string> run_teardown(const Registry& registry, const ObjectPool& pool) {
  const auto& fixture = registry.fixture();
  if (!fixture || !fixture->teardown) return std::nullopt;
  try {
    fixture->teardown(pool);
  } catch (const std::exception& e) {
    return "teardown of " + fixture->label + " failed: " + e.what();
  } catch (...) {
    return "teardown of " + fixture->label + " failed";
  }
  return std::nullopt;
}

}  // namespace seqgen
