#pragma once

#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "seqgen/value.hpp"

namespace seqgen {

class CallContext;

/// What a postcondition can see: the receiver's pre-state snapshot, the
/// post-state, the arguments and the result.
struct PostState {
  const Instance* old = nullptr;   // null for constructors
  const Instance* self = nullptr;  // receiver after the call, or the constructed object
  Args args{std::span<const Value>{}};
  const Value* result = nullptr;
  std::uint64_t watermark = 0;  // heap watermark when the call started

  /// True when `obj` was created during the call.
  bool fresh(const Instance* obj) const { return obj != nullptr && obj->identity() > watermark; }
};

using PreconditionFn = std::function<bool(const Instance* self, const Args& args)>;
using PostconditionFn = std::function<bool(const PostState& post)>;
using InvariantFn = std::function<bool(const Instance& self)>;
using BodyFn = std::function<Value(CallContext& ctx, Instance* self, const Args& args)>;
/// Returns true when the escaping exception is permitted by the contract.
using ExceptionPolicyFn = std::function<bool(std::exception_ptr)>;

/// A contract predicate and the label used to report it.
template <class Fn>
struct Contract {
  std::string label;
  Fn fn;

  explicit operator bool() const { return static_cast<bool>(fn); }
};

enum class OperationKind : std::uint8_t { Constructor, Method };

inline std::string_view to_string(OperationKind k) {
  return k == OperationKind::Constructor ? "construct" : "invoke";
}

struct OperationSpec {
  std::string name;
  OperationKind kind = OperationKind::Method;
  std::vector<ValueKind> signature;
  std::optional<ValueKind> returns;  // empty for void methods
  bool pure = false;
  double weight = 1.0;
  Contract<PreconditionFn> precondition{"true", {}};
  Contract<PostconditionFn> postcondition{"true", {}};
  // Empty policy: no exception may escape.
  Contract<ExceptionPolicyFn> exceptions{"signals (Exception) false", {}};
  BodyFn body;

  bool is_constructor() const { return kind == OperationKind::Constructor; }

  std::vector<std::string> signature_names() const {
    std::vector<std::string> out;
    out.reserve(signature.size());
    for (const auto& k : signature) out.push_back(k.name());
    return out;
  }

  /// "Account.debit(int)"
  std::string qualified_name(std::string_view type) const {
    return std::string(type) + "." + name + "(" + signature_string(signature) + ")";
  }
};

/// Probability of constructing a new instance when `n` instances of the type
/// were already created in the current test case. f(0) must be 1.
class CreationProbability {
 public:
  CreationProbability(std::string id, std::function<double(std::uint64_t)> fn)
      : id_(std::move(id)), fn_(std::move(fn)) {}

  double operator()(std::uint64_t n) const { return fn_(n); }

  /// Stable identity, recorded in the registry digest.
  const std::string& id() const { return id_; }

 private:
  std::string id_;
  std::function<double(std::uint64_t)> fn_;
};

/// 1 below the threshold, 0 at or above it: at most `s` instances.
inline CreationProbability threshold_probability(std::int64_t s) {
  if (s < 1) throw ConfigError("threshold probability needs a threshold >= 1, got " + std::to_string(s));
  const auto threshold = static_cast<std::uint64_t>(s);
  return {"threshold(" + std::to_string(s) + ")",
          [threshold](std::uint64_t n) { return n < threshold ? 1.0 : 0.0; }};
}

/// f(0) = 1, f(n) = p otherwise.
inline CreationProbability constant_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("creation probability must lie in [0, 1]");
  std::ostringstream id;
  id << "constant(" << p << ")";
  return {id.str(), [p](std::uint64_t n) { return n == 0 ? 1.0 : p; }};
}

inline CreationProbability default_creation_probability() { return constant_probability(0.5); }

/// Checks f(0) = 1 and f(n) in [0, 1] for n in 0..1000.
inline void validate_creation_probability(const CreationProbability& f) {
  if (f(0) != 1.0) throw ConfigError("creation probability '" + f.id() + "' must satisfy f(0) = 1");
  for (std::uint64_t n = 1; n <= 1000; ++n) {
    const double v = f(n);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("creation probability '" + f.id() + "' leaves [0, 1] at n = " + std::to_string(n));
    }
  }
}

struct TypeUnderTest {
  std::string name;
  std::string version = "1";
  std::vector<OperationSpec> constructors;
  std::vector<OperationSpec> methods;
  Contract<InvariantFn> invariant{"true", {}};
  double weight = 1.0;
  CreationProbability creation = default_creation_probability();
};

/// Immutable deep copy of an instance, taken before a call so that
/// postconditions can refer to the pre-state.
class StateSnapshot {
 public:
  explicit StateSnapshot(std::shared_ptr<const Instance> copy) : copy_(std::move(copy)) {}

  const Instance& get() const { return *copy_; }
  const Instance* operator->() const { return copy_.get(); }

  template <class T>
  const T& as() const {
    return dynamic_cast<const T&>(*copy_);
  }

 private:
  std::shared_ptr<const Instance> copy_;
};

inline StateSnapshot snapshot_state(const Instance& instance) { return StateSnapshot(instance.clone()); }

/// Typed view of PostState for a receiver type T.
template <class T>
struct Post {
  const PostState& raw;

  const T* old() const { return static_cast<const T*>(raw.old); }
  const T& self() const { return *static_cast<const T*>(raw.self); }
  const Args& args() const { return raw.args; }
  const Value& result() const { return *raw.result; }
  bool fresh(const Instance* obj) const { return raw.fresh(obj); }
};

/// Builds a TypeUnderTest for a concrete Instance subclass with typed
/// predicates and bodies.
///
///   TypeBuilder<Account> b("Account");
///   b.invariant("getBalance() >= getMin()", [](const Account& a) { ... });
///   b.method("credit", {ValueKind::int32()})
///       .pre("amount >= 0", [](const Account&, const Args& a) { return a.int32(0) >= 0; })
///       .body([](CallContext& ctx, Account& a, const Args& args) { a.credit(ctx, args.int32(0)); });
template <class T>
class TypeBuilder {
 public:
  class OpBuilder {
   public:
    OpBuilder(TypeBuilder* owner, bool ctor, std::size_t index) : owner_(owner), ctor_(ctor), index_(index) {}

    /// Methods: f(const T&, const Args&). Constructors: f(const Args&).
    template <class F>
    OpBuilder& pre(std::string label, F f) {
      if constexpr (std::is_invocable_r_v<bool, F, const T&, const Args&>) {
        spec().precondition = {std::move(label), [f = std::move(f)](const Instance* self, const Args& a) {
                                 return f(*static_cast<const T*>(self), a);
                               }};
      } else {
        static_assert(std::is_invocable_r_v<bool, F, const Args&>, "precondition has the wrong signature");
        spec().precondition = {std::move(label),
                               [f = std::move(f)](const Instance*, const Args& a) { return f(a); }};
      }
      return *this;
    }

    /// f(const Post<T>&)
    template <class F>
    OpBuilder& post(std::string label, F f) {
      spec().postcondition = {std::move(label),
                              [f = std::move(f)](const PostState& p) { return f(Post<T>{p}); }};
      return *this;
    }

    OpBuilder& signals(std::string label, ExceptionPolicyFn policy) {
      spec().exceptions = {std::move(label), std::move(policy)};
      return *this;
    }

    OpBuilder& pure(bool p = true) {
      spec().pure = p;
      return *this;
    }

    OpBuilder& weight(double w) {
      spec().weight = w;
      return *this;
    }

    /// Methods: f(CallContext&, T&, const Args&) returning void, Value,
    /// int32_t, bool or a shared_ptr. Constructors: f(CallContext&, const
    /// Args&) returning std::shared_ptr<T>.
    template <class F>
    OpBuilder& body(F f) {
      if constexpr (std::is_invocable_v<F, CallContext&, T&, const Args&>) {
        using R = std::invoke_result_t<F, CallContext&, T&, const Args&>;
        spec().body = [f = std::move(f)](CallContext& ctx, Instance* self, const Args& a) -> Value {
          auto& obj = *static_cast<T*>(self);
          if constexpr (std::is_void_v<R>) {
            f(ctx, obj, a);
            return Value::none();
          } else {
            return to_value(f(ctx, obj, a));
          }
        };
      } else {
        static_assert(std::is_invocable_v<F, CallContext&, const Args&>, "body has the wrong signature");
        spec().body = [f = std::move(f)](CallContext& ctx, Instance*, const Args& a) -> Value {
          return Value::ref(f(ctx, a));
        };
      }
      return *this;
    }

   private:
    OperationSpec& spec() {
      return ctor_ ? owner_->type_.constructors[index_] : owner_->type_.methods[index_];
    }

    template <class R>
    static Value to_value(R&& r) {
      using D = std::decay_t<R>;
      if constexpr (std::is_same_v<D, Value>) {
        return std::forward<R>(r);
      } else if constexpr (std::is_same_v<D, bool>) {
        return Value::boolean(r);
      } else if constexpr (std::is_integral_v<D>) {
        return Value::int32(static_cast<std::int32_t>(r));
      } else {
        return Value::ref(std::static_pointer_cast<Instance>(std::forward<R>(r)));
      }
    }

    TypeBuilder* owner_;
    bool ctor_;
    std::size_t index_;
  };

  explicit TypeBuilder(std::string name) { type_.name = std::move(name); }

  TypeBuilder& invariant(std::string label, std::function<bool(const T&)> f) {
    type_.invariant = {std::move(label),
                       [f = std::move(f)](const Instance& self) { return f(static_cast<const T&>(self)); }};
    return *this;
  }

  TypeBuilder& weight(double w) {
    type_.weight = w;
    return *this;
  }

  TypeBuilder& version(std::string v) {
    type_.version = std::move(v);
    return *this;
  }

  TypeBuilder& creation_probability(CreationProbability f) {
    type_.creation = std::move(f);
    return *this;
  }

  OpBuilder constructor(std::vector<ValueKind> signature) {
    OperationSpec op;
    op.name = type_.name;
    op.kind = OperationKind::Constructor;
    op.signature = std::move(signature);
    op.returns = ValueKind::reference(type_.name);
    type_.constructors.push_back(std::move(op));
    return OpBuilder(this, true, type_.constructors.size() - 1);
  }

  OpBuilder method(std::string name, std::vector<ValueKind> signature, std::optional<ValueKind> returns = {}) {
    OperationSpec op;
    op.name = std::move(name);
    op.signature = std::move(signature);
    op.returns = std::move(returns);
    type_.methods.push_back(std::move(op));
    return OpBuilder(this, false, type_.methods.size() - 1);
  }

  TypeUnderTest build() const { return type_; }

 private:
  TypeUnderTest type_;
};

}  // namespace seqgen
