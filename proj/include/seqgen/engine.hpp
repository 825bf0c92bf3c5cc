#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqgen/artifact.hpp"
#include "seqgen/executor.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/verdict.hpp"

namespace seqgen {

/// Default draw for a primitive parameter without a registered generator:
/// Int32 uniform over the full range, Boolean a fair coin.
inline Value default_primitive(const ValueKind& kind, Rng& rng) {
  switch (kind.tag) {
    case ValueKind::Tag::Int32: return Value::int32(rng.int32());
    case ValueKind::Tag::Boolean: return Value::boolean(rng.coin());
    case ValueKind::Tag::Null: return Value::null();
    case ValueKind::Tag::Reference: break;
  }
  throw std::logic_error("default_primitive called for reference parameter");
}

inline Argument to_argument(const Value& v) {
  if (v.is_int32()) return v.as_int32();
  if (v.is_bool()) return v.as_bool();
  if (v.is_null()) return NullLiteral{};
  throw std::logic_error("only literals convert to arguments");
}

enum class AttemptStatus : std::uint8_t {
  Emitted,          // the chosen call was executed and recorded
  Rejected,         // its entry precondition was false
  Declined,         // a chosen constructor was refused by the creation probability
  Unobtainable,     // no receiver or reference argument could be obtained
  Violation,        // the oracle fired; the test case is over
  BudgetExhausted,  // no slot left
};

struct AttemptResult {
  AttemptStatus status = AttemptStatus::BudgetExhausted;
  std::string operation;        // qualified name of the chosen operation
  std::size_t steps_emitted = 0;  // including constructions made to obtain objects
  std::optional<ErrorInfo> error;
};

/// Builds one test case. Every emitted step and every failed attempt
/// consumes one of `budget` slots; the first violation ends the test case.
class TestCaseGenerator {
 public:
  TestCaseGenerator(const Registry& registry, std::uint32_t test_id, std::uint32_t budget, Rng rng,
                    std::map<std::string, OperationStats>* stats = nullptr)
      : registry_(registry), runner_(registry), rng_(std::move(rng)), budget_(budget), stats_(stats) {
    test_.id = test_id;
  }

  /// Runs the fixture setup, if any. Its steps are recorded but cost no slots.
  void run_setup();

  AttemptResult attempt_step() {
    AttemptResult result;
    if (done()) return result;
    failure_ = Failure::None;
    const std::size_t steps_before = test_.steps.size();

    const auto& type = pick_type();
    std::vector<const OperationSpec*> urn;
    std::vector<double> weights;
    for (const auto* ops : {&type.constructors, &type.methods}) {
      for (const auto& op : *ops) {
        urn.push_back(&op);
        weights.push_back(op.weight);
      }
    }
    const auto& op = *urn[rng_.pick_weighted(weights)];
    result.operation = op.qualified_name(type.name);
    ++stats(op, type).selected;

    auto finish_attempt = [&](AttemptStatus status) {
      result.status = status;
      result.steps_emitted = test_.steps.size() - steps_before;
      if (status == AttemptStatus::Rejected || status == AttemptStatus::Declined ||
          status == AttemptStatus::Unobtainable) {
        ++used_;
        ++failed_attempts_;
      }
      if (ended_) {
        result.status = AttemptStatus::Violation;
        result.error = error_;
      }
      return result;
    };
    auto from_failure = [&]() {
      if (failure_ == Failure::Budget) return finish_attempt(AttemptStatus::BudgetExhausted);
      if (failure_ == Failure::Ended) return finish_attempt(AttemptStatus::Violation);
      return finish_attempt(AttemptStatus::Unobtainable);
    };

    InstanceRef receiver;
    std::optional<ObjectId> receiver_id;
    if (op.is_constructor()) {
      if (!creation_allowed(type)) {
        ++stats(op, type).declined;
        return finish_attempt(AttemptStatus::Declined);
      }
    } else {
      receiver_id = obtain_instance(type.name, 0);
      if (!receiver_id) return from_failure();
      receiver = runner_.lookup(*receiver_id)->as_ref();
    }

    auto args = resolve_params(type, op, receiver.get(), 0);
    if (!args) return from_failure();
    if (used_ >= budget_) return finish_attempt(AttemptStatus::BudgetExhausted);

    auto step = make_step(type, op, receiver_id, std::move(*args));
    switch (execute(step, type, op)) {
      case StepStatus::Ok: return finish_attempt(AttemptStatus::Emitted);
      case StepStatus::PreconditionFailed: return finish_attempt(AttemptStatus::Rejected);
      default: return finish_attempt(AttemptStatus::Violation);
    }
  }

  /// Receiver or reference argument of `type`: a new instance with
  /// probability f(n), n being the number of instances created so far,
  /// otherwise a uniformly chosen pooled one.
  std::optional<ObjectId> obtain_instance(std::string_view type_name, unsigned depth = 0) {
    const auto& type = registry_.type(type_name);
    const auto& pooled = runner_.pool().instances(type.name);
    if (!pooled.empty() && !creation_allowed(type)) return pooled[rng_.below(pooled.size())];
    return create_instance(type, depth);
  }

  bool done() const { return ended_ || used_ >= budget_; }
  bool ended() const { return ended_; }
  std::uint32_t slots_used() const { return used_; }
  std::uint32_t failed_attempts() const { return failed_attempts_; }
  const ObjectPool& pool() const { return runner_.pool(); }
  const TestCase& test_case() const { return test_; }
  const TestCaseRunner& runner() const { return runner_; }

  /// Runs the teardown and returns the test's verdict.
  Verdict finish() {
    Verdict v;
    v.test_id = test_.id;
    if (ended_) {
      v.outcome = Outcome::Error;
      v.error = error_;
      v.step = error_step_;
    }
    v.harness_error = run_teardown(registry_, runner_.pool());
    return v;
  }

  TestCase take_test_case() { return std::move(test_); }

 private:
  friend class FixtureContext;

  enum class Failure : std::uint8_t { None, Unobtainable, Ended, Budget };

  const TypeUnderTest& pick_type() {
    std::vector<const TypeUnderTest*> candidates;
    std::vector<double> weights;
    for (const auto& t : registry_.types()) {
      double urn = 0;
      for (const auto* ops : {&t.constructors, &t.methods}) {
        for (const auto& op : *ops) urn += op.weight;
      }
      if (t.weight > 0 && urn > 0) {
        candidates.push_back(&t);
        weights.push_back(t.weight);
      }
    }
    if (candidates.empty()) throw GenerationError("no type has a callable operation under the current weights");
    return *candidates[rng_.pick_weighted(weights)];
  }

  /// Draws against the type's creation probability. f(n) of exactly 0 or 1
  /// consumes no randomness.
  bool creation_allowed(const TypeUnderTest& type) {
    const double f = type.creation(runner_.pool().created_count(type.name));
    if (f >= 1.0) return true;
    if (f <= 0.0) return false;
    return rng_.unit() < f;
  }

  std::optional<ObjectId> create_instance(const TypeUnderTest& type, unsigned depth) {
    std::vector<double> weights;
    for (const auto& c : type.constructors) weights.push_back(c.weight);
    bool any = false;
    for (double w : weights) any = any || w > 0;
    if (!any) {
      failure_ = Failure::Unobtainable;
      return std::nullopt;
    }
    for (unsigned attempt = 0; attempt < registry_.constructor_retries(); ++attempt) {
      const auto& ctor = type.constructors[rng_.pick_weighted(weights)];
      ++stats(ctor, type).selected;
      auto args = resolve_params(type, ctor, nullptr, depth);
      if (!args) {
        if (failure_ != Failure::Unobtainable) return std::nullopt;
        failure_ = Failure::None;
        continue;
      }
      if (used_ >= budget_) {
        failure_ = Failure::Budget;
        return std::nullopt;
      }
      auto step = make_step(type, ctor, std::nullopt, std::move(*args));
      const auto id = step.result->id;
      switch (execute(step, type, ctor)) {
        case StepStatus::Ok: return id;
        case StepStatus::PreconditionFailed: continue;
        default: failure_ = Failure::Ended; return std::nullopt;
      }
    }
    failure_ = Failure::Unobtainable;
    return std::nullopt;
  }

  std::optional<std::vector<Argument>> resolve_params(const TypeUnderTest& type, const OperationSpec& op,
                                                      const Instance* receiver, unsigned depth) {
    std::vector<Argument> args;
    args.reserve(op.signature.size());
    const auto names = op.signature_names();
    for (std::size_t i = 0; i < op.signature.size(); ++i) {
      const auto& kind = op.signature[i];
      if (const auto* gen = registry_.find_generator(type.name, op.name, names, i)) {
        const Value v = gen->fn(receiver, rng_);
        if (v.is_void() || !v.matches(kind) || v.is_reference()) {
          throw GenerationError("parameter generator '" + gen->id + "' produced " + v.kind_name() + " for a " +
                                kind.name() + " parameter");
        }
        args.push_back(to_argument(v));
      } else if (kind.is_primitive() || kind.tag == ValueKind::Tag::Null) {
        args.push_back(to_argument(default_primitive(kind, rng_)));
      } else if (depth + 1 > registry_.max_construction_depth()) {
        args.push_back(NullLiteral{});
      } else if (registry_.null_probability() > 0 && rng_.unit() < registry_.null_probability()) {
        args.push_back(NullLiteral{});
      } else {
        auto id = obtain_instance(kind.type_name, depth + 1);
        if (!id) {
          if (failure_ == Failure::None) failure_ = Failure::Unobtainable;
          return std::nullopt;
        }
        args.push_back(*id);
      }
      if (ended_) {
        failure_ = Failure::Ended;
        return std::nullopt;
      }
    }
    return args;
  }

  CallStep make_step(const TypeUnderTest& type, const OperationSpec& op, std::optional<ObjectId> receiver,
                     std::vector<Argument> args) const {
    CallStep step;
    step.kind = op.kind;
    step.type = type.name;
    step.operation = op.name;
    step.signature = op.signature_names();
    step.receiver = receiver;
    step.args = std::move(args);
    if (op.returns) step.result = Binding{runner_.next_id(), op.returns->name()};
    return step;
  }

  /// Executes and records the step. Precondition failures leave no trace
  /// besides the statistics.
  StepStatus execute(CallStep& step, const TypeUnderTest& type, const OperationSpec& op, bool fixture = false) {
    step.fixture = fixture;
    auto outcome = runner_.run(step);
    switch (outcome.status) {
      case StepStatus::Ok:
        ++stats(op, type).emitted;
        test_.steps.push_back(std::move(step));
        if (!fixture) ++used_;
        break;
      case StepStatus::PreconditionFailed:
        ++stats(op, type).rejected;
        break;
      case StepStatus::Violation:
        ++stats(op, type).emitted;
        test_.steps.push_back(std::move(step));
        if (!fixture) ++used_;
        ended_ = true;
        error_ = outcome.error;
        error_step_ = test_.steps.size() - 1;
        break;
      case StepStatus::Drift:
        throw std::logic_error("generated step does not fit the registry: " + outcome.message);
    }
    return outcome.status;
  }

  OperationStats& stats(const OperationSpec& op, const TypeUnderTest& type) {
    if (!stats_) return scratch_;
    return (*stats_)[op.qualified_name(type.name)];
  }

  const Registry& registry_;
  TestCaseRunner runner_;
  Rng rng_;
  std::uint32_t budget_;
  std::map<std::string, OperationStats>* stats_;
  OperationStats scratch_;
  TestCase test_;
  std::uint32_t used_ = 0;
  std::uint32_t failed_attempts_ = 0;
  bool ended_ = false;
  std::optional<ErrorInfo> error_;
  std::size_t error_step_ = 0;
  Failure failure_ = Failure::None;
};

/// What a fixture's setup uses to build the starting pool.
class FixtureContext {
 public:
  explicit FixtureContext(TestCaseGenerator& gen) : gen_(gen) {}

  /// Runs a constructor whose signature accepts `args` and returns the new
  /// binding.
  ObjectId construct(std::string_view type, std::vector<Argument> args) {
    const auto& t = gen_.registry_.type(type);
    const auto& op = resolve(t, t.constructors, t.name, args);
    return *run(t, op, std::nullopt, std::move(args));
  }

  /// Runs a method; returns the result binding for non-void methods.
  std::optional<ObjectId> invoke(ObjectId receiver, std::string_view method, std::vector<Argument> args) {
    const auto* v = gen_.runner_.lookup(receiver);
    if (!v || !v->is_reference() || v->is_null()) throw GenerationError("fixture: " + receiver.str() + " is not an object");
    const auto& t = gen_.registry_.type(v->as_ref()->type_name());
    const auto& op = resolve(t, t.methods, method, args);
    return run(t, op, receiver, std::move(args));
  }

  const ObjectPool& pool() const { return gen_.pool(); }

 private:
  const OperationSpec& resolve(const TypeUnderTest& t, const std::vector<OperationSpec>& ops, std::string_view name,
                               const std::vector<Argument>& args) const {
    for (const auto& op : ops) {
      if (op.name != name || op.signature.size() != args.size()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < args.size() && ok; ++i) ok = fits(args[i], op.signature[i]);
      if (ok) return op;
    }
    throw GenerationError("fixture: no operation " + t.name + "." + std::string(name) + " accepts these arguments");
  }

  bool fits(const Argument& a, const ValueKind& k) const {
    if (std::holds_alternative<NullLiteral>(a)) return Value::null().matches(k);
    if (std::holds_alternative<std::int32_t>(a)) return k.tag == ValueKind::Tag::Int32;
    if (std::holds_alternative<bool>(a)) return k.tag == ValueKind::Tag::Boolean;
    const auto* v = gen_.runner_.lookup(std::get<ObjectId>(a));
    return v != nullptr && v->matches(k);
  }

  std::optional<ObjectId> run(const TypeUnderTest& t, const OperationSpec& op, std::optional<ObjectId> receiver,
                              std::vector<Argument> args) {
    if (gen_.ended_) throw GenerationError("fixture: test case already ended");
    auto step = gen_.make_step(t, op, receiver, std::move(args));
    const auto binding = step.result;
    const auto name = step.qualified_name();
    const auto status = gen_.execute(step, t, op, true);
    if (status == StepStatus::PreconditionFailed) throw GenerationError("fixture: entry precondition of " + name + " is false");
    if (status != StepStatus::Ok) throw GenerationError("fixture: " + name + " violated a contract");
    if (!binding) return std::nullopt;
    return binding->id;
  }

  TestCaseGenerator& gen_;
};

inline void TestCaseGenerator::run_setup() {
  const auto& fixture = registry_.fixture();
  if (!fixture || !fixture->setup) return;
  FixtureContext ctx(*this);
  fixture->setup(ctx);
}

struct GenerateOptions {
  std::string name = "Tests";
  std::string corpus;
  std::int64_t tests = 100;
  std::int64_t attempts_per_test = 50;
  std::uint64_t seed = 0;
  std::optional<std::string> created;
};

/// Throws GenerationError when no object could ever be constructed.
inline void check_bootstrap(const Registry& registry) {
  if (registry.fixture() && registry.fixture()->setup) return;
  for (const auto& t : registry.types()) {
    for (const auto& c : t.constructors) {
      if (c.weight > 0) return;
    }
  }
  throw GenerationError("cannot bootstrap pool: no constructor has a positive weight");
}

/// Generates `tests` test cases of at most `attempts_per_test` steps each.
/// The result depends only on the registry configuration and the seed.
/// Freezes the registry.
inline std::pair<TestArtifact, GenerationReport> generate(Registry& registry, const GenerateOptions& options) {
  if (options.tests < 0) throw ConfigError("number of tests must not be negative");
  if (options.attempts_per_test < 1) throw ConfigError("attempts per test must be positive");
  if (options.attempts_per_test > std::numeric_limits<std::uint32_t>::max() ||
      options.tests > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("counts are limited to 32 bits");
  }
  registry.freeze();
  check_bootstrap(registry);

  TestArtifact artifact;
  artifact.header.name = options.name;
  artifact.header.corpus = options.corpus;
  artifact.header.seed = options.seed;
  artifact.header.attempts_per_test = static_cast<std::uint32_t>(options.attempts_per_test);
  artifact.header.registry_digest = registry.digest();
  artifact.header.rng = std::string(Rng::kId);
  artifact.header.created = options.created;

  GenerationReport report;
  report.seed = options.seed;
  report.attempts_per_test = artifact.header.attempts_per_test;

  for (std::uint32_t id = 1; id <= static_cast<std::uint32_t>(options.tests); ++id) {
    TestCaseGenerator gen(registry, id, artifact.header.attempts_per_test, Rng::for_stream(options.seed, id),
                          &report.operations);
    gen.run_setup();
    while (!gen.done()) gen.attempt_step();
    report.verdicts.push_back(gen.finish());
    auto test = gen.take_test_case();
    report.calls_emitted.push_back(test.steps.size());
    artifact.tests.push_back(std::move(test));
  }
  return {std::move(artifact), std::move(report)};
}

}  // namespace seqgen
