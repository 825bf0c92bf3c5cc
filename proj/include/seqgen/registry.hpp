#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "seqgen/contract.hpp"
#include "seqgen/rng.hpp"

namespace seqgen {

class FixtureContext;
class ObjectPool;

/// Produces a value for one primitive parameter. `receiver` is null for
/// constructors.
using ParameterGeneratorFn = std::function<Value(const Instance* receiver, Rng& rng)>;

struct ParameterGenerator {
  std::string id;
  ParameterGeneratorFn fn;
};

/// Per-test-case preamble and postamble. Objects created by `setup` enter
/// the pool before the random steps.
struct Fixture {
  std::string label = "fixture";
  std::function<void(FixtureContext&)> setup;
  std::function<void(const ObjectPool&)> teardown;
};

/// Types under test plus everything that shapes generation: weights,
/// creation probabilities, parameter generators and the fixture. Mutable
/// until freeze(), read-only afterwards.
class Registry {
 public:
  void add_type(TypeUnderTest type) {
    check_mutable();
    if (type.name.empty()) throw ConfigError("type name must not be empty");
    if (find_type(type.name)) throw ConfigError("type '" + type.name + "' is already registered");
    check_weight(type.weight);
    validate_creation_probability(type.creation);
    for (const auto* ops : {&type.constructors, &type.methods}) {
      for (const auto& op : *ops) {
        check_weight(op.weight);
        if (!op.body) throw ConfigError("operation '" + op.qualified_name(type.name) + "' has no body");
      }
    }
    types_.push_back(std::move(type));
  }

  /// Class weight: relative probability that the type is chosen for an attempt.
  void set_type_weight(std::string_view type, double weight) {
    check_mutable();
    check_weight(weight);
    mutable_type(type).weight = weight;
  }

  /// Every method of the type; constructors keep their weight.
  void change_all_methods_weight(std::string_view type, double weight) {
    check_mutable();
    check_weight(weight);
    for (auto& m : mutable_type(type).methods) m.weight = weight;
  }

  /// All overloads named `method`.
  void change_method_weight(std::string_view type, std::string_view method, double weight) {
    change_weight(type, OperationKind::Method, method, std::nullopt, weight);
  }

  /// The overload with exactly this signature, e.g. {"int"}.
  void change_method_weight(std::string_view type, std::string_view method, const std::vector<std::string>& signature,
                            double weight) {
    change_weight(type, OperationKind::Method, method, signature, weight);
  }

  void change_constructor_weight(std::string_view type, std::optional<std::vector<std::string>> signature,
                                 double weight) {
    change_weight(type, OperationKind::Constructor, type, signature, weight);
  }

  void change_creation_probability(std::string_view type, CreationProbability f) {
    check_mutable();
    validate_creation_probability(f);
    mutable_type(type).creation = std::move(f);
  }

  /// `index` is 0-based. Only primitive parameters take generators.
  void register_parameter_generator(std::string_view type, std::string_view operation,
                                    const std::vector<std::string>& signature, std::size_t index,
                                    ParameterGeneratorFn fn, std::string id = {}) {
    check_mutable();
    if (!fn) throw ConfigError("parameter generator must be callable");
    const auto& t = this->type(type);
    const OperationSpec* op = nullptr;
    for (const auto* ops : {&t.constructors, &t.methods}) {
      for (const auto& o : *ops) {
        if (o.name == operation && o.signature_names() == signature) op = &o;
      }
    }
    if (!op) {
      throw ConfigError("no operation " + std::string(type) + "." + std::string(operation) + "(" +
                        signature_string(signature) + ")");
    }
    if (index >= op->signature.size()) {
      throw ConfigError("parameter index " + std::to_string(index) + " out of range for " + op->qualified_name(t.name));
    }
    if (!op->signature[index].is_primitive()) {
      throw ConfigError("parameter generators apply to primitive parameters; " + op->qualified_name(t.name) +
                        " parameter " + std::to_string(index) + " is " + op->signature[index].name());
    }
    if (id.empty()) id = op->qualified_name(t.name) + "#" + std::to_string(index);
    generators_[Key{std::string(type), std::string(operation), signature, index}] = {std::move(id), std::move(fn)};
  }

  void set_fixture(Fixture fixture) {
    check_mutable();
    fixture_ = std::move(fixture);
  }

  /// Probability that a reference parameter receives null.
  void set_null_probability(double p) {
    check_mutable();
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("null probability must lie in [0, 1]");
    null_probability_ = p;
  }

  /// Parameter draws tried per construction before giving up.
  void set_constructor_retries(unsigned n) {
    check_mutable();
    if (n == 0) throw ConfigError("constructor retries must be positive");
    constructor_retries_ = n;
  }

  /// Nesting limit for constructions triggered by reference parameters;
  /// beyond it reference parameters receive null.
  void set_max_construction_depth(unsigned n) {
    check_mutable();
    max_construction_depth_ = n;
  }

  /// Validates cross-references and locks the configuration. Idempotent.
  void freeze() {
    if (frozen_) return;
    for (const auto& t : types_) {
      for (const auto* ops : {&t.constructors, &t.methods}) {
        for (const auto& op : *ops) {
          auto check = [&](const ValueKind& k) {
            if (k.tag == ValueKind::Tag::Reference && !find_type(k.type_name)) {
              throw ConfigError(op.qualified_name(t.name) + " refers to unregistered type '" + k.type_name + "'");
            }
          };
          for (const auto& k : op.signature) check(k);
          if (op.returns) check(*op.returns);
        }
      }
    }
    frozen_ = true;
  }

  bool frozen() const { return frozen_; }

  const std::vector<TypeUnderTest>& types() const { return types_; }

  const TypeUnderTest* find_type(std::string_view name) const {
    for (const auto& t : types_) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  const TypeUnderTest& type(std::string_view name) const {
    if (const auto* t = find_type(name)) return *t;
    throw ConfigError("unknown type '" + std::string(name) + "'");
  }

  const OperationSpec* find_operation(std::string_view type, OperationKind kind, std::string_view name,
                                      const std::vector<std::string>& signature) const {
    const auto* t = find_type(type);
    if (!t) return nullptr;
    for (const auto& op : kind == OperationKind::Constructor ? t->constructors : t->methods) {
      if (op.name == name && op.signature_names() == signature) return &op;
    }
    return nullptr;
  }

  const ParameterGenerator* find_generator(std::string_view type, std::string_view operation,
                                           const std::vector<std::string>& signature, std::size_t index) const {
    auto it = generators_.find(Key{std::string(type), std::string(operation), signature, index});
    return it == generators_.end() ? nullptr : &it->second;
  }

  const std::optional<Fixture>& fixture() const { return fixture_; }
  double null_probability() const { return null_probability_; }
  unsigned constructor_retries() const { return constructor_retries_; }
  unsigned max_construction_depth() const { return max_construction_depth_; }

  /// Canonical description of everything that influences generation or the
  /// oracle. Two registries with equal descriptions behave identically.
  std::string describe() const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "null=" << null_probability_ << ";retries=" << constructor_retries_
        << ";depth=" << max_construction_depth_ << "\n";
    for (const auto& t : types_) {
      out << "type " << t.name << " v" << t.version << " w=" << t.weight << " create=" << t.creation.id()
          << " inv={" << t.invariant.label << "}\n";
      for (const auto* ops : {&t.constructors, &t.methods}) {
        for (const auto& op : *ops) {
          out << "  " << to_string(op.kind) << " " << op.qualified_name(t.name) << " -> "
              << (op.returns ? op.returns->name() : "void") << " w=" << op.weight << (op.pure ? " pure" : "")
              << " pre={" << op.precondition.label << "} post={" << op.postcondition.label << "} signals={"
              << op.exceptions.label << (op.exceptions.fn ? "" : ":forbid") << "}\n";
        }
      }
    }
    for (const auto& [key, gen] : generators_) {
      out << "gen " << std::get<0>(key) << "." << std::get<1>(key) << "(" << signature_string(std::get<2>(key))
          << ")#" << std::get<3>(key) << " = " << gen.id << "\n";
    }
    if (fixture_) out << "fixture " << fixture_->label << "\n";
    return out.str();
  }

  /// 64-bit FNV-1a of describe(), as 16 hex digits.
  std::string digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : describe()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
  }

 private:
  using Key = std::tuple<std::string, std::string, std::vector<std::string>, std::size_t>;

  void check_mutable() const {
    if (frozen_) throw ConfigError("registry is frozen");
  }

  static void check_weight(double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and non-negative");
  }

  TypeUnderTest& mutable_type(std::string_view name) {
    for (auto& t : types_) {
      if (t.name == name) return t;
    }
    throw ConfigError("unknown type '" + std::string(name) + "'");
  }

  void change_weight(std::string_view type, OperationKind kind, std::string_view name,
                     const std::optional<std::vector<std::string>>& signature, double weight) {
    check_mutable();
    check_weight(weight);
    auto& t = mutable_type(type);
    std::size_t matched = 0;
    for (auto& op : kind == OperationKind::Constructor ? t.constructors : t.methods) {
      if (op.name != name) continue;
      if (signature && op.signature_names() != *signature) continue;
      op.weight = weight;
      ++matched;
    }
    if (matched == 0) {
      throw ConfigError("no " + std::string(kind == OperationKind::Constructor ? "constructor" : "method") + " " +
                        std::string(type) + "." + std::string(name) +
                        (signature ? "(" + signature_string(*signature) + ")" : std::string()));
    }
  }

  std::vector<TypeUnderTest> types_;
  std::map<Key, ParameterGenerator> generators_;
  std::optional<Fixture> fixture_;
  double null_probability_ = 0.1;
  unsigned constructor_retries_ = 5;
  unsigned max_construction_depth_ = 4;
  bool frozen_ = false;
};

}  // namespace seqgen
