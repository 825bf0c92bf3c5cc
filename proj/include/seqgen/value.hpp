#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace seqgen {

/// Invalid registry or run configuration. Raised before any test executes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generation could not proceed (nothing constructible, a parameter
/// generator produced the wrong kind of value, a fixture failed).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two's-complement arithmetic on 32-bit values, as performed by the code
// under test.
constexpr std::int32_t wrap_add(std::int32_t a, std::int32_t b) noexcept {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) + static_cast<std::uint32_t>(b));
}

constexpr std::int32_t wrap_sub(std::int32_t a, std::int32_t b) noexcept {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) - static_cast<std::uint32_t>(b));
}

struct ValueKind {
  enum class Tag : std::uint8_t { Int32, Boolean, Reference, Null };

  Tag tag = Tag::Int32;
  std::string type_name;  // Reference only

  static ValueKind int32() { return {Tag::Int32, {}}; }
  static ValueKind boolean() { return {Tag::Boolean, {}}; }
  static ValueKind null() { return {Tag::Null, {}}; }
  static ValueKind reference(std::string type) { return {Tag::Reference, std::move(type)}; }

  bool is_primitive() const { return tag == Tag::Int32 || tag == Tag::Boolean; }

  /// Source-level spelling: "int", "boolean", "null" or the referenced type name.
  std::string name() const {
    switch (tag) {
      case Tag::Int32: return "int";
      case Tag::Boolean: return "boolean";
      case Tag::Null: return "null";
      case Tag::Reference: return type_name;
    }
    return {};
  }

  static ValueKind parse(std::string_view spelling) {
    if (spelling == "int") return int32();
    if (spelling == "boolean") return boolean();
    if (spelling == "null") return null();
    if (spelling.empty()) throw ConfigError("empty type name");
    return reference(std::string(spelling));
  }

  friend bool operator==(const ValueKind&, const ValueKind&) = default;
};

inline std::string signature_string(std::span<const ValueKind> kinds) {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += ',';
    out += kinds[i].name();
  }
  return out;
}

inline std::string signature_string(std::span<const std::string> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  return out;
}

class Heap;

/// Base class of every object handled by the engine.
///
/// Each instance carries an identity assigned by the Heap that created it.
/// Copies (and therefore snapshots) keep that identity, so reference
/// equality on pre-state snapshots can be decided with same_object().
class Instance {
 public:
  virtual ~Instance() = default;

  virtual std::string_view type_name() const = 0;

  /// Deep copy. Every object reachable from the copy keeps its identity.
  virtual std::shared_ptr<Instance> clone() const = 0;

  /// Observable state, used for purity checks and diagnostics.
  virtual nlohmann::json state() const = 0;

  std::uint64_t identity() const noexcept { return identity_; }

 protected:
  Instance() = default;
  Instance(const Instance&) = default;
  Instance& operator=(const Instance&) = default;

 private:
  friend class Heap;
  std::uint64_t identity_ = 0;
};

using InstanceRef = std::shared_ptr<Instance>;

inline bool same_object(const Instance* a, const Instance* b) noexcept {
  if (a == nullptr || b == nullptr) return a == b;
  if (a->identity() == 0 || b->identity() == 0) return a == b;
  return a->identity() == b->identity();
}

/// CRTP helper: type name from `Derived::kTypeName`, clone through the copy
/// constructor. Types holding mutable references override clone().
template <class Derived>
class Object : public Instance {
 public:
  std::string_view type_name() const override { return Derived::kTypeName; }

  std::shared_ptr<Instance> clone() const override {
    return std::make_shared<Derived>(static_cast<const Derived&>(*this));
  }
};

/// Allocates instances for one test-case execution and hands out identities
/// in creation order.
class Heap {
 public:
  template <class T, class... A>
  std::shared_ptr<T> make(A&&... args) {
    auto obj = std::make_shared<T>(std::forward<A>(args)...);
    static_cast<Instance&>(*obj).identity_ = ++last_;
    return obj;
  }

  /// Identity of the most recently created object; anything created later
  /// has a strictly larger identity.
  std::uint64_t watermark() const noexcept { return last_; }

 private:
  std::uint64_t last_ = 0;
};

struct Void {
  friend bool operator==(Void, Void) = default;
};

/// A runtime value: nothing (void result), an Int32, a Boolean or a
/// possibly-null reference.
class Value {
 public:
  Value() = default;

  static Value none() { return Value{}; }
  static Value int32(std::int32_t v) { return Value(Storage(std::in_place_index<1>, v)); }
  static Value boolean(bool v) { return Value(Storage(std::in_place_index<2>, v)); }
  static Value ref(InstanceRef v) { return Value(Storage(std::in_place_index<3>, std::move(v))); }
  static Value null() { return ref(nullptr); }

  bool is_void() const { return v_.index() == 0; }
  bool is_int32() const { return v_.index() == 1; }
  bool is_bool() const { return v_.index() == 2; }
  bool is_reference() const { return v_.index() == 3; }
  bool is_null() const { return is_reference() && !std::get<3>(v_); }

  std::int32_t as_int32() const {
    if (!is_int32()) throw std::logic_error("value is not an int");
    return std::get<1>(v_);
  }
  bool as_bool() const {
    if (!is_bool()) throw std::logic_error("value is not a boolean");
    return std::get<2>(v_);
  }
  const InstanceRef& as_ref() const {
    if (!is_reference()) throw std::logic_error("value is not a reference");
    return std::get<3>(v_);
  }

  bool matches(const ValueKind& kind) const {
    switch (kind.tag) {
      case ValueKind::Tag::Int32: return is_int32();
      case ValueKind::Tag::Boolean: return is_bool();
      case ValueKind::Tag::Null: return is_null();
      case ValueKind::Tag::Reference:
        return is_null() || (is_reference() && as_ref()->type_name() == kind.type_name);
    }
    return false;
  }

  std::string kind_name() const {
    if (is_void()) return "void";
    if (is_int32()) return "int";
    if (is_bool()) return "boolean";
    if (is_null()) return "null";
    return std::string(as_ref()->type_name());
  }

 private:
  using Storage = std::variant<Void, std::int32_t, bool, InstanceRef>;
  explicit Value(Storage s) : v_(std::move(s)) {}
  Storage v_;
};

/// Read-only view over the arguments of one call.
class Args {
 public:
  explicit Args(std::span<const Value> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  const Value& operator[](std::size_t i) const { return values_[i]; }

  std::int32_t int32(std::size_t i) const { return values_[i].as_int32(); }
  bool boolean(std::size_t i) const { return values_[i].as_bool(); }
  const InstanceRef& instance(std::size_t i) const { return values_[i].as_ref(); }

  template <class T>
  std::shared_ptr<T> ref(std::size_t i) const {
    return std::dynamic_pointer_cast<T>(values_[i].as_ref());
  }

 private:
  std::span<const Value> values_;
};

}  // namespace seqgen
