#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqgen/sequence.hpp"

namespace seqgen {

inline constexpr int kArtifactFormatVersion = 1;
inline constexpr std::string_view kToolVersion = "seqgen 0.1.0";

/// Unreadable or malformed artifact. `offset` is the byte offset of a
/// syntax error when one is known.
class ArtifactError : public std::runtime_error {
 public:
  explicit ArtifactError(const std::string& what, std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(offset ? what + " (at byte " + std::to_string(*offset) + ")" : what), offset_(offset) {}

  std::optional<std::size_t> offset() const { return offset_; }

 private:
  std::optional<std::size_t> offset_;
};

struct ArtifactHeader {
  int format_version = kArtifactFormatVersion;
  std::string tool_version{kToolVersion};
  std::string name;
  std::string corpus;
  std::uint64_t seed = 0;
  std::uint32_t attempts_per_test = 0;
  std::string registry_digest;
  std::string rng;
  std::optional<std::string> created;  // only stamped on request; keeps runs byte-identical

  friend bool operator==(const ArtifactHeader&, const ArtifactHeader&) = default;
};

/// The replayable product of one generation run.
struct TestArtifact {
  ArtifactHeader header;
  std::vector<TestCase> tests;

  const TestCase* find(std::uint32_t id) const {
    for (const auto& t : tests) {
      if (t.id == id) return &t;
    }
    return nullptr;
  }

  friend bool operator==(const TestArtifact&, const TestArtifact&) = default;
};

namespace detail {

using nlohmann::json;

inline json argument_to_json(const Argument& a) {
  if (const auto* id = std::get_if<ObjectId>(&a)) return id->str();
  if (const auto* n = std::get_if<std::int32_t>(&a)) return *n;
  if (const auto* b = std::get_if<bool>(&a)) return *b;
  return nullptr;
}

inline json step_to_json(const CallStep& s) {
  json j = json::object();
  j["kind"] = std::string(to_string(s.kind));
  j["type"] = s.type;
  j["op"] = s.operation;
  j["signature"] = s.signature;
  json args = json::array();
  for (const auto& a : s.args) args.push_back(argument_to_json(a));
  j["args"] = std::move(args);
  if (s.receiver) j["receiver"] = s.receiver->str();
  if (s.result) j["bind"] = json{{"id", s.result->id.str()}, {"type", s.result->type}};
  if (s.fixture) j["fixture"] = true;
  return j;
}

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  throw ArtifactError(where + ": " + what);
}

inline void only_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto k : allowed) known = known || key == k;
    if (!known) bad(where, "unknown field '" + key + "'");
  }
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) bad(where, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::uint64_t unsigned_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad(where, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline ObjectId object_id(const json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "object id must be a string");
  auto id = ObjectId::parse(v.get<std::string>());
  if (!id) bad(where, "malformed object id '" + v.get<std::string>() + "'");
  return *id;
}

inline Argument argument_from_json(const json& v, const std::string& where) {
  if (v.is_null()) return NullLiteral{};
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) return object_id(v, where);
  if (v.is_number_integer()) {
    const auto n = v.get<std::int64_t>();
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<std::int32_t>::max())) {
      bad(where, "int literal out of 32-bit range");
    }
    if (n < std::numeric_limits<std::int32_t>::min() || n > std::numeric_limits<std::int32_t>::max()) {
      bad(where, "int literal out of 32-bit range");
    }
    return static_cast<std::int32_t>(n);
  }
  bad(where, "unsupported argument literal");
}

inline CallStep step_from_json(const json& j, const std::string& where) {
  only_keys(j, {"kind", "type", "op", "signature", "args", "receiver", "bind", "fixture"}, where);
  CallStep s;
  const auto kind = string_field(j, "kind", where);
  if (kind == "construct") {
    s.kind = OperationKind::Constructor;
  } else if (kind == "invoke") {
    s.kind = OperationKind::Method;
  } else {
    bad(where, "unknown step kind '" + kind + "'");
  }
  s.type = string_field(j, "type", where);
  s.operation = string_field(j, "op", where);
  const auto& sig = field(j, "signature", where);
  if (!sig.is_array()) bad(where, "signature must be an array");
  for (const auto& k : sig) {
    if (!k.is_string()) bad(where, "signature entries must be strings");
    s.signature.push_back(k.get<std::string>());
  }
  const auto& args = field(j, "args", where);
  if (!args.is_array()) bad(where, "args must be an array");
  for (const auto& a : args) s.args.push_back(argument_from_json(a, where));
  if (auto it = j.find("receiver"); it != j.end()) s.receiver = object_id(*it, where);
  if (s.kind == OperationKind::Method && !s.receiver) bad(where, "invoke step without receiver");
  if (s.kind == OperationKind::Constructor && s.receiver) bad(where, "construct step with receiver");
  if (auto it = j.find("bind"); it != j.end()) {
    only_keys(*it, {"id", "type"}, where + ".bind");
    s.result = Binding{object_id(field(*it, "id", where), where), string_field(*it, "type", where)};
  }
  if (auto it = j.find("fixture"); it != j.end()) {
    if (!it->is_boolean()) bad(where, "fixture must be a boolean");
    s.fixture = it->get<bool>();
  }
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const TestArtifact& a) {
  using nlohmann::json;
  json header = json::object();
  header["format_version"] = a.header.format_version;
  header["tool_version"] = a.header.tool_version;
  header["name"] = a.header.name;
  header["corpus"] = a.header.corpus;
  header["seed"] = a.header.seed;
  header["attempts_per_test"] = a.header.attempts_per_test;
  header["registry_digest"] = a.header.registry_digest;
  header["rng"] = a.header.rng;
  header["created"] = a.header.created ? json(*a.header.created) : json(nullptr);
  json tests = json::array();
  for (const auto& t : a.tests) {
    json steps = json::array();
    for (const auto& s : t.steps) steps.push_back(detail::step_to_json(s));
    tests.push_back(json{{"id", t.id}, {"steps", std::move(steps)}});
  }
  return json{{"header", std::move(header)}, {"tests", std::move(tests)}};
}

/// Strict: unknown fields anywhere are rejected.
inline TestArtifact artifact_from_json(const nlohmann::json& j) {
  detail::only_keys(j, {"header", "tests"}, "artifact");
  TestArtifact a;
  const auto& h = detail::field(j, "header", "artifact");
  detail::only_keys(h, {"format_version", "tool_version", "name", "corpus", "seed", "attempts_per_test",
                        "registry_digest", "rng", "created"},
                    "header");
  const auto version = detail::unsigned_field(h, "format_version", "header");
  if (version != kArtifactFormatVersion) {
    detail::bad("header", "unsupported format_version " + std::to_string(version));
  }
  a.header.format_version = static_cast<int>(version);
  a.header.tool_version = detail::string_field(h, "tool_version", "header");
  a.header.name = detail::string_field(h, "name", "header");
  a.header.corpus = detail::string_field(h, "corpus", "header");
  a.header.seed = detail::unsigned_field(h, "seed", "header");
  const auto attempts = detail::unsigned_field(h, "attempts_per_test", "header");
  if (attempts > std::numeric_limits<std::uint32_t>::max()) detail::bad("header", "attempts_per_test too large");
  a.header.attempts_per_test = static_cast<std::uint32_t>(attempts);
  a.header.registry_digest = detail::string_field(h, "registry_digest", "header");
  a.header.rng = detail::string_field(h, "rng", "header");
  const auto& created = detail::field(h, "created", "header");
  if (created.is_string()) {
    a.header.created = created.get<std::string>();
  } else if (!created.is_null()) {
    detail::bad("header", "created must be a string or null");
  }

  const auto& tests = detail::field(j, "tests", "artifact");
  if (!tests.is_array()) detail::bad("artifact", "tests must be an array");
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const std::string where = "tests[" + std::to_string(i) + "]";
    detail::only_keys(tests[i], {"id", "steps"}, where);
    TestCase t;
    const auto id = detail::unsigned_field(tests[i], "id", where);
    if (id > std::numeric_limits<std::uint32_t>::max()) detail::bad(where, "id too large");
    t.id = static_cast<std::uint32_t>(id);
    const auto& steps = detail::field(tests[i], "steps", where);
    if (!steps.is_array()) detail::bad(where, "steps must be an array");
    for (std::size_t k = 0; k < steps.size(); ++k) {
      t.steps.push_back(detail::step_from_json(steps[k], where + ".steps[" + std::to_string(k) + "]"));
    }
    if (auto bad_step = first_unbound_use(t.steps)) {
      detail::bad(where, "step " + std::to_string(*bad_step) + " uses an id that is not bound earlier");
    }
    a.tests.push_back(std::move(t));
  }
  return a;
}

/// Canonical text: sorted keys, two-space indentation, trailing newline.
inline std::string serialize(const TestArtifact& a) { return to_json(a).dump(2) + "\n"; }

inline TestArtifact parse_artifact(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError(std::string("artifact is not valid JSON: ") + e.what(), e.byte);
  }
  return artifact_from_json(j);
}

inline void write_artifact(const TestArtifact& a, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw ArtifactError("cannot open '" + destination.string() + "' for writing");
  out << serialize(a);
  out.flush();
  if (!out) throw ArtifactError("failed writing '" + destination.string() + "'");
}

inline TestArtifact read_artifact(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw ArtifactError("cannot open '" + source.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_artifact(buf.str());
}

}  // namespace seqgen
