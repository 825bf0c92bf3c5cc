#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqgen/replay.hpp"

namespace seqgen {

/// The input does not reproduce the requested failure.
class ShrinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShrinkOptions {
  std::size_t budget = 10000;          // candidate executions, including the initial check
  bool shrink_arguments = false;       // second phase: move Int32 literals toward 0
  std::size_t chunk_threshold = 16;    // chunked pass only above this length
};

struct ShrinkResult {
  std::uint32_t test_id = 0;
  std::vector<CallStep> steps;
  std::size_t original_length = 0;
  std::size_t minimal_length = 0;
  ErrorInfo failure;
  std::size_t iterations = 0;
  bool budget_exhausted = false;
};

/// Removes the steps at `indices` together with every later step that reads
/// a binding made by a removed step, transitively.
inline std::vector<CallStep> remove_with_dependents(const std::vector<CallStep>& steps,
                                                    std::span<const std::size_t> indices) {
  std::set<ObjectId> dead;
  std::vector<CallStep> out;
  out.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    bool drop = std::find(indices.begin(), indices.end(), i) != indices.end();
    for (const auto& id : steps[i].uses()) drop = drop || dead.count(id) > 0;
    if (drop) {
      if (steps[i].result) dead.insert(steps[i].result->id);
    } else {
      out.push_back(steps[i]);
    }
  }
  return out;
}

inline std::vector<CallStep> remove_with_dependents(const std::vector<CallStep>& steps, std::size_t index) {
  const std::size_t one[] = {index};
  return remove_with_dependents(steps, one);
}

/// Renames bindings to ob1, ob2, ... in binding order.
inline std::vector<CallStep> canonicalize_ids(std::vector<CallStep> steps) {
  std::map<ObjectId, ObjectId> rename;
  std::uint32_t next = 1;
  auto map_id = [&](ObjectId id) {
    auto it = rename.find(id);
    return it == rename.end() ? id : it->second;
  };
  for (auto& s : steps) {
    if (s.receiver) s.receiver = map_id(*s.receiver);
    for (auto& a : s.args) {
      if (auto* id = std::get_if<ObjectId>(&a)) *id = map_id(*id);
    }
    if (s.result) {
      const ObjectId fresh{next++};
      rename[s.result->id] = fresh;
      s.result->id = fresh;
    }
  }
  return steps;
}

namespace detail {

class Shrinker {
 public:
  Shrinker(const Registry& registry, std::uint32_t test_id, ErrorInfo target, std::size_t budget)
      : registry_(registry), test_id_(test_id), target_(std::move(target)), budget_(budget) {}

  /// Replays a candidate. On success `failing_step` holds the error's index.
  bool reproduces(const std::vector<CallStep>& steps) {
    if (iterations_ >= budget_) {
      exhausted_ = true;
      return false;
    }
    ++iterations_;
    const auto v = run_steps(registry_, test_id_, steps);
    if (v.outcome != Outcome::Error || !v.error->same_failure(target_)) return false;
    failing_step_ = *v.step;
    return true;
  }

  /// Accepts a reproducing candidate, dropping steps after the failure,
  /// which can never execute.
  void accept(std::vector<CallStep> steps) {
    steps.resize(failing_step_ + 1);
    current_ = std::move(steps);
  }

  /// Backward single-step deletion with cascade, to a fixpoint.
  void greedy() {
    bool progress = true;
    while (progress && !exhausted_) {
      progress = false;
      for (std::size_t k = current_.size(); k-- > 0 && !exhausted_;) {
        if (k >= current_.size()) continue;
        auto candidate = remove_with_dependents(current_, k);
        if (reproduces(candidate)) {
          accept(std::move(candidate));
          progress = true;
        }
      }
    }
  }

  /// Complement removal over n chunks, refining n on failure.
  void chunked() {
    std::size_t n = 2;
    while (current_.size() >= 2 && !exhausted_) {
      const std::size_t size = current_.size();
      const std::size_t chunk = (size + n - 1) / n;
      bool reduced = false;
      for (std::size_t start = 0; start < size && !exhausted_; start += chunk) {
        std::vector<std::size_t> indices;
        for (std::size_t i = start; i < std::min(size, start + chunk); ++i) indices.push_back(i);
        auto candidate = remove_with_dependents(current_, indices);
        if (candidate.size() < size && reproduces(candidate)) {
          accept(std::move(candidate));
          n = std::max<std::size_t>(n - 1, 2);
          reduced = true;
          break;
        }
      }
      if (!reduced) {
        if (n >= size) break;
        n = std::min(n * 2, size);
      }
    }
  }

  /// Moves each Int32 literal to 0, or halves it while the failure persists.
  void arguments() {
    for (std::size_t i = 0; i < current_.size() && !exhausted_; ++i) {
      for (std::size_t a = 0; a < current_[i].args.size() && !exhausted_; ++a) {
        auto* lit = std::get_if<std::int32_t>(&current_[i].args[a]);
        if (!lit || *lit == 0) continue;
        auto attempt = [&](std::int32_t value) {
          auto candidate = current_;
          candidate[i].args[a] = value;
          if (!reproduces(candidate)) return false;
          accept(std::move(candidate));
          return true;
        };
        std::int32_t x = *lit;
        if (attempt(0)) continue;
        for (std::int32_t y = x / 2; y != 0 && y != x && !exhausted_; y = x / 2) {
          if (!attempt(y)) break;
          x = y;
        }
      }
    }
  }

  std::vector<CallStep>& current() { return current_; }
  std::size_t iterations() const { return iterations_; }
  bool exhausted() const { return exhausted_; }

 private:
  const Registry& registry_;
  std::uint32_t test_id_;
  ErrorInfo target_;
  std::size_t budget_;
  std::size_t iterations_ = 0;
  std::size_t failing_step_ = 0;
  bool exhausted_ = false;
  std::vector<CallStep> current_;
};

}  // namespace detail

/// Reduces a failing test case to a 1-minimal sequence reproducing the same
/// failure: removing any single remaining step, with the steps depending on
/// it, loses the failure. Global minimality is not attempted. When the
/// budget runs out the shortest reproducing sequence found is returned with
/// `budget_exhausted` set.
inline ShrinkResult shrink(const TestCase& test, const ErrorInfo& target, const Registry& registry,
                           const ShrinkOptions& options = {}) {
  if (options.budget < 1) throw ShrinkError("shrink budget must be at least 1");
  detail::Shrinker s(registry, test.id, target, options.budget);
  if (!s.reproduces(test.steps)) {
    const auto v = run_test_case(registry, test);
    std::string got = std::string(to_string(v.outcome));
    if (v.error) got += " (" + std::string(to_string(v.error->kind)) + " " + v.error->type + "." + v.error->operation + ")";
    throw ShrinkError("test" + std::to_string(test.id) + " does not reproduce the target failure; replay gives " + got);
  }
  s.accept(test.steps);

  s.greedy();
  if (s.current().size() > options.chunk_threshold && !s.exhausted()) {
    s.chunked();
    s.greedy();
  }
  if (options.shrink_arguments && !s.exhausted()) {
    s.arguments();
    s.greedy();
  }

  ShrinkResult r;
  r.test_id = test.id;
  r.steps = canonicalize_ids(std::move(s.current()));
  r.original_length = test.steps.size();
  r.minimal_length = r.steps.size();
  r.failure = target;
  r.iterations = s.iterations();
  r.budget_exhausted = s.exhausted();
  return r;
}

/// Shrinks toward whatever failure the test case currently shows.
inline ShrinkResult shrink(const TestCase& test, const Registry& registry, const ShrinkOptions& options = {}) {
  const auto v = run_test_case(registry, test);
  if (v.outcome != Outcome::Error) {
    throw ShrinkError("test" + std::to_string(test.id) + " does not fail (" + std::string(to_string(v.outcome)) + ")");
  }
  return shrink(test, *v.error, registry, options);
}

}  // namespace seqgen
