#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "seqgen/corpus/bank.hpp"

namespace seqgen::corpus {

/// A named registration procedure selectable from the command line.
struct CorpusEntry {
  std::string name;
  std::string description;
  std::function<void(Registry&)> install;
};

inline const std::vector<CorpusEntry>& catalog() {
  static const std::vector<CorpusEntry> entries = {
      {"bank", "Account and History with their original faults", [](Registry& r) { register_bank(r); }},
      {"bank-fixed", "bank with overflow and cancel guards in the preconditions",
       [](Registry& r) { register_bank(r, fixed_bank()); }},
      {"bank-strict-credit", "bank where credit requires a strictly positive amount",
       [](Registry& r) {
         BankOptions o;
         o.credit_floor = 1;
         register_bank(r, o);
       }},
      {"bank-guided", "bank with a single Account and in-range debit amounts",
       [](Registry& r) {
         register_bank(r);
         r.change_creation_probability("Account", threshold_probability(1));
         register_debit_range_generator(r);
       }},
  };
  return entries;
}

inline const CorpusEntry* find_corpus(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

}  // namespace seqgen::corpus
