#pragma once

// Bank accounts with an undo history. The plain variant keeps the faults of
// the original classes: 32-bit overflow in credit and debit, and cancel
// restoring a balance below a minimum raised in the meantime.

#include <cstdint>
#include <limits>
#include <memory>
#include <string>

#include "seqgen/engine.hpp"
#include "seqgen/registry.hpp"

namespace seqgen::corpus {

class History final : public Object<History> {
 public:
  static constexpr std::string_view kTypeName = "History";

  History(std::int32_t balance, std::shared_ptr<History> prec) : balance_(balance), prec_(std::move(prec)) {}

  /// Balance of the account before the recorded operation.
  std::int32_t balance() const { return balance_; }
  const std::shared_ptr<History>& prec() const { return prec_; }

  std::shared_ptr<Instance> clone() const override {
    auto copy = std::make_shared<History>(*this);
    if (prec_) copy->prec_ = std::static_pointer_cast<History>(prec_->clone());
    return copy;
  }

  nlohmann::json state() const override {
    nlohmann::json j{{"balance", balance_}};
    j["prec"] = prec_ ? prec_->state() : nlohmann::json(nullptr);
    return j;
  }

 private:
  std::int32_t balance_;
  std::shared_ptr<History> prec_;
};

class Account final : public Object<Account> {
 public:
  static constexpr std::string_view kTypeName = "Account";

  Account(std::int32_t balance, std::int32_t min) : balance_(balance), min_(min) {}

  std::int32_t balance() const { return balance_; }
  std::int32_t min() const { return min_; }
  const std::shared_ptr<History>& hist() const { return hist_; }

  void credit(CallContext& ctx, std::int32_t amount) {
    hist_ = ctx.construct<History>("History", {Value::int32(balance_), Value::ref(hist_)});
    balance_ = wrap_add(balance_, amount);
  }

  void debit(CallContext& ctx, std::int32_t amount) {
    hist_ = ctx.construct<History>("History", {Value::int32(balance_), Value::ref(hist_)});
    balance_ = wrap_sub(balance_, amount);
  }

  void set_min(std::int32_t min) { min_ = min; }

  void cancel() {
    balance_ = hist_->balance();
    hist_ = hist_->prec();
  }

  std::shared_ptr<Instance> clone() const override {
    auto copy = std::make_shared<Account>(*this);
    if (hist_) copy->hist_ = std::static_pointer_cast<History>(hist_->clone());
    return copy;
  }

  nlohmann::json state() const override {
    nlohmann::json j{{"balance", balance_}, {"min", min_}};
    j["hist"] = hist_ ? hist_->state() : nlohmann::json(nullptr);
    return j;
  }

 private:
  std::int32_t balance_;
  std::int32_t min_;
  std::shared_ptr<History> hist_;
};

struct BankOptions {
  /// credit and debit refuse amounts whose result leaves the 32-bit range.
  bool guard_overflow = false;
  /// cancel requires the restored balance to respect the current minimum.
  bool guard_cancel = false;
  /// credit requires amount >= credit_floor.
  std::int32_t credit_floor = 0;
};

/// The variant with all three faults guarded by preconditions.
inline BankOptions fixed_bank() { return {true, true, 0}; }

inline TypeUnderTest history_type() {
  using K = ValueKind;
  TypeBuilder<History> b("History");
  b.constructor({K::int32(), K::reference("History")})
      .body([](CallContext& ctx, const Args& a) { return ctx.make<History>(a.int32(0), a.ref<History>(1)); });
  b.method("getBalance", {}, K::int32()).pure().body([](CallContext&, History& h, const Args&) { return h.balance(); });
  b.method("getPrec", {}, K::reference("History")).pure().body([](CallContext&, History& h, const Args&) {
    return Value::ref(h.prec());
  });
  return b.build();
}

inline TypeUnderTest account_type(const BankOptions& options = {}) {
  using K = ValueKind;
  constexpr std::int64_t kMax = std::numeric_limits<std::int32_t>::max();
  TypeBuilder<Account> b("Account");
  b.invariant("getBalance() >= getMin()", [](const Account& a) { return a.balance() >= a.min(); });

  b.constructor({K::int32(), K::int32()})
      .pre("balance >= min", [](const Args& a) { return a.int32(0) >= a.int32(1); })
      .body([](CallContext& ctx, const Args& a) { return ctx.make<Account>(a.int32(0), a.int32(1)); });

  b.method("getBalance", {}, K::int32()).pure().body([](CallContext&, Account& a, const Args&) { return a.balance(); });
  b.method("getMin", {}, K::int32()).pure().body([](CallContext&, Account& a, const Args&) { return a.min(); });
  b.method("getHist", {}, K::reference("History")).pure().body([](CallContext&, Account& a, const Args&) {
    return Value::ref(a.hist());
  });

  // The old balance plus the amount is computed with the same 32-bit
  // arithmetic as the body, so an overflow surfaces through the invariant.
  auto pushed_history = [](const Post<Account>& p, std::int32_t expected_balance) {
    const auto& now = p.self();
    const auto* old = p.old();
    return now.balance() == expected_balance && p.fresh(now.hist().get()) && now.hist() &&
           now.hist()->balance() == old->balance() && same_object(now.hist()->prec().get(), old->hist().get());
  };

  std::string credit_pre = "amount >= " + std::to_string(options.credit_floor);
  if (options.guard_overflow) credit_pre += " && getBalance() + amount <= MAX_INT";
  b.method("credit", {K::int32()})
      .pre(credit_pre,
           [options, kMax](const Account& acc, const Args& a) {
             const std::int32_t amount = a.int32(0);
             if (amount < options.credit_floor || amount < 0) return false;
             return !options.guard_overflow || std::int64_t{acc.balance()} + amount <= kMax;
           })
      .post("getBalance() == \\old(getBalance()) + amount && \\fresh(getHist()) && "
            "getHist().getBalance() == \\old(getBalance()) && getHist().getPrec() == \\old(getHist())",
            [pushed_history](const Post<Account>& p) {
              return pushed_history(p, wrap_add(p.old()->balance(), p.args().int32(0)));
            })
      .body([](CallContext& ctx, Account& a, const Args& args) { a.credit(ctx, args.int32(0)); });

  // Java int semantics: getBalance() - amount wraps in the unguarded
  // precondition, which is what lets an overflowing debit through.
  std::string debit_pre = options.guard_overflow ? "amount >= 0 && getBalance() - amount >= getMin() (exact)"
                                                 : "amount >= 0 && getBalance() - amount >= getMin()";
  b.method("debit", {K::int32()})
      .pre(debit_pre,
           [options](const Account& acc, const Args& a) {
             const std::int32_t amount = a.int32(0);
             if (amount < 0) return false;
             if (options.guard_overflow) return std::int64_t{acc.balance()} - amount >= acc.min();
             return wrap_sub(acc.balance(), amount) >= acc.min();
           })
      .post("getBalance() == \\old(getBalance()) - amount && \\fresh(getHist()) && "
            "getHist().getBalance() == \\old(getBalance()) && getHist().getPrec() == \\old(getHist())",
            [pushed_history](const Post<Account>& p) {
              return pushed_history(p, wrap_sub(p.old()->balance(), p.args().int32(0)));
            })
      .body([](CallContext& ctx, Account& a, const Args& args) { a.debit(ctx, args.int32(0)); });

  b.method("setMin", {K::int32()})
      .pre("getBalance() >= min", [](const Account& acc, const Args& a) { return acc.balance() >= a.int32(0); })
      .body([](CallContext&, Account& a, const Args& args) { a.set_min(args.int32(0)); });

  b.method("cancel", {})
      .pre(options.guard_cancel ? "getHist() != null && getHist().getBalance() >= getMin()" : "getHist() != null",
           [options](const Account& acc, const Args&) {
             if (!acc.hist()) return false;
             return !options.guard_cancel || acc.hist()->balance() >= acc.min();
           })
      .post("getHist() == \\old(getHist().getPrec()) && getBalance() == \\old(getHist().getBalance())",
            [](const Post<Account>& p) {
              const auto& old_hist = p.old()->hist();
              return same_object(p.self().hist().get(), old_hist->prec().get()) &&
                     p.self().balance() == old_hist->balance();
            })
      .body([](CallContext&, Account& a, const Args&) { a.cancel(); });

  return b.build();
}

inline void register_bank(Registry& registry, const BankOptions& options = {}) {
  registry.add_type(account_type(options));
  registry.add_type(history_type());
}

/// Draws debit amounts from [0, getBalance() - getMin()], so debit's entry
/// precondition always holds.
inline void register_debit_range_generator(Registry& registry) {
  registry.register_parameter_generator(
      "Account", "debit", {"int"}, 0,
      [](const Instance* receiver, Rng& rng) {
        const auto& acc = static_cast<const Account&>(*receiver);
        const std::int64_t room = std::int64_t{acc.balance()} - acc.min();
        const std::int64_t hi = std::min<std::int64_t>(room, std::numeric_limits<std::int32_t>::max());
        return Value::int32(static_cast<std::int32_t>(rng.int_in(0, std::max<std::int64_t>(hi, 0))));
      },
      "Account.debit(int)#0:range[0,balance-min]");
}

}  // namespace seqgen::corpus
