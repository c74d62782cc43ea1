#pragma once

#include "p2pclear/clearing.hpp"

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace p2pclear {

enum class Mechanism {
  proposed,
  uniform,
  pay_as_bid,
  vickrey,
  gsp,
  average,
  vcg,
  trade_reduction,
  mcafee,
};

inline constexpr std::array<Mechanism, 9> all_mechanisms{
    Mechanism::proposed, Mechanism::uniform, Mechanism::pay_as_bid,
    Mechanism::vickrey,  Mechanism::gsp,     Mechanism::average,
    Mechanism::vcg,      Mechanism::trade_reduction, Mechanism::mcafee,
};

inline std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::proposed: return "proposed";
    case Mechanism::uniform: return "uniform";
    case Mechanism::pay_as_bid: return "pay_as_bid";
    case Mechanism::vickrey: return "vickrey";
    case Mechanism::gsp: return "gsp";
    case Mechanism::average: return "average";
    case Mechanism::vcg: return "vcg";
    case Mechanism::trade_reduction: return "trade_reduction";
    case Mechanism::mcafee: return "mcafee";
  }
  return "unknown";
}

inline std::optional<Mechanism> parse_mechanism(std::string_view name) {
  for (auto m : all_mechanisms) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

/// Budget property of the auctioneer: `strong` never keeps or adds money,
/// `weak` may keep a surplus, `deficit` may pay out. McAfee is strong on its
/// interior branch and weak when it reduces trade.
enum class BudgetBalance { strong, weak, deficit, branch_dependent };

struct MechanismTraits {
  BudgetBalance budget;
  bool reduces_trade;

  constexpr bool sbb() const noexcept { return budget == BudgetBalance::strong; }
};

constexpr MechanismTraits traits(Mechanism m) {
  switch (m) {
    case Mechanism::vcg: return {BudgetBalance::deficit, false};
    case Mechanism::trade_reduction: return {BudgetBalance::weak, true};
    case Mechanism::mcafee: return {BudgetBalance::branch_dependent, true};
    default: return {BudgetBalance::strong, false};
  }
}

struct PricedTrade {
  std::size_t seller = 0;
  std::size_t buyer = 0;
  std::string seller_id;
  std::string buyer_id;
  Wh energy = 0;
  Price seller_price;  // received by the seller
  Price buyer_price;   // paid by the buyer
};

struct SellerOutcome {
  std::string id;
  Price reservation_price;
  Wh offered = 0;
  Wh sold = 0;
  Money revenue;
};

struct BuyerOutcome {
  std::string id;
  Price bid;
  Wh demanded = 0;
  Wh bought = 0;
  Money saving;
};

/// Priced result of one mechanism. `determination` and `ledger` describe the
/// winner set that actually trades, which is one smaller than the original on
/// each side when a mechanism reduces trade.
struct Settlement {
  Mechanism mechanism = Mechanism::proposed;
  bool reduced = false;
  Determination determination;
  TradeLedger ledger;
  std::vector<PricedTrade> priced_trades;
  std::vector<SellerOutcome> sellers;
  std::vector<BuyerOutcome> buyers;
  Money total_revenue;
  Money total_saving;
  Money trc;
  Money auctioneer_surplus;

  /// True when every trade pays the seller exactly what the buyer pays.
  bool strongly_balanced() const {
    for (const auto& t : priced_trades) {
      if (t.seller_price != t.buyer_price) return false;
    }
    return true;
  }
};

struct PricePair {
  Price seller;
  Price buyer;
};

using TradePricer = std::function<PricePair(const Trade&)>;

/// Builds a settlement by pricing each ledger trade and accumulating the
/// per-player revenue and saving.
inline Settlement price_ledger(const OrderBook& book, const Determination& d, TradeLedger ledger,
                               Mechanism mechanism, const TradePricer& pricer) {
  Settlement s;
  s.mechanism = mechanism;
  s.determination = d;
  for (std::size_t i = 0; i < d.sellers; ++i) {
    const auto& o = book.sellers[i];
    s.sellers.push_back({o.id, o.price, o.quantity, 0, Money(0)});
  }
  for (std::size_t j = 0; j < d.buyers; ++j) {
    const auto& b = book.buyers[j];
    s.buyers.push_back({b.id, b.price, b.quantity, 0, Money(0)});
  }
  for (const auto& t : ledger.trades) {
    const PricePair p = pricer(t);
    auto& seller = s.sellers[t.seller];
    auto& buyer = s.buyers[t.buyer];
    seller.sold += t.energy;
    seller.revenue += value_of(p.seller - seller.reservation_price, t.energy);
    buyer.bought += t.energy;
    buyer.saving += value_of(buyer.bid - p.buyer, t.energy);
    s.auctioneer_surplus += value_of(p.buyer - p.seller, t.energy);
    s.priced_trades.push_back({t.seller, t.buyer, seller.id, buyer.id, t.energy, p.seller, p.buyer});
  }
  for (const auto& seller : s.sellers) s.total_revenue += seller.revenue;
  for (const auto& buyer : s.buyers) s.total_saving += buyer.saving;
  s.trc = s.total_revenue + s.total_saving;
  s.ledger = std::move(ledger);
  return s;
}

namespace detail {

inline void require_winners(const Determination& d) {
  if (d.sellers == 0 || d.buyers == 0) throw std::invalid_argument("price level needs at least one winner");
}

}  // namespace detail

/// Midpoint of the matched reservation price and bid; the same price is
/// received and paid.
inline Price price_proposed(const OrderBook& book, const Trade& t) {
  return (book.sellers[t.seller].price + book.buyers[t.buyer].price) / 2;
}

/// Single clearing level at the lowest winning bid.
inline Price price_uniform(const Determination& d) {
  detail::require_winners(d);
  return *d.boundary_buyer_price;
}

inline Price price_pay_as_bid(const OrderBook& book, const Trade& t) { return book.buyers[t.buyer].price; }

/// Highest losing bid; the lowest winning bid when every bid wins.
inline Price price_vickrey(const Determination& d) {
  detail::require_winners(d);
  return d.next_buyer_price.value_or(*d.boundary_buyer_price);
}

/// Next-ranked bid below the buyer's own; the buyer's own bid when it is the
/// last one in the book.
inline Price price_gsp(const OrderBook& book, const Trade& t) {
  const std::size_t next = t.buyer + 1;
  return next < book.buyer_count() ? book.buyers[next].price : book.buyers[t.buyer].price;
}

/// Mean over every winning reservation price and winning bid.
inline Price price_average(const OrderBook& book, const Determination& d) {
  detail::require_winners(d);
  Rational sum = 0;
  for (std::size_t i = 0; i < d.sellers; ++i) sum += book.sellers[i].price;
  for (std::size_t j = 0; j < d.buyers; ++j) sum += book.buyers[j].price;
  return sum / Rational(static_cast<long long>(d.sellers + d.buyers));
}

/// Sellers receive min(b_K, r_{L+1}); buyers pay max(r_L, b_{K+1}).
inline PricePair price_vcg(const Determination& d) {
  detail::require_winners(d);
  const Price& r_last = *d.boundary_seller_price;
  const Price& b_last = *d.boundary_buyer_price;
  const Price seller = d.next_seller_price ? std::min(b_last, *d.next_seller_price) : b_last;
  const Price buyer = d.next_buyer_price ? std::max(r_last, *d.next_buyer_price) : r_last;
  return {seller, buyer};
}

inline Settlement empty_settlement(const OrderBook& book, Mechanism mechanism) {
  const auto d = determination_for(book, 0, 0);
  return price_ledger(book, d, allocate(book, d, Perspective::buyer), mechanism,
                      [](const Trade&) { return PricePair{}; });
}

/// Drops the marginal seller and buyer, re-allocates the remaining winners,
/// and pays sellers r_L while charging buyers b_K.
inline Settlement settle_trade_reduction(const OrderBook& book, const Determination& d,
                                         PerspectiveMode mode = PerspectiveMode::automatic,
                                         Mechanism label = Mechanism::trade_reduction) {
  detail::require_consistent(book, d);
  if (d.sellers == 0 || d.buyers == 0) return empty_settlement(book, label);
  const Price seller_price = *d.boundary_seller_price;
  const Price buyer_price = *d.boundary_buyer_price;
  const auto reduced = determination_for(book, d.sellers - 1, d.buyers - 1);
  auto s = price_ledger(book, reduced, clear(book, reduced, mode), label,
                        [&](const Trade&) { return PricePair{seller_price, buyer_price}; });
  s.reduced = true;
  return s;
}

/// Prices every winner at the mean of the first losing offer and bid when it
/// lies within [r_L, b_K]; otherwise falls back to trade reduction.
inline Settlement settle_mcafee(const OrderBook& book, const Determination& d,
                                PerspectiveMode mode = PerspectiveMode::automatic) {
  detail::require_consistent(book, d);
  if (d.sellers == 0 || d.buyers == 0) return empty_settlement(book, Mechanism::mcafee);
  if (d.next_seller_price && d.next_buyer_price) {
    const Price candidate = (*d.next_seller_price + *d.next_buyer_price) / 2;
    if (*d.boundary_seller_price <= candidate && candidate <= *d.boundary_buyer_price) {
      return price_ledger(book, d, clear(book, d, mode), Mechanism::mcafee,
                          [&](const Trade&) { return PricePair{candidate, candidate}; });
    }
  }
  return settle_trade_reduction(book, d, mode, Mechanism::mcafee);
}

/// Payment step. `ledger` must come from allocating `d` on `book`; the
/// reducing mechanisms ignore it and re-allocate their smaller winner set.
inline Settlement settle(const OrderBook& book, const Determination& d, const TradeLedger& ledger,
                         Mechanism mechanism, PerspectiveMode mode = PerspectiveMode::automatic) {
  detail::require_consistent(book, d);
  if (ledger.sold.size() != d.sellers || ledger.bought.size() != d.buyers) {
    throw std::invalid_argument("ledger does not match the determination");
  }
  if (d.sellers == 0 || d.buyers == 0) return empty_settlement(book, mechanism);

  auto uniform_at = [](Price level) {
    return [level](const Trade&) { return PricePair{level, level}; };
  };
  auto per_trade = [&book](Price (*rule)(const OrderBook&, const Trade&)) {
    return [&book, rule](const Trade& t) {
      const Price p = rule(book, t);
      return PricePair{p, p};
    };
  };

  switch (mechanism) {
    case Mechanism::proposed:
      return price_ledger(book, d, ledger, mechanism, per_trade(price_proposed));
    case Mechanism::uniform:
      return price_ledger(book, d, ledger, mechanism, uniform_at(price_uniform(d)));
    case Mechanism::pay_as_bid:
      return price_ledger(book, d, ledger, mechanism, per_trade(price_pay_as_bid));
    case Mechanism::vickrey:
      return price_ledger(book, d, ledger, mechanism, uniform_at(price_vickrey(d)));
    case Mechanism::gsp:
      return price_ledger(book, d, ledger, mechanism, per_trade(price_gsp));
    case Mechanism::average:
      return price_ledger(book, d, ledger, mechanism, uniform_at(price_average(book, d)));
    case Mechanism::vcg: {
      const PricePair levels = price_vcg(d);
      return price_ledger(book, d, ledger, mechanism, [levels](const Trade&) { return levels; });
    }
    case Mechanism::trade_reduction:
      return settle_trade_reduction(book, d, mode);
    case Mechanism::mcafee:
      return settle_mcafee(book, d, mode);
  }
  throw std::invalid_argument("unknown mechanism");
}

}  // namespace p2pclear
