#pragma once

#include "p2pclear/orderbook.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace p2pclear {

/// Winner set of a book: the first `sellers` offers trade with the first
/// `buyers` bids. Boundary prices belong to the last winners, next prices to
/// the first losers.
struct Determination {
  std::size_t sellers = 0;
  std::size_t buyers = 0;
  std::optional<Price> boundary_seller_price;
  std::optional<Price> boundary_buyer_price;
  std::optional<Price> next_seller_price;
  std::optional<Price> next_buyer_price;
  Wh total_supply = 0;
  Wh total_demand = 0;

  bool empty() const noexcept { return sellers == 0 && buyers == 0; }

  friend bool operator==(const Determination&, const Determination&) = default;
};

/// Determination for an explicit winner count; boundary and next prices are
/// read from the sorted book.
inline Determination determination_for(const OrderBook& book, std::size_t sellers, std::size_t buyers) {
  if (sellers > book.seller_count() || buyers > book.buyer_count()) {
    throw std::invalid_argument("winner count exceeds book size");
  }
  Determination d;
  d.sellers = sellers;
  d.buyers = buyers;
  if (sellers > 0) d.boundary_seller_price = book.sellers[sellers - 1].price;
  if (buyers > 0) d.boundary_buyer_price = book.buyers[buyers - 1].price;
  if (sellers < book.seller_count()) d.next_seller_price = book.sellers[sellers].price;
  if (buyers < book.buyer_count()) d.next_buyer_price = book.buyers[buyers].price;
  for (std::size_t i = 0; i < sellers; ++i) d.total_supply += book.sellers[i].quantity;
  for (std::size_t j = 0; j < buyers; ++j) d.total_demand += book.buyers[j].quantity;
  return d;
}

/// Breakeven index: the largest l <= min(N, M) whose l-th lowest offer is
/// met by the l-th highest bid. Winner counts are equal on both sides.
inline Determination determine(const OrderBook& book) {
  const std::size_t limit = std::min(book.seller_count(), book.buyer_count());
  std::size_t winners = 0;
  for (std::size_t l = 1; l <= limit; ++l) {
    if (book.buyers[l - 1].price >= book.sellers[l - 1].price) winners = l;
  }
  return determination_for(book, winners, winners);
}

enum class Perspective { buyer, seller };

/// How the allocation perspective is chosen; `automatic` applies
/// `select_perspective`.
enum class PerspectiveMode { automatic, buyer, seller };

inline std::string_view to_string(Perspective p) { return p == Perspective::buyer ? "buyer" : "seller"; }

inline Perspective select_perspective(const Determination& d) {
  return d.total_supply > d.total_demand ? Perspective::seller : Perspective::buyer;
}

inline Perspective resolve_perspective(const Determination& d, PerspectiveMode mode) {
  switch (mode) {
    case PerspectiveMode::buyer:
      return Perspective::buyer;
    case PerspectiveMode::seller:
      return Perspective::seller;
    case PerspectiveMode::automatic:
      break;
  }
  return select_perspective(d);
}

/// Energy moved from winning seller `seller` to winning buyer `buyer`; both
/// are indices into the sorted book.
struct Trade {
  std::size_t seller = 0;
  std::size_t buyer = 0;
  Wh energy = 0;

  friend bool operator==(const Trade&, const Trade&) = default;
  friend auto operator<=>(const Trade&, const Trade&) = default;
};

struct TradeLedger {
  std::vector<Trade> trades;  // sorted by (seller, buyer)
  std::vector<Wh> sold;       // per winning seller
  std::vector<Wh> bought;     // per winning buyer
  Wh unsold = 0;
  Wh unserved = 0;
  Perspective perspective = Perspective::buyer;

  Wh traded() const noexcept {
    Wh total = 0;
    for (const auto& t : trades) total += t.energy;
    return total;
  }

  /// Trade-for-trade equality, ignoring which perspective produced it.
  bool same_allocation(const TradeLedger& other) const {
    return std::tie(trades, sold, bought, unsold, unserved) ==
           std::tie(other.trades, other.sold, other.bought, other.unsold, other.unserved);
  }
};

namespace detail {

struct Fill {
  std::size_t priority = 0;
  std::size_t source = 0;
  Wh energy = 0;
};

// Greedy fill: priority participants are served in rank order from source
// participants in rank order. The first priority participant whose quantity
// exceeds the remaining source total is marginal: fractional takes the rest,
// non-fractional takes nothing. Nobody after the marginal one is served.
inline std::vector<Fill> greedy_fill(std::span<const Wh> priority_qty,
                                     std::span<const Participation> priority_mode,
                                     std::span<const Wh> source_qty) {
  std::vector<Wh> remaining(source_qty.begin(), source_qty.end());
  Wh remaining_total = std::accumulate(remaining.begin(), remaining.end(), Wh{0});
  std::vector<Fill> fills;
  std::size_t cursor = 0;

  for (std::size_t p = 0; p < priority_qty.size(); ++p) {
    if (remaining_total == 0) break;
    Wh want = priority_qty[p];
    const bool marginal = want > remaining_total;
    if (marginal) {
      if (priority_mode[p] == Participation::non_fractional) break;
      want = remaining_total;
    }
    while (want > 0) {
      while (remaining[cursor] == 0) ++cursor;
      const Wh take = std::min(want, remaining[cursor]);
      fills.push_back({p, cursor, take});
      remaining[cursor] -= take;
      remaining_total -= take;
      want -= take;
    }
    if (marginal) break;
  }
  return fills;
}

inline void require_consistent(const OrderBook& book, const Determination& d) {
  if (d.sellers > book.seller_count() || d.buyers > book.buyer_count() ||
      d != determination_for(book, d.sellers, d.buyers)) {
    throw std::invalid_argument("determination does not match the order book");
  }
}

}  // namespace detail

/// Greedy allocation over the winner set. Buyer perspective fills bids in
/// descending order from the cheapest offers; seller perspective drains
/// offers in ascending order into the highest bids.
inline TradeLedger allocate(const OrderBook& book, const Determination& d, Perspective perspective) {
  detail::require_consistent(book, d);

  std::vector<Wh> supply(d.sellers);
  std::vector<Participation> seller_mode(d.sellers);
  for (std::size_t i = 0; i < d.sellers; ++i) {
    supply[i] = book.sellers[i].quantity;
    seller_mode[i] = book.sellers[i].participation;
  }
  std::vector<Wh> demand(d.buyers);
  std::vector<Participation> buyer_mode(d.buyers);
  for (std::size_t j = 0; j < d.buyers; ++j) {
    demand[j] = book.buyers[j].quantity;
    buyer_mode[j] = book.buyers[j].participation;
  }

  TradeLedger ledger;
  ledger.perspective = perspective;
  ledger.sold.assign(d.sellers, 0);
  ledger.bought.assign(d.buyers, 0);

  if (perspective == Perspective::buyer) {
    for (const auto& f : detail::greedy_fill(demand, buyer_mode, supply)) {
      ledger.trades.push_back({f.source, f.priority, f.energy});
    }
  } else {
    for (const auto& f : detail::greedy_fill(supply, seller_mode, demand)) {
      ledger.trades.push_back({f.priority, f.source, f.energy});
    }
  }
  std::sort(ledger.trades.begin(), ledger.trades.end());

  for (const auto& t : ledger.trades) {
    ledger.sold[t.seller] += t.energy;
    ledger.bought[t.buyer] += t.energy;
  }
  const Wh traded = ledger.traded();
  ledger.unsold = d.total_supply - traded;
  ledger.unserved = d.total_demand - traded;
  return ledger;
}

/// Determination followed by allocation under the given perspective mode.
inline TradeLedger clear(const OrderBook& book, const Determination& d,
                         PerspectiveMode mode = PerspectiveMode::automatic) {
  return allocate(book, d, resolve_perspective(d, mode));
}

}  // namespace p2pclear
