#pragma once

// Shared fixtures for the unit and acceptance suites: the reference 8x8 data
// set, random instance generators and a brute-force allocation oracle.

#include "p2pclear/p2pclear.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace p2pclear::testing {

inline Price dec(const char* text) { return *parse_decimal(text); }

inline Offer offer(std::string id, Wh quantity, const char* price, std::size_t sequence = 0,
                   Participation mode = Participation::fractional) {
  return Offer{std::move(id), quantity, dec(price), mode, sequence};
}

inline Bid bid(std::string id, Wh quantity, const char* price, std::size_t sequence = 0,
               Participation mode = Participation::fractional) {
  return Bid{std::move(id), quantity, dec(price), mode, sequence};
}

inline std::vector<Offer> reference_offers() {
  return {offer("S1", 200, "10.0", 0), offer("S2", 150, "10.5", 1), offer("S3", 100, "11.0", 2),
          offer("S4", 150, "12.0", 3), offer("S5", 100, "12.1", 4), offer("S6", 100, "12.5", 5),
          offer("S7", 150, "13.0", 6), offer("S8", 100, "13.2", 7)};
}

inline std::vector<Bid> reference_bids() {
  return {bid("B1", 150, "14.0", 8),  bid("B2", 150, "13.5", 9),  bid("B3", 200, "13.0", 10),
          bid("B4", 100, "12.5", 11), bid("B5", 100, "12.2", 12), bid("B6", 100, "12.0", 13),
          bid("B7", 100, "11.5", 14), bid("B8", 100, "11.0", 15)};
}

inline OrderBook reference_book() { return build_book(reference_offers(), reference_bids()); }

struct NamedTrade {
  std::string seller;
  std::string buyer;
  Wh energy;
  friend bool operator==(const NamedTrade&, const NamedTrade&) = default;
};

inline std::vector<NamedTrade> named(const OrderBook& book, const TradeLedger& ledger) {
  std::vector<NamedTrade> out;
  for (const auto& t : ledger.trades) out.push_back({book.sellers[t.seller].id, book.buyers[t.buyer].id, t.energy});
  return out;
}

inline std::vector<NamedTrade> reference_expected_trades() {
  return {{"S1", "B1", 150}, {"S1", "B2", 50},  {"S2", "B2", 100}, {"S2", "B3", 50},
          {"S3", "B3", 100}, {"S4", "B3", 50},  {"S4", "B4", 100}, {"S5", "B5", 100}};
}

struct RandomBookOptions {
  std::size_t max_players = 20;
  Wh max_quantity = 500;
  int price_lo_tenths = 50;   // 5.0
  int price_hi_tenths = 200;  // 20.0
  bool all_fractional = false;
};

/// Random book with prices on a 0.1 grid (ties likely) and random modes.
inline OrderBook random_book(std::mt19937_64& rng, const RandomBookOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> count(0, opt.max_players);
  std::uniform_int_distribution<Wh> qty(1, opt.max_quantity);
  std::uniform_int_distribution<int> tenths(opt.price_lo_tenths, opt.price_hi_tenths);
  std::bernoulli_distribution fractional(0.5);
  auto mode = [&] {
    return opt.all_fractional || fractional(rng) ? Participation::fractional : Participation::non_fractional;
  };
  std::vector<Offer> offers;
  std::vector<Bid> bids;
  std::size_t seq = 0;
  const auto n = count(rng);
  const auto m = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    offers.push_back(Offer{"S" + std::to_string(i), qty(rng), Rational(tenths(rng), 10), mode(), seq++});
  }
  for (std::size_t j = 0; j < m; ++j) {
    bids.push_back(Bid{"B" + std::to_string(j), qty(rng), Rational(tenths(rng), 10), mode(), seq++});
  }
  std::shuffle(offers.begin(), offers.end(), rng);
  std::shuffle(bids.begin(), bids.end(), rng);
  return build_book(std::move(offers), std::move(bids));
}

/// Adjusts the marginal winner's quantity so that winner supply equals winner
/// demand. The determination is unchanged because prices are untouched.
inline OrderBook balance_winners(OrderBook book) {
  const auto d = determine(book);
  if (d.sellers == 0) return book;
  if (d.total_supply > d.total_demand) {
    book.buyers[d.buyers - 1].quantity += d.total_supply - d.total_demand;
  } else {
    book.sellers[d.sellers - 1].quantity += d.total_demand - d.total_supply;
  }
  return book;
}

/// Maximum of sum x_ij (b_j - r_i) over every integral allocation among the
/// winners that respects each seller's and buyer's quantity, found by
/// exhaustive enumeration. Values are in Wh * currency/kWh.
inline Rational brute_force_best_surplus(const OrderBook& book, const Determination& d) {
  const std::size_t rows = d.sellers;
  const std::size_t cols = d.buyers;
  std::vector<Wh> seller_left(rows), buyer_left(cols);
  for (std::size_t i = 0; i < rows; ++i) seller_left[i] = book.sellers[i].quantity;
  for (std::size_t j = 0; j < cols; ++j) buyer_left[j] = book.buyers[j].quantity;

  Rational best = 0;
  Rational current = 0;
  // Visit cells row-major; each cell takes any amount both sides can still afford.
  auto visit = [&](auto&& self, std::size_t cell) -> void {
    if (cell == rows * cols) {
      best = std::max(best, current);
      return;
    }
    const std::size_t i = cell / cols;
    const std::size_t j = cell % cols;
    const Rational gain = book.buyers[j].price - book.sellers[i].price;
    const Wh cap = std::min(seller_left[i], buyer_left[j]);
    for (Wh x = 0; x <= cap; ++x) {
      seller_left[i] -= x;
      buyer_left[j] -= x;
      current += gain * x;
      self(self, cell + 1);
      current -= gain * x;
      seller_left[i] += x;
      buyer_left[j] += x;
    }
  };
  visit(visit, 0);
  return best;
}

inline Rational ledger_surplus(const OrderBook& book, const TradeLedger& ledger) {
  Rational total = 0;
  for (const auto& t : ledger.trades) total += (book.buyers[t.buyer].price - book.sellers[t.seller].price) * t.energy;
  return total;
}

}  // namespace p2pclear::testing
