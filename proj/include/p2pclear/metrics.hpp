#pragma once

#include "p2pclear/mechanisms.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace p2pclear {

namespace detail {

template <class Outcomes>
const auto& find_player(const Outcomes& outcomes, std::string_view id, const char* side) {
  const auto it = std::find_if(outcomes.begin(), outcomes.end(), [&](const auto& o) { return o.id == id; });
  if (it == outcomes.end()) {
    throw std::out_of_range(std::string("unknown ") + side + " id '" + std::string(id) + "'");
  }
  return *it;
}

}  // namespace detail

/// R_i = sum_j (seller price - r_i) * x_ij / 1000, recomputed from priced
/// trades.
inline Money revenue(std::string_view seller_id, const Settlement& s) {
  const auto& seller = detail::find_player(s.sellers, seller_id, "seller");
  Money total = 0;
  for (const auto& t : s.priced_trades) {
    if (t.seller_id == seller_id) total += value_of(t.seller_price - seller.reservation_price, t.energy);
  }
  return total;
}

/// C_j = sum_i (b_j - buyer price) * q_ji / 1000.
inline Money cost_saving(std::string_view buyer_id, const Settlement& s) {
  const auto& buyer = detail::find_player(s.buyers, buyer_id, "buyer");
  Money total = 0;
  for (const auto& t : s.priced_trades) {
    if (t.buyer_id == buyer_id) total += value_of(buyer.bid - t.buyer_price, t.energy);
  }
  return total;
}

/// Total revenue plus cost saving over all players.
inline Money trc(const Settlement& s) {
  Money total = 0;
  for (const auto& seller : s.sellers) total += revenue(seller.id, s);
  for (const auto& buyer : s.buyers) total += cost_saving(buyer.id, s);
  return total;
}

/// Price-free form sum x_ij (b_j - r_i) / 1000. Equals `trc` whenever every
/// trade is strongly balanced.
inline Money trc_closed_form(const Settlement& s) {
  Money total = 0;
  for (const auto& t : s.priced_trades) {
    total += value_of(s.buyers[t.buyer].bid - s.sellers[t.seller].reservation_price, t.energy);
  }
  return total;
}

/// Money kept by the intermediary; negative is a deficit.
inline Money budget_balance(const Settlement& s) {
  Money total = 0;
  for (const auto& t : s.priced_trades) total += value_of(t.buyer_price - t.seller_price, t.energy);
  return total;
}

/// Realized income over expected income at the full offered quantity.
/// Undefined for a zero reservation price.
inline std::optional<Rational> ssi(std::string_view seller_id, const Settlement& s) {
  const auto& seller = detail::find_player(s.sellers, seller_id, "seller");
  const Rational expected = seller.reservation_price * Rational(seller.offered);
  if (expected == 0) return std::nullopt;
  Rational income = 0;
  for (const auto& t : s.priced_trades) {
    if (t.seller_id == seller_id) income += t.seller_price * Rational(t.energy);
  }
  return income / expected;
}

/// Expected cost at the full demanded quantity over realized cost. Undefined
/// when the buyer paid nothing.
inline std::optional<Rational> bsi(std::string_view buyer_id, const Settlement& s) {
  const auto& buyer = detail::find_player(s.buyers, buyer_id, "buyer");
  Rational cost = 0;
  for (const auto& t : s.priced_trades) {
    if (t.buyer_id == buyer_id) cost += t.buyer_price * Rational(t.energy);
  }
  if (cost == 0) return std::nullopt;
  return buyer.bid * Rational(buyer.demanded) / cost;
}

/// Quantity-weighted mean BSI over quantity-weighted mean SSI. Players with an
/// undefined index drop out of both the sum and the count. Undefined when
/// nothing traded or the seller side sums to zero.
inline std::optional<Rational> mti(const Settlement& s) {
  if (s.ledger.traded() == 0) return std::nullopt;
  Rational buyer_sum = 0;
  long long buyer_count = 0;
  for (const auto& b : s.buyers) {
    if (const auto index = bsi(b.id, s)) {
      buyer_sum += *index * Rational(b.bought);
      ++buyer_count;
    }
  }
  Rational seller_sum = 0;
  long long seller_count = 0;
  for (const auto& o : s.sellers) {
    if (const auto index = ssi(o.id, s)) {
      seller_sum += *index * Rational(o.sold);
      ++seller_count;
    }
  }
  if (buyer_count == 0 || seller_count == 0 || seller_sum == 0) return std::nullopt;
  return (buyer_sum / buyer_count) / (seller_sum / seller_count);
}

struct MarketIndices {
  Money trc;
  Money total_revenue;
  Money total_saving;
  Money budget_surplus;
  std::optional<Rational> mti;
  std::vector<std::pair<std::string, std::optional<Rational>>> ssi;
  std::vector<std::pair<std::string, std::optional<Rational>>> bsi;
};

inline MarketIndices compute_indices(const Settlement& s) {
  MarketIndices m;
  for (const auto& o : s.sellers) {
    m.total_revenue += revenue(o.id, s);
    m.ssi.emplace_back(o.id, ssi(o.id, s));
  }
  for (const auto& b : s.buyers) {
    m.total_saving += cost_saving(b.id, s);
    m.bsi.emplace_back(b.id, bsi(b.id, s));
  }
  m.trc = m.total_revenue + m.total_saving;
  m.budget_surplus = budget_balance(s);
  m.mti = mti(s);
  return m;
}

}  // namespace p2pclear
