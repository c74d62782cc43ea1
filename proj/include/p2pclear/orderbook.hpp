#pragma once

#include "p2pclear/decimal.hpp"

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace p2pclear {

enum class Side { sell, buy };

enum class Participation { fractional, non_fractional };

inline std::string_view to_string(Side side) { return side == Side::sell ? "sell" : "buy"; }

inline std::string_view to_string(Participation p) {
  return p == Participation::fractional ? "fractional" : "nonfractional";
}

/// A sealed order as submitted. `Order<Side::sell>` is an offer with a
/// reservation price; `Order<Side::buy>` is a bid.
template <Side S>
struct Order {
  static constexpr Side side = S;

  std::string id;
  Wh quantity = 0;
  Price price;
  Participation participation = Participation::fractional;
  std::size_t sequence = 0;

  friend bool operator==(const Order&, const Order&) = default;
};

using Offer = Order<Side::sell>;
using Bid = Order<Side::buy>;

/// Order record as read from a file, before validation. Empty
/// `participation` means the default (fractional).
struct RawOrder {
  std::string id;
  std::string side;
  std::string energy_wh;
  std::string price;
  std::string participation;
  std::size_t sequence = 0;
  std::string location;
};

enum class OrderErrorKind {
  missing_id,
  malformed_side,
  malformed_quantity,
  non_positive_quantity,
  malformed_price,
  negative_price,
  malformed_participation,
  duplicate_id,
};

class OrderError : public std::invalid_argument {
 public:
  OrderError(OrderErrorKind kind, const std::string& message)
      : std::invalid_argument(message), kind_(kind) {}

  OrderErrorKind kind() const noexcept { return kind_; }

 private:
  OrderErrorKind kind_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline Wh parse_quantity(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  Wh value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw OrderError(OrderErrorKind::malformed_quantity,
                     "malformed energy quantity '" + std::string(text) + "'");
  }
  if (value <= 0) {
    throw OrderError(OrderErrorKind::non_positive_quantity,
                     "non-positive energy quantity " + std::to_string(value));
  }
  return value;
}

inline Price parse_price(std::string_view text) {
  text = trim(text);
  const auto value = parse_decimal(text);
  if (!value) {
    throw OrderError(OrderErrorKind::malformed_price, "malformed price '" + std::string(text) + "'");
  }
  if (*value < 0) {
    throw OrderError(OrderErrorKind::negative_price, "negative price " + std::string(text));
  }
  return *value;
}

inline Participation parse_participation(std::string_view text) {
  text = trim(text);
  if (text.empty() || text == "fractional") return Participation::fractional;
  if (text == "nonfractional" || text == "non-fractional" || text == "non_fractional") {
    return Participation::non_fractional;
  }
  throw OrderError(OrderErrorKind::malformed_participation,
                   "unknown participation '" + std::string(text) + "'");
}

template <Side S>
Order<S> make_order(const RawOrder& raw, std::string_view id) {
  Order<S> order;
  order.id = std::string(id);
  order.quantity = parse_quantity(raw.energy_wh);
  order.price = parse_price(raw.price);
  order.participation = parse_participation(raw.participation);
  order.sequence = raw.sequence;
  return order;
}

}  // namespace detail

using ValidatedOrder = std::variant<Offer, Bid>;

/// Validates a single record. Duplicate ids are a property of a whole order
/// set and are checked by `validate_orders` and `build_book`.
inline ValidatedOrder validate_order(const RawOrder& raw) {
  const auto id = detail::trim(raw.id);
  if (id.empty()) throw OrderError(OrderErrorKind::missing_id, "missing order id");
  const auto side = detail::trim(raw.side);
  if (side == "sell") return detail::make_order<Side::sell>(raw, id);
  if (side == "buy") return detail::make_order<Side::buy>(raw, id);
  throw OrderError(OrderErrorKind::malformed_side, "unknown side '" + std::string(side) + "'");
}

struct Diagnostic {
  std::string location;
  std::string id;
  OrderErrorKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Offer> offers;
  std::vector<Bid> bids;
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return diagnostics.empty(); }
};

/// Validates every record, collecting one diagnostic per rejected record.
/// The first occurrence of an id on a side wins; later ones are rejected.
inline ValidationReport validate_orders(std::span<const RawOrder> records) {
  ValidationReport report;
  std::set<std::string, std::less<>> seen_sellers;
  std::set<std::string, std::less<>> seen_buyers;
  for (const auto& raw : records) {
    try {
      auto order = validate_order(raw);
      if (auto* offer = std::get_if<Offer>(&order)) {
        if (!seen_sellers.insert(offer->id).second) {
          throw OrderError(OrderErrorKind::duplicate_id, "duplicate seller id '" + offer->id + "'");
        }
        report.offers.push_back(std::move(*offer));
      } else {
        auto& bid = std::get<Bid>(order);
        if (!seen_buyers.insert(bid.id).second) {
          throw OrderError(OrderErrorKind::duplicate_id, "duplicate buyer id '" + bid.id + "'");
        }
        report.bids.push_back(std::move(bid));
      }
    } catch (const OrderError& e) {
      report.diagnostics.push_back({raw.location, std::string(detail::trim(raw.id)), e.kind(), e.what()});
    }
  }
  return report;
}

/// Sellers by ascending reservation price, buyers by descending bid. Equal
/// prices fall back to submission sequence, then id.
struct OrderBook {
  std::vector<Offer> sellers;
  std::vector<Bid> buyers;

  std::size_t seller_count() const noexcept { return sellers.size(); }
  std::size_t buyer_count() const noexcept { return buyers.size(); }
  bool empty() const noexcept { return sellers.empty() && buyers.empty(); }

  friend bool operator==(const OrderBook&, const OrderBook&) = default;
};

inline bool seller_precedes(const Offer& a, const Offer& b) {
  if (a.price != b.price) return a.price < b.price;
  if (a.sequence != b.sequence) return a.sequence < b.sequence;
  return a.id < b.id;
}

inline bool buyer_precedes(const Bid& a, const Bid& b) {
  if (a.price != b.price) return a.price > b.price;
  if (a.sequence != b.sequence) return a.sequence < b.sequence;
  return a.id < b.id;
}

namespace detail {

template <class Orders>
void require_unique_ids(const Orders& orders, std::string_view side_name) {
  std::set<std::string_view> seen;
  for (const auto& o : orders) {
    if (!seen.insert(o.id).second) {
      throw OrderError(OrderErrorKind::duplicate_id,
                       "duplicate " + std::string(side_name) + " id '" + o.id + "'");
    }
  }
}

}  // namespace detail

inline OrderBook build_book(std::vector<Offer> offers, std::vector<Bid> bids) {
  detail::require_unique_ids(offers, "seller");
  detail::require_unique_ids(bids, "buyer");
  std::sort(offers.begin(), offers.end(), seller_precedes);
  std::sort(bids.begin(), bids.end(), buyer_precedes);
  return OrderBook{std::move(offers), std::move(bids)};
}

}  // namespace p2pclear
