#pragma once

#include "p2pclear/metrics.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace p2pclear {

struct MarketConfig {
  std::optional<Price> fit;         // feed-in tariff, floor for rational offers
  std::optional<Price> grid_price;  // retail price, ceiling for rational bids
  std::optional<std::map<std::string, std::string>> block_map;
  Mechanism default_mechanism = Mechanism::proposed;
  PerspectiveMode perspective = PerspectiveMode::automatic;

  void check() const {
    if (fit && grid_price && *fit > *grid_price) {
      throw std::invalid_argument("config: fit exceeds grid_price");
    }
  }
};

inline constexpr const char* default_block = "default";

struct Rejection {
  std::string id;
  Side side;
  std::string reason;
};

struct BlockOrders {
  std::vector<Offer> offers;
  std::vector<Bid> bids;
};

struct BlockPartition {
  std::map<std::string, BlockOrders> blocks;
  std::vector<Rejection> rejections;
};

/// Routes each order to its block. Without a block map everything lands in
/// a single default block, which exists even when there are no orders.
inline BlockPartition partition_blocks(const std::vector<Offer>& offers, const std::vector<Bid>& bids,
                                       const MarketConfig& config) {
  BlockPartition partition;
  if (!config.block_map) {
    partition.blocks[default_block] = BlockOrders{offers, bids};
    return partition;
  }
  const auto& map = *config.block_map;
  for (const auto& o : offers) {
    if (auto it = map.find(o.id); it != map.end()) {
      partition.blocks[it->second].offers.push_back(o);
    } else {
      partition.rejections.push_back({o.id, Side::sell, "no block assigned"});
    }
  }
  for (const auto& b : bids) {
    if (auto it = map.find(b.id); it != map.end()) {
      partition.blocks[it->second].bids.push_back(b);
    } else {
      partition.rejections.push_back({b.id, Side::buy, "no block assigned"});
    }
  }
  return partition;
}

/// Offers below the feed-in tariff and bids above the grid price. These are
/// notices only; such orders still clear.
inline std::vector<std::string> rationality_warnings(const std::vector<Offer>& offers,
                                                     const std::vector<Bid>& bids,
                                                     const MarketConfig& config) {
  std::vector<std::string> warnings;
  if (config.fit) {
    for (const auto& o : offers) {
      if (o.price < *config.fit) {
        warnings.push_back("seller " + o.id + ": reservation price " + format_exact(o.price) +
                           " below feed-in tariff " + format_exact(*config.fit));
      }
    }
  }
  if (config.grid_price) {
    for (const auto& b : bids) {
      if (b.price > *config.grid_price) {
        warnings.push_back("buyer " + b.id + ": bid " + format_exact(b.price) + " above grid price " +
                           format_exact(*config.grid_price));
      }
    }
  }
  return warnings;
}

struct BlockResult {
  std::string block;
  OrderBook book;
  Determination determination;
  TradeLedger ledger;
  Settlement settlement;
  MarketIndices indices;
};

/// Determination, allocation, payment and indices for one block's book.
inline BlockResult run_block(std::string block, OrderBook book, Mechanism mechanism,
                             PerspectiveMode mode = PerspectiveMode::automatic) {
  BlockResult r;
  r.block = std::move(block);
  r.determination = determine(book);
  r.ledger = clear(book, r.determination, mode);
  r.settlement = settle(book, r.determination, r.ledger, mechanism, mode);
  r.indices = compute_indices(r.settlement);
  r.book = std::move(book);
  return r;
}

struct SlotResult {
  std::string slot;
  Mechanism mechanism = Mechanism::proposed;
  std::map<std::string, BlockResult> blocks;
  std::vector<std::string> warnings;
  std::vector<Rejection> rejections;
};

inline SlotResult run_slot(const std::vector<Offer>& offers, const std::vector<Bid>& bids,
                           const MarketConfig& config, Mechanism mechanism, std::string slot = "") {
  config.check();
  SlotResult result;
  result.slot = std::move(slot);
  result.mechanism = mechanism;
  result.warnings = rationality_warnings(offers, bids, config);
  auto partition = partition_blocks(offers, bids, config);
  result.rejections = std::move(partition.rejections);
  for (auto& [block, orders] : partition.blocks) {
    result.blocks.emplace(block, run_block(block, build_book(std::move(orders.offers), std::move(orders.bids)),
                                           mechanism, config.perspective));
  }
  return result;
}

class ValidationFailed : public std::runtime_error {
 public:
  explicit ValidationFailed(std::vector<Diagnostic> diagnostics)
      : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<Diagnostic>& d) {
    std::string text = std::to_string(d.size()) + " invalid order record(s)";
    for (const auto& x : d) text += "\n  " + x.location + ": " + x.message;
    return text;
  }

  std::vector<Diagnostic> diagnostics_;
};

/// Validates raw records first; any invalid record aborts the slot with all
/// diagnostics attached.
inline SlotResult run_slot(std::span<const RawOrder> records, const MarketConfig& config, Mechanism mechanism,
                           std::string slot = "") {
  auto report = validate_orders(records);
  if (!report.ok()) throw ValidationFailed(std::move(report.diagnostics));
  return run_slot(report.offers, report.bids, config, mechanism, std::move(slot));
}

struct ComparisonRow {
  std::string block;
  Mechanism mechanism = Mechanism::proposed;
  Money total_revenue;
  Money total_saving;
  Money trc;
  Money budget_surplus;
  std::optional<Rational> mti;
};

/// One row per block and mechanism. Non-reducing mechanisms price a shared
/// ledger; trade reduction and McAfee settle their own reduced ledgers.
inline std::vector<ComparisonRow> compare_mechanisms(const std::vector<Offer>& offers, const std::vector<Bid>& bids,
                                                     const MarketConfig& config) {
  config.check();
  std::vector<ComparisonRow> rows;
  auto partition = partition_blocks(offers, bids, config);
  for (auto& [block, orders] : partition.blocks) {
    const auto book = build_book(std::move(orders.offers), std::move(orders.bids));
    const auto d = determine(book);
    const auto ledger = clear(book, d, config.perspective);
    for (auto m : all_mechanisms) {
      const auto s = settle(book, d, ledger, m, config.perspective);
      const auto idx = compute_indices(s);
      rows.push_back({block, m, idx.total_revenue, idx.total_saving, idx.trc, idx.budget_surplus, idx.mti});
    }
  }
  return rows;
}

}  // namespace p2pclear
