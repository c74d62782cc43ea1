#pragma once

#include "p2pclear/runner.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace p2pclear {

using ordered_json = nlohmann::ordered_json;

inline constexpr int price_places = 2;
inline constexpr int money_places = 4;
inline constexpr int index_places = 4;

/// Unreadable or structurally broken input (as opposed to an invalid record).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        fields.back() += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

}  // namespace detail

/// Orders CSV with header `id,side,energy_wh,price[,participation]`, columns
/// in any order. Record sequence is the order of appearance.
inline std::vector<RawOrder> read_orders_csv(std::istream& in, std::string_view source = "<csv>") {
  std::vector<RawOrder> records;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (header.empty()) {
      header = detail::split_csv_line(line);
      if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
      for (const char* required : {"id", "side", "energy_wh", "price"}) {
        if (std::find(header.begin(), header.end(), required) == header.end()) {
          throw InputError(std::string(source) + ": missing column '" + required + "'");
        }
      }
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    RawOrder raw;
    raw.sequence = records.size();
    raw.location = std::string(source) + ":" + std::to_string(line_no);
    for (std::size_t c = 0; c < header.size() && c < fields.size(); ++c) {
      const auto& name = header[c];
      if (name == "id") raw.id = fields[c];
      else if (name == "side") raw.side = fields[c];
      else if (name == "energy_wh") raw.energy_wh = fields[c];
      else if (name == "price") raw.price = fields[c];
      else if (name == "participation") raw.participation = fields[c];
    }
    records.push_back(std::move(raw));
  }
  return records;
}

/// Orders JSON: an array of objects keyed like the CSV columns. Prices should
/// be decimal strings; a JSON number is accepted through its shortest text
/// form.
inline std::vector<RawOrder> read_orders_json(std::istream& in, std::string_view source = "<json>") {
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  if (!doc.is_array()) throw InputError(std::string(source) + ": expected an array of orders");

  auto text_of = [](const ordered_json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return {};
    return v.dump();
  };
  std::vector<RawOrder> records;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& item = doc[k];
    RawOrder raw;
    raw.sequence = k;
    raw.location = std::string(source) + "[" + std::to_string(k) + "]";
    if (item.is_object()) {
      if (item.contains("id")) raw.id = text_of(item["id"]);
      if (item.contains("side")) raw.side = text_of(item["side"]);
      if (item.contains("energy_wh")) raw.energy_wh = text_of(item["energy_wh"]);
      if (item.contains("price")) raw.price = text_of(item["price"]);
      if (item.contains("participation")) raw.participation = text_of(item["participation"]);
    }
    records.push_back(std::move(raw));
  }
  return records;
}

/// Reads JSON when the extension is `.json`, CSV otherwise.
inline std::vector<RawOrder> read_orders_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  const auto name = path.filename().string();
  if (path.extension() == ".json") return read_orders_json(in, name);
  return read_orders_csv(in, name);
}

/// Writes orders in submission order so that re-reading reproduces the same
/// sequence numbers and therefore the same book.
inline void write_orders_csv(std::ostream& out, const OrderBook& book) {
  struct Row {
    std::size_t sequence;
    const std::string* id;
    Side side;
    Wh quantity;
    const Price* price;
    Participation participation;
  };
  std::vector<Row> rows;
  for (const auto& o : book.sellers) rows.push_back({o.sequence, &o.id, Side::sell, o.quantity, &o.price, o.participation});
  for (const auto& b : book.buyers) rows.push_back({b.sequence, &b.id, Side::buy, b.quantity, &b.price, b.participation});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.sequence < b.sequence; });
  out << "id,side,energy_wh,price,participation\n";
  for (const auto& r : rows) {
    out << *r.id << ',' << to_string(r.side) << ',' << r.quantity << ',' << format_exact(*r.price) << ','
        << to_string(r.participation) << '\n';
  }
}

inline PerspectiveMode parse_perspective_mode(std::string_view name) {
  if (name == "auto") return PerspectiveMode::automatic;
  if (name == "buyer") return PerspectiveMode::buyer;
  if (name == "seller") return PerspectiveMode::seller;
  throw std::invalid_argument("unknown perspective '" + std::string(name) + "'");
}

/// Config JSON `{fit, grid_price, block_map, default_mechanism,
/// perspective_override}`; every key optional.
inline MarketConfig parse_config(const ordered_json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected an object");
  MarketConfig config;
  auto price_field = [&](const char* key) -> std::optional<Price> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    const auto& v = doc[key];
    const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
    const auto value = parse_decimal(text);
    if (!value || *value < 0) throw std::invalid_argument(std::string("config: invalid ") + key + " '" + text + "'");
    return value;
  };
  config.fit = price_field("fit");
  config.grid_price = price_field("grid_price");
  if (doc.contains("block_map") && !doc["block_map"].is_null()) {
    const auto& map = doc["block_map"];
    if (!map.is_object()) throw std::invalid_argument("config: block_map must be an object");
    std::map<std::string, std::string> blocks;
    for (const auto& [id, block] : map.items()) {
      blocks[id] = block.is_string() ? block.get<std::string>() : block.dump();
    }
    config.block_map = std::move(blocks);
  }
  if (doc.contains("default_mechanism") && !doc["default_mechanism"].is_null()) {
    const auto name = doc["default_mechanism"].get<std::string>();
    const auto m = parse_mechanism(name);
    if (!m) throw std::invalid_argument("config: unknown mechanism '" + name + "'");
    config.default_mechanism = *m;
  }
  if (doc.contains("perspective_override") && !doc["perspective_override"].is_null()) {
    config.perspective = parse_perspective_mode(doc["perspective_override"].get<std::string>());
  }
  config.check();
  return config;
}

inline MarketConfig read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  try {
    return parse_config(ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.filename().string() + ": " + e.what());
  }
}

inline void write_trades_csv(std::ostream& out, const SlotResult& result) {
  out << "seller_id,buyer_id,energy_wh,seller_price,buyer_price\n";
  for (const auto& [block, r] : result.blocks) {
    for (const auto& t : r.settlement.priced_trades) {
      out << t.seller_id << ',' << t.buyer_id << ',' << t.energy << ',' << format_fixed(t.seller_price, price_places)
          << ',' << format_fixed(t.buyer_price, price_places) << '\n';
    }
  }
}

namespace detail {

inline ordered_json optional_fixed(const std::optional<Rational>& v, int places) {
  return v ? ordered_json(format_fixed(*v, places)) : ordered_json(nullptr);
}

}  // namespace detail

inline ordered_json indices_json(const MarketIndices& m) {
  ordered_json ssi = ordered_json::object();
  for (const auto& [id, v] : m.ssi) ssi[id] = detail::optional_fixed(v, index_places);
  ordered_json bsi = ordered_json::object();
  for (const auto& [id, v] : m.bsi) bsi[id] = detail::optional_fixed(v, index_places);
  return {
      {"trc", format_fixed(m.trc, money_places)},
      {"total_revenue", format_fixed(m.total_revenue, money_places)},
      {"total_saving", format_fixed(m.total_saving, money_places)},
      {"budget_surplus", format_fixed(m.budget_surplus, money_places)},
      {"mti", detail::optional_fixed(m.mti, index_places)},
      {"ssi", ssi},
      {"bsi", bsi},
  };
}

inline ordered_json block_report_json(const SlotResult& slot, const BlockResult& r) {
  const auto& d = r.determination;
  const auto& s = r.settlement;
  ordered_json trades = ordered_json::array();
  for (const auto& t : s.priced_trades) {
    trades.push_back({{"seller_id", t.seller_id},
                      {"buyer_id", t.buyer_id},
                      {"energy_wh", t.energy},
                      {"seller_price", format_fixed(t.seller_price, price_places)},
                      {"buyer_price", format_fixed(t.buyer_price, price_places)}});
  }
  ordered_json revenue = ordered_json::object();
  for (const auto& o : s.sellers) revenue[o.id] = format_fixed(o.revenue, money_places);
  ordered_json saving = ordered_json::object();
  for (const auto& b : s.buyers) saving[b.id] = format_fixed(b.saving, money_places);

  return {
      {"slot", slot.slot},
      {"block", r.block},
      {"mechanism", std::string(to_string(s.mechanism))},
      {"determination",
       {{"L", d.sellers},
        {"K", d.buyers},
        {"r_L", detail::optional_fixed(d.boundary_seller_price, price_places)},
        {"b_K", detail::optional_fixed(d.boundary_buyer_price, price_places)}}},
      {"perspective", std::string(to_string(s.ledger.perspective))},
      {"reduced", s.reduced},
      {"trades", trades},
      {"totals",
       {{"revenue", format_fixed(s.total_revenue, money_places)},
        {"saving", format_fixed(s.total_saving, money_places)},
        {"trc", format_fixed(s.trc, money_places)},
        {"surplus", format_fixed(s.auctioneer_surplus, money_places)}}},
      {"revenue", revenue},
      {"saving", saving},
      {"indices", indices_json(r.indices)},
      {"unsold", s.ledger.unsold},
      {"unserved", s.ledger.unserved},
  };
}

/// A single per-block object when the slot has one block, otherwise an
/// envelope with a `blocks` array. Both carry warnings and rejections.
inline ordered_json report_json(const SlotResult& slot) {
  ordered_json warnings = slot.warnings;
  ordered_json rejections = ordered_json::array();
  for (const auto& r : slot.rejections) {
    rejections.push_back({{"id", r.id}, {"side", std::string(to_string(r.side))}, {"reason", r.reason}});
  }
  ordered_json doc;
  if (slot.blocks.size() == 1) {
    doc = block_report_json(slot, slot.blocks.begin()->second);
  } else {
    ordered_json blocks = ordered_json::array();
    for (const auto& [name, r] : slot.blocks) blocks.push_back(block_report_json(slot, r));
    doc = {{"slot", slot.slot}, {"mechanism", std::string(to_string(slot.mechanism))}, {"blocks", blocks}};
  }
  doc["warnings"] = warnings;
  doc["rejections"] = rejections;
  return doc;
}

/// Comparison CSV; a leading `block` column is added when `with_block` is set.
inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows, bool with_block) {
  if (with_block) out << "block,";
  out << "mechanism,total_revenue,total_saving,trc,budget_surplus,mti\n";
  for (const auto& r : rows) {
    if (with_block) out << r.block << ',';
    out << to_string(r.mechanism) << ',' << format_fixed(r.total_revenue, money_places) << ','
        << format_fixed(r.total_saving, money_places) << ',' << format_fixed(r.trc, money_places) << ','
        << format_fixed(r.budget_surplus, money_places) << ',' << (r.mti ? format_fixed(*r.mti, index_places) : "")
        << '\n';
  }
}

inline ordered_json comparison_json(const std::vector<ComparisonRow>& rows, bool with_block) {
  ordered_json doc = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    if (with_block) row["block"] = r.block;
    row["mechanism"] = std::string(to_string(r.mechanism));
    row["total_revenue"] = format_fixed(r.total_revenue, money_places);
    row["total_saving"] = format_fixed(r.total_saving, money_places);
    row["trc"] = format_fixed(r.trc, money_places);
    row["budget_surplus"] = format_fixed(r.budget_surplus, money_places);
    row["mti"] = detail::optional_fixed(r.mti, index_places);
    doc.push_back(std::move(row));
  }
  return doc;
}

}  // namespace p2pclear
