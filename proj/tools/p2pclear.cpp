// Command-line front end: clear one slot, compare mechanisms, or validate an
// order file.

#include "p2pclear/p2pclear.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace p2pclear;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_usage = 2;

void print_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    std::cerr << d.location << ": " << (d.id.empty() ? "<no id>" : d.id) << ": " << d.message << '\n';
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

fs::path ensure_directory(const std::string& dir) {
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (!fs::is_directory(path)) throw InputError("cannot create output directory '" + dir + "'");
  return path;
}

struct Loaded {
  MarketConfig config;
  ValidationReport orders;
};

Loaded load(const std::string& input, const std::string& config_path) {
  Loaded l;
  if (!config_path.empty()) l.config = read_config_file(config_path);
  const auto records = read_orders_file(input);
  l.orders = validate_orders(records);
  return l;
}

int run_clear(const std::string& input, const std::string& config_path, const std::string& mechanism_name,
              const std::string& perspective, const std::string& output, const std::string& slot) {
  std::optional<Mechanism> mechanism;
  if (!mechanism_name.empty()) {
    mechanism = parse_mechanism(mechanism_name);
    if (!mechanism) {
      std::cerr << "error: unknown mechanism '" << mechanism_name << "'\n";
      return exit_usage;
    }
  }
  auto loaded = load(input, config_path);
  if (!loaded.orders.ok()) {
    print_diagnostics(loaded.orders.diagnostics);
    return exit_invalid;
  }
  if (!perspective.empty()) loaded.config.perspective = parse_perspective_mode(perspective);

  const auto result = run_slot(loaded.orders.offers, loaded.orders.bids, loaded.config,
                               mechanism.value_or(loaded.config.default_mechanism), slot);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& r : result.rejections) std::cerr << "rejected: " << r.id << ": " << r.reason << '\n';

  const auto dir = ensure_directory(output);
  auto trades = open_output(dir / "trades.csv");
  write_trades_csv(trades, result);
  auto report = open_output(dir / "report.json");
  report << report_json(result).dump(2) << '\n';
  if (!trades || !report) throw InputError("failed writing to '" + output + "'");
  return exit_ok;
}

int run_compare(const std::string& input, const std::string& config_path, const std::string& format,
                const std::string& output) {
  const auto loaded = load(input, config_path);
  if (!loaded.orders.ok()) {
    print_diagnostics(loaded.orders.diagnostics);
    return exit_invalid;
  }
  const auto rows = compare_mechanisms(loaded.orders.offers, loaded.orders.bids, loaded.config);
  const bool with_block = loaded.config.block_map.has_value();
  const auto dir = ensure_directory(output);
  if (format == "json") {
    auto out = open_output(dir / "comparison.json");
    out << comparison_json(rows, with_block).dump(2) << '\n';
    if (!out) throw InputError("failed writing comparison.json");
  } else {
    auto out = open_output(dir / "comparison.csv");
    write_comparison_csv(out, rows, with_block);
    if (!out) throw InputError("failed writing comparison.csv");
  }
  return exit_ok;
}

int run_validate(const std::string& input) {
  const auto records = read_orders_file(input);
  const auto report = validate_orders(records);
  print_diagnostics(report.diagnostics);
  std::cout << records.size() << " record(s), " << report.offers.size() << " offer(s), " << report.bids.size()
            << " bid(s), " << report.diagnostics.size() << " invalid\n";
  return report.ok() ? exit_ok : exit_invalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-to-peer energy auction clearing"};
  app.require_subcommand(1);

  std::string input, config_path, mechanism, perspective, output, slot, format = "csv";
  std::string compare_output = ".";

  auto* clear_cmd = app.add_subcommand("clear", "Clear one slot and write trades.csv and report.json");
  clear_cmd->add_option("--input", input, "Orders file (.csv or .json)")->required();
  clear_cmd->add_option("--mechanism", mechanism, "Payment mechanism (default from config, else proposed)");
  clear_cmd->add_option("--perspective", perspective, "Allocation perspective")
      ->check(CLI::IsMember({"auto", "buyer", "seller"}));
  clear_cmd->add_option("--config", config_path, "Market config JSON");
  clear_cmd->add_option("--output", output, "Output directory")->required();
  clear_cmd->add_option("--slot", slot, "Time-slot label written to the report");

  auto* compare_cmd = app.add_subcommand("compare", "Settle under every mechanism and write a comparison table");
  compare_cmd->add_option("--input", input, "Orders file (.csv or .json)")->required();
  compare_cmd->add_option("--config", config_path, "Market config JSON");
  compare_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  compare_cmd->add_option("--output", compare_output, "Output directory");

  auto* validate_cmd = app.add_subcommand("validate", "Check an order file and print per-record diagnostics");
  validate_cmd->add_option("--input", input, "Orders file (.csv or .json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*clear_cmd) return run_clear(input, config_path, mechanism, perspective, output, slot);
    if (*compare_cmd) return run_compare(input, config_path, format, compare_output);
    if (*validate_cmd) return run_validate(input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_invalid;
  }
  return exit_usage;
}
