#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "levycal/pricing.hpp"

namespace levycal {

/// One strike of a settlement price table.
struct MarketQuote {
  double strike = 0.0;
  std::optional<double> call;
  std::optional<double> put;
  double maturity = 0.0;
  double spot = 0.0;

  void validate() const;
};

struct MarketTable {
  std::vector<MarketQuote> quotes;
  /// From `# spot=` / `# maturity=` / `# r=` metadata rows, if present.
  std::optional<double> spot, maturity, rate;
};

/// Reads `strike,call,put` rows; empty cells mean a missing price.
MarketTable read_market_csv(const std::filesystem::path& path);
void write_market_csv(const MarketTable& table, const std::filesystem::path& path);

struct IngestOptions {
  std::optional<double> spot;
  std::optional<double> maturity;
  /// Skips the parity estimate when set.
  std::optional<double> rate;
  double spread = 0.01;
  double delta_floor = 1e-6;
};

/// Median over quotes with both prices of -(1/T) log((S - C + P) / K).
/// Quotes with a nonpositive parity argument are skipped with a warning on stderr.
double parity_rate(const std::vector<MarketQuote>& quotes, double spot, double maturity);

/// Out-of-the-money normalized prices on the log-forward moneyness scale,
/// noise level spread * O floored at delta_floor, sorted by x.
ObservationSet ingest_market(const MarketTable& table, const IngestOptions& options = {});
ObservationSet ingest_market_csv(const std::filesystem::path& path, const IngestOptions& options = {});

/// Calls and puts on the given strikes from the model prices, via put-call parity.
MarketTable synthetic_market(const LevyModel& model, double spot, double rate, const std::vector<double>& strikes);

/// Inverse of ingest for OTM-only data: strikes S0 e^{x + rT}, OTM price in the call or put column.
MarketTable market_from_observations(const ObservationSet& obs);

}  // namespace levycal
