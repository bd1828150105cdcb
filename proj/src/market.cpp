#include "levycal/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <charconv>
#include <iostream>
#include <numeric>
#include <sstream>

namespace levycal {

namespace {

std::string trim_copy(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

/// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, result.ptr);
}

std::optional<double> parse_cell(const std::string& cell, const std::string& what) {
  const std::string t = trim_copy(cell);
  if (t.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InputError("market file: bad " + what + " '" + t + "'");
  }
  require(used == t.size(), "market file: bad " + what + " '" + t + "'");
  return v;
}

}  // namespace

void MarketQuote::validate() const {
  require(strike > 0.0 && std::isfinite(strike), "quote: strike must be positive");
  require(call.has_value() || put.has_value(), "quote: needs a call or a put price");
  require(maturity > 0.0, "quote: maturity must be positive");
  require(spot > 0.0, "quote: spot must be positive");
  for (const auto& p : {call, put}) {
    if (!p) continue;
    require(*p >= 0.0 && std::isfinite(*p), "quote: prices must be nonnegative");
    require(*p < 10.0 * spot, "quote: price exceeds 10 x spot");
  }
}

MarketTable read_market_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open market file " + path.string());
  MarketTable table;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_copy(line).empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim_copy(line.substr(1, eq - 1));
      const auto value = parse_cell(line.substr(eq + 1), key);
      if (key == "spot") table.spot = value;
      else if (key == "maturity") table.maturity = value;
      else if (key == "r") table.rate = value;
      continue;
    }
    if (!header) {
      require(trim_copy(line) == "strike,call,put", "market file: expected header 'strike,call,put'");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    require(cells.size() == 3, "market file: expected 3 columns in '" + line + "'");
    MarketQuote q;
    const auto k = parse_cell(cells[0], "strike");
    require(k.has_value(), "market file: missing strike");
    q.strike = *k;
    q.call = parse_cell(cells[1], "call");
    q.put = parse_cell(cells[2], "put");
    table.quotes.push_back(q);
  }
  require(header, "market file: missing header");
  return table;
}

void write_market_csv(const MarketTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (table.spot) out << "# spot=" << shortest(*table.spot) << '\n';
  if (table.maturity) out << "# maturity=" << shortest(*table.maturity) << '\n';
  if (table.rate) out << "# r=" << shortest(*table.rate) << '\n';
  out << "strike,call,put\n";
  for (const auto& q : table.quotes) {
    out << shortest(q.strike) << ',';
    if (q.call) out << shortest(*q.call);
    out << ',';
    if (q.put) out << shortest(*q.put);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

double parity_rate(const std::vector<MarketQuote>& quotes, double spot, double maturity) {
  std::vector<double> rates;
  for (const auto& q : quotes) {
    if (!q.call || !q.put) continue;
    const double arg = (spot - *q.call + *q.put) / q.strike;
    if (!(arg > 0.0)) {
      std::cerr << "warning: strike " << q.strike << " has a nonpositive parity argument, skipped\n";
      continue;
    }
    rates.push_back(-std::log(arg) / maturity);
  }
  require(!rates.empty(), "no quote with both call and put; supply the interest rate");
  std::sort(rates.begin(), rates.end());
  const std::size_t n = rates.size();
  return n % 2 == 1 ? rates[n / 2] : 0.5 * (rates[n / 2 - 1] + rates[n / 2]);
}

ObservationSet ingest_market(const MarketTable& table, const IngestOptions& options) {
  const auto spot = options.spot ? options.spot : table.spot;
  const auto maturity = options.maturity ? options.maturity : table.maturity;
  require(spot.has_value(), "ingest: spot not given");
  require(maturity.has_value(), "ingest: maturity not given");
  require(options.spread >= 0.0, "ingest: spread must be nonnegative");

  std::vector<MarketQuote> quotes = table.quotes;
  for (auto& q : quotes) {
    q.spot = *spot;
    q.maturity = *maturity;
    q.validate();
  }
  double r = 0.0;
  if (options.rate) r = *options.rate;
  else if (table.rate && std::none_of(quotes.begin(), quotes.end(), [](const auto& q) { return q.call && q.put; }))
    r = *table.rate;
  else r = parity_rate(quotes, *spot, *maturity);

  struct Row {
    double x, price;
  };
  std::vector<Row> rows;
  for (const auto& q : quotes) {
    double x = std::log(q.strike / *spot) - r * *maturity;
    if (std::abs(x) < 1e-12) x = 0.0;  // at the forward up to rounding: call branch
    const auto& otm = x >= 0.0 ? q.call : q.put;
    if (!otm) {
      std::cerr << "warning: strike " << q.strike << " lacks the out-of-the-money price, skipped\n";
      continue;
    }
    rows.push_back({x, *otm / *spot});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.x < b.x; });

  ObservationSet obs;
  const auto n = static_cast<Eigen::Index>(rows.size());
  obs.x.resize(n);
  obs.price.resize(n);
  obs.delta.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    obs.x(j) = rows[j].x;
    obs.price(j) = rows[j].price;
    obs.delta(j) = std::max(options.spread * rows[j].price, options.delta_floor);
  }
  obs.T = *maturity;
  obs.r = r;
  obs.S0 = *spot;
  obs.validate();
  return obs;
}

ObservationSet ingest_market_csv(const std::filesystem::path& path, const IngestOptions& options) {
  return ingest_market(read_market_csv(path), options);
}

MarketTable synthetic_market(const LevyModel& model, double spot, double rate, const std::vector<double>& strikes) {
  require(spot > 0.0, "synthetic market: spot must be positive");
  MarketTable table;
  table.spot = spot;
  table.maturity = model.T;
  Vector x(static_cast<Eigen::Index>(strikes.size()));
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    require(strikes[i] > 0.0, "synthetic market: strikes must be positive");
    x(static_cast<Eigen::Index>(i)) = std::log(strikes[i] / spot) - rate * model.T;
  }
  const Vector otm = option_function(model, x);
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    // C/S0 - P/S0 = 1 - e^x
    const double forward_gap = 1.0 - std::exp(x(j));
    MarketQuote q;
    q.strike = strikes[i];
    if (x(j) >= 0.0) {
      q.call = spot * otm(j);
      q.put = spot * (otm(j) - forward_gap);
    } else {
      q.put = spot * otm(j);
      q.call = spot * (otm(j) + forward_gap);
    }
    table.quotes.push_back(q);
  }
  return table;
}

MarketTable market_from_observations(const ObservationSet& obs) {
  MarketTable table;
  table.spot = obs.S0;
  table.maturity = obs.T;
  table.rate = obs.r;
  for (Eigen::Index j = 0; j < obs.size(); ++j) {
    MarketQuote q;
    q.strike = obs.S0 * std::exp(obs.x(j) + obs.r * obs.T);
    (obs.x(j) >= 0.0 ? q.call : q.put) = obs.S0 * obs.price(j);
    table.quotes.push_back(q);
  }
  return table;
}

}  // namespace levycal
