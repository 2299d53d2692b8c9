#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "barrons/domain.hpp"

namespace barrons {

enum class MarketKind { CoverAlternating, Blowup, IidLognormal, Constant, Csv };

std::string to_string(MarketKind kind);
MarketKind parse_market_kind(const std::string& name);

/// Generator parameters. Only the fields relevant to `kind` are read.
struct MarketSpec {
  MarketKind kind = MarketKind::Constant;
  int assets = 2;
  int horizon = 16;
  std::uint64_t seed = 0;
  /// Blowup: relative of the out-of-favour assets.
  double epsilon = 1.0 / 32.0;
  /// Blowup: rounds between switches of the favoured asset; 0 means T/2.
  int flip_period = 0;
  /// iid_lognormal: standard deviation of ln r.
  double sigma = 0.3;
  /// Csv: source file.
  std::filesystem::path csv_path;

  void validate() const;
};

/// cover_alternating: odd rounds pay 1 on even-indexed assets and 1/2 on odd
///   ones, even rounds the reverse ((1, 1/2), (1/2, 1), ... for N = 2).
/// blowup: one favoured asset pays 1, the rest pay epsilon; the favoured
///   asset advances cyclically every flip_period rounds.
/// iid_lognormal: ln r_i ~ Normal(0, sigma^2) independently, then normalized.
/// constant: every relative equals 1.
/// csv: load_csv(csv_path).
std::vector<MarketRound> generate(const MarketSpec& spec);

/// Error with 1-based row/column location of a malformed CSV cell.
class CsvParseError : public ValidationError {
 public:
  CsvParseError(const std::string& what, int row, int column)
      : ValidationError(what), row_(row), column_(column) {}
  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

/// One row per period, one comma-separated positive decimal per asset. A
/// first row in which no field parses as a number is skipped as a header. When
/// `expected_assets` is positive every row must have that many fields.
std::vector<MarketRound> load_csv(const std::filesystem::path& path, int expected_assets = 0);
std::vector<MarketRound> parse_csv(const std::string& text, int expected_assets = 0);

void write_csv(const std::filesystem::path& path, const std::vector<MarketRound>& rounds);

}  // namespace barrons
