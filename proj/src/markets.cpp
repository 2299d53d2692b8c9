#include "barrons/markets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace barrons {

std::string to_string(MarketKind kind) {
  switch (kind) {
    case MarketKind::CoverAlternating: return "cover_alternating";
    case MarketKind::Blowup: return "blowup";
    case MarketKind::IidLognormal: return "iid_lognormal";
    case MarketKind::Constant: return "constant";
    case MarketKind::Csv: return "csv";
  }
  return "unknown";
}

MarketKind parse_market_kind(const std::string& name) {
  for (auto kind : {MarketKind::CoverAlternating, MarketKind::Blowup, MarketKind::IidLognormal,
                    MarketKind::Constant, MarketKind::Csv}) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown market kind '" + name + "'");
}

void MarketSpec::validate() const {
  if (kind == MarketKind::Csv) {
    if (csv_path.empty()) throw ValidationError("csv market needs a file path");
    return;
  }
  ProblemDims dims(assets, horizon);
  if (kind == MarketKind::Blowup) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
      throw ValidationError("blowup epsilon must lie in (0, 1]");
    }
    if (flip_period < 0) throw ValidationError("flip period must be nonnegative");
  }
  if (kind == MarketKind::IidLognormal && !(sigma >= 0.0 && std::isfinite(sigma))) {
    throw ValidationError("lognormal sigma must be finite and nonnegative");
  }
}

std::vector<MarketRound> generate(const MarketSpec& spec) {
  spec.validate();
  if (spec.kind == MarketKind::Csv) return load_csv(spec.csv_path);

  const int n = spec.assets;
  std::vector<MarketRound> rounds;
  rounds.reserve(static_cast<std::size_t>(spec.horizon));
  Vector raw(n);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  const int period = spec.flip_period > 0 ? spec.flip_period : std::max(1, spec.horizon / 2);

  for (int t = 1; t <= spec.horizon; ++t) {
    switch (spec.kind) {
      case MarketKind::CoverAlternating:
        for (int i = 0; i < n; ++i) raw[i] = ((i + t) % 2 == 1) ? 1.0 : 0.5;
        break;
      case MarketKind::Blowup: {
        const int favoured = ((t - 1) / period) % n;
        raw.setConstant(spec.epsilon);
        raw[favoured] = 1.0;
        break;
      }
      case MarketKind::IidLognormal:
        for (int i = 0; i < n; ++i) raw[i] = std::exp(normal(rng));
        break;
      case MarketKind::Constant:
        raw.setOnes();
        break;
      case MarketKind::Csv:
        break;
    }
    rounds.push_back(MarketRound::normalize(raw));
  }
  return rounds;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

std::vector<MarketRound> parse_csv(const std::string& text, int expected_assets) {
  std::vector<MarketRound> rounds;
  std::istringstream in(text);
  std::string line;
  int row = 0;
  int width = expected_assets;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> values(cells.size());
    int bad_column = 0;
    bool any_number = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (parse_number(cells[c], values[c])) {
        any_number = true;
      } else if (bad_column == 0) {
        bad_column = static_cast<int>(c) + 1;
      }
    }
    if (bad_column != 0) {
      if (row == 1 && !any_number) continue;  // header
      throw CsvParseError("row " + std::to_string(row) + ", column " +
                              std::to_string(bad_column) + ": '" +
                              std::string(cells[static_cast<std::size_t>(bad_column - 1)]) +
                              "' is not a number",
                          row, bad_column);
    }
    if (width == 0) width = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != width) {
      throw CsvParseError("row " + std::to_string(row) + " has " + std::to_string(values.size()) +
                              " fields, expected " + std::to_string(width),
                          row, static_cast<int>(values.size()));
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!(values[c] > 0.0) || !std::isfinite(values[c])) {
        throw CsvParseError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                ": price relatives must be positive and finite",
                            row, static_cast<int>(c) + 1);
      }
    }
    rounds.push_back(MarketRound::normalize(values));
  }
  if (rounds.empty()) throw ValidationError("market file contains no data rows");
  return rounds;
}

std::vector<MarketRound> load_csv(const std::filesystem::path& path, int expected_assets) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open market file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), expected_assets);
}

void write_csv(const std::filesystem::path& path, const std::vector<MarketRound>& rounds) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write market file " + path.string());
  char buf[32];
  for (const auto& r : rounds) {
    for (int i = 0; i < r.size(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof buf, r[i]);
      if (i > 0) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace barrons
