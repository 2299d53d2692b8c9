#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "barrons/markets.hpp"

using namespace barrons;

namespace {

MarketSpec spec_of(MarketKind kind, int n, int horizon, std::uint64_t seed = 0) {
  MarketSpec s;
  s.kind = kind;
  s.assets = n;
  s.horizon = horizon;
  s.seed = seed;
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("barrons_markets_" + name);
}

}  // namespace

TEST(Generate, CoverAlternating) {
  const auto rounds = generate(spec_of(MarketKind::CoverAlternating, 2, 4));
  ASSERT_EQ(rounds.size(), 4u);
  EXPECT_EQ(rounds[0].relatives(), (Vector{{1.0, 0.5}}));
  EXPECT_EQ(rounds[1].relatives(), (Vector{{0.5, 1.0}}));
  EXPECT_EQ(rounds[2].relatives(), (Vector{{1.0, 0.5}}));
  EXPECT_EQ(rounds[3].relatives(), (Vector{{0.5, 1.0}}));
}

TEST(Generate, Constant) {
  const auto rounds = generate(spec_of(MarketKind::Constant, 3, 4));
  for (const auto& r : rounds) EXPECT_EQ(r.relatives(), Vector::Ones(3));
}

TEST(Generate, BlowupFlipsAtHalfHorizon) {
  const auto rounds = generate(spec_of(MarketKind::Blowup, 2, 64));
  ASSERT_EQ(rounds.size(), 64u);
  for (int t = 0; t < 32; ++t) EXPECT_EQ(rounds[t].relatives(), (Vector{{1.0, 1.0 / 32.0}}));
  for (int t = 32; t < 64; ++t) EXPECT_EQ(rounds[t].relatives(), (Vector{{1.0 / 32.0, 1.0}}));

  auto custom = spec_of(MarketKind::Blowup, 3, 12);
  custom.flip_period = 4;
  custom.epsilon = 0.1;
  const auto cyc = generate(custom);
  EXPECT_EQ(cyc[0].relatives(), (Vector{{1.0, 0.1, 0.1}}));
  EXPECT_EQ(cyc[4].relatives(), (Vector{{0.1, 1.0, 0.1}}));
  EXPECT_EQ(cyc[8].relatives(), (Vector{{0.1, 0.1, 1.0}}));
}

TEST(Generate, LognormalIsSeededAndNormalized) {
  const auto a = generate(spec_of(MarketKind::IidLognormal, 4, 50, 9));
  const auto b = generate(spec_of(MarketKind::IidLognormal, 4, 50, 9));
  const auto c = generate(spec_of(MarketKind::IidLognormal, 4, 50, 10));
  ASSERT_EQ(a.size(), 50u);
  bool differs = false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].relatives(), b[t].relatives());
    EXPECT_EQ(a[t].relatives().maxCoeff(), 1.0);
    EXPECT_GT(a[t].relatives().minCoeff(), 0.0);
    differs = differs || a[t].relatives() != c[t].relatives();
  }
  EXPECT_TRUE(differs);
}

TEST(Generate, RejectsInvalidParameters) {
  auto s = spec_of(MarketKind::Blowup, 2, 16);
  s.epsilon = 0.0;
  EXPECT_THROW(generate(s), ValidationError);
  s = spec_of(MarketKind::IidLognormal, 2, 16);
  s.sigma = -1.0;
  EXPECT_THROW(generate(s), ValidationError);
  EXPECT_THROW(generate(spec_of(MarketKind::Constant, 3, 3)), ValidationError);
  EXPECT_THROW(parse_market_kind("random_walk"), ValidationError);
  EXPECT_EQ(parse_market_kind("cover_alternating"), MarketKind::CoverAlternating);
}

TEST(Csv, SpecExamples) {
  auto rounds = parse_csv("1.0,0.5\n0.5,1.0", 2);
  ASSERT_EQ(rounds.size(), 2u);
  EXPECT_EQ(rounds[0].relatives(), (Vector{{1.0, 0.5}}));
  EXPECT_EQ(rounds[1].relatives(), (Vector{{0.5, 1.0}}));

  rounds = parse_csv("2,1\n");
  ASSERT_EQ(rounds.size(), 1u);
  EXPECT_EQ(rounds[0].relatives(), (Vector{{1.0, 0.5}}));

  try {
    parse_csv("1.0,abc");
    FAIL() << "expected CsvParseError";
  } catch (const CsvParseError& e) {
    EXPECT_EQ(e.row(), 1);
    EXPECT_EQ(e.column(), 2);
  }
}

TEST(Csv, HeaderAndErrors) {
  const auto rounds = parse_csv("AAPL,MSFT\r\n1.0,2.0\r\n\r\n3, 1.5\r\n");
  ASSERT_EQ(rounds.size(), 2u);
  EXPECT_EQ(rounds[1].relatives(), (Vector{{1.0, 0.5}}));

  EXPECT_THROW(parse_csv("a,b\nc,d\n"), CsvParseError);
  EXPECT_THROW(parse_csv("1,2\n1,2,3\n"), CsvParseError);
  EXPECT_THROW(parse_csv("1,2,3\n", 2), CsvParseError);
  try {
    parse_csv("1,2\n1,0\n");
    FAIL() << "expected CsvParseError";
  } catch (const CsvParseError& e) {
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), 2);
  }
  EXPECT_THROW(parse_csv("1,inf\n"), CsvParseError);
  EXPECT_THROW(parse_csv("header\n"), ValidationError);
  EXPECT_THROW(load_csv(temp_file("missing.csv")), ValidationError);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  const auto rounds = generate(spec_of(MarketKind::IidLognormal, 3, 20, 4));
  const auto path = temp_file("roundtrip.csv");
  write_csv(path, rounds);
  const auto back = load_csv(path, 3);
  ASSERT_EQ(back.size(), rounds.size());
  for (std::size_t t = 0; t < rounds.size(); ++t) EXPECT_EQ(back[t].relatives(), rounds[t].relatives());
  std::filesystem::remove(path);
}
