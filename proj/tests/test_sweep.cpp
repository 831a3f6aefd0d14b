#include <gtest/gtest.h>

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "bosegas/sweep.hpp"

using namespace bosegas;

TEST(SweepSpec, ParsesRanges) {
  const auto lin = SweepSpec::parse("0.05:1.2:60");
  const auto v = lin.values();
  ASSERT_EQ(v.size(), 60u);
  EXPECT_DOUBLE_EQ(v.front(), 0.05);
  EXPECT_EQ(v.back(), 1.2);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GT(v[i], v[i - 1]);

  const auto lg = SweepSpec::parse("1e-4:1e4:161:log").values();
  ASSERT_EQ(lg.size(), 161u);
  EXPECT_NEAR(lg[80], 1.0, 1e-14);
  EXPECT_NEAR(lg[20], 1e-3, 1e-17);
  EXPECT_EQ(lg.back(), 1e4);
}

TEST(SweepSpec, ParsesListsAndSingles) {
  EXPECT_EQ(SweepSpec::parse("100,200,400").values(), (std::vector<double>{100, 200, 400}));
  EXPECT_EQ(SweepSpec::parse("7.5").values(), (std::vector<double>{7.5}));
  EXPECT_EQ(SweepSpec::parse("1:3:3:lin").describe(), "1:3:3:lin");
}

TEST(SweepSpec, RejectsInvalidRanges) {
  EXPECT_THROW(SweepSpec::parse("1:2:1"), ArgumentError);
  EXPECT_THROW(SweepSpec::parse("2:1:5"), ArgumentError);
  EXPECT_THROW(SweepSpec::parse("0:1:5:log"), ArgumentError);
  EXPECT_THROW(SweepSpec::parse("1:2:2.5"), ArgumentError);
  EXPECT_THROW(SweepSpec::parse("1:2:5:cubic"), ArgumentError);
  EXPECT_THROW(SweepSpec::parse("a,b"), ArgumentError);
  EXPECT_THROW(SweepSpec::parse(""), ArgumentError);
  EXPECT_THROW(SweepSpec::parse("1:2"), ArgumentError);
}

TEST(FormatReal, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    const auto s = format_real(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_real(0.5), "5.0000000000000000e-01");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(std::nan("")), "nan");
}

TEST(ParallelMap, OrderIndependentOfThreads) {
  auto f = [](std::size_t i) { return static_cast<double>(i * i) + 0.5; };
  const auto one = parallel_map<double>(100, f, 1);
  const auto many = parallel_map<double>(100, f, 8);
  EXPECT_EQ(one, many);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(one[i], f(i));
  EXPECT_TRUE(parallel_map<double>(0, f, 4).empty());
}

TEST(ParallelMap, RethrowsLowestIndexError) {
  auto f = [](std::size_t i) -> int {
    if (i == 7) throw std::runtime_error("seven");
    if (i == 30) throw std::runtime_error("thirty");
    return static_cast<int>(i);
  };
  try {
    parallel_map<int>(50, f, 6);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "seven");
  }
}

TEST(WorkerCount, HonoursEnvironment) {
  ::setenv("BOSE_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::setenv("BOSE_THREADS", "zero", 1);
  EXPECT_EQ(worker_count(), std::max(1u, std::thread::hardware_concurrency()));
  ::unsetenv("BOSE_THREADS");
  EXPECT_GE(worker_count(), 1u);
}
