#include <gtest/gtest.h>

#include "golden_trace.hpp"

using namespace evflex::testing;

TEST(GoldenTrace, EventsAndEnvelopesMatchByteForByte) {
  const std::string dir = source_dir() + "/tests/golden";
  const auto out = run_golden_trace(dir);
  EXPECT_EQ(out.events, read_text(dir + "/events.csv"));
  EXPECT_EQ(out.envelopes, read_text(dir + "/envelopes.csv"));
}
