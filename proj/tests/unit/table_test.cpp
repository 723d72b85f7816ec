#include <gtest/gtest.h>

#include "promptpack/errors.hpp"
#include "promptpack/table.hpp"

using namespace promptpack;

TEST(Csv, QuotedFieldsAndRoundTrip) {
  const std::string text = "name,amount,note\n\"Acme, Inc\",12.5,\"said \"\"hi\"\"\"\nBeta,,\"multi\nline\"\n";
  const Table t = parse_csv(text);
  ASSERT_EQ(t.header, (std::vector<std::string>{"name", "amount", "note"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "Acme, Inc");
  EXPECT_EQ(t.rows[0][2], "said \"hi\"");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(t.rows[1][2], "multi\nline");
  EXPECT_EQ(write_csv(t), text);
}

TEST(Csv, CrLfPreserved) {
  const std::string text = "a,b\r\n1,2\r\n";
  EXPECT_EQ(write_csv(parse_csv(text)), text);
}

TEST(Csv, MalformedQuoteIsParseError) {
  try {
    parse_csv("a,b\n\"open,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Csv, NumericDetection) {
  const Table t = parse_csv("q,rev,mixed,blank\nQ1,1.5,3,\nQ2,-2,x,\nQ3,,4,\n");
  EXPECT_EQ(numeric_columns(t), (std::vector<std::size_t>{1}));
  const NumericColumn c = column_as_numeric(t, 1);
  EXPECT_EQ(c.values[0], 1.5);
  EXPECT_EQ(c.values[1], -2.0);
  EXPECT_TRUE(c.is_missing(2));
  EXPECT_EQ(c.present_count(), 2u);
}

TEST(Numbers, ParseAndFormat) {
  EXPECT_EQ(parse_number(" 4.25 "), 4.25);
  EXPECT_EQ(parse_number("+3"), 3.0);
  EXPECT_EQ(parse_number("1e3"), 1000.0);
  EXPECT_FALSE(parse_number("inf"));
  EXPECT_FALSE(parse_number("nan"));
  EXPECT_FALSE(parse_number("12a"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_EQ(format_decimal(3.14159, 2), "3.14");
  EXPECT_EQ(format_decimal(2.5, 3), "2.5");
  EXPECT_EQ(format_decimal(-0.0001, 2), "0");
  EXPECT_EQ(decimals_for_tolerance(0.01), 2);
  EXPECT_EQ(decimals_for_tolerance(0.05), 2);
  EXPECT_EQ(decimals_for_tolerance(5), 0);
}
