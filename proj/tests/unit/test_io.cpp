#include <gtest/gtest.h>

#include <sstream>

#include "ilsbm/io.hpp"
#include "ilsbm/synth.hpp"
#include "support.hpp"

using namespace ilsbm;

namespace {

std::vector<LoanRecord> parse(const std::string& text, std::vector<std::size_t>* lines = nullptr) {
  std::istringstream in(text);
  return io::read_loans_csv(in, lines);
}

std::size_t error_row(const std::string& text) {
  try {
    parse(text);
  } catch (const IngestError& e) {
    return e.row();
  }
  return 0;
}

}  // namespace

TEST(LoanCsv, ParsesRowsQuotesAndEmptyRates) {
  const auto r = parse(
      "lender,borrower,month,amount,maturity,rate\n"
      "A,B,3,10.5,<1d,7.25\n"
      "\"C,1\",D,4,2e3,>3y,\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].lender, "A");
  EXPECT_EQ(r[0].amount, 10.5);
  EXPECT_EQ(*r[0].rate, 7.25);
  EXPECT_EQ(r[1].lender, "C,1");
  EXPECT_EQ(r[1].amount, 2000.0);
  EXPECT_EQ(r[1].maturity, MaturityClass::kOver3y);
  EXPECT_FALSE(r[1].rate);
}

TEST(LoanCsv, BomCrlfCommentsAndBlankLines) {
  std::vector<std::size_t> lines;
  const auto r = parse(
      "\xEF\xBB\xBF# produced elsewhere\r\n"
      "lender,borrower,month,amount,maturity,rate\r\n"
      "\r\n"
      "A,B,1,1,2-7d,\r\n",
      &lines);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(lines, (std::vector<std::size_t>{4}));
}

TEST(LoanCsv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_row(""), 1u);
  EXPECT_EQ(error_row("lender,borrower\n"), 1u);
  EXPECT_EQ(error_row("lender,borrower,month,amount,maturity,rate\nA,B,1,1,<1d,\nA,B,x,1,<1d,\n"), 3u);
  EXPECT_EQ(error_row("lender,borrower,month,amount,maturity,rate\nA,B,1,1,1d,\n"), 2u);
  EXPECT_EQ(error_row("lender,borrower,month,amount,maturity,rate\nA,B,1,1,<1d\n"), 2u);
  EXPECT_EQ(error_row("lender,borrower,month,amount,maturity,rate\n\"A,B,1,1,<1d,\n"), 2u);
}

TEST(LoanCsv, WriteThenReadIsIdentity) {
  std::vector<LoanRecord> r = {{"x\"y", "B", 2, 0.1, MaturityClass::k31To90d, 3.5},
                               {"B", "C,D", 7, 123456.789, MaturityClass::kHalfTo1y, std::nullopt}};
  std::ostringstream out;
  io::write_loans_csv(out, r);
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].lender, r[i].lender);
    EXPECT_EQ(back[i].borrower, r[i].borrower);
    EXPECT_EQ(back[i].month, r[i].month);
    EXPECT_EQ(back[i].amount, r[i].amount);
    EXPECT_EQ(back[i].maturity, r[i].maturity);
    EXPECT_EQ(back[i].rate, r[i].rate);
  }
}

TEST(GraphJson, RoundTripIsExact) {
  const auto g = synth::fig2_benchmark(4);
  const auto j = io::graph_to_json(g, 12);
  EXPECT_EQ(j.at("version"), io::kGraphFormatVersion);
  EXPECT_EQ(io::graph_month(j), 12);
  const auto back = io::graph_from_json(io::json::parse(j.dump()));
  EXPECT_TRUE(back == g);
  EXPECT_EQ(digest(back), digest(g));
}

TEST(GraphJson, RejectsBadDocuments) {
  auto j = io::graph_to_json(testing_support::make_graph(2, {{{0, 1, 1.0}}}));
  auto bad = j;
  bad["version"] = 99;
  EXPECT_THROW(io::graph_from_json(bad), Error);
  bad = j;
  bad["edges"][0]["layer"] = 3;
  EXPECT_THROW(io::graph_from_json(bad), Error);
  bad = j;
  bad.erase("nodes");
  EXPECT_THROW(io::graph_from_json(bad), Error);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(PlantedSpecJson, ScalarAndMatrixWeights) {
  const auto j = io::json::parse(R"({"group_sizes":[2,3],"layer_class":[0,0],"expected_edges":[[1,2,3,4]],
                                     "weight_mu":3.0,"weight_sigma":0.5,"exact_counts":true})");
  const auto s = io::planted_spec_from_json(j);
  EXPECT_EQ(s.weight_mu, (std::vector<std::vector<double>>{{3, 3, 3, 3}}));
  EXPECT_TRUE(s.exact_counts);
  const auto again = io::planted_spec_from_json(io::to_json(s));
  EXPECT_EQ(again.expected_edges, s.expected_edges);
  EXPECT_EQ(again.weight_sigma, s.weight_sigma);
  EXPECT_THROW(io::planted_spec_from_json(io::json::parse(R"({"group_sizes":[2]})")), Error);
}
