#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ilsbm/infer.hpp"
#include "ilsbm/netcore.hpp"
#include "ilsbm/sbm.hpp"

namespace ilsbm::timeseries {

struct MonthlyFit {
  int month = 0;
  infer::FitResult fit;  // the optimal granularity
  double differentiation_bits = 0.0;
  double aggregation_bits = 0.0;
  double log10_vs_differentiation = 0.0;
  double log10_vs_aggregation = 0.0;
  std::size_t active_banks = 0;
  std::size_t b_count = 0;
};

struct Series {
  std::vector<MonthlyFit> fits;          // ascending month, failed months absent
  std::map<int, std::string> errors;     // month -> message
};

// Each month is fitted independently with seed mix_seed(config.seed, month);
// config.jobs months run concurrently.
Series run_series(const std::map<int, LayeredMultigraph>& months, const infer::FitConfig& config);

// Bank ids making up the smallest prefix, by decreasing total strength (ties
// by id), whose cumulative share of 2S reaches q.
std::vector<std::string> strength_filter(const LayeredMultigraph& g, double q);

// Normalised by the arithmetic mean of the entropies; 1 when both are 0.
double nmi(const sbm::Partition& a, const sbm::Partition& b);

struct NmiPoint {
  int month = 0;  // the later month of the pair
  double nmi = 0.0;
  std::size_t banks = 0;
};
// Pairs (t-1, t) where both months were fitted. Pairs with no common
// filtered bank are omitted.
std::vector<NmiPoint> consecutive_nmi(const std::map<int, LayeredMultigraph>& months,
                                      const std::vector<MonthlyFit>& fits, double q);

std::vector<double> ogb_sizes(const LayeredMultigraph& g, const BinSet& bins);

struct GroupStrength {
  double s_out = 0.0;
  double s_in = 0.0;
  double s_internal = 0.0;
};
// result[bin][group]
std::vector<std::vector<GroupStrength>> group_strengths(const LayeredMultigraph& g,
                                                        const sbm::Partition& b, const BinSet& bins);

struct BankRatio {
  std::string id;
  double strength = 0.0;  // within the bin
  double ratio = 0.0;     // instrength / strength within the bin
};
// Banks in the top ceil(top_fraction * N) by total strength; per bin, those
// with positive strength in it.
std::vector<std::vector<BankRatio>> instrength_ratio_table(const LayeredMultigraph& g, const BinSet& bins,
                                                           double top_fraction);

struct YieldClasses {
  std::vector<MaturityClass> long_classes{MaturityClass::k1To3y, MaturityClass::kOver3y};
  std::vector<MaturityClass> short_classes{MaturityClass::kUnder1d, MaturityClass::k2To7d,
                                           MaturityClass::k8To30d};
};

struct YieldSummary {
  std::array<std::optional<double>, kMaturityClassCount> median;
  std::array<std::optional<double>, kMaturityClassCount> volume_weighted_mean;
  std::array<std::size_t, kMaturityClassCount> rated{};
  // Median of the pooled long-class rates minus that of the short classes;
  // empty when either side has no rated record.
  std::optional<double> spread;
};
YieldSummary yield_summary(std::span<const LoanRecord> records, const YieldClasses& classes = {});

// Midpoint median; the input is copied.
double median(std::vector<double> xs);

}  // namespace ilsbm::timeseries
