#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ilsbm/infer.hpp"
#include "ilsbm/layered.hpp"
#include "ilsbm/netcore.hpp"
#include "ilsbm/sbm.hpp"
#include "ilsbm/synth.hpp"
#include "ilsbm/timeseries.hpp"

namespace ilsbm::io {

using nlohmann::json;

inline constexpr int kGraphFormatVersion = 1;
inline constexpr std::string_view kLoanCsvHeader = "lender,borrower,month,amount,maturity,rate";

// Shortest representation that reads back to the same double.
std::string format_double(double x);

// Loan CSV. Errors carry the 1-based line number. Lines starting with '#'
// before the header are skipped. `line_numbers`, when given, receives the
// source line of every returned record.
std::vector<LoanRecord> read_loans_csv(std::istream& in, std::vector<std::size_t>* line_numbers = nullptr);
std::vector<LoanRecord> read_loans_csv_file(const std::string& path,
                                            std::vector<std::size_t>* line_numbers = nullptr);
void write_loans_csv(std::ostream& out, std::span<const LoanRecord> records);

json graph_to_json(const LayeredMultigraph& g, std::optional<int> month = std::nullopt);
LayeredMultigraph graph_from_json(const json& j);
// Month stored in a graph document, if any.
std::optional<int> graph_month(const json& j);

json to_json(const sbm::DlBreakdown& d);
json to_json(const layered::LayeredDl& d);
json to_json(const BinSet& bins);
BinSet bins_from_json(const json& j, std::size_t num_layers, BinningKind kind);
json to_json(const infer::FitResult& f);
json to_json(const timeseries::MonthlyFit& m);
json to_json(const infer::FitConfig& c);

// A monthly fit document only carries what downstream reports need: the
// partition, bins and the bit totals.
struct StoredFit {
  int month = 0;
  sbm::Partition partition;
  BinSet bins;
  double bits = 0.0;
  double differentiation_bits = 0.0;
  double aggregation_bits = 0.0;
  double log10_vs_differentiation = 0.0;
  double log10_vs_aggregation = 0.0;
};
StoredFit stored_fit_from_json(const json& j, std::size_t num_layers);

synth::PlantedSpec planted_spec_from_json(const json& j);
json to_json(const synth::PlantedSpec& s);

json read_json_file(const std::string& path);
// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const json& j);

}  // namespace ilsbm::io
