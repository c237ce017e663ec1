#include "ilsbm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ilsbm::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw IngestError(row, "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t row, const char* what) {
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw IngestError(row, std::string("invalid ") + what + " '" + s + "'");
  }
  return value;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<double>> matrices(const json& j, const char* key) {
  return j.at(key).get<std::vector<std::vector<double>>>();
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

std::vector<LoanRecord> read_loans_csv(std::istream& in, std::vector<std::size_t>* line_numbers) {
  std::string line;
  std::size_t row = 0;
  bool header = false;
  std::vector<LoanRecord> out;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (!line.empty() && line.front() == '#') continue;
      if (line != kLoanCsvHeader) {
        throw IngestError(row, "expected header '" + std::string(kLoanCsvHeader) + "'");
      }
      header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line, row);
    if (f.size() != 6) throw IngestError(row, "expected 6 fields, got " + std::to_string(f.size()));
    LoanRecord r;
    r.lender = f[0];
    r.borrower = f[1];
    r.month = parse_number<int>(f[2], row, "month");
    r.amount = parse_number<double>(f[3], row, "amount");
    const auto m = parse_maturity(f[4]);
    if (!m) throw IngestError(row, "unknown maturity class '" + f[4] + "'");
    r.maturity = *m;
    if (!f[5].empty()) r.rate = parse_number<double>(f[5], row, "rate");
    out.push_back(std::move(r));
    if (line_numbers) line_numbers->push_back(row);
  }
  if (!header) throw IngestError(1, "empty input");
  return out;
}

std::vector<LoanRecord> read_loans_csv_file(const std::string& path, std::vector<std::size_t>* line_numbers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_loans_csv(in, line_numbers);
}

void write_loans_csv(std::ostream& out, std::span<const LoanRecord> records) {
  out << kLoanCsvHeader << '\n';
  for (const auto& r : records) {
    out << csv_field(r.lender) << ',' << csv_field(r.borrower) << ',' << r.month << ','
        << format_double(r.amount) << ',' << to_code(r.maturity) << ',';
    if (r.rate) out << format_double(*r.rate);
    out << '\n';
  }
}

json graph_to_json(const LayeredMultigraph& g, std::optional<int> month) {
  json edges = json::array();
  for (std::size_t l = 0; l < g.num_layers(); ++l) {
    for (const Edge& e : g.layer(l)) edges.push_back({{"layer", l}, {"src", e.src}, {"dst", e.dst}, {"w", e.weight}});
  }
  json j = {{"version", kGraphFormatVersion}};
  if (month) j["month"] = *month;
  j["nodes"] = g.nodes();
  j["layer_labels"] = g.layer_labels();
  j["edges"] = std::move(edges);
  return j;
}

LayeredMultigraph graph_from_json(const json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kGraphFormatVersion) throw Error("unsupported graph format version " + std::to_string(version));
    auto nodes = j.at("nodes").get<std::vector<std::string>>();
    auto labels = j.at("layer_labels").get<std::vector<std::string>>();
    std::vector<std::vector<Edge>> layers(labels.size());
    for (const auto& e : j.at("edges")) {
      const auto l = e.at("layer").get<std::size_t>();
      if (l >= layers.size()) throw Error("edge layer out of range");
      layers[l].push_back({e.at("src").get<NodeIndex>(), e.at("dst").get<NodeIndex>(), e.at("w").get<double>()});
    }
    return LayeredMultigraph(std::move(nodes), std::move(labels), std::move(layers));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed graph document: ") + e.what());
  }
}

std::optional<int> graph_month(const json& j) {
  if (j.contains("month")) return j.at("month").get<int>();
  return std::nullopt;
}

json to_json(const sbm::DlBreakdown& d) {
  return {{"partition", d.bits_partition}, {"edge_matrix", d.bits_edge_matrix}, {"degrees", d.bits_degrees},
          {"adjacency", d.bits_adjacency}, {"weights", d.bits_weights},         {"total", d.total}};
}

json to_json(const layered::LayeredDl& d) {
  json bins = json::array();
  for (const auto& b : d.per_bin) bins.push_back(to_json(b));
  return {{"partition", d.partition_bits},
          {"per_bin", std::move(bins)},
          {"extension", d.extension_bits},
          {"binset_prior", d.binset_prior_bits},
          {"data", d.data_bits()},
          {"model", d.model_bits()},
          {"total", d.total}};
}

json to_json(const BinSet& bins) { return bins.bins(); }

BinSet bins_from_json(const json& j, std::size_t num_layers, BinningKind kind) {
  return BinSet::from_bins(j.get<std::vector<std::vector<int>>>(), num_layers, kind);
}

json to_json(const infer::FitResult& f) {
  return {{"partition", f.partition.assignment()},
          {"bins", to_json(f.bins)},
          {"binning", std::string(to_string(f.bins.kind()))},
          {"bits", to_json(f.dl)},
          {"seed", f.seed}};
}

json to_json(const timeseries::MonthlyFit& m) {
  json j = to_json(m.fit);
  j["month"] = m.month;
  j["active_banks"] = m.active_banks;
  j["b_count"] = m.b_count;
  j["differentiation_bits"] = m.differentiation_bits;
  j["aggregation_bits"] = m.aggregation_bits;
  j["log10_odds_vs_differentiation"] = m.log10_vs_differentiation;
  j["log10_odds_vs_aggregation"] = m.log10_vs_aggregation;
  return j;
}

json to_json(const infer::FitConfig& c) {
  return {{"seed", c.seed},
          {"n_sweeps", c.n_sweeps},
          {"n_anneal", c.n_anneal},
          {"beta_start", c.beta_start},
          {"beta_end", c.beta_end},
          {"binning", std::string(to_string(c.binning_kind))},
          {"samples", c.samples},
          {"merge_ratio", c.merge_ratio},
          {"proposal_mix", c.proposal_mix},
          {"prior",
           {{"mu0", c.prior.mu0}, {"kappa0", c.prior.kappa0}, {"nu0", c.prior.nu0}, {"sigma0_sq", c.prior.sigma0_sq}}}};
}

StoredFit stored_fit_from_json(const json& j, std::size_t num_layers) {
  try {
    StoredFit f;
    f.month = j.at("month").get<int>();
    f.partition = sbm::Partition(j.at("partition").get<std::vector<int>>());
    const auto kind = parse_binning_kind(j.at("binning").get<std::string>());
    if (!kind) throw Error("unknown binning kind");
    f.bins = bins_from_json(j.at("bins"), num_layers, *kind);
    f.bits = j.at("bits").at("total").get<double>();
    f.differentiation_bits = j.at("differentiation_bits").get<double>();
    f.aggregation_bits = j.at("aggregation_bits").get<double>();
    f.log10_vs_differentiation = j.at("log10_odds_vs_differentiation").get<double>();
    f.log10_vs_aggregation = j.at("log10_odds_vs_aggregation").get<double>();
    return f;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed fit document: ") + e.what());
  }
}

synth::PlantedSpec planted_spec_from_json(const json& j) {
  try {
    synth::PlantedSpec s;
    s.group_sizes = j.at("group_sizes").get<std::vector<std::size_t>>();
    s.layer_class = j.at("layer_class").get<std::vector<int>>();
    s.expected_edges = matrices(j, "expected_edges");
    const std::size_t cells = s.group_sizes.size() * s.group_sizes.size();
    auto per_class = [&](const char* key, double fallback) {
      if (!j.contains(key)) return std::vector<std::vector<double>>(s.expected_edges.size(), std::vector<double>(cells, fallback));
      if (j.at(key).is_number()) {
        return std::vector<std::vector<double>>(s.expected_edges.size(), std::vector<double>(cells, j.at(key).get<double>()));
      }
      return matrices(j, key);
    };
    s.weight_mu = per_class("weight_mu", 4.0);
    s.weight_sigma = per_class("weight_sigma", 1.0);
    if (j.contains("propensity")) s.propensity = j.at("propensity").get<std::vector<double>>();
    if (j.contains("layer_labels")) s.layer_labels = j.at("layer_labels").get<std::vector<std::string>>();
    if (j.contains("id_prefix")) s.id_prefix = j.at("id_prefix").get<std::string>();
    if (j.contains("exact_counts")) s.exact_counts = j.at("exact_counts").get<bool>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed planted spec: ") + e.what());
  }
}

json to_json(const synth::PlantedSpec& s) {
  json j = {{"group_sizes", s.group_sizes},
            {"layer_class", s.layer_class},
            {"expected_edges", s.expected_edges},
            {"weight_mu", s.weight_mu},
            {"weight_sigma", s.weight_sigma},
            {"id_prefix", s.id_prefix},
            {"exact_counts", s.exact_counts}};
  if (!s.propensity.empty()) j["propensity"] = s.propensity;
  if (!s.layer_labels.empty()) j["layer_labels"] = s.layer_labels;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path);
}

}  // namespace ilsbm::io
