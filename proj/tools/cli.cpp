#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ilsbm/infer.hpp"
#include "ilsbm/io.hpp"
#include "ilsbm/layered.hpp"
#include "ilsbm/netcore.hpp"
#include "ilsbm/stats.hpp"
#include "ilsbm/synth.hpp"
#include "ilsbm/timeseries.hpp"

namespace ilsbm::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr std::string_view kGraphPrefix = "graph_";
constexpr std::string_view kFitPrefix = "fit_";

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

// Seed (if any) and a hash of the effective options; stamped on every output.
struct Stamp {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::string config_hash;

  Stamp(std::string cmd, std::optional<std::uint64_t> s, const json& config)
      : command(std::move(cmd)), seed(s), config_hash(hex(fnv1a(config.dump()))) {}

  std::string csv_header() const {
    std::string h = "# ilsbm " + command;
    if (seed) h += " seed=" + std::to_string(*seed);
    return h + " config=" + config_hash + "\n";
  }
  json meta() const {
    json m = {{"command", command}, {"config_hash", config_hash}};
    m["seed"] = seed ? json(*seed) : json(nullptr);
    return m;
  }
};

std::string month_tag(int month) {
  std::ostringstream os;
  if (month < 0) os << '-';
  os << std::setw(4) << std::setfill('0') << std::abs(month);
  return os.str();
}

std::string num(double x) { return std::isfinite(x) ? io::format_double(x) : std::string(); }
std::string num(std::optional<double> x) { return x ? num(*x) : std::string(); }

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvOut {
 public:
  CsvOut(const fs::path& path, const Stamp& stamp, const std::vector<std::string>& columns) : os_(path, std::ios::binary) {
    if (!os_) throw Error("cannot write " + path.string());
    os_ << stamp.csv_header();
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_cell(cells[i]);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

// Arguments may be files or directories; a directory contributes its
// `<prefix>*.json` entries in name order.
std::vector<std::string> expand_inputs(const std::vector<std::string>& args, std::string_view prefix) {
  std::vector<std::string> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(a)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ".json") {
          found.push_back(e.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw Error(a + ": no " + std::string(prefix) + "*.json files");
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(a)) {
      out.push_back(a);
    } else {
      throw Error(a + ": no such file");
    }
  }
  return out;
}

// Month from the document, else the 1-based input position.
std::map<int, LayeredMultigraph> load_graphs(const std::vector<std::string>& files) {
  std::map<int, LayeredMultigraph> out;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const json j = io::read_json_file(files[k]);
    LayeredMultigraph g;
    try {
      g = io::graph_from_json(j);
    } catch (const Error& e) {
      throw Error(files[k] + ": " + e.what());
    }
    const int month = io::graph_month(j).value_or(static_cast<int>(k) + 1);
    if (!out.emplace(month, std::move(g)).second) throw Error(files[k] + ": month " + std::to_string(month) + " given twice");
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(std::string("invalid ") + what + " '" + item + "'");
    }
  }
  if (out.empty()) throw Error(std::string("empty ") + what + " list");
  return out;
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(std::string("invalid ") + what + " '" + s + "'");
}

// "1-12" or "1,2,5" (ranges may be mixed in).
std::vector<int> parse_months(const std::string& s) {
  std::set<int> months;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      months.insert(parse_int(item, "month"));
      continue;
    }
    const int a = parse_int(item.substr(0, dash), "month"), b = parse_int(item.substr(dash + 1), "month");
    if (b < a) throw Error("empty month range '" + item + "'");
    for (int m = a; m <= b; ++m) months.insert(m);
  }
  if (months.empty()) throw Error("no months given");
  return {months.begin(), months.end()};
}

// "0,1|2|3,4": bins separated by '|', layer ordinals by ','.
std::vector<std::vector<int>> parse_bins(const std::string& s) {
  std::vector<std::vector<int>> bins;
  std::stringstream ss(s);
  std::string bin;
  while (std::getline(ss, bin, '|')) {
    std::vector<int> members;
    std::stringstream bs(bin);
    std::string item;
    while (std::getline(bs, item, ',')) members.push_back(parse_int(item, "layer"));
    bins.push_back(std::move(members));
  }
  return bins;
}

std::optional<BinningKind> binning_from_flag(const std::string& s) {
  if (s == "noncontiguous") return BinningKind::kNonContiguous;
  return parse_binning_kind(s);
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create directory " + dir);
}

void write_json(const fs::path& path, json j, const Stamp& stamp) {
  j["meta"] = stamp.meta();
  io::write_json_file(path.string(), j);
}

// ---------------------------------------------------------------- ingest

struct IngestOptions {
  std::string csv;
  std::string out;
};

int cmd_ingest(const IngestOptions& o, std::ostream& out, std::ostream& err) {
  auto report = [&](const IngestError& e, std::size_t line) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    err << o.csv << ": line " << line << ": " << (colon == std::string::npos ? what : what.substr(colon + 2)) << '\n';
    return 1;
  };
  std::vector<std::size_t> lines;
  std::vector<LoanRecord> records;
  try {
    records = io::read_loans_csv_file(o.csv, &lines);
  } catch (const IngestError& e) {
    return report(e, e.row());
  }
  IngestResult r;
  try {
    r = ingest(records);
  } catch (const IngestError& e) {
    // ingest() counts records from 1; map back to the CSV line.
    return report(e, e.row() >= 1 && e.row() <= lines.size() ? lines[e.row() - 1] : e.row());
  }
  make_dir(o.out);
  const Stamp stamp("ingest", std::nullopt, json{{"command", "ingest"}});
  for (const auto& [month, g] : r.months) {
    write_json(fs::path(o.out) / (std::string(kGraphPrefix) + month_tag(month) + ".json"), io::graph_to_json(g, month), stamp);
  }
  std::vector<int> months;
  for (const auto& [m, g] : r.months) months.push_back(m);
  write_json(fs::path(o.out) / "banks.json",
             {{"bank_ids", r.bank_ids}, {"months", months}, {"self_loops", r.self_loops}, {"records", records.size()}},
             stamp);
  out << "ingested " << records.size() << " records, " << r.months.size() << " months, " << r.bank_ids.size()
      << " banks";
  if (r.self_loops) out << ", " << r.self_loops << " self-loops";
  out << '\n';
  return 0;
}

// ---------------------------------------------------------------- emit

struct EmitOptions {
  std::vector<std::string> graphs;
  std::string out;
};

int cmd_emit(const EmitOptions& o, std::ostream& out, std::ostream&) {
  const auto months = load_graphs(expand_inputs(o.graphs, kGraphPrefix));
  std::vector<LoanRecord> records;
  for (const auto& [m, g] : months) {
    auto part = synth::emit_loan_records(g, m);
    records.insert(records.end(), part.begin(), part.end());
  }
  std::ofstream os(o.out, std::ios::binary);
  if (!os) throw Error("cannot write " + o.out);
  os << Stamp("emit", std::nullopt, json{{"command", "emit"}}).csv_header();
  io::write_loans_csv(os, records);
  if (!os) throw Error("failed writing " + o.out);
  out << "wrote " << records.size() << " records\n";
  return 0;
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::uint64_t seed = 0;
  bool fig2 = false;
  std::string spec;
  std::string months = "1";
  std::string out;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream&) {
  if (o.fig2 == !o.spec.empty()) throw Error("give exactly one of --fig2 and --spec");
  const auto months = parse_months(o.months);
  const synth::PlantedSpec spec = o.fig2 ? synth::fig2_spec() : io::planted_spec_from_json(io::read_json_file(o.spec));
  const json config = {{"command", "generate"}, {"spec", io::to_json(spec)}, {"fig2", o.fig2}, {"months", months}};
  const Stamp stamp("generate", o.seed, config);

  std::map<int, synth::Planted> draws;
  if (o.fig2) {
    for (int m : months) draws.emplace(m, synth::fig2_planted(infer::mix_seed(o.seed, static_cast<std::uint64_t>(m))));
  } else {
    auto series = synth::sample_series(spec, months, o.seed);
    for (int m : months) {
      draws.emplace(m, synth::Planted{std::move(series.months.at(m)), std::move(series.partitions.at(m)), series.bins});
    }
  }
  make_dir(o.out);
  json truth = json::object();
  for (const auto& [m, p] : draws) {
    write_json(fs::path(o.out) / (std::string(kGraphPrefix) + month_tag(m) + ".json"), io::graph_to_json(p.graph, m), stamp);
    truth[std::to_string(m)] = {{"partition", p.partition.assignment()}, {"bins", io::to_json(p.bins)}};
  }
  write_json(fs::path(o.out) / "planted.json", {{"spec", io::to_json(spec)}, {"months", std::move(truth)}}, stamp);
  out << "generated " << draws.size() << " month(s)\n";
  return 0;
}

// ---------------------------------------------------------------- stats

struct StatsOptions {
  std::vector<std::string> graphs;
  std::uint64_t seed = 0;
  int n_null = 20;
  std::string bins;
  bool pooled = false;
  int jobs = 1;
  std::string out;
};

const std::vector<std::string> kStatsColumns = {
    "month", "layer", "nodes", "edges", "density", "mean_degree", "fit_beta", "fit_lambda", "fit_stderr_beta",
    "fit_stderr_lambda", "fat_tail", "clustering", "clustering_null_mean", "clustering_null_sd", "clustering_z",
    "path_length", "lcc_size", "path_null_mean", "path_null_sd", "n_weak", "n_strong", "lcc_weak_frac",
    "lcc_strong_frac", "assortativity", "kendall_w_in_out", "kendall_p_in_out"};

// Every measure of one layer. Measures that are undefined for the layer (too
// small, degenerate) are null with a note; they are not errors.
json layer_report(const stats::LayerView& v, int n_null, std::uint64_t seed, int jobs, std::vector<std::string>& row) {
  json j;
  json notes = json::array();
  auto attempt = [&](const char* what, auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      notes.push_back(std::string(what) + ": " + e.what());
    }
  };
  std::map<std::string, std::string> cell;
  j["nodes"] = v.num_nodes;
  j["edges"] = v.edges.size();
  cell["nodes"] = std::to_string(v.num_nodes);
  cell["edges"] = std::to_string(v.edges.size());

  attempt("density", [&] {
    const double d = stats::directed_density(v);
    j["density"] = d;
    cell["density"] = num(d);
  });

  const auto deg = stats::degree_summary(v);
  {
    json ccdf = json::array();
    for (const auto& [k, p] : deg.ccdf) ccdf.push_back({k, p});
    double mean = 0.0;
    for (auto k : deg.total_degrees) mean += static_cast<double>(k);
    if (v.num_nodes) mean /= static_cast<double>(v.num_nodes);
    j["degree"] = {{"ccdf", std::move(ccdf)}, {"mean_total", mean}};
    cell["mean_degree"] = num(mean);
  }
  j["degree"]["fit"] = nullptr;
  attempt("stretched exponential fit", [&] {
    const auto f = stats::fit_stretched_exponential(deg.total_degrees);
    j["degree"]["fit"] = {{"beta", f.beta},   {"lambda", f.lambda}, {"stderr_beta", f.stderr_beta},
                          {"stderr_lambda", f.stderr_lambda}, {"rss", f.rss}, {"n", f.n}, {"fat_tail", f.fat_tail}};
    cell["fit_beta"] = num(f.beta);
    cell["fit_lambda"] = num(f.lambda);
    cell["fit_stderr_beta"] = num(f.stderr_beta);
    cell["fit_stderr_lambda"] = num(f.stderr_lambda);
    cell["fat_tail"] = f.fat_tail ? "1" : "0";
  });

  j["clustering"] = nullptr;
  attempt("clustering", [&] {
    const auto c = stats::clustering_with_null(v, n_null, infer::mix_seed(seed, 1), jobs);
    j["clustering"] = {{"observed", c.c_observed}, {"null_mean", c.c_null_mean}, {"null_sd", c.c_null_sd},
                       {"z", std::isfinite(c.z) ? json(c.z) : json(nullptr)}, {"n_null", c.n_null}};
    cell["clustering"] = num(c.c_observed);
    cell["clustering_null_mean"] = num(c.c_null_mean);
    cell["clustering_null_sd"] = num(c.c_null_sd);
    cell["clustering_z"] = num(c.z);
  });

  j["path_length"] = nullptr;
  attempt("path length", [&] {
    const auto p = stats::avg_shortest_path_lcc(v);
    j["path_length"] = {{"mean", p.mean}, {"lcc_size", p.lcc_size}};
    cell["path_length"] = num(p.mean);
    cell["lcc_size"] = std::to_string(p.lcc_size);
    const auto n = stats::null_path_length(v, n_null, infer::mix_seed(seed, 2), jobs);
    j["path_length"]["null_mean"] = n.mean;
    j["path_length"]["null_sd"] = n.sd;
    cell["path_null_mean"] = num(n.mean);
    cell["path_null_sd"] = num(n.sd);
  });

  attempt("components", [&] {
    const auto c = stats::component_stats(v);
    j["components"] = {{"n_weak", c.n_weak}, {"n_strong", c.n_strong}, {"lcc_weak_frac", c.lcc_weak_frac},
                       {"lcc_strong_frac", c.lcc_strong_frac}};
    cell["n_weak"] = std::to_string(c.n_weak);
    cell["n_strong"] = std::to_string(c.n_strong);
    cell["lcc_weak_frac"] = num(c.lcc_weak_frac);
    cell["lcc_strong_frac"] = num(c.lcc_strong_frac);
  });

  j["assortativity"] = nullptr;
  attempt("assortativity", [&] {
    const double r = stats::degree_assortativity(v);
    j["assortativity"] = r;
    cell["assortativity"] = num(r);
  });

  j["kendall_w_in_out"] = nullptr;
  attempt("kendall W", [&] {
    std::vector<double> in(deg.in_degrees.begin(), deg.in_degrees.end());
    std::vector<double> outd(deg.out_degrees.begin(), deg.out_degrees.end());
    const auto w = stats::kendall_w(in, outd);
    j["kendall_w_in_out"] = {{"w", w.w}, {"p", w.p}};
    cell["kendall_w_in_out"] = num(w.w);
    cell["kendall_p_in_out"] = num(w.p);
  });

  j["notes"] = std::move(notes);
  for (std::size_t c = 2; c < kStatsColumns.size(); ++c) row.push_back(cell[kStatsColumns[c]]);
  return j;
}

int cmd_stats(const StatsOptions& o, std::ostream& out, std::ostream&) {
  if (o.n_null < 1) throw Error("--null must be positive");
  const auto months = load_graphs(expand_inputs(o.graphs, kGraphPrefix));
  const json config = {{"command", "stats"}, {"null", o.n_null}, {"bins", o.bins}, {"pooled", o.pooled}};
  const Stamp stamp("stats", o.seed, config);
  make_dir(o.out);
  CsvOut table(fs::path(o.out) / "stats.csv", stamp, kStatsColumns);
  CsvOut joint(fs::path(o.out) / "joint_degrees.csv", stamp, {"month", "layer", "node", "in_degree", "out_degree"});
  CsvOut activity(fs::path(o.out) / "activity.csv", stamp, {"month", "node", "active_layers"});

  for (const auto& [month, g0] : months) {
    const LayeredMultigraph g =
        o.bins.empty() ? g0
                       : merge_layers(g0, BinSet::from_bins(parse_bins(o.bins), g0.num_layers(), BinningKind::kNonContiguous));
    const std::uint64_t month_seed = infer::mix_seed(o.seed, static_cast<std::uint64_t>(month));
    json doc = {{"month", month}, {"layers", json::array()}};

    auto one = [&](const std::string& label, const stats::LayerView& v, std::uint64_t seed) {
      std::vector<std::string> row = {std::to_string(month), label};
      json lj = layer_report(v, o.n_null, seed, o.jobs, row);
      lj["label"] = label;
      doc["layers"].push_back(std::move(lj));
      table.row(row);
      for (const auto& jd : stats::joint_degree_table(v)) {
        joint.row({std::to_string(month), label, g.id_of(jd.node), std::to_string(jd.in), std::to_string(jd.out)});
      }
    };
    for (std::size_t l = 0; l < g.num_layers(); ++l) one(g.layer_labels()[l], stats::view_of(g, l), infer::mix_seed(month_seed, l));
    if (o.pooled) one("pooled", stats::pooled_view(g), infer::mix_seed(month_seed, g.num_layers()));

    const auto act = stats::total_activity(g);
    json hist = json::array();
    for (const auto& [b, n] : act.histogram) hist.push_back({b, n});
    doc["activity"] = {{"mean", act.mean}, {"histogram", std::move(hist)}};
    for (std::size_t i = 0; i < act.activity.size(); ++i) {
      activity.row({std::to_string(month), g.id_of(static_cast<NodeIndex>(i)), std::to_string(act.activity[i])});
    }
    write_json(fs::path(o.out) / ("stats_" + month_tag(month) + ".json"), std::move(doc), stamp);
  }
  out << "stats for " << months.size() << " month(s)\n";
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  std::vector<std::string> graphs;
  std::uint64_t seed = 0;
  std::string binning = "contiguous";
  int sweeps = infer::FitConfig{}.n_sweeps;
  int anneal = infer::FitConfig{}.n_anneal;
  int jobs = 1;
  std::string out;
};

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  const auto kind = binning_from_flag(o.binning);
  if (!kind) throw Error("unknown binning '" + o.binning + "'");
  infer::FitConfig config;
  config.seed = o.seed;
  config.binning_kind = *kind;
  config.n_sweeps = o.sweeps;
  config.n_anneal = o.anneal;
  config.jobs = o.jobs;
  config.validate();
  const auto months = load_graphs(expand_inputs(o.graphs, kGraphPrefix));

  // jobs only changes scheduling, so it stays out of the hash.
  json cj = io::to_json(config);
  cj["command"] = "fit";
  const Stamp stamp("fit", o.seed, cj);
  const auto series = timeseries::run_series(months, config);
  make_dir(o.out);
  CsvOut table(fs::path(o.out) / "fits.csv", stamp,
               {"month", "active_banks", "b_count", "bins", "bits", "differentiation_bits", "aggregation_bits",
                "log10_odds_vs_differentiation", "log10_odds_vs_aggregation"});
  for (const auto& f : series.fits) {
    const auto& g = months.at(f.month);
    json j = io::to_json(f);
    j["bins_label"] = f.fit.bins.to_string(g.layer_labels());
    j["config"] = io::to_json(config);
    write_json(fs::path(o.out) / (std::string(kFitPrefix) + month_tag(f.month) + ".json"), std::move(j), stamp);
    table.row({std::to_string(f.month), std::to_string(f.active_banks), std::to_string(f.b_count),
               f.fit.bins.to_string(g.layer_labels()), num(f.fit.dl.total), num(f.differentiation_bits),
               num(f.aggregation_bits), num(f.log10_vs_differentiation), num(f.log10_vs_aggregation)});
  }
  for (const auto& [m, what] : series.errors) err << "month " << m << ": " << what << '\n';
  out << "fitted " << series.fits.size() << " of " << months.size() << " month(s)\n";
  return series.errors.empty() ? 0 : 1;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::string> graphs;
  std::vector<std::string> fits;
  std::string q = "0.95,0.99,1";
  std::string top = "0.1";
  std::string loans;
  std::string out;
};

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  const auto qs = parse_doubles(o.q, "q");
  const auto tops = parse_doubles(o.top, "top fraction");
  for (double q : qs) {
    if (!(q > 0.0) || q > 1.0) throw Error("q must be in (0, 1]");
  }
  for (double t : tops) {
    if (!(t > 0.0) || t > 1.0) throw Error("top fraction must be in (0, 1]");
  }
  const auto months = load_graphs(expand_inputs(o.graphs, kGraphPrefix));

  std::vector<timeseries::MonthlyFit> fits;
  std::map<int, std::string> fit_files;
  for (const auto& file : expand_inputs(o.fits, kFitPrefix)) {
    const json j = io::read_json_file(file);
    const int month = j.value("month", 0);
    const auto g = months.find(month);
    if (g == months.end()) throw Error(file + ": no graph for month " + std::to_string(month));
    io::StoredFit s;
    try {
      s = io::stored_fit_from_json(j, g->second.num_layers());
    } catch (const Error& e) {
      throw Error(file + ": " + e.what());
    }
    if (s.partition.size() != g->second.num_nodes()) throw Error(file + ": partition does not match the graph");
    if (!fit_files.emplace(month, file).second) throw Error(file + ": month " + std::to_string(month) + " given twice");
    timeseries::MonthlyFit f;
    f.month = month;
    f.fit.partition = s.partition;
    f.fit.bins = s.bins;
    f.fit.dl.total = s.bits;
    f.differentiation_bits = s.differentiation_bits;
    f.aggregation_bits = s.aggregation_bits;
    f.log10_vs_differentiation = s.log10_vs_differentiation;
    f.log10_vs_aggregation = s.log10_vs_aggregation;
    f.active_banks = g->second.num_nodes();
    f.b_count = s.partition.num_groups();
    fits.push_back(std::move(f));
  }
  std::sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.month < b.month; });

  int status = 0;
  for (const auto& [m, g] : months) {
    if (!fit_files.count(m)) {
      err << "missing fit for month " << m << '\n';
      status = 1;
    }
  }

  const json config = {{"command", "report"}, {"q", qs}, {"top", tops}, {"loans", !o.loans.empty()}};
  const Stamp stamp("report", std::nullopt, config);
  make_dir(o.out);
  const fs::path dir(o.out);

  {
    CsvOut t(dir / "og_timeline.csv", stamp,
             {"month", "active_banks", "b_count", "num_bins", "bins", "bits", "differentiation_bits",
              "aggregation_bits", "log10_odds_vs_differentiation", "log10_odds_vs_aggregation"});
    for (const auto& f : fits) {
      t.row({std::to_string(f.month), std::to_string(f.active_banks), std::to_string(f.b_count),
             std::to_string(f.fit.bins.size()), f.fit.bins.to_string(months.at(f.month).layer_labels()),
             num(f.fit.dl.total), num(f.differentiation_bits), num(f.aggregation_bits),
             num(f.log10_vs_differentiation), num(f.log10_vs_aggregation)});
    }
  }
  {
    std::vector<std::string> cols = {"month"};
    for (double q : qs) cols.push_back("nmi_q" + num(q));
    for (double q : qs) cols.push_back("banks_q" + num(q));
    CsvOut t(dir / "nmi.csv", stamp, cols);
    std::map<int, std::vector<std::string>> rows;
    for (std::size_t k = 0; k < qs.size(); ++k) {
      for (const auto& p : timeseries::consecutive_nmi(months, fits, qs[k])) {
        auto& r = rows[p.month];
        r.resize(2 * qs.size());
        r[k] = num(p.nmi);
        r[qs.size() + k] = std::to_string(p.banks);
      }
    }
    for (auto& [m, r] : rows) {
      r.insert(r.begin(), std::to_string(m));
      t.row(r);
    }
  }
  {
    CsvOut sizes(dir / "ogb_sizes.csv", stamp, {"month", "bin", "layers", "size", "network_size"});
    CsvOut groups(dir / "group_strengths.csv", stamp, {"month", "bin", "group", "s_out", "s_in", "s_internal"});
    CsvOut ratios(dir / "instrength_ratio.csv", stamp, {"month", "top", "bin", "id", "strength", "ratio"});
    for (const auto& f : fits) {
      const auto& g = months.at(f.month);
      const auto& bins = f.fit.bins;
      const auto sz = timeseries::ogb_sizes(g, bins);
      const std::string total = num(network_size(g));
      for (std::size_t b = 0; b < bins.size(); ++b) {
        std::string members;
        for (int l : bins.bin(b)) members += (members.empty() ? "" : "+") + g.layer_labels()[l];
        sizes.row({std::to_string(f.month), std::to_string(b + 1), members, num(sz[b]), total});
      }
      const auto gs = timeseries::group_strengths(g, f.fit.partition, bins);
      for (std::size_t b = 0; b < gs.size(); ++b) {
        for (std::size_t r = 0; r < gs[b].size(); ++r) {
          groups.row({std::to_string(f.month), std::to_string(b + 1), std::to_string(r + 1), num(gs[b][r].s_out),
                      num(gs[b][r].s_in), num(gs[b][r].s_internal)});
        }
      }
      for (double top : tops) {
        const auto table = timeseries::instrength_ratio_table(g, bins, top);
        for (std::size_t b = 0; b < table.size(); ++b) {
          for (const auto& br : table[b]) {
            ratios.row({std::to_string(f.month), num(top), std::to_string(b + 1), br.id, num(br.strength), num(br.ratio)});
          }
        }
      }
    }
  }
  if (!o.loans.empty()) {
    const auto records = io::read_loans_csv_file(o.loans);
    std::map<int, std::vector<LoanRecord>> by_month;
    for (const auto& r : records) by_month[r.month].push_back(r);
    CsvOut classes(dir / "yields.csv", stamp, {"month", "maturity", "rated", "median", "volume_weighted_mean"});
    CsvOut spread(dir / "yield_spread.csv", stamp, {"month", "spread"});
    for (const auto& [m, rs] : by_month) {
      timeseries::YieldSummary y;
      try {
        y = timeseries::yield_summary(rs);
      } catch (const Error&) {
        continue;  // month without rated loans
      }
      for (std::size_t c = 0; c < kMaturityClassCount; ++c) {
        classes.row({std::to_string(m), std::string(kMaturityCodes[c]), std::to_string(y.rated[c]), num(y.median[c]),
                     num(y.volume_weighted_mean[c])});
      }
      spread.row({std::to_string(m), num(y.spread)});
    }
  }
  out << "report for " << fits.size() << " fitted month(s)\n";
  return status;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layered stochastic block model analysis of interbank loan networks", "ilsbm"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  IngestOptions ingest_o;
  auto* ingest = app.add_subcommand("ingest", "Loan CSV to one graph JSON per month");
  ingest->add_option("csv", ingest_o.csv, "Loan records (lender,borrower,month,amount,maturity,rate)")->required();
  ingest->add_option("--out", ingest_o.out, "Output directory")->required();

  EmitOptions emit_o;
  auto* emit = app.add_subcommand("emit", "Graph JSONs back to a loan CSV");
  emit->add_option("graphs", emit_o.graphs, "Graph files or directories")->required();
  emit->add_option("--out", emit_o.out, "Output CSV file")->required();

  GenerateOptions gen_o;
  auto* gen = app.add_subcommand("generate", "Sample planted graphs");
  gen->add_option("--seed", gen_o.seed, "Random seed")->required();
  gen->add_flag("--fig2", gen_o.fig2, "Three-layer core-periphery benchmark");
  gen->add_option("--spec", gen_o.spec, "Planted spec JSON");
  gen->add_option("--months", gen_o.months, "Months, e.g. 1-12 or 1,3,5")->capture_default_str();
  gen->add_option("--out", gen_o.out, "Output directory")->required();

  StatsOptions stats_o;
  auto* st = app.add_subcommand("stats", "Descriptive statistics per layer");
  st->add_option("graphs", stats_o.graphs, "Graph files or directories")->required();
  st->add_option("--seed", stats_o.seed, "Seed for the random-graph nulls")->required();
  st->add_option("--null", stats_o.n_null, "Random graphs per null model")->capture_default_str();
  st->add_option("--bins", stats_o.bins, "Analyse merged layers instead: bins split by '|', layer ordinals by ','");
  st->add_flag("--pooled", stats_o.pooled, "Also report all layers pooled");
  st->add_option("--jobs", stats_o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  st->add_option("--out", stats_o.out, "Output directory")->required();

  FitOptions fit_o;
  auto* fit = app.add_subcommand("fit", "Optimal granularity and partition per month");
  fit->add_option("graphs", fit_o.graphs, "Graph files or directories")->required();
  fit->add_option("--seed", fit_o.seed, "Random seed")->required();
  fit->add_option("--binning", fit_o.binning, "contiguous or noncontiguous")
      ->capture_default_str()
      ->check(CLI::IsMember({"contiguous", "noncontiguous", "non-contiguous"}));
  fit->add_option("--sweeps", fit_o.sweeps, "Sampler sweeps per granularity")->capture_default_str();
  fit->add_option("--anneal", fit_o.anneal, "Independent restarts")->capture_default_str();
  fit->add_option("--jobs", fit_o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_o.out, "Output directory")->required();

  ReportOptions rep_o;
  auto* rep = app.add_subcommand("report", "Figure-ready CSV tables from fits");
  rep->add_option("--graphs", rep_o.graphs, "Graph files or directories")->required();
  rep->add_option("--fits", rep_o.fits, "Fit files or directories")->required();
  rep->add_option("--q", rep_o.q, "Strength-filter levels for NMI")->capture_default_str();
  rep->add_option("--top", rep_o.top, "Top fractions for instrength ratios")->capture_default_str();
  rep->add_option("--loans", rep_o.loans, "Loan CSV with rates for yield tables");
  rep->add_option("--out", rep_o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*ingest) return cmd_ingest(ingest_o, out, err);
    if (*emit) return cmd_emit(emit_o, out, err);
    if (*gen) return cmd_generate(gen_o, out, err);
    if (*st) return cmd_stats(stats_o, out, err);
    if (*fit) return cmd_fit(fit_o, out, err);
    if (*rep) return cmd_report(rep_o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ilsbm::cli
