#include "ilsbm/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "parallel.hpp"

namespace ilsbm::timeseries {

namespace {

double entropy(const std::vector<std::int64_t>& counts, double n) {
  double h = 0.0;
  for (auto c : counts) {
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

std::vector<std::size_t> by_decreasing_strength(const LayeredMultigraph& g, const std::vector<Strength>& s) {
  std::vector<std::size_t> order(g.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s[a].total != s[b].total) return s[a].total > s[b].total;
    return g.id_of(static_cast<NodeIndex>(a)) < g.id_of(static_cast<NodeIndex>(b));
  });
  return order;
}

}  // namespace

Series run_series(const std::map<int, LayeredMultigraph>& months, const infer::FitConfig& config) {
  if (months.empty()) throw Error("no months to fit");
  config.validate();
  std::vector<int> keys;
  for (const auto& [m, g] : months) keys.push_back(m);
  std::vector<std::optional<MonthlyFit>> results(keys.size());
  std::vector<std::string> errors(keys.size());
  infer::FitConfig inner = config;
  if (keys.size() > 1) inner.jobs = 1;
  detail::parallel_for(keys.size(), config.jobs, [&](std::size_t k) {
    try {
      const LayeredMultigraph& g = months.at(keys[k]);
      infer::FitConfig local = inner;
      local.seed = infer::mix_seed(config.seed, static_cast<std::uint64_t>(keys[k]));
      const auto report = infer::reject_report(g, local);
      MonthlyFit mf;
      mf.month = keys[k];
      mf.fit = report.og;
      mf.fit.seed = config.seed;
      mf.differentiation_bits = report.differentiation.dl.total;
      mf.aggregation_bits = report.aggregation.dl.total;
      mf.log10_vs_differentiation = report.log10_vs_differentiation;
      mf.log10_vs_aggregation = report.log10_vs_aggregation;
      mf.active_banks = g.num_nodes();
      mf.b_count = mf.fit.partition.num_groups();
      results[k] = std::move(mf);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  Series out;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (results[k]) {
      out.fits.push_back(std::move(*results[k]));
    } else {
      out.errors[keys[k]] = errors[k];
    }
  }
  return out;
}

std::vector<std::string> strength_filter(const LayeredMultigraph& g, double q) {
  if (!(q > 0.0) || q > 1.0) throw Error("q must be in (0, 1]");
  const auto s = strengths(g, all_layers(g));
  double two_s = 0.0;
  for (const auto& x : s) two_s += x.total;
  if (!(two_s > 0.0)) throw Error("strength filter on an empty graph");
  std::vector<std::string> out;
  double cum = 0.0;
  for (std::size_t i : by_decreasing_strength(g, s)) {
    if (!(s[i].total > 0.0)) break;
    out.push_back(g.id_of(static_cast<NodeIndex>(i)));
    cum += s[i].total / two_s;
    if (cum >= q - 1e-12) break;
  }
  return out;
}

double nmi(const sbm::Partition& a, const sbm::Partition& b) {
  if (a.size() != b.size()) throw Error("NMI of partitions over different element sets");
  if (a.size() == 0) throw Error("NMI of empty partitions");
  const double n = static_cast<double>(a.size());
  const std::size_t ka = a.num_groups(), kb = b.num_groups();
  std::vector<std::int64_t> joint(ka * kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++joint[a[i] * kb + b[i]];
  const auto sa = a.group_sizes();
  const auto sb = b.group_sizes();
  const double ha = entropy(sa, n), hb = entropy(sb, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t r = 0; r < ka; ++r) {
    for (std::size_t s = 0; s < kb; ++s) {
      const auto c = joint[r * kb + s];
      if (c == 0) continue;
      const double pc = static_cast<double>(c) / n;
      mi += pc * std::log(pc * n * n / (static_cast<double>(sa[r]) * static_cast<double>(sb[s])));
    }
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

std::vector<NmiPoint> consecutive_nmi(const std::map<int, LayeredMultigraph>& months,
                                      const std::vector<MonthlyFit>& fits, double q) {
  std::map<int, const MonthlyFit*> by_month;
  for (const auto& f : fits) by_month[f.month] = &f;
  std::vector<NmiPoint> out;
  for (const auto& [t, fit] : by_month) {
    const auto prev = by_month.find(t - 1);
    if (prev == by_month.end()) continue;
    const auto& g0 = months.at(t - 1);
    const auto& g1 = months.at(t);
    const auto f0 = strength_filter(g0, q);
    const std::set<std::string> keep0(f0.begin(), f0.end());
    std::vector<std::string> common;
    for (const auto& id : strength_filter(g1, q)) {
      if (keep0.count(id)) common.push_back(id);
    }
    if (common.empty()) continue;
    std::sort(common.begin(), common.end());
    std::vector<int> l0, l1;
    for (const auto& id : common) {
      l0.push_back(prev->second->fit.partition[*g0.index_of(id)]);
      l1.push_back(fit->fit.partition[*g1.index_of(id)]);
    }
    out.push_back({t, nmi(sbm::Partition::from_labels(l0), sbm::Partition::from_labels(l1)), common.size()});
  }
  return out;
}

std::vector<double> ogb_sizes(const LayeredMultigraph& g, const BinSet& bins) {
  if (bins.num_layers() != g.num_layers()) throw Error("bin set does not match graph layers");
  std::vector<double> out;
  for (const auto& bin : bins.bins()) out.push_back(layer_size(g, bin));
  return out;
}

std::vector<std::vector<GroupStrength>> group_strengths(const LayeredMultigraph& g, const sbm::Partition& b,
                                                        const BinSet& bins) {
  if (b.size() != g.num_nodes()) throw Error("partition size does not match graph");
  if (bins.num_layers() != g.num_layers()) throw Error("bin set does not match graph layers");
  std::vector<std::vector<GroupStrength>> out(bins.size(), std::vector<GroupStrength>(b.num_groups()));
  for (std::size_t k = 0; k < bins.size(); ++k) {
    for (int l : bins.bin(k)) {
      for (const Edge& e : g.layer(l)) {
        const int r = b[e.src], s = b[e.dst];
        if (r == s) {
          out[k][r].s_internal += e.weight;
        } else {
          out[k][r].s_out += e.weight;
          out[k][s].s_in += e.weight;
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<BankRatio>> instrength_ratio_table(const LayeredMultigraph& g, const BinSet& bins,
                                                           double top_fraction) {
  if (!(top_fraction > 0.0) || top_fraction > 1.0) throw Error("top fraction must be in (0, 1]");
  if (bins.num_layers() != g.num_layers()) throw Error("bin set does not match graph layers");
  const auto total = strengths(g, all_layers(g));
  const auto order = by_decreasing_strength(g, total);
  const auto top = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(g.num_nodes()) - 1e-9));
  std::vector<std::vector<BankRatio>> out(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const auto s = strengths(g, bins.bin(k));
    for (std::size_t j = 0; j < std::min(top, order.size()); ++j) {
      const std::size_t i = order[j];
      if (!(s[i].total > 0.0)) continue;
      out[k].push_back({g.id_of(static_cast<NodeIndex>(i)), s[i].total, s[i].in / s[i].total});
    }
  }
  return out;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw Error("median of an empty set");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

YieldSummary yield_summary(std::span<const LoanRecord> records, const YieldClasses& classes) {
  std::array<std::vector<double>, kMaturityClassCount> rates;
  std::array<double, kMaturityClassCount> volume{}, weighted{};
  for (const auto& r : records) {
    if (!r.rate) continue;
    const int c = ordinal(r.maturity);
    rates[c].push_back(*r.rate);
    volume[c] += r.amount;
    weighted[c] += r.amount * *r.rate;
  }
  YieldSummary out;
  std::size_t rated = 0;
  for (std::size_t c = 0; c < kMaturityClassCount; ++c) {
    out.rated[c] = rates[c].size();
    rated += rates[c].size();
    if (rates[c].empty()) continue;
    out.median[c] = median(rates[c]);
    if (volume[c] > 0.0) out.volume_weighted_mean[c] = weighted[c] / volume[c];
  }
  if (rated == 0) throw Error("no rated records");
  auto pooled = [&](const std::vector<MaturityClass>& cs) {
    std::vector<double> xs;
    for (auto m : cs) xs.insert(xs.end(), rates[ordinal(m)].begin(), rates[ordinal(m)].end());
    return xs;
  };
  const auto lo = pooled(classes.short_classes);
  const auto hi = pooled(classes.long_classes);
  if (!lo.empty() && !hi.empty()) out.spread = median(hi) - median(lo);
  return out;
}

}  // namespace ilsbm::timeseries
