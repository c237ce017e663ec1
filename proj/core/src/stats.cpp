#include "ilsbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <unordered_set>

#include <boost/math/special_functions/gamma.hpp>

#include "parallel.hpp"

namespace ilsbm::stats {

namespace {

using Adjacency = std::vector<std::vector<NodeIndex>>;

// Undirected simple neighbour lists, self-loops dropped.
Adjacency undirected_simple(const LayerView& v) {
  Adjacency adj(v.num_nodes);
  for (auto [a, b] : v.edges) {
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adj;
}

std::vector<std::size_t> weak_labels(const LayerView& v, std::size_t& count) {
  std::vector<std::size_t> parent(v.num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : v.edges) {
    const auto ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::size_t> label(v.num_nodes);
  std::vector<std::size_t> remap(v.num_nodes, std::numeric_limits<std::size_t>::max());
  count = 0;
  for (std::size_t i = 0; i < v.num_nodes; ++i) {
    const auto r = find(i);
    if (remap[r] == std::numeric_limits<std::size_t>::max()) remap[r] = count++;
    label[i] = remap[r];
  }
  return label;
}

// Iterative Tarjan; returns the component id per node.
std::vector<std::size_t> strong_labels(const LayerView& v, std::size_t& count) {
  const std::size_t n = v.num_nodes;
  Adjacency out(n);
  for (auto [a, b] : v.edges) out[a].push_back(b);
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // node, next edge
  std::size_t next_index = 0;
  count = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [u, k] = call.back();
      if (k < out[u].size()) {
        const std::size_t w = out[u][k++];
        if (index[w] == kUnset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[u] = std::min(low[u], index[w]);
        }
        continue;
      }
      const std::size_t done = u;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != done);
        ++count;
      }
    }
  }
  return comp;
}

double mean_local_clustering(const Adjacency& adj) {
  if (adj.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    const auto& nb = adj[i];
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        links += std::binary_search(adj[nb[a]].begin(), adj[nb[a]].end(), nb[b]);
      }
    }
    sum += 2.0 * static_cast<double>(links) / static_cast<double>(k * (k - 1));
  }
  return sum / static_cast<double>(adj.size());
}

std::vector<double> midranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mid;
    i = j + 1;
  }
  return r;
}

double tie_correction(const std::vector<double>& x) {
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  double t = 0.0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    const double g = static_cast<double>(j - i);
    t += g * g * g - g;
    i = j;
  }
  return t;
}

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace

LayerView LayerView::from_edges(std::size_t num_nodes, std::vector<std::pair<NodeIndex, NodeIndex>> edges) {
  for (auto [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) throw Error("edge endpoint out of range");
  }
  LayerView v;
  v.num_nodes = num_nodes;
  v.edges = std::move(edges);
  v.ids.resize(num_nodes);
  std::iota(v.ids.begin(), v.ids.end(), NodeIndex{0});
  return v;
}

LayerView view_of(const LayeredMultigraph& g, std::size_t layer) {
  const auto edges = g.layer(layer);
  std::vector<char> active(g.num_nodes(), 0);
  for (const Edge& e : edges) active[e.src] = active[e.dst] = 1;
  std::vector<NodeIndex> local(g.num_nodes(), 0);
  LayerView v;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (!active[i]) continue;
    local[i] = static_cast<NodeIndex>(v.ids.size());
    v.ids.push_back(static_cast<NodeIndex>(i));
  }
  v.num_nodes = v.ids.size();
  v.edges.reserve(edges.size());
  for (const Edge& e : edges) v.edges.emplace_back(local[e.src], local[e.dst]);
  return v;
}

LayerView pooled_view(const LayeredMultigraph& g) { return view_of(collapse(g), 0); }

double directed_density(const LayerView& v) {
  if (v.num_nodes < 2) throw Error("directed density needs at least 2 nodes");
  std::set<std::pair<NodeIndex, NodeIndex>> pairs;
  for (auto [a, b] : v.edges) {
    if (a != b) pairs.emplace(a, b);
  }
  const double n = static_cast<double>(v.num_nodes);
  return static_cast<double>(pairs.size()) / (n * (n - 1.0));
}

std::map<std::int64_t, double> ccdf_of(const std::vector<std::int64_t>& degrees) {
  std::map<std::int64_t, double> out;
  if (degrees.empty()) return out;
  std::vector<std::int64_t> s = degrees;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  out[0] = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0 && s[i] == s[i - 1]) continue;
    out[s[i]] = static_cast<double>(s.size() - i) / n;
  }
  return out;
}

DegreeSummary degree_summary(const LayerView& v) {
  DegreeSummary d;
  d.in_degrees.assign(v.num_nodes, 0);
  d.out_degrees.assign(v.num_nodes, 0);
  for (auto [a, b] : v.edges) {
    ++d.out_degrees[a];
    ++d.in_degrees[b];
  }
  d.total_degrees.resize(v.num_nodes);
  for (std::size_t i = 0; i < v.num_nodes; ++i) d.total_degrees[i] = d.in_degrees[i] + d.out_degrees[i];
  d.ccdf = ccdf_of(d.total_degrees);
  return d;
}

StretchedExpFit fit_stretched_exponential(const std::vector<double>& samples) {
  std::vector<double> x;
  for (double s : samples) {
    if (s > 0.0 && std::isfinite(s)) x.push_back(s);
  }
  if (x.size() < kMinFitSamples) {
    throw Error("stretched exponential fit needs at least " + std::to_string(kMinFitSamples) +
                " positive samples, got " + std::to_string(x.size()));
  }
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) throw Error("stretched exponential fit on degenerate samples");
  const double n = static_cast<double>(x.size());
  // Work on x / scale to keep x^beta in range.
  const double scale = x[x.size() / 2];
  std::vector<double> lx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i] / scale);
  const double mean_lx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;

  // Profile score in beta; strictly decreasing.
  auto score = [&](double beta) {
    const double m = *std::max_element(lx.begin(), lx.end()) * beta;
    double s0 = 0.0, s1 = 0.0;
    for (double l : lx) {
      const double t = std::exp(beta * l - m);
      s0 += t;
      s1 += t * l;
    }
    return 1.0 / beta + mean_lx - s1 / s0;
  };
  double lo = 1e-6, hi = 1.0;
  while (score(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw Error("stretched exponential fit did not converge");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (score(mid) > 0.0 ? lo : hi) = mid;
  }
  const double beta = 0.5 * (lo + hi);
  double mean_t = 0.0;
  for (double l : lx) mean_t += std::exp(beta * l);
  mean_t /= n;
  // scale^beta of the rescaled data is mean_t; lambda = 1 / (scale * mean_t^(1/beta)).
  const double lambda = 1.0 / (scale * std::pow(mean_t, 1.0 / beta));

  // Observed information in (beta, lambda).
  double st = 0.0, stu = 0.0, stuu = 0.0;
  for (double xi : x) {
    const double u = std::log(lambda * xi);
    const double t = std::exp(beta * u);
    st += t;
    stu += t * u;
    stuu += t * u * u;
  }
  const double h_bb = -n / (beta * beta) - stuu;
  const double h_ll = (-beta * beta * st - beta * (n - st)) / (lambda * lambda);
  const double h_bl = (n - st) / lambda - beta * stu / lambda;
  const double det = h_bb * h_ll - h_bl * h_bl;

  StretchedExpFit fit;
  fit.lambda = lambda;
  fit.beta = beta;
  fit.n = x.size();
  if (det > 0.0) {
    fit.stderr_beta = std::sqrt(std::max(0.0, -h_ll / det));
    fit.stderr_lambda = std::sqrt(std::max(0.0, -h_bb / det));
  } else {
    fit.stderr_beta = fit.stderr_lambda = std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0 && x[i] == x[i - 1]) continue;
    const double emp = static_cast<double>(x.size() - i) / n;
    const double model_log10 = -std::pow(lambda * x[i], beta) / std::log(10.0);
    const double r = std::log10(emp) - model_log10;
    fit.rss += r * r;
  }
  fit.fat_tail = beta > 0.0 && beta <= 1.0;
  return fit;
}

StretchedExpFit fit_stretched_exponential(const std::vector<std::int64_t>& degrees) {
  std::vector<double> x(degrees.begin(), degrees.end());
  return fit_stretched_exponential(x);
}

std::size_t undirected_edge_count(const LayerView& v) {
  std::size_t m = 0;
  for (const auto& nb : undirected_simple(v)) m += nb.size();
  return m / 2;
}

LayerView erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed) {
  const std::size_t max_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  if (m > max_pairs) throw Error("too many edges for G(N, M)");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeIndex> pick(0, n == 0 ? 0 : static_cast<NodeIndex>(n - 1));
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  edges.reserve(m);
  while (edges.size() < m) {
    NodeIndex a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert((static_cast<std::uint64_t>(a) << 32) | b).second) edges.emplace_back(a, b);
  }
  return LayerView::from_edges(n, std::move(edges));
}

double clustering(const LayerView& v) { return mean_local_clustering(undirected_simple(v)); }

ClusteringReport clustering_with_null(const LayerView& v, int n_null, std::uint64_t seed, int jobs) {
  if (v.num_nodes < 3) throw Error("clustering needs at least 3 nodes");
  if (n_null < 1) throw Error("null ensemble size must be positive");
  ClusteringReport r;
  r.c_observed = clustering(v);
  r.n_null = n_null;
  const std::size_t m = undirected_edge_count(v);
  std::vector<double> null_c(static_cast<std::size_t>(n_null));
  detail::parallel_for(null_c.size(), jobs, [&](std::size_t k) {
    null_c[k] = clustering(erdos_renyi(v.num_nodes, m, seed + k));
  });
  const auto ms = mean_sd(null_c);
  r.c_null_mean = ms.mean;
  r.c_null_sd = ms.sd;
  r.z = ms.sd > 0.0 ? (r.c_observed - ms.mean) / ms.sd : std::numeric_limits<double>::quiet_NaN();
  return r;
}

PathLength avg_shortest_path_lcc(const LayerView& v) {
  const Adjacency adj = undirected_simple(v);
  std::size_t count = 0;
  const auto label = weak_labels(LayerView::from_edges(v.num_nodes, [&] {
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (auto [a, b] : v.edges) {
      if (a != b) e.emplace_back(a, b);
    }
    return e;
  }()), count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto l : label) ++sizes[l];
  std::size_t best = 0;
  for (std::size_t c = 1; c < count; ++c) {
    if (sizes[c] > sizes[best]) best = c;
  }
  if (count == 0 || sizes[best] < 2) throw Error("path length needs at least one non-loop edge");

  double total = 0.0;
  std::vector<int> dist(v.num_nodes);
  std::queue<NodeIndex> q;
  for (std::size_t s = 0; s < v.num_nodes; ++s) {
    if (label[s] != best) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    q.push(static_cast<NodeIndex>(s));
    while (!q.empty()) {
      const NodeIndex u = q.front();
      q.pop();
      total += dist[u];
      for (NodeIndex w : adj[u]) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
  }
  const double k = static_cast<double>(sizes[best]);
  return {total / (k * (k - 1.0)), sizes[best]};
}

NullPathLength null_path_length(const LayerView& v, int n_null, std::uint64_t seed, int jobs) {
  if (n_null < 1) throw Error("null ensemble size must be positive");
  const std::size_t m = undirected_edge_count(v);
  std::vector<double> d(static_cast<std::size_t>(n_null));
  detail::parallel_for(d.size(), jobs, [&](std::size_t k) {
    d[k] = avg_shortest_path_lcc(erdos_renyi(v.num_nodes, m, seed + k)).mean;
  });
  const auto ms = mean_sd(d);
  return {ms.mean, ms.sd, n_null};
}

ComponentStats component_stats(const LayerView& v) {
  ComponentStats s;
  if (v.num_nodes == 0) return s;
  const double n = static_cast<double>(v.num_nodes);
  auto largest = [&](const std::vector<std::size_t>& label, std::size_t count) {
    std::vector<std::size_t> sizes(count, 0);
    for (auto l : label) ++sizes[l];
    return static_cast<double>(*std::max_element(sizes.begin(), sizes.end())) / n;
  };
  const auto weak = weak_labels(v, s.n_weak);
  s.lcc_weak_frac = largest(weak, s.n_weak);
  const auto strong = strong_labels(v, s.n_strong);
  s.lcc_strong_frac = largest(strong, s.n_strong);
  return s;
}

double degree_assortativity(const LayerView& v) {
  const auto d = degree_summary(v);
  double sx = 0.0, sxx = 0.0, sxy = 0.0, m = 0.0;
  for (auto [a, b] : v.edges) {
    if (a == b) continue;
    const double x = static_cast<double>(d.total_degrees[a]);
    const double y = static_cast<double>(d.total_degrees[b]);
    sx += x + y;
    sxx += x * x + y * y;
    sxy += 2.0 * x * y;
    m += 2.0;
  }
  if (m < 4.0) throw Error("assortativity needs at least 2 non-loop edges");
  const double mean = sx / m;
  const double var = sxx / m - mean * mean;
  if (!(var > 1e-12 * std::max(1.0, mean * mean))) throw Error("assortativity undefined: zero degree variance");
  return std::clamp((sxy / m - mean * mean) / var, -1.0, 1.0);
}

KendallW kendall_w(const std::vector<std::vector<double>>& scores) {
  if (scores.size() < 2) throw Error("Kendall's W needs at least 2 rankings");
  const std::size_t n = scores.front().size();
  for (const auto& s : scores) {
    if (s.size() != n) throw Error("rankings cover different item sets");
  }
  if (n < 3) throw Error("Kendall's W needs at least 3 items");
  const double m = static_cast<double>(scores.size());
  const double nn = static_cast<double>(n);
  std::vector<double> total(n, 0.0);
  double ties = 0.0;
  for (const auto& s : scores) {
    const auto r = midranks(s);
    for (std::size_t i = 0; i < n; ++i) total[i] += r[i];
    ties += tie_correction(s);
  }
  const double mean = m * (nn + 1.0) / 2.0;
  double ss = 0.0;
  for (double t : total) ss += (t - mean) * (t - mean);
  const double denom = m * m * (nn * nn * nn - nn) - m * ties;
  if (!(denom > 0.0)) throw Error("Kendall's W undefined: all rankings fully tied");
  KendallW out;
  out.w = std::clamp(12.0 * ss / denom, 0.0, 1.0);
  const double chi2 = m * (nn - 1.0) * out.w;
  out.p = boost::math::gamma_q((nn - 1.0) / 2.0, chi2 / 2.0);
  return out;
}

KendallW kendall_w(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("rankings cover different item sets");
  return kendall_w(std::vector<std::vector<double>>{a, b});
}

ActivityReport total_activity(const LayeredMultigraph& g) {
  ActivityReport r;
  r.activity.assign(g.num_nodes(), 0);
  std::vector<std::size_t> last(g.num_nodes(), std::numeric_limits<std::size_t>::max());
  for (std::size_t l = 0; l < g.num_layers(); ++l) {
    for (const Edge& e : g.layer(l)) {
      for (NodeIndex i : {e.src, e.dst}) {
        if (last[i] != l) {
          last[i] = l;
          ++r.activity[i];
        }
      }
    }
  }
  double sum = 0.0;
  for (int b : r.activity) {
    ++r.histogram[b];
    sum += b;
  }
  r.mean = g.num_nodes() ? sum / static_cast<double>(g.num_nodes()) : 0.0;
  return r;
}

std::vector<JointDegree> joint_degree_table(const LayerView& v) {
  const auto d = degree_summary(v);
  std::vector<JointDegree> out(v.num_nodes);
  for (std::size_t i = 0; i < v.num_nodes; ++i) out[i] = {v.ids[i], d.in_degrees[i], d.out_degrees[i]};
  return out;
}

}  // namespace ilsbm::stats
