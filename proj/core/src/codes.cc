// Copyright 2026 The mdlxf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdlxf/codes.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace mdlxf::codes {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double LogSumExp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> LogSoftmaxOf(const std::vector<double>& w) {
  const double lse = LogSumExp(w);
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - lse;
  return out;
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// One draw from a GMM with a hard Gumbel-max component choice.
double Sample(const GMMParams& p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  int k = 0;
  if (p.K() > 1) {
    std::uniform_real_distribution<double> uni(
        std::numeric_limits<double>::min(), 1.0);
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < p.K(); ++j) {
      const double g = p.w[j] - std::log(-std::log(uni(rng)));
      if (g > best) {
        best = g;
        k = j;
      }
    }
  }
  return p.mu[k] + std::sqrt(p.Variance(k)) * normal(rng);
}

bool ClosedForm(const GMMParams& q, const GMMParams& p) {
  return q.K() == 1 && p.K() == 1;
}

std::uint64_t Mix(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

nlohmann::json GmmToJson(const GMMParams& g) {
  return {{"mu", g.mu}, {"nu", g.nu}, {"w", g.w}};
}

GMMParams GmmFromJson(const nlohmann::json& j) {
  GMMParams g;
  g.mu = j.at("mu").get<std::vector<double>>();
  g.nu = j.at("nu").get<std::vector<double>>();
  g.w = j.at("w").get<std::vector<double>>();
  if (g.mu.empty() || g.mu.size() != g.nu.size() || g.mu.size() != g.w.size())
    throw ValidationError("GMM needs matching non-empty mu, nu and w");
  return g;
}

}  // namespace

GMMParams GMMParams::Gaussian(double mu, double nu) { return {{mu}, {nu}, {0.0}}; }

GMMParams GMMParams::EqualMix(const std::vector<double>& means, double nu) {
  GMMParams g;
  g.mu = means;
  g.nu.assign(means.size(), nu);
  g.w.assign(means.size(), 0.0);
  return g;
}

std::vector<double> GMMParams::Mixing() const {
  auto l = LogSoftmaxOf(w);
  for (double& x : l) x = std::exp(x);
  return l;
}

double GaussianLogPdf(double x, double mu, double var) {
  const double d = x - mu;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double GmmLogPdf(const GMMParams& p, double x) {
  if (p.K() == 1) return GaussianLogPdf(x, p.mu[0], p.Variance(0));
  const auto logpi = LogSoftmaxOf(p.w);
  std::vector<double> t(p.K());
  for (int k = 0; k < p.K(); ++k)
    t[k] = logpi[k] + GaussianLogPdf(x, p.mu[k], p.Variance(k));
  return LogSumExp(t);
}

double GaussianKl(double mu, double var, double mu0, double var0) {
  const double d = mu - mu0;
  return 0.5 * (var / var0 + d * d / var0 - 1.0 + std::log(var0 / var));
}

double StandardNormalKl(double mu, double var) {
  return 0.5 * (var + mu * mu - 1.0 - std::log(var));
}

void DistributionBundle::Check() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += static_cast<std::size_t>(b.rows) * b.cols;
  if (n != posterior.size() || group.size() != posterior.size())
    throw ValidationError("bundle blocks, posteriors and groups disagree");
  if (group_names.size() != prior.size())
    throw ValidationError("bundle needs one name per prior group");
  for (int g : group)
    if (g < 0 || g >= static_cast<int>(prior.size()))
      throw ValidationError("bundle group index out of range");
}

Eigen::VectorXd DistributionBundle::Means() const {
  Eigen::VectorXd m(static_cast<Eigen::Index>(posterior.size()));
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    const auto pi = posterior[i].Mixing();
    double s = 0;
    for (int k = 0; k < posterior[i].K(); ++k) s += pi[k] * posterior[i].mu[k];
    m(static_cast<Eigen::Index>(i)) = s;
  }
  return m;
}

double DistributionBundle::PriorCostBits() const {
  double scalars = 0;
  for (const auto& p : prior) scalars += 3.0 * p.K();
  return kPriorScalarBits * scalars;
}

nlohmann::json BundleToJson(const DistributionBundle& b) {
  nlohmann::json j;
  j["blocks"] = nlohmann::json::array();
  for (const auto& bl : b.blocks)
    j["blocks"].push_back({{"name", bl.name}, {"rows", bl.rows}, {"cols", bl.cols}});
  j["group_names"] = b.group_names;
  j["group"] = b.group;
  j["prior"] = nlohmann::json::array();
  for (const auto& p : b.prior) j["prior"].push_back(GmmToJson(p));
  j["posterior"] = nlohmann::json::array();
  for (const auto& p : b.posterior) j["posterior"].push_back(GmmToJson(p));
  j["prior_cost_bits"] = b.PriorCostBits();
  return j;
}

DistributionBundle BundleFromJson(const nlohmann::json& j) {
  DistributionBundle b;
  try {
    for (const auto& bl : j.at("blocks"))
      b.blocks.push_back({bl.at("name").get<std::string>(),
                          bl.at("rows").get<int>(), bl.at("cols").get<int>()});
    b.group_names = j.at("group_names").get<std::vector<std::string>>();
    b.group = j.at("group").get<std::vector<int>>();
    for (const auto& p : j.at("prior")) b.prior.push_back(GmmFromJson(p));
    for (const auto& p : j.at("posterior"))
      b.posterior.push_back(GmmFromJson(p));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed bundle: ") + e.what());
  }
  b.Check();
  return b;
}

KlEstimate WeightKl(const GMMParams& q, const GMMParams& p, int samples,
                    std::uint64_t seed) {
  KlEstimate e;
  e.seed = seed;
  if (q == p) return e;
  if (ClosedForm(q, p)) {
    e.bits = NatsToBits(
        GaussianKl(q.mu[0], q.Variance(0), p.mu[0], p.Variance(0)));
    return e;
  }
  std::mt19937_64 rng(seed);
  double s = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = Sample(q, rng);
    const double d = GmmLogPdf(q, x) - GmmLogPdf(p, x);
    s += d;
    s2 += d * d;
  }
  const double mean = s / samples;
  const double var = samples > 1 ? (s2 - samples * mean * mean) / (samples - 1)
                                 : 0.0;
  e.samples = samples;
  e.bits = NatsToBits(mean);
  e.stderr_bits = NatsToBits(std::sqrt(std::max(0.0, var) / samples));
  return e;
}

KlEstimate MonteCarloKl(const DistributionBundle& b, int samples,
                        std::uint64_t seed, double temperature) {
  if (samples < 1) throw ValidationError("need at least one MC sample");
  if (temperature <= 0) throw ValidationError("temperature must be positive");
  b.Check();
  constexpr std::size_t kChunk = 2048;
  const std::size_t n = b.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> exact(chunks, 0.0);
  std::vector<std::vector<double>> totals(chunks,
                                          std::vector<double>(samples, 0.0));
  ParallelFor(chunks, [&](std::size_t c) {
    std::mt19937_64 rng(Mix(seed, c));
    const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const GMMParams& q = b.posterior[i];
      const GMMParams& p = b.prior[b.group[i]];
      if (q == p) continue;
      if (ClosedForm(q, p)) {
        exact[c] += GaussianKl(q.mu[0], q.Variance(0), p.mu[0], p.Variance(0));
        continue;
      }
      for (int s = 0; s < samples; ++s) {
        const double x = Sample(q, rng);
        totals[c][s] += GmmLogPdf(q, x) - GmmLogPdf(p, x);
      }
    }
  });
  double closed = 0;
  std::vector<double> per(samples, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    closed += exact[c];
    for (int s = 0; s < samples; ++s) per[s] += totals[c][s];
  }
  double mean = 0;
  for (double v : per) mean += v;
  mean /= samples;
  double var = 0;
  for (double v : per) var += (v - mean) * (v - mean);
  var = samples > 1 ? var / (samples - 1) : 0.0;
  KlEstimate e;
  e.samples = samples;
  e.seed = seed;
  e.bits = NatsToBits(closed + mean);
  e.stderr_bits = NatsToBits(std::sqrt(var / samples));
  return e;
}

double TwoPartCodelength(double prior_bits_of_h, double nll_bits) {
  return prior_bits_of_h + nll_bits;
}

double VariationalCodelength(double kl_bits, double expected_nll_bits) {
  return kl_bits + expected_nll_bits;
}

double AdaptiveVariationalCodelength(double prior_cost_bits, double kl_bits,
                                     double expected_nll_bits) {
  return prior_cost_bits + kl_bits + expected_nll_bits;
}

nlohmann::json CodelengthReport::ToJson() const {
  nlohmann::json j = {{"prior_cost_bits", prior_cost_bits},
                      {"kl_bits", kl_bits},
                      {"kl_stderr_bits", kl_stderr_bits},
                      {"nll_bits", nll_bits},
                      {"codelength_bits", variational_bits()},
                      {"total_bits", total_bits},
                      {"train_acc", train_acc},
                      {"mc_samples", mc_samples},
                      {"mc_seed", mc_seed}};
  j["ood_acc"] = ood_acc ? nlohmann::json(*ood_acc) : nlohmann::json();
  return j;
}

CodelengthReport MakeReport(double prior_cost_bits, const KlEstimate& kl,
                            double nll_bits, double train_acc,
                            std::optional<double> ood_acc) {
  CodelengthReport r;
  r.prior_cost_bits = prior_cost_bits;
  r.kl_bits = kl.bits;
  r.kl_stderr_bits = kl.stderr_bits;
  r.nll_bits = nll_bits;
  r.total_bits = AdaptiveVariationalCodelength(prior_cost_bits, kl.bits,
                                               nll_bits);
  r.train_acc = train_acc;
  r.ood_acc = ood_acc;
  r.mc_samples = kl.samples;
  r.mc_seed = kl.seed;
  return r;
}

MixturePrior OptimalMixturePrior(
    const std::vector<std::vector<double>>& groups, int max_components,
    double nu) {
  MixturePrior out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::map<double, int> counts;
    for (double v : groups[g]) ++counts[v];
    if (static_cast<int>(counts.size()) > max_components)
      throw ValidationError("group " + std::to_string(g) + " has " +
                            std::to_string(counts.size()) +
                            " distinct values, more than " +
                            std::to_string(max_components) + " components");
    GMMParams p;
    const double n = static_cast<double>(groups[g].size());
    double h = 0;
    for (const auto& [v, c] : counts) {
      const double f = c / n;
      p.mu.push_back(v);
      p.nu.push_back(nu);
      p.w.push_back(std::log(f));
      h -= f * std::log2(f);
    }
    if (counts.empty()) p = GMMParams::Gaussian(0.0, nu);
    out.kl_bits += n * h;
    out.priors.push_back(std::move(p));
  }
  return out;
}

TransformerGrouping GroupTransformer(const transformer::ModelConfig& c) {
  TransformerGrouping t;
  const auto zeros = transformer::TransformerWeights::Zeros(c);
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    const auto& a = zeros.Array(name);
    t.blocks.push_back({name, static_cast<int>(a.rows()),
                        static_cast<int>(a.cols())});
    if (name == "prompt") {
      const int base = static_cast<int>(t.group_names.size());
      for (Eigen::Index col = 0; col < a.cols(); ++col)
        t.group_names.push_back("prompt.col" + std::to_string(col));
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index col = 0; col < a.cols(); ++col)
          t.group.push_back(base + static_cast<int>(col));
    } else {
      const int g = static_cast<int>(t.group_names.size());
      t.group_names.push_back(name);
      t.group.insert(t.group.end(), a.size(), g);
    }
  }
  return t;
}

Eigen::VectorXd Flatten(const transformer::TransformerWeights& w) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(w.NumWeights()));
  Eigen::Index i = 0;
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    const auto& a = w.Array(name);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) flat(i++) = a(r, c);
  }
  return flat;
}

transformer::TransformerWeights Unflatten(const Eigen::VectorXd& flat,
                                          const transformer::ModelConfig& c) {
  auto w = transformer::TransformerWeights::Zeros(c);
  if (static_cast<std::size_t>(flat.size()) != w.NumWeights())
    throw ValidationError("flat weight vector has the wrong length");
  Eigen::Index i = 0;
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    auto& a = w.Array(name);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index col = 0; col < a.cols(); ++col) a(r, col) = flat(i++);
  }
  return w;
}

DistributionBundle DeltaPosteriorBundle(
    const transformer::TransformerWeights& w,
    const transformer::ModelConfig& config, const DeltaBundleOptions& o) {
  const TransformerGrouping grouping = GroupTransformer(config);
  const Eigen::VectorXd flat = Flatten(w);
  DistributionBundle b;
  b.blocks = grouping.blocks;
  b.group = grouping.group;
  b.group_names = grouping.group_names;
  const int ngroups = static_cast<int>(b.group_names.size());
  int col0 = -1;
  for (int g = 0; g < ngroups; ++g)
    if (b.group_names[g] == "prompt.col0") col0 = g;

  // Prompt weights sit after "embed" in the flat order.
  const std::size_t prompt_begin = static_cast<std::size_t>(w.embed.size());
  const auto cols = static_cast<std::size_t>(config.model_dim);
  auto is_tail = [&](std::size_t i) {
    if (!o.tail || b.group[i] != col0) return false;
    const std::size_t row = (i - prompt_begin) / cols;
    return static_cast<int>(row) >= o.tail->program_length;
  };

  std::vector<std::vector<double>> values(ngroups);
  for (std::size_t i = 0; i < b.group.size(); ++i)
    if (!is_tail(i)) values[b.group[i]].push_back(flat(static_cast<Eigen::Index>(i)));
  std::size_t most = 0;
  for (const auto& v : values) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    most = std::max<std::size_t>(
        most, std::unique(s.begin(), s.end()) - s.begin());
  }
  const int k = std::max<int>(o.min_components, static_cast<int>(most));
  b.prior = OptimalMixturePrior(values, k, o.prior_nu).priors;
  if (o.tail && col0 >= 0)
    b.prior[col0] = GMMParams::EqualMix({-1.0, 1.0}, o.prior_nu);

  b.posterior.reserve(b.group.size());
  for (std::size_t i = 0; i < b.group.size(); ++i) {
    if (is_tail(i))
      b.posterior.push_back(b.prior[col0]);
    else
      b.posterior.push_back(
          GMMParams::Gaussian(flat(static_cast<Eigen::Index>(i)), o.posterior_nu));
  }
  return b;
}

double DecodeProbability(double mu, double var) {
  return NormalCdf(mu / std::sqrt(var));
}

double QuadratureKl(double mu, double var, const GMMParams& prior) {
  // Composite Simpson over +-12 sigma.
  const int n = 20000;
  const double sd = std::sqrt(var);
  const double lo = mu - 12 * sd, h = 24 * sd / n;
  double s = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double lq = GaussianLogPdf(x, mu, var);
    const double f = std::exp(lq) * (lq - GmmLogPdf(prior, x));
    s += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
  }
  return s * h / 3.0;
}

double UnimodalFrontierBits(double p) {
  // Solve Phi(t) = p by bisection; the optimum is sigma^2 = 1 / (1 + t^2).
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (NormalCdf(mid) < p ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  return NatsToBits(0.5 * std::log1p(t * t));
}

std::vector<FrontierPoint> FrontierSweep(bool multimodal,
                                         const FrontierGrid& g) {
  const GMMParams prior = GMMParams::EqualMix({-1.0, 1.0}, g.prior_nu);
  std::vector<FrontierPoint> pts(static_cast<std::size_t>(g.mu_steps) *
                                 g.var_steps);
  ParallelFor(pts.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / g.var_steps;
    const int j = static_cast<int>(idx) % g.var_steps;
    const double mu =
        g.mu_min + (g.mu_steps > 1 ? (g.mu_max - g.mu_min) * i / (g.mu_steps - 1)
                                   : 0.0);
    const double lv =
        g.log10_var_min +
        (g.var_steps > 1
             ? (g.log10_var_max - g.log10_var_min) * j / (g.var_steps - 1)
             : 0.0);
    const double var = std::pow(10.0, lv);
    FrontierPoint p{mu, var, DecodeProbability(mu, var), 0.0};
    p.kl_bits = NatsToBits(multimodal ? QuadratureKl(mu, var, prior)
                                      : StandardNormalKl(mu, var));
    pts[idx] = p;
  });
  return pts;
}

std::vector<FrontierPoint> FrontierEnvelope(std::vector<FrontierPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.probability > b.probability ||
           (a.probability == b.probability && a.kl_bits < b.kl_bits);
  });
  std::vector<FrontierPoint> env;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.kl_bits < best) {
      best = p.kl_bits;
      env.push_back(p);
    }
  }
  std::reverse(env.begin(), env.end());
  return env;
}

}  // namespace mdlxf::codes
