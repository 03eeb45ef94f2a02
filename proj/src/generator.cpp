#include <algorithm>
#include <numeric>
#include <random>

#include "bdca/network.hpp"

namespace bdca {

namespace {

struct Column {
  std::vector<std::pair<int, int>> reactants;  // (species, stoichiometry)
  std::vector<std::pair<int, int>> products;
};

// Splits `total` into `parts` integers in [1, cap], uniformly placing the
// surplus above 1.
std::vector<int> compose(int total, int parts, int cap, std::mt19937_64& rng) {
  std::vector<int> out(parts, 1);
  int surplus = total - parts;
  while (surplus > 0) {
    std::vector<int> open;
    for (int i = 0; i < parts; ++i)
      if (out[i] < cap) open.push_back(i);
    out[open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)]]++;
    --surplus;
  }
  return out;
}

// Takes up to `count` species from `pool` (front first), then fills with
// random species not already in `used`.
std::vector<int> pick(std::vector<int>& pool, int count, std::vector<char>& used, int m,
                      std::mt19937_64& rng) {
  std::vector<int> out;
  for (auto it = pool.begin(); it != pool.end() && static_cast<int>(out.size()) < count;) {
    if (!used[*it]) {
      used[*it] = 1;
      out.push_back(*it);
      it = pool.erase(it);
    } else {
      ++it;
    }
  }
  std::uniform_int_distribution<int> species(0, m - 1);
  while (static_cast<int>(out.size()) < count) {
    const int s = species(rng);
    if (used[s]) continue;
    used[s] = 1;
    out.push_back(s);
    pool.erase(std::remove(pool.begin(), pool.end(), s), pool.end());
  }
  return out;
}

std::optional<ReactionNetwork> attempt(int m, int n, std::mt19937_64& rng, const GeneratorConfig& cfg) {
  std::vector<int> need_f(m), need_r(m);
  std::iota(need_f.begin(), need_f.end(), 0);
  std::iota(need_r.begin(), need_r.end(), 0);
  std::shuffle(need_f.begin(), need_f.end(), rng);
  std::shuffle(need_r.begin(), need_r.end(), rng);

  const int kmax = std::min(cfg.max_species_per_reaction, m);
  const int kmin = std::min(cfg.min_species_per_reaction, kmax);
  std::vector<Column> columns(n);
  for (int j = 0; j < n; ++j) {
    const int remaining = n - j;
    const int backlog = static_cast<int>(std::max(need_f.size(), need_r.size()));
    int k = std::uniform_int_distribution<int>(kmin, kmax)(rng);
    // Each reaction covers at most kmax/2 uncovered species per side.
    if (backlog > (remaining - 1) * (kmax / 2)) k = kmax;

    int a;
    if (need_f.size() > need_r.size() + 1) a = k - 1;
    else if (need_r.size() > need_f.size() + 1) a = 1;
    else a = std::uniform_int_distribution<int>(1, k - 1)(rng);
    if (backlog > (remaining - 1) * (kmax / 2)) a = k / 2;
    const int b = k - a;

    std::vector<char> used(m, 0);
    const std::vector<int> reactants = pick(need_f, a, used, m, rng);
    const std::vector<int> products = pick(need_r, b, used, m, rng);

    // Equal column sums of F and R conserve mass for l = 1.
    int total = 0;
    std::vector<int> left;
    for (int tries = 0;; ++tries) {
      left.clear();
      total = 0;
      for (int i = 0; i < a; ++i) {
        left.push_back(std::uniform_int_distribution<int>(1, cfg.max_stoich)(rng));
        total += left.back();
      }
      if (total >= b && total <= b * cfg.max_stoich) break;
      if (tries > 50) return std::nullopt;
    }
    const std::vector<int> right = compose(total, b, cfg.max_stoich, rng);
    for (int i = 0; i < a; ++i) columns[j].reactants.emplace_back(reactants[i], left[i]);
    for (int i = 0; i < b; ++i) columns[j].products.emplace_back(products[i], right[i]);
  }
  if (!need_f.empty() || !need_r.empty()) return std::nullopt;

  ReactionNetwork net;
  net.m = m;
  net.n = n;
  for (int j = 0; j < n; ++j) {
    for (auto [s, v] : columns[j].reactants) net.forward.push_back({s, j, v});
    for (auto [s, v] : columns[j].products) net.reverse.push_back({s, j, v});
  }
  auto order = [](const StoichEntry& x, const StoichEntry& y) {
    return std::tie(x.reaction, x.species) < std::tie(y.reaction, y.species);
  };
  std::sort(net.forward.begin(), net.forward.end(), order);
  std::sort(net.reverse.begin(), net.reverse.end(), order);
  return net;
}

}  // namespace

ReactionNetwork generate_network(int m, int n, std::uint64_t seed, const GeneratorConfig& cfg) {
  if (m < 2) throw std::invalid_argument("generate_network: need m >= 2");
  if (2 * n < m) throw std::invalid_argument("generate_network: need n >= m/2");
  if (cfg.min_species_per_reaction < 2 || cfg.max_species_per_reaction < cfg.min_species_per_reaction ||
      cfg.max_stoich < 1)
    throw std::invalid_argument("generate_network: invalid generator configuration");

  std::mt19937_64 rng(seed);
  for (int attempt_no = 0; attempt_no < cfg.max_attempts; ++attempt_no) {
    std::optional<ReactionNetwork> net = attempt(m, n, rng, cfg);
    if (!net) continue;
    std::uniform_real_distribution<double> wdist(-cfg.w_bound, cfg.w_bound);
    net->w.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) net->w[i] = wdist(rng);
    net->name = "synthetic_m" + std::to_string(m) + "_n" + std::to_string(n) + "_s" + std::to_string(seed);
    return *net;
  }
  throw GenerationError("generate_network: no valid network after " + std::to_string(cfg.max_attempts) +
                        " attempts (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")");
}

}  // namespace bdca
