#include "gremlab/disorder.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gremlab/rng.hpp"

namespace gremlab {

namespace {

constexpr std::uint64_t kDrawSalt = 0x6a09e667f3bcc909ull;

// Per-subset enumeration state: the key set that selects the draws, the
// current composite spin index, and the cached length-N symbol row.
struct SubsetState {
  std::uint32_t subset_mask = 0;
  std::uint32_t keyset_mask = 0;
  std::vector<int> keyset_species;  // increasing
  std::int64_t coord_stride = 1;    // q^(canonical coordinate)
  const Eigen::ArrayXd* law = nullptr;
  std::uint64_t prefix = 0;  // mix of (seed, subset), fixed per run
  std::vector<int> row;
};

int inverse_cdf(const Eigen::ArrayXd& law, double u) {
  double c = 0.0;
  for (int s = 0; s + 1 < law.size(); ++s) {
    c += law[s];
    if (u < c) return s;
  }
  return static_cast<int>(law.size()) - 1;
}

// Odometer over configurations with species 1 in the least significant
// digit. Rows are redrawn only for subsets whose key set touches a digit
// that moved, and the per-sample flat interaction indices are updated by
// the symbol deltas.
class Enumerator {
 public:
  Enumerator(const ModelSpec& spec, const Chain* chain, int N, std::uint64_t seed)
      : N_(N), n_(spec.n), shift_(N / spec.n) {
    B_ = std::uint64_t{1} << shift_;
    alpha_.assign(n_, 0);
    index_.assign(N_, 0);
    std::int64_t stride = 1;
    for (SubsetId j : all_subsets(spec.n)) {
      SubsetState st;
      st.subset_mask = j.mask;
      st.keyset_mask = chain ? chain->A[chain->level_of[coord_of(j)] - 1].mask : j.mask;
      st.keyset_species = species_of(SubsetId{st.keyset_mask});
      st.coord_stride = stride;
      st.law = &spec.mu[coord_of(j)];
      st.prefix = mix64(mix64(seed ^ kDrawSalt) ^ j.mask);
      st.row.assign(N_, 0);
      subs_.push_back(std::move(st));
      stride *= spec.alphabet_size;
    }
  }

  void seek(std::int64_t config) {
    for (int t = 0; t < n_; ++t) {
      alpha_[t] = (static_cast<std::uint64_t>(config) >> (t * shift_)) & (B_ - 1);
    }
    std::fill(index_.begin(), index_.end(), 0);
    for (SubsetState& st : subs_) {
      std::uint64_t row_key = mix64(st.prefix ^ composite(st));
      for (int i = 0; i < N_; ++i) {
        int sym = inverse_cdf(*st.law, unit_double(mix64(row_key ^ static_cast<std::uint64_t>(i))));
        st.row[i] = sym;
        index_[i] += st.coord_stride * sym;
      }
    }
  }

  void advance() {
    std::uint32_t changed = 0;
    for (int t = 0; t < n_; ++t) {
      changed |= 1u << t;
      if (++alpha_[t] < B_) break;
      alpha_[t] = 0;
    }
    for (SubsetState& st : subs_) {
      if ((st.keyset_mask & changed) == 0) continue;
      std::uint64_t row_key = mix64(st.prefix ^ composite(st));
      for (int i = 0; i < N_; ++i) {
        int sym = inverse_cdf(*st.law, unit_double(mix64(row_key ^ static_cast<std::uint64_t>(i))));
        index_[i] += st.coord_stride * (sym - st.row[i]);
        st.row[i] = sym;
      }
    }
  }

  double energy(const Eigen::ArrayXd& phi) const {
    double h = 0.0;
    for (int i = 0; i < N_; ++i) h += phi[index_[i]];
    return h;
  }

  const std::vector<std::int64_t>& indices() const { return index_; }

 private:
  std::uint64_t composite(const SubsetState& st) const {
    std::uint64_t c = 0;
    int t = 0;
    for (int s : st.keyset_species) c |= alpha_[s - 1] << (shift_ * t++);
    return c;
  }

  int N_, n_, shift_;
  std::uint64_t B_;
  std::vector<std::uint64_t> alpha_;
  std::vector<SubsetState> subs_;
  std::vector<std::int64_t> index_;
};

struct BlockRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

std::vector<BlockRange> fixed_blocks(std::int64_t total) {
  std::int64_t count = std::min<std::int64_t>(256, total);
  std::vector<BlockRange> blocks(count);
  std::int64_t base = total / count, rem = total % count;
  std::int64_t at = 0;
  for (std::int64_t b = 0; b < count; ++b) {
    blocks[b].begin = at;
    at += base + (b < rem ? 1 : 0);
    blocks[b].end = at;
  }
  return blocks;
}

template <typename PerBlock>
void run_blocks(const std::vector<BlockRange>& blocks, int threads, PerBlock&& body) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks.size(); ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t b = next.fetch_add(1); b < blocks.size(); b = next.fetch_add(1)) body(b);
    });
  }
  for (std::thread& t : pool) t.join();
}

SimResult run_free_energy(const ModelSpec& spec, const Chain* chain, int N, std::uint64_t seed,
                          int threads) {
  check_sim_budget(spec, N);
  auto t0 = std::chrono::steady_clock::now();
  Eigen::ArrayXd phi = phi_table(spec);
  std::int64_t total = std::int64_t{1} << N;
  std::vector<BlockRange> blocks = fixed_blocks(total);
  std::vector<double> hmax(blocks.size()), sumexp(blocks.size());

  run_blocks(blocks, threads, [&](std::size_t b) {
    Enumerator walk(spec, chain, N, seed);
    walk.seek(blocks[b].begin);
    std::vector<double> h;
    h.reserve(blocks[b].end - blocks[b].begin);
    for (std::int64_t c = blocks[b].begin; c < blocks[b].end; ++c) {
      h.push_back(walk.energy(phi));
      if (c + 1 < blocks[b].end) walk.advance();
    }
    double m = *std::max_element(h.begin(), h.end());
    double s = 0.0;
    for (double v : h) s += std::exp(v - m);
    hmax[b] = m;
    sumexp[b] = s;
  });

  // Ordered merge; the 2^-N prefactor scales each block exactly, so the
  // zero interaction gives log 1 = 0 with no rounding.
  double m = *std::max_element(hmax.begin(), hmax.end());
  double z = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    z += std::ldexp(sumexp[b] * std::exp(hmax[b] - m), -N);
  }
  SimResult result;
  result.N = N;
  result.seed = seed;
  if (chain) result.chain = chain_label(*chain);
  result.f = (m + std::log(z)) / N;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

int draw_symbol(const DisorderKey& key, const Eigen::ArrayXd& mu_j) {
  std::uint64_t h = mix64(key.seed ^ kDrawSalt);
  h = mix64(h ^ key.subset_mask);
  h = mix64(h ^ key.alpha);
  h = mix64(h ^ key.i);
  return inverse_cdf(mu_j, unit_double(h));
}

void check_sim_budget(const ModelSpec& spec, int N) {
  if (N < 1) throw std::invalid_argument("N must be positive");
  if (N % spec.n != 0) throw std::invalid_argument("n must divide N");
  if (N > 30) throw std::invalid_argument("enumeration beyond 2^30 configurations is unsupported");
  const char* env = std::getenv("GREMLAB_BUDGET");
  if (env && *env) {
    char* end = nullptr;
    unsigned long long cap = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw std::invalid_argument("GREMLAB_BUDGET must be a nonnegative integer");
    }
    std::uint64_t work = static_cast<std::uint64_t>(N) << N;
    if (work > cap) throw std::invalid_argument("N 2^N exceeds GREMLAB_BUDGET");
    return;
  }
  static constexpr int kDefaultCap[5] = {0, 24, 24, 18, 12};
  if (N > kDefaultCap[spec.n]) {
    throw std::invalid_argument("N exceeds the default enumeration budget for n=" +
                                std::to_string(spec.n) + " (set GREMLAB_BUDGET to override)");
  }
}

SimResult free_energy_exact(const ModelSpec& spec, int N, std::uint64_t seed, int threads) {
  return run_free_energy(spec, nullptr, N, seed, threads);
}

SimResult free_energy_chain(const ModelSpec& spec, const Chain& chain, int N, std::uint64_t seed,
                            int threads) {
  return run_free_energy(spec, &chain, N, seed, threads);
}

std::int64_t count_in_ball(const ModelSpec& spec, int N, std::uint64_t seed,
                           const JointMeasure& center, double radius, int threads) {
  check_sim_budget(spec, N);
  if (center.weights.size() != spec.config_count()) {
    throw std::invalid_argument("ball center has the wrong tensor size");
  }
  std::int64_t total = std::int64_t{1} << N;
  std::vector<BlockRange> blocks = fixed_blocks(total);
  std::vector<std::int64_t> counts(blocks.size(), 0);

  run_blocks(blocks, threads, [&](std::size_t b) {
    Enumerator walk(spec, nullptr, N, seed);
    walk.seek(blocks[b].begin);
    std::vector<std::int64_t> touched;
    std::int64_t local = 0;
    for (std::int64_t c = blocks[b].begin; c < blocks[b].end; ++c) {
      touched = walk.indices();
      std::sort(touched.begin(), touched.end());
      // TV against the center: bins the empirical measure never touches
      // contribute their center mass, which sums to 1 minus the touched mass.
      double acc = 1.0;
      for (std::size_t a = 0; a < touched.size();) {
        std::size_t e = a;
        while (e < touched.size() && touched[e] == touched[a]) ++e;
        double emp = static_cast<double>(e - a) / N;
        double ctr = center.weights[touched[a]];
        acc += std::abs(emp - ctr) - ctr;
        a = e;
      }
      if (0.5 * acc < radius) ++local;
      if (c + 1 < blocks[b].end) walk.advance();
    }
    counts[b] = local;
  });

  std::int64_t count = 0;
  for (std::int64_t c : counts) count += c;
  return count;
}

}  // namespace gremlab
