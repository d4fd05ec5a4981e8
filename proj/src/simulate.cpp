#include "supdtl/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "supdtl/characteristics.hpp"
#include "supdtl/error.hpp"

namespace supdtl {

namespace {

constexpr std::int64_t kBlockSize = 4096;

struct Tally {
  std::int64_t recommended = 0;
  std::int64_t rejected = 0;
  std::int64_t crossed = 0;
  std::int64_t early = 0;
  double patients = 0.0;
  double patients_sq = 0.0;
  std::vector<std::int64_t> stops;
};

void run_block(const TrialDesign& design, const EffectConfig& effects, std::uint64_t seed,
               std::int64_t block, std::int64_t count, int focal, Tally& t) {
  const auto b = static_cast<std::uint64_t>(block);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::mt19937_64 rng(seq);
  t.stops.assign(design.stages, 0);
  for (std::int64_t r = 0; r < count; ++r) {
    ZPath z = simulate_z_path(design, effects, rng);
    TrialOutcome o = resolve_trial(design, z);
    if (o.recommended_arm == focal) ++t.recommended;
    if (std::find(o.rejected_arms.begin(), o.rejected_arms.end(), focal) != o.rejected_arms.end())
      ++t.rejected;
    const auto& zf = z[focal - 1];
    for (int j = 0; j < design.stages; ++j)
      if (zf[j] > design.boundaries[j]) {
        ++t.crossed;
        break;
      }
    if (o.early_stop) ++t.early;
    ++t.stops[o.stop_stage - 1];
    const double n = static_cast<double>(o.total_patients);
    t.patients += n;
    t.patients_sq += n * n;
  }
}

Estimate proportion(std::int64_t hits, std::int64_t reps) {
  const double p = static_cast<double>(hits) / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps))};
}

}  // namespace

ZPath z_path_from_increments(const TrialDesign& design, const EffectConfig& effects,
                             const std::vector<double>& increments) {
  const int K = design.arms, J = design.stages;
  if (static_cast<int>(increments.size()) != (K + 1) * J)
    throw InputError("expected (arms + 1) * stages increments");
  if (static_cast<int>(effects.deltas.size()) != K)
    throw InputError("effect configuration does not match arms");
  auto cumulative = [&](int arm) {
    std::vector<double> w(J);
    double s = 0.0;
    for (int j = 0; j < J; ++j) w[j] = (s += increments[static_cast<std::size_t>(arm) * J + j]);
    return w;
  };
  const auto w0 = cumulative(0);
  const double scale = design.sigma * std::sqrt(2.0);
  ZPath z(K, std::vector<double>(J));
  for (int k = 1; k <= K; ++k) {
    const auto wk = cumulative(k);
    for (int j = 1; j <= J; ++j) {
      const double nj = static_cast<double>(j) * design.n_per_stage;
      z[k - 1][j - 1] = effects.deltas[k - 1] * std::sqrt(nj) / scale +
                        (wk[j - 1] - w0[j - 1]) / std::sqrt(2.0 * j);
    }
  }
  return z;
}

TrialOutcome resolve_trial(const TrialDesign& design, const ZPath& z) {
  const int J = design.stages;
  std::vector<int> active(design.arms);
  for (int k = 1; k <= design.arms; ++k) active[k - 1] = k;

  TrialOutcome out;
  for (int j = 1; j <= J; ++j) {
    const double u = design.boundaries[j - 1];
    auto zj = [&](int arm) { return z[arm - 1][j - 1]; };
    if (j == J) {
      const int last = active.front();
      out.stop_stage = J;
      if (zj(last) > u) {
        out.rejected_arms.push_back(last);
        out.recommended_arm = last;
      }
      break;
    }
    int loser = active.front();
    for (int k : active)
      if (zj(k) < zj(loser)) loser = k;
    const std::vector<int> recruiting = active;
    active.erase(std::find(active.begin(), active.end(), loser));
    out.drop_order.push_back(loser);
    const bool all_cross = std::all_of(active.begin(), active.end(), [&](int k) { return zj(k) > u; });
    if (!all_cross) continue;
    out.stop_stage = j;
    out.early_stop = true;
    for (int k : recruiting)
      if (zj(k) > u) out.rejected_arms.push_back(k);
    int best = active.front();
    for (int k : active)
      if (zj(k) > zj(best)) best = k;
    out.recommended_arm = best;
    break;
  }
  out.total_patients = patients_at_stop(design, out.stop_stage);
  return out;
}

SimulationResult estimate_characteristics(const TrialDesign& design, const EffectConfig& effects,
                                          std::int64_t replicates, std::uint64_t seed,
                                          const SimulationOptions& opts) {
  design.validate();
  if (replicates < 2) throw InputError("need at least two replicates");
  if (static_cast<int>(effects.deltas.size()) != design.arms)
    throw InputError("effect configuration does not match arms");
  if (opts.focal_arm < 1 || opts.focal_arm > design.arms) throw InputError("focal arm out of range");

  const std::int64_t blocks = (replicates + kBlockSize - 1) / kBlockSize;
  std::vector<Tally> tallies(static_cast<std::size_t>(blocks));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t b; (b = next.fetch_add(1)) < blocks;) {
      const std::int64_t count = std::min(kBlockSize, replicates - b * kBlockSize);
      run_block(design, effects, seed, b, count, opts.focal_arm, tallies[b]);
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Tally sum;
  sum.stops.assign(design.stages, 0);
  for (const auto& t : tallies) {
    sum.recommended += t.recommended;
    sum.rejected += t.rejected;
    sum.crossed += t.crossed;
    sum.early += t.early;
    sum.patients += t.patients;
    sum.patients_sq += t.patients_sq;
    for (int j = 0; j < design.stages; ++j) sum.stops[j] += t.stops[j];
  }

  SimulationResult res;
  res.replicates = replicates;
  res.seed = seed;
  res.focal_arm = opts.focal_arm;
  res.stop_histogram = sum.stops;
  auto& e = res.estimates;
  e["power"] = proportion(sum.recommended, replicates);
  e["type_i_error"] = proportion(sum.rejected, replicates);
  e["pwer"] = proportion(sum.crossed, replicates);
  e["early_stop"] = proportion(sum.early, replicates);
  for (int j = 1; j <= design.stages; ++j)
    e["stop_stage_" + std::to_string(j)] = proportion(sum.stops[j - 1], replicates);
  const double r = static_cast<double>(replicates);
  const double mean = sum.patients / r;
  const double var = std::max(0.0, (sum.patients_sq - r * mean * mean) / (r - 1.0));
  e["ess"] = {mean, std::sqrt(var / r)};
  return res;
}

}  // namespace supdtl
