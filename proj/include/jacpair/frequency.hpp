#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace jacpair {

/// Trial counts per class key.  Counts always sum to total_trials; draws that
/// were rejected before becoming trials (disconnected graphs) are tracked in
/// `discarded`.  Merging sums every field, so tables form a commutative monoid.
struct FrequencyTable {
  std::uint64_t total_trials = 0;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t discarded = 0;

  void add(const std::string& key, std::uint64_t n = 1) {
    counts[key] += n;
    total_trials += n;
  }

  [[nodiscard]] std::uint64_t count(const std::string& key) const {
    auto it = counts.find(key);
    return it == counts.end() ? 0 : it->second;
  }

  [[nodiscard]] double proportion(const std::string& key) const {
    return total_trials ? static_cast<double>(count(key)) / static_cast<double>(total_trials) : 0.0;
  }

  void merge(const FrequencyTable& other) {
    total_trials += other.total_trials;
    discarded += other.discarded;
    for (const auto& [k, v] : other.counts) counts[k] += v;
  }

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

inline constexpr std::uint64_t kTrialChunk = 512;

/// Runs trials [0, trials) in fixed chunks of kTrialChunk on `threads`
/// workers.  `run_chunk(begin, end)` must depend only on its trial indices;
/// partial results are merged in chunk order.
template <class Result>
Result run_chunked(std::uint64_t trials, unsigned threads,
                   const std::function<Result(std::uint64_t, std::uint64_t)>& run_chunk,
                   const std::function<void(Result&, const Result&)>& merge) {
  const std::uint64_t chunks = (trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<Result> partial(chunks);
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    try {
      for (std::uint64_t c = next++; c < chunks; c = next++) {
        const std::uint64_t b = c * kTrialChunk;
        partial[c] = run_chunk(b, std::min(trials, b + kTrialChunk));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
      next = chunks;
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || chunks <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < std::min<std::uint64_t>(threads, chunks); ++t) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
  Result out{};
  for (const auto& r : partial) merge(out, r);
  return out;
}

}  // namespace jacpair
