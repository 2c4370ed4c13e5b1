#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dsgp4kit/sgp4.hpp"

namespace dsgp4kit {

/// Worker count from DSGP4KIT_WORKERS, else the hardware concurrency, else 1.
int default_workers();

/// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end) on
/// each, the first chunk on the calling thread. Chunk bounds depend only on n
/// and workers. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(w - 1);
  for (std::size_t c = 1; c < w; ++c) {
    threads.emplace_back([&fn, c, n, w] { fn(c * n / w, (c + 1) * n / w); });
  }
  fn(std::size_t{0}, n / w);
  for (auto& t : threads) t.join();
}

enum class BatchLayout { PerModel, SharedGrid };

struct BatchJob {
  std::vector<Model> models;
  BatchLayout layout = BatchLayout::SharedGrid;
  std::vector<double> grid;                          ///< SharedGrid
  std::vector<std::vector<double>> per_model_times;  ///< PerModel

  static BatchJob shared_grid(std::vector<Model> models, std::vector<double> grid);
  static BatchJob per_model(std::vector<Model> models, std::vector<std::vector<double>> times);

  /// Throws InvalidArgument on an empty job or mismatched per-model lists.
  void validate() const;
  [[nodiscard]] std::size_t row_length(std::size_t model) const;
  [[nodiscard]] double time_at(std::size_t model, std::size_t k) const;
  [[nodiscard]] std::size_t total_items() const;
};

struct BatchCell {
  std::optional<StateTeme> state;
  ErrorCode error = ErrorCode::Ok;
  [[nodiscard]] bool ok() const { return error == ErrorCode::Ok; }
};

/// Row-major [model][time]; rows may differ in length in PerModel layout.
struct BatchResult {
  std::vector<BatchCell> cells;
  std::vector<std::size_t> row_offsets;  ///< size models + 1
  std::size_t error_count = 0;

  [[nodiscard]] const BatchCell& at(std::size_t model, std::size_t k) const { return cells[row_offsets[model] + k]; }
  [[nodiscard]] std::size_t models() const { return row_offsets.empty() ? 0 : row_offsets.size() - 1; }
};

BatchResult run_sequential(const BatchJob& job);
BatchResult run_batch(const BatchJob& job, int workers);

/// Plain loop over one propagate call per item, for comparison.
void naive_loop(const std::vector<Model>& models, std::span<const double> times, std::vector<StateTeme>& out);

struct BenchRow {
  std::size_t size = 0;
  double median_ms = 0.0;
  double per_item_us = 0.0;
};

/// Times run_batch on `size` single-time items cycled from `pool`, median of
/// `reps` (at least 5) repetitions.
std::vector<BenchRow> bench(const std::vector<Model>& pool, std::span<const std::size_t> sizes, int workers, int reps = 5);
std::string bench_csv(std::span<const BenchRow> rows);

}  // namespace dsgp4kit
