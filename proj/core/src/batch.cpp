#include "dsgp4kit/batch.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

namespace dsgp4kit {

int default_workers() {
  if (const char* env = std::getenv("DSGP4KIT_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

BatchJob BatchJob::shared_grid(std::vector<Model> models, std::vector<double> grid) {
  BatchJob j;
  j.models = std::move(models);
  j.layout = BatchLayout::SharedGrid;
  j.grid = std::move(grid);
  j.validate();
  return j;
}

BatchJob BatchJob::per_model(std::vector<Model> models, std::vector<std::vector<double>> times) {
  BatchJob j;
  j.models = std::move(models);
  j.layout = BatchLayout::PerModel;
  j.per_model_times = std::move(times);
  j.validate();
  return j;
}

void BatchJob::validate() const {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "batch job has no models");
  if (layout == BatchLayout::SharedGrid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "batch job has an empty time grid");
  } else if (per_model_times.size() != models.size()) {
    throw Error(ErrorCode::InvalidArgument, "per-model time lists do not match the model count");
  }
}

std::size_t BatchJob::row_length(std::size_t model) const {
  return layout == BatchLayout::SharedGrid ? grid.size() : per_model_times[model].size();
}

double BatchJob::time_at(std::size_t model, std::size_t k) const {
  return layout == BatchLayout::SharedGrid ? grid[k] : per_model_times[model][k];
}

std::size_t BatchJob::total_items() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < models.size(); ++i) n += row_length(i);
  return n;
}

namespace {

BatchResult allocate(const BatchJob& job) {
  job.validate();
  BatchResult r;
  r.row_offsets.resize(job.models.size() + 1, 0);
  for (std::size_t i = 0; i < job.models.size(); ++i) r.row_offsets[i + 1] = r.row_offsets[i] + job.row_length(i);
  r.cells.resize(r.row_offsets.back());
  return r;
}

void fill_cell(const Model& m, double t, BatchCell& cell) {
  try {
    cell.state = propagate(m, t);
    cell.error = ErrorCode::Ok;
  } catch (const Error& e) {
    cell.state.reset();
    cell.error = e.code();
  }
}

void count_errors(BatchResult& r) {
  r.error_count = 0;
  for (const auto& c : r.cells) r.error_count += c.ok() ? 0 : 1;
}

}  // namespace

BatchResult run_sequential(const BatchJob& job) {
  BatchResult r = allocate(job);
  for (std::size_t i = 0; i < job.models.size(); ++i) {
    for (std::size_t k = 0; k < job.row_length(i); ++k) fill_cell(job.models[i], job.time_at(i, k), r.cells[r.row_offsets[i] + k]);
  }
  count_errors(r);
  return r;
}

BatchResult run_batch(const BatchJob& job, int workers) {
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be at least 1");
  BatchResult r = allocate(job);
  // Flat item index -> (model, k) via the row offsets.
  parallel_for(r.cells.size(), workers, [&](std::size_t begin, std::size_t end) {
    if (begin >= end) return;
    auto it = std::upper_bound(r.row_offsets.begin(), r.row_offsets.end(), begin);
    std::size_t model = static_cast<std::size_t>(it - r.row_offsets.begin()) - 1;
    for (std::size_t idx = begin; idx < end; ++idx) {
      while (idx >= r.row_offsets[model + 1]) ++model;
      fill_cell(job.models[model], job.time_at(model, idx - r.row_offsets[model]), r.cells[idx]);
    }
  });
  count_errors(r);
  return r;
}

void naive_loop(const std::vector<Model>& models, std::span<const double> times, std::vector<StateTeme>& out) {
  out.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) out[i] = propagate(models[i], times[i]);
}

std::vector<BenchRow> bench(const std::vector<Model>& pool, std::span<const std::size_t> sizes, int workers, int reps) {
  if (pool.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs at least one model");
  reps = std::max(reps, 5);
  std::vector<BenchRow> rows;
  for (std::size_t n : sizes) {
    std::vector<Model> models(n);
    std::vector<std::vector<double>> times(n);
    for (std::size_t i = 0; i < n; ++i) {
      models[i] = pool[i % pool.size()];
      times[i] = {static_cast<double>(i % 4321)};
    }
    const BatchJob job = BatchJob::per_model(std::move(models), std::move(times));
    std::vector<double> ms;
    for (int r = 0; r < reps; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const BatchResult res = run_batch(job, workers);
      const auto t1 = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    const double med = ms.size() % 2 == 1 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
    rows.push_back({n, med, n == 0 ? 0.0 : med * 1000.0 / static_cast<double>(n)});
  }
  return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = "size,median_ms,per_item_us\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", r.size, r.median_ms, r.per_item_us);
    out += buf;
  }
  return out;
}

}  // namespace dsgp4kit
