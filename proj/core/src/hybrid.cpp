#include "dsgp4kit/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "dsgp4kit/batch.hpp"
#include "dsgp4kit/orbit_determination.hpp"

namespace dsgp4kit {

namespace {

constexpr std::array<double, 6> kStateScale = {kPositionScaleKm,  kPositionScaleKm,  kPositionScaleKm,
                                               kVelocityScaleKms, kVelocityScaleKms, kVelocityScaleKms};
constexpr double kMaxEccentricity = 0.999;
// Fixed accumulation granularity; results do not depend on the worker count.
constexpr std::size_t kChunk = 16;

std::array<double, 9> element_array(const ElementSet& el) {
  std::array<double, 9> a{};
  for (int p = 0; p < 9; ++p) a[static_cast<std::size_t>(p)] = element_value(el, static_cast<Param>(p));
  return a;
}

std::array<double, kInputFeatures> input_features(const HybridModel& m, const ElementSet& x0, double t) {
  std::array<double, kInputFeatures> f{};
  const auto x = element_array(x0);
  for (std::size_t k = 0; k < 9; ++k) f[k] = (x[k] - m.norm.mean[k]) / m.norm.scale[k];
  f[9] = t / m.norm.time_scale_min;
  return f;
}

template <typename T>
bool clamp_eccentricity(T& e) {
  if (e < 0.0) {
    e = T(0.0);
    return true;
  }
  if (e > kMaxEccentricity) {
    e = T(kMaxEccentricity);
    return true;
  }
  return false;
}

template <typename T>
std::array<T, 6> forward_state(const HybridModel& m, const ElementSet& x0, double t, bool* clamped) {
  BasicElements<T> u;
  u.epoch = x0.epoch;
  const auto x = element_array(x0);
  for (int p = 0; p < 9; ++p) element_ref(u, static_cast<Param>(p)) = T(x[static_cast<std::size_t>(p)]);
  if (m.config.use_input_net) {
    const auto f = input_features(m, x0, t);
    std::array<T, kInputFeatures> ft{};
    for (std::size_t k = 0; k < ft.size(); ++k) ft[k] = T(f[k]);
    const std::vector<T> o = m.input_net.forward<T>(std::span<const T>(ft));
    for (int p = 0; p < 9; ++p) {
      T& ref = element_ref(u, static_cast<Param>(p));
      ref = ref + T(m.config.input_correction_scale[static_cast<std::size_t>(p)]) * o[static_cast<std::size_t>(p)];
    }
  }
  const bool c = clamp_eccentricity(u.ecco);
  if (clamped != nullptr) *clamped = c;
  DragTuning<T> tune{T(m.sgp4.bstar_offset), T(m.sgp4.c1_scale)};
  const BasicState<T> s = propagate(initialize(u, m.gc, m.config.learn_sgp4 ? &tune : nullptr), t);
  std::array<T, 6> out = {s.position_km[0],  s.position_km[1],  s.position_km[2],
                          s.velocity_kms[0], s.velocity_kms[1], s.velocity_kms[2]};
  if (m.config.use_output_net) {
    std::array<T, kOutputFeatures> z{};
    for (std::size_t c6 = 0; c6 < 6; ++c6) z[c6] = out[c6] / kStateScale[c6];
    z[6] = T(t / m.norm.time_scale_min);
    const std::vector<T> o = m.output_net.forward<T>(std::span<const T>(z));
    for (std::size_t c6 = 0; c6 < 6; ++c6) out[c6] = out[c6] + (T(m.config.output_correction_scale) * o[c6]) * kStateScale[c6];
  }
  return out;
}

struct MetricSums {
  double state = 0.0;
  double pos = 0.0;
  double vel = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;
};

template <typename Predict>
Metrics accumulate_metrics(const SampleSet& data, const std::vector<std::size_t>& idx, int workers, Predict&& predict) {
  const std::size_t nchunks = (idx.size() + kChunk - 1) / kChunk;
  std::vector<MetricSums> sums(nchunks);
  parallel_for(nchunks, workers, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      MetricSums& s = sums[c];
      const std::size_t end = std::min(idx.size(), (c + 1) * kChunk);
      for (std::size_t r = c * kChunk; r < end; ++r) {
        const Sample& row = data.rows[idx[r]];
        std::optional<Vector6> pred;
        try {
          pred = predict(row);
        } catch (const Error&) {
          pred.reset();
        }
        if (!pred) {
          ++s.skipped;
          continue;
        }
        const Vector6 d = *pred - row.target;
        double sq = 0.0;
        for (std::size_t k = 0; k < 6; ++k) {
          const double rk = d[static_cast<Eigen::Index>(k)] / kStateScale[k];
          sq += rk * rk;
        }
        s.state += sq / 6.0;
        s.pos += d.head<3>().squaredNorm();
        s.vel += d.tail<3>().squaredNorm();
        ++s.count;
      }
    }
  });
  MetricSums t;
  for (const auto& s : sums) {
    t.state += s.state;
    t.pos += s.pos;
    t.vel += s.vel;
    t.count += s.count;
    t.skipped += s.skipped;
  }
  Metrics m;
  m.count = t.count;
  m.skipped = t.skipped;
  if (t.count > 0) {
    const double n = static_cast<double>(t.count);
    m.state_mse = t.state / n;
    m.position_rmse_km = std::sqrt(t.pos / n);
    m.velocity_rmse_kms = std::sqrt(t.vel / n);
  }
  return m;
}

Vector6 to_vector(const std::array<double, 6>& a) {
  Vector6 v;
  for (int k = 0; k < 6; ++k) v[k] = a[static_cast<std::size_t>(k)];
  return v;
}

double mean_loss(const HybridModel& m, const SampleSet& data, const std::vector<std::size_t>& idx, int workers) {
  return accumulate_metrics(data, idx, workers, [&](const Sample& row) -> std::optional<Vector6> {
           return to_vector(forward_state<double>(m, data.elements[row.tle], row.tsince_min, nullptr));
         }).state_mse;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "valid") return Split::Valid;
  if (name == "test") return Split::Test;
  throw Error(ErrorCode::InvalidArgument, "unknown split '" + std::string(name) + "'");
}

std::vector<std::size_t> SampleSet::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (tle_split[rows[i].tle] == s) out.push_back(i);
  }
  return out;
}

void SampleSet::check_split_hygiene() const {
  if (tle_split.size() != tles.size()) throw Error(ErrorCode::SplitOverlap, "split table does not cover every TLE");
  std::map<std::pair<int, double>, Split> seen;
  for (std::size_t k = 0; k < tles.size(); ++k) {
    const auto key = std::make_pair(tles[k].norad_id, tles[k].epoch().jd());
    const auto [it, inserted] = seen.emplace(key, tle_split[k]);
    if (!inserted && it->second != tle_split[k]) {
      throw Error(ErrorCode::SplitOverlap, "TLE of satellite " + std::to_string(tles[k].norad_id) + " appears in two splits");
    }
  }
}

FeatureNormalization fit_normalization(const SampleSet& data, Split split) {
  FeatureNormalization n;
  std::set<std::size_t> used;
  for (std::size_t k = 0; k < data.tles.size(); ++k) {
    if (data.tle_split[k] == split) used.insert(k);
  }
  if (used.empty()) return n;
  for (std::size_t p = 0; p < 9; ++p) {
    double mean = 0.0;
    for (std::size_t k : used) mean += element_array(data.elements[k])[p];
    mean /= static_cast<double>(used.size());
    double var = 0.0;
    for (std::size_t k : used) {
      const double d = element_array(data.elements[k])[p] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(used.size()));
    n.mean[p] = mean;
    // Constant features (zero spread) are only centred.
    n.scale[p] = sd > 1e-12 * std::max(1.0, std::fabs(mean)) ? sd : 1.0;
  }
  return n;
}

HybridConfig output_only_config(std::uint64_t seed) {
  HybridConfig c;
  c.use_input_net = false;
  c.use_output_net = true;
  c.learn_sgp4 = false;
  c.input_hidden.clear();
  c.output_hidden = {32, 32, 32, 32};
  c.seed = seed;
  return c;
}

HybridModel HybridModel::create(const HybridConfig& cfg, const FeatureNormalization& norm, const GravityConstants& gc) {
  HybridModel m;
  m.config = cfg;
  m.norm = norm;
  m.gc = gc;
  if (cfg.use_input_net) m.input_net = Mlp(kInputFeatures, cfg.input_hidden, 9, cfg.seed * 2 + 1);
  if (cfg.use_output_net) m.output_net = Mlp(kOutputFeatures, cfg.output_hidden, 6, cfg.seed * 2 + 2);
  return m;
}

std::size_t HybridModel::parameter_count() const {
  return input_net.parameter_count() + (config.learn_sgp4 ? kSgp4Params : 0) + output_net.parameter_count();
}

std::vector<double> HybridModel::flat_parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  p.insert(p.end(), input_net.parameters().begin(), input_net.parameters().end());
  if (config.learn_sgp4) {
    p.push_back(sgp4.bstar_offset);
    p.push_back(sgp4.c1_scale);
  }
  p.insert(p.end(), output_net.parameters().begin(), output_net.parameters().end());
  return p;
}

void HybridModel::set_flat_parameters(std::span<const double> p) {
  if (p.size() != parameter_count()) throw Error(ErrorCode::ShapeMismatch, "parameter vector length mismatch");
  std::size_t off = 0;
  auto in = input_net.parameters();
  std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(in.size()), in.begin());
  off += in.size();
  if (config.learn_sgp4) {
    sgp4.bstar_offset = p[off];
    sgp4.c1_scale = p[off + 1];
    off += kSgp4Params;
  }
  auto out = output_net.parameters();
  std::copy(p.begin() + static_cast<std::ptrdiff_t>(off), p.end(), out.begin());
}

HybridOutput hybrid_forward(const HybridModel& model, const ElementSet& x0, double tsince) {
  HybridOutput out;
  const auto s = forward_state<double>(model, x0, tsince, &out.clamped);
  out.state.tsince_min = tsince;
  for (std::size_t k = 0; k < 3; ++k) {
    out.state.position_km[k] = s[k];
    out.state.velocity_kms[k] = s[k + 3];
  }
  return out;
}

template <typename T>
T sample_loss(const HybridModel& model, const ElementSet& x0, double tsince, const Vector6& target) {
  const auto x = forward_state<T>(model, x0, tsince, nullptr);
  T sum = T(0.0);
  for (std::size_t k = 0; k < 6; ++k) {
    const T r = (x[k] - T(target[static_cast<Eigen::Index>(k)])) / T(kStateScale[k]);
    sum += r * r;
  }
  return sum / T(6.0);
}
template double sample_loss<double>(const HybridModel&, const ElementSet&, double, const Vector6&);
template long double sample_loss<long double>(const HybridModel&, const ElementSet&, double, const Vector6&);

LossGrads loss_and_grads(const HybridModel& m, const SampleSet& data, std::span<const std::size_t> rows, int workers) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty minibatch");
  const std::size_t n_in = m.input_net.parameter_count();
  const std::size_t n_sg = m.config.learn_sgp4 ? kSgp4Params : 0;
  const std::size_t n_out = m.output_net.parameter_count();
  const std::size_t n_all = n_in + n_sg + n_out;
  const int k_in = m.config.use_input_net ? 9 : 0;
  const int k_total = k_in + static_cast<int>(n_sg);

  struct ChunkAcc {
    std::vector<double> grad;
    double loss = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
    std::size_t clamped = 0;
  };
  const std::size_t nchunks = (rows.size() + kChunk - 1) / kChunk;
  std::vector<ChunkAcc> acc(nchunks);

  parallel_for(nchunks, workers, [&](std::size_t cb, std::size_t ce) {
    Mlp::Tape tape_in;
    Mlp::Tape tape_out;
    for (std::size_t c = cb; c < ce; ++c) {
      ChunkAcc& a = acc[c];
      a.grad.assign(n_all, 0.0);
      const std::span<double> g_in(a.grad.data(), n_in);
      const std::span<double> g_sg(a.grad.data() + n_in, n_sg);
      const std::span<double> g_out(a.grad.data() + n_in + n_sg, n_out);
      const std::size_t end = std::min(rows.size(), (c + 1) * kChunk);
      for (std::size_t r = c * kChunk; r < end; ++r) {
        const Sample& row = data.rows[rows[r]];
        const ElementSet& x0 = data.elements[row.tle];
        const double t = row.tsince_min;
        try {
          // Input correction.
          auto u = element_array(x0);
          std::array<double, 9> o1{};
          if (k_in > 0) {
            const auto f = input_features(m, x0, t);
            m.input_net.forward(f, tape_in, o1);
            for (std::size_t p = 0; p < 9; ++p) u[p] = u[p] + m.config.input_correction_scale[p] * o1[p];
          }
          const bool clamped = clamp_eccentricity(u[1]);

          // SGP4, with jets when anything upstream is learned.
          std::array<double, 6> s{};
          Jacobian ds;
          if (k_total > 0) {
            BasicElements<Jet> uj;
            uj.epoch = x0.epoch;
            for (int p = 0; p < 9; ++p) {
              element_ref(uj, static_cast<Param>(p)) = p < k_in ? Jet::seed(u[static_cast<std::size_t>(p)], p, k_total)
                                                                : Jet::lift(u[static_cast<std::size_t>(p)], k_total);
            }
            DragTuning<Jet> tune{Jet::lift(m.sgp4.bstar_offset, k_total), Jet::lift(m.sgp4.c1_scale, k_total)};
            if (n_sg > 0) {
              tune.bstar_offset = Jet::seed(m.sgp4.bstar_offset, k_in, k_total);
              tune.c1_scale = Jet::seed(m.sgp4.c1_scale, k_in + 1, k_total);
            }
            const BasicState<Jet> js = propagate(initialize(uj, m.gc, n_sg > 0 ? &tune : nullptr), t);
            const Vector6 v = state_value(js);
            for (std::size_t k = 0; k < 6; ++k) s[k] = v[static_cast<Eigen::Index>(k)];
            ds = state_partials(js, k_total);
          } else {
            ElementSet ud = x0;
            for (int p = 0; p < 9; ++p) element_ref(ud, static_cast<Param>(p)) = u[static_cast<std::size_t>(p)];
            const StateTeme st = propagate(initialize(ud, m.gc), t);
            s = {st.position_km[0], st.position_km[1], st.position_km[2], st.velocity_kms[0], st.velocity_kms[1], st.velocity_kms[2]};
          }

          // Output correction and residual.
          std::array<double, 6> x = s;
          std::array<double, 6> o2{};
          if (m.config.use_output_net) {
            std::array<double, kOutputFeatures> z{};
            for (std::size_t k = 0; k < 6; ++k) z[k] = s[k] / kStateScale[k];
            z[6] = t / m.norm.time_scale_min;
            m.output_net.forward(z, tape_out, o2);
            for (std::size_t k = 0; k < 6; ++k) x[k] = s[k] + (m.config.output_correction_scale * o2[k]) * kStateScale[k];
          }
          std::array<double, 6> dr{};
          double loss = 0.0;
          for (std::size_t k = 0; k < 6; ++k) {
            const double rk = (x[k] - row.target[static_cast<Eigen::Index>(k)]) / kStateScale[k];
            loss += rk * rk;
            dr[k] = 2.0 * rk / 6.0;
          }
          loss /= 6.0;

          // Backward.
          std::array<double, 6> dsv{};
          for (std::size_t k = 0; k < 6; ++k) dsv[k] = dr[k] / kStateScale[k];
          if (m.config.use_output_net) {
            std::array<double, 6> do2{};
            for (std::size_t k = 0; k < 6; ++k) do2[k] = dr[k] * m.config.output_correction_scale;
            std::array<double, kOutputFeatures> dz{};
            m.output_net.backward(tape_out, do2, g_out, dz);
            for (std::size_t k = 0; k < 6; ++k) dsv[k] += dz[k] / kStateScale[k];
          }
          if (k_total > 0) {
            std::vector<double> gu(static_cast<std::size_t>(k_total), 0.0);
            for (int c2 = 0; c2 < k_total; ++c2) {
              double sum = 0.0;
              for (int k = 0; k < 6; ++k) sum += ds(k, c2) * dsv[static_cast<std::size_t>(k)];
              gu[static_cast<std::size_t>(c2)] = sum;
            }
            if (k_in > 0) {
              std::array<double, 9> do1{};
              for (std::size_t p = 0; p < 9; ++p) do1[p] = gu[p] * m.config.input_correction_scale[p];
              if (clamped) do1[1] = 0.0;
              m.input_net.backward(tape_in, do1, g_in, {});
            }
            for (std::size_t q = 0; q < n_sg; ++q) g_sg[q] += gu[static_cast<std::size_t>(k_in) + q];
          }
          a.loss += loss;
          ++a.used;
          a.clamped += clamped ? 1 : 0;
        } catch (const Error&) {
          ++a.skipped;
        }
      }
    }
  });

  LossGrads out;
  out.grad.assign(n_all, 0.0);
  for (const auto& a : acc) {
    for (std::size_t k = 0; k < n_all; ++k) out.grad[k] += a.grad[k];
    out.loss += a.loss;
    out.used += a.used;
    out.skipped += a.skipped;
    out.clamped += a.clamped;
  }
  if (out.used > 0) {
    const double inv = 1.0 / static_cast<double>(out.used);
    out.loss *= inv;
    for (double& g : out.grad) g *= inv;
  }
  return out;
}

TrainResult train(const HybridModel& init, const SampleSet& data, const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "epochs >= 0 and batch size >= 1 required");
  if (!(cfg.lr_input > 0.0 && cfg.lr_sgp4 > 0.0 && cfg.lr_output > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "learning rates must be positive");
  }
  data.check_split_hygiene();
  TrainResult res{init, {}};
  if (cfg.epochs == 0) return res;

  const std::vector<std::size_t> train_idx = data.indices(Split::Train);
  const std::vector<std::size_t> valid_idx = data.indices(Split::Valid);
  if (train_idx.empty()) throw Error(ErrorCode::InvalidArgument, "training split is empty");
  const std::vector<std::size_t>& select_idx = valid_idx.empty() ? train_idx : valid_idx;

  HybridModel model = init;
  TrainHistory& h = res.history;
  h.initial_train_mse = mean_loss(model, data, train_idx, cfg.workers);
  h.initial_valid_mse = valid_idx.empty() ? h.initial_train_mse : mean_loss(model, data, valid_idx, cfg.workers);
  double best = valid_idx.empty() ? h.initial_train_mse : h.initial_valid_mse;

  const std::size_t n_in = model.input_net.parameter_count();
  const std::size_t n_sg = model.config.learn_sgp4 ? kSgp4Params : 0;
  const std::size_t n_out = model.output_net.parameter_count();
  Adam opt_in(n_in, cfg.lr_input), opt_sg(n_sg, cfg.lr_sgp4), opt_out(n_out, cfg.lr_output);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = train_idx;
  std::vector<double> params = model.flat_parameters();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      const LossGrads lg = loss_and_grads(model, data, std::span<const std::size_t>(order.data() + b, e - b), cfg.workers);
      h.skipped += lg.skipped;
      if (!std::isfinite(lg.loss)) throw TrainingDiverged("training loss became non-finite", h);
      if (lg.used == 0) continue;
      const std::span<double> p_in(params.data(), n_in), p_sg(params.data() + n_in, n_sg),
          p_out(params.data() + n_in + n_sg, n_out);
      const std::span<const double> gr(lg.grad);
      if (cfg.optimizer == Optimizer::Adam) {
        opt_in.step(p_in, gr.subspan(0, n_in));
        opt_sg.step(p_sg, gr.subspan(n_in, n_sg));
        opt_out.step(p_out, gr.subspan(n_in + n_sg, n_out));
      } else {
        sgd_step(p_in, gr.subspan(0, n_in), cfg.lr_input);
        sgd_step(p_sg, gr.subspan(n_in, n_sg), cfg.lr_sgp4);
        sgd_step(p_out, gr.subspan(n_in + n_sg, n_out), cfg.lr_output);
      }
      model.set_flat_parameters(params);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = mean_loss(model, data, train_idx, cfg.workers);
    rec.valid_mse = valid_idx.empty() ? rec.train_mse : mean_loss(model, data, valid_idx, cfg.workers);
    h.epochs.push_back(rec);
    if (!std::isfinite(rec.train_mse) || !std::isfinite(rec.valid_mse)) {
      throw TrainingDiverged("loss became non-finite at epoch " + std::to_string(epoch), h);
    }
    const double sel = &select_idx == &valid_idx ? rec.valid_mse : rec.train_mse;
    if (sel < best) {
      best = sel;
      h.best_epoch = epoch;
      res.model = model;
    }
  }
  return res;
}

Metrics evaluate(const HybridModel& model, const SampleSet& data, Split split, int workers) {
  return accumulate_metrics(data, data.indices(split), workers, [&](const Sample& row) -> std::optional<Vector6> {
    return to_vector(forward_state<double>(model, data.elements[row.tle], row.tsince_min, nullptr));
  });
}

Metrics baseline_metrics(const SampleSet& data, Split split, const GravityConstants& gc, int workers) {
  std::vector<std::optional<Model>> models(data.elements.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    try {
      models[k] = initialize(data.elements[k], gc);
    } catch (const Error&) {
      models[k].reset();
    }
  }
  return accumulate_metrics(data, data.indices(split), workers, [&](const Sample& row) -> std::optional<Vector6> {
    if (!models[row.tle]) return std::nullopt;
    return state_vector(propagate(*models[row.tle], row.tsince_min));
  });
}

namespace {

nlohmann::json mlp_json(const Mlp& net) {
  if (net.empty()) return nullptr;
  return {{"sizes", net.sizes()},
          {"params", std::vector<double>(net.parameters().begin(), net.parameters().end())}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  return Mlp(j.at("sizes").get<std::vector<int>>(), j.at("params").get<std::vector<double>>());
}

}  // namespace

std::string checkpoint_json(const HybridModel& m) {
  nlohmann::json j;
  j["config"] = {{"use_input_net", m.config.use_input_net},
                 {"use_output_net", m.config.use_output_net},
                 {"learn_sgp4", m.config.learn_sgp4},
                 {"input_hidden", m.config.input_hidden},
                 {"output_hidden", m.config.output_hidden},
                 {"input_correction_scale", m.config.input_correction_scale},
                 {"output_correction_scale", m.config.output_correction_scale},
                 {"seed", m.config.seed}};
  j["input_net"] = mlp_json(m.input_net);
  j["output_net"] = mlp_json(m.output_net);
  j["theta_sgp4"] = {{"bstar_offset", m.sgp4.bstar_offset}, {"c1_scale", m.sgp4.c1_scale}};
  j["normalization"] = {{"feature_mean", m.norm.mean},
                        {"feature_scale", m.norm.scale},
                        {"time_scale_min", m.norm.time_scale_min},
                        {"position_scale_km", kPositionScaleKm},
                        {"velocity_scale_kms", kVelocityScaleKms}};
  j["gravity"] = {{"mu", m.gc.mu}, {"radius_earth_km", m.gc.radius_earth_km}};
  j["parameter_count"] = m.parameter_count();
  return j.dump(1);
}

HybridModel load_checkpoint(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    HybridModel m;
    const auto& c = j.at("config");
    m.config.use_input_net = c.at("use_input_net").get<bool>();
    m.config.use_output_net = c.at("use_output_net").get<bool>();
    m.config.learn_sgp4 = c.at("learn_sgp4").get<bool>();
    m.config.input_hidden = c.at("input_hidden").get<std::vector<int>>();
    m.config.output_hidden = c.at("output_hidden").get<std::vector<int>>();
    m.config.input_correction_scale = c.at("input_correction_scale").get<std::array<double, 9>>();
    m.config.output_correction_scale = c.at("output_correction_scale").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.input_net = mlp_from_json(j.at("input_net"));
    m.output_net = mlp_from_json(j.at("output_net"));
    m.sgp4.bstar_offset = j.at("theta_sgp4").at("bstar_offset").get<double>();
    m.sgp4.c1_scale = j.at("theta_sgp4").at("c1_scale").get<double>();
    const auto& n = j.at("normalization");
    m.norm.mean = n.at("feature_mean").get<std::array<double, 9>>();
    m.norm.scale = n.at("feature_scale").get<std::array<double, 9>>();
    m.norm.time_scale_min = n.at("time_scale_min").get<double>();
    const double mu = j.at("gravity").at("mu").get<double>();
    m.gc = mu == GravityConstants::wgs84().mu ? GravityConstants::wgs84() : GravityConstants::wgs72();
    if (m.config.use_input_net != !m.input_net.empty() || m.config.use_output_net != !m.output_net.empty()) {
      throw Error(ErrorCode::Parse, "checkpoint networks disagree with the config flags");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("checkpoint json: ") + e.what());
  }
}

std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_mse,valid_mse\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "0,%.17g,%.17g\n", h.initial_train_mse, h.initial_valid_mse);
  out += buf;
  for (const auto& e : h.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train_mse, e.valid_mse);
    out += buf;
  }
  return out;
}

}  // namespace dsgp4kit
