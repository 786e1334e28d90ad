#include "pas/search/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "pas/diffcore/adam.hpp"
#include "pas/diffcore/rng.hpp"
#include "pas/graphdata/batch.hpp"
#include "pas/readmerge.hpp"
#include "pas/supernet/model.hpp"

namespace pas {

void SearchConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ContractError(std::string(field) + ": " + what);
  };
  require(layers >= 1, "layers", "must be at least 1");
  require(hidden >= 1, "hidden", "must be at least 1");
  require(pool_ratio > 0.0 && pool_ratio <= 1.0, "pool_ratio", "must lie in (0, 1]");
  require(tau > 0.0, "tau", "must be positive");
  require(epochs >= 0, "epochs", "must be non-negative");
  require(batch_size >= 1, "batch_size", "must be at least 1");
  require(lr_w > 0.0, "lr_w", "must be positive");
  require(lr_alpha > 0.0, "lr_alpha", "must be positive");
  require(search_repeats >= 1, "search_repeats", "must be at least 1");
  require(threads >= 1, "threads", "must be at least 1");
  for (double f : split) require(f >= 0.0, "split", "fractions must be non-negative");
  require(std::abs(split[0] + split[1] + split[2] - 1.0) < 1e-9, "split", "fractions must sum to 1");
  require(static_cast<int>(pins.agg.size()) <= layers, "pins", "more aggregation pins than layers");
  require(static_cast<int>(pins.pool.size()) <= layers, "pins", "more pooling pins than layers");
  require(static_cast<int>(pins.readout.size()) <= layers + 1, "pins", "more readout pins than readout positions");
}

ModelConfig SearchConfig::model_config(Eigen::Index in_dim, int num_classes) const {
  ModelConfig m;
  m.in_dim = in_dim;
  m.hidden = hidden;
  m.num_classes = num_classes;
  m.layers = layers;
  m.pool_ratio = pool_ratio;
  m.activation = activation;
  m.readout0_after_aggregation = readout0_after_aggregation;
  return m;
}

namespace {

using Clock = std::chrono::steady_clock;

// Seed streams derived from the configured seed.
enum Stream : std::uint64_t { kSplit = 1, kWeights = 2, kAlpha = 3, kOrder = 4, kNoise = 5, kSample = 6 };

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) { return Rng(seed).split(stream).seed(); }

// The layer count of a trained model comes from its architecture.
ModelConfig model_for(const SearchConfig& cfg, const Dataset& ds, const DerivedArch& arch) {
  ModelConfig m = cfg.model_config(ds.feature_dim, ds.num_classes);
  m.layers = static_cast<int>(arch.layers.size());
  return m;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::vector<int>> minibatches(std::span<const int> indices, int batch_size, Rng& rng) {
  std::vector<int> order(indices.begin(), indices.end());
  rng.shuffle(order);
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

int count_correct(const Matrix& logits, const std::vector<int>& labels) {
  int correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    if (best == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return correct;
}

void check_finite(double loss, const char* phase, int epoch, const TrainReport& report) {
  if (!std::isfinite(loss)) {
    throw DivergenceError(std::string(phase) + " loss became non-finite in epoch " + std::to_string(epoch + 1), report);
  }
}

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the
// first exception after all workers stop.
template <typename F>
void parallel_for(int n, int threads, F&& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct SearchRun {
  DerivedArch arch;
  TrainReport report;
  ParamStore alpha;
};

SearchRun search_once(const Dataset& ds, const Split& split, const SearchConfig& cfg, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const ModelConfig mcfg = cfg.model_config(ds.feature_dim, ds.num_classes);
  ArchParams arch(cfg.layers, cfg.tau, derived_seed(seed, kAlpha), cfg.pins);
  ParamStore weights(derived_seed(seed, kWeights));
  AdamState w_opt;
  w_opt.config.lr = cfg.lr_w;
  AdamState a_opt;
  a_opt.config.lr = cfg.lr_alpha;
  Rng order(derived_seed(seed, kOrder));
  Rng noise(derived_seed(seed, kNoise));
  const bool searchable = !arch.sites().empty() && [&] {
    for (const Site& s : arch.sites()) {
      if (!arch.pins().pinned(s)) return true;
    }
    return false;
  }();

  TrainReport report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& mb : minibatches(split.train, cfg.batch_size, order)) {
      const GraphBatch batch = make_batch(ds, mb);
      Tape tape;
      Var logits = supernet_forward(tape, batch, arch, weights, mcfg, noise);
      Var loss = xent_loss(logits, batch.labels);
      check_finite(loss.scalar(), "training", epoch, report);
      weights.zero_grad();
      tape.backward(loss);
      adam_step(weights, w_opt);
      loss_sum += loss.scalar() * static_cast<double>(mb.size());
    }
    report.train_loss.push_back(split.train.empty() ? 0.0 : loss_sum / static_cast<double>(split.train.size()));

    double val_sum = 0.0;
    int correct = 0;
    for (const auto& mb : minibatches(split.val, cfg.batch_size, order)) {
      const GraphBatch batch = make_batch(ds, mb);
      Tape tape;
      Var logits = supernet_forward(tape, batch, arch, weights, mcfg, noise);
      Var loss = xent_loss(logits, batch.labels);
      check_finite(loss.scalar(), "validation", epoch, report);
      correct += count_correct(logits.value(), batch.labels);
      val_sum += loss.scalar() * static_cast<double>(mb.size());
      if (!searchable) continue;
      arch.logits().zero_grad();
      tape.backward(loss);
      adam_step(arch.logits(), a_opt);
    }
    const double nval = static_cast<double>(split.val.size());
    report.val_loss.push_back(split.val.empty() ? 0.0 : val_sum / nval);
    report.val_acc.push_back(split.val.empty() ? 0.0 : correct / nval);
  }
  if (!report.val_acc.empty()) {
    report.best_epoch = report.epochs() - 1;
    report.best_val_acc = report.val_acc.back();
    report.best_val_loss = report.val_loss.back();
  }
  report.wall_time_seconds = seconds_since(t0);
  return {derive(arch), std::move(report), arch.logits()};
}

}  // namespace

Metrics evaluate(const Dataset& ds, std::span<const int> indices, const DerivedArch& arch, ParamStore& params,
                 const ModelConfig& mcfg, int batch_size) {
  if (indices.empty()) return {};
  double loss_sum = 0.0;
  int correct = 0;
  for (std::size_t i = 0; i < indices.size(); i += static_cast<std::size_t>(batch_size)) {
    const auto len = std::min(indices.size() - i, static_cast<std::size_t>(batch_size));
    const GraphBatch batch = make_batch(ds, indices.subspan(i, len));
    Tape tape;
    Var logits = discrete_forward(tape, batch, arch, params, mcfg);
    loss_sum += xent_loss(logits, batch.labels).scalar() * static_cast<double>(len);
    correct += count_correct(logits.value(), batch.labels);
  }
  const double n = static_cast<double>(indices.size());
  return {loss_sum / n, correct / n};
}

Split search_split(const Dataset& ds, const SearchConfig& cfg) {
  return stratified_split(ds, {}, cfg.split, derived_seed(cfg.seed, kSplit));
}

SearchResult pas_search(const Dataset& ds, const SearchConfig& cfg) {
  cfg.validate();
  validate_dataset(ds);
  if (ds.size() == 0) throw ContractError("pas_search: empty dataset");
  const auto t0 = Clock::now();
  SearchResult result;
  result.split = search_split(ds, cfg);
  bool have = false;
  for (int r = 0; r < cfg.search_repeats; ++r) {
    const std::uint64_t seed = r == 0 ? cfg.seed : derived_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(r));
    SearchRun run = search_once(ds, result.split, cfg, seed);
    if (!have || run.report.best_val_acc > result.report.best_val_acc) {
      result.arch = std::move(run.arch);
      result.report = std::move(run.report);
      result.alpha = std::move(run.alpha);
      have = true;
    }
  }
  result.report.wall_time_seconds = seconds_since(t0);
  return result;
}

TrainResult train_architecture(const Dataset& ds, std::span<const int> train, std::span<const int> val,
                               const DerivedArch& arch, const SearchConfig& cfg) {
  cfg.validate();
  arch.validate();
  if (train.empty()) throw ContractError("train_architecture: empty training set");
  const auto t0 = Clock::now();
  const ModelConfig mcfg = model_for(cfg, ds, arch);
  ParamStore params(derived_seed(cfg.seed, kWeights));
  {
    // Materialise every parameter so a zero-epoch budget still returns them.
    const GraphBatch first = make_batch(ds, train.first(1));
    Tape tape;
    discrete_forward(tape, first, arch, params, mcfg);
  }
  AdamState opt;
  opt.config.lr = cfg.lr_w;
  Rng order(derived_seed(cfg.seed, kOrder));

  TrainResult result{params, {}};
  TrainReport& report = result.report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& mb : minibatches(train, cfg.batch_size, order)) {
      const GraphBatch batch = make_batch(ds, mb);
      Tape tape;
      Var loss = xent_loss(discrete_forward(tape, batch, arch, params, mcfg), batch.labels);
      check_finite(loss.scalar(), "training", epoch, report);
      params.zero_grad();
      tape.backward(loss);
      adam_step(params, opt);
      loss_sum += loss.scalar() * static_cast<double>(mb.size());
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(train.size()));
    const Metrics m = evaluate(ds, val, arch, params, mcfg, cfg.batch_size);
    check_finite(m.loss, "validation", epoch, report);
    report.val_loss.push_back(m.loss);
    report.val_acc.push_back(m.accuracy);
    const bool better = report.best_epoch < 0 || val.empty() || m.accuracy > report.best_val_acc ||
                        (m.accuracy == report.best_val_acc && m.loss < report.best_val_loss);
    if (better) {
      report.best_epoch = epoch;
      report.best_val_acc = m.accuracy;
      report.best_val_loss = m.loss;
      result.params = params;
    }
  }
  if (cfg.epochs == 0) result.params = params;
  report.wall_time_seconds = seconds_since(t0);
  return result;
}

CvResult cross_validate(const Dataset& ds, const DerivedArch& arch, int k, const SearchConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const std::vector<Fold> folds = stratified_kfold(ds, k, cfg.seed);
  CvResult cv;
  cv.folds.resize(folds.size());
  parallel_for(static_cast<int>(folds.size()), cfg.threads, [&](int f) {
    const Fold& fold = folds[static_cast<std::size_t>(f)];
    SearchConfig fcfg = cfg;
    fcfg.seed = derived_seed(cfg.seed, 100 + static_cast<std::uint64_t>(f));
    const Split carve = stratified_split(ds, fold.train, {8.0 / 9.0, 1.0 / 9.0, 0.0}, fcfg.seed);
    for (int t : fold.test) {
      if (std::binary_search(carve.train.begin(), carve.train.end(), t) ||
          std::binary_search(carve.val.begin(), carve.val.end(), t)) {
        throw ContractError("cross_validate: test graph " + std::to_string(t) + " leaked into training data");
      }
    }
    TrainResult tr = train_architecture(ds, carve.train, carve.val, arch, fcfg);
    const ModelConfig mcfg = model_for(fcfg, ds, arch);
    FoldResult& out = cv.folds[static_cast<std::size_t>(f)];
    out.fold = f;
    out.train_acc = evaluate(ds, carve.train, arch, tr.params, mcfg, cfg.batch_size).accuracy;
    out.val_acc = evaluate(ds, carve.val, arch, tr.params, mcfg, cfg.batch_size).accuracy;
    out.test_acc = evaluate(ds, fold.test, arch, tr.params, mcfg, cfg.batch_size).accuracy;
  });
  double sum = 0.0;
  for (const auto& f : cv.folds) sum += f.test_acc;
  cv.mean = sum / static_cast<double>(cv.folds.size());
  double var = 0.0;
  for (const auto& f : cv.folds) var += (f.test_acc - cv.mean) * (f.test_acc - cv.mean);
  cv.std = std::sqrt(var / static_cast<double>(cv.folds.size()));
  cv.wall_time_seconds = seconds_since(t0);
  return cv;
}

RandomSearchResult random_search(const Dataset& ds, const SearchConfig& cfg, int n) {
  cfg.validate();
  if (n < 1) throw ContractError("random_search: at least one trial required");
  const auto t0 = Clock::now();
  RandomSearchResult result;
  result.split = search_split(ds, cfg);
  Rng sampler(derived_seed(cfg.seed, kSample));
  result.trials.resize(static_cast<std::size_t>(n));
  for (auto& t : result.trials) t.arch = sample_arch(cfg.layers, cfg.pins, sampler);
  parallel_for(n, cfg.threads, [&](int i) {
    RandomTrial& t = result.trials[static_cast<std::size_t>(i)];
    SearchConfig tcfg = cfg;
    tcfg.seed = derived_seed(cfg.seed, 200 + static_cast<std::uint64_t>(i));
    const TrainResult tr = train_architecture(ds, result.split.train, result.split.val, t.arch, tcfg);
    t.val_acc = tr.report.best_val_acc;
    t.val_loss = tr.report.best_val_loss;
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.trials.size(); ++i) {
    const auto& a = result.trials[i];
    const auto& b = result.trials[best];
    if (a.val_acc > b.val_acc || (a.val_acc == b.val_acc && a.val_loss < b.val_loss)) best = i;
  }
  result.best = result.trials[best].arch;
  result.wall_time_seconds = seconds_since(t0);
  return result;
}

}  // namespace pas
