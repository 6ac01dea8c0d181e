#include "kru/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "kru/checkpoint.hpp"
#include "kru/rng.hpp"
#include "kru/training.hpp"

namespace kru {

using nlohmann::json;

namespace {

std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return Rng(seed, s).next_u64(); }

TaskBatch concat_rows(const TaskBatch& a, const TaskBatch& b) {
  TaskBatch out = a;
  out.batch = a.batch + b.batch;
  out.inputs.insert(out.inputs.end(), b.inputs.begin(), b.inputs.end());
  out.class_targets.insert(out.class_targets.end(), b.class_targets.begin(), b.class_targets.end());
  out.real_targets.insert(out.real_targets.end(), b.real_targets.begin(), b.real_targets.end());
  out.loss_mask.insert(out.loss_mask.end(), b.loss_mask.begin(), b.loss_mask.end());
  return out;
}

}  // namespace

struct TaskData::Impl {
  RunConfig cfg;
  std::uint64_t train_seed = 0, valid_seed = 0, test_seed = 0;
  // MNIST
  MnistSplit mnist;
  std::optional<ImageDataset> mnist_test;
  mutable std::size_t shuffled_epoch = std::numeric_limits<std::size_t>::max();
  mutable std::vector<std::size_t> order;
  // charlm
  CorpusSplit corpus;
  std::unique_ptr<CharWindows> train_windows;

  bool synthetic() const { return cfg.task.kind == TaskKind::copy || cfg.task.kind == TaskKind::adding; }
  bool is_mnist() const {
    return cfg.task.kind == TaskKind::mnist || cfg.task.kind == TaskKind::mnist_permuted;
  }

  TaskBatch synth(std::uint64_t seed, std::size_t first, std::size_t rows) const {
    return cfg.task.kind == TaskKind::copy ? gen_copy_batch(cfg.task.T, rows, seed, first)
                                           : gen_adding_batch(cfg.task.T, rows, seed, first);
  }

  const std::vector<int>& stream(Split s) const {
    return s == Split::train ? corpus.train : s == Split::valid ? corpus.valid : corpus.test;
  }
};

TaskData::TaskData(const RunConfig& cfg) : impl_(std::make_unique<Impl>()) {
  auto& d = *impl_;
  d.cfg = cfg;
  d.train_seed = stream_seed(cfg.seed, Stream::train_data);
  d.valid_seed = stream_seed(cfg.seed, Stream::valid_data);
  d.test_seed = stream_seed(cfg.seed, Stream::test_data);
  const auto& t = cfg.task;
  if (d.is_mnist()) {
    ImageDataset all = load_mnist_idx(t.mnist_images, t.mnist_labels);
    if (t.mnist_limit > 0 && t.mnist_limit < all.count) all = all.subset(0, t.mnist_limit);
    if (t.mnist_valid >= all.count) {
      throw DataError("MNIST validation count " + std::to_string(t.mnist_valid) +
                      " leaves no training images out of " + std::to_string(all.count));
    }
    std::optional<std::uint64_t> perm;
    if (t.kind == TaskKind::mnist_permuted) {
      perm = t.permutation_seed ? *t.permutation_seed : stream_seed(cfg.seed, Stream::permutation);
    }
    all = permute_pixels(std::move(all), perm);
    d.mnist = split_train_valid(all, t.mnist_valid);
    if (!t.mnist_test_images.empty()) {
      ImageDataset test = load_mnist_idx(t.mnist_test_images, t.mnist_test_labels);
      if (test.sequence_length() != all.sequence_length()) {
        throw DataError("MNIST test images have a different size from the training images");
      }
      test.permutation = all.permutation;
      d.mnist_test = std::move(test);
    }
    if (d.mnist.train.count < cfg.schedule.batch_size) {
      throw DataError("fewer MNIST training images than one batch");
    }
  } else if (t.kind == TaskKind::charlm) {
    d.corpus = load_char_corpus(t.corpus_train, t.corpus_valid, t.corpus_test);
    d.train_windows = std::make_unique<CharWindows>(d.corpus.train, d.corpus.vocab_size(),
                                                    cfg.schedule.batch_size, cfg.schedule.bptt_window);
    const std::size_t v = d.corpus.vocab_size();
    if ((cfg.model.input_dim && *cfg.model.input_dim != v) ||
        (cfg.model.output_dim && *cfg.model.output_dim != v)) {
      throw ConfigError("model input/output dims must equal the corpus vocabulary size " + std::to_string(v));
    }
  }
}

TaskData::~TaskData() = default;
TaskData::TaskData(TaskData&&) noexcept = default;
TaskData& TaskData::operator=(TaskData&&) noexcept = default;

std::size_t TaskData::input_dim() const { return task_input_dim(impl_->cfg, impl_->corpus.vocab_size()); }
std::size_t TaskData::output_dim() const { return task_output_dim(impl_->cfg, impl_->corpus.vocab_size()); }

std::size_t TaskData::updates_per_epoch() const {
  const auto& d = *impl_;
  const std::size_t b = d.cfg.schedule.batch_size;
  if (d.synthetic()) return std::max<std::size_t>(1, d.cfg.task.train_size / b);
  if (d.is_mnist()) return d.mnist.train.count / b;
  return d.train_windows->num_windows();
}

bool TaskData::carries_state() const { return impl_->cfg.task.kind == TaskKind::charlm; }

bool TaskData::has_split(Split s) const {
  if (s != Split::test) return true;
  return !impl_->is_mnist() || impl_->mnist_test.has_value();
}

TaskBatch TaskData::train_batch(std::size_t u) const {
  const auto& d = *impl_;
  const std::size_t b = d.cfg.schedule.batch_size;
  if (d.synthetic()) {
    const std::size_t n = d.cfg.task.train_size;
    const std::size_t first = (u * b) % n;
    if (first + b <= n) return d.synth(d.train_seed, first, b);
    // Wrap around the end of the fixed training set.
    TaskBatch head = d.synth(d.train_seed, first, n - first);
    std::size_t left = b - (n - first);
    while (left > 0) {
      const std::size_t take = std::min(left, n);
      head = concat_rows(head, d.synth(d.train_seed, 0, take));
      left -= take;
    }
    return head;
  }
  const std::size_t upe = updates_per_epoch();
  const std::size_t epoch = u / upe, k = u % upe;
  if (d.is_mnist()) {
    if (epoch != d.shuffled_epoch) {
      d.order.resize(d.mnist.train.count);
      std::iota(d.order.begin(), d.order.end(), std::size_t{0});
      Rng rng(d.cfg.seed, Stream::shuffle, epoch);
      for (std::size_t i = d.order.size(); i > 1; --i) std::swap(d.order[i - 1], d.order[rng.below(i)]);
      d.shuffled_epoch = epoch;
    }
    std::vector<std::size_t> idx(d.order.begin() + static_cast<std::ptrdiff_t>(k * b),
                                 d.order.begin() + static_cast<std::ptrdiff_t>((k + 1) * b));
    return mnist_batch(d.mnist.train, idx);
  }
  return d.train_windows->window(k);
}

double TaskData::evaluate(const CellParameters& p, Split s, const KronOptions& kron) const {
  const auto& d = *impl_;
  const std::size_t chunk = d.cfg.schedule.eval_batch;
  if (d.synthetic()) {
    const std::size_t n = s == Split::train   ? d.cfg.task.train_size
                          : s == Split::valid ? d.cfg.task.valid_size
                                              : d.cfg.task.test_size;
    const std::uint64_t seed = s == Split::train ? d.train_seed : s == Split::valid ? d.valid_seed : d.test_seed;
    double loss = 0.0;
    std::size_t count = 0;
    for (std::size_t first = 0; first < n; first += chunk) {
      const auto st = evaluate_batch(p, d.synth(seed, first, std::min(chunk, n - first)), nullptr, kron);
      loss += st.loss_sum;
      count += st.count;
    }
    return loss / static_cast<double>(count);
  }
  if (d.is_mnist()) {
    const ImageDataset* data = s == Split::train ? &d.mnist.train : s == Split::valid ? &d.mnist.valid : nullptr;
    if (s == Split::test) {
      if (!d.mnist_test) throw DataError("no MNIST test files configured");
      data = &*d.mnist_test;
    }
    std::size_t correct = 0, count = 0;
    for (std::size_t first = 0; first < data->count; first += chunk) {
      std::vector<std::size_t> idx(std::min(chunk, data->count - first));
      std::iota(idx.begin(), idx.end(), first);
      const auto st = evaluate_batch(p, mnist_batch(*data, idx), nullptr, kron);
      correct += st.correct;
      count += st.count;
    }
    return static_cast<double>(correct) / static_cast<double>(count);
  }
  const CharWindows windows(d.stream(s), d.corpus.vocab_size(), d.cfg.schedule.batch_size,
                            d.cfg.schedule.bptt_window);
  double loss = 0.0;
  std::size_t count = 0;
  CellState state = zero_state(p, d.cfg.schedule.batch_size);
  for (std::size_t k = 0; k < windows.num_windows(); ++k) {
    const auto st = evaluate_batch(p, windows.window(k), &state, kron);
    loss += st.loss_sum;
    count += st.count;
    state = st.final_state;
  }
  return bits_per_char(loss / static_cast<double>(std::max<std::size_t>(count, 1)));
}

TaskBatch TaskData::probe_batch(std::size_t rows) const {
  const auto& d = *impl_;
  if (d.synthetic()) return d.synth(d.valid_seed, 0, rows);
  if (d.is_mnist()) {
    std::vector<std::size_t> idx(std::min(rows, d.mnist.valid.count));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return mnist_batch(d.mnist.valid, idx);
  }
  return CharWindows(d.corpus.valid, d.corpus.vocab_size(), rows, d.cfg.schedule.bptt_window).window(0);
}

std::string TaskData::metadata_json() const {
  const auto& d = *impl_;
  json j = json::object();
  if (d.is_mnist()) {
    j["train_images"] = d.mnist.train.count;
    j["valid_images"] = d.mnist.valid.count;
    j["test_images"] = d.mnist_test ? d.mnist_test->count : 0;
    if (d.cfg.task.kind == TaskKind::mnist_permuted) j["permutation"] = d.mnist.train.permutation;
  } else if (d.cfg.task.kind == TaskKind::charlm) {
    j["vocab_size"] = d.corpus.vocab_size();
    j["train_chars"] = d.corpus.train.size();
  } else if (d.cfg.task.kind == TaskKind::copy) {
    j["memoryless_baseline"] = copy_memoryless_baseline(d.cfg.task.T);
  } else {
    j["constant_predictor_mse"] = 1.0 / 6.0;
  }
  return j.dump();
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream os;
  os << "step,train_loss,valid_metric,lr,penalty,wallclock_s\n" << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.step << ',' << r.train_loss << ',';
    if (r.valid_metric) os << *r.valid_metric;
    os << ',' << r.lr << ',' << r.penalty << ',' << r.wallclock_s << '\n';
  }
  return os.str();
}

ParamCounts count_parameters(const CellParameters& p) {
  return {total_parameter_count(p), recurrent_parameter_count(p, false), recurrent_parameter_count(p, true)};
}

namespace {

bool better(double a, double b, bool higher) { return higher ? a > b : a < b; }

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json spectral_json(const CellParameters& p) {
  const auto r = spectral_report(p);
  json j = {{"spectral_norm", r.spectral_norm},
            {"spectral_radius_lower_bound", r.spectral_radius_lower_bound},
            {"unitarity_residual", r.unitarity_residual},
            {"condition_number", r.condition_number ? json(*r.condition_number) : json(nullptr)},
            {"note", r.note}};
  return j;
}

json counts_json(const CellParameters& p) {
  const auto c = count_parameters(p);
  return {{"total", c.total}, {"recurrent", c.recurrent}, {"recurrent_trainable", c.recurrent_trainable}};
}

void dump_divergence(const RunConfig& cfg, const CellParameters& p, std::size_t step, double lr,
                     const std::vector<CurveRow>& curve, const std::string& what) {
  json j;
  j["error"] = what;
  j["step"] = step;
  j["learning_rate"] = lr;
  json norms = json::object();
  for (const auto& v : parameters(p)) norms[v.name] = frobenius_norm(*v.value);
  j["parameter_norms"] = norms;
  json recent = json::array();
  for (std::size_t i = curve.size() > 10 ? curve.size() - 10 : 0; i < curve.size(); ++i) {
    recent.push_back({{"step", curve[i].step}, {"train_loss", curve[i].train_loss}});
  }
  j["recent_curve"] = recent;
  write_file_atomic(cfg.out_dir / "divergence.json", j.dump(2) + "\n");
}

}  // namespace

TrainOutcome train(const RunConfig& cfg, const TrainOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  TaskData data(cfg);
  const TaskKind task = cfg.task.kind;
  const bool higher = higher_is_better(task);
  const auto& sched = cfg.schedule;

  TrainOutcome out;
  out.config_hash = config_hash(cfg, data.input_dim(), data.output_dim());
  CellParameters params = init_parameters(cell_shape(cfg, data.input_dim(), data.output_dim()),
                                          stream_seed(cfg.seed, Stream::init));
  Optimizer opt(cfg.optimizer, params);
  std::size_t start = 0;
  std::optional<double> best;
  CellParameters best_params = params;

  if (opts.resume) {
    Checkpoint ck = load_checkpoint(*opts.resume);
    if (ck.config_hash != out.config_hash) {
      throw ConfigError("checkpoint config hash " + ck.config_hash + " does not match this config (" +
                        out.config_hash + ")");
    }
    params = ck.params;
    if (ck.optimizer) opt = restore(*ck.optimizer, params);
    opt.set_learning_rate(ck.learning_rate);
    start = ck.step;
    out.valid_history = ck.metric_history;
    best = ck.best_metric;
    out.best_step = ck.best_step;
    auto best_path = opts.resume->parent_path() / "best.json";
    best_params = std::filesystem::exists(best_path) ? load_checkpoint(best_path).params : params;
  }

  const std::size_t upe = data.updates_per_epoch();
  const std::size_t total = sched.updates > 0 ? sched.updates : sched.epochs * upe;
  const std::size_t eval_every = sched.eval_every > 0 ? sched.eval_every : upe;
  BpttOptions bopts;
  bopts.window = sched.bptt_window;
  bopts.unitary_amplitude = sched.unitary_amplitude;
  bopts.penalize_lstm = cfg.model.penalize_lstm;
  bopts.kron.threads = cfg.threads;

  auto checkpoint = [&](const std::filesystem::path& path, const CellParameters& p, std::size_t step) {
    Checkpoint ck;
    ck.config_hash = out.config_hash;
    ck.task = to_string(task);
    ck.metric = metric_name(task);
    ck.step = step;
    ck.epoch = step / upe;
    ck.seed = cfg.seed;
    ck.counter = step;
    ck.learning_rate = opt.learning_rate();
    ck.metric_history = out.valid_history;
    ck.best_metric = best;
    ck.best_step = out.best_step;
    ck.params = p;
    ck.optimizer = snapshot(opt);
    save_checkpoint(path, ck);
  };

  CellState carry;
  double window_loss = 0.0, window_penalty = 0.0;
  std::size_t window_count = 0;
  std::optional<double> last_valid;
  std::size_t u = start;
  for (; u < total; ++u) {
    if (data.carries_state() && (u % upe == 0 || carry.h.empty())) {
      carry = zero_state(params, sched.batch_size);
    }
    const TaskBatch batch = data.train_batch(u);
    BpttResult res;
    try {
      res = bptt_loss_and_grads(params, batch, bopts, data.carries_state() ? &carry : nullptr);
    } catch (const DivergenceError& e) {
      if (opts.write_artifacts) dump_divergence(cfg, params, u, opt.learning_rate(), out.curve, e.what());
      throw DivergenceError(std::string(e.what()) + " at update " + std::to_string(u));
    }
    if (data.carries_state()) carry = std::move(res.final_state);
    if (sched.gradient_clip) clip_gradients(res.grads, *sched.gradient_clip);
    opt.step(params, res.grads);
    window_loss += res.task_loss;
    window_penalty += res.penalty;
    ++window_count;

    const std::size_t step = u + 1;
    const bool eval_now = step % eval_every == 0 || step == total;
    if (eval_now) {
      const double v = data.evaluate(params, Split::valid, bopts.kron);
      if (!std::isfinite(v)) {
        if (opts.write_artifacts) dump_divergence(cfg, params, step, opt.learning_rate(), out.curve, "validation metric is not finite");
        throw DivergenceError("validation metric is not finite at update " + std::to_string(step));
      }
      last_valid = v;
      out.valid_history.push_back(v);
      if (!best || better(v, *best, higher)) {
        best = v;
        out.best_step = step;
        best_params = params;
        if (opts.write_artifacts) checkpoint(cfg.out_dir / "best.json", params, step);
      }
      if (sched.plateau) opt.set_learning_rate(plateau_decay(out.valid_history, opt.learning_rate(), sched.lr_decay_factor, higher));
    }
    if (step % sched.log_every == 0 || step == total || eval_now) {
      CurveRow row{step, window_loss / static_cast<double>(window_count),
                   eval_now ? last_valid : std::nullopt, opt.learning_rate(),
                   window_penalty / static_cast<double>(window_count), elapsed(t0)};
      out.curve.push_back(row);
      window_loss = window_penalty = 0.0;
      window_count = 0;
      if (opts.log) {
        *opts.log << "step " << step << "/" << total << " train_loss " << row.train_loss;
        if (row.valid_metric) *opts.log << " valid_" << metric_name(task) << " " << *row.valid_metric;
        *opts.log << " lr " << row.lr << " t " << std::fixed << std::setprecision(1) << row.wallclock_s
                  << "s" << std::defaultfloat << std::setprecision(6) << "\n";
      }
      if (opts.write_artifacts) write_file_atomic(cfg.out_dir / "curve.csv", curve_csv(out.curve));
    }
    const bool ckpt_now = sched.checkpoint_every > 0 ? step % sched.checkpoint_every == 0 : eval_now;
    if (opts.write_artifacts && ckpt_now) checkpoint(cfg.out_dir / "checkpoint.json", params, step);
    if (eval_now && sched.stop_at && last_valid &&
        (higher ? *last_valid >= *sched.stop_at : *last_valid <= *sched.stop_at)) {
      out.stopped_early = step < total;
      ++u;
      break;
    }
  }
  out.updates = u;
  if (!last_valid) {
    last_valid = data.evaluate(params, Split::valid, bopts.kron);
    if (!best) {
      best = last_valid;
      best_params = params;
      out.best_step = u;
    }
  }
  out.final_valid = *last_valid;
  out.best_valid = *best;
  if (opts.evaluate_test && data.has_split(Split::test)) {
    out.test_metric = data.evaluate(best_params, Split::test, bopts.kron);
  }
  if (opts.write_artifacts) checkpoint(cfg.out_dir / "checkpoint.json", params, u);
  out.wallclock_s = elapsed(t0);

  json s;
  s["task"] = to_string(task);
  s["model"] = to_string(cfg.model.kind);
  s["field"] = to_string(cfg.model.field);
  s["hidden"] = cfg.model.hidden;
  s["metric"] = metric_name(task);
  s["config_hash"] = out.config_hash;
  s["seed"] = cfg.seed;
  s["updates"] = out.updates;
  s["updates_per_epoch"] = upe;
  s["stopped_early"] = out.stopped_early;
  s["best_valid_metric"] = out.best_valid;
  s["best_step"] = out.best_step;
  s["final_valid_metric"] = out.final_valid;
  s["final_train_loss"] = out.curve.empty() ? json(nullptr) : json(out.curve.back().train_loss);
  s["test_metric"] = out.test_metric ? json(*out.test_metric) : json(nullptr);
  s["learning_rate_final"] = opt.learning_rate();
  s["unitary_amplitude"] = sched.unitary_amplitude;
  s["parameters"] = counts_json(params);
  s["recurrent_final"] = spectral_json(params);
  s["data"] = json::parse(data.metadata_json());
  s["wallclock_s"] = out.wallclock_s;
  out.summary_json = s.dump(2);
  if (opts.write_artifacts) write_file_atomic(cfg.out_dir / "summary.json", out.summary_json + "\n");

  out.final_params = std::move(params);
  out.best_params = std::move(best_params);
  return out;
}

std::string evaluate_checkpoint(const std::filesystem::path& manifest, const RunConfig& cfg) {
  const Checkpoint ck = load_checkpoint(manifest);
  TaskData data(cfg);
  const std::string hash = config_hash(cfg, data.input_dim(), data.output_dim());
  if (hash != ck.config_hash) {
    throw ConfigError("checkpoint config hash " + ck.config_hash + " does not match the config (" + hash +
                      "); model or task differ");
  }
  const KronOptions kron{cfg.threads};
  json j;
  j["checkpoint"] = manifest.string();
  j["step"] = ck.step;
  j["metric"] = metric_name(cfg.task.kind);
  j["valid"] = data.evaluate(ck.params, Split::valid, kron);
  j["test"] = data.has_split(Split::test) ? json(data.evaluate(ck.params, Split::test, kron)) : json(nullptr);
  return j.dump(2);
}

std::vector<BenchRow> run_bench(const BenchOptions& o) {
  struct Case {
    std::size_t n;
    std::string mode;
    Matrix x, dense, y;
    KroneckerMatrix kron;
    std::size_t inner = 1;
    std::vector<double> times;
    // Both kernels write into a preallocated output so only the arithmetic is timed.
    void run() {
      if (mode == "dense") matmul_accumulate(Op::none, x, Op::trans, dense, y);
      else kron_apply_into(x, kron, y);
    }
  };
  if (o.reps == 0 || o.batch == 0) throw ConfigError("bench needs at least one repetition and one batch row");
  std::vector<std::unique_ptr<Case>> cases;
  for (const auto n : o.sizes) {
    Rng rng(o.seed, Stream::probe, n);
    Matrix x(o.batch, n, o.field);
    for (auto& v : x.data()) v = Complex(rng.normal(), o.field == Field::complex ? rng.normal() : 0.0);
    for (const auto& mode : o.modes) {
      auto c = std::make_unique<Case>();
      c->n = n;
      c->mode = mode;
      c->x = x;
      c->y = Matrix(o.batch, n, o.field);
      if (mode == "dense") {
        c->dense = random_unitary(n, o.seed, o.field);
      } else if (mode == "kron") {
        c->kron = random_unitary_factors(auto_2x2_shapes(n), o.seed, o.field);
      } else {
        throw ConfigError("unknown bench mode '" + mode + "' (dense, kron)");
      }
      cases.push_back(std::move(c));
    }
  }
  // Warm up and size each inner loop so one repetition is long enough to time.
  for (auto& c : cases) {
    for (;;) {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < c->inner; ++i) c->run();
      if (elapsed(t0) >= o.min_rep_seconds || c->inner >= (1u << 20)) break;
      c->inner *= 2;
    }
  }
  // Repetitions are interleaved across cases so slow stretches of machine time hit every size alike.
  for (std::size_t r = 0; r < o.reps; ++r) {
    for (auto& c : cases) {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < c->inner; ++i) c->run();
      c->times.push_back(elapsed(t0) / static_cast<double>(c->inner));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  std::vector<BenchRow> rows;
  for (const auto& c : cases) {
    const double med = median(c->times);
    std::vector<double> dev;
    for (double t : c->times) dev.push_back(std::abs(t - med));
    rows.push_back({c->n, c->mode, med, median(dev), o.reps});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "n,mode,median_s,mad_s,reps\n" << std::setprecision(8);
  for (const auto& r : rows) os << r.n << ',' << r.mode << ',' << r.median_s << ',' << r.mad_s << ',' << r.reps << '\n';
  return os.str();
}

std::vector<double> doubling_ratios(const std::vector<BenchRow>& rows, const std::string& mode) {
  std::vector<const BenchRow*> sel;
  for (const auto& r : rows) {
    if (r.mode == mode) sel.push_back(&r);
  }
  std::sort(sel.begin(), sel.end(), [](auto* a, auto* b) { return a->n < b->n; });
  std::vector<double> out;
  for (std::size_t i = 1; i < sel.size(); ++i) {
    if (sel[i]->n == 2 * sel[i - 1]->n) out.push_back(sel[i]->median_s / sel[i - 1]->median_s);
  }
  return out;
}

std::string diagnostics_json(const CellParameters& p) {
  json j;
  j["model"] = to_string(p.kind);
  j["field"] = to_string(p.field);
  j["hidden"] = p.hidden_dim;
  j["parameters"] = counts_json(p);
  j["spectral"] = spectral_json(p);
  return j.dump(2);
}

std::vector<SweepRow> amplitude_sweep(const RunConfig& base, const std::vector<double>& lambdas,
                                      std::ostream* log) {
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    RunConfig cfg = base;
    cfg.schedule.unitary_amplitude = lambda;
    std::ostringstream tag;
    tag << "lambda_" << lambda;
    cfg.out_dir = base.out_dir / tag.str();
    SweepRow row;
    row.lambda = lambda;
    try {
      if (log) *log << "sweep: lambda " << lambda << "\n";
      TrainOptions o;
      o.evaluate_test = false;
      o.log = log;
      const auto res = train(cfg, o);
      const auto report = spectral_report(res.final_params);
      row.residual = report.unitarity_residual;
      row.spectral_norm = report.spectral_norm;
      row.valid_metric = res.final_valid;
    } catch (const std::exception& e) {
      row.residual = row.spectral_norm = row.valid_metric = std::numeric_limits<double>::quiet_NaN();
      row.error = e.what();
      if (log) *log << "sweep: lambda " << lambda << " failed: " << e.what() << "\n";
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kru
