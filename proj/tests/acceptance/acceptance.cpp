// Acceptance suite: one pass/fail line per criterion. `--only N` runs a single criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradcheck.hpp"
#include "kru/config.hpp"
#include "kru/diagnostics.hpp"
#include "kru/experiment.hpp"
#include "kru/kron.hpp"
#include "kru/training.hpp"

namespace {

using namespace kru;
using kru::testing::check_cell_gradients;
using kru::testing::finite_difference;
using kru::testing::max_rel_error;
using kru::testing::random_matrix;
using kru::testing::real_inner;
using kru::testing::rel_frobenius;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  std::filesystem::path data_dir;
  std::filesystem::path work_dir;
  bool verbose = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<FactorShape> random_shapes(Rng& rng, std::size_t max_f, std::size_t max_dim, bool square) {
  const std::size_t F = 1 + rng.below(max_f);
  std::vector<FactorShape> shapes;
  std::size_t n = 1, k = 1;
  for (std::size_t f = 0; f < F; ++f) {
    std::size_t p = 1 + rng.below(4);
    std::size_t q = square ? p : 1 + rng.below(4);
    while ((n * p > max_dim || k * q > max_dim) && (p > 1 || q > 1)) {
      if (p > 1) --p;
      if (square) q = p;
      else if (q > 1) --q;
    }
    n *= p;
    k *= q;
    shapes.push_back({p, q});
  }
  return shapes;
}

KroneckerMatrix random_kron(const std::vector<FactorShape>& shapes, Field f, Rng& rng) {
  std::vector<Matrix> factors;
  for (const auto& s : shapes) factors.push_back(random_matrix(s.p, s.q, f, rng));
  return KroneckerMatrix(std::move(factors));
}

// 1. kron_forward against expand-then-multiply.
Outcome kernel_oracle(const Settings&) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t rect = 0;
  for (std::uint64_t c = 0; c < 200; ++c) {
    Rng rng(c, Stream::probe, 1);
    const Field field = c % 2 ? Field::complex : Field::real;
    const auto shapes = random_shapes(rng, 4, 64, c % 3 == 0);
    for (const auto& s : shapes) rect += s.p != s.q;
    const auto w = random_kron(shapes, field, rng);
    const Matrix x = random_matrix(1 + rng.below(16), w.in_dim(), field, rng);
    const Matrix want = matmul(Op::none, x, Op::trans, kron_expand(w));
    worst = std::max(worst, rel_frobenius(kron_forward(x, w).first, want));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 10.0 && rect > 0,
          fmt("200 cases (%zu rectangular factors), worst relative Frobenius error %.2e (<= 1e-10), %.2f s (< 10 s)",
              rect, worst, t)};
}

// 2. Gradients against central finite differences.
CellShape toy_shape(CellKind kind) {
  CellShape s;
  s.kind = kind;
  s.field = kind == CellKind::kru ? Field::complex : Field::real;
  s.activation = default_activation(s.field);
  s.input_dim = 2;
  s.hidden_dim = kind == CellKind::rnn || kind == CellKind::lstm ? 4 : 8;
  s.output_dim = 3;
  return s;
}

void perturb(CellParameters& p, Rng& rng, double scale) {
  for (auto& v : parameters(p)) {
    for (auto& x : v.value->data()) {
      x += Complex(scale * rng.normal(), v.value->is_real() ? 0.0 : scale * rng.normal());
    }
  }
}

TaskBatch toy_batch(std::size_t batch, std::size_t steps, LossKind loss, std::size_t outputs, Rng& rng) {
  TaskBatch b;
  b.batch = batch;
  b.steps = steps;
  b.input_dim = 2;
  b.output_dim = outputs;
  b.loss = loss;
  b.inputs.resize(batch * steps * 2);
  for (auto& v : b.inputs) v = rng.normal();
  b.loss_mask.assign(batch * steps, 0);
  b.class_targets.assign(batch * steps, -1);
  b.real_targets.assign(batch * steps * outputs, 0.0);
  for (std::size_t i = 0; i < batch * steps; ++i) {
    b.loss_mask[i] = rng.uniform() < 0.6 ? 1 : 0;
    b.class_targets[i] = static_cast<int>(rng.below(outputs));
  }
  for (auto& v : b.real_targets) v = rng.normal();
  b.loss_mask[batch * steps - 1] = 1;
  return b;
}

Outcome gradient_correctness(const Settings& s) {
  const auto t0 = std::chrono::steady_clock::now();
  double kron = 0.0, pen = 0.0, cell = 0.0, bptt = 0.0;
  std::string cell_where, bptt_where;
  const CellKind kinds[] = {CellKind::rnn, CellKind::kru, CellKind::lstm, CellKind::kru_lstm};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const Field field : {Field::real, Field::complex}) {
      Rng rng(seed, Stream::probe, field == Field::complex);
      auto w = random_kron(random_shapes(rng, 3, 8, false), field, rng);
      Matrix x = random_matrix(3, w.in_dim(), field, rng);
      const Matrix gy = random_matrix(3, w.out_dim(), field, rng);
      const auto [y, cache] = kron_forward(x, w);
      const auto g = kron_backward(x, w, cache, gy);
      auto loss = [&] { return real_inner(gy, kron_apply(x, w)); };
      for (std::size_t k = 0; k < w.num_factors(); ++k) {
        kron = std::max(kron, max_rel_error(g.factor_grads[k], finite_difference(w.factor(k), loss)));
      }
      kron = std::max(kron, max_rel_error(g.input_grad, finite_difference(x, loss)));

      auto sq = random_kron(random_shapes(rng, 3, 8, true), field, rng);
      const auto pg = soft_unitary_grad(sq, 0.3);
      for (std::size_t k = 0; k < sq.num_factors(); ++k) {
        pen = std::max(pen, max_rel_error(pg[k], finite_difference(sq.factor(k), [&] {
                                            return soft_unitary_penalty(sq, 0.3);
                                          })));
      }
    }
    for (const CellKind kind : kinds) {
      auto p = init_parameters(toy_shape(kind), seed);
      Rng rng(seed, Stream::probe, 7);
      perturb(p, rng, 0.3);
      CellState prev = zero_state(p, 2);
      prev.h = random_matrix(2, p.hidden_dim, p.field, rng, 0.5);
      if (is_lstm(kind)) prev.c = random_matrix(2, p.hidden_dim, Field::real, rng, 0.5);
      const Matrix x = random_matrix(2, 2, Field::real, rng);
      CellState up = zero_state(p, 2);
      up.h = random_matrix(2, p.hidden_dim, p.field, rng);
      if (is_lstm(kind)) up.c = random_matrix(2, p.hidden_dim, Field::real, rng);
      auto loss = [&] {
        const CellState st = cell_forward(p, prev, x);
        return real_inner(up.h, st.h) + (is_lstm(kind) ? real_inner(up.c, st.c) : 0.0);
      };
      StepCache sc;
      cell_forward(p, prev, x, &sc);
      CellParameters grads = zeros_like(p);
      const CellState back = cell_backward(p, sc, up, grads);
      const auto r = check_cell_gradients(p, grads, loss);
      double e = std::max(r.worst, max_rel_error(back.h, finite_difference(prev.h, loss)));
      if (is_lstm(kind)) e = std::max(e, max_rel_error(back.c, finite_difference(prev.c, loss)));
      if (e >= cell) {
        cell = e;
        cell_where = std::string(to_string(kind)) + ":" + r.worst_name;
      }

      for (const LossKind lk : {LossKind::cross_entropy, LossKind::mse}) {
        CellShape sh = toy_shape(kind);
        sh.output_dim = lk == LossKind::mse ? 1 : 3;
        auto q = init_parameters(sh, seed);
        perturb(q, rng, 0.2);
        const TaskBatch batch = toy_batch(3, 6, lk, sh.output_dim, rng);
        BpttOptions opts;
        opts.unitary_amplitude = 0.05;
        opts.penalize_lstm = true;
        const auto res = bptt_loss_and_grads(q, batch, opts);
        const auto rb = check_cell_gradients(q, res.grads, [&] { return bptt_loss_and_grads(q, batch, opts).loss; });
        if (rb.worst >= bptt) {
          bptt = rb.worst;
          bptt_where = std::string(to_string(kind)) + ":" + rb.worst_name;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  if (s.verbose) std::cerr << "worst cell tensor " << cell_where << ", worst bptt tensor " << bptt_where << "\n";
  return {kron <= 1e-6 && pen <= 1e-6 && cell <= 1e-6 && bptt <= 1e-5 && t < 60.0,
          fmt("3 seeds; kron_backward %.1e, soft_unitary_grad %.1e, cell backward %.1e (<= 1e-6); "
              "full BPTT %.1e (<= 1e-5); %.1f s (< 60 s)",
              kron, pen, cell, bptt, t)};
}

// 3. Kronecker products of unitary factors are unitary.
Outcome unitarity_theorem(const Settings&) {
  double worst = 0.0;
  std::size_t largest = 0;
  for (std::uint64_t c = 0; c < 50; ++c) {
    Rng rng(c, Stream::probe, 3);
    std::vector<FactorShape> shapes;
    std::size_t n = 1;
    const std::size_t target = std::size_t{1} << (1 + rng.below(8));  // 2 .. 256
    while (n < target) {
      std::size_t p = 2 + rng.below(3);
      while (n * p > 256) --p;
      if (p < 2) break;
      shapes.push_back({p, p});
      n *= p;
    }
    const Field field = c % 2 ? Field::complex : Field::real;
    const Matrix w = kron_expand(random_unitary_factors(shapes, 1000 + c, field));
    Matrix e = matmul(Op::herm, w, Op::none, w);
    for (std::size_t i = 0; i < e.rows(); ++i) e(i, i) -= 1.0;
    double inf_norm = 0.0;  // max absolute row sum
    for (std::size_t i = 0; i < e.rows(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < e.cols(); ++j) row += std::abs(e(i, j));
      inf_norm = std::max(inf_norm, row);
    }
    worst = std::max(worst, inf_norm);
    largest = std::max(largest, n);
  }
  return {worst <= 1e-10, fmt("50 factor sets up to N = %zu, worst ||W^H W - I||_inf %.2e (<= 1e-10)", largest, worst)};
}

// 4. Recurrent parameter counts of all-2x2 complex KRUs.
Outcome parameter_accounting(const Settings&) {
  auto count = [](std::size_t n) {
    CellShape s;
    s.kind = CellKind::kru;
    s.field = Field::complex;
    s.activation = Activation::modrelu;
    s.hidden_dim = n;
    return recurrent_parameter_count(init_parameters(s, 1));
  };
  const std::size_t c512 = count(512), c128 = count(128);
  return {c512 == 72 && c128 == 56, fmt("N=512: %zu (want 72), N=128: %zu (want 56)", c512, c128)};
}

RunConfig synthetic_config(TaskKind task, std::size_t T, std::size_t hidden, const Settings& s,
                           const std::string& name) {
  RunConfig c;
  c.task.kind = task;
  c.task.T = T;
  c.model.kind = CellKind::kru;
  c.model.field = Field::complex;
  c.model.activation = Activation::modrelu;
  c.model.hidden = hidden;
  c.optimizer.kind = OptimizerKind::rmsprop;
  c.optimizer.learning_rate = 1e-3;
  c.optimizer.decay = 0.9;
  c.schedule.batch_size = 20;
  c.schedule.log_every = 500;
  c.seed = 1;
  c.out_dir = s.work_dir / name;
  return c;
}

TrainOptions train_options(const Settings& s) {
  TrainOptions o;
  o.log = s.verbose ? &std::cerr : nullptr;
  return o;
}

// 5. Copy memory, T = 100, frozen random-unitary KRU N = 64.
Outcome copy_memory(const Settings& s) {
  RunConfig c = synthetic_config(TaskKind::copy, 100, 64, s, "copy");
  c.model.frozen_recurrent = true;
  c.schedule.updates = 10000;
  c.schedule.eval_every = 500;
  const double baseline = copy_memoryless_baseline(100);
  // Validation decides when to stop; the test set is only scored once, with the best parameters.
  c.schedule.stop_at = 0.25 * baseline;
  const auto out = train(c, train_options(s));
  const double test = *out.test_metric;
  const double trainable = static_cast<double>(recurrent_parameter_count(out.final_params, true));
  return {test < 0.5 * baseline && out.updates <= 10000 && trainable == 0,
          fmt("test cross entropy %.4f < %.4f (half the memoryless baseline %.4f) after %zu updates; "
              "trainable recurrent parameters %.0f; %.0f s",
              test, 0.5 * baseline, baseline, out.updates, trainable, out.wallclock_s)};
}

// 6. Adding problem, T = 100, KRU N = 128 with 2x2 factors; lambda chosen on validation.
// Adam at lr 2e-3 with global-norm clipping at 1: at lr 1e-3 (Adam or RMSprop) the plateau at the
// constant predictor often outlasts the budget at this hidden size, and without clipping the higher
// rate occasionally blows up.
Outcome adding_problem(const Settings& s) {
  double best_valid = 0.0, chosen = 0.0, test = 0.0, total_s = 0.0;
  std::size_t updates = 0;
  bool have = false;
  std::ostringstream runs;
  for (const double lambda : {0.0, 1e-3}) {
    RunConfig c = synthetic_config(TaskKind::adding, 100, 128, s, fmt("adding_lambda_%g", lambda));
    c.optimizer.kind = OptimizerKind::adam;
    c.optimizer.learning_rate = 2e-3;
    c.schedule.gradient_clip = 1.0;
    c.schedule.updates = 30000;
    c.schedule.eval_every = 1000;
    c.schedule.unitary_amplitude = lambda;
    c.schedule.stop_at = 0.01;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto out = train(c, train_options(s));
      total_s += out.wallclock_s;
      runs << fmt(" [lambda %g: valid %.4f, test %.4f, %zu updates]", lambda, out.best_valid, *out.test_metric,
                  out.updates);
      if (!have || out.best_valid < best_valid) {
        have = true;
        best_valid = out.best_valid;
        chosen = lambda;
        test = *out.test_metric;
        updates = out.updates;
      }
    } catch (const DivergenceError& e) {
      total_s += seconds_since(t0);
      runs << fmt(" [lambda %g: diverged: %s]", lambda, e.what());
    }
  }
  return {have && test < 0.02 && updates <= 30000 && total_s <= 2700.0,
          fmt("lambda %g chosen on validation; test MSE %.4f (< 0.02, constant predictor 0.1667);%s %.0f s",
              chosen, test, runs.str().c_str(), total_s)};
}

// 7. Soft unitary amplitude sweep on the adding task, T = 50. Trained to convergence (valid MSE
// ~0.005) so the residuals are those of solved models rather than of models still on the plateau.
Outcome soft_unitary_trend(const Settings& s) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c = synthetic_config(TaskKind::adding, 50, 64, s, "sweep");
  c.optimizer.kind = OptimizerKind::adam;
  c.schedule.updates = 20000;
  c.schedule.eval_every = 20000;
  c.task.valid_size = 500;
  const std::vector<double> lambdas = {1e-6, 1e-4, 1e-2, 1e-1};
  const auto rows = amplitude_sweep(c, lambdas, s.verbose ? &std::cerr : nullptr);
  bool monotone = true, ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].error.empty()) ok = false;
    if (i > 0 && rows[i].residual > rows[i - 1].residual) monotone = false;
    detail << fmt(" [lambda %g: residual %.3e, norm %.4f]", rows[i].lambda, rows[i].residual, rows[i].spectral_norm);
  }
  const double gap = std::abs(rows.back().spectral_norm - 1.0);
  const double t = seconds_since(t0);
  return {ok && monotone && gap <= 0.1 && t <= 1800.0,
          fmt("residual non-increasing in lambda: %s; |norm - 1| at lambda 0.1 = %.4f (<= 0.1);%s %.0f s",
              monotone ? "yes" : "no", gap, detail.str().c_str(), t)};
}

// 8. Dense vs Kronecker products as N doubles.
Outcome complexity_scaling(const Settings&) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchOptions o;
  o.sizes = {256, 512, 1024, 2048};
  o.batch = 32;
  o.reps = 21;
  const auto rows = run_bench(o);
  const auto dense = doubling_ratios(rows, "dense");
  const auto kron = doubling_ratios(rows, "kron");
  double dmin = 1e300, kmax = 0.0;
  std::ostringstream d, k;
  for (double r : dense) {
    dmin = std::min(dmin, r);
    d << fmt(" %.2f", r);
  }
  for (double r : kron) {
    kmax = std::max(kmax, r);
    k << fmt(" %.2f", r);
  }
  const double t = seconds_since(t0);
  return {dense.size() == 3 && kron.size() == 3 && dmin >= 3.0 && kmax <= 2.6 && t <= 300.0,
          fmt("dense doubling ratios%s (>= 3.0); 2x2 Kronecker ratios%s (<= 2.6); medians of 21 reps; %.0f s",
              d.str().c_str(), k.str().c_str(), t)};
}

// 9. Gradient-flow bound with identity activation.
Outcome gradient_flow(const Settings&) {
  constexpr std::size_t T = 30, n = 32;
  CellShape sh;
  sh.kind = CellKind::rnn;
  sh.field = Field::real;
  sh.activation = Activation::identity;
  sh.input_dim = 2;
  sh.hidden_dim = n;
  sh.output_dim = 1;
  const TaskBatch batch = gen_adding_batch(T, 4, 9);

  auto p = init_parameters(sh, 5);
  Rng rng(5, Stream::probe);
  Matrix w = random_matrix(n, n, Field::real, rng);
  w = scale(w, 0.8 / spectral_norm(w).estimate);
  const double norm = spectral_norm(w).estimate;
  p.W = w;
  const auto trace = gradient_flow_trace(p, batch);
  double worst = 0.0;  // max over t of trace[t] / bound[t]
  for (std::size_t t = 0; t < T; ++t) {
    const double bound = trace.norms[T - 1] * std::pow(0.8, static_cast<double>(T - 1 - t));
    worst = std::max(worst, trace.norms[t] / bound);
  }

  const auto u = init_parameters(sh, 6);  // orthogonal recurrent matrix
  const auto tu = gradient_flow_trace(u, batch);
  double drift = 0.0;
  for (double v : tu.norms) drift = std::max(drift, std::abs(v - tu.norms.back()) / tu.norms.back());
  return {worst <= 1.0 + 1e-6 && drift <= 1e-8,
          fmt("||W||_2 = %.12f; max trace[t] / (trace[T-1] 0.8^(T-1-t)) = %.6f (<= 1 + 1e-6); "
              "unitary trace relative spread %.2e (<= 1e-8)",
              norm, worst, drift)};
}

// 10. Permuted pixel MNIST on a 5K-image subset.
Outcome mnist_smoke(const Settings& s) {
  RunConfig c = synthetic_config(TaskKind::mnist_permuted, 0, 128, s, "pmnist");
  c.task.mnist_images = s.data_dir / "train-images-idx3-ubyte";
  c.task.mnist_labels = s.data_dir / "train-labels-idx1-ubyte";
  c.task.mnist_limit = 5000;
  c.task.mnist_valid = 1000;
  c.schedule.epochs = 3;
  c.schedule.log_every = 50;
  TrainOptions o = train_options(s);
  o.evaluate_test = false;
  const auto out = train(c, o);
  return {out.best_valid >= 0.30 && out.wallclock_s <= 1800.0,
          fmt("validation accuracy %.3f (>= 0.30; chance 0.10) after 3 epochs over 4000 training images; %.0f s",
              out.best_valid, out.wallclock_s)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(const Settings&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  Settings s;
  s.data_dir = KRU_MNIST_DIR;
  s.work_dir = std::filesystem::temp_directory_path() / "kru_acceptance";
  std::string data_dir = s.data_dir.string(), work_dir = s.work_dir.string();
  app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--mnist-dir", data_dir, "Directory with the MNIST IDX files");
  app.add_option("--work-dir", work_dir, "Scratch directory for training artifacts");
  app.add_flag("-v,--verbose", s.verbose, "Progress on stderr");
  CLI11_PARSE(app, argc, argv);
  s.data_dir = data_dir;
  s.work_dir = work_dir;

  const std::vector<Criterion> all = {
      {1, "kernel-oracle equivalence", kernel_oracle},
      {2, "gradient correctness", gradient_correctness},
      {3, "unitarity of Kronecker products", unitarity_theorem},
      {4, "parameter accounting", parameter_accounting},
      {5, "copy memory T=100", copy_memory},
      {6, "adding problem T=100", adding_problem},
      {7, "soft unitary trend", soft_unitary_trend},
      {8, "complexity scaling", complexity_scaling},
      {9, "gradient-flow bound", gradient_flow},
      {10, "permuted MNIST smoke", mnist_smoke},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    Outcome r;
    try {
      r = c.run(s);
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << r.detail
              << std::endl;
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
