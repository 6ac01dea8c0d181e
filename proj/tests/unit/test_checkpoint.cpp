#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kru/checkpoint.hpp"
#include "kru/tasks.hpp"

namespace kru {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("kru_ckpt_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Checkpoint sample(CellKind kind, Field field) {
  CellShape s;
  s.kind = kind;
  s.field = field;
  s.activation = default_activation(field);
  s.input_dim = 3;
  s.hidden_dim = 8;
  s.output_dim = 2;
  Checkpoint c;
  c.config_hash = "0123456789abcdef";
  c.task = "adding";
  c.metric = "mse";
  c.step = 40;
  c.epoch = 2;
  c.seed = 9;
  c.counter = 40;
  c.learning_rate = 3e-4;
  c.metric_history = {0.2, 0.1, 0.1 / 3.0};
  c.best_metric = 0.1 / 3.0;
  c.best_step = 40;
  c.params = init_parameters(s, 5);
  // Some awkward values: negative zero, subnormal, tiny and huge magnitudes.
  auto views = parameters(c.params);
  auto d = views.front().value->data();
  d[0] = Complex(-0.0, field == Field::complex ? 5e-324 : 0.0);
  d[1] = Complex(1e300, 0.0);
  Optimizer opt(OptimizerConfig{}, c.params);
  opt.step(c.params, zeros_like(c.params));
  c.optimizer = snapshot(opt);
  return c;
}

class CheckpointRoundTrip : public ::testing::TestWithParam<std::pair<CellKind, Field>> {};

TEST_P(CheckpointRoundTrip, BitwiseParametersAndBytePayload) {
  const auto [kind, field] = GetParam();
  const fs::path dir = fresh_dir(std::string(to_string(kind)) + to_string(field));
  const Checkpoint a = sample(kind, field);
  save_checkpoint(dir / "a.json", a);
  const Checkpoint b = load_checkpoint(dir / "a.json");
  save_checkpoint(dir / "b.json", b);
  EXPECT_EQ(slurp(dir / "a.bin"), slurp(dir / "b.bin"));
  EXPECT_EQ(parameter_payload(a.params), parameter_payload(b.params));

  const auto va = parameters(a.params);
  const auto vb = parameters(b.params);
  ASSERT_EQ(va.size(), vb.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    EXPECT_EQ(va[i].name, vb[i].name);
    EXPECT_EQ(va[i].frozen, vb[i].frozen);
    ASSERT_EQ(va[i].value->data().size(), vb[i].value->data().size());
    EXPECT_EQ(0, std::memcmp(va[i].value->data().data(), vb[i].value->data().data(),
                             va[i].value->data().size() * sizeof(Complex)))
        << va[i].name;
  }
  EXPECT_EQ(b.config_hash, a.config_hash);
  EXPECT_EQ(b.step, a.step);
  EXPECT_EQ(b.metric_history, a.metric_history);
  EXPECT_EQ(b.best_metric, a.best_metric);
  EXPECT_EQ(b.learning_rate, a.learning_rate);
  ASSERT_TRUE(b.optimizer.has_value());
  EXPECT_EQ(b.optimizer->steps, a.optimizer->steps);
}

INSTANTIATE_TEST_SUITE_P(Kinds, CheckpointRoundTrip,
                         ::testing::Values(std::pair{CellKind::rnn, Field::real},
                                           std::pair{CellKind::kru, Field::complex},
                                           std::pair{CellKind::lstm, Field::real},
                                           std::pair{CellKind::kru_lstm, Field::real}));

TEST(Checkpoint, PayloadIsLittleEndianFloat64InDeclarationOrder) {
  const Checkpoint c = sample(CellKind::rnn, Field::real);
  const std::string bytes = parameter_payload(c.params);
  std::size_t values = 0;
  for (const auto& v : parameters(c.params)) values += v.value->data().size();
  ASSERT_EQ(bytes.size(), values * 8);  // real tensors store one double per entry
  // The first stored value is the first entry of the first declared tensor (-0.0).
  const unsigned char neg_zero[8] = {0, 0, 0, 0, 0, 0, 0, 0x80};
  EXPECT_EQ(0, std::memcmp(bytes.data(), neg_zero, 8));
}

TEST(Checkpoint, RestoredOptimizerContinuesIdentically) {
  const fs::path dir = fresh_dir("opt");
  Checkpoint c = sample(CellKind::kru, Field::complex);
  save_checkpoint(dir / "c.json", c);
  Checkpoint r = load_checkpoint(dir / "c.json");
  Optimizer o1 = restore(*c.optimizer, c.params);
  Optimizer o2 = restore(*r.optimizer, r.params);
  CellParameters g = zeros_like(c.params);
  for (auto& v : parameters(g)) {
    for (auto& x : v.value->data()) x = Complex(0.25, -0.5);
  }
  o1.step(c.params, g);
  o2.step(r.params, g);
  EXPECT_EQ(parameter_payload(c.params), parameter_payload(r.params));
}

TEST(Checkpoint, CorruptOrMissingFilesAreDataErrors) {
  const fs::path dir = fresh_dir("bad");
  EXPECT_THROW(load_checkpoint(dir / "missing.json"), DataError);
  save_checkpoint(dir / "c.json", sample(CellKind::rnn, Field::real));
  const std::string bin = slurp(dir / "c.bin");
  std::ofstream(dir / "c.bin", std::ios::binary | std::ios::trunc) << bin.substr(0, bin.size() - 8);
  EXPECT_THROW(load_checkpoint(dir / "c.json"), DataError);
  std::ofstream(dir / "c.json", std::ios::trunc) << "{\"format\": \"kru-checkpoint\"";
  EXPECT_THROW(load_checkpoint(dir / "c.json"), DataError);
}

TEST(Checkpoint, AtomicWriteLeavesNoTemporaries) {
  const fs::path dir = fresh_dir("atomic");
  write_file_atomic(dir / "sub" / "x.csv", "a,b\n1,2\n");
  write_file_atomic(dir / "sub" / "x.csv", "a,b\n3,4\n");
  EXPECT_EQ(slurp(dir / "sub" / "x.csv"), "a,b\n3,4\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++files;
  EXPECT_EQ(files, 1u);
}

}  // namespace
}  // namespace kru
