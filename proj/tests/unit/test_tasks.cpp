#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "kru/tasks.hpp"

using namespace kru;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kru_test_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

int argmax_input(const TaskBatch& b, std::size_t r, std::size_t t) {
  for (std::size_t d = 0; d < b.input_dim; ++d) {
    if (b.input(r, t, d) == 1.0) return static_cast<int>(d);
  }
  return -1;
}

ImageDataset tiny_images(std::size_t count) {
  ImageDataset d;
  d.count = count;
  d.rows = 28;
  d.cols = 28;
  d.pixels.resize(count * 784);
  d.labels.resize(count);
  for (std::size_t i = 0; i < d.pixels.size(); ++i) d.pixels[i] = static_cast<std::uint8_t>(i % 256);
  for (std::size_t i = 0; i < count; ++i) d.labels[i] = static_cast<std::uint8_t>(i % 10);
  return d;
}

}  // namespace

TEST(CopyTask, Layout) {
  const std::size_t T = 30;
  const TaskBatch b = gen_copy_batch(T, 5, 1);
  b.validate();
  EXPECT_EQ(b.steps, T + 20);
  EXPECT_EQ(b.input_dim, 10u);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t t = 0; t < b.steps; ++t) {
      const int in = argmax_input(b, r, t);
      if (t < 10) {
        EXPECT_GE(in, 1);
        EXPECT_LE(in, 8);
        EXPECT_EQ(b.class_target(r, T + 10 + t), in);
      } else if (t == T + 9) {
        EXPECT_EQ(in, kCopyDelimiter);
      } else {
        EXPECT_EQ(in, kCopyBlank);
      }
      if (t < T + 10) EXPECT_EQ(b.class_target(r, t), kCopyBlank);
      EXPECT_TRUE(b.masked(r, t));
    }
  }
}

TEST(CopyTask, BaselineAndDeterminism) {
  EXPECT_NEAR(copy_memoryless_baseline(100), 10.0 * std::log(8.0) / 120.0, 1e-15);
  EXPECT_NEAR(copy_memoryless_baseline(100), 0.17329, 1e-5);
  const TaskBatch a = gen_copy_batch(10, 4, 7), b = gen_copy_batch(10, 4, 7);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.class_targets, b.class_targets);
  // Sample i depends on (seed, index) only.
  const TaskBatch c = gen_copy_batch(10, 2, 7, 2);
  EXPECT_EQ(std::vector<int>(a.class_targets.begin() + 2 * 30, a.class_targets.end()), c.class_targets);
}

TEST(CopyTask, SymbolMarginals) {
  std::array<std::size_t, 10> counts{};
  const TaskBatch b = gen_copy_batch(1, 10000, 3);
  for (std::size_t r = 0; r < b.batch; ++r) {
    for (std::size_t t = 0; t < 10; ++t) ++counts[argmax_input(b, r, t)];
  }
  for (int k = 1; k <= 8; ++k) EXPECT_NEAR(counts[k] / 100000.0, 0.125, 0.01);
}

TEST(AddingTask, Layout) {
  const std::size_t T = 20;
  const TaskBatch b = gen_adding_batch(T, 50, 2);
  b.validate();
  EXPECT_EQ(b.input_dim, 2u);
  EXPECT_EQ(b.loss, LossKind::mse);
  for (std::size_t r = 0; r < b.batch; ++r) {
    std::vector<std::size_t> marks;
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double v = b.input(r, t, 0);
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
      if (b.input(r, t, 1) == 1.0) {
        marks.push_back(t);
        sum += v;
      } else {
        EXPECT_EQ(b.input(r, t, 1), 0.0);
      }
      EXPECT_EQ(b.masked(r, t), t == T - 1);
    }
    ASSERT_EQ(marks.size(), 2u);
    EXPECT_LT(marks[0], T / 2);
    EXPECT_GE(marks[1], T / 2);
    const double target = b.real_targets[r * T + T - 1];
    EXPECT_DOUBLE_EQ(target, sum);
    EXPECT_GE(target, 0.0);
    EXPECT_LE(target, 2.0);
  }
}

TEST(AddingTask, ConstantPredictorMse) {
  const TaskBatch b = gen_adding_batch(10, 100000, 4);
  double s = 0.0;
  for (std::size_t r = 0; r < b.batch; ++r) {
    const double e = b.real_targets[r * 10 + 9] - 1.0;
    s += e * e;
  }
  EXPECT_NEAR(s / b.batch, 1.0 / 6.0, 0.003);
}

TEST(AddingTask, MarkerPositionsUniform) {
  const std::size_t T = 20, n = 100000;
  const TaskBatch b = gen_adding_batch(T, n, 5);
  std::vector<double> first(T / 2, 0.0), second(T / 2, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t t = 0; t < T; ++t) {
      if (b.input(r, t, 1) != 1.0) continue;
      (t < T / 2 ? first[t] : second[t - T / 2]) += 1.0;
    }
  }
  // Chi-square critical value for 9 degrees of freedom at p = 0.001.
  for (const auto* counts : {&first, &second}) {
    const double expected = static_cast<double>(n) / (T / 2);
    double chi2 = 0.0;
    for (double c : *counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 27.877);
  }
}

TEST(Mnist, RoundTripAndScaling) {
  const auto dir = temp_dir("mnist");
  ImageDataset d = tiny_images(12);
  d.pixels[0] = 255;
  write_mnist_idx(d, dir / "img", dir / "lbl");
  const ImageDataset r = load_mnist_idx(dir / "img", dir / "lbl");
  EXPECT_EQ(r.count, 12u);
  EXPECT_EQ(r.sequence_length(), 784u);
  EXPECT_EQ(r.pixels, d.pixels);
  EXPECT_EQ(r.labels, d.labels);
  EXPECT_EQ(r.pixel(0, 0), 1.0);
  std::ifstream in(dir / "img", std::ios::binary);
  unsigned char magic[4];
  in.read(reinterpret_cast<char*>(magic), 4);
  EXPECT_EQ((magic[2] << 8) | magic[3], 2051);
}

TEST(Mnist, Errors) {
  const auto dir = temp_dir("mnist_err");
  write_mnist_idx(tiny_images(3), dir / "img", dir / "lbl");
  EXPECT_THROW(load_mnist_idx(dir / "lbl", dir / "lbl"), DataError);
  EXPECT_THROW(load_mnist_idx(dir / "img", dir / "img"), DataError);
  EXPECT_THROW(load_mnist_idx(dir / "missing", dir / "lbl"), DataError);
  {
    std::ifstream in(dir / "img", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(dir / "short", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 10));
  }
  EXPECT_THROW(load_mnist_idx(dir / "short", dir / "lbl"), DataError);
  write_mnist_idx(tiny_images(4), dir / "img4", dir / "lbl4");
  EXPECT_THROW(load_mnist_idx(dir / "img", dir / "lbl4"), DataError);
}

TEST(Mnist, PermutationAndSplit) {
  const auto p = pixel_permutation(784, 9);
  std::vector<std::uint32_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 784; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(pixel_permutation(784, 9), p);
  EXPECT_NE(pixel_permutation(784, 10), p);
  const auto id = pixel_permutation(784, std::nullopt);
  for (std::uint32_t i = 0; i < 784; ++i) EXPECT_EQ(id[i], i);

  const ImageDataset d = permute_pixels(tiny_images(10), 9);
  const MnistSplit s = split_train_valid(d, 3);
  EXPECT_EQ(s.train.count, 7u);
  EXPECT_EQ(s.valid.count, 3u);
  EXPECT_EQ(s.train.permutation, s.valid.permutation);
  const ImageDataset plain = tiny_images(10);
  for (std::size_t t = 0; t < 784; t += 97) {
    EXPECT_EQ(s.valid.pixel(0, t), plain.pixel(7, p[t]));
  }
  const TaskBatch b = mnist_batch(s.train, {0, 4});
  b.validate();
  EXPECT_EQ(b.steps, 784u);
  EXPECT_EQ(b.input_dim, 1u);
  EXPECT_EQ(b.class_target(1, 783), 4);
  EXPECT_EQ(b.loss_count(), 2u);
}

TEST(CharCorpus, Vocabulary) {
  const CorpusSplit c = build_corpus("abab", "abc", "b");
  EXPECT_EQ(c.symbols.size(), 2u);
  EXPECT_EQ(c.vocab_size(), 3u);
  EXPECT_EQ(c.valid.back(), c.unk());
  EXPECT_THROW(build_corpus("", "a", "a"), DataError);
  EXPECT_NEAR(bits_per_char(std::log(50.0)), std::log2(50.0), 1e-14);
}

TEST(CharCorpus, WindowsCoverEveryCharacterOnce) {
  std::string text;
  for (int i = 0; i < 1003; ++i) text.push_back(static_cast<char>('a' + (i * 7) % 13));
  const CorpusSplit c = build_corpus(text, "ab", "ab");
  const CharWindows w(c.train, c.vocab_size(), 5, 30);
  std::size_t inputs = 0, targets = 0;
  for (std::size_t k = 0; k < w.num_windows(); ++k) {
    const TaskBatch b = w.window(k);
    b.validate();
    for (std::size_t r = 0; r < b.batch; ++r) {
      for (std::size_t t = 0; t < b.steps; ++t) {
        double s = 0.0;
        for (std::size_t d = 0; d < b.input_dim; ++d) s += b.input(r, t, d);
        inputs += s == 1.0;
        targets += b.masked(r, t);
      }
    }
  }
  EXPECT_EQ(inputs, c.train.size());
  EXPECT_EQ(targets, c.train.size() - 1);
}

TEST(CharCorpus, LoadsFiles) {
  const auto dir = temp_dir("corpus");
  for (const char* name : {"train.txt", "valid.txt", "test.txt"}) {
    std::ofstream(dir / name) << "hello world\n";
  }
  const CorpusSplit c = load_char_corpus(dir / "train.txt", dir / "valid.txt", dir / "test.txt");
  EXPECT_EQ(c.train.size(), 12u);
  EXPECT_THROW(load_char_corpus(dir / "nope.txt", dir / "valid.txt", dir / "test.txt"), DataError);
}

TEST(TaskBatch, JsonSnapshot) {
  const std::string j = batch_to_json(gen_adding_batch(4, 1, 1));
  EXPECT_NE(j.find("\"inputs\""), std::string::npos);
  EXPECT_NE(j.find("\"loss_mask\""), std::string::npos);
}
