#include "kru/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include <json.hpp>

#include "kru/rng.hpp"

namespace kru {

Matrix TaskBatch::input_at(std::size_t t) const {
  Matrix x(batch, input_dim, Field::real);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = inputs.data() + (b * steps + t) * input_dim;
    Complex* dst = x.row(b);
    for (std::size_t d = 0; d < input_dim; ++d) dst[d] = src[d];
  }
  return x;
}

TaskBatch TaskBatch::slice(std::size_t t0, std::size_t t1) const {
  if (t0 > t1 || t1 > steps) throw DimensionError("TaskBatch::slice: bad step range");
  TaskBatch out;
  out.batch = batch;
  out.steps = t1 - t0;
  out.input_dim = input_dim;
  out.loss = loss;
  out.output_dim = output_dim;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * steps;
    out.inputs.insert(out.inputs.end(), inputs.begin() + (base + t0) * input_dim,
                      inputs.begin() + (base + t1) * input_dim);
    out.loss_mask.insert(out.loss_mask.end(), loss_mask.begin() + base + t0,
                         loss_mask.begin() + base + t1);
    if (!class_targets.empty()) {
      out.class_targets.insert(out.class_targets.end(), class_targets.begin() + base + t0,
                               class_targets.begin() + base + t1);
    }
    if (!real_targets.empty()) {
      out.real_targets.insert(out.real_targets.end(),
                              real_targets.begin() + (base + t0) * output_dim,
                              real_targets.begin() + (base + t1) * output_dim);
    }
  }
  return out;
}

std::size_t TaskBatch::loss_count() const {
  return static_cast<std::size_t>(std::count_if(loss_mask.begin(), loss_mask.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

void TaskBatch::validate() const {
  const std::size_t cells = batch * steps;
  if (inputs.size() != cells * input_dim) throw DimensionError("TaskBatch: inputs size mismatch");
  if (loss_mask.size() != cells) throw DimensionError("TaskBatch: mask length does not match steps");
  if (loss == LossKind::cross_entropy) {
    if (class_targets.size() != cells) throw DimensionError("TaskBatch: class target size mismatch");
    for (std::size_t i = 0; i < cells; ++i) {
      const int c = class_targets[i];
      if (loss_mask[i] != 0 && (c < 0 || static_cast<std::size_t>(c) >= output_dim)) {
        throw DimensionError("TaskBatch: class index " + std::to_string(c) +
                             " outside vocabulary of " + std::to_string(output_dim));
      }
    }
  } else if (real_targets.size() != cells * output_dim) {
    throw DimensionError("TaskBatch: regression target size mismatch");
  }
}

std::string batch_to_json(const TaskBatch& b) {
  nlohmann::json j;
  j["batch"] = b.batch;
  j["steps"] = b.steps;
  j["input_dim"] = b.input_dim;
  j["output_dim"] = b.output_dim;
  j["loss"] = b.loss == LossKind::cross_entropy ? "cross_entropy" : "mse";
  j["inputs"] = b.inputs;
  j["class_targets"] = b.class_targets;
  j["real_targets"] = b.real_targets;
  j["loss_mask"] = b.loss_mask;
  return j.dump();
}

namespace {

constexpr std::uint64_t kCopyStream = 0xC0;
constexpr std::uint64_t kAddingStream = 0xADD;

}  // namespace

TaskBatch gen_copy_batch(std::size_t T, std::size_t batch, std::uint64_t seed,
                         std::uint64_t first_index) {
  if (T < 1) throw std::invalid_argument("copy task needs T >= 1");
  const std::size_t len = T + 20;
  TaskBatch out;
  out.batch = batch;
  out.steps = len;
  out.input_dim = kCopyClasses;
  out.output_dim = kCopyClasses;
  out.loss = LossKind::cross_entropy;
  out.inputs.assign(batch * len * kCopyClasses, 0.0);
  out.class_targets.assign(batch * len, kCopyBlank);
  out.loss_mask.assign(batch * len, 1);
  for (std::size_t b = 0; b < batch; ++b) {
    Rng rng(seed ^ kCopyStream, Stream::train_data, first_index + b);
    std::vector<int> seq(len, kCopyBlank);
    for (std::size_t i = 0; i < kCopySymbols; ++i) seq[i] = 1 + static_cast<int>(rng.below(8));
    seq[T + 9] = kCopyDelimiter;
    for (std::size_t t = 0; t < len; ++t) {
      out.inputs[(b * len + t) * kCopyClasses + static_cast<std::size_t>(seq[t])] = 1.0;
    }
    for (std::size_t i = 0; i < kCopySymbols; ++i) out.class_targets[b * len + T + 10 + i] = seq[i];
  }
  return out;
}

double copy_memoryless_baseline(std::size_t T) {
  return 10.0 * std::log(8.0) / static_cast<double>(T + 20);
}

TaskBatch gen_adding_batch(std::size_t T, std::size_t batch, std::uint64_t seed,
                           std::uint64_t first_index) {
  if (T < 2) throw std::invalid_argument("adding task needs T >= 2");
  TaskBatch out;
  out.batch = batch;
  out.steps = T;
  out.input_dim = 2;
  out.output_dim = 1;
  out.loss = LossKind::mse;
  out.inputs.assign(batch * T * 2, 0.0);
  out.real_targets.assign(batch * T, 0.0);
  out.loss_mask.assign(batch * T, 0);
  const std::size_t half = T / 2;
  for (std::size_t b = 0; b < batch; ++b) {
    Rng rng(seed ^ kAddingStream, Stream::train_data, first_index + b);
    for (std::size_t t = 0; t < T; ++t) out.inputs[(b * T + t) * 2] = rng.uniform();
    const std::size_t first = rng.below(half);
    const std::size_t second = half + rng.below(T - half);
    out.inputs[(b * T + first) * 2 + 1] = 1.0;
    out.inputs[(b * T + second) * 2 + 1] = 1.0;
    out.real_targets[b * T + T - 1] = out.inputs[(b * T + first) * 2] + out.inputs[(b * T + second) * 2];
    out.loss_mask[b * T + T - 1] = 1;
  }
  return out;
}

double ImageDataset::pixel(std::size_t i, std::size_t t) const {
  const std::size_t src = permutation.empty() ? t : permutation[t];
  return pixels[i * sequence_length() + src] / 255.0;
}

ImageDataset ImageDataset::subset(std::size_t begin, std::size_t end) const {
  if (begin > end || end > count) throw std::out_of_range("ImageDataset::subset: bad range");
  ImageDataset out;
  out.count = end - begin;
  out.rows = rows;
  out.cols = cols;
  out.permutation = permutation;
  const std::size_t len = sequence_length();
  out.pixels.assign(pixels.begin() + begin * len, pixels.begin() + end * len);
  out.labels.assign(labels.begin() + begin, labels.begin() + end);
  return out;
}

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > buf.size()) throw DataError("truncated IDX header in " + path.string());
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace

ImageDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  const std::uint32_t img_magic = read_be32(img, 0, images);
  if (img_magic != kIdxImagesMagic) {
    throw DataError("bad IDX image magic " + std::to_string(img_magic) + " in " + images.string() +
                    " (expected 2051)");
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels);
  if (lab_magic != kIdxLabelsMagic) {
    throw DataError("bad IDX label magic " + std::to_string(lab_magic) + " in " + labels.string() +
                    " (expected 2049)");
  }
  ImageDataset d;
  d.count = read_be32(img, 4, images);
  d.rows = read_be32(img, 8, images);
  d.cols = read_be32(img, 12, images);
  const std::size_t label_count = read_be32(lab, 4, labels);
  if (label_count != d.count) {
    throw DataError("image/label count mismatch: " + std::to_string(d.count) + " images, " +
                    std::to_string(label_count) + " labels");
  }
  const std::size_t need = 16 + d.count * d.rows * d.cols;
  if (img.size() < need) throw DataError("truncated IDX image payload in " + images.string());
  if (lab.size() < 8 + d.count) throw DataError("truncated IDX label payload in " + labels.string());
  d.pixels.assign(img.begin() + 16, img.begin() + static_cast<std::ptrdiff_t>(need));
  d.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(d.count));
  for (auto l : d.labels) {
    if (l > 9) throw DataError("label " + std::to_string(l) + " outside 0..9 in " + labels.string());
  }
  return d;
}

void write_mnist_idx(const ImageDataset& data, const std::filesystem::path& images,
                     const std::filesystem::path& labels) {
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw DataError("cannot write IDX files");
  write_be32(img, kIdxImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(data.count));
  write_be32(img, static_cast<std::uint32_t>(data.rows));
  write_be32(img, static_cast<std::uint32_t>(data.cols));
  img.write(reinterpret_cast<const char*>(data.pixels.data()),
            static_cast<std::streamsize>(data.pixels.size()));
  write_be32(lab, kIdxLabelsMagic);
  write_be32(lab, static_cast<std::uint32_t>(data.count));
  lab.write(reinterpret_cast<const char*>(data.labels.data()),
            static_cast<std::streamsize>(data.labels.size()));
}

MnistSplit split_train_valid(const ImageDataset& data, std::size_t valid_count) {
  if (valid_count > data.count) throw DataError("validation split larger than the dataset");
  return {data.subset(0, data.count - valid_count), data.subset(data.count - valid_count, data.count)};
}

std::vector<std::uint32_t> pixel_permutation(std::size_t n, std::optional<std::uint64_t> seed) {
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  if (!seed) return perm;
  Rng rng(*seed, Stream::permutation);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

ImageDataset permute_pixels(ImageDataset data, std::optional<std::uint64_t> seed) {
  if (seed) {
    data.permutation = pixel_permutation(data.sequence_length(), seed);
  } else {
    data.permutation.clear();
  }
  return data;
}

TaskBatch mnist_batch(const ImageDataset& data, const std::vector<std::size_t>& indices) {
  const std::size_t len = data.sequence_length();
  TaskBatch out;
  out.batch = indices.size();
  out.steps = len;
  out.input_dim = 1;
  out.output_dim = 10;
  out.loss = LossKind::cross_entropy;
  out.inputs.resize(out.batch * len);
  out.class_targets.assign(out.batch * len, -1);
  out.loss_mask.assign(out.batch * len, 0);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::size_t i = indices[b];
    if (i >= data.count) throw std::out_of_range("mnist_batch: index past end of dataset");
    for (std::size_t t = 0; t < len; ++t) out.inputs[b * len + t] = data.pixel(i, t);
    out.class_targets[b * len + len - 1] = data.labels[i];
    out.loss_mask[b * len + len - 1] = 1;
  }
  return out;
}

std::vector<int> CorpusSplit::encode(const std::string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (unsigned char ch : text) {
    const int idx = vocab[ch];
    out.push_back(idx < 0 ? unk() : idx);
  }
  return out;
}

CorpusSplit build_corpus(const std::string& train, const std::string& valid, const std::string& test) {
  if (train.empty()) throw DataError("empty training corpus");
  CorpusSplit c;
  c.vocab.assign(256, -1);
  std::vector<bool> seen(256, false);
  for (unsigned char ch : train) seen[ch] = true;
  for (int b = 0; b < 256; ++b) {
    if (!seen[static_cast<std::size_t>(b)]) continue;
    c.vocab[static_cast<std::size_t>(b)] = static_cast<int>(c.symbols.size());
    c.symbols.push_back(static_cast<unsigned char>(b));
  }
  c.train = c.encode(train);
  c.valid = c.encode(valid);
  c.test = c.encode(test);
  return c;
}

CorpusSplit load_char_corpus(const std::filesystem::path& train, const std::filesystem::path& valid,
                             const std::filesystem::path& test) {
  auto slurp = [](const std::filesystem::path& p) {
    const auto bytes = read_file(p);
    return std::string(bytes.begin(), bytes.end());
  };
  return build_corpus(slurp(train), slurp(valid), slurp(test));
}

CharWindows::CharWindows(const std::vector<int>& stream, std::size_t vocab_size, std::size_t lanes,
                         std::size_t window)
    : stream_(&stream), vocab_size_(vocab_size), lanes_(lanes), window_(window) {
  if (lanes == 0 || window == 0) throw std::invalid_argument("CharWindows: lanes and window must be > 0");
  if (stream.empty()) throw DataError("CharWindows: empty stream");
  const std::size_t n = stream.size();
  const std::size_t base = n / lanes, extra = n % lanes;
  std::size_t pos = 0, longest = 0;
  for (std::size_t l = 0; l < lanes; ++l) {
    const std::size_t len = base + (l < extra ? 1 : 0);
    lane_begin_.push_back(pos);
    lane_len_.push_back(len);
    pos += len;
    longest = std::max(longest, len);
  }
  num_windows_ = (longest + window - 1) / window;
}

TaskBatch CharWindows::window(std::size_t k) const {
  const auto& s = *stream_;
  TaskBatch out;
  out.batch = lanes_;
  out.steps = window_;
  out.input_dim = vocab_size_;
  out.output_dim = vocab_size_;
  out.loss = LossKind::cross_entropy;
  out.inputs.assign(lanes_ * window_ * vocab_size_, 0.0);
  out.class_targets.assign(lanes_ * window_, -1);
  out.loss_mask.assign(lanes_ * window_, 0);
  for (std::size_t l = 0; l < lanes_; ++l) {
    for (std::size_t t = 0; t < window_; ++t) {
      const std::size_t off = k * window_ + t;
      if (off >= lane_len_[l]) break;
      const std::size_t pos = lane_begin_[l] + off;
      out.inputs[(l * window_ + t) * vocab_size_ + static_cast<std::size_t>(s[pos])] = 1.0;
      if (pos + 1 < s.size()) {
        out.class_targets[l * window_ + t] = s[pos + 1];
        out.loss_mask[l * window_ + t] = 1;
      }
    }
  }
  return out;
}

double bits_per_char(double nats) { return nats / std::numbers::ln2; }

}  // namespace kru
