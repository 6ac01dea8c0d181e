#include "kru/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kru {

using nlohmann::json;

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::copy: return "copy";
    case TaskKind::adding: return "adding";
    case TaskKind::mnist: return "mnist";
    case TaskKind::mnist_permuted: return "mnist-permuted";
    case TaskKind::charlm: return "charlm";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  for (TaskKind k : {TaskKind::copy, TaskKind::adding, TaskKind::mnist, TaskKind::mnist_permuted,
                     TaskKind::charlm}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown task '" + s + "' (copy, adding, mnist, mnist-permuted, charlm)");
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(j_.at(key), key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(j_.at(key), key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name(key));
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name(key) + "'");
    }
  }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(name(key) + ": expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(name(key) + ": expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(name(key) + ": expected a number");
      return v.get<T>();
    } else {
      if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
        throw ConfigError(name(key) + ": expected a non-negative integer");
      }
      return static_cast<T>(v.get<unsigned long long>());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<FactorShape> parse_shapes(const json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() != "auto-2x2") {
      throw ConfigError(where + ": expected \"auto-2x2\" or a list of [p, q] pairs");
    }
    return {};
  }
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty list of [p, q]");
  std::vector<FactorShape> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        e[0].get<long long>() < 1 || e[1].get<long long>() < 1) {
      throw ConfigError(where + ": every factor must be [p, q] with positive integers");
    }
    out.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  return out;
}

void check_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(what + " must be > 0");
}

void validate(RunConfig& cfg) {
  const auto& m = cfg.model;
  const auto& s = cfg.schedule;
  if (m.hidden == 0) throw ConfigError("model.hidden must be >= 1");
  if (is_lstm(m.kind) && m.field != Field::real) {
    throw ConfigError("model.field: LSTM variants are real-valued");
  }
  if (m.field == Field::real && m.activation == Activation::modrelu) {
    throw ConfigError("model.activation: modrelu needs a complex field");
  }
  if (is_lstm(m.kind) && m.activation != Activation::tanh) {
    throw ConfigError("model.activation: LSTM variants use tanh");
  }
  if (is_kronecker(m.kind)) {
    std::size_t p = 1, q = 1;
    if (m.factor_shapes.empty()) {
      if (m.hidden < 2 || (m.hidden & (m.hidden - 1)) != 0) {
        throw ConfigError("model.factor_shapes: auto-2x2 needs a power-of-two hidden size, got " +
                          std::to_string(m.hidden));
      }
    } else {
      for (const auto& f : m.factor_shapes) {
        p *= f.p;
        q *= f.q;
      }
      if (p != m.hidden || q != m.hidden) {
        throw ConfigError("model.factor_shapes: factor products " + std::to_string(p) + "x" +
                          std::to_string(q) + " must equal hidden size " + std::to_string(m.hidden));
      }
    }
  } else if (!m.factor_shapes.empty()) {
    throw ConfigError("model.factor_shapes only applies to kru and kru-lstm");
  }
  if (m.frozen_recurrent && s.unitary_amplitude > 0.0) {
    throw ConfigError("schedule.unitary_amplitude has no effect on a frozen recurrent matrix");
  }
  if (s.batch_size == 0) throw ConfigError("schedule.batch_size must be >= 1");
  if (s.updates == 0 && s.epochs == 0) throw ConfigError("schedule: set updates or epochs");
  if (s.log_every == 0) throw ConfigError("schedule.log_every must be >= 1");
  if (s.eval_batch == 0) throw ConfigError("schedule.eval_batch must be >= 1");
  if (s.unitary_amplitude < 0.0) throw ConfigError("schedule.unitary_amplitude must be >= 0");
  if (!(s.lr_decay_factor > 0.0 && s.lr_decay_factor <= 1.0)) {
    throw ConfigError("schedule.lr_decay_factor must be in (0, 1]");
  }
  if (s.gradient_clip) check_positive(*s.gradient_clip, "schedule.gradient_clip");
  check_positive(cfg.optimizer.learning_rate, "optimizer.learning_rate");
  check_positive(cfg.optimizer.epsilon, "optimizer.epsilon");
  if (cfg.threads == 0) throw ConfigError("threads must be >= 1");

  const auto& t = cfg.task;
  switch (t.kind) {
    case TaskKind::copy:
    case TaskKind::adding:
      if (t.T < (t.kind == TaskKind::adding ? 2u : 1u)) throw ConfigError("task.T is too small");
      if (t.train_size == 0 || t.valid_size == 0) {
        throw ConfigError("task.train_size and task.valid_size must be >= 1");
      }
      break;
    case TaskKind::mnist:
    case TaskKind::mnist_permuted:
      if (t.mnist_images.empty() || t.mnist_labels.empty()) {
        throw ConfigError("task.images and task.labels are required for MNIST tasks");
      }
      if (t.mnist_test_images.empty() != t.mnist_test_labels.empty()) {
        throw ConfigError("task.test_images and task.test_labels must be given together");
      }
      break;
    case TaskKind::charlm:
      if (t.corpus_train.empty() || t.corpus_valid.empty() || t.corpus_test.empty()) {
        throw ConfigError("task.train, task.valid and task.test corpus paths are required");
      }
      if (s.bptt_window == 0) throw ConfigError("schedule.bptt_window must be >= 1 for charlm");
      break;
  }
  if (m.input_dim && t.kind != TaskKind::charlm && *m.input_dim != task_input_dim(cfg)) {
    throw ConfigError("model.input_dim " + std::to_string(*m.input_dim) + " does not match task input " +
                      std::to_string(task_input_dim(cfg)));
  }
  if (m.output_dim && t.kind != TaskKind::charlm && *m.output_dim != task_output_dim(cfg)) {
    throw ConfigError("model.output_dim " + std::to_string(*m.output_dim) +
                      " does not match task output " + std::to_string(task_output_dim(cfg)));
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section root(j, "");
  cfg.seed = root.get<std::uint64_t>("seed", 1);
  cfg.threads = root.get<unsigned>("threads", 1);
  cfg.out_dir = resolve(base, root.get<std::string>("out_dir", "runs/default"));

  {
    Section t = root.child("task");
    if (!t.has("name")) throw ConfigError("task.name is required");
    auto& tc = cfg.task;
    try {
      tc.kind = task_kind_from_string(t.get<std::string>("name", ""));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("task.name: ") + e.what());
    }
    tc.T = t.get<std::size_t>("T", tc.T);
    tc.train_size = t.get<std::size_t>("train_size", tc.train_size);
    tc.valid_size = t.get<std::size_t>("valid_size", tc.valid_size);
    tc.test_size = t.get<std::size_t>("test_size", tc.test_size);
    tc.mnist_images = resolve(base, t.get<std::string>("images", ""));
    tc.mnist_labels = resolve(base, t.get<std::string>("labels", ""));
    tc.mnist_test_images = resolve(base, t.get<std::string>("test_images", ""));
    tc.mnist_test_labels = resolve(base, t.get<std::string>("test_labels", ""));
    tc.mnist_valid = t.get<std::size_t>("valid_count", tc.mnist_valid);
    tc.mnist_limit = t.get<std::size_t>("limit", tc.mnist_limit);
    tc.permutation_seed = t.optional<std::uint64_t>("permutation_seed");
    tc.corpus_train = resolve(base, t.get<std::string>("train", ""));
    tc.corpus_valid = resolve(base, t.get<std::string>("valid", ""));
    tc.corpus_test = resolve(base, t.get<std::string>("test", ""));
    t.finish();
  }
  {
    Section m = root.child("model");
    auto& mc = cfg.model;
    try {
      mc.kind = cell_kind_from_string(m.get<std::string>("kind", "kru"));
      const std::string default_field = mc.kind == CellKind::kru ? "complex" : "real";
      mc.field = field_from_string(m.get<std::string>("field", default_field));
      const std::string default_act = is_lstm(mc.kind) ? "tanh" : to_string(default_activation(mc.field));
      mc.activation = activation_from_string(m.get<std::string>("activation", default_act));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    mc.hidden = m.get<std::size_t>("hidden", mc.hidden);
    mc.input_dim = m.optional<std::size_t>("input_dim");
    mc.output_dim = m.optional<std::size_t>("output_dim");
    if (m.has("factor_shapes")) mc.factor_shapes = parse_shapes(m.raw("factor_shapes"), "model.factor_shapes");
    mc.frozen_recurrent = m.get<bool>("frozen_recurrent", false);
    mc.penalize_lstm = m.get<bool>("penalize_lstm", false);
    m.finish();
  }
  {
    Section o = root.child("optimizer");
    auto& oc = cfg.optimizer;
    try {
      oc.kind = optimizer_kind_from_string(o.get<std::string>("kind", "rmsprop"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("optimizer.kind: ") + e.what());
    }
    oc.learning_rate = o.get<double>("learning_rate", oc.learning_rate);
    oc.decay = o.get<double>("decay", oc.decay);
    oc.beta1 = o.get<double>("beta1", oc.beta1);
    oc.beta2 = o.get<double>("beta2", oc.beta2);
    oc.epsilon = o.get<double>("epsilon", oc.epsilon);
    o.finish();
  }
  {
    Section s = root.child("schedule");
    auto& sc = cfg.schedule;
    sc.updates = s.get<std::size_t>("updates", sc.updates);
    sc.epochs = s.get<std::size_t>("epochs", sc.epochs);
    sc.batch_size = s.get<std::size_t>("batch_size", sc.batch_size);
    if (s.has("bptt_window")) {
      const json& w = s.raw("bptt_window");
      if (w.is_string() && w.get<std::string>() == "full") {
        sc.bptt_window = 0;
      } else {
        sc.bptt_window = s.get<std::size_t>("bptt_window", 0);
      }
    }
    sc.lr_decay_factor = s.get<double>("lr_decay_factor", sc.lr_decay_factor);
    sc.plateau = s.get<bool>("plateau", sc.plateau);
    sc.gradient_clip = s.optional<double>("gradient_clip");
    sc.unitary_amplitude = s.get<double>("unitary_amplitude", sc.unitary_amplitude);
    sc.log_every = s.get<std::size_t>("log_every", sc.log_every);
    sc.eval_every = s.get<std::size_t>("eval_every", sc.eval_every);
    sc.checkpoint_every = s.get<std::size_t>("checkpoint_every", sc.checkpoint_every);
    sc.eval_batch = s.get<std::size_t>("eval_batch", sc.eval_batch);
    sc.stop_at = s.optional<double>("stop_at");
    s.finish();
  }
  root.finish();
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

namespace {

json shapes_json(const std::vector<FactorShape>& shapes) {
  if (shapes.empty()) return "auto-2x2";
  json a = json::array();
  for (const auto& s : shapes) a.push_back({s.p, s.q});
  return a;
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir.string();
  j["task"] = {{"name", to_string(c.task.kind)},
               {"T", c.task.T},
               {"train_size", c.task.train_size},
               {"valid_size", c.task.valid_size},
               {"test_size", c.task.test_size},
               {"images", c.task.mnist_images.string()},
               {"labels", c.task.mnist_labels.string()},
               {"test_images", c.task.mnist_test_images.string()},
               {"test_labels", c.task.mnist_test_labels.string()},
               {"valid_count", c.task.mnist_valid},
               {"limit", c.task.mnist_limit},
               {"permutation_seed", opt_json(c.task.permutation_seed)},
               {"train", c.task.corpus_train.string()},
               {"valid", c.task.corpus_valid.string()},
               {"test", c.task.corpus_test.string()}};
  j["model"] = {{"kind", to_string(c.model.kind)},
                {"field", to_string(c.model.field)},
                {"hidden", c.model.hidden},
                {"input_dim", opt_json(c.model.input_dim)},
                {"output_dim", opt_json(c.model.output_dim)},
                {"factor_shapes", shapes_json(c.model.factor_shapes)},
                {"activation", to_string(c.model.activation)},
                {"frozen_recurrent", c.model.frozen_recurrent},
                {"penalize_lstm", c.model.penalize_lstm}};
  j["optimizer"] = {{"kind", to_string(c.optimizer.kind)},
                    {"learning_rate", c.optimizer.learning_rate},
                    {"decay", c.optimizer.decay},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon}};
  j["schedule"] = {{"updates", c.schedule.updates},
                   {"epochs", c.schedule.epochs},
                   {"batch_size", c.schedule.batch_size},
                   {"bptt_window", c.schedule.bptt_window},
                   {"lr_decay_factor", c.schedule.lr_decay_factor},
                   {"plateau", c.schedule.plateau},
                   {"gradient_clip", opt_json(c.schedule.gradient_clip)},
                   {"unitary_amplitude", c.schedule.unitary_amplitude},
                   {"log_every", c.schedule.log_every},
                   {"eval_every", c.schedule.eval_every},
                   {"checkpoint_every", c.schedule.checkpoint_every},
                   {"eval_batch", c.schedule.eval_batch},
                   {"stop_at", opt_json(c.schedule.stop_at)}};
  return j.dump(2);
}

std::size_t task_input_dim(const RunConfig& cfg, std::size_t vocab) {
  switch (cfg.task.kind) {
    case TaskKind::copy: return kCopyClasses;
    case TaskKind::adding: return 2;
    case TaskKind::mnist:
    case TaskKind::mnist_permuted: return 1;
    case TaskKind::charlm: return vocab;
  }
  return 0;
}

std::size_t task_output_dim(const RunConfig& cfg, std::size_t vocab) {
  switch (cfg.task.kind) {
    case TaskKind::copy: return kCopyClasses;
    case TaskKind::adding: return 1;
    case TaskKind::mnist:
    case TaskKind::mnist_permuted: return 10;
    case TaskKind::charlm: return vocab;
  }
  return 0;
}

LossKind task_loss(TaskKind k) { return k == TaskKind::adding ? LossKind::mse : LossKind::cross_entropy; }

bool higher_is_better(TaskKind k) { return k == TaskKind::mnist || k == TaskKind::mnist_permuted; }

const char* metric_name(TaskKind k) {
  switch (k) {
    case TaskKind::copy: return "cross_entropy";
    case TaskKind::adding: return "mse";
    case TaskKind::mnist:
    case TaskKind::mnist_permuted: return "accuracy";
    case TaskKind::charlm: return "bpc";
  }
  return "?";
}

CellShape cell_shape(const RunConfig& cfg, std::size_t input_dim, std::size_t output_dim) {
  CellShape s;
  s.kind = cfg.model.kind;
  s.field = cfg.model.field;
  s.input_dim = input_dim;
  s.hidden_dim = cfg.model.hidden;
  s.output_dim = output_dim;
  s.factor_shapes = cfg.model.factor_shapes;
  s.activation = cfg.model.activation;
  s.frozen_recurrent = cfg.model.frozen_recurrent;
  return s;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg, std::size_t input_dim, std::size_t output_dim) {
  json id;
  id["task"] = {{"name", to_string(cfg.task.kind)}, {"T", cfg.task.T}};
  id["model"] = {{"kind", to_string(cfg.model.kind)},
                 {"field", to_string(cfg.model.field)},
                 {"hidden", cfg.model.hidden},
                 {"input_dim", input_dim},
                 {"output_dim", output_dim},
                 {"factor_shapes", shapes_json(cfg.model.factor_shapes)},
                 {"activation", to_string(cfg.model.activation)},
                 {"frozen_recurrent", cfg.model.frozen_recurrent}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(id.dump())));
  return buf;
}

}  // namespace kru
