#include "kru/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kru/tasks.hpp"

namespace kru {

using nlohmann::json;

OptimizerSnapshot snapshot(const Optimizer& opt) {
  return {opt.config(), opt.steps(), opt.first_moments(), opt.second_moments()};
}

Optimizer restore(const OptimizerSnapshot& s, const CellParameters& params) {
  Optimizer opt(s.config, params);
  if (opt.first_moments().size() != s.first.size() || opt.second_moments().size() != s.second.size()) {
    throw DataError("optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < s.second.size(); ++i) {
    require_same_shape(opt.second_moments()[i], s.second[i], "optimizer state");
    opt.second_moments()[i] = s.second[i];
  }
  for (std::size_t i = 0; i < s.first.size(); ++i) {
    require_same_shape(opt.first_moments()[i], s.first[i], "optimizer state");
    opt.first_moments()[i] = s.first[i];
  }
  opt.set_steps(s.steps);
  return opt;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_f64(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

std::size_t value_count(const Matrix& m) { return (m.is_real() ? 1 : 2) * m.size(); }

void append_matrix(std::string& out, const Matrix& m) {
  for (const auto& v : m.data()) {
    put_f64(out, v.real());
    if (!m.is_real()) put_f64(out, v.imag());
  }
}

json tensor_entry(const std::string& name, const Matrix& m, std::size_t offset) {
  return {{"name", name},
          {"rows", m.rows()},
          {"cols", m.cols()},
          {"field", to_string(m.field())},
          {"offset", offset},
          {"count", value_count(m)}};
}

void read_matrix(const std::string& payload, const json& entry, Matrix& m) {
  const auto rows = entry.at("rows").get<std::size_t>(), cols = entry.at("cols").get<std::size_t>();
  const Field field = field_from_string(entry.at("field").get<std::string>());
  if (rows != m.rows() || cols != m.cols() || field != m.field()) {
    throw DataError("checkpoint tensor " + entry.at("name").get<std::string>() + " is " +
                    std::to_string(rows) + "x" + std::to_string(cols) + " " + to_string(field) +
                    ", model expects " + m.shape_string() + " " + to_string(m.field()));
  }
  const auto offset = entry.at("offset").get<std::size_t>();
  if ((offset + value_count(m)) * 8 > payload.size()) throw DataError("checkpoint payload is truncated");
  std::size_t k = offset * 8;
  for (auto& v : m.data()) {
    const double re = get_f64(payload, k);
    k += 8;
    double im = 0.0;
    if (!m.is_real()) {
      im = get_f64(payload, k);
      k += 8;
    }
    v = Complex(re, im);
  }
}

json shapes_json(const CellParameters& p) {
  const Recurrent& w = is_lstm(p.kind) ? p.gates[kForget].W : p.W;
  if (const auto* k = std::get_if<KroneckerMatrix>(&w)) {
    json a = json::array();
    for (const auto& s : k->shapes()) a.push_back({s.p, s.q});
    return a;
  }
  return json::array();
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string parameter_payload(const CellParameters& p) {
  std::string out;
  for (const auto& v : parameters(p)) append_matrix(out, *v.value);
  return out;
}

void save_checkpoint(const std::filesystem::path& manifest, const Checkpoint& c) {
  auto payload_path = manifest;
  payload_path.replace_extension(".bin");

  std::string payload;
  json tensors = json::array();
  for (const auto& v : parameters(c.params)) {
    tensors.push_back(tensor_entry(v.name, *v.value, payload.size() / 8));
    append_matrix(payload, *v.value);
  }

  json j;
  j["format"] = "kru-checkpoint";
  j["version"] = 1;
  j["config_hash"] = c.config_hash;
  j["task"] = c.task;
  j["metric"] = c.metric;
  j["step"] = c.step;
  j["epoch"] = c.epoch;
  j["rng"] = {{"seed", c.seed}, {"counter", c.counter}};
  j["learning_rate"] = c.learning_rate;
  j["metric_history"] = c.metric_history;
  j["best_metric"] = c.best_metric ? json(*c.best_metric) : json(nullptr);
  j["best_step"] = c.best_step;
  const auto& p = c.params;
  j["model"] = {{"kind", to_string(p.kind)},
                {"field", to_string(p.field)},
                {"activation", to_string(p.activation)},
                {"input_dim", p.input_dim},
                {"hidden_dim", p.hidden_dim},
                {"output_dim", p.output_dim},
                {"factor_shapes", shapes_json(p)},
                {"frozen_recurrent", p.frozen_recurrent}};
  j["tensors"] = tensors;
  if (c.optimizer) {
    const auto& o = *c.optimizer;
    json first = json::array(), second = json::array();
    const auto views = parameters(c.params);
    for (std::size_t i = 0; i < o.first.size(); ++i) {
      first.push_back(tensor_entry("m:" + views.at(i).name, o.first[i], payload.size() / 8));
      append_matrix(payload, o.first[i]);
    }
    for (std::size_t i = 0; i < o.second.size(); ++i) {
      second.push_back(tensor_entry("v:" + views.at(i).name, o.second[i], payload.size() / 8));
      append_matrix(payload, o.second[i]);
    }
    j["optimizer"] = {{"kind", to_string(o.config.kind)},
                      {"learning_rate", o.config.learning_rate},
                      {"decay", o.config.decay},
                      {"beta1", o.config.beta1},
                      {"beta2", o.config.beta2},
                      {"epsilon", o.config.epsilon},
                      {"steps", o.steps},
                      {"first", first},
                      {"second", second}};
  }
  j["payload"] = payload_path.filename().string();
  j["payload_values"] = payload.size() / 8;

  write_file_atomic(payload_path, payload);
  write_file_atomic(manifest, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& manifest) {
  json j;
  try {
    j = json::parse(read_all(manifest));
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint manifest " + manifest.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "kru-checkpoint") throw DataError("not a kru checkpoint: " + manifest.string());
    const std::string payload = read_all(manifest.parent_path() / j.at("payload").get<std::string>());
    if (payload.size() != j.at("payload_values").get<std::size_t>() * 8) {
      throw DataError("checkpoint payload size does not match its manifest");
    }
    Checkpoint c;
    c.config_hash = j.at("config_hash").get<std::string>();
    c.task = j.at("task").get<std::string>();
    c.metric = j.at("metric").get<std::string>();
    c.step = j.at("step").get<std::uint64_t>();
    c.epoch = j.at("epoch").get<std::uint64_t>();
    c.seed = j.at("rng").at("seed").get<std::uint64_t>();
    c.counter = j.at("rng").at("counter").get<std::uint64_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.metric_history = j.at("metric_history").get<std::vector<double>>();
    if (!j.at("best_metric").is_null()) c.best_metric = j.at("best_metric").get<double>();
    c.best_step = j.at("best_step").get<std::uint64_t>();

    const json& m = j.at("model");
    CellShape s;
    s.kind = cell_kind_from_string(m.at("kind").get<std::string>());
    s.field = field_from_string(m.at("field").get<std::string>());
    s.activation = activation_from_string(m.at("activation").get<std::string>());
    s.input_dim = m.at("input_dim").get<std::size_t>();
    s.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    s.output_dim = m.at("output_dim").get<std::size_t>();
    s.frozen_recurrent = m.at("frozen_recurrent").get<bool>();
    for (const auto& f : m.at("factor_shapes")) s.factor_shapes.push_back({f[0].get<std::size_t>(), f[1].get<std::size_t>()});
    c.params = init_parameters(s, 0);

    const json& tensors = j.at("tensors");
    auto views = parameters(c.params);
    if (tensors.size() != views.size()) throw DataError("checkpoint tensor list does not match the model");
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (tensors[i].at("name").get<std::string>() != views[i].name) {
        throw DataError("checkpoint tensor " + tensors[i].at("name").get<std::string>() +
                        " found where " + views[i].name + " was expected");
      }
      read_matrix(payload, tensors[i], *views[i].value);
    }
    validate(c.params);

    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      OptimizerSnapshot snap;
      snap.config.kind = optimizer_kind_from_string(o.at("kind").get<std::string>());
      snap.config.learning_rate = o.at("learning_rate").get<double>();
      snap.config.decay = o.at("decay").get<double>();
      snap.config.beta1 = o.at("beta1").get<double>();
      snap.config.beta2 = o.at("beta2").get<double>();
      snap.config.epsilon = o.at("epsilon").get<double>();
      snap.steps = o.at("steps").get<std::uint64_t>();
      for (const char* key : {"first", "second"}) {
        auto& dest = std::string(key) == "first" ? snap.first : snap.second;
        const json& list = o.at(key);
        if (!list.empty() && list.size() != views.size()) {
          throw DataError("optimizer state does not match the parameter list");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
          Matrix buf(views[i].value->rows(), views[i].value->cols(), views[i].value->field());
          read_matrix(payload, list[i], buf);
          dest.push_back(std::move(buf));
        }
      }
      c.optimizer = std::move(snap);
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint manifest " + manifest.string() + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DataError(std::string("checkpoint does not describe a valid model: ") + e.what());
  }
}

}  // namespace kru
