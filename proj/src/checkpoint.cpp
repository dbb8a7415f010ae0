#include "wfal/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wfal/error.hpp"

namespace wfal {

namespace {

using nlohmann::json;

json tensor_to_json(const std::string& name, const DenseMatrix& m) {
  json t;
  t["name"] = name;
  t["rows"] = m.rows();
  t["cols"] = m.cols();
  t["data"] = m.data();
  return t;
}

DenseMatrix tensor_from_json(const json& t) {
  DenseMatrix m(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
  const auto data = t.at("data").get<std::vector<double>>();
  if (data.size() != m.size()) {
    raise(ErrorCode::parse_error, "checkpoint tensor data does not match its shape");
  }
  m.data() = data;
  return m;
}

}  // namespace

std::string checkpoint_to_json(const Model& model, std::uint64_t seed) {
  json doc;
  doc["format"] = "wfal-checkpoint";
  doc["version"] = 1;
  doc["model"] = model.kind();
  doc["seed"] = seed;
  if (const auto* gcn = dynamic_cast<const GcnModel*>(&model)) {
    doc["config"] = {{"input_dim", gcn->config().input_dim},
                     {"hidden", gcn->config().hidden},
                     {"classes", gcn->config().classes}};
  } else if (const auto* ssl = dynamic_cast<const SslModel*>(&model)) {
    doc["config"] = {{"input_dim", ssl->config().input_dim},
                     {"hidden", ssl->config().hidden},
                     {"latent", ssl->config().latent},
                     {"categories", ssl->config().categories},
                     {"temperature", ssl->config().temperature},
                     {"margin", ssl->config().margin},
                     {"mask_fraction", ssl->config().mask_fraction},
                     {"noise_scale", ssl->config().noise_scale},
                     {"score_samples", ssl->config().score_samples}};
  } else {
    raise(ErrorCode::config_invalid, "cannot checkpoint unknown model kind");
  }
  json tensors = json::array();
  const auto names = model.tensor_names();
  const auto values = model.tensors();
  for (std::size_t t = 0; t < values.size(); ++t) {
    tensors.push_back(tensor_to_json(names[t], *values[t]));
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump(2) + "\n";
}

void save_checkpoint(const std::string& path, const Model& model, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io_error, "cannot open checkpoint '" + path + "' for writing");
  out << checkpoint_to_json(model, seed);
  if (!out) raise(ErrorCode::io_error, "failed writing checkpoint '" + path + "'");
}

std::unique_ptr<Model> checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::parse_error, std::string("checkpoint: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "wfal-checkpoint" ||
        doc.at("version").get<int>() != 1) {
      raise(ErrorCode::parse_error, "unsupported checkpoint format");
    }
    const std::string kind = doc.at("model").get<std::string>();
    const json& cfg = doc.at("config");
    std::vector<DenseMatrix> tensors;
    for (const auto& t : doc.at("tensors")) tensors.push_back(tensor_from_json(t));

    if (kind == "gcn") {
      GcnConfig config;
      config.input_dim = cfg.at("input_dim").get<std::size_t>();
      config.hidden = cfg.at("hidden").get<std::size_t>();
      config.classes = cfg.at("classes").get<int>();
      if (tensors.size() != 4) raise(ErrorCode::parse_error, "gcn checkpoint needs 4 tensors");
      GcnParams params;
      params.w1 = std::move(tensors[0]);
      params.w2 = std::move(tensors[1]);
      params.mlp_w = std::move(tensors[2]);
      params.mlp_b = std::move(tensors[3]);
      return std::make_unique<GcnModel>(config, std::move(params));
    }
    if (kind == "ssl") {
      SslConfig config;
      config.input_dim = cfg.at("input_dim").get<std::size_t>();
      config.hidden = cfg.at("hidden").get<std::size_t>();
      config.latent = cfg.at("latent").get<std::size_t>();
      config.categories = cfg.at("categories").get<std::size_t>();
      config.temperature = cfg.at("temperature").get<double>();
      config.margin = cfg.at("margin").get<double>();
      config.mask_fraction = cfg.at("mask_fraction").get<double>();
      config.noise_scale = cfg.at("noise_scale").get<double>();
      config.score_samples = cfg.at("score_samples").get<int>();
      if (tensors.size() != 7) raise(ErrorCode::parse_error, "ssl checkpoint needs 7 tensors");
      SslParams params;
      params.w1 = std::move(tensors[0]);
      params.w2 = std::move(tensors[1]);
      params.wg = std::move(tensors[2]);
      params.v1 = std::move(tensors[3]);
      params.c1 = std::move(tensors[4]);
      params.v2 = std::move(tensors[5]);
      params.c2 = std::move(tensors[6]);
      return std::make_unique<SslModel>(config, std::move(params));
    }
    raise(ErrorCode::parse_error, "unknown checkpoint model '" + kind + "'");
  } catch (const json::exception& e) {
    raise(ErrorCode::parse_error, std::string("checkpoint: ") + e.what());
  }
}

std::unique_ptr<Model> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open checkpoint '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace wfal
