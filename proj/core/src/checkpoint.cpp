#include "tfn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tfn::model {

using json = nlohmann::ordered_json;

void save_checkpoint(const std::string& path, const ModelSpec& spec, const ParamStore& params,
                     const std::string& config_hash) {
  json j;
  j["schema"] = "tfn.checkpoint.v1";
  j["config_hash"] = config_hash;
  j["architecture"] = json::parse(model_spec_to_json(spec));
  json plist = json::array();
  for (const auto& [name, value] : params) {
    json p;
    p["name"] = name;
    p["shape"] = value.shape();
    p["values"] = std::vector<double>(value.data().begin(), value.data().end());
    plist.push_back(std::move(p));
  }
  j["params"] = std::move(plist);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot read '" + path + "'");
  json j;
  in >> j;
  if (j.value("schema", "") != "tfn.checkpoint.v1") {
    throw std::invalid_argument("load_checkpoint: unsupported schema '" + j.value("schema", "") + "'");
  }
  Checkpoint ckpt;
  ckpt.config_hash = j.value("config_hash", "");
  ckpt.spec = model_spec_from_json(j.at("architecture").dump());
  for (const auto& p : j.at("params")) {
    const auto shape = p.at("shape").get<std::vector<int64_t>>();
    auto values = p.at("values").get<std::vector<double>>();
    ckpt.params.emplace(p.at("name").get<std::string>(), NdArray(shape, std::move(values)));
  }
  return ckpt;
}

}  // namespace tfn::model
