#include "dragonpit/rl/checkpoint.hpp"

#include <fstream>

namespace dragonpit::rl {

using nlohmann::json;

json checkpoint_to_json(const std::string& kind, const json& meta,
                        const std::vector<Parameter*>& params) {
  json doc;
  doc["format"] = "dragonpit-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["kind"] = kind;
  doc["meta"] = meta.is_null() ? json::object() : meta;
  json plist = json::array();
  for (const auto* p : params) {
    json entry;
    entry["name"] = p->name;
    entry["rows"] = p->value.rows();
    entry["cols"] = p->value.cols();
    json data = json::array();
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c)
        data.push_back(p->value(r, c));
    entry["data"] = std::move(data);
    plist.push_back(std::move(entry));
  }
  doc["params"] = std::move(plist);
  return doc;
}

json checkpoint_from_json(const json& doc, const std::string& expected_kind,
                          const std::vector<Parameter*>& params) {
  if (!doc.is_object() || doc.value("format", "") != "dragonpit-checkpoint")
    throw CheckpointError("not a checkpoint document");
  if (doc.value("version", -1) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version");
  if (doc.value("kind", "") != expected_kind)
    throw CheckpointError("checkpoint kind is '" + doc.value("kind", "") +
                          "', expected '" + expected_kind + "'");
  const json& plist = doc.at("params");
  if (plist.size() != params.size())
    throw CheckpointError("checkpoint holds " + std::to_string(plist.size()) +
                          " parameters, model has " +
                          std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& entry = plist[i];
    Parameter& p = *params[i];
    if (entry.at("name").get<std::string>() != p.name)
      throw CheckpointError("parameter order mismatch at " + p.name);
    auto rows = entry.at("rows").get<Eigen::Index>();
    auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows != p.value.rows() || cols != p.value.cols())
      throw CheckpointError("shape mismatch for " + p.name);
    const json& data = entry.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw CheckpointError("data length mismatch for " + p.name);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        p.value(r, c) = data[k++].get<double>();
  }
  return doc.at("meta");
}

void save_checkpoint(const std::string& path, const std::string& kind,
                     const json& meta, const std::vector<Parameter*>& params) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path);
  out << checkpoint_to_json(kind, meta, params).dump();
  out << "\n";
  if (!out) throw CheckpointError("short write to " + path);
}

json load_checkpoint(const std::string& path, const std::string& expected_kind,
                     const std::vector<Parameter*>& params) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  return checkpoint_from_json(doc, expected_kind, params);
}

}  // namespace dragonpit::rl
