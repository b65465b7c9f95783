#include "vgcrl/ndmath/checkpoint.hpp"

#include <fstream>

namespace vgcrl::nd {

namespace {

nlohmann::json tensor_data(const Tensor& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (double x : t.values()) arr.push_back(x);
  return arr;
}

void fill_tensor(Tensor& t, const nlohmann::json& arr, const std::string& what) {
  VGCRL_CHECK(arr.is_array() && arr.size() == t.size(), "checkpoint: ", what,
              " has length ", arr.size(), ", expected ", t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = arr[i].get<double>();
}

}  // namespace

nlohmann::json params_to_json(std::span<Parameter* const> params) {
  nlohmann::json out = nlohmann::json::object();
  for (const Parameter* p : params) {
    VGCRL_CHECK(!out.contains(p->name), "checkpoint: duplicate parameter name '", p->name, "'");
    out[p->name] = {{"shape", {p->value.rows(), p->value.cols()}},
                    {"data", tensor_data(p->value)}};
  }
  return out;
}

void params_from_json(const nlohmann::json& doc, std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    VGCRL_CHECK(doc.contains(p->name), "checkpoint: missing parameter '", p->name, "'");
    const auto& entry = doc.at(p->name);
    const auto& shape = entry.at("shape");
    VGCRL_CHECK(shape.size() == 2 && shape[0].get<std::size_t>() == p->value.rows() &&
                    shape[1].get<std::size_t>() == p->value.cols(),
                "checkpoint: parameter '", p->name, "' has stored shape [",
                shape.dump(), "], expected ", p->value.shape_str());
    fill_tensor(p->value, entry.at("data"), "'" + p->name + "'");
  }
}

nlohmann::json adam_to_json(std::vector<std::pair<Parameter*, AdamState*>> slots) {
  nlohmann::json out = nlohmann::json::object();
  for (auto& [p, s] : slots) {
    out[p->name] = {{"m", tensor_data(s->first_moment)},
                    {"v", tensor_data(s->second_moment)},
                    {"step", s->step_count}};
  }
  return out;
}

void adam_from_json(const nlohmann::json& doc,
                    std::vector<std::pair<Parameter*, AdamState*>> slots) {
  for (auto& [p, s] : slots) {
    VGCRL_CHECK(doc.contains(p->name), "checkpoint: missing optimizer state for '", p->name,
                "'");
    const auto& entry = doc.at(p->name);
    fill_tensor(s->first_moment, entry.at("m"), "adam m of '" + p->name + "'");
    fill_tensor(s->second_moment, entry.at("v"), "adam v of '" + p->name + "'");
    s->step_count = entry.at("step").get<std::int64_t>();
  }
}

void write_checkpoint_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  VGCRL_CHECK(out.good(), "checkpoint: cannot open '", path.string(), "' for writing");
  out << doc.dump();
  out.close();
  VGCRL_CHECK(out.good(), "checkpoint: write to '", path.string(), "' failed");
}

nlohmann::json read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  VGCRL_CHECK(in.good(), "checkpoint: cannot open '", path.string(), "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    fail("checkpoint: malformed JSON in '", path.string(), "': ", e.what());
  }
  return doc;
}

}  // namespace vgcrl::nd
