#include "beltlab/checkpoint.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace beltlab {

using nlohmann::json;
using nn::ModelKind;
using nn::ModelParams;
using nn::ModelSpec;

namespace {

json spec_to_json(const ModelSpec& s) {
  json conv = json::array();
  for (const auto& l : s.conv) conv.push_back({l.filters, l.kernel, l.stride});
  return {{"kind", nn::to_string(s.kind)},
          {"image", {{"h", s.image_h}, {"w", s.image_w}, {"c", s.image_c}}},
          {"conv", conv},
          {"feature_dim", s.feature_dim},
          {"hidden_dim", s.hidden_dim},
          {"residual_head", s.residual_head}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.kind = nn::model_kind_from_string(j.at("kind").get<std::string>());
  s.image_h = j.at("image").at("h").get<int>();
  s.image_w = j.at("image").at("w").get<int>();
  s.image_c = j.at("image").at("c").get<int>();
  s.conv.clear();
  for (const auto& l : j.at("conv"))
    s.conv.push_back({l.at(0).get<int>(), l.at(1).get<int>(), l.at(2).get<int>()});
  s.feature_dim = j.at("feature_dim").get<int>();
  s.hidden_dim = j.at("hidden_dim").get<int>();
  s.residual_head = j.at("residual_head").get<bool>();
  return s;
}

json arrays_to_json(const ModelParams& p) {
  json arrays = json::object();
  p.for_each_array([&](const std::string& name, const double* data, Eigen::Index rows,
                       Eigen::Index cols) {
    json values = json::array();
    for (Eigen::Index i = 0; i < rows * cols; ++i) {
      if (!std::isfinite(data[i]))
        throw CheckpointError("refusing to write non-finite values in array " + name);
      values.push_back(data[i]);
    }
    arrays[name] = {{"shape", {rows, cols}}, {"data", std::move(values)}};
  });
  return arrays;
}

void arrays_from_json(const json& arrays, ModelParams& p) {
  p.for_each_array([&](const std::string& name, double* data, Eigen::Index rows,
                       Eigen::Index cols) {
    if (!arrays.contains(name)) throw CheckpointError("checkpoint missing array " + name);
    const json& a = arrays.at(name);
    const auto shape = a.at("shape");
    if (shape.at(0).get<Eigen::Index>() != rows || shape.at(1).get<Eigen::Index>() != cols)
      throw CheckpointError("array " + name + ": shape mismatch, expected " +
                            std::to_string(rows) + "x" + std::to_string(cols) + ", found " +
                            shape.dump());
    const json& values = a.at("data");
    if (static_cast<Eigen::Index>(values.size()) != rows * cols)
      throw CheckpointError("array " + name + ": value count mismatch");
    for (Eigen::Index i = 0; i < rows * cols; ++i) data[i] = values.at(static_cast<std::size_t>(i)).get<double>();
  });
}

}  // namespace

std::size_t write_checkpoint(const ModelParams& params, const nn::AdamState* optimizer,
                             std::ostream& out, const TrainInfo* info) {
  json j;
  j["format"] = "beltlab-checkpoint-v1";
  j["model_kind"] = nn::to_string(params.spec.kind);
  j["spec"] = spec_to_json(params.spec);
  j["joint_limits"] = {
      {"lo", std::vector<double>(params.limits.lo.data(), params.limits.lo.data() + kArmDof)},
      {"hi", std::vector<double>(params.limits.hi.data(), params.limits.hi.data() + kArmDof)}};
  j["arrays"] = arrays_to_json(params);
  if (optimizer) {
    j["optimizer"] = {{"t", optimizer->t},
                      {"m", arrays_to_json(optimizer->m)},
                      {"v", arrays_to_json(optimizer->v)}};
  }
  if (info) {
    j["train_info"] = {{"seed", info->seed},
                       {"epochs_run", info->epochs_run},
                       {"best_epoch", info->best_epoch},
                       {"best_loss", info->best_loss}};
  }
  const std::string text = j.dump();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.put('\n');
  if (!out) throw CheckpointError("checkpoint write failed");
  return text.size() + 1;
}

Checkpoint read_checkpoint(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint parse: ") + e.what());
  }
  if (j.at("format").get<std::string>() != "beltlab-checkpoint-v1")
    throw CheckpointError("unknown checkpoint format");

  Checkpoint ck;
  ck.params.spec = spec_from_json(j.at("spec"));
  if (nn::model_kind_from_string(j.at("model_kind").get<std::string>()) != ck.params.spec.kind)
    throw CheckpointError("model_kind disagrees with spec");
  const auto lo = j.at("joint_limits").at("lo").get<std::vector<double>>();
  const auto hi = j.at("joint_limits").at("hi").get<std::vector<double>>();
  if (lo.size() != kArmDof || hi.size() != kArmDof) throw CheckpointError("bad joint limits");
  for (int i = 0; i < kArmDof; ++i) {
    ck.params.limits.lo[i] = lo[static_cast<std::size_t>(i)];
    ck.params.limits.hi[i] = hi[static_cast<std::size_t>(i)];
  }
  // Allocate shapes from the spec, then fill and verify.
  ModelParams reference = nn::init_params(ck.params.spec, ck.params.limits, 0);
  reference.limits = ck.params.limits;
  ck.params = reference;
  arrays_from_json(j.at("arrays"), ck.params);

  if (j.contains("optimizer")) {
    nn::AdamState st{ck.params.zeros_like(), ck.params.zeros_like(),
                     j.at("optimizer").at("t").get<std::int64_t>()};
    arrays_from_json(j.at("optimizer").at("m"), st.m);
    arrays_from_json(j.at("optimizer").at("v"), st.v);
    ck.optimizer = std::move(st);
  }
  if (j.contains("train_info")) {
    TrainInfo info;
    info.seed = j.at("train_info").at("seed").get<std::uint64_t>();
    info.epochs_run = j.at("train_info").at("epochs_run").get<int>();
    info.best_epoch = j.at("train_info").at("best_epoch").get<int>();
    info.best_loss = j.at("train_info").at("best_loss").get<double>();
    ck.info = info;
  }
  return ck;
}

std::size_t save_checkpoint(const ModelParams& params, const nn::AdamState* optimizer,
                            const std::filesystem::path& path, const TrainInfo* info) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string());
  return write_checkpoint(params, optimizer, out, info);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace beltlab
