#include "pcn/manifest.hpp"

#include <chrono>
#include <ctime>

#include "pcn/memory.hpp"

namespace pcn {

using nlohmann::json;

void to_json(json& j, const ExperimentConfig& c) {
  j = json{
      {"name", c.name},
      {"mode", to_string(c.mode)},
      {"dims", {c.dims.input, c.dims.hidden, c.dims.top}},
      {"activation", to_string(c.activation)},
      {"batch_size", c.batch_size},
      {"inference_iters", c.inference_iters},
      {"alpha", c.alpha},
      {"adam",
       {{"rate", c.adam.rate},
        {"decay1", c.adam.decay1},
        {"decay2", c.adam.decay2},
        {"epsilon", c.adam.epsilon}}},
      {"latent_init_scale", c.latent_init_scale},
      {"seeds",
       {{"weights", c.seeds.weights},
        {"latents", c.seeds.latents},
        {"split", c.seeds.split},
        {"shuffle", c.seeds.shuffle},
        {"evaluation", c.seeds.evaluation}}},
      {"convergence",
       {{"epsilon", c.convergence.epsilon},
        {"patience", c.convergence.patience},
        {"window", c.convergence.window},
        {"max_epochs", c.convergence.max_epochs}}},
      {"scope", to_string(c.scope)},
      {"limit_train", c.limit_train},
      {"eval_every", c.eval_every},
  };
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void merge_config(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  take(j, "name", c.name);
  if (j.contains("mode")) c.mode = training_mode_from_string(j["mode"]);
  if (j.contains("dims")) {
    const auto d = j["dims"].get<std::vector<std::size_t>>();
    if (d.size() != 3) throw std::invalid_argument("dims must have 3 entries");
    c.dims = {d[0], d[1], d[2]};
  }
  if (j.contains("activation")) {
    c.activation = activation_from_string(j["activation"]);
  }
  take(j, "batch_size", c.batch_size);
  take(j, "inference_iters", c.inference_iters);
  take(j, "alpha", c.alpha);
  if (j.contains("adam")) {
    const auto& a = j["adam"];
    take(a, "rate", c.adam.rate);
    take(a, "decay1", c.adam.decay1);
    take(a, "decay2", c.adam.decay2);
    take(a, "epsilon", c.adam.epsilon);
  }
  take(j, "beta", c.adam.rate);
  take(j, "latent_init_scale", c.latent_init_scale);
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    take(s, "weights", c.seeds.weights);
    take(s, "latents", c.seeds.latents);
    take(s, "split", c.seeds.split);
    take(s, "shuffle", c.seeds.shuffle);
    take(s, "evaluation", c.seeds.evaluation);
  }
  if (j.contains("convergence")) {
    const auto& v = j["convergence"];
    take(v, "epsilon", c.convergence.epsilon);
    take(v, "patience", c.convergence.patience);
    take(v, "window", c.convergence.window);
    take(v, "max_epochs", c.convergence.max_epochs);
  }
  if (j.contains("scope")) c.scope = dataset_scope_from_string(j["scope"]);
  take(j, "limit_train", c.limit_train);
  take(j, "eval_every", c.eval_every);
}

json manifest_to_json(const RunManifest& m, bool with_timestamps) {
  json digests = json::object();
  for (const auto& [name, crc] : m.data_digests) digests[name] = crc;
  json j{
      {"artifact_version", m.artifact_version},
      {"config", m.config},
      {"data_crc32", digests},
      {"training_rows", m.training_rows},
      {"stop_reason", m.stop_reason},
      {"epochs", m.epochs},
  };
  const RecallSettings recall;
  const ReplaySettings replay;
  j["memory_tasks"] = {
      {"recall",
       {{"hidden_fill", recall.hidden_fill},
        {"max_iters", recall.max_iters},
        {"step_tolerance", recall.step_tolerance}}},
      {"replay",
       {{"max_iters", replay.max_iters},
        {"step_tolerance", replay.step_tolerance}}},
  };
  if (with_timestamps) {
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
  }
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  take(j, "artifact_version", m.artifact_version);
  if (j.contains("config")) merge_config(m.config, j["config"]);
  if (j.contains("data_crc32")) {
    for (const auto& [k, v] : j["data_crc32"].items()) {
      m.data_digests.emplace_back(k, v.get<std::uint32_t>());
    }
  }
  take(j, "training_rows", m.training_rows);
  take(j, "stop_reason", m.stop_reason);
  take(j, "epochs", m.epochs);
  take(j, "started_at", m.started_at);
  take(j, "finished_at", m.finished_at);
  return m;
}

std::string checkpoint_manifest_text(const RunManifest& m) {
  return manifest_to_json(m, false).dump();
}

RunManifest parse_manifest_text(const std::string& text) {
  if (text.empty()) return {};
  return manifest_from_json(json::parse(text));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace pcn
