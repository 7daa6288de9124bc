#include "fairgdiff/checkpoint.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fairgdiff/error.hpp"

namespace fairgdiff {

namespace {

using nlohmann::json;

json arrays_of(const ParamStore& store) {
  json arrays = json::object();
  for (const auto& block : store.blocks()) {
    json data = json::array();
    for (Eigen::Index i = 0; i < block.rows * block.cols; ++i) {
      data.push_back(store.flat()(block.offset + i));
    }
    arrays[block.name] = {{"shape", {block.rows, block.cols}},
                          {"data", std::move(data)}};
  }
  return arrays;
}

void fill_store(ParamStore& store, const json& arrays,
                const std::string& path) {
  if (arrays.size() != store.blocks().size()) {
    throw data_error(path + ": checkpoint holds " +
                     std::to_string(arrays.size()) + " arrays, expected " +
                     std::to_string(store.blocks().size()));
  }
  for (const auto& block : store.blocks()) {
    auto it = arrays.find(block.name);
    if (it == arrays.end()) {
      throw data_error(path + ": missing array " + block.name);
    }
    const json& shape = it->at("shape");
    if (shape.size() != 2 || shape[0].get<Eigen::Index>() != block.rows ||
        shape[1].get<Eigen::Index>() != block.cols) {
      throw data_error(path + ": shape mismatch for " + block.name);
    }
    const json& data = it->at("data");
    if (Eigen::Index(data.size()) != block.rows * block.cols) {
      throw data_error(path + ": data length mismatch for " + block.name);
    }
    for (Eigen::Index i = 0; i < block.rows * block.cols; ++i) {
      store.flat()(block.offset + i) = data[i].get<double>();
    }
  }
}

json read_checkpoint(const std::filesystem::path& path,
                     const std::string& kind) {
  std::ifstream ifs(path);
  if (!ifs) throw data_error("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(ifs);
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"] != 1) {
    throw data_error(path.string() + ": unsupported schema_version");
  }
  if (!doc.contains("kind") || doc["kind"] != kind) {
    throw data_error(path.string() + ": kind is not \"" + kind + "\"");
  }
  return doc;
}

void write_doc(const json& doc, const std::filesystem::path& path) {
  std::ofstream ofs(path);
  if (!ofs) throw data_error("cannot write " + path.string());
  ofs << doc.dump(2) << '\n';
}

}  // namespace

void save_autoencoder(const AutoencoderParams& params,
                      const std::filesystem::path& path) {
  const AutoencoderConfig& c = params.config;
  json doc = {
      {"schema_version", 1},
      {"kind", "autoencoder"},
      {"config",
       {{"n_max", c.n_max},
        {"latent_dim", c.latent_dim},
        {"layers", c.layers},
        {"hidden_dim", c.hidden_dim},
        {"epochs", c.epochs},
        {"lr", c.lr},
        {"kl_weight", c.kl_weight},
        {"seed", c.seed},
        {"feature_dim", params.feature_dim},
        {"trained", params.trained}}},
      {"arrays", arrays_of(params.store)},
  };
  write_doc(doc, path);
}

AutoencoderParams load_autoencoder(const std::filesystem::path& path) {
  json doc = read_checkpoint(path, "autoencoder");
  try {
    const json& c = doc.at("config");
    AutoencoderConfig cfg;
    cfg.n_max = c.at("n_max").get<int>();
    cfg.latent_dim = c.at("latent_dim").get<int>();
    cfg.layers = c.at("layers").get<int>();
    cfg.hidden_dim = c.at("hidden_dim").get<int>();
    cfg.epochs = c.at("epochs").get<int>();
    cfg.lr = c.at("lr").get<double>();
    cfg.kl_weight = c.at("kl_weight").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    AutoencoderParams params =
        init_autoencoder(cfg, c.at("feature_dim").get<int>());
    params.trained = c.at("trained").get<bool>();
    fill_store(params.store, doc.at("arrays"), path.string());
    return params;
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

void save_denoiser(const DenoiserParams& params,
                   const std::filesystem::path& path) {
  const DiffusionConfig& c = params.config;
  json doc = {
      {"schema_version", 1},
      {"kind", "diffusion"},
      {"gamma1", c.gamma1},
      {"gamma2", c.gamma2},
      {"schedule",
       {{"steps", c.steps},
        {"beta_start", c.beta_start},
        {"beta_end", c.beta_end}}},
      {"config",
       {{"epochs", c.epochs},
        {"lr", c.lr},
        {"hidden_dim", c.hidden_dim},
        {"tau_hidden", c.tau_hidden},
        {"tau_layers", c.tau_layers},
        {"cond_dim", c.cond_dim},
        {"time_dim", c.time_dim},
        {"seed", c.seed},
        {"latent_dim", params.latent_dim},
        {"feature_dim", params.feature_dim},
        {"trained", params.trained}}},
      {"arrays", arrays_of(params.store)},
  };
  write_doc(doc, path);
}

DenoiserParams load_denoiser(const std::filesystem::path& path) {
  json doc = read_checkpoint(path, "diffusion");
  try {
    const json& c = doc.at("config");
    DiffusionConfig cfg;
    cfg.gamma1 = doc.at("gamma1").get<double>();
    cfg.gamma2 = doc.at("gamma2").get<double>();
    const json& sched = doc.at("schedule");
    cfg.steps = sched.at("steps").get<int>();
    cfg.beta_start = sched.at("beta_start").get<double>();
    cfg.beta_end = sched.at("beta_end").get<double>();
    cfg.epochs = c.at("epochs").get<int>();
    cfg.lr = c.at("lr").get<double>();
    cfg.hidden_dim = c.at("hidden_dim").get<int>();
    cfg.tau_hidden = c.at("tau_hidden").get<int>();
    cfg.tau_layers = c.at("tau_layers").get<int>();
    cfg.cond_dim = c.at("cond_dim").get<int>();
    cfg.time_dim = c.at("time_dim").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    DenoiserParams params = init_denoiser(cfg, c.at("latent_dim").get<int>(),
                                          c.at("feature_dim").get<int>());
    params.trained = c.at("trained").get<bool>();
    fill_store(params.store, doc.at("arrays"), path.string());
    return params;
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

}  // namespace fairgdiff
