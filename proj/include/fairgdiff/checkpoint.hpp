#pragma once

#include <filesystem>

#include "fairgdiff/autoencoder.hpp"
#include "fairgdiff/diffusion.hpp"

namespace fairgdiff {

/// Checkpoints are JSON: {"schema_version":1, "kind":..., "config":{...},
/// "arrays":{name:{"shape":[rows,cols], "data":[row-major doubles]}}}.
/// Doubles are written with shortest round-trip precision, so a save/load
/// cycle restores every parameter bit-exactly. Loading rejects unknown
/// schema versions, a mismatched kind, and arrays whose names or shapes
/// disagree with the configuration.
void save_autoencoder(const AutoencoderParams& params,
                      const std::filesystem::path& path);
AutoencoderParams load_autoencoder(const std::filesystem::path& path);

/// Diffusion checkpoints additionally carry top-level "gamma1", "gamma2"
/// and "schedule":{"steps","beta_start","beta_end"}; those keys are
/// authoritative on load.
void save_denoiser(const DenoiserParams& params,
                   const std::filesystem::path& path);
DenoiserParams load_denoiser(const std::filesystem::path& path);

}  // namespace fairgdiff
