#ifndef DMN_SERIALIZE_HPP
#define DMN_SERIALIZE_HPP

#include "dmn/model.hpp"
#include "dmn/optimizer.hpp"

#include <filesystem>
#include <optional>

namespace dmn {

struct ModelBundle {
  Model model;
  std::optional<OptimizerState> optimizer;
};

/// Binary model container: magic "DMNM", version, config, vocabulary, every
/// trainable parameter by name, optional optimizer state, and a trailing
/// CRC-32 over the payload. Round trips are bit-exact. Layout is documented
/// in docs/formats.md.
void save_model(const Model& m, const std::filesystem::path& path,
                const OptimizerState* optimizer = nullptr);

/// Loads a bundle, verifying magic, version and checksum before any state is
/// constructed; a corrupted or truncated file never yields a partial model.
ModelBundle load_model(const std::filesystem::path& path);

} // namespace dmn

#endif
