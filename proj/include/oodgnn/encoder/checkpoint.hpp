#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "oodgnn/encoder/gin.hpp"

namespace oodgnn::encoder {

// Text manifest of named matrices plus string metadata:
//
//   oodgnn-checkpoint 1
//   meta <key> <value>
//   param <name> <rows> <cols> <row-major values...>
//
// Values are written with 17 significant digits so they round-trip exactly.
struct Manifest {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Dense2D>> params;

  const Dense2D* find(const std::string& name) const;
};

void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest read_manifest(std::istream& in);
// Writes to a sibling temporary file and renames it into place.
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);

// Architecture metadata plus every parameter of the model.
void append_model(Manifest& manifest, const Model& model);

// Rebuilds a model from the architecture recorded in the manifest, validating
// each parameter's shape. Throws DataError on missing or mis-shaped entries.
Model restore_model(const Manifest& manifest);

}  // namespace oodgnn::encoder
