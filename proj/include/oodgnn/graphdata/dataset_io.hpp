#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "oodgnn/graphdata/graph.hpp"

namespace oodgnn::graphdata {

// One graph per line:
//   {"n": int, "edges": [[u,v],...], "x": [[...],...], "y": int}
void write_dataset(std::ostream& out, const Dataset& d);
void save_dataset(const std::filesystem::path& path, const Dataset& d);

// Validates every graph; malformed lines raise DataError with the 1-based line
// number. When num_classes is unset it is inferred as max label + 1.
Dataset read_dataset(std::istream& in, std::optional<int> num_classes = std::nullopt);
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<int> num_classes = std::nullopt);

}  // namespace oodgnn::graphdata
