#pragma once

#include <filesystem>
#include <string>

#include "predictor.hpp"

namespace credanno {

// A checkpoint is `<stem>.json` (manifest: shapes, schema, schema hash,
// rng seed, options, tensor-file checksum) next to `<stem>.bin`, which holds
// little-endian float64 values: the live parameters followed by the st0
// snapshot, each in Parameters::for_each order.
void write_checkpoint(const std::filesystem::path& dir, const std::string& stem, const HierarchicalPredictor& pred);

// `manifest` is the path of the .json file.
HierarchicalPredictor load_checkpoint(const std::filesystem::path& manifest);

const char* to_string(AttrFeed feed);
AttrFeed parse_attr_feed(const std::string& s);

}  // namespace credanno
