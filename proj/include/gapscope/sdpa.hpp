#pragma once

#include "gapscope/sdp.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace gapscope {

using Json = nlohmann::ordered_json;

// SDPA sparse format (.dat-s). Matrix 0 is C, matrices 1..m are Aⁱ. Multiple
// blocks are assembled into one block-diagonal matrix; a negative block size
// marks a diagonal block.
SdpInstance read_sdpa(const std::filesystem::path& path);
SdpInstance parse_sdpa(std::istream& in, const std::string& name);
void write_sdpa(const SdpInstance& inst, const std::filesystem::path& path);
void write_sdpa(const SdpInstance& inst, std::ostream& out);

Json to_json(const SymMatrix& M);
Json to_json(const Matrix& M);
Json to_json(const SdpInstance& inst);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace gapscope
