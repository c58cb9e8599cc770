#pragma once

#include "sgpnp/signal.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sgpnp {

// Binary layout, all integers little-endian:
//   "SGP1" | u32 rank | u32 dims[rank] | u8 is_complex | f64 payload[...]
void write_signal(std::ostream &os, Signal const &s);
Signal read_signal(std::istream &is);

void save_signal(std::filesystem::path const &path, Signal const &s);
Signal load_signal(std::filesystem::path const &path);

/// Rank-1 signals become one row, rank-2 one line per row. Complex entries are
/// written as "re+imj".
std::string to_csv(Signal const &s);

} // namespace sgpnp
