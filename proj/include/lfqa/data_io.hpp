#pragma once

#include "lfqa/types.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

inline constexpr int pool_schema_version = 1;
inline constexpr int dataset_schema_version = 1;

// Strict-balance pools must hold exactly this many exemplars of every type
// they contain.
inline constexpr std::size_t balanced_type_count = 20;

struct PoolParseOptions {
    // Enforces the per-type balance and rejects exemplars labelled with more
    // than one type. In lax mode the first listed type wins with a warning.
    bool strict_balance = false;
    // Receives non-fatal diagnostics; defaults to the process logger.
    std::function<void(const std::string&)> on_warning;
};

/// Reads a line-delimited pool file. Errors name the file and line.
ExemplarPool load_pool(const std::filesystem::path& path, bool strict_balance);
ExemplarPool parse_pool(std::istream& in, std::string_view source_name, const PoolParseOptions& opts);

/// Canonical pool serialization: one record per line, fixed key order, LF.
void write_pool(std::ostream& out, const ExemplarPool& pool);
std::string exemplar_to_line(const Exemplar& ex);

std::vector<DatasetExample> load_dataset(const std::filesystem::path& path, DatasetKind kind);
std::vector<DatasetExample> parse_dataset(std::istream& in, std::string_view source_name, DatasetKind kind);

void write_dataset(std::ostream& out, const std::vector<DatasetExample>& examples);

} // namespace lfqa
