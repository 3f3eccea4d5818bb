#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dipr/basis.hpp"
#include "dipr/dataset.hpp"
#include "dipr/types.hpp"

namespace dipr {

using json = nlohmann::json;

// Floating-point text format used by every CSV writer: shortest form with 17
// significant digits, which round-trips IEEE doubles exactly.
std::string format_double(double v);

void write_csv(const Dataset& data, const std::filesystem::path& path);
// Reads a CSV written by write_csv; roles are attached by the caller.
Dataset read_csv(const std::filesystem::path& path, RoleMap roles = {});

json roles_to_json(const RoleMap& roles);
RoleMap roles_from_json(const json& j);
void write_roles(const RoleMap& roles, const std::filesystem::path& path);
RoleMap read_roles(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& roles_path);

json basis_to_json(const BasisSpec& basis);
BasisSpec basis_from_json(const json& j);
json function_to_json(const FunctionHandle& h);
FunctionHandle function_from_json(const json& j);

void write_json_file(const json& j, const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

}  // namespace dipr
