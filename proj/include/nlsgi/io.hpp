#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsgi/evolution.hpp"

namespace nlsgi {

using Json = nlohmann::json;

void write_scattering_json(const std::filesystem::path& path, const ScatteringData& s, const Json& extra = Json::object());
// throws InputError on a malformed or inconsistent archive
ScatteringData read_scattering_json(const std::filesystem::path& path);
void write_scattering_csv(const std::filesystem::path& path, const ScatteringData& s);

void write_potential_csv(const std::filesystem::path& path, const SpatialGrid& grid, const CArray& u);
void write_reconstruction_csv(const std::filesystem::path& path, const ReconstructionResult& r);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  // column by name
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace nlsgi
