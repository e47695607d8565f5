#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mfssa/core/mfts.hpp"

namespace mfssa {

using Json = nlohmann::json;

// Dataset document:
//   { "variables": [ { "name", "domain", "basis", "grid", "values" } ] }
// where "values" holds N rows of per-site samples. Each variable is projected
// onto its basis with project_samples.
MFTS ingest(const Json& dataset);
MFTS ingest_file(const std::filesystem::path& path);

// CSV with the site in the first column and one column per time point; 1D
// only. `basis` uses the dataset schema's basis object.
MFTS ingest_csv(const std::filesystem::path& path, const Json& domain, const Json& basis,
                const std::string& name = "y");

DomainSpec parse_domain(const Json& j);
BasisPtr parse_basis(const Json& j, const DomainSpec& domain, const Sites& grid);
Json domain_to_json(const DomainSpec& domain);
Json basis_to_json(const FunctionalBasis& basis);
Sites parse_grid(const Json& j, int dimension);
Json grid_to_json(const Sites& sites);

Json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);

// Series document mirroring the dataset schema: per variable the domain,
// basis, coefficients (N rows) and, when a sample grid is known, the grid and
// the fitted values on it. Grids are taken from `grids_from` when given.
Json mfts_to_json(const MFTS& mfts, const MFTS* grids_from = nullptr);

// Round-trippable form that also keeps the original samples.
Json dataset_to_json(const MFTS& mfts);

}  // namespace mfssa
