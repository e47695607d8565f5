#include "mfssa/core/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

namespace {

[[noreturn]] void schema(const std::string& what) { fail(ErrorCode::schema_violation, what); }

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) schema(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) schema(where + ": expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) schema(where + ": expected an integer");
  return j.get<int>();
}

Interval parse_bounds(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) schema(where + ": bounds must be [lo, hi]");
  return Interval{number(j[0], where), number(j[1], where)};
}

}  // namespace

DomainSpec parse_domain(const Json& j) {
  const std::string kind = field(j, "kind", "domain").get<std::string>();
  const Json& bounds = field(j, "bounds", "domain");
  if (kind == "interval") {
    const auto iv = parse_bounds(bounds, "domain");
    return DomainSpec::interval(iv.lo, iv.hi);
  }
  if (kind == "rectangle") {
    if (!bounds.is_array() || bounds.size() != 2) schema("rectangle bounds must be [[lo,hi],[lo,hi]]");
    return DomainSpec::rectangle(parse_bounds(bounds[0], "domain"), parse_bounds(bounds[1], "domain"));
  }
  schema("unknown domain kind \"" + kind + "\"");
}

Json domain_to_json(const DomainSpec& domain) {
  const auto& ax = domain.axes();
  if (domain.kind() == DomainKind::interval) {
    return {{"kind", "interval"}, {"bounds", {ax[0].lo, ax[0].hi}}};
  }
  return {{"kind", "rectangle"},
          {"bounds", Json::array({Json::array({ax[0].lo, ax[0].hi}), Json::array({ax[1].lo, ax[1].hi})})}};
}

BasisPtr parse_basis(const Json& j, const DomainSpec& domain, const Sites& grid) {
  const std::string kind = field(j, "kind", "basis").get<std::string>();
  if (kind == "bspline") {
    const int df = integer(field(j, "df", "basis"), "basis.df");
    const int degree = j.contains("degree") ? integer(j["degree"], "basis.degree") : 3;
    return make_bspline_basis(domain, df, degree);
  }
  if (kind == "tensor_bspline") {
    const Json& df = field(j, "df", "basis");
    if (!df.is_array() || df.size() != 2) schema("tensor_bspline df must be [df_x, df_y]");
    const int degree = j.contains("degree") ? integer(j["degree"], "basis.degree") : 3;
    return make_tensor_basis(domain, {integer(df[0], "basis.df"), integer(df[1], "basis.df")}, degree);
  }
  if (kind == "delta") return make_delta_basis(grid, domain);
  schema("unknown basis kind \"" + kind + "\"");
}

Json basis_to_json(const FunctionalBasis& basis) {
  switch (basis.kind()) {
    case BasisKind::bspline:
      return {{"kind", "bspline"}, {"df", basis.size()}, {"degree", basis.axes()[0].degree()}};
    case BasisKind::tensor_bspline:
      return {{"kind", "tensor_bspline"},
              {"df", {basis.axes()[0].size(), basis.axes()[1].size()}},
              {"degree", basis.axes()[0].degree()}};
    case BasisKind::discrete_delta:
      return {{"kind", "delta"}};
  }
  return {};
}

Sites parse_grid(const Json& j, int dimension) {
  if (!j.is_array() || j.empty()) schema("grid must be a non-empty array");
  Sites sites(static_cast<Eigen::Index>(j.size()), dimension);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (dimension == 1) {
      sites(i, 0) = number(j[i], "grid");
    } else {
      if (!j[i].is_array() || static_cast<int>(j[i].size()) != dimension) {
        schema("grid sites must be [x, y] pairs for a rectangle domain");
      }
      for (int a = 0; a < dimension; ++a) sites(i, a) = number(j[i][a], "grid");
    }
  }
  return sites;
}

Json grid_to_json(const Sites& sites) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < sites.rows(); ++i) {
    if (sites.cols() == 1) {
      out.push_back(sites(i, 0));
    } else {
      Json row = Json::array();
      for (Eigen::Index a = 0; a < sites.cols(); ++a) row.push_back(sites(i, a));
      out.push_back(std::move(row));
    }
  }
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) schema("matrix must be an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) schema("matrix rows must all have the same length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = number(j[r][c], "matrix");
  }
  return m;
}

MFTS ingest(const Json& dataset) {
  const Json& vars = field(dataset, "variables", "dataset");
  if (!vars.is_array() || vars.empty()) fail(ErrorCode::schema_violation, "dataset has no variables");

  std::vector<FunctionalVariable> out;
  std::optional<Eigen::Index> n_time;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Json& v = vars[j];
    const std::string where = "variables[" + std::to_string(j) + "]";
    FunctionalVariable fv;
    fv.name = v.contains("name") ? v["name"].get<std::string>() : "var" + std::to_string(j + 1);
    const DomainSpec domain = parse_domain(field(v, "domain", where));
    const Sites grid = parse_grid(field(v, "grid", where), domain.dimension());
    // values arrive as N rows of per-site samples; stored transposed.
    const Matrix rows = matrix_from_json(field(v, "values", where));
    if (rows.rows() == 0) schema(where + ": no time points");
    if (rows.cols() != grid.rows()) {
      schema(where + ": each values row needs one entry per grid site");
    }
    if (n_time && *n_time != rows.rows()) {
      std::ostringstream os;
      os << "mismatched N: " << where << " has " << rows.rows() << " time points, expected " << *n_time;
      fail(ErrorCode::mismatched_length, os.str());
    }
    n_time = rows.rows();
    SampleGrid samples{grid, rows.transpose()};
    fv.basis = parse_basis(field(v, "basis", where), domain, grid);
    fv.coefficients = project_samples(samples, *fv.basis);
    fv.samples = std::move(samples);
    out.push_back(std::move(fv));
  }
  return MFTS(std::move(out));
}

MFTS ingest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::schema_violation, path.string() + ": " + e.what());
  }
  return ingest(doc);
}

MFTS ingest_csv(const std::filesystem::path& path, const Json& domain, const Json& basis,
                const std::string& name) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::vector<double> sites;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (sites.empty() && rows.empty()) continue;  // header
      schema(path.string() + ": non-numeric cell");
    }
    if (cells.size() < 2) schema(path.string() + ": need a site column and at least one time column");
    if (width == 0) width = cells.size();
    if (cells.size() != width) schema(path.string() + ": ragged rows");
    sites.push_back(cells[0]);
    rows.emplace_back(cells.begin() + 1, cells.end());
  }
  if (rows.empty()) schema(path.string() + ": no data rows");

  Json values = Json::array();
  for (std::size_t t = 0; t + 1 < width; ++t) {
    Json row = Json::array();
    for (const auto& r : rows) row.push_back(r[t]);
    values.push_back(std::move(row));
  }
  Json var = {{"name", name}, {"domain", domain}, {"basis", basis}, {"grid", sites}, {"values", values}};
  if (parse_domain(domain).dimension() != 1) schema("CSV ingestion supports 1D domains only");
  return ingest(Json{{"variables", Json::array({var})}});
}

Json mfts_to_json(const MFTS& mfts, const MFTS* grids_from) {
  Json vars = Json::array();
  for (int j = 0; j < mfts.variable_count(); ++j) {
    const auto& v = mfts.variable(j);
    Json item = {{"name", v.name},
                 {"domain", domain_to_json(v.basis->domain())},
                 {"basis", basis_to_json(*v.basis)},
                 {"coefficients", matrix_to_json(v.coefficients.transpose())}};
    const FunctionalVariable* grid_src = &v;
    if (grids_from && j < grids_from->variable_count()) grid_src = &grids_from->variable(j);
    if (grid_src->samples) {
      const Sites& sites = grid_src->samples->sites;
      item["grid"] = grid_to_json(sites);
      item["values"] = matrix_to_json((v.basis->evaluate(sites) * v.coefficients).transpose());
    }
    vars.push_back(std::move(item));
  }
  return Json{{"variables", vars}, {"N", mfts.length()}};
}

Json dataset_to_json(const MFTS& mfts) {
  Json vars = Json::array();
  for (const auto& v : mfts.variables()) {
    if (!v.samples) fail(ErrorCode::invalid_argument, "dataset export needs the original samples");
    vars.push_back({{"name", v.name},
                    {"domain", domain_to_json(v.basis->domain())},
                    {"basis", basis_to_json(*v.basis)},
                    {"grid", grid_to_json(v.samples->sites)},
                    {"values", matrix_to_json(v.samples->values.transpose())}});
  }
  return Json{{"variables", vars}};
}

}  // namespace mfssa
