#include "dipr/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dipr {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const auto& cols = data.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out << ',';
    out << cols[j];
  }
  out << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.values().cols(); ++j) {
      if (j) out << ',';
      out << format_double(data.values()(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing: " + path.string());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path, RoleMap roles) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> names = split_line(line);
  std::vector<double> flat;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != names.size())
      throw IoError("CSV row " + std::to_string(rows + 1) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(names.size()));
    for (const auto& f : fields) {
      // std::stod rejects subnormals with out_of_range; strtod returns them
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size())
        throw IoError("CSV field is not numeric: '" + f + "'");
      flat.push_back(v);
    }
    ++rows;
  }
  Mat values(rows, static_cast<Index>(names.size()));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < values.cols(); ++j)
      values(i, j) = flat[static_cast<std::size_t>(i) * names.size() +
                          static_cast<std::size_t>(j)];
  return Dataset(names, std::move(values), std::move(roles));
}

json roles_to_json(const RoleMap& roles) {
  return json{{"schema_version", 1},
              {"v_h", roles.v_h},
              {"v_q", roles.v_q},
              {"g0", roles.g0},
              {"g1", roles.g1}};
}

RoleMap roles_from_json(const json& j) {
  RoleMap r;
  r.v_h = j.at("v_h").get<std::vector<std::string>>();
  r.v_q = j.at("v_q").get<std::vector<std::string>>();
  r.g0 = j.at("g0").get<std::string>();
  r.g1 = j.at("g1").get<std::string>();
  return r;
}

void write_roles(const RoleMap& roles, const std::filesystem::path& path) {
  write_json_file(roles_to_json(roles), path);
}

RoleMap read_roles(const std::filesystem::path& path) {
  return roles_from_json(read_json_file(path));
}

Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& roles_path) {
  return read_csv(csv_path, read_roles(roles_path));
}

json basis_to_json(const BasisSpec& basis) {
  json j;
  j["family"] = to_string(basis.family());
  switch (basis.family()) {
    case BasisFamily::cosine:
    case BasisFamily::legendre:
      j["dim"] = basis.dimension();
      break;
    case BasisFamily::indicator: {
      std::vector<double> w(basis.weights().data(),
                            basis.weights().data() + basis.weights().size());
      j["weights"] = w;
      break;
    }
    case BasisFamily::tensor:
      j["factors"] = json::array({basis_to_json(basis.factor(0)), basis_to_json(basis.factor(1))});
      break;
  }
  return j;
}

BasisSpec basis_from_json(const json& j) {
  const BasisFamily family = basis_family_from_string(j.at("family").get<std::string>());
  switch (family) {
    case BasisFamily::cosine:
      return BasisSpec::cosine(j.at("dim").get<Index>());
    case BasisFamily::legendre:
      return BasisSpec::legendre(j.at("dim").get<Index>());
    case BasisFamily::indicator: {
      const auto w = j.at("weights").get<std::vector<double>>();
      return BasisSpec::indicator(Eigen::Map<const Vec>(w.data(), static_cast<Index>(w.size())));
    }
    case BasisFamily::tensor: {
      const auto& f = j.at("factors");
      if (f.size() != 2) throw ConfigError("tensor basis JSON needs exactly two factors");
      return BasisSpec::tensor(basis_from_json(f[0]), basis_from_json(f[1]));
    }
  }
  throw ConfigError("unknown basis family in JSON");
}

json function_to_json(const FunctionHandle& h) {
  std::vector<double> c(h.coeffs().data(), h.coeffs().data() + h.coeffs().size());
  return json{{"basis", basis_to_json(h.basis())}, {"coeffs", c}};
}

FunctionHandle function_from_json(const json& j) {
  const auto c = j.at("coeffs").get<std::vector<double>>();
  return FunctionHandle(basis_from_json(j.at("basis")),
                        Eigen::Map<const Vec>(c.data(), static_cast<Index>(c.size())));
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace dipr
