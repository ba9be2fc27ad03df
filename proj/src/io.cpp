#include "eqdesign/io.hpp"

#include <fstream>
#include <sstream>

#include <unistd.h>

namespace eqdesign {

namespace {

template <typename T>
T field(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ValidationError(std::string(where) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(where) + ": bad \"" + key + "\": " + e.what());
  }
}

json parse_json(const std::string& text, const std::filesystem::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

Polynomial polynomial_from_json(int dim, const json& terms) {
  if (!terms.is_array()) throw ValidationError("a polynomial must be a list of {\"exp\", \"coef\"} terms");
  Polynomial p(dim);
  for (const auto& t : terms) {
    if (!t.is_object()) throw ValidationError("polynomial term must be an object");
    const auto exps = field<std::vector<int>>(t, "exp", "polynomial term");
    if (static_cast<int>(exps.size()) != dim) {
      throw ValidationError("polynomial term has " + std::to_string(exps.size()) + " exponents, expected " +
                            std::to_string(dim));
    }
    for (int e : exps) {
      if (e < 0) throw ValidationError("negative exponent in polynomial term");
    }
    p.add_term(MultiIndex(exps), field<double>(t, "coef", "polynomial term"));
  }
  return p;
}

json polynomial_to_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& [alpha, c] : p.terms()) {
    out.push_back({{"exp", alpha.exponents()}, {"coef", c}});
  }
  return out;
}

SemiAlgebraicSet parse_custom_set(const json& j) {
  if (!j.is_object()) throw ValidationError("custom set file must contain a JSON object");
  const int d = field<int>(j, "dim", "custom set");
  if (d < 1) throw ValidationError("custom set: dim must be >= 1");
  const auto& gens = j.contains("generators") ? j.at("generators") : json::array();
  if (!gens.is_array()) throw ValidationError("custom set: \"generators\" must be a list");
  std::vector<Polynomial> polys;
  for (const auto& g : gens) polys.push_back(polynomial_from_json(d, g));
  Eigen::MatrixX2d bounds(d, 2);
  bounds.col(0).setConstant(-1.0);
  bounds.col(1).setConstant(1.0);
  if (j.contains("bounds")) {
    const auto b = field<std::vector<std::vector<double>>>(j, "bounds", "custom set");
    if (static_cast<int>(b.size()) != d) throw ValidationError("custom set: bounds needs one [lo, hi] per coordinate");
    for (int i = 0; i < d; ++i) {
      if (b[static_cast<std::size_t>(i)].size() != 2) throw ValidationError("custom set: bounds entries are [lo, hi]");
      bounds(i, 0) = b[static_cast<std::size_t>(i)][0];
      bounds(i, 1) = b[static_cast<std::size_t>(i)][1];
    }
  }
  const std::string name = j.value("name", std::string("custom"));
  return SemiAlgebraicSet::custom(d, std::move(polys), bounds, name);
}

SemiAlgebraicSet load_custom_set(const std::filesystem::path& path) {
  return parse_custom_set(parse_json(read_file(path), path));
}

json moments_to_json(const SemiAlgebraicSet& set, const MomentVector<double>& phi) {
  json entries = json::array();
  for (int i = 0; i < phi.size(); ++i) {
    entries.push_back({{"exp", phi.basis()[i].exponents()}, {"value", phi(i)}});
  }
  return {{"set", set.name()}, {"dim", phi.dim()}, {"degree", phi.degree()}, {"moments", entries}};
}

json design_to_json(const DesignMeasure& design, const SolveReport* report) {
  json atoms = json::array();
  for (Eigen::Index j = 0; j < design.atoms.cols(); ++j) {
    atoms.push_back(std::vector<double>(design.atoms.col(j).data(), design.atoms.col(j).data() + design.dim()));
  }
  json out{{"atoms", atoms},
           {"weights", std::vector<double>(design.weights.data(), design.weights.data() + design.weights.size())}};
  if (report) {
    out["objective"] = report->objective;
    out["gap"] = report->gap;
    out["support_residual"] = report->support_residual;
    out["bound"] = report->bound;
    out["iterations"] = report->iterations;
    out["converged"] = report->converged;
    out["grid_size"] = report->grid_size;
    out["block_dims"] = report->block_dims;
    out["monotonicity_fallbacks"] = report->monotonicity_fallbacks;
  }
  return out;
}

DesignMeasure design_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("design file must contain a JSON object");
  const auto atoms = field<std::vector<std::vector<double>>>(j, "atoms", "design");
  const auto weights = field<std::vector<double>>(j, "weights", "design");
  if (atoms.empty()) throw ValidationError("design has no atoms");
  if (atoms.size() != weights.size()) throw ValidationError("design: atoms and weights differ in count");
  const auto d = static_cast<Eigen::Index>(atoms.front().size());
  if (d < 1) throw ValidationError("design: atoms must have at least one coordinate");
  DesignMeasure out;
  out.atoms.resize(d, static_cast<Eigen::Index>(atoms.size()));
  out.weights.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (static_cast<Eigen::Index>(atoms[k].size()) != d) throw ValidationError("design: ragged atom list");
    for (Eigen::Index i = 0; i < d; ++i) out.atoms(i, static_cast<Eigen::Index>(k)) = atoms[k][static_cast<std::size_t>(i)];
    if (!(weights[k] >= 0.0)) throw ValidationError("design: weights must be nonnegative");
    out.weights(static_cast<Eigen::Index>(k)) = weights[k];
  }
  return out;
}

DesignMeasure load_design(const std::filesystem::path& path) {
  return design_from_json(parse_json(read_file(path), path));
}

std::string points_csv(const Eigen::MatrixXd& points, const std::vector<std::string>& extra_names,
                       const Eigen::MatrixXd& extra) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < points.rows(); ++i) os << (i ? "," : "") << 'x' << i + 1;
  for (const auto& name : extra_names) os << ',' << name;
  os << '\n';
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) os << (i ? "," : "") << points(i, j);
    for (Eigen::Index k = 0; k < extra.rows(); ++k) os << ',' << extra(k, j);
    os << '\n';
  }
  return os.str();
}

Eigen::MatrixXd read_points_csv(const std::filesystem::path& path, int dim) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ValidationError(path.string() + ": non-numeric row '" + line + "'");
    }
    first = false;
    if (static_cast<int>(row.size()) < dim) {
      throw ValidationError(path.string() + ": row has " + std::to_string(row.size()) + " columns, expected " +
                            std::to_string(dim));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no points");
  Eigen::MatrixXd P(dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int i = 0; i < dim; ++i) P(i, static_cast<Eigen::Index>(j)) = rows[j][static_cast<std::size_t>(i)];
  }
  return P;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

}  // namespace eqdesign
