#include "eqdesign/cli.hpp"

#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>

#include "eqdesign/io.hpp"
#include "eqdesign/parallel.hpp"
#include "eqdesign/verify.hpp"

namespace eqdesign::cli {

namespace {

struct SetArgs {
  std::string name = "interval";
  int dim = 1;
  std::string file;
  std::optional<double> add_ball;
};

struct Common {
  SetArgs set;
  int n = 1;
  std::string out_path;
  int samples = 1000;
};

void add_set_options(CLI::App* app, SetArgs& s) {
  app->add_option("--set", s.name, "interval, ball, box or simplex")->capture_default_str();
  app->add_option("--dim", s.dim, "dimension (ignored for interval)")->capture_default_str();
  app->add_option("--set-file", s.file, "custom set JSON (overrides --set)");
  app->add_option("--add-ball", s.add_ball, "append M - ||x||^2 to a custom set");
}

SemiAlgebraicSet make_set(const SetArgs& s, std::ostream& err) {
  if (!s.file.empty()) {
    auto set = load_custom_set(s.file);
    if (s.add_ball) {
      if (!(*s.add_ball > 0.0)) throw ValidationError("--add-ball needs a positive M");
      set.add_ball_constraint(*s.add_ball);
    }
    if (!set.has_ball_constraint()) {
      err << "warning: no generator of the form M - ||x||^2 in " << s.file
          << "; the theory assumes one (pass --add-ball M to append it)\n";
    }
    return set;
  }
  if (s.add_ball) throw ValidationError("--add-ball only applies to --set-file");
  const SetKind kind = parse_set_kind(s.name);
  if (kind == SetKind::custom) throw ValidationError("--set custom needs --set-file");
  return SemiAlgebraicSet::builtin(kind, s.dim);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_atomic(path, content);
  }
}

void emit_json(const std::string& path, const json& j, std::ostream& out) { emit(path, j.dump(2) + "\n", out); }

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::istringstream is(text);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ValidationError(std::string("bad ") + what + " '" + text + "'");
    }
  }
  return v;
}

json set_header(const SemiAlgebraicSet& set, int n) { return {{"set", set.name()}, {"dim", set.dim()}, {"n", n}}; }

ObjectiveKind objective_of(const std::string& name) { return parse_objective_kind(name); }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate D-optimal designs, equilibrium moments and Christoffel functions on semi-algebraic sets",
               "eqdesign"};
  app.require_subcommand(1);
  std::optional<unsigned> threads;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "worker threads (default: EQDESIGN_THREADS or all cores)");
  app.add_option("--seed", seed, "seed for every randomized step")->capture_default_str();

  Common c;

  auto* moments = app.add_subcommand("moments", "closed-form equilibrium moments of a builtin set");
  add_set_options(moments, c.set);
  int degree = 4;
  moments->add_option("--degree", degree, "moments up to this total degree")->capture_default_str();
  moments->add_option("--out", c.out_path, "output JSON (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve the classical or variant design problem on a grid");
  add_set_options(solve, c.set);
  std::string objective = "variant", grid_path;
  SolveOptions sopts;
  int density = 1;
  solve->add_option("--n", c.n, "degree n")->required();
  solve->add_option("--objective", objective, "classic or variant")->capture_default_str();
  solve->add_option("--grid", grid_path, "candidate points CSV (default: builtin grid)");
  solve->add_option("--density", density, "grid resolution multiplier")->capture_default_str();
  solve->add_option("--tol", sopts.tol, "relative gap tolerance")->capture_default_str();
  solve->add_option("--max-iter", sopts.max_iter, "iteration cap")->capture_default_str();
  solve->add_option("--out", c.out_path, "design JSON (default stdout)");

  auto* cubature = app.add_subcommand("cubature", "positive rule exact to degree 2n for the equilibrium measure");
  add_set_options(cubature, c.set);
  cubature->add_option("--n", c.n, "degree n")->required();
  cubature->add_option("--out", c.out_path, "rule CSV; a JSON summary is written next to it (default stdout)");

  auto* christoffel = app.add_subcommand("christoffel", "Christoffel-Darboux kernel K_n(x,x) and Lambda_n = 1/K");
  add_set_options(christoffel, c.set);
  std::string design_path, points_path;
  christoffel->add_option("--n", c.n, "degree n")->required();
  christoffel->add_option("--design", design_path, "design JSON (default: equilibrium measure of a builtin set)");
  christoffel->add_option("--points", points_path, "evaluation points CSV (default: the set's grid)");
  christoffel->add_option("--out", c.out_path, "output CSV (default stdout)");

  auto* verify = app.add_subcommand("verify", "sampled checks of the optimality structure");
  verify->require_subcommand(1);
  std::string point_text = "", monomial_text = "";
  auto add_verify = [&](const char* name, const char* help) {
    auto* v = verify->add_subcommand(name, help);
    add_set_options(v, c.set);
    v->add_option("--n", c.n, "degree n")->required();
    v->add_option("--samples", c.samples, "sample count")->capture_default_str();
    v->add_option("--out", c.out_path, "report JSON (default stdout)");
    return v;
  };
  auto* pell = add_verify("pell", "generalized Pell identity on and off the set");
  auto* boundary = add_verify("boundary", "kernel maxima on the boundary loci");
  auto* kkt = add_verify("kkt", "KKT residuals of a design for the set's own description");
  kkt->add_option("--design", design_path, "design JSON")->required();
  auto* pstar = add_verify("pstar", "p*_n at a point");
  pstar->add_option("--point", point_text, "comma-separated coordinates (default: bounding-box centre)");
  auto* weakstar = add_verify("weakstar", "integration gap of the degree-n equilibrium rule");
  weakstar->add_option("--monomial", monomial_text, "comma-separated exponents of x^alpha")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return invalid;
  }

  try {
    if (threads) {
      set_thread_count(*threads);
    } else if (const char* env = std::getenv("EQDESIGN_THREADS")) {
      try {
        set_thread_count(static_cast<unsigned>(std::stoul(env)));
      } catch (const std::exception&) {
        throw ValidationError(std::string("EQDESIGN_THREADS is not a number: '") + env + "'");
      }
    }

    const SemiAlgebraicSet set = make_set(c.set, err);

    if (*moments) {
      if (degree < 0) throw ValidationError("--degree must be nonnegative");
      emit_json(c.out_path, moments_to_json(set, equilibrium_moments(set, degree)), out);
    } else if (*solve) {
      const ObjectiveKind kind = objective_of(objective);
      sopts.seed = seed;
      std::optional<CandidateGrid> grid;
      if (!grid_path.empty()) {
        grid = CandidateGrid{read_points_csv(grid_path, set.dim()), GridProvenance::user};
      } else if (density != 1) {
        GridOptions g;
        g.density = density;
        g.seed = seed;
        grid = default_grid(set, g);
      }
      const auto result = solve_design(set, c.n, kind, grid, sopts);
      json j = set_header(set, c.n);
      j["objective_kind"] = std::string(to_string(kind));
      j.update(design_to_json(result.design, &result.report));
      emit_json(c.out_path, j, out);
      if (!result.report.converged) {
        err << "warning: not converged (gap " << result.report.gap << ", bound " << result.report.bound << ")\n";
      }
    } else if (*cubature) {
      const auto rule = cubature_for_equilibrium(set, c.n);
      const Eigen::MatrixXd w = rule.weights.transpose();
      emit(c.out_path, points_csv(rule.atoms, {"weight"}, w), out);
      if (!c.out_path.empty()) {
        json j = set_header(set, c.n);
        j["exact_degree"] = rule.exact_degree;
        j["atoms"] = rule.size();
        j["max_moment_residual"] =
            max_moment_residual(rule.atoms, rule.weights, equilibrium_moments(set, 2 * c.n), 2 * c.n);
        emit_json(std::filesystem::path(c.out_path).replace_extension(".json").string(), j, out);
      }
    } else if (*christoffel) {
      if (c.n < 0) throw ValidationError("--n must be nonnegative");
      MomentVector<double> phi = design_path.empty() ? equilibrium_moments(set, 2 * c.n)
                                                     : load_design(design_path).moments(2 * c.n);
      if (phi.dim() != set.dim()) throw ValidationError("design dimension does not match the set");
      const Eigen::MatrixXd pts =
          points_path.empty() ? default_grid(set).points : read_points_csv(points_path, set.dim());
      const auto K = build_kernel(phi, c.n);
      Eigen::MatrixXd cols(2, pts.cols());
      cols.row(0) = K.on_columns(basis_for(set.dim(), c.n)->evaluate_columns<double>(pts)).transpose();
      cols.row(1) = cols.row(0).cwiseInverse();
      emit(c.out_path, points_csv(pts, {"K", "Lambda"}, cols), out);
    } else if (*pell) {
      const auto r = check_pell(set, c.n, c.samples, seed);
      json j = set_header(set, c.n);
      j.update({{"check", "pell"}, {"samples", r.samples}, {"bound", r.bound}, {"max_residual", r.max_residual},
                {"tolerance", 1e-6 * r.bound}, {"passed", r.passed}});
      emit_json(c.out_path, j, out);
    } else if (*boundary) {
      const auto r = check_boundary_maxima(set, c.n, c.samples, seed);
      json j = set_header(set, c.n);
      j.update({{"check", "boundary"}, {"bound", r.bound}, {"max_kernel", r.max_kernel},
                {"equality_residual", r.equality_residual}, {"equality_points", r.equality_points.cols()},
                {"min_margin", std::isfinite(r.min_margin) ? json(r.min_margin) : json(nullptr)},
                {"interior_excess", r.interior_excess}, {"boundary_samples", r.boundary_samples},
                {"passed", r.passed}});
      emit_json(c.out_path, j, out);
    } else if (*kkt) {
      const auto design = load_design(design_path);
      const auto r = check_kkt_general(set, design, c.n, c.samples, seed);
      const double tol = 1e-6 * r.bound;
      json j = set_header(set, c.n);
      j.update({{"check", "kkt"}, {"bound", r.bound}, {"inequality_residual", r.inequality_residual},
                {"support_residual", r.support_residual}, {"identity_residual", r.identity_residual},
                {"tolerance", tol}, {"passed", r.inequality_residual <= tol && r.support_residual <= tol}});
      emit_json(c.out_path, j, out);
    } else if (*pstar) {
      Point x = (set.bounds().col(0) + set.bounds().col(1)) / 2.0;
      if (!point_text.empty()) {
        const auto v = parse_list(point_text, "--point");
        if (static_cast<int>(v.size()) != set.dim()) throw ValidationError("--point has the wrong dimension");
        x = Eigen::Map<const Eigen::VectorXd>(v.data(), set.dim());
      }
      const double p = pstar_value(set, c.n, x);
      json j = set_header(set, c.n);
      j.update({{"check", "pstar"}, {"point", std::vector<double>(x.data(), x.data() + x.size())}, {"value", p},
                {"deviation", std::abs(p - 1.0)}, {"tolerance", 1e-9}, {"passed", std::abs(p - 1.0) <= 1e-9}});
      emit_json(c.out_path, j, out);
    } else if (*weakstar) {
      const auto v = parse_list(monomial_text, "--monomial");
      if (static_cast<int>(v.size()) != set.dim()) throw ValidationError("--monomial has the wrong dimension");
      std::vector<int> e;
      for (double x : v) {
        if (x < 0 || x != std::floor(x)) throw ValidationError("--monomial needs nonnegative integer exponents");
        e.push_back(static_cast<int>(x));
      }
      const MultiIndex alpha(e);
      const double gap = weak_star_gap(set, c.n, Polynomial(set.dim(), {{alpha, 1.0}}));
      const bool exact = alpha.degree() <= 2 * c.n;
      json j = set_header(set, c.n);
      j.update({{"check", "weakstar"}, {"monomial", e}, {"gap", gap}, {"exact_expected", exact},
                {"tolerance", 1e-9}, {"passed", !exact || gap <= 1e-9}});
      emit_json(c.out_path, j, out);
    }
    return ok;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
}

}  // namespace eqdesign::cli
