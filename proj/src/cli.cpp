#include "cadlag/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cadlag/errors.hpp"
#include "cadlag/io.hpp"

namespace cadlag::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ValidationError(std::string("cli.") + what, "cannot read number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<LevelPair> parse_levels(const std::string& text) {
  if (text == "default") return default_levels();
  std::vector<LevelPair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("cli.levels", "levels are written a:b,a:b,...");
    const auto a = parse_list(item.substr(0, colon), "levels");
    const auto b = parse_list(item.substr(colon + 1), "levels");
    if (a.size() != 1 || b.size() != 1) throw ValidationError("cli.levels", "levels are written a:b,a:b,...");
    if (!(a[0] < b[0])) throw ValidationError("cli.levels", "level pair needs a < b");
    out.emplace_back(a[0], b[0]);
  }
  return out;
}

json level_json(const std::vector<LevelPair>& levels) {
  json j = json::array();
  for (auto [a, b] : levels) j.push_back({a, b});
  return j;
}

// A family file holds a law, an array of laws or law file names, or {"laws": [...]}.
std::vector<DiscreteProcessLaw> load_laws(const fs::path& file) {
  json j = io::read_json_file(file);
  if (j.is_object() && j.contains("laws")) j = j["laws"];
  if (!j.is_array()) return {io::law_from_json(j)};
  std::vector<DiscreteProcessLaw> out;
  for (const auto& e : j) {
    if (e.is_string()) {
      fs::path p = e.get<std::string>();
      if (p.is_relative()) p = file.parent_path() / p;
      for (auto& q : load_laws(p)) out.push_back(std::move(q));
    } else {
      out.push_back(io::law_from_json(e));
    }
  }
  if (out.empty()) throw ValidationError("schema.laws", "no laws in " + file.string());
  return out;
}

std::vector<MzFunctional> default_functionals(const TimeHorizon& h, std::size_t d) {
  std::vector<MzFunctional> fs;
  const double T = h.end();
  for (std::size_t i = 0; i < d; ++i) {
    fs.push_back(WindowAverage{i, 0.0, T});
    for (int j = 0; j < 4; ++j) fs.push_back(WindowAverage{i, j * T / 4, T / 4});
    for (unsigned k = 0; k < 4; ++k) {
      fs.push_back(ArctanMoment{i, k, 1});
      fs.push_back(ArctanMoment{i, k, 2});
    }
    if (h.is_finite()) fs.push_back(TerminalValue{i});
  }
  return fs;
}

std::vector<MzFunctional> load_functionals(const std::string& file, const TimeHorizon& h, std::size_t d) {
  if (file.empty()) return default_functionals(h, d);
  const json j = io::read_json_file(file);
  if (!j.is_array()) throw ValidationError("schema.functionals", "functional file must hold an array");
  std::vector<MzFunctional> out;
  for (const auto& f : j) out.push_back(io::functional_from_json(f));
  return out;
}

json functionals_json(const std::vector<MzFunctional>& fs) {
  json j = json::array();
  for (const auto& f : fs) j.push_back(io::functional_to_json(f));
  return j;
}

void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    io::write_file_atomic(out_path, text);
  }
}

json report(const json& config, json results) {
  return {{"tool_version", kToolVersion}, {"config_echo", config}, {"results", std::move(results)}};
}

struct Options {
  // generate
  std::string spec, out;
  // check
  std::string law;
  double tol_check = 1e-12, p = 1.0;
  // metric
  std::vector<std::string> paths;
  std::string method = "j1", functionals;
  int refinement = 1, rmax = 8;
  // diagnose
  std::string family, condition = "all", levels = "default", cgrid = "1,2,4,8", t_list, format = "json";
  double cmax = 0, eps = 0.05;
  std::uint64_t seed = 0;
  std::size_t extra_random = 0, max_bits = 16;
  // converge
  std::vector<std::string> sequence;
  std::string limit, grid;
  double tol_converge = 0.01;
};

int do_generate(const Options& o, std::ostream& out) {
  const auto spec = io::spec_from_json(io::read_json_file(o.spec));
  const json config = {{"subcommand", "generate"}, {"spec", io::spec_to_json(spec)}, {"out", o.out}};
  const auto generated = generate(spec);
  json results;
  if (const auto* law = std::get_if<DiscreteProcessLaw>(&generated)) {
    io::write_file_atomic(o.out, io::law_to_json(*law).dump() + "\n");
    results = {{"kind", "law"}, {"file", o.out}, {"atoms", law->size()}};
  } else {
    const auto& laws = std::get<std::vector<DiscreteProcessLaw>>(generated);
    fs::create_directories(o.out);
    json files = json::array();
    for (std::size_t k = 0; k < laws.size(); ++k) {
      std::ostringstream name;
      name << "law_" << std::setw(4) << std::setfill('0') << k + 1 << ".json";
      io::write_file_atomic(fs::path(o.out) / name.str(), io::law_to_json(laws[k]).dump() + "\n");
      files.push_back(name.str());
    }
    io::write_file_atomic(fs::path(o.out) / "sequence.json", files.dump(2) + "\n");
    results = {{"kind", "sequence"}, {"directory", o.out}, {"files", files}};
  }
  out << report(config, results).dump(2) << "\n";
  return 0;
}

int do_check(const Options& o, std::ostream& out) {
  const auto Q = io::law_from_json(io::read_json_file(o.law));
  const json config = {{"subcommand", "check"}, {"law", o.law}, {"tol", o.tol_check}, {"p", o.p}};
  const auto cls = classify(Q, o.tol_check);
  json results = io::to_json(cls);
  results["norms"] = io::to_json(norms(Q, o.p));
  emit(o.out, report(config, results).dump(2) + "\n", out);
  return 0;
}

// A path file holds one path, an array of paths or {"paths": [...]}.
std::vector<CadlagPath> load_paths(const std::vector<std::string>& files) {
  std::vector<CadlagPath> out;
  for (const auto& f : files) {
    json j = io::read_json_file(f);
    if (j.is_object() && j.contains("paths")) j = j["paths"];
    if (j.is_array() && !j.empty() && j.front().is_object() && !j.front().contains("breakpoints")) {
      for (const auto& e : j) out.push_back(io::path_from_json(e));
    } else {
      out.push_back(io::path_from_json(j));
    }
  }
  if (out.size() < 2) throw ValidationError("schema.paths", "metric needs at least two paths");
  for (const auto& p : out) {
    if (!(p.horizon() == out.front().horizon()) || p.dimension() != out.front().dimension()) {
      throw ValidationError("schema.paths", "paths must share horizon and dimension");
    }
  }
  return out;
}

int do_metric(const Options& o, std::ostream& out) {
  const auto paths = load_paths(o.paths);
  const std::size_t n = paths.size();
  const auto& h = paths.front().horizon();
  json config = {{"subcommand", "metric"}, {"paths", o.paths}, {"method", o.method}};
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
  json results = {{"method", o.method}, {"count", n}};

  if (o.method == "j1") {
    config["refinement"] = o.refinement;
    J1Options opts;
    opts.refinement = o.refinement;
    bool exhaustive = true;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (h.is_finite()) {
          const auto r = j1_finite_detailed(paths[a], paths[b], opts);
          matrix[a][b] = r.distance;
          exhaustive = exhaustive && r.exhaustive;
        } else {
          matrix[a][b] = j1_halfline(paths[a], paths[b], o.rmax, o.refinement).value;
        }
        matrix[b][a] = matrix[a][b];
      }
    }
    if (h.is_finite()) {
      results["exhaustive"] = exhaustive;
    } else {
      config["rmax"] = o.rmax;
      results["tail_bound"] = std::ldexp(1.0, -o.rmax);
    }
  } else {
    const auto fs = load_functionals(o.functionals, h, paths.front().dimension());
    const auto used = with_terminal_values(fs, h, paths.front().dimension());
    config["functionals"] = functionals_json(used);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) matrix[a][b] = matrix[b][a] = mz_gap(paths[a], paths[b], fs);
    }
    if (!h.is_finite()) {
      double bound = 0;
      for (const auto& f : used) bound = std::max(bound, mz_truncation_bound(f, h));
      results["truncation_bound"] = bound;
    }
  }
  results["matrix"] = matrix;
  if (n == 2) results["distance"] = matrix[0][1];
  emit(o.out, report(config, results).dump(2) + "\n", out);
  return 0;
}

int do_diagnose(const Options& o, std::ostream& out) {
  const auto family = load_laws(o.family);
  const auto cgrid = parse_list(o.cgrid, "cgrid");
  if (cgrid.empty()) throw ValidationError("cli.cgrid", "empty threshold grid");
  const auto t_list = parse_list(o.t_list, "t_list");
  const auto levels = parse_levels(o.levels);
  const Threshold th{o.cmax > 0 ? o.cmax : cgrid.back(), o.eps};
  const json config = {{"subcommand", "diagnose"}, {"family", o.family},   {"condition", o.condition},
                       {"cmax", th.c_max},          {"eps", th.eps},        {"levels", level_json(levels)},
                       {"seed", o.seed},            {"cgrid", cgrid},       {"t_list", t_list},
                       {"extra_random", o.extra_random}, {"max_bits", o.max_bits}, {"format", o.format}};

  const std::vector<std::string> all = {"ub", "ui", "ut", "us"};
  std::vector<std::string> wanted;
  if (o.condition == "all") wanted = all;
  else if (std::find(all.begin(), all.end(), o.condition) != all.end()) wanted = {o.condition};
  else throw ValidationError("cli.condition", "condition must be ut, ub, ui, us or all");

  std::vector<ConditionReport> reports;
  for (const auto& c : wanted) {
    if (c == "ub") reports.push_back(check_UB(family));
    if (c == "ui") reports.push_back(check_UI(family, cgrid, th));
    if (c == "ut") {
      reports.push_back(check_UT_empirical(family, cgrid, t_list, levels, {o.extra_random, o.seed, o.max_bits}, th));
    }
    if (c == "us") reports.push_back(check_US(family, t_list, levels, cgrid, th));
  }
  json results = json::array();
  bool pass = true;
  for (const auto& r : reports) {
    results.push_back(io::to_json(r));
    pass = pass && r.pass;
  }
  const std::string text = report(config, results).dump(2) + "\n";
  if (o.format == "csv") {
    if (o.out.empty()) throw ValidationError("cli.out", "--format csv needs --out");
    io::write_file_atomic(o.out, text);
    io::write_file_atomic(fs::path(o.out).replace_extension(".csv"), io::curves_csv(reports));
  } else {
    emit(o.out, text, out);
  }
  return pass ? 0 : 1;
}

int do_converge(const Options& o, std::ostream& out) {
  std::vector<DiscreteProcessLaw> seq;
  for (const auto& f : o.sequence) {
    for (auto& q : load_laws(f)) seq.push_back(std::move(q));
  }
  const auto limit = io::law_from_json(io::read_json_file(o.limit));
  std::vector<double> grid = parse_list(o.grid, "grid");
  if (grid.empty()) grid.assign(limit.times().begin(), limit.times().end());
  const DenseGrid D(grid, limit.horizon());
  const auto fs = load_functionals(o.functionals, limit.horizon(), limit.dimension());
  const json config = {{"subcommand", "converge"}, {"sequence", o.sequence}, {"limit", o.limit},
                       {"grid", grid},             {"tol", o.tol_converge},   {"functionals", functionals_json(fs)},
                       {"format", o.format}};
  const auto r = converges(seq, limit, D, fs, o.tol_converge);
  const std::string text = report(config, io::to_json(r)).dump(2) + "\n";
  if (o.format == "csv") {
    if (o.out.empty()) throw ValidationError("cli.out", "--format csv needs --out");
    std::ostringstream csv;
    csv.precision(17);
    csv << "index,fdd_gap,functional_gap\n";
    for (std::size_t n = 0; n < r.fdd_gaps.size(); ++n) {
      csv << n + 1 << "," << r.fdd_gaps[n] << "," << r.functional_gaps[n] << "\n";
    }
    io::write_file_atomic(o.out, text);
    io::write_file_atomic(fs::path(o.out).replace_extension(".csv"), csv.str());
  } else {
    emit(o.out, text, out);
  }
  return r.converged ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diagnostics for step-path process laws"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options o;

  auto* gen = app.add_subcommand("generate", "Build a law or a sequence of laws from a generator spec");
  gen->add_option("--spec", o.spec, "Generator spec JSON file")->required();
  gen->add_option("--out", o.out, "Law file, or directory for sequences")->required();

  auto* chk = app.add_subcommand("check", "Classify a law and compute its norms");
  chk->add_option("--law", o.law, "Law JSON file")->required();
  chk->add_option("--tol", o.tol_check, "Tolerance on conditional increment means");
  chk->add_option("--p", o.p, "Exponent of the norms")->check(CLI::Range(1.0, 1e9));
  chk->add_option("--out", o.out, "Report file (default stdout)");

  auto* met = app.add_subcommand("metric", "Distance matrix between paths");
  met->add_option("paths,--paths", o.paths, "Path files (each a path or an array of paths)")->required();
  met->add_option("--method", o.method, "j1 or mz")->check(CLI::IsMember({"j1", "mz"}));
  met->add_option("--refinement", o.refinement, "Dyadic refinement depth for J1")->check(CLI::PositiveNumber);
  met->add_option("--rmax", o.rmax, "Number of half-line restriction terms")->check(CLI::PositiveNumber);
  met->add_option("--functionals", o.functionals, "JSON array of functionals for mz");
  met->add_option("--out", o.out, "Report file (default stdout)");

  auto* dia = app.add_subcommand("diagnose", "Check tightness conditions over a family of laws");
  dia->add_option("--family", o.family, "Family file: law, array of laws or law file names")->required();
  dia->add_option("--condition", o.condition, "ut, ub, ui, us or all")
      ->check(CLI::IsMember({"ut", "ub", "ui", "us", "all"}));
  dia->add_option("--cmax", o.cmax, "Threshold for the verdict (default: last of --cgrid)");
  dia->add_option("--eps", o.eps, "Tail bound for the verdict");
  dia->add_option("--levels", o.levels, "Level pairs a:b,a:b or 'default'");
  dia->add_option("--seed", o.seed, "Seed for sampled integrands");
  dia->add_option("--cgrid", o.cgrid, "Comma-separated increasing thresholds");
  dia->add_option("--t-list", o.t_list, "Comma-separated times (default: grid times)");
  dia->add_option("--extra-random", o.extra_random, "Sampled extreme integrands per law and time");
  dia->add_option("--max-bits", o.max_bits, "Enumerate extreme integrands up to this many coefficients");
  dia->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  dia->add_option("--out", o.out, "Report file (default stdout)");

  auto* con = app.add_subcommand("converge", "Convergence diagnostics of a sequence of laws");
  con->add_option("--sequence", o.sequence, "Law files in order (each may hold several laws)")->required();
  con->add_option("--limit", o.limit, "Limit law file")->required();
  con->add_option("--grid", o.grid, "Comma-separated evaluation times (default: limit grid)");
  con->add_option("--tol", o.tol_converge, "Gap tolerance for the verdict");
  con->add_option("--functionals", o.functionals, "JSON array of functionals");
  con->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  con->add_option("--out", o.out, "Report file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return do_generate(o, out);
    if (chk->parsed()) return do_check(o, out);
    if (met->parsed()) return do_metric(o, out);
    if (dia->parsed()) return do_diagnose(o, out);
    return do_converge(o, out);
  } catch (const ValidationError& e) {
    err << "error: invalid input [" << e.invariant() << "]: " << e.what() << "\n";
  } catch (const PredictabilityError& e) {
    err << "error: non-predictable integrand: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const io::json::exception& e) {
    err << "error: invalid input [schema]: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace cadlag::cli
