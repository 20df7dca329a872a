#include "cadlag/io.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <type_traits>

#include "cadlag/errors.hpp"

namespace cadlag::io {

namespace {

[[noreturn]] void schema(const std::string& field, const std::string& detail) {
  throw ValidationError("schema." + field, detail);
}

const json& member(const json& j, const char* key) {
  if (!j.is_object()) schema(key, "expected an object holding '" + std::string(key) + "'");
  auto it = j.find(key);
  if (it == j.end()) schema(key, "missing field '" + std::string(key) + "'");
  return *it;
}

double number(const json& j, const char* field) {
  if (!j.is_number()) schema(field, "'" + std::string(field) + "' must be a number");
  return j.get<double>();
}

double number_at(const json& j, const char* key) { return number(member(j, key), key); }

std::size_t count_at(const json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    schema(key, "'" + std::string(key) + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const char* field) {
  if (!j.is_array()) schema(field, "'" + std::string(field) + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(number(x, field));
  return out;
}

template <typename T>
double optional_number(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? static_cast<double>(fallback) : number(*it, key);
}

std::vector<StepCoordinate> coords_from_json(const json& j) {
  if (!j.is_array()) schema("coords", "coords must be an array");
  std::vector<StepCoordinate> coords;
  for (const auto& c : j) {
    coords.push_back({numbers(member(c, "breakpoints"), "breakpoints"), numbers(member(c, "values"), "values")});
  }
  return coords;
}

json coords_to_json(const CadlagPath& p) {
  json coords = json::array();
  for (const auto& c : p.coordinates()) coords.push_back({{"breakpoints", c.breakpoints}, {"values", c.values}});
  return coords;
}

std::shared_ptr<const GeneratorSpec> base_spec(const json& j) {
  return std::make_shared<const GeneratorSpec>(spec_from_json(member(j, "base")));
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t b = 0; b < e.byte && b < text.size(); ++b) {
      if (text[b] == '\n') ++line;
    }
    throw ValidationError("json.syntax", "line " + std::to_string(line) + ": " + e.what());
  }
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("io.readable", "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_json(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(e.invariant(), file.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& file, const std::string& content) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("io.writable", "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw ValidationError("io.writable", "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

json horizon_to_json(const TimeHorizon& h) {
  if (h.is_finite()) return {{"kind", "finite"}, {"T", h.end()}};
  return {{"kind", "half_line"}, {"truncation", h.end()}};
}

TimeHorizon horizon_from_json(const json& j) {
  const auto& kind = member(j, "kind");
  if (kind == "finite") return TimeHorizon::finite(number_at(j, "T"));
  if (kind == "half_line") return TimeHorizon::half_line(optional_number(j, "truncation", 50.0));
  schema("kind", "horizon kind must be 'finite' or 'half_line'");
}

json path_to_json(const CadlagPath& p) {
  return {{"horizon", horizon_to_json(p.horizon())}, {"coords", coords_to_json(p)}};
}

CadlagPath path_from_json(const json& j, const std::optional<TimeHorizon>& fallback) {
  if (j.is_array()) {
    if (!fallback) schema("horizon", "a bare coords array needs a horizon from context");
    return CadlagPath(*fallback, coords_from_json(j));
  }
  std::optional<TimeHorizon> h = fallback;
  if (j.is_object() && j.contains("horizon")) h = horizon_from_json(j["horizon"]);
  if (!h) schema("horizon", "path has no horizon");
  return CadlagPath(*h, coords_from_json(member(j, "coords")));
}

json law_to_json(const DiscreteProcessLaw& Q) {
  json atoms = json::array();
  for (const auto& a : Q.atoms()) atoms.push_back({{"weight", a.weight}, {"paths", {{"coords", coords_to_json(a.path)}}}});
  return {{"grid", std::vector<double>(Q.times().begin(), Q.times().end())},
          {"d", Q.dimension()},
          {"horizon", horizon_to_json(Q.horizon())},
          {"atoms", std::move(atoms)}};
}

DiscreteProcessLaw law_from_json(const json& j) {
  const auto grid = numbers(member(j, "grid"), "grid");
  if (grid.empty()) schema("grid", "grid must be nonempty");
  const std::size_t d = count_at(j, "d");
  const TimeHorizon h = j.contains("horizon") ? horizon_from_json(j["horizon"]) : TimeHorizon::finite(grid.back());
  const auto& atoms_json = member(j, "atoms");
  if (!atoms_json.is_array()) schema("atoms", "atoms must be an array");
  std::vector<Atom> atoms;
  for (const auto& a : atoms_json) {
    auto path = path_from_json(member(a, "paths"), h);
    if (path.dimension() != d) {
      throw ValidationError("law.shared_dimension", "atom dimension differs from d = " + std::to_string(d));
    }
    atoms.push_back({std::move(path), number_at(a, "weight")});
  }
  return DiscreteProcessLaw(Partition(grid), std::move(atoms));
}

GeneratorSpec spec_from_json(const json& j) {
  GeneratorSpec spec;
  const auto& kind = member(j, "kind");
  if (j.contains("seed")) spec.seed = member(j, "seed").get<std::uint64_t>();
  if (j.contains("atom_cap")) spec.atom_cap = count_at(j, "atom_cap");
  if (kind == "scaled_random_walk") {
    spec.kind = ScaledRandomWalk{count_at(j, "n_steps"), optional_number(j, "T", 1.0)};
  } else if (kind == "binomial_tree") {
    spec.kind = BinomialTree{count_at(j, "depth"), number_at(j, "up"), number_at(j, "down"),
                             number_at(j, "p_up"), optional_number(j, "x0", 0.0), optional_number(j, "T", 0.0)};
  } else if (kind == "compensated_jump") {
    spec.kind = CompensatedJump{number_at(j, "jump_size"), number_at(j, "jump_prob"),
                                numbers(member(j, "grid"), "grid")};
  } else if (kind == "drifted") {
    spec.kind = Drifted{base_spec(j), number_at(j, "drift")};
  } else if (kind == "perturbed_sequence") {
    const auto& p = member(j, "perturbation");
    Perturbation pert;
    if (p == "jump_shift") pert = Perturbation::jump_shift;
    else if (p == "weight_shift") pert = Perturbation::weight_shift;
    else schema("perturbation", "perturbation must be 'jump_shift' or 'weight_shift'");
    spec.kind = PerturbedSequence{base_spec(j), count_at(j, "count"), pert, number_at(j, "scale")};
  } else {
    schema("kind", "unknown generator kind");
  }
  return spec;
}

json spec_to_json(const GeneratorSpec& spec) {
  json j = std::visit(
      [](const auto& g) -> json {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ScaledRandomWalk>) {
          return {{"kind", "scaled_random_walk"}, {"n_steps", g.n_steps}, {"T", g.T}};
        } else if constexpr (std::is_same_v<G, BinomialTree>) {
          return {{"kind", "binomial_tree"}, {"depth", g.depth}, {"up", g.up}, {"down", g.down},
                  {"p_up", g.p_up}, {"x0", g.x0}, {"T", g.T}};
        } else if constexpr (std::is_same_v<G, CompensatedJump>) {
          return {{"kind", "compensated_jump"}, {"jump_size", g.jump_size}, {"jump_prob", g.jump_prob},
                  {"grid", g.grid}};
        } else if constexpr (std::is_same_v<G, Drifted>) {
          return {{"kind", "drifted"}, {"base", spec_to_json(*g.base)}, {"drift", g.drift}};
        } else {
          return {{"kind", "perturbed_sequence"},
                  {"base", spec_to_json(*g.base)},
                  {"count", g.count},
                  {"perturbation", g.perturbation == Perturbation::jump_shift ? "jump_shift" : "weight_shift"},
                  {"scale", g.scale}};
        }
      },
      spec.kind);
  j["seed"] = spec.seed;
  j["atom_cap"] = spec.atom_cap;
  return j;
}

MzFunctional functional_from_json(const json& j) {
  const auto& type = member(j, "type");
  const std::size_t i = j.contains("i") ? count_at(j, "i") : 0;
  if (type == "window") return WindowAverage{i, number_at(j, "q"), number_at(j, "r")};
  if (type == "arctan") {
    const auto power = j.contains("power") ? count_at(j, "power") : 1;
    return ArctanMoment{i, static_cast<unsigned>(count_at(j, "k")), static_cast<int>(power)};
  }
  if (type == "terminal") return TerminalValue{i};
  schema("type", "functional type must be 'window', 'arctan' or 'terminal'");
}

json functional_to_json(const MzFunctional& f) {
  if (const auto* w = std::get_if<WindowAverage>(&f)) return {{"type", "window"}, {"i", w->i}, {"q", w->q}, {"r", w->r}};
  if (const auto* m = std::get_if<ArctanMoment>(&f)) {
    return {{"type", "arctan"}, {"i", m->i}, {"k", m->k}, {"power", m->power}};
  }
  return {{"type", "terminal"}, {"i", std::get<TerminalValue>(f).i}};
}

json to_json(const Classification& c) {
  return {{"martingale", c.martingale},
          {"supermartingale", c.supermartingale},
          {"quasi_statistic", c.quasimartingale_statistic},
          {"statistic_time", c.statistic_time}};
}

json to_json(const Norms& n) {
  return {{"lp_sup", n.lp_sup},
          {"hardy", n.hardy},
          {"emery_lower", n.emery_lower},
          {"emery_is_lower_bound", true},
          {"emery_exhaustive", n.emery_exhaustive},
          {"library_size", n.library_size}};
}

json to_json(const ConditionReport& r) {
  json curves = json::array();
  for (const auto& c : r.curves) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back({{"c", p.c}, {"value", p.value}});
    curves.push_back({{"name", c.name}, {"points", std::move(pts)}});
  }
  json offenders = json::array();
  for (const auto& o : r.offenders) offenders.push_back({{"law", o.law}, {"t", o.t}, {"value", o.value}});
  json j = {{"condition", to_string(r.condition)},
            {"statistic", r.statistic},
            {"value", finite_or_null(r.scalar)},
            {"curves", std::move(curves)},
            {"verdict", r.pass ? "pass" : "fail"},
            {"lower_bound", r.lower_bound},
            {"offenders", std::move(offenders)}};
  if (r.condition != Condition::UB) {
    j["c_max"] = r.c_max;
    j["eps"] = r.eps;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const ConvergenceReport& r) {
  return {{"fdd_gaps", r.fdd_gaps},
          {"functional_gaps", r.functional_gaps},
          {"fdd_converged", r.fdd_converged},
          {"functional_converged", r.functional_converged},
          {"converged", r.converged},
          {"fdd_library", fdd_library_description()},
          {"limit_classification", to_json(r.limit_classification)}};
}

json to_json(const StabilityReport& r) {
  auto verdict = [](const PropositionVerdict& v) {
    return json{{"hypotheses", v.hypotheses}, {"conclusion", v.conclusion}, {"status", v.status}};
  };
  return {{"ut", to_json(r.ut_report)},
          {"ub", to_json(r.ub_report)},
          {"ui", to_json(r.ui_report)},
          {"limit_ut", to_json(r.limit_ut_report)},
          {"limit_classification", to_json(r.limit_classification)},
          {"sequence_mean_abs", r.sequence_mean_abs},
          {"semimartingale_limit", verdict(r.semimartingale)},
          {"quasimartingale_limit", verdict(r.quasimartingale)},
          {"supermartingale_limit", verdict(r.supermartingale)}};
}

std::string curves_csv(const std::vector<ConditionReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "condition,curve,c,statistic\n";
  for (const auto& r : reports) {
    if (r.curves.empty()) {
      os << to_string(r.condition) << ",scalar,," << r.scalar << "\n";
      continue;
    }
    for (const auto& c : r.curves) {
      for (const auto& p : c.points) {
        os << to_string(r.condition) << ",\"" << c.name << "\"," << p.c << "," << p.value << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace cadlag::io
