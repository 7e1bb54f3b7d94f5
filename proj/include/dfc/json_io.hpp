#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfc/backward.hpp"
#include "dfc/errors.hpp"
#include "dfc/flux.hpp"
#include "dfc/optimal.hpp"
#include "dfc/profile.hpp"
#include "dfc/reachable.hpp"
#include "dfc/wave_fan.hpp"

namespace dfc {

using nlohmann::json;

// ---- step functions / profiles --------------------------------------------

inline json to_json(const StepFunction& s) {
  json j;
  j["breakpoints"] = s.breakpoints;
  j["values"] = s.values;
  json pieces = json::array();
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    json p;
    p["from"] = i == 0 ? json("-inf") : json(s.breakpoints[i - 1]);
    p["to"] = i == s.breakpoints.size() ? json("+inf") : json(s.breakpoints[i]);
    p["value"] = s.values[i];
    pieces.push_back(p);
  }
  j["pieces"] = pieces;
  return j;
}

inline StepFunction step_from_json(const json& j) {
  if (!j.is_object() || !j.contains("values"))
    throw schema_error("step function: expected object with 'breakpoints' and 'values'");
  StepFunction s;
  s.breakpoints = j.value("breakpoints", std::vector<double>{});
  s.values = j.at("values").get<std::vector<double>>();
  try {
    s.check_shape();
  } catch (const std::exception& e) {
    throw schema_error(std::string("step function: ") + e.what());
  }
  return s;
}

inline MonotoneProfile profile_from_json(const json& j) {
  StepFunction s = step_from_json(j);
  MonotoneProfile p(std::move(s.breakpoints), std::move(s.values));
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw schema_error(std::string("monotone profile: ") + e.what());
  }
  return p;
}

// ---- target elements --------------------------------------------------------

inline json to_json(const TargetElement& e) {
  json j;
  j["T"] = e.T;
  j["R1"] = e.R1;
  j["R2"] = e.R2;
  j["window"] = {e.xlo, e.xhi};
  j["y"] = to_json(static_cast<const StepFunction&>(e.y_inner));
  return j;
}

inline TargetElement element_from_json(const json& j) {
  TargetElement e;
  try {
    e.T = j.at("T").get<double>();
    e.R1 = j.at("R1").get<double>();
    e.R2 = j.at("R2").get<double>();
    const auto w = j.at("window");
    e.xlo = w.at(0).get<double>();
    e.xhi = w.at(1).get<double>();
    e.y_inner = profile_from_json(j.at("y"));
  } catch (const schema_error&) {
    throw;
  } catch (const std::exception& e2) {
    throw schema_error(std::string("target element: ") + e2.what());
  }
  try {
    e.validate();
  } catch (const std::exception& e2) {
    throw schema_error(std::string("target element: ") + e2.what());
  }
  return e;
}

// ---- wave fans ----------------------------------------------------------------

inline json to_json(const Region& r) {
  json j;
  j["kind"] = r.kind == Region::Kind::constant ? "constant"
              : r.kind == Region::Kind::fan    ? "fan"
                                               : "graded";
  j["side"] = std::string(1, r.side);
  if (r.kind == Region::Kind::constant) j["value"] = r.value;
  if (r.kind == Region::Kind::fan) j["center"] = {r.cx, r.ct};
  if (r.kind == Region::Kind::graded) j["foot"] = r.foot;
  if (!r.label.empty()) j["label"] = r.label;
  return j;
}

inline Region region_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const char side = j.value("side", std::string("f"))[0];
  const std::string label = j.value("label", std::string());
  if (kind == "constant") return Region::constant_state(j.at("value").get<double>(), side, label);
  if (kind == "fan")
    return Region::fan_wave(j.at("center").at(0).get<double>(),
                            j.at("center").at(1).get<double>(), side, label);
  if (kind == "graded") return Region::graded_wave(j.at("foot").get<double>(), label);
  throw schema_error("region: unknown kind '" + kind + "'");
}

inline json to_json(const WaveFan& w) {
  json j;
  j["T"] = w.T();
  j["R1_at_T"] = w.r1_at_T();
  j["R2_at_T"] = w.r2_at_T();
  json curves = json::array();
  for (const Curve& c : w.curves()) {
    json cj;
    cj["ts"] = c.ts;
    cj["xs"] = c.xs;
    cj["clamp"] = c.clamp == Curve::Clamp::none ? "none"
                  : c.clamp == Curve::Clamp::floor_zero ? "floor_zero" : "cap_zero";
    curves.push_back(cj);
  }
  j["curves"] = curves;
  json strips = json::array();
  for (const Strip& s : w.strips()) {
    json sj;
    sj["t_splits"] = s.t_splits;
    json regs = json::array();
    for (const Region& r : s.regions) regs.push_back(to_json(r));
    sj["regions"] = regs;
    strips.push_back(sj);
  }
  j["strips"] = strips;
  json names = json::object();
  for (const auto& [name, idx] : w.curve_names()) names[name] = idx;
  j["curve_names"] = names;
  return j;
}

/// Rebuilds a fan from its JSON form; the flux pair is supplied by the caller
/// (fans do not embed flux definitions).
inline WaveFan fan_from_json(const FluxPair& pair, const json& j) {
  try {
    FanAssembly a;
    const json& curves = j.at("curves");
    const json& strips = j.at("strips");
    if (curves.size() != strips.size() + 1)
      throw schema_error("wave fan: need one more curve than strips");
    auto curve_of = [](const json& cj) {
      Curve c;
      c.ts = cj.at("ts").get<std::vector<double>>();
      c.xs = cj.at("xs").get<std::vector<double>>();
      const std::string cl = cj.value("clamp", "none");
      c.clamp = cl == "floor_zero" ? Curve::Clamp::floor_zero
                : cl == "cap_zero" ? Curve::Clamp::cap_zero
                                   : Curve::Clamp::none;
      return c;
    };
    a.start(curve_of(curves.at(0)));
    for (std::size_t i = 0; i < strips.size(); ++i) {
      Strip s;
      s.t_splits = strips.at(i).value("t_splits", std::vector<double>{});
      for (const json& rj : strips.at(i).at("regions")) s.regions.push_back(region_from_json(rj));
      if (s.regions.size() != s.t_splits.size() + 1)
        throw schema_error("wave fan: strip needs one more region than time splits");
      a.add(std::move(s), curve_of(curves.at(i + 1)));
    }
    if (j.contains("curve_names"))
      for (const auto& [name, idx] : j["curve_names"].items())
        a.names[name] = idx.get<std::size_t>();
    return WaveFan(pair, j.at("T").get<double>(), std::move(a), j.value("R1_at_T", 0.0),
                   j.value("R2_at_T", 0.0));
  } catch (const schema_error&) {
    throw;
  } catch (const std::exception& e) {
    throw schema_error(std::string("wave fan: ") + e.what());
  }
}

// ---- flux specs ----------------------------------------------------------------

inline ConvexFlux flux_from_json(const json& j, double domain_bound) {
  if (!j.is_object() || !j.contains("type")) throw schema_error("flux: expected {type: ...}");
  const std::string type = j.at("type").get<std::string>();
  if (type == "builtin") {
    const std::string name = j.value("name", "");
    if (name == "burgers") return ConvexFlux::quadratic(0.5, 0.0, 0.0, domain_bound);
    if (name == "burgers_shifted")
      return ConvexFlux::quadratic(0.5, 0.0, j.value("shift", 1.0), domain_bound);
    throw schema_error("flux: unknown builtin '" + name + "'");
  }
  if (type == "quadratic")
    return ConvexFlux::quadratic(j.value("a", 0.5), j.value("b", 0.0), j.value("c", 0.0),
                                 domain_bound);
  if (type == "polynomial") {
    auto coef = j.at("coefficients").get<std::vector<double>>();
    ConvexFlux fl = ConvexFlux::polynomial(std::move(coef), domain_bound);
    try {
      fl.validate();
    } catch (const std::exception& e) {
      throw schema_error(std::string("flux: polynomial not strictly convex: ") + e.what());
    }
    return fl;
  }
  throw schema_error("flux: unknown type '" + type + "'");
}

// ---- scenarios -------------------------------------------------------------------

struct Knobs {
  double dx = 2e-3;
  double cfl = 0.45;
  int N = 64;
  int k = 512;
  int knots = 16;
  int starts = 16;
  int sweeps = 40;
  int threads = 0;
  std::uint64_t seed = 1;
  double domain_bound = 10.0;
  double tol = 5e-2;
};

struct Scenario {
  int schema_version = 1;
  FluxPair pair;
  double T = 1.0;
  Knobs knobs;
  std::optional<TargetElement> target;
  std::optional<StepFunction> u0;
  std::optional<TargetK> target_k;
  std::optional<StepFunction> outer_data;
  double B1 = 0.0, B2 = 0.0, C1 = 0.0, C2 = 0.0;
  std::vector<std::pair<double, double>> probes;
  json raw;
};

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw schema_error(std::string("scenario parse error: ") + e.what());
  }
  if (!j.contains("schema_version"))
    throw schema_error("scenario: missing required field 'schema_version'");
  if (j.at("schema_version").get<int>() != 1)
    throw schema_error("scenario: unsupported schema_version (expected 1)");

  Knobs k;
  if (j.contains("knobs")) {
    const json& kj = j["knobs"];
    k.dx = kj.value("dx", k.dx);
    k.cfl = kj.value("cfl", k.cfl);
    k.N = kj.value("N", k.N);
    k.k = kj.value("k", k.k);
    k.knots = kj.value("knots", k.knots);
    k.starts = kj.value("starts", k.starts);
    k.sweeps = kj.value("sweeps", k.sweeps);
    k.threads = kj.value("threads", k.threads);
    k.seed = kj.value("seed", k.seed);
    k.domain_bound = kj.value("domain_bound", k.domain_bound);
    k.tol = kj.value("tol", k.tol);
    for (const char* positive :
         {"dx", "cfl", "N", "k", "knots", "starts", "sweeps", "domain_bound", "tol"})
      if (kj.contains(positive) && kj[positive].get<double>() <= 0.0)
        throw schema_error(std::string("scenario: knob '") + positive + "' must be positive");
  }

  if (!j.contains("flux") || !j["flux"].contains("f") || !j["flux"].contains("g"))
    throw schema_error("scenario: missing flux.f / flux.g");
  ConvexFlux f = flux_from_json(j["flux"]["f"], k.domain_bound);
  ConvexFlux g = flux_from_json(j["flux"]["g"], k.domain_bound);
  Scenario s{1, FluxPair(std::move(f), std::move(g)), j.value("T", 1.0), k, {}, {}, {}, {},
             0,  0,  0, 0, {}, j};
  if (!(s.T > 0.0)) throw schema_error("scenario: T must be positive");

  if (j.contains("target")) s.target = element_from_json(j["target"]);
  if (j.contains("u0")) s.u0 = step_from_json(j["u0"]);
  if (j.contains("target_k")) {
    TargetK tk;
    tk.k = step_from_json(j["target_k"].at("k"));
    tk.c = j["target_k"].value("c", 1.0);
    try {
      tk.validate(s.pair);
    } catch (const std::exception& e) {
      throw schema_error(std::string("target_k: ") + e.what());
    }
    s.target_k = std::move(tk);
  }
  if (j.contains("outer_data")) s.outer_data = step_from_json(j["outer_data"]);
  if (j.contains("B")) {
    s.B1 = j["B"].at(0).get<double>();
    s.B2 = j["B"].at(1).get<double>();
  }
  if (j.contains("C")) {
    s.C1 = j["C"].at(0).get<double>();
    s.C2 = j["C"].at(1).get<double>();
  }
  if (j.contains("probes"))
    for (const auto& p : j["probes"])
      s.probes.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return s;
}

}  // namespace dfc
