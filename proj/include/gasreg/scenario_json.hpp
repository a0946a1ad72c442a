#pragma once

#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasreg/errors.hpp"
#include "gasreg/scenario.hpp"

namespace gasreg {

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void field_error(const std::string& field, const char* what) {
  throw invalid_input("scenario file: field '" + field + "' " + what);
}

inline void reject_unknown(const json& obj, const std::string& where,
                           const std::set<std::string>& allowed) {
  for (const auto& item : obj.items())
    if (allowed.find(item.key()) == allowed.end())
      throw invalid_input("scenario file: unknown field '" +
                          (where.empty() ? item.key() : where + "." + item.key()) + "'");
}

inline double get_num(const json& obj, const std::string& field, double fallback) {
  if (!obj.contains(field)) return fallback;
  const auto& v = obj.at(field);
  if (!v.is_number()) field_error(field, "must be a number");
  return v.get<double>();
}

inline int get_int(const json& obj, const std::string& field, int fallback) {
  if (!obj.contains(field)) return fallback;
  const auto& v = obj.at(field);
  if (!v.is_number_integer()) field_error(field, "must be an integer");
  return v.get<int>();
}

inline bool get_bool(const json& obj, const std::string& field, bool fallback) {
  if (!obj.contains(field)) return fallback;
  const auto& v = obj.at(field);
  if (!v.is_boolean()) field_error(field, "must be a boolean");
  return v.get<bool>();
}

inline std::string get_str(const json& obj, const std::string& field, const std::string& fallback) {
  if (!obj.contains(field)) return fallback;
  const auto& v = obj.at(field);
  if (!v.is_string()) field_error(field, "must be a string");
  return v.get<std::string>();
}

inline std::vector<double> get_vec(const json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) field_error(field, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline PipeParams pipe_from_json(const json& obj) {
  reject_unknown(obj, "pipe",
                 {"friction", "wave_speed", "diameter", "length", "outlet_flux", "inlet_density"});
  PipeParams p;
  p.friction = get_num(obj, "friction", p.friction);
  p.wave_speed = get_num(obj, "wave_speed", p.wave_speed);
  p.diameter = get_num(obj, "diameter", p.diameter);
  p.length = get_num(obj, "length", p.length);
  p.outlet_flux = get_num(obj, "outlet_flux", p.outlet_flux);
  p.inlet_density = get_num(obj, "inlet_density", p.inlet_density);
  return p;
}

inline Exosystem exo_from_json(const json& obj) {
  reject_unknown(obj, "exosystem", {"a", "c", "x0"});
  for (const char* key : {"a", "c", "x0"})
    if (!obj.contains(key)) field_error(std::string("exosystem.") + key, "is required");
  const auto& aj = obj.at("a");
  if (!aj.is_array() || aj.empty()) field_error("exosystem.a", "must be a matrix (array of rows)");
  const int n = static_cast<int>(aj.size());
  lin::Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    const auto row = get_vec(aj.at(static_cast<std::size_t>(i)), "exosystem.a");
    if (static_cast<int>(row.size()) != n) field_error("exosystem.a", "must be square");
    for (int j = 0; j < n; ++j) a(i, j) = row[static_cast<std::size_t>(j)];
  }
  return make_exosystem(a, get_vec(obj.at("c"), "exosystem.c"),
                        get_vec(obj.at("x0"), "exosystem.x0"));
}

inline Uncertainty uncertainty_from_json(const json& obj) {
  reject_unknown(obj, "uncertainty", {"kind", "bound", "cubic_coeff", "samples"});
  Uncertainty u;
  const std::string kind = get_str(obj, "kind", "none");
  if (kind == "none")
    u.kind = UncertaintyKind::None;
  else if (kind == "cubic-of-s")
    u.kind = UncertaintyKind::CubicOfS;
  else if (kind == "samples")
    u.kind = UncertaintyKind::Samples;
  else
    field_error("uncertainty.kind", "must be one of none, cubic-of-s, samples");
  u.bound = get_num(obj, "bound", u.bound);
  u.cubic_coeff = get_num(obj, "cubic_coeff", u.cubic_coeff);
  if (obj.contains("samples")) {
    const auto& sj = obj.at("samples");
    if (!sj.is_array()) field_error("uncertainty.samples", "must be an array of [t, eps] pairs");
    for (const auto& e : sj) {
      const auto pair = get_vec(e, "uncertainty.samples");
      if (pair.size() != 2) field_error("uncertainty.samples", "must be an array of [t, eps] pairs");
      u.series.emplace_back(pair[0], pair[1]);
    }
  }
  return u;
}

inline std::vector<lin::cplx> poles_from_json(const json& v) {
  if (!v.is_array()) field_error("h_poles", "must be an array of reals or [re, im] pairs");
  std::vector<lin::cplx> poles;
  for (const auto& e : v) {
    if (e.is_number()) {
      poles.emplace_back(e.get<double>(), 0.0);
    } else {
      const auto pair = get_vec(e, "h_poles");
      if (pair.size() != 2) field_error("h_poles", "must be an array of reals or [re, im] pairs");
      poles.emplace_back(pair[0], pair[1]);
    }
  }
  return poles;
}

}  // namespace detail

// Builds a scenario from a parsed JSON document. Unknown fields are
// rejected by name; only `version` and `horizon` are mandatory.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::field_error;
  if (!doc.is_object()) throw invalid_input("scenario file: top level must be an object");
  detail::reject_unknown(doc, "",
                         {"version", "name", "pipe", "exosystem", "uncertainty", "controller",
                          "plant", "grid_n", "horizon", "log_stride", "observer_init", "h_poles",
                          "dt_factor", "settle_band", "saturate_control"});
  if (!doc.contains("version")) field_error("version", "is required");
  if (!doc.at("version").is_number_integer() || doc.at("version").get<int>() != 1)
    field_error("version", "must be the integer 1");
  if (!doc.contains("horizon")) field_error("horizon", "is required");

  Scenario sc;
  sc.name = detail::get_str(doc, "name", "custom");
  if (doc.contains("pipe")) sc.pipe = detail::pipe_from_json(doc.at("pipe"));
  sc.exo = doc.contains("exosystem") ? detail::exo_from_json(doc.at("exosystem"))
                                     : reference_generator(sc.pipe);
  if (doc.contains("uncertainty")) sc.unc = detail::uncertainty_from_json(doc.at("uncertainty"));

  const std::string ctrl = detail::get_str(doc, "controller", "off");
  if (ctrl == "off")
    sc.controller = ControllerKind::Off;
  else if (ctrl == "known-exo")
    sc.controller = ControllerKind::KnownExo;
  else if (ctrl == "uncertain")
    sc.controller = ControllerKind::Uncertain;
  else
    field_error("controller", "must be one of off, known-exo, uncertain");

  const std::string plant = detail::get_str(doc, "plant", "nonlinear");
  if (plant == "nonlinear")
    sc.plant = PlantKind::Nonlinear;
  else if (plant == "linear-canonical")
    sc.plant = PlantKind::LinearCanonical;
  else
    field_error("plant", "must be one of nonlinear, linear-canonical");

  const std::string oi = detail::get_str(doc, "observer_init", "zero");
  if (oi == "zero")
    sc.observer_init = ObserverInit::Zero;
  else if (oi == "truth")
    sc.observer_init = ObserverInit::Truth;
  else
    field_error("observer_init", "must be one of zero, truth");

  sc.grid_n = detail::get_int(doc, "grid_n", sc.grid_n);
  sc.horizon = detail::get_num(doc, "horizon", sc.horizon);
  sc.log_stride = detail::get_int(doc, "log_stride", sc.log_stride);
  sc.dt_factor = detail::get_num(doc, "dt_factor", sc.dt_factor);
  sc.settle_band = detail::get_num(doc, "settle_band", sc.settle_band);
  sc.saturate_control = detail::get_bool(doc, "saturate_control", sc.saturate_control);
  if (doc.contains("h_poles")) sc.h_poles = detail::poles_from_json(doc.at("h_poles"));

  validate_scenario(sc);
  return sc;
}

// Parses scenario JSON from a stream; parse errors carry the line number.
inline Scenario load_scenario(std::istream& is, const std::string& origin = "scenario") {
  std::ostringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t stop = std::min(e.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i)
      if (text[i] == '\n') ++line;
    throw invalid_input(origin + ":" + std::to_string(line) + ": " + e.what());
  }
  return scenario_from_json(doc);
}

// Resolves a preset name or a path to a JSON scenario file.
inline Scenario resolve_scenario(const std::string& name_or_path) {
  for (const auto& preset : preset_names())
    if (preset == name_or_path) return preset_scenario(name_or_path);
  std::ifstream is(name_or_path);
  if (!is) {
    std::string known;
    for (const auto& preset : preset_names()) {
      if (!known.empty()) known += ", ";
      known += preset;
    }
    throw invalid_input("cannot open scenario '" + name_or_path + "' (not a file; presets: " +
                        known + ")");
  }
  return load_scenario(is, name_or_path);
}

}  // namespace gasreg
