#ifndef RATECON_IO_HPP
#define RATECON_IO_HPP

#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ratecon/core.hpp"
#include "ratecon/market.hpp"
#include "ratecon/portfolio.hpp"
#include "ratecon/realtime.hpp"

namespace ratecon::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json parse_json(std::istream& in, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source + ": " + e.what());
  }
  return doc;
}

inline Energy require_int(const Json& doc, const std::string& key, const std::string& source) {
  if (!doc.contains(key) || !doc[key].is_number_integer())
    throw InputError(source + ": missing integer field '" + key + "'");
  return doc[key].get<Energy>();
}

inline double require_number(const Json& doc, const std::string& key, const std::string& source) {
  if (!doc.contains(key) || !doc[key].is_number())
    throw InputError(source + ": missing numeric field '" + key + "'");
  return doc[key].get<double>();
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace detail

// Portfolio document: { "horizon": T, "services": [ {"E": int, "m": int} ] }
// with optional service caps "E_max" / "m_max".
inline Portfolio portfolio_from_json(const Json& doc, const std::string& source = "portfolio") {
  const Energy horizon = detail::require_int(doc, "horizon", source);
  if (horizon < 1) throw InputError(source + ": horizon must be >= 1");
  if (!doc.contains("services") || !doc["services"].is_array())
    throw InputError(source + ": missing 'services' array");

  std::optional<Energy> e_cap, m_cap;
  if (doc.contains("E_max")) e_cap = detail::require_int(doc, "E_max", source);
  if (doc.contains("m_max")) m_cap = detail::require_int(doc, "m_max", source);

  std::vector<Service> services;
  std::size_t index = 0;
  for (const auto& item : doc["services"]) {
    const Energy e = detail::require_int(item, "E", source);
    const Energy m = detail::require_int(item, "m", source);
    if (e < 0 || m < 1)
      throw InputError(source + ": services[" + std::to_string(index) +
                       "] needs E >= 0 and m >= 1");
    if ((e_cap && e > *e_cap) || (m_cap && m > *m_cap))
      throw InfeasibleError(index, source + ": services[" + std::to_string(index) +
                                       "] exceeds configured caps");
    services.push_back({e, m});
    ++index;
  }
  return Portfolio(std::move(services), static_cast<std::size_t>(horizon));
}

inline Json portfolio_to_json(const Portfolio& p) {
  Json doc;
  doc["horizon"] = p.horizon();
  doc["services"] = Json::array();
  for (const Service& s : p.services()) doc["services"].push_back({{"E", s.energy}, {"m", s.rate}});
  return doc;
}

inline Portfolio load_portfolio(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open portfolio file: " + path);
  return portfolio_from_json(detail::parse_json(in, path), path);
}

// Market document: { "horizon": T, "pi_unit": [..], "c_da": x, "c_rt": x,
//                    "d_max": int, "y_max": int }.  Caps are optional at
// parse time; the optimizer refuses to run without them.
struct MarketFile {
  MarketModel model;
  std::optional<DecisionCaps> caps;
};

inline MarketFile market_from_json(const Json& doc, const std::string& source = "market") {
  const Energy horizon = detail::require_int(doc, "horizon", source);
  if (horizon < 1) throw InputError(source + ": horizon must be >= 1");
  if (!doc.contains("pi_unit") || !doc["pi_unit"].is_array())
    throw InputError(source + ": missing 'pi_unit' array");

  MarketFile mf;
  for (const auto& v : doc["pi_unit"]) {
    if (!v.is_number()) throw InputError(source + ": 'pi_unit' entries must be numbers");
    mf.model.unit_prices.push_back(v.get<double>());
  }
  if (mf.model.unit_prices.size() != static_cast<std::size_t>(horizon))
    throw InputError(source + ": 'pi_unit' must have exactly 'horizon' entries");
  mf.model.day_ahead_price = detail::require_number(doc, "c_da", source);
  mf.model.realtime_price = detail::require_number(doc, "c_rt", source);
  try {
    validate_market(mf.model);
  } catch (const std::invalid_argument& e) {
    throw InputError(source + ": " + e.what());
  }

  if (doc.contains("d_max") || doc.contains("y_max")) {
    DecisionCaps caps;
    caps.d_max = detail::require_int(doc, "d_max", source);
    caps.y_max = detail::require_int(doc, "y_max", source);
    if (caps.d_max < 0 || caps.y_max < 0) throw InputError(source + ": caps must be >= 0");
    mf.caps = caps;
  }
  return mf;
}

inline MarketFile load_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open market file: " + path);
  return market_from_json(detail::parse_json(in, path), path);
}

// Scenario CSV: one scenario per row, T integer columns.  A row may carry
// an explicit probability as a leading "weight:<value>" cell; weights are
// all-or-none and must sum to 1.
inline ScenarioSet scenarios_from_csv(std::istream& in, std::size_t horizon,
                                      const std::string& source = "scenarios") {
  ScenarioSet set;
  bool any_weight = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = detail::trim(line);
    if (row.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(detail::trim(cell));

    const std::string where = source + ":" + std::to_string(line_no);
    std::size_t first = 0;
    if (!cells.empty() && cells[0].rfind("weight:", 0) == 0) {
      try {
        set.weights.push_back(std::stod(cells[0].substr(7)));
      } catch (const std::exception&) {
        throw InputError(where + ": bad weight value");
      }
      any_weight = true;
      first = 1;
    } else if (any_weight) {
      throw InputError(where + ": weights must be given on every row or none");
    }
    if (cells.size() - first != horizon)
      throw InputError(where + ": expected " + std::to_string(horizon) + " columns, got " +
                       std::to_string(cells.size() - first));
    std::vector<Energy> r(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      try {
        std::size_t used = 0;
        r[t] = std::stoll(cells[first + t], &used);
        if (used != cells[first + t].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError(where + ": bad integer '" + cells[first + t] + "'");
      }
      if (r[t] < 0) throw InputError(where + ": negative renewable entry");
    }
    set.scenarios.push_back(EnergyVector(std::move(r)));
  }
  if (any_weight && set.weights.size() != set.scenarios.size())
    throw InputError(source + ": weights must be given on every row or none");
  try {
    set.validate(horizon);
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return set;
}

inline ScenarioSet load_scenarios(const std::string& path, std::size_t horizon) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path);
  return scenarios_from_csv(in, horizon, path);
}

/// Parses "v1,v2,..." into an EnergyVector of the expected length.
inline EnergyVector parse_energy_list(const std::string& text, std::size_t expected,
                                      const std::string& what = "vector") {
  std::vector<Energy> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const std::string c = detail::trim(cell);
    try {
      std::size_t used = 0;
      values.push_back(std::stoll(c, &used));
      if (used != c.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InputError(what + ": bad integer '" + c + "'");
    }
  }
  if (values.size() != expected)
    throw InputError(what + ": expected " + std::to_string(expected) + " entries, got " +
                     std::to_string(values.size()));
  for (Energy v : values)
    if (v < 0) throw InputError(what + ": entries must be >= 0");
  return EnergyVector(std::move(values));
}

inline Json energy_vector_to_json(const EnergyVector& v) {
  return Json(v.values());
}

}  // namespace ratecon::io

#endif
