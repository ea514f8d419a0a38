#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lossy/dball_code.hpp"
#include "lossy/evaluator.hpp"
#include "lossy/model.hpp"

namespace lossy {

using Json = nlohmann::json;

namespace detail {

// Scalars arrive as JSON numbers or as "p/q" strings (the exact-mode form).
template <class T>
T scalar_from_json(const Json& j);

template <>
inline double scalar_from_json<double>(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw SchemaError("zero denominator in '" + s + "'");
      return num / den;
    } catch (const std::invalid_argument&) {
      throw SchemaError("cannot parse number '" + s + "'");
    } catch (const std::out_of_range&) {
      throw SchemaError("number out of range '" + s + "'");
    }
  }
  throw SchemaError("expected a number or a 'p/q' string");
}

template <>
inline Rational scalar_from_json<Rational>(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>(), 1);
  if (j.is_number()) return Rational(j.get<double>());  // exact binary value
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  throw SchemaError("expected a number or a 'p/q' string");
}

template <class T>
Json scalar_to_json(const T& v) {
  if constexpr (Scalar<T>::exact)
    return Json(to_string(v));
  else
    return Json(v);
}

inline std::string label_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

inline const Json& require_key(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(std::string("instance is missing key '") + key + "'");
  return j.at(key);
}

}  // namespace detail

template <class T>
Instance<T> instance_from_json(const Json& j) {
  Instance<T> inst;
  for (const Json& v : detail::require_key(j, "x_symbols"))
    inst.source.symbols.push_back(detail::label_from_json(v));
  for (const Json& v : detail::require_key(j, "probs"))
    inst.source.probs.push_back(detail::scalar_from_json<T>(v));
  for (const Json& v : detail::require_key(j, "y_symbols"))
    inst.y_symbols.push_back(detail::label_from_json(v));
  const Json& rows = detail::require_key(j, "distortion");
  if (!rows.is_array()) throw SchemaError("'distortion' must be an array of rows");
  for (const Json& row : rows) {
    if (!row.is_array()) throw SchemaError("'distortion' must be an array of rows");
    std::vector<T> out;
    for (const Json& v : row) out.push_back(detail::scalar_from_json<T>(v));
    inst.distortion.matrix.push_back(std::move(out));
  }
  inst.distortion.level = detail::scalar_from_json<T>(detail::require_key(j, "D"));
  inst.epsilon = detail::scalar_from_json<T>(detail::require_key(j, "epsilon"));
  inst.delta = detail::scalar_from_json<T>(detail::require_key(j, "delta"));
  validate(inst);
  return inst;
}

template <class T>
Instance<T> load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open instance file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("instance file is not valid JSON: ") + e.what());
  }
  return instance_from_json<T>(j);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a over the raw file bytes; used to stamp emitted artifacts.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

template <class T>
Json code_table_to_json(const Instance<T>& inst, const CodeTable<T>& code) {
  Json j;
  j["kind"] = code.kind == CodeKind::kStochastic ? "stochastic" : "deterministic";
  Json decode = Json::array();
  for (std::uint32_t y : code.decode) decode.push_back(inst.y_symbols.at(y));
  j["decode"] = std::move(decode);
  Json encode = Json::array();
  for (std::size_t x = 0; x < code.encode.size(); ++x) {
    Json row;
    row["x"] = inst.source.symbols.at(x);
    row["index"] = code.encode[x].primary;
    row["prob"] = detail::scalar_to_json(code.encode[x].prob_primary);
    encode.push_back(std::move(row));
  }
  j["encode"] = std::move(encode);
  j["rate"] = code.rate;
  return j;
}

template <class T>
CodeTable<T> code_table_from_json(const Instance<T>& inst, const Json& j) {
  CodeTable<T> code;
  const std::string kind = detail::require_key(j, "kind").get<std::string>();
  if (kind == "stochastic")
    code.kind = CodeKind::kStochastic;
  else if (kind == "deterministic")
    code.kind = CodeKind::kDeterministic;
  else
    throw SchemaError("code kind must be 'stochastic' or 'deterministic'");

  std::map<std::string, std::uint32_t> y_index;
  for (std::size_t y = 0; y < inst.num_y(); ++y)
    y_index[inst.y_symbols[y]] = static_cast<std::uint32_t>(y);
  std::map<std::string, std::uint32_t> x_index;
  for (std::size_t x = 0; x < inst.num_x(); ++x)
    x_index[inst.source.symbols[x]] = static_cast<std::uint32_t>(x);

  for (const Json& v : detail::require_key(j, "decode")) {
    const std::string label = detail::label_from_json(v);
    auto it = y_index.find(label);
    if (it == y_index.end()) throw SchemaError("decode label '" + label + "' is not in Y");
    code.decode.push_back(it->second);
  }
  code.encode.assign(inst.num_x(), EncodeEntry<T>{1, T(1)});
  std::vector<char> seen(inst.num_x(), 0);
  for (const Json& row : detail::require_key(j, "encode")) {
    const std::string label = detail::label_from_json(detail::require_key(row, "x"));
    auto it = x_index.find(label);
    if (it == x_index.end()) throw SchemaError("encode label '" + label + "' is not in X");
    if (seen[it->second]) throw SchemaError("duplicate encode row for '" + label + "'");
    seen[it->second] = 1;
    EncodeEntry<T> entry;
    entry.primary = detail::require_key(row, "index").get<std::uint32_t>();
    entry.prob_primary = detail::scalar_from_json<T>(detail::require_key(row, "prob"));
    code.encode[it->second] = entry;
  }
  for (std::size_t x = 0; x < inst.num_x(); ++x)
    if (!seen[x])
      throw SchemaError("encode table is missing '" + inst.source.symbols[x] + "'");
  code.rate = detail::require_key(j, "rate").get<double>();
  return code;
}

template <class T>
Json code_report_to_json(const Instance<T>& inst, const CodeReport<T>& report) {
  Json j;
  j["excess_prob"] = detail::scalar_to_json(report.excess_prob);
  j["overflow_prob"] = detail::scalar_to_json(report.overflow_at_rate);
  j["rate"] = report.rate;
  j["is_code"] = report.is_code;
  Json law = Json::object();
  for (std::size_t y = 0; y < report.output_law.size(); ++y)
    law[inst.y_symbols[y]] = detail::scalar_to_json(report.output_law[y]);
  j["output_law"] = std::move(law);
  Json pmf = Json::array();
  for (const auto& [len, p] : report.length_pmf)
    pmf.push_back(Json::array({len, detail::scalar_to_json(p)}));
  j["length_pmf"] = std::move(pmf);
  return j;
}

}  // namespace lossy
