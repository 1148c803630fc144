#include "bct/tables_json.hpp"

#include <cmath>

namespace bct {

using nlohmann::json;

namespace {

Eigen::VectorXd vector_from_json(const json& value, const char* key) {
  if (!value.is_array()) throw DomainError(std::string("'") + key + "' must be an array of numbers");
  Eigen::VectorXd out(static_cast<Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number()) throw DomainError(std::string("'") + key + "' must contain only numbers");
    out[static_cast<Index>(i)] = value[i].get<double>();
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (is_integral(v[i]) && std::abs(v[i]) < 9e15)
      out.push_back(static_cast<std::int64_t>(std::llround(v[i])));
    else
      out.push_back(v[i]);
  }
  return out;
}

std::int64_t cap_from_json(const json& value) {
  if (value.is_string()) {
    if (parse_kappa(value.get<std::string>()).is_infinite()) return kUnbounded;
    throw DomainError("bound entries given as strings must be \"inf\"");
  }
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
    throw DomainError("bound entries must be nonnegative integers or \"inf\"");
  return value.get<std::int64_t>();
}

json cap_to_json(std::int64_t cap) { return cap == kUnbounded ? json("inf") : json(cap); }

}  // namespace

json kappa_to_json(Kappa k) { return cap_to_json(k.value()); }

Kappa kappa_from_json(const json& value) {
  const auto cap = cap_from_json(value);
  return cap == kUnbounded ? Kappa::infinite() : Kappa(cap);
}

TableSpec table_spec_from_json(const json& doc) {
  if (!doc.is_object()) throw DomainError("table document must be a JSON object");
  for (const char* key : {"R", "C", "K"})
    if (!doc.contains(key)) throw DomainError(std::string("table document is missing '") + key + "'");
  MarginPair margins(vector_from_json(doc.at("R"), "R"), vector_from_json(doc.at("C"), "C"));
  const json& k = doc.at("K");
  if (k.is_object()) {
    if (!k.contains("kappa")) throw DomainError("'K' object must contain 'kappa'");
    return {margins, BoundsMatrix::uniform(margins.m(), margins.n(), kappa_from_json(k.at("kappa")))};
  }
  if (!k.is_array() || k.empty() || !k[0].is_array()) throw DomainError("'K' must be a matrix or {\"kappa\": ...}");
  const Index rows = static_cast<Index>(k.size());
  const Index cols = static_cast<Index>(k[0].size());
  CapMatrix caps(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = k[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw DomainError("'K' rows must have equal length");
    for (Index j = 0; j < cols; ++j) caps(i, j) = cap_from_json(row[static_cast<std::size_t>(j)]);
  }
  return {margins, BoundsMatrix(std::move(caps))};
}

json to_json(const TableSpec& spec) {
  json doc;
  doc["R"] = vector_to_json(spec.margins.rows());
  doc["C"] = vector_to_json(spec.margins.cols());
  if (auto kappa = spec.bounds.uniform_value()) {
    doc["K"] = {{"kappa", kappa_to_json(*kappa)}};
  } else {
    json k = json::array();
    for (Index i = 0; i < spec.bounds.rows(); ++i) {
      json row = json::array();
      for (Index j = 0; j < spec.bounds.cols(); ++j) row.push_back(cap_to_json(spec.bounds(i, j)));
      k.push_back(std::move(row));
    }
    doc["K"] = std::move(k);
  }
  return doc;
}

}  // namespace bct
