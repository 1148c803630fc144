#pragma once

#include <json.hpp>

#include "bct/tables.hpp"

namespace bct {

// Document schema: {"R": [...], "C": [...], "K": [[...]] | {"kappa": int | "inf"}}.
// Unbounded matrix entries are written as the string "inf".
struct TableSpec {
  MarginPair margins;
  BoundsMatrix bounds;
};

TableSpec table_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TableSpec& spec);

nlohmann::json kappa_to_json(Kappa k);
Kappa kappa_from_json(const nlohmann::json& value);

}  // namespace bct
