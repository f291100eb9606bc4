// Copyright 2026 The DPPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON forms of budgets, ledgers and mechanism reports, and the prototype
// file pair: a DPPLEMB1 file with one row per (class, k) in class-major
// order, plus a "<file>.json" sidecar:
//
//   {"format": "dppl-protos/1", "provenance": ..., "num_classes": C,
//    "per_class": K, "dim": d, "pool": k, "ledger": [...], "total_budget": {...},
//    "warnings": [...], "reports": [...], "public_ids": [...]}

#ifndef DPPL_SERIALIZE_HPP_
#define DPPL_SERIALIZE_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dppl/data.hpp"
#include "dppl/mean.hpp"
#include "dppl/privacy.hpp"
#include "dppl/prototypes.hpp"

namespace dppl {

using Json = nlohmann::ordered_json;

inline Json ToJson(const PrivacyBudget& b) {
  return Json{{"kind", BudgetKindName(b.kind())}, {"value", b.value()}};
}

inline PrivacyBudget BudgetFromJson(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const double v = j.at("value").get<double>();
  if (kind == "pure-dp") return PrivacyBudget::PureDp(v);
  if (kind == "zcdp") return PrivacyBudget::Zcdp(v);
  throw FormatError("unknown budget kind '" + kind + "'");
}

inline Json ToJson(const AccountingLedger& ledger) {
  Json entries = Json::array();
  for (const auto& e : ledger.entries()) {
    Json j{{"mechanism", e.mechanism}};
    j["class"] = e.class_id ? Json(*e.class_id) : Json("global");
    j["budget"] = ToJson(e.budget);
    entries.push_back(std::move(j));
  }
  return entries;
}

inline AccountingLedger LedgerFromJson(const Json& j) {
  std::vector<LedgerEntry> entries;
  for (const auto& e : j) {
    std::optional<std::uint32_t> cls;
    if (!e.at("class").is_string()) cls = e.at("class").get<std::uint32_t>();
    entries.push_back({e.at("mechanism").get<std::string>(), cls, BudgetFromJson(e.at("budget"))});
  }
  return AccountingLedger(std::move(entries));
}

inline Json ToJson(const MechanismReport& r) {
  Json j{{"mechanism", r.mechanism}};
  j[r.budget.kind() == BudgetKind::kPureDp ? "epsilon" : "rho"] = r.budget.value();
  j["sensitivity"] = r.sensitivity;
  if (r.noise_scale) j["sigma"] = *r.noise_scale;
  if (r.exponent_scale) j["exponent_scale"] = *r.exponent_scale;
  j["seed"] = r.seed;
  j["stream"] = r.stream;
  if (r.candidates) j["candidates"] = *r.candidates;
  if (r.dimension) j["dimension"] = *r.dimension;
  if (r.class_id) j["class"] = *r.class_id;
  if (r.doubled_cost) j["doubled_cost"] = true;
  j["neighborhood"] = r.neighborhood;
  return j;
}

inline MechanismReport ReportFromJson(const Json& j) {
  MechanismReport r;
  r.mechanism = j.at("mechanism").get<std::string>();
  r.budget = j.contains("epsilon") ? PrivacyBudget::PureDp(j.at("epsilon").get<double>())
                                   : PrivacyBudget::Zcdp(j.at("rho").get<double>());
  r.sensitivity = j.at("sensitivity").get<double>();
  if (j.contains("sigma")) r.noise_scale = j.at("sigma").get<double>();
  if (j.contains("exponent_scale")) r.exponent_scale = j.at("exponent_scale").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.stream = j.at("stream").get<std::uint64_t>();
  if (j.contains("candidates")) r.candidates = j.at("candidates").get<std::uint64_t>();
  if (j.contains("dimension")) r.dimension = j.at("dimension").get<std::uint64_t>();
  if (j.contains("class")) r.class_id = j.at("class").get<std::uint32_t>();
  r.doubled_cost = j.value("doubled_cost", false);
  r.neighborhood = j.value("neighborhood", "add-remove");
  return r;
}

inline Json ToJson(const MeanDiagnostics& d) {
  return Json{{"radii", d.radii}, {"clipped_fraction", d.clipped_fraction},
              {"diverged", d.diverged}};
}

inline std::filesystem::path SidecarPath(const std::filesystem::path& proto_path) {
  return std::filesystem::path(proto_path.string() + ".json");
}

inline Json PrototypeSidecar(const PrototypeSet& set) {
  Json j{{"format", "dppl-protos/1"},
         {"provenance", ProvenanceName(set.provenance())},
         {"num_classes", set.num_classes()},
         {"per_class", set.per_class()},
         {"dim", set.dim()},
         {"pool", set.pool()}};
  j["ledger"] = ToJson(set.ledger());
  if (!set.ledger().empty()) {
    const auto total = ComposeParallel(set.ledger());
    j["total_budget"] = ToJson(total.total);
    j["warnings"] = total.warnings;
  }
  Json reports = Json::array();
  for (const auto& r : set.reports()) reports.push_back(ToJson(r));
  j["reports"] = std::move(reports);
  if (!set.public_ids().empty()) j["public_ids"] = set.public_ids();
  return j;
}

inline void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("short write to " + path.string());
}

inline Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline EmbeddingMatrix PrototypeRows(const PrototypeSet& set) {
  return EmbeddingMatrix(std::size_t{set.num_classes()} * set.per_class(), set.dim(),
                         set.values());
}

// Writes the prototype rows and the sidecar. `extra` members are appended
// to the sidecar object.
inline void WritePrototypeSet(const std::filesystem::path& path, const PrototypeSet& set,
                              const Json& extra = Json::object()) {
  WriteEmbeddings(path, PrototypeRows(set));
  Json sidecar = PrototypeSidecar(set);
  for (const auto& [key, value] : extra.items()) sidecar[key] = value;
  WriteJsonFile(SidecarPath(path), sidecar);
}

// Reads a prototype file. Without a sidecar every row is its own class
// (K = 1) with non-private provenance.
inline PrototypeSet LoadPrototypeSet(const std::filesystem::path& path) {
  const auto rows = LoadEmbeddings(path, EmbeddingFormat::kBinary);
  std::uint32_t classes = static_cast<std::uint32_t>(rows.rows());
  std::uint32_t per_class = 1;
  Provenance provenance = Provenance::kNonPrivate;
  Json sidecar;
  const auto side = SidecarPath(path);
  if (std::filesystem::exists(side)) {
    sidecar = ReadJsonFile(side);
    try {
      classes = sidecar.at("num_classes").get<std::uint32_t>();
      per_class = sidecar.at("per_class").get<std::uint32_t>();
      provenance = ParseProvenance(sidecar.at("provenance").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(side.string() + ": " + e.what());
    }
  }
  if (std::size_t{classes} * per_class != rows.rows()) {
    throw FormatError(path.string() + ": sidecar declares " + std::to_string(classes) + "x" +
                      std::to_string(per_class) + " prototypes but the file has " +
                      std::to_string(rows.rows()) + " rows");
  }
  Require(classes >= 1, "prototype file is empty");
  PrototypeSet set(classes, per_class, rows.cols(), provenance);
  for (std::uint32_t c = 0; c < classes; ++c) {
    for (std::uint32_t k = 0; k < per_class; ++k) {
      set.SetVector(c, k, rows.row(std::size_t{c} * per_class + k));
    }
  }
  if (!sidecar.is_null()) {
    set.set_pool(sidecar.value("pool", std::size_t{1}));
    set.set_ledger(LedgerFromJson(sidecar.value("ledger", Json::array())));
    std::vector<MechanismReport> reports;
    for (const auto& r : sidecar.value("reports", Json::array())) reports.push_back(ReportFromJson(r));
    set.set_reports(std::move(reports));
    if (sidecar.contains("public_ids")) {
      set.set_public_ids(sidecar.at("public_ids").get<std::vector<std::uint64_t>>());
    }
  }
  return set;
}

}  // namespace dppl

#endif  // DPPL_SERIALIZE_HPP_
