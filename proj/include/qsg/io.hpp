#pragma once

#include <string>

#include "json.hpp"
#include "qsg/asymptotics.hpp"
#include "qsg/branch.hpp"
#include "qsg/shooting.hpp"
#include "qsg/spectra.hpp"

namespace qsg {

/// Version stamped into every JSON document as "schema".
inline constexpr int kSchemaVersion = 1;

using json = nlohmann::ordered_json;

void to_json(json& j, const Params& p);
void from_json(const json& j, Params& p);
void to_json(json& j, const ScalarDiagnostics& d);
void to_json(json& j, const SolveReport& r);
void to_json(json& j, const SpectralReport& r);
void to_json(json& j, const MassCurvePoint& pt);
void from_json(const json& j, MassCurvePoint& pt);
void to_json(json& j, const FitResult& f);
void to_json(json& j, const ModelChoice& m);
void to_json(json& j, const SubcriticalReport& r);
void to_json(json& j, const CriticalReport& r);
void to_json(json& j, const SupercriticalReport& r);
void to_json(json& j, const EnergyReport& r);
void to_json(json& j, const SignWindowInfo& w);
void to_json(json& j, const SolveDigest& d);
void from_json(const json& j, SolveDigest& d);
void to_json(json& j, const SpectralDigest& d);
void from_json(const json& j, SpectralDigest& d);
void to_json(json& j, const BranchRecord& r);
void from_json(const json& j, BranchRecord& r);

/// Top-level document: {"schema": 1, "kind": kind, ...fields of body}.
json document(const std::string& kind, const json& body);

void write_json(const std::string& path, const json& doc);
json read_json(const std::string& path);

}  // namespace qsg
