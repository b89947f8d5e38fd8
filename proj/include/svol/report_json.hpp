#pragma once

// JSON views of the report types. Reports are deterministic for a fixed
// config and seed: keys are emitted in insertion order and no wall-clock
// data enters here (timestamps live in the separate metadata file).

#include <json.hpp>

#include "svol/analysis.hpp"
#include "svol/config.hpp"
#include "svol/feller.hpp"
#include "svol/mc.hpp"
#include "svol/model.hpp"

namespace svol::report {

using Json = nlohmann::ordered_json;

Json to_json(const feller::FellerReport& r);
Json to_json(const model::ValidationReport& r);
Json to_json(const model::ZeroBoundaryClass& z);
Json to_json(const mc::Estimate& e);
Json to_json(const mc::ExplosionEstimate& e);
Json to_json(const analysis::ClassificationReport& r);
Json to_json(const analysis::CrossValidation& x);
Json demo_summary_json(const analysis::NonUniquenessDemo& d);
Json config_json(const cli::RunConfig& cfg);

}  // namespace svol::report
