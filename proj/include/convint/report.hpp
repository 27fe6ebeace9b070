#pragma once
#include <json.hpp>
#include <string>
#include <vector>

#include "convint/pipeline.hpp"
#include "convint/scheme.hpp"
#include "convint/subsolution.hpp"
#include "convint/verify.hpp"
#include "convint/viscous.hpp"

namespace convint {

using json = nlohmann::ordered_json;

json to_json(const VerifyReport& r);
json to_json(const EnergyCheck& e);
json to_json(const DefectReport& r);
json to_json(const StrictifyReport& r);
json to_json(const DefectExtract& e);
json to_json(const PipelineReport& r);

// one header row, then rows; numbers written with 17 significant digits
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace convint
