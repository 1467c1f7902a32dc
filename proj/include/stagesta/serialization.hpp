#ifndef STAGESTA_SERIALIZATION_HPP
#define STAGESTA_SERIALIZATION_HPP

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "stagesta/fabric_models.hpp"
#include "stagesta/pipeline_gen.hpp"
#include "stagesta/stats_analysis.hpp"
#include "stagesta/timing_graph.hpp"

namespace stagesta {

using Json = nlohmann::ordered_json;

// Every file the tool writes carries this version and a "kind" tag.
inline constexpr int kSchemaVersion = 1;

// {"schema_version": 1, "kind": kind}
Json file_header(const std::string& kind);
// Throws ParseError unless the document has the expected kind and version.
void check_header(const Json& doc, const std::string& kind);

// Field-wise mirrors of the domain types. The from_json side throws
// ParseError(0, ...) naming the offending field; domain validation (graph
// invariants, model invariants) is left to validate() / check_model().
Json to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig base = {});

Json to_json(const TimingGraph& graph);
TimingGraph graph_from_json(const Json& j);

Json to_json(const FpgaFabricModel& model);
FpgaFabricModel fpga_model_from_json(const Json& j, FpgaFabricModel base = {});
Json to_json(const AsicFabricModel& model);
AsicFabricModel asic_model_from_json(const Json& j, AsicFabricModel base = {});

// {"fpga": ..., "asic": ...}; missing fields keep the base values.
Json to_json(const Calibration& calibration);
Calibration calibration_from_json(const Json& j, Calibration base);

Json to_json(const Provenance& provenance);
Provenance provenance_from_json(const Json& j);

// Graph, realized delays, provenance and the generating model.
Json to_json(const RealizedDesign& design);
RealizedDesign design_from_json(const Json& j);

Json to_json(const StageStatistics& stats);
Json to_json(const SensitivityReport& report);
Json to_json(const FabricSignature& signature);
Json to_json(const SignatureReport& report);
SignatureReport signature_report_from_json(const Json& j);

// Throws Error(kIoFailure) or ParseError (line 0).
Json read_json_file(const std::string& path);
// Two-space indented, trailing newline. Throws Error(kIoFailure).
void write_json_file(const std::string& path, const Json& doc);

}  // namespace stagesta

#endif  // STAGESTA_SERIALIZATION_HPP
