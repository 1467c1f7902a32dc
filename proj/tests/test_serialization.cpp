#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "stagesta/error.hpp"
#include "stagesta/serialization.hpp"
#include "test_support.hpp"

using namespace stagesta;

namespace {

std::shared_ptr<const TimingGraph> pipeline() {
  static const auto g = std::make_shared<const TimingGraph>(build_rv32i_graph(PipelineConfig{}));
  return g;
}

// Serialized text survives a dump/parse cycle, as it would through a file.
Json reparse(const Json& j) { return Json::parse(j.dump(2)); }

}  // namespace

TEST(Serialization, GraphRoundTrip) {
  const TimingGraph& g = *pipeline();
  const TimingGraph back = graph_from_json(reparse(to_json(g)));
  EXPECT_EQ(back, g);
  EXPECT_EQ(to_json(back).dump(), to_json(g).dump());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TimingGraph r = testkit::random_dag(seed);
    EXPECT_EQ(graph_from_json(reparse(to_json(r))), r) << "seed " << seed;
  }
}

TEST(Serialization, PipelineConfigRoundTrip) {
  PipelineConfig c;
  c.alu_depth_levels = 11;
  c.slice_bits = 16;
  c.include_control_paths = false;
  const Json j = to_json(c);
  EXPECT_EQ(to_json(pipeline_config_from_json(reparse(j))).dump(), j.dump());
  // Partial documents overlay the base.
  const PipelineConfig partial = pipeline_config_from_json(Json::parse(R"({"slice_bits": 4})"));
  EXPECT_EQ(partial.slice_bits, 4);
  EXPECT_EQ(partial.alu_depth_levels, PipelineConfig{}.alu_depth_levels);
}

TEST(Serialization, DesignRoundTripReplays) {
  const Calibration cal = default_calibration();
  const std::vector<RealizedDesign> designs{
      realize_fpga(pipeline(), cal.fpga, 7),
      realize_asic(pipeline(), cal.asic, Corner::kSS, 12),
      realize_asic(pipeline(), cal.asic, Corner::kFF, std::nullopt),
      RealizedDesign::from_annotated(testkit::random_dag(3)),
  };
  for (const RealizedDesign& d : designs) {
    const RealizedDesign back = design_from_json(reparse(to_json(d)));
    EXPECT_EQ(back, d) << d.provenance().label();
    EXPECT_EQ(back.provenance(), d.provenance());
    EXPECT_EQ(fmax(back), fmax(d));
    if (d.provenance().fabric != Fabric::kAnnotated) {
      EXPECT_EQ(replay(back), d) << d.provenance().label();
    }
  }
}

TEST(Serialization, CalibrationRoundTrip) {
  const Calibration cal = default_calibration();
  const Json j = to_json(cal);
  const Calibration back = calibration_from_json(reparse(j), Calibration{});
  EXPECT_EQ(to_json(back).dump(), j.dump());
  // Partial overlays keep every other field.
  const Calibration tweaked =
      calibration_from_json(Json::parse(R"({"fpga": {"lut_delay_ps": 99.5}})"), cal);
  EXPECT_EQ(tweaked.fpga.lut_delay_ps, 99.5);
  EXPECT_EQ(tweaked.fpga.switch_delay_ps, cal.fpga.switch_delay_ps);
  EXPECT_EQ(to_json(tweaked.asic).dump(), to_json(cal.asic).dump());
}

TEST(Serialization, SignatureRoundTripKeepsNonFinite) {
  const Calibration cal = default_calibration();
  const SweepResult fpga = seed_sweep(pipeline(), cal.fpga, 4, 5);
  const SweepResult asic = corner_sweep(pipeline(), cal.asic, {Corner::kTT}, 4, 5);
  SignatureReport r = extract_signatures(fpga, asic);
  r.robustness_ratio[Transition::kIfId] = std::numeric_limits<double>::infinity();
  r.asic.transitions[Transition::kIdEx].skewness = std::numeric_limits<double>::quiet_NaN();
  const Json j = to_json(r);
  const SignatureReport back = signature_report_from_json(reparse(j));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_TRUE(std::isinf(back.robustness_ratio.at(Transition::kIfId)));
  EXPECT_TRUE(std::isnan(back.asic.transitions.at(Transition::kIdEx).skewness));
  EXPECT_EQ(back.fpga.bottleneck, r.fpga.bottleneck);
  EXPECT_EQ(back.asic.variability, r.asic.variability);
}

TEST(Serialization, HeaderChecks) {
  Json doc = file_header("graph");
  EXPECT_NO_THROW(check_header(doc, "graph"));
  EXPECT_THROW(check_header(doc, "design"), ParseError);
  doc["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(check_header(doc, "graph"), ParseError);
}

TEST(Serialization, MalformedFieldsNameTheField) {
  Json j = to_json(*pipeline());
  j["nodes"][0]["kind"] = "flipflop";
  try {
    graph_from_json(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("kind"), std::string::npos) << e.what();
  }
  Json k = to_json(*pipeline());
  k["edges"][0]["logic_ps"] = "fast";
  EXPECT_THROW(graph_from_json(k), ParseError);
}

TEST(Serialization, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "stagesta_serialization_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "graph.json").string();
  write_json_file(path, to_json(*pipeline()));
  EXPECT_EQ(graph_from_json(read_json_file(path)), *pipeline());
  std::filesystem::remove_all(dir);
  EXPECT_THROW(read_json_file(path), Error);
}
