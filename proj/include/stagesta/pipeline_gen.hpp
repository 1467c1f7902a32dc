#ifndef STAGESTA_PIPELINE_GEN_HPP
#define STAGESTA_PIPELINE_GEN_HPP

#include <set>
#include <string_view>

#include "stagesta/timing_graph.hpp"

namespace stagesta {

struct PipelineConfig {
  int word_width = 32;
  // Datapath buses are modeled one node per slice_bits-wide functional slice.
  int slice_bits = 8;
  int regfile_entries = 32;
  int regfile_read_ports = 2;
  int regfile_write_ports = 1;
  int alu_depth_levels = 8;
  // EX: EX/MEM bank, MEM: MEM/WB bank, WB: write-back mux output.
  std::set<Stage> bypass_sources{Stage::kEX, Stage::kMEM, Stage::kWB};
  double mem_macro_access_ps_hint = 0.0;
  bool include_control_paths = true;
  FabricGrid fabric_grid{48, 16};
  // Structural annotations only; fabric models supply realized delays.
  double clock_period_ps = 2000.0;
  double nominal_cell_ps = 100.0;

  int slice_count() const { return (word_width + slice_bits - 1) / slice_bits; }
};

// Throws Error(kInvalidConfig) describing the first broken invariant.
void check_config(const PipelineConfig& config);

// Stage-tagged graph of the five-stage RV32I core. Node names follow
// "<group>.<unit>.<element>"; each combinational cell is an input pin node
// ("/a") and an output pin node ("/y") joined by one CellArc. Registers are
// tagged with the stage they feed (PC: IF, IF/ID and register file: ID,
// ID/EX: EX, EX/MEM: MEM, MEM/WB: WB). Deterministic in config.
TimingGraph build_rv32i_graph(const PipelineConfig& config);

// Functional unit token of a hierarchical node name ("ex.alu.l3_s1/y" -> "alu").
std::string_view unit_of(std::string_view node_name);

}  // namespace stagesta

#endif  // STAGESTA_PIPELINE_GEN_HPP
