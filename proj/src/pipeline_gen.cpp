#include "stagesta/pipeline_gen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "stagesta/error.hpp"

namespace stagesta {

void check_config(const PipelineConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidConfig, what); };
  if (c.word_width < 1) fail("word_width must be >= 1");
  if (c.slice_bits < 1) fail("slice_bits must be >= 1");
  if (c.regfile_entries < 1) fail("regfile_entries must be >= 1");
  if (c.regfile_read_ports != 2) fail("regfile_read_ports must be 2");
  if (c.regfile_write_ports != 1) fail("regfile_write_ports must be 1");
  if (c.alu_depth_levels < 1) fail("alu_depth_levels must be >= 1");
  if (!(c.mem_macro_access_ps_hint >= 0)) fail("mem_macro_access_ps_hint must be >= 0");
  if (c.fabric_grid.width < 8 || c.fabric_grid.height < 4) fail("fabric_grid must be at least 8x4");
  if (!(c.clock_period_ps > 0)) fail("clock_period_ps must be > 0");
  if (!(c.nominal_cell_ps >= 0)) fail("nominal_cell_ps must be >= 0");
  for (Stage s : c.bypass_sources) {
    if (s != Stage::kEX && s != Stage::kMEM && s != Stage::kWB) {
      fail("bypass_sources must be drawn from {EX, MEM, WB}");
    }
  }
}

std::string_view unit_of(std::string_view name) {
  auto first = name.find('.');
  if (first == std::string_view::npos) return {};
  auto rest = name.substr(first + 1);
  auto end = rest.find_first_of("./");
  return rest.substr(0, end);
}

namespace {

// Placement is laid out on a nominal 48 x 16 frame and scaled onto the
// configured grid. Stage bands run left to right (IF ... WB); slices stack
// vertically; the data memory macro sits in the bottom corner of the MEM band.
constexpr int kFrameW = 48;
constexpr int kFrameH = 16;

struct CellStyle {
  CellClass cls;
  int drive;
  VtClass vt;
};

class Builder {
 public:
  Builder(const PipelineConfig& config) : config_(config), slices_(config.slice_count()) {}

  Placement at(double x, double y) const {
    const FabricGrid g = config_.fabric_grid;
    auto sx = static_cast<int>(std::lround(x * (g.width - 1) / (kFrameW - 1)));
    auto sy = static_cast<int>(std::lround(y * (g.height - 1) / (kFrameH - 1)));
    return {std::clamp(sx, 0, g.width - 1), std::clamp(sy, 0, g.height - 1)};
  }

  // Vertical centre of slice i within the frame.
  double row(int slice) const {
    const double pitch = static_cast<double>(kFrameH) / slices_;
    return pitch * slice + pitch / 2.0 - 0.5;
  }
  // The fetch loop is packed around the instruction memory.
  double fetch_row(int slice) const {
    const double pitch = std::min(1.0, static_cast<double>(kFrameH) / slices_);
    return kFrameH / 2.0 + pitch * (slice - (slices_ - 1) / 2.0);
  }

  std::size_t reg(const std::string& name, Stage stage, Placement p) {
    std::size_t idx = nodes_.size();
    TimingNode n;
    n.id = NodeId{static_cast<std::uint32_t>(idx)};
    n.name = name;
    n.kind = NodeKind::kRegister;
    n.stage_tag = stage;
    n.placement = p;
    nodes_.push_back(std::move(n));
    timing_.emplace(NodeId{static_cast<std::uint32_t>(idx)}, RegisterTiming{50.0, 40.0, 30.0, 20.0});
    return idx;
  }

  // Returns the cell's (input pin, output pin).
  std::pair<std::size_t, std::size_t> cell(const std::string& name, Stage stage, Placement p,
                                           CellStyle style) {
    std::size_t a = pin(name + "/a", stage, p, style);
    std::size_t y = pin(name + "/y", stage, p, style);
    double d = config_.nominal_cell_ps;
    if (style.cls == CellClass::kMemMacro && config_.mem_macro_access_ps_hint > 0) {
      d = config_.mem_macro_access_ps_hint;
    }
    TimingEdge e;
    e.src = nodes_[a].id;
    e.dst = nodes_[y].id;
    e.kind = EdgeKind::kCellArc;
    e.logic_ps = {d, d};
    edges_.push_back(e);
    return {a, y};
  }

  void net(std::size_t from, std::size_t to) {
    TimingEdge e;
    e.src = nodes_[from].id;
    e.dst = nodes_[to].id;
    e.kind = EdgeKind::kNet;
    edges_.push_back(e);
  }

  TimingGraph finish() {
    ClockSpec clock;
    clock.period_ps = config_.clock_period_ps;
    TimingNode clk;
    clk.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
    clk.name = "clk.root.src";
    clk.kind = NodeKind::kClockSource;
    clk.placement = at(kFrameW / 2.0, 0);
    nodes_.push_back(std::move(clk));
    return TimingGraph(std::move(nodes_), std::move(edges_), std::move(timing_), std::move(clock),
                       config_.fabric_grid);
  }

  int slices() const { return slices_; }

 private:
  std::size_t pin(const std::string& name, Stage stage, Placement p, CellStyle style) {
    std::size_t idx = nodes_.size();
    TimingNode n;
    n.id = NodeId{static_cast<std::uint32_t>(idx)};
    n.name = name;
    n.kind = NodeKind::kCombCell;
    n.cell_class = style.cls;
    if (style.cls != CellClass::kMemMacro) {
      n.drive_strength = style.drive;
      n.vt_class = style.vt;
    }
    n.stage_tag = stage;
    n.placement = p;
    nodes_.push_back(std::move(n));
    return idx;
  }

  const PipelineConfig& config_;
  int slices_;
  std::vector<TimingNode> nodes_;
  std::vector<TimingEdge> edges_;
  std::map<NodeId, RegisterTiming> timing_;
};

std::string sfx(int slice) { return "s" + std::to_string(slice); }

}  // namespace

TimingGraph build_rv32i_graph(const PipelineConfig& config) {
  check_config(config);
  Builder b(config);
  const int n = b.slices();
  const int depth = config.alu_depth_levels;
  const bool ctrl = config.include_control_paths;
  using C = CellClass;
  const CellStyle kMacro{C::kMemMacro, 0, VtClass::kSvt};
  auto S = [](C cls, int drive, VtClass vt) { return CellStyle{cls, drive, vt}; };
  const VtClass lvt = VtClass::kLvt;
  const VtClass svt = VtClass::kSvt;
  const VtClass hvt = VtClass::kHvt;

  // ---- register banks ----
  std::vector<std::size_t> pc(n), ifid_instr(n), ifid_pc(n);
  std::vector<std::size_t> idex_rs1(n), idex_rs2(n), idex_imm(n), idex_pc(n);
  std::vector<std::size_t> exmem_alu(n), exmem_rs2(n), exmem_addr(n);
  std::vector<std::size_t> memwb_data(n), memwb_alu(n);
  std::vector<std::vector<std::size_t>> rf(config.regfile_entries, std::vector<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double y = b.row(i);
    pc[i] = b.reg("if.pc." + sfx(i), Stage::kIF, b.at(1, b.fetch_row(i)));
    ifid_instr[i] = b.reg("ifid.instr." + sfx(i), Stage::kID, b.at(5, y));
    ifid_pc[i] = b.reg("ifid.pc." + sfx(i), Stage::kID, b.at(5, y + 1));
  }
  for (int e = 0; e < config.regfile_entries; ++e) {
    for (int i = 0; i < n; ++i) {
      rf[e][i] = b.reg("id.rf.r" + std::to_string(e) + "_" + sfx(i), Stage::kID,
                       b.at(7 + e % 4, b.row(i) - 1 + (e / 4) % 3));
    }
  }
  for (int i = 0; i < n; ++i) {
    const double y = b.row(i);
    idex_rs1[i] = b.reg("idex.rs1." + sfx(i), Stage::kEX, b.at(15, y));
    idex_rs2[i] = b.reg("idex.rs2." + sfx(i), Stage::kEX, b.at(15, y + 1));
    idex_imm[i] = b.reg("idex.imm." + sfx(i), Stage::kEX, b.at(15, y - 1));
    idex_pc[i] = b.reg("idex.pc." + sfx(i), Stage::kEX, b.at(14, y));
  }
  const std::size_t idex_ctrl = b.reg("idex.ctrl.q", Stage::kEX, b.at(9, kFrameH - 1));
  const std::size_t idex_rd = b.reg("idex.rd.q", Stage::kEX, b.at(14, kFrameH / 2.0));
  for (int i = 0; i < n; ++i) {
    const double y = b.row(i);
    exmem_alu[i] = b.reg("exmem.alu." + sfx(i), Stage::kMEM, b.at(43, y));
    exmem_rs2[i] = b.reg("exmem.rs2." + sfx(i), Stage::kMEM, b.at(44, y - 1));
    exmem_addr[i] = b.reg("exmem.addr." + sfx(i), Stage::kMEM, b.at(42, y));
  }
  const std::size_t exmem_br = b.reg("exmem.br.q", Stage::kMEM, b.at(43, kFrameH - 1));
  const std::size_t exmem_ctrl = b.reg("exmem.ctrl.q", Stage::kMEM, b.at(43, 4));
  for (int i = 0; i < n; ++i) {
    const double y = b.row(i);
    memwb_data[i] = b.reg("memwb.data." + sfx(i), Stage::kWB, b.at(47, y));
    memwb_alu[i] = b.reg("memwb.alu." + sfx(i), Stage::kWB, b.at(47, y + 1));
  }
  const std::size_t memwb_ctrl = b.reg("memwb.ctrl.q", Stage::kWB, b.at(47, kFrameH / 2.0));

  // ---- IF: PC increment ripple, next-PC mux, instruction memory ----
  auto imem = b.cell("if.imem.rd", Stage::kIF, b.at(2, kFrameH / 2.0), kMacro);
  std::vector<std::pair<std::size_t, std::size_t>> pcinc(n), pcmux(n);
  for (int i = 0; i < n; ++i) {
    const double y = b.fetch_row(i);
    pcinc[i] = b.cell("if.pcinc." + sfx(i), Stage::kIF, b.at(2, y), S(C::kCarryChain, 4, lvt));
    pcmux[i] = b.cell("if.pcmux." + sfx(i), Stage::kIF, b.at(3, y + 0.75 * (b.row(i) - y)), S(C::kMux, 2, svt));
    b.net(pc[i], pcinc[i].first);
    if (i > 0) b.net(pcinc[i - 1].second, pcinc[i].first);
    b.net(pcinc[i].second, pcmux[i].first);
    b.net(pcmux[i].second, pc[i]);
    b.net(pc[i], imem.first);
    b.net(imem.second, ifid_instr[i]);
    b.net(pc[i], ifid_pc[i]);
  }

  // ---- ID: decode, immediates, register file read, hazard / forwarding ----
  const double y0 = b.row(0);
  auto dec0 = b.cell("id.dec.l0", Stage::kID, b.at(7, y0 + 1), S(C::kLut, 1, svt));
  auto dec1 = b.cell("id.dec.l1", Stage::kID, b.at(8, y0 + 1), S(C::kLut, 1, svt));
  b.net(ifid_instr[0], dec0.first);
  b.net(dec0.second, dec1.first);

  std::vector<std::pair<std::size_t, std::size_t>> imm(n);
  for (int i = 0; i < n; ++i) {
    imm[i] = b.cell("id.imm." + sfx(i), Stage::kID, b.at(10, b.row(i) - 1), S(C::kLut, 1, svt));
    b.net(ifid_instr[i], imm[i].first);
    b.net(ifid_instr[n - 1], imm[i].first);
    b.net(dec1.second, imm[i].first);
    b.net(imm[i].second, idex_imm[i]);
  }

  const double ymid = kFrameH / 2.0;
  auto hz0 = b.cell("id.hazard.l0", Stage::kID, b.at(9, ymid), S(C::kLut, 1, svt));
  auto hz1 = b.cell("id.hazard.l1", Stage::kID, b.at(10, ymid), S(C::kLut, 1, svt));
  auto fwdsel = b.cell("id.hazard.fwd", Stage::kID, b.at(13, ymid), S(C::kLut, 2, svt));
  for (int i : {1, 2}) b.net(ifid_instr[std::min(i, n - 1)], hz0.first);
  b.net(ifid_instr[0], idex_rd);
  b.net(idex_rd, hz0.first);
  b.net(hz0.second, hz1.first);
  for (int i = 0; i < n; ++i) b.net(hz1.second, pcmux[i].first);
  b.net(ifid_instr[n > 1 ? 1 : 0], fwdsel.first);
  b.net(exmem_ctrl, fwdsel.first);
  b.net(memwb_ctrl, fwdsel.first);

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> opsel(
      config.regfile_read_ports, std::vector<std::pair<std::size_t, std::size_t>>(n));
  std::vector<std::pair<std::size_t, std::size_t>> rfread(config.regfile_read_ports);
  for (int p = 0; p < config.regfile_read_ports; ++p) {
    rfread[p] = b.cell("id.rfread.p" + std::to_string(p), Stage::kID, b.at(11 + p, ymid + 1),
                       kMacro);
    for (int i = 0; i < n; ++i) b.net(ifid_instr[i], rfread[p].first);
    for (int e = 0; e < config.regfile_entries; ++e) {
      for (int i = 0; i < n; ++i) b.net(rf[e][i], rfread[p].first);
    }
    for (int i = 0; i < n; ++i) {
      opsel[p][i] = b.cell("id.opsel.p" + std::to_string(p) + "_" + sfx(i), Stage::kID,
                           b.at(13, b.row(i) + p), S(C::kMux, 2, svt));
      b.net(rfread[p].second, opsel[p][i].first);
      b.net(fwdsel.second, opsel[p][i].first);
      if (config.bypass_sources.contains(Stage::kEX)) b.net(exmem_alu[i], opsel[p][i].first);
      if (config.bypass_sources.contains(Stage::kMEM)) b.net(memwb_alu[i], opsel[p][i].first);
      b.net(opsel[p][i].second, p == 0 ? idex_rs1[i] : idex_rs2[i]);
    }
  }
  for (int i = 0; i < n; ++i) b.net(ifid_pc[i], idex_pc[i]);

  std::pair<std::size_t, std::size_t> ctrl0{}, ctrl1{}, ctrl2{};
  if (ctrl) {
    ctrl0 = b.cell("id.ctrl.l0", Stage::kID, b.at(11, kFrameH - 1), S(C::kLut, 1, svt));
    ctrl1 = b.cell("id.ctrl.l1", Stage::kID, b.at(12, kFrameH - 1), S(C::kLut, 1, svt));
    ctrl2 = b.cell("id.ctrl.l2", Stage::kID, b.at(13, kFrameH - 1), S(C::kLut, 2, svt));
    b.net(dec1.second, ctrl0.first);
    b.net(hz1.second, ctrl0.first);
    b.net(ctrl0.second, ctrl1.first);
    b.net(ctrl1.second, ctrl2.first);
    b.net(ctrl2.second, idex_ctrl);
  } else {
    b.net(dec1.second, idex_ctrl);
  }

  // ---- EX: operand select, ALU tree, result mux, branch compare, AGU ----
  std::vector<std::pair<std::size_t, std::size_t>> asel(n), bsel(n), rmux(n), cmp(n), agu(n);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> alu(
      depth, std::vector<std::pair<std::size_t, std::size_t>>(n));
  for (int i = 0; i < n; ++i) {
    const double y = b.row(i);
    asel[i] = b.cell("ex.asel." + sfx(i), Stage::kEX, b.at(16, y), S(C::kMux, 4, lvt));
    bsel[i] = b.cell("ex.bsel." + sfx(i), Stage::kEX, b.at(16, y + 1), S(C::kMux, 4, lvt));
    b.net(idex_rs1[i], asel[i].first);
    b.net(idex_pc[i], asel[i].first);
    b.net(idex_rs2[i], bsel[i].first);
    b.net(idex_imm[i], bsel[i].first);
  }
  for (int k = 0; k < depth; ++k) {
    const double x = depth > 1 ? 18.0 + 18.0 * k / (depth - 1) : 27.0;
    const CellClass cls = (k % 2 == 1) ? C::kCarryChain : C::kLut;
    for (int i = 0; i < n; ++i) {
      alu[k][i] = b.cell("ex.alu.l" + std::to_string(k) + "_" + sfx(i), Stage::kEX,
                         b.at(x, b.row(i) + (k % 2 == 0 ? -1.5 : 1.5)), S(cls, 2, svt));
      if (k == 0) {
        b.net(asel[i].second, alu[k][i].first);
        b.net(bsel[i].second, alu[k][i].first);
        b.net(idex_ctrl, alu[k][i].first);
      } else {
        b.net(alu[k - 1][i].second, alu[k][i].first);
        if (cls == C::kCarryChain && k == depth - 1 && i > 0) b.net(alu[k - 1][i - 1].second, alu[k][i].first);
      }
    }
  }
  std::pair<std::size_t, std::size_t> exc0{}, exc1{};
  if (ctrl) {
    exc0 = b.cell("ex.ctrl.l0", Stage::kEX, b.at(22, 0), S(C::kLut, 1, hvt));
    exc1 = b.cell("ex.ctrl.l1", Stage::kEX, b.at(32, 0), S(C::kLut, 1, hvt));
    b.net(idex_ctrl, exc0.first);
    b.net(exc0.second, exc1.first);
    b.net(exc1.second, exmem_ctrl);
  } else {
    b.net(idex_ctrl, exmem_ctrl);
  }
  for (int i = 0; i < n; ++i) {
    const double y = b.row(i);
    rmux[i] = b.cell("ex.rmux." + sfx(i), Stage::kEX, b.at(38, y), S(C::kMux, 4, lvt));
    b.net(alu[depth - 1][i].second, rmux[i].first);
    if (ctrl) b.net(exc1.second, rmux[i].first);
    b.net(rmux[i].second, exmem_alu[i]);

    cmp[i] = b.cell("ex.cmp." + sfx(i), Stage::kEX, b.at(19, y + 1), S(C::kCarryChain, 2, svt));
    b.net(idex_rs1[i], cmp[i].first);
    b.net(idex_rs2[i], cmp[i].first);
    if (i > 0) b.net(cmp[i - 1].second, cmp[i].first);

    agu[i] = b.cell("ex.agu." + sfx(i), Stage::kEX, b.at(21, y - 1), S(C::kCarryChain, 2, svt));
    b.net(idex_rs1[i], agu[i].first);
    b.net(idex_imm[i], agu[i].first);
    if (i > 0) b.net(agu[i - 1].second, agu[i].first);
    b.net(agu[i].second, exmem_addr[i]);

    b.net(idex_rs2[i], exmem_rs2[i]);
  }
  auto brdec = b.cell("ex.brdec.q", Stage::kEX, b.at(24, kFrameH - 1), S(C::kLut, 2, svt));
  b.net(cmp[n - 1].second, brdec.first);
  b.net(idex_ctrl, brdec.first);
  b.net(brdec.second, exmem_br);

  // ---- MEM: data memory, load align / sign extension ----
  auto dmem = b.cell("mem.dmem.rd", Stage::kMEM, b.at(46, kFrameH / 2.0), kMacro);
  if (ctrl) {
    auto mc = b.cell("mem.ctrl.l0", Stage::kMEM, b.at(45, 5), S(C::kLut, 4, lvt));
    b.net(exmem_ctrl, mc.first);
    for (int i = 0; i < n; ++i) b.net(exmem_addr[i], mc.first);
    b.net(mc.second, dmem.first);
  } else {
    b.net(exmem_ctrl, dmem.first);
  }
  std::vector<std::pair<std::size_t, std::size_t>> align(n), sext(n);
  for (int i = 0; i < n; ++i) {
    b.net(exmem_addr[i], dmem.first);
    b.net(exmem_rs2[i], dmem.first);
  }
  for (int i = 0; i < n; ++i) {
    align[i] = b.cell("mem.align." + sfx(i), Stage::kMEM, b.at(45, b.row(i)), S(C::kMux, 1, svt));
    b.net(dmem.second, align[i].first);
    b.net(exmem_addr[0], align[i].first);
  }
  for (int i = 0; i < n; ++i) {
    sext[i] = b.cell("mem.sext." + sfx(i), Stage::kMEM, b.at(46, b.row(i)), S(C::kLut, 1, svt));
    b.net(align[i].second, sext[i].first);
    b.net(align[n - 1].second, sext[i].first);
    b.net(sext[i].second, memwb_data[i]);
    b.net(exmem_alu[i], memwb_alu[i]);
  }
  b.net(exmem_ctrl, memwb_ctrl);

  // ---- WB: write-back mux into the register file ----
  std::pair<std::size_t, std::size_t> wc0{}, wc1{};
  if (ctrl) {
    wc0 = b.cell("wb.ctrl.l0", Stage::kWB, b.at(30, ymid), S(C::kLut, 1, hvt));
    wc1 = b.cell("wb.ctrl.l1", Stage::kWB, b.at(11, ymid), S(C::kLut, 1, hvt));
    b.net(memwb_ctrl, wc0.first);
    b.net(wc0.second, wc1.first);
  }
  for (int i = 0; i < n; ++i) {
    auto wbmux = b.cell("wb.wbmux." + sfx(i), Stage::kWB, b.at(11, b.row(i) + 1), S(C::kMux, 2, svt));
    b.net(memwb_data[i], wbmux.first);
    b.net(memwb_alu[i], wbmux.first);
    b.net(ctrl ? wc1.second : memwb_ctrl, wbmux.first);
    for (int e = 0; e < config.regfile_entries; ++e) b.net(wbmux.second, rf[e][i]);
    if (config.bypass_sources.contains(Stage::kWB)) {
      for (int p = 0; p < config.regfile_read_ports; ++p) b.net(wbmux.second, opsel[p][i].first);
    }
  }
  return b.finish();
}

}  // namespace stagesta
