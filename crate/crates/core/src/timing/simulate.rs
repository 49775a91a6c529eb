//! Instruction-level simulation: functional execution in program order with
//! a scoreboard that assigns cycles.
//!
//! The front end issues one instruction at a time. A vector instruction
//! issued at cycle `d` fetches operands at `d+1`, executes for `n` cycles
//! from `d+2` and writes back at `d+2+n`. All stalls are resolved at issue,
//! so every timing constraint is a max over earlier event times.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch_state::{ArchError, MachineState, READ_PORTS};
use crate::isa::{Format, Instruction, Mnemonic, OpClass, Program, VOperands};
use crate::timing::TimingConfig;
use crate::vector_exec::{dispatch_lane, element_op, execute_vector, AluOp, ExecError, ExecInfo};

/// Default simulation budget in cycles.
pub const DEFAULT_MAX_CYCLES: u64 = 2_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("pc {pc}: {source}")]
    Exec { pc: u64, source: ExecError },
    #[error("pc {pc}: {source}")]
    Arch { pc: u64, source: ArchError },
    #[error("pc {pc}: vector instruction `{text}` in a scalar-only run")]
    VectorInScalarMode { pc: u64, text: String },
    #[error("pc {pc}: jump target {target:#x} is outside the program")]
    BadJump { pc: u64, target: u64 },
    #[error("simulation exceeded the budget of {limit} cycles")]
    Budget { limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Scalar,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StallReason {
    /// Waiting for a source register's write-back (no chaining).
    Raw,
    /// Destination still being read by an earlier instruction.
    War,
    /// Lane busy with an earlier instruction.
    Lane,
    /// Memory bus busy.
    Memory,
    /// Register-file read ports taken by the other lane.
    Port,
    /// Scalar operand produced by a vector instruction.
    Scalar,
}

/// One line of the execution trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Issue cycle.
    pub cycle: u64,
    pub pc: u64,
    pub lane: Option<u8>,
    pub mnemonic: String,
    pub vl: Option<u32>,
    pub ex_start: u64,
    pub ex_cycles: u64,
    pub writeback: Option<u64>,
    /// Vector registers read during execute.
    pub vreads: Vec<u8>,
    pub vwrite: Option<u8>,
    /// Bus occupancy `[start, end)`.
    pub bus: Option<(u64, u64)>,
    pub stall: Option<StallReason>,
}

impl TraceRecord {
    /// Last execute cycle (inclusive); equals `ex_start - 1` when empty.
    pub fn ex_end(&self) -> u64 {
        self.ex_start + self.ex_cycles - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub max_cycles: u64,
    pub trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_cycles: DEFAULT_MAX_CYCLES, trace: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimResult {
    pub total_cycles: u64,
    pub instruction_count: u64,
    pub vector_instruction_count: u64,
    pub trace: Vec<TraceRecord>,
}

impl SimResult {
    /// Trace as line-delimited JSON.
    pub fn write_trace(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.trace {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cost {
    Alu,
    Mul,
    Div,
    Taken,
    NotTaken,
    Jump,
    Load,
    Store,
}

enum Flow {
    Next,
    Goto(usize),
    Halt,
}

fn jump_index(program: &Program, pc: usize, target: u64) -> Result<usize, SimError> {
    let bad = || SimError::BadJump { pc: program.pc_of(pc), target };
    if target < program.text_base || !(target - program.text_base).is_multiple_of(4) {
        return Err(bad());
    }
    let idx = ((target - program.text_base) / 4) as usize;
    // one past the end is a clean exit
    if idx > program.instructions.len() {
        return Err(bad());
    }
    Ok(idx)
}

#[inline]
fn load_scalar(st: &MachineState, addr: u64, len: usize, signed: bool) -> Result<u32, ArchError> {
    if !addr.is_multiple_of(len as u64) {
        return Err(ArchError::Misaligned { addr, len });
    }
    let v = st.mem.load(addr, len)?;
    let bits = 8 * len as u32;
    Ok(if signed { ((v << (64 - bits)) as i64 >> (64 - bits)) as u32 } else { v as u32 })
}

/// Execute one scalar instruction.
#[inline]
fn exec_scalar(inst: &Instruction, st: &mut MachineState, pc: usize, program: &Program) -> Result<(Flow, Cost), SimError> {
    let s = &mut st.scalar;
    let a = s.read(inst.rs1);
    let b = s.read(inst.rs2);
    let imm = inst.imm as u32;
    let arch = |source| SimError::Arch { pc: program.pc_of(pc), source };
    let branch = |taken: bool| -> Result<(Flow, Cost), SimError> {
        if taken {
            let target = program.pc_of(pc).wrapping_add_signed(inst.imm as i64);
            Ok((Flow::Goto(jump_index(program, pc, target)?), Cost::Taken))
        } else {
            Ok((Flow::Next, Cost::NotTaken))
        }
    };
    let (value, cost) = match inst.mnemonic {
        Mnemonic::Add => (a.wrapping_add(b), Cost::Alu),
        Mnemonic::Sub => (a.wrapping_sub(b), Cost::Alu),
        Mnemonic::Sll => (a << (b & 31), Cost::Alu),
        Mnemonic::Xor => (a ^ b, Cost::Alu),
        Mnemonic::Srl => (a >> (b & 31), Cost::Alu),
        Mnemonic::Sra => (((a as i32) >> (b & 31)) as u32, Cost::Alu),
        Mnemonic::Or => (a | b, Cost::Alu),
        Mnemonic::And => (a & b, Cost::Alu),
        Mnemonic::Mul => (a.wrapping_mul(b), Cost::Mul),
        Mnemonic::Div => (element_op(AluOp::Div, a as u64, b as u64, crate::isa::Sew::E32) as u32, Cost::Div),
        Mnemonic::Addi => (a.wrapping_add(imm), Cost::Alu),
        Mnemonic::Xori => (a ^ imm, Cost::Alu),
        Mnemonic::Ori => (a | imm, Cost::Alu),
        Mnemonic::Andi => (a & imm, Cost::Alu),
        Mnemonic::Slli => (a << (imm & 31), Cost::Alu),
        Mnemonic::Srli => (a >> (imm & 31), Cost::Alu),
        Mnemonic::Srai => (((a as i32) >> (imm & 31)) as u32, Cost::Alu),
        Mnemonic::Lui => (imm << 12, Cost::Alu),
        Mnemonic::Auipc => ((program.pc_of(pc) as u32).wrapping_add(imm << 12), Cost::Alu),
        Mnemonic::Lb | Mnemonic::Lh | Mnemonic::Lw => {
            let len = match inst.mnemonic {
                Mnemonic::Lb => 1,
                Mnemonic::Lh => 2,
                _ => 4,
            };
            let addr = a.wrapping_add(imm) as u64;
            (load_scalar(st, addr, len, true).map_err(arch)?, Cost::Load)
        }
        Mnemonic::Sb | Mnemonic::Sh | Mnemonic::Sw => {
            let len = match inst.mnemonic {
                Mnemonic::Sb => 1,
                Mnemonic::Sh => 2,
                _ => 4,
            };
            let addr = a.wrapping_add(imm) as u64;
            if !addr.is_multiple_of(len as u64) {
                return Err(arch(ArchError::Misaligned { addr, len }));
            }
            st.mem.store(addr, len, b as u64).map_err(arch)?;
            return Ok((Flow::Next, Cost::Store));
        }
        Mnemonic::Beq => return branch(a == b),
        Mnemonic::Bne => return branch(a != b),
        Mnemonic::Blt => return branch((a as i32) < (b as i32)),
        Mnemonic::Bge => return branch((a as i32) >= (b as i32)),
        Mnemonic::Jal => {
            if inst.is_halt() {
                return Ok((Flow::Halt, Cost::Jump));
            }
            let link = program.pc_of(pc + 1) as u32;
            let target = program.pc_of(pc).wrapping_add_signed(inst.imm as i64);
            let idx = jump_index(program, pc, target)?;
            st.scalar.write(inst.rd, link);
            return Ok((Flow::Goto(idx), Cost::Jump));
        }
        Mnemonic::Jalr => {
            let link = program.pc_of(pc + 1) as u32;
            let target = (a.wrapping_add(imm) & !1) as u64;
            let idx = jump_index(program, pc, target)?;
            st.scalar.write(inst.rd, link);
            return Ok((Flow::Goto(idx), Cost::Jump));
        }
        _ => unreachable!("vector instruction routed to the scalar path"),
    };
    st.scalar.write(inst.rd, value);
    Ok((Flow::Next, cost))
}

/// Pure functional execution with no timing. Returns the number of
/// instructions executed.
pub fn run_functional(program: &Program, st: &mut MachineState, max_steps: u64) -> Result<u64, SimError> {
    let mut pc = 0usize;
    let mut steps = 0u64;
    while pc < program.instructions.len() {
        let inst = &program.instructions[pc];
        if inst.is_halt() {
            break;
        }
        if steps >= max_steps {
            return Err(SimError::Budget { limit: max_steps });
        }
        steps += 1;
        if inst.is_vector() {
            execute_vector(inst, st).map_err(|source| SimError::Exec { pc: program.pc_of(pc), source })?;
            pc += 1;
            continue;
        }
        match exec_scalar(inst, st, pc, program)?.0 {
            Flow::Next => pc += 1,
            Flow::Goto(i) => pc = i,
            Flow::Halt => break,
        }
    }
    Ok(steps)
}

/// Register usage of a vector instruction as seen by the scoreboard.
#[derive(Debug, Clone, Default)]
pub struct VecUse {
    /// Registers read on every execute beat (count against read ports).
    pub port_reads: Vec<u8>,
    /// All vector registers whose value is consumed (adds the mask `v0`).
    pub raw: Vec<u8>,
    pub write: Option<u8>,
    /// Scalar registers read.
    pub xreads: Vec<u8>,
    /// Scalar register written at write-back (`vmv.x.s`).
    pub xwrite: Option<u8>,
}

pub fn vector_use(inst: &Instruction) -> VecUse {
    let mut u = VecUse::default();
    let info = inst.info();
    match info.format {
        Format::VSetVli => {
            u.xreads.push(inst.rs1);
        }
        Format::VLoad { strided, .. } => {
            u.write = Some(inst.rd);
            u.xreads.push(inst.rs1);
            if strided {
                u.xreads.push(inst.rs2);
            }
        }
        Format::VStore { strided, .. } => {
            u.port_reads.push(inst.rd);
            u.xreads.push(inst.rs1);
            if strided {
                u.xreads.push(inst.rs2);
            }
        }
        Format::OpV { operands, .. } => {
            match operands {
                VOperands::Vv | VOperands::Vs | VOperands::Vvm => u.port_reads.extend([inst.rs2, inst.rs1]),
                VOperands::Vx | VOperands::Vxm => {
                    u.port_reads.push(inst.rs2);
                    u.xreads.push(inst.rs1);
                }
                VOperands::Vi | VOperands::ViU => u.port_reads.push(inst.rs2),
                VOperands::MvV => u.port_reads.push(inst.rs1),
                VOperands::MvX | VOperands::SX => u.xreads.push(inst.rs1),
                VOperands::MvI => {}
                VOperands::XS => u.port_reads.push(inst.rs2),
            }
            if operands == VOperands::XS {
                u.xwrite = Some(inst.rd);
            } else {
                u.write = Some(inst.rd);
            }
            if !inst.vm {
                u.raw.push(0);
            }
        }
        _ => {}
    }
    u.raw.extend(u.port_reads.iter().copied());
    u
}

/// Execute cycles of an executed vector instruction.
pub fn vector_execute_cycles(inst: &Instruction, info: &ExecInfo, elen_bits: u32, timing: &TimingConfig) -> u64 {
    let beats = (info.vl as u64 * info.sew.bits() as u64).div_ceil(elen_bits as u64);
    match inst.class() {
        OpClass::VectorConfig => 0,
        OpClass::VectorLoad | OpClass::VectorStore => {
            if info.beats == 0 {
                0
            } else {
                timing.bus_initiation + info.beats
            }
        }
        _ => match inst.info().format {
            Format::OpV { operands: VOperands::XS, .. } => 1,
            Format::OpV { operands: VOperands::SX, .. } => (info.vl > 0) as u64,
            _ => {
                let mut n = beats;
                if inst.info().reduction && timing.reduction_tree && info.vl > 1 {
                    n += (info.vl as u64).next_power_of_two().trailing_zeros() as u64;
                }
                n
            }
        },
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LaneLast {
    ex_start: u64,
    ex_cycles: u64,
    reads: [u8; 2],
}

/// Scoreboard state.
#[derive(Debug, Clone)]
struct Board {
    /// Front-end cycle: earliest issue slot for the next instruction.
    t: u64,
    /// Write-back cycle of the latest writer of each vector register.
    vreg_wb: [u64; 32],
    /// Last execute cycle of the latest reader of each vector register.
    vreg_read_end: [u64; 32],
    /// Cycle at which each lane may start its next execute phase.
    lane_free: [u64; 2],
    lane_last: [Option<LaneLast>; 2],
    /// Cycle at which the bus is free.
    mem_free: u64,
    /// Cycle at which a scalar register value becomes available.
    xready: [u64; 32],
    /// Latest completion event seen.
    done: u64,
}

impl Board {
    fn new() -> Self {
        Board {
            t: 0,
            vreg_wb: [0; 32],
            vreg_read_end: [0; 32],
            lane_free: [0; 2],
            lane_last: [None; 2],
            mem_free: 0,
            xready: [0; 32],
            done: 0,
        }
    }
}

/// Run `program` to completion on `st`, returning cycle counts.
pub fn simulate(
    program: &Program,
    st: &mut MachineState,
    timing: &TimingConfig,
    mode: Mode,
    opts: SimOptions,
) -> Result<SimResult, SimError> {
    let cfg = st.cfg;
    let mut b = Board::new();
    let mut res = SimResult::default();
    let mut pc = 0usize;
    let n = program.instructions.len();
    while pc < n {
        let inst = &program.instructions[pc];
        if inst.is_halt() {
            break;
        }
        res.instruction_count += 1;
        if !inst.is_vector() {
            let front = b.t;
            let start = front.max(b.xready[inst.rs1 as usize]).max(b.xready[inst.rs2 as usize]);
            let (flow, cost) = exec_scalar(inst, st, pc, program)?;
            let (start, cycles) = match cost {
                Cost::Alu => (start, timing.alu_cpi),
                Cost::Mul => (start, timing.mul_cpi),
                Cost::Div => (start, timing.div_cpi),
                Cost::Taken => (start, timing.branch_taken_cpi),
                Cost::NotTaken => (start, timing.branch_not_taken_cpi),
                Cost::Jump => (start, timing.jump_cpi),
                Cost::Load | Cost::Store => {
                    let s = start.max(b.mem_free);
                    let c = if cost == Cost::Load { timing.load_cycles() } else { timing.store_cycles() };
                    b.mem_free = s + c;
                    (s, c)
                }
            };
            b.t = start + cycles;
            if opts.trace {
                res.trace.push(TraceRecord {
                    cycle: start,
                    pc: program.pc_of(pc),
                    lane: None,
                    mnemonic: inst.to_string(),
                    vl: None,
                    ex_start: start,
                    ex_cycles: cycles,
                    writeback: None,
                    vreads: Vec::new(),
                    vwrite: None,
                    bus: matches!(cost, Cost::Load | Cost::Store).then_some((start, start + cycles)),
                    stall: if start == front {
                        None
                    } else if matches!(cost, Cost::Load | Cost::Store) && start == b.mem_free - cycles && start > front {
                        Some(StallReason::Memory)
                    } else {
                        Some(StallReason::Scalar)
                    },
                });
            }
            match flow {
                Flow::Next => pc += 1,
                Flow::Goto(i) => pc = i,
                Flow::Halt => break,
            }
        } else {
            if mode == Mode::Scalar {
                return Err(SimError::VectorInScalarMode { pc: program.pc_of(pc), text: inst.to_string() });
            }
            res.vector_instruction_count += 1;
            let info =
                execute_vector(inst, st).map_err(|source| SimError::Exec { pc: program.pc_of(pc), source })?;
            issue_vector(&mut b, inst, &info, &cfg, timing, program.pc_of(pc), opts.trace.then_some(&mut res.trace));
            pc += 1;
        }
        if b.t > opts.max_cycles {
            return Err(SimError::Budget { limit: opts.max_cycles });
        }
    }
    res.total_cycles = b.t.max(b.done).max(b.mem_free);
    if res.total_cycles > opts.max_cycles {
        return Err(SimError::Budget { limit: opts.max_cycles });
    }
    Ok(res)
}

fn issue_vector(
    b: &mut Board,
    inst: &Instruction,
    info: &ExecInfo,
    cfg: &crate::isa::VectorConfig,
    timing: &TimingConfig,
    pc: u64,
    trace: Option<&mut Vec<TraceRecord>>,
) {
    let u = vector_use(inst);
    let xdep = u.xreads.iter().map(|r| b.xready[*r as usize]).max().unwrap_or(0);
    if inst.class() == OpClass::VectorConfig {
        let d = b.t.max(xdep);
        b.t = d + timing.vsetvli_cycles;
        if let Some(tr) = trace {
            tr.push(TraceRecord {
                cycle: d,
                pc,
                lane: None,
                mnemonic: inst.to_string(),
                vl: Some(info.vl),
                ex_start: d,
                ex_cycles: timing.vsetvli_cycles,
                writeback: None,
                vreads: Vec::new(),
                vwrite: None,
                bus: None,
                stall: (d > b.t - timing.vsetvli_cycles).then_some(StallReason::Scalar),
            });
        }
        return;
    }
    let lane = dispatch_lane(inst, cfg).0 as usize;
    let n = vector_execute_cycles(inst, info, cfg.elen_bits, timing);
    let is_mem = matches!(inst.class(), OpClass::VectorLoad | OpClass::VectorStore) && n > 0;
    // Offset of the execute phase from the issue cycle.
    let lead = 2 + timing.dispatch_overhead;

    let mut reads = [0u8; 2];
    for r in &u.port_reads {
        reads[cfg.bank_of(*r)] += 1;
    }

    // (lower bound on d, reason)
    let mut bounds: Vec<(u64, StallReason)> = Vec::with_capacity(8);
    bounds.push((xdep, StallReason::Scalar));
    for r in &u.raw {
        bounds.push((b.vreg_wb[*r as usize], StallReason::Raw));
    }
    if let Some(w) = u.write {
        // execute may start only after the last reader of the destination finished
        bounds.push(((b.vreg_read_end[w as usize] + 1).saturating_sub(lead), StallReason::War));
    }
    bounds.push((b.lane_free[lane].saturating_sub(lead), StallReason::Lane));
    if is_mem {
        bounds.push((b.mem_free.saturating_sub(lead), StallReason::Memory));
    }
    if cfg.lanes == 2 {
        if let Some(o) = b.lane_last[1 - lane] {
            if (0..2).any(|k| reads[k] + o.reads[k] > READ_PORTS) && o.ex_cycles > 0 {
                bounds.push(((o.ex_start + o.ex_cycles).saturating_sub(lead), StallReason::Port));
            }
        }
    }
    let mut d = b.t;
    let mut stall = None;
    for (bound, reason) in bounds {
        if bound > d {
            d = bound;
            stall = Some(reason);
        }
    }
    let ex_start = d + lead;
    let wb = ex_start + n;
    b.t = d + 1;
    for r in &u.port_reads {
        let e = &mut b.vreg_read_end[*r as usize];
        *e = (*e).max(ex_start + n.max(1) - 1);
    }
    if let Some(w) = u.write {
        b.vreg_wb[w as usize] = wb;
    }
    if let Some(x) = u.xwrite {
        if x != 0 {
            b.xready[x as usize] = wb + 1;
        }
    }
    b.lane_free[lane] = ex_start + n;
    b.lane_last[lane] = Some(LaneLast { ex_start, ex_cycles: n, reads });
    if is_mem {
        b.mem_free = ex_start + n;
    }
    b.done = b.done.max(wb + 1);
    if let Some(tr) = trace {
        tr.push(TraceRecord {
            cycle: d,
            pc,
            lane: Some(lane as u8),
            mnemonic: inst.to_string(),
            vl: Some(info.vl),
            ex_start,
            ex_cycles: n,
            writeback: Some(wb),
            vreads: u.raw.clone(),
            vwrite: u.write,
            bus: is_mem.then_some((ex_start, ex_start + n)),
            stall,
        });
    }
}
