//! Scoreboard and register-file invariants over random straight-line
//! vector programs.

use std::cell::Cell;

use arrow_core::arch_state::{MachineState, MemoryImage, READ_PORTS, WRITE_PORTS};
use arrow_core::isa::{assemble, lookup, Format, Instruction, OpClass, Program, Sew, VectorConfig};
use arrow_core::timing::{run_functional, simulate, vector_use, Mode, SimOptions, SimResult, TimingConfig};
use arrow_core::vector_exec::execute_vector;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MEM_BASE: u64 = 0x8000_0000;
const MEM_SIZE: usize = 1 << 15;
/// `a0` points here; stores below it come from scalar code.
const CENTRE: u64 = MEM_BASE + 0x4000;

#[derive(Debug, Clone)]
enum Op {
    SetVl { sew: usize, avl: Option<u32> },
    Arith { template: usize, vd: u8, a: u8, b: u8, masked: bool },
    Load { vd: u8, offset: u32, stride: Option<i32> },
    Store { vs: u8, offset: u32, stride: Option<i32> },
    ScalarAlu,
    ScalarLoad { offset: u32 },
    ScalarStore { offset: u32 },
    MoveToScalar { vs: u8, use_now: bool },
}

/// `{d}`, `{a}` and `{b}` are replaced by register numbers.
const TEMPLATES: [&str; 17] = [
    "vadd.vv v{d}, v{a}, v{b}",
    "vsub.vx v{d}, v{a}, t1",
    "vmul.vv v{d}, v{a}, v{b}",
    "vdivu.vv v{d}, v{a}, v{b}",
    "vand.vi v{d}, v{a}, 5",
    "vmax.vv v{d}, v{a}, v{b}",
    "vsll.vi v{d}, v{a}, 3",
    "vmseq.vv v{d}, v{a}, v{b}",
    "vmslt.vx v{d}, v{a}, t1",
    "vmerge.vvm v{d}, v{a}, v{b}, v0",
    "vmv.v.v v{d}, v{a}",
    "vmv.v.x v{d}, t1",
    "vmv.s.x v{d}, t1",
    "vredsum.vs v{d}, v{a}, v{b}",
    "vredmax.vs v{d}, v{a}, v{b}",
    "vsra.vv v{d}, v{a}, v{b}",
    "vor.vv v{d}, v{a}, v{b}",
];

fn op() -> impl Strategy<Value = Op> {
    let reg = || 0..32u8;
    let offset = || (0..256u32).prop_map(|w| w * 8);
    let stride = || proptest::option::of(1..=4i32);
    prop_oneof![
        2 => (0..4usize, proptest::option::of(0..=70u32)).prop_map(|(sew, avl)| Op::SetVl { sew, avl }),
        8 => (0..TEMPLATES.len(), reg(), reg(), reg(), any::<bool>())
            .prop_map(|(template, vd, a, b, masked)| Op::Arith { template, vd, a, b, masked }),
        2 => (reg(), offset(), stride()).prop_map(|(vd, offset, stride)| Op::Load { vd, offset, stride }),
        2 => (reg(), offset(), stride()).prop_map(|(vs, offset, stride)| Op::Store { vs, offset, stride }),
        1 => Just(Op::ScalarAlu),
        1 => offset().prop_map(|offset| Op::ScalarLoad { offset }),
        1 => offset().prop_map(|offset| Op::ScalarStore { offset }),
        1 => (reg(), any::<bool>()).prop_map(|(vs, use_now)| Op::MoveToScalar { vs, use_now }),
    ]
}

#[derive(Debug, Clone)]
pub struct Case {
    cfg: VectorConfig,
    timing: TimingConfig,
    ops: Vec<Op>,
    seed: u64,
}

fn case() -> impl Strategy<Value = Case> {
    let cfg = (prop_oneof![Just(128u32), Just(256), Just(512)], prop_oneof![Just(32u32), Just(64)], 1..=2u32)
        .prop_map(|(vlen, elen, lanes)| VectorConfig::new(vlen, elen, lanes).expect("valid config"));
    let timing = (0..30u64, 0..30u64, 1..5u64, 1..40u64, 0..3u64, any::<bool>(), 1..3u64).prop_map(
        |(mem_latency, bus_initiation, mul_cpi, div_cpi, dispatch_overhead, reduction_tree, vsetvli_cycles)| {
            TimingConfig {
                mem_latency,
                bus_initiation,
                mul_cpi,
                div_cpi,
                dispatch_overhead,
                reduction_tree,
                vsetvli_cycles,
                ..TimingConfig::default()
            }
        },
    );
    (cfg, timing, proptest::collection::vec(op(), 1..48), any::<u64>())
        .prop_map(|(cfg, timing, ops, seed)| Case { cfg, timing, ops, seed })
}

impl Case {
    fn sews(&self) -> Vec<Sew> {
        Sew::ALL.into_iter().filter(|s| self.cfg.supports(*s)).collect()
    }

    fn source(&self) -> String {
        let sews = self.sews();
        let mut sew = sews[sews.len() - 1];
        let mut out = format!("li a0, {CENTRE:#x}\nli t1, 7\nvsetvli t0, zero, {sew}, m1\n");
        let e = |s: Sew| s.bits();
        for op in &self.ops {
            match *op {
                Op::SetVl { sew: i, avl } => {
                    sew = sews[i % sews.len()];
                    match avl {
                        Some(n) => out += &format!("li a2, {n}\nvsetvli t0, a2, {sew}, m1\n"),
                        None => out += &format!("vsetvli t0, zero, {sew}, m1\n"),
                    }
                }
                Op::Arith { template, vd, a, b, masked } => {
                    let t = TEMPLATES[template];
                    let name = t.split_whitespace().next().expect("mnemonic");
                    let info = lookup(name).expect("template mnemonic exists");
                    let reads_v0 = (info.maskable && masked) || t.ends_with("v0");
                    // a destination overlapping the mask is reserved
                    let vd = if reads_v0 && vd == 0 { 1 } else { vd };
                    let line = t.replace("{d}", &vd.to_string()).replace("{a}", &a.to_string()).replace("{b}", &b.to_string());
                    out += &line;
                    if info.maskable && masked {
                        out += ", v0.t";
                    }
                    out += "\n";
                }
                Op::Load { vd, offset, stride } | Op::Store { vs: vd, offset, stride } => {
                    let store = matches!(op, Op::Store { .. });
                    let kind = if store { "s" } else { "l" };
                    out += &format!("addi a3, a0, {offset}\n");
                    match stride {
                        Some(k) => {
                            out += &format!("li a4, {}\nv{kind}se{}.v v{vd}, (a3), a4\n", k * sew.bytes() as i32, e(sew))
                        }
                        None => out += &format!("v{kind}e{}.v v{vd}, (a3)\n", e(sew)),
                    }
                }
                Op::ScalarAlu => out += "addi t3, t3, 1\n",
                Op::ScalarLoad { offset } => out += &format!("lw t4, {}(a0)\n", offset.min(2040)),
                Op::ScalarStore { offset } => out += &format!("sw t3, {}(a0)\n", -(offset.min(2040) as i32)),
                Op::MoveToScalar { vs, use_now } => {
                    out += &format!("vmv.x.s t5, v{vs}\n");
                    if use_now {
                        out += "add t6, t5, t3\n";
                    }
                }
            }
        }
        out
    }

    fn program(&self) -> Result<Program, TestCaseError> {
        let src = self.source();
        assemble(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))
    }

    /// Machine with random register and memory contents.
    fn machine(&self) -> MachineState {
        let mut st = MachineState::new(self.cfg, MemoryImage::new(MEM_BASE, MEM_SIZE));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for v in 0..32 {
            rng.fill_bytes(st.vrf.reg_bytes_mut(v));
        }
        let mut bytes = vec![0u8; MEM_SIZE];
        rng.fill_bytes(&mut bytes);
        st.mem.write_bytes(MEM_BASE, &bytes).expect("in bounds");
        st
    }

    fn simulate(&self) -> Result<(Program, SimResult), TestCaseError> {
        let program = self.program()?;
        let mut st = self.machine();
        let res = simulate(&program, &mut st, &self.timing, Mode::Vector, SimOptions { trace: true, ..Default::default() })
            .map_err(|e| TestCaseError::fail(format!("{e}\n{}", self.source())))?;
        prop_assert_eq!(res.trace.len(), program.instructions.len());
        Ok((program, res))
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 256, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Run `check` on `cases` random programs; returns the instructions examined.
fn run(cases: u32, check: impl Fn(&Case) -> Result<u64, TestCaseError>) -> Result<u64, String> {
    let total = Cell::new(0u64);
    runner(cases)
        .run(&case(), |c| {
            total.set(total.get() + check(&c)?);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(total.get())
}

fn index(program: &Program, pc: u64) -> usize {
    ((pc - program.text_base) / 4) as usize
}

/// A consumer's first execute cycle comes after its producer's write-back,
/// for vector sources, the mask and scalars produced by `vmv.x.s`; a
/// destination is not written until every earlier reader has finished.
pub fn no_chaining(cases: u32) -> Result<u64, String> {
    run(cases, |c| {
        let (program, res) = c.simulate()?;
        let mut vwriter: [Option<usize>; 32] = [None; 32];
        let mut xwriter: [Option<usize>; 32] = [None; 32];
        let mut last_read: [Option<u64>; 32] = [None; 32];
        for (j, rec) in res.trace.iter().enumerate() {
            let inst = &program.instructions[index(&program, rec.pc)];
            let xreads: Vec<u8> = if inst.is_vector() { vector_use(inst).xreads } else { vec![inst.rs1, inst.rs2] };
            for x in xreads.into_iter().filter(|x| *x != 0) {
                if let Some(i) = xwriter[x as usize] {
                    let wb = res.trace[i].writeback.expect("vector record");
                    prop_assert!(rec.cycle > wb, "x{} read at {} before write-back {}", x, rec.cycle, wb);
                }
            }
            if !inst.is_vector() {
                if !matches!(inst.info().format, Format::Store { .. } | Format::Branch { .. }) {
                    xwriter[inst.rd as usize] = None;
                }
                continue;
            }
            if inst.class() == OpClass::VectorConfig {
                xwriter[inst.rd as usize] = None;
                continue;
            }
            let u = vector_use(inst);
            for r in &u.raw {
                if let Some(i) = vwriter[*r as usize] {
                    let wb = res.trace[i].writeback.expect("vector record");
                    prop_assert!(rec.ex_start > wb, "#{} reads v{} at {} before #{} writes back at {}", j, r, rec.ex_start, i, wb);
                }
            }
            if let Some(w) = u.write {
                if let Some(end) = last_read[w as usize] {
                    prop_assert!(rec.ex_start > end, "#{} overwrites v{} while it is still read", j, w);
                }
                vwriter[w as usize] = Some(j);
            }
            if rec.ex_cycles > 0 {
                for r in &u.port_reads {
                    let end = last_read[*r as usize].get_or_insert(0);
                    *end = (*end).max(rec.ex_end());
                }
            }
            if let Some(x) = u.xwrite {
                xwriter[x as usize] = Some(j);
            }
        }
        Ok(res.trace.len() as u64)
    })
}

/// Every vector instruction runs on the lane of its register's bank
/// (`vd div 16`, the store source for stores, `vs2` for `vmv.x.s`), and a
/// lane executes one instruction at a time.
pub fn lane_partition(cases: u32) -> Result<u64, String> {
    run(cases, |c| {
        let (program, res) = c.simulate()?;
        let mut busy_until = [0u64; 2];
        for rec in &res.trace {
            let inst: &Instruction = &program.instructions[index(&program, rec.pc)];
            match inst.lane_register() {
                Some(r) => {
                    let expected = if c.cfg.lanes == 2 { r / 16 } else { 0 };
                    prop_assert_eq!(rec.lane, Some(expected), "{}", inst);
                    if rec.ex_cycles > 0 {
                        let lane = expected as usize;
                        prop_assert!(rec.ex_start >= busy_until[lane], "{} overlaps on lane {}", inst, lane);
                        busy_until[lane] = rec.ex_start + rec.ex_cycles;
                    }
                }
                None => prop_assert_eq!(rec.lane, None),
            }
        }
        Ok(res.trace.len() as u64)
    })
}

/// In every cycle each bank serves at most `READ_PORTS` operand reads and
/// `WRITE_PORTS` write-backs.
pub fn port_limits(cases: u32) -> Result<u64, String> {
    run(cases, |c| {
        let (program, res) = c.simulate()?;
        let mut reads: std::collections::HashMap<u64, [u8; 2]> = Default::default();
        let mut writes: std::collections::HashMap<u64, [u8; 2]> = Default::default();
        for rec in res.trace.iter().filter(|r| r.lane.is_some() && r.ex_cycles > 0) {
            let inst = &program.instructions[index(&program, rec.pc)];
            let u = vector_use(inst);
            for cycle in rec.ex_start..rec.ex_start + rec.ex_cycles {
                let slot = reads.entry(cycle).or_default();
                for r in &u.port_reads {
                    slot[c.cfg.bank_of(*r)] += 1;
                }
            }
            if let Some(w) = u.write {
                writes.entry(rec.writeback.expect("vector record")).or_default()[c.cfg.bank_of(w)] += 1;
            }
        }
        for (cycle, used) in &reads {
            prop_assert!(used.iter().all(|n| *n <= READ_PORTS), "cycle {}: reads {:?}", cycle, used);
        }
        for (cycle, used) in &writes {
            prop_assert!(used.iter().all(|n| *n <= WRITE_PORTS), "cycle {}: writes {:?}", cycle, used);
        }
        Ok(res.trace.len() as u64)
    })
}

/// Bus occupancy windows of all memory instructions, scalar and vector, are
/// disjoint and follow program order; a vector access holds the bus for its
/// whole execute phase.
pub fn memory_serialisation(cases: u32) -> Result<u64, String> {
    run(cases, |c| {
        let (_, res) = c.simulate()?;
        let mut free = 0u64;
        let mut n = 0;
        for rec in &res.trace {
            if let Some((start, end)) = rec.bus {
                prop_assert!(start >= free, "{} starts at {} while the bus is busy until {}", rec.mnemonic, start, free);
                prop_assert!(end > start);
                if rec.lane.is_some() {
                    prop_assert_eq!((start, end), (rec.ex_start, rec.ex_start + rec.ex_cycles));
                }
                free = end;
                n += 1;
            }
        }
        Ok(n)
    })
}

fn bit(bytes: &[u8], i: usize) -> bool {
    bytes[i / 8] >> (i % 8) & 1 == 1
}

/// Elements at and beyond `vl`, and masked-off elements, keep their old
/// values; registers other than the destination and memory outside a store's
/// element footprint are untouched.
pub fn tail_preservation(cases: u32) -> Result<u64, String> {
    run(cases, |c| {
        let program = c.program()?;
        let mut st = c.machine();
        let mut checked = 0;
        for inst in &program.instructions {
            if !inst.is_vector() {
                run_functional(&Program::from_instructions(vec![*inst]), &mut st, 1)
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                continue;
            }
            let sew = st.scalar.vtype.sew;
            let vl = st.scalar.vl as usize;
            let sb = sew.bytes() as usize;
            let regs_before: Vec<Vec<u8>> = (0..32).map(|v| st.vrf.reg_bytes(v).to_vec()).collect();
            let mem_before = (inst.class() == OpClass::VectorStore).then(|| st.mem.dump_raw(MEM_BASE, MEM_SIZE).expect("in bounds"));
            let base = st.scalar.read(inst.rs1) as u64;
            let stride = st.scalar.read(inst.rs2) as i32 as i64;
            execute_vector(inst, &mut st).map_err(|e| TestCaseError::fail(format!("{inst}: {e}")))?;
            let u = vector_use(inst);
            for v in 0..32u8 {
                let (old, new) = (&regs_before[v as usize], st.vrf.reg_bytes(v));
                if Some(v) != u.write {
                    prop_assert_eq!(old.as_slice(), new, "{} changed v{}", inst, v);
                    continue;
                }
                let info = inst.info();
                let masked = !inst.vm && info.maskable;
                let active = |i: usize| !masked || bit(&regs_before[0], i);
                if info.name.starts_with("vms") {
                    for i in 0..old.len() * 8 {
                        if i >= vl || !active(i) {
                            prop_assert_eq!(bit(old, i), bit(new, i), "{} mask bit {}", inst, i);
                        }
                    }
                } else {
                    let written = if info.reduction || info.name == "vmv.s.x" { vl.min(1) } else { vl };
                    for i in 0..old.len() / sb {
                        if i >= written || (!info.reduction && !active(i)) {
                            prop_assert_eq!(&old[i * sb..(i + 1) * sb], &new[i * sb..(i + 1) * sb], "{} element {}", inst, i);
                        }
                    }
                }
            }
            if let Some(before) = mem_before {
                let after = st.mem.dump_raw(MEM_BASE, MEM_SIZE).expect("in bounds");
                let step = if matches!(inst.info().format, Format::VStore { strided: true, .. }) {
                    stride
                } else {
                    sb as i64
                };
                let mut footprint = vec![false; MEM_SIZE];
                for i in 0..vl as i64 {
                    let addr = base as i64 + i * step - MEM_BASE as i64;
                    for k in 0..sb {
                        footprint[addr as usize + k] = true;
                    }
                }
                for (k, inside) in footprint.iter().enumerate() {
                    if !inside {
                        prop_assert_eq!(before[k], after[k], "{} wrote outside its elements at +{:#x}", inst, k);
                    }
                }
            }
            checked += 1;
        }
        Ok(checked)
    })
}
