//! Functional semantics of the vector unit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch_state::{mask_bit, word_enable, ArchError, MachineState};
use crate::isa::{Format, Instruction, Mnemonic, OpClass, Sew, VOperands, VType, VectorConfig};
use crate::memory_unit::{execute_load, execute_store, plan_access, AccessKind, MemError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("{sew} exceeds ELEN={elen}")]
    IllegalSew { sew: Sew, elen: u32 },
    #[error("{inst}: element width {eew} differs from the current SEW {sew}")]
    EewMismatch { inst: String, eew: Sew, sew: Sew },
    #[error("`{0}` is not a vector instruction")]
    NotVector(String),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Mem(#[from] MemError),
}

/// Execution lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LaneId(pub u8);

/// Lane chosen by the register that names the instruction's bank
/// (`vd`, or `vs2` for `vmv.x.s`). Configuration instructions stay in the
/// controller and report lane 0.
pub fn dispatch_lane(inst: &Instruction, cfg: &VectorConfig) -> LaneId {
    LaneId(inst.lane_register().map_or(0, |r| cfg.bank_of(r) as u8))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AluOp {
    Add,
    Sub,
    Mul,
    Div,
    Divu,
    And,
    Or,
    Xor,
    Sll,
    Srl,
    Sra,
    Min,
    Minu,
    Max,
    Maxu,
    CmpEq,
    CmpNe,
    CmpLt,
    CmpLtu,
    CmpLe,
    CmpLeu,
}

impl AluOp {
    pub const ALL: [AluOp; 21] = [
        AluOp::Add,
        AluOp::Sub,
        AluOp::Mul,
        AluOp::Div,
        AluOp::Divu,
        AluOp::And,
        AluOp::Or,
        AluOp::Xor,
        AluOp::Sll,
        AluOp::Srl,
        AluOp::Sra,
        AluOp::Min,
        AluOp::Minu,
        AluOp::Max,
        AluOp::Maxu,
        AluOp::CmpEq,
        AluOp::CmpNe,
        AluOp::CmpLt,
        AluOp::CmpLtu,
        AluOp::CmpLe,
        AluOp::CmpLeu,
    ];

    pub fn is_compare(self) -> bool {
        matches!(self, AluOp::CmpEq | AluOp::CmpNe | AluOp::CmpLt | AluOp::CmpLtu | AluOp::CmpLe | AluOp::CmpLeu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AluRequest {
    pub op: AluOp,
    pub a: u64,
    pub b: u64,
    pub sew: Sew,
    pub elen_bits: u32,
    /// Active bytes; results in inactive bytes are not meaningful.
    pub active: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AluResponse {
    pub result: u64,
    /// Compare outcome, bit `i` for element `i` of the word.
    pub cmp: u8,
}

#[inline]
fn sext(v: u64, bits: u32) -> i64 {
    let sh = 64 - bits;
    ((v << sh) as i64) >> sh
}

/// One element of width `sew`; operands and result are zero-extended.
pub fn element_op(op: AluOp, a: u64, b: u64, sew: Sew) -> u64 {
    let bits = sew.bits();
    let m = sew.mask();
    let (a, b) = (a & m, b & m);
    let (sa, sb) = (sext(a, bits), sext(b, bits));
    let r = match op {
        AluOp::Add => a.wrapping_add(b),
        AluOp::Sub => a.wrapping_sub(b),
        AluOp::Mul => a.wrapping_mul(b),
        AluOp::Div => {
            if b == 0 {
                u64::MAX
            } else if sa == sext(1 << (bits - 1), bits) && sb == -1 {
                a
            } else {
                (sa / sb) as u64
            }
        }
        AluOp::Divu => {
            if b == 0 {
                u64::MAX
            } else {
                a / b
            }
        }
        AluOp::And => a & b,
        AluOp::Or => a | b,
        AluOp::Xor => a ^ b,
        AluOp::Sll => a << (b & (bits as u64 - 1)),
        AluOp::Srl => a >> (b & (bits as u64 - 1)),
        AluOp::Sra => (sa >> (b & (bits as u64 - 1))) as u64,
        AluOp::Min => sa.min(sb) as u64,
        AluOp::Minu => a.min(b),
        AluOp::Max => sa.max(sb) as u64,
        AluOp::Maxu => a.max(b),
        AluOp::CmpEq => (a == b) as u64,
        AluOp::CmpNe => (a != b) as u64,
        AluOp::CmpLt => (sa < sb) as u64,
        AluOp::CmpLtu => (a < b) as u64,
        AluOp::CmpLe => (sa <= sb) as u64,
        AluOp::CmpLeu => (a <= b) as u64,
    };
    r & m
}

/// SEW-segmented ALU over one ELEN word. Add and subtract ripple a carry
/// byte by byte and cut it at every segment boundary.
pub fn simd_alu(req: AluRequest) -> AluResponse {
    let bytes = req.elen_bits / 8;
    let seg = req.sew.bytes();
    if matches!(req.op, AluOp::Add | AluOp::Sub) {
        let sub = req.op == AluOp::Sub;
        let mut result = 0u64;
        let mut carry = 0u16;
        for i in 0..bytes {
            if i % seg == 0 {
                carry = sub as u16;
            }
            let x = (req.a >> (8 * i)) as u8 as u16;
            let y = (req.b >> (8 * i)) as u8;
            let y = if sub { !y } else { y } as u16;
            let s = x + y + carry;
            result |= ((s & 0xff) as u64) << (8 * i);
            carry = s >> 8;
        }
        return AluResponse { result, cmp: 0 };
    }
    let bits = req.sew.bits();
    let n = req.elen_bits / bits;
    let mut result = 0u64;
    let mut cmp = 0u8;
    for i in 0..n {
        let sh = i * bits;
        let r = element_op(req.op, req.a >> sh, req.b >> sh, req.sew);
        if req.op.is_compare() {
            cmp |= (r as u8) << i;
        } else {
            result |= r << sh;
        }
    }
    AluResponse { result, cmp }
}

/// Replicate the low `sew` bits of `x` across a word.
pub fn splat(x: u64, sew: Sew, elen_bits: u32) -> u64 {
    let bits = sew.bits();
    let e = x & sew.mask();
    (0..elen_bits / bits).fold(0u64, |acc, i| acc | e << (i * bits))
}

/// ALU operation for an arithmetic or reduction mnemonic.
pub fn alu_op(m: Mnemonic) -> Option<AluOp> {
    use Mnemonic::*;
    Some(match m {
        VaddVv | VaddVx | VaddVi | VredsumVs => AluOp::Add,
        VsubVv | VsubVx => AluOp::Sub,
        VminuVv | VminuVx => AluOp::Minu,
        VminVv | VminVx => AluOp::Min,
        VmaxuVv | VmaxuVx => AluOp::Maxu,
        VmaxVv | VmaxVx | VredmaxVs => AluOp::Max,
        VandVv | VandVx | VandVi => AluOp::And,
        VorVv | VorVx | VorVi => AluOp::Or,
        VxorVv | VxorVx | VxorVi => AluOp::Xor,
        VmseqVv | VmseqVx | VmseqVi => AluOp::CmpEq,
        VmsneVv | VmsneVx | VmsneVi => AluOp::CmpNe,
        VmsltVv | VmsltVx => AluOp::CmpLt,
        VmsleVv | VmsleVx | VmsleVi => AluOp::CmpLe,
        VsllVv | VsllVx | VsllVi => AluOp::Sll,
        VsrlVv | VsrlVx | VsrlVi => AluOp::Srl,
        VsraVv | VsraVx | VsraVi => AluOp::Sra,
        VdivuVv | VdivuVx => AluOp::Divu,
        VdivVv | VdivVx => AluOp::Div,
        VmulVv | VmulVx => AluOp::Mul,
        _ => return None,
    })
}

/// What the timing model needs to know about an executed vector instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecInfo {
    pub vl: u32,
    pub sew: Sew,
    /// Bus beats for memory instructions, 0 otherwise.
    pub beats: u64,
}

enum Src1 {
    Vreg(u8),
    Splat(u64),
}

fn operand_src1(inst: &Instruction, st: &MachineState, operands: VOperands, sew: Sew) -> Src1 {
    let cfg = &st.cfg;
    match operands {
        VOperands::Vv | VOperands::Vs | VOperands::Vvm | VOperands::MvV => Src1::Vreg(inst.rs1),
        VOperands::Vx | VOperands::Vxm | VOperands::MvX | VOperands::SX => {
            Src1::Splat(splat(st.scalar.read(inst.rs1) as i32 as i64 as u64, sew, cfg.elen_bits))
        }
        VOperands::Vi | VOperands::MvI => Src1::Splat(splat(inst.imm as i64 as u64, sew, cfg.elen_bits)),
        VOperands::ViU => Src1::Splat(splat(inst.imm as u32 as u64, sew, cfg.elen_bits)),
        VOperands::XS => Src1::Splat(0),
    }
}

fn check_sew(sew: Sew, cfg: &VectorConfig) -> Result<(), ExecError> {
    if cfg.supports(sew) {
        Ok(())
    } else {
        Err(ExecError::IllegalSew { sew, elen: cfg.elen_bits })
    }
}

fn operands_of(inst: &Instruction) -> Result<VOperands, ExecError> {
    match inst.info().format {
        Format::OpV { operands, .. } => Ok(operands),
        _ => Err(ExecError::NotVector(inst.to_string())),
    }
}

/// Byte enables of word `w` after removing masked-off elements.
fn mask_enable(v0: Option<&[u8]>, w: usize, sew: Sew, cfg: &VectorConfig) -> u8 {
    let Some(v0) = v0 else { return 0xff };
    let per_word = cfg.elen_bits / sew.bits();
    let sb = sew.bytes();
    let mut en = 0u8;
    for j in 0..per_word {
        if mask_bit(v0, w * per_word as usize + j as usize) {
            en |= (((1u16 << sb) - 1) << (j * sb)) as u8;
        }
    }
    en
}

fn active_words(vl: u32, sew: Sew, cfg: &VectorConfig) -> usize {
    (vl as usize * sew.bytes() as usize).div_ceil(cfg.elen_bytes())
}

/// Arithmetic, logic, shifts, compares and reductions.
pub fn exec_vector_arith(inst: &Instruction, st: &mut MachineState) -> Result<(), ExecError> {
    let cfg = st.cfg;
    let sew = st.scalar.vtype.sew;
    check_sew(sew, &cfg)?;
    let vl = st.scalar.vl;
    let operands = operands_of(inst)?;
    let op = alu_op(inst.mnemonic).ok_or_else(|| ExecError::NotVector(inst.to_string()))?;
    if vl == 0 {
        return Ok(());
    }
    let src1 = operand_src1(inst, st, operands, sew);
    // v0 is latched once at operand fetch
    let v0: Option<Vec<u8>> = (!inst.vm).then(|| st.vrf.reg_bytes(0).to_vec());
    let v0 = v0.as_deref();
    let words = active_words(vl, sew, &cfg);
    let vrf = &mut st.vrf;
    let req = |a, b, active| AluRequest { op, a, b, sew, elen_bits: cfg.elen_bits, active };

    if inst.info().reduction {
        vrf.begin_cycle();
        let mut acc = vrf.read_vreg_word(inst.rs1, 0)? & sew.mask();
        let per_word = (cfg.elen_bits / sew.bits()) as usize;
        for w in 0..words {
            vrf.begin_cycle();
            let a = vrf.read_vreg_word(inst.rs2, w)?;
            for j in 0..per_word {
                let e = w * per_word + j;
                if e >= vl as usize || v0.is_some_and(|m| !mask_bit(m, e)) {
                    continue;
                }
                acc = element_op(op, acc, a >> (j as u32 * sew.bits()), sew);
            }
        }
        vrf.begin_cycle();
        vrf.write_vreg_word(inst.rd, 0, acc, word_enable(0, 1, sew, &cfg))?;
        return Ok(());
    }

    if op.is_compare() {
        let per_word = (cfg.elen_bits / sew.bits()) as usize;
        let mut bits = vec![false; vl as usize];
        for w in 0..words {
            vrf.begin_cycle();
            let a = vrf.read_vreg_word(inst.rs2, w)?;
            let b = match src1 {
                Src1::Vreg(r) => vrf.read_vreg_word(r, w)?,
                Src1::Splat(x) => x,
            };
            let resp = simd_alu(req(a, b, word_enable(w, vl, sew, &cfg)));
            for j in 0..per_word {
                let e = w * per_word + j;
                if e < vl as usize {
                    bits[e] = resp.cmp >> j & 1 == 1;
                }
            }
        }
        // bit-granular write-back of the packed mask; tail and masked-off
        // bits are undisturbed
        let dst = vrf.reg_bytes_mut(inst.rd);
        for (e, bit) in bits.into_iter().enumerate() {
            if v0.is_some_and(|m| !mask_bit(m, e)) {
                continue;
            }
            if bit {
                dst[e / 8] |= 1 << (e % 8);
            } else {
                dst[e / 8] &= !(1 << (e % 8));
            }
        }
        return Ok(());
    }

    for w in 0..words {
        vrf.begin_cycle();
        let a = vrf.read_vreg_word(inst.rs2, w)?;
        let b = match src1 {
            Src1::Vreg(r) => vrf.read_vreg_word(r, w)?,
            Src1::Splat(x) => x,
        };
        let en = word_enable(w, vl, sew, &cfg) & mask_enable(v0, w, sew, &cfg);
        let resp = simd_alu(req(a, b, en));
        vrf.write_vreg_word(inst.rd, w, resp.result, en)?;
    }
    Ok(())
}

/// Merges and moves, including the scalar/element-0 transfers.
pub fn exec_merge_move(inst: &Instruction, st: &mut MachineState) -> Result<(), ExecError> {
    let cfg = st.cfg;
    let sew = st.scalar.vtype.sew;
    check_sew(sew, &cfg)?;
    let vl = st.scalar.vl;
    let operands = operands_of(inst)?;
    match operands {
        VOperands::XS => {
            st.vrf.begin_cycle();
            let w = st.vrf.read_vreg_word(inst.rs2, 0)?;
            st.scalar.write(inst.rd, sext(w & sew.mask(), sew.bits()) as u32);
            return Ok(());
        }
        VOperands::SX => {
            if vl > 0 {
                let x = st.scalar.read(inst.rs1) as i32 as i64 as u64;
                st.vrf.begin_cycle();
                st.vrf.write_vreg_word(inst.rd, 0, x & sew.mask(), word_enable(0, 1, sew, &cfg))?;
            }
            return Ok(());
        }
        _ => {}
    }
    if vl == 0 {
        return Ok(());
    }
    let src1 = operand_src1(inst, st, operands, sew);
    let merge = matches!(operands, VOperands::Vvm | VOperands::Vxm);
    let v0: Option<Vec<u8>> = merge.then(|| st.vrf.reg_bytes(0).to_vec());
    let words = active_words(vl, sew, &cfg);
    for w in 0..words {
        st.vrf.begin_cycle();
        let b = match src1 {
            Src1::Vreg(r) => st.vrf.read_vreg_word(r, w)?,
            Src1::Splat(x) => x,
        };
        let result = match v0.as_deref() {
            Some(m) => {
                let a = st.vrf.read_vreg_word(inst.rs2, w)?;
                let take = mask_enable(Some(m), w, sew, &cfg);
                crate::arch_state::merge_bytes(a, b, take)
            }
            None => b,
        };
        st.vrf.write_vreg_word(inst.rd, w, result, word_enable(w, vl, sew, &cfg))?;
    }
    Ok(())
}

/// `vsetvli`: `rs1 ≠ x0` requests AVL = x[rs1]; `rs1 = x0, rd ≠ x0` requests
/// VLMAX; `rs1 = rd = x0` keeps the current vl under the new SEW.
pub fn exec_vsetvli(inst: &Instruction, st: &mut MachineState) -> Result<u32, ExecError> {
    let vtype = inst.vtype().ok_or_else(|| ExecError::NotVector(inst.to_string()))?;
    check_sew(vtype.sew, &st.cfg)?;
    let vlmax = vtype.vlmax(&st.cfg);
    let avl = if inst.rs1 != 0 {
        st.scalar.read(inst.rs1)
    } else if inst.rd != 0 {
        u32::MAX
    } else {
        st.scalar.vl
    };
    let vl = avl.min(vlmax);
    st.scalar.vtype = VType { sew: vtype.sew };
    st.scalar.vl = vl;
    st.scalar.write(inst.rd, vl);
    Ok(vl)
}

/// Execute any vector-class instruction.
pub fn execute_vector(inst: &Instruction, st: &mut MachineState) -> Result<ExecInfo, ExecError> {
    let info = inst.info();
    match info.class {
        OpClass::Scalar => Err(ExecError::NotVector(inst.to_string())),
        OpClass::VectorConfig => {
            let vl = exec_vsetvli(inst, st)?;
            Ok(ExecInfo { vl, sew: st.scalar.vtype.sew, beats: 0 })
        }
        OpClass::VectorLoad | OpClass::VectorStore => {
            let (eew, strided) = match info.format {
                Format::VLoad { width, strided } | Format::VStore { width, strided } => (width, strided),
                _ => unreachable!("memory class implies a memory format"),
            };
            let sew = st.scalar.vtype.sew;
            check_sew(sew, &st.cfg)?;
            if eew != sew {
                return Err(ExecError::EewMismatch { inst: inst.to_string(), eew, sew });
            }
            let vl = st.scalar.vl;
            let base = st.scalar.read(inst.rs1) as u64;
            let stride = strided.then(|| st.scalar.read(inst.rs2) as i32 as i64);
            let kind = if info.class == OpClass::VectorLoad { AccessKind::Load } else { AccessKind::Store };
            let plan = plan_access(kind, base, stride, vl, sew, inst.rd, &st.cfg)?;
            match kind {
                AccessKind::Load => execute_load(&plan, &st.mem, &mut st.vrf, inst.rd)?,
                AccessKind::Store => execute_store(&plan, &mut st.vrf, &mut st.mem, inst.rd)?,
            }
            Ok(ExecInfo { vl, sew, beats: plan.burst_length() as u64 })
        }
        OpClass::VectorArith => {
            let sew = st.scalar.vtype.sew;
            if alu_op(inst.mnemonic).is_some() {
                exec_vector_arith(inst, st)?;
            } else {
                exec_merge_move(inst, st)?;
            }
            Ok(ExecInfo { vl: st.scalar.vl, sew, beats: 0 })
        }
    }
}
