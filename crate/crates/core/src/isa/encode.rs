use super::table::{Format, MnemonicInfo, VOperands};
use super::{supported_mnemonics, EncodedWord, Instruction, IsaError, VType};

/// Which `Instruction` fields a format carries.
#[derive(Clone, Copy)]
struct Fields {
    rd: bool,
    rs1: bool,
    rs2: bool,
    imm: bool,
}

fn fields(info: &MnemonicInfo) -> Fields {
    let f = |rd, rs1, rs2, imm| Fields { rd, rs1, rs2, imm };
    match info.format {
        Format::OpV { operands, .. } => match operands {
            VOperands::Vv | VOperands::Vx | VOperands::Vs | VOperands::Vvm | VOperands::Vxm => f(true, true, true, false),
            VOperands::Vi | VOperands::ViU => f(true, false, true, true),
            VOperands::MvV | VOperands::MvX | VOperands::SX => f(true, true, false, false),
            VOperands::MvI => f(true, false, false, true),
            VOperands::XS => f(true, false, true, false),
        },
        Format::VLoad { strided, .. } | Format::VStore { strided, .. } => f(true, true, strided, false),
        Format::VSetVli => f(true, true, false, true),
        Format::R { .. } => f(true, true, true, false),
        Format::I { .. } | Format::Shift { .. } | Format::Load { .. } | Format::Jalr => f(true, true, false, true),
        Format::Store { .. } | Format::Branch { .. } => f(false, true, true, true),
        Format::Jal | Format::Lui | Format::Auipc => f(true, false, false, true),
    }
}

/// Inclusive immediate range and required alignment for a format.
fn imm_range(info: &MnemonicInfo) -> (i64, i64, i64) {
    match info.format {
        Format::OpV { operands: VOperands::Vi | VOperands::MvI, .. } => (-16, 15, 1),
        Format::OpV { operands: VOperands::ViU, .. } => (0, 31, 1),
        Format::VSetVli => (0, 0x7ff, 1),
        Format::I { .. } | Format::Load { .. } | Format::Store { .. } | Format::Jalr => (-2048, 2047, 1),
        Format::Shift { .. } => (0, 31, 1),
        Format::Branch { .. } => (-4096, 4094, 2),
        Format::Jal => (-(1 << 20), (1 << 20) - 2, 2),
        Format::Lui | Format::Auipc => (0, 0xfffff, 1),
        _ => (0, 0, 1),
    }
}

fn check_reg(field: &'static str, value: u8, used: bool) -> Result<u32, IsaError> {
    if !used {
        if value != 0 {
            return Err(IsaError::FieldOutOfRange { field, value: value as i64 });
        }
        return Ok(0);
    }
    if value > 31 {
        return Err(IsaError::FieldOutOfRange { field, value: value as i64 });
    }
    Ok(value as u32)
}

/// Encode one instruction. Fields the format does not use must be zero.
pub fn encode(inst: &Instruction) -> Result<EncodedWord, IsaError> {
    let info = inst.info();
    let used = fields(info);
    let rd = check_reg("rd", inst.rd, used.rd)?;
    let rs1 = check_reg("rs1", inst.rs1, used.rs1)?;
    let rs2 = check_reg("rs2", inst.rs2, used.rs2)?;
    let imm = inst.imm as i64;
    if used.imm {
        let (lo, hi, align) = imm_range(info);
        if imm < lo || imm > hi || imm % align != 0 {
            return Err(IsaError::FieldOutOfRange { field: "imm", value: imm });
        }
    } else if imm != 0 {
        return Err(IsaError::FieldOutOfRange { field: "imm", value: imm });
    }
    if info.format == Format::VSetVli && VType::from_vtypei(inst.imm as u32).is_none() {
        return Err(IsaError::FieldOutOfRange { field: "vtypei", value: imm });
    }
    let vm_fixed = !info.maskable;
    let vm_default = !info.fixed_masked();
    if vm_fixed && inst.vm != vm_default {
        return Err(IsaError::FieldOutOfRange { field: "vm", value: inst.vm as i64 });
    }

    let (_, mut word) = info.mask_match();
    let imm = inst.imm as u32;
    word |= rd << 7;
    match info.format {
        Format::OpV { operands, .. } => {
            word |= rs2 << 20 | rs1 << 15;
            if matches!(operands, VOperands::Vi | VOperands::ViU | VOperands::MvI) {
                word |= (imm & 0x1f) << 15;
            }
            if info.maskable && inst.vm {
                word |= 1 << 25;
            }
        }
        Format::VLoad { .. } | Format::VStore { .. } => word |= rs2 << 20 | rs1 << 15,
        Format::VSetVli => word |= (imm & 0x7ff) << 20 | rs1 << 15,
        Format::R { .. } => word |= rs2 << 20 | rs1 << 15,
        Format::I { .. } | Format::Load { .. } | Format::Jalr => word |= (imm & 0xfff) << 20 | rs1 << 15,
        Format::Shift { .. } => word |= (imm & 0x1f) << 20 | rs1 << 15,
        Format::Store { .. } => {
            word |= (imm >> 5 & 0x7f) << 25 | rs2 << 20 | rs1 << 15 | (imm & 0x1f) << 7;
        }
        Format::Branch { .. } => {
            word |= (imm >> 12 & 1) << 31
                | (imm >> 5 & 0x3f) << 25
                | rs2 << 20
                | rs1 << 15
                | (imm >> 1 & 0xf) << 8
                | (imm >> 11 & 1) << 7;
        }
        Format::Jal => {
            word |= (imm >> 20 & 1) << 31 | (imm >> 1 & 0x3ff) << 21 | (imm >> 11 & 1) << 20 | (imm >> 12 & 0xff) << 12;
        }
        Format::Lui | Format::Auipc => word |= (imm & 0xfffff) << 12,
    }
    Ok(EncodedWord(word))
}

fn sext(value: u32, bits: u32) -> i32 {
    let shift = 32 - bits;
    ((value << shift) as i32) >> shift
}

/// Decode one word. Succeeds exactly when the word is a supported encoding,
/// in which case re-encoding reproduces it bit for bit.
pub fn decode(word: EncodedWord) -> Result<Instruction, IsaError> {
    let w = word.0;
    let info = supported_mnemonics()
        .iter()
        .find(|info| {
            let (mask, bits) = info.mask_match();
            w & mask == bits
        })
        .ok_or(IsaError::IllegalEncoding(w))?;
    let used = fields(info);
    let reg = |shift: u32, on: bool| if on { (w >> shift & 0x1f) as u8 } else { 0 };
    let mut inst = Instruction::new(info.mnemonic);
    inst.rd = reg(7, used.rd);
    inst.rs1 = reg(15, used.rs1);
    inst.rs2 = reg(20, used.rs2);
    if info.maskable {
        inst.vm = w >> 25 & 1 == 1;
    }
    inst.imm = match info.format {
        Format::OpV { operands: VOperands::Vi | VOperands::MvI, .. } => sext(w >> 15 & 0x1f, 5),
        Format::OpV { operands: VOperands::ViU, .. } => (w >> 15 & 0x1f) as i32,
        Format::VSetVli => {
            let zimm = w >> 20 & 0x7ff;
            if VType::from_vtypei(zimm).is_none() {
                return Err(IsaError::IllegalEncoding(w));
            }
            zimm as i32
        }
        Format::I { .. } | Format::Load { .. } | Format::Jalr => sext(w >> 20, 12),
        Format::Shift { .. } => (w >> 20 & 0x1f) as i32,
        Format::Store { .. } => sext((w >> 25) << 5 | (w >> 7 & 0x1f), 12),
        Format::Branch { .. } => {
            let v = (w >> 31 & 1) << 12 | (w >> 7 & 1) << 11 | (w >> 25 & 0x3f) << 5 | (w >> 8 & 0xf) << 1;
            sext(v, 13)
        }
        Format::Jal => {
            let v = (w >> 31 & 1) << 20 | (w >> 12 & 0xff) << 12 | (w >> 20 & 1) << 11 | (w >> 21 & 0x3ff) << 1;
            sext(v, 21)
        }
        Format::Lui | Format::Auipc => (w >> 12) as i32,
        _ => 0,
    };
    Ok(inst)
}
