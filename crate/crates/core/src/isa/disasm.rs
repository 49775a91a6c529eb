use super::table::{Format, VOperands};
use super::{decode, EncodedWord, Instruction, IsaError, VType};

const ABI: [&str; 32] = [
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "s2",
    "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
];

pub fn xreg_name(index: u8) -> &'static str {
    ABI[index as usize & 31]
}

pub(crate) fn xreg_index(name: &str) -> Option<u8> {
    if let Some(pos) = ABI.iter().position(|n| *n == name) {
        return Some(pos as u8);
    }
    if name == "fp" {
        return Some(8);
    }
    let n: u8 = name.strip_prefix('x')?.parse().ok()?;
    (n < 32).then_some(n)
}

pub(crate) fn vreg_index(name: &str) -> Option<u8> {
    let n: u8 = name.strip_prefix('v')?.parse().ok()?;
    (n < 32).then_some(n)
}

/// Canonical assembly text for one instruction.
pub fn format_instruction(inst: &Instruction) -> String {
    let info = inst.info();
    let name = info.name;
    let x = |r: u8| xreg_name(r);
    let mask = if info.maskable && !inst.vm { ", v0.t" } else { "" };
    match info.format {
        Format::OpV { operands, .. } => match operands {
            VOperands::Vv | VOperands::Vs => format!("{name} v{}, v{}, v{}{mask}", inst.rd, inst.rs2, inst.rs1),
            VOperands::Vx => format!("{name} v{}, v{}, {}{mask}", inst.rd, inst.rs2, x(inst.rs1)),
            VOperands::Vi | VOperands::ViU => format!("{name} v{}, v{}, {}{mask}", inst.rd, inst.rs2, inst.imm),
            VOperands::Vvm => format!("{name} v{}, v{}, v{}, v0", inst.rd, inst.rs2, inst.rs1),
            VOperands::Vxm => format!("{name} v{}, v{}, {}, v0", inst.rd, inst.rs2, x(inst.rs1)),
            VOperands::MvV => format!("{name} v{}, v{}", inst.rd, inst.rs1),
            VOperands::MvX | VOperands::SX => format!("{name} v{}, {}", inst.rd, x(inst.rs1)),
            VOperands::MvI => format!("{name} v{}, {}", inst.rd, inst.imm),
            VOperands::XS => format!("{name} {}, v{}", x(inst.rd), inst.rs2),
        },
        Format::VLoad { strided, .. } | Format::VStore { strided, .. } => {
            if strided {
                format!("{name} v{}, ({}), {}", inst.rd, x(inst.rs1), x(inst.rs2))
            } else {
                format!("{name} v{}, ({})", inst.rd, x(inst.rs1))
            }
        }
        Format::VSetVli => {
            let sew = VType::from_vtypei(inst.imm as u32).map(|v| v.sew.to_string()).unwrap_or_else(|| "e?".into());
            format!("{name} {}, {}, {sew}, m1", x(inst.rd), x(inst.rs1))
        }
        Format::R { .. } => format!("{name} {}, {}, {}", x(inst.rd), x(inst.rs1), x(inst.rs2)),
        Format::I { .. } | Format::Shift { .. } => format!("{name} {}, {}, {}", x(inst.rd), x(inst.rs1), inst.imm),
        Format::Load { .. } | Format::Jalr => format!("{name} {}, {}({})", x(inst.rd), inst.imm, x(inst.rs1)),
        Format::Store { .. } => format!("{name} {}, {}({})", x(inst.rs2), inst.imm, x(inst.rs1)),
        Format::Branch { .. } => format!("{name} {}, {}, {}", x(inst.rs1), x(inst.rs2), inst.imm),
        Format::Jal => format!("{name} {}, {}", x(inst.rd), inst.imm),
        Format::Lui | Format::Auipc => format!("{name} {}, {:#x}", x(inst.rd), inst.imm),
    }
}

/// Decode a word and render it as canonical assembly text.
pub fn disassemble(word: EncodedWord) -> Result<String, IsaError> {
    decode(word).map(|inst| format_instruction(&inst))
}
