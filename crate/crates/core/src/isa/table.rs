//! The mnemonic table. Every supported instruction is one row; the encoder,
//! decoder, assembler and disassembler are all driven from it.

use super::Sew;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpClass {
    VectorArith,
    VectorLoad,
    VectorStore,
    VectorConfig,
    Scalar,
}

/// Operand shape of an OP-V instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VOperands {
    /// `vd, vs2, vs1`
    Vv,
    /// `vd, vs2, rs1`
    Vx,
    /// `vd, vs2, simm5`
    Vi,
    /// `vd, vs2, uimm5`
    ViU,
    /// `vd, vs2, vs1, v0`
    Vvm,
    /// `vd, vs2, rs1, v0`
    Vxm,
    /// `vd, vs1`
    MvV,
    /// `vd, rs1`
    MvX,
    /// `vd, simm5`
    MvI,
    /// reduction `vd, vs2, vs1`
    Vs,
    /// `rd, vs2`
    XS,
    /// `vd, rs1`
    SX,
}

/// Whether an OP-V row lives in the integer (OPI*) or the
/// multiply/reduce (OPM*) half of the funct3 space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cat {
    I,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    OpV { funct6: u8, cat: Cat, operands: VOperands },
    VLoad { width: Sew, strided: bool },
    VStore { width: Sew, strided: bool },
    VSetVli,
    R { funct7: u8, funct3: u8 },
    I { funct3: u8 },
    Shift { funct7: u8, funct3: u8 },
    Load { funct3: u8 },
    Store { funct3: u8 },
    Branch { funct3: u8 },
    Jal,
    Jalr,
    Lui,
    Auipc,
}

/// Descriptor for one supported mnemonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MnemonicInfo {
    pub mnemonic: Mnemonic,
    pub name: &'static str,
    pub class: OpClass,
    pub format: Format,
    /// `vm=0` is accepted.
    pub maskable: bool,
    pub reduction: bool,
}

impl MnemonicInfo {
    /// Merges always read `v0`, so their `vm` bit is fixed at 0.
    pub fn fixed_masked(&self) -> bool {
        matches!(self.format, Format::OpV { operands: VOperands::Vvm | VOperands::Vxm, .. })
    }

    /// The `funct3` field as encoded.
    pub fn funct3(&self) -> u32 {
        match self.format {
            Format::OpV { cat, operands, .. } => match (cat, operands) {
                (Cat::I, VOperands::Vv | VOperands::Vvm | VOperands::MvV) => 0b000,
                (Cat::I, VOperands::Vi | VOperands::ViU | VOperands::MvI) => 0b011,
                (Cat::I, VOperands::Vx | VOperands::Vxm | VOperands::MvX) => 0b100,
                (Cat::M, VOperands::Vv | VOperands::Vs | VOperands::XS) => 0b010,
                (Cat::M, VOperands::Vx | VOperands::SX) => 0b110,
                _ => unreachable!("bad OP-V row {}", self.name),
            },
            Format::VLoad { width, .. } | Format::VStore { width, .. } => width_code(width),
            Format::VSetVli => 0b111,
            Format::R { funct3, .. }
            | Format::I { funct3 }
            | Format::Shift { funct3, .. }
            | Format::Load { funct3 }
            | Format::Store { funct3 }
            | Format::Branch { funct3 } => funct3 as u32,
            Format::Jalr => 0,
            Format::Jal | Format::Lui | Format::Auipc => 0,
        }
    }

    pub fn opcode(&self) -> u32 {
        match self.format {
            Format::OpV { .. } | Format::VSetVli => 0x57,
            Format::VLoad { .. } => 0x07,
            Format::VStore { .. } => 0x27,
            Format::R { .. } => 0x33,
            Format::I { .. } | Format::Shift { .. } => 0x13,
            Format::Load { .. } => 0x03,
            Format::Store { .. } => 0x23,
            Format::Branch { .. } => 0x63,
            Format::Jal => 0x6f,
            Format::Jalr => 0x67,
            Format::Lui => 0x37,
            Format::Auipc => 0x17,
        }
    }

    /// `(mask, match)`: the bits fixed by this row and their values.
    pub fn mask_match(&self) -> (u32, u32) {
        const OPCODE: u32 = 0x7f;
        const FUNCT3: u32 = 0x7 << 12;
        const VM: u32 = 1 << 25;
        const RS2: u32 = 0x1f << 20;
        const RS1: u32 = 0x1f << 15;
        let mut mask = OPCODE;
        let mut bits = self.opcode();
        let has_funct3 = !matches!(self.format, Format::Jal | Format::Lui | Format::Auipc);
        if has_funct3 {
            mask |= FUNCT3;
            bits |= self.funct3() << 12;
        }
        match self.format {
            Format::OpV { funct6, operands, .. } => {
                mask |= 0x3f << 26;
                bits |= (funct6 as u32) << 26;
                if self.fixed_masked() {
                    mask |= VM;
                } else if !self.maskable {
                    mask |= VM;
                    bits |= VM;
                }
                match operands {
                    VOperands::MvV | VOperands::MvX | VOperands::MvI | VOperands::SX => mask |= RS2,
                    VOperands::XS => mask |= RS1,
                    _ => {}
                }
            }
            Format::VLoad { strided, .. } | Format::VStore { strided, .. } => {
                // nf=0, mew=0, mop, vm=1
                mask |= 0xf << 28 | 0x3 << 26 | VM;
                bits |= VM;
                if strided {
                    bits |= 0b10 << 26;
                } else {
                    mask |= RS2;
                }
            }
            Format::VSetVli => mask |= 1 << 31,
            Format::R { funct7, .. } | Format::Shift { funct7, .. } => {
                mask |= 0x7f << 25;
                bits |= (funct7 as u32) << 25;
            }
            _ => {}
        }
        (mask, bits)
    }
}

fn width_code(width: Sew) -> u32 {
    match width {
        Sew::E8 => 0b000,
        Sew::E16 => 0b101,
        Sew::E32 => 0b110,
        Sew::E64 => 0b111,
    }
}

macro_rules! mnemonics {
    ($( $variant:ident => $name:literal, $class:ident, $format:expr, $maskable:expr, $red:expr; )*) => {
        /// Every supported mnemonic.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Mnemonic {
            $($variant,)*
        }

        static TABLE: &[MnemonicInfo] = &[
            $(MnemonicInfo {
                mnemonic: Mnemonic::$variant,
                name: $name,
                class: OpClass::$class,
                format: $format,
                maskable: $maskable,
                reduction: $red,
            },)*
        ];
    };
}

use Format::*;
use VOperands::*;

const fn opi(funct6: u8, operands: VOperands) -> Format {
    OpV { funct6, cat: Cat::I, operands }
}

const fn opm(funct6: u8, operands: VOperands) -> Format {
    OpV { funct6, cat: Cat::M, operands }
}

mnemonics! {
    Vsetvli => "vsetvli", VectorConfig, VSetVli, false, false;

    Vle8 => "vle8.v", VectorLoad, VLoad { width: Sew::E8, strided: false }, false, false;
    Vle16 => "vle16.v", VectorLoad, VLoad { width: Sew::E16, strided: false }, false, false;
    Vle32 => "vle32.v", VectorLoad, VLoad { width: Sew::E32, strided: false }, false, false;
    Vle64 => "vle64.v", VectorLoad, VLoad { width: Sew::E64, strided: false }, false, false;
    Vlse8 => "vlse8.v", VectorLoad, VLoad { width: Sew::E8, strided: true }, false, false;
    Vlse16 => "vlse16.v", VectorLoad, VLoad { width: Sew::E16, strided: true }, false, false;
    Vlse32 => "vlse32.v", VectorLoad, VLoad { width: Sew::E32, strided: true }, false, false;
    Vlse64 => "vlse64.v", VectorLoad, VLoad { width: Sew::E64, strided: true }, false, false;
    Vse8 => "vse8.v", VectorStore, VStore { width: Sew::E8, strided: false }, false, false;
    Vse16 => "vse16.v", VectorStore, VStore { width: Sew::E16, strided: false }, false, false;
    Vse32 => "vse32.v", VectorStore, VStore { width: Sew::E32, strided: false }, false, false;
    Vse64 => "vse64.v", VectorStore, VStore { width: Sew::E64, strided: false }, false, false;
    Vsse8 => "vsse8.v", VectorStore, VStore { width: Sew::E8, strided: true }, false, false;
    Vsse16 => "vsse16.v", VectorStore, VStore { width: Sew::E16, strided: true }, false, false;
    Vsse32 => "vsse32.v", VectorStore, VStore { width: Sew::E32, strided: true }, false, false;
    Vsse64 => "vsse64.v", VectorStore, VStore { width: Sew::E64, strided: true }, false, false;

    VaddVv => "vadd.vv", VectorArith, opi(0b000000, Vv), true, false;
    VaddVx => "vadd.vx", VectorArith, opi(0b000000, Vx), true, false;
    VaddVi => "vadd.vi", VectorArith, opi(0b000000, Vi), true, false;
    VsubVv => "vsub.vv", VectorArith, opi(0b000010, Vv), true, false;
    VsubVx => "vsub.vx", VectorArith, opi(0b000010, Vx), true, false;
    VminuVv => "vminu.vv", VectorArith, opi(0b000100, Vv), true, false;
    VminuVx => "vminu.vx", VectorArith, opi(0b000100, Vx), true, false;
    VminVv => "vmin.vv", VectorArith, opi(0b000101, Vv), true, false;
    VminVx => "vmin.vx", VectorArith, opi(0b000101, Vx), true, false;
    VmaxuVv => "vmaxu.vv", VectorArith, opi(0b000110, Vv), true, false;
    VmaxuVx => "vmaxu.vx", VectorArith, opi(0b000110, Vx), true, false;
    VmaxVv => "vmax.vv", VectorArith, opi(0b000111, Vv), true, false;
    VmaxVx => "vmax.vx", VectorArith, opi(0b000111, Vx), true, false;
    VandVv => "vand.vv", VectorArith, opi(0b001001, Vv), true, false;
    VandVx => "vand.vx", VectorArith, opi(0b001001, Vx), true, false;
    VandVi => "vand.vi", VectorArith, opi(0b001001, Vi), true, false;
    VorVv => "vor.vv", VectorArith, opi(0b001010, Vv), true, false;
    VorVx => "vor.vx", VectorArith, opi(0b001010, Vx), true, false;
    VorVi => "vor.vi", VectorArith, opi(0b001010, Vi), true, false;
    VxorVv => "vxor.vv", VectorArith, opi(0b001011, Vv), true, false;
    VxorVx => "vxor.vx", VectorArith, opi(0b001011, Vx), true, false;
    VxorVi => "vxor.vi", VectorArith, opi(0b001011, Vi), true, false;
    VmergeVvm => "vmerge.vvm", VectorArith, opi(0b010111, Vvm), false, false;
    VmergeVxm => "vmerge.vxm", VectorArith, opi(0b010111, Vxm), false, false;
    VmvVV => "vmv.v.v", VectorArith, opi(0b010111, MvV), false, false;
    VmvVX => "vmv.v.x", VectorArith, opi(0b010111, MvX), false, false;
    VmvVI => "vmv.v.i", VectorArith, opi(0b010111, MvI), false, false;
    VmseqVv => "vmseq.vv", VectorArith, opi(0b011000, Vv), true, false;
    VmseqVx => "vmseq.vx", VectorArith, opi(0b011000, Vx), true, false;
    VmseqVi => "vmseq.vi", VectorArith, opi(0b011000, Vi), true, false;
    VmsneVv => "vmsne.vv", VectorArith, opi(0b011001, Vv), true, false;
    VmsneVx => "vmsne.vx", VectorArith, opi(0b011001, Vx), true, false;
    VmsneVi => "vmsne.vi", VectorArith, opi(0b011001, Vi), true, false;
    VmsltVv => "vmslt.vv", VectorArith, opi(0b011011, Vv), true, false;
    VmsltVx => "vmslt.vx", VectorArith, opi(0b011011, Vx), true, false;
    VmsleVv => "vmsle.vv", VectorArith, opi(0b011101, Vv), true, false;
    VmsleVx => "vmsle.vx", VectorArith, opi(0b011101, Vx), true, false;
    VmsleVi => "vmsle.vi", VectorArith, opi(0b011101, Vi), true, false;
    VsllVv => "vsll.vv", VectorArith, opi(0b100101, Vv), true, false;
    VsllVx => "vsll.vx", VectorArith, opi(0b100101, Vx), true, false;
    VsllVi => "vsll.vi", VectorArith, opi(0b100101, ViU), true, false;
    VsrlVv => "vsrl.vv", VectorArith, opi(0b101000, Vv), true, false;
    VsrlVx => "vsrl.vx", VectorArith, opi(0b101000, Vx), true, false;
    VsrlVi => "vsrl.vi", VectorArith, opi(0b101000, ViU), true, false;
    VsraVv => "vsra.vv", VectorArith, opi(0b101001, Vv), true, false;
    VsraVx => "vsra.vx", VectorArith, opi(0b101001, Vx), true, false;
    VsraVi => "vsra.vi", VectorArith, opi(0b101001, ViU), true, false;

    VredsumVs => "vredsum.vs", VectorArith, opm(0b000000, Vs), true, true;
    VredmaxVs => "vredmax.vs", VectorArith, opm(0b000111, Vs), true, true;
    VmvXS => "vmv.x.s", VectorArith, opm(0b010000, XS), false, false;
    VmvSX => "vmv.s.x", VectorArith, opm(0b010000, SX), false, false;
    VdivuVv => "vdivu.vv", VectorArith, opm(0b100000, Vv), true, false;
    VdivuVx => "vdivu.vx", VectorArith, opm(0b100000, Vx), true, false;
    VdivVv => "vdiv.vv", VectorArith, opm(0b100001, Vv), true, false;
    VdivVx => "vdiv.vx", VectorArith, opm(0b100001, Vx), true, false;
    VmulVv => "vmul.vv", VectorArith, opm(0b100101, Vv), true, false;
    VmulVx => "vmul.vx", VectorArith, opm(0b100101, Vx), true, false;

    Add => "add", Scalar, R { funct7: 0x00, funct3: 0b000 }, false, false;
    Sub => "sub", Scalar, R { funct7: 0x20, funct3: 0b000 }, false, false;
    Sll => "sll", Scalar, R { funct7: 0x00, funct3: 0b001 }, false, false;
    Xor => "xor", Scalar, R { funct7: 0x00, funct3: 0b100 }, false, false;
    Srl => "srl", Scalar, R { funct7: 0x00, funct3: 0b101 }, false, false;
    Sra => "sra", Scalar, R { funct7: 0x20, funct3: 0b101 }, false, false;
    Or => "or", Scalar, R { funct7: 0x00, funct3: 0b110 }, false, false;
    And => "and", Scalar, R { funct7: 0x00, funct3: 0b111 }, false, false;
    Mul => "mul", Scalar, R { funct7: 0x01, funct3: 0b000 }, false, false;
    Div => "div", Scalar, R { funct7: 0x01, funct3: 0b100 }, false, false;
    Addi => "addi", Scalar, I { funct3: 0b000 }, false, false;
    Xori => "xori", Scalar, I { funct3: 0b100 }, false, false;
    Ori => "ori", Scalar, I { funct3: 0b110 }, false, false;
    Andi => "andi", Scalar, I { funct3: 0b111 }, false, false;
    Slli => "slli", Scalar, Shift { funct7: 0x00, funct3: 0b001 }, false, false;
    Srli => "srli", Scalar, Shift { funct7: 0x00, funct3: 0b101 }, false, false;
    Srai => "srai", Scalar, Shift { funct7: 0x20, funct3: 0b101 }, false, false;
    Lb => "lb", Scalar, Load { funct3: 0b000 }, false, false;
    Lh => "lh", Scalar, Load { funct3: 0b001 }, false, false;
    Lw => "lw", Scalar, Load { funct3: 0b010 }, false, false;
    Sb => "sb", Scalar, Store { funct3: 0b000 }, false, false;
    Sh => "sh", Scalar, Store { funct3: 0b001 }, false, false;
    Sw => "sw", Scalar, Store { funct3: 0b010 }, false, false;
    Beq => "beq", Scalar, Branch { funct3: 0b000 }, false, false;
    Bne => "bne", Scalar, Branch { funct3: 0b001 }, false, false;
    Blt => "blt", Scalar, Branch { funct3: 0b100 }, false, false;
    Bge => "bge", Scalar, Branch { funct3: 0b101 }, false, false;
    Jal => "jal", Scalar, Jal, false, false;
    Jalr => "jalr", Scalar, Jalr, false, false;
    Lui => "lui", Scalar, Lui, false, false;
    Auipc => "auipc", Scalar, Auipc, false, false;
}

impl Mnemonic {
    pub fn info(self) -> &'static MnemonicInfo {
        &TABLE[self as usize]
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }
}

/// Descriptors for everything the assembler and decoder accept.
pub fn supported_mnemonics() -> &'static [MnemonicInfo] {
    TABLE
}

/// Look a mnemonic up by its assembly name.
pub fn lookup(name: &str) -> Option<&'static MnemonicInfo> {
    TABLE.iter().find(|info| info.name == name)
}
