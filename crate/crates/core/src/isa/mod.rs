//! Instruction set: the vector subset plus a minimal RV32IM-style scalar base.
//!
//! Everything here is pure: encoding, decoding, assembling and disassembling
//! never touch machine state.

mod asm;
mod disasm;
mod encode;
mod table;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use asm::assemble;
pub use disasm::{disassemble, format_instruction, xreg_name};
pub use encode::{decode, encode};
pub use table::{lookup, supported_mnemonics, Format, Mnemonic, MnemonicInfo, OpClass, VOperands};

/// Default start of the data segment (and of the memory image).
pub const DEFAULT_DATA_BASE: u64 = 0x8000_0000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsaError {
    #[error("unsupported mnemonic `{0}`")]
    UnsupportedMnemonic(String),
    #[error("field `{field}` out of range: {value}")]
    FieldOutOfRange { field: &'static str, value: i64 },
    #[error("illegal encoding {0:#010x}")]
    IllegalEncoding(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unresolved label `{label}`")]
    UnresolvedLabel { line: usize, label: String },
    #[error("invalid vector configuration: {0}")]
    InvalidConfig(String),
}

/// Standard element width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sew {
    E8,
    E16,
    E32,
    E64,
}

impl Sew {
    pub const ALL: [Sew; 4] = [Sew::E8, Sew::E16, Sew::E32, Sew::E64];

    pub fn bits(self) -> u32 {
        8 << self.code()
    }

    pub fn bytes(self) -> u32 {
        1 << self.code()
    }

    /// The 3-bit `vsew` code used in `vtype`.
    pub fn code(self) -> u32 {
        match self {
            Sew::E8 => 0,
            Sew::E16 => 1,
            Sew::E32 => 2,
            Sew::E64 => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<Sew> {
        Sew::ALL.get(code as usize).copied()
    }

    pub fn from_bits(bits: u32) -> Option<Sew> {
        match bits {
            8 => Some(Sew::E8),
            16 => Some(Sew::E16),
            32 => Some(Sew::E32),
            64 => Some(Sew::E64),
            _ => None,
        }
    }

    /// All-ones mask covering one element.
    pub fn mask(self) -> u64 {
        if self == Sew::E64 {
            u64::MAX
        } else {
            (1u64 << self.bits()) - 1
        }
    }
}

impl fmt::Display for Sew {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.bits())
    }
}

/// Design-time parameters of the vector unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorConfig {
    pub vlen_bits: u32,
    pub elen_bits: u32,
    pub lanes: u32,
}

impl Default for VectorConfig {
    fn default() -> Self {
        VectorConfig { vlen_bits: 256, elen_bits: 64, lanes: 2 }
    }
}

impl VectorConfig {
    pub fn new(vlen_bits: u32, elen_bits: u32, lanes: u32) -> Result<Self, IsaError> {
        let cfg = VectorConfig { vlen_bits, elen_bits, lanes };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IsaError> {
        if self.elen_bits != 32 && self.elen_bits != 64 {
            return Err(IsaError::InvalidConfig(format!("ELEN must be 32 or 64, got {}", self.elen_bits)));
        }
        if self.vlen_bits == 0 || !self.vlen_bits.is_multiple_of(self.elen_bits) {
            return Err(IsaError::InvalidConfig(format!(
                "VLEN {} is not a positive multiple of ELEN {}",
                self.vlen_bits, self.elen_bits
            )));
        }
        if self.vlen_bits > 4096 {
            return Err(IsaError::InvalidConfig(format!("VLEN {} exceeds 4096", self.vlen_bits)));
        }
        if self.lanes != 1 && self.lanes != 2 {
            return Err(IsaError::InvalidConfig(format!("lanes must be 1 or 2, got {}", self.lanes)));
        }
        Ok(())
    }

    pub fn words_per_vreg(&self) -> usize {
        (self.vlen_bits / self.elen_bits) as usize
    }

    pub fn elen_bytes(&self) -> usize {
        (self.elen_bits / 8) as usize
    }

    pub fn vlen_bytes(&self) -> usize {
        (self.vlen_bits / 8) as usize
    }

    pub fn vlmax(&self, sew: Sew) -> u32 {
        self.vlen_bits / sew.bits()
    }

    pub fn regs_per_bank(&self) -> usize {
        32 / self.lanes as usize
    }

    pub fn bank_of(&self, vreg: u8) -> usize {
        vreg as usize / self.regs_per_bank()
    }

    pub fn supports(&self, sew: Sew) -> bool {
        sew.bits() <= self.elen_bits
    }
}

/// Vector type state written by `vsetvli`. LMUL is always 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VType {
    pub sew: Sew,
}

impl VType {
    pub fn vlmax(&self, cfg: &VectorConfig) -> u32 {
        cfg.vlmax(self.sew)
    }

    /// The 11-bit `zimm` field of `vsetvli` (vlmul=m1, tail/mask undisturbed).
    pub fn to_vtypei(self) -> u32 {
        self.sew.code() << 2
    }

    pub fn from_vtypei(zimm: u32) -> Option<VType> {
        if zimm & !0b1_1100 != 0 {
            return None;
        }
        Sew::from_code((zimm >> 2) & 0b111).map(|sew| VType { sew })
    }
}

/// One decoded instruction. Unused fields are zero; `vm` is `true` (unmasked)
/// everywhere except merges, which always read the mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub mnemonic: Mnemonic,
    /// `rd`, `vd`, or the store-data register `vs3`.
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub imm: i32,
    pub vm: bool,
}

impl Instruction {
    pub fn new(mnemonic: Mnemonic) -> Self {
        Instruction { mnemonic, rd: 0, rs1: 0, rs2: 0, imm: 0, vm: !mnemonic.info().fixed_masked() }
    }

    pub fn with_rd(mut self, rd: u8) -> Self {
        self.rd = rd;
        self
    }

    pub fn with_rs1(mut self, rs1: u8) -> Self {
        self.rs1 = rs1;
        self
    }

    pub fn with_rs2(mut self, rs2: u8) -> Self {
        self.rs2 = rs2;
        self
    }

    pub fn with_imm(mut self, imm: i32) -> Self {
        self.imm = imm;
        self
    }

    pub fn masked(mut self) -> Self {
        self.vm = false;
        self
    }

    pub fn info(&self) -> &'static MnemonicInfo {
        self.mnemonic.info()
    }

    pub fn class(&self) -> OpClass {
        self.info().class
    }

    pub fn is_vector(&self) -> bool {
        self.class() != OpClass::Scalar
    }

    /// `vsetvli` requested element width.
    pub fn vtype(&self) -> Option<VType> {
        match self.info().format {
            Format::VSetVli => VType::from_vtypei(self.imm as u32),
            _ => None,
        }
    }

    /// The register whose bank selects the executing lane: `vd` for
    /// everything that writes a vector register, `vs3` for stores and `vs2`
    /// for `vmv.x.s`.
    pub fn lane_register(&self) -> Option<u8> {
        match self.info().format {
            Format::OpV { operands: VOperands::XS, .. } => Some(self.rs2),
            Format::OpV { .. } | Format::VLoad { .. } | Format::VStore { .. } => Some(self.rd),
            _ => None,
        }
    }

    /// `jal x0, 0`: the halt convention.
    pub fn is_halt(&self) -> bool {
        self.mnemonic == Mnemonic::Jal && self.rd == 0 && self.imm == 0
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_instruction(self))
    }
}

/// A raw 32-bit instruction word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncodedWord(pub u32);

/// Initialised data emitted by the assembler.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataSegment {
    pub base: u64,
    pub bytes: Vec<u8>,
}

/// An assembled program. Instructions live in their own address space
/// starting at `text_base`; the data segment is loaded into memory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    pub text_base: u64,
    /// Text label → instruction index.
    pub labels: BTreeMap<String, usize>,
    /// Data label → byte address.
    pub data_labels: BTreeMap<String, u64>,
    pub data: DataSegment,
}

impl Program {
    pub fn from_instructions(instructions: Vec<Instruction>) -> Self {
        Program { instructions, ..Default::default() }
    }

    pub fn pc_of(&self, index: usize) -> u64 {
        self.text_base + 4 * index as u64
    }

    /// Little-endian 32-bit word image of the text section.
    pub fn to_image(&self) -> Result<Vec<u8>, IsaError> {
        let mut out = Vec::with_capacity(self.instructions.len() * 4);
        for inst in &self.instructions {
            out.extend_from_slice(&encode(inst)?.0.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_image(bytes: &[u8]) -> Result<Self, IsaError> {
        if !bytes.len().is_multiple_of(4) {
            return Err(IsaError::InvalidConfig(format!("image length {} is not a multiple of 4", bytes.len())));
        }
        let instructions = bytes
            .chunks_exact(4)
            .map(|c| decode(EncodedWord(u32::from_le_bytes([c[0], c[1], c[2], c[3]]))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Program::from_instructions(instructions))
    }

    pub fn count_class(&self, class: OpClass) -> usize {
        self.instructions.iter().filter(|i| i.class() == class).count()
    }

    pub fn contains(&self, mnemonic: Mnemonic) -> bool {
        self.instructions.iter().any(|i| i.mnemonic == mnemonic)
    }
}
