//! Architectural state: the banked vector register file, scalar registers,
//! and the flat memory image.

use std::fmt::Write as _;

use thiserror::Error;

use crate::isa::{DataSegment, Sew, VType, VectorConfig, DEFAULT_DATA_BASE};

/// Default memory image size.
pub const DEFAULT_MEMORY_BYTES: usize = 256 << 20;

/// Read ports per bank.
pub const READ_PORTS: u8 = 2;
/// Write ports per bank.
pub const WRITE_PORTS: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Read,
    Write,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArchError {
    #[error("{port:?} port conflict on bank {bank}")]
    PortConflict { bank: usize, port: Port },
    #[error("access of {len} bytes at {addr:#x} is outside memory")]
    OutOfBounds { addr: u64, len: usize },
    #[error("misaligned {len}-byte access at {addr:#x}")]
    Misaligned { addr: u64, len: usize },
}

/// One ELEN word of a register access with its byte write-enables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterOffset {
    pub vreg: u8,
    pub word_index: usize,
    /// Bit `b` enables byte `b` of the ELEN word.
    pub byte_enable: u8,
}

/// Byte-enable for word `word` of a register when the first `vl` elements
/// of width `sew` are active.
pub fn word_enable(word: usize, vl: u32, sew: Sew, cfg: &VectorConfig) -> u8 {
    let eb = cfg.elen_bytes();
    let active = vl as usize * sew.bytes() as usize;
    let start = word * eb;
    let n = active.saturating_sub(start).min(eb);
    if n >= 8 {
        0xff
    } else {
        ((1u16 << n) - 1) as u8
    }
}

/// Offsets for a full-register access: one per ELEN word, with enables
/// covering exactly the first `vl` elements. `vstart` is always 0.
pub fn generate_offsets(vreg: u8, vl: u32, sew: Sew, cfg: &VectorConfig) -> Vec<RegisterOffset> {
    debug_assert!(sew.bits() <= cfg.elen_bits);
    debug_assert!(vl <= cfg.vlmax(sew));
    (0..cfg.words_per_vreg())
        .map(|w| RegisterOffset { vreg, word_index: w, byte_enable: word_enable(w, vl, sew, cfg) })
        .collect()
}

/// Replace the bytes of `old` selected by `byte_enable` with those of `data`.
pub fn merge_bytes(old: u64, data: u64, byte_enable: u8) -> u64 {
    let mut m = 0u64;
    for b in 0..8 {
        if byte_enable >> b & 1 == 1 {
            m |= 0xff << (8 * b);
        }
    }
    (old & !m) | (data & m)
}

/// Bit `element` of a bit-packed mask register.
pub fn mask_bit(mask: &[u8], element: usize) -> bool {
    mask[element / 8] >> (element % 8) & 1 == 1
}

/// Two banks (one per lane) of sixteen registers, each with two read ports
/// and one write port per cycle.
#[derive(Debug, Clone)]
pub struct VectorRegisterFile {
    cfg: VectorConfig,
    data: Vec<u8>,
    reads_used: [u8; 2],
    writes_used: [u8; 2],
}

impl VectorRegisterFile {
    pub fn new(cfg: VectorConfig) -> Self {
        VectorRegisterFile { cfg, data: vec![0; 32 * cfg.vlen_bytes()], reads_used: [0; 2], writes_used: [0; 2] }
    }

    pub fn config(&self) -> &VectorConfig {
        &self.cfg
    }

    /// Release all ports.
    pub fn begin_cycle(&mut self) {
        self.reads_used = [0; 2];
        self.writes_used = [0; 2];
    }

    pub fn reads_used(&self, bank: usize) -> u8 {
        self.reads_used[bank]
    }

    pub fn writes_used(&self, bank: usize) -> u8 {
        self.writes_used[bank]
    }

    fn word_range(&self, vreg: u8, word: usize) -> std::ops::Range<usize> {
        let eb = self.cfg.elen_bytes();
        assert!(vreg < 32 && word < self.cfg.words_per_vreg(), "v{vreg} word {word} out of range");
        let start = vreg as usize * self.cfg.vlen_bytes() + word * eb;
        start..start + eb
    }

    fn peek_word(&self, vreg: u8, word: usize) -> u64 {
        let mut buf = [0u8; 8];
        let r = self.word_range(vreg, word);
        let n = r.len();
        buf[..n].copy_from_slice(&self.data[r]);
        u64::from_le_bytes(buf)
    }

    pub fn read_vreg_word(&mut self, vreg: u8, word: usize) -> Result<u64, ArchError> {
        let bank = self.cfg.bank_of(vreg);
        if self.reads_used[bank] >= READ_PORTS {
            return Err(ArchError::PortConflict { bank, port: Port::Read });
        }
        self.reads_used[bank] += 1;
        Ok(self.peek_word(vreg, word))
    }

    pub fn write_vreg_word(&mut self, vreg: u8, word: usize, data: u64, byte_enable: u8) -> Result<(), ArchError> {
        let bank = self.cfg.bank_of(vreg);
        if self.writes_used[bank] >= WRITE_PORTS {
            return Err(ArchError::PortConflict { bank, port: Port::Write });
        }
        self.writes_used[bank] += 1;
        let merged = merge_bytes(self.peek_word(vreg, word), data, byte_enable);
        let r = self.word_range(vreg, word);
        let n = r.len();
        self.data[r].copy_from_slice(&merged.to_le_bytes()[..n]);
        Ok(())
    }

    /// Register contents without consuming ports.
    pub fn reg_bytes(&self, vreg: u8) -> &[u8] {
        let vb = self.cfg.vlen_bytes();
        &self.data[vreg as usize * vb..(vreg as usize + 1) * vb]
    }

    /// Mutable register contents without consuming ports (test setup and
    /// bit-granular mask writes).
    pub fn reg_bytes_mut(&mut self, vreg: u8) -> &mut [u8] {
        let vb = self.cfg.vlen_bytes();
        &mut self.data[vreg as usize * vb..(vreg as usize + 1) * vb]
    }

    /// Element `idx` of `vreg` zero-extended.
    pub fn element(&self, vreg: u8, idx: usize, sew: Sew) -> u64 {
        let b = sew.bytes() as usize;
        let bytes = &self.reg_bytes(vreg)[idx * b..(idx + 1) * b];
        let mut buf = [0u8; 8];
        buf[..b].copy_from_slice(bytes);
        u64::from_le_bytes(buf)
    }

    pub fn set_element(&mut self, vreg: u8, idx: usize, sew: Sew, value: u64) {
        let b = sew.bytes() as usize;
        self.reg_bytes_mut(vreg)[idx * b..(idx + 1) * b].copy_from_slice(&value.to_le_bytes()[..b]);
    }
}

/// Scalar register file plus vector control state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarState {
    x: [u32; 32],
    pub pc: u64,
    pub vtype: VType,
    pub vl: u32,
}

impl Default for ScalarState {
    fn default() -> Self {
        // Reset: vl = 0 so vector work before the first vsetvli is a no-op.
        ScalarState { x: [0; 32], pc: 0, vtype: VType { sew: Sew::E8 }, vl: 0 }
    }
}

impl ScalarState {
    #[inline]
    pub fn read(&self, r: u8) -> u32 {
        self.x[r as usize]
    }

    #[inline]
    pub fn write(&mut self, r: u8, value: u32) {
        if r != 0 {
            self.x[r as usize] = value;
        }
    }

    pub fn regs(&self) -> &[u32; 32] {
        &self.x
    }
}

/// Flat little-endian byte-addressable memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryImage {
    base: u64,
    bytes: Vec<u8>,
}

impl Default for MemoryImage {
    fn default() -> Self {
        MemoryImage::new(DEFAULT_DATA_BASE, DEFAULT_MEMORY_BYTES)
    }
}

impl MemoryImage {
    pub fn new(base: u64, size: usize) -> Self {
        MemoryImage { base, bytes: vec![0; size] }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn size(&self) -> usize {
        self.bytes.len()
    }

    pub fn contains(&self, addr: u64, len: usize) -> bool {
        addr >= self.base && (addr - self.base).checked_add(len as u64).is_some_and(|e| e <= self.bytes.len() as u64)
    }

    #[inline]
    fn offset(&self, addr: u64, len: usize) -> Result<usize, ArchError> {
        if self.contains(addr, len) {
            Ok((addr - self.base) as usize)
        } else {
            Err(ArchError::OutOfBounds { addr, len })
        }
    }

    pub fn read_bytes(&self, addr: u64, len: usize) -> Result<&[u8], ArchError> {
        let o = self.offset(addr, len)?;
        Ok(&self.bytes[o..o + len])
    }

    pub fn write_bytes(&mut self, addr: u64, data: &[u8]) -> Result<(), ArchError> {
        let o = self.offset(addr, data.len())?;
        self.bytes[o..o + data.len()].copy_from_slice(data);
        Ok(())
    }

    /// Little-endian load of `len` ≤ 8 bytes, zero-extended.
    #[inline]
    pub fn load(&self, addr: u64, len: usize) -> Result<u64, ArchError> {
        let o = self.offset(addr, len)?;
        let mut buf = [0u8; 8];
        buf[..len].copy_from_slice(&self.bytes[o..o + len]);
        Ok(u64::from_le_bytes(buf))
    }

    #[inline]
    pub fn store(&mut self, addr: u64, len: usize, value: u64) -> Result<(), ArchError> {
        let o = self.offset(addr, len)?;
        self.bytes[o..o + len].copy_from_slice(&value.to_le_bytes()[..len]);
        Ok(())
    }

    /// Aligned ELEN-word load.
    pub fn load_word(&self, addr: u64, elen_bytes: usize) -> Result<u64, ArchError> {
        if !addr.is_multiple_of(elen_bytes as u64) {
            return Err(ArchError::Misaligned { addr, len: elen_bytes });
        }
        self.load(addr, elen_bytes)
    }

    /// Aligned ELEN-word store of the bytes selected by `byte_enable`.
    pub fn store_word(&mut self, addr: u64, elen_bytes: usize, data: u64, byte_enable: u8) -> Result<(), ArchError> {
        let old = self.load_word(addr, elen_bytes)?;
        self.store(addr, elen_bytes, merge_bytes(old, data, byte_enable))
    }

    pub fn load_segment(&mut self, seg: &DataSegment) -> Result<(), ArchError> {
        self.write_bytes(seg.base, &seg.bytes)
    }

    /// Copy a raw binary blob into memory.
    pub fn load_raw(&mut self, addr: u64, data: &[u8]) -> Result<(), ArchError> {
        self.write_bytes(addr, data)
    }

    pub fn dump_raw(&self, addr: u64, len: usize) -> Result<Vec<u8>, ArchError> {
        self.read_bytes(addr, len).map(<[u8]>::to_vec)
    }

    /// Debug hex dump, 16 bytes per line.
    pub fn hexdump(&self, addr: u64, len: usize) -> Result<String, ArchError> {
        let bytes = self.read_bytes(addr, len)?;
        let mut out = String::new();
        for (i, chunk) in bytes.chunks(16).enumerate() {
            let _ = write!(out, "{:08x}:", addr + 16 * i as u64);
            for b in chunk {
                let _ = write!(out, " {b:02x}");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Complete machine state.
#[derive(Debug, Clone)]
pub struct MachineState {
    pub cfg: VectorConfig,
    pub vrf: VectorRegisterFile,
    pub scalar: ScalarState,
    pub mem: MemoryImage,
}

impl MachineState {
    pub fn new(cfg: VectorConfig, mem: MemoryImage) -> Self {
        MachineState { cfg, vrf: VectorRegisterFile::new(cfg), scalar: ScalarState::default(), mem }
    }

    pub fn with_memory_size(cfg: VectorConfig, size: usize) -> Self {
        MachineState::new(cfg, MemoryImage::new(DEFAULT_DATA_BASE, size))
    }
}
