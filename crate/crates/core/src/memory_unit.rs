//! Vector memory unit: address generation, burst planning and bus timing.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch_state::{generate_offsets, ArchError, MemoryImage, RegisterOffset, VectorRegisterFile};
use crate::isa::{Sew, VectorConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemError {
    #[error("base {base:#x} is not aligned to {sew}")]
    UnalignedBase { base: u64, sew: Sew },
    #[error("stride {stride} is not a nonzero multiple of the {sew} element size")]
    BadStride { stride: i64, sew: Sew },
    #[error(transparent)]
    Arch(#[from] ArchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessKind {
    Load,
    Store,
}

/// One ELEN-wide bus transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Beat {
    /// ELEN-aligned word address.
    pub addr: u64,
    /// Bytes of the memory word that belong to active elements.
    pub byte_enable: u8,
    /// Elements carried by this beat, in ascending order.
    pub elements: Range<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessPlan {
    pub kind: AccessKind,
    pub base: u64,
    /// Byte distance between consecutive elements.
    pub stride: i64,
    pub sew: Sew,
    pub vl: u32,
    pub beats: Vec<Beat>,
    /// Register-side words, packed densely from element 0.
    pub reg_offsets: Vec<RegisterOffset>,
}

impl AccessPlan {
    pub fn burst_length(&self) -> usize {
        self.beats.len()
    }

    pub fn word_addresses(&self) -> Vec<u64> {
        self.beats.iter().map(|b| b.addr).collect()
    }

    pub fn element_addr(&self, e: u32) -> u64 {
        self.base.wrapping_add_signed(self.stride * e as i64)
    }

    pub fn check_bounds(&self, mem: &MemoryImage, elen_bytes: usize) -> Result<(), MemError> {
        for b in &self.beats {
            if !mem.contains(b.addr, elen_bytes) {
                return Err(ArchError::OutOfBounds { addr: b.addr, len: elen_bytes }.into());
            }
        }
        Ok(())
    }
}

/// Plan a unit-stride (`stride = None`) or strided access for `vl` elements.
///
/// Elements must be naturally aligned and strides must be nonzero multiples
/// of the element size, so each element sits inside one ELEN word.
pub fn plan_access(
    kind: AccessKind,
    base: u64,
    stride: Option<i64>,
    vl: u32,
    sew: Sew,
    vreg: u8,
    cfg: &VectorConfig,
) -> Result<AccessPlan, MemError> {
    let size = sew.bytes() as i64;
    let stride = stride.unwrap_or(size);
    if !base.is_multiple_of(size as u64) {
        return Err(MemError::UnalignedBase { base, sew });
    }
    if stride == 0 || stride % size != 0 {
        return Err(MemError::BadStride { stride, sew });
    }
    let eb = cfg.elen_bytes() as u64;
    let mut beats: Vec<Beat> = Vec::new();
    for e in 0..vl {
        let addr = base.wrapping_add_signed(stride * e as i64);
        let word = addr - addr % eb;
        let off = (addr % eb) as u32;
        let en = (((1u16 << size) - 1) << off) as u8;
        match beats.last_mut() {
            Some(b) if b.addr == word => {
                b.byte_enable |= en;
                b.elements.end = e + 1;
            }
            _ => beats.push(Beat { addr: word, byte_enable: en, elements: e..e + 1 }),
        }
    }
    Ok(AccessPlan { kind, base, stride, sew, vl, beats, reg_offsets: generate_offsets(vreg, vl, sew, cfg) })
}

/// Perform a planned load into `vd`. Tail bytes of `vd` are left undisturbed.
pub fn execute_load(
    plan: &AccessPlan,
    mem: &MemoryImage,
    vrf: &mut VectorRegisterFile,
    vd: u8,
) -> Result<(), MemError> {
    debug_assert_eq!(plan.kind, AccessKind::Load);
    let cfg = *vrf.config();
    let eb = cfg.elen_bytes();
    let size = plan.sew.bytes() as usize;
    let mut staged = vec![0u8; cfg.vlen_bytes()];
    for beat in &plan.beats {
        let word = mem.load_word(beat.addr, eb)?.to_le_bytes();
        for e in beat.elements.clone() {
            let off = (plan.element_addr(e) - beat.addr) as usize;
            let dst = e as usize * size;
            staged[dst..dst + size].copy_from_slice(&word[off..off + size]);
        }
    }
    for o in &plan.reg_offsets {
        if o.byte_enable == 0 {
            continue;
        }
        let mut buf = [0u8; 8];
        buf[..eb].copy_from_slice(&staged[o.word_index * eb..(o.word_index + 1) * eb]);
        vrf.begin_cycle();
        vrf.write_vreg_word(vd, o.word_index, u64::from_le_bytes(buf), o.byte_enable)?;
    }
    Ok(())
}

/// Perform a planned store from `vs3`. Memory bytes outside active elements
/// are preserved (word-level read-modify-write).
pub fn execute_store(
    plan: &AccessPlan,
    vrf: &mut VectorRegisterFile,
    mem: &mut MemoryImage,
    vs3: u8,
) -> Result<(), MemError> {
    debug_assert_eq!(plan.kind, AccessKind::Store);
    let cfg = *vrf.config();
    let eb = cfg.elen_bytes();
    let size = plan.sew.bytes() as usize;
    let mut src = vec![0u8; cfg.vlen_bytes()];
    for o in &plan.reg_offsets {
        if o.byte_enable == 0 {
            continue;
        }
        vrf.begin_cycle();
        let w = vrf.read_vreg_word(vs3, o.word_index)?;
        src[o.word_index * eb..(o.word_index + 1) * eb].copy_from_slice(&w.to_le_bytes()[..eb]);
    }
    plan.check_bounds(mem, eb)?;
    for beat in &plan.beats {
        let mut word = [0u8; 8];
        for e in beat.elements.clone() {
            let off = (plan.element_addr(e) - beat.addr) as usize;
            let s = e as usize * size;
            word[off..off + size].copy_from_slice(&src[s..s + size]);
        }
        mem.store_word(beat.addr, eb, u64::from_le_bytes(word), beat.byte_enable)?;
    }
    Ok(())
}

/// Bus parameters. One beat per cycle after the initiation latency, one
/// transaction in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusModel {
    pub beat_width_bits: u32,
    pub initiation_latency_cycles: u64,
}

impl Default for BusModel {
    fn default() -> Self {
        BusModel { beat_width_bits: 64, initiation_latency_cycles: 20 }
    }
}

pub fn memory_cycles(plan: &AccessPlan, bus: &BusModel) -> u64 {
    burst_cycles(plan.burst_length() as u64, bus)
}

pub fn burst_cycles(beats: u64, bus: &BusModel) -> u64 {
    if beats == 0 {
        0
    } else {
        bus.initiation_latency_cycles + beats
    }
}

/// Number of beats a plan would use, without building it.
pub fn burst_length(base: u64, stride: Option<i64>, vl: u32, sew: Sew, cfg: &VectorConfig) -> u64 {
    let size = sew.bytes() as i64;
    let stride = stride.unwrap_or(size);
    let eb = cfg.elen_bytes() as u64;
    let mut n = 0u64;
    let mut last = None;
    for e in 0..vl {
        let w = base.wrapping_add_signed(stride * e as i64) / eb;
        if last != Some(w) {
            n += 1;
            last = Some(w);
        }
    }
    n
}

/// Tracks the single outstanding bus transaction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BusState {
    pub busy_until: u64,
}

impl BusState {
    /// Schedule a transaction that may start at `ready`; returns its
    /// `(start, end)` cycles, end exclusive.
    pub fn schedule(&mut self, ready: u64, cycles: u64) -> (u64, u64) {
        let start = ready.max(self.busy_until);
        self.busy_until = start + cycles;
        (start, self.busy_until)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> VectorConfig {
        VectorConfig::default()
    }

    #[test]
    fn unit_stride_plan() {
        let p = plan_access(AccessKind::Load, 0x1000, None, 8, Sew::E32, 1, &cfg()).unwrap();
        assert_eq!(p.word_addresses(), vec![0x1000, 0x1008, 0x1010, 0x1018]);
        assert!(p.beats.iter().all(|b| b.byte_enable == 0xff));
        assert_eq!(p.burst_length(), 4);
    }

    #[test]
    fn strided_plan() {
        let p = plan_access(AccessKind::Load, 0x1000, Some(8), 4, Sew::E32, 1, &cfg()).unwrap();
        assert_eq!(p.word_addresses(), vec![0x1000, 0x1008, 0x1010, 0x1018]);
        assert!(p.beats.iter().all(|b| b.byte_enable == 0x0f));
        let neg = plan_access(AccessKind::Load, 0x1010, Some(-4), 4, Sew::E32, 1, &cfg()).unwrap();
        assert_eq!(neg.word_addresses(), vec![0x1010, 0x1008, 0x1000]);
    }

    #[test]
    fn empty_and_invalid_plans() {
        let p = plan_access(AccessKind::Store, 0x1000, None, 0, Sew::E8, 1, &cfg()).unwrap();
        assert_eq!(p.burst_length(), 0);
        assert_eq!(memory_cycles(&p, &BusModel::default()), 0);
        assert!(matches!(
            plan_access(AccessKind::Load, 0x1002, None, 1, Sew::E32, 1, &cfg()),
            Err(MemError::UnalignedBase { .. })
        ));
        assert!(matches!(
            plan_access(AccessKind::Load, 0x1000, Some(2), 1, Sew::E32, 1, &cfg()),
            Err(MemError::BadStride { .. })
        ));
        assert!(matches!(
            plan_access(AccessKind::Load, 0x1000, Some(0), 1, Sew::E32, 1, &cfg()),
            Err(MemError::BadStride { .. })
        ));
    }

    #[test]
    fn cycles_formula() {
        let p = plan_access(AccessKind::Load, 0x1000, None, 8, Sew::E32, 1, &cfg()).unwrap();
        assert_eq!(memory_cycles(&p, &BusModel::default()), 24);
        let mut bus = BusState::default();
        assert_eq!(bus.schedule(0, 24), (0, 24));
        assert_eq!(bus.schedule(3, 24), (24, 48));
    }

    fn mem_with(values: &[u32]) -> MemoryImage {
        let mut m = MemoryImage::new(0x1000, 256);
        for (i, v) in values.iter().enumerate() {
            m.store(0x1000 + 4 * i as u64, 4, *v as u64).unwrap();
        }
        m
    }

    #[test]
    fn loads() {
        let vals: Vec<u32> = (1..=8).collect();
        let m = mem_with(&vals);
        let mut vrf = VectorRegisterFile::new(cfg());
        let p = plan_access(AccessKind::Load, 0x1000, None, 8, Sew::E32, 1, &cfg()).unwrap();
        execute_load(&p, &m, &mut vrf, 1).unwrap();
        assert_eq!((0..8).map(|i| vrf.element(1, i, Sew::E32) as u32).collect::<Vec<_>>(), vals);

        let p = plan_access(AccessKind::Load, 0x1000, Some(16), 2, Sew::E32, 2, &cfg()).unwrap();
        execute_load(&p, &m, &mut vrf, 2).unwrap();
        assert_eq!((vrf.element(2, 0, Sew::E32), vrf.element(2, 1, Sew::E32)), (1, 5));

        vrf.reg_bytes_mut(3).fill(0xaa);
        let p = plan_access(AccessKind::Load, 0x1000, None, 5, Sew::E32, 3, &cfg()).unwrap();
        execute_load(&p, &m, &mut vrf, 3).unwrap();
        let r = vrf.reg_bytes(3);
        assert_eq!(&r[16..20], &5u32.to_le_bytes());
        assert!(r[20..].iter().all(|b| *b == 0xaa));
    }

    #[test]
    fn stores() {
        let mut m = mem_with(&[0xffff_ffff; 16]);
        let mut vrf = VectorRegisterFile::new(cfg());
        for i in 0..8 {
            vrf.set_element(4, i, Sew::E32, i as u64);
        }
        let p = plan_access(AccessKind::Store, 0x1000, Some(8), 4, Sew::E32, 4, &cfg()).unwrap();
        execute_store(&p, &mut vrf, &mut m, 4).unwrap();
        let words: Vec<u64> = (0..8).map(|i| m.load(0x1000 + 4 * i, 4).unwrap()).collect();
        assert_eq!(words, vec![0, 0xffff_ffff, 1, 0xffff_ffff, 2, 0xffff_ffff, 3, 0xffff_ffff]);

        let before = m.clone();
        let p = plan_access(AccessKind::Store, 0x1000, None, 0, Sew::E32, 4, &cfg()).unwrap();
        execute_store(&p, &mut vrf, &mut m, 4).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn burst_length_matches_plan() {
        for stride in [None, Some(1), Some(2), Some(8), Some(-3), Some(24)] {
            for vl in 0..=32 {
                let base = 0x1003;
                let p = plan_access(AccessKind::Load, base, stride, vl, Sew::E8, 0, &cfg()).unwrap();
                assert_eq!(burst_length(base, stride, vl, Sew::E8, &cfg()), p.burst_length() as u64);
            }
        }
    }
}
