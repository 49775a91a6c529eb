//! Encoder/decoder round trips, decode fuzzing and SIMD segmentation.

use arrow_core::isa::{
    assemble, decode, encode, format_instruction, supported_mnemonics, EncodedWord, Format, Sew, VType,
};
use arrow_core::vector_exec::{simd_alu, AluOp, AluRequest};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner, RngAlgorithm};

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Fill every free bit of each mnemonic's encoding at random; the word must
/// decode to that mnemonic, re-encode bit for bit and survive a trip through
/// the disassembler and assembler. Returns the number of words checked.
pub fn round_trip(fillings: u32) -> Result<u64, String> {
    let mut checked = 0;
    for info in supported_mnemonics() {
        let (mask, matched) = info.mask_match();
        let mut r = runner(fillings);
        r.run(&(any::<u32>(), 0..3usize), |(free, sew)| {
            let mut word = matched | (free & !mask);
            if info.format == Format::VSetVli {
                let vtypei = VType { sew: [Sew::E8, Sew::E16, Sew::E32, Sew::E64][sew] }.to_vtypei();
                word = (word & !(0x7ff << 20)) | vtypei << 20;
            }
            let inst = decode(EncodedWord(word)).map_err(|e| TestCaseError::fail(format!("{word:#010x}: {e}")))?;
            prop_assert_eq!(inst.mnemonic, info.mnemonic);
            prop_assert_eq!(encode(&inst).map_err(|e| TestCaseError::fail(e.to_string()))?.0, word);
            let text = format_instruction(&inst);
            let back = assemble(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            prop_assert_eq!(back.instructions.len(), 1, "{}", text);
            prop_assert_eq!(back.instructions[0], inst, "{}", text);
            Ok(())
        })
        .map_err(|e| format!("{}: {e}", info.name))?;
        checked += fillings as u64;
    }
    Ok(checked)
}

/// Random words never panic the decoder; a word decodes exactly when some
/// table row's fixed bits match it, and decoded words re-encode unchanged.
pub fn decode_fuzz(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&any::<u32>(), |word| {
            let rows: Vec<_> = supported_mnemonics()
                .iter()
                .filter(|r| {
                    let (m, v) = r.mask_match();
                    word & m == v
                })
                .collect();
            prop_assert!(rows.len() <= 1, "{:#010x} matches {} rows", word, rows.len());
            match decode(EncodedWord(word)) {
                Ok(inst) => {
                    prop_assert_eq!(rows.first().map(|r| r.mnemonic), Some(inst.mnemonic));
                    prop_assert_eq!(encode(&inst).map_err(|e| TestCaseError::fail(e.to_string()))?.0, word);
                }
                Err(_) => {
                    let vsetvli_with_bad_vtype = rows.len() == 1 && rows[0].format == Format::VSetVli;
                    prop_assert!(rows.is_empty() || vsetvli_with_bad_vtype, "{:#010x} rejected", word);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn sext(x: u64, bits: u32) -> i128 {
    let v = x as i128 & ((1i128 << bits) - 1);
    if v >> (bits - 1) & 1 == 1 {
        v - (1i128 << bits)
    } else {
        v
    }
}

/// Per-element reference in wide arithmetic: (value, compare outcome).
fn element_reference(op: AluOp, x: u64, y: u64, bits: u32) -> (u64, bool) {
    let m = (1u128 << bits) - 1;
    let (ux, uy) = (x as u128 & m, y as u128 & m);
    let (sx, sy) = (sext(x, bits), sext(y, bits));
    let wrap = |v: i128| (v as u128 & m) as u64;
    let shamt = (uy % bits as u128) as u32;
    let value = match op {
        AluOp::Add => wrap(sx + sy),
        AluOp::Sub => wrap(sx - sy),
        AluOp::Mul => ((ux * uy) & m) as u64,
        AluOp::Div if uy == 0 => m as u64,
        AluOp::Div => wrap(sx / sy),
        AluOp::Divu if uy == 0 => m as u64,
        AluOp::Divu => (ux / uy) as u64,
        AluOp::And => (ux & uy) as u64,
        AluOp::Or => (ux | uy) as u64,
        AluOp::Xor => (ux ^ uy) as u64,
        AluOp::Sll => ((ux << shamt) & m) as u64,
        AluOp::Srl => (ux >> shamt) as u64,
        AluOp::Sra => wrap(sx >> shamt),
        AluOp::Min => wrap(sx.min(sy)),
        AluOp::Minu => ux.min(uy) as u64,
        AluOp::Max => wrap(sx.max(sy)),
        AluOp::Maxu => ux.max(uy) as u64,
        _ => 0,
    };
    let cmp = match op {
        AluOp::CmpEq => ux == uy,
        AluOp::CmpNe => ux != uy,
        AluOp::CmpLt => sx < sy,
        AluOp::CmpLtu => ux < uy,
        AluOp::CmpLe => sx <= sy,
        AluOp::CmpLeu => ux <= uy,
        _ => false,
    };
    (value, cmp)
}

/// Operand words biased toward boundary elements.
fn operand() -> impl Strategy<Value = u64> {
    const EDGES: [u8; 5] = [0x00, 0x01, 0x7f, 0x80, 0xff];
    (any::<u64>(), any::<u64>(), 0..4u8).prop_map(|(r, s, kind)| match kind {
        0 => r,
        1 => u64::from_le_bytes(r.to_le_bytes().map(|b| EDGES[b as usize % EDGES.len()])),
        2 => u64::from_le_bytes(r.to_le_bytes().map(|b| if b & 1 == 0 { 0 } else { b })),
        _ => r & s,
    })
}

/// `simd_alu` against the per-element reference for every op, every element
/// width and both word widths. Returns the number of element comparisons.
pub fn simd_equivalence(cases: u32) -> Result<u64, String> {
    let compared = std::cell::Cell::new(0u64);
    runner(cases)
        .run(&(operand(), operand(), any::<u8>()), |(a, b, active)| {
            for elen in [32u32, 64] {
                let word_mask = if elen == 64 { u64::MAX } else { (1 << elen) - 1 };
                let active = active & (0xffu16 >> (8 - elen / 8)) as u8;
                for sew in Sew::ALL.into_iter().filter(|s| s.bits() <= elen) {
                    for op in AluOp::ALL {
                        let req = AluRequest { op, a: a & word_mask, b: b & word_mask, sew, elen_bits: elen, active };
                        let got = simd_alu(req);
                        let bits = sew.bits();
                        let sb = sew.bytes();
                        for i in 0..elen / bits {
                            let bytes = ((1u16 << sb) - 1) << (i * sb);
                            if active as u16 & bytes != bytes {
                                continue;
                            }
                            let (value, cmp) = element_reference(op, req.a >> (i * bits), req.b >> (i * bits), bits);
                            if op.is_compare() {
                                prop_assert_eq!(got.cmp >> i & 1 == 1, cmp, "{:?} {} elen {} elem {}", op, sew, elen, i);
                            } else {
                                let lane = (got.result >> (i * bits)) & (u64::MAX >> (64 - bits));
                                prop_assert_eq!(lane, value, "{:?} {} elen {} elem {} a={:#x} b={:#x}", op, sew, elen, i, a, b);
                            }
                            compared.set(compared.get() + 1);
                        }
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(compared.get())
}
