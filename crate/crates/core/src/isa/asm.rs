//! Two-pass assembler for the line-oriented RISC-V style syntax.
//!
//! ```text
//! # comment
//! .equ N, 64
//! loop:   vsetvli t0, a0, e32, m1
//!         vle32.v v1, (a1)
//!         bnez a0, loop
//! .data
//! .org 0x80001000
//! table:  .word 1, 2, 3
//! ```

use std::collections::{BTreeMap, HashMap};

use super::disasm::{vreg_index, xreg_index};
use super::table::{Format, VOperands};
use super::{
    lookup, DataSegment, Instruction, IsaError, Mnemonic, MnemonicInfo, Program, Sew, VType, DEFAULT_DATA_BASE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Text,
    Data,
}

#[derive(Debug)]
enum Stmt<'a> {
    Inst { line: usize, name: &'a str, ops: Vec<&'a str>, index: usize },
    Data { line: usize, width: usize, exprs: Vec<&'a str>, addr: u64 },
}

struct Symbols {
    equs: HashMap<String, i64>,
    text: BTreeMap<String, usize>,
    data: BTreeMap<String, u64>,
    text_base: u64,
}

enum EvalError {
    Unknown(String),
    Bad(String),
}

impl Symbols {
    fn value(&self, name: &str) -> Option<i64> {
        if let Some(v) = self.equs.get(name) {
            return Some(*v);
        }
        if let Some(a) = self.data.get(name) {
            return Some(*a as i64);
        }
        self.text.get(name).map(|i| (self.text_base + 4 * *i as u64) as i64)
    }

    fn eval(&self, expr: &str) -> Result<i64, EvalError> {
        let expr = expr.trim();
        if expr.is_empty() {
            return Err(EvalError::Bad("empty expression".into()));
        }
        if let Some(inner) = expr.strip_prefix("%hi(").and_then(|e| e.strip_suffix(')')) {
            let v = self.eval(inner)?;
            return Ok(hi_lo(v).0);
        }
        if let Some(inner) = expr.strip_prefix("%lo(").and_then(|e| e.strip_suffix(')')) {
            let v = self.eval(inner)?;
            return Ok(hi_lo(v).1);
        }
        // sum of signed terms
        let mut total: i64 = 0;
        let mut sign = 1i64;
        let mut term = String::new();
        let flush = |term: &mut String, sign: i64, total: &mut i64| -> Result<(), EvalError> {
            let t = term.trim();
            if t.is_empty() {
                return Err(EvalError::Bad(format!("malformed expression `{expr}`")));
            }
            let v = match parse_int(t) {
                Some(v) => v,
                None => {
                    if !t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                        return Err(EvalError::Bad(format!("malformed operand `{t}`")));
                    }
                    self.value(t).ok_or_else(|| EvalError::Unknown(t.to_string()))?
                }
            };
            *total = total.wrapping_add(sign * v);
            term.clear();
            Ok(())
        };
        for (i, c) in expr.char_indices() {
            if (c == '+' || c == '-') && !term.trim().is_empty() {
                flush(&mut term, sign, &mut total)?;
                sign = if c == '-' { -1 } else { 1 };
            } else if (c == '+' || c == '-') && term.trim().is_empty() && i == 0 {
                sign = if c == '-' { -1 } else { 1 };
            } else {
                term.push(c);
            }
        }
        flush(&mut term, sign, &mut total)?;
        Ok(total)
    }
}

fn parse_int(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let v = if let Some(h) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(&h.replace('_', ""), 16).ok()?
    } else if let Some(b) = body.strip_prefix("0b") {
        i64::from_str_radix(&b.replace('_', ""), 2).ok()?
    } else if body.chars().next()?.is_ascii_digit() {
        body.replace('_', "").parse::<i64>().ok()?
    } else {
        return None;
    };
    Some(if neg { -v } else { v })
}

/// Split a 32-bit constant into a `lui` field and a sign-extended `addi` part.
fn hi_lo(v: i64) -> (i64, i64) {
    let v = v as i32 as i64;
    let hi = ((v + 0x800) >> 12) & 0xfffff;
    let lo = v - (((hi << 12) as i32) as i64);
    (hi, lo)
}

fn perr(line: usize, msg: impl Into<String>) -> IsaError {
    IsaError::Parse { line, msg: msg.into() }
}

fn split_operands(rest: &str) -> Vec<&str> {
    if rest.trim().is_empty() {
        return Vec::new();
    }
    rest.split(',').map(str::trim).collect()
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '.')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Number of machine instructions a (possibly pseudo) mnemonic expands to.
fn expansion_len(name: &str, ops: &[&str], syms: &Symbols) -> usize {
    match name {
        "la" => 2,
        "li" => match ops.get(1).map(|e| syms.eval(e)) {
            Some(Ok(v)) if (-2048..2048).contains(&v) => 1,
            Some(Ok(v)) if hi_lo(v).1 == 0 => 1,
            _ => 2,
        },
        _ => 1,
    }
}

/// Assemble source text into a program.
pub fn assemble(text: &str) -> Result<Program, IsaError> {
    let mut syms = Symbols { equs: HashMap::new(), text: BTreeMap::new(), data: BTreeMap::new(), text_base: 0 };
    let mut stmts = Vec::new();
    let mut section = Section::Text;
    let mut index = 0usize;
    let mut data_addr = DEFAULT_DATA_BASE;
    let mut data_end = DEFAULT_DATA_BASE;

    // pass 1: layout
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut rest = raw.split('#').next().unwrap_or("").trim();
        // labels
        while let Some(colon) = rest.find(':') {
            let label = rest[..colon].trim();
            if !is_ident(label) || label.contains(' ') {
                break;
            }
            let dup = syms.text.contains_key(label) || syms.data.contains_key(label);
            if dup {
                return Err(perr(line, format!("duplicate label `{label}`")));
            }
            match section {
                Section::Text => syms.text.insert(label.to_string(), index),
                Section::Data => syms.data.insert(label.to_string(), data_addr).map(|_| 0),
            };
            rest = rest[colon + 1..].trim();
        }
        if rest.is_empty() {
            continue;
        }
        let (head, tail) = match rest.find(char::is_whitespace) {
            Some(p) => (&rest[..p], rest[p..].trim()),
            None => (rest, ""),
        };
        let ops = split_operands(tail);
        let eval_now = |e: &str, syms: &Symbols| -> Result<i64, IsaError> {
            syms.eval(e).map_err(|err| match err {
                EvalError::Unknown(s) => perr(line, format!("`{s}` must be defined before use here")),
                EvalError::Bad(m) => perr(line, m),
            })
        };
        if let Some(directive) = head.strip_prefix('.') {
            match directive {
                "text" => section = Section::Text,
                "data" => section = Section::Data,
                "globl" | "global" | "section" => {}
                "equ" | "set" => {
                    if ops.len() != 2 || !is_ident(ops[0]) {
                        return Err(perr(line, ".equ expects `name, value`"));
                    }
                    let v = eval_now(ops[1], &syms)?;
                    syms.equs.insert(ops[0].to_string(), v);
                }
                "org" | "space" | "zero" | "align" | "word" | "half" | "byte" | "dword" => {
                    if section != Section::Data {
                        return Err(perr(line, format!(".{directive} is only valid in .data")));
                    }
                    match directive {
                        "org" => {
                            let a = eval_now(ops.first().copied().unwrap_or(""), &syms)?;
                            if (a as u64) < DEFAULT_DATA_BASE || (a as u64) < data_addr && data_addr != DEFAULT_DATA_BASE {
                                return Err(perr(line, format!(".org {a:#x} moves backwards or below the data base")));
                            }
                            data_addr = a as u64;
                        }
                        "space" | "zero" => {
                            let n = eval_now(ops.first().copied().unwrap_or(""), &syms)?;
                            if n < 0 {
                                return Err(perr(line, "negative size"));
                            }
                            data_addr += n as u64;
                        }
                        "align" => {
                            let n = eval_now(ops.first().copied().unwrap_or(""), &syms)?;
                            if !(0..=12).contains(&n) {
                                return Err(perr(line, "alignment out of range"));
                            }
                            let a = 1u64 << n;
                            data_addr = data_addr.div_ceil(a) * a;
                        }
                        _ => {
                            let width = match directive {
                                "byte" => 1,
                                "half" => 2,
                                "word" => 4,
                                _ => 8,
                            };
                            if ops.is_empty() {
                                return Err(perr(line, format!(".{directive} needs at least one value")));
                            }
                            stmts.push(Stmt::Data { line, width, exprs: ops.clone(), addr: data_addr });
                            data_addr += (width * ops.len()) as u64;
                        }
                    }
                    data_end = data_end.max(data_addr);
                }
                other => return Err(perr(line, format!("unknown directive `.{other}`"))),
            }
            continue;
        }
        if section != Section::Text {
            return Err(perr(line, "instructions are only valid in .text"));
        }
        let n = expansion_len(head, &ops, &syms);
        stmts.push(Stmt::Inst { line, name: head, ops, index });
        index += n;
    }

    // pass 2: emit
    let mut instructions = Vec::with_capacity(index);
    let mut data = vec![0u8; (data_end - DEFAULT_DATA_BASE) as usize];
    for stmt in &stmts {
        match stmt {
            Stmt::Inst { line, name, ops, index } => {
                let start = instructions.len();
                debug_assert_eq!(start, *index);
                emit(*line, name, ops, *index, &syms, &mut instructions)?;
                let expected = expansion_len(name, ops, &syms);
                if instructions.len() - start != expected {
                    return Err(perr(*line, "pseudo-instruction size changed between passes"));
                }
            }
            Stmt::Data { line, width, exprs, addr } => {
                for (k, e) in exprs.iter().enumerate() {
                    let v = syms.eval(e).map_err(|err| match err {
                        EvalError::Unknown(s) => IsaError::UnresolvedLabel { line: *line, label: s },
                        EvalError::Bad(m) => perr(*line, m),
                    })?;
                    let off = (*addr - DEFAULT_DATA_BASE) as usize + k * width;
                    data[off..off + width].copy_from_slice(&v.to_le_bytes()[..*width]);
                }
            }
        }
    }
    Ok(Program {
        instructions,
        text_base: syms.text_base,
        labels: syms.text,
        data_labels: syms.data,
        data: DataSegment { base: DEFAULT_DATA_BASE, bytes: data },
    })
}

struct Ctx<'a> {
    line: usize,
    index: usize,
    syms: &'a Symbols,
}

impl Ctx<'_> {
    fn xreg(&self, s: &str) -> Result<u8, IsaError> {
        xreg_index(s).ok_or_else(|| perr(self.line, format!("expected a scalar register, found `{s}`")))
    }

    fn vreg(&self, s: &str) -> Result<u8, IsaError> {
        match vreg_index(s) {
            Some(v) => Ok(v),
            None => {
                if let Some(n) = s.strip_prefix('v').and_then(|n| n.parse::<i64>().ok()) {
                    return Err(IsaError::FieldOutOfRange { field: "vreg", value: n });
                }
                Err(perr(self.line, format!("expected a vector register, found `{s}`")))
            }
        }
    }

    fn imm(&self, s: &str) -> Result<i64, IsaError> {
        self.syms.eval(s).map_err(|e| match e {
            EvalError::Unknown(label) => IsaError::UnresolvedLabel { line: self.line, label },
            EvalError::Bad(m) => perr(self.line, m),
        })
    }

    /// Branch/jump target: a label or a literal byte offset.
    fn target(&self, s: &str) -> Result<i64, IsaError> {
        if let Some(v) = parse_int(s) {
            return Ok(v);
        }
        if let Some(&idx) = self.syms.text.get(s) {
            return Ok((idx as i64 - self.index as i64) * 4);
        }
        if is_ident(s) {
            return Err(IsaError::UnresolvedLabel { line: self.line, label: s.to_string() });
        }
        Err(perr(self.line, format!("bad branch target `{s}`")))
    }

    /// `imm(reg)` or `(reg)`.
    fn mem_operand(&self, s: &str) -> Result<(i64, u8), IsaError> {
        let open = s.find('(').ok_or_else(|| perr(self.line, format!("expected `offset(reg)`, found `{s}`")))?;
        let close = s.rfind(')').filter(|&c| c > open).ok_or_else(|| perr(self.line, "missing `)`"))?;
        let off = s[..open].trim();
        let off = if off.is_empty() { 0 } else { self.imm(off)? };
        Ok((off, self.xreg(s[open + 1..close].trim())?))
    }
}

fn fit(v: i64, lo: i64, hi: i64) -> Result<i32, IsaError> {
    if v < lo || v > hi {
        return Err(IsaError::FieldOutOfRange { field: "imm", value: v });
    }
    Ok(v as i32)
}

fn expect(line: usize, name: &str, ops: &[&str], n: usize) -> Result<(), IsaError> {
    if ops.len() != n {
        return Err(perr(line, format!("`{name}` expects {n} operands, found {}", ops.len())));
    }
    Ok(())
}

fn emit(
    line: usize,
    name: &str,
    ops: &[&str],
    index: usize,
    syms: &Symbols,
    out: &mut Vec<Instruction>,
) -> Result<(), IsaError> {
    let cx = Ctx { line, index, syms };
    let i = Instruction::new;
    // pseudo-instructions
    match name {
        "nop" => {
            expect(line, name, ops, 0)?;
            out.push(i(Mnemonic::Addi));
            return Ok(());
        }
        "halt" => {
            expect(line, name, ops, 0)?;
            out.push(i(Mnemonic::Jal));
            return Ok(());
        }
        "li" | "la" => {
            expect(line, name, ops, 2)?;
            let rd = cx.xreg(ops[0])?;
            let v = cx.imm(ops[1])?;
            if !(i32::MIN as i64..=u32::MAX as i64).contains(&v) {
                return Err(IsaError::FieldOutOfRange { field: "imm", value: v });
            }
            let (hi, lo) = hi_lo(v);
            if expansion_len(name, ops, syms) == 1 {
                if (-2048..2048).contains(&v) {
                    out.push(i(Mnemonic::Addi).with_rd(rd).with_imm(v as i32));
                } else {
                    out.push(i(Mnemonic::Lui).with_rd(rd).with_imm(hi as i32));
                }
            } else {
                out.push(i(Mnemonic::Lui).with_rd(rd).with_imm(hi as i32));
                out.push(i(Mnemonic::Addi).with_rd(rd).with_rs1(rd).with_imm(lo as i32));
            }
            return Ok(());
        }
        "mv" | "not" | "neg" => {
            expect(line, name, ops, 2)?;
            let rd = cx.xreg(ops[0])?;
            let rs = cx.xreg(ops[1])?;
            out.push(match name {
                "mv" => i(Mnemonic::Addi).with_rd(rd).with_rs1(rs),
                "not" => i(Mnemonic::Xori).with_rd(rd).with_rs1(rs).with_imm(-1),
                _ => i(Mnemonic::Sub).with_rd(rd).with_rs2(rs),
            });
            return Ok(());
        }
        "j" | "call" => {
            expect(line, name, ops, 1)?;
            let rd = if name == "j" { 0 } else { 1 };
            out.push(i(Mnemonic::Jal).with_rd(rd).with_imm(fit(cx.target(ops[0])?, -(1 << 20), (1 << 20) - 2)?));
            return Ok(());
        }
        "jr" | "ret" => {
            let rs = if name == "ret" {
                expect(line, name, ops, 0)?;
                1
            } else {
                expect(line, name, ops, 1)?;
                cx.xreg(ops[0])?
            };
            out.push(i(Mnemonic::Jalr).with_rs1(rs));
            return Ok(());
        }
        "beqz" | "bnez" | "bltz" | "bgez" | "blez" | "bgtz" => {
            expect(line, name, ops, 2)?;
            let r = cx.xreg(ops[0])?;
            let off = fit(cx.target(ops[1])?, -4096, 4094)?;
            let (m, a, b) = match name {
                "beqz" => (Mnemonic::Beq, r, 0),
                "bnez" => (Mnemonic::Bne, r, 0),
                "bltz" => (Mnemonic::Blt, r, 0),
                "bgez" => (Mnemonic::Bge, r, 0),
                "blez" => (Mnemonic::Bge, 0, r),
                _ => (Mnemonic::Blt, 0, r),
            };
            out.push(i(m).with_rs1(a).with_rs2(b).with_imm(off));
            return Ok(());
        }
        "bgt" | "ble" => {
            expect(line, name, ops, 3)?;
            let a = cx.xreg(ops[0])?;
            let b = cx.xreg(ops[1])?;
            let off = fit(cx.target(ops[2])?, -4096, 4094)?;
            let m = if name == "bgt" { Mnemonic::Blt } else { Mnemonic::Bge };
            out.push(i(m).with_rs1(b).with_rs2(a).with_imm(off));
            return Ok(());
        }
        "jal" if ops.len() == 1 => {
            out.push(i(Mnemonic::Jal).with_rd(1).with_imm(fit(cx.target(ops[0])?, -(1 << 20), (1 << 20) - 2)?));
            return Ok(());
        }
        _ => {}
    }

    let info: &MnemonicInfo = lookup(name).ok_or_else(|| IsaError::UnsupportedMnemonic(name.to_string()))?;
    let mut inst = i(info.mnemonic);
    // trailing mask operand
    let mut ops = ops.to_vec();
    if ops.last() == Some(&"v0.t") {
        if !info.maskable {
            return Err(perr(line, format!("`{name}` cannot be masked")));
        }
        ops.pop();
        inst.vm = false;
    }
    match info.format {
        Format::OpV { operands, .. } => match operands {
            VOperands::Vv | VOperands::Vs => {
                expect(line, name, &ops, 3)?;
                inst.rd = cx.vreg(ops[0])?;
                inst.rs2 = cx.vreg(ops[1])?;
                inst.rs1 = cx.vreg(ops[2])?;
            }
            VOperands::Vx => {
                expect(line, name, &ops, 3)?;
                inst.rd = cx.vreg(ops[0])?;
                inst.rs2 = cx.vreg(ops[1])?;
                inst.rs1 = cx.xreg(ops[2])?;
            }
            VOperands::Vi | VOperands::ViU => {
                expect(line, name, &ops, 3)?;
                inst.rd = cx.vreg(ops[0])?;
                inst.rs2 = cx.vreg(ops[1])?;
                inst.imm = if operands == VOperands::Vi {
                    fit(cx.imm(ops[2])?, -16, 15)?
                } else {
                    fit(cx.imm(ops[2])?, 0, 31)?
                };
            }
            VOperands::Vvm | VOperands::Vxm => {
                expect(line, name, &ops, 4)?;
                if ops[3] != "v0" {
                    return Err(perr(line, "merge mask operand must be `v0`"));
                }
                inst.rd = cx.vreg(ops[0])?;
                inst.rs2 = cx.vreg(ops[1])?;
                inst.rs1 = if operands == VOperands::Vvm { cx.vreg(ops[2])? } else { cx.xreg(ops[2])? };
            }
            VOperands::MvV => {
                expect(line, name, &ops, 2)?;
                inst.rd = cx.vreg(ops[0])?;
                inst.rs1 = cx.vreg(ops[1])?;
            }
            VOperands::MvX | VOperands::SX => {
                expect(line, name, &ops, 2)?;
                inst.rd = cx.vreg(ops[0])?;
                inst.rs1 = cx.xreg(ops[1])?;
            }
            VOperands::MvI => {
                expect(line, name, &ops, 2)?;
                inst.rd = cx.vreg(ops[0])?;
                inst.imm = fit(cx.imm(ops[1])?, -16, 15)?;
            }
            VOperands::XS => {
                expect(line, name, &ops, 2)?;
                inst.rd = cx.xreg(ops[0])?;
                inst.rs2 = cx.vreg(ops[1])?;
            }
        },
        Format::VLoad { strided, .. } | Format::VStore { strided, .. } => {
            expect(line, name, &ops, if strided { 3 } else { 2 })?;
            inst.rd = cx.vreg(ops[0])?;
            let (off, base) = cx.mem_operand(ops[1])?;
            if off != 0 {
                return Err(perr(line, "vector memory operands take no offset"));
            }
            inst.rs1 = base;
            if strided {
                inst.rs2 = cx.xreg(ops[2])?;
            }
        }
        Format::VSetVli => {
            if ops.len() != 3 && ops.len() != 4 {
                return Err(perr(line, "`vsetvli` expects `rd, rs1, eN[, m1]`"));
            }
            inst.rd = cx.xreg(ops[0])?;
            inst.rs1 = cx.xreg(ops[1])?;
            let sew = ops[2]
                .strip_prefix('e')
                .and_then(|b| b.parse::<u32>().ok())
                .and_then(Sew::from_bits)
                .ok_or_else(|| perr(line, format!("bad element width `{}`", ops[2])))?;
            if let Some(lmul) = ops.get(3) {
                if *lmul != "m1" {
                    return Err(IsaError::FieldOutOfRange { field: "lmul", value: 0 });
                }
            }
            inst.imm = VType { sew }.to_vtypei() as i32;
        }
        Format::R { .. } => {
            expect(line, name, &ops, 3)?;
            inst.rd = cx.xreg(ops[0])?;
            inst.rs1 = cx.xreg(ops[1])?;
            inst.rs2 = cx.xreg(ops[2])?;
        }
        Format::I { .. } => {
            expect(line, name, &ops, 3)?;
            inst.rd = cx.xreg(ops[0])?;
            inst.rs1 = cx.xreg(ops[1])?;
            inst.imm = fit(cx.imm(ops[2])?, -2048, 2047)?;
        }
        Format::Shift { .. } => {
            expect(line, name, &ops, 3)?;
            inst.rd = cx.xreg(ops[0])?;
            inst.rs1 = cx.xreg(ops[1])?;
            inst.imm = fit(cx.imm(ops[2])?, 0, 31)?;
        }
        Format::Load { .. } => {
            expect(line, name, &ops, 2)?;
            inst.rd = cx.xreg(ops[0])?;
            let (off, base) = cx.mem_operand(ops[1])?;
            inst.rs1 = base;
            inst.imm = fit(off, -2048, 2047)?;
        }
        Format::Store { .. } => {
            expect(line, name, &ops, 2)?;
            inst.rs2 = cx.xreg(ops[0])?;
            let (off, base) = cx.mem_operand(ops[1])?;
            inst.rs1 = base;
            inst.imm = fit(off, -2048, 2047)?;
        }
        Format::Branch { .. } => {
            expect(line, name, &ops, 3)?;
            inst.rs1 = cx.xreg(ops[0])?;
            inst.rs2 = cx.xreg(ops[1])?;
            inst.imm = fit(cx.target(ops[2])?, -4096, 4094)?;
        }
        Format::Jal => {
            expect(line, name, &ops, 2)?;
            inst.rd = cx.xreg(ops[0])?;
            inst.imm = fit(cx.target(ops[1])?, -(1 << 20), (1 << 20) - 2)?;
        }
        Format::Jalr => match ops.len() {
            1 => inst.rs1 = cx.xreg(ops[0])?,
            2 => {
                inst.rd = cx.xreg(ops[0])?;
                let (off, base) = cx.mem_operand(ops[1])?;
                inst.rs1 = base;
                inst.imm = fit(off, -2048, 2047)?;
            }
            3 => {
                inst.rd = cx.xreg(ops[0])?;
                inst.rs1 = cx.xreg(ops[1])?;
                inst.imm = fit(cx.imm(ops[2])?, -2048, 2047)?;
            }
            _ => return Err(perr(line, "`jalr` expects `rd, offset(rs1)`")),
        },
        Format::Lui | Format::Auipc => {
            expect(line, name, &ops, 2)?;
            inst.rd = cx.xreg(ops[0])?;
            inst.imm = fit(cx.imm(ops[1])?, 0, 0xfffff)?;
        }
    }
    if (inst.imm % 2 != 0) && matches!(info.format, Format::Branch { .. } | Format::Jal) {
        return Err(IsaError::FieldOutOfRange { field: "imm", value: inst.imm as i64 });
    }
    out.push(inst);
    Ok(())
}
