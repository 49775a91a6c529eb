//! Assembly source for the benchmark kernels.
//!
//! Every kernel is emitted as text with its sizes and buffer addresses bound
//! through `.equ` lines, then assembled. Vector variants strip-mine with
//! `vsetvli`; scalar variants are plain loops with branch-free bodies so their
//! cost does not depend on the data.

use std::fmt::Write as _;

use super::{BenchmarkId, Layout, Shape, Variant};
use crate::isa::Sew;

/// Element access helpers for one SEW.
#[derive(Debug, Clone, Copy)]
struct Elem {
    bits: u32,
    bytes: u32,
    shift: u32,
}

impl Elem {
    fn new(sew: Sew) -> Self {
        Elem { bits: sew.bits(), bytes: sew.bytes(), shift: sew.bytes().trailing_zeros() }
    }

    fn load(&self) -> &'static str {
        match self.bytes {
            1 => "lb",
            2 => "lh",
            _ => "lw",
        }
    }

    fn store(&self) -> &'static str {
        match self.bytes {
            1 => "sb",
            2 => "sh",
            _ => "sw",
        }
    }

    /// Register holding the byte count of the current strip, plus the
    /// instruction computing it (if the element is wider than a byte).
    fn strip_bytes(&self) -> (&'static str, String) {
        if self.shift == 0 {
            ("t0", String::new())
        } else {
            ("t1", format!("    slli t1, t0, {}\n", self.shift))
        }
    }

    fn min_value(&self) -> i64 {
        -(1i64 << (self.bits - 1))
    }
}

/// Emit the source of one kernel.
pub fn kernel_source(id: BenchmarkId, variant: Variant, shape: Shape, sew: Sew, layout: &Layout) -> String {
    let e = Elem::new(sew);
    let mut s = String::new();
    let _ = writeln!(s, "# {} ({}) sew={}", id.name(), variant.name(), e.bits);
    for (name, addr) in layout.symbols() {
        let _ = writeln!(s, ".equ {name}, {addr:#x}");
    }
    let _ = writeln!(s, ".equ ESZ, {}", e.bytes);
    match shape {
        Shape::Vector { n } => {
            let _ = writeln!(s, ".equ N, {n}");
        }
        Shape::Matrix { n } => {
            let _ = writeln!(s, ".equ N, {n}");
            let _ = writeln!(s, ".equ ROWB, {}", n * e.bytes);
            let _ = writeln!(s, ".equ OUTW, {}", n / 2);
            let _ = writeln!(s, ".equ HALFW, {}", n / 4);
        }
        Shape::Conv { image, kernel, batch } => {
            let out = image - kernel + 1;
            let _ = writeln!(s, ".equ W, {image}");
            let _ = writeln!(s, ".equ K, {kernel}");
            let _ = writeln!(s, ".equ O, {out}");
            let _ = writeln!(s, ".equ BATCH, {batch}");
            let _ = writeln!(s, ".equ ROWB, {}", image * e.bytes);
            let _ = writeln!(s, ".equ KROWB, {}", kernel * e.bytes);
            let _ = writeln!(s, ".equ IMGB, {}", image * image * e.bytes);
        }
    }
    s.push_str(".text\n");
    let body = match (id, variant) {
        (BenchmarkId::VecAdd, Variant::Scalar) => scalar_elementwise(e, "add"),
        (BenchmarkId::VecMul, Variant::Scalar) => scalar_elementwise(e, "mul"),
        (BenchmarkId::VecAdd, Variant::Vector) => vector_elementwise(e, "vadd.vv"),
        (BenchmarkId::VecMul, Variant::Vector) => vector_elementwise(e, "vmul.vv"),
        (BenchmarkId::VecDot, Variant::Scalar) => scalar_dot(e),
        (BenchmarkId::VecDot, Variant::Vector) => vector_dot(e),
        (BenchmarkId::VecMaxReduce, Variant::Scalar) => scalar_max(e),
        (BenchmarkId::VecMaxReduce, Variant::Vector) => vector_max(e),
        (BenchmarkId::VecRelu, Variant::Scalar) => scalar_relu(e),
        (BenchmarkId::VecRelu, Variant::Vector) => vector_relu(e),
        (BenchmarkId::MatAdd, Variant::Scalar) => scalar_mat_add(e),
        (BenchmarkId::MatAdd, Variant::Vector) => vector_mat_add(e),
        (BenchmarkId::MatMul, Variant::Scalar) => scalar_mat_mul(e),
        (BenchmarkId::MatMul, Variant::Vector) => vector_mat_mul(e),
        (BenchmarkId::MatMaxpool, Variant::Scalar) => scalar_pool(e),
        (BenchmarkId::MatMaxpool, Variant::Vector) => vector_pool(e),
        (BenchmarkId::Conv2d, Variant::Scalar) => scalar_conv(e),
        (BenchmarkId::Conv2d, Variant::Vector) => vector_conv(e),
    };
    s.push_str(&body);
    s
}

fn scalar_elementwise(e: Elem, op: &str) -> String {
    let (l, st) = (e.load(), e.store());
    format!(
        "    li a0, N
    li a1, SRC_A
    li a2, SRC_B
    li a3, DST
loop:
    {l} t1, 0(a1)
    {l} t2, 0(a2)
    {op} t3, t1, t2
    {st} t3, 0(a3)
    addi a1, a1, ESZ
    addi a2, a2, ESZ
    addi a3, a3, ESZ
    addi a0, a0, -1
    bnez a0, loop
    halt
"
    )
}

fn vector_elementwise(e: Elem, op: &str) -> String {
    let w = e.bits;
    let (tb, slli) = e.strip_bytes();
    format!(
        "    li a0, N
    li a1, SRC_A
    li a2, SRC_B
    li a3, DST
loop:
    vsetvli t0, a0, e{w}, m1
    vle{w}.v v1, (a1)
    vle{w}.v v2, (a2)
    {op} v3, v1, v2
    vse{w}.v v3, (a3)
{slli}    add a1, a1, {tb}
    add a2, a2, {tb}
    add a3, a3, {tb}
    sub a0, a0, t0
    bnez a0, loop
    halt
"
    )
}

fn scalar_dot(e: Elem) -> String {
    let (l, st) = (e.load(), e.store());
    format!(
        "    li a0, N
    li a1, SRC_A
    li a2, SRC_B
    li a3, DST
    li t3, 0
loop:
    {l} t1, 0(a1)
    {l} t2, 0(a2)
    mul t1, t1, t2
    add t3, t3, t1
    addi a1, a1, ESZ
    addi a2, a2, ESZ
    addi a0, a0, -1
    bnez a0, loop
    {st} t3, 0(a3)
    halt
"
    )
}

fn vector_dot(e: Elem) -> String {
    let w = e.bits;
    let st = e.store();
    let (tb, slli) = e.strip_bytes();
    format!(
        "    li a0, N
    li a1, SRC_A
    li a2, SRC_B
    li a3, DST
    vsetvli t0, zero, e{w}, m1
    vmv.v.i v4, 0
loop:
    vsetvli t0, a0, e{w}, m1
    vle{w}.v v1, (a1)
    vle{w}.v v2, (a2)
    vmul.vv v3, v1, v2
    vredsum.vs v4, v3, v4
{slli}    add a1, a1, {tb}
    add a2, a2, {tb}
    sub a0, a0, t0
    bnez a0, loop
    vmv.x.s t3, v4
    {st} t3, 0(a3)
    halt
"
    )
}

/// `dst = max(dst, src)` without branches, clobbering t5/t6.
fn scalar_max_into(dst: &str, src: &str) -> String {
    format!(
        "    sub t5, {dst}, {src}
    srai t6, t5, 31
    and t5, t5, t6
    sub {dst}, {dst}, t5
"
    )
}

fn scalar_max(e: Elem) -> String {
    let (l, st) = (e.load(), e.store());
    let body = scalar_max_into("t3", "t1");
    format!(
        "    li a0, N
    li a1, SRC_A
    li a3, DST
    {l} t3, 0(a1)
loop:
    {l} t1, 0(a1)
{body}    addi a1, a1, ESZ
    addi a0, a0, -1
    bnez a0, loop
    {st} t3, 0(a3)
    halt
"
    )
}

fn vector_max(e: Elem) -> String {
    let w = e.bits;
    let st = e.store();
    let min = e.min_value();
    let (tb, slli) = e.strip_bytes();
    format!(
        "    li a0, N
    li a1, SRC_A
    li a3, DST
    li t2, {min}
    vsetvli t0, zero, e{w}, m1
    vmv.v.x v4, t2
loop:
    vsetvli t0, a0, e{w}, m1
    vle{w}.v v1, (a1)
    vredmax.vs v4, v1, v4
{slli}    add a1, a1, {tb}
    sub a0, a0, t0
    bnez a0, loop
    vmv.x.s t3, v4
    {st} t3, 0(a3)
    halt
"
    )
}

fn scalar_relu(e: Elem) -> String {
    let (l, st) = (e.load(), e.store());
    format!(
        "    li a0, N
    li a1, SRC_A
    li a2, DST
loop:
    {l} t1, 0(a1)
    srai t2, t1, 31
    xori t2, t2, -1
    and t1, t1, t2
    {st} t1, 0(a2)
    addi a1, a1, ESZ
    addi a2, a2, ESZ
    addi a0, a0, -1
    bnez a0, loop
    halt
"
    )
}

fn vector_relu(e: Elem) -> String {
    let w = e.bits;
    let (tb, slli) = e.strip_bytes();
    format!(
        "    li a0, N
    li a1, SRC_A
    li a2, DST
loop:
    vsetvli t0, a0, e{w}, m1
    vle{w}.v v1, (a1)
    vmslt.vx v0, v1, zero
    vmerge.vxm v2, v1, zero, v0
    vse{w}.v v2, (a2)
{slli}    add a1, a1, {tb}
    add a2, a2, {tb}
    sub a0, a0, t0
    bnez a0, loop
    halt
"
    )
}

/// Row loop calling `addrow(a0 = n, a1 = a, a2 = b, a3 = c)` once per row.
fn mat_add_driver(routine: &str) -> String {
    format!(
        "    li s1, N
    li s0, N
    li s2, SRC_A
    li s3, SRC_B
    li s4, DST
    li s5, ROWB
row:
    mv a0, s1
    mv a1, s2
    mv a2, s3
    mv a3, s4
    jal ra, addrow
    add s2, s2, s5
    add s3, s3, s5
    add s4, s4, s5
    addi s0, s0, -1
    bnez s0, row
    halt
addrow:
{routine}    ret
"
    )
}

fn scalar_mat_add(e: Elem) -> String {
    let (l, st) = (e.load(), e.store());
    mat_add_driver(&format!(
        "    {l} t3, 0(a1)
    {l} t4, 0(a2)
    add t3, t3, t4
    {st} t3, 0(a3)
    addi a1, a1, ESZ
    addi a2, a2, ESZ
    addi a3, a3, ESZ
    addi a0, a0, -1
    bnez a0, addrow
"
    ))
}

fn vector_mat_add(e: Elem) -> String {
    let w = e.bits;
    let (tb, slli) = e.strip_bytes();
    mat_add_driver(&format!(
        "    vsetvli t0, a0, e{w}, m1
    vle{w}.v v1, (a1)
    vle{w}.v v2, (a2)
    vadd.vv v3, v1, v2
    vse{w}.v v3, (a3)
{slli}    add a1, a1, {tb}
    add a2, a2, {tb}
    add a3, a3, {tb}
    sub a0, a0, t0
    bnez a0, addrow
"
    ))
}

/// `reg = base + idx * N` in bytes.
fn row_base(e: Elem, dst: &str, base: &str, idx: &str, tmp: &str) -> String {
    let scale = if e.shift == 0 { String::new() } else { format!("    slli {tmp}, {tmp}, {}\n", e.shift) };
    format!("    mul {tmp}, {idx}, s1\n{scale}    add {dst}, {base}, {tmp}\n")
}

fn scalar_mat_mul(e: Elem) -> String {
    let (l, st) = (e.load(), e.store());
    let arow = row_base(e, "s5", "s2", "s0", "t2");
    let bcol = row_base(e, "a2", "s3", "s6", "t3");
    format!(
        "    li s0, 0
    li s1, N
    li s2, SRC_A
    li s3, SRC_B
    li a3, DST
irow:
{arow}    li s6, 0
jcol:
{bcol}    mv a1, s5
    mv a0, s1
    li t4, 0
dot:
    {l} t5, 0(a1)
    {l} t6, 0(a2)
    mul t5, t5, t6
    add t4, t4, t5
    addi a1, a1, ESZ
    addi a2, a2, ESZ
    addi a0, a0, -1
    bnez a0, dot
    {st} t4, 0(a3)
    addi a3, a3, ESZ
    addi s6, s6, 1
    bne s6, s1, jcol
    addi s0, s0, 1
    bne s0, s1, irow
    halt
"
    )
}

fn vector_mat_mul(e: Elem) -> String {
    let w = e.bits;
    let st = e.store();
    let arow = row_base(e, "s5", "s2", "s0", "t2");
    let bcol = row_base(e, "a2", "s3", "s6", "t3");
    let (tb, slli) = e.strip_bytes();
    format!(
        "    li s0, 0
    li s1, N
    li s2, SRC_A
    li s3, SRC_B
    li a3, DST
irow:
{arow}    li s6, 0
jcol:
{bcol}    mv a1, s5
    mv a0, s1
    vsetvli t0, zero, e{w}, m1
    vmv.v.i v4, 0
dot:
    vsetvli t0, a0, e{w}, m1
    vle{w}.v v1, (a1)
    vle{w}.v v2, (a2)
    vmul.vv v3, v1, v2
    vredsum.vs v4, v3, v4
{slli}    add a1, a1, {tb}
    add a2, a2, {tb}
    sub a0, a0, t0
    bnez a0, dot
    vmv.x.s t4, v4
    {st} t4, 0(a3)
    addi a3, a3, ESZ
    addi s6, s6, 1
    bne s6, s1, jcol
    addi s0, s0, 1
    bne s0, s1, irow
    halt
"
    )
}

fn scalar_pool(e: Elem) -> String {
    let (l, st) = (e.load(), e.store());
    let m1 = scalar_max_into("t1", "t2");
    let m2 = scalar_max_into("t3", "t4");
    let m3 = scalar_max_into("t1", "t3");
    format!(
        "    li s0, OUTW
    li a1, SRC_A
    li a3, DST
    li s2, ROWB
prow:
    li s1, OUTW
    mv a2, a1
    add a4, a1, s2
pwin:
    {l} t1, 0(a2)
    {l} t2, ESZ(a2)
    {l} t3, 0(a4)
    {l} t4, ESZ(a4)
{m1}{m2}{m3}    {st} t1, 0(a3)
    addi a2, a2, ESZ+ESZ
    addi a4, a4, ESZ+ESZ
    addi a3, a3, ESZ
    addi s1, s1, -1
    bnez s1, pwin
    add a1, a4, zero
    addi s0, s0, -1
    bnez s0, prow
    halt
"
    )
}

/// Two windows per iteration, one per lane. Each window's columns are
/// fetched with strided loads, combined with `vmax.vv` and reduced with
/// `vredmax.vs`; the single result is stored with `vl = 1`.
fn vector_pool(e: Elem) -> String {
    let w = e.bits;
    format!(
        "    li s0, OUTW
    li a1, SRC_A
    li a3, DST
    li s2, ROWB
    li s3, 1
    li s4, 2
prow:
    li s1, HALFW
    mv a2, a1
pwin:
    vsetvli t0, s4, e{w}, m1
    vlse{w}.v v1, (a2), s2
    addi t1, a2, ESZ
    vlse{w}.v v2, (t1), s2
    addi t2, a2, ESZ+ESZ
    vlse{w}.v v17, (t2), s2
    addi t3, a2, ESZ+ESZ+ESZ
    vlse{w}.v v18, (t3), s2
    vmax.vv v3, v1, v2
    vmax.vv v19, v17, v18
    vredmax.vs v4, v3, v3
    vredmax.vs v20, v19, v19
    vsetvli t0, s3, e{w}, m1
    vse{w}.v v4, (a3)
    addi t4, a3, ESZ
    vse{w}.v v20, (t4)
    addi a2, a2, ESZ+ESZ+ESZ+ESZ
    addi a3, a3, ESZ+ESZ
    addi s1, s1, -1
    bnez s1, pwin
    add a1, a1, s2
    add a1, a1, s2
    addi s0, s0, -1
    bnez s0, prow
    halt
"
    )
}

/// Shared outer loops of the convolution: batch, output row, output column
/// and kernel row. `inner` computes one kernel row's contribution into s8.
fn conv_driver(e: Elem, inner: &str, tail: &str) -> String {
    let st = e.store();
    format!(
        "    li s0, BATCH
    li s1, SRC_A
    li s2, DST
    li s3, SRC_B
    li gp, ROWB
    li tp, KROWB
img:
    li s4, O
    mv s5, s1
orow:
    li s6, O
    mv s7, s5
ocol:
    li s8, 0
    mv s9, s7
    mv s10, s3
    li s11, K
krow:
    mv a0, s9
    mv a1, s10
    li a2, K
{inner}    add s9, s9, gp
    add s10, s10, tp
    addi s11, s11, -1
    bnez s11, krow
    {st} s8, 0(s2)
    addi s2, s2, ESZ
    addi s7, s7, ESZ
    addi s6, s6, -1
    bnez s6, ocol
    add s5, s5, gp
    addi s4, s4, -1
    bnez s4, orow
    li t6, IMGB
    add s1, s1, t6
    addi s0, s0, -1
    bnez s0, img
    halt
{tail}"
    )
}

fn scalar_conv(e: Elem) -> String {
    let l = e.load();
    let inner = format!(
        "kcol:
    {l} t1, 0(a0)
    {l} t2, 0(a1)
    mul t1, t1, t2
    add s8, s8, t1
    addi a0, a0, ESZ
    addi a1, a1, ESZ
    addi a2, a2, -1
    bnez a2, kcol
"
    );
    conv_driver(e, &inner, "")
}

/// Kernel rows go through a strip-mined vector dot-product routine.
fn vector_conv(e: Elem) -> String {
    let w = e.bits;
    let (tb, slli) = e.strip_bytes();
    let inner = "    jal ra, vdot\n    add s8, s8, a0\n";
    let tail = format!(
        "# a0 = dot(a0[0..a2], a1[0..a2])
vdot:
    vsetvli t0, zero, e{w}, m1
    vmv.v.i v4, 0
vdot_loop:
    vsetvli t0, a2, e{w}, m1
    vle{w}.v v1, (a0)
    vle{w}.v v2, (a1)
    vmul.vv v3, v1, v2
    vredsum.vs v4, v3, v4
{slli}    add a0, a0, {tb}
    add a1, a1, {tb}
    sub a2, a2, t0
    bnez a2, vdot_loop
    vmv.x.s a0, v4
    ret
"
    );
    conv_driver(e, inner, &tail)
}
