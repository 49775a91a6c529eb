//! Closed-form cycle counts for the benchmark kernels.
//!
//! Scalar kernels have branch-free loop bodies, so their cost is a plain sum
//! of per-instruction costs times trip counts.
//!
//! Vector kernels are written as recurrences on issue cycles. With
//! `λ = 2 + dispatch_overhead`, an instruction issued at `d` executes from
//! `d+λ` for `n` cycles and writes back at `d+λ+n`; a lower bound "`x` free
//! at cycle `f`" therefore becomes `d ≥ f − λ`. Each loop iteration depends on
//! the previous one only through its issue cycles, so a strip (or window, or
//! call) contributes a fixed increment and the total is a sum over trip
//! counts. Notation below: `n` memory occupancy (`bus_initiation + beats`),
//! `a` arithmetic beats, `ρ` reduction cycles, `V` vsetvli cost, `A` ALU CPI,
//! `M` multiply CPI, `Bt`/`Bn` taken / not-taken branch CPI, `J` jump CPI,
//! `Ld`/`St` scalar load/store cycles.

use crate::bench::{check_sew, BenchError, BenchmarkId, Layout, Shape, Variant};
use crate::isa::{Sew, VectorConfig};
use crate::timing::TimingConfig;

/// Cycle count of one kernel, without running it.
pub fn analytic_cycles(
    id: BenchmarkId,
    shape: Shape,
    sew: Sew,
    variant: Variant,
    cfg: &VectorConfig,
    timing: &TimingConfig,
) -> Result<u64, BenchError> {
    check_sew(sew)?;
    shape.validate(id)?;
    if id == BenchmarkId::MatMaxpool && cfg.vlmax(sew) < 2 {
        return Err(BenchError::BadShape { id, reason: "pooling needs room for two elements per register".into() });
    }
    let layout = Layout::new(id, shape, sew);
    let m = Model::new(sew, cfg, timing);
    let c = match (id, shape, variant) {
        (BenchmarkId::VecAdd, Shape::Vector { n }, Variant::Scalar) => m.scalar_elementwise(n as u64, m.alu, &layout),
        (BenchmarkId::VecMul, Shape::Vector { n }, Variant::Scalar) => m.scalar_elementwise(n as u64, m.mul, &layout),
        (BenchmarkId::VecAdd | BenchmarkId::VecMul, Shape::Vector { n }, Variant::Vector) => {
            m.vector_elementwise(n, &layout)
        }
        (BenchmarkId::VecDot, Shape::Vector { n }, Variant::Scalar) => m.scalar_dot(n as u64, &layout),
        (BenchmarkId::VecDot, Shape::Vector { n }, Variant::Vector) => m.vector_dot(n, &layout),
        (BenchmarkId::VecMaxReduce, Shape::Vector { n }, Variant::Scalar) => m.scalar_max(n as u64, &layout),
        (BenchmarkId::VecMaxReduce, Shape::Vector { n }, Variant::Vector) => m.vector_max(n, &layout),
        (BenchmarkId::VecRelu, Shape::Vector { n }, Variant::Scalar) => m.scalar_relu(n as u64, &layout),
        (BenchmarkId::VecRelu, Shape::Vector { n }, Variant::Vector) => m.vector_relu(n, &layout),
        (BenchmarkId::MatAdd, Shape::Matrix { n }, Variant::Scalar) => m.scalar_mat_add(n as u64, &layout),
        (BenchmarkId::MatAdd, Shape::Matrix { n }, Variant::Vector) => m.vector_mat_add(n, &layout),
        (BenchmarkId::MatMul, Shape::Matrix { n }, Variant::Scalar) => m.scalar_mat_mul(n as u64, &layout),
        (BenchmarkId::MatMul, Shape::Matrix { n }, Variant::Vector) => m.vector_mat_mul(n, &layout),
        (BenchmarkId::MatMaxpool, Shape::Matrix { n }, Variant::Scalar) => m.scalar_pool(n as u64, &layout),
        (BenchmarkId::MatMaxpool, Shape::Matrix { n }, Variant::Vector) => m.vector_pool(n as u64, &layout),
        (BenchmarkId::Conv2d, Shape::Conv { image, kernel, batch }, v) => {
            let (w, k, b) = (image as u64, kernel as u64, batch as u64);
            match v {
                Variant::Scalar => m.scalar_conv(w, k, b, &layout),
                Variant::Vector => m.vector_conv(w, k, b, &layout),
            }
        }
        _ => unreachable!("shape validated above"),
    };
    Ok(c)
}

/// Instructions emitted by `li value`.
fn li_len(v: i64) -> u64 {
    if (-2048..2048).contains(&v) || v & 0xfff == 0 {
        1
    } else {
        2
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ceil_log2(v: u64) -> u64 {
    v.next_power_of_two().trailing_zeros() as u64
}

/// Strip lengths of a strip-mined loop over `total` elements.
fn strips(total: u32, vlmax: u32) -> Vec<u32> {
    let mut v = vec![vlmax; (total / vlmax) as usize];
    if !total.is_multiple_of(vlmax) {
        v.push(total % vlmax);
    }
    v
}

struct Model {
    sew_bits: u64,
    esz: u64,
    elen: u64,
    vlmax: u32,
    dual: bool,
    lam: u64,
    v: u64,
    alu: u64,
    mul: u64,
    bt: u64,
    bn: u64,
    j: u64,
    ld: u64,
    st: u64,
    bi: u64,
    tree: bool,
}

impl Model {
    fn new(sew: Sew, cfg: &VectorConfig, t: &TimingConfig) -> Self {
        Model {
            sew_bits: sew.bits() as u64,
            esz: sew.bytes() as u64,
            elen: cfg.elen_bits as u64,
            vlmax: cfg.vlmax(sew),
            dual: cfg.lanes >= 2,
            lam: 2 + t.dispatch_overhead,
            v: t.vsetvli_cycles,
            alu: t.alu_cpi,
            mul: t.mul_cpi,
            bt: t.branch_taken_cpi,
            bn: t.branch_not_taken_cpi,
            j: t.jump_cpi,
            ld: t.load_cycles(),
            st: t.store_cycles(),
            bi: t.bus_initiation,
            tree: t.reduction_tree,
        }
    }

    fn beats(&self, vl: u32) -> u64 {
        (vl as u64 * self.sew_bits).div_ceil(self.elen)
    }

    fn word_bytes(&self) -> u64 {
        self.elen / 8
    }

    /// Unit-stride memory occupancy of `vl` elements starting `off` bytes
    /// into a bus word: one beat per word touched.
    fn mem_at(&self, off: u64, vl: u32) -> u64 {
        let eb = self.word_bytes();
        self.bi + (off + vl as u64 * self.esz - 1) / eb + 1
    }

    fn mem(&self, vl: u32) -> u64 {
        self.mem_at(0, vl)
    }

    /// How many of `count` consecutive rows of `stride` bytes start at each
    /// word offset.
    fn residues(&self, count: u64, stride: u64) -> Vec<u64> {
        let eb = self.word_bytes();
        let mut c = vec![0u64; eb as usize];
        let period = eb / gcd(stride % eb, eb).max(1);
        let period = period.min(count.max(1));
        for i in 0..period {
            let reps = (count - i).div_ceil(period);
            c[((i * stride) % eb) as usize] += reps;
        }
        c
    }

    fn red(&self, vl: u32) -> u64 {
        let extra = if self.tree && vl > 1 { ceil_log2(vl as u64) } else { 0 };
        self.beats(vl) + extra
    }

    /// Cost of the `li` instructions loading `values`.
    fn lis(&self, values: &[i64]) -> u64 {
        values.iter().map(|v| li_len(*v)).sum::<u64>() * self.alu
    }

    /// Loop-closing branches of `trips` iterations.
    fn branches(&self, trips: u64) -> u64 {
        trips.saturating_sub(1) * self.bt + self.bn
    }

    /// Extra ALU op converting a strip length into bytes.
    fn scale(&self) -> u64 {
        if self.esz > 1 {
            1
        } else {
            0
        }
    }

    fn addrs(layout: &Layout) -> Vec<i64> {
        let mut v: Vec<i64> = layout.inputs.iter().map(|a| *a as i64).collect();
        v.push(layout.output as i64);
        v
    }

    // ---- scalar kernels ----

    /// `li` ×4; per element `2·Ld + op + St + 4A`.
    fn scalar_elementwise(&self, n: u64, op: u64, layout: &Layout) -> u64 {
        let mut li = vec![n as i64];
        li.extend(Self::addrs(layout));
        self.lis(&li) + n * (2 * self.ld + op + self.st + 4 * self.alu) + self.branches(n)
    }

    fn scalar_dot(&self, n: u64, layout: &Layout) -> u64 {
        let mut li = vec![n as i64, 0];
        li.extend(Self::addrs(layout));
        self.lis(&li) + n * (2 * self.ld + self.mul + 4 * self.alu) + self.branches(n) + self.st
    }

    /// Seeded from the first element so the branch-free max cannot overflow.
    fn scalar_max(&self, n: u64, layout: &Layout) -> u64 {
        let mut li = vec![n as i64];
        li.extend(Self::addrs(layout));
        self.lis(&li) + self.ld + n * (self.ld + 6 * self.alu) + self.branches(n) + self.st
    }

    fn scalar_relu(&self, n: u64, layout: &Layout) -> u64 {
        let mut li = vec![n as i64];
        li.extend(Self::addrs(layout));
        self.lis(&li) + n * (self.ld + self.st + 6 * self.alu) + self.branches(n)
    }

    /// Row driver `mv ×4, jal` around a scalar add loop, `ret`, then three
    /// pointer bumps and the row count.
    fn scalar_mat_add(&self, n: u64, layout: &Layout) -> u64 {
        let mut li = vec![n as i64, n as i64];
        li.extend(Self::addrs(layout));
        li.push((n * self.esz) as i64);
        let body = n * (2 * self.ld + self.st + 5 * self.alu) + self.branches(n);
        let row = 8 * self.alu + 2 * self.j + body;
        self.lis(&li) + n * row + self.branches(n)
    }

    fn scalar_mat_mul(&self, n: u64, layout: &Layout) -> u64 {
        let mut li = vec![0, n as i64];
        li.extend(Self::addrs(layout));
        let s = self.scale() * self.alu;
        let row_head = self.mul + s + 2 * self.alu;
        let col_head = self.mul + s + 4 * self.alu;
        let dot = n * (2 * self.ld + self.mul + 4 * self.alu) + self.branches(n);
        let col = col_head + dot + self.st + 2 * self.alu;
        let row = row_head + n * col + self.branches(n) + self.alu;
        self.lis(&li) + n * row + self.branches(n)
    }

    fn scalar_pool(&self, n: u64, layout: &Layout) -> u64 {
        let r = n / 2;
        let li = [r as i64, layout.inputs[0] as i64, layout.output as i64, (n * self.esz) as i64];
        let window = 4 * self.ld + self.st + 16 * self.alu;
        let row = self.lis(&[r as i64]) + 2 * self.alu + r * window + self.branches(r) + 2 * self.alu;
        self.lis(&li) + r * row + self.branches(r)
    }

    fn scalar_conv(&self, w: u64, k: u64, batch: u64, layout: &Layout) -> u64 {
        let o = w - k + 1;
        let li = [
            batch as i64,
            layout.inputs[0] as i64,
            layout.output as i64,
            layout.inputs[1] as i64,
            (w * self.esz) as i64,
            (k * self.esz) as i64,
        ];
        let a = self.alu;
        let krow = 3 * a + k * (2 * self.ld + self.mul + 4 * a) + self.branches(k) + 3 * a;
        let ocol = 4 * a + k * krow + self.branches(k) + self.st + 3 * a;
        let orow = self.lis(&[o as i64]) + a + o * ocol + self.branches(o) + 2 * a;
        let img = self.lis(&[o as i64]) + a + o * orow + self.branches(o) + self.lis(&[(w * w * self.esz) as i64]) + 2 * a;
        self.lis(&li) + batch * img + self.branches(batch)
    }

    // ---- vector kernels ----

    /// Elementwise strip `vle, vle, op, vse` with all three streams at word
    /// offset `off`. With `d1` the first load's issue cycle the store issues
    /// at `d1 + 2n + 2λ + a`. Returns `(n, to_store)`.
    fn add_strip(&self, off: u64, vl: u32) -> (u64, u64) {
        let n = self.mem_at(off, vl);
        (n, 2 * n + 2 * self.lam + self.beats(vl))
    }

    /// Issue cycle of a row's last store relative to its first load, plus
    /// that strip's `(n, to_store)`. Between strips the next load waits for
    /// the front end (`1 + kA + Bt + V` after the store) or the bus (`n`).
    fn add_row(&self, total: u32, off: u64, k: u64) -> (u64, u64, u64) {
        let s = strips(total, self.vlmax);
        let mut within = 0u64;
        for vl in &s[..s.len() - 1] {
            let (n, to_store) = self.add_strip(off, *vl);
            within += to_store + (1 + k * self.alu + self.bt + self.v).max(n);
        }
        let (n, to_store) = self.add_strip(off, *s.last().unwrap());
        (within + to_store, n, to_store)
    }

    fn vector_elementwise(&self, total: u32, layout: &Layout) -> u64 {
        let mut li = vec![total as i64];
        li.extend(Self::addrs(layout));
        let k = 4 + self.scale();
        let (d4, n, _) = self.add_row(total, 0, k);
        let d4 = self.lis(&li) + self.v + d4;
        (d4 + 1 + k * self.alu + self.bn).max(d4 + n + self.lam + 1)
    }

    fn vector_mat_add(&self, dim: u32, layout: &Layout) -> u64 {
        let mut li = vec![dim as i64, dim as i64];
        li.extend(Self::addrs(layout));
        li.push((dim as u64 * self.esz) as i64);
        let k = 4 + self.scale();
        let row_bytes = dim as u64 * self.esz;
        let eb = self.word_bytes();
        // arguments and call, then the routine's vsetvli
        let enter = 4 * self.alu + self.j + self.v;
        let mut d1 = self.lis(&li) + enter;
        for i in 0..dim as u64 {
            let (d4, n, _) = self.add_row(dim, (i * row_bytes) % eb, k);
            let d4 = d1 + d4;
            // loop exit, ret, bumps
            let leave = 1 + k * self.alu + self.bn + self.j + 4 * self.alu;
            if i + 1 == dim as u64 {
                return (d4 + leave + self.bn).max(d4 + n + self.lam + 1);
            }
            d1 = d4 + (leave + self.bt + enter).max(n);
        }
        unreachable!("at least one row")
    }

    /// Dot-product strip loop (`vle, vle, vmul, vredsum` + `k` ALU ops)
    /// preceded by an accumulator reset issued at 0, with the two streams at
    /// word offsets `oa` and `ob`. Returns the issue cycle of the trailing
    /// `vmv.x.s`.
    fn dot_block(&self, total: u32, oa: u64, ob: u64, k: u64) -> u64 {
        let beta_full = self.beats(self.vlmax);
        let mut d = (1 + self.v).max(beta_full);
        let s = strips(total, self.vlmax);
        for (i, vl) in s.iter().enumerate() {
            let (n1, n2) = (self.mem_at(oa, *vl), self.mem_at(ob, *vl));
            let rho = self.red(*vl);
            d += n1 + n2 + 2 * self.lam + self.beats(*vl);
            if i + 1 == s.len() {
                return d + (1 + k * self.alu + self.bn).max(self.lam + rho);
            }
            d += (1 + k * self.alu + self.bt + self.v).max(rho);
        }
        unreachable!("at least one strip")
    }

    fn vector_dot(&self, total: u32, layout: &Layout) -> u64 {
        let mut li = vec![total as i64];
        li.extend(Self::addrs(layout));
        let d0 = self.lis(&li) + self.v;
        let d5 = d0 + self.dot_block(total, 0, 0, 3 + self.scale());
        // vmv.x.s result ready at d5+λ+2, then the store
        d5 + self.lam + 2 + self.st
    }

    fn vector_max(&self, total: u32, layout: &Layout) -> u64 {
        let mut li = vec![total as i64, -(1i64 << (self.sew_bits - 1))];
        li.extend(Self::addrs(layout));
        let k = 2 + self.scale();
        let d0 = self.lis(&li) + self.v;
        let mut d = d0 + (1 + self.v).max(self.beats(self.vlmax));
        let s = strips(total, self.vlmax);
        for (i, vl) in s.iter().enumerate() {
            let rho = self.red(*vl);
            // load, then the reduction once the load has written back
            d += self.lam + self.mem(*vl);
            if i + 1 == s.len() {
                let d5 = d + (1 + k * self.alu + self.bn).max(self.lam + rho);
                return d5 + self.lam + 2 + self.st;
            }
            d += (1 + k * self.alu + self.bt + self.v).max(rho);
        }
        unreachable!("at least one strip")
    }

    fn vector_relu(&self, total: u32, layout: &Layout) -> u64 {
        let mut li = vec![total as i64];
        li.extend(Self::addrs(layout));
        let k = 3 + self.scale();
        let mut d1 = self.lis(&li) + self.v;
        let s = strips(total, self.vlmax);
        for (i, vl) in s.iter().enumerate() {
            let (n, a) = (self.mem(*vl), self.beats(*vl));
            // vle → vmslt → vmerge → vse, each waiting for the previous write-back
            let d4 = d1 + 3 * self.lam + n + 2 * a;
            if i + 1 == s.len() {
                return (d4 + 1 + k * self.alu + self.bn).max(d4 + self.lam + n + 1);
            }
            d1 = d4 + (1 + k * self.alu + self.bt + self.v).max(n);
        }
        unreachable!("at least one strip")
    }

    fn vector_mat_mul(&self, dim: u32, layout: &Layout) -> u64 {
        let mut li = vec![0, dim as i64];
        li.extend(Self::addrs(layout));
        let (a, s) = (self.alu, self.scale() * self.alu);
        let row_head = self.mul + s + 2 * a;
        let col_head = self.mul + s + 3 * a;
        let n = dim as u64;
        // A rows and B columns share one residue pattern
        let res = self.residues(n, n * self.esz);
        let mut blocks = 0u64;
        for (oa, ca) in res.iter().enumerate().filter(|(_, c)| **c > 0) {
            for (ob, cb) in res.iter().enumerate().filter(|(_, c)| **c > 0) {
                blocks += ca * cb * self.dot_block(dim, oa as u64, ob as u64, 3 + self.scale());
            }
        }
        // from vmv.x.s issue: result at +λ+2, store, two bumps, branch
        let tail = self.lam + 2 + self.st + 2 * a;
        let next_col = tail + self.bt + col_head + self.v;
        let next_row = tail + self.bn + a + self.bt + row_head + col_head + self.v;
        let end = tail + self.bn + a + self.bn;
        let d0 = self.lis(&li) + row_head + col_head + self.v;
        d0 + blocks + n * (n - 1) * next_col + (n - 1) * next_row + end
    }

    /// One pooling iteration (two windows) with its first strided load
    /// issued at 0. Returns `(d9, d10)`, the issue cycles of the two stores.
    fn pool_iteration(&self) -> (u64, u64) {
        let lam = self.lam;
        let n = self.bi + 2; // two elements a row apart touch two words
        let m = self.mem(1);
        let a = self.beats(2);
        let rho = self.red(2);
        let second = if self.dual { 1 } else { 0 };
        let mut lane = [0u64; 2];
        let al = self.alu;

        // strided loads, each followed by an address add
        let d1 = 0u64;
        lane[0] = d1 + lam + n;
        let d2 = (d1 + 1 + al).max(d1 + n).max(lane[0] - lam);
        lane[0] = d2 + lam + n;
        let mem2 = d2 + lam + n;
        let d3 = (d2 + 1 + al).max(mem2 - lam).max(lane[second].saturating_sub(lam));
        lane[second] = d3 + lam + n;
        let mem3 = d3 + lam + n;
        let d4 = (d3 + 1 + al).max(mem3 - lam).max(lane[second] - lam);
        lane[second] = d4 + lam + n;
        let mem4 = d4 + lam + n;
        // vmax pair
        let d5 = (d4 + 1).max(d2 + lam + n).max(lane[0] - lam);
        lane[0] = d5 + lam + a;
        let d6 = (d5 + 1).max(d4 + lam + n).max(lane[second] - lam);
        lane[second] = d6 + lam + a;
        // vredmax pair
        let d7 = (d6 + 1).max(d5 + lam + a).max(lane[0] - lam);
        lane[0] = d7 + lam + rho;
        let d8 = (d7 + 1).max(d6 + lam + a).max(lane[second] - lam);
        lane[second] = d8 + lam + rho;
        // vsetvli, then the two single-element stores
        let d9 = (d8 + 1 + self.v).max(d7 + lam + rho).max(lane[0] - lam).max(mem4 - lam);
        lane[0] = d9 + lam + m;
        let d10 = (d9 + 1 + al).max(d8 + lam + rho).max(lane[second] - lam).max(d9 + m);
        (d9, d10)
    }

    fn vector_pool(&self, dim: u64, layout: &Layout) -> u64 {
        let r = dim / 2;
        let h = dim / 4;
        let li = [r as i64, layout.inputs[0] as i64, layout.output as i64, (dim * self.esz) as i64, 1, 2];
        let a = self.alu;
        let (d9, d10) = self.pool_iteration();
        let m = self.mem(1);
        let row_head = self.lis(&[h as i64]) + a;
        let bus = (d10 + m).max(d9 + m);
        let next_win = (d10 + 1 + 3 * a + self.bt + self.v).max(bus);
        let next_row = (d10 + 1 + 3 * a + self.bn + 3 * a + self.bt + row_head + self.v).max(bus);
        let end = (d10 + 1 + 3 * a + self.bn + 3 * a + self.bn).max(d10 + self.lam + m + 1);
        let first = self.lis(&li) + row_head + self.v;
        first + (r * h - r) * next_win + (r - 1) * next_row + end
    }

    fn vector_conv(&self, w: u64, k: u64, batch: u64, layout: &Layout) -> u64 {
        let o = w - k + 1;
        let li = [
            batch as i64,
            layout.inputs[0] as i64,
            layout.output as i64,
            layout.inputs[1] as i64,
            (w * self.esz) as i64,
            (k * self.esz) as i64,
        ];
        let a = self.alu;
        let eb = self.word_bytes();
        let li_o = self.lis(&[o as i64]);
        let li_img = self.lis(&[(w * w * self.esz) as i64]);
        // call: 3 argument moves, jal, vsetvli; vmv.v.i issues at d0
        let enter = 3 * a + self.j + self.v;
        // from vmv.x.s issue to the caller's accumulate finishing
        let ret = (1 + self.j).max(self.lam + 2) + a + 3 * a;
        let call = ret + self.bt + enter;
        let out_tail = ret + self.bn + self.st + 3 * a;
        let next_out = out_tail + self.bt + 4 * a + enter;
        let row_tail = out_tail + self.bn + 2 * a;
        let next_row = row_tail + self.bt + li_o + a + 4 * a + enter;
        let img_tail = row_tail + self.bn + li_img + 2 * a;
        let next_img = img_tail + self.bt + li_o + a + li_o + a + 4 * a + enter;
        let end = img_tail + self.bn;
        let first = self.lis(&li) + li_o + a + li_o + a + 4 * a + enter;
        let glue = first
            + (k - 1) * batch * o * o * call
            + (o - 1) * o * batch * next_out
            + (o - 1) * batch * next_row
            + (batch - 1) * next_img
            + end;

        // dot bodies: the image stream's word offset moves with the output
        // column, the kernel stream's with the kernel row
        let kstep = 3 + self.scale();
        let cols = self.residues(o, self.esz);
        let mut table = vec![vec![None; eb as usize]; eb as usize];
        let mut body = |ri: u64, rk: u64| -> u64 {
            *table[ri as usize][rk as usize].get_or_insert_with(|| {
                cols.iter()
                    .enumerate()
                    .map(|(c, n)| n * self.dot_block(k as u32, (ri + c as u64) % eb, rk, kstep))
                    .sum::<u64>()
            })
        };
        let img_base = layout.inputs[0];
        let ker_base = layout.inputs[1];
        let mut bodies = 0u64;
        for b in 0..batch {
            for orow in 0..o {
                for kr in 0..k {
                    let ri = (img_base + b * w * w * self.esz + (orow + kr) * w * self.esz) % eb;
                    let rk = (ker_base + kr * k * self.esz) % eb;
                    bodies += body(ri, rk);
                }
            }
        }
        glue + bodies
    }
}
