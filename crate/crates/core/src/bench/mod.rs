//! Benchmark kernels, data profiles, input generation and reference outputs.

pub mod kernels;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch_state::{ArchError, MachineState};
use crate::isa::{assemble, IsaError, Program, Sew, VectorConfig, DEFAULT_DATA_BASE};
use crate::timing::{analytic_cycles, simulate, Mode, SimError, SimOptions, TimingConfig};

/// Element width used by the suite unless a run overrides it.
pub const DEFAULT_SEW: Sew = Sew::E8;

/// Default input seed.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("unsupported element width {0} bits for benchmarks (scalar core is 32-bit)")]
    UnsupportedSew(u32),
    #[error("invalid shape for {id}: {reason}")]
    BadShape { id: BenchmarkId, reason: String },
    #[error("kernel assembly failed: {0}")]
    Asm(#[from] IsaError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("memory image: {0}")]
    Arch(#[from] ArchError),
    #[error("simulation infeasible: about {estimate} cycles exceeds the budget of {budget}; use analytic mode")]
    Infeasible { estimate: u64, budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkId {
    VecAdd,
    VecMul,
    VecDot,
    VecMaxReduce,
    VecRelu,
    MatAdd,
    MatMul,
    MatMaxpool,
    Conv2d,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 9] = [
        BenchmarkId::VecAdd,
        BenchmarkId::VecMul,
        BenchmarkId::VecDot,
        BenchmarkId::VecMaxReduce,
        BenchmarkId::VecRelu,
        BenchmarkId::MatAdd,
        BenchmarkId::MatMul,
        BenchmarkId::MatMaxpool,
        BenchmarkId::Conv2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::VecAdd => "vec-add",
            BenchmarkId::VecMul => "vec-mul",
            BenchmarkId::VecDot => "vec-dot",
            BenchmarkId::VecMaxReduce => "vec-max-reduce",
            BenchmarkId::VecRelu => "vec-relu",
            BenchmarkId::MatAdd => "mat-add",
            BenchmarkId::MatMul => "mat-mul",
            BenchmarkId::MatMaxpool => "mat-maxpool",
            BenchmarkId::Conv2d => "conv2d",
        }
    }

    fn index(self) -> u64 {
        BenchmarkId::ALL.iter().position(|b| *b == self).unwrap_or(0) as u64
    }

    /// Number of input arrays.
    fn input_count(self) -> usize {
        match self {
            BenchmarkId::VecMaxReduce | BenchmarkId::VecRelu | BenchmarkId::MatMaxpool => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchmarkId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| BenchError::UnknownBenchmark(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Small,
    Medium,
    Large,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Small, Profile::Medium, Profile::Large];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Small => "small",
            Profile::Medium => "medium",
            Profile::Large => "large",
        }
    }

    pub fn data(self) -> DataProfile {
        let (vector_length, matrix_dim, kernel, batch) = match self {
            Profile::Small => (64, 64, 3, 3),
            Profile::Medium => (512, 512, 4, 4),
            Profile::Large => (4096, 4096, 5, 5),
        };
        DataProfile {
            profile: self,
            vector_length,
            matrix_dim,
            conv: ConvParams { image: 1024, kernel, channels: 1, batch },
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| BenchError::UnknownProfile(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvParams {
    pub image: u32,
    pub kernel: u32,
    pub channels: u32,
    pub batch: u32,
}

/// Sizes of one data profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataProfile {
    pub profile: Profile,
    pub vector_length: u32,
    pub matrix_dim: u32,
    pub conv: ConvParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Scalar,
    Vector,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::Scalar, Variant::Vector];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Scalar => "scalar",
            Variant::Vector => "vector",
        }
    }

    pub fn sim_mode(self) -> Mode {
        match self {
            Variant::Scalar => Mode::Scalar,
            Variant::Vector => Mode::Vector,
        }
    }
}

/// How cycles are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Sim,
    Analytic,
}

/// Problem size of one kernel instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    /// `n` elements.
    Vector { n: u32 },
    /// `n`×`n` matrices.
    Matrix { n: u32 },
    /// `batch` square images of side `image`, `kernel`×`kernel` filter.
    Conv { image: u32, kernel: u32, batch: u32 },
}

impl Shape {
    pub fn for_profile(id: BenchmarkId, profile: Profile) -> Shape {
        let d = profile.data();
        match id {
            BenchmarkId::VecAdd
            | BenchmarkId::VecMul
            | BenchmarkId::VecDot
            | BenchmarkId::VecMaxReduce
            | BenchmarkId::VecRelu => Shape::Vector { n: d.vector_length },
            BenchmarkId::MatAdd | BenchmarkId::MatMul | BenchmarkId::MatMaxpool => Shape::Matrix { n: d.matrix_dim },
            BenchmarkId::Conv2d => Shape::Conv { image: d.conv.image, kernel: d.conv.kernel, batch: d.conv.batch },
        }
    }

    /// Check that `self` is a legal size for `id`.
    pub fn validate(self, id: BenchmarkId) -> Result<(), BenchError> {
        let bad = |reason: &str| Err(BenchError::BadShape { id, reason: reason.to_string() });
        match (id, self) {
            (BenchmarkId::Conv2d, Shape::Conv { image, kernel, batch }) => {
                if kernel == 0 || batch == 0 || image < kernel {
                    return bad("need 1 <= kernel <= image and batch >= 1");
                }
            }
            (BenchmarkId::MatMaxpool, Shape::Matrix { n }) => {
                if n < 8 || n % 4 != 0 {
                    return bad("pooling needs a multiple of 4, at least 8");
                }
            }
            (BenchmarkId::MatAdd | BenchmarkId::MatMul, Shape::Matrix { n }) => {
                if n == 0 {
                    return bad("empty matrix");
                }
            }
            (BenchmarkId::Conv2d | BenchmarkId::MatAdd | BenchmarkId::MatMul | BenchmarkId::MatMaxpool, _) => {
                return bad("wrong shape kind");
            }
            (_, Shape::Vector { n }) => {
                if n == 0 {
                    return bad("empty vector");
                }
            }
            (_, _) => return bad("wrong shape kind"),
        }
        Ok(())
    }

    /// Element counts of each input array.
    fn input_lens(self, id: BenchmarkId) -> Vec<usize> {
        let one = match self {
            Shape::Vector { n } | Shape::Matrix { n } => {
                if matches!(self, Shape::Matrix { .. }) {
                    (n as usize) * (n as usize)
                } else {
                    n as usize
                }
            }
            Shape::Conv { image, batch, .. } => (image as usize) * (image as usize) * batch as usize,
        };
        match (id, self) {
            (BenchmarkId::Conv2d, Shape::Conv { kernel, .. }) => vec![one, (kernel * kernel) as usize],
            _ => vec![one; id.input_count()],
        }
    }

    /// Element count of the output array.
    fn output_len(self, id: BenchmarkId) -> usize {
        match (id, self) {
            (BenchmarkId::VecDot | BenchmarkId::VecMaxReduce, _) => 1,
            (_, Shape::Vector { n }) => n as usize,
            (BenchmarkId::MatMaxpool, Shape::Matrix { n }) => (n as usize / 2) * (n as usize / 2),
            (_, Shape::Matrix { n }) => (n as usize) * (n as usize),
            (_, Shape::Conv { image, kernel, batch }) => {
                let o = (image - kernel + 1) as usize;
                o * o * batch as usize
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Vector { n } => write!(f, "n={n}"),
            Shape::Matrix { n } => write!(f, "{n}x{n}"),
            Shape::Conv { image, kernel, batch } => write!(f, "{image}x{image} k={kernel} batch={batch}"),
        }
    }
}

/// Check that benchmarks can run at `sew`.
pub fn check_sew(sew: Sew) -> Result<(), BenchError> {
    if sew == Sew::E64 {
        return Err(BenchError::UnsupportedSew(64));
    }
    Ok(())
}

/// Placement of the input and output buffers in data memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub inputs: Vec<u64>,
    pub output: u64,
    pub output_bytes: usize,
    pub end: u64,
}

const BUFFER_ALIGN: u64 = 64;

fn align_up(v: u64, a: u64) -> u64 {
    v.div_ceil(a) * a
}

impl Layout {
    pub fn new(id: BenchmarkId, shape: Shape, sew: Sew) -> Layout {
        let esz = sew.bytes() as u64;
        let mut at = DEFAULT_DATA_BASE;
        let mut inputs = Vec::new();
        for len in shape.input_lens(id) {
            inputs.push(at);
            at = align_up(at + len as u64 * esz, BUFFER_ALIGN);
        }
        let output = at;
        let output_bytes = shape.output_len(id) * esz as usize;
        let end = align_up(output + output_bytes as u64, BUFFER_ALIGN);
        Layout { inputs, output, output_bytes, end }
    }

    /// Symbols bound in kernel source: `SRC_A`, `SRC_B`, `DST`.
    pub fn symbols(&self) -> Vec<(&'static str, u64)> {
        let mut v = Vec::new();
        for (name, addr) in ["SRC_A", "SRC_B"].into_iter().zip(&self.inputs) {
            v.push((name, *addr));
        }
        v.push(("DST", self.output));
        v
    }

    pub fn memory_bytes(&self) -> usize {
        (self.end - DEFAULT_DATA_BASE) as usize
    }
}

/// Largest input magnitude for a benchmark at a given element width.
///
/// At 8 bits the full signed range is used and results wrap. Wider elements
/// are kept to `2^10` (`2^9` for large products) so 32-bit sums never wrap.
pub fn input_bound(id: BenchmarkId, shape: Shape, sew: Sew) -> i64 {
    match sew {
        Sew::E8 => 127,
        _ => {
            let long_sum = match shape {
                Shape::Matrix { n } => id == BenchmarkId::MatMul && n > 1024,
                Shape::Conv { kernel, .. } => kernel >= 5,
                Shape::Vector { n } => id == BenchmarkId::VecDot && n > 1024,
            };
            if long_sum {
                1 << 9
            } else {
                1 << 10
            }
        }
    }
}

/// Deterministic inputs: one ChaCha8 stream per benchmark, keyed by `seed`.
pub fn generate_inputs(id: BenchmarkId, shape: Shape, sew: Sew, seed: u64) -> Vec<Vec<i64>> {
    let bound = input_bound(id, shape, sew);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id.index() + 1);
    let mut arrays: Vec<Vec<i64>> = shape
        .input_lens(id)
        .into_iter()
        .map(|len| (0..len).map(|_| rng.random_range(-bound..=bound)).collect())
        .collect();
    if id == BenchmarkId::VecRelu {
        let a = &mut arrays[0];
        if !a.iter().any(|&x| x < 0) {
            a[0] = -1;
        }
        if !a.iter().any(|&x| x > 0) {
            let last = a.len() - 1;
            a[last] = 1;
        }
    }
    arrays
}

/// Sign-extend the low `sew` bits of `v`.
pub fn wrap(v: i64, sew: Sew) -> i64 {
    let sh = 64 - sew.bits();
    (v << sh) >> sh
}

/// Reference outputs with two's-complement wrap-around at `sew`.
pub fn oracle(id: BenchmarkId, shape: Shape, sew: Sew, inputs: &[Vec<i64>]) -> Vec<i64> {
    let w = |v: i64| wrap(v, sew);
    let a = &inputs[0];
    let out: Vec<i64> = match id {
        BenchmarkId::VecAdd | BenchmarkId::MatAdd => a.iter().zip(&inputs[1]).map(|(x, y)| x + y).collect(),
        BenchmarkId::VecMul => a.iter().zip(&inputs[1]).map(|(x, y)| x.wrapping_mul(*y)).collect(),
        BenchmarkId::VecDot => vec![a.iter().zip(&inputs[1]).fold(0i64, |s, (x, y)| w(s + w(x * y)))],
        BenchmarkId::VecMaxReduce => vec![a.iter().copied().max().unwrap_or(i64::MIN)],
        BenchmarkId::VecRelu => a.iter().map(|&x| x.max(0)).collect(),
        BenchmarkId::MatMul => {
            let Shape::Matrix { n } = shape else { return Vec::new() };
            let n = n as usize;
            // second operand is stored column-major
            let bt = &inputs[1];
            let mut c = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let row = &a[i * n..(i + 1) * n];
                    let col = &bt[j * n..(j + 1) * n];
                    c.push(row.iter().zip(col).fold(0i64, |s, (x, y)| w(s + w(x * y))));
                }
            }
            c
        }
        BenchmarkId::MatMaxpool => {
            let Shape::Matrix { n } = shape else { return Vec::new() };
            let n = n as usize;
            let mut c = Vec::with_capacity(n * n / 4);
            for i in (0..n).step_by(2) {
                for j in (0..n).step_by(2) {
                    let m = a[i * n + j].max(a[i * n + j + 1]).max(a[(i + 1) * n + j]).max(a[(i + 1) * n + j + 1]);
                    c.push(m);
                }
            }
            c
        }
        BenchmarkId::Conv2d => {
            let Shape::Conv { image, kernel, batch } = shape else { return Vec::new() };
            let (img, k) = (image as usize, kernel as usize);
            let o = img - k + 1;
            let ker = &inputs[1];
            let mut c = Vec::with_capacity(o * o * batch as usize);
            for b in 0..batch as usize {
                let base = &a[b * img * img..(b + 1) * img * img];
                for i in 0..o {
                    for j in 0..o {
                        let mut s = 0i64;
                        for r in 0..k {
                            for q in 0..k {
                                s = w(s + w(base[(i + r) * img + j + q] * ker[r * k + q]));
                            }
                        }
                        c.push(s);
                    }
                }
            }
            c
        }
    };
    out.into_iter().map(w).collect()
}

/// Little-endian bytes of `values` at `sew`.
pub fn to_bytes(values: &[i64], sew: Sew) -> Vec<u8> {
    let n = sew.bytes() as usize;
    let mut out = Vec::with_capacity(values.len() * n);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes()[..n]);
    }
    out
}

/// A fully prepared benchmark instance.
#[derive(Debug, Clone)]
pub struct Workload {
    pub id: BenchmarkId,
    pub shape: Shape,
    pub sew: Sew,
    pub seed: u64,
    pub layout: Layout,
    pub inputs: Vec<Vec<i64>>,
    pub expected: Vec<i64>,
}

impl Workload {
    pub fn new(id: BenchmarkId, shape: Shape, sew: Sew, seed: u64) -> Result<Workload, BenchError> {
        check_sew(sew)?;
        shape.validate(id)?;
        let inputs = generate_inputs(id, shape, sew, seed);
        let expected = oracle(id, shape, sew, &inputs);
        Ok(Workload { id, shape, sew, seed, layout: Layout::new(id, shape, sew), inputs, expected })
    }

    pub fn for_profile(id: BenchmarkId, profile: Profile, sew: Sew, seed: u64) -> Result<Workload, BenchError> {
        Workload::new(id, Shape::for_profile(id, profile), sew, seed)
    }

    /// Machine state with the inputs loaded.
    pub fn machine(&self, cfg: VectorConfig) -> Result<MachineState, BenchError> {
        let mut st = MachineState::with_memory_size(cfg, self.layout.memory_bytes());
        for (addr, values) in self.layout.inputs.iter().zip(&self.inputs) {
            st.mem.load_raw(*addr, &to_bytes(values, self.sew))?;
        }
        Ok(st)
    }

    pub fn expected_bytes(&self) -> Vec<u8> {
        to_bytes(&self.expected, self.sew)
    }

    /// Whether the output buffer of `st` matches the reference.
    pub fn verify(&self, st: &MachineState) -> Result<bool, BenchError> {
        let got = st.mem.dump_raw(self.layout.output, self.layout.output_bytes)?;
        Ok(got == self.expected_bytes())
    }
}

/// Kernel source text for `id`.
pub fn kernel_text(id: BenchmarkId, variant: Variant, shape: Shape, sew: Sew) -> Result<String, BenchError> {
    check_sew(sew)?;
    shape.validate(id)?;
    Ok(kernels::kernel_source(id, variant, shape, sew, &Layout::new(id, shape, sew)))
}

/// Assembled kernel for `id`.
pub fn kernel_program(id: BenchmarkId, variant: Variant, shape: Shape, sew: Sew) -> Result<Program, BenchError> {
    Ok(assemble(&kernel_text(id, variant, shape, sew)?)?)
}

/// Result of one workload run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub cycles: u64,
    /// `None` in analytic mode.
    pub verified: Option<bool>,
    pub instructions: Option<u64>,
}

/// Run `w` and report its cycle count.
///
/// Simulation is refused up front when the analytic estimate is beyond
/// `budget`.
pub fn run_workload(
    w: &Workload,
    variant: Variant,
    mode: RunMode,
    cfg: &VectorConfig,
    timing: &TimingConfig,
    budget: u64,
) -> Result<RunOutcome, BenchError> {
    let estimate = analytic_cycles(w.id, w.shape, w.sew, variant, cfg, timing)?;
    if mode == RunMode::Analytic {
        return Ok(RunOutcome { cycles: estimate, verified: None, instructions: None });
    }
    if estimate > budget {
        return Err(BenchError::Infeasible { estimate, budget });
    }
    let program = kernel_program(w.id, variant, w.shape, w.sew)?;
    let mut st = w.machine(*cfg)?;
    let opts = SimOptions { max_cycles: budget, trace: false };
    let res = match simulate(&program, &mut st, timing, variant.sim_mode(), opts) {
        Err(SimError::Budget { limit }) => return Err(BenchError::Infeasible { estimate, budget: limit }),
        other => other?,
    };
    Ok(RunOutcome {
        cycles: res.total_cycles,
        verified: Some(w.verify(&st)?),
        instructions: Some(res.instruction_count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_match_table() {
        let s = Profile::Small.data();
        assert_eq!((s.vector_length, s.matrix_dim, s.conv.kernel, s.conv.batch), (64, 64, 3, 3));
        let m = Profile::Medium.data();
        assert_eq!((m.vector_length, m.matrix_dim, m.conv.kernel, m.conv.batch), (512, 512, 4, 4));
        let l = Profile::Large.data();
        assert_eq!((l.vector_length, l.matrix_dim, l.conv.kernel, l.conv.batch), (4096, 4096, 5, 5));
        for p in Profile::ALL {
            assert_eq!(p.data().conv.image, 1024);
            assert_eq!(p.data().conv.channels, 1);
        }
    }

    #[test]
    fn names_round_trip() {
        for id in BenchmarkId::ALL {
            assert_eq!(id.name().parse::<BenchmarkId>().unwrap(), id);
        }
        assert!(matches!("vec-sub".parse::<BenchmarkId>(), Err(BenchError::UnknownBenchmark(_))));
        assert_eq!("medium".parse::<Profile>().unwrap(), Profile::Medium);
    }

    #[test]
    fn inputs_are_deterministic() {
        for id in BenchmarkId::ALL {
            let shape = Shape::for_profile(id, Profile::Small);
            if id == BenchmarkId::Conv2d {
                continue;
            }
            assert_eq!(generate_inputs(id, shape, Sew::E32, 7), generate_inputs(id, shape, Sew::E32, 7));
            assert_ne!(generate_inputs(id, shape, Sew::E32, 7), generate_inputs(id, shape, Sew::E32, 8));
        }
    }

    #[test]
    fn inputs_respect_bound() {
        let shape = Shape::Matrix { n: 2048 };
        assert_eq!(input_bound(BenchmarkId::MatMul, shape, Sew::E32), 512);
        assert_eq!(input_bound(BenchmarkId::MatMul, Shape::Matrix { n: 64 }, Sew::E32), 1024);
        // worst-case 4096-term sum of products stays inside i32
        assert!(4096 * 512i64 * 512 < i32::MAX as i64);
        let v = generate_inputs(BenchmarkId::VecAdd, Shape::Vector { n: 4096 }, Sew::E16, 1);
        assert!(v.iter().flatten().all(|x| x.abs() <= 1024));
    }

    #[test]
    fn relu_inputs_have_both_signs() {
        let v = &generate_inputs(BenchmarkId::VecRelu, Shape::Vector { n: 64 }, Sew::E8, 3)[0];
        assert!(v.iter().any(|&x| x < 0) && v.iter().any(|&x| x > 0));
    }

    #[test]
    fn oracle_small_cases() {
        let add = oracle(BenchmarkId::VecAdd, Shape::Vector { n: 2 }, Sew::E32, &[vec![1, 2], vec![3, 4]]);
        assert_eq!(add, vec![4, 6]);
        let pool = oracle(BenchmarkId::MatMaxpool, Shape::Matrix { n: 2 }, Sew::E32, &[vec![1, 2, 3, 4]]);
        assert_eq!(pool, vec![4]);
        let ones = vec![1i64; 25];
        let conv =
            oracle(BenchmarkId::Conv2d, Shape::Conv { image: 5, kernel: 3, batch: 1 }, Sew::E32, &[ones, vec![1; 9]]);
        assert_eq!(conv, vec![9; 9]);
        // 8-bit wrap-around
        let wrapped = oracle(BenchmarkId::VecAdd, Shape::Vector { n: 1 }, Sew::E8, &[vec![100], vec![100]]);
        assert_eq!(wrapped, vec![-56]);
        let dot = oracle(BenchmarkId::VecDot, Shape::Vector { n: 3 }, Sew::E32, &[vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(dot, vec![32]);
    }

    #[test]
    fn layout_is_aligned_and_disjoint() {
        let l = Layout::new(BenchmarkId::VecAdd, Shape::Vector { n: 65 }, Sew::E32);
        assert_eq!(l.inputs[0], DEFAULT_DATA_BASE);
        assert!(l.inputs[1] >= l.inputs[0] + 260 && l.inputs[1].is_multiple_of(64));
        assert!(l.output >= l.inputs[1] + 260);
    }

    #[test]
    fn sew64_rejected() {
        assert!(matches!(
            Workload::new(BenchmarkId::VecAdd, Shape::Vector { n: 4 }, Sew::E64, 0),
            Err(BenchError::UnsupportedSew(64))
        ));
    }
}
