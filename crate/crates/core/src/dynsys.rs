//! Concrete zero-entropy systems, observed along orbits.
//!
//! An [`ObservableSystem`] is the sequence `n ↦ f(T^n x)` for a fixed system,
//! observable and starting point. Block orbits restart a (possibly different)
//! system at each block start, which is what the strong MOMO statistics
//! consume.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{bfree_set, MultipleBase};
use crate::error::{check_range, Error, Result};
use crate::set::IndexSet;

/// `n ↦ f(T^n x)` with `|f(T^n x)| <= bound()`.
pub trait ObservableSystem: Send + Sync + fmt::Debug {
    fn eval(&self, n: u64) -> Complex64;

    fn bound(&self) -> f64;

    /// Inclusive range of `n` the system can be evaluated on; `None` means
    /// unbounded above.
    fn domain(&self) -> (u64, Option<u64>) {
        (0, None)
    }

    fn checked_eval(&self, n: u64) -> Result<Complex64> {
        let (lo, hi) = self.domain();
        check_range(n, lo, hi.unwrap_or(u64::MAX))?;
        Ok(self.eval(n))
    }
}

pub type SharedSystem = Arc<dyn ObservableSystem>;

/// `(sqrt 5 - 1) / 2`.
pub const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_9;

/// `a*b` as an unevaluated sum `hi + lo`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Fractional part of `hi + lo` as a double-double, `hi` in `[0, 1)`.
#[inline]
fn frac2(hi: f64, lo: f64) -> (f64, f64) {
    let f = hi - hi.floor();
    let t = f + lo;
    let shift = t.floor();
    (f - shift, lo)
}

/// Observable `e(m x)` on the circle rotation `x ↦ x + alpha`.
#[derive(Clone, Debug)]
pub struct Rotation {
    alpha: f64,
    x0: f64,
    m: i64,
    // frac(m alpha) and frac(m x0), double-double
    step: (f64, f64),
    start: (f64, f64),
}

impl Rotation {
    pub fn new(alpha: f64, x0: f64, m: i64) -> Self {
        let mf = m as f64;
        let (p, e) = two_prod(mf, alpha);
        let step = frac2(p, e);
        let (p, e) = two_prod(mf, x0);
        let start = frac2(p, e);
        Rotation { alpha, x0, m, step, start }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn frequency(&self) -> i64 {
        self.m
    }

    /// `m (x0 + n alpha) mod 1`.
    pub fn phase(&self, n: u64) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let (p, e) = two_prod(nf, self.step.0);
        let (f, e) = frac2(p, e + nf * self.step.1);
        let t = f + e + self.start.0 + self.start.1;
        t - t.floor()
    }
}

impl ObservableSystem for Rotation {
    fn eval(&self, n: u64) -> Complex64 {
        if self.m == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let (s, c) = (TAU * self.phase(n)).sin_cos();
        Complex64::new(c, s)
    }

    fn bound(&self) -> f64 {
        1.0
    }
}

pub fn make_rotation(alpha: f64, x0: f64, m: i64) -> SharedSystem {
    Arc::new(Rotation::new(alpha, x0, m))
}

/// Rotations started at `x0 = i / size`, `i = 0..size`.
pub fn rotation_grid(alpha: f64, m: i64, size: usize) -> Vec<SharedSystem> {
    (0..size).map(|i| make_rotation(alpha, i as f64 / size as f64, m)).collect()
}

/// Thue–Morse bit `t(n)`: parity of the binary digit sum.
#[inline]
pub fn thue_morse_bit(n: u64) -> u8 {
    (n.count_ones() & 1) as u8
}

#[derive(Clone, Debug)]
pub struct ThueMorse {
    offset: u64,
    weights: [Complex64; 2],
}

impl ObservableSystem for ThueMorse {
    fn eval(&self, n: u64) -> Complex64 {
        self.weights[thue_morse_bit(n.wrapping_add(self.offset)) as usize]
    }

    fn bound(&self) -> f64 {
        self.weights[0].norm().max(self.weights[1].norm())
    }
}

/// `n ↦ w_{t(n + offset)}`.
pub fn make_thue_morse(offset: u64, w0: Complex64, w1: Complex64) -> Result<SharedSystem> {
    if w0.norm() > 1.0 || w1.norm() > 1.0 {
        return Err(Error::Invalid("Thue-Morse weights must have modulus <= 1".into()));
    }
    Ok(Arc::new(ThueMorse { offset, weights: [w0, w1] }))
}

/// Indicator of the ℬ-free integers, tabulated up to a horizon.
#[derive(Clone, Debug)]
pub struct BFree {
    set: IndexSet,
}

impl BFree {
    pub fn set(&self) -> &IndexSet {
        &self.set
    }
}

impl ObservableSystem for BFree {
    fn eval(&self, n: u64) -> Complex64 {
        assert!(n <= self.set.horizon(), "B-free indicator queried at {n} beyond horizon");
        Complex64::new(if self.set.contains(n) { 1.0 } else { 0.0 }, 0.0)
    }

    fn bound(&self) -> f64 {
        1.0
    }

    fn domain(&self) -> (u64, Option<u64>) {
        (0, Some(self.set.horizon()))
    }
}

pub fn make_bfree(base: &MultipleBase, table_horizon: u64) -> SharedSystem {
    Arc::new(BFree { set: bfree_set(base, table_horizon) })
}

#[derive(Clone, Debug)]
pub struct Constant(pub Complex64);

impl ObservableSystem for Constant {
    fn eval(&self, _n: u64) -> Complex64 {
        self.0
    }

    fn bound(&self) -> f64 {
        self.0.norm()
    }
}

/// `n ↦ inner(n + shift)`: the same observable started at `T^shift x`.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub inner: SharedSystem,
    pub shift: u64,
}

impl ObservableSystem for Shifted {
    fn eval(&self, n: u64) -> Complex64 {
        self.inner.eval(n + self.shift)
    }

    fn bound(&self) -> f64 {
        self.inner.bound()
    }

    fn domain(&self) -> (u64, Option<u64>) {
        let (lo, hi) = self.inner.domain();
        (lo.saturating_sub(self.shift), hi.map(|h| h.saturating_sub(self.shift)))
    }
}

/// Strictly increasing block starts `b_1 < b_2 < ...`; block `k` is
/// `[b_k, b_{k+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    starts: Vec<u64>,
    // gap_floor[k] = min_{j>=k} (b_{j+1} - b_j)
    gap_floor: Vec<u64>,
}

impl BlockPartition {
    pub fn new(starts: Vec<u64>) -> Result<Self> {
        if starts.len() < 2 {
            return Err(Error::Invalid("a partition needs at least two boundaries".into()));
        }
        if starts[0] == 0 {
            return Err(Error::Invalid("block starts must be positive".into()));
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("block starts must be strictly increasing".into()));
        }
        let mut gap_floor: Vec<u64> = starts.windows(2).map(|w| w[1] - w[0]).collect();
        for k in (0..gap_floor.len().saturating_sub(1)).rev() {
            gap_floor[k] = gap_floor[k].min(gap_floor[k + 1]);
        }
        Ok(BlockPartition { starts, gap_floor })
    }

    /// As [`BlockPartition::new`], logging a warning when the last gap floor
    /// is below `min_final_gap`.
    pub fn with_min_gap(starts: Vec<u64>, min_final_gap: u64) -> Result<Self> {
        let p = Self::new(starts)?;
        let last = *p.gap_floor.last().unwrap();
        if last < min_final_gap {
            log::warn!("final block gap floor {last} is below the requested minimum {min_final_gap}");
        }
        Ok(p)
    }

    /// `b_k = k²` for `k = 1..=blocks + 1`.
    pub fn squares(blocks: u64) -> Self {
        Self::new((1..=blocks + 1).map(|k| k * k).collect()).unwrap()
    }

    /// `b_k = 1 + (k - 1) * step`.
    pub fn linear(step: u64, blocks: u64) -> Result<Self> {
        Self::new((0..=blocks).map(|k| 1 + k * step).collect())
    }

    /// Number of complete blocks.
    pub fn blocks(&self) -> usize {
        self.starts.len() - 1
    }

    /// `b_1, ..., b_{K+1}`.
    pub fn starts(&self) -> &[u64] {
        &self.starts
    }

    /// Gap floors for blocks `1..=K`; non-decreasing.
    pub fn gap_floors(&self) -> &[u64] {
        &self.gap_floor
    }

    /// 0-based index of the block containing `n`.
    pub fn block_of(&self, n: u64) -> Option<usize> {
        if n < self.starts[0] || n >= *self.starts.last().unwrap() {
            return None;
        }
        Some(self.starts.partition_point(|&b| b <= n) - 1)
    }

    /// The first `blocks` blocks only.
    pub fn prefix(&self, blocks: usize) -> Result<Self> {
        if blocks == 0 || blocks > self.blocks() {
            return Err(Error::Invalid(format!("cannot take {blocks} of {} blocks", self.blocks())));
        }
        Self::new(self.starts[..=blocks].to_vec())
    }
}

/// Orbit that restarts `systems[k]` at `b_k`: `n ↦ systems[k](n - b_k)`.
#[derive(Clone, Debug)]
pub struct BlockOrbit {
    partition: BlockPartition,
    systems: Vec<SharedSystem>,
    bound: f64,
}

impl BlockOrbit {
    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn systems(&self) -> &[SharedSystem] {
        &self.systems
    }
}

impl ObservableSystem for BlockOrbit {
    fn eval(&self, n: u64) -> Complex64 {
        let k = self.partition.block_of(n).unwrap_or_else(|| panic!("{n} outside the block partition"));
        self.systems[k].eval(n - self.partition.starts[k])
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn domain(&self) -> (u64, Option<u64>) {
        (self.partition.starts[0], Some(self.partition.starts.last().unwrap() - 1))
    }
}

pub fn make_block_orbit(partition: BlockPartition, systems: Vec<SharedSystem>) -> Result<BlockOrbit> {
    if systems.len() != partition.blocks() {
        return Err(Error::Invalid(format!("{} systems for {} blocks", systems.len(), partition.blocks())));
    }
    let bound = systems.iter().map(|s| s.bound()).fold(0.0, f64::max);
    Ok(BlockOrbit { partition, systems, bound })
}

/// A cube root of unity `e^{2πij/3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseSigma3(u8);

impl PhaseSigma3 {
    pub fn new(j: u8) -> Result<Self> {
        if j > 2 {
            return Err(Error::Invalid(format!("Σ3 index {j} not in {{0,1,2}}")));
        }
        Ok(PhaseSigma3(j))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn value(self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.0 as f64 / 3.0)
    }
}

/// Tolerance on the cone boundary `arg = ±π/3`.
const CONE_TOL: f64 = 1e-12;

/// Smallest `j` with `arg(e^{2πij/3} z) ∈ [-π/3, π/3]`; `j = 0` for `z = 0`.
pub fn align_to_cone(z: Complex64) -> PhaseSigma3 {
    if z == Complex64::new(0.0, 0.0) {
        return PhaseSigma3(0);
    }
    let limit = std::f64::consts::FRAC_PI_3 + CONE_TOL;
    (0..3u8)
        .map(PhaseSigma3)
        .find(|e| (e.value() * z).arg().abs() <= limit)
        .expect("three closed sectors of width 2π/3 cover the circle")
}

/// Spacing rule for block starts in a [`SystemDescriptor::Blocks`] orbit.
#[derive(Clone, Debug, PartialEq)]
pub enum Spacing {
    Squares,
    Linear(u64),
}

/// Which system restarts in every block.
#[derive(Clone, Debug, PartialEq)]
pub enum InnerKind {
    Rotation { alpha: f64, m: i64 },
    ThueMorse { w0: Complex64, w1: Complex64 },
}

/// Textual system description, `kind[:key=value[;key=value]...]`.
///
/// * `rotation:alpha=golden;x0=0;m=1`
/// * `thuemorse:offset=0;w0=1;w1=-1`
/// * `bfree:base=2,3` or `bfree:base=squares`
/// * `blocks:inner=rotation;alpha=golden;m=1;spacing=squares;count=1000;seed=7`
///   (rotation phases `x_k` or Thue–Morse offsets drawn from the seed)
///
/// `alpha` accepts a number or `golden`; complex weights are `re` or `re,im`.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemDescriptor {
    Rotation { alpha: f64, x0: f64, m: i64 },
    ThueMorse { offset: u64, w0: Complex64, w1: Complex64 },
    BFree { base: BaseSpec },
    Blocks { inner: InnerKind, spacing: Spacing, count: u64, seed: u64 },
}

/// A ℬ description: explicit generators or all prime squares.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseSpec {
    Explicit(Vec<u64>),
    PrimeSquares,
}

impl BaseSpec {
    pub fn resolve(&self, n_max: u64) -> Result<MultipleBase> {
        match self {
            BaseSpec::Explicit(g) => Ok(MultipleBase::new(g.iter().copied())?.truncated(n_max)),
            BaseSpec::PrimeSquares => Ok(MultipleBase::prime_squares(n_max)),
        }
    }
}

impl FromStr for BaseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "squares" {
            return Ok(BaseSpec::PrimeSquares);
        }
        if s.is_empty() || s == "none" {
            return Ok(BaseSpec::Explicit(Vec::new()));
        }
        s.split(',')
            .map(|g| g.trim().parse::<u64>().map_err(|_| Error::Config(format!("bad generator '{g}'"))))
            .collect::<Result<Vec<_>>>()
            .map(BaseSpec::Explicit)
    }
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseSpec::PrimeSquares => write!(f, "squares"),
            BaseSpec::Explicit(g) if g.is_empty() => write!(f, "none"),
            BaseSpec::Explicit(g) => {
                let parts: Vec<String> = g.iter().map(u64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.trim() {
        "golden" => Ok(GOLDEN_CONJUGATE),
        t => t.parse().map_err(|_| Error::Config(format!("{key}: bad number '{v}'"))),
    }
}

fn parse_int<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: bad integer '{v}'")))
}

pub(crate) fn parse_complex(key: &str, v: &str) -> Result<Complex64> {
    let mut parts = v.split(',');
    let re = parse_f64(key, parts.next().unwrap_or(""))?;
    let im = parts.next().map(|p| parse_f64(key, p)).transpose()?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(Error::Config(format!("{key}: bad complex '{v}'")));
    }
    Ok(Complex64::new(re, im))
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{},{}", z.re, z.im)
    }
}

impl FromStr for SystemDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("system parameter '{item}' is not key=value")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str| params.remove(key);
        let desc = match kind {
            "rotation" => SystemDescriptor::Rotation {
                alpha: take("alpha").map(|v| parse_f64("alpha", &v)).transpose()?.unwrap_or(GOLDEN_CONJUGATE),
                x0: take("x0").map(|v| parse_f64("x0", &v)).transpose()?.unwrap_or(0.0),
                m: take("m").map(|v| parse_int("m", &v)).transpose()?.unwrap_or(1),
            },
            "thuemorse" => SystemDescriptor::ThueMorse {
                offset: take("offset").map(|v| parse_int("offset", &v)).transpose()?.unwrap_or(0),
                w0: take("w0").map(|v| parse_complex("w0", &v)).transpose()?.unwrap_or(Complex64::new(1.0, 0.0)),
                w1: take("w1").map(|v| parse_complex("w1", &v)).transpose()?.unwrap_or(Complex64::new(-1.0, 0.0)),
            },
            "bfree" => SystemDescriptor::BFree {
                base: take("base").map(|v| v.parse()).transpose()?.unwrap_or(BaseSpec::PrimeSquares),
            },
            "blocks" => {
                let inner = match take("inner").as_deref().unwrap_or("rotation") {
                    "rotation" => InnerKind::Rotation {
                        alpha: take("alpha").map(|v| parse_f64("alpha", &v)).transpose()?.unwrap_or(GOLDEN_CONJUGATE),
                        m: take("m").map(|v| parse_int("m", &v)).transpose()?.unwrap_or(1),
                    },
                    "thuemorse" => InnerKind::ThueMorse {
                        w0: take("w0")
                            .map(|v| parse_complex("w0", &v))
                            .transpose()?
                            .unwrap_or(Complex64::new(1.0, 0.0)),
                        w1: take("w1")
                            .map(|v| parse_complex("w1", &v))
                            .transpose()?
                            .unwrap_or(Complex64::new(-1.0, 0.0)),
                    },
                    other => return Err(Error::Config(format!("unknown inner system '{other}'"))),
                };
                let spacing = match take("spacing").as_deref().unwrap_or("squares") {
                    "squares" => Spacing::Squares,
                    other => match other.strip_prefix("linear") {
                        Some(step) => Spacing::Linear(parse_int("spacing", step.trim_start_matches(':'))?),
                        None => return Err(Error::Config(format!("unknown spacing '{other}'"))),
                    },
                };
                SystemDescriptor::Blocks {
                    inner,
                    spacing,
                    count: take("count").map(|v| parse_int("count", &v)).transpose()?.unwrap_or(1000),
                    seed: take("seed").map(|v| parse_int("seed", &v)).transpose()?.unwrap_or(0),
                }
            }
            other => return Err(Error::Config(format!("unknown system kind '{other}'"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(Error::Config(format!("unknown parameter '{k}' for {kind}")));
        }
        Ok(desc)
    }
}

impl fmt::Display for SystemDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemDescriptor::Rotation { alpha, x0, m } => write!(f, "rotation:alpha={alpha};x0={x0};m={m}"),
            SystemDescriptor::ThueMorse { offset, w0, w1 } => {
                write!(f, "thuemorse:offset={offset};w0={};w1={}", fmt_complex(*w0), fmt_complex(*w1))
            }
            SystemDescriptor::BFree { base } => write!(f, "bfree:base={base}"),
            SystemDescriptor::Blocks { inner, spacing, count, seed } => {
                write!(f, "blocks:")?;
                match inner {
                    InnerKind::Rotation { alpha, m } => write!(f, "inner=rotation;alpha={alpha};m={m}")?,
                    InnerKind::ThueMorse { w0, w1 } => {
                        write!(f, "inner=thuemorse;w0={};w1={}", fmt_complex(*w0), fmt_complex(*w1))?
                    }
                }
                match spacing {
                    Spacing::Squares => write!(f, ";spacing=squares")?,
                    Spacing::Linear(step) => write!(f, ";spacing=linear:{step}")?,
                }
                write!(f, ";count={count};seed={seed}")
            }
        }
    }
}

impl SystemDescriptor {
    /// Instantiates the system; `horizon` bounds tabulated systems.
    pub fn build(&self, horizon: u64) -> Result<SharedSystem> {
        match self {
            SystemDescriptor::Rotation { alpha, x0, m } => Ok(make_rotation(*alpha, *x0, *m)),
            SystemDescriptor::ThueMorse { offset, w0, w1 } => make_thue_morse(*offset, *w0, *w1),
            SystemDescriptor::BFree { base } => Ok(make_bfree(&base.resolve(horizon)?, horizon)),
            SystemDescriptor::Blocks { .. } => Ok(Arc::new(self.build_blocks()?)),
        }
    }

    /// Partition and per-block systems of a `blocks` descriptor.
    pub fn build_blocks(&self) -> Result<BlockOrbit> {
        let SystemDescriptor::Blocks { inner, spacing, count, seed } = self else {
            return Err(Error::Invalid(format!("{self} is not a block orbit")));
        };
        let partition = match spacing {
            Spacing::Squares => BlockPartition::squares(*count),
            Spacing::Linear(step) => BlockPartition::linear(*step, *count)?,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        let systems = (0..*count)
            .map(|_| match inner {
                InnerKind::Rotation { alpha, m } => Ok(make_rotation(*alpha, rng.gen::<f64>(), *m)),
                InnerKind::ThueMorse { w0, w1 } => make_thue_morse(rng.gen_range(0..1u64 << 32), *w0, *w1),
            })
            .collect::<Result<Vec<_>>>()?;
        make_block_orbit(partition, systems)
    }
}
