//! Generalized Faure low-discrepancy sequences and a deterministic,
//! block-reduced quasi-Monte Carlo integrator over the Gaussian-weighted
//! mode phase space.
//!
//! Points are generated statelessly from their index, so any scheduler can
//! evaluate blocks in any order; the reduction contract ([`combine`]) sums
//! block partials in fixed index order, which makes every estimate
//! bit-identical no matter how many workers produced the partials.

use crate::model::PhasePoint;
use crate::specfun;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmcError {
    /// requested base is not prime
    BaseNotPrime,
    /// base must be at least the dimension (and at least 2)
    BaseTooSmall,
    /// index + skip does not fit the supported digit width
    DigitOverflow,
    /// dimension must be positive
    ZeroDimension,
    /// point counts must be even and positive (half-set error estimate)
    BadPointCount,
    /// the integrand produced a non-finite value at this point index
    NonFinite(u64),
    /// a coordinate left (0, 1)
    UniformOutOfRange,
}

impl fmt::Display for QmcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QmcError::BaseNotPrime => write!(f, "sequence base must be prime"),
            QmcError::BaseTooSmall => write!(f, "sequence base must be >= dimension"),
            QmcError::DigitOverflow => write!(f, "point index exceeds digit capacity"),
            QmcError::ZeroDimension => write!(f, "dimension must be positive"),
            QmcError::BadPointCount => write!(f, "n_points must be positive and even"),
            QmcError::NonFinite(i) => write!(f, "non-finite integrand value at point index {i}"),
            QmcError::UniformOutOfRange => write!(f, "uniform coordinate outside (0, 1)"),
        }
    }
}

impl core::error::Error for QmcError {}

/// Largest digit width supported for point indices.
pub const MAX_DIGITS: usize = 32;

/// Fixed block length of the deterministic reduction contract.
pub const QMC_BLOCK: u64 = 4096;

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime >= max(n, 2).
pub fn smallest_prime_geq(n: u32) -> u32 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Configuration of a generalized Faure sequence.
///
/// `scramble_seed = 0` disables both the left scrambling and the digital
/// shift, leaving the classical Faure construction (Pascal-matrix powers in
/// the smallest prime base >= dimension). Any other seed deterministically
/// selects a nonsingular lower-triangular scrambling matrix and a digital
/// shift per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaureConfig {
    pub dimension: usize,
    pub base: u32,
    pub scramble_seed: u64,
    /// Initial points discarded; defaults to `base^4`, a standard guard
    /// against the poor initial segment of the sequence.
    pub skip: u64,
}

impl FaureConfig {
    pub fn new(dimension: usize) -> Result<Self, QmcError> {
        if dimension == 0 {
            return Err(QmcError::ZeroDimension);
        }
        let base = smallest_prime_geq(dimension as u32);
        Ok(Self {
            dimension,
            base,
            scramble_seed: 0,
            skip: (base as u64).pow(4),
        })
    }

    pub fn validate(&self) -> Result<(), QmcError> {
        if self.dimension == 0 {
            return Err(QmcError::ZeroDimension);
        }
        if !is_prime(self.base) {
            return Err(QmcError::BaseNotPrime);
        }
        if (self.base as usize) < self.dimension {
            return Err(QmcError::BaseTooSmall);
        }
        Ok(())
    }
}

/// splitmix64; used only to fill scrambling matrices and digital shifts.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Precomputed generator state for one sequence: effective generator
/// matrices (scramble times Pascal power, mod base) and shift digits.
#[derive(Debug, Clone)]
pub struct FaurePlan {
    pub cfg: FaureConfig,
    pub n_points: u64,
    n_digits: usize,
    /// dimension x n_digits x n_digits, row-major, entries mod base
    gens: Vec<u32>,
    /// dimension x n_digits
    shifts: Vec<u32>,
    min_cell: f64,
}

impl FaurePlan {
    pub fn new(cfg: &FaureConfig, n_points: u64) -> Result<Self, QmcError> {
        cfg.validate()?;
        if n_points == 0 || n_points % 2 != 0 {
            return Err(QmcError::BadPointCount);
        }
        let b = cfg.base as u64;
        let max_index = cfg.skip + n_points - 1;
        let mut n_digits = 1usize;
        let mut cap = b;
        while cap <= max_index {
            if n_digits == MAX_DIGITS {
                return Err(QmcError::DigitOverflow);
            }
            cap = cap.saturating_mul(b);
            n_digits += 1;
        }
        let d = n_digits;
        let p = cfg.base as u64;

        // binomial table mod p
        let mut binom = vec![0u64; d * d];
        for n in 0..d {
            binom[n * d] = 1;
            for m in 1..=n {
                binom[n * d + m] = (binom[(n - 1) * d + m - 1]
                    + if m <= n - 1 { binom[(n - 1) * d + m] } else { 0 })
                    % p;
            }
        }

        let mut gens = vec![0u32; cfg.dimension * d * d];
        let mut shifts = vec![0u32; cfg.dimension * d];
        for j in 0..cfg.dimension {
            // Pascal power: C_{m,n} = binom(n, m) j^{n-m} mod p (upper triangular)
            let mut c = vec![0u64; d * d];
            for m in 0..d {
                for n in m..d {
                    let mut pw = 1u64;
                    for _ in 0..(n - m) {
                        pw = pw * j as u64 % p;
                    }
                    c[m * d + n] = binom[n * d + m] * pw % p;
                }
            }
            let eff = if cfg.scramble_seed == 0 {
                c
            } else {
                // nonsingular lower-triangular left scramble, then shift
                let mut stream = cfg
                    .scramble_seed
                    .wrapping_add((j as u64).wrapping_mul(0xa076_1d64_78bd_642f));
                let mut l = vec![0u64; d * d];
                for r in 0..d {
                    for s in 0..r {
                        l[r * d + s] = splitmix64(&mut stream) % p;
                    }
                    l[r * d + r] = 1 + splitmix64(&mut stream) % (p - 1);
                }
                for m in 0..d {
                    shifts[j * d + m] = (splitmix64(&mut stream) % p) as u32;
                }
                // eff = L * C mod p
                let mut e = vec![0u64; d * d];
                for r in 0..d {
                    for s in 0..d {
                        let mut acc = 0u64;
                        for t in 0..d {
                            acc += l[r * d + t] * c[t * d + s] % p;
                        }
                        e[r * d + s] = acc % p;
                    }
                }
                e
            };
            for (dst, src) in gens[j * d * d..(j + 1) * d * d].iter_mut().zip(eff.iter()) {
                *dst = *src as u32;
            }
        }

        let mut min_cell = 1.0f64;
        for _ in 0..d {
            min_cell /= p as f64;
        }
        Ok(Self {
            cfg: *cfg,
            n_points,
            n_digits,
            gens,
            shifts,
            min_cell,
        })
    }

    #[inline]
    pub fn n_blocks(&self) -> u64 {
        self.n_points.div_ceil(QMC_BLOCK)
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.cfg.dimension
    }

    /// Uniform coordinates of the point at `index` (0-based, before skip).
    pub fn uniform_into(&self, index: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cfg.dimension);
        let p = self.cfg.base as u64;
        let d = self.n_digits;
        let mut digits = [0u64; MAX_DIGITS];
        let mut i = self.cfg.skip + index;
        for dig in digits.iter_mut().take(d) {
            *dig = i % p;
            i /= p;
        }
        let pf = self.cfg.base as f64;
        for (j, slot) in out.iter_mut().enumerate() {
            let g = &self.gens[j * d * d..(j + 1) * d * d];
            let sh = &self.shifts[j * d..(j + 1) * d];
            // Horner from the least significant output digit
            let mut v = 0.0f64;
            for m in (0..d).rev() {
                let mut acc = 0u64;
                for (n, &dig) in digits.iter().enumerate().take(d).skip(m) {
                    acc += g[m * d + n] as u64 * dig;
                }
                let y = (acc + sh[m] as u64) % p;
                v = (v + y as f64) / pf;
            }
            *slot = v;
        }
    }

    /// Standard-normal coordinates of the point at `index`. Exact zeros are
    /// nudged to half the smallest representable cell before the inverse-CDF
    /// map so the result stays finite.
    pub fn gaussian_into(&self, index: u64, u: &mut [f64], z: &mut [f64]) {
        self.uniform_into(index, u);
        for (zi, &ui) in z.iter_mut().zip(u.iter()) {
            let ui = if ui == 0.0 { 0.5 * self.min_cell } else { ui };
            *zi = specfun::inv_norm_cdf(ui).expect("uniform coordinate in (0,1)");
        }
    }
}

/// Coordinates of one point of the sequence, in [0, 1)^dimension.
pub fn faure_point(cfg: &FaureConfig, index: u64) -> Result<Vec<f64>, QmcError> {
    let plan = FaurePlan::new(cfg, index.div_ceil(2).max(1) * 2 + 2)?;
    let mut out = vec![0.0; cfg.dimension];
    plan.uniform_into(index, &mut out);
    Ok(out)
}

/// Coordinate-wise inverse normal CDF. Exact zeros are nudged to the
/// smallest positive double so the map is total on [0, 1).
pub fn map_to_gaussian(u: &[f64]) -> Result<Vec<f64>, QmcError> {
    let mut z = Vec::with_capacity(u.len());
    for &ui in u {
        let ui = if ui == 0.0 { 0.5 * f64::MIN_POSITIVE } else { ui };
        if !(ui > 0.0 && ui < 1.0) {
            return Err(QmcError::UniformOutOfRange);
        }
        z.push(specfun::inv_norm_cdf(ui).expect("checked domain"));
    }
    Ok(z)
}

/// A quasi-Monte Carlo estimate: the mean over the point set, and the
/// difference between the two half-set estimates as an error proxy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcEstimate {
    pub value: f64,
    pub n_points: u64,
    pub error_estimate: f64,
}

/// A vector-valued integrand over phase points. `Scratch` carries per-worker
/// buffers so evaluation allocates nothing per point.
pub trait MultiIntegrand: Sync {
    type Scratch: Send;
    fn n_outputs(&self) -> usize;
    fn new_scratch(&self) -> Self::Scratch;
    fn eval(&self, point: &PhasePoint, scratch: &mut Self::Scratch, out: &mut [f64]);
}

struct FnIntegrand<F>(F);

impl<F: Fn(&PhasePoint) -> f64 + Sync> MultiIntegrand for FnIntegrand<F> {
    type Scratch = ();
    fn n_outputs(&self) -> usize {
        1
    }
    fn new_scratch(&self) {}
    fn eval(&self, point: &PhasePoint, _scratch: &mut (), out: &mut [f64]) {
        out[0] = (self.0)(point);
    }
}

/// Partial sums of one index block, classified into the four global index
/// quarters so the combiner can form half-set splits without re-evaluating
/// anything.
#[derive(Debug, Clone)]
pub struct BlockPartial {
    pub block: u64,
    /// quarter-major: `sums[q * n_outputs + k]`
    pub sums: Vec<f64>,
    pub counts: [u64; 4],
    pub nonfinite: Option<u64>,
}

#[inline]
fn quarter_of(index: u64, n_points: u64) -> usize {
    // balanced index quarters [0, n/4), [n/4, n/2), [n/2, 3n/4), [3n/4, n)
    ((4 * index) / n_points).min(3) as usize
}

/// Evaluate one block of points in index order.
pub fn eval_block<I: MultiIntegrand>(
    integrand: &I,
    plan: &FaurePlan,
    block: u64,
    scratch: &mut I::Scratch,
) -> BlockPartial {
    let m = integrand.n_outputs();
    let mut sums = vec![0.0f64; 4 * m];
    let mut counts = [0u64; 4];
    let mut out = vec![0.0f64; m];
    let mut u = vec![0.0f64; plan.dimension()];
    let mut z = vec![0.0f64; plan.dimension()];
    let start = block * QMC_BLOCK;
    let stop = (start + QMC_BLOCK).min(plan.n_points);
    let mut nonfinite = None;
    for index in start..stop {
        plan.gaussian_into(index, &mut u, &mut z);
        let point = PhasePoint::from_gaussian(&z);
        integrand.eval(&point, scratch, &mut out);
        let q = quarter_of(index, plan.n_points);
        counts[q] += 1;
        let acc = &mut sums[q * m..(q + 1) * m];
        for (a, &v) in acc.iter_mut().zip(out.iter()) {
            if !v.is_finite() && nonfinite.is_none() {
                nonfinite = Some(index);
            }
            *a += v;
        }
    }
    BlockPartial {
        block,
        sums,
        counts,
        nonfinite,
    }
}

/// The three balanced pairings of index quarters into halves: consecutive
/// (12|34), interleaved (13|24), and folded (14|23).
const HALF_SPLITS: [[usize; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];

/// Combine block partials, in block order, into per-output estimates.
/// The summation order is fixed by the block index, so the result does not
/// depend on how the partials were produced. The error estimate is the
/// largest difference between the two half-set means over the three
/// balanced half pairings; a single pairing can agree by accident even when
/// the estimate still carries error, and the orthogonal contrasts make that
/// failure mode rare.
pub fn combine(
    plan: &FaurePlan,
    n_outputs: usize,
    partials: &[BlockPartial],
) -> Result<Vec<QmcEstimate>, QmcError> {
    debug_assert_eq!(partials.len() as u64, plan.n_blocks());
    let mut sums = vec![0.0f64; 4 * n_outputs];
    let mut counts = [0u64; 4];
    let mut bad: Option<u64> = None;
    for (i, part) in partials.iter().enumerate() {
        debug_assert_eq!(part.block, i as u64, "partials must arrive in block order");
        if let Some(idx) = part.nonfinite {
            bad = Some(bad.map_or(idx, |b| b.min(idx)));
        }
        for q in 0..4 {
            counts[q] += part.counts[q];
            for k in 0..n_outputs {
                sums[q * n_outputs + k] += part.sums[q * n_outputs + k];
            }
        }
    }
    if let Some(idx) = bad {
        return Err(QmcError::NonFinite(idx));
    }
    let n = plan.n_points as f64;
    Ok((0..n_outputs)
        .map(|k| {
            let total: f64 = (0..4).map(|q| sums[q * n_outputs + k]).sum();
            let mut err = 0.0f64;
            for split in HALF_SPLITS {
                let (a, b) = (split[0], split[1]);
                let (c, d) = (split[2], split[3]);
                let na = counts[a] + counts[b];
                let nb = counts[c] + counts[d];
                if na == 0 || nb == 0 {
                    continue;
                }
                let mean_a =
                    (sums[a * n_outputs + k] + sums[b * n_outputs + k]) / na as f64;
                let mean_b =
                    (sums[c * n_outputs + k] + sums[d * n_outputs + k]) / nb as f64;
                err = err.max((mean_a - mean_b).abs());
            }
            QmcEstimate {
                value: total / n,
                n_points: plan.n_points,
                error_estimate: err,
            }
        })
        .collect())
}

/// Serial deterministic integration of a vector-valued integrand.
pub fn integrate_many<I: MultiIntegrand>(
    integrand: &I,
    cfg: &FaureConfig,
    n_points: u64,
) -> Result<Vec<QmcEstimate>, QmcError> {
    let plan = FaurePlan::new(cfg, n_points)?;
    let mut scratch = integrand.new_scratch();
    let mut partials = Vec::with_capacity(plan.n_blocks() as usize);
    for block in 0..plan.n_blocks() {
        partials.push(eval_block(integrand, &plan, block, &mut scratch));
    }
    combine(&plan, integrand.n_outputs(), &partials)
}

/// Mean of `f` over the mapped Gaussian point set.
pub fn integrate<F: Fn(&PhasePoint) -> f64 + Sync>(
    f: F,
    cfg: &FaureConfig,
    n_points: u64,
) -> Result<QmcEstimate, QmcError> {
    Ok(integrate_many(&FnIntegrand(f), cfg, n_points)?[0])
}

/// Star-discrepancy proxy of a 2D projection: the maximum deviation of the
/// empirical CDF from uniform over an `m x m` corner grid.
pub fn discrepancy_proxy(
    cfg: &FaureConfig,
    n_points: u64,
    coords: (usize, usize),
    m: usize,
) -> Result<f64, QmcError> {
    let plan = FaurePlan::new(cfg, n_points)?;
    let mut counts = vec![0u64; m * m];
    let mut u = vec![0.0; cfg.dimension];
    for index in 0..n_points {
        plan.uniform_into(index, &mut u);
        let a = ((u[coords.0] * m as f64) as usize).min(m - 1);
        let b = ((u[coords.1] * m as f64) as usize).min(m - 1);
        counts[a * m + b] += 1;
    }
    // prefix sums -> empirical counts in [0, i/m) x [0, j/m)
    let mut prefix = vec![0u64; (m + 1) * (m + 1)];
    for i in 0..m {
        for j in 0..m {
            prefix[(i + 1) * (m + 1) + j + 1] = counts[i * m + j]
                + prefix[i * (m + 1) + j + 1]
                + prefix[(i + 1) * (m + 1) + j]
                - prefix[i * (m + 1) + j];
        }
    }
    let n = n_points as f64;
    let mut worst = 0.0f64;
    for i in 0..=m {
        for j in 0..=m {
            let emp = prefix[i * (m + 1) + j] as f64 / n;
            let uni = (i as f64 / m as f64) * (j as f64 / m as f64);
            worst = worst.max((emp - uni).abs());
        }
    }
    Ok(worst)
}
