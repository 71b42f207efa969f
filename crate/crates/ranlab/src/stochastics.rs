//! Samplers and estimators for the distributions driving the coupling
//! arguments: Beta(1/(d−1), 1), the symmetric Dirichlet over the simplex,
//! the Eggenberger–Pólya urn, the `Υ` minima, and moments of `(1−Υ)`.

use crate::rng::Stream;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

/// Absolute tolerance on simplex sums.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point of the open probability simplex: strictly positive entries
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    entries: Vec<f64>,
}

impl SimplexVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::param("simplex vector needs at least 2 entries"));
        }
        if entries.iter().any(|&x| !(x > 0.0) || x > 1.0) {
            return Err(Error::param(
                "simplex entries must be strictly positive and at most 1",
            ));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::param(format!(
                "simplex entries sum to {sum}, expected 1 within {SIMPLEX_TOL}"
            )));
        }
        Ok(SimplexVector { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_d(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::param(format!("branching factor d={d}, need d >= 2")));
    }
    Ok(())
}

/// Draws one Beta(1/(d−1), 1) variate by inverse CDF: `U^(d−1)` for a
/// uniform `U` in (0, 1]. For d=2 this is the uniform distribution.
pub fn sample_beta_power(d: u32, rng: &mut Stream) -> Result<f64> {
    check_d(d)?;
    let u = rng.open_closed_f64();
    Ok(u.powi(d as i32 - 1))
}

/// Draws a Dirichlet(1/(d−1), …, 1/(d−1)) vector of length `d` by
/// normalizing independent Gamma(1/(d−1), 1) variates.
pub fn sample_dirichlet(d: u32, rng: &mut Stream) -> Result<SimplexVector> {
    check_d(d)?;
    let shape = 1.0 / f64::from(d - 1);
    let gamma = Gamma::new(shape, 1.0).expect("valid gamma shape");
    let mut entries = vec![0.0f64; d as usize];
    loop {
        let mut sum = 0.0;
        for e in entries.iter_mut() {
            *e = gamma.sample(rng);
            sum += *e;
        }
        // Tiny shapes can underflow to zero; redraw in that (measure-zero) case.
        if sum > 0.0 && entries.iter().all(|&x| x > 0.0) {
            let mut norm: f64 = 0.0;
            for e in entries.iter_mut() {
                *e /= sum;
                norm += *e;
            }
            // Renormalize once more so the sum is 1 to the last bit.
            if (norm - 1.0).abs() > 0.0 {
                for e in entries.iter_mut() {
                    *e /= norm;
                }
            }
            if entries.iter().all(|&x| x > 0.0) {
                return SimplexVector::new(entries);
            }
        }
    }
}

/// `Υ` for the d-ary model: the minimum, over all (d−r)-subsets of the
/// offspring fractions, of the subset sum — equivalently the sum of the
/// d−r smallest entries.
pub fn upsilon_dary(x: &SimplexVector, r: u32) -> Result<f64> {
    let d = x.len() as u32;
    if r < 1 || r >= d {
        return Err(Error::param(format!("need 1 <= r < d, got r={r} d={d}")));
    }
    let mut sorted = x.entries().to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite entries"));
    Ok(sorted[..(d - r) as usize].iter().sum())
}

/// `Υ` for the RAN model: the minimum over the 3×9 product grid
/// `min { A_i · B_j }`. `b` is the concatenation of three independent
/// 3-simplices. All factors are positive, so the minimum factorizes as
/// `min_i A_i · min_j B_j`.
pub fn upsilon_ran(a: &SimplexVector, b: &[f64]) -> Result<f64> {
    if a.len() != 3 {
        return Err(Error::param(format!(
            "a must be a 3-simplex, got length {}",
            a.len()
        )));
    }
    if b.len() != 9 {
        return Err(Error::param(format!(
            "b must hold three 3-simplices (9 entries), got {}",
            b.len()
        )));
    }
    if b.iter().any(|&x| !(x > 0.0) || x > 1.0) {
        return Err(Error::param("b entries must lie in (0, 1]"));
    }
    for triple in b.chunks_exact(3) {
        let sum: f64 = triple.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!(
                "b triple sums to {sum}, not a simplex"
            )));
        }
    }
    let min_a = a.min_entry();
    let min_b = b.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min_a * min_b)
}

/// Draws the RAN `Υ` from fresh Dirichlet(1/2, 1/2, 1/2) vectors.
pub fn sample_upsilon_ran(rng: &mut Stream) -> f64 {
    let a = sample_dirichlet(3, rng).expect("d=3 valid");
    let mut b = Vec::with_capacity(9);
    for _ in 0..3 {
        b.extend_from_slice(sample_dirichlet(3, rng).expect("d=3 valid").entries());
    }
    upsilon_ran(&a, &b).expect("freshly sampled simplices")
}

/// Draws the d-ary `Υ` from a fresh Dirichlet offspring vector.
pub fn sample_upsilon_dary(d: u32, r: u32, rng: &mut Stream) -> Result<f64> {
    let x = sample_dirichlet(d, rng)?;
    upsilon_dary(&x, r)
}

/// An Eggenberger–Pólya urn: the drawn colour is reinforced by a fixed
/// number of balls.
#[derive(Debug, Clone)]
pub struct UrnState {
    pub count_a: u64,
    pub count_b: u64,
    pub reinforcement: u64,
    pub draws: u64,
    pub hits_a: u64,
    init_a: u64,
    init_b: u64,
}

impl UrnState {
    pub fn new(init_a: u64, init_b: u64, reinforcement: u64) -> Result<Self> {
        if init_a + init_b == 0 {
            return Err(Error::param("urn must start with at least one ball"));
        }
        if reinforcement == 0 {
            return Err(Error::param("reinforcement must be positive"));
        }
        Ok(UrnState {
            count_a: init_a,
            count_b: init_b,
            reinforcement,
            draws: 0,
            hits_a: 0,
            init_a,
            init_b,
        })
    }

    /// One draw; returns true when colour 1 was chosen. Selection is exact
    /// (integer range), no floating-point bias.
    pub fn draw(&mut self, rng: &mut Stream) -> bool {
        let total = self.count_a + self.count_b;
        let pick = rng.gen_range(0..total);
        self.draws += 1;
        if pick < self.count_a {
            self.count_a += self.reinforcement;
            self.hits_a += 1;
            true
        } else {
            self.count_b += self.reinforcement;
            false
        }
    }

    /// The bookkeeping identity `count_a = init_a + reinforcement * hits_a`
    /// (and the analogue for colour 2).
    pub fn consistent(&self) -> bool {
        self.count_a == self.init_a + self.reinforcement * self.hits_a
            && self.count_b == self.init_b + self.reinforcement * (self.draws - self.hits_a)
            && self.hits_a <= self.draws
    }
}

/// Number of colour-1 selections in `t` draws of the urn with initial
/// conditions (1, d−1) and reinforcement d−1.
pub fn polya_urn_hits(d: u32, t: u64, rng: &mut Stream) -> Result<u64> {
    check_d(d)?;
    let mut urn = UrnState::new(1, u64::from(d) - 1, u64::from(d) - 1)?;
    for _ in 0..t {
        urn.draw(rng);
    }
    debug_assert!(urn.consistent());
    Ok(urn.hits_a)
}

/// Oracle for the urn: the same law expressed as a Beta(1/(d−1), 1)-mixed
/// Binomial(t, B).
pub fn beta_binomial_mixture(d: u32, t: u64, rng: &mut Stream) -> Result<u64> {
    check_d(d)?;
    let b = sample_beta_power(d, rng)?;
    let bin = Binomial::new(t, b).map_err(|e| Error::param(format!("binomial: {e}")))?;
    Ok(bin.sample(rng))
}

/// Which `Υ` variant a moment estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsilonKind {
    Dary { d: u32, r: u32 },
    Ran,
}

/// Monte Carlo estimate with a normal-approximation 95% confidence
/// half-width. `degenerate` flags estimates where every sampled term
/// underflowed to subnormal/zero territory, so the mean carries no
/// information beyond "tiny".
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub samples: u64,
    pub degenerate: bool,
}

/// Monte Carlo estimate of `E[(1−Υ)^λ]` for the chosen variant.
pub fn estimate_moment(
    kind: UpsilonKind,
    lambda: f64,
    samples: u64,
    rng: &mut Stream,
) -> Result<MomentEstimate> {
    if !(lambda >= 0.0) {
        return Err(Error::param(format!("lambda={lambda}, need lambda >= 0")));
    }
    if samples < 1_000 {
        return Err(Error::param(format!(
            "samples={samples}, need at least 1000"
        )));
    }
    if let UpsilonKind::Dary { d, r } = kind {
        check_d(d)?;
        if r < 1 || r >= d {
            return Err(Error::param(format!("need 1 <= r < d, got r={r} d={d}")));
        }
    }
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut all_tiny = true;
    for _ in 0..samples {
        let upsilon = match kind {
            UpsilonKind::Dary { d, r } => sample_upsilon_dary(d, r, rng)?,
            UpsilonKind::Ran => sample_upsilon_ran(rng),
        };
        let term = (1.0 - upsilon).powf(lambda);
        if term >= f64::MIN_POSITIVE {
            all_tiny = false;
        }
        sum += term;
        sum_sq += term * term;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(MomentEstimate {
        mean,
        half_width_95: 1.96 * (var / n).sqrt(),
        samples,
        degenerate: all_tiny,
    })
}
