//! Closed-form performance predictions: density evolution for the waterfall,
//! stopping-set error floors, the miscorrection probability of a component
//! code, and net coding gain.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bch::BchCode;
use crate::error::{Error, Result};

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Natural log of a big integer, accurate to double precision.
fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// P(X ≥ t) for X ~ Poisson(λ).
pub fn poisson_tail(t: u32, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Parameter(format!("Poisson mean must be finite and >= 0, got {lambda}")));
    }
    if t == 0 {
        return Ok(1.0);
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if lambda >= t as f64 {
        // The head is at most about one half here, so 1 − head is well conditioned.
        let mut term = (-lambda).exp();
        let mut head = term;
        for i in 1..t {
            term *= lambda / i as f64;
            head += term;
        }
        return Ok((1.0 - head).max(0.0));
    }
    // Sum the tail directly; terms decrease geometrically.
    let ln_first = -lambda + t as f64 * lambda.ln() - ln_factorial(t);
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut i = t;
    loop {
        sum += term;
        i += 1;
        term *= lambda / i as f64;
        if term < sum * 1e-17 {
            break;
        }
    }
    Ok((ln_first + sum.ln()).exp())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Density-evolution model of a generalized product code under
/// miscorrection-free iterative decoding.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeModel {
    /// Symmetric 0/1 coupling between codeword types.
    pub eta: Vec<Vec<u8>>,
    /// Active types per half-iteration, repeated cyclically.
    pub schedule: Vec<Vec<usize>>,
    /// Component length.
    pub n: usize,
    pub t: u32,
}

impl DeModel {
    /// Product code: two types coupled to each other, rows then columns.
    pub fn product(n: usize, t: u32) -> Self {
        Self {
            eta: vec![vec![0, 1], vec![1, 0]],
            schedule: vec![vec![0], vec![1]],
            n,
            t,
        }
    }

    /// Staircase-like chain of `types` positions, neighbours coupled.
    /// Odd and even positions are decoded in alternating half-iterations.
    pub fn staircase(types: usize, n: usize, t: u32) -> Result<Self> {
        if types < 2 {
            return Err(Error::Parameter("staircase model needs at least two types".into()));
        }
        let mut eta = vec![vec![0u8; types]; types];
        for i in 0..types - 1 {
            eta[i][i + 1] = 1;
            eta[i + 1][i] = 1;
        }
        Ok(Self {
            eta,
            schedule: vec![(0..types).step_by(2).collect(), (1..types).step_by(2).collect()],
            n,
            t,
        })
    }

    pub fn num_types(&self) -> usize {
        self.eta.len()
    }

    /// Squared Frobenius norm of `eta`, i.e. its number of ones.
    pub fn eta_weight(&self) -> usize {
        self.eta.iter().flatten().map(|&e| e as usize).sum()
    }
}

/// Predicted BER after `ell` iterations (`2·ell` half-iterations).
///
/// A codeword sees on average `c = p·n` channel errors, split evenly over the
/// `d` types it couples to in the interior of the chain (`d` is the largest
/// row degree of `eta`). Types at the ends of a staircase chain touch a
/// known-zero boundary and so draw errors from fewer neighbours. An error
/// survives a half-iteration if its codeword still holds at least `t` other
/// surviving errors.
pub fn density_evolution(model: &DeModel, p: f64, ell: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("crossover probability {p} outside [0, 1]")));
    }
    let types = model.num_types();
    let c = p * model.n as f64;
    let degree: Vec<usize> = model.eta.iter().map(|row| row.iter().map(|&e| e as usize).sum()).collect();
    let share = degree.iter().copied().max().unwrap_or(1).max(1) as f64;
    let mut x = vec![1.0f64; types];
    for l in 0..2 * ell {
        let active = &model.schedule[l % model.schedule.len()];
        let prev = x.clone();
        for &i in active {
            let coupled: f64 = (0..types).map(|j| model.eta[i][j] as f64 * prev[j]).sum();
            x[i] = poisson_tail(model.t, c * coupled / share)?;
        }
    }
    let mut quad = 0.0;
    for i in 0..types {
        for j in 0..types {
            quad += x[i] * model.eta[i][j] as f64 * x[j];
        }
    }
    Ok(p * quad / model.eta_weight() as f64)
}

/// Smallest `p` on `[lo, hi]` with predicted BER ≥ `target`, by bisection.
pub fn density_evolution_inverse(model: &DeModel, ell: usize, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    if density_evolution(model, hi, ell)? < target {
        return Err(Error::Domain(format!("predicted BER stays below {target} on the interval")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if density_evolution(model, mid, ell)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Error-floor model built from one stopping-set class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FloorModel {
    pub n: u64,
    pub t: u32,
    /// Stopping-set size.
    pub s_min: u32,
    /// Number of stopping sets of that size.
    #[serde(serialize_with = "serialize_big")]
    pub multiplicity: BigUint,
}

fn serialize_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Number of 6 × 6 binary matrices with every row and column of weight 3.
pub const SIX_BY_SIX_WEIGHT_THREE: u64 = 297_200;

impl FloorModel {
    /// Minimal stopping sets of iterative decoding: `(t+1)` rows by `(t+1)`
    /// columns, all intersections in error.
    pub fn minimal(n: u64, t: u32) -> Self {
        let c = binomial(n, t as u64 + 1);
        Self {
            n,
            t,
            s_min: (t + 1) * (t + 1),
            multiplicity: &c * &c,
        }
    }

    /// Dominant stopping set left after erasure post-processing for t = 2 with
    /// an extended component code: 6 rows by 6 columns, weight 3 in each.
    pub fn after_erasure_pp(n: u64) -> Self {
        let c = binomial(n, 6);
        Self {
            n,
            t: 2,
            s_min: 18,
            multiplicity: BigUint::from(SIX_BY_SIX_WEIGHT_THREE) * &c * &c,
        }
    }
}

/// log10 of the floor estimate `(s/n²)·M·p^s`.
pub fn error_floor_log10(model: &FloorModel, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!("crossover probability {p} outside (0, 1)")));
    }
    let ln = (model.s_min as f64).ln() - 2.0 * (model.n as f64).ln() + ln_big(&model.multiplicity)
        + model.s_min as f64 * p.ln();
    Ok(ln / std::f64::consts::LN_10)
}

/// Floor estimate `(s/n²)·M·p^s`. Computed directly while the factors stay
/// in range and in log space otherwise; results below the smallest normal
/// double come back as 0 (use [`error_floor_log10`] for those).
pub fn error_floor(model: &FloorModel, p: f64) -> Result<f64> {
    let log10 = error_floor_log10(model, p)?;
    let m = model.multiplicity.to_f64().filter(|m| m.is_finite());
    let pw = p.powi(model.s_min as i32);
    if let Some(m) = m {
        if pw > 1e-300 {
            return Ok(model.s_min as f64 / (model.n as f64 * model.n as f64) * m * pw);
        }
    }
    if log10 < -300.0 {
        return Ok(0.0);
    }
    Ok(10f64.powf(log10))
}

/// Exact fraction of syndromes that bounded-distance decoding accepts:
/// `Σ_{i≤t} C(n,i) / 2^{νt+e}`, as (numerator, denominator).
pub fn miscorrection_fraction(code: &BchCode) -> (BigUint, BigUint) {
    let num = (0..=code.t() as u64).fold(BigUint::zero(), |acc, i| acc + binomial(code.n() as u64, i));
    let den = BigUint::one() << (code.nu() as usize * code.t() + code.e());
    (num, den)
}

/// Probability that a random syndrome is decodable, i.e. that decoding an
/// uncorrectable pattern miscorrects.
pub fn miscorrection_probability(code: &BchCode) -> f64 {
    let (num, den) = miscorrection_fraction(code);
    (ln_big(&num) - ln_big(&den)).exp()
}

/// Gaussian tail probability Q(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse Gaussian tail, for `0 < p < 1`.
///
/// A rational approximation of the normal quantile refined by two Newton
/// steps on `Q(x) − p`.
#[allow(clippy::excessive_precision)]
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("Q^-1 needs 0 < p < 1, got {p}")));
    }
    // Acklam's approximation of the lower-tail quantile, applied to 1 − p.
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    // Lower-tail probability is p itself: Q(x) = p ⇔ Φ(−x) = p.
    let lower = |q: f64| -> f64 {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    let z = if p < P_LOW {
        lower(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -lower(1.0 - p)
    };
    let mut x = -z;
    for _ in 0..2 {
        let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        x += (q_function(x) - p) / density;
    }
    Ok(x)
}

/// Net coding gain in dB of a rate-`rate` code reaching output BER `p_out`
/// at input crossover probability `p`.
pub fn ncg(rate: f64, p: f64, p_out: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Parameter(format!("rate {rate} outside (0, 1]")));
    }
    if !(p_out > 0.0 && p_out <= p && p < 0.5) {
        return Err(Error::Parameter(format!("need 0 < p_out <= p < 0.5, got p={p}, p_out={p_out}")));
    }
    let (q_out, q_in) = (q_inverse(p_out)?, q_inverse(p)?);
    Ok(10.0 * (rate * q_out * q_out / (q_in * q_in)).log10())
}
