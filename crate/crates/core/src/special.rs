//! Complex special functions: the Riemann zeta function and its derivative,
//! the complex gamma function, and exact Bernoulli numbers.
//!
//! Zeta is evaluated by Euler–Maclaurin summation to the right of
//! [`PrecisionProfile::reflection_threshold`] and through the functional
//! equation to the left of it. The reflection factor is assembled in log
//! form so that heights of several hundred thousand stay finite.

use std::f64::consts::{LN_2, PI};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// A point of the complex plane; every series argument and value uses it.
pub type ComplexPoint = Complex64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Accuracy knobs for the zeta engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionProfile {
    pub target_abs_tol: f64,
    /// Minimum length of the direct sum. The effective length grows with |s|.
    pub em_cutoff: usize,
    /// Number of Bernoulli correction terms.
    pub em_order: usize,
    /// Re(s) below which the functional equation is applied.
    pub reflection_threshold: f64,
}

impl Default for PrecisionProfile {
    fn default() -> Self {
        Self {
            target_abs_tol: 1e-12,
            em_cutoff: 64,
            em_order: 14,
            reflection_threshold: 0.5,
        }
    }
}

impl PrecisionProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_tol >= 1e-14) {
            return Err(Error::InvalidInput(format!(
                "target_abs_tol {} below 1e-14",
                self.target_abs_tol
            )));
        }
        if self.em_cutoff == 0 {
            return Err(Error::InvalidInput("em_cutoff must be positive".into()));
        }
        if self.em_order == 0 || self.em_order % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "em_order {} must be positive and even",
                self.em_order
            )));
        }
        if !self.reflection_threshold.is_finite() {
            return Err(Error::InvalidInput("reflection_threshold must be finite".into()));
        }
        Ok(())
    }

    /// Direct-sum length used at `s`: the Bernoulli corrections decay like
    /// (|s| / 2πN)^2 per term, so N tracks |s|.
    fn cutoff_for(&self, s: Complex64) -> usize {
        let scaled = (0.4 * s.norm()).ceil() as usize + 1;
        self.em_cutoff.max(scaled)
    }
}

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub abs_error: f64,
}

fn ensure_finite(s: Complex64) -> Result<()> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite argument {s}")))
    }
}

// ---------------------------------------------------------------------------
// Bernoulli numbers

static BERNOULLI: RwLock<Vec<BigRational>> = RwLock::new(Vec::new());

fn next_bernoulli(table: &[BigRational]) -> BigRational {
    let m = table.len();
    if m == 0 {
        return BigRational::from_integer(BigInt::from(1));
    }
    if m >= 3 && m % 2 == 1 {
        return BigRational::zero();
    }
    // sum_{j=0}^{m} C(m+1, j) B_j = 0
    let mut binom = BigInt::from(1);
    let mut acc = BigRational::zero();
    for (j, b) in table.iter().enumerate() {
        if !b.is_zero() {
            acc += b * BigRational::from_integer(binom.clone());
        }
        binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
    }
    -acc / BigRational::from_integer(BigInt::from(m + 1))
}

/// Exact B_k with the convention B_1 = -1/2 (generating function x/(e^x - 1)).
pub fn bernoulli_number(k: usize) -> BigRational {
    {
        let table = BERNOULLI.read().expect("bernoulli cache poisoned");
        if let Some(b) = table.get(k) {
            return b.clone();
        }
    }
    let mut table = BERNOULLI.write().expect("bernoulli cache poisoned");
    while table.len() <= k {
        let next = next_bernoulli(&table);
        table.push(next);
    }
    table[k].clone()
}

const SCALED_TABLE_LEN: usize = 160;

fn scaled_bernoulli_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut factorial = BigInt::from(1);
        (0..SCALED_TABLE_LEN)
            .map(|k| {
                if k > 0 {
                    factorial *= BigInt::from(k);
                }
                let q = bernoulli_number(k) / BigRational::from_integer(factorial.clone());
                q.to_f64().unwrap_or(0.0)
            })
            .collect()
    })
}

/// B_k / k! as a double, for k < 160.
pub fn bernoulli_over_factorial(k: usize) -> f64 {
    scaled_bernoulli_table()[k]
}

/// B_k as a double.
pub fn bernoulli_f64(k: usize) -> f64 {
    bernoulli_number(k).to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Gamma

/// log sin(z), accurate far from the real axis where sin(z) itself overflows.
/// Only the exponential of the result is meaningful (branch unspecified).
pub fn ln_sin(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im.abs() < 20.0 {
        z.sin().ln()
    } else if z.im > 0.0 {
        -i * z + Complex64::new(-LN_2, PI / 2.0) - (2.0 * i * z).exp()
    } else {
        i * z + Complex64::new(-LN_2, -PI / 2.0) - (-2.0 * i * z).exp()
    }
}

fn stirling(z: Complex64) -> Complex64 {
    let mut acc = (z - 0.5) * z.ln() - z + LN_SQRT_2PI;
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    for j in 1..=12 {
        let k = 2 * j;
        acc += bernoulli_f64(k) / ((k * (k - 1)) as f64) * pow;
        pow *= inv2;
    }
    acc
}

/// log Γ(z) up to a multiple of 2πi. No pole check.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return Complex64::new(LN_PI, 0.0) - ln_sin(PI * z) - ln_gamma(1.0 - z);
    }
    let mut z = z;
    let mut shift = Complex64::new(1.0, 0.0);
    while z.norm() < 15.0 {
        shift *= z;
        z += 1.0;
    }
    stirling(z) - shift.ln()
}

fn is_nonpositive_integer(s: Complex64) -> bool {
    s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round()
}

/// Γ(s) for s off the nonpositive integers.
pub fn complex_gamma(s: Complex64) -> Result<Complex64> {
    ensure_finite(s)?;
    if is_nonpositive_integer(s) {
        return Err(Error::PoleAt(s));
    }
    Ok(ln_gamma(s).exp())
}

/// 1/Γ(s); entire, so zero at the nonpositive integers.
pub fn reciprocal_gamma(s: Complex64) -> Complex64 {
    if is_nonpositive_integer(s) {
        Complex64::zero()
    } else {
        (-ln_gamma(s)).exp()
    }
}

/// Γ(s - 1 + k) / Γ(s) as a finite product, without touching Γ.
pub fn gamma_ratio(s: Complex64, k: usize) -> Result<Complex64> {
    if k == 0 {
        if s == Complex64::new(1.0, 0.0) {
            return Err(Error::PoleAt(s));
        }
        return Ok((s - 1.0).inv());
    }
    Ok((0..k - 1).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (s + j as f64)))
}

// ---------------------------------------------------------------------------
// Zeta

fn em_zeta(s: Complex64, profile: &PrecisionProfile) -> Estimate {
    let n = profile.cutoff_for(s);
    let mut acc = CompensatedSum::new();
    for k in 1..n {
        acc.add((-s * (k as f64).ln()).exp());
    }
    let nf = n as f64;
    let n_pow = (-s * nf.ln()).exp();
    acc.add(n_pow * nf / (s - 1.0));
    acc.add(0.5 * n_pow);

    let mut rising = s;
    let mut pow = n_pow / nf;
    let inv_n2 = 1.0 / (nf * nf);
    let mut last = 0.0;
    for j in 1..=profile.em_order {
        let term = bernoulli_over_factorial(2 * j) * rising * pow;
        acc.add(term);
        last = term.norm();
        rising *= (s + (2 * j - 1) as f64) * (s + (2 * j) as f64);
        pow *= inv_n2;
    }
    Estimate {
        value: acc.sum(),
        abs_error: last,
    }
}

/// χ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s), with ζ(s) = χ(s) ζ(1-s).
fn reflection_factor(s: Complex64) -> Complex64 {
    let log = s * LN_2 + (s - 1.0) * LN_PI + ln_sin(0.5 * PI * s) + ln_gamma(1.0 - s);
    log.exp()
}

/// ζ(s) with its estimated absolute error.
pub fn riemann_zeta_estimate(s: Complex64, profile: &PrecisionProfile) -> Result<Estimate> {
    ensure_finite(s)?;
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::PoleAt(s));
    }
    // The reflected route would hit the pole of ζ(1 - s) at s = 0; the direct
    // sum is well conditioned in that neighbourhood.
    let est = if s.re < profile.reflection_threshold && s.norm() >= 0.1 {
        let inner = em_zeta(1.0 - s, profile);
        let chi = reflection_factor(s);
        Estimate {
            value: chi * inner.value,
            abs_error: chi.norm() * inner.abs_error,
        }
    } else {
        em_zeta(s, profile)
    };
    if !(est.value.re.is_finite() && est.value.im.is_finite()) {
        return Err(Error::NonConvergence(format!("zeta overflow at {s}")));
    }
    if est.abs_error > profile.target_abs_tol * est.value.norm().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "zeta error estimate {:e} at {s}",
            est.abs_error
        )));
    }
    Ok(est)
}

/// ζ(s) for s ≠ 1.
pub fn riemann_zeta(s: Complex64, profile: &PrecisionProfile) -> Result<Complex64> {
    riemann_zeta_estimate(s, profile).map(|e| e.value)
}

/// ζ'(s) with its estimated error, by termwise differentiation of the
/// Euler–Maclaurin formula. Defined for Re(s) ≥ 0, s ≠ 1.
pub fn riemann_zeta_derivative_estimate(
    s: Complex64,
    profile: &PrecisionProfile,
) -> Result<Estimate> {
    ensure_finite(s)?;
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::PoleAt(s));
    }
    if s.re < 0.0 {
        return Err(Error::OutOfDomain(format!(
            "zeta derivative needs Re(s) >= 0, got {s}"
        )));
    }
    let n = profile.cutoff_for(s);
    let mut acc = CompensatedSum::new();
    for k in 2..n {
        let ln_k = (k as f64).ln();
        acc.add(-ln_k * (-s * ln_k).exp());
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp();
    let head = n_pow * nf / (s - 1.0);
    acc.add(-ln_n * head - head / (s - 1.0));
    acc.add(-0.5 * ln_n * n_pow);

    // rising = s(s+1)...(s+2j-2) and its derivative, updated without division
    let mut rising = s;
    let mut rising_d = Complex64::new(1.0, 0.0);
    let mut pow = n_pow / nf;
    let inv_n2 = 1.0 / (nf * nf);
    let mut last = 0.0;
    for j in 1..=profile.em_order {
        let c = bernoulli_over_factorial(2 * j);
        let term = c * pow * (rising_d - ln_n * rising);
        acc.add(term);
        last = term.norm();
        for i in [2 * j - 1, 2 * j] {
            let f = s + i as f64;
            rising_d = rising_d * f + rising;
            rising *= f;
        }
        pow *= inv_n2;
    }
    let est = Estimate {
        value: acc.sum(),
        abs_error: last,
    };
    if est.abs_error > 10.0 * profile.target_abs_tol * est.value.norm().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "zeta' error estimate {:e} at {s}",
            est.abs_error
        )));
    }
    Ok(est)
}

/// ζ'(s) for Re(s) ≥ 0, s ≠ 1.
pub fn riemann_zeta_derivative(s: Complex64, profile: &PrecisionProfile) -> Result<Complex64> {
    riemann_zeta_derivative_estimate(s, profile).map(|e| e.value)
}
