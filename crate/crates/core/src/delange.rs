//! Delange's formula for real β > 1: Fourier coefficients c_β(k), the
//! periodic function h_β, and the interpolated S_β(n), d_β(n).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::special::{riemann_zeta, PrecisionProfile};

/// Smallest accepted β - 1.
pub const BETA_GUARD: f64 = 1e-6;
/// Largest tolerated imaginary part of a truncated h_β sum.
pub const REALNESS_TOL: f64 = 1e-10;
pub const DEFAULT_CUTOFF: usize = 1000;

/// A real interpolation parameter β > 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParam(f64);

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidInput(format!("beta must be a finite real > 1, got {beta}")));
        }
        if beta < 1.0 + BETA_GUARD {
            return Err(Error::OutOfDomain(format!(
                "beta = {beta} is within {BETA_GUARD:e} of 1"
            )));
        }
        Ok(Self(beta))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn ln(self) -> f64 {
        self.0.ln()
    }

    /// Coefficient (β - 1)/(2 log β) of n log n.
    pub fn density(self) -> f64 {
        (self.0 - 1.0) / (2.0 * self.ln())
    }

    /// Vertical spacing 2π / log β of the poles.
    pub fn spacing(self) -> f64 {
        2.0 * PI / self.ln()
    }
}

/// Number of Fourier modes |k| ≤ K kept in h_β.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierTruncation(usize);

impl FourierTruncation {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidInput("Fourier cutoff must be >= 1".into()));
        }
        Ok(Self(cutoff))
    }

    pub fn cutoff(self) -> usize {
        self.0
    }
}

impl Default for FourierTruncation {
    fn default() -> Self {
        Self(DEFAULT_CUTOFF)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelangeCoefficient {
    pub k: i64,
    pub value: Complex64,
}

fn coefficient_formula(beta: BetaParam, k: i64) -> Result<Complex64> {
    let b = beta.get();
    let lb = beta.ln();
    if k == 0 {
        let value = beta.density() * ((2.0 * PI).ln() - 1.0) - (b + 1.0) / 4.0;
        return Ok(Complex64::new(value, 0.0));
    }
    let w = Complex64::new(0.0, k as f64 * beta.spacing());
    let zeta = riemann_zeta(w, &PrecisionProfile::default())?;
    let two_pi_ik = Complex64::new(0.0, 2.0 * PI * k as f64);
    Ok(-(b - 1.0) / two_pi_ik / (1.0 + two_pi_ik / lb) * zeta)
}

/// c_β(0..=K) for one β, computed directly without the cache.
pub fn compute_coefficients(beta: BetaParam, cutoff: usize) -> Result<Vec<Complex64>> {
    let ks: Vec<i64> = (0..=cutoff as i64).collect();
    parallel::map_ordered(&ks, |&k| coefficient_formula(beta, k))
        .into_iter()
        .collect()
}

type CoefficientCache = Mutex<HashMap<u64, Arc<Vec<Complex64>>>>;

fn cache() -> &'static CoefficientCache {
    static CACHE: std::sync::OnceLock<CoefficientCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// c_β(0..=K), cached per β and extended on demand.
pub fn coefficients(beta: BetaParam, cutoff: usize) -> Result<Arc<Vec<Complex64>>> {
    let key = beta.get().to_bits();
    let existing = cache().lock().expect("coefficient cache poisoned").get(&key).cloned();
    if let Some(table) = &existing {
        if table.len() > cutoff {
            return Ok(Arc::clone(table));
        }
    }
    let start = existing.as_ref().map_or(0, |t| t.len());
    let ks: Vec<i64> = (start as i64..=cutoff as i64).collect();
    let fresh: Vec<Complex64> = parallel::map_ordered(&ks, |&k| coefficient_formula(beta, k))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut values = existing.map_or_else(Vec::new, |t| t.as_ref().clone());
    values.extend(fresh);
    let table = Arc::new(values);
    let mut guard = cache().lock().expect("coefficient cache poisoned");
    let entry = guard.entry(key).or_insert_with(|| Arc::clone(&table));
    if entry.len() < table.len() {
        *entry = Arc::clone(&table);
    }
    Ok(table)
}

/// c_β(k). Negative k is evaluated from the formula itself rather than by
/// conjugating the cached positive coefficient.
pub fn delange_coefficient(beta: BetaParam, k: i64) -> Result<DelangeCoefficient> {
    let value = if k >= 0 {
        let key = beta.get().to_bits();
        let cached = cache()
            .lock()
            .expect("coefficient cache poisoned")
            .get(&key)
            .and_then(|t| t.get(k as usize).copied());
        match cached {
            Some(v) => v,
            None => coefficient_formula(beta, k)?,
        }
    } else {
        coefficient_formula(beta, k)?
    };
    Ok(DelangeCoefficient { k, value })
}

/// Σ_{|k|>K} |c_β(k)| estimated from the k^{-3/2} envelope fitted on
/// K/2 < k ≤ K.
pub fn tail_envelope(coeffs: &[Complex64]) -> f64 {
    let cutoff = coeffs.len().saturating_sub(1);
    if cutoff == 0 {
        return 0.0;
    }
    let fit = (cutoff / 2 + 1..=cutoff)
        .map(|k| coeffs[k].norm() * (k as f64).powf(1.5))
        .fold(0.0, f64::max);
    4.0 * fit / (cutoff as f64).sqrt()
}

/// Σ_{0<|k|≤K} |c_β(k)|, a bound on |h_β - c_β(0)| for the truncated sum.
pub fn oscillation_bound(coeffs: &[Complex64]) -> f64 {
    2.0 * coeffs.iter().skip(1).map(|c| c.norm()).sum::<f64>()
}

/// A truncated evaluation with the estimated truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncated {
    pub value: f64,
    pub tail_bound: f64,
}

/// Symmetric partial sum Σ_{|k|≤K} c_k e^{2πikx} from the coefficients
/// c_0..c_K, pairing ±k.
fn fourier_sum(coeffs: &[Complex64], x: f64) -> Result<f64> {
    let frac = x - x.floor();
    let step = Complex64::from_polar(1.0, 2.0 * PI * frac);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut re = coeffs[0].re;
    let mut im = coeffs[0].im;
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        rot = if k % 64 == 0 {
            Complex64::from_polar(1.0, 2.0 * PI * ((k as f64 * frac) % 1.0))
        } else {
            rot * step
        };
        let plus = c * rot;
        let minus = c.conj() * rot.conj();
        let pair = plus + minus;
        re += pair.re;
        im += pair.im;
    }
    if im.abs() > REALNESS_TOL {
        return Err(Error::SymmetryViolation {
            residue: im.abs(),
            limit: REALNESS_TOL,
        });
    }
    Ok(re)
}

/// h_β(x) from precomputed coefficients c_0..c_K.
pub fn h_from_coefficients(coeffs: &[Complex64], x: f64) -> Result<Truncated> {
    Ok(Truncated {
        value: fourier_sum(coeffs, x)?,
        tail_bound: tail_envelope(coeffs),
    })
}

/// h_β(x) = Σ_{|k|≤K} c_β(k) e^{2πikx}.
pub fn h_beta(beta: BetaParam, x: f64, trunc: FourierTruncation) -> Result<Truncated> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite x = {x}")));
    }
    let coeffs = coefficients(beta, trunc.cutoff())?;
    h_from_coefficients(&coeffs[..=trunc.cutoff()], x)
}

/// S_β(n) from precomputed coefficients.
pub fn s_from_coefficients(beta: BetaParam, coeffs: &[Complex64], n: u64) -> Result<Truncated> {
    if n < 1 {
        return Err(Error::InvalidInput("S_beta needs n >= 1".into()));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let h = h_from_coefficients(coeffs, ln_n / beta.ln())?;
    Ok(Truncated {
        value: beta.density() * nf * ln_n + h.value * nf,
        tail_bound: h.tail_bound * nf,
    })
}

/// S_β(n) = (β-1)/(2 log β) n log n + h_β(log n / log β) n.
pub fn s_beta(beta: BetaParam, n: u64, trunc: FourierTruncation) -> Result<Truncated> {
    let coeffs = coefficients(beta, trunc.cutoff())?;
    s_from_coefficients(beta, &coeffs[..=trunc.cutoff()], n)
}

/// d_β(n) = S_β(n+1) - S_β(n).
pub fn d_beta(beta: BetaParam, n: u64, trunc: FourierTruncation) -> Result<Truncated> {
    if n < 1 {
        return Err(Error::InvalidInput("d_beta needs n >= 1".into()));
    }
    let coeffs = coefficients(beta, trunc.cutoff())?;
    let coeffs = &coeffs[..=trunc.cutoff()];
    let hi = s_from_coefficients(beta, coeffs, n + 1)?;
    let lo = s_from_coefficients(beta, coeffs, n)?;
    Ok(Truncated {
        value: hi.value - lo.value,
        tail_bound: hi.tail_bound + lo.tail_bound,
    })
}

// ---------------------------------------------------------------------------
// Figure grids

/// The three β-sweeps: S_β(10), h_β(2), and h_β(log 2 / log β).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Figure {
    SbetaAtTen,
    HAtTwo,
    HAtLogTwo,
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::SbetaAtTen, Figure::HAtTwo, Figure::HAtLogTwo];

    pub fn number(self) -> usize {
        match self {
            Figure::SbetaAtTen => 1,
            Figure::HAtTwo => 2,
            Figure::HAtLogTwo => 3,
        }
    }

    pub fn file_name(self) -> String {
        format!("fig{}_beta_grid.csv", self.number())
    }

    /// Default β range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Figure::SbetaAtTen => (1.01, 15.0),
            _ => (1.01, 8.0),
        }
    }

    fn abscissa(self, beta: BetaParam) -> f64 {
        match self {
            Figure::SbetaAtTen => 10.0,
            Figure::HAtTwo => 2.0,
            Figure::HAtLogTwo => 2f64.ln() / beta.ln(),
        }
    }

    fn evaluate(self, beta: BetaParam, coeffs: &[Complex64]) -> Result<Truncated> {
        match self {
            Figure::SbetaAtTen => s_from_coefficients(beta, coeffs, 10),
            _ => h_from_coefficients(coeffs, self.abscissa(beta)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub beta: f64,
    pub x_or_n: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub cutoff_k: usize,
}

/// β values lo, lo + step, ... ≤ hi, generated by index to avoid drift.
pub fn beta_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "invalid grid [{lo}, {hi}] with step {step}"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

/// Rows for each requested figure over the given β values; each β's
/// coefficients are computed once and shared between figures. Figures
/// whose default range excludes a β are skipped at that β unless
/// `clip_to_range` is false.
pub fn figure_grids(
    figures: &[Figure],
    betas: &[f64],
    trunc: FourierTruncation,
    clip_to_range: bool,
) -> Result<Vec<Vec<GridRow>>> {
    let per_beta = parallel::map_ordered(betas, |&b| -> Result<Vec<Option<GridRow>>> {
        let beta = BetaParam::new(b)?;
        let wanted: Vec<bool> = figures
            .iter()
            .map(|f| {
                let (lo, hi) = f.range();
                !clip_to_range || (b >= lo - 1e-9 && b <= hi + 1e-9)
            })
            .collect();
        if !wanted.iter().any(|&w| w) {
            return Ok(vec![None; figures.len()]);
        }
        let coeffs = compute_coefficients(beta, trunc.cutoff())?;
        figures
            .iter()
            .zip(&wanted)
            .map(|(fig, &w)| {
                if !w {
                    return Ok(None);
                }
                let t = fig.evaluate(beta, &coeffs)?;
                Ok(Some(GridRow {
                    beta: b,
                    x_or_n: fig.abscissa(beta),
                    value: t.value,
                    tail_bound: t.tail_bound,
                    cutoff_k: trunc.cutoff(),
                }))
            })
            .collect()
    });
    let mut grids = vec![Vec::new(); figures.len()];
    for rows in per_beta {
        for (grid, row) in grids.iter_mut().zip(rows?) {
            if let Some(row) = row {
                grid.push(row);
            }
        }
    }
    Ok(grids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::{cumulative_digit_sum, digit_sum, IntegerBase};

    fn beta(b: f64) -> BetaParam {
        BetaParam::new(b).unwrap()
    }

    #[test]
    fn parameter_guards() {
        assert!(matches!(BetaParam::new(1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(BetaParam::new(1.0 + 1e-7), Err(Error::OutOfDomain(_))));
        assert!(BetaParam::new(1.0 + 2e-6).is_ok());
        assert!(FourierTruncation::new(0).is_err());
        assert_eq!(FourierTruncation::default().cutoff(), 1000);
    }

    #[test]
    fn constant_coefficient() {
        let c0 = delange_coefficient(beta(2.0), 0).unwrap().value;
        let expected = ((2.0 * PI).ln() - 1.0) / (2.0 * 2f64.ln()) - 0.75;
        assert!((c0.re - expected).abs() < 1e-15 && c0.im == 0.0);
        assert!((c0.re + 0.14560).abs() < 5e-5);
    }

    #[test]
    fn constant_coefficient_matches_empirical_mean() {
        // S_2(n)/n - A log n averages c_2(0) over a full period in log n
        let b = IntegerBase::new(2).unwrap();
        let a = beta(2.0).density();
        let (lo, hi) = (1u64 << 12, 1u64 << 16);
        let mut acc = 0.0;
        let mut weight = 0.0;
        for n in lo..hi {
            let nf = n as f64;
            let h = cumulative_digit_sum(b, n) as f64 / nf - a * nf.ln();
            // dn/n weights each log-period equally
            acc += h / nf;
            weight += 1.0 / nf;
        }
        let c0 = delange_coefficient(beta(2.0), 0).unwrap().value.re;
        assert!((acc / weight - c0).abs() < 2e-3, "{} vs {c0}", acc / weight);
    }

    #[test]
    fn conjugate_symmetry_of_coefficients() {
        for b in [1.5, 2.0, 3.7] {
            for k in [1i64, 2, 17, 300] {
                let plus = delange_coefficient(beta(b), k).unwrap().value;
                let minus = delange_coefficient(beta(b), -k).unwrap().value;
                assert!((plus.conj() - minus).norm() <= 1e-14 * plus.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn coefficient_decay() {
        // |ζ(it)| fluctuates, so the constant is fitted over the first decade
        // with a factor-two margin rather than at the single point k = 10
        let coeffs = coefficients(beta(2.5), 10_000).unwrap();
        let c = 2.0 * (1..=10)
            .map(|k| coeffs[k].norm() * (k as f64).powf(1.4))
            .fold(0.0, f64::max);
        for (k, v) in coeffs.iter().enumerate().skip(10) {
            assert!(v.norm() <= c * (k as f64).powf(-1.4), "k = {k}");
        }
    }

    #[test]
    fn h_vanishes_at_zero_for_integer_base() {
        for b in [2.0, 3.0, 10.0] {
            let h = h_beta(beta(b), 0.0, FourierTruncation::new(1000).unwrap()).unwrap();
            assert!(h.value.abs() <= h.tail_bound, "b={b} {h:?}");
        }
    }

    #[test]
    fn h_is_periodic_and_nonconstant() {
        let trunc = FourierTruncation::default();
        for x in [0.1234, 0.77, 3.5] {
            let a = h_beta(beta(2.0), x, trunc).unwrap().value;
            let b = h_beta(beta(2.0), x + 1.0, trunc).unwrap().value;
            assert!((a - b).abs() < 1e-12);
        }
        let values: Vec<f64> = (0..1000)
            .map(|i| h_beta(beta(2.0), i as f64 / 1000.0, trunc).unwrap().value)
            .collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min > 0.0);
    }

    #[test]
    fn s_beta_at_one_is_h_at_zero() {
        let trunc = FourierTruncation::new(200).unwrap();
        let s = s_beta(beta(2.7), 1, trunc).unwrap().value;
        let h = h_beta(beta(2.7), 0.0, trunc).unwrap().value;
        assert!((s - h).abs() < 1e-15);
    }

    #[test]
    fn integer_base_reproduces_digit_sums() {
        let trunc = FourierTruncation::new(1000).unwrap();
        for b in 2u64..=10 {
            let base = IntegerBase::new(b).unwrap();
            for n in 1..=1000u64 {
                let s = s_beta(beta(b as f64), n, trunc).unwrap().value;
                let exact = cumulative_digit_sum(base, n) as f64;
                assert!((s - exact).abs() / (n as f64) < 0.05, "b={b} n={n}");
            }
        }
    }

    #[test]
    fn differences_reproduce_digits_and_telescope() {
        let trunc = FourierTruncation::new(1000).unwrap();
        let base = IntegerBase::new(2).unwrap();
        let mut running = 0.0;
        for n in 1..=500u64 {
            let d = d_beta(beta(2.0), n, trunc).unwrap();
            // twice the S tail bound at the adjacent arguments
            assert!((d.value - digit_sum(base, n) as f64).abs() < d.tail_bound, "n={n}");
            running += d.value;
        }
        let s1 = s_beta(beta(2.0), 1, trunc).unwrap().value;
        let s501 = s_beta(beta(2.0), 501, trunc).unwrap().value;
        assert!((running - (s501 - s1)).abs() < 1e-9);
    }

    #[test]
    fn beta_two_and_a_half_has_sign_changes_recorded() {
        let trunc = FourierTruncation::default();
        let values: Vec<f64> = (1..=100)
            .map(|n| d_beta(beta(2.5), n, trunc).unwrap().value)
            .collect();
        assert!(values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn large_bases_are_flat_at_ten() {
        let trunc = FourierTruncation::default();
        let a = s_beta(beta(10.0), 10, trunc).unwrap().value;
        let b = s_beta(beta(14.0), 10, trunc).unwrap().value;
        assert!((a - b).abs() < 0.5);
    }

    #[test]
    fn grid_generation() {
        let g = beta_grid(1.01, 15.0, 0.01).unwrap();
        assert_eq!(g.len(), 1400);
        assert!((g[g.len() - 1] - 15.0).abs() < 1e-9);
        assert!(beta_grid(1.0, 2.0, 0.0).is_err());
        let rows = figure_grids(&Figure::ALL, &[2.0, 9.0], FourierTruncation::new(100).unwrap(), true)
            .unwrap();
        assert_eq!(rows[0].len(), 2);
        assert_eq!(rows[1].len(), 1);
        assert_eq!(rows[2].len(), 1);
        // the integer row of figure 1 sits at the exact digit sum S_2(10) = 15
        let r = rows[0][0];
        assert!((r.value - 15.0).abs() <= 10.0 * r.tail_bound.max(0.05));
    }
}
