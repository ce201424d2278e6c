//! G_β(s) = Σ S_β(n) n^{-s} on Re(s) > 1 and F_β(s) = Σ d_β(n) n^{-s} on
//! Re(s) > 0 for real β > 1.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;

use crate::delange::{
    coefficients, s_from_coefficients, tail_envelope, BetaParam, FourierTruncation,
};
use crate::error::{Error, Result};
use crate::numerics::{integrate_from, EvalResult};
use crate::parallel;
use crate::special::{
    complex_gamma, riemann_zeta, riemann_zeta_derivative_estimate, riemann_zeta_estimate,
    PrecisionProfile,
};
use crate::sum::CompensatedSum;

/// Margin kept to the right of the abscissa Re(s) = 1 of G_β.
pub const G_DOMAIN_MARGIN: f64 = 1e-3;
/// Distance below which a point counts as sitting on a pole.
pub const BETA_POLE_TOL: f64 = 1e-9;
/// Smallest table accepted by [`build_sbeta_table`].
pub const MIN_TABLE: usize = 100;
pub const DEFAULT_TABLE: usize = 100_000;
/// Lower end of the remainder quadrature is never taken below this.
pub const X_MIN_FLOOR: f64 = 1e-4;

/// Precomputed S_β(1..=N_max).
#[derive(Debug, Clone)]
pub struct SbetaTable {
    beta: BetaParam,
    trunc: FourierTruncation,
    values: Vec<f64>,
    tail_per_n: f64,
    growth_constant: f64,
    coefficients: Arc<Vec<Complex64>>,
}

impl SbetaTable {
    pub fn beta(&self) -> BetaParam {
        self.beta
    }

    pub fn truncation(&self) -> FourierTruncation {
        self.trunc
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// S_β(n) for 1 ≤ n ≤ N_max.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// S_β(1..=N_max) with a leading 0 at index 0.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fourier truncation error of S_β(n) is about n times this.
    pub fn tail_per_n(&self) -> f64 {
        self.tail_per_n
    }

    /// C_β with |S_β(n)| ≤ C_β n log n on the table (1.2 safety factor).
    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients[..=self.trunc.cutoff()]
    }
}

/// Tabulates S_β(n) for n ≤ N_max from the truncated Delange formula.
pub fn build_sbeta_table(
    beta: BetaParam,
    n_max: usize,
    trunc: FourierTruncation,
) -> Result<SbetaTable> {
    if n_max < MIN_TABLE {
        return Err(Error::InvalidInput(format!(
            "table length {n_max} below {MIN_TABLE}"
        )));
    }
    let coeffs = coefficients(beta, trunc.cutoff())?;
    let used = &coeffs[..=trunc.cutoff()];
    const CHUNK: usize = 2048;
    let starts: Vec<usize> = (1..=n_max).step_by(CHUNK).collect();
    let chunks = parallel::map_ordered(&starts, |&start| -> Result<Vec<f64>> {
        (start..(start + CHUNK).min(n_max + 1))
            .map(|n| s_from_coefficients(beta, used, n as u64).map(|t| t.value))
            .collect()
    });
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(0.0);
    for chunk in chunks {
        values.extend(chunk?);
    }
    let growth = (2..=n_max)
        .map(|n| {
            let nf = n as f64;
            values[n].abs() / (nf * nf.ln())
        })
        .fold(0.0, f64::max);
    Ok(SbetaTable {
        beta,
        trunc,
        values,
        tail_per_n: tail_envelope(used),
        growth_constant: 1.2 * growth,
        coefficients: coeffs,
    })
}

// ---------------------------------------------------------------------------
// G_β

/// Whether `s` lies in the half-plane where G_β is evaluated.
pub fn in_g_domain(s: Complex64) -> bool {
    s.re > 1.0 + G_DOMAIN_MARGIN
}

/// Whether `s` lies in the half-plane where F_β is evaluated; this is the
/// G_β half-plane shifted left by one.
pub fn in_f_domain(s: Complex64) -> bool {
    in_g_domain(s + 1.0)
}

fn pole_guard(beta: BetaParam, s: Complex64, column: f64) -> Result<()> {
    let k = (s.im / beta.spacing()).round();
    let pole = Complex64::new(column, k * beta.spacing());
    if (s - pole).norm() < BETA_POLE_TOL {
        return Err(Error::PoleAt(pole));
    }
    Ok(())
}

/// Bound on Σ_{|k|>K} |c_β(k)| |ζ(s - 1 - 2πik/log β)| from the k^{-3/2}
/// coefficient envelope and a growth envelope for ζ on Re = Re(s) - 1.
fn g_truncation_envelope(beta: BetaParam, coeffs: &[Complex64], s: Complex64) -> Result<f64> {
    let cutoff = coeffs.len() - 1;
    if cutoff == 0 {
        return Ok(0.0);
    }
    let kf = cutoff as f64;
    let fit = (cutoff / 2 + 1..=cutoff)
        .map(|k| coeffs[k].norm() * (k as f64).powf(1.5))
        .fold(0.0, f64::max);
    let sigma = s.re - 1.0;
    if sigma >= 1.5 {
        let z = riemann_zeta(Complex64::new(sigma, 0.0), &PrecisionProfile::default())?;
        return Ok(fit * z.re * 4.0 / kf.sqrt());
    }
    // |ζ(σ + iτ)| ≲ 3 log τ · τ^{(1-σ)/2} for τ ≥ 3, with τ ≤ a k on the tail
    let e = (0.5 * (1.0 - sigma)).max(0.0);
    let a = beta.spacing() + s.im.abs() / kf + 3.0;
    let decay = 0.5 - e;
    Ok(2.0 * fit * 3.0 * a.powf(e) * kf.powf(-decay) / decay * ((a * kf).ln() + 1.0 / decay))
}

/// G_β(s) = -(β-1)/(2 log β) ζ'(s-1) + Σ_{|k|≤K} c_β(k) ζ(s - 1 - 2πik/log β).
pub fn g_beta_eval(beta: BetaParam, s: Complex64, trunc: FourierTruncation) -> Result<EvalResult> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite argument {s}")));
    }
    if !in_g_domain(s) {
        return Err(Error::OutOfDomain(format!(
            "G_beta is continued only to Re(s) > {}, got {s}",
            1.0 + G_DOMAIN_MARGIN
        )));
    }
    pole_guard(beta, s, 2.0)?;
    let coeffs = coefficients(beta, trunc.cutoff())?;
    let coeffs = &coeffs[..=trunc.cutoff()];
    let profile = PrecisionProfile::default();
    let u = s - 1.0;

    let derivative = riemann_zeta_derivative_estimate(u, &profile)?;
    let mut acc = CompensatedSum::new();
    acc.add(-beta.density() * derivative.value);
    let mut error = beta.density() * derivative.abs_error;

    let ks: Vec<i64> = (-(trunc.cutoff() as i64)..=trunc.cutoff() as i64).collect();
    let terms = parallel::map_ordered(&ks, |&k| -> Result<(Complex64, f64)> {
        let c = if k >= 0 {
            coeffs[k as usize]
        } else {
            coeffs[(-k) as usize].conj()
        };
        let z = riemann_zeta_estimate(
            u - Complex64::new(0.0, k as f64 * beta.spacing()),
            &profile,
        )?;
        Ok((c * z.value, c.norm() * z.abs_error))
    });
    for term in terms {
        let (v, e) = term?;
        acc.add(v);
        error += e;
    }
    error += g_truncation_envelope(beta, coeffs, s)?;
    Ok(EvalResult {
        value: acc.sum(),
        abs_error_estimate: error,
        k_used: Some(trunc.cutoff()),
        quadrature: None,
    })
}

// ---------------------------------------------------------------------------
// F_β

/// e^x - 1 - x without cancellation near 0.
fn exp_minus_linear(x: f64) -> f64 {
    if x < 0.1 {
        let mut term = x * x / 2.0;
        let mut acc = 0.0;
        for j in 3..16 {
            acc += term;
            term *= x / j as f64;
        }
        acc
    } else {
        x.exp_m1() - x
    }
}

/// Majorant of Σ_{n>N} |S_β(n)| e^{-nx} from |S_β(n)| ≤ C n log n.
fn power_tail(c: f64, n: usize, x: f64) -> f64 {
    let next = (n + 1) as f64;
    let y = (-x).exp();
    let ratio = y * (1.0 + 2.0 / next);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    c * next * next.ln() * (-next * x).exp() / (1.0 - ratio)
}

/// Remainder integrand data for one s.
struct Remainder<'a> {
    table: &'a SbetaTable,
    exponent: Complex64,
    sigma: f64,
    target: f64,
}

impl Remainder<'_> {
    /// Pointwise weight multiplying the p-tail in the error budget.
    fn weight(&self, x: f64) -> f64 {
        exp_minus_linear(x) * x.powf(self.sigma - 1.0) * (1.0 + x) * (1.0 + x)
    }

    /// p(e^{-x}) = Σ_{n≥2} S_β(n) e^{-nx}. The sum stops once the tail is
    /// below rounding level, or at the end of the table provided the tail
    /// there is below the pointwise target; a data-dependent cut above
    /// rounding level would make the integrand jump.
    fn p(&self, x: f64) -> Result<f64> {
        let values = self.table.values();
        let n_max = self.table.n_max();
        let c = self.table.growth_constant();
        let weight = self.weight(x);
        let mut acc = 0.0;
        let mut comp = 0.0;
        let mut pow = (-2.0 * x).exp();
        let y = (-x).exp();
        let mut n = 2usize;
        loop {
            let term = values[n] * pow;
            let t = acc + term;
            comp += if acc.abs() >= term.abs() {
                (acc - t) + term
            } else {
                (term - t) + acc
            };
            acc = t;
            if n % 32 == 0 || n == n_max {
                let tail = power_tail(c, n, x);
                if tail <= 0.5 * f64::EPSILON * (acc + comp).abs() {
                    return Ok(acc + comp);
                }
                if n == n_max {
                    if tail * weight <= self.target {
                        return Ok(acc + comp);
                    }
                    let excess = (power_tail(c, n, x) * weight / self.target).ln();
                    let required = n + (excess / x).ceil().max(1.0) as usize;
                    return Err(Error::TableTooShort {
                        required,
                        available: n_max,
                    });
                }
            }
            n += 1;
            pow = if n % 256 == 0 {
                (-(n as f64) * x).exp()
            } else {
                pow * y
            };
        }
    }

    fn integrand(&self, x: f64) -> Result<Complex64> {
        let p = self.p(x)?;
        Ok(exp_minus_linear(x) * p * (self.exponent * x.ln()).exp())
    }

    /// Smallest lower limit at which the table still resolves p(e^{-x}).
    /// It depends on the table and target only, never on s, so the
    /// discarded piece stays holomorphic in s along a contour; the weight
    /// uses Re(s) → 0, the worst case on (0, 1).
    fn lower_limit(table: &SbetaTable, target: f64) -> f64 {
        let n_max = table.n_max();
        let c = table.growth_constant();
        let ok = |x: f64| {
            power_tail(c, n_max, x) * exp_minus_linear(x) / x * (1.0 + x) * (1.0 + x) <= target
        };
        let (mut lo, mut hi) = (1e-9f64, 1.0f64);
        if ok(lo) {
            return X_MIN_FLOOR;
        }
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi * 1.05).max(X_MIN_FLOOR)
    }

    /// Bound on |∫_0^a (e^x - 1 - x) p(e^{-x}) x^{s-1} dx| using
    /// |p(e^{-x})| ≤ C (log(1/x) + 1)/x² and e^x - 1 - x ≤ e^a x²/2.
    fn discarded_mass(&self, a: f64) -> f64 {
        let c = self.table.growth_constant();
        let sigma = self.sigma;
        c / 2.0 * a.exp() * a.powf(sigma) / sigma * ((1.0 / a).ln() + 1.0 / sigma + 1.0)
    }
}

/// F_β(s) = -S_β(1)(s+1) + s G_β(s+1) + R(s) with
/// R(s) = (1/Γ(s)) ∫_0^∞ (e^x - 1 - x) p(e^{-x}) x^{s-1} dx.
pub fn f_beta_eval(
    beta: BetaParam,
    s: Complex64,
    table: &SbetaTable,
    tol: f64,
) -> Result<EvalResult> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite argument {s}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if beta != table.beta() {
        return Err(Error::InvalidInput(format!(
            "table built for beta = {}, asked for {}",
            table.beta().get(),
            beta.get()
        )));
    }
    if !in_f_domain(s) {
        return Err(Error::OutOfDomain(format!(
            "F_beta is continued only to Re(s) > {G_DOMAIN_MARGIN}, got {s}"
        )));
    }
    pole_guard(beta, s, 1.0)?;

    let g = g_beta_eval(beta, s + 1.0, table.truncation())?;
    let s1 = table.get(1);

    let gamma = complex_gamma(s)?;
    let gamma_norm = gamma.norm();
    let remainder = Remainder {
        table,
        exponent: s - 1.0,
        sigma: s.re,
        target: tol / 10.0,
    };
    let lower = Remainder::lower_limit(table, remainder.target);
    let failure = RefCell::new(None);
    let integrand = |x: f64| match remainder.integrand(x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(f64::NAN, 0.0)
        }
    };
    let quad = integrate_from(&integrand, lower, tol * gamma_norm);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let quad = quad?;
    let r = quad.value / gamma;
    let r_error = (quad.abs_error_estimate + remainder.target + remainder.discarded_mass(lower))
        / gamma_norm;

    let value = -s1 * (s + 1.0) + s * g.value + r;
    Ok(EvalResult {
        value,
        abs_error_estimate: s.norm() * g.abs_error_estimate + r_error,
        k_used: Some(table.truncation().cutoff()),
        quadrature: Some(quad),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delange::delange_coefficient;
    use crate::digits::IntegerBase;
    use crate::integer_base::fb_eval;
    use crate::numerics::{laurent_coefficients, ContourSpec};

    fn beta(b: f64) -> BetaParam {
        BetaParam::new(b).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_basics() {
        let trunc = FourierTruncation::default();
        let t = build_sbeta_table(beta(2.0), 20_000, trunc).unwrap();
        let h0 = crate::delange::h_beta(beta(2.0), 0.0, trunc).unwrap().value;
        assert_eq!(t.get(1), h0);
        let base = IntegerBase::new(2).unwrap();
        for n in 1..=t.n_max() {
            let exact = crate::digits::cumulative_digit_sum(base, n as u64) as f64;
            assert!((t.get(n) - exact).abs() <= n as f64 * t.tail_per_n(), "n = {n}");
            if n >= 2 && n < t.n_max() {
                assert!(t.get(n + 1) >= t.get(n) - 0.1);
            }
        }
        assert!(build_sbeta_table(beta(2.0), 50, trunc).is_err());
    }

    #[test]
    fn g_domain_and_poles() {
        let trunc = FourierTruncation::new(50).unwrap();
        assert!(matches!(g_beta_eval(beta(2.5), c(1.0, 0.0), trunc), Err(Error::OutOfDomain(_))));
        let pole = c(2.0, beta(2.5).spacing());
        assert!(matches!(g_beta_eval(beta(2.5), pole, trunc), Err(Error::PoleAt(_))));
        assert!(in_f_domain(c(0.01, 0.0)) && !in_f_domain(c(0.0005, 0.0)));
    }

    #[test]
    fn g_residue_and_double_pole() {
        let b = beta(3.0);
        let trunc = FourierTruncation::new(200).unwrap();
        let f = |s: Complex64| g_beta_eval(b, s, trunc).map(|r| r.value);
        let center = c(2.0, b.spacing());
        let spec = ContourSpec::new(center, 0.4, 32).unwrap();
        let res = laurent_coefficients(f, &spec, &[1]).unwrap()[0];
        let expected = delange_coefficient(b, 1).unwrap().value;
        assert!((res - expected).norm() < 1e-5, "{res} vs {expected}");

        let spec = ContourSpec::new(c(2.0, 0.0), 0.4, 32).unwrap();
        let coeffs = laurent_coefficients(f, &spec, &[2, 1]).unwrap();
        assert!((coeffs[0] - b.density()).norm() < 1e-5);
        let c0 = delange_coefficient(b, 0).unwrap().value;
        assert!((coeffs[1] - c0).norm() < 1e-5);
    }

    #[test]
    fn g_conjugate_symmetry() {
        let trunc = FourierTruncation::new(100).unwrap();
        for s in [c(2.7, 1.3), c(1.4, -5.0)] {
            let a = g_beta_eval(beta(2.5), s, trunc).unwrap().value;
            let bb = g_beta_eval(beta(2.5), s.conj(), trunc).unwrap().value;
            assert!((a.conj() - bb).norm() < 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn residue_coherence_at_integer_beta() {
        for b in [2u64, 3] {
            let base = IntegerBase::new(b).unwrap();
            for k in 1..=3i64 {
                let bp = beta(b as f64);
                let w = c(0.0, k as f64 * bp.spacing());
                let via_beta = (1.0 + w) * delange_coefficient(bp, k).unwrap().value;
                let pole = crate::poles::pole_at(crate::integer_base::SeriesTag::Fb, base, 0, k)
                    .unwrap();
                assert!((via_beta - pole.residue).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn f_beta_agrees_with_integer_base() {
        let b = beta(2.0);
        let table = build_sbeta_table(b, 100_000, FourierTruncation::default()).unwrap();
        let s = c(2.5, 0.0);
        let f = f_beta_eval(b, s, &table, 1e-8).unwrap();
        let exact = fb_eval(IntegerBase::new(2).unwrap(), s, 6, 1e-12).unwrap();
        assert!((f.value - exact.value).norm() < 1e-2, "{} vs {}", f.value, exact.value);
    }

    #[test]
    fn f_beta_residues() {
        let b = beta(3.0);
        let table = build_sbeta_table(b, 100_000, FourierTruncation::new(200).unwrap()).unwrap();
        let f = |s: Complex64| f_beta_eval(b, s, &table, 1e-9).map(|r| r.value);
        let w = c(0.0, b.spacing());
        let spec = ContourSpec::new(1.0 + w, 0.4, 32).unwrap();
        let res = laurent_coefficients(f, &spec, &[1]).unwrap()[0];
        let expected = (1.0 + w) * delange_coefficient(b, 1).unwrap().value;
        assert!((res - expected).norm() < 1e-5, "{res} vs {expected}");

        let spec = ContourSpec::new(c(1.0, 0.0), 0.4, 32).unwrap();
        let coeffs = laurent_coefficients(f, &spec, &[2, 1]).unwrap();
        assert!((coeffs[0] - b.density()).norm() < 1e-5);
        let c0 = delange_coefficient(b, 0).unwrap().value;
        assert!((coeffs[1] - (c0 + b.density())).norm() < 1e-5);
    }

    #[test]
    fn f_domain_and_table_guards() {
        let b = beta(2.5);
        let table = build_sbeta_table(b, 1_000, FourierTruncation::new(50).unwrap()).unwrap();
        assert!(matches!(f_beta_eval(b, c(0.0, 0.0), &table, 1e-8), Err(Error::OutOfDomain(_))));
        assert!(matches!(f_beta_eval(b, c(1.0, 0.0), &table, 1e-8), Err(Error::PoleAt(_))));
        assert!(f_beta_eval(beta(3.0), c(2.0, 0.0), &table, 1e-8).is_err());
        let r = f_beta_eval(b, c(2.0, 0.5), &table, 1e-8).unwrap();
        assert!(r.value.re.is_finite());
    }
}
