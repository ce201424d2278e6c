//! Z_b, F_b and G_b for an integer base b on their meromorphic continuations.
//!
//! F_b and G_b are evaluated from their K-truncated Bernoulli expansions in
//! shifted copies of Z_b(s) = (b^s - b)/(b^s - 1) ζ(s), plus a remainder
//! integral that is holomorphic to the right of 1 - K (resp. 2 - K).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::digits::{p_lambert_exp, IntegerBase};
use crate::error::{Error, Result};
use crate::numerics::{integrate_zero_to_infinity, EvalResult};
use crate::special::{
    bernoulli_over_factorial, gamma_ratio, reciprocal_gamma, riemann_zeta_estimate, Estimate,
    PrecisionProfile, EULER_GAMMA,
};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesTag {
    Zb,
    Fb,
    Gb,
}

impl SeriesTag {
    pub const ALL: [SeriesTag; 3] = [SeriesTag::Zb, SeriesTag::Fb, SeriesTag::Gb];
}

impl fmt::Display for SeriesTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesTag::Zb => "Zb",
            SeriesTag::Fb => "Fb",
            SeriesTag::Gb => "Gb",
        })
    }
}

impl std::str::FromStr for SeriesTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zb" => Ok(SeriesTag::Zb),
            "fb" => Ok(SeriesTag::Fb),
            "gb" => Ok(SeriesTag::Gb),
            other => Err(Error::InvalidInput(format!("unknown series tag {other:?}"))),
        }
    }
}

/// Largest truncation order accepted by the expansions.
pub const MAX_K: usize = 40;
/// Points closer than this to a pole of F_b or G_b are refused.
pub const POLE_GUARD: f64 = 1e-6;
/// Pole tolerance for Z_b, measured in units of the lattice spacing.
pub const ZB_POLE_TOL: f64 = 1e-12;
/// Radius around s = 1 inside which Z_b uses its local expansion.
pub const ZB_LIMIT_RADIUS: f64 = 1e-6;
/// Remainder quadrature tolerance used when the caller has no preference.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Vertical spacing 2π / log b of the pole lattices.
pub fn lattice_spacing(b: IntegerBase) -> f64 {
    2.0 * PI / b.ln()
}

/// Whether column k of the lattice carries poles (odd k ≥ 3 never do,
/// since B_k = 0, and G_b has no k = 1 column).
pub fn lattice_column(tag: SeriesTag, k: usize) -> bool {
    match tag {
        SeriesTag::Zb => k == 0,
        SeriesTag::Fb => k <= 1 || k % 2 == 0,
        SeriesTag::Gb => k % 2 == 0,
    }
}

/// Real part of column k.
pub fn lattice_column_re(tag: SeriesTag, k: usize) -> f64 {
    let offset = match tag {
        SeriesTag::Zb => 0.0,
        SeriesTag::Fb => 1.0,
        SeriesTag::Gb => 2.0,
    };
    offset - k as f64
}

/// Location of the lattice pole (k, m).
pub fn lattice_point(tag: SeriesTag, b: IntegerBase, k: usize, m: i64) -> Complex64 {
    Complex64::new(lattice_column_re(tag, k), m as f64 * lattice_spacing(b))
}

/// The pole of `tag` nearest to `s` among the neighbouring lattice columns
/// (and the isolated pole of G_b at 1), with its distance.
pub fn nearest_pole(tag: SeriesTag, b: IntegerBase, s: Complex64) -> Option<(Complex64, f64)> {
    let spacing = lattice_spacing(b);
    let m = (s.im / spacing).round() as i64;
    let offset = lattice_column_re(tag, 0);
    let kf = offset - s.re;
    let mut best: Option<(Complex64, f64)> = None;
    let mut consider = |p: Complex64| {
        let d = (s - p).norm();
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((p, d));
        }
    };
    for k in [kf.floor(), kf.ceil(), kf.floor() - 1.0, kf.ceil() + 1.0] {
        if k < 0.0 {
            continue;
        }
        let k = k as usize;
        if lattice_column(tag, k) {
            for dm in [-1, 0, 1] {
                consider(lattice_point(tag, b, k, m + dm));
            }
        }
    }
    if tag == SeriesTag::Gb {
        consider(Complex64::new(1.0, 0.0));
    }
    best
}

fn guard(tag: SeriesTag, b: IntegerBase, s: Complex64) -> Result<()> {
    if let Some((p, d)) = nearest_pole(tag, b, s) {
        if d < POLE_GUARD {
            return Err(Error::PoleAt(p));
        }
    }
    Ok(())
}

fn check_argument(s: Complex64) -> Result<()> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite argument {s}")))
    }
}

// ---------------------------------------------------------------------------
// Z_b

/// (b^s - b)/(b^s - 1), written in b^{-s} on the right half-plane so
/// neither form overflows.
fn zb_factor(b: IntegerBase, s: Complex64) -> Complex64 {
    let lb = b.ln();
    if s.re > 0.0 {
        let inv = (-s * lb).exp();
        (1.0 - b.as_f64() * inv) / (1.0 - inv)
    } else {
        let pow = (s * lb).exp();
        (pow - b.as_f64()) / (pow - 1.0)
    }
}

/// Z_b(s) with an error estimate.
pub fn zb_estimate(b: IntegerBase, s: Complex64, profile: &PrecisionProfile) -> Result<Estimate> {
    check_argument(s)?;
    let spacing = lattice_spacing(b);
    let lattice = s / Complex64::new(0.0, spacing);
    if (lattice - lattice.re.round()).norm() < ZB_POLE_TOL {
        return Err(Error::PoleAt(Complex64::new(0.0, lattice.re.round() * spacing)));
    }
    let u = s - 1.0;
    if u.norm() < ZB_LIMIT_RADIUS {
        let lb = b.ln();
        let bf = b.as_f64();
        let lead = bf * lb / (bf - 1.0);
        let slope = lead * (0.5 * lb + EULER_GAMMA - bf * lb / (bf - 1.0));
        return Ok(Estimate {
            value: lead + slope * u,
            abs_error: lead * lb * lb * u.norm_sqr() + f64::EPSILON * lead,
        });
    }
    let factor = zb_factor(b, s);
    let zeta = riemann_zeta_estimate(s, profile)?;
    let value = factor * zeta.value;
    Ok(Estimate {
        value,
        abs_error: factor.norm() * zeta.abs_error + 4.0 * f64::EPSILON * value.norm(),
    })
}

/// Z_b(s) = Σ (d_b(n) - d_b(n-1)) n^{-s}, continued to all s off the lattice
/// 2πim / log b.
pub fn zb_eval(b: IntegerBase, s: Complex64) -> Result<Complex64> {
    zb_estimate(b, s, &PrecisionProfile::default()).map(|e| e.value)
}

// ---------------------------------------------------------------------------
// Truncation orders

/// Smallest admissible truncation order for `tag` at `s`.
pub fn min_k(tag: SeriesTag, s: Complex64) -> usize {
    let (offset, floor) = match tag {
        SeriesTag::Gb => (2.0, 2),
        _ => (1.0, 1),
    };
    // need Re(s) > offset - K + 0.05
    let need = (offset + 0.05 - s.re).floor() + 1.0;
    (need.max(floor as f64)) as usize
}

/// Default K: max(4, ceil(1 - Re s) + 4) for F_b and ceil(2 - Re s) + 4 for
/// G_b, rounded up to even.
pub fn default_k(tag: SeriesTag, s: Complex64) -> usize {
    let offset = if tag == SeriesTag::Gb { 2.0 } else { 1.0 };
    let k = ((offset - s.re).ceil() + 4.0).max(4.0) as usize;
    let k = k + k % 2;
    k.max(min_k(tag, s))
}

fn check_order(tag: SeriesTag, s: Complex64, k: usize, tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let floor = if tag == SeriesTag::Gb { 2 } else { 1 };
    if k < floor || k > MAX_K {
        return Err(Error::InvalidInput(format!(
            "truncation order {k} outside {floor}..={MAX_K}"
        )));
    }
    if k < min_k(tag, s) {
        let offset = lattice_column_re(tag, 0);
        return Err(Error::OutOfDomain(format!(
            "Re(s) = {} is not > {} - K + 0.05 for K = {k}",
            s.re, offset
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Remainder integrands

/// Generating-function kernels whose Taylor tails drive the remainders.
#[derive(Clone, Copy)]
enum Kernel {
    /// x/(1 - e^{-x}) = Σ (-1)^k B_k x^k / k!
    Fb,
    /// x² e^{-x}/(1 - e^{-x})² = 1 - Σ_{k≥2} (k-1) B_k x^k / k!
    Gb,
}

const TAIL_SERIES_LIMIT: f64 = 3.0;
const BERNOULLI_TABLE: usize = 160;

impl Kernel {
    fn coefficient(self, k: usize) -> f64 {
        let bk = bernoulli_over_factorial(k);
        match self {
            Kernel::Fb => {
                if k % 2 == 1 {
                    -bk
                } else {
                    bk
                }
            }
            Kernel::Gb => match k {
                0 => 1.0,
                1 => 0.0,
                _ => -((k - 1) as f64) * bk,
            },
        }
    }

    fn closed_form(self, x: f64) -> f64 {
        let em = -(-x).exp_m1();
        match self {
            Kernel::Fb => x / em,
            Kernel::Gb => x * x * (-x).exp() / (em * em),
        }
    }

    /// (kernel(x) - Σ_{k≤K} c_k x^k) / x^{K+1}.
    fn normalized_tail(self, order: usize, x: f64) -> f64 {
        if x < TAIL_SERIES_LIMIT {
            let mut acc = 0.0;
            let mut pow = 1.0;
            for k in order + 1..BERNOULLI_TABLE {
                let term = self.coefficient(k) * pow;
                acc += term;
                if term != 0.0 && k > order + 2 && term.abs() < 1e-18 * acc.abs() {
                    break;
                }
                pow *= x;
            }
            acc
        } else {
            let mut poly = 0.0;
            for k in (0..=order).rev() {
                poly = poly * x + self.coefficient(k);
            }
            (self.closed_form(x) - poly) / x.powi(order as i32 + 1)
        }
    }
}

/// (1/Γ(s)) ∫_0^∞ tail(x) p(e^{-x}) x^{s + K - shift} dx.
fn remainder(
    kernel: Kernel,
    b: IntegerBase,
    s: Complex64,
    order: usize,
    shift: f64,
    tol: f64,
) -> Result<(Complex64, f64, Option<crate::numerics::QuadratureResult>)> {
    let rg = reciprocal_gamma(s);
    if rg.norm() == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0, None));
    }
    let exponent = s + order as f64 - shift;
    let integrand = move |x: f64| {
        let weight = kernel.normalized_tail(order, x) * p_lambert_exp(b, x);
        if weight == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        weight * (exponent * x.ln()).exp()
    };
    let quad_tol = tol / rg.norm().max(1e-300);
    let quad = integrate_zero_to_infinity(integrand, quad_tol.max(1e-15))?;
    Ok((rg * quad.value, rg.norm() * quad.abs_error_estimate, Some(quad)))
}

// ---------------------------------------------------------------------------
// F_b and G_b

fn zb_shifted(
    b: IntegerBase,
    s: Complex64,
    profile: &PrecisionProfile,
) -> Result<Estimate> {
    zb_estimate(b, s, profile)
}

/// F_b(s) = Σ d_b(n) n^{-s}, continued through the K-truncated expansion
/// Σ_{k≤K} (-1)^k B_k/k! Γ(s-1+k)/Γ(s) Z_b(s-1+k) + R_K(s).
pub fn fb_eval(b: IntegerBase, s: Complex64, k: usize, tol: f64) -> Result<EvalResult> {
    check_argument(s)?;
    check_order(SeriesTag::Fb, s, k, tol)?;
    guard(SeriesTag::Fb, b, s)?;
    let profile = PrecisionProfile::default();
    let mut acc = CompensatedSum::new();
    let mut error = 0.0;
    for j in 0..=k {
        let c = Kernel::Fb.coefficient(j);
        if c == 0.0 {
            continue;
        }
        let weight = c * gamma_ratio(s, j)?;
        let z = zb_shifted(b, s - 1.0 + j as f64, &profile)?;
        acc.add(weight * z.value);
        error += weight.norm() * z.abs_error;
    }
    let (rem, rem_err, quad) = remainder(Kernel::Fb, b, s, k, 1.0, tol)?;
    acc.add(rem);
    Ok(EvalResult {
        value: acc.sum(),
        abs_error_estimate: error + rem_err,
        k_used: Some(k),
        quadrature: quad,
    })
}

/// G_b(s) = Σ S_b(n) n^{-s}, continued through
/// Z_b(s-2)/((s-1)(s-2)) - Σ_{2≤k≤K} B_k/(k (k-2)!) (s)_{k-2} Z_b(s-2+k) + R_K(s).
pub fn gb_eval(b: IntegerBase, s: Complex64, k: usize, tol: f64) -> Result<EvalResult> {
    check_argument(s)?;
    check_order(SeriesTag::Gb, s, k, tol)?;
    guard(SeriesTag::Gb, b, s)?;
    let profile = PrecisionProfile::default();
    let mut acc = CompensatedSum::new();
    let mut error = 0.0;

    let lead_weight = ((s - 1.0) * (s - 2.0)).inv();
    let z = zb_shifted(b, s - 2.0, &profile)?;
    acc.add(lead_weight * z.value);
    error += lead_weight.norm() * z.abs_error;

    let mut rising = Complex64::new(1.0, 0.0);
    for j in 2..=k {
        if j > 2 {
            rising *= s + (j - 3) as f64;
        }
        let c = Kernel::Gb.coefficient(j);
        if c == 0.0 {
            continue;
        }
        let weight = c * rising;
        let z = zb_shifted(b, s - 2.0 + j as f64, &profile)?;
        acc.add(weight * z.value);
        error += weight.norm() * z.abs_error;
    }
    let (rem, rem_err, quad) = remainder(Kernel::Gb, b, s, k, 2.0, tol)?;
    acc.add(rem);
    Ok(EvalResult {
        value: acc.sum(),
        abs_error_estimate: error + rem_err,
        k_used: Some(k),
        quadrature: quad,
    })
}

/// Dispatches to the evaluator for `tag`; `k` is ignored for Z_b and
/// defaults per [`default_k`] otherwise.
pub fn eval_series(
    tag: SeriesTag,
    b: IntegerBase,
    s: Complex64,
    k: Option<usize>,
    tol: f64,
) -> Result<EvalResult> {
    match tag {
        SeriesTag::Zb => {
            let e = zb_estimate(b, s, &PrecisionProfile::default())?;
            Ok(EvalResult {
                value: e.value,
                abs_error_estimate: e.abs_error,
                k_used: None,
                quadrature: None,
            })
        }
        SeriesTag::Fb => fb_eval(b, s, k.unwrap_or_else(|| default_k(tag, s)), tol),
        SeriesTag::Gb => gb_eval(b, s, k.unwrap_or_else(|| default_k(tag, s)), tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(b: u64) -> IntegerBase {
        IntegerBase::new(b).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zb_closed_values() {
        let z = zb_eval(base(2), c(2.0, 0.0)).unwrap();
        assert!((z.re - PI * PI / 9.0).abs() < 1e-13);
        let z = zb_eval(base(3), c(2.0, 0.0)).unwrap();
        assert!((z.re - PI * PI / 8.0).abs() < 1e-13);
    }

    #[test]
    fn zb_removable_point() {
        let b = base(2);
        let at = zb_eval(b, c(1.0, 0.0)).unwrap();
        assert!((at.re - 2.0 * 2f64.ln()).abs() < 1e-14);
        // the local branch and the closed form agree across the switch radius
        for u in [c(2e-6, 0.0), c(0.0, 3e-6), c(-1.5e-6, 1e-6)] {
            let outside = zb_eval(b, c(1.0, 0.0) + u).unwrap();
            let inside = zb_eval(b, c(1.0, 0.0) + u * 0.4).unwrap();
            let slope = (outside - inside) / (u * 0.6);
            assert!((outside - at - slope * u).norm() < 1e-9);
        }
    }

    #[test]
    fn zb_poles_are_refused() {
        let b = base(2);
        assert!(matches!(zb_eval(b, c(0.0, 0.0)), Err(Error::PoleAt(_))));
        let p = lattice_point(SeriesTag::Zb, b, 0, 3);
        assert!(matches!(zb_eval(b, p), Err(Error::PoleAt(_))));
        assert!(zb_eval(b, p + 1e-6).is_ok());
    }

    #[test]
    fn zb_conjugate_symmetry() {
        let b = base(10);
        for s in [c(0.3, 4.0), c(-2.5, 11.0), c(3.0, -0.7)] {
            let a = zb_eval(b, s).unwrap();
            let bb = zb_eval(b, s.conj()).unwrap();
            assert!((a.conj() - bb).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn default_orders() {
        assert_eq!(default_k(SeriesTag::Fb, c(2.5, 0.0)), 4);
        assert_eq!(default_k(SeriesTag::Fb, c(-1.5, 0.2)), 8);
        assert_eq!(default_k(SeriesTag::Gb, c(1.5, 0.7)), 6);
        assert_eq!(min_k(SeriesTag::Fb, c(-1.5, 0.0)), 3);
        assert_eq!(min_k(SeriesTag::Fb, c(-1.94, 0.0)), 3);
        assert_eq!(min_k(SeriesTag::Fb, c(-1.96, 0.0)), 4);
        assert_eq!(min_k(SeriesTag::Gb, c(3.5, 0.0)), 2);
    }

    #[test]
    fn domain_checks() {
        let b = base(2);
        assert!(matches!(fb_eval(b, c(-1.5, 0.0), 2, 1e-10), Err(Error::OutOfDomain(_))));
        assert!(matches!(fb_eval(b, c(2.0, 0.0), 0, 1e-10), Err(Error::InvalidInput(_))));
        assert!(matches!(fb_eval(b, c(2.0, 0.0), 41, 1e-10), Err(Error::InvalidInput(_))));
        assert!(matches!(gb_eval(b, c(3.0, 0.0), 1, 1e-10), Err(Error::InvalidInput(_))));
        assert!(matches!(fb_eval(b, c(0.0, 0.0), 6, 1e-10), Err(Error::PoleAt(_))));
        assert!(matches!(fb_eval(b, c(-3.0, 1e-7), 8, 1e-10), Err(Error::PoleAt(_))));
        assert!(matches!(gb_eval(b, c(1.0, 0.0), 6, 1e-10), Err(Error::PoleAt(_))));
        // odd columns beyond k = 1 are not poles
        assert!(fb_eval(b, c(-2.0, 0.0), 8, 1e-10).is_ok());
        assert!(gb_eval(b, c(-1.0, 0.0), 8, 1e-10).is_ok());
    }

    #[test]
    fn kernel_tails_match_closed_form() {
        for kernel in [Kernel::Fb, Kernel::Gb] {
            for order in [2usize, 5, 8] {
                // both branches agree where they meet
                let x = TAIL_SERIES_LIMIT;
                let series = {
                    let mut acc = 0.0;
                    let mut pow = 1.0;
                    for k in order + 1..BERNOULLI_TABLE {
                        acc += kernel.coefficient(k) * pow;
                        pow *= x;
                    }
                    acc
                };
                let direct = kernel.normalized_tail(order, x);
                assert!((series - direct).abs() < 1e-9 * series.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn fb_matches_direct_sum() {
        let b = base(2);
        let s = c(2.5, 0.0);
        let r = fb_eval(b, s, 6, 1e-11).unwrap();
        let n = 200_000u64;
        let mut acc = CompensatedSum::new();
        for m in 1..=n {
            let d = crate::digits::digit_sum(b, m) as f64;
            acc.add(d * (-s * (m as f64).ln()).exp());
        }
        // d_2(n) ≤ log2(n) + 1
        let tail = crate::numerics::log_power_tail(1.0, 1.0 / 2f64.ln(), s.re, n);
        assert!((r.value - acc.sum()).norm() <= r.abs_error_estimate + tail);
    }

    #[test]
    fn fb_k_independence() {
        let b = base(2);
        let s = c(0.5, 0.3);
        let a = fb_eval(b, s, 4, 1e-12).unwrap();
        let bb = fb_eval(b, s, 8, 1e-12).unwrap();
        assert!((a.value - bb.value).norm() < 1e-8, "{} {}", a.value, bb.value);
    }

    #[test]
    fn gb_k_independence() {
        let b = base(2);
        let s = c(1.5, 0.7);
        let a = gb_eval(b, s, 4, 1e-12).unwrap();
        let bb = gb_eval(b, s, 8, 1e-12).unwrap();
        assert!((a.value - bb.value).norm() < 1e-8, "{} {}", a.value, bb.value);
    }
}
