//! The acceptance suite: thirteen numerical checks with their tolerances
//! and runtime ceilings, runnable individually or as a whole.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beta_series::{build_sbeta_table, f_beta_eval, g_beta_eval, DEFAULT_TABLE};
use crate::delange::{
    beta_grid, coefficients, delange_coefficient, figure_grids, h_beta, oscillation_bound,
    s_from_coefficients, BetaParam, Figure, FourierTruncation,
};
use crate::digits::{
    cumulative_digit_sum, differenced_digit_sum, DigitSumTable, IntegerBase,
};
use crate::error::{Error, Result};
use crate::integer_base::{fb_eval, gb_eval, zb_eval, SeriesTag};
use crate::numerics::{abel_tail_bound, direct_dirichlet_sum, log_power_tail};
use crate::poles::{certification_radius, contour_laurent, count_poles, pole_at, residue_check};
use crate::special::{riemann_zeta, PrecisionProfile};
use crate::sum::CompensatedSum;

/// Numerical thresholds of the suite at unit scale.
pub const TOL_CLOSED_FORM: f64 = 1e-6;
pub const TOL_CONTINUATION: f64 = 1e-5;
pub const TOL_K_INDEPENDENCE: f64 = 1e-7;
pub const TOL_RESIDUE_FB: f64 = 1e-6;
pub const TOL_RESIDUE_GB_SIMPLE: f64 = 1e-8;
pub const TOL_RESIDUE_GB_DOUBLE: f64 = 1e-6;
pub const TOL_ZB_RESIDUE: f64 = 1e-9;
pub const TOL_ZB_CONSTANT: f64 = 1e-8;
pub const TOL_DELANGE: f64 = 0.05;
pub const MIN_DELANGE_REDUCTION: f64 = 0.2;
pub const TOL_H_ZERO: f64 = 0.02;
pub const TOL_G_BETA: f64 = 1e-4;
pub const TOL_COHERENCE: f64 = 1e-2;
pub const TOL_LAURENT_IDENTITY: f64 = 1e-12;
pub const POLE_RATIO_BAND: (f64, f64) = (3.2, 4.8);
pub const FIG1_BAND: f64 = 0.5;
pub const TOL_SYMMETRY: f64 = 1e-10;

/// Run-wide knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every numerical tolerance (not the runtime ceilings).
    pub tol_scale: f64,
    /// Criterion filters; a criterion runs if any filter equals its number,
    /// equals its key, or is a prefix of its key.
    pub only: Vec<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol_scale: 1.0,
            only: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub key: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub runtime_limit_secs: Option<f64>,
}

impl CriterionReport {
    /// One-line human summary.
    pub fn line(&self) -> String {
        let limit = self
            .runtime_limit_secs
            .map_or(String::new(), |l| format!(" (limit {l:.0} s)"));
        format!(
            "[{}] {:>2} {:<15} {} | {:.2} s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.detail,
            self.elapsed_secs,
            limit
        )
    }
}

/// Static description of a criterion.
#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: usize,
    pub key: &'static str,
    pub title: &'static str,
    pub runtime_limit_secs: Option<f64>,
    check: fn(f64) -> Result<(bool, String)>,
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.trim().to_ascii_lowercase();
        f == self.id.to_string() || self.key.starts_with(f.as_str())
    }

    /// Runs the check, timing it; errors count as failures.
    pub fn run(&self, tol_scale: f64) -> CriterionReport {
        let start = Instant::now();
        let outcome = (self.check)(tol_scale);
        let elapsed = start.elapsed().as_secs_f64();
        let (numeric_pass, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error {}: {e}", e.kind())),
        };
        let in_time = self.runtime_limit_secs.map_or(true, |l| elapsed < l);
        let detail = if numeric_pass && !in_time {
            format!("{detail}; runtime exceeded")
        } else {
            detail
        };
        CriterionReport {
            id: self.id,
            key: self.key.to_string(),
            title: self.title.to_string(),
            passed: numeric_pass && in_time,
            detail,
            elapsed_secs: elapsed,
            runtime_limit_secs: self.runtime_limit_secs,
        }
    }
}

pub const CRITERIA: [Criterion; 13] = [
    Criterion {
        id: 1,
        key: "closed-form",
        title: "Z_b closed form against the differenced direct sum",
        runtime_limit_secs: Some(5.0),
        check: closed_form,
    },
    Criterion {
        id: 2,
        key: "continuation",
        title: "F_b and G_b against tail-bounded direct sums",
        runtime_limit_secs: Some(60.0),
        check: continuation,
    },
    Criterion {
        id: 3,
        key: "k-independence",
        title: "Values independent of the truncation order K",
        runtime_limit_secs: Some(60.0),
        check: k_independence,
    },
    Criterion {
        id: 4,
        key: "residues-fb",
        title: "F_b residues by contour integration",
        runtime_limit_secs: Some(120.0),
        check: residues_fb,
    },
    Criterion {
        id: 5,
        key: "residues-gb",
        title: "G_b residue at 1 and double pole at 2",
        runtime_limit_secs: Some(120.0),
        check: residues_gb,
    },
    Criterion {
        id: 6,
        key: "residues-zb",
        title: "Z_b Laurent data at 0",
        runtime_limit_secs: None,
        check: residues_zb,
    },
    Criterion {
        id: 7,
        key: "delange",
        title: "Delange formula reproduces S_b(n) at integer bases",
        runtime_limit_secs: Some(300.0),
        check: delange_equality,
    },
    Criterion {
        id: 8,
        key: "h-zero",
        title: "h_b(0) vanishes at integer bases",
        runtime_limit_secs: None,
        check: h_zero,
    },
    Criterion {
        id: 9,
        key: "g-beta",
        title: "G_beta against the direct sum over the S_beta table",
        runtime_limit_secs: None,
        check: g_beta_oracle,
    },
    Criterion {
        id: 10,
        key: "coherence",
        title: "F_beta at integer beta and the Laurent identity",
        runtime_limit_secs: None,
        check: coherence,
    },
    Criterion {
        id: 11,
        key: "pole-count",
        title: "Quadratic growth of the F_2 pole count",
        runtime_limit_secs: None,
        check: pole_count,
    },
    Criterion {
        id: 12,
        key: "figures",
        title: "Figure grids over their beta ranges",
        runtime_limit_secs: Some(600.0),
        check: figures,
    },
    Criterion {
        id: 13,
        key: "symmetry",
        title: "Conjugate symmetry of every evaluator",
        runtime_limit_secs: None,
        check: symmetry,
    },
];

/// Looks a criterion up by number.
pub fn criterion(id: usize) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Runs the selected criteria in order.
pub fn run_suite(options: &VerifyOptions) -> Result<Vec<CriterionReport>> {
    if !(options.tol_scale > 0.0 && options.tol_scale.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tol-scale must be positive, got {}",
            options.tol_scale
        )));
    }
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| options.only.is_empty() || options.only.iter().any(|f| c.matches(f)))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no criterion matches {:?}",
            options.only
        )));
    }
    Ok(selected.iter().map(|c| c.run(options.tol_scale)).collect())
}

fn base(b: u64) -> IntegerBase {
    IntegerBase::new(b).expect("fixed bases are valid")
}

fn beta(b: f64) -> BetaParam {
    BetaParam::new(b).expect("fixed betas are valid")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const EVAL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// 1

fn closed_form(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_CLOSED_FORM * scale;
    let n = 100_000u64;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for b in [2u64, 3, 10] {
        let bb = base(b);
        for s in [c(2.0, 0.0), c(3.0, 0.0), c(2.0, 5.0)] {
            let closed = zb_eval(bb, s)?;
            // partial sums of the coefficients are d_b(n) ≤ (b-1)(log_b n + 1)
            let c0 = (b - 1) as f64;
            let c1 = c0 / bb.ln();
            let direct = direct_dirichlet_sum(
                |m| differenced_digit_sum(bb, m) as f64,
                s,
                n,
                s.re,
                |m| abel_tail_bound(c0, c1, s, m),
            )?;
            let diff = (closed - direct.value).norm();
            worst = worst.max(diff);
            ok &= diff < tol && diff <= direct.abs_error_estimate + 1e-12;
        }
    }
    Ok((ok, format!("max |Z_b - direct| = {worst:.3e} (tol {tol:.1e})")))
}

// ---------------------------------------------------------------------------
// 2

fn continuation(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_CONTINUATION * scale;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for b in [2u64, 3] {
        let bb = base(b);
        let c0 = (b - 1) as f64;
        let c1 = c0 / bb.ln();

        let n_f = 1_000_000usize;
        let table = DigitSumTable::new(bb, n_f);
        let s = c(2.5, 0.0);
        let f = fb_eval(bb, s, 6, EVAL_TOL)?;
        // d_b(n) ≤ (b-1)(log_b n + 1)
        let direct = direct_dirichlet_sum(
            |m| table.digit_sum(m as usize) as f64,
            s,
            n_f as u64,
            s.re - 1.0,
            |m| log_power_tail(c0, c1, s.re, m),
        )?;
        let diff = (f.value - direct.value).norm();
        worst = worst.max(diff);
        ok &= diff < tol && diff <= f.abs_error_estimate + direct.abs_error_estimate;

        let n_g = 100_000usize;
        let s = c(3.5, 0.0);
        let g = gb_eval(bb, s, 6, EVAL_TOL)?;
        // S_b(n) ≤ n (b-1)(log_b n + 1)
        let direct = direct_dirichlet_sum(
            |m| table.cumulative(m as usize) as f64,
            s,
            n_g as u64,
            s.re - 2.0,
            |m| log_power_tail(c0, c1, s.re - 1.0, m),
        )?;
        let diff = (g.value - direct.value).norm();
        worst = worst.max(diff);
        ok &= diff < tol && diff <= g.abs_error_estimate + direct.abs_error_estimate;
    }
    Ok((ok, format!("max |continuation - direct| = {worst:.3e} (tol {tol:.1e})")))
}

// ---------------------------------------------------------------------------
// 3

fn k_independence(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_K_INDEPENDENCE * scale;
    let mut worst: f64 = 0.0;
    for b in [2u64, 3, 10] {
        let bb = base(b);
        for (s, k1, k2) in [(c(0.5, 0.3), 4, 8), (c(-1.5, 0.2), 8, 12)] {
            let a = fb_eval(bb, s, k1, EVAL_TOL)?.value;
            let d = fb_eval(bb, s, k2, EVAL_TOL)?.value;
            worst = worst.max((a - d).norm());
        }
        let s = c(1.5, 0.7);
        let a = gb_eval(bb, s, 4, EVAL_TOL)?.value;
        let d = gb_eval(bb, s, 8, EVAL_TOL)?.value;
        worst = worst.max((a - d).norm());
    }
    Ok((worst < tol, format!("max K-spread = {worst:.3e} (tol {tol:.1e})")))
}

// ---------------------------------------------------------------------------
// 4–6

fn residues_fb(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_RESIDUE_FB * scale;
    let b = base(2);
    let l2 = 2f64.ln();
    let zeta = riemann_zeta(c(0.0, 2.0 * PI / l2), &PrecisionProfile::default())?;
    // closed forms evaluated here, independently of the catalogue
    let expected = [
        (0usize, 1i64, -1.0 / Complex64::new(0.0, 2.0 * PI) * zeta),
        (1, 0, c(1.0 / (4.0 * l2), 0.0)),
        (2, 0, c(-1.0 / (24.0 * l2), 0.0)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, m, value) in expected {
        let p = pole_at(SeriesTag::Fb, b, k, m)?;
        let formula_gap = (p.residue - value).norm();
        let report = residue_check(&p, tol)?;
        ok &= report.passed && formula_gap < 1e-12;
        parts.push(format!(
            "s={:.3}{:+.3}i |contour-formula|={:.1e}",
            p.location.re, p.location.im, report.abs_diff
        ));
    }
    Ok((ok, format!("{} (tol {tol:.1e})", parts.join("; "))))
}

fn residues_gb(scale: f64) -> Result<(bool, String)> {
    let tol_simple = TOL_RESIDUE_GB_SIMPLE * scale;
    let tol_double = TOL_RESIDUE_GB_DOUBLE * scale;
    let mut ok = true;
    let mut worst_simple: f64 = 0.0;
    let mut worst_double: f64 = 0.0;
    for b in [2u64, 3] {
        let bb = base(b);
        let at_one = pole_at(SeriesTag::Gb, bb, 1, 0)?;
        ok &= (at_one.residue.re - (b + 1) as f64 / 12.0).abs() < 1e-15;
        let r = residue_check(&at_one, tol_simple)?;
        worst_simple = worst_simple.max(r.abs_diff);
        ok &= r.passed;

        let at_two = pole_at(SeriesTag::Gb, bb, 0, 0)?;
        let r = residue_check(&at_two, tol_double)?;
        worst_double = worst_double.max(r.abs_diff.max(r.laurent2_abs_diff.unwrap_or(0.0)));
        ok &= r.passed;
    }
    Ok((
        ok,
        format!(
            "Res(G_b,1) gap {worst_simple:.1e} (tol {tol_simple:.1e}); s=2 Laurent gap {worst_double:.1e} (tol {tol_double:.1e})"
        ),
    ))
}

fn residues_zb(scale: f64) -> Result<(bool, String)> {
    let tol_res = TOL_ZB_RESIDUE * scale;
    let tol_const = TOL_ZB_CONSTANT * scale;
    let mut worst_res: f64 = 0.0;
    let mut worst_const: f64 = 0.0;
    for b in [2u64, 3, 10] {
        let bb = base(b);
        let bf = b as f64;
        let lb = bb.ln();
        let coeffs = contour_laurent(SeriesTag::Zb, bb, c(0.0, 0.0), certification_radius(bb), &[1, 0])?;
        let residue = (bf - 1.0) / (2.0 * lb);
        let constant = -(bf + 1.0) / 4.0 + (bf - 1.0) * (2.0 * PI).ln() / (2.0 * lb);
        worst_res = worst_res.max((coeffs[0] - residue).norm());
        worst_const = worst_const.max((coeffs[1] - constant).norm());
    }
    Ok((
        worst_res < tol_res && worst_const < tol_const,
        format!(
            "a_-1 gap {worst_res:.1e} (tol {tol_res:.1e}); a_0 gap {worst_const:.1e} (tol {tol_const:.1e})"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 7–8

/// max over n ≤ n_max of |S_β(n) - S_b(n)| / n at integer β = b.
pub fn delange_max_error(b: u64, cutoff: usize, n_max: u64) -> Result<f64> {
    let bp = beta(b as f64);
    let coeffs = coefficients(bp, cutoff)?;
    let coeffs = &coeffs[..=cutoff];
    let bb = base(b);
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        let s = s_from_coefficients(bp, coeffs, n)?.value;
        let exact = cumulative_digit_sum(bb, n) as f64;
        worst = worst.max((s - exact).abs() / n as f64);
    }
    Ok(worst)
}

fn delange_equality(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_DELANGE * scale;
    let mut ok = true;
    let mut parts = Vec::new();
    for b in [2u64, 3, 5, 10] {
        let at_1000 = delange_max_error(b, 1000, 1000)?;
        let at_4000 = delange_max_error(b, 4000, 1000)?;
        let reduction = 1.0 - at_4000 / at_1000;
        ok &= at_1000 < tol && at_4000 < at_1000 && reduction >= MIN_DELANGE_REDUCTION;
        parts.push(format!("b={b}: {at_1000:.2e} -> {at_4000:.2e} ({:.0}%)", 100.0 * reduction));
    }
    Ok((ok, format!("{} (tol {tol:.2}, reduction >= 20%)", parts.join(", "))))
}

fn h_zero(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_H_ZERO * scale;
    let trunc = FourierTruncation::new(4000)?;
    let mut worst: f64 = 0.0;
    for b in [2.0, 3.0, 10.0] {
        worst = worst.max(h_beta(beta(b), 0.0, trunc)?.value.abs());
    }
    Ok((worst < tol, format!("max |h_b(0)| = {worst:.3e} (tol {tol:.2})")))
}

// ---------------------------------------------------------------------------
// 9

/// Σ_{n>N} (A log n + c) n^{1-s} by Euler–Maclaurin, with a bound on the
/// neglected correction.
fn smooth_tail(a: f64, c0: f64, s: Complex64, n: f64) -> (Complex64, f64) {
    let e = s - 2.0;
    let ln_n = n.ln();
    let n_pow = (-e * ln_n).exp();
    let integral = a * n_pow * (ln_n / e + 1.0 / (e * e)) + c0 * n_pow / e;
    let f_n = (a * ln_n + c0) * (-(s - 1.0) * ln_n).exp();
    let df_n = ((1.0 - s) * (a * ln_n + c0) + a) * (-s * ln_n).exp();
    let value = integral - f_n / 2.0 - df_n / 12.0;
    (value, df_n.norm() / 12.0)
}

fn g_beta_oracle(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_G_BETA * scale;
    let bp = beta(2.5);
    let trunc = FourierTruncation::default();
    let s = c(3.0, 0.0);
    let g = g_beta_eval(bp, s, trunc)?;

    let table = build_sbeta_table(bp, DEFAULT_TABLE, trunc)?;
    let n = table.n_max();
    let mut acc = CompensatedSum::new();
    for (m, v) in table.values().iter().enumerate().skip(1) {
        acc.add(*v * (-s * (m as f64).ln()).exp());
    }
    let c0 = delange_coefficient(bp, 0)?.value.re;
    let (smooth, smooth_err) = smooth_tail(bp.density(), c0, s, n as f64);
    // |h_β - c_β(0)| ≤ Σ_{k≠0}|c_β(k)| on the remaining oscillatory part
    let osc = oscillation_bound(table.coefficients())
        * (n as f64).powf(2.0 - s.re)
        / (s.re - 2.0);
    let oracle = acc.sum() + smooth;
    let oracle_err = smooth_err + osc;
    let diff = (g.value - oracle).norm();
    let ok = diff < tol && diff <= g.abs_error_estimate + oracle_err;
    Ok((
        ok,
        format!(
            "|G_beta - oracle| = {diff:.3e} (estimates {:.1e} + {oracle_err:.1e}, tol {tol:.0e})",
            g.abs_error_estimate
        ),
    ))
}

// ---------------------------------------------------------------------------
// 10–11

fn coherence(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_COHERENCE * scale;
    let tol_identity = TOL_LAURENT_IDENTITY * scale;
    let bp = beta(2.0);
    let table = build_sbeta_table(bp, DEFAULT_TABLE, FourierTruncation::default())?;
    let s = c(2.5, 0.0);
    let f_beta = f_beta_eval(bp, s, &table, 1e-8)?;
    let f_int = fb_eval(base(2), s, 6, EVAL_TOL)?;
    let diff = (f_beta.value - f_int.value).norm();

    let mut identity: f64 = 0.0;
    for b in 2u64..=10 {
        let bf = b as f64;
        let lb = bf.ln();
        let lhs = delange_coefficient(beta(bf), 0)?.value.re + (bf - 1.0) / (2.0 * lb);
        let rhs = (bf - 1.0) * (2.0 * PI).ln() / (2.0 * lb) - (bf + 1.0) / 4.0;
        identity = identity.max((lhs - rhs).abs());
    }
    Ok((
        diff < tol && identity < tol_identity,
        format!(
            "|F_beta - F_b| at 2.5 = {diff:.3e} (tol {tol:.0e}); Laurent identity gap {identity:.1e} (tol {tol_identity:.0e})"
        ),
    ))
}

fn pole_count(scale: f64) -> Result<(bool, String)> {
    let (lo, hi) = (
        4.0 - (4.0 - POLE_RATIO_BAND.0) * scale,
        4.0 + (POLE_RATIO_BAND.1 - 4.0) * scale,
    );
    let counts: Vec<usize> = [20.0, 40.0, 80.0]
        .iter()
        .map(|&r| count_poles(SeriesTag::Fb, base(2), r))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = counts.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let ok = ratios.iter().all(|r| (lo..=hi).contains(r));
    Ok((
        ok,
        format!("counts {counts:?}, ratios {ratios:.3?} (band [{lo:.1}, {hi:.1}])"),
    ))
}

// ---------------------------------------------------------------------------
// 12

/// The three figure grids at the default step and cutoff.
pub fn default_figure_grids(step: f64, trunc: FourierTruncation) -> Result<Vec<Vec<crate::delange::GridRow>>> {
    let hi = Figure::ALL
        .iter()
        .map(|f| f.range().1)
        .fold(f64::MIN, f64::max);
    let lo = Figure::ALL
        .iter()
        .map(|f| f.range().0)
        .fold(f64::MAX, f64::min);
    let betas = beta_grid(lo, hi, step)?;
    figure_grids(&Figure::ALL, &betas, trunc, true)
}

fn figures(scale: f64) -> Result<(bool, String)> {
    let band = FIG1_BAND * scale;
    let grids = default_figure_grids(0.01, FourierTruncation::default())?;
    let all_finite = grids
        .iter()
        .flatten()
        .all(|r| r.value.is_finite() && r.tail_bound.is_finite());
    let flat: Vec<f64> = grids[0]
        .iter()
        .filter(|r| r.beta >= 11.0 - 1e-9 && r.beta <= 15.0 + 1e-9)
        .map(|r| r.value)
        .collect();
    let spread = flat.iter().cloned().fold(f64::MIN, f64::max)
        - flat.iter().cloned().fold(f64::MAX, f64::min);
    let sizes: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    Ok((
        all_finite && spread < band,
        format!("rows {sizes:?}, all finite: {all_finite}, fig1 spread on [11,15] = {spread:.3} (band {band})"),
    ))
}

// ---------------------------------------------------------------------------
// 13

/// |f(conj s) - conj f(s)| relative to max(1, |f(s)|).
fn asymmetry<F>(f: F, s: Complex64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let a = f(s)?;
    let b = f(s.conj())?;
    Ok((b - a.conj()).norm() / a.norm().max(1.0))
}

const SYMMETRY_POINTS: usize = 100;

fn random_points<F>(rng: &mut ChaCha8Rng, re: (f64, f64), im: (f64, f64), admissible: F) -> Vec<Complex64>
where
    F: Fn(Complex64) -> bool,
{
    let mut points = Vec::with_capacity(SYMMETRY_POINTS);
    while points.len() < SYMMETRY_POINTS {
        let s = c(rng.gen_range(re.0..re.1), rng.gen_range(im.0..im.1));
        if admissible(s) {
            points.push(s);
        }
    }
    points
}

fn symmetry(scale: f64) -> Result<(bool, String)> {
    let tol = TOL_SYMMETRY * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: Vec<(String, f64)> = Vec::new();
    let clear_of = |tag: SeriesTag, b: IntegerBase| {
        move |s: Complex64| {
            crate::integer_base::nearest_pole(tag, b, s).map_or(true, |(_, d)| d > 1e-3)
        }
    };

    for b in [2u64, 3, 10] {
        let bb = base(b);
        let pts = random_points(&mut rng, (-3.0, 4.0), (-30.0, 30.0), clear_of(SeriesTag::Zb, bb));
        let w = pts
            .iter()
            .map(|&s| asymmetry(|z| zb_eval(bb, z), s))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        worst.push((format!("Zb{b}"), w));
    }
    let bb = base(2);
    let pts = random_points(&mut rng, (-2.0, 4.0), (-20.0, 20.0), clear_of(SeriesTag::Fb, bb));
    let w = pts
        .iter()
        .map(|&s| {
            let k = crate::integer_base::default_k(SeriesTag::Fb, s);
            asymmetry(|z| fb_eval(bb, z, k, EVAL_TOL).map(|r| r.value), s)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    worst.push(("Fb".into(), w));
    let pts = random_points(&mut rng, (-1.0, 4.0), (-20.0, 20.0), clear_of(SeriesTag::Gb, bb));
    let w = pts
        .iter()
        .map(|&s| {
            let k = crate::integer_base::default_k(SeriesTag::Gb, s);
            asymmetry(|z| gb_eval(bb, z, k, EVAL_TOL).map(|r| r.value), s)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    worst.push(("Gb".into(), w));

    let bp = beta(2.5);
    let trunc = FourierTruncation::new(200)?;
    let off_poles = |column: f64| {
        move |s: Complex64| {
            let k = (s.im / bp.spacing()).round();
            (s - c(column, k * bp.spacing())).norm() > 1e-3
        }
    };
    let pts = random_points(&mut rng, (1.2, 4.0), (-20.0, 20.0), off_poles(2.0));
    let w = pts
        .iter()
        .map(|&s| asymmetry(|z| g_beta_eval(bp, z, trunc).map(|r| r.value), s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    worst.push(("Gbeta".into(), w));

    let table = build_sbeta_table(bp, 10_000, trunc)?;
    let pts = random_points(&mut rng, (0.3, 3.0), (-10.0, 10.0), off_poles(1.0));
    let w = pts
        .iter()
        .map(|&s| asymmetry(|z| f_beta_eval(bp, z, &table, 1e-8).map(|r| r.value), s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    worst.push(("Fbeta".into(), w));

    let max = worst.iter().map(|(_, w)| *w).fold(0.0, f64::max);
    let parts: Vec<String> = worst.iter().map(|(n, w)| format!("{n} {w:.1e}")).collect();
    Ok((
        max < tol,
        format!("{} points each; {} (tol {tol:.0e})", SYMMETRY_POINTS, parts.join(", ")),
    ))
}
