//! Quadrature on (0, ∞), contour extraction of Laurent coefficients, and
//! tail-bounded direct Dirichlet sums.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel;
use crate::sum::CompensatedSum;

/// Upper limit on integrand evaluations for one integral.
pub const EVALUATION_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluation_count: usize,
    /// Estimate of the integral of |f|, which sets the rounding floor.
    pub abs_mass: f64,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            evaluation_count: 0,
            abs_mass: 0.0,
        }
    }

    fn absorb(&mut self, other: &QuadratureResult) {
        self.value += other.value;
        self.abs_error_estimate += other.abs_error_estimate;
        self.evaluation_count += other.evaluation_count;
        self.abs_mass += other.abs_mass;
    }
}

/// A value with its error estimate and the parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    /// Bernoulli truncation order, when the evaluator has one.
    pub k_used: Option<usize>,
    pub quadrature: Option<QuadratureResult>,
}

fn check_value(x: f64, v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence(format!("integrand not finite at x = {x:e}")))
    }
}

// ---------------------------------------------------------------------------
// Tanh–sinh

const TS_T_MAX: f64 = 6.0;
const TS_MAX_LEVEL: usize = 12;

/// Abscissa and weight dx/dt of the tanh–sinh map of (a, b] at parameter t.
/// The point is represented relative to whichever endpoint is closer, so
/// abscissae next to `a` keep full relative precision.
fn ts_node(a: f64, b: f64, t: f64) -> Option<(f64, f64)> {
    let width = b - a;
    let v = PI * t.sinh();
    let (u, one_minus_u) = if v >= 0.0 {
        let e = (-v).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = v.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    let x = if u < 0.5 {
        a + width * u
    } else {
        b - width * one_minus_u
    };
    let w = width * PI * t.cosh() * u * one_minus_u;
    if w > 0.0 && x > a && x < b {
        Some((x, w))
    } else {
        None
    }
}

/// Multiple of machine epsilon, relative to the absolute mass of an integrand,
/// below which quadrature error estimates are treated as rounding noise.
pub const ROUNDOFF_FACTOR: f64 = 1024.0;

/// Double-exponential quadrature on the open interval (a, b); tolerates
/// algebraic endpoint singularities.
pub fn tanh_sinh<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut evals = 0usize;
    let mut sum = CompensatedSum::new();
    let mut mass = 0.0;
    let mut eval_at = |t: f64, sum: &mut CompensatedSum, mass: &mut f64| -> Result<()> {
        if let Some((x, w)) = ts_node(a, b, t) {
            let v = check_value(x, f(x))? * w;
            evals += 1;
            sum.add(v);
            *mass += v.norm();
        }
        Ok(())
    };

    let steps = TS_T_MAX as i64;
    for k in -steps..=steps {
        eval_at(k as f64, &mut sum, &mut mass)?;
    }
    let mut h = 1.0;
    let mut prev = sum.sum() * h;
    for level in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let count = (TS_T_MAX / h) as i64;
        let mut k = -count + if count % 2 == 0 { 1 } else { 0 };
        while k <= count {
            eval_at(k as f64 * h, &mut sum, &mut mass)?;
            k += 2;
        }
        let current = sum.sum() * h;
        let err = (current - prev).norm();
        let floor = ROUNDOFF_FACTOR * f64::EPSILON * mass * h;
        if level >= 3 && err <= tol.max(floor) {
            return Ok(QuadratureResult {
                value: current,
                abs_error_estimate: err.max(floor),
                evaluation_count: evals,
                abs_mass: mass * h,
            });
        }
        prev = current;
    }
    Err(Error::NonConvergence(format!(
        "tanh-sinh on ({a}, {b}) did not reach {tol:e}"
    )))
}

// ---------------------------------------------------------------------------
// Gauss–Kronrod 7/15

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    mass: f64,
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mid = check_value(center, f(center))?;
    let mut kronrod = mid * GK_WEIGHTS[7];
    let mut gauss = mid * G_WEIGHTS[3];
    let mut mass = mid.norm() * GK_WEIGHTS[7];
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let lo = check_value(center - dx, f(center - dx))?;
        let hi = check_value(center + dx, f(center + dx))?;
        kronrod += (lo + hi) * GK_WEIGHTS[i];
        mass += (lo.norm() + hi.norm()) * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += (lo + hi) * G_WEIGHTS[i / 2];
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
        mass: mass * half,
    })
}

/// Adaptive Gauss–Kronrod on [a, b], bisecting the worst segment.
pub fn gauss_kronrod<F>(f: &F, a: f64, b: f64, tol: f64, budget: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut segments = vec![gk15(f, a, b)?];
    let mut evals = 15;
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let mass: f64 = segments.iter().map(|s| s.mass).sum();
        let floor = ROUNDOFF_FACTOR * f64::EPSILON * mass;
        if error <= tol.max(floor) {
            let mut value = CompensatedSum::new();
            value.extend(segments.iter().map(|s| s.value));
            return Ok(QuadratureResult {
                value: value.sum(),
                abs_error_estimate: error.max(floor),
                evaluation_count: evals,
                abs_mass: mass,
            });
        }
        if evals + 30 > budget {
            return Err(Error::NonConvergence(format!(
                "Gauss-Kronrod on [{a}, {b}] exhausted its budget at error {error:e}"
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gk15(f, seg.a, mid)?);
        segments.push(gk15(f, mid, seg.b)?);
        evals += 30;
    }
}

// ---------------------------------------------------------------------------
// Semi-infinite integrals

const MIN_PANEL_END: f64 = 32.0;

/// ∫_lower^∞ f(x) dx: tanh–sinh on (lower, 1] when lower < 1, then adaptive
/// Gauss–Kronrod on geometric panels [1,2], [2,4], ... until a panel's
/// absolute mass drops below tol/10 while shrinking.
pub fn integrate_from<F>(f: &F, lower: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !(lower >= 0.0) {
        return Err(Error::InvalidInput(format!("lower limit must be >= 0, got {lower}")));
    }
    let mut total = QuadratureResult::zero();
    let mut start = lower;
    if lower < 1.0 {
        let head = tanh_sinh(f, lower, 1.0, 0.5 * tol)?;
        total.absorb(&head);
        start = 1.0;
    }
    let panel_tol = tol / 16.0;
    let mut previous_mass = f64::INFINITY;
    let mut a = start;
    loop {
        let b = 2.0 * a;
        let budget = EVALUATION_LIMIT.saturating_sub(total.evaluation_count);
        let panel = gauss_kronrod(f, a, b, panel_tol, budget)?;
        let mass = panel_mass(f, a, b)?;
        total.absorb(&panel);
        total.evaluation_count += 15;
        if b >= MIN_PANEL_END && mass < tol / 10.0 && mass <= previous_mass {
            // geometric decay beyond the last panel is bounded by its mass
            total.abs_error_estimate += mass;
            break;
        }
        if total.evaluation_count > EVALUATION_LIMIT || !b.is_finite() || b > 1e6 {
            return Err(Error::NonConvergence(format!(
                "integrand still carries mass {mass:e} on [{a}, {b}]"
            )));
        }
        previous_mass = mass;
        a = b;
    }
    // no rule resolves an integral below the rounding level of its pieces
    let floor = ROUNDOFF_FACTOR * f64::EPSILON * total.abs_mass;
    if total.abs_error_estimate > tol + floor {
        return Err(Error::NonConvergence(format!(
            "quadrature error estimate {:e} exceeds {tol:e}",
            total.abs_error_estimate
        )));
    }
    Ok(total)
}

fn panel_mass<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    Ok(gk15(&|x: f64| Complex64::new(f(x).norm(), 0.0), a, b)?.value.re)
}

/// ∫_0^∞ f(x) dx for f with at worst x^a (a > -1) behaviour at 0 and
/// exponential decay at ∞.
pub fn integrate_zero_to_infinity<F>(f: F, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_from(&f, 0.0, tol)
}

// ---------------------------------------------------------------------------
// Contours

/// Circle used to extract Laurent coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub node_count: usize,
}

/// Result changes above this under node doubling count as non-convergence.
pub const CONTOUR_DOUBLING_TOL: f64 = 1e-8;
const MAX_DOUBLINGS: usize = 4;

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64, node_count: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("contour radius {radius} must be positive")));
        }
        if node_count < 32 || !node_count.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "node count {node_count} must be a power of two >= 32"
            )));
        }
        Ok(Self {
            center,
            radius,
            node_count,
        })
    }

    fn node(&self, index: usize, count: usize) -> (Complex64, Complex64) {
        let theta = 2.0 * PI * index as f64 / count as f64;
        let unit = Complex64::from_polar(1.0, theta);
        (self.center + self.radius * unit, unit)
    }
}

/// a_{-j} for each requested j from one set of trapezoid evaluations on the
/// circle. j = 1 is the residue; j ≤ 0 gives regular coefficients.
/// Node count doubles until every coefficient moves by at most 1e-8.
pub fn laurent_coefficients<F>(f: F, spec: &ContourSpec, orders: &[i32]) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    let coefficients = |values: &[Complex64], count: usize| -> Vec<Complex64> {
        orders
            .iter()
            .map(|&j| {
                let mut acc = CompensatedSum::new();
                for (n, v) in values.iter().enumerate() {
                    let (_, unit) = spec.node(n, count);
                    acc.add(*v * unit.powi(j));
                }
                acc.sum() * spec.radius.powi(j) / count as f64
            })
            .collect()
    };
    let evaluate = |indices: Vec<usize>, count: usize| -> Result<Vec<Complex64>> {
        let points: Vec<Complex64> = indices.iter().map(|&n| spec.node(n, count).0).collect();
        parallel::map_ordered(&points, |&s| f(s)).into_iter().collect()
    };

    let mut count = spec.node_count;
    let mut values = evaluate((0..count).collect(), count)?;
    let mut current = coefficients(&values, count);
    for _ in 0..MAX_DOUBLINGS {
        let odd = evaluate((0..count).map(|n| 2 * n + 1).collect(), 2 * count)?;
        let mut merged = Vec::with_capacity(2 * count);
        for (even, odd) in values.iter().zip(&odd) {
            merged.push(*even);
            merged.push(*odd);
        }
        count *= 2;
        values = merged;
        let refined = coefficients(&values, count);
        let change = current
            .iter()
            .zip(&refined)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        current = refined;
        if change <= CONTOUR_DOUBLING_TOL {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence(format!(
        "contour coefficients still moving at {count} nodes"
    )))
}

/// a_{-j} = (1/2πi) ∮ f(s) (s - center)^{j-1} ds.
pub fn laurent_coefficient<F>(f: F, spec: &ContourSpec, j: i32) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    Ok(laurent_coefficients(f, spec, &[j])?[0])
}

// ---------------------------------------------------------------------------
// Direct Dirichlet sums

/// Σ_{n=1}^{N} coeff(n) n^{-s}, summed in ascending order with compensation.
/// `margin` is the caller's assertion of Re(s) minus the abscissa that makes
/// `tail_bound(N)` valid; the estimate reported is `tail_bound(N)`.
pub fn direct_dirichlet_sum<C, T>(
    coeff: C,
    s: Complex64,
    terms: u64,
    margin: f64,
    tail_bound: T,
) -> Result<EvalResult>
where
    C: Fn(u64) -> f64,
    T: Fn(u64) -> f64,
{
    if !(margin > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "direct sum needs a positive convergence margin, got {margin}"
        )));
    }
    let mut acc = CompensatedSum::new();
    for n in 1..=terms {
        let c = coeff(n);
        if c != 0.0 {
            acc.add(c * (-s * (n as f64).ln()).exp());
        }
    }
    Ok(EvalResult {
        value: acc.sum(),
        abs_error_estimate: tail_bound(terms),
        k_used: None,
        quadrature: None,
    })
}

/// Bound on Σ_{n>N} (c0 + c1 log n) n^{-σ} by the integral from N, valid
/// for σ > 1, c0, c1 ≥ 0 and N ≥ 3 (the summand is then decreasing).
pub fn log_power_tail(c0: f64, c1: f64, sigma: f64, n: u64) -> f64 {
    assert!(sigma > 1.0, "log_power_tail needs sigma > 1");
    let nf = n as f64;
    let e = sigma - 1.0;
    nf.powf(-e) / e * (c0 + c1 * nf.ln() + c1 / e)
}

/// Abel-summation bound on |Σ_{n>N} a_n n^{-s}| when the partial sums
/// satisfy |a_1 + ... + a_n| ≤ c0 + c1 log n for n ≥ N. Needs Re(s) > 0.
pub fn abel_tail_bound(c0: f64, c1: f64, s: Complex64, n: u64) -> f64 {
    let sigma = s.re;
    assert!(sigma > 0.0, "abel_tail_bound needs Re(s) > 0");
    let nf = n as f64;
    let partial = c0 + c1 * nf.ln();
    let boundary = partial * (nf + 1.0).powf(-sigma);
    let integral = nf.powf(-sigma) / sigma * (partial + c1 / sigma);
    boundary + s.norm() * integral
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_moments() {
        let r = integrate_zero_to_infinity(|x| c((-x).exp(), 0.0), 1e-12).unwrap();
        assert!((r.value - 1.0).norm() < 1e-12, "{}", r.value);
        let r = integrate_zero_to_infinity(|x| c(x * (-x).exp(), 0.0), 1e-12).unwrap();
        assert!((r.value - 1.0).norm() < 1e-12);
        assert!(r.abs_error_estimate <= 1e-12);
        assert!(r.evaluation_count > 0);
    }

    #[test]
    fn gamma_integral() {
        let s = c(2.5, 1.0);
        let r = integrate_zero_to_infinity(|x| ((s - 1.0) * x.ln()).exp() * (-x).exp(), 1e-11)
            .unwrap();
        let g = crate::special::complex_gamma(s).unwrap();
        assert!((r.value - g).norm() < 1e-10, "{} vs {g}", r.value);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^∞ x^{-1/2} e^{-x} dx = √π
        let r = integrate_zero_to_infinity(|x| c(x.powf(-0.5) * (-x).exp(), 0.0), 1e-10).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn late_peak_is_not_truncated() {
        // x^20 e^{-x} / 20! integrates to 1, peak at x = 20
        let scale: f64 = (1..=20).map(|k| k as f64).product();
        let r = integrate_zero_to_infinity(|x| c(x.powi(20) * (-x).exp() / scale, 0.0), 1e-11)
            .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn halving_tolerance_stays_within_estimate() {
        let f = |x: f64| c(x.powf(1.5) * (-x).exp() * x.sin(), x.sqrt() * (-2.0 * x).exp());
        let coarse = integrate_zero_to_infinity(f, 1e-8).unwrap();
        let fine = integrate_zero_to_infinity(f, 5e-9).unwrap();
        assert!((coarse.value - fine.value).norm() <= coarse.abs_error_estimate);
    }

    #[test]
    fn contour_simple_and_double_poles() {
        let spec = ContourSpec::new(c(2.0, 0.0), 0.3, 32).unwrap();
        let res = laurent_coefficient(|s| Ok((s - 2.0).inv()), &spec, 1).unwrap();
        assert!((res - 1.0).norm() < 1e-13);

        let spec = ContourSpec::new(c(1.0, 0.0), 0.3, 32).unwrap();
        let coeffs = laurent_coefficients(|s| Ok((s - 1.0).powi(-2)), &spec, &[2, 1]).unwrap();
        assert!((coeffs[0] - 1.0).norm() < 1e-13);
        assert!(coeffs[1].norm() < 1e-13);
    }

    #[test]
    fn contour_regular_coefficients() {
        // exp(s)/s at 0: a_{-1} = 1, a_0 = 1, a_1 = 1/2
        let spec = ContourSpec::new(c(0.0, 0.0), 0.5, 32).unwrap();
        let coeffs = laurent_coefficients(|s| Ok(s.exp() / s), &spec, &[1, 0, -1]).unwrap();
        assert!((coeffs[0] - 1.0).norm() < 1e-13);
        assert!((coeffs[1] - 1.0).norm() < 1e-13);
        assert!((coeffs[2] - 0.5).norm() < 1e-13);
    }

    #[test]
    fn contour_spec_validation() {
        assert!(ContourSpec::new(c(0.0, 0.0), 0.5, 48).is_err());
        assert!(ContourSpec::new(c(0.0, 0.0), 0.5, 16).is_err());
        assert!(ContourSpec::new(c(0.0, 0.0), -0.5, 64).is_err());
    }

    #[test]
    fn contour_propagates_failures() {
        let spec = ContourSpec::new(c(0.0, 0.0), 0.5, 32).unwrap();
        let r = laurent_coefficient(|_| Err(Error::OutOfDomain("x".into())), &spec, 1);
        assert!(matches!(r, Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn basel_direct_sum() {
        let n = 100_000;
        let r = direct_dirichlet_sum(|_| 1.0, c(2.0, 0.0), n, 1.0, |n| log_power_tail(1.0, 0.0, 2.0, n))
            .unwrap();
        assert!((r.value.re - PI * PI / 6.0).abs() <= r.abs_error_estimate);
        assert!(r.abs_error_estimate < 1.1e-5);
        assert!(direct_dirichlet_sum(|_| 1.0, c(1.0, 0.0), 10, 0.0, |_| 0.0).is_err());
    }

    #[test]
    fn direct_sum_is_monotone_in_length() {
        let s = c(2.5, 3.0);
        let tail = |n| log_power_tail(1.0, 1.0, s.re, n);
        let coeff = |n: u64| 1.0 + (n as f64).ln();
        for n in [1_000u64, 10_000] {
            let a = direct_dirichlet_sum(coeff, s, n, 1.5, tail).unwrap();
            let b = direct_dirichlet_sum(coeff, s, 2 * n, 1.5, tail).unwrap();
            assert!((a.value - b.value).norm() <= a.abs_error_estimate);
        }
    }
}
