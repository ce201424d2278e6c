//! Pole catalogue of Z_b, F_b and G_b with closed-form residues.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::digits::IntegerBase;
use crate::error::{Error, Result};
use crate::integer_base::{
    default_k, eval_series, lattice_column, lattice_column_re, lattice_point, lattice_spacing,
    SeriesTag,
};
use crate::numerics::{laurent_coefficients, ContourSpec};
use crate::special::{bernoulli_over_factorial, riemann_zeta, PrecisionProfile};

/// Residues below this magnitude are flagged instead of silently listed.
pub const VANISHING_RESIDUE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleFlag {
    /// The closed-form residue is numerically zero; the pole may be removable.
    RemovableSuspect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleDescriptor {
    pub tag: SeriesTag,
    pub base: IntegerBase,
    pub location: Complex64,
    pub lattice_k: usize,
    pub lattice_m: i64,
    pub order: u8,
    /// Coefficient a_{-1}.
    pub residue: Complex64,
    /// Coefficient a_{-2}, present exactly for double poles.
    pub laurent_minus2: Option<Complex64>,
    pub flag: Option<PoleFlag>,
}

/// Flat serialisable form of a [`PoleDescriptor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub tag: SeriesTag,
    pub b: u64,
    pub k: usize,
    pub m: i64,
    pub re: f64,
    pub im: f64,
    pub order: u8,
    pub residue_re: f64,
    pub residue_im: f64,
    pub laurent2_re: Option<f64>,
    pub laurent2_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<PoleFlag>,
}

impl From<&PoleDescriptor> for PoleRecord {
    fn from(p: &PoleDescriptor) -> Self {
        Self {
            tag: p.tag,
            b: p.base.get(),
            k: p.lattice_k,
            m: p.lattice_m,
            re: p.location.re,
            im: p.location.im,
            order: p.order,
            residue_re: p.residue.re,
            residue_im: p.residue.im,
            laurent2_re: p.laurent_minus2.map(|z| z.re),
            laurent2_im: p.laurent_minus2.map(|z| z.im),
            flag: p.flag,
        }
    }
}

fn zeta_on_axis(b: IntegerBase, m: i64) -> Result<Complex64> {
    riemann_zeta(
        Complex64::new(0.0, m as f64 * lattice_spacing(b)),
        &PrecisionProfile::default(),
    )
}

/// Π_{j=1}^{n} (w - j)
fn falling_product(w: Complex64, n: usize) -> Complex64 {
    (1..=n).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (w - j as f64))
}

/// Closed-form (a_{-1}, a_{-2}) at lattice position (k, m).
fn closed_form(tag: SeriesTag, b: IntegerBase, k: usize, m: i64) -> Result<(Complex64, Option<Complex64>)> {
    let bf = b.as_f64();
    let lb = b.ln();
    let w = Complex64::new(0.0, m as f64 * lattice_spacing(b));
    let half_density = (bf - 1.0) / (2.0 * lb);
    let log_2pi = (2.0 * PI).ln();
    let two_pi_im = Complex64::new(0.0, 2.0 * PI * m as f64);
    match (tag, k, m) {
        (SeriesTag::Zb, _, _) => Ok((-(bf - 1.0) / lb * zeta_on_axis(b, m)?, None)),
        (SeriesTag::Fb, 0, 0) => Ok((
            Complex64::new(half_density * log_2pi - (bf + 1.0) / 4.0, 0.0),
            Some(Complex64::new(half_density, 0.0)),
        )),
        (SeriesTag::Fb, 0, _) => Ok((-(bf - 1.0) / two_pi_im * zeta_on_axis(b, m)?, None)),
        (SeriesTag::Fb, _, _) => {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let value = sign * (bf - 1.0) / lb
                * zeta_on_axis(b, m)?
                * bernoulli_over_factorial(k)
                * falling_product(w, k - 1);
            Ok((value, None))
        }
        (SeriesTag::Gb, 0, 0) => Ok((
            Complex64::new(half_density * (log_2pi - 1.0) - (bf + 1.0) / 4.0, 0.0),
            Some(Complex64::new(half_density, 0.0)),
        )),
        (SeriesTag::Gb, 0, _) => Ok((
            -(bf - 1.0) / two_pi_im / (1.0 + w) * zeta_on_axis(b, m)?,
            None,
        )),
        (SeriesTag::Gb, 1, _) => Ok((Complex64::new((bf + 1.0) / 12.0, 0.0), None)),
        (SeriesTag::Gb, _, _) => {
            // B_k / (k (k-2)!) = (k-1) B_k / k!
            let coefficient = (k - 1) as f64 * bernoulli_over_factorial(k);
            let value =
                (bf - 1.0) / lb * zeta_on_axis(b, m)? * coefficient * falling_product(w, k - 2);
            Ok((value, None))
        }
    }
}

fn descriptor(tag: SeriesTag, b: IntegerBase, k: usize, m: i64) -> Result<PoleDescriptor> {
    let (residue, laurent_minus2) = closed_form(tag, b, k, m)?;
    let flag = (laurent_minus2.is_none() && residue.norm() < VANISHING_RESIDUE)
        .then_some(PoleFlag::RemovableSuspect);
    Ok(PoleDescriptor {
        tag,
        base: b,
        location: lattice_point(tag, b, k, m),
        lattice_k: k,
        lattice_m: m,
        order: if laurent_minus2.is_some() { 2 } else { 1 },
        residue,
        laurent_minus2,
        flag,
    })
}

/// Every pole with |location| < radius, ordered by column k then row m.
pub fn enumerate_poles(tag: SeriesTag, b: IntegerBase, radius: f64) -> Result<Vec<PoleDescriptor>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let spacing = lattice_spacing(b);
    let mut poles = Vec::new();
    let mut k = 0usize;
    loop {
        let re = lattice_column_re(tag, k);
        if re <= -radius {
            break;
        }
        let column = lattice_column(tag, k) || (tag == SeriesTag::Gb && k == 1);
        if column && re.abs() < radius {
            let m_max = ((radius * radius - re * re).max(0.0).sqrt() / spacing).ceil() as i64;
            for m in -m_max..=m_max {
                if tag == SeriesTag::Gb && k == 1 && m != 0 {
                    continue;
                }
                let p = descriptor(tag, b, k, m)?;
                if p.location.norm() < radius {
                    poles.push(p);
                }
            }
        }
        if tag == SeriesTag::Zb {
            break;
        }
        k += 1;
    }
    Ok(poles)
}

/// Number of distinct poles in the open disc of the given radius.
pub fn count_poles(tag: SeriesTag, b: IntegerBase, radius: f64) -> Result<usize> {
    if !(radius >= 5.0) {
        return Err(Error::InvalidInput(format!("pole counting needs radius >= 5, got {radius}")));
    }
    Ok(enumerate_poles(tag, b, radius)?.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub formula_re: f64,
    pub formula_im: f64,
    pub contour_re: f64,
    pub contour_im: f64,
    pub abs_diff: f64,
    /// |a_{-2} contour − a_{-2} formula| for double poles.
    pub laurent2_abs_diff: Option<f64>,
    pub passed: bool,
}

impl ResidueReport {
    pub fn formula_value(&self) -> Complex64 {
        Complex64::new(self.formula_re, self.formula_im)
    }

    pub fn contour_value(&self) -> Complex64 {
        Complex64::new(self.contour_re, self.contour_im)
    }
}

/// Circle radius for certifying a pole: well inside the distance to the
/// neighbouring lattice points.
pub fn certification_radius(b: IntegerBase) -> f64 {
    0.4 * lattice_spacing(b).min(1.0)
}

/// Remainder tolerance used by evaluators on certification contours.
const CONTOUR_EVAL_TOL: f64 = 1e-12;
const CONTOUR_NODES: usize = 32;

/// Laurent coefficients a_{-j} of the series around `center`, extracted on
/// a circle of the given radius with a fixed truncation order.
pub fn contour_laurent(
    tag: SeriesTag,
    b: IntegerBase,
    center: Complex64,
    radius: f64,
    orders: &[i32],
) -> Result<Vec<Complex64>> {
    let spec = ContourSpec::new(center, radius, CONTOUR_NODES)?;
    let k = match tag {
        SeriesTag::Zb => None,
        _ => Some(default_k(tag, center - radius)),
    };
    laurent_coefficients(
        |s| eval_series(tag, b, s, k, CONTOUR_EVAL_TOL).map(|r| r.value),
        &spec,
        orders,
    )
}

/// Certifies a descriptor's closed-form residue (and a_{-2} for double
/// poles) by contour integration of the evaluator.
pub fn residue_check(descriptor: &PoleDescriptor, tol: f64) -> Result<ResidueReport> {
    let radius = certification_radius(descriptor.base);
    let orders: &[i32] = if descriptor.order == 2 { &[1, 2] } else { &[1] };
    let coeffs = contour_laurent(
        descriptor.tag,
        descriptor.base,
        descriptor.location,
        radius,
        orders,
    )?;
    let contour = coeffs[0];
    let abs_diff = (contour - descriptor.residue).norm();
    let laurent2_abs_diff = descriptor
        .laurent_minus2
        .map(|a2| (coeffs[1] - a2).norm());
    let passed = abs_diff < tol && laurent2_abs_diff.map_or(true, |d| d < tol);
    Ok(ResidueReport {
        formula_re: descriptor.residue.re,
        formula_im: descriptor.residue.im,
        contour_re: contour.re,
        contour_im: contour.im,
        abs_diff,
        laurent2_abs_diff,
        passed,
    })
}

/// Looks up the descriptor at lattice position (k, m), if that position is a pole.
pub fn pole_at(tag: SeriesTag, b: IntegerBase, k: usize, m: i64) -> Result<PoleDescriptor> {
    let valid = match tag {
        SeriesTag::Zb => k == 0,
        SeriesTag::Fb => lattice_column(tag, k),
        SeriesTag::Gb => lattice_column(tag, k) || (k == 1 && m == 0),
    };
    if !valid {
        return Err(Error::InvalidInput(format!("({k}, {m}) is not a pole of {tag}")));
    }
    descriptor(tag, b, k, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(b: u64) -> IntegerBase {
        IntegerBase::new(b).unwrap()
    }

    #[test]
    fn fb_radius_eight() {
        let poles = enumerate_poles(SeriesTag::Fb, base(2), 8.0).unwrap();
        let locations: Vec<f64> = poles.iter().map(|p| p.location.re).collect();
        assert_eq!(locations, vec![1.0, 0.0, -1.0, -3.0, -5.0, -7.0]);
        assert!(poles.iter().all(|p| p.location.im == 0.0));
        assert_eq!(poles[0].order, 2);
        assert!(poles[1..].iter().all(|p| p.order == 1 && p.laurent_minus2.is_none()));
    }

    #[test]
    fn closed_form_values() {
        let l2 = 2f64.ln();
        let at_zero = pole_at(SeriesTag::Fb, base(2), 1, 0).unwrap();
        assert!((at_zero.residue.re - 1.0 / (4.0 * l2)).abs() < 1e-15);
        let at_minus_one = pole_at(SeriesTag::Fb, base(2), 2, 0).unwrap();
        assert!((at_minus_one.residue.re + 1.0 / (24.0 * l2)).abs() < 1e-15);
        let g = pole_at(SeriesTag::Gb, base(3), 1, 0).unwrap();
        assert!((g.residue.re - 1.0 / 3.0).abs() < 1e-15);
        let z = pole_at(SeriesTag::Zb, base(2), 0, 0).unwrap();
        assert!((z.residue.re - 1.0 / (2.0 * l2)).abs() < 1e-15);
        assert!(pole_at(SeriesTag::Fb, base(2), 3, 0).is_err());
        assert!(pole_at(SeriesTag::Gb, base(2), 1, 1).is_err());
    }

    #[test]
    fn structural_difference_between_f_and_g() {
        let spacing = lattice_spacing(base(3));
        let f = enumerate_poles(SeriesTag::Fb, base(3), 12.0).unwrap();
        let g = enumerate_poles(SeriesTag::Gb, base(3), 12.0).unwrap();
        // F_b has a full k = 1 column (Re s = 0); G_b only the isolated pole at 1
        assert!(f.iter().any(|p| p.lattice_k == 1 && p.lattice_m != 0));
        assert!(g.iter().filter(|p| p.lattice_k == 1).count() == 1);
        assert!(g.iter().all(|p| p.lattice_k == 1 || p.lattice_k % 2 == 0));
        assert!(f.iter().all(|p| (p.location.im / spacing - p.lattice_m as f64).abs() < 1e-12));
    }

    #[test]
    fn counts() {
        assert_eq!(count_poles(SeriesTag::Zb, base(2), 20.0).unwrap(), 5);
        let c: Vec<usize> = [20.0, 40.0, 80.0]
            .iter()
            .map(|&r| count_poles(SeriesTag::Fb, base(2), r).unwrap())
            .collect();
        for w in c.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            assert!((3.2..=4.8).contains(&ratio), "{c:?}");
        }
        for r in [10.0, 25.0] {
            let counts: Vec<usize> = [2u64, 3, 5, 10]
                .iter()
                .map(|&b| count_poles(SeriesTag::Fb, base(b), r).unwrap())
                .collect();
            assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        }
        assert!(count_poles(SeriesTag::Fb, base(2), 4.0).is_err());
    }

    #[test]
    fn residues_are_conjugate_symmetric_and_nonzero() {
        for tag in SeriesTag::ALL {
            for b in [2u64, 3, 10] {
                let poles = enumerate_poles(tag, base(b), 30.0).unwrap();
                for p in &poles {
                    assert!(p.flag.is_none(), "{p:?}");
                    let mirror = poles
                        .iter()
                        .find(|q| q.lattice_k == p.lattice_k && q.lattice_m == -p.lattice_m)
                        .unwrap();
                    assert!((mirror.residue - p.residue.conj()).norm() <= 1e-12 * p.residue.norm());
                }
            }
        }
    }

    #[test]
    fn record_round_trip() {
        let p = pole_at(SeriesTag::Fb, base(2), 0, 0).unwrap();
        let record = PoleRecord::from(&p);
        let json = serde_json::to_string(&record).unwrap();
        for field in ["tag", "b", "k", "m", "re", "im", "order", "residue_re", "residue_im", "laurent2_re", "laurent2_im"] {
            assert!(json.contains(&format!("\"{field}\"")), "{json}");
        }
        assert!(!json.contains("flag"));
        let back: PoleRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn certify_near_origin() {
        for b in [2u64, 3, 10] {
            for tag in SeriesTag::ALL {
                for p in enumerate_poles(tag, base(b), 6.0 + 1e-9).unwrap() {
                    if p.lattice_m.abs() > 2 {
                        continue;
                    }
                    let report = residue_check(&p, 1e-6).unwrap();
                    assert!(report.passed, "{tag} b={b} {:?} {report:?}", p.location);
                }
            }
        }
    }
}
