//! Exact digit arithmetic in an integer base.

use crate::error::{Error, Result};

/// Largest argument accepted by the digit routines.
pub const MAX_ARGUMENT: u64 = 1 << 53;

/// An integer base b ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegerBase(u64);

impl IntegerBase {
    pub fn new(b: u64) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidInput(format!("base must be >= 2, got {b}")));
        }
        if b > u32::MAX as u64 {
            return Err(Error::InvalidInput(format!("base {b} too large")));
        }
        Ok(Self(b))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn ln(self) -> f64 {
        (self.0 as f64).ln()
    }
}

impl TryFrom<u64> for IntegerBase {
    type Error = Error;

    fn try_from(b: u64) -> Result<Self> {
        Self::new(b)
    }
}

/// The base-b expansion of a positive integer; `digits[i]` multiplies b^i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitExpansion {
    pub base: IntegerBase,
    pub digits: Vec<u32>,
    pub value: u64,
}

impl DigitExpansion {
    /// Re-evaluates Σ digits[i]·b^i.
    pub fn evaluate(&self) -> u64 {
        self.digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.base.get() + d as u64)
    }
}

fn check_range(n: u64) -> Result<()> {
    if n > MAX_ARGUMENT {
        return Err(Error::InvalidInput(format!("argument {n} exceeds 2^53")));
    }
    Ok(())
}

pub fn digit_expansion(b: IntegerBase, n: u64) -> Result<DigitExpansion> {
    if n < 1 {
        return Err(Error::InvalidInput("digit expansion needs n >= 1".into()));
    }
    check_range(n)?;
    let base = b.get();
    let mut digits = Vec::new();
    let mut rest = n;
    while rest > 0 {
        digits.push((rest % base) as u32);
        rest /= base;
    }
    Ok(DigitExpansion {
        base: b,
        digits,
        value: n,
    })
}

/// d_b(n), with d_b(0) = 0.
pub fn digit_sum(b: IntegerBase, n: u64) -> u64 {
    let base = b.get();
    let mut rest = n;
    let mut sum = 0;
    while rest > 0 {
        sum += rest % base;
        rest /= base;
    }
    sum
}

/// S_b(n) = Σ_{m=1}^{n-1} d_b(m), counted digit position by digit position.
pub fn cumulative_digit_sum(b: IntegerBase, n: u64) -> u64 {
    let base = b.get() as u128;
    let n = n as u128;
    let mut total: u128 = 0;
    let mut place: u128 = 1;
    while place <= n {
        let cycle = place * base;
        let full = n / cycle;
        let rem = n % cycle;
        let q = rem / place;
        total += full * place * (base * (base - 1) / 2);
        total += place * (q * q.saturating_sub(1) / 2) + q * (rem % place);
        place = cycle;
    }
    total as u64
}

/// b-adic valuation of n ≥ 1.
pub fn valuation(b: IntegerBase, n: u64) -> u32 {
    let base = b.get();
    let mut rest = n;
    let mut k = 0;
    while rest > 0 && rest % base == 0 {
        rest /= base;
        k += 1;
    }
    k
}

/// d_b(n) - d_b(n-1) = 1 - k(b-1), k the b-adic valuation of n.
pub fn differenced_digit_sum(b: IntegerBase, n: u64) -> i64 {
    1 - valuation(b, n) as i64 * (b.get() as i64 - 1)
}

/// Upper bound (b-1)(floor(log_b n) + 1) on d_b(n).
pub fn digit_sum_bound(b: IntegerBase, n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let len = digit_expansion(b, n.min(MAX_ARGUMENT)).map_or(0, |e| e.digits.len() as u64);
    (b.get() - 1) * len
}

/// Prefix table of d_b and S_b for 0 ≤ n ≤ n_max.
#[derive(Debug, Clone)]
pub struct DigitSumTable {
    base: IntegerBase,
    digit_sums: Vec<u64>,
    cumulative: Vec<u64>,
}

impl DigitSumTable {
    pub fn new(b: IntegerBase, n_max: usize) -> Self {
        let mut digit_sums = Vec::with_capacity(n_max + 1);
        digit_sums.push(0u64);
        for n in 1..=n_max {
            // d(n) = d(n / b) + n mod b
            let base = b.get() as usize;
            digit_sums.push(digit_sums[n / base] + (n % base) as u64);
        }
        let mut cumulative = Vec::with_capacity(n_max + 1);
        cumulative.push(0u64);
        let mut running = 0u64;
        for n in 1..=n_max {
            // S(n) sums d(1..n-1)
            cumulative.push(running);
            running += digit_sums[n];
        }
        Self {
            base: b,
            digit_sums,
            cumulative,
        }
    }

    pub fn base(&self) -> IntegerBase {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digit_sums.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn digit_sum(&self, n: usize) -> u64 {
        self.digit_sums[n]
    }

    /// S_b(n) for 1 ≤ n ≤ n_max.
    pub fn cumulative(&self, n: usize) -> u64 {
        self.cumulative[n]
    }
}

/// Threshold on b^k·x beyond which 1/(e^{b^k x} - 1) < 1e-300.
const LAMBERT_CUTOFF: f64 = 690.8;

/// g(t) = 1/(e^t - 1) - 1/t + 1/2, which is O(t) at the origin.
fn lambert_regular_part(t: f64) -> f64 {
    if t < 0.5 {
        // Σ_{j≥1} B_{2j}/(2j)! t^{2j-1}
        let t2 = t * t;
        let mut pow = t;
        let mut acc = 0.0;
        for j in 1..=10 {
            acc += crate::special::bernoulli_over_factorial(2 * j) * pow;
            pow *= t2;
        }
        acc
    } else {
        1.0 / t.exp_m1() - 1.0 / t + 0.5
    }
}

/// p(e^{-x}) for x > 0, where p(y) = Σ (d_b(n) - d_b(n-1)) y^n, via the
/// Lambert form 1/(e^x - 1) - (b-1) Σ_{k≥1} 1/(e^{b^k x} - 1).
///
/// For x < 1 the singular parts 1/t of the leading terms are summed in
/// closed form, so the result stays accurate as x → 0 where p is only
/// logarithmically large.
pub fn p_lambert_exp(b: IntegerBase, x: f64) -> f64 {
    let base = b.as_f64();
    if x >= 1.0 {
        let mut sum = 0.0;
        let mut scaled = x * base;
        while scaled < LAMBERT_CUTOFF {
            sum += 1.0 / scaled.exp_m1();
            scaled *= base;
        }
        return 1.0 / x.exp_m1() - (base - 1.0) * sum;
    }
    // k0 = #{k ≥ 1 : b^k x < 1}; (b-1) Σ_{k≤k0} 1/(b^k x) = (1 - b^{-k0})/x,
    // leaving 1/(b^{k0} x) from the leading term.
    let mut k0 = 0u32;
    let mut scaled = x * base;
    let mut regular = 0.0;
    let mut last_small = x;
    while scaled < 1.0 {
        k0 += 1;
        regular += lambert_regular_part(scaled);
        last_small = scaled;
        scaled *= base;
    }
    let mut large = 0.0;
    while scaled < LAMBERT_CUTOFF {
        large += 1.0 / scaled.exp_m1();
        scaled *= base;
    }
    let bm1 = base - 1.0;
    -0.5 + lambert_regular_part(x) + 1.0 / last_small + 0.5 * bm1 * k0 as f64
        - bm1 * regular
        - bm1 * large
}

/// p(y) = y/(1-y) - (b-1) Σ_{k≥1} y^{b^k}/(1 - y^{b^k}) for 0 < y < 1.
pub fn p_lambert(b: IntegerBase, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::OutOfDomain(format!("p(y) needs 0 < y < 1, got {y}")));
    }
    Ok(p_lambert_exp(b, -y.ln()))
}
