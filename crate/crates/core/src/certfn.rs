//! Certified evaluation of slow-growing functions (ln ln, ln, and a square
//! root stub) with directed rounding. Every value is an exact rational
//! enclosure `[lo, hi]`, so comparisons against exact quantities are
//! three-valued: certified true, certified false, or inconclusive at the
//! working precision. Callers escalate precision through a fixed ladder
//! before giving up.
//!
//! The logarithm is evaluated by range reduction to `f in [1, 2)` followed by
//! the series `ln f = 2 atanh((f-1)/(f+1))`, whose argument stays in
//! `[0, 1/3]`; the tail of the truncated series is bounded geometrically and
//! added to the upper endpoint only.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational enclosure of a real number.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    fn point(v: BigRational) -> Self {
        Enclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn width(&self) -> BigRational {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Scale by a positive rational constant.
    fn scale(&self, c: &BigRational) -> Self {
        debug_assert!(c.is_positive());
        Enclosure {
            lo: &self.lo * c,
            hi: &self.hi * c,
        }
    }

    /// Quotient of two positive enclosures, outward rounded.
    fn div(&self, d: &Enclosure) -> Self {
        debug_assert!(self.lo.is_positive() || self.lo.is_zero());
        debug_assert!(d.lo.is_positive());
        Enclosure {
            lo: &self.lo / &d.hi,
            hi: &self.hi / &d.lo,
        }
    }
}

/// Precision ladder (in bits) for inconclusive comparisons.
pub const PRECISION_LADDER: &[u32] = &[64, 128, 256, 512, 1024, 2048];

/// The catalog of admissible growth-rate functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlowFn {
    /// ln ln m, defined here for m >= 3.
    LnLn,
    /// ln m, defined here for m >= 1.
    Ln,
    /// sqrt m; a stub that makes rate thresholds trivial, kept for tests.
    Sqrt,
}

impl SlowFn {
    pub fn min_arg(self) -> u64 {
        match self {
            SlowFn::LnLn => 3,
            SlowFn::Ln => 1,
            SlowFn::Sqrt => 0,
        }
    }

    /// Enclosure of the function at `m` with roughly `prec` bits of accuracy.
    pub fn eval(self, m: &BigInt, prec: u32) -> Result<Enclosure> {
        if *m < BigInt::from(self.min_arg()) {
            return Err(Error::InvalidParam(format!(
                "{self} undefined below {} (got {m})",
                self.min_arg()
            )));
        }
        match self {
            SlowFn::Sqrt => Ok(sqrt_enclosure(m, prec)),
            SlowFn::Ln => Ok(ln_int(m, prec)),
            SlowFn::LnLn => {
                let inner = ln_int(m, prec);
                // m >= 3 makes ln m >= ln 3 > 1, so the outer log is safe.
                debug_assert!(inner.lo > BigRational::one());
                Ok(Enclosure {
                    lo: ln_pos(&inner.lo, prec).lo,
                    hi: ln_pos(&inner.hi, prec).hi,
                })
            }
        }
    }

    /// Enclosure of `self(m) / sqrt(m)`, defined for `m >= 1`.
    pub fn over_sqrt(self, m: &BigInt, prec: u32) -> Result<Enclosure> {
        if *m < BigInt::one() {
            return Err(Error::InvalidParam(format!(
                "{self}(m)/sqrt(m) undefined for m = {m}"
            )));
        }
        if self == SlowFn::Sqrt {
            // sqrt(m)/sqrt(m) is exactly one; dividing two enclosures of the
            // same irrational would widen it into an interval around one.
            return Ok(Enclosure::point(BigRational::one()));
        }
        Ok(self.eval(m, prec)?.div(&sqrt_enclosure(m, prec)))
    }
}

impl fmt::Display for SlowFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlowFn::LnLn => "lnln",
            SlowFn::Ln => "ln",
            SlowFn::Sqrt => "sqrt",
        })
    }
}

impl FromStr for SlowFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lnln" => Ok(SlowFn::LnLn),
            "ln" => Ok(SlowFn::Ln),
            "sqrt" => Ok(SlowFn::Sqrt),
            other => Err(Error::InvalidParam(format!(
                "unknown rate function `{other}` (expected lnln, ln, or sqrt)"
            ))),
        }
    }
}

/// `[s/2^p, (s+1)/2^p]` around `sqrt(x)` via integer square root; collapses
/// to a point for perfect squares.
pub fn sqrt_enclosure(x: &BigInt, prec: u32) -> Enclosure {
    debug_assert!(!x.is_negative());
    if x.is_zero() {
        return Enclosure::point(BigRational::zero());
    }
    let scaled = x << (2 * prec);
    let s = scaled.sqrt();
    let denom = BigInt::one() << prec;
    let lo = BigRational::new(s.clone(), denom.clone());
    if &s * &s == scaled {
        return Enclosure::point(lo);
    }
    Enclosure {
        lo,
        hi: BigRational::new(s + 1, denom),
    }
}

fn ln_int(m: &BigInt, prec: u32) -> Enclosure {
    ln_pos(&BigRational::from_integer(m.clone()), prec)
}

/// Natural log of a rational `q >= 1`, outward rounded.
fn ln_pos(q: &BigRational, prec: u32) -> Enclosure {
    debug_assert!(*q >= BigRational::one());
    if q.is_one() {
        return Enclosure::point(BigRational::zero());
    }

    // Range-reduce: q = f * 2^e with f in [1, 2).
    let mut e: u64 = {
        let bits_n = q.numer().bits();
        let bits_d = q.denom().bits();
        bits_n.saturating_sub(bits_d).saturating_sub(1)
    };
    while pow2_le(q, e + 1) {
        e += 1;
    }
    while e > 0 && !pow2_le(q, e) {
        e -= 1;
    }
    let f = q / BigRational::from_integer(BigInt::one() << e);
    debug_assert!(f >= BigRational::one());

    // Dyadic bounds of f with denominator 2^prec keep the series arithmetic
    // small regardless of how wide q's own representation is.
    let scale = BigInt::one() << prec;
    let floor = (f.numer() * &scale) / f.denom();
    let f_lo = BigRational::new(floor.clone(), scale.clone());
    let f_hi = BigRational::new(floor + 1, scale);

    let terms = (prec as usize) / 3 + 2;
    let one = BigRational::one();
    let z_lo = (&f_lo - &one) / (&f_lo + &one);
    let z_hi = (&f_hi - &one) / (&f_hi + &one);
    let two = BigRational::from_integer(BigInt::from(2));
    let lo = &two * atanh_series(&z_lo, terms, prec).lo;
    let hi = &two * atanh_series(&z_hi, terms, prec).hi;

    if e == 0 {
        return Enclosure { lo, hi };
    }
    let ln2 = ln2_enclosure(prec);
    let e_rat = BigRational::from_integer(BigInt::from(e));
    Enclosure {
        lo: lo + &e_rat * ln2.lo,
        hi: hi + &e_rat * ln2.hi,
    }
}

/// ln 2 = 2 atanh(1/3).
fn ln2_enclosure(prec: u32) -> Enclosure {
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let terms = (prec as usize) / 3 + 2;
    atanh_series(&third, terms, prec).scale(&BigRational::from_integer(BigInt::from(2)))
}

/// Truncated `atanh(z) = sum z^(2k+1)/(2k+1)` for `0 <= z <= 0.34`; all terms
/// are positive, so the truncated sum is a lower bound and the geometric tail
/// bound is added to the upper endpoint.
///
/// The sum runs in fixed point — integers scaled by `2^(prec + 32)` with
/// directed rounding — so intermediates stay near `prec` bits even when `z`
/// itself arrives with an enormous exact-rational representation (as happens
/// when the argument is the endpoint of another enclosure). Summing exact
/// rationals instead would grow the terms' representations linearly and the
/// running GCDs quadratically, which is prohibitive at ladder precisions.
fn atanh_series(z: &BigRational, terms: usize, prec: u32) -> Enclosure {
    debug_assert!(!z.is_negative());
    debug_assert!(*z < BigRational::new(BigInt::from(17), BigInt::from(50)));
    if z.is_zero() {
        return Enclosure::point(BigRational::zero());
    }
    let p = prec + 32;
    let scale: BigInt = BigInt::one() << p;
    // Floor/ceiling division for nonnegative operands; `/` on BigInt
    // truncates toward zero, which is already the floor here.
    let div_up = |a: &BigInt, b: &BigInt| (a + b - BigInt::one()) / b;

    let z_lo = (z.numer() * &scale) / z.denom();
    let z_hi = div_up(&(z.numer() * &scale), z.denom());
    let z2_lo = (&z_lo * &z_lo) >> p;
    let z2_hi = div_up(&(&z_hi * &z_hi), &scale);
    debug_assert!(z2_hi < scale);
    let mut pow_lo = z_lo.clone();
    let mut pow_hi = z_hi.clone();
    let mut sum_lo = z_lo;
    let mut sum_hi = z_hi;
    for k in 1..terms {
        pow_lo = (&pow_lo * &z2_lo) >> p;
        pow_hi = div_up(&(&pow_hi * &z2_hi), &scale);
        let odd = BigInt::from(2 * k as u64 + 1);
        sum_lo += &pow_lo / &odd;
        sum_hi += div_up(&pow_hi, &odd);
    }
    // Tail: sum_{k >= T} z^(2k+1)/(2k+1) <= z^(2T+1) / ((2T+1)(1 - z^2)).
    let next_hi = div_up(&(&pow_hi * &z2_hi), &scale);
    let tail_denom = BigInt::from(2 * terms as u64 + 1) * (&scale - &z2_hi);
    let tail = div_up(&(next_hi << p), &tail_denom);
    Enclosure {
        lo: BigRational::new(sum_lo, scale.clone()),
        hi: BigRational::new(sum_hi + tail, scale),
    }
}

/// Certified `f(x) >= sqrt(y)`, escalating the precision ladder. Errors only
/// if the comparison is still inconclusive at maximum precision.
pub fn cert_ge_sqrt(f: SlowFn, x: &BigInt, y: &BigInt) -> Result<bool> {
    for &prec in PRECISION_LADDER {
        let lhs = f.eval(x, prec)?;
        let rhs = sqrt_enclosure(y, prec);
        if lhs.lo >= rhs.hi {
            return Ok(true);
        }
        if lhs.hi < rhs.lo {
            return Ok(false);
        }
    }
    Err(Error::Inconclusive {
        context: format!("{f}({x}) >= sqrt({y})"),
    })
}

/// Certified `v <= c * f(m) / sqrt(m)`; `None` means inconclusive after the
/// full ladder (reported upstream as an indeterminate verdict, not a failure).
pub fn cert_le_scaled_rate(
    v: &BigRational,
    c: &BigRational,
    f: SlowFn,
    m: &BigInt,
) -> Result<Option<bool>> {
    if !c.is_positive() {
        return Err(Error::InvalidParam("rate constant must be positive".into()));
    }
    for &prec in PRECISION_LADDER {
        let rhs = f.over_sqrt(m, prec)?.scale(c);
        if *v <= rhs.lo {
            return Ok(Some(true));
        }
        if *v > rhs.hi {
            return Ok(Some(false));
        }
    }
    Ok(None)
}

/// Certified `f(x)/sqrt(x) <= f(m)/sqrt(m)` (the monotone-comparison premise
/// used when extending a bound from a stage boundary down to smaller m).
pub fn cert_ratio_le(f: SlowFn, x: &BigInt, m: &BigInt) -> Result<Option<bool>> {
    for &prec in PRECISION_LADDER {
        let lhs = f.over_sqrt(x, prec)?;
        let rhs = f.over_sqrt(m, prec)?;
        if lhs.hi <= rhs.lo {
            return Ok(Some(true));
        }
        if lhs.lo > rhs.hi {
            return Ok(Some(false));
        }
    }
    Ok(None)
}

fn pow2_le(q: &BigRational, e: u64) -> bool {
    // 2^e <= n/d  <=>  d << e <= n
    (q.denom() << e) <= *q.numer()
}
