//! Certified real semantics for field elements.
//!
//! An embedding pins one real root of the minimal polynomial by a rational
//! isolating interval. Every sign, floor and comparison is decided by
//! interval Horner evaluation over that interval, bisecting it further
//! until the answer is forced. Zero tests are structural and never numeric.

use std::cmp::Ordering;
use std::sync::{Arc, Mutex, MutexGuard};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::algebra::rational::{floor_int, pow2, sign};
use crate::algebra::{RatPoly, Rational, RootRefiner, SturmSequence};
use crate::error::{Error, Result};
use crate::numberfield::{FieldElement, NumberField};

/// Environment variable overriding the refinement ceiling (in bits).
pub const MAX_PRECISION_ENV: &str = "MDCF_MAX_PRECISION_BITS";
pub const DEFAULT_START_BITS: u64 = 64;
pub const DEFAULT_MAX_BITS: u64 = 65536;

/// Ceiling from [`MAX_PRECISION_ENV`], falling back to [`DEFAULT_MAX_BITS`].
pub fn max_bits_from_env() -> u64 {
    std::env::var(MAX_PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b: &u64| b > 0)
        .unwrap_or(DEFAULT_MAX_BITS)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyInterval);
        }
        Ok(RatInterval { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        RatInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `self ⊆ other`
    pub fn is_inside(&self, other: &RatInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn add(&self, o: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn add_scalar(&self, c: &Rational) -> RatInterval {
        RatInterval {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    pub fn mul(&self, o: &RatInterval) -> RatInterval {
        if !self.lo.is_negative() && !o.lo.is_negative() {
            return RatInterval {
                lo: &self.lo * &o.lo,
                hi: &self.hi * &o.hi,
            };
        }
        let p = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = p.iter().min().unwrap().clone();
        let hi = p.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    /// Quotient; `None` if `o` contains zero.
    pub fn div(&self, o: &RatInterval) -> Option<RatInterval> {
        if o.contains(&Rational::zero()) {
            return None;
        }
        let inv = RatInterval {
            lo: o.hi.recip(),
            hi: o.lo.recip(),
        };
        Some(self.mul(&inv))
    }

    /// Interval Horner evaluation of `Σ c_i x^i` for `x ∈ self`.
    pub fn horner(&self, coeffs: &[Rational]) -> RatInterval {
        let mut acc = RatInterval::point(Rational::zero());
        for c in coeffs.iter().rev() {
            acc = acc.mul(self).add_scalar(c);
        }
        acc
    }

    /// `Some(n)` when every point of the interval has floor `n`.
    pub fn common_floor(&self) -> Option<BigInt> {
        let f = floor_int(&self.lo);
        (f == floor_int(&self.hi)).then_some(f)
    }

    /// Sign shared by every point, if decided.
    pub fn strict_sign(&self) -> Option<i32> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }
}

/// Bounds every real root strictly: `1 + max |a_i / a_n|`.
pub fn cauchy_bound(f: &RatPoly) -> Result<Rational> {
    let lc = f.leading().ok_or(Error::ZeroPolynomial)?;
    let n = f.degree().unwrap();
    let m = f.coeffs()[..n]
        .iter()
        .map(|c| (c / lc).abs())
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(m + Rational::from_integer(BigInt::from(1)))
}

/// Disjoint isolating intervals for the real roots of `f`, in increasing
/// order. Each contains exactly one root of the squarefree part of `f` and
/// has non-root endpoints.
pub fn isolate_roots(f: &RatPoly) -> Result<Vec<RatInterval>> {
    let sturm = SturmSequence::new(f)?;
    let sf = sturm.squarefree().clone();
    if sf.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let b = cauchy_bound(&sf)?;
    let mut stack = vec![RatInterval {
        lo: -b.clone(),
        hi: b,
    }];
    let mut found = Vec::new();
    while let Some(iv) = stack.pop() {
        match sturm.count(&iv.lo, &iv.hi)? {
            0 => {}
            1 => found.push(iv),
            _ => {
                let mut mid = iv.midpoint();
                let mut k = 3;
                while sf.eval(&mid).is_zero() {
                    mid = &iv.lo + iv.width() * pow2(-k) * Rational::from_integer(BigInt::from(3));
                    k += 1;
                }
                stack.push(RatInterval {
                    lo: iv.lo.clone(),
                    hi: mid.clone(),
                });
                stack.push(RatInterval { lo: mid, hi: iv.hi });
            }
        }
    }
    found.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(found)
}

#[derive(Clone, Debug)]
struct Isolator {
    refiner: RootRefiner,
    current: RatInterval,
}

impl Isolator {
    fn refine_to(&mut self, bits: u64) {
        let before = self.refiner.bisections();
        self.refiner.refine_to_bits(bits);
        if self.refiner.bisections() != before {
            let (lo, hi) = self.refiner.bounds();
            self.current = RatInterval { lo, hi };
        }
    }
}

/// Comparison outcome for [`RealEmbedding::compare_normalized`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Greater {
    I,
    J,
}

/// A real embedding `θ ↦ ρ` of a number field, with cached refinement.
///
/// Refinement state sits behind a mutex so an embedding can be shared by
/// reference; cloning snapshots the current isolator and is always safe.
#[derive(Debug)]
pub struct RealEmbedding {
    field: Arc<NumberField>,
    window: RatInterval,
    squarefree: RatPoly,
    iso: Mutex<Isolator>,
    start_bits: u64,
    max_bits: u64,
}

impl Clone for RealEmbedding {
    fn clone(&self) -> Self {
        RealEmbedding {
            field: self.field.clone(),
            window: self.window.clone(),
            squarefree: self.squarefree.clone(),
            iso: Mutex::new(self.lock().clone()),
            start_bits: self.start_bits,
            max_bits: self.max_bits,
        }
    }
}

impl RealEmbedding {
    /// Pins the unique real root of the minimal polynomial in the open
    /// window `(lo, hi)`.
    pub fn select_root(field: &Arc<NumberField>, window: &RatInterval) -> Result<Self> {
        let sturm = SturmSequence::new(field.minpoly())?;
        let n = sturm.count(&window.lo, &window.hi)?;
        if n != 1 {
            return Err(Error::RootCount(n));
        }
        let sf = sturm.squarefree().clone();
        let refiner = RootRefiner::new(&sf, &window.lo, &window.hi)?;
        Ok(RealEmbedding {
            field: field.clone(),
            window: window.clone(),
            squarefree: sf,
            iso: Mutex::new(Isolator {
                refiner,
                current: window.clone(),
            }),
            start_bits: DEFAULT_START_BITS,
            max_bits: max_bits_from_env(),
        })
    }

    pub fn with_max_bits(mut self, bits: u64) -> Self {
        self.max_bits = bits;
        self
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn window(&self) -> &RatInterval {
        &self.window
    }

    pub fn max_bits(&self) -> u64 {
        self.max_bits
    }

    fn lock(&self) -> MutexGuard<'_, Isolator> {
        self.iso.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Current isolating interval of the root.
    pub fn isolator(&self) -> RatInterval {
        self.lock().current.clone()
    }

    /// Shrinks the isolator to width at most `2^-bits`.
    pub fn refine_to(&self, bits: u64) -> RatInterval {
        let mut iso = self.lock();
        iso.refine_to(bits);
        iso.current.clone()
    }

    fn check_field(&self, a: &FieldElement) -> Result<()> {
        if a.field() == &self.field || **a.field() == *self.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    /// Escalates the isolator precision until `decide` returns a value.
    fn escalate<T>(
        &self,
        a: &FieldElement,
        mut decide: impl FnMut(&RatInterval) -> Option<T>,
    ) -> Result<T> {
        self.check_field(a)?;
        let mut bits = self.start_bits;
        loop {
            let x = self.refine_to(bits);
            let v = x.horner(a.coeffs());
            if let Some(t) = decide(&v) {
                return Ok(t);
            }
            if x.lo == x.hi || bits >= self.max_bits {
                return Err(Error::PrecisionExhausted(bits));
            }
            bits = (bits * 2).min(self.max_bits);
        }
    }

    /// Interval of width at most `width` containing the real value of `a`.
    pub fn eval_interval(&self, a: &FieldElement, width: &Rational) -> Result<RatInterval> {
        if !width.is_positive() {
            return Err(Error::Constraint("width must be positive".into()));
        }
        if let Some(c) = a.rational_value() {
            self.check_field(a)?;
            return Ok(RatInterval::point(c.clone()));
        }
        self.escalate(a, |v| (&v.width() <= width).then(|| v.clone()))
    }

    /// Exact sign. Zero only for the zero element.
    pub fn sign(&self, a: &FieldElement) -> Result<i32> {
        if let Some(c) = a.rational_value() {
            self.check_field(a)?;
            return Ok(sign(c));
        }
        self.escalate(a, |v| match v.strict_sign() {
            Some(0) | None => None,
            s => s,
        })
    }

    /// Exact floor.
    pub fn floor(&self, a: &FieldElement) -> Result<BigInt> {
        if let Some(c) = a.rational_value() {
            self.check_field(a)?;
            return Ok(floor_int(c));
        }
        self.escalate(a, RatInterval::common_floor)
    }

    pub fn cmp(&self, a: &FieldElement, b: &FieldElement) -> Result<Ordering> {
        Ok(match self.sign(&a.try_sub(b)?)? {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        })
    }

    /// Decides `a_i / n_i^(1/(l-1))` against `a_j / n_j^(1/(l-1))` for
    /// components in `(0,1)` with positive absolute norms, without radicals:
    /// the sign of `n_j·a_i^(l-1) − n_i·a_j^(l-1)` settles it.
    pub fn compare_normalized(
        &self,
        ai: &FieldElement,
        ni: &Rational,
        aj: &FieldElement,
        nj: &Rational,
        l: usize,
    ) -> Result<Greater> {
        let e = (l - 1) as u32;
        let d = ai.pow(e).scale(nj).try_sub(&aj.pow(e).scale(ni))?;
        if d.is_zero() {
            return Err(Error::DomainViolation(
                "tied normalized values: components are not independent".into(),
            ));
        }
        Ok(if self.sign(&d)? > 0 {
            Greater::I
        } else {
            Greater::J
        })
    }

    /// Floating-point approximation, for display only.
    pub fn approx(&self, a: &FieldElement) -> f64 {
        let x = self.refine_to(64);
        let v = x.horner(a.coeffs());
        v.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}
