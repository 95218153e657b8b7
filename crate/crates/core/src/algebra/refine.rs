//! Bisection of an isolated real root on a dyadic grid.
//!
//! The current bracket is `[lo₀ + w₀·t/2^k, lo₀ + w₀·(t+1)/2^k]` for the
//! original window `[lo₀, lo₀ + w₀]`. Signs at midpoints are evaluated on
//! the homogenized integer polynomial, so no rational normalization happens
//! inside the loop.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::RatPoly;
use super::rational::{sign, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RootRefiner {
    poly: Vec<BigInt>,
    lo0: Rational,
    width0: Rational,
    t: BigInt,
    k: u64,
    sign_lo: i32,
    exact: Option<Rational>,
}

/// Sign of `Σ c_i a^i b^(n-i)` with `b > 0`, i.e. of `f(a/b)`.
fn homogeneous_sign(poly: &[BigInt], a: &BigInt, b: &BigInt) -> i32 {
    let n = poly.len() - 1;
    let mut acc = poly[n].clone();
    let mut bpow = BigInt::one();
    for c in poly[..n].iter().rev() {
        bpow *= b;
        acc = acc * a + c * &bpow;
    }
    if acc.is_zero() {
        0
    } else if acc.is_positive() {
        1
    } else {
        -1
    }
}

impl RootRefiner {
    /// `f` must change sign across the window (one simple root inside, no
    /// root at either endpoint).
    pub fn new(f: &RatPoly, lo: &Rational, hi: &Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::EmptyInterval);
        }
        let (_, poly) = f.primitive_part()?;
        let (sl, sh) = (sign(&f.eval(lo)), sign(&f.eval(hi)));
        if sl == 0 || sh == 0 || sl == sh {
            return Err(Error::Constraint(
                "root bracket needs a strict sign change".into(),
            ));
        }
        Ok(RootRefiner {
            poly,
            lo0: lo.clone(),
            width0: hi - lo,
            t: BigInt::zero(),
            k: 0,
            sign_lo: sl,
            exact: None,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn bisections(&self) -> u64 {
        self.k
    }

    /// One bisection step.
    pub fn bisect(&mut self) {
        if self.exact.is_some() {
            return;
        }
        // midpoint index 2t+1 on the grid of spacing w₀/2^(k+1)
        let s = &self.t * 2 + 1;
        let (p, q) = (self.lo0.numer(), self.lo0.denom());
        let (u, v) = (self.width0.numer(), self.width0.denom());
        let scale = BigInt::one() << (self.k + 1);
        let a = p * v * &scale + u * &s * q;
        let b = q * v * &scale;
        let sg = homogeneous_sign(&self.poly, &a, &b);
        self.k += 1;
        if sg == 0 {
            self.exact = Some(Rational::new(a, b));
            self.t = s;
        } else if sg == self.sign_lo {
            self.t = s;
        } else {
            self.t = &self.t * 2;
        }
    }

    /// Bisects until the bracket width is at most `2^-bits`.
    pub fn refine_to_bits(&mut self, bits: u64) {
        let (u, v) = (self.width0.numer(), self.width0.denom());
        let excess = (u.bits() as i64 - v.bits() as i64 + 1).max(0) as u64;
        let need = bits + excess;
        while self.k < need && self.exact.is_none() {
            self.bisect();
        }
    }

    fn endpoint(&self, idx: &BigInt) -> Rational {
        let step = Rational::new(BigInt::one(), BigInt::one() << self.k);
        &self.lo0 + &self.width0 * Rational::from_integer(idx.clone()) * step
    }

    pub fn bounds(&self) -> (Rational, Rational) {
        if let Some(x) = &self.exact {
            return (x.clone(), x.clone());
        }
        (self.endpoint(&self.t), self.endpoint(&(&self.t + 1)))
    }

    /// `(floor(lo·2^s), ceil(hi·2^s))` for the current bracket.
    pub fn fixed_bounds(&self, s: u64) -> (BigInt, BigInt) {
        let (lo, hi) = self.bounds();
        let scale = BigInt::one() << s;
        let lo_s = (lo.numer() * &scale).div_floor(lo.denom());
        let hi_s = (hi.numer() * &scale).div_ceil(hi.denom());
        (lo_s, hi_s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{rat, ratio};

    #[test]
    fn refines_cube_root() {
        let f = RatPoly::from_ints(&[-9, 0, 0, 1]);
        let mut r = RootRefiner::new(&f, &rat(2), &rat(3)).unwrap();
        r.refine_to_bits(40);
        let (lo, hi) = r.bounds();
        assert!(&hi - &lo <= ratio(1, 1 << 40));
        assert!(sign(&f.eval(&lo)) < 0 && sign(&f.eval(&hi)) > 0);
        let (a, b) = r.fixed_bounds(20);
        // 9^(1/3) = 2.080083823...
        let x = 2.080083823_f64 * (1u64 << 20) as f64;
        assert!(a <= BigInt::from(x as i64) && BigInt::from(x as i64 + 1) <= b);
    }

    #[test]
    fn hits_rational_root_exactly() {
        let f = RatPoly::from_ints(&[-1, 2]);
        let mut r = RootRefiner::new(&f, &rat(0), &rat(1)).unwrap();
        r.bisect();
        assert!(r.is_exact());
        assert_eq!(r.bounds(), (ratio(1, 2), ratio(1, 2)));
    }

    #[test]
    fn odd_window() {
        let f = RatPoly::from_ints(&[1, -3, 0, 1]);
        let mut r = RootRefiner::new(&f, &ratio(-1, 3), &ratio(5, 7)).unwrap();
        r.refine_to_bits(30);
        let (lo, hi) = r.bounds();
        assert!(lo < ratio(347297, 1_000_000) && ratio(347295, 1_000_000) < hi);
        assert!(RootRefiner::new(&f, &rat(2), &rat(3)).is_err());
    }
}
