//! Resultants by the subresultant pseudo-remainder sequence over ℤ.
//!
//! Convention: `Res(f, g) = lc(f)^deg(g) · ∏_{f(α)=0} g(α)`, which is the
//! Sylvester determinant. For monic `f` this is the norm of `g(θ)` in
//! `ℚ[x]/(f)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::RatPoly;
use super::rational::Rational;
use crate::error::{Error, Result};

type IntPoly = Vec<BigInt>;

fn deg(p: &IntPoly) -> usize {
    p.len() - 1
}

fn trim(mut p: IntPoly) -> IntPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `lc(b)^(deg a - deg b + 1) · a  mod  b`
fn pseudo_rem(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let db = deg(b);
    let lb = b.last().unwrap();
    let mut r = a.clone();
    let mut e = deg(a) + 1 - db;
    while r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        let off = dr - db;
        for (j, bc) in b.iter().enumerate() {
            r[off + j] -= &lr * bc;
        }
        r = trim(r);
        e -= 1;
    }
    if e > 0 {
        let f = num_traits::pow(lb.clone(), e);
        for c in r.iter_mut() {
            *c *= &f;
        }
    }
    r
}

fn int_pow(b: &BigInt, e: usize) -> BigInt {
    num_traits::pow(b.clone(), e)
}

/// Resultant of two nonzero integer polynomials.
fn int_resultant(a: IntPoly, b: IntPoly) -> BigInt {
    let (mut a, mut b) = (a, b);
    let mut s = BigInt::one();
    if deg(&a) < deg(&b) {
        if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
            s = -s;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if deg(&b) == 0 {
        return s * int_pow(&b[0], deg(&a));
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = deg(&a) - deg(&b);
        if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
            s = -s;
        }
        let r = pseudo_rem(&a, &b);
        a = b;
        if r.is_empty() {
            return BigInt::zero();
        }
        let div = &g * int_pow(&h, delta);
        b = r.into_iter().map(|c| c / &div).collect();
        g = a.last().unwrap().clone();
        // h <- h^(1-δ) g^δ, always an exact division
        h = if delta == 0 {
            h
        } else {
            int_pow(&g, delta) / int_pow(&h, delta - 1)
        };
        if deg(&b) == 0 {
            let da = deg(&a);
            let num = int_pow(b.last().unwrap(), da);
            return s * num / int_pow(&h, da - 1);
        }
    }
}

/// Exact resultant of two nonzero rational polynomials.
pub fn resultant(f: &RatPoly, g: &RatPoly) -> Result<Rational> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (df, dg) = (f.degree().unwrap(), g.degree().unwrap());
    let (cf, pf) = f.primitive_part()?;
    let (cg, pg) = g.primitive_part()?;
    let scale = num_traits::pow(cf, dg) * num_traits::pow(cg, df);
    Ok(scale * Rational::from_integer(int_resultant(pf, pg)))
}
