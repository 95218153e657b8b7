//! Exact arithmetic in `K = ℚ[x]/(f)` using the power basis `1, θ, …, θ^(l-1)`.
//!
//! The minimal polynomial is assumed irreducible. That is not checked up
//! front; a reducible modulus shows up lazily as [`Error::NonInvertible`]
//! when some nonzero element has no inverse.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use crate::algebra::{rat, RatPoly, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NumberField {
    minpoly: RatPoly,
    /// Coefficients of the minimal polynomial when they are all integers.
    integral: Option<Vec<BigInt>>,
}

impl NumberField {
    /// Builds `ℚ[x]/(f)`. Any nonzero rational multiple of a polynomial
    /// defines the same field, so `f` is scaled to be monic.
    pub fn new(minpoly: RatPoly) -> Result<Arc<Self>> {
        let deg = minpoly.degree().ok_or(Error::ZeroPolynomial)?;
        if deg < 2 {
            return Err(Error::Constraint(format!(
                "field degree must be at least 2, got {deg}"
            )));
        }
        let minpoly = minpoly.monic()?;
        let integral = minpoly
            .coeffs()
            .iter()
            .map(|c| c.is_integer().then(|| c.numer().clone()))
            .collect();
        Ok(Arc::new(NumberField { minpoly, integral }))
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap()
    }

    pub fn minpoly(&self) -> &RatPoly {
        &self.minpoly
    }

    /// Multiplies a coefficient vector of length `l` by `θ`, in place.
    fn mul_by_generator(&self, v: &mut Vec<Rational>) {
        let l = self.degree();
        let top = v.pop().unwrap();
        v.insert(0, Rational::zero());
        if !top.is_zero() {
            for (i, c) in self.minpoly.coeffs()[..l].iter().enumerate() {
                v[i] -= &top * c;
            }
        }
    }

    fn mul_by_generator_int(&self, f: &[BigInt], v: &mut Vec<BigInt>) {
        let l = self.degree();
        let top = v.pop().unwrap();
        v.insert(0, BigInt::zero());
        if !top.is_zero() {
            for (i, c) in f[..l].iter().enumerate() {
                v[i] -= &top * c;
            }
        }
    }

    /// Reduces an arbitrary-length coefficient vector modulo the minimal
    /// polynomial.
    fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        let l = self.degree();
        let f = self.minpoly.coeffs();
        while v.len() > l {
            let top = v.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let off = v.len() - l;
            for (i, c) in f[..l].iter().enumerate() {
                v[off + i] -= &top * c;
            }
        }
        v.resize(l, Rational::zero());
        v
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[x]/({})", self.minpoly)
    }
}

fn same_field(a: &Arc<NumberField>, b: &Arc<NumberField>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// An element of a number field as power-basis coordinates.
#[derive(Clone, Debug)]
pub struct FieldElement {
    field: Arc<NumberField>,
    coeffs: Vec<Rational>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        same_field(&self.field, &other.field) && self.coeffs == other.coeffs
    }
}

impl Eq for FieldElement {}

impl FieldElement {
    /// Exactly `l` power-basis coordinates, lowest first.
    pub fn from_coeffs(field: &Arc<NumberField>, coeffs: Vec<Rational>) -> Result<Self> {
        let l = field.degree();
        if coeffs.len() != l {
            return Err(Error::TupleLength {
                expected: l,
                found: coeffs.len(),
            });
        }
        Ok(FieldElement {
            field: field.clone(),
            coeffs,
        })
    }

    /// The class of `p(θ)`; `p` may have any degree.
    pub fn from_poly(field: &Arc<NumberField>, p: &RatPoly) -> Self {
        FieldElement {
            field: field.clone(),
            coeffs: field.reduce(p.coeffs().to_vec()),
        }
    }

    pub fn from_ints(field: &Arc<NumberField>, coeffs: &[i64]) -> Self {
        Self::from_poly(field, &RatPoly::from_ints(coeffs))
    }

    pub fn from_rational(field: &Arc<NumberField>, c: Rational) -> Self {
        Self::from_poly(field, &RatPoly::constant(c))
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        Self::from_poly(field, &RatPoly::zero())
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::from_rational(field, Rational::one())
    }

    /// The generator `θ`.
    pub fn generator(field: &Arc<NumberField>) -> Self {
        Self::from_poly(field, &RatPoly::x())
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn to_poly(&self) -> RatPoly {
        RatPoly::new(self.coeffs.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// True iff every coordinate beyond the constant term vanishes.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn rational_value(&self) -> Option<&Rational> {
        self.is_rational().then(|| &self.coeffs[0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_field(&self.field, &other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let l = self.coeffs.len();
        if let Some(f) = &self.field.integral {
            let (a, da) = split(&self.coeffs);
            let (b, db) = split(&other.coeffs);
            let mut prod = vec![BigInt::zero(); 2 * l - 1];
            for (i, x) in a.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b.iter().enumerate() {
                    prod[i + j] += x * y;
                }
            }
            while prod.len() > l {
                let top = prod.pop().unwrap();
                if top.is_zero() {
                    continue;
                }
                let off = prod.len() - l;
                for (i, c) in f[..l].iter().enumerate() {
                    prod[off + i] -= &top * c;
                }
            }
            let den = da * db;
            return Ok(FieldElement {
                field: self.field.clone(),
                coeffs: prod
                    .into_iter()
                    .map(|c| Rational::new(c, den.clone()))
                    .collect(),
            });
        }
        let mut prod = vec![Rational::zero(); 2 * l - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(FieldElement {
            field: self.field.clone(),
            coeffs: self.field.reduce(prod),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c` for a rational `c`.
    pub fn add_rational(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = FieldElement::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, solving `M(self)·x = e₀` fraction-free.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(c) = self.rational_value() {
            return Ok(FieldElement::from_rational(&self.field, c.recip()));
        }
        let l = self.coeffs.len();
        let x = match self.int_mult_matrix() {
            Some((m, den)) => {
                let mut rhs = vec![BigInt::zero(); l];
                rhs[0] = den;
                solve_bareiss_int(m, rhs)
            }
            None => {
                let mut rhs = vec![Rational::zero(); l];
                rhs[0] = Rational::one();
                solve_bareiss(self.mult_matrix(), rhs)
            }
        }
        .ok_or(Error::NonInvertible)?;
        Ok(FieldElement {
            field: self.field.clone(),
            coeffs: x,
        })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inv()?)
    }

    /// Matrix of multiplication by `self`; column `j` holds `self·θ^j`.
    pub fn mult_matrix(&self) -> Vec<Vec<Rational>> {
        let l = self.coeffs.len();
        let mut cols = Vec::with_capacity(l);
        let mut col = self.coeffs.clone();
        for _ in 0..l {
            cols.push(col.clone());
            self.field.mul_by_generator(&mut col);
        }
        (0..l)
            .map(|i| (0..l).map(|j| cols[j][i].clone()).collect())
            .collect()
    }

    /// `M(self) = M/den` with an integer matrix `M`, for integral fields.
    fn int_mult_matrix(&self) -> Option<(Vec<Vec<BigInt>>, BigInt)> {
        let f = self.field.integral.as_ref()?;
        let l = self.coeffs.len();
        let (mut col, den) = split(&self.coeffs);
        let mut cols = Vec::with_capacity(l);
        for _ in 0..l {
            cols.push(col.clone());
            self.field.mul_by_generator_int(f, &mut col);
        }
        let m = (0..l)
            .map(|i| (0..l).map(|j| cols[j][i].clone()).collect())
            .collect();
        Some((m, den))
    }

    /// `N_{K/ℚ}(self)`: the determinant of the multiplication matrix.
    pub fn norm(&self) -> Rational {
        match self.int_mult_matrix() {
            Some((m, den)) => {
                let l = m.len();
                Rational::new(det_int(m), num_traits::pow(den, l))
            }
            None => det_bareiss(self.mult_matrix()),
        }
    }

    /// Injective byte encoding of the coordinate vector.
    ///
    /// Per coordinate: a sign byte (0 zero, 1 positive, 2 negative), then
    /// the numerator magnitude and the denominator as LEB128-length-prefixed
    /// big-endian bytes. A zero numerator and a denominator of one are both
    /// encoded as empty, so the zero element takes exactly `3l` bytes.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coeffs.len() * 4);
        self.write_key(&mut out);
        out
    }

    pub fn write_key(&self, out: &mut Vec<u8>) {
        for c in &self.coeffs {
            let (sign, mag) = c.numer().to_bytes_be();
            out.push(match sign {
                Sign::NoSign => 0,
                Sign::Plus => 1,
                Sign::Minus => 2,
            });
            let mag: &[u8] = if sign == Sign::NoSign { &[] } else { &mag };
            write_bytes(out, mag);
            let den = if c.denom().is_one() {
                Vec::new()
            } else {
                c.denom().to_bytes_be().1
            };
            write_bytes(out, &den);
        }
    }

    /// Inverse of [`canonical_key`](Self::canonical_key).
    pub fn from_key(field: &Arc<NumberField>, key: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let el = Self::read_key(field, key, &mut pos)?;
        if pos != key.len() {
            return Err(Error::Parse("trailing bytes in element key".into()));
        }
        Ok(el)
    }

    pub fn read_key(field: &Arc<NumberField>, key: &[u8], pos: &mut usize) -> Result<Self> {
        let bad = || Error::Parse("truncated element key".into());
        let mut coeffs = Vec::with_capacity(field.degree());
        for _ in 0..field.degree() {
            let sign = match *key.get(*pos).ok_or_else(bad)? {
                0 => Sign::NoSign,
                1 => Sign::Plus,
                2 => Sign::Minus,
                b => return Err(Error::Parse(format!("bad sign byte {b}"))),
            };
            *pos += 1;
            let num = read_bytes(key, pos)?;
            let den = read_bytes(key, pos)?;
            let num = BigInt::from_biguint(sign, BigUint::from_bytes_be(num));
            let den = if den.is_empty() {
                BigInt::one()
            } else {
                BigInt::from(BigUint::from_bytes_be(den))
            };
            coeffs.push(Rational::new(num, den));
        }
        Self::from_coeffs(field, coeffs)
    }
}

fn write_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    let mut n = bytes.len();
    loop {
        let b = (n & 0x7f) as u8;
        n >>= 7;
        if n == 0 {
            out.push(b);
            break;
        }
        out.push(b | 0x80);
    }
    out.extend_from_slice(bytes);
}

fn read_bytes<'a>(key: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    let mut n = 0usize;
    let mut shift = 0;
    loop {
        let b = *key
            .get(*pos)
            .ok_or_else(|| Error::Parse("truncated length".into()))?;
        *pos += 1;
        n |= ((b & 0x7f) as usize) << shift;
        if b & 0x80 == 0 {
            break;
        }
        shift += 7;
    }
    let end = *pos + n;
    let s = key
        .get(*pos..end)
        .ok_or_else(|| Error::Parse("truncated magnitude".into()))?;
    *pos = end;
    Ok(s)
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly().to_string().replace('x', "θ"))
    }
}

// Operator forms panic on a field mismatch; use the `try_*` methods when the
// operands come from different sources.
impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.try_add(rhs).expect("field mismatch")
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.try_sub(rhs).expect("field mismatch")
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.try_mul(rhs).expect("field mismatch")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// Splits rationals into integer numerators over their least common
/// denominator.
fn split(v: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let den = v
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let nums = v.iter().map(|c| c.numer() * (&den / c.denom())).collect();
    (nums, den)
}

fn det_int(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Fraction-free (Bareiss) determinant. Rational entries are first cleared
/// to integers by a common denominator.
pub fn det_bareiss(m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let (flat, lcm) = split(&m.concat());
    let a = flat.chunks(n.max(1)).map(<[BigInt]>::to_vec).collect();
    Rational::new(det_int(a), num_traits::pow(lcm, n))
}

/// Solves `m·x = rhs` by fraction-free elimination over ℤ followed by
/// rational back-substitution. `None` when `m` is singular.
pub fn solve_bareiss(m: Vec<Vec<Rational>>, rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut all = m.concat();
    all.extend(rhs);
    let (flat, _) = split(&all);
    let b = flat[n * n..].to_vec();
    let a = flat[..n * n].chunks(n.max(1)).map(<[BigInt]>::to_vec).collect();
    solve_bareiss_int(a, b)
}

fn solve_bareiss_int(m: Vec<Vec<BigInt>>, rhs: Vec<BigInt>) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m
        .into_iter()
        .zip(rhs)
        .map(|(mut row, r)| {
            row.push(r);
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let p = (k + 1..n).find(|&r| !a[r][k].is_zero())?;
            a.swap(k, p);
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    // y = det·x is integral (Cramer), so back-substitution divides exactly
    let det = a[n - 1][n - 1].clone();
    let mut y = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let mut acc = &a[i][n] * &det;
        for j in i + 1..n {
            acc -= &a[i][j] * &y[j];
        }
        y[i] = acc / &a[i][i];
    }
    Some(y.into_iter().map(|v| Rational::new(v, det.clone())).collect())
}

/// Whether `1, α₁, …, α_{l-1}` are jointly linearly independent over ℚ.
pub fn independent_with_one(elems: &[FieldElement]) -> Result<bool> {
    let Some(first) = elems.first() else {
        return Err(Error::TupleLength {
            expected: 1,
            found: 0,
        });
    };
    let field = first.field().clone();
    let l = field.degree();
    if elems.len() != l - 1 {
        return Err(Error::TupleLength {
            expected: l - 1,
            found: elems.len(),
        });
    }
    let mut rows = vec![FieldElement::one(&field).coeffs().to_vec()];
    for e in elems {
        first.check(e)?;
        rows.push(e.coeffs().to_vec());
    }
    Ok(!det_bareiss(rows).is_zero())
}

/// `|N(a)|`
pub fn abs_norm(a: &FieldElement) -> Rational {
    a.norm().abs()
}

/// `θ^l = c` as a field (pure power extension).
pub fn pure_field(l: usize, c: i64) -> Result<Arc<NumberField>> {
    let mut coeffs = vec![rat(0); l + 1];
    coeffs[0] = rat(-c);
    coeffs[l] = rat(1);
    NumberField::new(RatPoly::new(coeffs))
}
