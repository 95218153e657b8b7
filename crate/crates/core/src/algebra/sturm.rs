use super::poly::RatPoly;
use super::rational::{format_rational, sign, Rational};
use crate::error::{Error, Result};

/// Sturm sequence of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    seq: Vec<RatPoly>,
}

impl SturmSequence {
    pub fn new(f: &RatPoly) -> Result<Self> {
        let sf = f.squarefree_part()?;
        let mut seq = vec![sf.clone(), sf.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1])?;
            seq.push(-&r);
        }
        seq.pop();
        Ok(SturmSequence { seq })
    }

    /// The squarefree polynomial the sequence was built from.
    pub fn squarefree(&self) -> &RatPoly {
        &self.seq[0]
    }

    pub fn variations_at(&self, x: &Rational) -> usize {
        let mut last = 0;
        let mut count = 0;
        for p in &self.seq {
            let s = sign(&p.eval(x));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`.
    pub fn count(&self, lo: &Rational, hi: &Rational) -> Result<usize> {
        if lo >= hi {
            return Err(Error::EmptyInterval);
        }
        for e in [lo, hi] {
            if sign(&self.squarefree().eval(e)) == 0 {
                return Err(Error::EndpointIsRoot(format_rational(e)));
            }
        }
        Ok(self.variations_at(lo) - self.variations_at(hi))
    }
}

/// Exact count of distinct real roots of `f` in `(lo, hi)`.
pub fn sturm_count(f: &RatPoly, lo: &Rational, hi: &Rational) -> Result<usize> {
    SturmSequence::new(f)?.count(lo, hi)
}
