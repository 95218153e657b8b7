//! Independent checks on the engine.
//!
//! Norms are recomputed as resultants. Digits are re-derived without field
//! arithmetic: the orbit is kept projectively as integer polynomials
//! `P_0, …, P_d` in the generator, with state component `i` equal to
//! `P_i(θ)/P_0(θ)`. A step only applies integer row operations to them, and
//! every decision reads fixed-point intervals of `P_i(θ)` obtained from a
//! bisected root bracket.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::{resultant, RatPoly, Rational, RootRefiner};
use crate::cfexpand::{Discrepancy, DiscrepancyKind, ExpansionResult, ExpansionState, Mode, PivotStrategy};
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::numberfield::FieldElement;
use crate::realembed::RatInterval;

/// `Res(f, a)` for the monic minimal polynomial `f`.
pub fn resultant_norm(a: &FieldElement) -> Result<Rational> {
    if a.is_zero() {
        return Ok(Rational::zero());
    }
    resultant(a.field().minpoly(), &a.to_poly())
}

/// Whether the determinant norm and the resultant norm agree exactly.
pub fn norm_cross_check(a: &FieldElement) -> bool {
    resultant_norm(a).is_ok_and(|n| n == a.norm())
}

/// Starting data for the oracle, in plain polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub minpoly: RatPoly,
    pub window: RatInterval,
    pub components: Vec<RatPoly>,
}

impl Seed {
    pub fn for_family(spec: FamilySpec) -> Result<Seed> {
        spec.validate()?;
        let x = RatPoly::x();
        let int = |v: i64| RatPoly::constant(Rational::from_integer(v.into()));
        let components = match spec {
            FamilySpec::PurePower { l, m } => (1..l as usize)
                .map(|k| {
                    let mk = num_traits::pow(BigInt::from(m), k);
                    &RatPoly::monomial(Rational::one(), k)
                        - &RatPoly::constant(Rational::from_integer(mk))
                })
                .collect(),
            FamilySpec::Trinomial { .. } => vec![x.clone(), &x * &x],
            FamilySpec::ShiftedCubic { a, .. } => {
                // the window pins ⌊γ⌋ = −a
                let s = &x + &int(a);
                vec![s.clone(), &s * &s]
            }
            FamilySpec::JpExample { k, l } => {
                // 1/α = α² − kα − l from α³ − kα² − lα = 1
                let inv = &(&(&x * &x) - &(&x * &int(k))) - &int(l);
                vec![inv, &x - &int(k)]
            }
        };
        Ok(Seed {
            minpoly: spec.minpoly(),
            window: spec.window(),
            components,
        })
    }

    pub fn from_state(state: &ExpansionState) -> Seed {
        Seed {
            minpoly: state.field().minpoly().clone(),
            window: state.embedding().window().clone(),
            components: state.components().iter().map(FieldElement::to_poly).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    pub start_bits: u64,
    pub max_bits: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            start_bits: 128,
            max_bits: 16384,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleStop {
    Completed,
    /// No decision at `step` even at the ceiling.
    PrecisionCeiling { step: usize },
    LeftDomain { step: usize, reason: String },
}

/// One certified step.
#[derive(Clone, Debug)]
pub struct OracleRow {
    pub n: usize,
    pub pivot: usize,
    pub digits: Vec<i64>,
    /// Interval width exponent the decision was made at.
    pub bits: u64,
    /// Enclosure of the quotient each digit was read from.
    pub intervals: Vec<(Rational, Rational)>,
}

#[derive(Clone, Debug)]
pub struct OracleRun {
    pub spec: Option<FamilySpec>,
    pub mode: Mode,
    pub requested: usize,
    pub rows: Vec<OracleRow>,
    pub precision_bits: u64,
    pub stop: OracleStop,
}

impl OracleRun {
    pub fn digits(&self) -> Vec<Vec<i64>> {
        self.rows.iter().map(|r| r.digits.clone()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.stop == OracleStop::Completed
    }
}

type IntPoly = Vec<BigInt>;
type Fixed = (BigInt, BigInt);

fn trim(mut p: IntPoly) -> IntPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `a − d·b`
fn sub_scaled(a: &IntPoly, b: &IntPoly, d: i64) -> IntPoly {
    let d = BigInt::from(d);
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            match b.get(i) {
                Some(y) => x - &d * y,
                None => x,
            }
        })
        .collect();
    trim(out)
}

fn to_ratpoly(p: &IntPoly) -> RatPoly {
    RatPoly::new(p.iter().cloned().map(Rational::from_integer).collect())
}

/// Enclosure of `p(θ)·2^s` given `θ·2^s ∈ [t.0, t.1]`.
fn eval_fixed(p: &IntPoly, t: &Fixed, scale: &BigInt) -> Fixed {
    let Some(lead) = p.last() else {
        return (BigInt::zero(), BigInt::zero());
    };
    let mut lo = lead * scale;
    let mut hi = lo.clone();
    for c in p[..p.len() - 1].iter().rev() {
        let prods = [&lo * &t.0, &lo * &t.1, &hi * &t.0, &hi * &t.1];
        let mn = prods.iter().min().unwrap();
        let mx = prods.iter().max().unwrap();
        let cs = c * scale;
        lo = mn.div_floor(scale) + &cs;
        hi = mx.div_ceil(scale) + &cs;
    }
    (lo, hi)
}

/// Bounds on `num/den` for `den > 0`.
fn quotient(num: &Fixed, den: &Fixed) -> (Rational, Rational) {
    let lo_den = if num.0.is_negative() { &den.0 } else { &den.1 };
    let hi_den = if num.1.is_negative() { &den.1 } else { &den.0 };
    (
        Rational::new(num.0.clone(), lo_den.clone()),
        Rational::new(num.1.clone(), hi_den.clone()),
    )
}

fn certified_floor(q: &(Rational, Rational)) -> Option<i64> {
    let a = q.0.floor();
    (a == q.1.floor()).then(|| a.to_integer().to_i64()).flatten()
}

/// Rank of the coefficient matrix, by fraction-free elimination.
fn rank(rows: &[IntPoly]) -> usize {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let mut v = r.clone();
            v.resize(width, BigInt::zero());
            v
        })
        .collect();
    let mut r = 0;
    for col in 0..width {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest {
            let (a, b) = (pivot_row[col].clone(), row[col].clone());
            for (x, p) in row.iter_mut().zip(pivot_row) {
                *x = &*x * &a - p * &b;
            }
        }
        r += 1;
    }
    r
}

struct Decision {
    pivot: usize,
    digits: Vec<i64>,
    intervals: Vec<(Rational, Rational)>,
}

/// `|N(v_i)|` as `(p, q)` with `q > 0`.
fn abs_norm(f: &RatPoly, p: &IntPoly) -> Result<(BigInt, BigInt)> {
    let n = resultant(f, &to_ratpoly(p))?.abs();
    if n.is_zero() {
        return Err(Error::Constraint("oracle met a zero norm".into()));
    }
    Ok((n.numer().clone(), n.denom().clone()))
}

fn decide_ajpa(
    vals: &[Fixed],
    norms: &[(BigInt, BigInt)],
    l: usize,
    strategy: PivotStrategy,
) -> Option<Decision> {
    if vals.iter().any(|v| !v.0.is_positive()) {
        return None;
    }
    let d = vals.len() - 1;
    let e = l - 1;
    // v_i^(l-1)/|N(v_i)| as [klo, khi]/p
    let klo: Vec<BigInt> = (1..=d)
        .map(|i| num_traits::pow(vals[i].0.clone(), e) * &norms[i - 1].1)
        .collect();
    let khi: Vec<BigInt> = (1..=d)
        .map(|i| num_traits::pow(vals[i].1.clone(), e) * &norms[i - 1].1)
        .collect();
    let p = |i: usize| &norms[i].0;
    let above = |a: usize, b: usize| &klo[a] * p(b) > &khi[b] * p(a);
    let candidates: Vec<usize> = match strategy {
        PivotStrategy::MaxNormalized => (0..d).collect(),
        PivotStrategy::UnitNormMin => {
            let key = |i: usize| Rational::new(norms[i].0.clone(), norms[i].1.clone());
            let least = (0..d).map(key).min()?;
            (0..d).filter(|&i| key(i) == least).collect()
        }
    };
    let pick = candidates.iter().copied().find(|&w| {
        candidates.iter().all(|&j| {
            j == w
                || match strategy {
                    PivotStrategy::MaxNormalized => above(w, j),
                    PivotStrategy::UnitNormMin => above(j, w),
                }
        })
    })?;
    let pv = &vals[pick + 1];
    let mut digits = Vec::with_capacity(d);
    let mut intervals = Vec::with_capacity(d);
    for i in 1..=d {
        let num = if i == pick + 1 { &vals[0] } else { &vals[i] };
        let q = quotient(num, pv);
        digits.push(certified_floor(&q)?);
        intervals.push(q);
    }
    Some(Decision {
        pivot: pick,
        digits,
        intervals,
    })
}

fn decide_jp(vals: &[Fixed]) -> Option<Decision> {
    let head = &vals[1];
    if !head.0.is_positive() {
        return None;
    }
    let d = vals.len() - 1;
    let mut digits = Vec::with_capacity(d);
    let mut intervals = Vec::with_capacity(d);
    for i in 1..=d {
        let num = if i < d { &vals[i + 1] } else { &vals[0] };
        let q = quotient(num, head);
        digits.push(certified_floor(&q)?);
        intervals.push(q);
    }
    Some(Decision {
        pivot: 0,
        digits,
        intervals,
    })
}

/// Re-derives `steps` digit rows of a family member.
pub fn oracle_expand(
    spec: FamilySpec,
    mode: Mode,
    steps: usize,
    cfg: &OracleConfig,
) -> Result<OracleRun> {
    let mut run = oracle_expand_seed(&Seed::for_family(spec)?, mode, steps, cfg)?;
    run.spec = Some(spec);
    Ok(run)
}

pub fn oracle_expand_seed(
    seed: &Seed,
    mode: Mode,
    steps: usize,
    cfg: &OracleConfig,
) -> Result<OracleRun> {
    if steps == 0 {
        return Err(Error::Constraint("oracle needs at least one step".into()));
    }
    let f = seed.minpoly.monic()?;
    let l = f.degree().unwrap_or(0);
    let d = seed.components.len();
    if let Mode::Ajpa(_) = mode {
        if d + 1 != l {
            return Err(Error::TupleLength {
                expected: l.saturating_sub(1),
                found: d,
            });
        }
    }
    let sf = f.squarefree_part()?;
    let mut refiner = RootRefiner::new(&sf, &seed.window.lo, &seed.window.hi)?;

    // clear denominators: P_0 = D, P_i = D·c_i
    let mut all = vec![RatPoly::one()];
    all.extend(seed.components.iter().cloned());
    let den = all
        .iter()
        .flat_map(|p| p.coeffs().iter().map(|c| c.denom().clone()))
        .fold(BigInt::one(), |a, b| a.lcm(&b));
    let mut polys: Vec<IntPoly> = all
        .iter()
        .map(|p| {
            trim(
                p.coeffs()
                    .iter()
                    .map(|c| c.numer() * (&den / c.denom()))
                    .collect(),
            )
        })
        .collect();

    let mut run = OracleRun {
        spec: None,
        mode,
        requested: steps,
        rows: Vec::new(),
        precision_bits: cfg.start_bits,
        stop: OracleStop::Completed,
    };
    // Row operations are unimodular, so independence of 1 and the
    // components, once true, stays true along the orbit.
    if matches!(mode, Mode::Ajpa(_)) && rank(&polys) != d + 1 {
        run.stop = OracleStop::LeftDomain {
            step: 1,
            reason: "1 and the components are dependent".into(),
        };
        return Ok(run);
    }

    let mut bits = cfg.start_bits;
    for n in 1..=steps {
        if mode == Mode::Jp {
            if let Some(i) = polys[1..].iter().position(Vec::is_empty) {
                run.stop = OracleStop::LeftDomain {
                    step: n,
                    reason: format!("component {} is zero", i + 1),
                };
                return Ok(run);
            }
        }
        let norms = match mode {
            Mode::Ajpa(_) => polys[1..]
                .iter()
                .map(|p| abs_norm(&f, p))
                .collect::<Result<Vec<_>>>()?,
            Mode::Jp => Vec::new(),
        };
        let decision = loop {
            if bits > cfg.max_bits {
                run.stop = OracleStop::PrecisionCeiling { step: n };
                return Ok(run);
            }
            refiner.refine_to_bits(bits);
            let t = refiner.fixed_bounds(bits);
            let scale = BigInt::one() << bits;
            let vals: Vec<Fixed> = polys.iter().map(|p| eval_fixed(p, &t, &scale)).collect();
            let got = match mode {
                Mode::Ajpa(s) => decide_ajpa(&vals, &norms, l, s),
                Mode::Jp => decide_jp(&vals),
            };
            match got {
                Some(dec) => break dec,
                None => bits *= 2,
            }
        };
        run.precision_bits = run.precision_bits.max(bits);
        polys = match mode {
            Mode::Ajpa(_) => {
                let p = decision.pivot + 1;
                let pv = polys[p].clone();
                let mut next = polys.clone();
                next[0] = pv.clone();
                for i in 1..=d {
                    let src = if i == p { &polys[0] } else { &polys[i] };
                    next[i] = sub_scaled(src, &pv, decision.digits[i - 1]);
                }
                next
            }
            Mode::Jp => {
                let head = polys[1].clone();
                let mut next = vec![head.clone()];
                for i in 1..=d {
                    let src = if i < d { &polys[i + 1] } else { &polys[0] };
                    next.push(sub_scaled(src, &head, decision.digits[i - 1]));
                }
                next
            }
        };
        run.rows.push(OracleRow {
            n,
            pivot: decision.pivot,
            digits: decision.digits,
            bits,
            intervals: decision.intervals,
        });
    }
    Ok(run)
}

/// Positional diff of two digit sequences; a row missing on one side shows
/// up with an empty digit list.
pub fn diff_rows(engine: &[Vec<i64>], reference: &[Vec<i64>], kind: DiscrepancyKind) -> Vec<Discrepancy> {
    (0..engine.len().max(reference.len()))
        .filter_map(|i| {
            let e = engine.get(i);
            let r = reference.get(i);
            (e != r).then(|| Discrepancy {
                step: i + 1,
                kind,
                engine: e.cloned().unwrap_or_default(),
                reference: r.cloned().unwrap_or_default(),
            })
        })
        .collect()
}

/// Engine digits against the oracle over the oracle's requested range.
pub fn cross_check(exact: &ExpansionResult, oracle: &OracleRun) -> Vec<Discrepancy> {
    diff_rows(
        &exact.digits_upto(oracle.requested),
        &oracle.digits(),
        DiscrepancyKind::Oracle,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, RatPoly};
    use crate::cfexpand::expand;
    use crate::families::family_build;
    use crate::numberfield::{pure_field, NumberField};

    const MAX: Mode = Mode::Ajpa(PivotStrategy::MaxNormalized);

    #[test]
    fn norm_paths() {
        let k = pure_field(3, 9).unwrap();
        let a = FieldElement::from_ints(&k, &[-2, 1]);
        assert!(norm_cross_check(&a));
        assert_eq!(resultant_norm(&a).unwrap(), rat(1));

        let t = NumberField::new(RatPoly::from_ints(&[1, -3, 0, 1])).unwrap();
        let d = FieldElement::generator(&t);
        assert!(norm_cross_check(&d));
        assert_eq!(resultant_norm(&d).unwrap(), rat(-1));

        let q = pure_field(4, 17).unwrap();
        let five = FieldElement::from_rational(&q, rat(5));
        assert!(norm_cross_check(&five));
        assert_eq!(resultant_norm(&five).unwrap(), rat(625));
        assert!(norm_cross_check(&FieldElement::zero(&q)));
    }

    #[test]
    fn fixed_point_horner_encloses() {
        // p(x) = 3x² − 2x + 1 at x ∈ [1/2, 3/4], scale 2^4
        let p: IntPoly = vec![1.into(), (-2).into(), 3.into()];
        let scale = BigInt::from(16);
        let (lo, hi) = eval_fixed(&p, &(8.into(), 12.into()), &scale);
        // true range [2/3, 1.1875]·16 ⊂ [lo, hi]
        assert!(lo <= BigInt::from(10) && hi >= BigInt::from(19));
    }

    #[test]
    fn trinomial_agrees() {
        let spec = FamilySpec::Trinomial { m: 3 };
        let run = oracle_expand(spec, MAX, 20, &OracleConfig::default()).unwrap();
        assert!(run.is_complete());
        let b = family_build(spec).unwrap();
        let exact = expand(&b.state, MAX, 100).unwrap();
        assert!(cross_check(&exact, &run).is_empty());
        for row in &run.rows {
            for (q, d) in row.intervals.iter().zip(&row.digits) {
                assert_eq!(q.0.floor(), q.1.floor());
                assert_eq!(q.0.floor().to_integer(), BigInt::from(*d));
            }
        }
    }

    #[test]
    fn pure_cubic_first_digit() {
        let run = oracle_expand(
            FamilySpec::PurePower { l: 3, m: 2 },
            MAX,
            1,
            &OracleConfig::default(),
        )
        .unwrap();
        assert_eq!(run.rows[0].digits[0], 12);
    }

    #[test]
    fn jp_constant() {
        let run = oracle_expand(
            FamilySpec::JpExample { k: 2, l: 1 },
            Mode::Jp,
            100,
            &OracleConfig::default(),
        )
        .unwrap();
        assert!(run.is_complete());
        assert!(run.digits().iter().all(|d| d == &vec![1, 2]));
    }

    #[test]
    fn seeds_match_engine_states() {
        for spec in [
            FamilySpec::PurePower { l: 5, m: 3 },
            FamilySpec::Trinomial { m: 4 },
            FamilySpec::ShiftedCubic { a: -2, b: 3 },
            FamilySpec::JpExample { k: 4, l: 2 },
        ] {
            let b = family_build(spec).unwrap();
            assert_eq!(Seed::for_family(spec).unwrap(), Seed::from_state(&b.state), "{spec}");
        }
    }

    #[test]
    fn diffs() {
        let a = vec![vec![1, 2], vec![3, 4]];
        assert!(diff_rows(&a, &a, DiscrepancyKind::Oracle).is_empty());
        let mut b = a.clone();
        b[1][0] = 5;
        let d = diff_rows(&a, &b, DiscrepancyKind::Oracle);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].step, d[0].engine.clone(), d[0].reference.clone()), (2, vec![3, 4], vec![5, 4]));
        assert_eq!(diff_rows(&a, &a[..1], DiscrepancyKind::Oracle).len(), 1);
    }

    #[test]
    fn ceiling_is_reported() {
        let cfg = OracleConfig {
            start_bits: 2,
            max_bits: 2,
        };
        let run = oracle_expand(FamilySpec::Trinomial { m: 12 }, MAX, 5, &cfg).unwrap();
        assert_eq!(run.stop, OracleStop::PrecisionCeiling { step: 1 });
    }
}
