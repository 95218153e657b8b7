//! The algebraic Jacobi-Perron map and the classical Jacobi-Perron map on
//! exact states, with exact cycle detection.
//!
//! A state is a tuple `(α₁, …, α_d)` of field elements in `[0,1)`. One AJP
//! step picks a pivot `p`, replaces `α_p` by `frac(1/α_p)` and every other
//! `α_i` by `frac(α_i/α_p)`, and emits the floors as digits. Positions are
//! preserved. The classical JP step maps `ψ` to `frac(ψ₂/ψ₁, …, ψ_d/ψ₁, 1/ψ₁)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::numberfield::{abs_norm, independent_with_one, FieldElement, NumberField};
use crate::realembed::{Greater, RealEmbedding};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// How the AJP step chooses its pivot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PivotStrategy {
    /// Largest `α_i / |N(α_i)|^(1/(l-1))`.
    #[serde(rename = "max-normalized")]
    MaxNormalized,
    /// Among the components of least `|N|`, the one of least normalized
    /// value.
    #[serde(rename = "unit-pivot")]
    UnitNormMin,
}

impl fmt::Display for PivotStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PivotStrategy::MaxNormalized => "max-normalized",
            PivotStrategy::UnitNormMin => "unit-pivot",
        })
    }
}

impl FromStr for PivotStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-normalized" | "max" => Ok(PivotStrategy::MaxNormalized),
            "unit-pivot" | "unit-norm-min" | "unit" => Ok(PivotStrategy::UnitNormMin),
            _ => Err(Error::Parse(format!("unknown pivot strategy {s:?}"))),
        }
    }
}

/// Which map drives an expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Ajpa(PivotStrategy),
    /// Classical Jacobi-Perron on real vectors.
    Jp,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Ajpa(s) => s.fmt(f),
            Mode::Jp => f.write_str("jp"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "jp" {
            Ok(Mode::Jp)
        } else {
            s.parse().map(Mode::Ajpa)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionState {
    embedding: Arc<RealEmbedding>,
    components: Vec<FieldElement>,
}

impl PartialEq for ExpansionState {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

fn check_unit_interval(emb: &RealEmbedding, c: &FieldElement, i: usize) -> Result<()> {
    if emb.sign(c)? < 0 || emb.sign(&c.add_rational(&-Rational::one()))? >= 0 {
        return Err(Error::DomainViolation(format!(
            "component {} is outside [0,1)",
            i + 1
        )));
    }
    Ok(())
}

impl ExpansionState {
    /// A point of `X_K`: `l-1` irrational components in `(0,1)` which,
    /// together with 1, are linearly independent over ℚ.
    pub fn new(embedding: Arc<RealEmbedding>, components: Vec<FieldElement>) -> Result<Self> {
        let l = embedding.field().degree();
        if components.len() != l - 1 {
            return Err(Error::TupleLength {
                expected: l - 1,
                found: components.len(),
            });
        }
        for (i, c) in components.iter().enumerate() {
            if c.field() != embedding.field() && **c.field() != **embedding.field() {
                return Err(Error::FieldMismatch);
            }
            if c.is_rational() {
                return Err(Error::DomainViolation(format!(
                    "component {} is rational",
                    i + 1
                )));
            }
            check_unit_interval(&embedding, c, i)?;
        }
        if !independent_with_one(&components)? {
            return Err(Error::DomainViolation(
                "1 and the components are linearly dependent over Q".into(),
            ));
        }
        Ok(ExpansionState {
            embedding,
            components,
        })
    }

    /// A state for the classical JP map: components in `[0,1)`, any
    /// dimension, no independence requirement.
    pub fn new_jp(embedding: Arc<RealEmbedding>, components: Vec<FieldElement>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::TupleLength {
                expected: 1,
                found: 0,
            });
        }
        for (i, c) in components.iter().enumerate() {
            if c.field() != embedding.field() && **c.field() != **embedding.field() {
                return Err(Error::FieldMismatch);
            }
            check_unit_interval(&embedding, c, i)?;
        }
        Ok(ExpansionState {
            embedding,
            components,
        })
    }

    pub(crate) fn unchecked(embedding: Arc<RealEmbedding>, components: Vec<FieldElement>) -> Self {
        ExpansionState {
            embedding,
            components,
        }
    }

    pub fn embedding(&self) -> &Arc<RealEmbedding> {
        &self.embedding
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.embedding.field()
    }

    pub fn components(&self) -> &[FieldElement] {
        &self.components
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    /// Concatenated canonical keys of the components.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for c in &self.components {
            c.write_key(&mut out);
        }
        out
    }

    pub fn abs_norms(&self) -> Vec<Rational> {
        self.components.iter().map(abs_norm).collect()
    }

    /// Uses a different embedding handle for the same root (e.g. a private
    /// clone for a concurrent run).
    pub fn with_embedding(&self, embedding: Arc<RealEmbedding>) -> Self {
        ExpansionState {
            embedding,
            components: self.components.clone(),
        }
    }
}

/// The output of one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub n: usize,
    /// 0-based index of the component placed in the denominator.
    pub pivot: usize,
    pub digits: Vec<i64>,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Periodic,
    BudgetExhausted,
    LeftDomain { step: usize, reason: String },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Periodic => "Periodic",
            Status::BudgetExhausted => "BudgetExhausted",
            Status::LeftDomain { .. } => "LeftDomain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    /// Engine digits differ from an expected table row.
    Table,
    /// Engine digits differ from the interval oracle.
    Oracle,
    /// Observed preperiod/period structure differs from the expected one.
    Structure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub step: usize,
    pub kind: DiscrepancyKind,
    pub engine: Vec<i64>,
    #[serde(rename = "expected")]
    pub reference: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct ExpansionResult {
    pub mode: Mode,
    /// Every step performed, in order.
    pub records: Vec<StepRecord>,
    /// `states[n]` is the state after `n` steps; `states[0]` is the input.
    pub states: Vec<ExpansionState>,
    pub preperiod_len: usize,
    pub period_len: usize,
    pub status: Status,
    pub discrepancies: Vec<Discrepancy>,
}

impl ExpansionResult {
    pub fn preperiod(&self) -> &[StepRecord] {
        &self.records[..self.preperiod_len]
    }

    pub fn period(&self) -> &[StepRecord] {
        &self.records[self.preperiod_len..self.preperiod_len + self.period_len]
    }

    pub fn states_visited(&self) -> usize {
        self.states.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.status == Status::Periodic
    }

    /// The first `count` records, repeating the period as needed. For a
    /// non-periodic result, at most the records that were computed.
    pub fn records_upto(&self, count: usize) -> Vec<StepRecord> {
        if !self.is_periodic() {
            return self.records.iter().take(count).cloned().collect();
        }
        (0..count)
            .map(|i| {
                let src = if i < self.preperiod_len {
                    i
                } else {
                    self.preperiod_len + (i - self.preperiod_len) % self.period_len
                };
                StepRecord {
                    n: i + 1,
                    ..self.records[src].clone()
                }
            })
            .collect()
    }

    pub fn digits_upto(&self, count: usize) -> Vec<Vec<i64>> {
        self.records_upto(count)
            .into_iter()
            .map(|r| r.digits)
            .collect()
    }

    /// Re-applies the period from the cycle-entry state and checks that the
    /// same state comes back, with the same digits.
    pub fn verify_period(&self) -> Result<bool> {
        if !self.is_periodic() {
            return Ok(false);
        }
        let entry = &self.states[self.preperiod_len];
        let mut s = entry.clone();
        for rec in self.period() {
            let (r, next) = step(&s, self.mode, rec.n)?;
            if r.digits != rec.digits || r.pivot != rec.pivot {
                return Ok(false);
            }
            s = next;
        }
        Ok(s.key() == entry.key())
    }
}

fn to_digit(v: BigInt) -> Result<i64> {
    v.to_i64().ok_or(Error::DigitOverflow)
}

/// Picks the pivot index (0-based) under `strategy`, given `|N|` of every
/// component.
fn select_with_norms(
    state: &ExpansionState,
    norms: &[Rational],
    strategy: PivotStrategy,
) -> Result<usize> {
    let emb = &state.embedding;
    let comps = &state.components;
    let l = state.field().degree();
    if norms.iter().any(Zero::is_zero) {
        return Err(Error::DomainViolation("zero component".into()));
    }
    let candidates: Vec<usize> = match strategy {
        PivotStrategy::MaxNormalized => (0..comps.len()).collect(),
        PivotStrategy::UnitNormMin => {
            let least = norms.iter().min().unwrap();
            (0..comps.len()).filter(|&i| &norms[i] == least).collect()
        }
    };
    let mut best = candidates[0];
    for &i in &candidates[1..] {
        let g = emb.compare_normalized(&comps[best], &norms[best], &comps[i], &norms[i], l)?;
        let take = matches!(
            (strategy, g),
            (PivotStrategy::MaxNormalized, Greater::J) | (PivotStrategy::UnitNormMin, Greater::I)
        );
        if take {
            best = i;
        }
    }
    Ok(best)
}

/// Pivot index (0-based) of the next AJP step.
pub fn pivot_select(state: &ExpansionState, strategy: PivotStrategy) -> Result<usize> {
    select_with_norms(state, &state.abs_norms(), strategy)
}

fn frac_split(emb: &RealEmbedding, q: &FieldElement) -> Result<(i64, FieldElement)> {
    let d = emb.floor(q)?;
    let rest = q.add_rational(&-Rational::from_integer(d.clone()));
    Ok((to_digit(d)?, rest))
}

fn check_left_domain(next: &[FieldElement], n: usize) -> Result<()> {
    if let Some(i) = next.iter().position(FieldElement::is_rational) {
        return Err(Error::DomainViolation(format!(
            "component {} became rational at step {n}",
            i + 1
        )));
    }
    // Independence needs no recheck: `(1, α')` is an invertible integer
    // transform of `(1, α)` up to the factor `α_p`, so it spans the same
    // space.
    Ok(())
}

/// One application of the algebraic Jacobi-Perron map. `n` is the 1-based
/// index written into the record.
pub fn cf_step(
    state: &ExpansionState,
    strategy: PivotStrategy,
    n: usize,
) -> Result<(StepRecord, ExpansionState)> {
    let emb = &state.embedding;
    let p = pivot_select(state, strategy)?;
    let inv = state.components[p].inv()?;
    let mut digits = Vec::with_capacity(state.dimension());
    let mut next = Vec::with_capacity(state.dimension());
    for (i, c) in state.components.iter().enumerate() {
        let q = if i == p { inv.clone() } else { c * &inv };
        let (d, rest) = frac_split(emb, &q)?;
        digits.push(d);
        next.push(rest);
    }
    check_left_domain(&next, n)?;
    Ok((
        StepRecord {
            n,
            pivot: p,
            digits,
            mode: Mode::Ajpa(strategy),
        },
        ExpansionState::unchecked(emb.clone(), next),
    ))
}

/// One classical Jacobi-Perron step. A zero component anywhere makes the
/// state degenerate (the expansion has terminated) and is rejected.
pub fn jp_step(state: &ExpansionState, n: usize) -> Result<(StepRecord, ExpansionState)> {
    let emb = &state.embedding;
    if let Some(i) = state.components.iter().position(FieldElement::is_zero) {
        return Err(Error::DomainViolation(format!(
            "component {} is zero at step {n}",
            i + 1
        )));
    }
    let head = &state.components[0];
    let inv = head.inv()?;
    let d = state.dimension();
    let mut digits = Vec::with_capacity(d);
    let mut next = Vec::with_capacity(d);
    for i in 0..d {
        let q = if i + 1 < d {
            &state.components[i + 1] * &inv
        } else {
            inv.clone()
        };
        let (digit, rest) = frac_split(emb, &q)?;
        digits.push(digit);
        next.push(rest);
    }
    Ok((
        StepRecord {
            n,
            pivot: 0,
            digits,
            mode: Mode::Jp,
        },
        ExpansionState::unchecked(emb.clone(), next),
    ))
}

/// One step of whichever map `mode` names.
pub fn step(state: &ExpansionState, mode: Mode, n: usize) -> Result<(StepRecord, ExpansionState)> {
    match mode {
        Mode::Ajpa(s) => cf_step(state, s, n),
        Mode::Jp => jp_step(state, n),
    }
}

/// Iterates the map until a state repeats, the state leaves the domain, or
/// `max_steps` steps have been taken.
pub fn expand(state: &ExpansionState, mode: Mode, max_steps: usize) -> Result<ExpansionResult> {
    if max_steps == 0 {
        return Err(Error::Constraint("max_steps must be at least 1".into()));
    }
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    seen.insert(state.key(), 0);
    let mut states = vec![state.clone()];
    let mut records = Vec::new();
    let finish = |records: Vec<StepRecord>, states, pre, per, status| ExpansionResult {
        mode,
        records,
        states,
        preperiod_len: pre,
        period_len: per,
        status,
        discrepancies: Vec::new(),
    };
    for n in 1..=max_steps {
        let cur = states.last().unwrap();
        let (rec, next) = match step(cur, mode, n) {
            Ok(v) => v,
            Err(Error::DomainViolation(reason)) => {
                let len = records.len();
                return Ok(finish(
                    records,
                    states,
                    len,
                    0,
                    Status::LeftDomain { step: n, reason },
                ));
            }
            Err(e) => return Err(e),
        };
        records.push(rec);
        let key = next.key();
        states.push(next);
        if let Some(&entry) = seen.get(&key) {
            return Ok(finish(records, states, entry, n - entry, Status::Periodic));
        }
        seen.insert(key, n);
    }
    let len = records.len();
    Ok(finish(records, states, len, 0, Status::BudgetExhausted))
}

/// AJP expansion with exact cycle detection.
pub fn cf_expand(
    state: &ExpansionState,
    strategy: PivotStrategy,
    max_steps: usize,
) -> Result<ExpansionResult> {
    expand(state, Mode::Ajpa(strategy), max_steps)
}

/// Classical JP expansion with exact cycle detection.
pub fn jp_expand(state: &ExpansionState, max_steps: usize) -> Result<ExpansionResult> {
    expand(state, Mode::Jp, max_steps)
}

/// Minimal field operations needed to undo a step.
trait Invertible: Sized + Clone {
    fn plus_int(&self, d: i64) -> Self;
    fn reciprocal(&self) -> Result<Self>;
    fn times(&self, o: &Self) -> Self;
    fn is_nil(&self) -> bool;
}

impl Invertible for FieldElement {
    fn plus_int(&self, d: i64) -> Self {
        self.add_rational(&Rational::from_integer(d.into()))
    }
    fn reciprocal(&self) -> Result<Self> {
        self.inv()
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn is_nil(&self) -> bool {
        self.is_zero()
    }
}

impl Invertible for Rational {
    fn plus_int(&self, d: i64) -> Self {
        self + Rational::from_integer(d.into())
    }
    fn reciprocal(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn is_nil(&self) -> bool {
        self.is_zero()
    }
}

fn invert<T: Invertible>(rec: &StepRecord, next: &[T]) -> Result<Vec<T>> {
    if next.len() != rec.digits.len() {
        return Err(Error::TupleLength {
            expected: rec.digits.len(),
            found: next.len(),
        });
    }
    // w = digits + next is the unreduced image of the predecessor
    let w: Vec<T> = next
        .iter()
        .zip(&rec.digits)
        .map(|(b, &d)| b.plus_int(d))
        .collect();
    match rec.mode {
        Mode::Ajpa(_) => {
            let p = rec.pivot;
            if w[p].is_nil() {
                return Err(Error::DomainViolation("pivot digit plus tail is zero".into()));
            }
            let ap = w[p].reciprocal()?;
            Ok((0..w.len())
                .map(|i| if i == p { ap.clone() } else { w[i].times(&ap) })
                .collect())
        }
        Mode::Jp => {
            let d = w.len();
            if w[d - 1].is_nil() {
                return Err(Error::DomainViolation("last digit plus tail is zero".into()));
            }
            let head = w[d - 1].reciprocal()?;
            let mut out = vec![head.clone()];
            out.extend(w[..d - 1].iter().map(|x| x.times(&head)));
            Ok(out)
        }
    }
}

/// Reconstructs the state a record was produced from.
pub fn step_inverse(rec: &StepRecord, next: &ExpansionState) -> Result<ExpansionState> {
    let prev = invert(rec, &next.components)?;
    Ok(ExpansionState::unchecked(next.embedding.clone(), prev))
}

/// The rational convergent after `upto` digit blocks: the tail is set to
/// zero and the records are undone from the last one backwards.
pub fn convergent(records: &[StepRecord], upto: usize) -> Result<Vec<Rational>> {
    let dim = records
        .first()
        .map(|r| r.digits.len())
        .ok_or(Error::Constraint("no records".into()))?;
    if upto > records.len() {
        return Err(Error::Constraint(format!(
            "asked for convergent {upto} but only {} records exist",
            records.len()
        )));
    }
    let mut v = vec![Rational::zero(); dim];
    for rec in records[..upto].iter().rev() {
        v = invert(rec, &v)?;
    }
    Ok(v)
}
