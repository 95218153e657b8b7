//! Acceptance criteria 1-9. Runs without the libtest harness so every
//! `criterion N: PASS|FAIL <detail>` line is printed; exits nonzero if any
//! criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use mdcf_core::algebra::{rat, Rational};
use mdcf_core::cfexpand::{
    convergent, expand, jp_step, step_inverse, DiscrepancyKind, ExpansionResult, Mode,
    PivotStrategy, Status,
};
use mdcf_core::families::{
    depress_cubic, expected_table, family_build, shifted_state_identity, verify_family,
    FamilySpec, VerifyOptions,
};
use mdcf_core::numberfield::{FieldElement, NumberField};
use mdcf_core::oracle::{cross_check, oracle_expand, OracleConfig};
use mdcf_core::realembed::RatInterval;
use mdcf_core::sweep::{norm_mismatches, par_map};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX: Mode = Mode::Ajpa(PivotStrategy::MaxNormalized);
const UNIT: Mode = Mode::Ajpa(PivotStrategy::UnitNormMin);

/// Step budget for every acceptance expansion.
const BUDGET: usize = 500;
/// Criterion 1 wall-clock limit per m.
const TIME_LIMIT: Duration = Duration::from_secs(5);
/// Oracle comparison depth (criterion 6).
const ORACLE_STEPS: usize = 200;
/// Random elements / pairs per field (criterion 7).
const NORM_SAMPLES: usize = 1000;
/// Criterion 9 bound on the n=40 convergent error.
const CONVERGENT_TOL: (i64, i64) = (1, 1_000_000);

fn line(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn trinomials() -> Vec<FamilySpec> {
    (3..=12).map(|m| FamilySpec::Trinomial { m }).collect()
}

fn pure_cubics() -> Vec<FamilySpec> {
    (1..=8).map(|m| FamilySpec::PurePower { l: 3, m }).collect()
}

fn pure_higher() -> Vec<FamilySpec> {
    let mut v = Vec::new();
    for l in 4..=6 {
        for m in 2..=4 {
            v.push(FamilySpec::PurePower { l, m });
        }
    }
    v
}

const SHIFTED: [(i64, i64); 5] = [(1, 0), (-1, 0), (2, 9), (2, 0), (-2, 3)];
const JP: [(i64, i64); 4] = [(2, 1), (3, 3), (5, 0), (4, 2)];

fn shifted() -> Vec<FamilySpec> {
    SHIFTED
        .iter()
        .map(|&(a, b)| FamilySpec::ShiftedCubic { a, b })
        .collect()
}

fn jp() -> Vec<FamilySpec> {
    JP.iter().map(|&(k, l)| FamilySpec::JpExample { k, l }).collect()
}

/// Every expansion named in criteria 1-5, with the mode it is run in.
fn all_runs() -> Vec<(FamilySpec, Mode)> {
    let mut v: Vec<(FamilySpec, Mode)> = Vec::new();
    v.extend(trinomials().into_iter().map(|s| (s, MAX)));
    v.extend(pure_cubics().into_iter().map(|s| (s, MAX)));
    v.extend(pure_higher().into_iter().map(|s| (s, UNIT)));
    v.extend(shifted().into_iter().map(|s| (s, MAX)));
    v.extend(jp().into_iter().map(|s| (s, Mode::Jp)));
    v
}

fn run(spec: FamilySpec, mode: Mode) -> ExpansionResult {
    let b = family_build(spec).unwrap();
    expand(&b.state, mode, BUDGET).unwrap()
}

fn rows(r: &ExpansionResult) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    (
        r.preperiod().iter().map(|x| x.digits.clone()).collect(),
        r.period().iter().map(|x| x.digits.clone()).collect(),
    )
}

fn table_rows(spec: FamilySpec) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let t = expected_table(spec).unwrap();
    (
        t.preperiod.iter().map(|r| r.digits.clone()).collect(),
        t.period.iter().map(|r| r.digits.clone()).collect(),
    )
}

fn criterion_1_trinomial_table() -> bool {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for spec in trinomials() {
        let t0 = Instant::now();
        let r = run(spec, MAX);
        let dt = t0.elapsed();
        slowest = slowest.max(dt);
        let ok = r.status == Status::Periodic
            && r.preperiod_len == 3
            && r.period_len == 4
            && rows(&r) == table_rows(spec)
            && dt < TIME_LIMIT;
        if !ok {
            bad.push(format!("{spec} ({}/{}, {dt:?})", r.preperiod_len, r.period_len));
        }
    }
    let ok = bad.is_empty();
    line(
        1,
        ok,
        &format!("trinomial m=3..12 preperiod 3, period 4, table exact; slowest {slowest:?}; failing {bad:?}"),
    );
    ok
}

fn criterion_2_pure_cubic() -> bool {
    let mut bad = Vec::new();
    let mut adjudicated = 0;
    let opts = VerifyOptions {
        mode: Some(MAX),
        max_steps: BUDGET,
        oracle_steps: 4,
        ..Default::default()
    };
    for spec in pure_cubics() {
        let FamilySpec::PurePower { m, .. } = spec else { unreachable!() };
        let r = run(spec, MAX);
        let (pre, per) = rows(&r);
        let ok = if m == 1 {
            r.status == Status::Periodic && (pre.clone(), per.clone()) == table_rows(spec)
        } else {
            let report = verify_family(spec, &opts).unwrap();
            let oracle_first = oracle_expand(spec, MAX, 1, &OracleConfig::default())
                .unwrap()
                .digits();
            let logged = report
                .discrepancies
                .iter()
                .any(|d| d.kind == DiscrepancyKind::Table && d.step == 1);
            if logged {
                adjudicated += 1;
            }
            r.status == Status::Periodic
                && r.period_len == 2
                && per == vec![vec![3 * m, 3 * m * m], vec![3 * m * m, 3 * m]]
                && oracle_first.first() == pre.first()
                && report.passed
                && logged
        };
        if !ok {
            bad.push(format!("{spec}: pre {pre:?} per {per:?}"));
        }
    }
    let ok = bad.is_empty();
    line(
        2,
        ok,
        &format!(
            "pure cubic m=1 table exact, m=2..8 period (3m,3m^2),(3m^2,3m); step-1 a-digit 3m^2 confirmed by oracle, table value 2m^2 logged for {adjudicated} values of m; failing {bad:?}"
        ),
    );
    ok
}

fn criterion_3_pure_higher_unit_pivot() -> bool {
    let results = par_map(&pure_higher(), |&spec| (spec, run(spec, UNIT)));
    let mut bad = Vec::new();
    for (spec, r) in &results {
        let FamilySpec::PurePower { l, .. } = *spec else { unreachable!() };
        let mut ok = r.status == Status::Periodic && r.period_len == l as usize - 1;
        if l == 4 {
            ok &= r.preperiod_len == 2 && rows(r) == table_rows(*spec);
        }
        if !ok {
            bad.push(format!(
                "{spec}: {} after {} steps (preperiod {}, period {}, first digits {:?})",
                r.status.label(),
                r.records.len(),
                r.preperiod_len,
                r.period_len,
                r.records.first().map(|x| x.digits.clone())
            ));
        }
    }
    let ok = bad.is_empty();
    line(
        3,
        ok,
        &format!(
            "pure power l=4..6, m=2..4 under the unit-norm pivot: period l-1, l=4 table exact; failing {bad:?}"
        ),
    );
    ok
}

fn criterion_4_shifted_cubic() -> bool {
    let mut bad = Vec::new();
    for (a, b) in SHIFTED {
        let m = 3 * a * a - b;
        let (p, q) = depress_cubic(&rat(3 * a), &rat(b), &rat(a * b - 2 * a * a * a + 1));
        let dep = (p, q) == (rat(-m), rat(1));
        let same_state = shifted_state_identity(a, b).unwrap();
        let rs = run(FamilySpec::ShiftedCubic { a, b }, MAX);
        let rt = run(FamilySpec::Trinomial { m }, MAX);
        let same_digits = rs.status == Status::Periodic
            && rs.period_len == 4
            && rows(&rs) == rows(&rt)
            && rs.preperiod_len == rt.preperiod_len;
        if !(dep && same_state && same_digits) {
            bad.push(format!("a={a} b={b}: depress {dep}, state {same_state}, digits {same_digits}"));
        }
    }
    let ok = bad.is_empty();
    line(
        4,
        ok,
        &format!("shifted cubic grid depresses to x^3-(3a^2-b)x+1, same state and digits as the trinomial; failing {bad:?}"),
    );
    ok
}

fn criterion_5_classical_jp() -> bool {
    let mut bad = Vec::new();
    for (k, l) in JP {
        let b = family_build(FamilySpec::JpExample { k, l }).unwrap();
        let mut s = b.state.clone();
        let mut ok = true;
        for n in 1..=100 {
            let (rec, next) = jp_step(&s, n).unwrap();
            ok &= rec.digits == vec![l, k] && next == b.state;
            s = next;
        }
        if !ok {
            bad.push(format!("k={k} l={l}"));
        }
    }
    let ok = bad.is_empty();
    line(
        5,
        ok,
        &format!("classical JP: 100 steps of digits (l,k) with the state fixed; failing {bad:?}"),
    );
    ok
}

fn criterion_6_oracle_agreement() -> bool {
    let outcomes = par_map(&all_runs(), |&(spec, mode)| {
        let r = run(spec, mode);
        let o = oracle_expand(spec, mode, ORACLE_STEPS, &OracleConfig::default()).unwrap();
        let diffs = cross_check(&r, &o);
        (spec, o.is_complete(), diffs.len(), o.precision_bits)
    });
    let bad: Vec<String> = outcomes
        .iter()
        .filter(|(_, done, n, _)| !done || *n > 0)
        .map(|(s, done, n, bits)| format!("{s}: oracle complete {done}, {n} diffs, {bits} bits"))
        .collect();
    let top = outcomes.iter().map(|o| o.3).max().unwrap_or(0);
    let ok = bad.is_empty();
    line(
        6,
        ok,
        &format!(
            "{} expansions, first {ORACLE_STEPS} digits identical to the interval oracle (max {top} bits); failing {bad:?}",
            outcomes.len()
        ),
    );
    ok
}

fn fixture_fields() -> Vec<Arc<NumberField>> {
    let mut specs = trinomials();
    specs.extend(pure_cubics());
    specs.extend(pure_higher());
    specs.extend(shifted());
    specs.extend(jp());
    specs
        .into_iter()
        .map(|s| family_build(s).unwrap().field)
        .collect()
}

fn random_element(k: &Arc<NumberField>, rng: &mut ChaCha8Rng) -> FieldElement {
    loop {
        let coeffs: Vec<Rational> = (0..k.degree())
            .map(|_| Rational::new(rng.gen_range(-30i64..=30).into(), rng.gen_range(1i64..=7).into()))
            .collect();
        let e = FieldElement::from_coeffs(k, coeffs).unwrap();
        if !e.is_zero() {
            return e;
        }
    }
}

fn criterion_7_norm_paths() -> bool {
    let fields = fixture_fields();
    let outcomes = par_map(&fields, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ k.degree() as u64);
        let elems: Vec<FieldElement> = (0..NORM_SAMPLES).map(|_| random_element(k, &mut rng)).collect();
        let path_bad = norm_mismatches(&elems).len();
        let mult_bad = (0..NORM_SAMPLES)
            .filter(|_| {
                let a = random_element(k, &mut rng);
                let b = random_element(k, &mut rng);
                (&a * &b).norm() != a.norm() * b.norm()
            })
            .count();
        (k.minpoly().to_string(), path_bad, mult_bad)
    });
    let bad: Vec<_> = outcomes.iter().filter(|o| o.1 + o.2 > 0).collect();
    let ok = bad.is_empty();
    line(
        7,
        ok,
        &format!(
            "{} fields x {NORM_SAMPLES} elements: determinant and resultant norms equal, N(ab)=N(a)N(b); failing {bad:?}",
            outcomes.len()
        ),
    );
    ok
}

fn criterion_8_round_trip() -> bool {
    let outcomes = par_map(&all_runs(), |&(spec, mode)| {
        let r = run(spec, mode);
        let bad = r
            .records
            .iter()
            .enumerate()
            .filter(|(i, rec)| step_inverse(rec, &r.states[i + 1]).ok().as_ref() != Some(&r.states[*i]))
            .count();
        (spec, r.records.len(), bad)
    });
    let steps: usize = outcomes.iter().map(|o| o.1).sum();
    let bad: Vec<_> = outcomes.iter().filter(|o| o.2 > 0).map(|o| o.0.to_string()).collect();
    let ok = bad.is_empty();
    line(
        8,
        ok,
        &format!("step_inverse undoes all {steps} recorded steps; failing {bad:?}"),
    );
    ok
}

/// Upper and lower bounds on `|p − x|` for `x` in `iv`.
fn distance(p: &Rational, iv: &RatInterval) -> (Rational, Rational) {
    let a = (p - &iv.lo).abs();
    let b = (p - &iv.hi).abs();
    let upper = a.clone().max(b.clone());
    let lower = if iv.contains(p) { Rational::zero() } else { a.min(b) };
    (lower, upper)
}

fn criterion_9_convergents() -> bool {
    let b = family_build(FamilySpec::Trinomial { m: 3 }).unwrap();
    let r = expand(&b.state, MAX, BUDGET).unwrap();
    let recs = r.records_upto(40);
    let width = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), 200));
    let values: Vec<RatInterval> = b
        .state
        .components()
        .iter()
        .map(|c| b.embedding.eval_interval(c, &width).unwrap())
        .collect();
    let p10 = convergent(&recs, 10).unwrap();
    let p40 = convergent(&recs, 40).unwrap();
    let tol = Rational::new(CONVERGENT_TOL.0.into(), CONVERGENT_TOL.1.into());
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let (lo10, _) = distance(&p10[i], v);
        let (_, hi40) = distance(&p40[i], v);
        ok &= hi40 < tol && hi40 < lo10;
        detail.push(format!(
            "component {}: |err40| <= {:.3e}, |err10| >= {:.3e}",
            i + 1,
            rat_f64(&hi40),
            rat_f64(&lo10)
        ));
    }
    line(9, ok, &format!("trinomial m=3 convergents: {}", detail.join("; ")));
    ok
}

fn rat_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn main() {
    let criteria: [fn() -> bool; 9] = [
        criterion_1_trinomial_table,
        criterion_2_pure_cubic,
        criterion_3_pure_higher_unit_pivot,
        criterion_4_shifted_cubic,
        criterion_5_classical_jp,
        criterion_6_oracle_agreement,
        criterion_7_norm_paths,
        criterion_8_round_trip,
        criterion_9_convergents,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
