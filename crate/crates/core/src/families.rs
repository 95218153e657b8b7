//! The parametric families with known expansions, their expected digit
//! tables, and per-family verification reports.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{rat, RatPoly, Rational};
use crate::cfexpand::{
    expand, Discrepancy, DiscrepancyKind, ExpansionResult, ExpansionState, Mode, PivotStrategy,
    Status, DEFAULT_MAX_STEPS,
};
use crate::error::{Error, Result};
use crate::numberfield::{FieldElement, NumberField};
use crate::oracle::{cross_check, oracle_expand, OracleConfig, OracleStop};
use crate::realembed::{RatInterval, RealEmbedding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// `θ = (m^l+1)^(1/l)`, state `(θ^k − m^k)` for `0 < k < l`.
    PurePower { l: u32, m: i64 },
    /// `δ ∈ (0,1)` with `δ³ − mδ + 1 = 0`, state `(δ, δ²)`.
    Trinomial { m: i64 },
    /// `γ ∈ (−a, −a+1)` with `γ³ + 3aγ² + bγ + ab − 2a³ + 1 = 0`.
    ShiftedCubic { a: i64, b: i64 },
    /// `α > 1` with `α³ − kα² − lα − 1 = 0`, classical JP state `(λ, κ)`.
    JpExample { k: i64, l: i64 },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::PurePower { l, m } => write!(f, "pure-power l={l} m={m}"),
            FamilySpec::Trinomial { m } => write!(f, "trinomial m={m}"),
            FamilySpec::ShiftedCubic { a, b } => write!(f, "shifted-cubic a={a} b={b}"),
            FamilySpec::JpExample { k, l } => write!(f, "jp-example k={k} l={l}"),
        }
    }
}

fn constraint(msg: String) -> Error {
    Error::Constraint(msg)
}

fn big_pow(m: i64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(m), e as usize)
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::PurePower { l, m } if l < 2 || m < 1 => Err(constraint(format!(
                "pure-power needs l >= 2 and m >= 1 (got l={l}, m={m})"
            ))),
            FamilySpec::Trinomial { m } if m < 3 => {
                Err(constraint(format!("trinomial needs m >= 3 (got m={m})")))
            }
            FamilySpec::ShiftedCubic { a, b } if b > 3 * a * a - 3 => Err(constraint(format!(
                "shifted-cubic needs b <= 3a^2-3 (got a={a}, b={b})"
            ))),
            FamilySpec::JpExample { k, l } if !(k >= l && l >= 0 && k + l >= 2) => Err(constraint(
                format!("jp-example needs k >= l >= 0 and k+l >= 2 (got k={k}, l={l})"),
            )),
            _ => Ok(()),
        }
    }

    /// Field degree.
    pub fn degree(&self) -> usize {
        match *self {
            FamilySpec::PurePower { l, .. } => l as usize,
            _ => 3,
        }
    }

    pub fn default_mode(&self) -> Mode {
        match *self {
            FamilySpec::JpExample { .. } => Mode::Jp,
            FamilySpec::PurePower { l, .. } if l >= 4 => Mode::Ajpa(PivotStrategy::UnitNormMin),
            _ => Mode::Ajpa(PivotStrategy::MaxNormalized),
        }
    }

    /// The trinomial parameter a shifted cubic reduces to.
    pub fn reduced_m(&self) -> Option<i64> {
        match *self {
            FamilySpec::ShiftedCubic { a, b } => Some(3 * a * a - b),
            FamilySpec::Trinomial { m } => Some(m),
            _ => None,
        }
    }

    /// Stable file stem for fixtures.
    pub fn fixture_stem(&self) -> String {
        match *self {
            FamilySpec::PurePower { l, m } => format!("pure-power_l{l}_m{m}"),
            FamilySpec::Trinomial { m } => format!("trinomial_m{m}"),
            FamilySpec::ShiftedCubic { a, b } => format!("shifted-cubic_a{a}_b{b}"),
            FamilySpec::JpExample { k, l } => format!("jp-example_k{k}_l{l}"),
        }
    }

    pub fn minpoly(&self) -> RatPoly {
        let c = |v: BigInt| Rational::from_integer(v);
        match *self {
            FamilySpec::PurePower { l, m } => {
                let mut coeffs = vec![Rational::zero(); l as usize + 1];
                coeffs[0] = -c(big_pow(m, l) + 1);
                coeffs[l as usize] = Rational::one();
                RatPoly::new(coeffs)
            }
            FamilySpec::Trinomial { m } => RatPoly::from_ints(&[1, -m, 0, 1]),
            FamilySpec::ShiftedCubic { a, b } => {
                let a_ = BigInt::from(a);
                let b_ = BigInt::from(b);
                let c0 = &a_ * &b_ - 2 * &a_ * &a_ * &a_ + 1;
                RatPoly::new(vec![c(c0), c(b_), c(3 * a_), Rational::one()])
            }
            FamilySpec::JpExample { k, l } => RatPoly::from_ints(&[-1, -l, -k, 1]),
        }
    }

    pub fn window(&self) -> RatInterval {
        let (lo, hi) = match *self {
            FamilySpec::PurePower { m, .. } => (m, m + 1),
            FamilySpec::Trinomial { .. } => (0, 1),
            FamilySpec::ShiftedCubic { a, .. } => (-a, -a + 1),
            FamilySpec::JpExample { k, l } => (1, k + l + 2),
        };
        RatInterval {
            lo: rat(lo),
            hi: rat(hi),
        }
    }
}

/// Everything needed to expand a family member.
#[derive(Clone, Debug)]
pub struct FamilyBuild {
    pub spec: FamilySpec,
    pub field: Arc<NumberField>,
    pub embedding: Arc<RealEmbedding>,
    pub state: ExpansionState,
    pub mode: Mode,
}

pub fn family_build(spec: FamilySpec) -> Result<FamilyBuild> {
    spec.validate()?;
    let field = NumberField::new(spec.minpoly())?;
    let emb = Arc::new(RealEmbedding::select_root(&field, &spec.window())?);
    let g = FieldElement::generator(&field);
    let state = match spec {
        FamilySpec::PurePower { l, m } => {
            let comps = (1..l)
                .map(|k| g.pow(k).add_rational(&-Rational::from_integer(big_pow(m, k))))
                .collect();
            ExpansionState::new(emb.clone(), comps)?
        }
        FamilySpec::Trinomial { .. } => ExpansionState::new(emb.clone(), vec![g.clone(), &g * &g])?,
        FamilySpec::ShiftedCubic { .. } => {
            let fl = Rational::from_integer(emb.floor(&g)?);
            let frac = g.add_rational(&-fl);
            ExpansionState::new(emb.clone(), vec![frac.clone(), &frac * &frac])?
        }
        FamilySpec::JpExample { l, .. } => {
            // κ = l/α + 1/α², which equals α − k in this field
            let lam = g.inv()?;
            let kappa = &lam.scale(&rat(l)) + &(&lam * &lam);
            ExpansionState::new_jp(emb.clone(), vec![lam, kappa])?
        }
    };
    Ok(FamilyBuild {
        spec,
        field,
        embedding: emb,
        state,
        mode: spec.default_mode(),
    })
}

/// Depressed form `x³ + p·x + q` of `x³ + k·x² + l·x + n` under `x → x − k/3`.
pub fn depress_cubic(k: &Rational, lcoef: &Rational, n: &Rational) -> (Rational, Rational) {
    let p = lcoef - k * k / rat(3);
    let q = n - k * lcoef / rat(3) + rat(2) * k * k * k / rat(27);
    (p, q)
}

/// Whether the shifted-cubic starting state, rewritten in `ℚ(δ)` through
/// `γ = δ − a`, is coefficient-identical to the trinomial one.
pub fn shifted_state_identity(a: i64, b: i64) -> Result<bool> {
    let shifted = family_build(FamilySpec::ShiftedCubic { a, b })?;
    let tri = family_build(FamilySpec::Trinomial { m: 3 * a * a - b })?;
    // f(δ − a) must be the trinomial itself
    if shifted.field.minpoly().shift(&rat(-a)) != *tri.field.minpoly() {
        return Ok(false);
    }
    for (cs, ct) in shifted
        .state
        .components()
        .iter()
        .zip(tri.state.components())
    {
        let moved = cs.to_poly().shift(&rat(-a));
        if FieldElement::from_poly(&tri.field, &moved) != *ct {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Strict,
    /// The published entry is known to be doubtful; a mismatch is logged and
    /// the interval oracle decides.
    OracleAdjudicated,
}

impl Policy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Policy::Strict => "strict",
            Policy::OracleAdjudicated => "oracle-adjudicated",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "strict" => Ok(Policy::Strict),
            "oracle-adjudicated" => Ok(Policy::OracleAdjudicated),
            other => Err(Error::Parse(format!("unknown policy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedRow {
    pub digits: Vec<i64>,
    pub policy: Policy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedTable {
    pub mode: Mode,
    pub source: String,
    pub preperiod: Vec<ExpectedRow>,
    pub period: Vec<ExpectedRow>,
}

fn strict(rows: &[&[i64]]) -> Vec<ExpectedRow> {
    rows.iter()
        .map(|d| ExpectedRow {
            digits: d.to_vec(),
            policy: Policy::Strict,
        })
        .collect()
}

fn trinomial_rows(m: i64) -> (Vec<ExpectedRow>, Vec<ExpectedRow>) {
    (
        strict(&[&[m - 1, 0], &[1, 0], &[0, m - 1]]),
        strict(&[&[0, 1], &[m - 2, 1], &[1, 0], &[1, m - 2]]),
    )
}

impl ExpectedTable {
    pub fn rows(&self) -> impl Iterator<Item = &ExpectedRow> {
        self.preperiod.iter().chain(&self.period)
    }

    pub fn dimension(&self) -> usize {
        self.rows().next().map_or(0, |r| r.digits.len())
    }

    /// CSV with `n, a_n, b_n, …, policy` columns and a closing
    /// `period,<first n of the period>,<length>` row. Two `#` comment lines
    /// carry the mode and the source.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# mode: {}", self.mode)?;
        writeln!(out, "# source: {}", self.source)?;
        let rows: Vec<(Vec<i64>, Option<Policy>)> = self
            .rows()
            .map(|r| (r.digits.clone(), Some(r.policy)))
            .collect();
        write_digit_csv(
            out,
            self.dimension(),
            &rows,
            self.preperiod.len(),
            self.period.len(),
        )
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut mode = None;
        let mut source = String::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# mode:") {
                mode = Some(rest.trim().parse::<Mode>()?);
            } else if let Some(rest) = line.strip_prefix("# source:") {
                source = rest.trim().to_string();
            } else if !line.starts_with('#') {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mode = mode.ok_or_else(|| Error::Parse("fixture has no mode line".into()))?;
        let mut rd = csv::ReaderBuilder::new()
            .flexible(true)
            .from_reader(body.as_bytes());
        let mut rows = Vec::new();
        let mut annotation = None;
        for rec in rd.records() {
            let rec = rec?;
            let cells: Vec<&str> = rec.iter().map(str::trim).collect();
            if cells.first() == Some(&"period") {
                let num = |i: usize| -> Result<usize> {
                    cells
                        .get(i)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::Parse("bad period annotation".into()))
                };
                annotation = Some((num(1)?, num(2)?));
                continue;
            }
            if cells.len() < 3 {
                return Err(Error::Parse(format!("short fixture row {cells:?}")));
            }
            let digits = cells[1..cells.len() - 1]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let policy = cells[cells.len() - 1].parse()?;
            rows.push(ExpectedRow { digits, policy });
        }
        let (start, len) =
            annotation.ok_or_else(|| Error::Parse("fixture lacks a period row".into()))?;
        if start == 0 || start - 1 + len != rows.len() {
            return Err(Error::Parse(format!(
                "period annotation {start},{len} does not fit {} rows",
                rows.len()
            )));
        }
        let period = rows.split_off(start - 1);
        Ok(ExpectedTable {
            mode,
            source,
            preperiod: rows,
            period,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Column names `a_n, b_n, …` for a digit table of the given width.
pub fn digit_headers(dim: usize) -> Vec<String> {
    (0..dim)
        .map(|i| {
            if i < 26 {
                format!("{}_n", (b'a' + i as u8) as char)
            } else {
                format!("d{}_n", i + 1)
            }
        })
        .collect()
}

/// Shared table layout for fixtures and CLI output.
pub fn write_digit_csv<W: Write>(
    out: W,
    dim: usize,
    rows: &[(Vec<i64>, Option<Policy>)],
    preperiod_len: usize,
    period_len: usize,
) -> Result<()> {
    let with_policy = rows.iter().any(|r| r.1.is_some());
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut header = vec!["n".to_string()];
    header.extend(digit_headers(dim));
    if with_policy {
        header.push("policy".into());
    }
    w.write_record(&header)?;
    for (i, (digits, policy)) in rows.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(digits.iter().map(i64::to_string));
        if let Some(p) = policy {
            rec.push(p.as_str().into());
        }
        w.write_record(&rec)?;
    }
    if period_len > 0 {
        w.write_record([
            "period".to_string(),
            (preperiod_len + 1).to_string(),
            period_len.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The published table for a family member, instantiated at its
/// parameters.
pub fn expected_table(spec: FamilySpec) -> Result<ExpectedTable> {
    spec.validate()?;
    let max = Mode::Ajpa(PivotStrategy::MaxNormalized);
    let none = || Error::NoTable(spec.to_string());
    let table = match spec {
        FamilySpec::Trinomial { m } => {
            let (preperiod, period) = trinomial_rows(m);
            ExpectedTable {
                mode: max,
                source: "trinomial x^3-mx+1 table, period 4".into(),
                preperiod,
                period,
            }
        }
        FamilySpec::PurePower { l: 3, m: 1 } => ExpectedTable {
            mode: max,
            source: "pure cubic table, m=1 case".into(),
            preperiod: vec![],
            period: strict(&[&[0, 1], &[2, 1]]),
        },
        FamilySpec::PurePower { l: 3, m } => ExpectedTable {
            mode: max,
            source: "pure cubic table, m>=2 case; first a-digit printed as 2m^2".into(),
            preperiod: vec![ExpectedRow {
                digits: vec![2 * m * m, 2 * m],
                policy: Policy::OracleAdjudicated,
            }],
            period: strict(&[&[3 * m, 3 * m * m], &[3 * m * m, 3 * m]]),
        },
        FamilySpec::PurePower { l: 4, m } if m > 1 => {
            let (a, b, c) = (4 * m * m * m, 6 * m * m, 4 * m);
            ExpectedTable {
                mode: Mode::Ajpa(PivotStrategy::UnitNormMin),
                source: "quartic pure power example table, period 3".into(),
                preperiod: strict(&[&[a, 2 * m, 3 * m * m], &[b, a, 3 * m]]),
                period: strict(&[&[c, b, a], &[a, c, b], &[b, a, c]]),
            }
        }
        FamilySpec::ShiftedCubic { a: 1, b: 0 } => {
            let adj = |d: [i64; 2]| ExpectedRow {
                digits: d.to_vec(),
                policy: Policy::OracleAdjudicated,
            };
            let mut period = strict(&[&[0, -1], &[1, 1], &[-1, 0], &[1, 1]]);
            period[0] = adj([0, -1]);
            period[2] = adj([-1, 0]);
            ExpectedTable {
                mode: max,
                source: "worked example x^3+3x^2-1, printed with two -1 entries".into(),
                preperiod: strict(&[&[2, 0], &[1, 0], &[0, 2]]),
                period,
            }
        }
        FamilySpec::ShiftedCubic { .. } => {
            let m = spec.reduced_m().ok_or_else(none)?;
            let (preperiod, period) = trinomial_rows(m);
            ExpectedTable {
                mode: max,
                source: format!("trinomial table at the reduced m={m}"),
                preperiod,
                period,
            }
        }
        FamilySpec::JpExample { k, l } => ExpectedTable {
            mode: Mode::Jp,
            source: "classical JP example, constant digits (l, k)".into(),
            preperiod: vec![],
            period: strict(&[&[l, k]]),
        },
        _ => return Err(none()),
    };
    Ok(table)
}

/// Period length a family is claimed to have under `mode`, where one is
/// claimed at all.
pub fn claimed_period_len(spec: FamilySpec, mode: Mode) -> Option<usize> {
    match (spec, mode) {
        (FamilySpec::PurePower { l, .. }, Mode::Ajpa(s))
            if l <= 3 || s == PivotStrategy::UnitNormMin =>
        {
            Some(l as usize - 1)
        }
        (FamilySpec::Trinomial { .. } | FamilySpec::ShiftedCubic { .. }, Mode::Ajpa(PivotStrategy::MaxNormalized)) => {
            Some(4)
        }
        (FamilySpec::JpExample { .. }, Mode::Jp) => Some(1),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// `None` uses the family's default mode.
    pub mode: Option<Mode>,
    pub max_steps: usize,
    /// Steps compared against the interval oracle; 0 skips the oracle.
    pub oracle_steps: usize,
    pub oracle: OracleConfig,
    /// Directory of fixture CSVs that override the built-in tables.
    pub fixtures: Option<std::path::PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: None,
            max_steps: DEFAULT_MAX_STEPS,
            oracle_steps: 200,
            oracle: OracleConfig::default(),
            fixtures: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowCheck {
    pub n: usize,
    pub expected: Vec<i64>,
    pub observed: Option<Vec<i64>>,
    pub policy: Policy,
    pub matched: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub requested: usize,
    pub certified: usize,
    pub precision_bits: u64,
    pub stop: OracleStop,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub spec: FamilySpec,
    pub mode: Mode,
    pub status: Status,
    pub preperiod_len: usize,
    pub period_len: usize,
    pub preperiod: Vec<Vec<i64>>,
    pub period: Vec<Vec<i64>>,
    pub reduced_m: Option<i64>,
    pub table_source: Option<String>,
    pub rows: Vec<RowCheck>,
    pub expected_period_len: Option<usize>,
    pub structure_ok: bool,
    pub oracle: Option<OracleSummary>,
    /// Table mismatches of every policy, plus oracle disagreements.
    pub discrepancies: Vec<Discrepancy>,
    pub notes: Vec<String>,
    pub passed: bool,
}

fn fixture_table(dir: &Path, spec: FamilySpec) -> Result<Option<ExpectedTable>> {
    let path = dir.join(format!("{}.csv", spec.fixture_stem()));
    if path.exists() {
        ExpectedTable::load(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Expands a family member and checks it against its table, its claimed
/// period length and the interval oracle.
pub fn verify_family(spec: FamilySpec, opts: &VerifyOptions) -> Result<Report> {
    let build = family_build(spec)?;
    let mode = opts.mode.unwrap_or(build.mode);
    let result = expand(&build.state, mode, opts.max_steps)?;
    Ok(report_for(spec, mode, &result, opts))
}

fn rows_of(recs: &[crate::cfexpand::StepRecord]) -> Vec<Vec<i64>> {
    recs.iter().map(|r| r.digits.clone()).collect()
}

/// Builds the report for an expansion that has already been run.
pub fn report_for(
    spec: FamilySpec,
    mode: Mode,
    result: &ExpansionResult,
    opts: &VerifyOptions,
) -> Report {
    let mut notes = Vec::new();
    let mut discrepancies = Vec::new();
    let mut passed = true;

    let table = match &opts.fixtures {
        Some(dir) => match fixture_table(dir, spec) {
            Ok(Some(t)) => Some(t),
            Ok(None) => expected_table(spec).ok(),
            Err(e) => {
                notes.push(format!("fixture unreadable: {e}"));
                passed = false;
                None
            }
        },
        None => expected_table(spec).ok(),
    };
    let table = match table {
        Some(t) if t.mode == mode => Some(t),
        Some(t) => {
            notes.push(format!(
                "table is for {}, not {mode}; digits not compared",
                t.mode
            ));
            None
        }
        None => {
            notes.push("no expected table for this family".into());
            None
        }
    };

    let mut structure_ok = true;
    let observed = (result.preperiod_len, result.period_len);
    let mut rows = Vec::new();
    if let Some(t) = &table {
        let want = (t.preperiod.len(), t.period.len());
        if !result.is_periodic() || observed != want {
            structure_ok = false;
            discrepancies.push(Discrepancy {
                step: 0,
                kind: DiscrepancyKind::Structure,
                engine: vec![observed.0 as i64, observed.1 as i64],
                reference: vec![want.0 as i64, want.1 as i64],
            });
        }
        let got = result.records_upto(want.0 + want.1);
        for (i, row) in t.rows().enumerate() {
            let obs = got.get(i).map(|r| r.digits.clone());
            let matched = obs.as_ref() == Some(&row.digits);
            if !matched {
                discrepancies.push(Discrepancy {
                    step: i + 1,
                    kind: DiscrepancyKind::Table,
                    engine: obs.clone().unwrap_or_default(),
                    reference: row.digits.clone(),
                });
                if row.policy == Policy::Strict {
                    passed = false;
                }
            }
            rows.push(RowCheck {
                n: i + 1,
                expected: row.digits.clone(),
                observed: obs,
                policy: row.policy,
                matched,
            });
        }
    }

    let expected_period_len = claimed_period_len(spec, mode);
    if let Some(p) = expected_period_len {
        if !result.is_periodic() || result.period_len != p {
            if structure_ok {
                discrepancies.push(Discrepancy {
                    step: 0,
                    kind: DiscrepancyKind::Structure,
                    engine: vec![observed.0 as i64, observed.1 as i64],
                    reference: vec![-1, p as i64],
                });
            }
            structure_ok = false;
        }
    }
    if !structure_ok {
        passed = false;
    }
    if let Status::LeftDomain { step, reason } = &result.status {
        notes.push(format!("left the domain at step {step}: {reason}"));
    }

    if let FamilySpec::ShiftedCubic { a, b } = spec {
        match shifted_state_identity(a, b) {
            Ok(true) => notes.push(format!(
                "initial state equals the trinomial m={} state",
                3 * a * a - b
            )),
            Ok(false) | Err(_) => {
                notes.push("initial state differs from the reduced trinomial".into());
                passed = false;
            }
        }
    }

    let oracle = if opts.oracle_steps > 0 {
        match oracle_expand(spec, mode, opts.oracle_steps, &opts.oracle) {
            Ok(run) => {
                let diffs = cross_check(result, &run);
                if !diffs.is_empty() || run.stop != OracleStop::Completed {
                    passed = false;
                }
                discrepancies.extend(diffs.iter().cloned());
                Some(OracleSummary {
                    requested: opts.oracle_steps,
                    certified: run.rows.len(),
                    precision_bits: run.precision_bits,
                    stop: run.stop.clone(),
                    discrepancies: diffs,
                })
            }
            Err(e) => {
                notes.push(format!("oracle failed: {e}"));
                passed = false;
                None
            }
        }
    } else {
        None
    };

    for r in rows.iter().filter(|r| !r.matched && r.policy == Policy::OracleAdjudicated) {
        let verdict = match &oracle {
            Some(o) if o.discrepancies.iter().all(|d| d.step != r.n) && o.certified >= r.n => {
                "oracle agrees with the engine"
            }
            Some(_) => "oracle does not confirm the engine",
            None => "not adjudicated (oracle off)",
        };
        notes.push(format!(
            "step {}: table has {:?}, engine has {:?}; {verdict}",
            r.n,
            r.expected,
            r.observed.clone().unwrap_or_default()
        ));
    }

    Report {
        spec,
        mode,
        status: result.status.clone(),
        preperiod_len: result.preperiod_len,
        period_len: result.period_len,
        preperiod: rows_of(result.preperiod()),
        period: rows_of(result.period()),
        reduced_m: match spec {
            FamilySpec::ShiftedCubic { .. } => spec.reduced_m(),
            _ => None,
        },
        table_source: table.map(|t| t.source),
        rows,
        expected_period_len,
        structure_ok,
        oracle,
        discrepancies,
        notes,
        passed,
    }
}

/// Shifted-cubic `b` values used when a sweep asks for `--b auto`: the three
/// largest admissible ones.
pub fn auto_b(a: i64) -> Vec<i64> {
    let top = 3 * a * a - 3;
    vec![top, top - 1, top - 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;

    #[test]
    fn validation() {
        assert!(FamilySpec::Trinomial { m: 2 }.validate().is_err());
        assert!(FamilySpec::ShiftedCubic { a: 1, b: 1 }.validate().is_err());
        assert!(FamilySpec::ShiftedCubic { a: 1, b: 0 }.validate().is_ok());
        assert!(FamilySpec::JpExample { k: 1, l: 0 }.validate().is_err());
        assert!(FamilySpec::JpExample { k: 1, l: 2 }.validate().is_err());
        assert!(FamilySpec::PurePower { l: 1, m: 2 }.validate().is_err());
        assert!(family_build(FamilySpec::Trinomial { m: 2 }).is_err());
    }

    #[test]
    fn builds() {
        let b = family_build(FamilySpec::PurePower { l: 3, m: 2 }).unwrap();
        assert_eq!(b.field.minpoly(), &RatPoly::from_ints(&[-9, 0, 0, 1]));
        assert_eq!(
            b.state.components()[1],
            FieldElement::from_ints(&b.field, &[-4, 0, 1])
        );

        let s = family_build(FamilySpec::ShiftedCubic { a: 1, b: 0 }).unwrap();
        assert_eq!(s.field.minpoly(), &RatPoly::from_ints(&[-1, 0, 3, 1]));
        assert_eq!(
            s.state.components()[0],
            FieldElement::from_ints(&s.field, &[1, 1])
        );
        assert_eq!(
            s.state.components()[1],
            FieldElement::from_ints(&s.field, &[1, 2, 1])
        );
        let gamma = s.embedding.approx(&FieldElement::generator(&s.field));
        assert!((gamma + 0.65270).abs() < 1e-5);

        let j = family_build(FamilySpec::JpExample { k: 2, l: 1 }).unwrap();
        assert_eq!(j.mode, Mode::Jp);
        let g = FieldElement::generator(&j.field);
        assert_eq!(j.state.components()[0], g.inv().unwrap());
        assert_eq!(j.state.components()[1], g.add_rational(&rat(-2)));
        assert!(j.embedding.approx(&g) > 1.0);
    }

    #[test]
    fn default_modes() {
        let max = Mode::Ajpa(PivotStrategy::MaxNormalized);
        assert_eq!(FamilySpec::Trinomial { m: 3 }.default_mode(), max);
        assert_eq!(FamilySpec::PurePower { l: 3, m: 3 }.default_mode(), max);
        assert_eq!(
            FamilySpec::PurePower { l: 5, m: 3 }.default_mode(),
            Mode::Ajpa(PivotStrategy::UnitNormMin)
        );
    }

    #[test]
    fn depression() {
        let q = |s: &str| parse_rational(s).unwrap();
        assert_eq!(depress_cubic(&q("3"), &q("0"), &q("-1")), (q("-3"), q("1")));
        assert_eq!(depress_cubic(&q("0"), &q("5/2"), &q("-7")), (q("5/2"), q("-7")));
        for a in -4i64..=4 {
            for b in [3 * a * a - 3, 3 * a * a - 10, -5] {
                let (p, c) = depress_cubic(&rat(3 * a), &rat(b), &rat(a * b - 2 * a * a * a + 1));
                assert_eq!((p, c), (rat(b - 3 * a * a), rat(1)));
            }
        }
    }

    #[test]
    fn shifted_identity() {
        for (a, b) in [(1, 0), (-1, 0), (2, 9), (2, 0), (-2, 3), (0, -4)] {
            assert!(shifted_state_identity(a, b).unwrap(), "a={a} b={b}");
        }
        assert!(shifted_state_identity(1, 1).is_err());
    }

    #[test]
    fn tables() {
        let t = expected_table(FamilySpec::Trinomial { m: 3 }).unwrap();
        let a: Vec<i64> = t.preperiod.iter().map(|r| r.digits[0]).collect();
        let b: Vec<i64> = t.preperiod.iter().map(|r| r.digits[1]).collect();
        assert_eq!((a, b), (vec![2, 1, 0], vec![0, 0, 2]));
        let a: Vec<i64> = t.period.iter().map(|r| r.digits[0]).collect();
        let b: Vec<i64> = t.period.iter().map(|r| r.digits[1]).collect();
        assert_eq!((a, b), (vec![0, 1, 1, 1], vec![1, 1, 0, 1]));

        let p = expected_table(FamilySpec::PurePower { l: 3, m: 1 }).unwrap();
        assert!(p.preperiod.is_empty());
        assert_eq!(p.period[1].digits, vec![2, 1]);

        let q = expected_table(FamilySpec::PurePower { l: 4, m: 3 }).unwrap();
        let per: Vec<_> = q.period.iter().map(|r| r.digits.clone()).collect();
        assert_eq!(per, vec![vec![12, 54, 108], vec![108, 12, 54], vec![54, 108, 12]]);

        assert!(matches!(
            expected_table(FamilySpec::PurePower { l: 5, m: 2 }),
            Err(Error::NoTable(_))
        ));
        let e = expected_table(FamilySpec::ShiftedCubic { a: 1, b: 0 }).unwrap();
        let adj: Vec<usize> = e
            .rows()
            .enumerate()
            .filter(|(_, r)| r.policy == Policy::OracleAdjudicated)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(adj, vec![4, 6]);
    }

    #[test]
    fn csv_round_trip() {
        for spec in [
            FamilySpec::Trinomial { m: 7 },
            FamilySpec::PurePower { l: 3, m: 1 },
            FamilySpec::PurePower { l: 4, m: 2 },
            FamilySpec::ShiftedCubic { a: 1, b: 0 },
        ] {
            let t = expected_table(spec).unwrap();
            let s = t.to_csv_string();
            assert_eq!(ExpectedTable::read_csv(s.as_bytes()).unwrap(), t);
        }
        let s = expected_table(FamilySpec::Trinomial { m: 3 })
            .unwrap()
            .to_csv_string();
        assert!(s.contains("n,a_n,b_n,policy\n1,2,0,strict\n"));
        assert!(s.ends_with("period,4,4\n"));
    }

    #[test]
    fn auto_b_is_admissible() {
        for a in -2..=2 {
            for b in auto_b(a) {
                assert!(FamilySpec::ShiftedCubic { a, b }.validate().is_ok());
            }
        }
    }
}
