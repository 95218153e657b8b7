use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mdcf_core::algebra::{parse_rational, RatPoly, Rational};
use mdcf_core::cfexpand::{expand, jp_step, ExpansionResult, ExpansionState, Mode, Status};
use mdcf_core::families::{
    auto_b, family_build, report_for, write_digit_csv, FamilySpec, Report, VerifyOptions,
};
use mdcf_core::numberfield::{FieldElement, NumberField};
use mdcf_core::oracle::{cross_check, oracle_expand_seed, OracleConfig, OracleStop, Seed};
use mdcf_core::output;
use mdcf_core::realembed::{RatInterval, RealEmbedding};
use mdcf_core::sweep::{verify_sweep, verify_sweep_seq};

#[derive(Parser)]
#[command(name = "mdcf", version, about = "Exact multidimensional continued fractions in number fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand one state until it cycles, leaves the domain or runs out of steps.
    Expand(ExpandArgs),
    /// Check family members against their expected tables and the oracle.
    Verify(VerifyArgs),
    /// Run the classical Jacobi-Perron map on the (λ, κ) example.
    Jp(JpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    PurePower,
    Trinomial,
    ShiftedCubic,
    JpExample,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i64>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
    #[arg(long)]
    k: Option<i64>,
    /// Minimal polynomial coefficients, highest degree first: `1,0,-3,1`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "family")]
    minpoly: Option<String>,
    /// Open interval isolating the root: `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Components separated by `;`, each as power-basis coordinates lowest
    /// first: `0,1,0;0,0,1` is (θ, θ²).
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// max-normalized, unit-pivot or jp. Defaults to the family's own.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value_t = mdcf_core::cfexpand::DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Cross-check digits against the interval oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 200)]
    oracle_steps: usize,
    /// Directory of expected-table CSVs overriding the built-in ones.
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Values or inclusive ranges like `3..12`.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    l: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// A range, or `auto` for the three largest b allowed by each a.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, default_value_t = mdcf_core::cfexpand::DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Digits compared with the oracle per member; 0 disables it.
    #[arg(long, default_value_t = 200)]
    oracle_steps: usize,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Run members one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct JpArgs {
    #[arg(long)]
    k: i64,
    #[arg(long)]
    l: i64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn parse_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(|t| parse_rational(t.trim()).map_err(|e| anyhow!("{e}")))
        .collect()
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("--{name} is required for this family"))
}

fn family_spec(a: &ExpandArgs, f: Family) -> Result<FamilySpec> {
    Ok(match f {
        Family::PurePower => FamilySpec::PurePower {
            l: need(a.l, "l")?,
            m: need(a.m, "m")?,
        },
        Family::Trinomial => FamilySpec::Trinomial { m: need(a.m, "m")? },
        Family::ShiftedCubic => FamilySpec::ShiftedCubic {
            a: need(a.a, "a")?,
            b: need(a.b, "b")?,
        },
        Family::JpExample => FamilySpec::JpExample {
            k: need(a.k, "k")?,
            l: need(a.l.map(i64::from), "l")?,
        },
    })
}

fn parse_mode(s: Option<&str>) -> Result<Option<Mode>> {
    s.map(|s| s.parse::<Mode>().map_err(|e| anyhow!("{e}")))
        .transpose()
}

fn raw_state(a: &ExpandArgs, mode: Mode) -> Result<ExpansionState> {
    let mut coeffs = parse_list(a.minpoly.as_deref().unwrap())?;
    coeffs.reverse();
    let field = NumberField::new(RatPoly::new(coeffs)).map_err(|e| anyhow!("minpoly: {e}"))?;
    let w = parse_list(&need(a.window.clone(), "window")?)?;
    if w.len() != 2 {
        bail!("--window takes exactly two rationals");
    }
    let window = RatInterval::new(w[0].clone(), w[1].clone()).map_err(|e| anyhow!("window: {e}"))?;
    let emb = RealEmbedding::select_root(&field, &window).map_err(|e| anyhow!("window: {e}"))?;
    let comps = need(a.state.clone(), "state")?
        .split(';')
        .map(|c| {
            let v = parse_list(c)?;
            FieldElement::from_coeffs(&field, v).map_err(|e| anyhow!("state: {e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let emb = Arc::new(emb);
    let st = match mode {
        Mode::Jp => ExpansionState::new_jp(emb, comps),
        Mode::Ajpa(_) => ExpansionState::new(emb, comps),
    };
    st.map_err(|e| anyhow!("state: {e}"))
}

fn exit_for(status: &Status) -> u8 {
    match status {
        Status::Periodic => 0,
        Status::BudgetExhausted => 2,
        Status::LeftDomain { .. } => 3,
    }
}

fn emit(result: &ExpansionResult, format: Format) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => writeln!(out, "{}", output::to_json(result))?,
        Format::Csv => output::write_csv(result, &mut out)?,
        Format::Table => output::write_table(result, &mut out)?,
    }
    Ok(())
}

fn cmd_expand(a: ExpandArgs) -> Result<u8> {
    let requested = parse_mode(a.strategy.as_deref())?;
    if a.max_steps == 0 {
        bail!("--max-steps must be positive");
    }
    let (mut result, spec) = match (a.family, &a.minpoly) {
        (Some(f), _) => {
            let spec = family_spec(&a, f)?;
            let b = family_build(spec).map_err(|e| anyhow!("{e}"))?;
            let mode = requested.unwrap_or(b.mode);
            let st = match (mode, spec) {
                (Mode::Jp, FamilySpec::JpExample { .. }) | (Mode::Ajpa(_), _) => b.state,
                (Mode::Jp, _) => ExpansionState::new_jp(b.embedding, b.state.components().to_vec())
                    .map_err(|e| anyhow!("{e}"))?,
            };
            (expand(&st, mode, a.max_steps).map_err(|e| anyhow!("{e}"))?, Some(spec))
        }
        (None, Some(_)) => {
            let mode = requested.unwrap_or(Mode::Ajpa(mdcf_core::cfexpand::PivotStrategy::MaxNormalized));
            let st = raw_state(&a, mode)?;
            (expand(&st, mode, a.max_steps).map_err(|e| anyhow!("{e}"))?, None)
        }
        (None, None) => bail!("give either --family or --minpoly/--window/--state"),
    };
    let oracle_steps = if a.oracle { a.oracle_steps.min(result.records.len()).max(1) } else { 0 };
    match spec {
        Some(spec) => {
            let opts = VerifyOptions {
                mode: Some(result.mode),
                max_steps: a.max_steps,
                oracle_steps,
                oracle: OracleConfig::default(),
                fixtures: a.fixtures.clone(),
            };
            let report = report_for(spec, result.mode, &result, &opts);
            note_oracle(&report);
            result.discrepancies = report.discrepancies;
        }
        None if oracle_steps > 0 => {
            let seed = Seed::from_state(&result.states[0]);
            let run = oracle_expand_seed(&seed, result.mode, oracle_steps, &OracleConfig::default())
                .map_err(|e| anyhow!("oracle: {e}"))?;
            if run.stop != OracleStop::Completed {
                eprintln!("oracle stopped early: {:?}", run.stop);
            }
            result.discrepancies = cross_check(&result, &run);
        }
        None => {}
    }
    emit(&result, a.format)?;
    Ok(exit_for(&result.status))
}

fn note_oracle(r: &Report) {
    if let Some(o) = &r.oracle {
        if o.stop != OracleStop::Completed {
            eprintln!("oracle stopped early: {:?}", o.stop);
        }
    }
}

/// `5`, `3..12` or `-2..2`, inclusive.
fn parse_range(s: &str) -> Result<Vec<i64>> {
    let s = s.trim();
    let split = s
        .char_indices()
        .skip(1)
        .find(|&(i, _)| s[i..].starts_with(".."))
        .map(|(i, _)| i);
    match split {
        Some(i) => {
            let lo: i64 = s[..i].trim().parse().with_context(|| format!("bad range {s:?}"))?;
            let hi: i64 = s[i + 2..].trim().parse().with_context(|| format!("bad range {s:?}"))?;
            if lo > hi {
                bail!("empty range {s:?}");
            }
            Ok((lo..=hi).collect())
        }
        None => Ok(vec![s.parse().with_context(|| format!("bad value {s:?}"))?]),
    }
}

fn need_range(v: &Option<String>, name: &str) -> Result<Vec<i64>> {
    parse_range(v.as_deref().ok_or_else(|| anyhow!("--{name} is required for this family"))?)
}

fn verify_specs(a: &VerifyArgs) -> Result<Vec<FamilySpec>> {
    let mut specs = Vec::new();
    match a.family {
        Family::Trinomial => {
            for m in need_range(&a.m, "m")? {
                specs.push(FamilySpec::Trinomial { m });
            }
        }
        Family::PurePower => {
            for l in need_range(&a.l, "l")? {
                let l = u32::try_from(l).map_err(|_| anyhow!("l must be nonnegative"))?;
                for m in need_range(&a.m, "m")? {
                    specs.push(FamilySpec::PurePower { l, m });
                }
            }
        }
        Family::ShiftedCubic => {
            for x in need_range(&a.a, "a")? {
                let bs = match a.b.as_deref() {
                    Some("auto") => auto_b(x),
                    _ => need_range(&a.b, "b")?,
                };
                for b in bs {
                    specs.push(FamilySpec::ShiftedCubic { a: x, b });
                }
            }
        }
        Family::JpExample => {
            for k in need_range(&a.k, "k")? {
                for l in need_range(&a.l, "l")? {
                    specs.push(FamilySpec::JpExample { k, l });
                }
            }
        }
    }
    for s in &specs {
        s.validate().map_err(|e| anyhow!("{e}"))?;
    }
    Ok(specs)
}

fn summary_line(r: &Report) -> String {
    let rows = r.rows.iter().filter(|x| x.matched).count();
    let mut s = format!(
        "{}  {}  {}  preperiod {} period {}",
        r.spec,
        r.mode,
        r.status.label(),
        r.preperiod_len,
        r.period_len
    );
    if let Some(m) = r.reduced_m {
        s += &format!("  reduced m={m}");
    }
    if !r.rows.is_empty() {
        s += &format!("  rows {rows}/{}", r.rows.len());
    }
    if let Some(o) = &r.oracle {
        s += &format!(
            "  oracle {}/{} {}",
            o.certified,
            o.requested,
            if o.discrepancies.is_empty() { "agrees" } else { "DISAGREES" }
        );
    }
    s += if r.passed { "  PASS" } else { "  FAIL" };
    s
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let specs = verify_specs(&a)?;
    let opts = VerifyOptions {
        mode: parse_mode(a.strategy.as_deref())?,
        max_steps: a.max_steps,
        oracle_steps: a.oracle_steps,
        oracle: OracleConfig::default(),
        fixtures: a.fixtures.clone(),
    };
    let reports = if a.sequential {
        verify_sweep_seq(&specs, &opts)
    } else {
        verify_sweep(&specs, &opts)
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut all_ok = true;
    for (spec, r) in specs.iter().zip(reports) {
        let r = r.map_err(|e| anyhow!("{spec}: {e}"))?;
        all_ok &= r.passed;
        match a.format {
            Format::Json => writeln!(out, "{}", serde_json::to_string(&r)?)?,
            Format::Csv | Format::Table => {
                writeln!(out, "{}", summary_line(&r))?;
                for n in &r.notes {
                    writeln!(out, "    {n}")?;
                }
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_jp(a: JpArgs) -> Result<u8> {
    let spec = FamilySpec::JpExample { k: a.k, l: a.l };
    let b = family_build(spec).map_err(|e| anyhow!("{e}"))?;
    let mut state = b.state.clone();
    let mut records = Vec::with_capacity(a.steps);
    let mut states = vec![state.clone()];
    let mut status = Status::BudgetExhausted;
    for n in 1..=a.steps {
        match jp_step(&state, n) {
            Ok((rec, next)) => {
                records.push(rec);
                states.push(next.clone());
                state = next;
            }
            Err(mdcf_core::Error::DomainViolation(reason)) => {
                status = Status::LeftDomain { step: n, reason };
                break;
            }
            Err(e) => bail!("{e}"),
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match a.format {
        Format::Json => {
            let result = ExpansionResult {
                mode: Mode::Jp,
                preperiod_len: records.len(),
                period_len: 0,
                records,
                states,
                status: status.clone(),
                discrepancies: Vec::new(),
            };
            writeln!(out, "{}", output::to_json(&result))?;
        }
        Format::Csv => {
            let rows: Vec<_> = records.iter().map(|r| (r.digits.clone(), None)).collect();
            write_digit_csv(&mut out, 2, &rows, 0, 0)?;
        }
        Format::Table => output::write_rows(&records, 2, &mut out)?,
    }
    if let Status::LeftDomain { step, reason } = &status {
        eprintln!("stopped at step {step}: {reason}");
        return Ok(3);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::Expand(a) => cmd_expand(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Jp(a) => cmd_jp(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
