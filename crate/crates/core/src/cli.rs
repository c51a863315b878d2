//! Command-line front end. Every command produces either a table (CSV with
//! a header line, or JSON `rows`) or a structured JSON `report`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::binomial_kernel::{self, PmfParams};
use crate::error::{Error, Result};
use crate::markov;
use crate::sequences::{self, GeneratorSpec, ImplicationReport, OpenProblemReport};
use crate::transforms::{self, RealSequence};

pub const THREADS_ENV: &str = "SUMMAKIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "summakit",
    version,
    about = "Cesàro and binomial means, transform experiments, Markov limits"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv, global = true)]
    pub output: OutputFormat,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "alternating01")]
    Alternating01,
    #[value(name = "geometric")]
    Geometric,
    #[value(name = "signed_linear")]
    SignedLinear,
    #[value(name = "islets")]
    Islets,
    #[value(name = "spikes")]
    Spikes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cesaro,
    Binomial,
    Pstar,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binomial probabilities B_n^i(p), i = 0..=n.
    Pmf {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
    },
    /// Weights w_n^i(p) of the Cesàro mean of binomial means.
    Weights {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    /// A transformed prefix of a named sequence family.
    Transform {
        #[arg(long, value_enum)]
        family: Family,
        /// Ratio of the geometric family.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Spike spacing constant.
        #[arg(long = "C", visible_alias = "c")]
        c: Option<f64>,
        /// Spike height factor.
        #[arg(long, allow_hyphen_values = true)]
        height: Option<f64>,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        horizon: usize,
    },
    /// Aligned slices of B_{floor(n/p)}(p) and B_{floor(n/q)}(q) around n.
    Compare {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: u64,
    },
    /// Cesàro limit matrix of a stochastic matrix read from CSV.
    MarkovLimit {
        /// Header-free CSV, one matrix row per line.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = markov::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = markov::DEFAULT_MAX_SQUARINGS)]
        max_squarings: usize,
        #[arg(long, default_value_t = markov::DEFAULT_ROW_TOL)]
        row_tol: f64,
    },
    /// Empirical check of the implication table on the standard families.
    Table1 {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
    /// Binomial means of a spike sequence at and between spikes.
    Explore {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long = "C", visible_alias = "c", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        height: f64,
        #[arg(long, default_value_t = 1_000_000)]
        horizon: usize,
    },
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Text(String::new()), Cell::Float)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Result of one command before formatting.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: &'static str,
    pub params: Value,
    pub table: Table,
    /// Structured report for JSON output; tabular commands have none.
    pub report: Option<Value>,
    /// Lines for standard error regardless of format.
    pub diagnostics: Vec<String>,
}

/// Formats `x` like C's `%.17g`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Text(s) => s.clone(),
    }
}

fn cell_value(c: &Cell) -> Value {
    match c {
        Cell::Int(v) => json!(v),
        Cell::Float(v) => Value::from(*v),
        Cell::Text(s) => json!(s),
    }
}

/// Writes a JSON value with every float at 17 significant digits.
fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("float");
                out.push_str(&format_float(x));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_json(item, out);
            }
            out.push('}');
        }
        other => write!(out, "{other}").expect("write to string"),
    }
}

/// Renders an outcome in the requested format.
pub fn render(outcome: &Outcome, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let io = |e: csv::Error| Error::Input(e.to_string());
            w.write_record(&outcome.table.columns).map_err(io)?;
            for row in &outcome.table.rows {
                w.write_record(row.iter().map(cell_text)).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Input(e.to_string()))
        }
        OutputFormat::Json => {
            let mut top = serde_json::Map::new();
            top.insert("command".into(), json!(outcome.command));
            top.insert("params".into(), outcome.params.clone());
            match &outcome.report {
                Some(r) => {
                    top.insert("report".into(), r.clone());
                }
                None => {
                    let rows = outcome
                        .table
                        .rows
                        .iter()
                        .map(|row| {
                            let obj = outcome
                                .table
                                .columns
                                .iter()
                                .zip(row)
                                .map(|(k, c)| (k.to_string(), cell_value(c)))
                                .collect();
                            Value::Object(obj)
                        })
                        .collect();
                    top.insert("rows".into(), Value::Array(rows));
                }
            }
            let mut s = String::new();
            write_json(&Value::Object(top), &mut s);
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn tabular(
    command: &'static str,
    params: Value,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
) -> Outcome {
    Outcome {
        command,
        params,
        table: Table { columns, rows },
        report: None,
        diagnostics: Vec::new(),
    }
}

fn family_spec(
    family: Family,
    a: Option<f64>,
    c: Option<f64>,
    height: Option<f64>,
) -> Result<GeneratorSpec> {
    Ok(match family {
        Family::Alternating01 => GeneratorSpec::Alternating01,
        Family::SignedLinear => GeneratorSpec::SignedLinear,
        Family::Islets => GeneratorSpec::Islets,
        Family::Geometric => {
            let a = a.ok_or_else(|| {
                Error::Precondition("--a is required for the geometric family".into())
            })?;
            GeneratorSpec::geometric(a)?
        }
        Family::Spikes => GeneratorSpec::spikes(c.unwrap_or(1.0), height.unwrap_or(1.0))?,
    })
}

fn table1_outcome(report: ImplicationReport) -> Outcome {
    let rows = report
        .cells
        .iter()
        .map(|cell| {
            vec![
                Cell::Text(cell.family.clone()),
                Cell::Text(name(&cell.source)),
                Cell::Text(name(&cell.target)),
                Cell::Text(name(&cell.entry)),
                Cell::Text(name(&cell.status)),
                Cell::Text(name(&cell.source_verdict.status)),
                cell.source_verdict.value.into(),
                Cell::Text(name(&cell.target_verdict.status)),
                cell.target_verdict.value.into(),
            ]
        })
        .collect();
    let mut diagnostics = vec![format!(
        "table1: {} cells, {} contradictions, {} unresolved",
        report.cells.len(),
        report.contradictions,
        report.unresolved
    )];
    for w in &report.witnesses {
        diagnostics.push(format!(
            "witness {} on {}: {} ({})",
            w.claim,
            w.family,
            if w.witnessed {
                "observed"
            } else {
                "not observed"
            },
            w.detail
        ));
    }
    Outcome {
        command: "table1",
        params: json!({"p": report.p, "q": report.q, "horizon": report.horizon}),
        table: Table {
            columns: vec![
                "family",
                "source",
                "target",
                "entry",
                "status",
                "source_status",
                "source_value",
                "target_status",
                "target_value",
            ],
            rows,
        },
        report: Some(to_value(&report)),
        diagnostics,
    }
}

fn explore_outcome(report: OpenProblemReport) -> Outcome {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.j.into(),
                r.spike_index.into(),
                r.next_spike_index.into(),
                r.p_at_spike.into(),
                r.p_at_mid.into(),
                r.q_at_spike.into(),
                r.q_at_mid.into(),
            ]
        })
        .collect();
    Outcome {
        command: "explore",
        params: json!({
            "p": report.p, "q": report.q, "C": report.c,
            "height": report.height, "horizon": report.horizon,
        }),
        table: Table {
            columns: vec![
                "j",
                "spike_index",
                "next_spike_index",
                "p_at_spike",
                "p_at_mid",
                "q_at_spike",
                "q_at_mid",
            ],
            rows,
        },
        diagnostics: vec![format!(
            "explore: amplitude_p {}, amplitude_q {}, peak ratio prediction {}",
            format_float(report.amplitude_p),
            format_float(report.amplitude_q),
            format_float(report.peak_ratio_prediction)
        )],
        report: Some(to_value(&report)),
    }
}

/// Serialized name of a unit enum variant.
fn name<T: Serialize>(x: &T) -> String {
    match to_value(x) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Runs one parsed command.
pub fn execute(command: &Command) -> Result<Outcome> {
    match *command {
        Command::Pmf { n, p } => {
            let row = binomial_kernel::pmf_row(PmfParams::new(n, p)?);
            let rows = row
                .mass
                .iter()
                .enumerate()
                .map(|(i, &m)| vec![i.into(), m.into()])
                .collect();
            Ok(tabular(
                "pmf",
                json!({"n": n, "p": p}),
                vec!["i", "pmf"],
                rows,
            ))
        }
        Command::Weights { n, p } => {
            let table = transforms::weights(n, p)?;
            let rows = table
                .weights
                .iter()
                .enumerate()
                .map(|(i, &w)| vec![i.into(), w.into()])
                .collect();
            Ok(tabular(
                "weights",
                json!({"n": n, "p": p}),
                vec!["i", "weight"],
                rows,
            ))
        }
        Command::Transform {
            family,
            a,
            c,
            height,
            kind,
            p,
            horizon,
        } => {
            let spec = family_spec(family, a, c, height)?;
            let seq = RealSequence::generated(spec);
            let need_p = || {
                p.ok_or_else(|| {
                    Error::Precondition("--p is required for binomial and pstar".into())
                })
            };
            let prefix = match kind {
                Kind::Cesaro => transforms::cesaro_prefix(&seq, horizon)?,
                Kind::Binomial => transforms::binomial_prefix(&seq, need_p()?, horizon)?,
                Kind::Pstar => transforms::pstar_prefix(&seq, need_p()?, horizon)?,
            };
            let rows = prefix
                .values
                .iter()
                .enumerate()
                .map(|(n, &v)| vec![n.into(), v.into()])
                .collect();
            let mut params = to_value(&spec);
            let obj = params
                .as_object_mut()
                .expect("tagged enum serializes as object");
            obj.insert("kind".into(), to_value(&kind_name(kind)));
            if let Some(p) = p {
                obj.insert("p".into(), Value::from(p));
            }
            obj.insert("horizon".into(), json!(horizon));
            Ok(tabular("transform", params, vec!["n", "value"], rows))
        }
        Command::Compare { p, q, n } => compare(p, q, n),
        Command::MarkovLimit {
            ref matrix,
            tol,
            max_squarings,
            row_tol,
        } => {
            let file = std::fs::File::open(matrix)
                .map_err(|e| Error::Input(format!("{}: {e}", matrix.display())))?;
            let raw = markov::read_matrix_csv(file)?;
            let chain = markov::validate(&raw, row_tol)?;
            let report = markov::limit_matrix(&chain, tol, max_squarings)?;
            let dim = chain.dim();
            let mut rows = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    rows.push(vec![i.into(), j.into(), report.a.entries()[(i, j)].into()]);
                }
            }
            Ok(Outcome {
                command: "markov-limit",
                params: json!({
                    "matrix": matrix.display().to_string(),
                    "tol": tol, "max_squarings": max_squarings, "row_tol": row_tol,
                }),
                table: Table {
                    columns: vec!["i", "j", "value"],
                    rows,
                },
                diagnostics: vec![format!(
                    "markov-limit: {} squarings, residual_fix {}, residual_idem {}",
                    report.iterations,
                    format_float(report.residual_fix),
                    format_float(report.residual_idem)
                )],
                report: Some(to_value(&report)),
            })
        }
        Command::Table1 { p, q, horizon } => {
            Ok(table1_outcome(sequences::run_table1(p, q, horizon)?))
        }
        Command::Explore {
            p,
            q,
            c,
            height,
            horizon,
        } => Ok(explore_outcome(sequences::probe_open_problem(
            p, q, c, height, horizon,
        )?)),
    }
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Cesaro => "cesaro",
        Kind::Binomial => "binomial",
        Kind::Pstar => "pstar",
    }
}

fn compare(p: f64, q: f64, n: u64) -> Result<Outcome> {
    binomial_kernel::check_probability(p)?;
    binomial_kernel::check_probability(q)?;
    if p >= q {
        return Err(Error::Precondition(format!(
            "requires p < q, got p = {p}, q = {q}"
        )));
    }
    let np = PmfParams::new((n as f64 / p).floor() as u64, p)?;
    let nq = PmfParams::new((n as f64 / q).floor() as u64, q)?;
    let half = 5.0 * (n as f64).sqrt();
    let lo = (n as f64 - half).ceil().max(0.0) as u64;
    let hi = (n as f64 + half).floor() as u64;
    let peak = |params: PmfParams| {
        binomial_kernel::pmf(params, binomial_kernel::mode_index(params) as i64)
    };
    let predicted = ((1.0 - q) / (1.0 - p)).sqrt();
    let measured = peak(np) / peak(nq);
    let rows = (lo..=hi)
        .map(|i| {
            vec![
                i.into(),
                binomial_kernel::pmf(np, i as i64).into(),
                binomial_kernel::pmf(nq, i as i64).into(),
                predicted.into(),
                measured.into(),
            ]
        })
        .collect();
    Ok(tabular(
        "compare",
        json!({"p": p, "q": q, "n": n}),
        vec!["i", "pmf_p", "pmf_q", "predicted_ratio", "measured_ratio"],
        rows,
    ))
}

fn configure_threads() -> Result<()> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| {
            Error::Precondition(format!("{THREADS_ENV} must be a non-negative integer"))
        })?;
    // A pool may already exist when called repeatedly in one process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Input(e.to_string());
    match &cli.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).map_err(io)?;
            stdout.flush().map_err(io)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = configure_threads()
        .and_then(|()| execute(&cli.command))
        .and_then(|outcome| {
            let bytes = render(&outcome, cli.output)?;
            emit(&cli, &bytes)?;
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            Ok(())
        });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_matches_printf_g17() {
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(-1.0), "-1");
        assert_eq!(format_float(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_float(1e-4), "0.0001");
        assert_eq!(format_float(1e17), "1e+17");
        assert_eq!(format_float(12345678901234567.0), "12345678901234568");
        assert_eq!(format_float(2.0f64.powi(300)), "2.0370359763344861e+90");
        assert_eq!(format_float(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, 2.5e-300, 6.02e23, -7.77e-9] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn pmf_rows() {
        let out = execute(&Command::Pmf { n: 2, p: 0.5 }).unwrap();
        let csv = String::from_utf8(render(&out, OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(csv, "i,pmf\n0,0.25\n1,0.5\n2,0.25\n");
    }

    #[test]
    fn json_layout() {
        let out = execute(&Command::Pmf { n: 1, p: 0.5 }).unwrap();
        let s = String::from_utf8(render(&out, OutputFormat::Json).unwrap()).unwrap();
        assert_eq!(
            s,
            "{\"command\":\"pmf\",\"params\":{\"n\":1,\"p\":0.5},\"rows\":[{\"i\":0,\"pmf\":0.5},{\"i\":1,\"pmf\":0.5}]}\n"
        );
    }

    #[test]
    fn missing_parameters_are_usage_errors() {
        let cmd = Command::Transform {
            family: Family::Alternating01,
            a: None,
            c: None,
            height: None,
            kind: Kind::Binomial,
            p: None,
            horizon: 3,
        };
        assert_eq!(execute(&cmd).unwrap_err().exit_code(), 1);
        let cmd = Command::Transform {
            family: Family::Geometric,
            a: None,
            c: None,
            height: None,
            kind: Kind::Cesaro,
            p: None,
            horizon: 3,
        };
        assert_eq!(execute(&cmd).unwrap_err().exit_code(), 1);
    }
}
