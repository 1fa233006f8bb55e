//! `lindeberg`: constants, reference tables, fractions of user systems and plot data.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 on usage or input errors.

mod figures;
mod output;
mod parallel;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lindeberg::chf::{BoundContext, FractionKind};
use lindeberg::constants::{universal_constants, Extended};
use lindeberg::fractions::input::{parse_rational, parse_system};
use lindeberg::fractions::scenario::{scenario, scenario_exact, ScenarioName};
use lindeberg::fractions::{fraction_report, kolmogorov_distance, FractionReport, SummandSystem};
use lindeberg::solver::{
    absolute_constant_with, c0, c1_sup, round_up, small_l_cap, BoundBreakdown, C1Evaluator, C1Settings, Params,
    SupResult, SupSettings,
};
use lindeberg::tables::{reproduce, Status, TableOptions, Tolerances};
use num_rational::BigRational;
use serde::Serialize;

use output::{fixed, signed, write_json, Format, Rows};

#[derive(Parser)]
#[command(name = "lindeberg", version, about = "Absolute constants in Esseen- and Rozovskii-type normal approximation bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads for independent rows or points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// x0, kappa, gamma*, t_inf and pi/4.
    Constants,
    /// Recompute a reference table (1 to 5) and compare it with the stored values.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        id: u8,
        /// JSON object of tolerance classes to replace, e.g. {"c1": 0.02}.
        #[arg(long)]
        tol_overrides: Option<PathBuf>,
    },
    /// The constant C(eps, gamma), or the bound at one L or over an L range.
    Constant {
        #[arg(long)]
        kind: FractionKind,
        #[arg(long, default_value = "inf")]
        eps: Extended,
        #[arg(long, default_value = "inf")]
        gamma: Extended,
        /// Evaluate C0 and C1 at this fraction value only.
        #[arg(long = "L", conflicts_with = "l_range")]
        l: Option<f64>,
        /// Certified sup of C1 over a:b.
        #[arg(long = "L-range", value_parser = parse_range)]
        l_range: Option<(f64, f64)>,
    },
    /// All fractions of a system read from a text or JSON file ("-" for stdin).
    Fractions {
        file: PathBuf,
        #[arg(long, default_value = "1")]
        eps: Extended,
        #[arg(long, default_value = "1")]
        gamma: Extended,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Fractions, exact Kolmogorov distance and the comparison claims for a named system.
    Compare {
        scenario: ScenarioName,
        #[arg(long)]
        n: usize,
        /// Mass of the upper atom for the two-point family, as a decimal or num/den.
        #[arg(long)]
        p: Option<String>,
        #[arg(long, default_value = "1")]
        eps: Extended,
        #[arg(long, default_value = "1")]
        gamma: Extended,
    },
    /// Series behind a figure (1 to 4) as (series, x, y).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        /// L range for figure 4.
        #[arg(long = "L-range", value_parser = parse_range)]
        l_range: Option<(f64, f64)>,
        /// Points per curve for figure 4.
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected a:b")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad lower end '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad upper end '{b}'"))?;
    if !(a > 0.0 && b >= a && b.is_finite()) {
        return Err(format!("need 0 < a <= b, got {a}:{b}"));
    }
    Ok((a, b))
}

enum Failure {
    Input(String),
    Io(io::Error),
}

impl From<lindeberg::Error> for Failure {
    fn from(e: lindeberg::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => ExitCode::SUCCESS,
        (Ok(false), Ok(())) => ExitCode::from(1),
        (Err(Failure::Input(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Err(Failure::Io(e)), _) | (_, Err(e)) => {
            if e.kind() == io::ErrorKind::BrokenPipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, out: &mut impl Write) -> Outcome {
    match &cli.command {
        Command::Constants => constants(cli.format.unwrap_or(Format::Table), out),
        Command::Table { id, tol_overrides } => table(*id, tol_overrides.as_ref(), cli, out),
        Command::Constant {
            kind,
            eps,
            gamma,
            l,
            l_range,
        } => constant(*kind, *eps, *gamma, *l, *l_range, cli.format.unwrap_or(Format::Json), out),
        Command::Fractions {
            file,
            eps,
            gamma,
            delta,
        } => fractions(file, *eps, *gamma, *delta, cli.format.unwrap_or(Format::Json), out),
        Command::Compare {
            scenario,
            n,
            p,
            eps,
            gamma,
        } => compare(*scenario, *n, p.as_deref(), *eps, *gamma, cli.format.unwrap_or(Format::Json), out),
        Command::Figure { id, l_range, points } => figure(*id, *l_range, *points, cli, out),
    }
}

/// Key/value listing for single-record outputs.
fn pairs(pairs: Vec<(&'static str, String)>) -> Rows {
    let mut rows = Rows::new(vec!["quantity", "value"]);
    for (k, v) in pairs {
        rows.push(vec![k.to_owned(), v]);
    }
    rows
}

fn emit<T: Serialize>(format: Format, value: &T, rows: impl FnOnce() -> Rows, out: &mut impl Write) -> io::Result<()> {
    match format {
        Format::Json => write_json(value, out),
        Format::Csv => rows().write_csv(out),
        Format::Table => rows().write_table(out),
    }
}

#[derive(Serialize)]
struct ConstantsOutput {
    x0: f64,
    kappa: f64,
    gamma_star: f64,
    t_inf: f64,
    tau1_bar: f64,
}

fn constants(format: Format, out: &mut impl Write) -> Outcome {
    let u = universal_constants();
    let c = ConstantsOutput {
        x0: u.x0,
        kappa: u.kappa,
        gamma_star: u.gamma_star,
        t_inf: u.t_infinity(),
        tau1_bar: u.tau1_bar(),
    };
    emit(
        format,
        &c,
        || {
            pairs(vec![
                ("x0", fixed(c.x0, 10)),
                ("kappa", fixed(c.kappa, 10)),
                ("gamma*", fixed(c.gamma_star, 10)),
                ("t_inf", fixed(c.t_inf, 10)),
                ("tau1_bar", fixed(c.tau1_bar, 10)),
            ])
        },
        out,
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct TableOutput<'a> {
    table: u8,
    status: Status,
    pass: usize,
    flag: usize,
    fail: usize,
    cells: &'a [lindeberg::tables::Cell],
}

fn table(id: u8, overrides: Option<&PathBuf>, cli: &Cli, out: &mut impl Write) -> Outcome {
    let mut tolerances = Tolerances::default();
    if let Some(path) = overrides {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        tolerances = tolerances.with_overrides(&text)?;
    }
    let opts = TableOptions {
        tolerances,
        jobs: cli.jobs,
        ..TableOptions::default()
    };
    let r = reproduce(id, &opts)?;
    let status = r.status();
    let summary = TableOutput {
        table: id,
        status,
        pass: r.count(Status::Pass),
        flag: r.count(Status::Flag),
        fail: r.count(Status::Fail),
        cells: &r.cells,
    };
    let rows = || {
        let mut rows = Rows::new(vec![
            "table", "eps", "gamma", "column", "computed", "reference", "deviation", "tolerance", "status",
        ]);
        for c in &r.cells {
            rows.push(vec![
                id.to_string(),
                c.eps.clone().unwrap_or_default(),
                c.gamma.clone(),
                c.column.to_owned(),
                fixed(c.computed, 6),
                fixed(c.expected, 6),
                signed(c.deviation, 6),
                fixed(c.tolerance, 6),
                c.status.to_string(),
            ]);
        }
        rows
    };
    let format = cli.format.unwrap_or(Format::Table);
    emit(format, &summary, rows, out)?;
    if format == Format::Table {
        writeln!(
            out,
            "table {id}: {status} ({} pass, {} flag, {} fail)",
            summary.pass, summary.flag, summary.fail
        )?;
    }
    Ok(status != Status::Fail)
}

#[derive(Serialize)]
struct Contributions {
    #[serde(rename = "I1")]
    i1: f64,
    #[serde(rename = "I2")]
    i2: f64,
    #[serde(rename = "I3")]
    i3: f64,
    #[serde(rename = "I4")]
    i4: f64,
}

impl From<&BoundBreakdown> for Contributions {
    fn from(b: &BoundBreakdown) -> Self {
        Self {
            i1: b.i1,
            i2: b.i2,
            i3: b.i3,
            i4: b.i4,
        }
    }
}

#[derive(Serialize)]
struct ConstantOutput {
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
    /// Certified value, unrounded.
    value: f64,
    /// Rounded up to two decimals.
    value_rounded_up: f64,
    c_min: f64,
    #[serde(rename = "L0")]
    l0: f64,
    #[serde(rename = "L1")]
    l1: f64,
    c0_branch: f64,
    c0_params: Params,
    c1_branch: f64,
    #[serde(rename = "argmax_L")]
    argmax_l: f64,
    /// Largest point value of C1 on the L grid.
    c1_at_argmax: f64,
    params: Params,
    contributions: Contributions,
    sup_gap: f64,
    evaluations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct PointOutput {
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
    #[serde(rename = "L")]
    l: f64,
    c0: Option<BoundBreakdown>,
    c0_note: Option<String>,
    c1: Option<BoundBreakdown>,
    c1_note: Option<String>,
}

#[derive(Serialize)]
struct RangeOutput {
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
    #[serde(rename = "L_range")]
    l_range: (f64, f64),
    sup: SupResult,
}

fn breakdown_pairs(prefix: &'static [&'static str; 7], b: &BoundBreakdown) -> Vec<(&'static str, String)> {
    let (p0, p1) = match b.params {
        Params::Small(p) => (p.tau0, p.tau1),
        Params::Large(p) => (p.t0, p.t1),
    };
    vec![
        (prefix[0], fixed(b.total, 6)),
        (prefix[1], fixed(p0, 6)),
        (prefix[2], fixed(p1, 6)),
        (prefix[3], fixed(b.i1, 6)),
        (prefix[4], fixed(b.i2, 6)),
        (prefix[5], fixed(b.i3, 6)),
        (prefix[6], fixed(b.i4, 6)),
    ]
}

const C0_KEYS: [&str; 7] = ["C0", "tau0", "tau1", "C0.I1", "C0.I2", "C0.I3", "C0.I4"];
const C1_KEYS: [&str; 7] = ["C1", "T0", "T1", "C1.I1", "C1.I2", "C1.I3", "C1.I4"];

fn constant(
    kind: FractionKind,
    eps: Extended,
    gamma: Extended,
    l: Option<f64>,
    l_range: Option<(f64, f64)>,
    format: Format,
    out: &mut impl Write,
) -> Outcome {
    BoundContext::new(kind, eps, gamma, 1.0)?;
    if let Some(l) = l {
        let ctx = BoundContext::new(kind, eps, gamma, l)?;
        let (c0v, c0_note) = if l < small_l_cap(kind, eps) {
            match c0(&ctx) {
                Ok(b) => (Some(b), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, Some("L is beyond the small-L cap".to_owned()))
        };
        let (c1v, c1_note) = match C1Evaluator::new(&ctx, C1Settings::default()).and_then(|e| e.minimize(None)) {
            Ok(b) => (Some(b), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let o = PointOutput {
            kind,
            eps,
            gamma,
            l,
            c0: c0v,
            c0_note,
            c1: c1v,
            c1_note,
        };
        emit(
            format,
            &o,
            || {
                let mut p = vec![("L", fixed(l, 6))];
                if let Some(b) = &o.c0 {
                    p.extend(breakdown_pairs(&C0_KEYS, b));
                }
                if let Some(b) = &o.c1 {
                    p.extend(breakdown_pairs(&C1_KEYS, b));
                }
                pairs(p)
            },
            out,
        )?;
        return Ok(true);
    }
    let settings = SupSettings::reporting();
    if let Some((a, b)) = l_range {
        let family = BoundContext::new(kind, eps, gamma, a)?;
        let sup = c1_sup(&family, a, b, &settings)?;
        let o = RangeOutput {
            kind,
            eps,
            gamma,
            l_range: (a, b),
            sup,
        };
        emit(
            format,
            &o,
            || {
                pairs(vec![
                    ("sup_C1", fixed(o.sup.value, 6)),
                    ("argmax_L", fixed(o.sup.argmax, 6)),
                    ("C1_at_argmax", fixed(o.sup.best.total, 6)),
                    ("gap", fixed(o.sup.gap, 6)),
                    ("evaluations", o.sup.evaluations.to_string()),
                    ("converged", o.sup.converged.to_string()),
                ])
            },
            out,
        )?;
        return Ok(true);
    }
    let r = absolute_constant_with(kind, eps, gamma, None, &settings)?;
    let o = ConstantOutput {
        kind,
        eps,
        gamma,
        value: r.value,
        value_rounded_up: round_up(r.value, 2),
        c_min: r.c_min,
        l0: r.l0,
        l1: r.l1,
        c0_branch: r.c0.total,
        c0_params: r.c0.params,
        c1_branch: r.c1.value,
        argmax_l: r.c1.argmax,
        c1_at_argmax: r.c1.best.total,
        params: r.c1.best.params,
        contributions: (&r.c1.best).into(),
        sup_gap: r.c1.gap,
        evaluations: r.c1.evaluations,
        converged: r.c1.converged,
    };
    emit(
        format,
        &o,
        || {
            let mut p = vec![
                ("kind", kind.to_string()),
                ("eps", eps.to_string()),
                ("gamma", gamma.to_string()),
                ("value", fixed(o.value, 6)),
                ("value_rounded_up", fixed(o.value_rounded_up, 2)),
                ("c0_branch", fixed(o.c0_branch, 6)),
                ("c1_branch", fixed(o.c1_branch, 6)),
                ("argmax_L", fixed(o.argmax_l, 6)),
            ];
            p.extend(breakdown_pairs(&C1_KEYS, &r.c1.best));
            p.push(("sup_gap", fixed(o.sup_gap, 6)));
            pairs(p)
        },
        out,
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct FractionsOutput {
    summands: usize,
    variance: f64,
    #[serde(flatten)]
    report: FractionReport,
}

fn report_pairs(summands: usize, r: &FractionReport) -> Vec<(&'static str, String)> {
    vec![
        ("summands", summands.to_string()),
        ("esseen", fixed(r.esseen, 10)),
        ("rozovskii", r.rozovskii.map_or("n/a".into(), |v| fixed(v, 10))),
        ("lyapunov", fixed(r.lyapunov, 10)),
        ("osipov", fixed(r.osipov, 10)),
        ("lindeberg", fixed(r.lindeberg, 10)),
        ("eps", r.eps.to_string()),
        ("gamma", r.gamma.to_string()),
        ("delta", r.delta.to_string()),
        ("exact", r.exact.to_string()),
    ]
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn fractions(path: &PathBuf, eps: Extended, gamma: Extended, delta: f64, format: Format, out: &mut impl Write) -> Outcome {
    let text = read_input(path)?;
    let sys = parse_system(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let report = fraction_report(&sys, eps, gamma, delta)?;
    let o = FractionsOutput {
        summands: sys.len(),
        variance: num_traits_f64(sys.variance()),
        report,
    };
    emit(format, &o, || pairs(report_pairs(o.summands, &o.report)), out)?;
    Ok(true)
}

fn num_traits_f64(x: &BigRational) -> f64 {
    use lindeberg::scalar::Scalar;
    x.to_f64_value()
}

#[derive(Serialize)]
struct Claim {
    name: &'static str,
    statement: String,
    lhs: f64,
    rhs: f64,
    holds: bool,
    /// Whether the claim is asserted for these parameters; otherwise it is informational.
    expected: bool,
    status: &'static str,
}

impl Claim {
    fn new(name: &'static str, statement: String, lhs: f64, rhs: f64, expected: bool) -> Self {
        let holds = lhs < rhs;
        let status = match (expected, holds) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        Self {
            name,
            statement,
            lhs,
            rhs,
            holds,
            expected,
            status,
        }
    }
}

#[derive(Serialize)]
struct CompareOutput {
    scenario: ScenarioName,
    n: usize,
    p: Option<f64>,
    fractions: FractionReport,
    kolmogorov_distance: Option<f64>,
    kolmogorov_note: Option<String>,
    claims: Vec<Claim>,
}

fn compare(
    name: ScenarioName,
    n: usize,
    p: Option<&str>,
    eps: Extended,
    gamma: Extended,
    format: Format,
    out: &mut impl Write,
) -> Outcome {
    let p_exact = p.map(parse_rational).transpose()?;
    let p_float = p_exact.as_ref().map(num_traits_f64);
    let (report, sys_f64): (FractionReport, SummandSystem<f64>) = match scenario_exact(name, n, p_exact) {
        Ok(s) => (fraction_report(&s, eps, gamma, 1.0)?, s.to_f64()),
        Err(lindeberg::Error::Inexact(_)) => {
            let s = scenario::<f64>(name, n, p_float)?;
            (fraction_report(&s, eps, gamma, 1.0)?, s)
        }
        Err(e) => return Err(e.into()),
    };
    let (delta, note) = match kolmogorov_distance(&sys_f64) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let e = report.esseen;
    let worst = report.rozovskii.map_or(e, |r| r.max(e));
    let eps_v = eps.value();
    let nf = n as f64;
    let mut claims = vec![Claim::new(
        "sharper_than_osipov",
        "2.73*max(L_E^3, L_R^3) < 1.87*(Lambda_n(eps) + L_n(eps))".into(),
        2.73 * worst,
        1.87 * report.osipov,
        matches!(name, ScenarioName::FourPoint if nf * eps_v * eps_v >= 9.0)
            || matches!(name, ScenarioName::Alternating if n == 4 && eps_v >= 1.0),
    )];
    if let (Some(r), Some(p)) = (report.rozovskii, p_float) {
        let q = 1.0 - p;
        let band = p > 0.5 && p < (5f64.sqrt() - 1.0) / 2.0 && nf * eps_v * eps_v > p / q;
        claims.push(Claim::new(
            "rozovskii_exceeds_lyapunov",
            "L_3 < L_R^3".into(),
            report.lyapunov,
            r,
            name == ScenarioName::TwoPoint && band && gamma.value() >= 1.0,
        ));
    }
    if let Some(r) = report.rozovskii {
        claims.push(Claim::new(
            "rozovskii_below_esseen",
            "L_R^3 < L_E^3".into(),
            r,
            e,
            name == ScenarioName::ThreePoint && nf * eps_v * eps_v >= 49.0 / 25.0 && gamma.value() == 1.0,
        ));
    }
    let ok = claims.iter().all(|c| c.status != "FAIL");
    let o = CompareOutput {
        scenario: name,
        n,
        p: p_float,
        fractions: report,
        kolmogorov_distance: delta,
        kolmogorov_note: note,
        claims,
    };
    emit(
        format,
        &o,
        || {
            let mut p = vec![("scenario", name.to_string()), ("n", n.to_string())];
            p.extend(report_pairs(n, &o.fractions).into_iter().skip(1));
            p.push(("kolmogorov_distance", o.kolmogorov_distance.map_or("n/a".into(), |d| fixed(d, 10))));
            for c in &o.claims {
                p.push((c.name, format!("{} < {}: {}", fixed(c.lhs, 6), fixed(c.rhs, 6), c.status)));
            }
            pairs(p)
        },
        out,
    )?;
    Ok(ok)
}

fn figure(id: u8, l_range: Option<(f64, f64)>, points: usize, cli: &Cli, out: &mut impl Write) -> Outcome {
    let data = match id {
        1 => figures::thresholds()?,
        2 => figures::level_curves(cli.jobs)?,
        3 => figures::rozovskii_aex()?,
        _ => figures::c1_curves(l_range, points, cli.jobs)?,
    };
    emit(
        cli.format.unwrap_or(Format::Csv),
        &data,
        || {
            let mut rows = Rows::new(vec!["series", "x", "y"]);
            for p in &data {
                rows.push(vec![p.series.clone(), fixed(p.x, 8), fixed(p.y, 8)]);
            }
            rows
        },
        out,
    )?;
    Ok(true)
}
