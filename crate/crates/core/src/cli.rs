//! Command-line front end: one subcommand per pipeline, file-based output.
//!
//! Exit codes: 0 on success, 1 on a numeric error (the error's name is
//! printed), 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::backward::{backward_orbit, limit_x, reduce_to_annulus, sample_limit_set, BranchPolicy};
use crate::complex::{BigComplex, Precision};
use crate::dynamics::BranchSelector;
use crate::error::{Error, Result};
use crate::export::{CsvTable, DecimalComplex, Graymap};
use crate::misiurewicz::{solve_misiurewicz, MisiurewiczData};
use crate::similarity::{sample_julia, sample_mandelbrot_boundary, tan_lei_report, ReportConfig, Window};
use crate::skinning::{limit_series, table_csv, v_table};
use crate::surgery::build_sequence;

#[derive(Debug, Parser)]
#[command(name = "pcf-surgery", version, about = "Misiurewicz points, surgery sequences and self-similarity of z^2 + c")]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u32).range(53..))]
    pub precision_bits: u32,
    /// Convergence tolerance; defaults to 2^-(P-8).
    #[arg(long, global = true, value_parser = positive_real)]
    pub tolerance: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// State of the branch-choosing LCG.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed_state: u64,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
    /// P5 instead of P2 graymaps.
    #[arg(long, global = true)]
    pub binary: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Pgm => "pgm",
        }
    }
}

/// A Misiurewicz point given by `(k, p)` and a Newton seed.
#[derive(Debug, Clone, Args)]
pub struct BaseArgs {
    /// Preperiod.
    #[arg(long)]
    pub k: usize,
    /// Period.
    #[arg(long)]
    pub p: usize,
    /// Newton seed, e.g. `-1.9` or `0.1+1.1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Follow the cycle backwards.
    TrackCycle,
    /// Always the principal root.
    Principal,
    /// Always the root nearest the landing point.
    Landing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderKind {
    Julia,
    Mandelbrot,
    Limit,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a Misiurewicz parameter and print c, mu and nu.
    Misiurewicz(BaseArgs),
    /// The rigidity derivative nu of a Misiurewicz parameter.
    Nu(BaseArgs),
    /// Backward orbit of a point toward the landing point.
    Backward {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Starting point (must reach 0 under forward iteration).
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        q0: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::TrackCycle)]
        policy: PolicyArg,
    },
    /// Limit of the scaled backward tail divided by nu.
    LimitX {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, default_value_t = 40)]
        steps: usize,
    },
    /// Fixed points of the skinning map for a range of n.
    SkinningTable {
        #[arg(long, value_parser = index_range)]
        n: IndexRange,
    },
    /// Scaled skinning gaps and their extrapolated limit.
    SkinningLimit {
        #[arg(long, default_value_t = 14)]
        n_max: usize,
    },
    /// Surgery sequence c_n converging to a Misiurewicz parameter.
    Surgery {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, value_parser = index_range, default_value = "2..8")]
        n: IndexRange,
        /// Backward-orbit length; defaults to what the precision allows.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Self- and cross-similarity distances of J and M near the parameter.
    TanLei {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, value_parser = index_range, default_value = "1..6")]
        n: IndexRange,
        /// Mandelbrot grid cell in rescaled units.
        #[arg(long, default_value_t = 0.01, value_parser = positive_real)]
        h: f64,
        /// Julia samples by inverse iteration.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Escape iterations beyond k + p n.
        #[arg(long)]
        escape_extra: Option<usize>,
    },
    /// Raster or list a sampled cloud.
    Render {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, value_enum)]
        kind: RenderKind,
        /// Pixel (and grid) size; defaults to 1/256 of the window width.
        #[arg(long, value_parser = positive_real)]
        h: Option<f64>,
        /// Half-width of the Mandelbrot window around c.
        #[arg(long, default_value_t = 0.05, value_parser = positive_real)]
        half_width: f64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Depth of the preimage tree for the limit set.
        #[arg(long, default_value_t = 12)]
        tree_depth: usize,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
    },
}

/// Inclusive index range `a..b` (or a single index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub from: usize,
    pub to: usize,
}

fn index_range(text: &str) -> std::result::Result<IndexRange, String> {
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (text, text),
    };
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("bad index {s:?}: {e}"));
    let (from, to) = (parse(a)?, parse(b)?);
    if from > to {
        return Err(format!("empty range {from}..{to}"));
    }
    Ok(IndexRange { from, to })
}

fn positive_real(text: &str) -> std::result::Result<f64, String> {
    match text.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("{x} is not a positive real")),
        Err(e) => Err(e.to_string()),
    }
}

/// The rendered result of a subcommand.
struct Outcome {
    body: Vec<u8>,
    summary: String,
}

enum Failure {
    Usage(String),
    Numeric(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

/// Parses `args` (program name first), runs the pipeline and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &outcome.body)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))
                    .and_then(|_| writeln!(stdout, "{}", outcome.summary).map_err(|e| e.to_string())),
                None => stdout
                    .write_all(&outcome.body)
                    .and_then(|_| writeln!(stderr, "{}", outcome.summary))
                    .map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    let _ = writeln!(stderr, "IoError: {msg}");
                    1
                }
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Numeric(e)) => {
            let _ = writeln!(stderr, "{}: {e}", e.name());
            1
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "IoError: {msg}");
            1
        }
    }
}

fn execute(cli: &Cli) -> std::result::Result<Outcome, Failure> {
    let prec = Precision::new(cli.precision_bits)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads as usize)
        .build()
        .map_err(|e| Failure::Io(e.to_string()))?;
    pool.install(|| dispatch(cli, prec))
}

struct Ctx<'a> {
    cli: &'a Cli,
    prec: Precision,
    digits: usize,
}

impl Ctx<'_> {
    fn format(&self, default: Format, allowed: &[Format], command: &str) -> std::result::Result<Format, Failure> {
        let format = self.cli.format.unwrap_or(default);
        if allowed.contains(&format) {
            Ok(format)
        } else {
            Err(Failure::Usage(format!("format {} is not available for {command}", format.name())))
        }
    }

    fn tolerance(&self) -> f64 {
        self.cli.tolerance.unwrap_or_else(|| self.prec.tolerance(8).to_f64())
    }

    fn dec(&self, z: &BigComplex) -> String {
        z.to_decimal(self.digits)
    }

    fn float(&self, x: &rug::Float) -> String {
        x.to_string_radix(10, Some(self.digits))
    }

    fn solve(&self, base: &BaseArgs) -> Result<MisiurewiczData> {
        let seed = BigComplex::parse(self.prec, &base.seed)?;
        solve_misiurewicz(base.k, base.p, &seed, self.prec)
    }

    fn base_inputs(&self, base: &BaseArgs) -> Value {
        json!({ "k": base.k, "p": base.p, "seed": base.seed })
    }

    /// The run record: `inputs`, `outputs`, `meta`.
    fn json(&self, command: &str, inputs: Value, outputs: Value) -> Vec<u8> {
        let record = json!({
            "inputs": inputs,
            "outputs": outputs,
            "meta": {
                "command": command,
                "program": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "precision_bits": self.prec.bits(),
                "tolerance": format!("{:e}", self.tolerance()),
                "seed_state": self.cli.seed_state.to_string(),
            },
        });
        let mut text = serde_json::to_string_pretty(&record).expect("JSON values always serialize");
        text.push('\n');
        text.into_bytes()
    }

    fn complex_rows(&self, rows: &[(String, &BigComplex)]) -> Vec<u8> {
        let mut table = CsvTable::new(["quantity", "re", "im"]);
        for (name, z) in rows {
            table.push(vec![name.clone(), self.float(z.re()), self.float(z.im())]);
        }
        table.render().into_bytes()
    }
}

fn decimal(z: &BigComplex) -> Value {
    serde_json::to_value(DecimalComplex::from(z)).expect("decimal strings always serialize")
}

fn dispatch(cli: &Cli, prec: Precision) -> std::result::Result<Outcome, Failure> {
    let ctx = Ctx { cli, prec, digits: prec.decimal_digits() };
    let data_formats = [Format::Csv, Format::Json];
    match &cli.command {
        Command::Misiurewicz(base) => {
            let format = ctx.format(Format::Csv, &data_formats, "misiurewicz")?;
            let data = ctx.solve(base)?;
            let summary = format!("c={} mu={} nu={}", ctx.dec(&data.c), ctx.dec(&data.mu), ctx.dec(&data.nu));
            let body = match format {
                Format::Json => {
                    let record = serde_json::to_value(data.to_record()).expect("records always serialize");
                    ctx.json("misiurewicz", ctx.base_inputs(base), record)
                }
                _ => {
                    let mut rows = vec![("c".to_string(), &data.c), ("mu".into(), &data.mu), ("nu".into(), &data.nu)];
                    for (j, z) in data.orbit.iter().enumerate() {
                        rows.push((format!("orbit_{j}"), z));
                    }
                    ctx.complex_rows(&rows)
                }
            };
            Ok(Outcome { body, summary })
        }
        Command::Nu(base) => {
            let format = ctx.format(Format::Csv, &data_formats, "nu")?;
            let data = ctx.solve(base)?;
            let summary = format!("nu={} |nu|={:.6}", ctx.dec(&data.nu), data.nu.abs_f64());
            let body = match format {
                Format::Json => ctx.json(
                    "nu",
                    ctx.base_inputs(base),
                    json!({ "c": decimal(&data.c), "nu": decimal(&data.nu), "abs_nu": ctx.float(&data.nu.abs()) }),
                ),
                _ => ctx.complex_rows(&[("c".into(), &data.c), ("nu".into(), &data.nu)]),
            };
            Ok(Outcome { body, summary })
        }
        Command::Backward { base, steps, q0, policy } => {
            let format = ctx.format(Format::Csv, &data_formats, "backward")?;
            let data = ctx.solve(base)?;
            let q0 = BigComplex::parse(prec, q0)?;
            let policy = match policy {
                PolicyArg::TrackCycle => BranchPolicy::TrackCycle,
                PolicyArg::Principal => BranchPolicy::Uniform(BranchSelector::Principal),
                PolicyArg::Landing => BranchPolicy::Uniform(BranchSelector::NearestTo(data.landing_point().clone())),
            };
            let orbit = backward_orbit(&data, &q0, policy, *steps)?;
            let last = orbit.points.last().expect("orbit starts at q0");
            let summary = format!(
                "q_{steps}={} residue={} scaled_terms={}",
                ctx.dec(last),
                orbit.residue,
                orbit.scaled.len()
            );
            let body = match format {
                Format::Json => ctx.json(
                    "backward",
                    json!({ "base": ctx.base_inputs(base), "steps": steps, "q0": decimal(&orbit.q0), "policy": orbit.policy.label() }),
                    json!({
                        "points": orbit.points.iter().map(decimal).collect::<Vec<_>>(),
                        "residue": orbit.residue,
                        "scaled": orbit.scaled.iter().map(decimal).collect::<Vec<_>>(),
                    }),
                ),
                _ => {
                    let mut table = CsvTable::new(["j", "re_q", "im_q"]);
                    for (j, z) in orbit.points.iter().enumerate() {
                        table.push(vec![j.to_string(), ctx.float(z.re()), ctx.float(z.im())]);
                    }
                    table.render().into_bytes()
                }
            };
            Ok(Outcome { body, summary })
        }
        Command::LimitX { base, steps } => {
            let format = ctx.format(Format::Csv, &data_formats, "limit-x")?;
            let data = ctx.solve(base)?;
            let orbit = backward_orbit(&data, &BigComplex::zero(prec), BranchPolicy::TrackCycle, *steps)?;
            let x = limit_x(&orbit)?;
            let reduced = reduce_to_annulus(&x.value, &data.mu)?;
            let summary = format!("x={} error={:.3e} annulus={}", ctx.dec(&x.value), x.error, ctx.dec(&reduced));
            let body = match format {
                Format::Json => ctx.json(
                    "limit-x",
                    json!({ "base": ctx.base_inputs(base), "steps": steps }),
                    json!({
                        "x": decimal(&x.value),
                        "error": format!("{:e}", x.error),
                        "annulus": decimal(&reduced),
                        "residue": orbit.residue,
                    }),
                ),
                _ => ctx.complex_rows(&[("x".into(), &x.value), ("annulus".into(), &reduced)]),
            };
            Ok(Outcome { body, summary })
        }
        Command::SkinningTable { n } => {
            let format = ctx.format(Format::Csv, &data_formats, "skinning-table")?;
            let rows = v_table(n.from, n.to, prec, ctx.tolerance())?;
            let last = rows.last().expect("range is non-empty");
            let summary = format!("{} rows, v_{}={}", rows.len(), last.n, ctx.float(&last.v));
            let body = match format {
                Format::Json => ctx.json(
                    "skinning-table",
                    json!({ "n_from": n.from, "n_to": n.to }),
                    Value::Array(
                        rows.iter()
                            .map(|r| json!({ "n": r.n, "v": ctx.float(&r.v), "c": ctx.float(&r.c), "s": ctx.float(&r.s) }))
                            .collect(),
                    ),
                ),
                _ => table_csv(&rows, ctx.digits).into_bytes(),
            };
            Ok(Outcome { body, summary })
        }
        Command::SkinningLimit { n_max } => {
            let format = ctx.format(Format::Csv, &data_formats, "skinning-limit")?;
            let series = limit_series(*n_max, prec)?;
            let summary = format!("limit={} error={:.3e}", ctx.float(&series.limit), series.error);
            let body = match format {
                Format::Json => ctx.json(
                    "skinning-limit",
                    json!({ "n_max": n_max }),
                    json!({
                        "terms": series.terms.iter().map(|(n, s)| json!({ "n": n, "s": ctx.float(s) })).collect::<Vec<_>>(),
                        "limit": ctx.float(&series.limit),
                        "error": format!("{:e}", series.error),
                    }),
                ),
                _ => {
                    let mut table = CsvTable::new(["n", "s_n"]);
                    for (n, s) in &series.terms {
                        table.push(vec![n.to_string(), ctx.float(s)]);
                    }
                    table.push(vec!["limit".into(), ctx.float(&series.limit)]);
                    table.render().into_bytes()
                }
            };
            Ok(Outcome { body, summary })
        }
        Command::Surgery { base, n, steps } => {
            let format = ctx.format(Format::Csv, &data_formats, "surgery")?;
            let data = ctx.solve(base)?;
            let steps = steps.unwrap_or_else(|| default_steps(&data, n.to));
            let orbit = backward_orbit(&data, &BigComplex::zero(prec), BranchPolicy::TrackCycle, steps)?;
            let seq = build_sequence(&data, &orbit, n.from, n.to)?;
            let summary = format!(
                "{} entries, t_{}={} (error {:.3e})",
                seq.entries.len(),
                n.to,
                ctx.dec(&seq.x_estimate),
                seq.x_error
            );
            let body = match format {
                Format::Json => {
                    let record = serde_json::to_value(seq.to_record()).expect("records always serialize");
                    ctx.json(
                        "surgery",
                        json!({ "base": ctx.base_inputs(base), "n_from": n.from, "n_to": n.to, "steps": steps }),
                        record,
                    )
                }
                _ => seq.to_csv(ctx.digits).into_bytes(),
            };
            Ok(Outcome { body, summary })
        }
        Command::TanLei { base, n, h, samples, escape_extra } => {
            let format = ctx.format(Format::Csv, &data_formats, "tan-lei")?;
            let data = ctx.solve(base)?;
            let config = ReportConfig {
                n_from: n.from,
                n_to: n.to,
                h: *h,
                depth: *samples,
                seed_state: cli.seed_state,
                escape_extra: *escape_extra,
            };
            let report = tan_lei_report(&data, &config)?;
            let summary = format!(
                "cross={:.4e} julia_resolution={:.4e} mandelbrot_resolution={:.4e}",
                report.cross, report.julia_resolution, report.mandelbrot_resolution
            );
            let body = match format {
                Format::Json => ctx.json(
                    "tan-lei",
                    json!({ "base": ctx.base_inputs(base), "c": decimal(&data.c) }),
                    serde_json::to_value(&report).expect("reports always serialize"),
                ),
                _ => report.to_csv().into_bytes(),
            };
            Ok(Outcome { body, summary })
        }
        Command::Render { base, kind, h, half_width, samples, tree_depth, max_iter } => {
            let format = ctx.format(Format::Pgm, &[Format::Pgm, Format::Csv], "render")?;
            let data = ctx.solve(base)?;
            let (points, center, half, label) = match kind {
                RenderKind::Julia => {
                    let cloud = sample_julia(&data.c, *samples, cli.seed_state)?;
                    (cloud.approx(), (0.0, 0.0), 2.0, "julia")
                }
                RenderKind::Mandelbrot => {
                    let grid = h.unwrap_or(half_width / 128.0);
                    let window = Window::square(data.c.clone(), *half_width);
                    let cloud = sample_mandelbrot_boundary(&window, grid, *max_iter)?;
                    (cloud.approx(), data.c.to_f64_pair(), *half_width, "mandelbrot")
                }
                RenderKind::Limit => {
                    let cloud = sample_limit_set(&data, *tree_depth, 1 << 22)?;
                    (cloud.approx(), (0.0, 0.0), data.mu.abs_f64(), "limit")
                }
            };
            let pixel = h.unwrap_or(half / 128.0);
            let summary = format!("{label}: {} points", points.len());
            let body = match format {
                Format::Pgm => {
                    let comment = format!(
                        "{label} window=({:e},{:e})+-{:e} h={:e} precision={}",
                        center.0,
                        center.1,
                        half,
                        pixel,
                        prec.bits()
                    );
                    Graymap::rasterize(&points, center, half, half, pixel, comment)?.encode(cli.binary)
                }
                _ => {
                    let mut table = CsvTable::new(["re", "im"]);
                    for (x, y) in &points {
                        table.push(vec![format!("{x:e}"), format!("{y:e}")]);
                    }
                    table.render().into_bytes()
                }
            };
            Ok(Outcome { body, summary })
        }
    }
}

/// Backward-orbit length for a surgery run: as deep as the precision schedule
/// allows (at most 60 cycles) and never shorter than the deepest entry needs.
fn default_steps(data: &MisiurewiczData, n_to: usize) -> usize {
    let per_cycle = 2.0 * data.mu.abs_f64().log2();
    let budget = (f64::from(data.prec.bits().saturating_sub(64)) / per_cycle).floor() as usize;
    data.p * budget.min(60).max(n_to + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("pcf-surgery").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ranges() {
        assert_eq!(index_range("3..9"), Ok(IndexRange { from: 3, to: 9 }));
        assert_eq!(index_range("3..=9"), Ok(IndexRange { from: 3, to: 9 }));
        assert_eq!(index_range("4"), Ok(IndexRange { from: 4, to: 4 }));
        assert!(index_range("3..2").is_err());
        assert!(index_range("a..2").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["skinning-table", "--n", "3..2"]).0, 2);
        assert_eq!(run_args(&["--precision-bits", "40", "skinning-table", "--n", "3..4"]).0, 2);
        assert_eq!(run_args(&["--format", "pgm", "skinning-table", "--n", "3..4"]).0, 2);
        assert_eq!(run_args(&["nosuch"]).0, 2);
    }

    #[test]
    fn numeric_errors_name_the_variant() {
        let (code, _, err) = run_args(&["misiurewicz", "--k", "0", "--p", "1", "--seed", "-1.9"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("InvalidArgument"), "{err}");
    }

    #[test]
    fn tip_summary() {
        let (code, out, err) = run_args(&["misiurewicz", "--k", "2", "--p", "1", "--seed", "-1.9"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.starts_with("quantity,re,im\nc,-2.0"), "{out}");
        assert!(err.contains("mu=4.0") && err.contains("nu=-2.66666"), "{err}");
    }

    #[test]
    fn default_steps_respect_the_budget() {
        let prec = Precision::new(128).unwrap();
        let data = solve_misiurewicz(2, 1, &BigComplex::new(prec, -1.9, 0.0), prec).unwrap();
        // (128 - 64) / 4 = 16 cycles
        assert_eq!(default_steps(&data, 8), 16);
        assert_eq!(default_steps(&data, 20), 22);
    }
}
