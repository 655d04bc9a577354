//! `poisson-audit`: leading-order wave-trace analysis of lens spaces and flat
//! manifolds.
//!
//! Exit codes: 0 normal, 1 input error, 2 notable finding (a `ZERO`
//! decision, a search hit, or a lemma mismatch).

mod reports;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use poisson_audit_core::exactnum::is_prime;
use poisson_audit_core::flat::{
    cleanliness_diagnostic, length_spectrum_flat, validate, BieberbachGroup,
};
use poisson_audit_core::lens::{components, is_primitive, length_spectrum, LengthKind, LensSpace};
use poisson_audit_core::morse::{index_full, index_short};
use poisson_audit_core::oracle::{
    cleanliness_check, default_grid, laplace_multiplicities, numeric_dg, peak_report,
    required_cutoff, smoothed_trace, PeakThresholds,
};
use poisson_audit_core::wavetrace::{
    cancellation_decision, cancellation_search, dg_scalar, leading_sum, lemma_check, Decision,
    ZERO_LABEL,
};

use reports::*;

#[derive(Parser, Debug)]
#[command(name = "poisson-audit", version, about)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "POISSON_AUDIT_THREADS")]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lens spaces L(q; p_1, ..., p_n).
    #[command(subcommand)]
    Lens(LensCommand),
    /// Smoothed wave trace from Laplace multiplicities.
    #[command(subcommand)]
    Spectrum(SpectrumCommand),
    /// Flat manifolds from Bieberbach data.
    #[command(subcommand)]
    Flat(FlatCommand),
    /// Numeric cross-checks of the closed forms.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args, Debug)]
struct LensArgs {
    #[arg(long)]
    q: u32,
    /// Comma-separated exponents.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    p: Vec<i64>,
}

impl LensArgs {
    fn lens(&self) -> Result<LensSpace> {
        Ok(LensSpace::new(self.q, &self.p)?)
    }
}

#[derive(Subcommand, Debug)]
enum LensCommand {
    /// Every length up to `max_winding + 1` periods: components, indices,
    /// densities, leading sums and decisions.
    Analyze {
        #[command(flatten)]
        lens: LensArgs,
        #[arg(long, default_value_t = 0)]
        max_winding: u32,
    },
    /// Exact cancellation search over `L(q; 1, p_2, ..., p_n)`.
    CancelSearch {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q_min: u32,
        #[arg(long)]
        q_max: u32,
        #[arg(long)]
        prime_only: bool,
    },
    /// The cosine identity for every odd prime `q <= q_max`.
    LemmaCheck {
        #[arg(long)]
        q_max: u32,
    },
}

#[derive(Subcommand, Debug)]
enum SpectrumCommand {
    /// `S_eps(t)` on a uniform grid of `(0, 2 pi]` with a peak report.
    Trace {
        #[command(flatten)]
        lens: LensArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.03,0.02")]
        epsilons: Vec<f64>,
        /// Eigenvalue cutoff; defaults to the smallest sufficient one.
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long, default_value_t = 420)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        window: usize,
        #[arg(long, default_value_t = 1.0)]
        growth: f64,
        #[arg(long, default_value_t = 1.5)]
        control_factor: f64,
        /// Also write the peak report as JSON here.
        #[arg(long)]
        peaks: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum FlatCommand {
    /// Validate, enumerate lengths, and check cleanliness.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        max_length: f64,
    },
}

#[derive(Args, Debug)]
struct ComponentArgs {
    #[command(flatten)]
    lens: LensArgs,
    #[arg(long)]
    l: u32,
    #[arg(long, default_value_t = 0)]
    winding: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Numeric density against the closed form.
    Dg(ComponentArgs),
    /// Nullity of `Id - dP` at sampled points.
    Clean {
        #[command(flatten)]
        args: ComponentArgs,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

fn lens_analyze(lens: &LensSpace, max_winding: u32) -> Result<LensAnalysis> {
    let max = lens.period() * (max_winding + 1) as f64;
    let mut lengths = Vec::new();
    for entry in length_spectrum(lens, max) {
        let sum = leading_sum(lens, &entry)?;
        let decision = cancellation_decision(&sum);
        let full_index = match entry.kind {
            LengthKind::Full { multiple } => Some(index_full(lens, multiple)?),
            LengthKind::Short { .. } => None,
        };
        let comps = entry
            .components
            .iter()
            .map(|c| {
                Ok(ComponentReport {
                    morse: index_short(lens, c)?,
                    dg: dg_scalar(lens, c)?,
                    primitive: if c.winding == 0 {
                        Some(is_primitive(lens, c)?)
                    } else {
                        None
                    },
                    component: c.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        lengths.push(LengthReport {
            tau_index: entry.tau.index,
            tau: entry.tau.value(),
            kind: entry.kind,
            components: comps,
            full_index,
            leading_sum: sum,
            decision,
            label: (decision == Decision::Zero).then(|| ZERO_LABEL.to_string()),
        });
    }
    let zero_count = lengths
        .iter()
        .filter(|r| r.decision == Decision::Zero)
        .count();
    Ok(LensAnalysis {
        lens: lens.clone(),
        max_winding,
        lengths,
        zero_count,
    })
}

fn lemma_table(q_max: u32) -> Result<LemmaTable> {
    let mut rows = Vec::new();
    for q in (3..=q_max).filter(|&q| is_prime(q)) {
        for p in 1..q as i64 {
            let vanishing_l: Vec<u32> = (1..q)
                .filter_map(|l| match lemma_check(q, p, l) {
                    Ok(true) => Some(Ok(l)),
                    Ok(false) => None,
                    Err(e) => Some(Err(e)),
                })
                .collect::<std::result::Result<_, _>>()?;
            rows.push(LemmaRow {
                q,
                p,
                holds: vanishing_l.len() == q as usize - 1,
                vanishing_l,
                p_is_plus_minus_one: p == 1 || p == q as i64 - 1,
            });
        }
    }
    let mismatches = rows
        .iter()
        .filter(|r| r.holds != r.p_is_plus_minus_one)
        .count();
    Ok(LemmaTable {
        q_max,
        rows,
        mismatches,
    })
}

fn trace(
    lens: &LensSpace,
    epsilons: &[f64],
    cutoff: Option<usize>,
    grid_points: usize,
    thresholds: PeakThresholds,
) -> Result<TraceReport> {
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) {
        bail!("epsilons must be positive");
    }
    let smallest = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = cutoff.unwrap_or_else(|| required_cutoff(lens.n(), smallest));
    let table = laplace_multiplicities(lens.q(), lens.original_p(), cutoff)?;
    let grid = default_grid(grid_points);
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let traces = sorted
        .iter()
        .map(|&e| {
            let points = smoothed_trace(&table, e, &grid)?
                .into_iter()
                .map(|(t, s)| TracePoint {
                    t,
                    re: s.re,
                    im: s.im,
                    abs: s.norm(),
                })
                .collect();
            Ok(TraceSeries { epsilon: e, points })
        })
        .collect::<Result<Vec<_>>>()?;
    let peaks = peak_report(
        &table,
        &predicted_lengths(lens.q()),
        &sorted,
        grid_points,
        thresholds,
    )?;
    Ok(TraceReport {
        lens: lens.clone(),
        cutoff,
        grid_points,
        traces,
        peak_report: peaks,
    })
}

fn flat_analyze(input: &PathBuf, max_length: f64) -> Result<FlatAnalysis> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let group = BieberbachGroup::from_json(&text)?;
    let validation = validate(&group);
    if !validation.valid {
        let msgs: Vec<String> = validation
            .failures()
            .map(|c| format!("{}: {} ({})", c.subject, c.name, c.detail))
            .collect();
        bail!("invalid Bieberbach group: {}", msgs.join("; "));
    }
    let lengths = length_spectrum_flat(&group, max_length)?;
    let cleanliness = lengths
        .iter()
        .map(|e| cleanliness_diagnostic(&group, e))
        .collect();
    Ok(FlatAnalysis {
        validation,
        max_length,
        lengths,
        cleanliness,
    })
}

fn oracle_dg(a: &ComponentArgs) -> Result<DgReport> {
    let lens = a.lens.lens()?;
    let comps = components(&lens, a.l, a.winding)?;
    let rows = comps
        .iter()
        .map(|c| {
            let closed_form = dg_scalar(&lens, c)?.float_value;
            let numeric = numeric_dg(&lens, c, a.seed)?;
            Ok(DgRow {
                class: c.class_index,
                orientation: c.orientation.to_string(),
                m: c.m(),
                closed_form,
                numeric,
                relative_error: (numeric - closed_form).abs() / closed_form,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DgReport {
        tau: comps[0].tau_value(),
        max_relative_error: rows.iter().map(|r| r.relative_error).fold(0.0, f64::max),
        lens,
        l: a.l,
        winding: a.winding,
        rows,
    })
}

fn oracle_clean(a: &ComponentArgs, samples: usize) -> Result<CleanReport> {
    let lens = a.lens.lens()?;
    let rows = components(&lens, a.l, a.winding)?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(CleanRow {
                class: c.class_index,
                orientation: c.orientation.to_string(),
                report: cleanliness_check(&lens, c, samples, a.seed.wrapping_add(i as u64))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CleanReport {
        pass: rows.iter().all(|r| r.report.pass),
        lens,
        l: a.l,
        winding: a.winding,
        rows,
    })
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit<R: Render>(cli: &Cli, report: &R) -> Result<bool> {
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Csv => report.csv(),
    };
    write_output(cli.out.as_ref(), &text)?;
    Ok(report.notable())
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match &cli.command {
        Command::Lens(LensCommand::Analyze { lens, max_winding }) => {
            emit(cli, &lens_analyze(&lens.lens()?, *max_winding)?)
        }
        Command::Lens(LensCommand::CancelSearch {
            n,
            q_min,
            q_max,
            prime_only,
        }) => emit(cli, &cancellation_search(*n, *q_min, *q_max, *prime_only)?),
        Command::Lens(LensCommand::LemmaCheck { q_max }) => emit(cli, &lemma_table(*q_max)?),
        Command::Spectrum(SpectrumCommand::Trace {
            lens,
            epsilons,
            cutoff,
            grid,
            window,
            growth,
            control_factor,
            peaks,
        }) => {
            let thresholds = PeakThresholds {
                window: *window,
                growth: *growth,
                control_factor: *control_factor,
            };
            let report = trace(&lens.lens()?, epsilons, *cutoff, *grid, thresholds)?;
            if let Some(path) = peaks {
                let text = serde_json::to_string_pretty(&report.peak_report)? + "\n";
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(cli, &report)
        }
        Command::Flat(FlatCommand::Analyze { input, max_length }) => {
            emit(cli, &flat_analyze(input, *max_length)?)
        }
        Command::Oracle(OracleCommand::Dg(args)) => emit(cli, &oracle_dg(args)?),
        Command::Oracle(OracleCommand::Clean { args, samples }) => {
            emit(cli, &oracle_clean(args, *samples)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
