//! `nsv` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{DatumFile, RunConfig};
use crate::decay::{estimate_decay_character, estimate_decay_character_in, ContinuumDatum, Family};
use crate::error::{NsvError, Result};
use crate::fit::{fit_decay_exponent, log_spaced};
use crate::linear::{linear_norm_series, NormSeries};
use crate::manifest::Manifest;
use crate::solver::{run_simulation, TrajectoryRecord};
use crate::spectral::snapshot::{read_snapshot, write_snapshot};
use crate::spectral::PhysicsParams;
use crate::verify::{run_verification, Predicted, VerificationPlan, VerificationReport};

/// Exit status when a verification report contains an INCONSISTENT case.
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nsv", version, about = "Decay-rate laboratory for the Navier-Stokes-Voigt equations")]
pub struct Cli {
    /// Directory for outputs written without an explicit path.
    #[arg(long, global = true, env = "NSV_OUTPUT_DIR", default_value = "nsv-out")]
    pub output_dir: PathBuf,

    /// Seed for sampled phase patterns.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    PowerLaw,
    Annulus,
    CriticalLog,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a datum description file.
    GenDatum {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate r* of a datum and print it as JSON.
    DecayCharacter {
        datum: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Radius window for the slope fit.
        #[arg(long, num_args = 2, value_names = ["RHO_MIN", "RHO_MAX"])]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuum norm series of the linear evolution, as CSV.
    EvolveLinear {
        datum: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 16)]
        per_decade: usize,
        /// Also fit the decay exponent of h1alpha_sq over this window.
        #[arg(long, num_args = 2, value_names = ["T0", "T1"])]
        fit_window: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pseudo-spectral solver from a run file.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a verification plan: `default`, `quick`, or a JSON/TOML plan file.
    Verify {
        #[arg(long, default_value = "default")]
        plan: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render plot-ready data from a series CSV, report, trajectory or snapshot.
    Report {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_env("NSV_LOG").try_init();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            let body = serde_json::json!({ "error": error_kind(&e), "message": e.to_string() });
            eprintln!("{body}");
            e.exit_code()
        }
    }
}

fn error_kind(e: &NsvError) -> &'static str {
    match e {
        NsvError::Validation(_) => "validation",
        NsvError::Domain(_) => "domain",
        NsvError::Structural(_) => "structural",
        NsvError::Numerical { .. } => "numerical",
        NsvError::Instability { .. } => "instability",
        NsvError::Plan(_) => "plan",
        NsvError::Io(_) => "io",
        NsvError::Parse(_) => "parse",
    }
}

fn output_path(cli: &Cli, explicit: &Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
    let path = match explicit {
        Some(p) => p.clone(),
        None => cli.output_dir.join(default_name),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(path)
}

/// `dir/stem.manifest.json` next to a single-file output.
fn manifest_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.manifest.json"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn pair(v: &Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.as_ref().map(|w| (w[0], w[1]))
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::GenDatum { family, n, q, kappa, delta, out } => {
            let family = match family {
                FamilyArg::PowerLaw => Family::PowerLaw {
                    q: q.ok_or_else(|| NsvError::validation("power-law needs --q"))?,
                    kappa: *kappa,
                },
                FamilyArg::Annulus => Family::Annulus {
                    delta: delta.ok_or_else(|| NsvError::validation("annulus needs --delta"))?,
                    kappa: *kappa,
                },
                FamilyArg::CriticalLog => Family::CriticalLog { kappa: *kappa },
            };
            let datum = ContinuumDatum::new(*n, family)?.with_seed(cli.seed.unwrap_or(0));
            let file = DatumFile::new(datum);
            let path = output_path(cli, out, "datum.toml")?;
            file.save(&path)?;
            let mut m = Manifest::new("gen-datum", cli.seed, serde_json::to_value(&file)?);
            m.add_output(&path);
            m.write(&manifest_path(&path))?;
            emit(&path.display().to_string());
            Ok(0)
        }
        Command::DecayCharacter { datum, s, window, out } => {
            let file = DatumFile::load(datum)?;
            let estimate = match pair(window) {
                Some(w) => estimate_decay_character_in(&file.datum, *s, w)?,
                None => estimate_decay_character(&file.datum, *s)?,
            };
            let text = serde_json::to_string_pretty(&estimate)?;
            let path = output_path(cli, out, "decay_character.json")?;
            std::fs::write(&path, text.clone() + "\n")?;
            let mut m = Manifest::new("decay-character", cli.seed, serde_json::json!({ "s": s, "window": pair(window) }));
            m.add_input(datum)?;
            m.add_output(&path);
            m.write(&manifest_path(&path))?;
            emit(&text);
            Ok(0)
        }
        Command::EvolveLinear { datum, alpha, nu, t_min, t_max, per_decade, fit_window, out } => {
            let file = DatumFile::load(datum)?;
            let params = PhysicsParams::new(*alpha, *nu, file.datum.n)?;
            if !(*t_min > 0.0 && t_max > t_min && *per_decade > 0) {
                return Err(NsvError::validation("need 0 < t-min < t-max and per-decade > 0"));
            }
            let times = log_spaced(*t_min, *t_max, *per_decade);
            let series = linear_norm_series(&file.datum, &times, &params)?;
            let path = output_path(cli, out, "linear_series.csv")?;
            series.save(&path)?;
            let mut m = Manifest::new(
                "evolve-linear",
                cli.seed,
                serde_json::json!({ "params": params, "t_min": t_min, "t_max": t_max, "per_decade": per_decade }),
            );
            m.add_input(datum)?;
            m.add_output(&path);
            m.write(&manifest_path(&path))?;
            if let Some(w) = pair(fit_window) {
                let fit = fit_decay_exponent(&series.times, &series.h1alpha_sq, w)?;
                emit(&serde_json::to_string_pretty(&fit)?);
            } else {
                emit(&path.display().to_string());
            }
            Ok(0)
        }
        Command::Solve { config, out_dir } => solve(cli, config, out_dir),
        Command::Verify { plan, jobs, out } => {
            let (plan_value, input) = load_plan(plan)?;
            if *jobs == 0 {
                return Err(NsvError::validation("--jobs must be at least 1"));
            }
            let report = run_verification(&plan_value, *jobs)?;
            let path = output_path(cli, out, "report.json")?;
            std::fs::write(&path, report.to_json()? + "\n")?;
            let mut m = Manifest::new("verify", cli.seed, serde_json::to_value(&plan_value)?);
            if let Some(p) = input {
                m.add_input(&p)?;
            }
            m.add_output(&path);
            m.write(&manifest_path(&path))?;
            let mut lines = Vec::new();
            for c in &report.cases {
                let measured = c.measured.map_or("-".into(), |m| format!("{m:.4}"));
                let predicted = match c.predicted {
                    Predicted::Exponent(p) => format!("{p:.4}"),
                    Predicted::Sentinel(s) => format!("{s:?}"),
                };
                lines.push(format!("{:<24} {:<17} predicted {:<20} measured {:<10} {:?}", c.case_id, format!("{:?}", c.mode), predicted, measured, c.verdict));
            }
            lines.push(format!("report: {}", path.display()));
            emit(&lines.join("\n"));
            Ok(if report.any_inconsistent() { EXIT_INCONSISTENT } else { 0 })
        }
        Command::Report { input, out } => report(cli, input, out),
    }
}

fn load_plan(spec: &str) -> Result<(VerificationPlan, Option<PathBuf>)> {
    if matches!(spec, "default" | "quick") {
        return Ok((VerificationPlan::by_name(spec)?, None));
    }
    let path = PathBuf::from(spec);
    if !path.exists() {
        return Err(NsvError::validation(format!("plan '{spec}' is neither a built-in name nor a file")));
    }
    let text = std::fs::read_to_string(&path)?;
    let plan: VerificationPlan = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text)?
    } else {
        serde_json::from_str(&text)?
    };
    Ok((plan, Some(path)))
}

/// Index entry for a stored snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub cumulative_l2: f64,
    pub file: PathBuf,
}

fn solve(cli: &Cli, config: &Path, out_dir: &Option<PathBuf>) -> Result<i32> {
    let run = RunConfig::load(config)?;
    let datum = DatumFile::load(&run.datum.file)?.datum;
    let datum = match cli.seed {
        Some(s) => datum.with_seed(s),
        None => datum,
    };
    let solver_config = run.solver_config()?;
    let initial = run.initial_field(&datum)?;
    let traj = run_simulation(&solver_config, &initial)?;

    let dir = out_dir.clone().unwrap_or_else(|| cli.output_dir.join("solve"));
    std::fs::create_dir_all(&dir)?;
    let mut m = Manifest::new(
        "solve",
        cli.seed,
        serde_json::json!({ "run": serde_json::to_value(&run)?, "datum": datum }),
    );
    m.add_input(config)?;
    m.add_input(&run.datum.file)?;

    let traj_path = dir.join("trajectory.json");
    write_json(&traj_path, &traj)?;
    m.add_output(&traj_path);
    let series_path = dir.join("series.csv");
    traj.series.save(&series_path)?;
    m.add_output(&series_path);
    if let Some(diff) = &traj.difference {
        let p = dir.join("difference.csv");
        diff.save(&p)?;
        m.add_output(&p);
    }
    let mut index = Vec::new();
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let name = PathBuf::from(format!("snapshot_{i:03}.bin"));
        let p = dir.join(&name);
        let mut w = std::io::BufWriter::new(std::fs::File::create(&p)?);
        write_snapshot(&mut w, &snap.field, &traj.params)?;
        w.flush()?;
        index.push(SnapshotEntry { t: snap.t, cumulative_l2: snap.cumulative_l2, file: name });
        m.add_output(&p);
    }
    if !index.is_empty() {
        let p = dir.join("snapshots.json");
        write_json(&p, &index)?;
        m.add_output(&p);
    }
    m.write(&dir.join("manifest.json"))?;
    for w in &traj.warnings {
        log::warn!("{w}");
    }
    emit(&format!("steps {} samples {} -> {}", traj.steps, traj.series.len(), dir.display()));
    Ok(0)
}

fn local_slopes(series: &NormSeries) -> Vec<Option<f64>> {
    let t = &series.times;
    let e = &series.h1alpha_sq;
    (0..t.len())
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(t.len() - 1));
            (a != b && t[a] > 0.0 && e[a] > 0.0 && e[b] > 0.0).then(|| -(e[b] / e[a]).ln() / (t[b] / t[a]).ln())
        })
        .collect()
}

fn series_dat(series: &NormSeries) -> String {
    let mut s = String::from("# t l2_sq h1dot_sq h1alpha_sq local_slope\n");
    for (i, slope) in local_slopes(series).into_iter().enumerate() {
        let n = series.norms_at(i);
        let slope = slope.map_or("nan".to_string(), |v| format!("{v:e}"));
        s.push_str(&format!("{:e} {:e} {:e} {:e} {slope}\n", series.times[i], n.l2_sq, n.h1dot_sq, n.h1alpha_sq));
    }
    s
}

fn report(cli: &Cli, input: &Path, out: &Option<PathBuf>) -> Result<i32> {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    let ext = input.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_default();
    let (text, default_name) = match ext.as_str() {
        "csv" => (series_dat(&NormSeries::load(input)?), format!("{stem}.dat")),
        "bin" => {
            let mut r = std::io::BufReader::new(std::fs::File::open(input)?);
            let (field, _) = read_snapshot(&mut r)?;
            let grid = *field.grid();
            // energy per integer shell |m| ∈ [j − 1/2, j + 1/2)
            let shells = grid.points_per_dim;
            let mut energy = vec![0.0; shells];
            for idx in 0..grid.len() {
                let m = grid.integer_wavevector(idx);
                let r = ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt().round() as usize;
                if r < shells {
                    energy[r] += field.coeff(idx).iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.volume();
                }
            }
            let mut s = String::from("# k l2_sq_shell\n");
            for (j, e) in energy.iter().enumerate().filter(|(_, e)| **e > 0.0) {
                s.push_str(&format!("{:e} {e:e}\n", j as f64 * grid.base_wavenumber()));
            }
            (s, format!("{stem}_spectrum.dat"))
        }
        "json" => {
            let raw = std::fs::read_to_string(input)?;
            if let Ok(rep) = serde_json::from_str::<VerificationReport>(&raw) {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["case_id", "mode", "predicted", "measured", "residual", "verdict", "t0", "t1", "trustworthy_time"])?;
                for c in &rep.cases {
                    let predicted = match c.predicted {
                        Predicted::Exponent(p) => p.to_string(),
                        Predicted::Sentinel(s) => serde_json::to_value(s)?.as_str().unwrap_or_default().to_string(),
                    };
                    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                    w.write_record([
                        c.case_id.clone(),
                        serde_json::to_value(c.mode)?.as_str().unwrap_or_default().to_string(),
                        predicted,
                        opt(c.measured),
                        opt(c.residual),
                        serde_json::to_value(c.verdict)?.as_str().unwrap_or_default().to_string(),
                        opt(c.window.map(|w| w.0)),
                        opt(c.window.map(|w| w.1)),
                        opt(c.trustworthy_time),
                    ])?;
                }
                let bytes = w.into_inner().map_err(|e| NsvError::Parse(e.to_string()))?;
                (String::from_utf8(bytes).map_err(|e| NsvError::Parse(e.to_string()))?, format!("{stem}_summary.csv"))
            } else if let Ok(traj) = serde_json::from_str::<TrajectoryRecord>(&raw) {
                let mut s = String::from("# t h1alpha_sq balance_residual max_divergence cumulative_l2\n");
                for i in 0..traj.series.len() {
                    let bal = traj.balance_residual.get(i).copied().unwrap_or(f64::NAN);
                    s.push_str(&format!(
                        "{:e} {:e} {bal:e} {:e} {:e}\n",
                        traj.series.times[i], traj.series.h1alpha_sq[i], traj.max_divergence[i], traj.cumulative_l2[i]
                    ));
                }
                (s, format!("{stem}.dat"))
            } else {
                return Err(NsvError::validation(format!("{} is neither a report nor a trajectory", input.display())));
            }
        }
        _ => return Err(NsvError::validation(format!("cannot render '{}': expected .csv, .json or .bin", input.display()))),
    };
    let path = output_path(cli, out, &default_name)?;
    std::fs::write(&path, text)?;
    let mut m = Manifest::new("report", cli.seed, serde_json::json!({ "input": input }));
    m.add_input(input)?;
    m.add_output(&path);
    m.write(&manifest_path(&path))?;
    emit(&path.display().to_string());
    Ok(0)
}
