use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tweezer_pca::config::RunConfig;
use tweezer_pca::ensemble::{plan, reservoir_range, run_trials, EnsembleStats, SweepAxis};
use tweezer_pca::fit::FitModel;
use tweezer_pca::lattice::GridSpec;
use tweezer_pca::render::render_board;
use tweezer_pca::report::{fit_footer, read_columns, stats_csv, trials_csv};
use tweezer_pca::schedule::export_schedule;
use tweezer_pca::{Occupancy, Parallelism, Protocol};

/// Default base directory for output files.
const OUT_ENV: &str = "TWEEZER_PCA_OUT";

#[derive(Parser)]
#[command(name = "tweezer-pca", version, about = "Parallel compression planning for atom arrays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an ensemble of trials at one grid point.
    Run(ConfigArgs),
    /// Run ensembles over a grid of target sizes or reservoir sizes.
    Sweep(SweepArgs),
    /// Refit two columns of a stored CSV.
    Fit(FitArgs),
    /// Plan a stored board and export its move schedule as JSON.
    Schedule(ScheduleArgs),
    /// Print a stored board.
    Render(RenderArgs),
}

/// Every config key as a flag. Flags override the config file.
#[derive(Args)]
struct ConfigArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target side length.
    #[arg(long = "L", value_name = "L")]
    target_side: Option<String>,
    /// default | saturated | explicit grid side.
    #[arg(long)]
    reservoir: Option<String>,
    /// Loading probability.
    #[arg(long)]
    p: Option<String>,
    /// full | partial | single.
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    continuous_release: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    t1_us: Option<String>,
    #[arg(long)]
    l_um: Option<String>,
    #[arg(long)]
    v_um_per_ms: Option<String>,
    /// Base directory for relative output paths [env: TWEEZER_PCA_OUT].
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    trials_csv: Option<String>,
    #[arg(long)]
    stats_csv: Option<String>,
    #[arg(long)]
    schedule_json: Option<String>,
    /// Record planning wall-clock time in the CSVs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    timing: Option<String>,
    /// all | success
    #[arg(long)]
    conditioning: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Comma-separated target sides, each with the configured reservoir rule.
    #[arg(long, conflicts_with = "lprime_grid")]
    grid: Option<String>,
    /// Comma-separated grid sides at the configured L, or `auto` for the
    /// default-to-saturated range.
    #[arg(long = "lprime-grid")]
    lprime_grid: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with a header row.
    input: PathBuf,
    #[arg(long, default_value = "N")]
    x: String,
    #[arg(long, default_value = "M_mean")]
    y: String,
    /// linear_sqrt | three_halves | power_law | exp_decay
    #[arg(long, default_value = "linear_sqrt")]
    model: String,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Board snapshot file (rows of 0/1).
    #[arg(long)]
    board: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderStage {
    Initial,
    Compressed,
    Final,
}

#[derive(Args)]
struct RenderArgs {
    /// Board snapshot file (rows of 0/1).
    board: PathBuf,
    /// Target side; the whole board when omitted.
    #[arg(long = "L", value_name = "L")]
    target_side: Option<usize>,
    #[arg(long, value_enum, default_value = "initial")]
    stage: RenderStage,
    #[arg(long, default_value = "full")]
    protocol: String,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<tweezer_pca::Error> for Failure {
    fn from(e: tweezer_pca::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

type CliResult<T> = std::result::Result<T, Failure>;

impl ConfigArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                RunConfig::parse(&text).map_err(usage)?
            }
            None => RunConfig::default(),
        };
        let flags = [
            ("L", &self.target_side),
            ("reservoir", &self.reservoir),
            ("p", &self.p),
            ("protocol", &self.protocol),
            ("continuous_release", &self.continuous_release),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("t1_us", &self.t1_us),
            ("l_um", &self.l_um),
            ("v_um_per_ms", &self.v_um_per_ms),
            ("out_dir", &self.out_dir),
            ("trials_csv", &self.trials_csv),
            ("stats_csv", &self.stats_csv),
            ("schedule_json", &self.schedule_json),
            ("timing", &self.timing),
            ("conditioning", &self.conditioning),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(usage)?;
            }
        }
        Ok(cfg)
    }
}

fn fallback_dir() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn write_out(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn summary_line(s: &EnsembleStats, tm_t: f64) -> String {
    let (m, d) = (s.get("M"), s.get("D"));
    format!(
        "N={} Lprime={} r={:.3} protocol={} trials={} M={:.2}±{:.2} D={:.2}±{:.2} T_us={:.1} failure_rate={:.4}",
        s.n_targets,
        s.grid_side,
        s.ratio,
        s.protocol,
        s.trials,
        m.mean,
        m.std,
        d.mean,
        d.std,
        tm_t,
        s.failure_rate()
    )
}

fn cmd_run(args: &ConfigArgs) -> CliResult<()> {
    let cfg = args.resolve()?;
    let spec = cfg.validate().map_err(usage)?;
    let tm = cfg.time_model().map_err(usage)?;
    let protocol = cfg.protocol();
    let base = fallback_dir();

    let trials = run_trials(&spec, protocol, cfg.trials, cfg.seed);
    let stats = EnsembleStats::from_trials_conditioned(&spec, protocol, &trials, &tm, cfg.conditioning);
    let trial_text = trials_csv(&[(spec, protocol, trials)], &tm, cfg.timing)?;
    write_out(&cfg.resolve(&cfg.trials_csv, &base), &trial_text)?;
    write_out(&cfg.resolve(&cfg.stats_csv, &base), &stats_csv(std::slice::from_ref(&stats), &[], cfg.timing)?)?;
    if let Some(path) = &cfg.schedule_json {
        let board = tweezer_pca::loading::load_stochastic(&spec, cfg.seed);
        let p = plan(&board, &spec, protocol);
        write_out(&cfg.resolve(path, &base), &export_schedule(&p.log, &spec, &tm).to_json())?;
    }
    println!("{}", summary_line(&stats, stats.get("T_us").mean));
    Ok(())
}

fn parse_grid(text: &str) -> CliResult<Vec<usize>> {
    let values: Vec<usize> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("invalid grid value `{s}`"))))
        .collect::<CliResult<_>>()?;
    if values.is_empty() {
        return Err(usage("grid is empty"));
    }
    Ok(values)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let cfg = args.cfg.resolve()?;
    let tm = cfg.time_model().map_err(usage)?;
    if cfg.trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    let axis = match (&args.grid, &args.lprime_grid) {
        (Some(g), None) => SweepAxis::TargetSides {
            sides: parse_grid(g)?,
            reservoir: cfg.reservoir,
        },
        (None, Some(g)) => {
            let grid_sides = if g.trim() == "auto" {
                reservoir_range(cfg.target_side, cfg.fill).map_err(usage)?
            } else {
                parse_grid(g)?
            };
            SweepAxis::GridSides {
                target_side: cfg.target_side,
                grid_sides,
            }
        }
        _ => return Err(usage("sweep needs exactly one of --grid or --lprime-grid")),
    };
    let specs = axis.specs(cfg.fill).map_err(usage)?;
    let protocol = cfg.protocol();
    let base = fallback_dir();

    let mut groups = Vec::with_capacity(specs.len());
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let trials = run_trials(&spec, protocol, cfg.trials, cfg.seed);
        let stats = EnsembleStats::from_trials_conditioned(&spec, protocol, &trials, &tm, cfg.conditioning);
        println!("{}", summary_line(&stats, stats.get("T_us").mean));
        rows.push(stats);
        groups.push((spec, protocol, trials));
    }
    let column = |x: &dyn Fn(&EnsembleStats) -> f64, q: &str| -> Vec<(f64, f64)> {
        rows.iter().map(|s| (x(s), s.get(q).mean)).collect()
    };
    let footer = match axis {
        SweepAxis::TargetSides { .. } => {
            let n = |s: &EnsembleStats| s.n_targets as f64;
            vec![
                fit_footer(FitModel::LinearSqrt, "N", "M_mean", &column(&n, "M")),
                fit_footer(FitModel::PowerLaw, "N", "D_post_mean", &column(&n, "D_post")),
            ]
        }
        SweepAxis::GridSides { .. } => {
            let r = |s: &EnsembleStats| s.ratio;
            vec![
                fit_footer(FitModel::ExpDecay, "r", "M_post_mean", &column(&r, "M_post")),
                fit_footer(FitModel::ExpDecay, "r", "D_post_mean", &column(&r, "D_post")),
            ]
        }
    };
    for line in &footer {
        println!("{line}");
    }
    write_out(&cfg.resolve(&cfg.trials_csv, &base), &trials_csv(&groups, &tm, cfg.timing)?)?;
    write_out(&cfg.resolve(&cfg.stats_csv, &base), &stats_csv(&rows, &footer, cfg.timing)?)?;
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let model: FitModel = args.model.parse().map_err(usage)?;
    let file = fs::File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let points = read_columns(file, &args.x, &args.y).map_err(usage)?;
    let line = fit_footer(model, &args.x, &args.y, &points);
    println!("{}", line.trim_start_matches("# "));
    if line.contains(" unavailable: ") {
        return Err(Failure::Runtime(anyhow::anyhow!("fit failed")));
    }
    Ok(())
}

fn read_board(path: &Path) -> CliResult<Occupancy> {
    let text = fs::read_to_string(path).with_context(|| format!("reading board {}", path.display()))?;
    let occ = Occupancy::from_snapshot(&text).map_err(usage)?;
    if occ.width() != occ.height() || occ.width() == 0 {
        return Err(usage(format!(
            "board must be square, got {}x{}",
            occ.height(),
            occ.width()
        )));
    }
    Ok(occ)
}

fn cmd_schedule(args: &ScheduleArgs) -> CliResult<()> {
    let cfg = args.cfg.resolve()?;
    let tm = cfg.time_model().map_err(usage)?;
    let board = read_board(&args.board)?;
    let spec = GridSpec::new(cfg.target_side, board.width(), cfg.fill).map_err(usage)?;
    let p = plan(&board, &spec, cfg.protocol());
    let json = export_schedule(&p.log, &spec, &tm).to_json();
    match &args.output {
        Some(path) => write_out(path, &json)?,
        None => println!("{json}"),
    }
    if !p.unfilled.is_empty() {
        eprintln!("{} target vacancies left unfilled", p.unfilled.len());
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> CliResult<()> {
    let board = read_board(&args.board)?;
    let spec = GridSpec::new(args.target_side.unwrap_or(board.width()), board.width(), 0.5).map_err(usage)?;
    let parallelism: Parallelism = args.protocol.parse().map_err(usage)?;
    let shown = match args.stage {
        RenderStage::Initial => board,
        RenderStage::Compressed => plan(&board, &spec, Protocol::new(parallelism)).after_compression,
        RenderStage::Final => plan(&board, &spec, Protocol::new(parallelism)).final_board,
    };
    println!("{}", render_board(&shown, &spec));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Fit(a) => cmd_fit(a),
        Cmd::Schedule(a) => cmd_schedule(a),
        Cmd::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
