use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use faultloc::circuit::{LineParameters, SourceImpedance};
use faultloc::dataset::{generate_group, select_target, GroupConfig, SimulationSettings};
use faultloc::emt::{simulate_event, EventSpec};
use faultloc::pipeline::{
    estimate_record, freedman_diaconis, FaultLocationReport, LocateConfig, Locator, TakagiInput,
};
use faultloc::records::comtrade::export_comtrade;
use faultloc::records::WaveformRecord;
use faultloc::{presets, CanonicalFault, Error, FaultType};

#[derive(Parser)]
#[command(
    name = "faultloc",
    version,
    about = "Single-ended transmission-line fault location"
)]
struct Cli {
    /// Worker threads for simulation and training (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one fault event and write the terminal record.
    Simulate(SimulateArgs),
    /// Generate a data group (simulated fault library) with its manifest.
    GenGroup(GenGroupArgs),
    /// Estimate source impedance, loading, inception angle and Rf range.
    Estimate(EstimateArgs),
    /// Show the target dataset a record selects from a data group.
    Select(SelectArgs),
    /// Locate the fault in a record.
    Locate(LocateArgs),
    /// Takagi estimates at given times after the fault.
    Takagi(TakagiArgs),
    /// Histogram export of a location report's repeated predictions.
    Report(ReportArgs),
}

#[derive(Args)]
struct RecordArgs {
    /// Native record or COMTRADE `.cfg` (with its `.dat` alongside).
    #[arg(long)]
    record: PathBuf,
    /// Line parameter TOML.
    #[arg(long)]
    line: PathBuf,
    #[arg(long)]
    fault_type: FaultType,
}

#[derive(Args)]
struct SimulateArgs {
    /// Full event spec (TOML); other event flags are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Line parameter TOML (default: the 500 kV, 200 km simulation line).
    #[arg(long)]
    line: Option<PathBuf>,
    #[arg(long, default_value = "AG")]
    fault_type: FaultType,
    /// Distance from the local terminal, km.
    #[arg(long)]
    distance: Option<f64>,
    /// Fault resistance, ohm.
    #[arg(long, default_value_t = 1.0)]
    rf: f64,
    /// Fault inception angle, degrees.
    #[arg(long, default_value_t = presets::TESTING_FIA_DEG)]
    fia: f64,
    /// Remote minus local source angle, degrees.
    #[arg(long, default_value_t = presets::TESTING_LOADING_DEG)]
    loading: f64,
    /// Local source impedance as `r,x,r0,x0` (default: testing sources).
    #[arg(long)]
    zs_local: Option<String>,
    /// Remote source impedance as `r,x,r0,x0`.
    #[arg(long)]
    zs_remote: Option<String>,
    #[arg(long)]
    pre_cycles: Option<f64>,
    #[arg(long)]
    post_cycles: Option<f64>,
    /// Gaussian noise added to every channel, as a fraction of its peak.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output native record.
    #[arg(long)]
    out: PathBuf,
    /// Also export a COMTRADE pair at this path stem.
    #[arg(long)]
    comtrade: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupPreset {
    /// Simulation line on the reduced desk grid, all four fault types.
    Desk,
    /// First field line on its reduced desk grid, single line to ground.
    Field1,
}

#[derive(Args)]
struct GenGroupArgs {
    /// Group configuration TOML.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<GroupPreset>,
    /// Override the preset line.
    #[arg(long)]
    line: Option<PathBuf>,
    /// Restrict to these fault types (canonical names AG, BC, BCG, ABC).
    #[arg(long, value_delimiter = ',')]
    fault_types: Vec<FaultType>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: RecordArgs,
    #[arg(long)]
    kff: Option<f64>,
    #[arg(long)]
    margin_c: Option<f64>,
    /// Location config TOML whose estimation section is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: RecordArgs,
    /// Data group manifest (or its directory).
    #[arg(long)]
    group: PathBuf,
    #[arg(long)]
    kff: Option<f64>,
    #[arg(long)]
    margin_c: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct LocateArgs {
    #[command(flatten)]
    input: RecordArgs,
    #[arg(long)]
    group: PathBuf,
    /// Location config TOML; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; repetition r trains with seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    margin_c: Option<f64>,
    #[arg(long)]
    kff: Option<f64>,
    /// Also train on the whole group of the fault type.
    #[arg(long)]
    compare_traditional: bool,
    /// Relative error added to every line parameter.
    #[arg(long, allow_hyphen_values = true)]
    perturb: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TakagiArgs {
    #[command(flatten)]
    input: RecordArgs,
    /// Evaluation times after the fault, ms.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 30.0])]
    time_ms: Vec<f64>,
    #[arg(long)]
    kff: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Proposed,
    Traditional,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    /// Location report JSON.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::Proposed)]
    which: Which,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(2, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::GenGroup(a) => gen_group(a),
        Command::Estimate(a) => {
            let cfg = locate_config(a.config.as_deref(), a.kff, a.margin_c)?;
            let (rec, line) = load_inputs(&a.input)?;
            let est = estimate_record(&rec, a.input.fault_type, &line, &cfg.estimation)?;
            println!("{}", est.to_json()?);
            Ok(())
        }
        Command::Select(a) => {
            let cfg = locate_config(a.config.as_deref(), a.kff, a.margin_c)?;
            let (rec, line) = load_inputs(&a.input)?;
            let locator = Locator::open(&a.group, cfg)?;
            let est = estimate_record(
                &rec,
                a.input.fault_type,
                &line,
                &locator.config().estimation,
            )?;
            let sel = select_target(locator.manifest(), &est)?;
            let out = serde_json::json!({
                "samples": sel.len(),
                "selection": sel.echo(&locator.manifest().axes),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(())
        }
        Command::Locate(a) => locate(a),
        Command::Takagi(a) => {
            let (rec, line) = load_inputs(&a.input)?;
            let input = TakagiInput::prepare(&rec, a.input.fault_type, a.kff.unwrap_or(1.5))?;
            let mut out = Vec::new();
            for t in a.time_ms {
                out.push(input.evaluate(&line, t)?);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(())
        }
        Command::Report(a) => report(a),
    }
}

fn load_inputs(a: &RecordArgs) -> anyhow::Result<(WaveformRecord, LineParameters)> {
    let rec = WaveformRecord::load_any(&a.record)
        .with_context(|| format!("reading record {}", a.record.display()))?;
    let line = LineParameters::load(&a.line)
        .with_context(|| format!("reading line {}", a.line.display()))?;
    Ok((rec, line))
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", path.display()))
}

fn locate_config(
    path: Option<&Path>,
    kff: Option<f64>,
    margin_c: Option<f64>,
) -> anyhow::Result<LocateConfig> {
    let mut cfg: LocateConfig = match path {
        Some(p) => read_toml(p)?,
        None => LocateConfig::default(),
    };
    if let Some(k) = kff {
        cfg.estimation.k_ff = k;
    }
    if let Some(c) = margin_c {
        cfg.estimation.margin_c = c;
    }
    Ok(cfg)
}

fn parse_source(s: &str, omega: f64) -> anyhow::Result<SourceImpedance> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::InvalidParameter(format!("source impedance {s:?}: {e}")))?;
    if v.len() != 4 {
        return Err(
            Error::InvalidParameter(format!("source impedance {s:?}: expected r,x,r0,x0")).into(),
        );
    }
    let zs = SourceImpedance::from_complex(
        Complex64::new(v[0], v[1]),
        Complex64::new(v[2], v[3]),
        omega,
    );
    zs.validate()?;
    Ok(zs)
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let spec: EventSpec = match &a.spec {
        Some(p) => read_toml(p)?,
        None => {
            let line = match &a.line {
                Some(p) => LineParameters::load(p)?,
                None => presets::simulation_line(),
            };
            let (dl, dr) = presets::testing_sources();
            let w = line.omega();
            let zl = a
                .zs_local
                .as_deref()
                .map(|s| parse_source(s, w))
                .transpose()?
                .unwrap_or(dl);
            let zr = a
                .zs_remote
                .as_deref()
                .map(|s| parse_source(s, w))
                .transpose()?
                .unwrap_or(dr);
            let distance = a.distance.unwrap_or(line.length_km / 8.0);
            let mut spec =
                EventSpec::new(a.fault_type, distance, a.rf, a.fia, a.loading, zl, zr, line);
            if let Some(p) = a.pre_cycles {
                spec.pre_cycles = p;
            }
            if let Some(p) = a.post_cycles {
                spec.post_cycles = p;
            }
            spec
        }
    };
    let mut rec = simulate_event(&spec)?;
    if let Some(level) = a.noise {
        add_noise(&mut rec, level, a.seed);
    }
    rec.save(&a.out)?;
    if let Some(stem) = &a.comtrade {
        let (cfg, dat) = export_comtrade(&rec)?;
        fs::write(stem.with_extension("cfg"), cfg)?;
        fs::write(stem.with_extension("dat"), dat)?;
    }
    eprintln!(
        "wrote {} samples at {} Hz (fault sample {})",
        rec.len(),
        rec.sample_rate,
        spec.fault_sample()
    );
    Ok(())
}

fn add_noise(rec: &mut WaveformRecord, level: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for ch in rec.v.iter_mut().chain(rec.i.iter_mut()) {
        let peak = ch.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for x in ch.iter_mut() {
            // Box-Muller
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            *x += level * peak * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

fn gen_group(a: GenGroupArgs) -> anyhow::Result<()> {
    let mut cfg: GroupConfig = match (&a.config, a.preset) {
        (Some(p), _) => read_toml(p)?,
        (None, Some(GroupPreset::Desk)) => GroupConfig {
            line: presets::simulation_line(),
            axes: presets::desk_simulation_grid(),
            fault_types: CanonicalFault::ALL.to_vec(),
            simulation: SimulationSettings::default(),
        },
        (None, Some(GroupPreset::Field1)) => GroupConfig {
            line: presets::field_line_1(),
            axes: presets::desk_field_grid_1(),
            fault_types: vec![CanonicalFault::Slg],
            simulation: SimulationSettings::default(),
        },
        (None, None) => {
            return Err(
                Error::InvalidParameter("gen-group needs --config or --preset".into()).into(),
            )
        }
    };
    if let Some(p) = &a.line {
        cfg.line = LineParameters::load(p)?;
    }
    if !a.fault_types.is_empty() {
        cfg.fault_types = a.fault_types.iter().map(|f| f.canonical()).collect();
        cfg.fault_types.dedup();
    }
    let m = generate_group(&cfg, &a.out)?;
    eprintln!(
        "{} records in {} shards, {} quarantined",
        m.record_count,
        m.shards.len(),
        m.quarantined
    );
    Ok(())
}

fn locate(a: LocateArgs) -> anyhow::Result<()> {
    let mut cfg = locate_config(a.config.as_deref(), a.kff, a.margin_c)?;
    if let Some(s) = a.seed {
        cfg.mlp.seed = s;
    }
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if a.compare_traditional {
        cfg.compare_traditional = true;
    }
    if a.perturb.is_some() {
        cfg.perturb = a.perturb;
    }
    let (rec, line) = load_inputs(&a.input)?;
    let report = Locator::open(&a.group, cfg)?.locate(&rec, a.input.fault_type, &line)?;
    write_out(a.out.as_deref(), &report.to_json()?)
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn report(a: ReportArgs) -> anyhow::Result<()> {
    let text =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let rep: FaultLocationReport = serde_json::from_str(&text).map_err(Error::from)?;
    let loc = match a.which {
        Which::Proposed => Some(&rep.proposed),
        Which::Traditional => rep.traditional.as_ref(),
    }
    .ok_or_else(|| Error::InvalidParameter("report has no traditional result".into()))?;
    let h = freedman_diaconis(&loc.predictions)?;
    let out = match a.format {
        Format::Csv => h.to_csv(),
        Format::Json => serde_json::to_string_pretty(&h)?,
    };
    write_out(a.out.as_deref(), &out)
}
