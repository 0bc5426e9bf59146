use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ternseq::dac::{apply_dac, simulate, zoh_upsample, ChainConfig, DacModel};
use ternseq::io::{
    fmt_num, read_sequence, sequence_to_csv, sha256_hex, spectrum_to_csv, wav_bytes, OutputDigest,
    RunManifest, SequenceDoc, MANIFEST_FILE,
};
use ternseq::optimizer::{optimize_rcs, Criterion, OptimizerConfig};
use ternseq::seq::{assemble, make_ds, make_mls, make_rcs, TernarySequence};
use ternseq::spectrum::{dft, metrics, HarmonicClass, Spectrum};
use ternseq::verify::{self, FigureId, FigureOverrides, McConfig};
use ternseq::{Error, Result, TOOL_VERSION};

const SEED_ENV: &str = "TERNSEQ_SEED";

/// Ternary excitation sequences with harmonic multiples of two and three
/// suppressed.
#[derive(Debug, Parser)]
#[command(name = "ternseq", version)]
struct Cli {
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a sequence.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Spectrum and metrics of a sequence file.
    Analyze(AnalyzeArgs),
    /// Random restarts plus swap hill climbing over RCS tables.
    Optimize(OptimizeArgs),
    /// Run a sequence through the generation/acquisition chain model.
    Simulate(SimulateArgs),
    /// Verification datasets.
    Verify(VerifyArgs),
    /// Write a sequence as 16-bit PCM WAV.
    ExportAudio(ExportAudioArgs),
    /// Rerun a recorded run into `--out` and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Direct sequence from a maximum-length basic sequence.
    Ds {
        /// LFSR degree; N = 6 (2^degree - 1).
        #[arg(long, default_value_t = 3)]
        degree: u32,
        /// Initial LFSR state.
        #[arg(long, default_value_t = 1)]
        mls_seed: u32,
    },
    /// Randomized constrained sequence.
    Rcs {
        /// Sequence length, a multiple of 6.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct LevelArgs {
    /// DAC output levels "a-1,a0,a1".
    #[arg(long, value_parser = parse_levels, allow_hyphen_values = true, conflicts_with = "zero_offset")]
    levels: Option<DacModel>,
    /// Replace zeros by this value (DAC (-1, eps, 1)).
    #[arg(long, allow_hyphen_values = true)]
    zero_offset: Option<f64>,
}

impl LevelArgs {
    fn dac(&self) -> Result<Option<DacModel>> {
        match (self.levels, self.zero_offset) {
            (Some(d), _) => Ok(Some(d)),
            (None, Some(eps)) => {
                if !(eps.abs() < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "zero offset {eps} must satisfy |eps| < 1"
                    )));
                }
                Ok(Some(DacModel::new(-1.0, eps, 1.0)?))
            }
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Sequence file (CSV `n,value` or JSON).
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    levels: LevelArgs,
    /// Count DC as an undesired bin.
    #[arg(long)]
    include_dc: bool,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "desired_amplitude_spread")]
    criterion: String,
    #[arg(long, default_value_t = 200)]
    k_max: usize,
    #[arg(long, default_value_t = 2000)]
    j_max: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Chain configuration, JSON or TOML (by extension).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    levels: LevelArgs,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// fig1, fig2, fig3, fig4, fig5 or mc.
    target: String,
    /// Sequence length (fig4, mc).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_levels, allow_hyphen_values = true)]
    levels: Option<DacModel>,
    #[arg(long)]
    realizations: Option<usize>,
    /// MLS degree of the DS (fig1-fig3).
    #[arg(long)]
    degree: Option<u32>,
    /// Comma-separated lengths (fig5).
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Comma-separated zero levels a0 (fig5).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a0_list: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ExportAudioArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 42_000)]
    sample_rate: u32,
    /// Samples per chip.
    #[arg(long, default_value_t = 1)]
    oversampling: usize,
    /// Number of sequence periods in the file.
    #[arg(long, default_value_t = 1)]
    periods: usize,
    #[command(flatten)]
    levels: LevelArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn parse_levels(s: &str) -> std::result::Result<DacModel, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != 3 {
        return Err(format!(
            "expected three comma-separated levels, got {}",
            v.len()
        ));
    }
    DacModel::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

/// Collects output files and their digests.
struct Outputs {
    dir: PathBuf,
    files: Vec<OutputDigest>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(OutputDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
        }),
        Err(_) => Ok(rand::random()),
    }
}

/// What a command produced, for the manifest.
struct RunInfo {
    command: String,
    parameters: serde_json::Value,
    seed: Option<u64>,
}

fn spectrum_of(seq: &TernarySequence, dac: Option<DacModel>) -> Result<Spectrum> {
    let x = match dac {
        Some(d) => apply_dac(seq, &d),
        None => seq.to_f64(),
    };
    dft(&x)
}

/// One-sided bins that should vanish (DC and suppressed) but carry energy
/// above `1e-9 N`.
fn unwanted_bins(spec: &Spectrum) -> Vec<usize> {
    let n = spec.len();
    (0..=n / 2)
        .filter(|&k| !HarmonicClass::of(k, n).is_desired() && spec.magnitude(k) > 1e-9 * n as f64)
        .collect()
}

fn cmd_gen(g: &GenCommand, out: &mut Outputs) -> Result<RunInfo> {
    let (seq, seed, params, name) = match *g {
        GenCommand::Ds { degree, mls_seed } => {
            let seq = make_ds(&make_mls(degree, mls_seed)?)?;
            (
                seq,
                None,
                json!({"degree": degree, "mls_seed": mls_seed}),
                "gen ds",
            )
        }
        GenCommand::Rcs { n, seed } => {
            if n == 0 || n % 6 != 0 {
                return Err(Error::LengthNotMultipleOfSix(n));
            }
            let seed = resolve_seed(seed)?;
            let seq = assemble(&make_rcs(n / 6, seed)?);
            (seq, Some(seed), json!({"n": n, "seed": seed}), "gen rcs")
        }
    };
    out.write("sequence.csv", sequence_to_csv(&seq).as_bytes())?;
    out.write_json(
        "sequence.json",
        &serde_json::to_value(SequenceDoc::new(&seq, seed))?,
    )?;
    Ok(RunInfo {
        command: name.into(),
        parameters: params,
        seed,
    })
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut Outputs) -> Result<RunInfo> {
    let seq = read_sequence(&a.input)?;
    let dac = a.levels.dac()?;
    let spec = spectrum_of(&seq, dac)?;
    let report = seq.check_constraints();
    let m = metrics(&spec, !a.include_dc)?;
    out.write("spectrum.csv", spectrum_to_csv(&spec).as_bytes())?;
    out.write_json(
        "metrics.json",
        &json!({
            "input": a.input.file_name().map(|f| f.to_string_lossy().into_owned()),
            "N": seq.len(),
            "levels": dac.map(|d| d.levels()),
            "constraints": {
                "passes": report.passes(),
                "antipodal_violations": report.antipodal,
                "triplet_violations": report.triplet,
            },
            "flagged": !report.passes(),
            "unwanted_bins": unwanted_bins(&spec),
            "metrics": m,
        }),
    )?;
    Ok(RunInfo {
        command: "analyze".into(),
        parameters: json!({
            "input": a.input, "levels": dac.map(|d| d.levels()), "exclude_dc": !a.include_dc,
        }),
        seed: None,
    })
}

fn cmd_optimize(a: &OptimizeArgs, out: &mut Outputs) -> Result<RunInfo> {
    if a.n == 0 || a.n % 6 != 0 {
        return Err(Error::LengthNotMultipleOfSix(a.n));
    }
    let criterion: Criterion = a.criterion.parse()?;
    let seed = resolve_seed(a.seed)?;
    let cfg = OptimizerConfig {
        k_max: a.k_max,
        j_max: a.j_max,
        rng_seed: seed,
        n_triplets: a.n / 6,
    };
    let r = optimize_rcs(&cfg, criterion)?;
    let mut trace_csv = String::from("iteration,v_min\n");
    for p in &r.trace {
        trace_csv.push_str(&format!("{},{}\n", p.iteration, fmt_num(p.v_min)));
    }
    out.write(
        "run.json",
        (serde_json::to_string_pretty(&json!({
            "config": cfg,
            "criterion": criterion,
            "best_v": fmt_num(r.best_v),
            "trace": r.trace.iter().map(|p| json!([p.iteration, fmt_num(p.v_min)])).collect::<Vec<_>>(),
            "sequence": r.best_sequence.values(),
            "constraints_pass": r.best_sequence.check_constraints().passes(),
        }))? + "\n")
            .as_bytes(),
    )?;
    out.write("trace.csv", trace_csv.as_bytes())?;
    out.write("sequence.csv", sequence_to_csv(&r.best_sequence).as_bytes())?;
    out.write_json(
        "sequence.json",
        &serde_json::to_value(SequenceDoc::new(&r.best_sequence, Some(seed)))?,
    )?;
    Ok(RunInfo {
        command: "optimize".into(),
        parameters: json!({"n": a.n, "criterion": criterion, "k_max": a.k_max, "j_max": a.j_max}),
        seed: Some(seed),
    })
}

fn load_chain_config(path: &Path) -> Result<ChainConfig> {
    let text = std::fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"))
    {
        ChainConfig::from_toml(&text)
    } else {
        ChainConfig::from_json(&text)
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut Outputs) -> Result<RunInfo> {
    let seq = read_sequence(&a.input)?;
    let mut cfg = match &a.config {
        Some(p) => load_chain_config(p)?,
        None => ChainConfig::default(),
    };
    if let Some(d) = a.levels.dac()? {
        cfg.dac_levels = Some(d);
    }
    let seed = resolve_seed(a.seed)?;
    let r = simulate(&seq, &cfg, seed)?;
    let mut trace_csv = String::from("m,t,value\n");
    for (m, v) in r.period.samples.iter().enumerate() {
        trace_csv.push_str(&format!(
            "{},{},{}\n",
            m + 1,
            fmt_num(m as f64 / r.period.sample_rate),
            fmt_num(*v)
        ));
    }
    out.write("trace.csv", trace_csv.as_bytes())?;
    out.write("spectrum.csv", spectrum_to_csv(&r.spectrum).as_bytes())?;
    out.write_json(
        "metrics.json",
        &json!({
            "N": seq.len(),
            "chain": cfg,
            "constraints_pass": seq.check_constraints().passes(),
            "metrics": r.metrics,
        }),
    )?;
    Ok(RunInfo {
        command: "simulate".into(),
        parameters: json!({"input": a.input, "chain": cfg}),
        seed: Some(seed),
    })
}

fn cmd_verify(a: &VerifyArgs, out: &mut Outputs) -> Result<RunInfo> {
    let seed = resolve_seed(a.seed)?;
    if a.target == "mc" {
        let n = a.n.unwrap_or(144);
        let dac = a
            .levels
            .unwrap_or_else(|| DacModel::try_from(verify::FIG4_LEVELS).expect("valid levels"));
        let cfg = McConfig {
            n,
            dac,
            n_realizations: a.realizations.unwrap_or(verify::DEFAULT_REALIZATIONS),
            rng_seed: seed,
        };
        let stats = verify::mc_psd(&cfg)?;
        let model = verify::model_power(n, &dac)?;
        let cmp = verify::compare(&model, &stats, 4.0, verify::deterministic_floor(n))?;
        let mut csv = format!(
            "# figure: mc\n# parameters: N={n}; levels={:?}; realizations={}\n# seed: {seed}\n# tool_version: {TOOL_VERSION}\nk,mc_mean,mc_std_err,model,within\n",
            dac.levels(),
            cfg.n_realizations
        );
        for b in &cmp.bins {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                b.k,
                fmt_num(b.empirical),
                fmt_num(b.std_err),
                fmt_num(b.model),
                b.within
            ));
        }
        out.write("mc.csv", csv.as_bytes())?;
        out.write_json(
            "mc_report.json",
            &json!({"config": cfg, "pass": cmp.pass, "max_sigma_dev": fmt_num(cmp.max_sigma_dev), "max_abs_dev": fmt_num(cmp.max_abs_dev)}),
        )?;
        return Ok(RunInfo {
            command: "verify mc".into(),
            parameters: json!({"mc": cfg}),
            seed: Some(seed),
        });
    }
    let id: FigureId = a.target.parse()?;
    let o = FigureOverrides {
        dac: a.levels,
        mls_degree: a.degree,
        n: a.n,
        seed: Some(seed),
        realizations: a.realizations,
        n_list: a.n_list.clone(),
        a0_list: a.a0_list.clone(),
    };
    for d in verify::reproduce_figure(id, &o)? {
        out.write(&format!("{}.csv", d.name), d.to_csv().as_bytes())?;
    }
    Ok(RunInfo {
        command: format!("verify {id}"),
        parameters: serde_json::to_value(&o)?,
        seed: Some(seed),
    })
}

fn cmd_export_audio(a: &ExportAudioArgs, out: &mut Outputs) -> Result<RunInfo> {
    let seq = read_sequence(&a.input)?;
    let dac = a.levels.dac()?;
    let levels = match dac {
        Some(d) => apply_dac(&seq, &d),
        None => seq.to_f64(),
    };
    if a.periods == 0 {
        return Err(Error::InvalidArgument("periods must be at least 1".into()));
    }
    let chip_rate = f64::from(a.sample_rate) / a.oversampling.max(1) as f64;
    let one = zoh_upsample(&levels, a.oversampling, chip_rate)?;
    let samples: Vec<f64> = std::iter::repeat_n(one.samples.iter().copied(), a.periods)
        .flatten()
        .collect();
    out.write("sequence.wav", &wav_bytes(&samples, a.sample_rate)?)?;
    Ok(RunInfo {
        command: "export-audio".into(),
        parameters: json!({
            "input": a.input, "sample_rate": a.sample_rate, "oversampling": a.oversampling,
            "periods": a.periods, "levels": dac.map(|d| d.levels()),
        }),
        seed: None,
    })
}

fn execute(cli: &Cli, out: &mut Outputs) -> Result<RunInfo> {
    match &cli.command {
        Command::Gen(g) => cmd_gen(g, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Optimize(a) => cmd_optimize(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::ExportAudio(a) => cmd_export_audio(a, out),
        Command::Replay(_) => unreachable!("handled by run"),
    }
}

/// Arguments without program name and `--out`, with the seed made explicit.
fn recorded_argv(raw: &[String], seed: Option<u64>) -> Vec<String> {
    let mut argv = Vec::new();
    let mut it = raw.iter().skip(1);
    let mut has_seed = false;
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        has_seed |= a == "--seed" || a.starts_with("--seed=");
        argv.push(a.clone());
    }
    if let (Some(s), false) = (seed, has_seed) {
        argv.push("--seed".into());
        argv.push(s.to_string());
    }
    argv
}

fn run_recorded(raw: &[String], cli: &Cli) -> Result<RunManifest> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let mut out = Outputs::new(&cli.out)?;
    let info = execute(cli, &mut out)?;
    let manifest = RunManifest {
        command: info.command,
        argv: recorded_argv(raw, info.seed),
        parameters: info.parameters,
        seed: info.seed,
        tool_version: TOOL_VERSION.to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outputs: out.files,
    };
    std::fs::write(
        cli.out.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

fn replay(args: &ReplayArgs, out_dir: &Path) -> Result<bool> {
    let recorded: RunManifest = serde_json::from_str(&std::fs::read_to_string(&args.manifest)?)?;
    let mut raw = vec![
        "ternseq".to_string(),
        "--out".to_string(),
        out_dir.to_string_lossy().into_owned(),
    ];
    raw.extend(recorded.argv.iter().cloned());
    let cli = Cli::try_parse_from(&raw).map_err(|e| Error::Parse(e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::InvalidArgument("cannot replay a replay".into()));
    }
    let rerun = run_recorded(&raw, &cli)?;
    let mismatches: Vec<&str> = recorded
        .outputs
        .iter()
        .filter(|o| !rerun.outputs.contains(o))
        .map(|o| o.path.as_str())
        .collect();
    let ok = mismatches.is_empty() && rerun.outputs.len() == recorded.outputs.len();
    println!(
        "{}",
        json!({"replayed": recorded.command, "reproduced": ok, "mismatched_outputs": mismatches})
    );
    Ok(ok)
}

fn run(raw: &[String]) -> Result<ExitCode> {
    let cli = match Cli::try_parse_from(raw) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(ExitCode::SUCCESS);
        }
        Err(e) => return Err(Error::Parse(e.to_string())),
    };
    if let Command::Replay(r) = &cli.command {
        return Ok(if replay(r, &cli.out)? {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }
    run_recorded(raw, &cli)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    match run(&raw) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(2)
        }
    }
}
