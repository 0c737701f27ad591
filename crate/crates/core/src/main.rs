use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use linkcap::capacity::{holevo_se, shannon_se, Criterion, InputPower};
use linkcap::link::{attenuation_db, check_power_constraint, end_to_end, is_feasible, FEASIBILITY_TOL};
use linkcap::optimize::loss_only_threshold;
use linkcap::scenario::{load_link_config, Scenario};
use linkcap::sweep::{
    format_sig9, run_locations, run_sweep, write_locations_csv, write_locations_json, write_sweep_csv,
    write_sweep_json, SweepSpec,
};
use linkcap::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_CONSTRAINT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "linkcap", version, about = "Capacity limits of amplified multi-span optical links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimized spectral efficiency over a grid of lengths and node counts.
    Sweep(ScenarioArgs),
    /// Optimal amplifier positions versus link length for one node count.
    Locations(ScenarioArgs),
    /// Evaluate a single link document.
    Single {
        /// TOML or JSON link document.
        config: PathBuf,
    },
    /// Loss-only crossover length under the Holevo criterion.
    Threshold(ScenarioArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Shannon,
    Holevo,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Attenuation coefficient, 1/km (natural-log units).
    #[arg(long)]
    alpha: Option<f64>,
    /// Input power spectral density, photons/(s·Hz).
    #[arg(long)]
    nbar: Option<f64>,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    #[arg(long)]
    lmin: Option<f64>,
    #[arg(long)]
    lmax: Option<f64>,
    #[arg(long)]
    lstep: Option<f64>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionArg>,
    /// Append the loss-only curve.
    #[arg(long)]
    loss_only: bool,
    /// Append the distributed-amplification curve.
    #[arg(long)]
    distributed: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Exit with status 3 if any optimization did not converge.
    #[arg(long)]
    strict: bool,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario, Error> {
        let mut s = match &self.config {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        if let Some(v) = self.alpha {
            s.link.alpha_per_km = v;
        }
        if let Some(v) = self.nbar {
            s.link.n_bar = v;
        }
        if let Some(v) = &self.nodes {
            s.sweep.node_counts = v.clone();
        }
        if let Some(v) = self.lmin {
            s.sweep.l_min_km = v;
        }
        if let Some(v) = self.lmax {
            s.sweep.l_max_km = v;
        }
        if let Some(v) = self.lstep {
            s.sweep.l_step_km = v;
        }
        if let Some(c) = self.criterion {
            s.sweep.criteria = match c {
                CriterionArg::Shannon => vec![Criterion::Shannon],
                CriterionArg::Holevo => vec![Criterion::Holevo],
                CriterionArg::Both => Criterion::ALL.to_vec(),
            };
        }
        if self.loss_only {
            s.sweep.include_loss_only = true;
        }
        if self.distributed {
            s.sweep.include_distributed = true;
        }
        if let Some(v) = self.seed {
            s.sweep.seed = v;
        }
        Ok(s)
    }

    fn spec(&self) -> Result<SweepSpec, Error> {
        self.scenario()?.to_spec()
    }

    fn output(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

/// A failure that maps onto a process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn not_converged(strict: bool, ok: bool) -> Result<(), Failure> {
    if strict && !ok {
        Err(Failure {
            code: EXIT_NOT_CONVERGED,
            message: "at least one optimization did not converge".into(),
        })
    } else {
        Ok(())
    }
}

fn sweep(args: &ScenarioArgs) -> Result<(), Failure> {
    let spec = args.spec()?;
    let rows = run_sweep(&spec)?;
    let out = args.output()?;
    match args.format {
        Format::Csv => write_sweep_csv(&rows, out)?,
        Format::Json => write_sweep_json(&rows, out)?,
    }
    not_converged(args.strict, rows.iter().all(|r| r.converged))
}

fn locations(args: &ScenarioArgs) -> Result<(), Failure> {
    let mut scenario = args.scenario()?;
    if args.nodes.is_none() && args.config.is_none() {
        scenario.sweep.node_counts = vec![16];
    }
    let table = run_locations(&scenario.to_spec()?)?;
    let out = args.output()?;
    match args.format {
        Format::Csv => write_locations_csv(&table, out)?,
        Format::Json => write_locations_json(&table, out)?,
    }
    not_converged(args.strict, table.all_converged())
}

fn threshold(args: &ScenarioArgs) -> Result<(), Failure> {
    let mut scenario = args.scenario()?;
    if args.nodes.is_none() && args.config.is_none() {
        scenario.sweep.node_counts = vec![1];
    }
    let spec = scenario.to_spec()?;
    let mut out = args.output()?;
    let mut records = Vec::new();
    for &n in &spec.node_counts {
        let t = loss_only_threshold(spec.alpha_per_km, spec.n_bar, n, &spec.settings())?;
        records.push((n, t));
    }
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            let csv_err = |e: csv::Error| Failure {
                code: EXIT_USAGE,
                message: e.to_string(),
            };
            w.write_record(["n_nodes", "length_km", "attenuation_db"]).map_err(csv_err)?;
            for (n, t) in &records {
                w.write_record([n.to_string(), format_sig9(t.length_km), format_sig9(t.attenuation_db)])
                    .map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let array: Vec<_> = records
                .iter()
                .map(|(n, t)| serde_json::json!({"n_nodes": n, "length_km": t.length_km, "attenuation_db": t.attenuation_db}))
                .collect();
            serde_json::to_writer_pretty(&mut out, &array).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn single(path: &Path) -> Result<(), Failure> {
    let cfg = load_link_config(path)?;
    let ch = end_to_end(&cfg);
    let p: InputPower = cfg.n_bar();
    let margins = check_power_constraint(&cfg);
    let feasible = is_feasible(&margins, FEASIBILITY_TOL);

    let mut out = io::stdout().lock();
    writeln!(out, "tau: {}", format_sig9(ch.tau()))?;
    writeln!(out, "nu: {}", format_sig9(ch.nu()))?;
    writeln!(out, "shannon_se_bits: {}", format_sig9(shannon_se(ch, p)))?;
    writeln!(out, "holevo_se_bits: {}", format_sig9(holevo_se(ch, p)))?;
    writeln!(out, "length_km: {}", format_sig9(cfg.total_length_km()))?;
    writeln!(
        out,
        "attenuation_db: {}",
        format_sig9(attenuation_db(cfg.total_length_km(), cfg.alpha_per_km()))
    )?;
    for (i, m) in margins.iter().enumerate() {
        let flag = if *m < -FEASIBILITY_TOL { "  VIOLATED" } else { "" };
        writeln!(out, "margin_{}: {}{flag}", i + 1, format_sig9(*m))?;
    }
    writeln!(out, "feasible: {feasible}")?;
    if feasible {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_CONSTRAINT,
            message: "power constraint violated at one or more nodes".into(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Locations(args) => locations(args),
        Command::Threshold(args) => threshold(args),
        Command::Single { config } => single(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("linkcap: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
