use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rsg_cli::compare::cmd_compare;
use rsg_cli::run::cmd_run;
use rsg_cli::{CliError, CliResult, RunSpec};
use rsg_core::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(name = "rsg", version, about = "Restarted subgradient experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solver and write <run_id>.trace.csv and <run_id>.summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides solver.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides output.stride.
        #[arg(long)]
        stride: Option<u64>,
        /// Accepted for symmetry with compare; a single run is sequential.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run several configs on a shared problem and merge their traces.
    Compare {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Comma-separated objective thresholds.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stride: Option<u64>,
        #[arg(long, default_value_t = 4)]
        threads: usize,
    },
    /// Run an invariant suite: prox, lemmas, oracle, zoo or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf, out: &Option<PathBuf>, seed: Option<u64>, stride: Option<u64>) -> CliResult<RunSpec> {
    let mut spec = RunSpec::from_file(path)?;
    if let Some(o) = out {
        spec.set("output.dir", &o.to_string_lossy())?;
    }
    if let Some(s) = seed {
        spec.set("solver.seed", &s.to_string())?;
    }
    if let Some(s) = stride {
        spec.set("output.stride", &s.to_string())?;
    }
    Ok(spec)
}

fn verify(suite: &str, seed: u64, out: Option<PathBuf>) -> CliResult<()> {
    let suites = if suite == "all" {
        vec![Suite::Prox, Suite::Lemmas, Suite::Oracle, Suite::Zoo]
    } else {
        vec![suite.parse::<Suite>().map_err(CliError::Config)?]
    };
    let mut reports = Vec::new();
    let mut ok = true;
    for s in suites {
        let r = run_suite(s, seed).map_err(CliError::from_build)?;
        for c in &r.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            println!("{tag} {:?} {}: {}/{} cases", s, c.name, c.cases - c.failures, c.cases);
            for ce in &c.counterexamples {
                println!("    {ce}");
            }
        }
        ok &= r.passed();
        reports.push(r);
    }
    if let Some(path) = out {
        let mut json = serde_json::to_vec_pretty(&reports)?;
        json.push(b'\n');
        std::fs::write(path, json)?;
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Invariant("verification suite failed".into()))
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Run { config, out, seed, stride, threads: _ } => {
            let spec = load(&config, &out, seed, stride)?;
            let s = cmd_run(&spec)?;
            println!("{}: final objective {:e}, {} iterations", s.run_id, s.final_objective, s.total_iters);
            Ok(())
        }
        Cmd::Compare { configs, thresholds, out, seed, stride, threads } => {
            let specs = configs.iter().map(|c| load(c, &out, seed, stride)).collect::<CliResult<Vec<_>>>()?;
            let dir = match &out {
                Some(o) => o.clone(),
                None => PathBuf::from(specs[0].get("output.dir")),
            };
            let res = cmd_compare(&specs, thresholds, &dir, threads)?;
            print!("{}", String::from_utf8_lossy(&res.thresholds_csv).replace("\r\n", "\n"));
            Ok(())
        }
        Cmd::Verify { suite, seed, out } => verify(&suite, seed, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rsg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
