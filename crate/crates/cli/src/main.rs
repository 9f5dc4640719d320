use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use meromap::converge::Notion;
use meromap::parallel::with_workers;
use meromap_cli::commands::{self, Outcome, EXIT_USAGE};
use meromap_cli::reproduce::{self, UnknownExample, CATALOGUE};
use meromap_cli::scenario::{MapSpec, RunConfig, Scenario, ScenarioError, VolumeNormalization};

#[derive(Parser)]
#[command(name = "meromap", version, about = "Convergence and Fatou-set experiments for meromorphic maps")]
struct Cli {
    /// Seed for every sampler; the same seed gives the same reports.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Graph or volume sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads. Never changes the numbers, only the wall time.
    #[arg(long, global = true, env = "MEROMAP_WORKERS")]
    workers: Option<usize>,
    /// Directory for reports; without it the main report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Hausdorff tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Treat cells meeting an indeterminacy point of an iterate as undecided.
    #[arg(long, global = true)]
    exclude_indeterminacy: bool,
    /// `pullback` reports the area swept in the target, `graph` the full graph volume.
    #[arg(long, global = true, default_value = "pullback")]
    volume_normalization: VolumeNormalization,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one convergence notion on a scenario (exit 0/2/1 for converges/diverges/undecided).
    Converge {
        #[arg(long)]
        scenario: PathBuf,
        /// strong, weak, gamma, stabilized, def1 or def2.
        #[arg(long)]
        notion: Notion,
    },
    /// Monte-Carlo graph volume of a map over its region.
    Volume {
        #[arg(long)]
        map: PathBuf,
    },
    /// Hausdorff distance between the graphs of two maps.
    Hausdorff {
        /// Give twice, once per map.
        #[arg(long, required = true)]
        map: Vec<PathBuf>,
    },
    /// Indeterminacy points of a map on a surface.
    Indet {
        #[arg(long)]
        map: PathBuf,
    },
    /// The reduced k-th iterate of a self-map.
    Iterate {
        #[arg(long)]
        map: PathBuf,
        #[arg(short, default_value_t = 2)]
        k: usize,
    },
    /// Fatou grid of a self-map of CP^2 on the standard chart.
    Fatou {
        #[arg(long)]
        map: PathBuf,
        /// Iterate schedule, comma separated.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
    },
    /// Run a catalogued example end to end and check its expectations.
    Reproduce { id: String },
    /// Print the catalogue of examples.
    ListExamples,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn run(cli: &Cli) -> Result<Outcome> {
    let rc = RunConfig {
        seed: cli.seed,
        samples: cli.samples,
        tol: cli.tol,
        workers: cli.workers,
        exclude_indeterminacy: cli.exclude_indeterminacy,
        volume_normalization: cli.volume_normalization,
    };
    match &cli.command {
        Command::Converge { scenario, notion } => {
            let s = Scenario::load(scenario)?;
            commands::converge(&s, &display(scenario), *notion, &rc)
        }
        Command::Volume { map } => commands::volume_cmd(&MapSpec::load(map)?, &display(map), &rc),
        Command::Hausdorff { map } => {
            let [a, b] = map.as_slice() else { bail!("hausdorff takes exactly two --map files") };
            commands::hausdorff_cmd(&MapSpec::load(a)?, &display(a), &MapSpec::load(b)?, &display(b), &rc)
        }
        Command::Indet { map } => commands::indet(&MapSpec::load(map)?, &display(map)),
        Command::Iterate { map, k } => commands::iterate(&MapSpec::load(map)?, &display(map), *k),
        Command::Fatou { map, schedule } => commands::fatou(&MapSpec::load(map)?, &display(map), schedule.clone(), &rc),
        Command::Reproduce { id } => {
            let bundle = reproduce::reproduce(id, &rc)?;
            let body = bundle.to_json();
            let mut files = vec![(format!("{id}.bundle.json"), body.clone())];
            files.extend(bundle.files);
            Ok(Outcome { code: if bundle.passed { 0 } else { 1 }, stdout: body, files })
        }
        Command::ListExamples => {
            let mut text = String::new();
            for (id, what) in CATALOGUE {
                text.push_str(&format!("{id:<16}{what}\n"));
            }
            Ok(Outcome { code: 0, stdout: text, files: Vec::new() })
        }
    }
}

fn emit(out: Option<&Path>, o: &Outcome) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, body) in &o.files {
                let path = dir.join(name);
                fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            }
            if o.files.is_empty() {
                print!("{}", o.stdout);
            }
        }
        None => {
            print!("{}", o.stdout);
            if !o.stdout.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn usage_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<UnknownExample>().is_some()
            || matches!(c.downcast_ref::<ScenarioError>(), Some(ScenarioError::Parse { .. } | ScenarioError::Invalid { .. }))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the code of unreadable input; 2 means "diverges"
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let result = with_workers(cli.workers, || run(&cli)).and_then(|o| emit(cli.out.as_deref(), &o).map(|()| o.code));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if usage_error(&e) { EXIT_USAGE as u8 } else { 1 })
        }
    }
}
