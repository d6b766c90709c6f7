use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayclass_cli::{cmd_generate, cmd_masks, cmd_report, cmd_run, cmd_verify, thread_pool, CliError, PipelineConfig};
use rayclass_core::classifiers::{Classifier, Strategy};
use rayclass_core::pipeline::Task;

/// Self-normalized classification of non-negative volumetric images.
#[derive(Parser, Debug)]
#[command(name = "rayclass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cohort directory (holding manifest.json).
    #[arg(long, global = true)]
    cohort: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic phantom cohort.
    Generate {
        #[arg(long)]
        n_hc: Option<usize>,
        #[arg(long)]
        n_pd: Option<usize>,
        /// Also write a year-4 scan for every PD subject.
        #[arg(long)]
        paired_y4: bool,
    },
    /// Build the striatum mask and collect the region masks.
    Masks {
        /// Occipital mask JSON replacing the cohort's own.
        #[arg(long)]
        occipital_mask: Option<PathBuf>,
        /// 1-based inclusive axial slices, e.g. 29-55.
        #[arg(long, value_parser = parse_range)]
        slices: Option<[usize; 2]>,
    },
    /// Evaluate every strategy and classifier and export the results.
    Run {
        #[arg(long)]
        task: Option<Task>,
        /// Comma separated: SBR, S+O, S.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<Strategy>>,
        /// Comma separated: LR, SVM.
        #[arg(long, value_delimiter = ',')]
        classifiers: Option<Vec<Classifier>>,
        #[arg(long)]
        runs: Option<usize>,
        /// Directory written by `masks`.
        #[arg(long)]
        masks: Option<PathBuf>,
        #[arg(long)]
        occipital_mask: Option<PathBuf>,
        #[arg(long, value_parser = parse_range)]
        slices: Option<[usize; 2]>,
        /// Paired t-test across runs instead of Welch.
        #[arg(long)]
        paired: bool,
    },
    /// Check the geometric claims and module invariants.
    Verify {
        /// Add noise of this size to every subspace normal (the battery should then fail).
        #[arg(long)]
        perturb_normal: Option<f64>,
    },
    /// Rebuild the summary table of a finished run directory (--out).
    Report {
        #[arg(long)]
        paired: bool,
    },
}

fn parse_range(s: &str) -> Result<[usize; 2], String> {
    let (lo, hi) = s.split_once('-').ok_or("expected LO-HI")?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok([n(lo)?, n(hi)?])
}

fn resolve(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let c = &cli.common;
    cfg.seed = c.seed.or(cfg.seed);
    if c.out.is_some() {
        cfg.paths.out = c.out.clone();
    }
    if c.cohort.is_some() {
        cfg.paths.cohort = c.cohort.clone();
    }
    match &cli.command {
        Command::Generate { n_hc, n_pd, paired_y4 } => {
            cfg.cohort.n_hc = n_hc.unwrap_or(cfg.cohort.n_hc);
            cfg.cohort.n_pd = n_pd.unwrap_or(cfg.cohort.n_pd);
            cfg.cohort.paired_y4 |= paired_y4;
        }
        Command::Masks { occipital_mask, slices } => {
            cfg.paths.occipital_mask = occipital_mask.clone().or(cfg.paths.occipital_mask);
            cfg.slices = slices.or(cfg.slices);
        }
        Command::Run {
            task,
            strategies,
            classifiers,
            runs,
            masks,
            occipital_mask,
            slices,
            paired,
        } => {
            cfg.task = task.unwrap_or(cfg.task);
            cfg.strategies = strategies.clone().unwrap_or(cfg.strategies);
            cfg.classifiers = classifiers.clone().unwrap_or(cfg.classifiers);
            cfg.protocol.n_runs = runs.unwrap_or(cfg.protocol.n_runs);
            cfg.paths.masks = masks.clone().or(cfg.paths.masks);
            cfg.paths.occipital_mask = occipital_mask.clone().or(cfg.paths.occipital_mask);
            cfg.slices = slices.or(cfg.slices);
            cfg.paired_test |= paired;
        }
        Command::Verify { perturb_normal } => {
            cfg.verify.perturb_normal = perturb_normal.unwrap_or(cfg.verify.perturb_normal);
        }
        Command::Report { paired } => cfg.paired_test |= paired,
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Generate { .. } => {
            println!("{}", cmd_generate(&cfg)?.display());
            Ok(())
        }
        Command::Masks { .. } => {
            let summary = cmd_masks(&cfg)?;
            print!(
                "striatum {} voxels, occipital {} voxels",
                summary.striatum_voxels, summary.occipital_voxels
            );
            match summary.dice {
                Some(d) => println!(", Dice vs ground truth {d:.4}"),
                None => println!(),
            }
            Ok(())
        }
        Command::Run { .. } => {
            let summary = cmd_run(&cfg)?;
            for (s, c) in &summary.resumed {
                eprintln!("resumed {s} {c} from its shard");
            }
            print!("{}", summary.table.to_text());
            println!("results in {}", summary.out.display());
            Ok(())
        }
        Command::Verify { .. } => {
            let report = cmd_verify(&cfg)?;
            print!("{}", report.to_text());
            if report.passed() {
                Ok(())
            } else {
                let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                Err(CliError::Property(format!("failed: {}", names.join(", "))))
            }
        }
        Command::Report { .. } => {
            print!("{}", cmd_report(&cfg)?.to_text());
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
