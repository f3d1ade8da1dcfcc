use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use divekit::checkpoint::{load_model, save_model};
use divekit::clock::ClockKind;
use divekit::corpus::Corpus;
use divekit::format::write_instance;
use divekit::harness::{
    self, build_examples, collect, default_schedule, eval_bnb, eval_dives, load_instances, train_model, tune, verify,
    BnbMethod, CollectConfig, DiverSpec, EvalBnbConfig, ModelConfig, NamedInstance, TuneConfig, TuneObjective,
    VerifyConfig, WIN_TIE_NOTE,
};
use divekit::report::{csv_bytes, json_bytes, Metadata};
use divekit_core::generate::{generate, Family, FamilyParams, GeneratorConfig};
use divekit_core::graphnet::GnnParams;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "divekit", version, about = "Generate MILP benchmarks, train the learned diver and compare divers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = ClockKind::Work)]
    clock: ClockKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    SetCover,
    CombAuction,
    FacilityLocation,
    IndepSet,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::SetCover => Family::SetCover,
            FamilyArg::CombAuction => Family::CombAuction,
            FamilyArg::FacilityLocation => Family::FacilityLocation,
            FamilyArg::IndepSet => Family::IndepSet,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write generated instances as JSON files.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve instances and store their solution pools.
    Collect {
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 50_000)]
        node_limit: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Train the learned diver on a collected corpus.
    Train {
        instances: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        /// Share of the corpus held out for model selection.
        #[arg(long, default_value_t = 0.1)]
        valid_fraction: f64,
        #[command(flatten)]
        common: Common,
    },
    /// One dive per instance and diver from the root LP.
    EvalDive {
        instances: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "lower,upper,random,fractional,coefficient")]
        divers: Vec<String>,
        #[arg(long, default_value_t = 100)]
        d_max: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Branch and bound with each diver on its default schedule.
    EvalBnb {
        instances: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// `none` runs without diving.
        #[arg(long, value_delimiter = ',', default_value = "none,l2dive")]
        divers: Vec<String>,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 100)]
        d_max: usize,
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Random search over diver schedules inside branch and bound.
    Tune {
        instances: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "fractional,coefficient,linesearch,vectorlength,pseudocost"
        )]
        divers: Vec<String>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Integral)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 100)]
        d_max: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Built-in correctness checks on small generated instances.
    Verify {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Integral,
    Time,
}

fn load(dir: &Path) -> Result<Vec<NamedInstance>> {
    let insts = load_instances(dir).with_context(|| format!("reading instances from {}", dir.display()))?;
    if insts.is_empty() {
        bail!("no .json or .mps instances in {}", dir.display());
    }
    Ok(insts)
}

/// Restricts `insts` to corpus members and returns their optima.
fn with_optima(insts: Vec<NamedInstance>, corpus: &Corpus) -> (Vec<NamedInstance>, HashMap<String, f64>, usize) {
    let optima: HashMap<String, f64> = corpus.entries.iter().map(|e| (e.id.clone(), e.optimum)).collect();
    let total = insts.len();
    let kept: Vec<NamedInstance> = insts.into_iter().filter(|i| optima.contains_key(&i.id)).collect();
    let skipped = total - kept.len();
    (kept, optima, skipped)
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    Corpus::load(path).with_context(|| format!("reading corpus {}", path.display()))
}

fn load_model_opt(path: &Option<PathBuf>) -> Result<Option<GnnParams>> {
    path.as_ref().map(|p| load_model(p).with_context(|| format!("reading model {}", p.display()))).transpose()
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// Returns whether every instance was processed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { family, count, out, seed } => {
            let family = Family::from(family);
            std::fs::create_dir_all(&out)?;
            for k in 0..count as u64 {
                let cfg = GeneratorConfig::new(FamilyParams::default_for(family), seed + k);
                let mut inst = generate(&cfg).map_err(|e| anyhow::anyhow!("generating: {e:?}"))?;
                let id = format!("{}-{:05}", family.name(), seed + k);
                inst.name = id.clone();
                write_instance(&inst, &out.join(format!("{id}.json")))?;
            }
            eprintln!("wrote {count} {} instances to {}", family.name(), out.display());
            Ok(true)
        }
        Command::Collect { instances, out, time_limit, node_limit, common } => {
            let insts = load(&instances)?;
            let cfg = CollectConfig { time_limit, node_limit, clock: common.clock, ..CollectConfig::default() };
            let res = collect(&insts, &cfg, common.jobs)?;
            res.corpus.save(&out)?;
            eprintln!(
                "collected {} entries, dropped {} solved at the root, {} failed",
                res.corpus.entries.len(),
                res.dropped.len(),
                res.failed.len()
            );
            for (id, why) in &res.failed {
                eprintln!("  {id}: {why}");
            }
            Ok(res.failed.is_empty())
        }
        Command::Train { instances, corpus, out, epochs, valid_fraction, common } => {
            if !(0.0..1.0).contains(&valid_fraction) {
                bail!("--valid-fraction must be in [0, 1)");
            }
            let insts = load(&instances)?;
            let corpus = load_corpus(&corpus)?;
            let mut cfg = ModelConfig { seed: common.seed, init_seed: common.seed, ..ModelConfig::default() };
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            let (examples, failed) = build_examples(&corpus, &insts, cfg.tau, common.jobs)?;
            for (id, why) in &failed {
                eprintln!("  {id}: {why}");
            }
            let n_valid = ((examples.len() as f64) * valid_fraction).round() as usize;
            let (train_set, valid_set) = examples.split_at(examples.len() - n_valid);
            let (params, report) = train_model(train_set, valid_set, &cfg, common.jobs)?;
            save_model(&params, &out)?;
            for e in &report.epochs {
                eprintln!("epoch {:3} train {:.4} valid {:?}", e.epoch, e.train_loss, e.valid_loss);
            }
            eprintln!("best epoch {}; model written to {}", report.best_epoch, out.display());
            Ok(failed.is_empty())
        }
        Command::EvalDive { instances, corpus, divers, d_max, model, out, common } => {
            let corpus = load_corpus(&corpus)?;
            let (insts, optima, skipped) = with_optima(load(&instances)?, &corpus);
            let model = load_model_opt(&model)?;
            let specs: Vec<DiverSpec> = divers.iter().map(|d| DiverSpec::new(d, d_max)).collect();
            let table = eval_dives(&insts, &optima, &specs, common.seed, model.as_ref(), common.clock, common.jobs)?;
            #[derive(Serialize)]
            struct Config<'a> {
                divers: &'a [DiverSpec],
                clock: ClockKind,
            }
            let meta = Metadata::new("eval-dive", common.seed, &Config { divers: &specs, clock: common.clock })
                .with_note("primal_gap is inf for failed dives; means are over successful dives");
            emit(&out, &csv_bytes(&meta, &table.records)?)?;
            eprintln!("{:<14} {:>6} {:>6} {:>12} {:>10}", "method", "n", "failed", "mean_gap", "stderr");
            for s in &table.summary {
                eprintln!(
                    "{:<14} {:>6} {:>6} {:>12.3} {:>10.3}",
                    s.method, s.instances, s.failed, s.mean_primal_gap, s.stderr_primal_gap
                );
            }
            if skipped > 0 {
                // instances dropped by collect have no optimum to score against
                eprintln!("{skipped} instances have no corpus entry and were skipped");
            }
            let errors = table.records.iter().filter(|r| r.status.starts_with("error") || r.status == "root-lp-failed");
            Ok(errors.count() == 0)
        }
        Command::EvalBnb { instances, corpus, divers, time_limit, d_max, seeds, model, out, common } => {
            let insts = load(&instances)?;
            let (insts, optima, skipped) = match corpus {
                Some(p) => with_optima(insts, &load_corpus(&p)?),
                None => (insts, HashMap::new(), 0),
            };
            let model = load_model_opt(&model)?;
            let methods: Vec<BnbMethod> = divers
                .iter()
                .map(|d| BnbMethod {
                    name: d.clone(),
                    slots: if d == "none" { Vec::new() } else { vec![default_schedule(d)] },
                })
                .collect();
            let cfg = EvalBnbConfig {
                time_limit,
                d_max,
                seeds: (0..seeds).map(|s| common.seed + s).collect(),
                clock: common.clock,
                ..EvalBnbConfig::default()
            };
            let table = eval_bnb(&insts, &optima, &methods, &cfg, model.as_ref(), common.jobs)?;
            let meta = Metadata::new("eval-bnb", common.seed, &(&methods, &cfg)).with_note(WIN_TIE_NOTE);
            emit(&out, &csv_bytes(&meta, &table.records)?)?;
            eprintln!(
                "{:<14} {:>6} {:>7} {:>10} {:>9} {:>9} {:>5}",
                "method", "runs", "solved", "integral", "stderr", "time", "wins"
            );
            for s in &table.summary {
                eprintln!(
                    "{:<14} {:>6} {:>7} {:>10.3} {:>9.3} {:>9.3} {:>5}",
                    s.method, s.runs, s.solved, s.mean_integral, s.stderr_integral, s.mean_time, s.wins
                );
            }
            let errors = table.records.iter().filter(|r| r.status.starts_with("error")).count();
            if skipped > 0 {
                eprintln!("{skipped} instances have no corpus entry and were skipped");
            }
            Ok(errors == 0)
        }
        Command::Tune { instances, divers, samples, objective, time_limit, d_max, model, out, common } => {
            let insts = load(&instances)?;
            let model = load_model_opt(&model)?;
            let cfg = TuneConfig {
                samples,
                seed: common.seed,
                objective: match objective {
                    ObjectiveArg::Integral => TuneObjective::Integral,
                    ObjectiveArg::Time => TuneObjective::Time,
                },
                divers,
            };
            let bnb = EvalBnbConfig {
                time_limit,
                d_max,
                seeds: vec![common.seed],
                clock: common.clock,
                ..EvalBnbConfig::default()
            };
            let res = tune(&insts, &HashMap::new(), &bnb, &cfg, model.as_ref(), common.jobs)?;
            let meta = Metadata::new("tune", common.seed, &(&cfg, &bnb));
            emit(&out, &json_bytes(&meta, &res))?;
            eprintln!(
                "default {:.4}, best {:.4} ({}), {} solver calls",
                res.default_score, res.best_score, res.best.name, res.solver_calls
            );
            Ok(true)
        }
        Command::Verify { count, seed } => {
            let checks = verify(&VerifyConfig { instances: count, seed });
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(harness::HarnessError::UnknownDiver(_)) = e.downcast_ref() {
                eprintln!("known divers: {}", harness::diver_names().join(", "));
            }
            ExitCode::from(2)
        }
    }
}
