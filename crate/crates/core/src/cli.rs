//! The `socmf` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use log::info;
use serde::Serialize;

use crate::config::{Paths, RunConfig, Subcommand};
use crate::error::{Error, Result};
use crate::evaluation::{
    k_table, mu_table, sweep_k, sweep_mu, EvalReport, Holdout, Method, SplitSpec,
};
use crate::factorization::{train, Hyperparams, SocialGradient, TrainTrace};
use crate::io::{load_model, load_srn, save_model, save_reports, save_srn};
use crate::recommend::recommend;
use crate::srn::{RatingScale, SocialRatingNetwork, UserId};
use crate::synth::{generate_synthetic, SynthParams};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "socmf",
    version,
    about = "Social-regularized matrix factorization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Train on every rating and write the model plus a JSON trace.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Social weight.
        #[arg(long, default_value_t = 1e-3)]
        mu: f64,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
        /// Trace file; defaults to the model path with `.trace.json` appended.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Score Naive, NMF and OA on one held-out split.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Social weight.
        #[arg(long, default_value_t = 1e-3)]
        mu: f64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Naive, MethodArg::Nmf, MethodArg::Oa])]
        methods: Vec<MethodArg>,
        /// JSON report to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score every method for each latent dimension.
    SweepK {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 6, 8, 10, 12, 14, 16])]
        k: Vec<usize>,
        /// Social weight of the OA rows.
        #[arg(long, default_value_t = 1e-3)]
        mu: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score OA for each social weight.
    SweepMu {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long = "mu", value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])]
        mus: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the top-N unrated items for one user.
    Recommend {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// User label as it appears in the ratings file.
        #[arg(long)]
        user: String,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Generate a synthetic community network.
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long, default_value = "1:5", value_parser = parse_scale)]
        scale: RatingScale,
        /// Directory receiving `ratings.tsv` and `edges.tsv`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Add the reverse of every tie.
    #[arg(long)]
    pub symmetrize: bool,
    #[arg(long, default_value = "1:5", value_parser = parse_scale)]
    pub scale: RatingScale,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 0.001)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.005)]
    pub beta: f64,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// Seed of the factor initialization.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub init_scale: f64,
    #[arg(long = "social-grad", default_value = "printed", value_parser = parse_social_grad)]
    pub social_grad: SocialGradient,
    /// Clamp factors to be non-negative after every step.
    #[arg(long)]
    pub nonneg: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Probability that a rating lands in the training set.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 40)]
    pub users: usize,
    #[arg(long, default_value_t = 60)]
    pub items: usize,
    #[arg(long, default_value_t = 4)]
    pub communities: usize,
    #[arg(long, default_value_t = 0.5)]
    pub within_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    pub cross_prob: f64,
    #[arg(long, default_value_t = 0.2)]
    pub density: f64,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.3)]
    pub taste_spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Naive,
    Nmf,
    Oa,
}

fn parse_scale(s: &str) -> std::result::Result<RatingScale, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_social_grad(s: &str) -> std::result::Result<SocialGradient, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl TrainArgs {
    fn hyperparams(&self, k: usize, mu: f64) -> Hyperparams {
        Hyperparams {
            k,
            lambda: self.lambda,
            mu,
            beta: self.beta,
            max_iters: self.iters,
            epsilon: self.epsilon,
            seed: self.seed,
            init_scale: self.init_scale,
            social_gradient: self.social_grad,
            nonneg_projection: self.nonneg,
        }
    }
}

impl SynthArgs {
    fn params(&self, scale: RatingScale) -> SynthParams {
        SynthParams {
            users: self.users,
            items: self.items,
            communities: self.communities,
            within_prob: self.within_prob,
            cross_prob: self.cross_prob,
            density: self.density,
            noise: self.noise,
            taste_spread: self.taste_spread,
            scale,
            seed: self.seed,
        }
    }
}

fn data_config(data: &DataArgs) -> RunConfig {
    RunConfig {
        paths: Paths {
            ratings: Some(data.ratings.clone()),
            edges: data.edges.clone(),
            ..Paths::default()
        },
        scale: data.scale,
        symmetrize: data.symmetrize,
        ..RunConfig::default()
    }
}

impl Command {
    pub fn subcommand(&self) -> Subcommand {
        match self {
            Command::Train { .. } => Subcommand::Train,
            Command::Evaluate { .. } => Subcommand::Evaluate,
            Command::SweepK { .. } => Subcommand::SweepK,
            Command::SweepMu { .. } => Subcommand::SweepMu,
            Command::Recommend { .. } => Subcommand::Recommend,
            Command::Synth { .. } => Subcommand::Synth,
        }
    }

    /// Collects the flags into a validated run configuration.
    pub fn config(&self) -> Result<RunConfig> {
        let cfg = match self {
            Command::Train {
                data,
                train,
                k,
                mu,
                out,
                trace,
            } => RunConfig {
                hyperparams: train.hyperparams(*k, *mu),
                paths: Paths {
                    model: Some(out.clone()),
                    report: Some(trace.clone().unwrap_or_else(|| trace_path(out))),
                    ..data_config(data).paths
                },
                ..data_config(data)
            },
            Command::Evaluate {
                data,
                train,
                split,
                k,
                mu,
                out,
                ..
            } => RunConfig {
                hyperparams: train.hyperparams(*k, *mu),
                split: SplitSpec::new(split.split, split.split_seed)?,
                paths: Paths {
                    report: out.clone(),
                    ..data_config(data).paths
                },
                ..data_config(data)
            },
            Command::SweepK {
                data,
                train,
                split,
                k,
                mu,
                out,
            } => RunConfig {
                hyperparams: train.hyperparams(k.first().copied().unwrap_or(1), *mu),
                split: SplitSpec::new(split.split, split.split_seed)?,
                paths: Paths {
                    report: out.clone(),
                    ..data_config(data).paths
                },
                ..data_config(data)
            },
            Command::SweepMu {
                data,
                train,
                split,
                k,
                mus,
                out,
            } => RunConfig {
                hyperparams: train.hyperparams(*k, mus.first().copied().unwrap_or(0.0)),
                split: SplitSpec::new(split.split, split.split_seed)?,
                paths: Paths {
                    report: out.clone(),
                    ..data_config(data).paths
                },
                ..data_config(data)
            },
            Command::Recommend { data, model, .. } => RunConfig {
                paths: Paths {
                    model: Some(model.clone()),
                    ..data_config(data).paths
                },
                ..data_config(data)
            },
            Command::Synth { synth, scale, out } => RunConfig {
                paths: Paths {
                    report: Some(out.clone()),
                    ..Paths::default()
                },
                scale: *scale,
                synth: synth.params(*scale),
                ..RunConfig::default()
            },
        };
        cfg.validate(self.subcommand())?;
        Ok(cfg)
    }
}

fn trace_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".trace.json");
    PathBuf::from(s)
}

fn load(cfg: &RunConfig) -> Result<SocialRatingNetwork> {
    let ratings = cfg.paths.ratings.as_deref().expect("validated");
    let srn = load_srn(ratings, cfg.paths.edges.as_deref(), cfg.symmetrize)?;
    info!("loaded {}", srn.stats());
    Ok(srn)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn finish_reports(reports: &[EvalReport], out: Option<&Path>, table: String) -> Result<String> {
    if let Some(path) = out {
        save_reports(reports, path)?;
    }
    Ok(table)
}

fn evaluate_table(reports: &[EvalReport]) -> String {
    let mut s = format!(
        "{:<6} {:>4} {:>10} {:>10} {:>7}\n",
        "method", "k", "mu", "rmse", "scored"
    );
    for r in reports {
        s += &format!(
            "{:<6} {:>4} {:>10} {:>10.4} {:>7}\n",
            r.method.to_string(),
            r.k.map_or("-".into(), |k| k.to_string()),
            r.mu.map_or("-".into(), |m| format!("{m:e}")),
            r.rmse,
            r.scored
        );
    }
    s
}

/// Runs one parsed command and returns what it prints on stdout.
pub fn execute(command: &Command) -> Result<String> {
    let cfg = command.config()?;
    match command {
        Command::Train { .. } => {
            let srn = load(&cfg)?;
            let (model, trace) = train(&srn, &cfg.hyperparams)?;
            let model_path = cfg.paths.model.as_deref().expect("validated");
            let trace_path = cfg.paths.report.as_deref().expect("validated");
            save_model(&model, model_path)?;
            write_json::<TrainTrace>(&trace, trace_path)?;
            Ok(format!(
                "trained k={} in {} iterations ({:?}), loss {:.6} -> {:.6}\n",
                model.k(),
                trace.iterations(),
                trace.stop,
                trace.initial_loss,
                trace.final_loss()
            ))
        }
        Command::Evaluate { methods, out, .. } => {
            let srn = load(&cfg)?;
            let settings = cfg.eval_settings();
            let holdout = Holdout::new(&srn, &settings.split)?;
            let mut reports = Vec::new();
            for m in methods {
                let report = match m {
                    MethodArg::Naive => EvalReport::naive(holdout.naive(&settings)?, None),
                    MethodArg::Nmf | MethodArg::Oa => {
                        let method = if *m == MethodArg::Nmf {
                            Method::Nmf
                        } else {
                            Method::Oa
                        };
                        let (score, _, _) = holdout.factor(method, &cfg.hyperparams, &settings)?;
                        EvalReport::factor(method, &cfg.hyperparams, score)
                    }
                };
                reports.push(report);
            }
            finish_reports(&reports, out.as_deref(), evaluate_table(&reports))
        }
        Command::SweepK { k, out, .. } => {
            let srn = load(&cfg)?;
            let reports = sweep_k(&srn, k, &cfg.hyperparams, &cfg.eval_settings())?;
            finish_reports(&reports, out.as_deref(), k_table(&reports))
        }
        Command::SweepMu { mus, out, .. } => {
            let srn = load(&cfg)?;
            let reports = sweep_mu(&srn, mus, &cfg.hyperparams, &cfg.eval_settings())?;
            finish_reports(&reports, out.as_deref(), mu_table(&reports))
        }
        Command::Recommend { user, top, .. } => {
            let srn = load(&cfg)?;
            let model = load_model(cfg.paths.model.as_deref().expect("validated"))?;
            let x = srn
                .user_labels()
                .get(user)
                .ok_or_else(|| Error::UnknownLabel(user.clone()))?;
            let mut s = String::new();
            for r in recommend(&model, &srn, UserId(x), *top)? {
                s += &format!("{}\t{:.4}\n", r.label, r.score);
            }
            Ok(s)
        }
        Command::Synth { .. } => {
            let dir = cfg.paths.report.as_deref().expect("validated");
            let srn = generate_synthetic(&cfg.synth)?;
            std::fs::create_dir_all(dir)?;
            save_srn(&srn, &dir.join("ratings.tsv"), &dir.join("edges.tsv"))?;
            Ok(format!("{}\n", srn.stats()))
        }
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParam(_) => EXIT_USAGE,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_DATA,
    }
}

/// Entry point of the `socmf` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn sweep_k_defaults() {
        let cli = Cli::try_parse_from(["socmf", "sweep-k", "--ratings", "r.tsv"]).unwrap();
        match cli.command {
            Command::SweepK { k, .. } => assert_eq!(k, [2, 4, 6, 8, 10, 12, 14, 16]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mu_list_parses() {
        let cli = Cli::try_parse_from(["socmf", "sweep-mu", "--ratings", "r", "--mu", "1e-2,1e-4"])
            .unwrap();
        match cli.command {
            Command::SweepMu { mus, .. } => assert_eq!(mus, [1e-2, 1e-4]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_split_is_usage_error() {
        let cli =
            Cli::try_parse_from(["socmf", "evaluate", "--ratings", "r", "--split", "1.5"]).unwrap();
        let err = execute(&cli.command).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_USAGE);
    }

    #[test]
    fn trace_path_appends_suffix() {
        assert_eq!(
            trace_path(Path::new("out/m.txt")),
            PathBuf::from("out/m.txt.trace.json")
        );
    }
}
