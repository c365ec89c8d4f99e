//! Run configuration shared by the command-line subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{EvalSettings, SplitSpec};
use crate::factorization::Hyperparams;
use crate::srn::RatingScale;
use crate::synth::SynthParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Train,
    Evaluate,
    SweepK,
    SweepMu,
    Recommend,
    Synth,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    pub ratings: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub model: Option<PathBuf>,
    /// Report, trace or output directory, depending on the subcommand.
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub paths: Paths,
    pub hyperparams: Hyperparams,
    pub split: SplitSpec,
    pub scale: RatingScale,
    pub symmetrize: bool,
    pub synth: SynthParams,
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str, cmd: Subcommand) -> Result<&'a Path> {
    match path {
        Some(p) if !p.as_os_str().is_empty() => Ok(p),
        _ => Err(Error::InvalidParam(format!("{cmd:?} needs {flag}"))),
    }
}

impl RunConfig {
    /// Checks that every path `cmd` reads or writes is set and that the
    /// numeric parameters it uses are valid.
    pub fn validate(&self, cmd: Subcommand) -> Result<()> {
        RatingScale::new(self.scale.min, self.scale.max)?;
        match cmd {
            Subcommand::Synth => {
                require(&self.paths.report, "--out", cmd)?;
                SynthParams {
                    scale: self.scale,
                    ..self.synth.clone()
                }
                .validate()?;
            }
            Subcommand::Recommend => {
                require(&self.paths.ratings, "--ratings", cmd)?;
                require(&self.paths.model, "--model", cmd)?;
            }
            Subcommand::Train => {
                require(&self.paths.ratings, "--ratings", cmd)?;
                require(&self.paths.model, "--out", cmd)?;
                self.hyperparams.validate()?;
            }
            Subcommand::Evaluate | Subcommand::SweepK | Subcommand::SweepMu => {
                require(&self.paths.ratings, "--ratings", cmd)?;
                self.hyperparams.validate()?;
            }
        }
        Ok(())
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            split: self.split,
            scale: self.scale,
            clamp: true,
        }
    }
}
