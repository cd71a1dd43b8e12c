//! Run configuration: flags, then `SIGNPHON_*` environment variables, then a TOML file, then defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Text,
}

/// Options shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML file with defaults for any of the options below.
    #[arg(long, global = true, env = "SIGNPHON_CONFIG")]
    pub config: Option<PathBuf>,

    /// Handshape inventory (TSV). Built-in inventory when absent.
    #[arg(long, global = true, env = "SIGNPHON_INVENTORY")]
    pub inventory: Option<PathBuf>,

    /// Citation lexicon (TSV). Built-in lexicon when absent.
    #[arg(long, global = true, env = "SIGNPHON_LEXICON")]
    pub lexicon: Option<PathBuf>,

    /// Corpus file (JSON Lines); repeat to concatenate several.
    #[arg(long, global = true, env = "SIGNPHON_CORPUS", value_delimiter = ',')]
    pub corpus: Vec<PathBuf>,

    /// Start/end statistics file. Built-in table when absent.
    #[arg(long, global = true, env = "SIGNPHON_STATS")]
    pub stats: Option<PathBuf>,

    /// Additive smoothing constant, at least 0.
    #[arg(long, global = true, env = "SIGNPHON_ALPHA")]
    pub alpha: Option<f64>,

    /// Prior weight in [0, 1].
    #[arg(long, global = true, env = "SIGNPHON_LAMBDA")]
    pub lambda: Option<f64>,

    /// Synthetic noise level in [0, 1].
    #[arg(long, global = true, env = "SIGNPHON_KAPPA")]
    pub kappa: Option<f64>,

    /// Largest distance still counted as a subtle change.
    #[arg(long = "tau-subtle", global = true, env = "SIGNPHON_TAU_SUBTLE")]
    pub tau_subtle: Option<f64>,

    #[arg(long, global = true, env = "SIGNPHON_SEED")]
    pub seed: Option<u64>,

    #[arg(long = "output-format", global = true, env = "SIGNPHON_OUTPUT_FORMAT", value_enum)]
    pub output_format: Option<OutputFormat>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    inventory: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    #[serde(default)]
    corpus: Vec<PathBuf>,
    stats: Option<PathBuf>,
    alpha: Option<f64>,
    lambda: Option<f64>,
    kappa: Option<f64>,
    tau_subtle: Option<f64>,
    seed: Option<u64>,
    output_format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inventory_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub corpus_paths: Vec<PathBuf>,
    pub stats_path: Option<PathBuf>,
    pub alpha: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub tau_subtle: f64,
    pub seed: u64,
    pub output_format: OutputFormat,
}

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_KAPPA: f64 = 0.5;
pub const DEFAULT_TAU_SUBTLE: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 42;

fn check(name: &str, value: f64, lo: f64, hi: f64) -> Result<f64, CliError> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(value)
    } else {
        let hi = if hi.is_finite() { hi.to_string() } else { "inf".into() };
        Err(CliError::Input(format!("--{name} must lie in [{lo}, {hi}], got {value}")))
    }
}

fn existing(path: Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    match path {
        Some(p) if !p.is_file() => Err(CliError::Input(format!("{}: no such file", p.display()))),
        other => Ok(other),
    }
}

/// Relative paths in a config file are taken from the file's directory.
fn rebase(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p
    }
}

impl RunConfig {
    pub fn resolve(args: GlobalArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let mut f: FileConfig =
                    toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
                f.inventory = f.inventory.map(|p| rebase(&dir, p));
                f.lexicon = f.lexicon.map(|p| rebase(&dir, p));
                f.stats = f.stats.map(|p| rebase(&dir, p));
                f.corpus = f.corpus.into_iter().map(|p| rebase(&dir, p)).collect();
                f
            }
            None => FileConfig::default(),
        };
        let corpus_paths = if args.corpus.is_empty() { file.corpus } else { args.corpus };
        for p in &corpus_paths {
            existing(Some(p.clone()))?;
        }
        Ok(RunConfig {
            inventory_path: existing(args.inventory.or(file.inventory))?,
            lexicon_path: existing(args.lexicon.or(file.lexicon))?,
            corpus_paths,
            stats_path: existing(args.stats.or(file.stats))?,
            alpha: check("alpha", args.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA), 0.0, f64::INFINITY)?,
            lambda: check("lambda", args.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA), 0.0, 1.0)?,
            kappa: check("kappa", args.kappa.or(file.kappa).unwrap_or(DEFAULT_KAPPA), 0.0, 1.0)?,
            tau_subtle: check(
                "tau-subtle",
                args.tau_subtle.or(file.tau_subtle).unwrap_or(DEFAULT_TAU_SUBTLE),
                0.0,
                f64::INFINITY,
            )?,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            output_format: args.output_format.or(file.output_format).unwrap_or(OutputFormat::Text),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply_without_flags() {
        let c = RunConfig::resolve(GlobalArgs::default()).unwrap();
        assert_eq!(c.alpha, DEFAULT_ALPHA);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.output_format, OutputFormat::Text);
        assert!(c.corpus_paths.is_empty());
    }

    #[test]
    fn flags_beat_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "alpha = 2.0\nseed = 7\noutput_format = \"json\"\n").unwrap();
        let args = GlobalArgs {
            config: Some(path),
            alpha: Some(0.5),
            ..Default::default()
        };
        let c = RunConfig::resolve(args).unwrap();
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.seed, 7);
        assert_eq!(c.output_format, OutputFormat::Json);
    }

    #[test]
    fn out_of_range_and_missing_paths_rejected() {
        let bad = GlobalArgs {
            lambda: Some(1.5),
            ..Default::default()
        };
        assert!(RunConfig::resolve(bad).is_err());
        let missing = GlobalArgs {
            lexicon: Some("/no/such/file.tsv".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(missing).is_err());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "alhpa = 2.0\n").unwrap();
        let args = GlobalArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(RunConfig::resolve(args).is_err());
    }
}
