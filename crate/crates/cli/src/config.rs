//! Flat key=value configuration files and the merged run configuration.
//!
//! Precedence is command-line flag, then config file, then built-in default.
//! The file format is one `key = value` per line; blank lines and lines
//! starting with `#` are ignored. Unknown and duplicate keys are errors, so
//! typos fail loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dcproj_core::annotation::OverlapPolicy;
use dcproj_core::classifier::TrainConfig;
use dcproj_core::corpus::TokenizerProfile;
use dcproj_core::error::{Error, Result};

/// Every key a config file may define.
const KNOWN_KEYS: &[&str] = &[
    "corpus_c",
    "corpus_a",
    "tokens",
    "lexicon_c",
    "lexicon_a",
    "annotations",
    "alignments",
    "gold",
    "output_dir",
    "aligner",
    "filter",
    "overlap",
    "em_iterations",
    "profile_c",
    "profile_a",
    "punctuation",
    "epochs",
    "learning_rate",
    "averaging",
    "seed",
    "jobs",
];

/// Parsed config file contents.
#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        FileConfig::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, format!("expected key = value, got \"{line}\"")))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::parse(path, idx + 1, format!("unknown key \"{key}\"")));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::parse(path, idx + 1, format!("duplicate key \"{key}\"")));
            }
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the config value, else nothing.
    pub fn path(&self, flag: &Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.clone().or_else(|| self.get(key).map(PathBuf::from))
    }

    /// Like [`FileConfig::path`] but the value must come from somewhere.
    pub fn required_path(&self, flag: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.path(flag, key).ok_or_else(|| {
            Error::Config(format!("missing {key}: pass --{} or set {key} in the config file", key.replace('_', "-")))
        })
    }

    /// Flag value if given, else the parsed config value, else the default.
    pub fn parse<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| Error::Config(format!("config key {key} = \"{raw}\": {e}"))),
            None => Ok(default),
        }
    }
}

/// Alignment source for `project` and `pipeline`.
///
/// Union is deliberately absent: it exists as a symmetrize method but is too
/// noisy to ever be a projection regime. `External` reads a precomputed
/// alignment file instead of training.
#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum AlignerChoice {
    Direct,
    Inverse,
    Intersection,
    GrowDiag,
    External,
}

impl FromStr for AlignerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(AlignerChoice::Direct),
            "inverse" => Ok(AlignerChoice::Inverse),
            "intersection" => Ok(AlignerChoice::Intersection),
            "grow-diag" | "grow_diag" => Ok(AlignerChoice::GrowDiag),
            "external" => Ok(AlignerChoice::External),
            other => Err(Error::Config(format!(
                "unknown aligner \"{other}\" (expected direct, inverse, intersection, grow-diag or external)"
            ))),
        }
    }
}

impl fmt::Display for AlignerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignerChoice::Direct => "direct",
            AlignerChoice::Inverse => "inverse",
            AlignerChoice::Intersection => "intersection",
            AlignerChoice::GrowDiag => "grow-diag",
            AlignerChoice::External => "external",
        })
    }
}

/// Overlap policy spelled as it appears on the command line.
pub fn parse_overlap(s: &str) -> Result<OverlapPolicy> {
    match s {
        "warn" => Ok(OverlapPolicy::Warn),
        "deny" => Ok(OverlapPolicy::Deny),
        other => Err(Error::Config(format!(
            "unknown overlap policy \"{other}\" (expected warn or deny)"
        ))),
    }
}

/// The merged settings of a projection run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub corpus_c: Option<PathBuf>,
    pub corpus_a: Option<PathBuf>,
    /// Pre-tokenized corpus; takes precedence over the raw corpus files.
    pub tokens: Option<PathBuf>,
    pub lexicon_c: Option<PathBuf>,
    pub lexicon_a: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub aligner: AlignerChoice,
    pub filter_unsupported: bool,
    pub em_iterations: usize,
    pub profile_c: TokenizerProfile,
    pub profile_a: TokenizerProfile,
    pub punctuation: Option<PathBuf>,
    pub overlap: OverlapPolicy,
    pub train: TrainConfig,
    pub seed: u64,
}

impl RunConfig {
    /// Checks the cross-field invariants: every referenced input path exists
    /// and the aligner choice is consistent with the alignments path. The
    /// output directory is exempt since it gets created.
    pub fn validate(&self) -> Result<()> {
        let inputs = [
            ("corpus_c", &self.corpus_c),
            ("corpus_a", &self.corpus_a),
            ("tokens", &self.tokens),
            ("lexicon_c", &self.lexicon_c),
            ("lexicon_a", &self.lexicon_a),
            ("annotations", &self.annotations),
            ("alignments", &self.alignments),
            ("gold", &self.gold),
            ("punctuation", &self.punctuation),
        ];
        for (name, path) in inputs {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "{name} path does not exist: {}",
                        path.display()
                    )));
                }
            }
        }
        if self.aligner == AlignerChoice::External && self.alignments.is_none() {
            return Err(Error::Config(
                "aligner external requires an alignments file".into(),
            ));
        }
        if self.aligner != AlignerChoice::External && self.alignments.is_some() {
            return Err(Error::Config(format!(
                "an alignments file was given but the aligner is {}; use --aligner external",
                self.aligner
            )));
        }
        if self.em_iterations == 0 {
            return Err(Error::Config("em_iterations must be at least 1".into()));
        }
        if self.train.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.train.learning_rate.is_finite() && self.train.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.train.learning_rate
            )));
        }
        Ok(())
    }
}
