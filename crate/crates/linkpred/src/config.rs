//! Flat `key = value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key can also
//! be set from the command line, which takes precedence over the file.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use linkpred_core::classifier::ClassifierConfig;
use linkpred_core::features::FeatureMode;
use linkpred_core::paragraph::DEFAULT_MIN_COUNT;
use linkpred_core::skipgram::TrainConfig;
use linkpred_core::walker::WalkParams;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value {value:?} for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub edges: Option<PathBuf>,
    /// Second snapshot; when present the split is temporal.
    pub later_edges: Option<PathBuf>,
    pub content: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub directed: bool,
    pub default_weight: f64,
    pub walk: WalkParams,
    pub structural: TrainConfig,
    pub content_model: TrainConfig,
    pub min_count: u64,
    pub test_fraction: f64,
    pub classifier: ClassifierConfig,
    pub mode: FeatureMode,
    pub seed: u64,
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            edges: None,
            later_edges: None,
            content: None,
            output: None,
            directed: true,
            default_weight: 1.0,
            walk: WalkParams::default(),
            structural: TrainConfig::default(),
            content_model: TrainConfig {
                window: 5,
                epochs: 10,
                ..TrainConfig::default()
            },
            min_count: DEFAULT_MIN_COUNT,
            test_fraction: 0.1,
            classifier: ClassifierConfig::default(),
            mode: FeatureMode::Both,
            seed: 0,
            threads: 1,
        }
    }
}

/// Every accepted key, in the order used when rendering.
pub const KEYS: &[&str] = &[
    "edges",
    "later_edges",
    "content",
    "output",
    "directed",
    "default_weight",
    "alpha",
    "walk_length",
    "walks_per_node",
    "struct_dim",
    "struct_window",
    "struct_epochs",
    "struct_negatives",
    "struct_lr_start",
    "struct_lr_end",
    "content_dim",
    "content_window",
    "content_epochs",
    "content_negatives",
    "content_lr_start",
    "content_lr_end",
    "min_count",
    "test_fraction",
    "classifier_lr",
    "classifier_epochs",
    "classifier_l2",
    "classifier_batch_size",
    "classifier_standardize",
    "mode",
    "seed",
    "threads",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.to_owned(),
        value: value.to_owned(),
        reason: e.to_string(),
    })
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl std::str::FromStr for PipelineConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        cfg.merge_str(text)?;
        Ok(cfg)
    }
}

impl PipelineConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    /// Applies the assignments in `text` on top of the current values.
    pub fn merge_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: "expected key = value".to_owned(),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| ConfigError::Syntax {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "edges" => self.edges = path(value),
            "later_edges" => self.later_edges = path(value),
            "content" => self.content = path(value),
            "output" => self.output = path(value),
            "directed" => self.directed = parse(key, value)?,
            "default_weight" => self.default_weight = parse(key, value)?,
            "alpha" => self.walk.alpha = parse(key, value)?,
            "walk_length" => self.walk.max_length = parse(key, value)?,
            "walks_per_node" => self.walk.walks_per_node = parse(key, value)?,
            "struct_dim" => self.structural.dim = parse(key, value)?,
            "struct_window" => self.structural.window = parse(key, value)?,
            "struct_epochs" => self.structural.epochs = parse(key, value)?,
            "struct_negatives" => self.structural.negatives = parse(key, value)?,
            "struct_lr_start" => self.structural.lr_start = parse(key, value)?,
            "struct_lr_end" => self.structural.lr_end = parse(key, value)?,
            "content_dim" => self.content_model.dim = parse(key, value)?,
            "content_window" => self.content_model.window = parse(key, value)?,
            "content_epochs" => self.content_model.epochs = parse(key, value)?,
            "content_negatives" => self.content_model.negatives = parse(key, value)?,
            "content_lr_start" => self.content_model.lr_start = parse(key, value)?,
            "content_lr_end" => self.content_model.lr_end = parse(key, value)?,
            "min_count" => self.min_count = parse(key, value)?,
            "test_fraction" => self.test_fraction = parse(key, value)?,
            "classifier_lr" => self.classifier.lr = parse(key, value)?,
            "classifier_epochs" => self.classifier.epochs = parse(key, value)?,
            "classifier_l2" => self.classifier.l2 = parse(key, value)?,
            "classifier_batch_size" => self.classifier.batch_size = parse(key, value)?,
            "classifier_standardize" => self.classifier.standardize = parse(key, value)?,
            "mode" => {
                self.mode = FeatureMode::parse(value).ok_or_else(|| ConfigError::InvalidValue {
                    key: key.to_owned(),
                    value: value.to_owned(),
                    reason: "expected both, structural-only or content-only".to_owned(),
                })?
            }
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "edges" => show_path(&self.edges),
            "later_edges" => show_path(&self.later_edges),
            "content" => show_path(&self.content),
            "output" => show_path(&self.output),
            "directed" => self.directed.to_string(),
            "default_weight" => self.default_weight.to_string(),
            "alpha" => self.walk.alpha.to_string(),
            "walk_length" => self.walk.max_length.to_string(),
            "walks_per_node" => self.walk.walks_per_node.to_string(),
            "struct_dim" => self.structural.dim.to_string(),
            "struct_window" => self.structural.window.to_string(),
            "struct_epochs" => self.structural.epochs.to_string(),
            "struct_negatives" => self.structural.negatives.to_string(),
            "struct_lr_start" => self.structural.lr_start.to_string(),
            "struct_lr_end" => self.structural.lr_end.to_string(),
            "content_dim" => self.content_model.dim.to_string(),
            "content_window" => self.content_model.window.to_string(),
            "content_epochs" => self.content_model.epochs.to_string(),
            "content_negatives" => self.content_model.negatives.to_string(),
            "content_lr_start" => self.content_model.lr_start.to_string(),
            "content_lr_end" => self.content_model.lr_end.to_string(),
            "min_count" => self.min_count.to_string(),
            "test_fraction" => self.test_fraction.to_string(),
            "classifier_lr" => self.classifier.lr.to_string(),
            "classifier_epochs" => self.classifier.epochs.to_string(),
            "classifier_l2" => self.classifier.l2.to_string(),
            "classifier_batch_size" => self.classifier.batch_size.to_string(),
            "classifier_standardize" => self.classifier.standardize.to_string(),
            "mode" => self.mode.as_str().to_owned(),
            "seed" => self.seed.to_string(),
            "threads" => self.threads.to_string(),
            _ => return None,
        })
    }

    /// All keys with their resolved values.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| (k, self.get(k).expect("every key renders")))
            .collect()
    }

    /// Text that parses back to `self`.
    pub fn render(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Parameter checks that do not touch the file system.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: linkpred_core::Error| ConfigError::Invalid(e.to_string());
        self.walk.validate().map_err(invalid)?;
        self.structural.validate().map_err(invalid)?;
        if self.mode.uses_content() {
            self.content_model.validate().map_err(invalid)?;
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(ConfigError::Invalid(
                "test_fraction must lie strictly between 0 and 1".to_owned(),
            ));
        }
        if !(self.default_weight.is_finite() && self.default_weight > 0.0) {
            return Err(ConfigError::Invalid("default_weight must be positive".to_owned()));
        }
        if self.threads == 0 {
            return Err(ConfigError::Invalid("threads must be at least 1".to_owned()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::default();
        assert_eq!(c.walk.alpha, 0.2);
        assert_eq!(c.walk.max_length, 80);
        assert_eq!(c.walk.walks_per_node, 10);
        assert_eq!(c.structural.dim, 100);
        assert_eq!(c.structural.window, 10);
        assert_eq!(c.content_model.dim, 100);
        assert_eq!(c.test_fraction, 0.1);
        assert_eq!(c.mode, FeatureMode::Both);
    }

    #[test]
    fn parses_and_overrides() {
        let mut c = "# comment\nalpha = 0.5\n\nstruct_dim=16\nmode = structural-only\nedges = g.tsv\n"
            .parse::<PipelineConfig>()
            .unwrap();
        assert_eq!(c.walk.alpha, 0.5);
        assert_eq!(c.structural.dim, 16);
        assert_eq!(c.mode, FeatureMode::StructuralOnly);
        assert_eq!(c.edges, Some(PathBuf::from("g.tsv")));
        c.set("alpha", "0.7").unwrap();
        assert_eq!(c.walk.alpha, 0.7);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = "alpha = 0.1\nbogus = 1\n".parse::<PipelineConfig>().unwrap_err();
        assert_eq!(e.to_string(), "line 2: unknown key `bogus`");
        let e = "seed = -3".parse::<PipelineConfig>().unwrap_err();
        assert!(e.to_string().starts_with("line 1: invalid value"), "{e}");
        assert!("alpha".parse::<PipelineConfig>().is_err());
    }

    #[test]
    fn render_round_trips() {
        let mut c = PipelineConfig::default();
        c.set("content", "posts.jsonl").unwrap();
        c.set("struct_lr_start", "0.0375").unwrap();
        c.set("classifier_standardize", "false").unwrap();
        assert_eq!(c.render().parse::<PipelineConfig>().unwrap(), c);
        assert_eq!(
            PipelineConfig::default().render().parse::<PipelineConfig>().unwrap(),
            PipelineConfig::default()
        );
        assert!(KEYS.iter().all(|k| c.get(k).is_some()));
    }

    #[test]
    fn validation() {
        let mut c = PipelineConfig::default();
        c.validate().unwrap();
        c.walk.alpha = 1.5;
        assert!(c.validate().is_err());
        c.walk.alpha = 0.2;
        c.test_fraction = 1.0;
        assert!(c.validate().is_err());
    }
}
