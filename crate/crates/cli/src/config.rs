use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use concop::sets::SetDescriptor;
use concop::spectral::Method;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Dense,
    Lanczos,
    Power,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dense => Method::Dense,
            MethodArg::Lanczos => Method::Lanczos,
            MethodArg::Power => Method::Power,
        }
    }
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the command default.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// First set: a JSON descriptor file or inline JSON.
    #[arg(long, global = true)]
    pub set: Option<String>,
    /// Second set (F for two-set commands; defaults to the first set).
    #[arg(long, global = true)]
    pub set2: Option<String>,
    /// Grid length.
    #[arg(long = "L", global = true)]
    pub length: Option<f64>,
    /// Grid size, a power of two.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Radius; repeat for a list.
    #[arg(long = "R", global = true)]
    pub radii: Vec<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; repeat for several.
    #[arg(long, value_enum, global = true)]
    pub format: Vec<Format>,
    #[arg(long, global = true)]
    pub dense_cap: Option<usize>,
    /// Number of eigenvalues for `spectrum`.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, value_enum, global = true)]
    pub method: Option<MethodArg>,
    /// Half-width of the sample range for `schur`.
    #[arg(long, global = true)]
    pub sample_extent: Option<f64>,
    /// Spacing of the sample points for `schur`.
    #[arg(long, global = true)]
    pub sample_step: Option<f64>,
    /// JSON config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Config file layout. Sets may be given as descriptor objects or as
/// strings, which are read like the `--set` flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    set: Option<Value>,
    set2: Option<Value>,
    #[serde(rename = "L")]
    length: Option<f64>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "R")]
    radii: Option<Vec<f64>>,
    tol: Option<f64>,
    seed: Option<u64>,
    max_iter: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Vec<Format>>,
    dense_cap: Option<usize>,
    k: Option<usize>,
    method: Option<MethodArg>,
    sample_extent: Option<f64>,
    sample_step: Option<f64>,
}

/// Fully resolved run configuration. Its JSON form, without the output
/// location and formats, is what the config hash is taken over.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub set: Option<SetDescriptor>,
    pub set2: Option<SetDescriptor>,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub radii: Vec<f64>,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub dense_cap: usize,
    pub k: usize,
    pub method: MethodArg,
    pub sample_extent: f64,
    pub sample_step: f64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub formats: Vec<Format>,
}

fn default_tol(command: &str) -> f64 {
    match command {
        "profile" => 1e-4,
        "spectrum" => 1e-10,
        _ => 1e-8,
    }
}

fn parse_descriptor(text: &str) -> Result<SetDescriptor, Failure> {
    let trimmed = text.trim_start();
    let json = if trimmed.starts_with('{') {
        text.to_string()
    } else {
        fs::read_to_string(text).map_err(|e| Failure::Input(format!("cannot read set file `{text}`: {e}")))?
    };
    serde_json::from_str(&json).map_err(|e| Failure::Input(format!("bad set descriptor: {e}")))
}

fn descriptor_value(v: Value) -> Result<SetDescriptor, Failure> {
    match v {
        Value::String(s) => parse_descriptor(&s),
        other => serde_json::from_value(other).map_err(|e| Failure::Input(format!("bad set descriptor: {e}"))),
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read config `{}`: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("bad config `{}`: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(command: &str, flags: Flags) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let set = match (flags.set, file.set) {
            (Some(s), _) => Some(parse_descriptor(&s)?),
            (None, Some(v)) => Some(descriptor_value(v)?),
            (None, None) => None,
        };
        let set2 = match (flags.set2, file.set2) {
            (Some(s), _) => Some(parse_descriptor(&s)?),
            (None, Some(v)) => Some(descriptor_value(v)?),
            (None, None) => None,
        };
        let length = flags.length.or(file.length).unwrap_or(64.0);
        let n = flags.n.or(file.n).unwrap_or(1 << 13);
        let dense_cap = flags.dense_cap.or(file.dense_cap).unwrap_or(concop::spectral::DEFAULT_DENSE_CAP);
        let method = flags.method.or(file.method).unwrap_or(if n <= dense_cap {
            MethodArg::Dense
        } else {
            MethodArg::Lanczos
        });
        let radii = if flags.radii.is_empty() {
            file.radii.unwrap_or_default()
        } else {
            flags.radii
        };
        let formats = if flags.format.is_empty() {
            file.format.unwrap_or_else(|| vec![Format::Json])
        } else {
            flags.format
        };
        let cfg = Self {
            command: command.to_string(),
            set,
            set2,
            length,
            n,
            radii,
            tol: flags.tol.or(file.tol).unwrap_or_else(|| default_tol(command)),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            max_iter: flags.max_iter.or(file.max_iter).unwrap_or(5000),
            dense_cap,
            k: flags.k.or(file.k).unwrap_or(20),
            method,
            sample_extent: flags.sample_extent.or(file.sample_extent).unwrap_or(0.25 * length),
            sample_step: flags.sample_step.or(file.sample_step).unwrap_or(0.125),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            formats,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let bad = |msg: String| Err(Failure::Input(msg));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.sample_step > 0.0 && self.sample_extent >= 0.0) {
            return bad("sample_step must be positive and sample_extent non-negative".into());
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("every R must be positive and finite".into());
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// The first set, which every command needs.
    pub fn first_set(&self) -> Result<&SetDescriptor, Failure> {
        self.set
            .as_ref()
            .ok_or_else(|| Failure::Input(format!("`{}` needs --set", self.command)))
    }

    /// The second set, falling back to the first.
    pub fn second_set(&self) -> Result<&SetDescriptor, Failure> {
        match &self.set2 {
            Some(s) => Ok(s),
            None => self.first_set(),
        }
    }

    pub fn radii_required(&self) -> Result<&[f64], Failure> {
        if self.radii.is_empty() {
            Err(Failure::Input(format!("`{}` needs at least one --R", self.command)))
        } else {
            Ok(&self.radii)
        }
    }
}
