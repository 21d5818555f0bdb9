//! Experiment configuration: command-line flags over a `key=value` file over
//! built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use polar_overlap::efficiency::AreaModel;
use polar_overlap::overlap_sim::Scheme;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const DEFAULT_RATES: &str = "0.25,0.4,0.5,0.6,0.75,0.9";

/// Flags shared by every subcommand. Each also works as a config file key
/// (`list = 4`); area coefficients use `area.<name>` keys.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// key=value configuration file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Block length (power of two)
    #[arg(long)]
    pub n: Option<usize>,
    /// Information bits; exclusive with --rate
    #[arg(long)]
    pub k: Option<usize>,
    /// Code rate, or a comma-separated sweep for latency/efficiency
    #[arg(long)]
    pub rate: Option<String>,
    /// List size
    #[arg(long)]
    pub list: Option<usize>,
    /// plain, md[<m>], irregular[:<cap>], plcas or adaptive[:<gamma>]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Bits per decision epoch for multi-decision
    #[arg(long)]
    pub m: Option<usize>,
    /// Adaptive pruning threshold
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Eb/N0 in dB, comma-separated
    #[arg(long)]
    pub snr: Option<String>,
    /// Frames per SNR point
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file (default stdout)
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// key=value file with area coefficients
    #[arg(long, value_name = "FILE")]
    pub area_model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodeSize {
    K(usize),
    Rates(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub size: CodeSize,
    pub l: usize,
    /// `None` means the subcommand's default scheme set.
    pub scheme: Option<Scheme>,
    pub m: usize,
    pub gamma: f64,
    pub snrs: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub jobs: usize,
    pub output: Option<PathBuf>,
    pub area: AreaModel,
}

const KEYS: [&str; 13] = [
    "n",
    "k",
    "rate",
    "list",
    "scheme",
    "m",
    "gamma",
    "snr",
    "trials",
    "seed",
    "jobs",
    "output",
    "area-model",
];

fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", no + 1)))?;
        let key = key.trim();
        let key = if key.starts_with("area.") {
            key.to_string()
        } else {
            key.replace('_', "-")
        };
        if !KEYS.contains(&key.as_str()) && !key.starts_with("area.") {
            return Err(CliError::Config(format!(
                "line {}: unknown key {key:?}",
                no + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let list: Vec<f64> = value
        .split(',')
        .map(|v| parse(key, v))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    Ok(list)
}

/// Scheme name with its parameter taken from `m` / `gamma` when omitted.
pub fn parse_scheme(text: &str, m: usize, gamma: f64) -> Result<Scheme, CliError> {
    let full = match text.trim().to_ascii_lowercase().as_str() {
        "md" | "multidecision" => format!("md{m}"),
        "adaptive" => format!("adaptive:{gamma}"),
        other => other.to_string(),
    };
    Ok(full.parse()?)
}

impl ExperimentConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => parse_file(&read(path)?)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());
        let n: usize = match pick(args.n.map(|v| v.to_string()), "n") {
            Some(v) => parse("n", &v)?,
            None => 1024,
        };
        let size = match (args.k, &args.rate) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either --k or --rate".into())),
            (Some(k), None) => CodeSize::K(k),
            (None, Some(r)) => CodeSize::Rates(parse_list("rate", r)?),
            (None, None) => match (file.get("k"), file.get("rate")) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Config("config file gives both k and rate".into()))
                }
                (Some(k), None) => CodeSize::K(parse("k", k)?),
                (None, Some(r)) => CodeSize::Rates(parse_list("rate", r)?),
                (None, None) => CodeSize::Rates(Vec::new()),
            },
        };
        let num = |flag: Option<String>, key: &str, default: &str| -> String {
            pick(flag, key).unwrap_or_else(|| default.to_string())
        };
        let l = parse("list", &num(args.list.map(|v| v.to_string()), "list", "4"))?;
        let m = parse("m", &num(args.m.map(|v| v.to_string()), "m", "4"))?;
        let gamma = parse(
            "gamma",
            &num(args.gamma.map(|v| v.to_string()), "gamma", "3"),
        )?;
        let scheme = match pick(args.scheme.clone(), "scheme") {
            Some(s) => Some(parse_scheme(&s, m, gamma)?),
            None => None,
        };
        let snrs = parse_list("snr", &num(args.snr.clone(), "snr", "2"))?;
        let trials = parse(
            "trials",
            &num(args.trials.map(|v| v.to_string()), "trials", "1000"),
        )?;
        let seed = parse("seed", &num(args.seed.map(|v| v.to_string()), "seed", "1"))?;
        let jobs = parse("jobs", &num(args.jobs.map(|v| v.to_string()), "jobs", "0"))?;
        let output = args
            .output
            .clone()
            .or_else(|| file.get("output").map(PathBuf::from));

        let mut area = match args
            .area_model
            .clone()
            .or_else(|| file.get("area-model").map(PathBuf::from))
        {
            Some(path) => read(&path)?.parse::<AreaModel>()?,
            None => AreaModel::default(),
        };
        for (key, value) in file.iter().filter(|(k, _)| k.starts_with("area.")) {
            area.set(&key["area.".len()..], value)?;
        }
        area.validate()?;

        if trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        Ok(Self {
            n,
            size,
            l,
            scheme,
            m,
            gamma,
            snrs,
            trials,
            seed,
            jobs,
            output,
            area,
        })
    }

    /// Rates to sweep; a fixed `k` becomes the single rate `k / n`.
    pub fn rates(&self) -> Vec<f64> {
        match &self.size {
            CodeSize::K(k) => vec![*k as f64 / self.n as f64],
            CodeSize::Rates(r) if r.is_empty() => DEFAULT_RATES
                .split(',')
                .map(|r| r.parse().unwrap())
                .collect(),
            CodeSize::Rates(r) => r.clone(),
        }
    }

    /// Single information length for per-frame commands.
    pub fn k(&self) -> Result<usize, CliError> {
        match &self.size {
            CodeSize::K(k) => Ok(*k),
            CodeSize::Rates(r) if r.is_empty() => Ok(self.n / 2),
            CodeSize::Rates(r) if r.len() == 1 => {
                Ok(polar_overlap::latency_models::k_for_rate(self.n, r[0])?)
            }
            CodeSize::Rates(_) => Err(CliError::Config("this command takes a single rate".into())),
        }
    }

    /// Canonical text of every setting that affects the output.
    pub fn canonical(&self, command: &str) -> String {
        let mut out = String::new();
        let size = match &self.size {
            CodeSize::K(k) => format!("k={k}"),
            CodeSize::Rates(_) => format!("rates={:?}", self.rates()),
        };
        let scheme = self.scheme.map_or("default".to_string(), |s| s.to_string());
        let _ = write!(
            out,
            "command={command};n={};{size};list={};scheme={scheme};m={};gamma={};snr={:?};trials={};seed={};area={:?}",
            self.n, self.l, self.m, self.gamma, self.snrs, self.trials, self.seed, self.area
        );
        out
    }

    /// `# polar-overlap <version> seed=<seed> config=<sha256 prefix>`
    pub fn provenance(&self, command: &str) -> String {
        let digest = Sha256::digest(self.canonical(command).as_bytes());
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        format!(
            "# polar-overlap {} {command} seed={} config={hex}",
            env!("CARGO_PKG_VERSION"),
            self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys() {
        let map = parse_file("n = 64 # block\n\nlist=2\narea.pu_cost=2\narea_model=x\n").unwrap();
        assert_eq!(map["n"], "64");
        assert_eq!(map["list"], "2");
        assert_eq!(map["area.pu_cost"], "2");
        assert_eq!(map["area-model"], "x");
        assert!(parse_file("bogus=1").is_err());
        assert!(parse_file("n").is_err());
    }

    #[test]
    fn scheme_defaults_from_m_and_gamma() {
        assert_eq!(
            parse_scheme("md", 8, 3.0).unwrap(),
            Scheme::MultiDecision(8)
        );
        assert_eq!(
            parse_scheme("adaptive", 4, 1.5).unwrap(),
            Scheme::Adaptive(1.5)
        );
        assert_eq!(
            parse_scheme("md2", 8, 3.0).unwrap(),
            Scheme::MultiDecision(2)
        );
        assert!(parse_scheme("nope", 4, 3.0).is_err());
    }

    #[test]
    fn defaults_and_exclusive_size() {
        let cfg = ExperimentConfig::resolve(&ConfigArgs::default()).unwrap();
        assert_eq!((cfg.n, cfg.l, cfg.trials, cfg.seed), (1024, 4, 1000, 1));
        assert_eq!(cfg.k().unwrap(), 512);
        assert_eq!(cfg.rates().len(), 6);
        let args = ConfigArgs {
            k: Some(3),
            rate: Some("0.5".into()),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(&args).is_err());
    }

    #[test]
    fn hash_tracks_settings() {
        let a = ExperimentConfig::resolve(&ConfigArgs::default()).unwrap();
        let b = ExperimentConfig::resolve(&ConfigArgs {
            list: Some(8),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(a.provenance("fer"), a.provenance("fer"));
        assert_ne!(a.provenance("fer"), b.provenance("fer"));
        assert!(a
            .provenance("fer")
            .starts_with("# polar-overlap 0.1.0 fer seed=1 config="));
    }
}
