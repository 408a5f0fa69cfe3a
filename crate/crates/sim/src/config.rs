//! Simulation configuration: defaults, an optional TOML file and command
//! line flags, merged in that order of increasing precedence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use nbmimo_core::code::CodeParams;
use nbmimo_core::modem::{MappingPlan, Scheme};
use serde::Deserialize;

use crate::error::{io_at, Result, SimError};

pub const DEFAULT_NT: usize = 16;
pub const DEFAULT_N_BITS: usize = 3456;
pub const DEFAULT_DC: usize = 4;
pub const DEFAULT_FIELD_DEGREE: u32 = 8;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_MIN_ERRORS: u64 = 100;
pub const DEFAULT_MAX_FRAMES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

/// One layer of optional settings. The command line and the config file
/// share this shape; unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigLayer {
    /// Transmit antennas
    #[arg(long)]
    pub nt: Option<usize>,
    /// Receive antennas (defaults to nt)
    #[arg(long)]
    pub nr: Option<usize>,
    /// Modulation: bpsk, qpsk or 16qam
    #[arg(long = "mod", value_name = "SCHEME")]
    #[serde(rename = "mod")]
    pub modulation: Option<String>,
    /// Code rate, 1/3 or 1/2 (alternative to --dc)
    #[arg(long, conflicts_with = "dc")]
    pub rate: Option<String>,
    /// Parity-check row weight; rate is 1 - 2/dc
    #[arg(long)]
    pub dc: Option<usize>,
    /// Codeword length in bits
    #[arg(long)]
    pub n_bits: Option<usize>,
    /// Field degree m of GF(2^m)
    #[arg(long)]
    pub field_degree: Option<u32>,
    /// Seed for code construction (defaults to --seed)
    #[arg(long)]
    pub code_seed: Option<u64>,
    /// Parity-check matrix file: loaded if it exists, otherwise written
    #[arg(long)]
    pub code_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_stop: Option<f64>,
    #[arg(long)]
    pub snr_step: Option<f64>,
    /// Decoder iteration cap
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Frame errors that end an SNR point
    #[arg(long)]
    pub min_errors: Option<u64>,
    /// Frame budget per SNR point
    #[arg(long)]
    pub max_frames: Option<u64>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the available cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path (defaults to stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn dc_for_rate(rate: &str) -> Result<usize> {
    match rate.trim() {
        "1/3" => Ok(3),
        "1/2" => Ok(4),
        other => Err(SimError::Config(format!("unsupported rate {other:?}; use 1/3 or 1/2 or --dc"))),
    }
}

impl ConfigLayer {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| SimError::ConfigFile { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::from_toml(&text, path)
    }

    /// Folds `rate` into `dc`; setting both in one layer is an error.
    fn normalized(mut self) -> Result<Self> {
        if let Some(rate) = self.rate.take() {
            let dc = dc_for_rate(&rate)?;
            if self.dc.is_some_and(|d| d != dc) {
                return Err(SimError::Config(format!("rate {rate} conflicts with dc = {}", self.dc.unwrap())));
            }
            self.dc = Some(dc);
        }
        Ok(self)
    }

    /// Field-wise `self` over `lower`.
    pub fn over(self, lower: ConfigLayer) -> Result<ConfigLayer> {
        let (a, b) = (self.normalized()?, lower.normalized()?);
        Ok(ConfigLayer {
            nt: a.nt.or(b.nt),
            nr: a.nr.or(b.nr),
            modulation: a.modulation.or(b.modulation),
            rate: None,
            dc: a.dc.or(b.dc),
            n_bits: a.n_bits.or(b.n_bits),
            field_degree: a.field_degree.or(b.field_degree),
            code_seed: a.code_seed.or(b.code_seed),
            code_file: a.code_file.or(b.code_file),
            snr_start: a.snr_start.or(b.snr_start),
            snr_stop: a.snr_stop.or(b.snr_stop),
            snr_step: a.snr_step.or(b.snr_step),
            max_iter: a.max_iter.or(b.max_iter),
            min_errors: a.min_errors.or(b.min_errors),
            max_frames: a.max_frames.or(b.max_frames),
            seed: a.seed.or(b.seed),
            workers: a.workers.or(b.workers),
            out: a.out.or(b.out),
        })
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<SimConfig> {
        let l = self.normalized()?;
        let nt = l.nt.unwrap_or(DEFAULT_NT);
        let seed = l.seed.unwrap_or(DEFAULT_SEED);
        let scheme = match l.modulation {
            Some(s) => s.parse().map_err(|e: nbmimo_core::Error| SimError::Config(e.to_string()))?,
            None => Scheme::Qpsk,
        };
        let cfg = SimConfig {
            nt,
            nr: l.nr.unwrap_or(nt),
            scheme,
            n_bits: l.n_bits.unwrap_or(DEFAULT_N_BITS),
            dc: l.dc.unwrap_or(DEFAULT_DC),
            field_degree: l.field_degree.unwrap_or(DEFAULT_FIELD_DEGREE),
            code_seed: l.code_seed.unwrap_or(seed),
            code_file: l.code_file,
            snr_start: l.snr_start.unwrap_or(0.0),
            snr_stop: l.snr_stop.unwrap_or(10.0),
            snr_step: l.snr_step.unwrap_or(1.0),
            max_iter: l.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            min_errors: l.min_errors.unwrap_or(DEFAULT_MIN_ERRORS),
            max_frames: l.max_frames.unwrap_or(DEFAULT_MAX_FRAMES),
            seed,
            workers: l.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            out: l.out,
            timing: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nt: usize,
    pub nr: usize,
    pub scheme: Scheme,
    pub n_bits: usize,
    pub dc: usize,
    pub field_degree: u32,
    pub code_seed: u64,
    pub code_file: Option<PathBuf>,
    pub snr_start: f64,
    pub snr_stop: f64,
    pub snr_step: f64,
    pub max_iter: usize,
    pub min_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    /// Record wall-clock time per point; off gives byte-identical reruns.
    pub timing: bool,
}

impl SimConfig {
    pub fn code_params(&self) -> Result<CodeParams> {
        Ok(CodeParams::from_bits(self.n_bits, self.dc, self.field_degree, self.code_seed)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if self.nt == 0 || self.nt != self.nr {
            return fail(format!("N_t = {} and N_r = {} must be equal and nonzero", self.nt, self.nr));
        }
        let params = self.code_params()?;
        MappingPlan::new(self.field_degree, self.scheme, self.nt, params.n)?;
        if !(self.snr_start.is_finite() && self.snr_stop.is_finite()) {
            return fail("SNR bounds must be finite".into());
        }
        if !(self.snr_step > 0.0 && self.snr_step.is_finite()) {
            return fail(format!("SNR step {} must be positive", self.snr_step));
        }
        if self.snr_start > self.snr_stop {
            return fail(format!("empty SNR grid: start {} > stop {}", self.snr_start, self.snr_stop));
        }
        if self.max_iter == 0 {
            return fail("max-iter must be at least 1".into());
        }
        if self.min_errors == 0 {
            return fail("min-errors must be at least 1".into());
        }
        if self.max_frames == 0 {
            return fail("max-frames must be at least 1".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Ascending SNR points `start + i * step` up to `stop`.
    pub fn snr_grid(&self) -> Vec<f64> {
        let span = (self.snr_stop - self.snr_start) / self.snr_step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let g = self.snr_start + i as f64 * self.snr_step;
                (g * 1e9).round() / 1e9
            })
            .collect()
    }

    /// Everything that determines the numbers in the output, as
    /// `key=value` pairs. Worker count and output path are left out
    /// because they do not affect results.
    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "nt={} nr={} mod={} n_bits={} dc={} field_degree={} code_seed={}",
            self.nt, self.nr, self.scheme, self.n_bits, self.dc, self.field_degree, self.code_seed
        );
        if let Some(p) = &self.code_file {
            let _ = write!(s, " code_file={}", p.display());
        }
        let _ = write!(
            s,
            " snr_start={} snr_stop={} snr_step={} max_iter={} min_errors={} max_frames={} seed={} timing={}",
            self.snr_start,
            self.snr_stop,
            self.snr_step,
            self.max_iter,
            self.min_errors,
            self.max_frames,
            self.seed,
            self.timing
        );
        s
    }
}
