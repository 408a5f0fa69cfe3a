//! Monte-Carlo BER/FER accumulation over an SNR grid.
//!
//! Frame `f` of every point uses random substream `f` of the master seed,
//! so a point is a pure function of `(seed, config, gamma)`. Frames are
//! computed in parallel batches and then consumed strictly in frame order
//! until the stop rule fires; frames computed past that point are dropped.
//! The result is therefore identical for any worker count.

use std::io::Write;
use std::time::Instant;

use log::{info, warn};
use nbmimo_core::channel::noise_from_snr;
use nbmimo_core::code::{construct_full_rank, ParityCheckMatrix};
use nbmimo_core::link::{run_frame, FrameOutcome, Link, PriorMode, ES};
use nbmimo_core::FieldTable;
use rayon::prelude::*;
use serde::Serialize;

use crate::codefile::{load_code, save_code};
use crate::config::SimConfig;
use crate::error::{Result, SimError};

/// Reseeds tried when a constructed matrix is rank deficient.
pub const MAX_RESEEDS: u64 = 16;

/// Frames per batch for each worker.
const FRAMES_PER_WORKER: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerRecord {
    pub gamma_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub info_bits: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    iterations: u64,
}

impl Tally {
    fn add(&mut self, o: &FrameOutcome) {
        self.frames += 1;
        self.bit_errors += o.bit_errors;
        self.frame_errors += o.frame_error as u64;
        self.iterations += o.iterations as u64;
    }

    fn record(&self, gamma_db: f64, bits_per_frame: u64) -> BerRecord {
        let info_bits = self.frames * bits_per_frame;
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        BerRecord {
            gamma_db,
            frames: self.frames,
            bit_errors: self.bit_errors,
            info_bits,
            frame_errors: self.frame_errors,
            ber: ratio(self.bit_errors, info_bits),
            fer: ratio(self.frame_errors, self.frames),
            mean_iterations: ratio(self.iterations, self.frames),
        }
    }
}

/// One CSV row.
#[derive(Serialize)]
struct Row {
    gamma_db: f64,
    frames: u64,
    info_bits: u64,
    bit_errors: u64,
    ber: f64,
    frame_errors: u64,
    fer: f64,
    mean_iterations: f64,
    spectral_efficiency_bps_hz: f64,
    elapsed_s: f64,
}

/// Builds the code described by `config`, or loads it from the code file
/// if that exists. A freshly built code is written to the code file.
pub fn obtain_code(config: &SimConfig, field: &FieldTable) -> Result<ParityCheckMatrix> {
    if let Some(path) = &config.code_file {
        if path.exists() {
            let code = load_code(path)?;
            info!("loaded {}x{} parity-check matrix from {}", code.p(), code.n(), path.display());
            return Ok(code);
        }
    }
    let (code, _) = construct_full_rank(&config.code_params()?, field, MAX_RESEEDS)?;
    if let Some(path) = &config.code_file {
        save_code(&code, path)?;
        info!("wrote parity-check matrix to {}", path.display());
    }
    Ok(code)
}

pub struct Simulator {
    config: SimConfig,
    link: Link,
    pool: Option<rayon::ThreadPool>,
}

impl Simulator {
    pub fn new(mut config: SimConfig) -> Result<Self> {
        config.validate()?;
        let field = FieldTable::with_default_poly(config.field_degree)?;
        let code = obtain_code(&config, &field)?;
        if code.m() != config.field_degree {
            return Err(SimError::Config(format!(
                "code file is over GF(2^{}), configuration asks for GF(2^{})",
                code.m(),
                config.field_degree
            )));
        }
        if !code.is_regular(2, code.dc()) {
            return Err(SimError::Config("code is not (2, dc)-regular".into()));
        }
        // a loaded code decides the code shape
        config.n_bits = code.n() * code.m() as usize;
        config.dc = code.dc();
        config.code_seed = code.seed();
        let link = Link::new(field, code, config.scheme, config.nt, config.nr)?;
        let pool = if config.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
            Some(pool)
        } else {
            None
        };
        Ok(Simulator { config, link, pool })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    fn frames(&self, gamma_db: f64, range: std::ops::Range<u64>) -> Result<Vec<FrameOutcome>> {
        let noise = noise_from_snr(gamma_db, ES);
        let (l_max, seed) = (self.config.max_iter, self.config.seed);
        let link = &self.link;
        match &self.pool {
            None => {
                let mut dec = link.decoder()?;
                range
                    .map(|f| Ok(run_frame(link, &mut dec, noise, l_max, seed, f, PriorMode::Detector)?))
                    .collect()
            }
            Some(pool) => pool.install(|| {
                range
                    .into_par_iter()
                    .map_init(
                        || link.decoder(),
                        |dec, f| {
                            let dec = dec.as_mut().map_err(|e| SimError::Core(e.clone()))?;
                            Ok(run_frame(link, dec, noise, l_max, seed, f, PriorMode::Detector)?)
                        },
                    )
                    .collect()
            }),
        }
    }

    /// Accumulates frames at one SNR until `min_errors` frame errors or
    /// `max_frames` frames.
    pub fn run_point(&self, gamma_db: f64) -> Result<BerRecord> {
        let cfg = &self.config;
        let batch = if self.pool.is_some() { cfg.workers as u64 * FRAMES_PER_WORKER } else { 1 };
        let mut tally = Tally::default();
        let mut next = 0;
        'outer: while next < cfg.max_frames {
            let end = (next + batch).min(cfg.max_frames);
            for o in self.frames(gamma_db, next..end)? {
                tally.add(&o);
                if tally.frame_errors >= cfg.min_errors {
                    break 'outer;
                }
            }
            next = end;
        }
        Ok(tally.record(gamma_db, self.link.info_bits() as u64))
    }

    /// Runs every grid point, writing the `#` header, the CSV header and
    /// one row per point to `out` as results arrive.
    pub fn run_sweep<W: Write>(&self, mut out: W) -> Result<Vec<BerRecord>> {
        writeln!(out, "# {} spectral_efficiency={}", self.config.header(), self.link.spectral_efficiency())?;
        let mut csv = csv::Writer::from_writer(out);
        let mut records: Vec<BerRecord> = Vec::new();
        for gamma_db in self.config.snr_grid() {
            let start = Instant::now();
            let r = self.run_point(gamma_db)?;
            let elapsed_s = if self.config.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            info!(
                "{gamma_db} dB: {} frames, {} frame errors, BER {:.3e}",
                r.frames, r.frame_errors, r.ber
            );
            if let Some(prev) = records.last() {
                if r.ber > prev.ber && r.frame_errors >= 10 && prev.frame_errors >= 10 {
                    warn!("BER rose from {:.3e} at {} dB to {:.3e} at {} dB", prev.ber, prev.gamma_db, r.ber, gamma_db);
                }
            }
            csv.serialize(Row {
                gamma_db,
                frames: r.frames,
                info_bits: r.info_bits,
                bit_errors: r.bit_errors,
                ber: r.ber,
                frame_errors: r.frame_errors,
                fer: r.fer,
                mean_iterations: r.mean_iterations,
                spectral_efficiency_bps_hz: self.link.spectral_efficiency(),
                elapsed_s,
            })?;
            csv.flush()?;
            records.push(r);
        }
        Ok(records)
    }
}
