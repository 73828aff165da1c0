//! Monte Carlo bit-error-rate campaigns.
//!
//! A campaign sweeps an Eb/N0 grid for one channel scenario. Every block is an
//! independent trial with its own random stream, derived from
//! `(master_seed, scenario, grid index, block index)`, so results do not depend
//! on scheduling or on how many blocks follow. The exhaustive nearest-neighbor
//! optimum is always computed and serves as the agreement baseline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoder::{decode_exhaustive, decode_sdp, DecodeMethod, DecodingProblem, Rounding};
use crate::error::{invalid, parse_err, Error, Result};
use crate::pulse_channel::{
    draw_channel, synth_response, ChannelRealization, PulseSpec, SvChannelParams,
};
use crate::sdp::{SdpStatus, SolverSettings};
use crate::system_model::{build_volterra, encode_recursive, SystemConfig};
use crate::waveform_rx::{acr_demod, add_noise, ebn0_to_n0, synth_rx_waveform, NoiseSpec};

/// Header row of the campaign CSV.
pub const CSV_HEADER: [&str; 8] = [
    "scenario",
    "decoder",
    "ebn0_db",
    "bit_errors",
    "bits",
    "ber",
    "agreement",
    "wall_time_s",
];

/// Named delay-spread presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Single tap, no ISI.
    Flat,
    /// 30 ns delay spread.
    Mild,
    /// 200 ns delay spread.
    Severe,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Flat, Scenario::Mild, Scenario::Severe];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Mild => "mild",
            Self::Severe => "severe",
        }
    }

    pub fn channel(&self) -> SvChannelParams {
        match self {
            Self::Flat => SvChannelParams::flat(),
            Self::Mild => SvChannelParams::mild(),
            Self::Severe => SvChannelParams::severe(),
        }
    }

    /// Index mixed into the trial seeds.
    fn index(&self) -> u64 {
        match self {
            Self::Flat => 0,
            Self::Mild => 1,
            Self::Severe => 2,
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "flat" => Ok(Self::Flat),
            "mild" => Ok(Self::Mild),
            "severe" => Ok(Self::Severe),
            other => Err(invalid(format!(
                "unknown scenario `{other}` (expected flat, mild or severe)"
            ))),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub system: SystemConfig,
    pub channel: SvChannelParams,
    /// Label written to the CSV; a preset name also selects the seed stream.
    pub scenario_name: String,
    /// Grid points in dB; `inf` means noiseless.
    pub ebn0_grid_db: Vec<f64>,
    pub blocks_per_point: usize,
    pub master_seed: u64,
    pub decoders: Vec<DecodeMethod>,
    pub output_path: Option<PathBuf>,
    pub pulse: PulseSpec,
    pub solver: SolverSettings,
    /// Random hyperplanes drawn by `sdp_randomized`.
    pub randomized_trials: usize,
    /// Draw one channel for the whole campaign instead of one per block.
    pub pin_channel: bool,
    /// Write measured decode times to the CSV. Off by default so that
    /// reruns produce byte-identical files.
    pub record_timing: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self::for_scenario(Scenario::Mild)
    }
}

impl CampaignConfig {
    /// Reference block parameters with the given channel preset,
    /// Eb/N0 from 0 to 20 dB in 2 dB steps and 10⁴ blocks per point.
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self {
            system: SystemConfig::reference(),
            channel: scenario.channel(),
            scenario_name: scenario.name().to_string(),
            ebn0_grid_db: (0..=10).map(|k| 2.0 * k as f64).collect(),
            blocks_per_point: 10_000,
            master_seed: 0,
            decoders: vec![DecodeMethod::Exhaustive, DecodeMethod::SdpSign],
            output_path: None,
            pulse: PulseSpec::default(),
            solver: SolverSettings::default(),
            randomized_trials: 32,
            pin_channel: false,
            record_timing: false,
        }
    }

    /// The preset this campaign is labeled with, if any.
    pub fn scenario(&self) -> Option<Scenario> {
        self.scenario_name.parse().ok()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks_per_point == 0 {
            return Err(invalid("blocks_per_point must be at least 1"));
        }
        if self.ebn0_grid_db.is_empty() {
            return Err(invalid("the Eb/N0 grid is empty"));
        }
        if let Some(v) = self
            .ebn0_grid_db
            .iter()
            .find(|v| v.is_nan() || **v == f64::NEG_INFINITY)
        {
            return Err(invalid(format!("Eb/N0 grid point {v} is not usable")));
        }
        if self.decoders.is_empty() {
            return Err(invalid("no decoders selected"));
        }
        if self.scenario_name.trim().is_empty() || self.scenario_name.contains([',', '\n', '"']) {
            return Err(invalid("scenario name must be a non-empty plain label"));
        }
        self.channel.validate()?;
        self.solver.validate()?;
        if self.system.n_symbols() > crate::decoder::MAX_EXHAUSTIVE_SYMBOLS {
            return Err(Error::BlockTooLarge(self.system.n_symbols()));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep the
    /// defaults of the named scenario (mild if none is given).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_err(
                    line_no,
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let key = key.trim().to_string();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(parse_err(line_no, format!("unknown key `{key}`")));
            }
            if entries
                .insert(key.clone(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(parse_err(line_no, format!("duplicate key `{key}`")));
            }
        }
        let get = |k: &str| entries.get(k).map(|(l, v)| (*l, v.as_str()));

        let mut cfg = match get("scenario") {
            Some((line, name)) => match name.parse::<Scenario>() {
                Ok(s) => Self::for_scenario(s),
                Err(_) => {
                    if name.is_empty() {
                        return Err(parse_err(line, "empty scenario name"));
                    }
                    Self {
                        scenario_name: name.to_string(),
                        ..Self::default()
                    }
                }
            },
            None => Self::default(),
        };

        if let Some((l, v)) = get("mean_arrival_interval") {
            cfg.channel.mean_arrival_interval = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("decay_constant") {
            cfg.channel.decay_constant = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("max_delay_spread") {
            cfg.channel.max_delay_spread = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("random_polarity") {
            cfg.channel.random_polarity = parse_bool(l, v)?;
        }

        let sys = &cfg.system;
        let n_symbols = get("n_symbols")
            .map(|(l, v)| parse_num::<usize>(l, v))
            .transpose()?
            .unwrap_or(sys.n_symbols());
        let symbol_duration = get("symbol_duration")
            .map(|(l, v)| parse_num::<f64>(l, v))
            .transpose()?
            .unwrap_or(sys.symbol_duration());
        let integral_time = get("integral_time")
            .map(|(l, v)| parse_num::<f64>(l, v))
            .transpose()?
            .unwrap_or(sys.integral_time());
        let amplitude_code = get("amplitude_code")
            .map(|(l, v)| parse_list::<i8>(l, v))
            .transpose()?
            .unwrap_or_else(|| sys.amplitude_code().to_vec());
        let hopping_code = get("hopping_code")
            .map(|(l, v)| parse_list::<f64>(l, v))
            .transpose()?
            .unwrap_or_else(|| sys.hopping_code().to_vec());
        cfg.system = SystemConfig::new(
            n_symbols,
            symbol_duration,
            integral_time,
            amplitude_code,
            hopping_code,
        )?;

        if get("tau_m").is_some() || get("dt").is_some() {
            let tau_m = get("tau_m")
                .map(|(l, v)| parse_num::<f64>(l, v))
                .transpose()?
                .unwrap_or(cfg.pulse.tau_m());
            let dt = get("dt")
                .map(|(l, v)| parse_num::<f64>(l, v))
                .transpose()?
                .unwrap_or(cfg.pulse.dt());
            cfg.pulse = PulseSpec::with_dt(tau_m, dt)?;
        }

        if let Some((l, v)) = get("ebn0_grid_db") {
            cfg.ebn0_grid_db = parse_list(l, v)?;
        }
        if let Some((l, v)) = get("blocks_per_point") {
            cfg.blocks_per_point = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("master_seed") {
            cfg.master_seed = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("decoders") {
            cfg.decoders = parse_decoders(v).map_err(|e| parse_err(l, e.to_string()))?;
        }
        if let Some((_, v)) = get("output_path") {
            cfg.output_path = (!v.is_empty()).then(|| PathBuf::from(v));
        }
        if let Some((l, v)) = get("randomized_trials") {
            cfg.randomized_trials = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("pin_channel") {
            cfg.pin_channel = parse_bool(l, v)?;
        }
        if let Some((l, v)) = get("record_timing") {
            cfg.record_timing = parse_bool(l, v)?;
        }
        if let Some((l, v)) = get("feas_tol") {
            cfg.solver.feas_tol = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("gap_tol") {
            cfg.solver.gap_tol = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("eig_tol") {
            cfg.solver.eig_tol = parse_num(l, v)?;
        }
        if let Some((l, v)) = get("max_iterations") {
            cfg.solver.max_iterations = parse_num(l, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Renders every key, so that `from_text(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        fn list<T: std::fmt::Debug>(v: &[T]) -> String {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        }
        let s = &self.system;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("scenario", self.scenario_name.clone());
        kv("n_symbols", s.n_symbols().to_string());
        kv("symbol_duration", format!("{:?}", s.symbol_duration()));
        kv("integral_time", format!("{:?}", s.integral_time()));
        kv("amplitude_code", list(s.amplitude_code()));
        kv("hopping_code", list(s.hopping_code()));
        kv(
            "mean_arrival_interval",
            format!("{:?}", self.channel.mean_arrival_interval),
        );
        kv(
            "decay_constant",
            format!("{:?}", self.channel.decay_constant),
        );
        kv(
            "max_delay_spread",
            format!("{:?}", self.channel.max_delay_spread),
        );
        kv("random_polarity", self.channel.random_polarity.to_string());
        kv("tau_m", format!("{:?}", self.pulse.tau_m()));
        kv("dt", format!("{:?}", self.pulse.dt()));
        kv("ebn0_grid_db", list(&self.ebn0_grid_db));
        kv("blocks_per_point", self.blocks_per_point.to_string());
        kv("master_seed", self.master_seed.to_string());
        kv(
            "decoders",
            self.decoders
                .iter()
                .map(|d| d.name())
                .collect::<Vec<_>>()
                .join(", "),
        );
        kv(
            "output_path",
            self.output_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        kv("randomized_trials", self.randomized_trials.to_string());
        kv("pin_channel", self.pin_channel.to_string());
        kv("record_timing", self.record_timing.to_string());
        kv("feas_tol", format!("{:?}", self.solver.feas_tol));
        kv("gap_tol", format!("{:?}", self.solver.gap_tol));
        kv("eig_tol", format!("{:?}", self.solver.eig_tol));
        kv("max_iterations", self.solver.max_iterations.to_string());
        out
    }

    fn scenario_index(&self) -> u64 {
        self.scenario().map_or(3, |s| s.index())
    }

    /// Seed of the trial at `(grid_index, block)`.
    pub fn trial_seed(&self, grid_index: usize, block: usize) -> u64 {
        mix_seed(&[
            self.master_seed,
            self.scenario_index(),
            grid_index as u64,
            block as u64,
        ])
    }

    /// The campaign-wide channel used when `pin_channel` is set.
    pub fn pinned_channel(&self) -> ChannelRealization {
        let seed = mix_seed(&[self.master_seed, self.scenario_index(), u64::MAX, u64::MAX]);
        draw_channel(&self.channel, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

const CONFIG_KEYS: &[&str] = &[
    "scenario",
    "n_symbols",
    "symbol_duration",
    "integral_time",
    "amplitude_code",
    "hopping_code",
    "mean_arrival_interval",
    "decay_constant",
    "max_delay_spread",
    "random_polarity",
    "tau_m",
    "dt",
    "ebn0_grid_db",
    "blocks_per_point",
    "master_seed",
    "decoders",
    "output_path",
    "randomized_trials",
    "pin_channel",
    "record_timing",
    "feas_tol",
    "gap_tol",
    "eig_tol",
    "max_iterations",
];

fn parse_num<T: std::str::FromStr>(line: usize, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| parse_err(line, format!("`{v}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(line: usize, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(line, s))
        .collect()
}

fn parse_bool(line: usize, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(parse_err(
            line,
            format!("expected true or false, got `{other}`"),
        )),
    }
}

/// Comma-separated decoder names, duplicates removed, in canonical order.
pub fn parse_decoders(v: &str) -> Result<Vec<DecodeMethod>> {
    let mut out: Vec<DecodeMethod> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(invalid("no decoders selected"));
    }
    Ok(out)
}

/// SplitMix64 finalizer folded over the parts.
fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// One decoder's decision on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDecision {
    pub method: DecodeMethod,
    pub d_hat: Vec<i8>,
    pub sdp_status: Option<SdpStatus>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub d_true: Vec<i8>,
    /// Observation all decoders were given.
    pub z: Vec<f64>,
    /// Exhaustive nearest-neighbor decision.
    pub baseline: Vec<i8>,
    /// One entry per enabled decoder, in config order.
    pub decisions: Vec<TrialDecision>,
}

/// Simulates one block: channel, data, waveform, noise, receiver, decoders.
///
/// `ebn0_db = inf` runs without noise. The channel is drawn from the trial
/// stream unless `pinned` supplies one.
pub fn run_block_trial(
    config: &CampaignConfig,
    ebn0_db: f64,
    seed: u64,
    pinned: Option<&ChannelRealization>,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = &config.system;
    let channel = match pinned {
        Some(c) => c.clone(),
        None => draw_channel(&config.channel, &mut rng),
    };
    let g = synth_response(&channel, &config.pulse);
    let d_true: Vec<i8> = (0..sys.n_symbols())
        .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
        .collect();
    let a = encode_recursive(&d_true, sys);
    let mut block = synth_rx_waveform(&a, &g, sys);
    if ebn0_db != f64::INFINITY {
        let n0 = ebn0_to_n0(ebn0_db, &g, sys)?;
        add_noise(&mut block, &NoiseSpec::new(n0, g.dt)?, &mut rng);
    }
    let rounding_seed = rng.next_u64();
    let z = acr_demod(&block, sys);

    let model = build_volterra(&g, sys);
    let prob = DecodingProblem::new(z.clone(), &model)?;
    let start = Instant::now();
    let baseline = decode_exhaustive(&prob)?.d_hat;
    let baseline_time = start.elapsed().as_secs_f64();

    let mut decisions = Vec::with_capacity(config.decoders.len());
    for &method in &config.decoders {
        let decision = match method {
            DecodeMethod::Exhaustive => TrialDecision {
                method,
                d_hat: baseline.clone(),
                sdp_status: None,
                seconds: baseline_time,
            },
            DecodeMethod::SdpSign | DecodeMethod::SdpRandomized => {
                let rounding = if method == DecodeMethod::SdpSign {
                    Rounding::Sign
                } else {
                    Rounding::Randomized {
                        trials: config.randomized_trials,
                        seed: rounding_seed,
                    }
                };
                let start = Instant::now();
                let res = decode_sdp(&prob, &config.solver, rounding)?;
                TrialDecision {
                    method,
                    sdp_status: res.diagnostics.map(|d| d.status),
                    d_hat: res.d_hat,
                    seconds: start.elapsed().as_secs_f64(),
                }
            }
        };
        decisions.push(decision);
    }
    Ok(TrialOutcome {
        d_true,
        z,
        baseline,
        decisions,
    })
}

/// Aggregated result for one (scenario, decoder, Eb/N0) point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scenario: String,
    pub decoder: DecodeMethod,
    pub ebn0_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Fraction of bits equal to the exhaustive decision.
    pub agreement: f64,
    /// Total decode time over the point, seconds.
    pub wall_time: f64,
    pub blocks: u64,
    /// Blocks whose solver stopped short of the tolerances.
    pub unconverged: u64,
}

impl BerRecord {
    /// Binomial standard error of the BER estimate.
    pub fn std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }

    pub fn mean_decode_time(&self) -> f64 {
        self.wall_time / self.blocks.max(1) as f64
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario: &'a str,
    decoder: &'a str,
    ebn0_db: String,
    bit_errors: u64,
    bits: u64,
    ber: String,
    agreement: String,
    wall_time_s: String,
}

/// Orders records by scenario, decoder, then Eb/N0 (noiseless last).
pub fn sort_records(records: &mut [BerRecord]) {
    records.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.decoder.cmp(&b.decoder))
            .then(a.ebn0_db.total_cmp(&b.ebn0_db))
    });
}

/// Writes records with the fixed header. Times are zeroed unless `with_timing`.
pub fn write_csv<W: Write>(records: &[BerRecord], out: W, with_timing: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(CsvRow {
            scenario: &r.scenario,
            decoder: r.decoder.name(),
            ebn0_db: format!("{}", r.ebn0_db),
            bit_errors: r.bit_errors,
            bits: r.bits,
            ber: format!("{:e}", r.ber),
            agreement: format!("{:.6}", r.agreement),
            wall_time_s: if with_timing {
                format!("{:.6}", r.wall_time)
            } else {
                "0".to_string()
            },
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every grid point, returns records sorted by decoder then Eb/N0, and
/// writes the CSV when an output path is configured.
pub fn run_campaign(config: &CampaignConfig) -> Result<Vec<BerRecord>> {
    config.validate()?;
    // Fail on an unwritable destination before spending time on trials.
    let sink = config
        .output_path
        .as_ref()
        .map(|p| File::create(p).map(BufWriter::new))
        .transpose()?;

    let pinned = config.pin_channel.then(|| config.pinned_channel());
    let nb = config.system.n_symbols() as u64;
    let mut records = Vec::new();
    for (gi, &ebn0) in config.ebn0_grid_db.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..config.blocks_per_point)
            .into_par_iter()
            .map(|b| run_block_trial(config, ebn0, config.trial_seed(gi, b), pinned.as_ref()))
            .collect::<Result<_>>()?;
        for (k, &method) in config.decoders.iter().enumerate() {
            let mut rec = BerRecord {
                scenario: config.scenario_name.clone(),
                decoder: method,
                ebn0_db: ebn0,
                bit_errors: 0,
                bits: 0,
                ber: 0.0,
                agreement: 0.0,
                wall_time: 0.0,
                blocks: outcomes.len() as u64,
                unconverged: 0,
            };
            let mut agree = 0u64;
            for o in &outcomes {
                let dec = &o.decisions[k];
                rec.bit_errors += count_diff(&dec.d_hat, &o.d_true);
                agree += nb - count_diff(&dec.d_hat, &o.baseline);
                rec.bits += nb;
                rec.wall_time += dec.seconds;
                if matches!(dec.sdp_status, Some(s) if s != SdpStatus::Optimal) {
                    rec.unconverged += 1;
                }
            }
            rec.ber = rec.bit_errors as f64 / rec.bits as f64;
            rec.agreement = agree as f64 / rec.bits as f64;
            records.push(rec);
        }
    }
    sort_records(&mut records);
    if let Some(sink) = sink {
        write_csv(&records, sink, config.record_timing)?;
    }
    Ok(records)
}

fn count_diff(a: &[i8], b: &[i8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Per-scenario text table: one row per Eb/N0, BER, agreement and mean decode
/// time per decoder.
pub fn emit_report(records: &[BerRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(invalid("no records to report"));
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut out = String::new();
    let mut start = 0;
    while start < sorted.len() {
        let scenario = &sorted[start].scenario;
        let end = start
            + sorted[start..]
                .iter()
                .take_while(|r| &r.scenario == scenario)
                .count();
        let group = &sorted[start..end];
        let mut decoders: Vec<DecodeMethod> = group.iter().map(|r| r.decoder).collect();
        decoders.dedup();
        let mut grid: Vec<f64> = group.iter().map(|r| r.ebn0_db).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let _ = writeln!(out, "scenario: {scenario}");
        let _ = write!(out, "{:>9}", "ebn0_db");
        for d in &decoders {
            let _ = write!(
                out,
                "  {:>24}  {:>10}  {:>10}",
                format!("ber[{}]", d.name()),
                "agreement",
                "mean_ms"
            );
        }
        out.push('\n');
        for &e in &grid {
            let _ = write!(out, "{:>9}", format!("{e}"));
            for d in &decoders {
                match group.iter().find(|r| r.decoder == *d && r.ebn0_db == e) {
                    Some(r) => {
                        let _ = write!(
                            out,
                            "  {:>24}  {:>10.4}  {:>10.3}",
                            format!("{:.3e} ({}/{})", r.ber, r.bit_errors, r.bits),
                            r.agreement,
                            1e3 * r.mean_decode_time()
                        );
                    }
                    None => {
                        let _ = write!(out, "  {:>24}  {:>10}  {:>10}", "-", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        let unconverged: u64 = group.iter().map(|r| r.unconverged).sum();
        if unconverged > 0 {
            let _ = writeln!(
                out,
                "note: {unconverged} relaxation solves stopped at the iteration limit"
            );
        }
        out.push('\n');
        start = end;
    }
    out.push_str(
        "agreement = fraction of bits equal to the exhaustive nearest-neighbor decision\n",
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: Scenario) -> CampaignConfig {
        let mut c = CampaignConfig::for_scenario(scenario);
        c.system = c.system.with_symbols(4).unwrap();
        c.ebn0_grid_db = vec![6.0, f64::INFINITY];
        c.blocks_per_point = 6;
        c.master_seed = 11;
        c.decoders = vec![
            DecodeMethod::Exhaustive,
            DecodeMethod::SdpSign,
            DecodeMethod::SdpRandomized,
        ];
        c.randomized_trials = 4;
        c
    }

    #[test]
    fn zero_blocks_rejected() {
        let mut c = small(Scenario::Flat);
        c.blocks_per_point = 0;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter(_))));
        assert!(run_campaign(&c).is_err());
    }

    #[test]
    fn empty_grid_and_nan_rejected() {
        let mut c = small(Scenario::Flat);
        c.ebn0_grid_db.clear();
        assert!(c.validate().is_err());
        c.ebn0_grid_db = vec![f64::NAN];
        assert!(c.validate().is_err());
        c.ebn0_grid_db = vec![f64::NEG_INFINITY];
        assert!(c.validate().is_err());
    }

    #[test]
    fn noiseless_point_has_zero_ber() {
        let c = small(Scenario::Mild);
        let recs = run_campaign(&c).unwrap();
        assert_eq!(recs.len(), 6);
        for r in recs.iter().filter(|r| r.ebn0_db.is_infinite()) {
            assert_eq!(r.bit_errors, 0, "{r:?}");
            assert_eq!(r.agreement, 1.0);
        }
    }

    #[test]
    fn trial_is_deterministic_and_decoders_share_z() {
        let c = small(Scenario::Mild);
        let a = run_block_trial(&c, 4.0, 99, None).unwrap();
        let b = run_block_trial(&c, 4.0, 99, None).unwrap();
        assert_eq!(a.z, b.z);
        assert_eq!(a.d_true, b.d_true);
        let ha: Vec<_> = a.decisions.iter().map(|d| d.d_hat.clone()).collect();
        let hb: Vec<_> = b.decisions.iter().map(|d| d.d_hat.clone()).collect();
        assert_eq!(ha, hb);
        assert_eq!(a.decisions[0].d_hat, a.baseline);
    }

    #[test]
    fn earlier_trials_do_not_depend_on_block_count() {
        let mut c = small(Scenario::Mild);
        c.ebn0_grid_db = vec![4.0];
        c.decoders = vec![DecodeMethod::Exhaustive];
        c.blocks_per_point = 3;
        let few = run_campaign(&c).unwrap();
        let seeds_few: Vec<u64> = (0..3).map(|b| c.trial_seed(0, b)).collect();
        c.blocks_per_point = 7;
        let seeds_many: Vec<u64> = (0..3).map(|b| c.trial_seed(0, b)).collect();
        assert_eq!(seeds_few, seeds_many);
        let errs: u64 = (0..3)
            .map(|b| {
                let o = run_block_trial(&c, 4.0, c.trial_seed(0, b), None).unwrap();
                count_diff(&o.baseline, &o.d_true)
            })
            .sum();
        assert_eq!(errs, few[0].bit_errors);
    }

    #[test]
    fn seeds_differ_across_coordinates() {
        let c = small(Scenario::Mild);
        let mut seen = std::collections::HashSet::new();
        for g in 0..4 {
            for b in 0..50 {
                assert!(seen.insert(c.trial_seed(g, b)));
            }
        }
        let mut other = c.clone();
        other.scenario_name = "severe".into();
        assert_ne!(c.trial_seed(0, 0), other.trial_seed(0, 0));
    }

    #[test]
    fn pinned_channel_is_reused() {
        let mut c = small(Scenario::Mild);
        c.pin_channel = true;
        let ch = c.pinned_channel();
        assert_eq!(ch, c.pinned_channel());
        let o = run_block_trial(&c, f64::INFINITY, 5, Some(&ch)).unwrap();
        assert_eq!(o.baseline, o.d_true);
        run_campaign(&c).unwrap();
    }

    #[test]
    fn config_text_round_trip() {
        let mut c = small(Scenario::Severe);
        c.output_path = Some(PathBuf::from("out/severe.csv"));
        c.pin_channel = true;
        let back = CampaignConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn config_parse_errors_carry_line_numbers() {
        let err =
            CampaignConfig::from_text("scenario = mild\nblocks_per_point = many\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = CampaignConfig::from_text("# comment\n\nfoo = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = CampaignConfig::from_text("blocks_per_point = 0\n").unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)), "{err}");
        assert!(CampaignConfig::from_text("decoders = ml\n").is_err());
    }

    #[test]
    fn preset_defaults_and_custom_label() {
        let c = CampaignConfig::from_text("scenario = severe\nblocks_per_point = 5\n").unwrap();
        assert_eq!(c.channel, SvChannelParams::severe());
        assert_eq!(c.system, SystemConfig::reference());
        let c = CampaignConfig::from_text("scenario = lab\nmax_delay_spread = 50\n").unwrap();
        assert_eq!(c.scenario(), None);
        assert_eq!(c.channel.max_delay_spread, 50.0);
        assert_eq!(c.scenario_index(), 3);
    }

    #[test]
    fn csv_schema_and_sorting() {
        let rec = |dec, e: f64| BerRecord {
            scenario: "mild".into(),
            decoder: dec,
            ebn0_db: e,
            bit_errors: 1,
            bits: 10,
            ber: 0.1,
            agreement: 0.9,
            wall_time: 0.25,
            blocks: 1,
            unconverged: 0,
        };
        let mut recs = vec![
            rec(DecodeMethod::SdpSign, 8.0),
            rec(DecodeMethod::Exhaustive, f64::INFINITY),
            rec(DecodeMethod::Exhaustive, 8.0),
        ];
        sort_records(&mut recs);
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "scenario,decoder,ebn0_db,bit_errors,bits,ber,agreement,wall_time_s"
        );
        assert_eq!(lines[1], "mild,exhaustive,8,1,10,1e-1,0.900000,0");
        assert_eq!(lines[2], "mild,exhaustive,inf,1,10,1e-1,0.900000,0");
        assert!(lines[3].starts_with("mild,sdp_sign,8,"));
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf, true).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .ends_with(",0.250000"));
    }

    #[test]
    fn report_single_record_and_ordering() {
        let r = BerRecord {
            scenario: "flat".into(),
            decoder: DecodeMethod::SdpSign,
            ebn0_db: 12.0,
            bit_errors: 0,
            bits: 100,
            ber: 0.0,
            agreement: 1.0,
            wall_time: 0.01,
            blocks: 10,
            unconverged: 0,
        };
        let text = emit_report(std::slice::from_ref(&r)).unwrap();
        let rows: Vec<&str> = text
            .lines()
            .filter(|l| l.trim_start().starts_with("12"))
            .collect();
        assert_eq!(rows.len(), 1);
        assert!(emit_report(&[]).is_err());

        let mut other = r.clone();
        other.scenario = "alpha".into();
        let text = emit_report(&[r, other]).unwrap();
        assert!(text.find("scenario: alpha").unwrap() < text.find("scenario: flat").unwrap());
    }

    #[test]
    fn unwritable_output_fails_early() {
        let mut c = small(Scenario::Flat);
        c.output_path = Some(PathBuf::from("/nonexistent-dir/x/out.csv"));
        assert!(matches!(run_campaign(&c), Err(Error::Io(_))));
    }
}
