//! Waveform-level transmitter/channel/noise synthesis and the autocorrelation
//! receiver front end.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, parse_err, Result};
use crate::pulse_channel::SampledResponse;
use crate::system_model::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// One-sided noise power spectral density.
    pub n0: f64,
    pub dt: f64,
}

impl NoiseSpec {
    pub fn new(n0: f64, dt: f64) -> Result<Self> {
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(invalid(format!(
                "n0 must be finite and non-negative, got {n0}"
            )));
        }
        if !(dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        Ok(Self { n0, dt })
    }

    /// Per-sample variance of white noise with two-sided PSD `n0 / 2`.
    pub fn sample_variance(&self) -> f64 {
        self.n0 / (2.0 * self.dt)
    }
}

/// Received samples at `t = t0 + k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub t0: f64,
}

impl ReceivedBlock {
    #[inline]
    fn at(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        self.samples.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn energy(&self) -> f64 {
        let s = &self.samples;
        if s.len() < 2 {
            return 0.0;
        }
        let inner: f64 = s[1..s.len() - 1].iter().map(|v| v * v).sum();
        (inner + 0.5 * (s[0] * s[0] + s[s.len() - 1] * s[s.len() - 1])) * self.dt
    }

    /// Writes the samples as little-endian `f64` to `data` and a text header to `header`.
    pub fn dump<W1: Write, W2: Write>(&self, mut header: W1, mut data: W2) -> Result<()> {
        writeln!(header, "dt {:?}", self.dt)?;
        writeln!(header, "t0 {:?}", self.t0)?;
        writeln!(header, "len {}", self.samples.len())?;
        writeln!(header, "format f64le")?;
        for v in &self.samples {
            data.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R1: Read, R2: Read>(mut header: R1, mut data: R2) -> Result<Self> {
        let mut text = String::new();
        header.read_to_string(&mut text)?;
        let (mut dt, mut t0, mut len) = (None, None, None);
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let (Some(key), Some(val)) = (parts.next(), parts.next()) else {
                continue;
            };
            let bad = |_| parse_err(i + 1, format!("bad value for {key}"));
            match key {
                "dt" => dt = Some(val.parse::<f64>().map_err(bad)?),
                "t0" => t0 = Some(val.parse::<f64>().map_err(bad)?),
                "len" => {
                    len = Some(
                        val.parse::<usize>()
                            .map_err(|_| parse_err(i + 1, "bad len"))?,
                    )
                }
                "format" if val != "f64le" => return Err(parse_err(i + 1, "unsupported format")),
                _ => {}
            }
        }
        let (Some(dt), Some(t0), Some(len)) = (dt, t0, len) else {
            return Err(parse_err(0, "header needs dt, t0 and len"));
        };
        let mut bytes = Vec::new();
        data.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(parse_err(
                0,
                format!("expected {} bytes, found {}", len * 8, bytes.len()),
            ));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { samples, dt, t0 })
    }
}

/// Number of samples needed to hold every pulse copy and every integration window.
fn block_len(g: &SampledResponse, config: &SystemConfig) -> usize {
    let grid = config.grid(g.dt);
    let np = config.pulses_per_symbol();
    let last_pulse = *grid.times.last().unwrap() + g.len() as i64;
    let last_window = grid
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| t + grid.integral + grid.hops[k % np])
        .max()
        .unwrap();
    (last_pulse.max(last_window) + 1) as usize
}

/// Noiseless `r(t) = sum a_i[n] g(t - t_i[n])`.
pub fn synth_rx_waveform(a: &[i8], g: &SampledResponse, config: &SystemConfig) -> ReceivedBlock {
    assert_eq!(a.len(), config.n_pulses(), "one polarity per pulse");
    let grid = config.grid(g.dt);
    let mut samples = vec![0.0; block_len(g, config)];
    for (&t, &pol) in grid.times.iter().zip(a) {
        let sign = f64::from(pol);
        let start = t as usize;
        for (s, &v) in samples[start..start + g.len()].iter_mut().zip(&g.samples) {
            *s += sign * v;
        }
    }
    ReceivedBlock {
        samples,
        dt: g.dt,
        t0: 0.0,
    }
}

/// Adds i.i.d. Gaussian samples of variance `n0 / (2 dt)`.
pub fn add_noise<R: Rng + ?Sized>(block: &mut ReceivedBlock, noise: &NoiseSpec, rng: &mut R) {
    if noise.n0 == 0.0 {
        return;
    }
    let sigma = noise.sample_variance().sqrt();
    for s in &mut block.samples {
        let e: f64 = StandardNormal.sample(rng);
        *s += sigma * e;
    }
}

/// Autocorrelation receiver: `y_i[n] = ∫ r(t) r(t + D_i) dt` over
/// `[t_i[n], t_i[n] + T_I]` and `z[n] = sum_i b_i y_i[n]`.
pub fn acr_demod(block: &ReceivedBlock, config: &SystemConfig) -> Vec<f64> {
    let grid = config.grid(block.dt);
    let np = config.pulses_per_symbol();
    let b = config.amplitude_code();
    let t0 = (block.t0 / block.dt).round() as i64;
    (0..config.n_symbols())
        .map(|n| {
            (0..np)
                .map(|i| {
                    let start = grid.times[n * np + i] - t0;
                    let lag = grid.hops[i];
                    let end = start + grid.integral;
                    let mut acc = 0.0;
                    for k in start..=end {
                        let f = block.at(k) * block.at(k + lag);
                        acc += if k == start || k == end { 0.5 * f } else { f };
                    }
                    f64::from(b[i]) * acc * block.dt
                })
                .sum()
        })
        .collect()
}

/// Noise density for a target `Eb/N0`, with `Eb = N_p * ∫ g²` (received energy per bit).
pub fn ebn0_to_n0(ebn0_db: f64, g: &SampledResponse, config: &SystemConfig) -> Result<f64> {
    if !ebn0_db.is_finite() {
        return Err(invalid(format!("Eb/N0 must be finite, got {ebn0_db}")));
    }
    let eb = config.pulses_per_symbol() as f64 * g.energy();
    Ok(eb / 10f64.powf(ebn0_db / 10.0))
}
