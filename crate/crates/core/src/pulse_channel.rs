//! Transmit pulse, multipath channel draws and autocorrelation integrals.
//!
//! All times are in nanoseconds. Sampled signals live on a uniform grid
//! `t = k * dt`, `k >= 0`; the transmit pulse is the Gaussian monocycle
//! delayed by its (grid-rounded) half support so that it is causal.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, parse_err, Result};

/// Monocycle width used in the reference setup, ns.
pub const DEFAULT_TAU_M: f64 = 0.2877;
/// Default sampling step, ns (10 ps).
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    tau_m: f64,
    support_half_width: f64,
    dt: f64,
}

impl PulseSpec {
    pub fn new(tau_m: f64, support_half_width: f64, dt: f64) -> Result<Self> {
        if !(tau_m > 0.0 && tau_m.is_finite()) {
            return Err(invalid(format!("tau_m must be positive, got {tau_m}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        if dt > tau_m / 10.0 * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "dt = {dt} ns does not resolve the pulse (need dt <= tau_m/10 = {})",
                tau_m / 10.0
            )));
        }
        if support_half_width < 3.0 * tau_m * (1.0 - 1e-12) {
            return Err(invalid(format!(
                "support half width {support_half_width} ns is below 3*tau_m"
            )));
        }
        Ok(Self {
            tau_m,
            support_half_width,
            dt,
        })
    }

    /// Pulse with half width `3 * tau_m` on the given grid.
    pub fn with_dt(tau_m: f64, dt: f64) -> Result<Self> {
        Self::new(tau_m, 3.0 * tau_m, dt)
    }

    pub fn tau_m(&self) -> f64 {
        self.tau_m
    }

    pub fn support_half_width(&self) -> f64 {
        self.support_half_width
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Half width in samples, rounded up to the grid.
    pub fn half_width_samples(&self) -> usize {
        (self.support_half_width / self.dt - 1e-9).ceil() as usize
    }

    /// Offset of the pulse peak from the start of its causal support.
    pub fn peak_delay(&self) -> f64 {
        self.half_width_samples() as f64 * self.dt
    }

    /// Samples of the causal transmit pulse, `2h + 1` of them, peak in the middle.
    pub fn sampled(&self) -> Vec<f64> {
        let h = self.half_width_samples();
        (0..=2 * h)
            .map(|k| monocycle((k as f64 - h as f64) * self.dt, self))
            .collect()
    }
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self::with_dt(DEFAULT_TAU_M, DEFAULT_DT).expect("reference pulse is valid")
    }
}

/// Second-derivative Gaussian monocycle `[1 - 4pi (t/tau)^2] exp(-2pi (t/tau)^2)`,
/// zero outside the truncation radius.
pub fn monocycle(t: f64, spec: &PulseSpec) -> f64 {
    if t.abs() > spec.support_half_width {
        return 0.0;
    }
    let x = t / spec.tau_m;
    let x2 = x * x;
    (1.0 - 4.0 * PI * x2) * (-2.0 * PI * x2).exp()
}

/// Single-cluster Saleh-Valenzuela statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvChannelParams {
    pub mean_arrival_interval: f64,
    pub decay_constant: f64,
    /// Truncation length of the delay profile; `0` selects the flat channel.
    pub max_delay_spread: f64,
    /// Multiply each Rayleigh magnitude by an equiprobable sign.
    pub random_polarity: bool,
}

impl SvChannelParams {
    pub fn new(
        mean_arrival_interval: f64,
        decay_constant: f64,
        max_delay_spread: f64,
    ) -> Result<Self> {
        let p = Self {
            mean_arrival_interval,
            decay_constant,
            max_delay_spread,
            random_polarity: true,
        };
        p.validate()?;
        Ok(p)
    }

    /// 200 ns delay spread.
    pub fn severe() -> Self {
        Self::new(10.0, 20.0, 200.0).unwrap()
    }

    /// 30 ns delay spread.
    pub fn mild() -> Self {
        Self::new(10.0, 20.0, 30.0).unwrap()
    }

    /// No multipath.
    pub fn flat() -> Self {
        Self::new(10.0, 20.0, 0.0).unwrap()
    }

    pub fn is_flat(&self) -> bool {
        self.max_delay_spread == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.mean_arrival_interval) {
            return Err(invalid("mean arrival interval must be positive"));
        }
        if !ok(self.decay_constant) {
            return Err(invalid("decay constant must be positive"));
        }
        if !(self.max_delay_spread == 0.0 || ok(self.max_delay_spread)) {
            return Err(invalid("max delay spread must be positive (or 0 for flat)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay: f64,
    pub amplitude: f64,
}

/// One multipath draw. Delays are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Tap>,
}

impl ChannelRealization {
    pub fn flat() -> Self {
        Self {
            taps: vec![Tap {
                delay: 0.0,
                amplitude: 1.0,
            }],
        }
    }

    pub fn max_delay(&self) -> f64 {
        self.taps.iter().map(|t| t.delay).fold(0.0, f64::max)
    }

    /// Plain-text tap list, one `delay_ns amplitude` pair per line.
    pub fn to_tap_list(&self) -> String {
        let mut out = String::new();
        for tap in &self.taps {
            writeln!(out, "{:?} {:?}", tap.delay, tap.amplitude).unwrap();
        }
        out
    }

    /// Parses [`to_tap_list`](Self::to_tap_list) output. Blank lines and `#` comments are skipped.
    pub fn from_tap_list(text: &str) -> Result<Self> {
        let mut taps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut field = |name: &str| -> Result<f64> {
                it.next()
                    .ok_or_else(|| parse_err(i + 1, format!("missing {name}")))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(i + 1, format!("bad {name}: {e}")))
            };
            let delay = field("delay")?;
            let amplitude = field("amplitude")?;
            if it.next().is_some() {
                return Err(parse_err(i + 1, "expected two fields"));
            }
            if !(delay >= 0.0 && delay.is_finite() && amplitude.is_finite()) {
                return Err(parse_err(i + 1, "delay must be finite and non-negative"));
            }
            taps.push(Tap { delay, amplitude });
        }
        if taps.windows(2).any(|w| w[1].delay < w[0].delay) {
            return Err(parse_err(0, "delays must be sorted ascending"));
        }
        Ok(Self { taps })
    }
}

/// Draws a channel: Poisson arrivals on `[0, L]` (empty draws are redrawn),
/// shifted so that the first path arrives at delay `0` (the receiver is
/// synchronized to it); Rayleigh magnitudes with mean `exp(-delay / T_e)` and
/// optional random polarity.
pub fn draw_channel<R: Rng + ?Sized>(params: &SvChannelParams, rng: &mut R) -> ChannelRealization {
    if params.is_flat() {
        return ChannelRealization::flat();
    }
    let mut delays = Vec::new();
    while delays.is_empty() {
        let mut t = 0.0;
        loop {
            let gap: f64 = Exp1.sample(rng);
            t += gap * params.mean_arrival_interval;
            if t > params.max_delay_spread {
                break;
            }
            delays.push(t);
        }
    }
    let first = delays[0];
    let rayleigh_scale = (2.0 / PI).sqrt();
    let taps = delays
        .into_iter()
        .map(|t| {
            let delay = t - first;
            let sigma = (-delay / params.decay_constant).exp() * rayleigh_scale;
            let e: f64 = Exp1.sample(rng);
            let mut amplitude = sigma * (2.0 * e).sqrt();
            if params.random_polarity && rng.random_bool(0.5) {
                amplitude = -amplitude;
            }
            Tap { delay, amplitude }
        })
        .collect();
    ChannelRealization { taps }
}

/// A real signal sampled at `t = k * dt`, zero outside the stored samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledResponse {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl SampledResponse {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn at(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        self.samples.get(k as usize).copied().unwrap_or(0.0)
    }

    /// Trapezoid energy over the full support.
    pub fn energy(&self) -> f64 {
        let n = self.samples.len() as i64;
        if n == 0 {
            return 0.0;
        }
        autocorr_samples(self, 0, n - 1, 0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            dt: self.dt,
            samples: self.samples.iter().map(|v| v * alpha).collect(),
        }
    }
}

/// Superposes shifted, scaled copies of the causal pulse on the grid.
pub fn synth_response(real: &ChannelRealization, spec: &PulseSpec) -> SampledResponse {
    let dt = spec.dt;
    let h = spec.half_width_samples();
    let len = 2 * h + (real.max_delay() / dt).ceil() as usize + 2;
    let mut samples = vec![0.0; len];
    for tap in &real.taps {
        let start = (tap.delay / dt).floor() as usize;
        let end = (start + 2 * h + 2).min(len);
        for (k, s) in samples.iter_mut().enumerate().take(end).skip(start) {
            *s += tap.amplitude * monocycle((k as f64 - h as f64) * dt - tap.delay, spec);
        }
    }
    SampledResponse { dt, samples }
}

/// Snaps a time to the nearest grid index.
#[inline]
pub fn to_samples(t: f64, dt: f64) -> i64 {
    (t / dt).round() as i64
}

/// `∫_{t1}^{t2} g(t) g(t + tau) dt`, trapezoid rule with all arguments snapped to the grid.
pub fn autocorr_integral(g: &SampledResponse, t1: f64, t2: f64, tau: f64) -> f64 {
    let dt = g.dt;
    autocorr_samples(
        g,
        to_samples(t1, dt),
        to_samples(t2, dt),
        to_samples(tau, dt),
    )
}

/// Grid-index form of [`autocorr_integral`]: window `[k1, k2]`, lag in samples.
pub fn autocorr_samples(g: &SampledResponse, k1: i64, k2: i64, lag: i64) -> f64 {
    if k2 <= k1 {
        return 0.0;
    }
    let n = g.samples.len() as i64;
    let lo = k1.max(0).max(-lag);
    let hi = k2.min(n - 1).min(n - 1 - lag);
    let mut acc = 0.0;
    for k in lo..=hi {
        let f = g.samples[k as usize] * g.samples[(k + lag) as usize];
        acc += if k == k1 || k == k2 { 0.5 * f } else { f };
    }
    acc * g.dt
}

/// Window request for [`autocorr_many`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub k1: i64,
    pub k2: i64,
    pub lag: i64,
}

/// Evaluates many windows at once, sharing one prefix sum per distinct lag.
///
/// Agrees with [`autocorr_samples`] up to summation-order rounding, and returns
/// exactly zero wherever the integrand vanishes on the whole window.
pub fn autocorr_many(g: &SampledResponse, windows: &[Window]) -> Vec<f64> {
    let n = g.samples.len() as i64;
    let mut out = vec![0.0; windows.len()];
    let mut order: Vec<usize> = (0..windows.len())
        .filter(|&i| {
            let w = windows[i];
            w.k2 > w.k1 && w.lag.abs() < n && w.k2 >= 0 && w.k1 < n
        })
        .collect();
    order.sort_by_key(|&i| windows[i].lag);

    let mut prefix: Vec<f64> = Vec::with_capacity(g.samples.len() + 1);
    let mut start = 0;
    while start < order.len() {
        let lag = windows[order[start]].lag;
        let mut end = start;
        while end < order.len() && windows[order[end]].lag == lag {
            end += 1;
        }
        let jlo = 0i64.max(-lag);
        let jhi = (n - 1).min(n - 1 - lag);
        prefix.clear();
        prefix.push(0.0);
        let mut acc = 0.0;
        for j in jlo..=jhi {
            acc += g.samples[j as usize] * g.samples[(j + lag) as usize];
            prefix.push(acc);
        }
        let product = |k: i64| g.samples[k as usize] * g.samples[(k + lag) as usize];
        for &idx in &order[start..end] {
            let w = windows[idx];
            let lo = w.k1.max(jlo);
            let hi = w.k2.min(jhi);
            if lo > hi {
                continue;
            }
            let mut v = prefix[(hi - jlo + 1) as usize] - prefix[(lo - jlo) as usize];
            if (jlo..=jhi).contains(&w.k1) {
                v -= 0.5 * product(w.k1);
            }
            if (jlo..=jhi).contains(&w.k2) {
                v -= 0.5 * product(w.k2);
            }
            out[idx] = v * g.dt;
        }
        start = end;
    }
    out
}
