//! Differential encoding, pulse timing and the second-order Volterra model
//! `z[n] = aᵀ B[n] a` of the autocorrelation receiver.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, parse_err, Error, Result};
use crate::pulse_channel::{autocorr_many, to_samples, SampledResponse, Window};

/// Tolerance on the hopping-code wrap identity, ns.
const WRAP_TOL: f64 = 1e-3;

/// Block, code and timing parameters. Times in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    n_symbols: usize,
    pulses_per_symbol: usize,
    symbol_duration: f64,
    integral_time: f64,
    amplitude_code: Vec<i8>,
    hopping_code: Vec<f64>,
    pulse_offsets: Vec<f64>,
}

impl SystemConfig {
    pub fn new(
        n_symbols: usize,
        symbol_duration: f64,
        integral_time: f64,
        amplitude_code: Vec<i8>,
        hopping_code: Vec<f64>,
    ) -> Result<Self> {
        let pulses_per_symbol = amplitude_code.len();
        if n_symbols == 0 {
            return Err(invalid("block must hold at least one symbol"));
        }
        if pulses_per_symbol < 2 || !pulses_per_symbol.is_multiple_of(2) {
            return Err(invalid(format!(
                "pulses per symbol must be even and >= 2, got {pulses_per_symbol}"
            )));
        }
        if hopping_code.len() != pulses_per_symbol {
            return Err(invalid(format!(
                "hopping code has {} entries, amplitude code has {pulses_per_symbol}",
                hopping_code.len()
            )));
        }
        if amplitude_code.iter().any(|&b| b != 1 && b != -1) {
            return Err(invalid("amplitude code entries must be +1 or -1"));
        }
        if !(integral_time > 0.0 && integral_time.is_finite()) {
            return Err(invalid("integral time must be positive"));
        }
        let pulse_offsets = derive_pulse_offsets(&hopping_code, symbol_duration)?;
        Ok(Self {
            n_symbols,
            pulses_per_symbol,
            symbol_duration,
            integral_time,
            amplitude_code,
            hopping_code,
            pulse_offsets,
        })
    }

    /// Ten symbols of four pulses, 8 ns symbols and integration windows,
    /// hopping code `[1.7, 1.9, 2.1, 2.3]` ns, amplitude code `[-1, -1, 1, 1]`.
    pub fn reference() -> Self {
        Self::new(10, 8.0, 8.0, vec![-1, -1, 1, 1], vec![1.7, 1.9, 2.1, 2.3]).unwrap()
    }

    /// Same timing as `self` with a different block length.
    pub fn with_symbols(&self, n_symbols: usize) -> Result<Self> {
        Self::new(
            n_symbols,
            self.symbol_duration,
            self.integral_time,
            self.amplitude_code.clone(),
            self.hopping_code.clone(),
        )
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }
    pub fn pulses_per_symbol(&self) -> usize {
        self.pulses_per_symbol
    }
    pub fn n_pulses(&self) -> usize {
        self.n_symbols * self.pulses_per_symbol
    }
    pub fn symbol_duration(&self) -> f64 {
        self.symbol_duration
    }
    pub fn integral_time(&self) -> f64 {
        self.integral_time
    }
    pub fn amplitude_code(&self) -> &[i8] {
        &self.amplitude_code
    }
    pub fn hopping_code(&self) -> &[f64] {
        &self.hopping_code
    }
    pub fn pulse_offsets(&self) -> &[f64] {
        &self.pulse_offsets
    }

    /// `t_i[n] = n T_s + c_i`.
    pub fn pulse_time(&self, n: usize, i: usize) -> f64 {
        n as f64 * self.symbol_duration + self.pulse_offsets[i]
    }

    /// Pulse times, hop lags and integration length snapped to a grid.
    pub fn grid(&self, dt: f64) -> PulseGrid {
        let times = (0..self.n_symbols)
            .flat_map(|n| (0..self.pulses_per_symbol).map(move |i| (n, i)))
            .map(|(n, i)| to_samples(self.pulse_time(n, i), dt))
            .collect();
        PulseGrid {
            times,
            hops: self
                .hopping_code
                .iter()
                .map(|&d| to_samples(d, dt))
                .collect(),
            integral: to_samples(self.integral_time, dt),
        }
    }
}

/// Grid-index view of the pulse timing shared by the model and the receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PulseGrid {
    /// Pulse start index, in transmission order `n * N_p + i`.
    pub times: Vec<i64>,
    /// `D_i` in samples.
    pub hops: Vec<i64>,
    /// `T_I` in samples.
    pub integral: i64,
}

/// Relative pulse timing `c_i` from the delay hopping code.
pub fn derive_pulse_offsets(hopping_code: &[f64], symbol_duration: f64) -> Result<Vec<f64>> {
    if hopping_code.is_empty() {
        return Err(invalid("empty hopping code"));
    }
    if hopping_code.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(invalid("hopping code entries must be positive"));
    }
    let mut offsets = Vec::with_capacity(hopping_code.len());
    let mut c = 0.0;
    for &d in &hopping_code[..hopping_code.len() - 1] {
        offsets.push(c);
        c += d;
    }
    offsets.push(c);
    let last = *hopping_code.last().unwrap();
    let wrap = symbol_duration + offsets[0] - c;
    if (wrap - last).abs() > WRAP_TOL {
        return Err(Error::WrapIdentity {
            sum: hopping_code.iter().sum(),
            symbol_duration,
        });
    }
    if offsets.windows(2).any(|w| w[1] <= w[0]) || c >= symbol_duration {
        return Err(invalid(
            "pulse offsets are not increasing within the symbol",
        ));
    }
    Ok(offsets)
}

/// `Q`, `P`, `r` and `s` of the affine encoder form `a = Q (r + P d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMatrices {
    pub q_diag: Vec<f64>,
    pub p: DMatrix<f64>,
    pub r: DVector<f64>,
    pub s: Vec<f64>,
}

impl CodeMatrices {
    pub fn q(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.q_diag))
    }
}

pub fn build_code_matrices(config: &SystemConfig) -> CodeMatrices {
    let np = config.pulses_per_symbol;
    let nb = config.n_symbols;
    let b = &config.amplitude_code;
    let len = nb * np;

    // [Q]_{k,k} = prod_{j=0}^{k-2} b_{j mod Np}, k 1-based.
    let mut q_diag = Vec::with_capacity(len);
    let mut prod = 1.0;
    for k in 0..len {
        q_diag.push(prod);
        prod *= f64::from(b[k % np]);
    }

    let s: Vec<f64> = (0..np).map(|i| (i % 2) as f64).collect();
    let mut p = DMatrix::zeros(len, nb);
    let mut r = DVector::zeros(len);
    for n in 0..nb {
        for i in 0..np {
            p[(n * np + i, n)] = s[i];
            r[n * np + i] = 1.0 - s[i];
        }
    }
    CodeMatrices { q_diag, p, r, s }
}

fn check_data(d: &[i8], config: &SystemConfig) {
    assert_eq!(d.len(), config.n_symbols, "data length must equal N_b");
    debug_assert!(d.iter().all(|&v| v == 1 || v == -1));
}

/// Pulse polarities by the differential recursion, starting from `a_0[0] = +1`.
pub fn encode_recursive(d: &[i8], config: &SystemConfig) -> Vec<i8> {
    check_data(d, config);
    let np = config.pulses_per_symbol;
    let b = &config.amplitude_code;
    let mut a = Vec::with_capacity(config.n_pulses());
    for n in 0..config.n_symbols {
        for i in 0..np {
            let v = if n == 0 && i == 0 {
                1
            } else if i == 0 {
                a[n * np - 1] * d[n - 1] * b[np - 1]
            } else {
                a[n * np + i - 1] * d[n] * b[i - 1]
            };
            a.push(v);
        }
    }
    a
}

/// Pulse polarities as `Q (r + P d)`.
pub fn encode_affine(d: &[i8], codes: &CodeMatrices) -> Vec<i8> {
    assert_eq!(d.len(), codes.p.ncols(), "data length must equal N_b");
    let dv = DVector::from_iterator(d.len(), d.iter().map(|&v| f64::from(v)));
    let inner = &codes.r + &codes.p * dv;
    inner
        .iter()
        .zip(&codes.q_diag)
        .map(|(x, q)| (q * x) as i8)
        .collect()
}

/// Second-order Volterra model of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraModel {
    pub config: SystemConfig,
    pub codes: CodeMatrices,
    /// Grid step the kernels were integrated on, ns.
    pub dt: f64,
    /// `B[n] = sum_i b_i A_i[n]`, one `N_b N_p` square matrix per symbol.
    pub b: Vec<DMatrix<f64>>,
}

/// The matrices `A_i[n]`, indexed `[n][i]`: `y_i[n] = aᵀ A_i[n] a` without noise.
pub fn build_kernels(g: &SampledResponse, config: &SystemConfig) -> Vec<Vec<DMatrix<f64>>> {
    let grid = config.grid(g.dt);
    let np = config.pulses_per_symbol;
    let len = config.n_pulses();

    let mut windows = Vec::with_capacity(len * len * len);
    for n in 0..config.n_symbols {
        for i in 0..np {
            let t = grid.times[n * np + i];
            for &t1 in &grid.times {
                let k1 = t - t1;
                for &t2 in &grid.times {
                    windows.push(Window {
                        k1,
                        k2: k1 + grid.integral,
                        lag: t1 - t2 + grid.hops[i],
                    });
                }
            }
        }
    }
    let values = autocorr_many(g, &windows);

    let mut chunks = values.chunks_exact(len * len);
    (0..config.n_symbols)
        .map(|_| {
            (0..np)
                .map(|_| DMatrix::from_row_slice(len, len, chunks.next().unwrap()))
                .collect()
        })
        .collect()
}

pub fn build_volterra(g: &SampledResponse, config: &SystemConfig) -> VolterraModel {
    let kernels = build_kernels(g, config);
    let len = config.n_pulses();
    let b = kernels
        .iter()
        .map(|per_pulse| {
            let mut acc = DMatrix::zeros(len, len);
            for (a, &bi) in per_pulse.iter().zip(&config.amplitude_code) {
                acc += a * f64::from(bi);
            }
            acc
        })
        .collect();
    VolterraModel {
        config: config.clone(),
        codes: build_code_matrices(config),
        dt: g.dt,
        b,
    }
}

/// Noiseless decision variables `z[n] = aᵀ B[n] a`.
pub fn model_decision(a: &[i8], model: &VolterraModel) -> Vec<f64> {
    let av = DVector::from_iterator(a.len(), a.iter().map(|&v| f64::from(v)));
    model.b.iter().map(|bn| av.dot(&(bn * &av))).collect()
}

impl VolterraModel {
    /// Text bundle: a header of `key value` lines followed by each `B[n]` row-major.
    pub fn to_bundle(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let join = |v: Vec<String>| v.join(" ");
        writeln!(out, "volterra-bundle 1").unwrap();
        writeln!(out, "n_symbols {}", c.n_symbols).unwrap();
        writeln!(out, "pulses_per_symbol {}", c.pulses_per_symbol).unwrap();
        writeln!(out, "dt {:?}", self.dt).unwrap();
        writeln!(out, "symbol_duration {:?}", c.symbol_duration).unwrap();
        writeln!(out, "integral_time {:?}", c.integral_time).unwrap();
        let amp = c.amplitude_code.iter().map(|b| b.to_string()).collect();
        writeln!(out, "amplitude_code {}", join(amp)).unwrap();
        let hop = c.hopping_code.iter().map(|d| format!("{d:?}")).collect();
        writeln!(out, "hopping_code {}", join(hop)).unwrap();
        for (n, m) in self.b.iter().enumerate() {
            writeln!(out, "B {n}").unwrap();
            for row in m.row_iter() {
                let vals = row.iter().map(|v| format!("{v:?}")).collect();
                writeln!(out, "{}", join(vals)).unwrap();
            }
        }
        out
    }

    pub fn from_bundle(text: &str) -> Result<Self> {
        let mut cur = LineCursor::new(text);
        fn one<T: std::str::FromStr>(line: usize, v: &[String]) -> Result<T> {
            match v {
                [x] => x
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad value `{x}`"))),
                _ => Err(parse_err(line, "expected one value")),
            }
        }
        fn many<T: std::str::FromStr>(line: usize, v: &[String]) -> Result<Vec<T>> {
            v.iter()
                .map(|x| {
                    x.parse()
                        .map_err(|_| parse_err(line, format!("bad value `{x}`")))
                })
                .collect()
        }

        let (l, v) = cur.key("volterra-bundle")?;
        if one::<u32>(l, &v)? != 1 {
            return Err(parse_err(l, "unsupported bundle version"));
        }
        let (l, v) = cur.key("n_symbols")?;
        let nb: usize = one(l, &v)?;
        let (l, v) = cur.key("pulses_per_symbol")?;
        let np: usize = one(l, &v)?;
        let (l, v) = cur.key("dt")?;
        let dt: f64 = one(l, &v)?;
        let (l, v) = cur.key("symbol_duration")?;
        let ts: f64 = one(l, &v)?;
        let (l, v) = cur.key("integral_time")?;
        let ti: f64 = one(l, &v)?;
        let (l, v) = cur.key("amplitude_code")?;
        let amp: Vec<i8> = many(l, &v)?;
        let (l, v) = cur.key("hopping_code")?;
        let hop: Vec<f64> = many(l, &v)?;
        let config = SystemConfig::new(nb, ts, ti, amp, hop)?;
        if config.pulses_per_symbol != np {
            return Err(parse_err(l, "pulses_per_symbol disagrees with the codes"));
        }

        let len = config.n_pulses();
        let mut b = Vec::with_capacity(nb);
        for n in 0..nb {
            let (l, v) = cur.key("B")?;
            if one::<usize>(l, &v)? != n {
                return Err(parse_err(l, format!("expected matrix {n}")));
            }
            let mut data = Vec::with_capacity(len * len);
            for _ in 0..len {
                let (i, line) = cur.line()?;
                let row: Vec<f64> = line
                    .split_whitespace()
                    .map(|x| {
                        x.parse()
                            .map_err(|_| parse_err(i + 1, format!("bad value `{x}`")))
                    })
                    .collect::<Result<_>>()?;
                if row.len() != len {
                    return Err(parse_err(
                        i,
                        format!("row has {} entries, expected {len}", row.len()),
                    ));
                }
                data.extend(row);
            }
            b.push(DMatrix::from_row_slice(len, len, &data));
        }
        Ok(Self {
            codes: build_code_matrices(&config),
            config,
            dt,
            b,
        })
    }
}

struct LineCursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l))
            .collect();
        Self { lines, pos: 0 }
    }

    fn line(&mut self) -> Result<(usize, &'a str)> {
        let item = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| parse_err(0, "unexpected end of input"))?;
        self.pos += 1;
        Ok(item)
    }

    /// Next line, which must start with `want`; returns the remaining fields.
    fn key(&mut self, want: &str) -> Result<(usize, Vec<String>)> {
        let (i, line) = self.line()?;
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        if key != want {
            return Err(parse_err(i, format!("expected `{want}`, found `{key}`")));
        }
        Ok((i, parts.map(str::to_owned).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse_channel::{synth_response, ChannelRealization, PulseSpec};

    fn all_data(nb: usize) -> impl Iterator<Item = Vec<i8>> {
        (0..1u32 << nb).map(move |m| {
            (0..nb)
                .map(|j| if m >> j & 1 == 0 { 1 } else { -1 })
                .collect()
        })
    }

    /// N_p = 2, D = [2, 6] ns, short windows: no pulse sees a foreign partner.
    pub(crate) fn sparse_config(nb: usize) -> SystemConfig {
        SystemConfig::new(nb, 8.0, 1.9, vec![1, 1], vec![2.0, 6.0]).unwrap()
    }

    #[test]
    fn offsets_from_hopping_code() {
        let c = derive_pulse_offsets(&[1.7, 1.9, 2.1, 2.3], 8.0).unwrap();
        let want = [0.0, 1.7, 3.6, 5.7];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            derive_pulse_offsets(&[4.0, 4.0], 8.0).unwrap(),
            vec![0.0, 4.0]
        );
        assert!(matches!(
            derive_pulse_offsets(&[3.0, 3.0], 8.0),
            Err(Error::WrapIdentity { .. })
        ));
        assert!(derive_pulse_offsets(&[4.0, -1.0, 5.0], 8.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(0, 8.0, 8.0, vec![1, 1], vec![4.0, 4.0]).is_err());
        assert!(SystemConfig::new(2, 8.0, 8.0, vec![1, 1, 1], vec![2.0, 3.0, 3.0]).is_err());
        assert!(SystemConfig::new(2, 8.0, 8.0, vec![1, 0], vec![4.0, 4.0]).is_err());
        assert!(SystemConfig::new(2, 8.0, 8.0, vec![1, 1], vec![4.0]).is_err());
        let c = SystemConfig::reference();
        assert_eq!(c.n_pulses(), 40);
        assert_eq!(c.grid(0.01).hops, vec![170, 190, 210, 230]);
        assert_eq!(&c.grid(0.01).times[..5], &[0, 170, 360, 570, 800]);
    }

    #[test]
    fn code_matrices() {
        let ones = SystemConfig::new(3, 8.0, 8.0, vec![1; 4], vec![2.0; 4]).unwrap();
        let m = build_code_matrices(&ones);
        assert!(m.q_diag.iter().all(|&q| q == 1.0));

        let c = SystemConfig::new(2, 8.0, 8.0, vec![-1, -1, 1, 1], vec![2.0; 4]).unwrap();
        let m = build_code_matrices(&c);
        assert_eq!(&m.q_diag[..6], &[1.0, -1.0, 1.0, 1.0, 1.0, -1.0]);

        let m = build_code_matrices(&sparse_config(3));
        assert_eq!(m.s, vec![0.0, 1.0]);
        assert_eq!(m.r.as_slice(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        for n in 0..3 {
            assert_eq!(
                m.p.column(n).iter().copied().collect::<Vec<_>>()[2 * n..2 * n + 2],
                [0.0, 1.0]
            );
            assert_eq!(m.p.column(n).sum(), 1.0);
        }
    }

    #[test]
    fn recursive_encoder_examples() {
        let c = sparse_config(2);
        assert_eq!(encode_recursive(&[1, -1], &c), vec![1, 1, 1, -1]);
        assert_eq!(
            encode_affine(&[1, -1], &build_code_matrices(&c)),
            vec![1, 1, 1, -1]
        );

        let c1 = SystemConfig::new(1, 8.0, 1.9, vec![-1, 1], vec![2.0, 6.0]).unwrap();
        assert_eq!(encode_recursive(&[1], &c1), vec![1, -1]);

        let ones = SystemConfig::new(3, 8.0, 8.0, vec![1; 4], vec![2.0; 4]).unwrap();
        assert!(encode_recursive(&[1, 1, 1], &ones).iter().all(|&a| a == 1));
        assert!(encode_affine(&[1, 1, 1], &build_code_matrices(&ones))
            .iter()
            .all(|&a| a == 1));
    }

    #[test]
    fn encoders_agree_exhaustively() {
        for amp in [
            vec![1, -1],
            vec![-1, -1, 1, 1],
            vec![1, -1, -1, 1],
            vec![-1, 1, 1, 1],
        ] {
            let np = amp.len();
            for nb in 1..=6 {
                let c = SystemConfig::new(nb, 8.0, 8.0, amp.clone(), vec![8.0 / np as f64; np])
                    .unwrap();
                let codes = build_code_matrices(&c);
                for d in all_data(nb) {
                    assert_eq!(encode_recursive(&d, &c), encode_affine(&d, &codes));
                }
            }
        }
    }

    #[test]
    fn flat_sparse_fixture_decisions() {
        let spec = PulseSpec::default();
        let g = synth_response(&ChannelRealization::flat(), &spec);
        let eg = g.energy();
        let c = sparse_config(2);
        let model = build_volterra(&g, &c);
        for d in all_data(2) {
            let z = model_decision(&encode_recursive(&d, &c), &model);
            assert!(
                (z[0] - 2.0 * eg * f64::from(d[0])).abs() < 1e-12 * eg,
                "{z:?}"
            );
            assert!((z[1] - eg * f64::from(d[1])).abs() < 1e-12 * eg, "{z:?}");
        }
    }

    #[test]
    fn zero_and_scaled_responses() {
        let spec = PulseSpec::default();
        let g = synth_response(&ChannelRealization::flat(), &spec);
        let c = SystemConfig::reference().with_symbols(3).unwrap();
        let zero = build_volterra(&g.scaled(0.0), &c);
        assert!(zero.b.iter().all(|m| m.iter().all(|&v| v == 0.0)));
        let a = encode_recursive(&[1, -1, 1], &c);
        assert!(model_decision(&a, &zero).iter().all(|&v| v == 0.0));

        let m1 = build_volterra(&g, &c);
        let m3 = build_volterra(&g.scaled(3.0), &c);
        for (x, y) in m1.b.iter().zip(&m3.b) {
            for (u, v) in x.iter().zip(y.iter()) {
                assert!((9.0 * u - v).abs() <= 1e-12 * v.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn decisions_invariant_to_global_flip() {
        let spec = PulseSpec::default();
        let real = ChannelRealization {
            taps: vec![
                crate::pulse_channel::Tap {
                    delay: 0.0,
                    amplitude: 1.0,
                },
                crate::pulse_channel::Tap {
                    delay: 3.3,
                    amplitude: -0.6,
                },
                crate::pulse_channel::Tap {
                    delay: 9.1,
                    amplitude: 0.4,
                },
            ],
        };
        let g = synth_response(&real, &spec);
        let c = SystemConfig::reference().with_symbols(3).unwrap();
        let model = build_volterra(&g, &c);
        let a = encode_recursive(&[1, -1, -1], &c);
        let neg: Vec<i8> = a.iter().map(|v| -v).collect();
        assert_eq!(model_decision(&a, &model), model_decision(&neg, &model));
    }

    #[test]
    fn kernels_are_sparse_for_short_channels() {
        let spec = PulseSpec::default();
        let g = synth_response(&ChannelRealization::flat(), &spec);
        let c = sparse_config(2);
        let kernels = build_kernels(&g, &c);
        // Only the pulse pair separated by exactly D_i inside the window survives.
        for (n, per) in kernels.iter().enumerate() {
            for (i, a) in per.iter().enumerate() {
                let nz: Vec<(usize, usize)> = (0..4)
                    .flat_map(|r| (0..4).map(move |s| (r, s)))
                    .filter(|&(r, s)| a[(r, s)] != 0.0)
                    .collect();
                let k = n * 2 + i;
                if k + 1 < 4 {
                    assert_eq!(nz, vec![(k, k + 1)], "A_{i}[{n}]");
                } else {
                    assert!(nz.is_empty());
                }
            }
        }
    }

    #[test]
    fn bundle_round_trip() {
        let spec = PulseSpec::default();
        let g = synth_response(&ChannelRealization::flat(), &spec);
        let model = build_volterra(&g, &SystemConfig::reference().with_symbols(2).unwrap());
        let text = model.to_bundle();
        assert_eq!(VolterraModel::from_bundle(&text).unwrap(), model);
        assert!(VolterraModel::from_bundle("volterra-bundle 2\n").is_err());
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(VolterraModel::from_bundle(&truncated).is_err());
    }
}
