//! Correlated jump-diffusion simulator with i.i.d. observation noise.
//!
//! Each interval's latent return is `mu + sigma * sqrt(w_i / N) * z_i` with
//! equicorrelated standard normals `z_i` and an intraday weight `w_i` of mean
//! one. Observed prices add i.i.d. noise to the latent log price, so an
//! observed return carries the noise difference `e_{i+1} - e_i`. Jumps are
//! placed at fixed indices.
//!
//! Randomness is ChaCha8 seeded from the scenario seed. Day `k` draws
//! diffusion shocks from stream `2k` and noise from stream `2k + 1`, so
//! adding jumps or noise never shifts the diffusion draws.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market_data::{ReturnPanel, SessionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolPattern {
    #[default]
    Flat,
    /// Quadratic U-shape, three times as volatile at the edges as mid-day
    /// before normalization.
    UShape,
}

impl VolPattern {
    /// Variance weights `w_i` with mean one.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            VolPattern::Flat => vec![1.0; n],
            VolPattern::UShape => {
                let raw: Vec<f64> = (0..n)
                    .map(|i| {
                        let t = (i as f64 + 0.5) / n as f64;
                        1.0 + 2.0 * (2.0 * t - 1.0).powi(2)
                    })
                    .collect();
                let mean = raw.iter().sum::<f64>() / n as f64;
                raw.into_iter().map(|w| w / mean).collect()
            }
        }
    }
}

impl FromStr for VolPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(VolPattern::Flat),
            "ushape" | "u-shape" => Ok(VolPattern::UShape),
            other => Err(Error::InvalidConfig(format!("unknown volatility pattern '{other}'"))),
        }
    }
}

impl fmt::Display for VolPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolPattern::Flat => "flat",
            VolPattern::UShape => "ushape",
        })
    }
}

/// One jump vector: sizes per instrument at `(day, index)`. Zero sizes
/// encode disjoint jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimJump {
    pub day: usize,
    pub index: usize,
    pub sizes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    /// Intervals per day.
    pub n: usize,
    pub days: usize,
    pub instruments: Vec<String>,
    /// Daily diffusion scale per instrument; the interval standard
    /// deviation is `sigma / sqrt(N)` under the flat pattern.
    pub sigma: Vec<f64>,
    /// Drift per interval, per instrument.
    pub mu: Vec<f64>,
    /// Common pairwise Brownian correlation.
    pub rho: f64,
    /// Standard deviation of the log-price observation noise, per instrument.
    pub noise_sd: Vec<f64>,
    pub pattern: VolPattern,
    pub jumps: Vec<SimJump>,
    pub seed: u64,
    /// First simulated date; later days follow on weekdays.
    pub start_date: NaiveDate,
}

impl SimScenario {
    /// Bivariate scenario with flat volatility, no drift, noise or jumps.
    pub fn bivariate(n: usize, days: usize, sigma: f64, rho: f64, seed: u64) -> Self {
        SimScenario {
            n,
            days,
            instruments: vec!["x1".into(), "x2".into()],
            sigma: vec![sigma; 2],
            mu: vec![0.0; 2],
            rho,
            noise_sd: vec![0.0; 2],
            pattern: VolPattern::Flat,
            jumps: Vec::new(),
            seed,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 2).expect("valid date"),
        }
    }

    pub fn dim(&self) -> usize {
        self.instruments.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("scenario: {msg}")));
        let d = self.dim();
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.days == 0 {
            return bad("days must be positive".into());
        }
        if d == 0 {
            return bad("no instruments".into());
        }
        for (name, v) in [("sigma", &self.sigma), ("mu", &self.mu), ("noise_sd", &self.noise_sd)] {
            if v.len() != d {
                return bad(format!("{name} has {} values for {d} instruments", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.sigma.iter().chain(&self.noise_sd).any(|&x| x < 0.0) {
            return bad("sigma and noise_sd must be non-negative".into());
        }
        if !(self.rho.abs() <= 1.0) {
            return bad(format!("rho {} outside [-1, 1]", self.rho));
        }
        if d > 2 && self.rho < -1.0 / (d as f64 - 1.0) {
            return bad(format!("rho {} is not a valid common correlation for {d} instruments", self.rho));
        }
        for j in &self.jumps {
            if j.day >= self.days || j.index >= self.n {
                return bad(format!("jump at day {} index {} outside the scenario", j.day, j.index));
            }
            if j.sizes.len() != d || j.sizes.iter().any(|s| !s.is_finite()) {
                return bad(format!("jump at day {} index {} needs {d} finite sizes", j.day, j.index));
            }
        }
        Ok(())
    }

    /// Interval standard deviation of instrument `a` under the flat pattern.
    pub fn interval_sd(&self, a: usize) -> f64 {
        self.sigma[a] / (self.n as f64).sqrt()
    }

    /// Simulated dates: `start_date` moved to a weekday, then successive
    /// weekdays.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let weekday = |d: &NaiveDate| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun);
        self.start_date
            .iter_days()
            .filter(weekday)
            .take(self.days)
            .collect()
    }

    fn correlation_factor(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.dim();
        let corr: Vec<Vec<f64>> = (0..d)
            .map(|a| (0..d).map(|b| if a == b { 1.0 } else { self.rho }).collect())
            .collect();
        cholesky(&corr)
    }
}

/// Lower-triangular factor of a positive semi-definite matrix; pivots that
/// vanish (perfect correlation) give zero columns.
fn cholesky(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = m.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let pivot = m[i][i] - s;
                if pivot < -1e-12 {
                    return Err(Error::InvalidConfig("correlation matrix is not positive semi-definite".into()));
                }
                l[i][j] = pivot.max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("scenario: {key}: invalid number '{}'", v.trim())))
        })
        .collect()
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("scenario: {key}: invalid value '{value}'")))
}

impl FromStr for SimScenario {
    type Err = Error;

    /// Parses `key = value` lines. `#` starts a comment. Keys: `n`, `days`,
    /// `instruments` (comma-separated names), `sigma`, `mu`, `noise_sd` (one
    /// value for all instruments or one each), `rho`, `pattern`
    /// (`flat`/`ushape`), `seed`, `start_date`, and repeated
    /// `jump = day, index, size_1, ..., size_d`.
    fn from_str(text: &str) -> Result<Self> {
        let mut s = SimScenario::bivariate(0, 1, 0.0, 0.0, 0);
        let (mut sigma, mut mu, mut noise) = (vec![0.0], vec![0.0], vec![0.0]);
        let mut seen_n = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("scenario line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => {
                    s.n = parse_scalar(key, value)?;
                    seen_n = true;
                }
                "days" => s.days = parse_scalar(key, value)?,
                "instruments" => {
                    s.instruments = value.split(',').map(|v| v.trim().to_string()).collect();
                    if s.instruments.iter().any(String::is_empty) {
                        return Err(Error::InvalidConfig("scenario: empty instrument name".into()));
                    }
                }
                "sigma" => sigma = parse_list(key, value)?,
                "mu" => mu = parse_list(key, value)?,
                "noise_sd" => noise = parse_list(key, value)?,
                "rho" => s.rho = parse_scalar(key, value)?,
                "pattern" => s.pattern = value.parse()?,
                "seed" => s.seed = parse_scalar(key, value)?,
                "start_date" => {
                    s.start_date = NaiveDate::parse_from_str(value, "%Y-%m-%d")
                        .map_err(|_| Error::InvalidConfig(format!("scenario: invalid start_date '{value}'")))?
                }
                "jump" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() < 3 {
                        return Err(Error::InvalidConfig(format!("scenario: jump '{value}' needs day, index, sizes")));
                    }
                    s.jumps.push(SimJump {
                        day: parse_scalar("jump day", parts[0])?,
                        index: parse_scalar("jump index", parts[1])?,
                        sizes: parse_list(key, &parts[2..].join(","))?,
                    });
                }
                other => return Err(Error::InvalidConfig(format!("scenario: unknown key '{other}'"))),
            }
        }
        if !seen_n {
            return Err(Error::InvalidConfig("scenario: missing n".into()));
        }
        let d = s.dim();
        let broadcast = |v: Vec<f64>| if v.len() == 1 { vec![v[0]; d] } else { v };
        s.sigma = broadcast(sigma);
        s.mu = broadcast(mu);
        s.noise_sd = broadcast(noise);
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SimScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "days = {}", self.days)?;
        writeln!(f, "instruments = {}", self.instruments.join(", "))?;
        writeln!(f, "sigma = {}", list(&self.sigma))?;
        writeln!(f, "mu = {}", list(&self.mu))?;
        writeln!(f, "rho = {}", self.rho)?;
        writeln!(f, "noise_sd = {}", list(&self.noise_sd))?;
        writeln!(f, "pattern = {}", self.pattern)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "start_date = {}", self.start_date.format("%Y-%m-%d"))?;
        for j in &self.jumps {
            writeln!(f, "jump = {}, {}, {}", j.day, j.index, list(&j.sizes))?;
        }
        Ok(())
    }
}

/// One simulated day; all matrices are indexed `[instrument][interval]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDay {
    pub date: NaiveDate,
    pub observed: Vec<Vec<f64>>,
    /// Continuous part of the latent returns.
    pub latent: Vec<Vec<f64>>,
    pub jumps: Vec<Vec<f64>>,
    /// Log-price noise at the `N + 1` grid points.
    pub noise: Vec<Vec<f64>>,
    /// Closed-form integrated covariance.
    pub true_ic: Vec<Vec<f64>>,
}

/// True quadratic covariation split of a simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueDecomposition {
    pub ic: Vec<Vec<f64>>,
    pub cj: Vec<Vec<f64>>,
    pub qv: Vec<Vec<f64>>,
}

impl SimDay {
    /// Panel on the session grid of this day's date.
    pub fn to_panel(&self, instruments: &[String], session: &SessionSpec) -> Result<ReturnPanel> {
        let n = self.observed.first().map_or(0, Vec::len);
        if session.intervals() != n {
            return Err(Error::InvalidConfig(format!(
                "session has {} intervals but the scenario simulates {n}",
                session.intervals()
            )));
        }
        ReturnPanel::new(self.date, instruments.to_vec(), session.grid_times(self.date), self.observed.clone())
    }
}

/// `IC` from the volatility pattern, `CJ` from the true jumps and
/// `QV = IC + CJ`.
pub fn true_decomposition(day: &SimDay) -> TrueDecomposition {
    let d = day.jumps.len();
    let cj: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| day.jumps[a].iter().zip(&day.jumps[b]).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    let qv = (0..d)
        .map(|a| (0..d).map(|b| day.true_ic[a][b] + cj[a][b]).collect())
        .collect();
    TrueDecomposition {
        ic: day.true_ic.clone(),
        cj,
        qv,
    }
}

fn day_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn simulate_day(s: &SimScenario, factor: &[Vec<f64>], weights: &[f64], k: usize, date: NaiveDate) -> SimDay {
    let (d, n) = (s.dim(), s.n);
    let mut diffusion = day_rng(s.seed, 2 * k as u64);
    let mut noise_rng = day_rng(s.seed, 2 * k as u64 + 1);

    let mut latent = vec![vec![0.0; n]; d];
    let mut z = vec![0.0; d];
    for i in 0..n {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut diffusion);
        }
        let scale = (weights[i] / n as f64).sqrt();
        for a in 0..d {
            let shock: f64 = (0..=a).map(|k| factor[a][k] * z[k]).sum();
            latent[a][i] = s.mu[a] + s.sigma[a] * scale * shock;
        }
    }
    let noise: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..=n)
                .map(|_| {
                    let e: f64 = StandardNormal.sample(&mut noise_rng);
                    s.noise_sd[a] * e
                })
                .collect()
        })
        .collect();
    let mut jumps = vec![vec![0.0; n]; d];
    for j in s.jumps.iter().filter(|j| j.day == k) {
        for a in 0..d {
            jumps[a][j.index] += j.sizes[a];
        }
    }
    let observed = (0..d)
        .map(|a| {
            (0..n)
                .map(|i| (latent[a][i] + (noise[a][i + 1] - noise[a][i])) + jumps[a][i])
                .collect()
        })
        .collect();
    let rho = |a: usize, b: usize| if a == b { 1.0 } else { s.rho };
    let true_ic = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| weights.iter().map(|w| s.sigma[a] * s.sigma[b] * rho(a, b) * w / n as f64).sum())
                .collect()
        })
        .collect();
    SimDay {
        date,
        observed,
        latent,
        jumps,
        noise,
        true_ic,
    }
}

/// Simulates every day of the scenario. Deterministic under the seed and
/// independent of thread scheduling.
pub fn simulate(scenario: &SimScenario) -> Result<Vec<SimDay>> {
    scenario.validate()?;
    let factor = scenario.correlation_factor()?;
    let weights = scenario.pattern.weights(scenario.n);
    let dates = scenario.dates();
    Ok(dates
        .into_par_iter()
        .enumerate()
        .map(|(k, date)| simulate_day(scenario, &factor, &weights, k, date))
        .collect())
}
