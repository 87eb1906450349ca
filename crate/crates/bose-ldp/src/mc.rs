//! Finite-volume stochastic verification: exact sampling of the reference
//! Poisson occupation process, Metropolis sampling of the tilted measures,
//! condensate estimators, and small-instance brute-force oracles.

use crate::error::{Error, Result};
use crate::model::{
    energy_cmf, energy_hyl, energy_hyl_lsc, energy_pmf, energy_pmf_lsc, ideal_rate, make_weights,
    ModelParams, OccupationVector,
};
use crate::thermo::Model;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Configuration for both the exact reference sampler and the MCMC chains.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// |Lambda| in the Poisson intensities volume * q_k.
    pub volume: f64,
    /// Cycle cutoff K: occupation vectors have entries N_1..N_K.
    pub k_max: usize,
    /// Samples (reference) or Metropolis steps (MCMC) per chain.
    pub chain_length: usize,
    /// Steps discarded at the start of each MCMC chain.
    pub burn_in: usize,
    /// Keep every `thinning`-th state after burn-in.
    pub thinning: usize,
    /// Independent chains, each with its own RNG stream.
    pub n_chains: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(volume: f64, k_max: usize, chain_length: usize, seed: u64) -> Self {
        SamplerConfig {
            volume,
            k_max,
            chain_length,
            burn_in: 0,
            thinning: 1,
            n_chains: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volume > 0.0) {
            return Err(Error::Domain("sampler volume must be > 0".into()));
        }
        if self.k_max == 0 || self.chain_length == 0 || self.n_chains == 0 {
            return Err(Error::Domain("sampler needs K >= 1, steps >= 1, chains >= 1".into()));
        }
        if self.burn_in >= self.chain_length {
            return Err(Error::Domain("burn_in must be < chain_length".into()));
        }
        if self.thinning == 0 {
            return Err(Error::Domain("thinning must be >= 1".into()));
        }
        Ok(())
    }
}

/// Merged per-coordinate statistics of a sample set, in density units
/// (counts divided by volume).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Fraction of accepted Metropolis proposals; 1 for the exact sampler.
    pub acceptance_rate: f64,
    /// Effective sample size of the total-density series.
    pub ess: f64,
}

fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    // independent counter-based streams per (seed, chain)
    ChaCha8Rng::seed_from_u64(seed ^ chain.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Analytic truncation bias of density estimators at cutoff K:
/// volume * sum_{k>K} k q_k.
pub fn truncation_bias(params: &ModelParams, k_max: usize, volume: f64) -> Result<f64> {
    let w = make_weights(params, k_max)?;
    if w.rho.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(volume * (w.rho - w.rho_partial))
}

/// Draw i.i.d. occupation vectors from the reference measure: each N_k is
/// Poisson with mean volume * q_k, independently. Chains run in parallel and
/// the output order is deterministic for a fixed seed.
pub fn sample_reference(params: &ModelParams, cfg: &SamplerConfig) -> Result<Vec<Vec<u64>>> {
    cfg.validate()?;
    let w = make_weights(params, cfg.k_max)?;
    let lambdas: Vec<f64> = w.q.iter().map(|q| q * cfg.volume).collect();
    let dists: Vec<Poisson<f64>> = lambdas
        .iter()
        .map(|&l| Poisson::new(l).map_err(|_| Error::Domain(format!("bad Poisson mean {l}"))))
        .collect::<Result<_>>()?;
    let per_chain: Vec<Vec<Vec<u64>>> = (0..cfg.n_chains as u64)
        .into_par_iter()
        .map(|chain| {
            let mut rng = chain_rng(cfg.seed, chain);
            (0..cfg.chain_length)
                .map(|_| dists.iter().map(|d| d.sample(&mut rng) as u64).collect())
                .collect()
        })
        .collect();
    Ok(per_chain.into_iter().flatten().collect())
}

/// Running integer sums that make each Metropolis energy difference O(1).
struct TiltSums {
    s1: i64,
    d: i64,
    s2: i64,
}

impl TiltSums {
    fn of(state: &[u64]) -> Self {
        let mut s = TiltSums { s1: 0, d: 0, s2: 0 };
        for (i, &n) in state.iter().enumerate() {
            let k = (i + 1) as i64;
            s.s1 += n as i64;
            s.d += k * n as i64;
            s.s2 += k * k * (n as i64) * (n as i64);
        }
        s
    }
}

/// beta * volume * (H(new) - H(old)) for flipping N_k by `dn` (+1 or -1),
/// with the plain (not lsc) Hamiltonians — the finite-volume measures use
/// the Hamiltonian itself; the lsc hull only matters in the limit.
fn beta_v_delta_h(
    model: Model,
    params: &ModelParams,
    volume: f64,
    sums: &TiltSums,
    k: usize,
    n_k: u64,
    dn: i64,
) -> f64 {
    let beta = params.beta;
    let kf = k as f64;
    match model {
        Model::Ideal => 0.0,
        Model::Cmf => {
            let s1 = sums.s1 as f64;
            let s1n = s1 + dn as f64;
            beta * params.a / (2.0 * volume) * (s1n * s1n - s1 * s1)
        }
        Model::Pmf | Model::Hyl => {
            let d = sums.d as f64;
            let dnn = d + dn as f64 * kf;
            let mut dh = beta * (-params.mu * (dnn - d)
                + params.a / (2.0 * volume) * (dnn * dnn - d * d));
            if let Model::Hyl = model {
                let n = n_k as f64;
                let nn = n + dn as f64;
                dh -= beta * params.b / (2.0 * volume) * kf * kf * (nn * nn - n * n);
            }
            dh
        }
    }
}

/// Metropolis chain targeting the tilted measure
/// reference Poisson mass * exp(-beta * volume * H(N / volume)).
///
/// Proposals pick k uniformly and move N_k by +-1 with probability 1/2 each;
/// moves to -1 are rejected. Returns the retained states (after burn-in,
/// thinned) of all chains in deterministic order plus merged statistics.
pub fn mcmc_tilted(
    model: Model,
    params: &ModelParams,
    cfg: &SamplerConfig,
) -> Result<(Vec<Vec<u64>>, SampleStats)> {
    cfg.validate()?;
    if let Model::Hyl = model {
        params.validate_hyl()?;
    } else {
        params.validate()?;
    }
    let w = make_weights(params, cfg.k_max)?;
    let lambdas: Vec<f64> = w.q.iter().map(|q| q * cfg.volume).collect();
    let per_chain: Vec<(Vec<Vec<u64>>, u64, u64)> = (0..cfg.n_chains as u64)
        .into_par_iter()
        .map(|chain| {
            let mut rng = chain_rng(cfg.seed, chain);
            let mut state = vec![0u64; cfg.k_max];
            let mut sums = TiltSums::of(&state);
            let mut kept = Vec::new();
            let mut accepted = 0u64;
            let mut proposed = 0u64;
            for step in 0..cfg.chain_length {
                let k = rng.gen_range(0..cfg.k_max);
                let dn: i64 = if rng.gen::<bool>() { 1 } else { -1 };
                proposed += 1;
                let n_k = state[k];
                let feasible = dn > 0 || n_k > 0;
                if feasible {
                    // Poisson mass ratio: up-move lambda/(n+1), down-move n/lambda
                    let mass_ratio = if dn > 0 {
                        lambdas[k] / (n_k as f64 + 1.0)
                    } else {
                        n_k as f64 / lambdas[k]
                    };
                    let dh = beta_v_delta_h(model, params, cfg.volume, &sums, k + 1, n_k, dn);
                    let log_ratio = mass_ratio.ln() - dh;
                    if log_ratio >= 0.0 || rng.gen::<f64>() < log_ratio.exp() {
                        let kf = (k + 1) as i64;
                        sums.s1 += dn;
                        sums.d += kf * dn;
                        sums.s2 += kf * kf * (2 * dn * n_k as i64 + 1);
                        state[k] = (n_k as i64 + dn) as u64;
                        accepted += 1;
                    }
                }
                if step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0 {
                    kept.push(state.clone());
                }
            }
            (kept, accepted, proposed)
        })
        .collect();
    let accepted: u64 = per_chain.iter().map(|c| c.1).sum();
    let proposed: u64 = per_chain.iter().map(|c| c.2).sum();
    let samples: Vec<Vec<u64>> = per_chain.into_iter().flat_map(|c| c.0).collect();
    let mut stats = sample_stats(&samples, cfg.volume);
    stats.acceptance_rate = accepted as f64 / proposed as f64;
    Ok((samples, stats))
}

/// Per-coordinate mean and standard error of a sample set, in density units,
/// with the standard error widened by the autocorrelation of the density
/// series (iid samples leave it unchanged).
pub fn sample_stats(samples: &[Vec<u64>], volume: f64) -> SampleStats {
    if samples.is_empty() {
        return SampleStats { mean: vec![], std_error: vec![], acceptance_rate: 1.0, ess: 0.0 };
    }
    let k = samples[0].len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; k];
    for s in samples {
        for (m, &c) in mean.iter_mut().zip(s.iter()) {
            *m += c as f64;
        }
    }
    for m in mean.iter_mut() {
        *m /= n * volume;
    }
    let mut var = vec![0.0; k];
    for s in samples {
        for ((v, &c), &m) in var.iter_mut().zip(s.iter()).zip(mean.iter()) {
            let d = c as f64 / volume - m;
            *v += d * d;
        }
    }
    let density: Vec<f64> = samples
        .iter()
        .map(|s| s.iter().enumerate().map(|(i, &c)| (i + 1) as f64 * c as f64).sum::<f64>() / volume)
        .collect();
    let ess = effective_sample_size(&density);
    let n_eff = ess.max(1.0);
    let std_error = var
        .iter()
        .map(|&v| (v / (n - 1.0).max(1.0)).sqrt() / n_eff.sqrt())
        .collect();
    SampleStats { mean, std_error, acceptance_rate: 1.0, ess }
}

/// Effective sample size by the initial positive sequence estimator on the
/// autocovariances: truncate at the first non-positive pair sum
/// gamma_{2m} + gamma_{2m+1}.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let gamma = |lag: usize| -> f64 {
        series[..n - lag]
            .iter()
            .zip(series[lag..].iter())
            .map(|(&a, &b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / nf
    };
    let g0 = gamma(0);
    if g0 <= 0.0 {
        return nf;
    }
    let mut tau_sum = 0.0;
    let mut m = 0usize;
    while 2 * m + 1 < n / 2 {
        let pair = gamma(2 * m) + gamma(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        tau_sum += pair;
        m += 1;
    }
    let tau = (2.0 * tau_sum / g0 - 1.0).max(1.0);
    nf / tau
}

/// Estimate the condensate curve E[D - D_{K'}] / volume for each cutoff in
/// `k_grid`. The ideal model uses the exact reference sampler; the tilted
/// models use Metropolis chains.
pub fn estimate_condensate(
    model: Model,
    params: &ModelParams,
    cfg: &SamplerConfig,
    k_grid: &[usize],
) -> Result<Vec<(usize, f64)>> {
    cfg.validate()?;
    if let Some(&kmax) = k_grid.iter().max() {
        if kmax > cfg.k_max {
            return Err(Error::Domain("K_grid exceeds the sampler cutoff".into()));
        }
    }
    let samples = match model {
        Model::Ideal => sample_reference(params, cfg)?,
        _ => mcmc_tilted(model, params, cfg)?.0,
    };
    let n = samples.len() as f64;
    let mut out = Vec::with_capacity(k_grid.len());
    for &kp in k_grid {
        let mut acc = 0.0;
        for s in &samples {
            let tail: f64 =
                s.iter().enumerate().skip(kp).map(|(i, &c)| (i + 1) as f64 * c as f64).sum();
            acc += tail;
        }
        out.push((kp, acc / (n * cfg.volume)));
    }
    Ok(out)
}

/// Exact probability table of a truncated finite-volume model: every state
/// (N_1..N_K) with N_k <= cap, weighted by the Poisson reference mass times
/// the Hamiltonian tilt, normalised exactly.
#[derive(Debug, Clone)]
pub struct BruteForceTable {
    pub k: usize,
    pub cap: u64,
    /// probabilities in mixed-radix order (N_1 fastest)
    pub probs: Vec<f64>,
    /// log of the unnormalised partition sum E_ref-style, so that
    /// log_partition / (beta * volume) estimates p_model - p_ideal
    pub log_partition: f64,
}

impl BruteForceTable {
    pub fn index(&self, counts: &[u64]) -> usize {
        let mut idx = 0usize;
        for &c in counts.iter().rev() {
            idx = idx * (self.cap as usize + 1) + c as usize;
        }
        idx
    }

    pub fn prob(&self, counts: &[u64]) -> f64 {
        self.probs[self.index(counts)]
    }
}

fn model_energy(model: Model, x: &OccupationVector, params: &ModelParams) -> f64 {
    match model {
        Model::Ideal => 0.0,
        Model::Cmf => energy_cmf(x, params),
        Model::Pmf => energy_pmf(x, params),
        Model::Hyl => energy_hyl(x, params),
    }
}

/// Enumerate the truncated state space exactly.
///
/// # Errors
/// State-space overflow when (cap+1)^K > 10^7.
pub fn brute_force_distribution(
    model: Model,
    params: &ModelParams,
    volume: f64,
    k: usize,
    cap: u64,
) -> Result<BruteForceTable> {
    params.validate()?;
    if k == 0 || !(volume > 0.0) {
        return Err(Error::Domain("enumeration needs K >= 1 and volume > 0".into()));
    }
    let base = cap as u128 + 1;
    let mut size = 1u128;
    for _ in 0..k {
        size = size.saturating_mul(base);
        if size > 10_000_000 {
            return Err(Error::StateSpace(format!(
                "state space ({})^{k} exceeds 10^7",
                cap + 1
            )));
        }
    }
    let size = size as usize;
    let w = make_weights(params, k)?;
    let lambdas: Vec<f64> = w.q.iter().map(|q| q * volume).collect();
    let mut ln_fact = vec![0.0f64; cap as usize + 1];
    for i in 1..=cap as usize {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut log_w = Vec::with_capacity(size);
    let mut counts = vec![0u64; k];
    for idx in 0..size {
        let mut rem = idx;
        for c in counts.iter_mut() {
            *c = (rem % (cap as usize + 1)) as u64;
            rem /= cap as usize + 1;
        }
        let mut lw = 0.0;
        for (j, &c) in counts.iter().enumerate() {
            lw += c as f64 * lambdas[j].ln() - ln_fact[c as usize] - lambdas[j];
        }
        let x = OccupationVector {
            x: counts.iter().map(|&c| c as f64 / volume).collect(),
        };
        lw -= params.beta * volume * model_energy(model, &x, params);
        log_w.push(lw);
    }
    let lmax = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_w.iter().map(|&l| (l - lmax).exp()).sum();
    let log_partition = lmax + sum.ln();
    let probs = log_w.iter().map(|&l| (l - log_partition).exp()).collect();
    Ok(BruteForceTable { k, cap, probs, log_partition })
}

/// Exhaustive grid argmin of the model's rate + lsc-energy objective over a
/// K-dimensional box, refined iteratively around the coarse argmin until the
/// cell size drops below `step`.
pub fn grid_minimize_truncated(
    model: Model,
    params: &ModelParams,
    bounds: &[(f64, f64)],
    step: f64,
) -> Result<OccupationVector> {
    params.validate()?;
    let k = bounds.len();
    if k == 0 || k > 3 {
        return Err(Error::Domain("grid minimisation supports 1 <= K <= 3".into()));
    }
    if !(step > 0.0) || bounds.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::Domain("grid bounds must be finite with lo <= hi".into()));
    }
    let w = make_weights(params, k)?;
    let objective = |x: &OccupationVector| -> f64 {
        let rate = ideal_rate(x, &w);
        let energy = match model {
            Model::Ideal => 0.0,
            Model::Cmf => energy_cmf(x, params),
            Model::Pmf => energy_pmf_lsc(x, params),
            Model::Hyl => energy_hyl_lsc(x, params),
        };
        rate + energy
    };
    const NPTS: usize = 21;
    let mut lo: Vec<f64> = bounds.iter().map(|b| b.0.max(0.0)).collect();
    let mut hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let mut best = OccupationVector::zeros(k);
    loop {
        let widths: Vec<f64> = lo.iter().zip(hi.iter()).map(|(l, h)| h - l).collect();
        let mut best_val = f64::INFINITY;
        let total = NPTS.pow(k as u32);
        let mut x = OccupationVector::zeros(k);
        for idx in 0..total {
            let mut rem = idx;
            for j in 0..k {
                let i = rem % NPTS;
                rem /= NPTS;
                x.x[j] = lo[j] + widths[j] * i as f64 / (NPTS - 1) as f64;
            }
            let v = objective(&x);
            if v < best_val {
                best_val = v;
                best.x.copy_from_slice(&x.x);
            }
        }
        let cell = widths.iter().cloned().fold(0.0f64, f64::max) / (NPTS - 1) as f64;
        if cell <= step {
            break;
        }
        for j in 0..k {
            let c = widths[j] / (NPTS - 1) as f64;
            lo[j] = (best.x[j] - c).max(bounds[j].0.max(0.0));
            hi[j] = (best.x[j] + c).min(bounds[j].1);
        }
    }
    Ok(best)
}

/// On-disk layout for sample streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsvFormat {
    /// `step,k,count`, one row per nonzero-or-not coordinate
    Long,
    /// `step,N_1..N_K`, one row per sample
    Wide,
}

/// Persist a sample stream as CSV; byte-stable for fixed samples.
pub fn write_samples_csv<W: Write>(
    out: W,
    samples: &[Vec<u64>],
    format: CsvFormat,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    match format {
        CsvFormat::Long => {
            wtr.write_record(["step", "k", "count"])?;
            for (step, s) in samples.iter().enumerate() {
                for (i, &c) in s.iter().enumerate() {
                    wtr.write_record([step.to_string(), (i + 1).to_string(), c.to_string()])?;
                }
            }
        }
        CsvFormat::Wide => {
            let k = samples.first().map(|s| s.len()).unwrap_or(0);
            let mut header = vec!["step".to_string()];
            header.extend((1..=k).map(|i| format!("N_{i}")));
            wtr.write_record(&header)?;
            for (step, s) in samples.iter().enumerate() {
                let mut row = vec![step.to_string()];
                row.extend(s.iter().map(|c| c.to_string()));
                wtr.write_record(&row)?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(std::io::Error::new(std::io::ErrorKind::Other, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::total_density;
    use crate::solvers::{cmf_minimizer, pmf_delta_star};

    fn ref_params() -> ModelParams {
        ModelParams::new(3, 1.0, -0.5)
    }

    #[test]
    fn reference_sampler_deterministic() {
        let cfg = SamplerConfig::new(50.0, 10, 200, 42);
        let a = sample_reference(&ref_params(), &cfg).unwrap();
        let b = sample_reference(&ref_params(), &cfg).unwrap();
        assert_eq!(a, b);
        let cfg2 = SamplerConfig { seed: 43, ..cfg };
        let c = sample_reference(&ref_params(), &cfg2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn reference_sampler_poisson_moments() {
        let params = ref_params();
        let cfg = SamplerConfig::new(100.0, 20, 100_000, 7);
        let samples = sample_reference(&params, &cfg).unwrap();
        let w = make_weights(&params, 20).unwrap();
        let n = samples.len() as f64;
        for k in 0..20 {
            let lambda = 100.0 * w.q[k];
            let mean: f64 = samples.iter().map(|s| s[k] as f64).sum::<f64>() / n;
            // the 5-count floor keeps the rare-event bins honest: for
            // n*lambda << 1 the normal band is narrower than a single count
            let se = (lambda / n).sqrt();
            assert!(
                (mean - lambda).abs() <= 5.0 * se + 5.0 / n,
                "k={}: mean {mean} vs lambda {lambda}",
                k + 1
            );
            let var: f64 =
                samples.iter().map(|s| (s[k] as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            // var of the sample variance of Poisson: (lambda + 2 lambda^2)/n
            let se_var = ((lambda + 2.0 * lambda * lambda) / n).sqrt();
            assert!(
                (var - lambda).abs() <= 5.0 * se_var + 5.0 / n,
                "k={}: var {var} vs lambda {lambda}",
                k + 1
            );
        }
    }

    #[test]
    fn zero_hamiltonian_chain_matches_reference() {
        let params = ref_params(); // mu = a = b = 0
        let mut cfg = SamplerConfig::new(30.0, 5, 200_000, 3);
        cfg.burn_in = 10_000;
        cfg.thinning = 5;
        let (samples, stats) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
        assert!(!samples.is_empty());
        let w = make_weights(&params, 5).unwrap();
        for k in 0..5 {
            let tol = 5.0 * stats.std_error[k].max(1e-4);
            assert!(
                (stats.mean[k] - w.q[k]).abs() <= tol,
                "k={}: {} vs q {} (tol {tol})",
                k + 1,
                stats.mean[k],
                w.q[k]
            );
        }
        assert!(stats.acceptance_rate > 0.0 && stats.acceptance_rate < 1.0);
    }

    #[test]
    fn pmf_chain_concentrates_on_delta_star() {
        // mu below a*rho(alpha): the clamp in the rate functional is inactive,
        // so the finite-K chain and the variational delta* agree
        let params = ModelParams::new(3, 1.0, -1.0).with_mu(0.005).with_couplings(1.0, 0.0);
        let w = make_weights(&params, 15).unwrap();
        let sol = pmf_delta_star(&params, &w).unwrap();
        let mut cfg = SamplerConfig::new(10_000.0, 15, 400_000, 11);
        cfg.burn_in = 100_000;
        cfg.thinning = 20;
        cfg.n_chains = 2;
        let (samples, stats) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
        let dens: Vec<f64> = samples
            .iter()
            .map(|s| {
                s.iter().enumerate().map(|(i, &c)| (i + 1) as f64 * c as f64).sum::<f64>()
                    / cfg.volume
            })
            .collect();
        let n = dens.len() as f64;
        let mean = dens.iter().sum::<f64>() / n;
        let var = dens.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / stats.ess.max(1.0)).sqrt();
        let bias = truncation_bias(&params, 15, 1.0).unwrap(); // per unit volume
        assert!(
            (mean - sol.delta_star).abs() <= 5.0 * se + bias + 1e-3,
            "mean {mean} vs delta* {} (se {se})",
            sol.delta_star
        );
    }

    #[test]
    fn mcmc_deterministic_per_seed() {
        let params = ref_params().with_mu(0.2).with_couplings(1.0, 0.0);
        let mut cfg = SamplerConfig::new(20.0, 4, 5000, 99);
        cfg.burn_in = 100;
        let (a, _) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
        let (b, _) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn brute_force_normalisation_and_zero_tilt() {
        let params = ref_params();
        let table = brute_force_distribution(Model::Ideal, &params, 5.0, 2, 12).unwrap();
        let total: f64 = table.probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // zero tilt: product of truncated Poissons
        let w = make_weights(&params, 2).unwrap();
        let l1 = 5.0 * w.q[0];
        let l2 = 5.0 * w.q[1];
        let pois = |l: f64, n: u64| -> f64 {
            let mut lf = 0.0;
            for i in 1..=n {
                lf += (i as f64).ln();
            }
            (n as f64 * l.ln() - lf - l).exp()
        };
        let mut z = 0.0;
        for n1 in 0..=12u64 {
            for n2 in 0..=12u64 {
                z += pois(l1, n1) * pois(l2, n2);
            }
        }
        for n1 in [0u64, 1, 3] {
            for n2 in [0u64, 2] {
                let expect = pois(l1, n1) * pois(l2, n2) / z;
                assert!((table.prob(&[n1, n2]) - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn brute_force_overflow_guard() {
        let params = ref_params();
        let r = brute_force_distribution(Model::Ideal, &params, 5.0, 3, 1000);
        assert!(matches!(r, Err(Error::StateSpace(_))));
    }

    #[test]
    fn mcmc_total_variation_vs_enumeration() {
        let params = ref_params().with_mu(0.3).with_couplings(0.5, 0.0);
        let cap = 30u64;
        let table = brute_force_distribution(Model::Pmf, &params, 5.0, 2, cap).unwrap();
        let mut cfg = SamplerConfig::new(5.0, 2, 1_000_000, 17);
        cfg.burn_in = 50_000;
        let (samples, _) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
        let mut emp = vec![0.0f64; table.probs.len()];
        let mut kept = 0.0;
        for s in &samples {
            if s[0] <= cap && s[1] <= cap {
                emp[table.index(s)] += 1.0;
                kept += 1.0;
            }
        }
        for e in emp.iter_mut() {
            *e /= kept;
        }
        let tv: f64 =
            emp.iter().zip(table.probs.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv <= 0.02, "total variation {tv}");
    }

    #[test]
    fn detailed_balance_flux() {
        // K = 1, cap 10: empirical flux n -> n+1 balances n+1 -> n
        let params = ref_params().with_mu(0.1).with_couplings(0.5, 0.0);
        let cfg = SamplerConfig::new(5.0, 1, 2_000_000, 23);
        let (samples, _) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
        let mut up = vec![0.0f64; 11];
        let mut down = vec![0.0f64; 11];
        for pair in samples.windows(2) {
            let (a, b) = (pair[0][0], pair[1][0]);
            if b == a + 1 && a <= 10 {
                up[a as usize] += 1.0;
            } else if a == b + 1 && b <= 10 {
                down[b as usize] += 1.0;
            }
        }
        for n in 0..6 {
            let total = up[n] + down[n];
            if total > 1000.0 {
                let imbalance = (up[n] - down[n]).abs() / total;
                // MC error ~ 1/sqrt(total)
                assert!(
                    imbalance <= 6.0 / total.sqrt() + 0.01,
                    "n={n}: up {} down {}",
                    up[n],
                    down[n]
                );
            }
        }
    }

    #[test]
    fn condensate_estimator_trivia() {
        let params = ref_params();
        let cfg = SamplerConfig::new(100.0, 10, 2000, 5);
        // K_grid = {K}: identically zero
        let out = estimate_condensate(Model::Ideal, &params, &cfg, &[10]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], (10, 0.0));
        // subcritical ideal gas: tail mass shrinks with the cutoff
        let out = estimate_condensate(Model::Ideal, &params, &cfg, &[2, 5, 8]).unwrap();
        assert!(out[0].1 >= out[1].1 && out[1].1 >= out[2].1);
        assert!(out[2].1 < 0.05);
    }

    #[test]
    fn grid_minimizer_matches_closed_forms() {
        let params = ref_params();
        let w = make_weights(&params, 3).unwrap();
        let bounds: Vec<(f64, f64)> = w.q.iter().map(|&q| (0.0, 4.0 * q + 0.1)).collect();
        let got = grid_minimize_truncated(Model::Ideal, &params, &bounds, 1e-4).unwrap();
        for (g, &q) in got.x.iter().zip(w.q.iter()) {
            assert!((g - q).abs() <= 1e-3, "{g} vs {q}");
        }
        let p = ref_params().with_couplings(2.0, 0.0);
        let got = grid_minimize_truncated(Model::Cmf, &p, &bounds, 1e-4).unwrap();
        let expect = cmf_minimizer(&make_weights(&p, 3).unwrap(), 2.0);
        for (g, &e) in got.x.iter().zip(expect.x.iter()) {
            assert!((g - e).abs() <= 1e-3, "{g} vs {e}");
        }
    }

    #[test]
    fn ess_behaviour() {
        // iid-like series: ess close to n
        let mut rng = chain_rng(1, 0);
        let series: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let ess = effective_sample_size(&series);
        assert!(ess > 2000.0, "iid ess {ess}");
        // strongly correlated series: ess much smaller
        let mut v = 0.0;
        let slow: Vec<f64> = (0..5000)
            .map(|_| {
                v = 0.995 * v + 0.1 * (rng.gen::<f64>() - 0.5);
                v
            })
            .collect();
        let ess_slow = effective_sample_size(&slow);
        assert!(ess_slow < ess / 10.0, "correlated ess {ess_slow}");
        assert_eq!(effective_sample_size(&[1.0, 1.0]), 2.0);
    }

    #[test]
    fn csv_round_trip_shapes() {
        let samples = vec![vec![1u64, 0, 2], vec![0, 3, 1]];
        let mut long = Vec::new();
        write_samples_csv(&mut long, &samples, CsvFormat::Long).unwrap();
        let text = String::from_utf8(long).unwrap();
        assert!(text.starts_with("step,k,count\n"));
        assert_eq!(text.lines().count(), 7);
        let mut wide = Vec::new();
        write_samples_csv(&mut wide, &samples, CsvFormat::Wide).unwrap();
        let text = String::from_utf8(wide).unwrap();
        assert!(text.starts_with("step,N_1,N_2,N_3\n"));
        assert_eq!(text.lines().count(), 3);
        // byte stability
        let mut again = Vec::new();
        write_samples_csv(&mut again, &samples, CsvFormat::Wide).unwrap();
        assert_eq!(text.as_bytes(), again.as_slice());
    }

    #[test]
    fn density_spread_shrinks_with_volume() {
        let params = ModelParams::new(3, 1.0, -1.0).with_mu(0.5).with_couplings(1.0, 0.0);
        let mut spreads = Vec::new();
        for &vol in &[100.0, 1000.0, 10_000.0] {
            let mut cfg = SamplerConfig::new(vol, 10, 120_000, 31);
            cfg.burn_in = 20_000;
            cfg.thinning = 10;
            let (samples, _) = mcmc_tilted(Model::Pmf, &params, &cfg).unwrap();
            let dens: Vec<f64> =
                samples.iter().map(|s| total_density_of(s) / vol).collect();
            let n = dens.len() as f64;
            let mean = dens.iter().sum::<f64>() / n;
            let var = dens.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
            spreads.push(var.sqrt());
        }
        assert!(spreads[0] > spreads[1] && spreads[1] > spreads[2], "{spreads:?}");
    }

    fn total_density_of(s: &[u64]) -> f64 {
        s.iter().enumerate().map(|(i, &c)| (i + 1) as f64 * c as f64).sum()
    }
}
