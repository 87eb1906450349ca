//! Model parameters, cycle weights, occupation vectors, and the energy and
//! rate functionals of the four partition models.

use crate::error::{Error, Result};
use crate::special::bose_g;
use serde::{Deserialize, Serialize};

/// Parameters shared by all four models.
///
/// `d` is the spatial dimension, `beta > 0` the inverse temperature,
/// `alpha <= 0` the reference chemical potential. The tilt chemical potential
/// `mu` and the couplings `a` (mean-field) and `b` (counter term, HYL only,
/// `0 <= b < a`) are ignored by the models that do not use them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: u32,
    pub beta: f64,
    pub alpha: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

impl ModelParams {
    /// Reference-model parameters; tilt and couplings default to zero.
    pub fn new(d: u32, beta: f64, alpha: f64) -> Self {
        ModelParams { d, beta, alpha, mu: 0.0, a: 0.0, b: 0.0 }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_couplings(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Domain("dimension d must be >= 1".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Domain(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.alpha > 0.0 {
            return Err(Error::Domain(format!(
                "alpha must be <= 0 (the reference weights require it), got {}",
                self.alpha
            )));
        }
        if self.a < 0.0 {
            return Err(Error::Domain(format!("coupling a must be >= 0, got {}", self.a)));
        }
        if self.b < 0.0 {
            return Err(Error::Domain(format!("coupling b must be >= 0, got {}", self.b)));
        }
        Ok(())
    }

    /// Check the HYL constraint 0 <= b < a on top of the common ones.
    pub fn validate_hyl(&self) -> Result<()> {
        self.validate()?;
        if self.b >= self.a {
            return Err(Error::Domain(format!(
                "HYL requires b < a, got b = {}, a = {}",
                self.b, self.a
            )));
        }
        Ok(())
    }

    /// The normalisation (4 pi beta)^{-d/2} entering every cycle weight.
    pub fn prefactor(&self) -> f64 {
        (4.0 * std::f64::consts::PI * self.beta).powf(-(self.d as f64) / 2.0)
    }
}

/// Precomputed cycle weights q_k = e^{beta k alpha} / ((4 pi beta)^{d/2} k^{1+d/2})
/// for k = 1..K, together with their closed-form totals.
#[derive(Debug, Clone)]
pub struct CycleWeightTable {
    pub params: ModelParams,
    pub k_max: usize,
    pub q: Vec<f64>,
    /// qbar = sum_k q_k = (4 pi beta)^{-d/2} g(1 + d/2, -beta alpha)
    pub qbar: f64,
    /// rho(alpha) = sum_k k q_k; +infinity exactly when alpha = 0 and d <= 2
    pub rho: f64,
    /// partial sum of q_k up to K
    pub q_partial: f64,
    /// partial sum of k q_k up to K
    pub rho_partial: f64,
}

/// Build the weight table with closed-form totals.
pub fn make_weights(params: &ModelParams, k_max: usize) -> Result<CycleWeightTable> {
    params.validate()?;
    if k_max == 0 {
        return Err(Error::Domain("weight table needs K >= 1".into()));
    }
    let d2 = params.d as f64 / 2.0;
    let pref = params.prefactor();
    let t = -params.beta * params.alpha;
    let mut q = Vec::with_capacity(k_max);
    let mut q_partial = 0.0;
    let mut rho_partial = 0.0;
    for k in 1..=k_max {
        let kf = k as f64;
        let qk = pref * (params.beta * kf * params.alpha).exp() / kf.powf(1.0 + d2);
        q.push(qk);
        q_partial += qk;
        rho_partial += kf * qk;
    }
    let qbar = pref * bose_g(1.0 + d2, t)?;
    let rho = if t == 0.0 && params.d <= 2 {
        f64::INFINITY
    } else {
        pref * bose_g(d2, t)?
    };
    Ok(CycleWeightTable { params: *params, k_max, q, qbar, rho, q_partial, rho_partial })
}

/// A truncated occupation sequence (x_1..x_K), zero beyond K.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationVector {
    pub x: Vec<f64>,
}

impl OccupationVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain("occupation entries must be finite and >= 0".into()));
        }
        Ok(OccupationVector { x })
    }

    pub fn zeros(k: usize) -> Self {
        OccupationVector { x: vec![0.0; k] }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Particle density D(x) = sum_k k x_k.
pub fn total_density(x: &OccupationVector) -> f64 {
    x.x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum()
}

/// Truncated particle density D_K'(x) = sum_{k<=K'} k x_k.
pub fn partial_density(x: &OccupationVector, k_cut: usize) -> f64 {
    x.x.iter().take(k_cut).enumerate().map(|(i, v)| (i + 1) as f64 * v).sum()
}

/// Ideal-gas rate function
/// I_alpha(x) = sum_k (x_k/beta)(log(x_k/q_k) - 1) + qbar/beta,
/// with the convention 0 log 0 = 0.
///
/// Entries beyond the truncation are exactly zero and contribute through the
/// closed-form tail (qbar - sum_{k<=K} q_k)/beta, so the value is exact for
/// truncated vectors rather than merely truncated.
pub fn ideal_rate(x: &OccupationVector, w: &CycleWeightTable) -> f64 {
    let beta = w.params.beta;
    let mut sum = 0.0;
    let mut head_q = 0.0;
    for (i, &xk) in x.x.iter().enumerate() {
        let qk = w.q[i];
        head_q += qk;
        if xk > 0.0 {
            sum += xk / beta * ((xk / qk).ln() - 1.0) + qk / beta;
        } else {
            sum += qk / beta;
        }
    }
    sum + (w.qbar - head_q) / beta
}

/// CMF Hamiltonian H(x) = (a/2) (sum_k x_k)^2.
pub fn energy_cmf(x: &OccupationVector, params: &ModelParams) -> f64 {
    let s: f64 = x.x.iter().sum();
    params.a / 2.0 * s * s
}

/// PMF Hamiltonian H(x) = -mu D(x) + (a/2) D(x)^2.
pub fn energy_pmf(x: &OccupationVector, params: &ModelParams) -> f64 {
    let d = total_density(x);
    -params.mu * d + params.a / 2.0 * d * d
}

/// Lower-semicontinuous regularisation of the PMF Hamiltonian:
/// H(x) - (mu - a D(x))_+^2 / (2a), which equals -mu^2/(2a) on D(x) < mu/a
/// and the plain Hamiltonian elsewhere.
pub fn energy_pmf_lsc(x: &OccupationVector, params: &ModelParams) -> f64 {
    if params.a == 0.0 {
        return energy_pmf(x, params);
    }
    let d = total_density(x);
    let pos = (params.mu - params.a * d).max(0.0);
    energy_pmf(x, params) - pos * pos / (2.0 * params.a)
}

/// HYL Hamiltonian H(x) = -mu D(x) + (a/2) D(x)^2 - (b/2) sum_k k^2 x_k^2.
pub fn energy_hyl(x: &OccupationVector, params: &ModelParams) -> f64 {
    let s2: f64 = x.x.iter().enumerate().map(|(i, v)| {
        let k = (i + 1) as f64;
        k * k * v * v
    }).sum();
    energy_pmf(x, params) - params.b / 2.0 * s2
}

/// Equivalent off-diagonal form of the HYL Hamiltonian:
/// -mu D + ((a-b)/2) D^2 + (b/2) sum_{j != k} j k x_j x_k.
/// Kept as an independent cross-check of [`energy_hyl`].
pub fn energy_hyl_offdiag(x: &OccupationVector, params: &ModelParams) -> f64 {
    let d = total_density(x);
    let mut cross = 0.0;
    for (i, &xi) in x.x.iter().enumerate() {
        for (j, &xj) in x.x.iter().enumerate() {
            if i != j {
                cross += (i + 1) as f64 * (j + 1) as f64 * xi * xj;
            }
        }
    }
    -params.mu * d + (params.a - params.b) / 2.0 * d * d + params.b / 2.0 * cross
}

/// Lower-semicontinuous regularisation of the HYL Hamiltonian:
/// H(x) - (mu - a D(x))_+^2 / (2(a-b)).
pub fn energy_hyl_lsc(x: &OccupationVector, params: &ModelParams) -> f64 {
    let d = total_density(x);
    let pos = (params.mu - params.a * d).max(0.0);
    energy_hyl(x, params) - pos * pos / (2.0 * (params.a - params.b))
}

/// The HYL variational objective F(x) = I_alpha(x) + H_lsc(x); its minimisers
/// are exactly the zeros of the HYL rate function.
pub fn objective_f(x: &OccupationVector, w: &CycleWeightTable) -> f64 {
    ideal_rate(x, w) + energy_hyl_lsc(x, &w.params)
}
