//! Pressures, free energies, densities, critical densities, density-LDP rate
//! functions, condensate densities, and phase-diagram scans.
//!
//! All pressures follow the convention p = qbar/beta - inf{I_alpha + H_lsc},
//! which reduces to qbar/beta for the reference gas and reproduces the CMF
//! and PMF closed forms; the interacting models' partition functions are
//! normalised against the reference measure, so their Monte Carlo estimates
//! converge to p_model - p_ideal.

use crate::error::{Error, Result};
use crate::model::{make_weights, ModelParams};
use crate::solvers::{hyl_solve_branch0, pmf_delta_star, HylBranchSolution, Regime};
use crate::special::{bose_g, lambert_w, riemann_zeta, Branch};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Series truncation used whenever a weight table is needed internally.
pub const DEFAULT_K: usize = 10_000;

/// Which model a thermodynamic quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ideal,
    Cmf,
    Pmf,
    Hyl,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" => Ok(Model::Ideal),
            "cmf" => Ok(Model::Cmf),
            "pmf" => Ok(Model::Pmf),
            "hyl" => Ok(Model::Hyl),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Model::Ideal => "ideal",
            Model::Cmf => "cmf",
            Model::Pmf => "pmf",
            Model::Hyl => "hyl",
        };
        write!(f, "{s}")
    }
}

/// qbar at a shifted chemical potential, in closed form.
fn qbar_at(params: &ModelParams, chem: f64) -> Result<f64> {
    let t = -params.beta * chem;
    if t < 0.0 {
        return Err(Error::Domain(format!("chemical potential {chem} > 0 has no pressure")));
    }
    Ok(params.prefactor() * bose_g(params.d as f64 / 2.0 + 1.0, t)?)
}

/// rho at a shifted chemical potential; +infinity at chem = 0 for d <= 2.
fn rho_at(params: &ModelParams, chem: f64) -> f64 {
    let t = -params.beta * chem;
    if t <= 0.0 && params.d <= 2 {
        return f64::INFINITY;
    }
    params.prefactor() * bose_g(params.d as f64 / 2.0, t.max(0.0)).unwrap_or(f64::INFINITY)
}

/// Ideal-gas pressure p = qbar / beta.
pub fn pressure_ideal(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(qbar_at(params, params.alpha)? / params.beta)
}

/// Critical density rho_c(d) = zeta(d/2)/(4 pi beta)^{d/2} for d >= 3, else
/// +infinity.
pub fn rho_critical(params: &ModelParams) -> f64 {
    if params.d <= 2 {
        f64::INFINITY
    } else {
        params.prefactor() * riemann_zeta(params.d as f64 / 2.0).expect("d/2 > 1")
    }
}

/// Invert rho(gamma) = rho for gamma <= 0 by bracketed bisection.
fn gamma_of_rho<F: Fn(f64) -> f64>(density_of: F, rho: f64) -> Result<f64> {
    let mut lo = -1e3;
    let mut expand = 0;
    while density_of(lo) > rho {
        lo *= 2.0;
        expand += 1;
        if expand > 60 {
            return Err(Error::NoSolution(format!("no chemical potential reaches density {rho}")));
        }
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if density_of(mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ideal-gas free energy: Legendre–Fenchel transform of the pressure. Below
/// the critical density the conjugate chemical potential gamma solves
/// rho(gamma) = rho; above it f is constant at -p(beta, 0).
pub fn free_energy_ideal(params: &ModelParams, rho: f64) -> Result<f64> {
    params.validate()?;
    if rho < 0.0 {
        return Err(Error::Domain("density must be >= 0".into()));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let rc = rho_critical(params);
    if rho >= rc {
        let p0 = params.prefactor() * riemann_zeta(params.d as f64 / 2.0 + 1.0)? / params.beta;
        return Ok(-p0);
    }
    let gamma = gamma_of_rho(|g| rho_at(params, g), rho)?;
    let shifted = ModelParams { alpha: gamma, ..*params };
    Ok(gamma * rho - pressure_ideal(&shifted)?)
}

/// CMF pressure (1/(a beta^2)) W_0(a beta qbar)(1 + W_0(a beta qbar)/2);
/// the a -> 0 limit recovers qbar/beta.
pub fn pressure_cmf(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.a == 0.0 {
        return pressure_ideal(params);
    }
    let qbar = qbar_at(params, params.alpha)?;
    let w0 = lambert_w(Branch::Principal, params.a * params.beta * qbar)?;
    Ok(w0 * (1.0 + 0.5 * w0) / (params.a * params.beta * params.beta))
}

/// CMF density dp/dalpha = (W_0(a beta qbar)/(a beta qbar)) rho(alpha).
pub fn density_cmf(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let rho = rho_at(params, params.alpha);
    if params.a == 0.0 {
        return Ok(rho);
    }
    if rho.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let arg = params.a * params.beta * qbar_at(params, params.alpha)?;
    Ok(lambert_w(Branch::Principal, arg)? / arg * rho)
}

/// CMF critical density: the ideal one damped by the Lambert scale at alpha = 0.
pub fn rho_critical_cmf(params: &ModelParams) -> Result<f64> {
    if params.d <= 2 {
        return Ok(f64::INFINITY);
    }
    if params.a == 0.0 {
        return Ok(rho_critical(params));
    }
    let qbar0 = qbar_at(params, 0.0)?;
    let arg = params.a * params.beta * qbar0;
    Ok(lambert_w(Branch::Principal, arg)? / arg * rho_critical(params))
}

/// CMF free energy by the same Legendre construction as the ideal gas, with
/// the CMF density relation inverted for the conjugate alpha.
pub fn free_energy_cmf(params: &ModelParams, rho: f64) -> Result<f64> {
    params.validate()?;
    if rho < 0.0 {
        return Err(Error::Domain("density must be >= 0".into()));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if params.a == 0.0 {
        return free_energy_ideal(params, rho);
    }
    let dens = |g: f64| {
        let r = rho_at(params, g);
        if !r.is_finite() {
            return f64::INFINITY;
        }
        let arg = params.a * params.beta * qbar_at(params, g).unwrap_or(f64::NAN);
        lambert_w(Branch::Principal, arg).map(|w0| w0 / arg * r).unwrap_or(f64::NAN)
    };
    let rc = rho_critical_cmf(params)?;
    if rho >= rc {
        let p0 = pressure_cmf(&ModelParams { alpha: 0.0, ..*params })?;
        return Ok(-p0);
    }
    let gamma = gamma_of_rho(dens, rho)?;
    Ok(gamma * rho - pressure_cmf(&ModelParams { alpha: gamma, ..*params })?)
}

/// PMF pressure: p + mu^2/(2a) when saturated, else
/// (a/2) delta*^2 + p(beta, alpha + mu - a delta*).
pub fn pressure_pmf(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let w = make_weights(params, 64)?;
    let sol = pmf_delta_star(params, &w)?;
    match sol.regime {
        Regime::Saturated => {
            Ok(pressure_ideal(params)? + params.mu * params.mu / (2.0 * params.a))
        }
        _ => {
            let shift = params.mu - params.a * sol.delta_star;
            let p_shift = qbar_at(params, params.alpha + shift)? / params.beta;
            Ok(params.a / 2.0 * sol.delta_star * sol.delta_star + p_shift)
        }
    }
}

/// PMF density dp/dmu: rho(alpha + mu - a delta*) below saturation, mu/a at
/// and above it (the two expressions agree at the junction).
pub fn density_pmf(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let w = make_weights(params, 64)?;
    let sol = pmf_delta_star(params, &w)?;
    match sol.regime {
        Regime::Saturated => Ok(params.mu / params.a),
        _ => Ok(rho_at(params, params.alpha + params.mu - params.a * sol.delta_star)),
    }
}

/// PMF free energy f + (a/2) rho^2.
pub fn free_energy_pmf(params: &ModelParams, rho: f64) -> Result<f64> {
    Ok(free_energy_ideal(params, rho)? + params.a / 2.0 * rho * rho)
}

/// HYL minimiser plus the pressure derived from its objective.
fn hyl_state(params: &ModelParams) -> Result<(Vec<HylBranchSolution>, usize)> {
    let w = make_weights(params, DEFAULT_K)?;
    let bound = crate::solvers::chi_exclusion_bound(params, &w)?;
    if params.b >= bound {
        return Err(Error::Regime(format!(
            "b = {} is not below the lower-branch exclusion bound {bound:.6e}",
            params.b
        )));
    }
    let roots = hyl_solve_branch0(params, &w)?;
    if roots.is_empty() {
        return Err(Error::NoSolution("no HYL stationary point".into()));
    }
    let imin = roots
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.objective.partial_cmp(&y.1.objective).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok((roots, imin))
}

/// HYL pressure qbar/beta - min F.
pub fn pressure_hyl(params: &ModelParams) -> Result<f64> {
    params.validate_hyl()?;
    let (roots, imin) = hyl_state(params)?;
    Ok(qbar_at(params, params.alpha)? / params.beta - roots[imin].objective)
}

/// Pressure slope dp/dmu carried by one minimiser: D(xi) on the dilute side,
/// (b/(a-b))(mu/b - D(xi)) on the dense side.
fn hyl_slope_of(sol: &HylBranchSolution, params: &ModelParams) -> f64 {
    let dd = sol.delta_star;
    if dd > params.mu / params.a {
        dd
    } else {
        params.b / (params.a - params.b) * (params.mu / params.b - dd)
    }
}

/// HYL density dp/dmu at the global minimiser.
pub fn density_hyl(params: &ModelParams) -> Result<f64> {
    params.validate_hyl()?;
    let (roots, imin) = hyl_state(params)?;
    Ok(hyl_slope_of(&roots[imin], params))
}

/// Logarithmic moment generating function of the empirical density:
/// (qbar(alpha + t) - qbar(alpha))/beta, or +infinity when alpha + t > 0.
pub fn log_mgf(params: &ModelParams, t: f64) -> Result<f64> {
    params.validate()?;
    if params.alpha + t > 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((qbar_at(params, params.alpha + t)? - qbar_at(params, params.alpha)?) / params.beta)
}

/// Density large-deviation rate J_alpha(x) = p + f(beta,x) - alpha x on
/// [0, rho_c], +infinity outside; needs alpha < 0.
pub fn density_rate_j(params: &ModelParams, x: f64) -> Result<f64> {
    params.validate()?;
    if params.alpha >= 0.0 {
        return Err(Error::Domain("the density LDP requires alpha < 0".into()));
    }
    if x < 0.0 || (params.d >= 3 && x > rho_critical(params)) {
        return Ok(f64::INFINITY);
    }
    Ok(pressure_ideal(params)? + free_energy_ideal(params, x)? - params.alpha * x)
}

/// Tilted density rate J^PMF(x) = p + f(beta,x) - (mu+alpha) x + (a/2) x^2 - N,
/// with N the infimum of the same expression; the minimum sits at the PMF
/// density delta*. Equivalently J(x) - mu x + (a/2) x^2 - N.
pub fn density_rate_j_pmf(params: &ModelParams, x: f64) -> Result<f64> {
    params.validate()?;
    if params.alpha >= 0.0 {
        return Err(Error::Domain("the density LDP requires alpha < 0".into()));
    }
    let rc = rho_critical(params);
    let tilted = |y: f64| -> Result<f64> {
        Ok(density_rate_j(params, y)? - params.mu * y + params.a / 2.0 * y * y)
    };
    if x < 0.0 || (params.d >= 3 && x > rc) {
        return Ok(f64::INFINITY);
    }
    let ymax = if rc.is_finite() {
        rc
    } else {
        (4.0 * rho_at(params, params.alpha)).max(4.0 * params.mu / params.a.max(1e-12)).max(1.0)
    };
    let n = 400;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=n {
        let y = ymax * i as f64 / n as f64;
        let v = tilted(y)?;
        if v < best.1 {
            best = (y, v);
        }
    }
    let step = ymax / n as f64;
    let lo = (best.0 - step).max(0.0);
    let hi = (best.0 + step).min(ymax);
    let (_, nval) = golden(|y| tilted(y).unwrap_or(f64::INFINITY), lo, hi, 1e-11 * ymax);
    Ok(tilted(x)? - nval.min(best.1))
}

fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_8;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { (x1, f1) } else { (x2, f2) }
}

/// Ideal condensate: 0 for alpha < 0; at alpha = 0 it is +infinity for
/// d <= 2 and 0 for d >= 3.
pub fn condensate_ideal(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.alpha < 0.0 {
        Ok(0.0)
    } else if params.d <= 2 {
        Ok(f64::INFINITY)
    } else {
        Ok(0.0)
    }
}

/// The CMF condensate coincides with the ideal one.
pub fn condensate_cmf(params: &ModelParams) -> Result<f64> {
    condensate_ideal(params)
}

/// PMF condensate (mu/a - rho(alpha))_+.
pub fn condensate_pmf(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !(params.a > 0.0) {
        return Err(Error::Domain("PMF condensate needs a > 0".into()));
    }
    let rho = rho_at(params, params.alpha);
    if rho.is_infinite() {
        return Ok(0.0);
    }
    Ok((params.mu / params.a - rho).max(0.0))
}

/// HYL condensate (a/(a-b))(mu/a - D(xi))_+ at the unique minimiser.
///
/// # Errors
/// Regime error when two minimisers tie (the pressure derivative, and with it
/// the condensate, is not defined at mu*).
pub fn condensate_hyl(params: &ModelParams) -> Result<f64> {
    params.validate_hyl()?;
    let (roots, imin) = hyl_state(params)?;
    let tied = roots
        .iter()
        .enumerate()
        .filter(|(i, r)| *i != imin && (r.objective - roots[imin].objective).abs() <= 1e-9)
        .count();
    if tied > 0 {
        return Err(Error::Regime(
            "two simultaneous minimisers: the condensate density is not defined here".into(),
        ));
    }
    let dd = roots[imin].delta_star;
    Ok(params.a / (params.a - params.b) * (params.mu / params.a - dd).max(0.0))
}

/// Variable swept by [`phase_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Mu,
    Alpha,
}

/// A sweep specification: which parameter moves and over which grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
}

/// One grid point of a phase scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseScanRow {
    pub sweep_value: f64,
    pub pressure: f64,
    pub dpressure: f64,
    pub density: f64,
    pub condensate: f64,
    pub n_minimizers: u32,
    pub regime: String,
}

fn scan_row(model: Model, base: &ModelParams, var: SweepVariable, value: f64) -> PhaseScanRow {
    let mut params = *base;
    match var {
        SweepVariable::Mu => params.mu = value,
        SweepVariable::Alpha => params.alpha = value,
    }
    match scan_row_inner(model, &params, var) {
        Ok(mut row) => {
            row.sweep_value = value;
            row
        }
        Err(e) => PhaseScanRow {
            sweep_value: value,
            pressure: f64::NAN,
            dpressure: f64::NAN,
            density: f64::NAN,
            condensate: f64::NAN,
            n_minimizers: 0,
            regime: format!("error: {e}"),
        },
    }
}

fn scan_row_inner(model: Model, params: &ModelParams, var: SweepVariable) -> Result<PhaseScanRow> {
    let mut row = PhaseScanRow {
        sweep_value: 0.0,
        pressure: f64::NAN,
        dpressure: f64::NAN,
        density: f64::NAN,
        condensate: f64::NAN,
        n_minimizers: 1,
        regime: String::new(),
    };
    match model {
        Model::Ideal => {
            row.pressure = pressure_ideal(params)?;
            row.density = rho_at(params, params.alpha);
            row.dpressure = match var {
                SweepVariable::Alpha => row.density,
                SweepVariable::Mu => 0.0,
            };
            row.condensate = condensate_ideal(params)?;
            row.regime = if params.alpha == 0.0 { "critical" } else { "normal" }.into();
        }
        Model::Cmf => {
            row.pressure = pressure_cmf(params)?;
            row.density = density_cmf(params)?;
            row.dpressure = match var {
                SweepVariable::Alpha => row.density,
                SweepVariable::Mu => 0.0,
            };
            row.condensate = condensate_cmf(params)?;
            row.regime = if params.alpha == 0.0 { "critical" } else { "normal" }.into();
        }
        Model::Pmf => {
            let w = make_weights(params, 64)?;
            let sol = pmf_delta_star(params, &w)?;
            row.pressure = pressure_pmf(params)?;
            row.density = sol.delta_star;
            row.dpressure = match var {
                SweepVariable::Mu => density_pmf(params)?,
                SweepVariable::Alpha => sol.delta_star,
            };
            row.condensate = condensate_pmf(params)?;
            row.regime = match sol.regime {
                Regime::Saturated => {
                    if w.rho.is_finite()
                        && (params.mu - params.a * w.rho).abs() <= 1e-12 * params.mu.abs().max(1.0)
                    {
                        "saturation-kink".into()
                    } else {
                        "saturated".into()
                    }
                }
                _ => "normal".into(),
            };
        }
        Model::Hyl => {
            let (roots, imin) = hyl_state(params)?;
            let fmin = roots[imin].objective;
            let tied: Vec<&HylBranchSolution> =
                roots.iter().filter(|r| (r.objective - fmin).abs() <= 1e-9).collect();
            row.n_minimizers = tied.len() as u32;
            row.pressure = qbar_at(params, params.alpha)? / params.beta - fmin;
            row.density = hyl_slope_of(&roots[imin], params);
            row.dpressure = match var {
                SweepVariable::Mu => {
                    tied.iter().map(|r| hyl_slope_of(r, params)).sum::<f64>() / tied.len() as f64
                }
                SweepVariable::Alpha => {
                    tied.iter().map(|r| r.delta_star).sum::<f64>() / tied.len() as f64
                }
            };
            row.condensate = params.a / (params.a - params.b)
                * (params.mu / params.a - roots[imin].delta_star).max(0.0);
            row.regime = if tied.len() > 1 {
                "kink".into()
            } else if roots.len() > 1 {
                format!("multiple-roots-{}", roots.len())
            } else {
                "unique".into()
            };
        }
    }
    Ok(row)
}

/// Sweep a parameter over a grid, one row per point, computed in parallel
/// with deterministic row order. Per-row failures are recorded in the row's
/// regime label; the scan itself never aborts.
pub fn phase_scan(model: Model, params: &ModelParams, sweep: &SweepSpec) -> Vec<PhaseScanRow> {
    sweep
        .grid
        .par_iter()
        .map(|&v| scan_row(model, params, sweep.variable, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZETA_3_2: f64 = 2.612_375_348_685_488;
    const ZETA_5_2: f64 = 1.341_487_257_250_917;

    fn unit_params() -> ModelParams {
        ModelParams::new(3, 1.0 / (4.0 * std::f64::consts::PI), 0.0)
    }

    #[test]
    fn ideal_pressure_and_critical_density() {
        let p = unit_params();
        assert!((pressure_ideal(&p).unwrap() * p.beta - ZETA_5_2).abs() < 1e-12);
        assert!((rho_critical(&p) - ZETA_3_2).abs() < 1e-12);
        assert!(rho_critical(&ModelParams::new(2, 1.0, 0.0)).is_infinite());
        assert!(rho_critical(&ModelParams::new(1, 1.0, 0.0)).is_infinite());
    }

    #[test]
    fn ideal_free_energy_flat_above_critical() {
        let p = unit_params();
        let rc = rho_critical(&p);
        let f1 = free_energy_ideal(&p, rc * 1.2).unwrap();
        let f2 = free_energy_ideal(&p, rc * 3.0).unwrap();
        assert!((f1 - f2).abs() < 1e-14);
        assert!((f1 + pressure_ideal(&ModelParams { alpha: 0.0, ..p }).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ideal_free_energy_legendre_consistency() {
        let p = ModelParams::new(3, 0.8, -0.4);
        let rho = 0.7 * rho_critical(&p);
        let f = free_energy_ideal(&p, rho).unwrap();
        // direct 1-D supremum oracle over s in [-50, 0]
        let mut best = f64::NEG_INFINITY;
        for i in 0..=200_000 {
            let s = -50.0 + 50.0 * i as f64 / 200_000.0;
            let v = s * rho - pressure_ideal(&ModelParams { alpha: s, ..p }).unwrap();
            best = best.max(v);
        }
        assert!((f - best).abs() < 1e-7, "{f} vs oracle {best}");
    }

    #[test]
    fn cmf_limits_and_derivative() {
        let p = ModelParams::new(3, 0.6, -0.5).with_couplings(1.3, 0.0);
        // a -> 0 recovers the ideal gas
        let p0 = ModelParams { a: 1e-11, ..p };
        assert!(
            (pressure_cmf(&p0).unwrap() - pressure_ideal(&p).unwrap()).abs()
                < 1e-8 * pressure_ideal(&p).unwrap()
        );
        // analytic dp/dalpha vs central finite differences
        let h = 1e-6;
        let fd = (pressure_cmf(&ModelParams { alpha: p.alpha + h, ..p }).unwrap()
            - pressure_cmf(&ModelParams { alpha: p.alpha - h, ..p }).unwrap())
            / (2.0 * h);
        let an = density_cmf(&p).unwrap();
        assert!((fd - an).abs() < 1e-6 * an.abs());
    }

    #[test]
    fn cmf_critical_density_below_ideal() {
        let p = unit_params().with_couplings(2.0, 0.0);
        let rc = rho_critical_cmf(&p).unwrap();
        assert!(rc < rho_critical(&p));
        let p0 = unit_params().with_couplings(1e-12, 0.0);
        assert!((rho_critical_cmf(&p0).unwrap() - rho_critical(&p0)).abs() < 1e-8);
    }

    #[test]
    fn pmf_pressure_cases() {
        let p = unit_params().with_mu(5.0).with_couplings(1.0, 0.0);
        // saturated: p + mu^2/(2a)
        let expect = pressure_ideal(&p).unwrap() + 12.5;
        assert!((pressure_pmf(&p).unwrap() - expect).abs() < 1e-12);
        assert!((density_pmf(&p).unwrap() - 5.0).abs() < 1e-12);
        // f^PMF - f = (a/2) rho^2
        let rho = 1.1;
        let diff = free_energy_pmf(&p, rho).unwrap() - free_energy_ideal(&p, rho).unwrap();
        assert!((diff - 0.5 * rho * rho).abs() < 1e-12);
    }

    #[test]
    fn pmf_derivative_continuous_at_saturation() {
        let p = unit_params().with_couplings(1.0, 0.0);
        let mu_c = p.a * ZETA_3_2;
        let below = density_pmf(&ModelParams { mu: mu_c - 1e-9, ..p }).unwrap();
        let above = density_pmf(&ModelParams { mu: mu_c + 1e-9, ..p }).unwrap();
        assert!((below - above).abs() < 1e-4);
    }

    #[test]
    fn pmf_pressure_convex_in_mu() {
        let p = ModelParams::new(3, 1.0, -0.3).with_couplings(0.8, 0.0);
        let mut prev = None;
        let mut prev_slope = None;
        for i in 0..=60 {
            let mu = -1.0 + 3.0 * i as f64 / 60.0;
            let pp = pressure_pmf(&ModelParams { mu, ..p }).unwrap();
            if let (Some(q), Some(s)) = (prev, prev_slope) {
                let slope: f64 = (pp - q) / (3.0 / 60.0);
                assert!(slope >= s - 1e-8, "convexity violated at mu={mu}");
                prev_slope = Some(slope);
            } else if let Some(q) = prev {
                prev_slope = Some((pp - q) / (3.0 / 60.0));
            }
            prev = Some(pp);
        }
    }

    #[test]
    fn hyl_pressure_b_to_zero_matches_pmf() {
        let p = ModelParams::new(3, 1.0, -0.2).with_mu(0.1).with_couplings(1.0, 1e-8);
        let hyl = pressure_hyl(&p).unwrap();
        let pmf = pressure_pmf(&p).unwrap();
        assert!((hyl - pmf).abs() < 1e-7 * pmf.abs().max(1.0), "{hyl} vs {pmf}");
    }

    #[test]
    fn log_mgf_case_split() {
        let p = ModelParams::new(3, 1.0, -0.5);
        assert_eq!(log_mgf(&p, 0.0).unwrap(), 0.0);
        assert!(log_mgf(&p, 0.6).unwrap().is_infinite());
        assert!(log_mgf(&p, 0.5).unwrap().is_finite());
        assert!(log_mgf(&p, -1.0).unwrap() < 0.0);
    }

    #[test]
    fn density_rate_zero_at_rho() {
        let p = ModelParams::new(3, 1.0, -0.5);
        let rho = rho_at(&p, p.alpha);
        let j = density_rate_j(&p, rho).unwrap();
        assert!(j.abs() < 1e-10, "J at the LLN point: {j}");
        assert!(density_rate_j(&p, -0.1).unwrap().is_infinite());
        assert!(density_rate_j(&p, rho_critical(&p) + 0.1).unwrap().is_infinite());
        assert!(density_rate_j(&ModelParams::new(3, 1.0, 0.0), 0.1).is_err());
    }

    #[test]
    fn pmf_density_rate_zero_at_model_density() {
        // mu below a rho(alpha): in the unsaturated regime the tilted rate
        // vanishes exactly at the fixed-point density
        let p = ModelParams::new(3, 1.0, -0.5).with_mu(0.01).with_couplings(1.0, 0.0);
        let w = make_weights(&p, 64).unwrap();
        let sol = pmf_delta_star(&p, &w).unwrap();
        let j = density_rate_j_pmf(&p, sol.delta_star).unwrap();
        assert!(j.abs() < 1e-7, "J^PMF at delta*: {j}");
        // nonnegative on a scan
        for i in 0..40 {
            let x = rho_critical(&p) * i as f64 / 39.0;
            assert!(density_rate_j_pmf(&p, x).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn condensate_values() {
        let p = unit_params().with_mu(5.0).with_couplings(1.0, 0.0);
        assert!((condensate_pmf(&p).unwrap() - (5.0 - ZETA_3_2)).abs() < 1e-12);
        assert_eq!(condensate_pmf(&ModelParams { mu: 1.0, ..p }).unwrap(), 0.0);
        assert_eq!(condensate_ideal(&ModelParams::new(3, 1.0, -0.1)).unwrap(), 0.0);
        assert!(condensate_ideal(&ModelParams::new(2, 1.0, 0.0)).unwrap().is_infinite());
        assert_eq!(condensate_ideal(&ModelParams::new(3, 1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn condensate_pmf_alpha_up_limit() {
        let p = ModelParams::new(3, 1.0, -1e-9).with_mu(1.0).with_couplings(1.0, 0.0);
        let lim = (1.0 - rho_critical(&p)).max(0.0);
        assert!((condensate_pmf(&p).unwrap() - lim).abs() < 1e-4);
    }

    #[test]
    fn phase_scan_pmf_plateau() {
        let p = unit_params().with_couplings(1.0, 0.0);
        let grid: Vec<f64> = (0..=60).map(|i| -1.0 + 7.0 * i as f64 / 60.0).collect();
        let rows = phase_scan(
            Model::Pmf,
            &p,
            &SweepSpec { variable: SweepVariable::Mu, grid },
        );
        assert_eq!(rows.len(), 61);
        for pair in rows.windows(2) {
            assert!(pair[1].density >= pair[0].density - 1e-10);
        }
        let last = rows.last().unwrap();
        assert!((last.density - ZETA_3_2).abs() < 1e-9, "plateau at rho(alpha)");
        assert!(last.condensate > 0.0);
        assert_eq!(rows[0].condensate, 0.0);
    }

    #[test]
    fn phase_scan_empty_grid() {
        let p = unit_params();
        let rows = phase_scan(
            Model::Ideal,
            &p,
            &SweepSpec { variable: SweepVariable::Alpha, grid: vec![] },
        );
        assert!(rows.is_empty());
    }
}
