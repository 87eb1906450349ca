//! Rate-function zeros of the four models and the HYL critical parameters.
//!
//! The ideal and CMF zeros are closed forms; the PMF zero needs a scalar
//! fixed point delta = h(delta); the HYL zeros solve delta = g^chi(delta)
//! where each term of g involves a Lambert W branch choice, and up to three
//! solutions coexist between the tangential and peak chemical potentials.

use crate::error::{Error, Result};
use crate::model::{CycleWeightTable, ModelParams, OccupationVector};
use crate::special::{bose_g, lambert_w, Branch};

const EXP_NEG1: f64 = 0.367_879_441_171_442_33;

/// Where the fixed-point density sits relative to mu/a.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    BelowMuOverA,
    AboveMuOverA,
    /// PMF only: mu >= a rho(alpha), so delta* = rho(alpha) exactly.
    Saturated,
}

/// Solution of the PMF consistency equation delta = h(delta).
#[derive(Debug, Clone, Copy)]
pub struct FixedPointSolution {
    pub delta_star: f64,
    pub regime: Regime,
    pub residual: f64,
    pub iterations: u32,
}

/// Per-cycle Lambert branch choice in the HYL stationarity equations: either
/// all principal, or the lower branch at a single index k (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPattern {
    AllPrincipal,
    LowerAt(usize),
}

/// Labels for the up-to-three chi = 0 solutions: `Xi0` has density above
/// mu/a, `Xi1`/`Xi2` lie below with D(xi1) >= D(xi2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionLabel {
    Xi0,
    Xi1,
    Xi2,
}

/// One root of delta = g^chi(delta) with its reconstructed occupation vector
/// and variational objective F = I_alpha + H_lsc.
#[derive(Debug, Clone)]
pub struct HylBranchSolution {
    pub delta_star: f64,
    pub chi: BranchPattern,
    pub xi: OccupationVector,
    pub objective: f64,
    pub label: SolutionLabel,
    pub residual: f64,
}

/// The HYL critical chemical potentials and coupling bounds.
#[derive(Debug, Clone, Copy)]
pub struct CriticalParams {
    /// mu_p = a h~(0): intersection at the peak of g^0.
    pub mu_p: f64,
    /// mu_tang = a inf_{x<=0} { h~(x) - x }: tangential intersection.
    pub mu_tang: f64,
    /// Equal-pressure point in (mu_tang, mu_p); absent outside the
    /// non-uniqueness regime.
    pub mu_star: Option<f64>,
    /// Inverse temperature above which the Lambert arguments stay in range
    /// for every delta (NaN in d = 2 where the bound is beta-independent).
    pub beta_star: f64,
    /// Coupling bound b* = (4 pi beta)^{d/2} / (e beta), equivalent form.
    pub b_star: f64,
    /// One-sided slope of g^0 at delta -> mu/a exceeds 1 (automatic for
    /// d = 3, 4; a genuine condition for d >= 5).
    pub dge5_condition_holds: bool,
}

/// The ideal-gas rate function vanishes exactly at the cycle weights.
pub fn ideal_minimizer(w: &CycleWeightTable) -> OccupationVector {
    OccupationVector { x: w.q.clone() }
}

/// Gamma = W_0(a beta qbar) / (a beta), the total CMF cycle density solving
/// Gamma = e^{-a beta Gamma} qbar.
pub fn cmf_gamma(w: &CycleWeightTable, a: f64) -> f64 {
    if a == 0.0 {
        return w.qbar;
    }
    let arg = a * w.params.beta * w.qbar;
    lambert_w(Branch::Principal, arg).expect("a beta qbar > 0 is in the W_0 domain") / (a * w.params.beta)
}

/// CMF zero: the weights scaled by W_0(a beta qbar)/(a beta qbar).
pub fn cmf_minimizer(w: &CycleWeightTable, a: f64) -> OccupationVector {
    if a == 0.0 {
        return ideal_minimizer(w);
    }
    let scale = cmf_gamma(w, a) / w.qbar;
    OccupationVector { x: w.q.iter().map(|q| scale * q).collect() }
}

/// rho(alpha + shift) in closed form; +infinity when the shifted exponent
/// vanishes in d <= 2.
fn rho_shifted(params: &ModelParams, shift: f64) -> f64 {
    let t = -params.beta * (params.alpha + shift);
    if t <= 0.0 && params.d <= 2 {
        return f64::INFINITY;
    }
    params.prefactor() * bose_g(params.d as f64 / 2.0, t.max(0.0)).unwrap_or(f64::INFINITY)
}

/// Right-hand side of the PMF consistency equation:
/// h(delta) = rho(alpha + (mu - a delta)_-).
fn pmf_h(params: &ModelParams, delta: f64) -> f64 {
    rho_shifted(params, (params.mu - params.a * delta).min(0.0))
}

/// Solve delta = h(delta) for the PMF model.
///
/// h is non-increasing in delta, so delta - h(delta) is strictly increasing
/// and a doubling bracket plus bisection always converges. For
/// mu >= a rho(alpha) with rho finite the solution saturates at rho(alpha)
/// exactly.
pub fn pmf_delta_star(params: &ModelParams, w: &CycleWeightTable) -> Result<FixedPointSolution> {
    params.validate()?;
    if !(params.a > 0.0) {
        return Err(Error::Domain("PMF fixed point needs a > 0".into()));
    }
    let rho = w.rho;
    if rho.is_finite() && params.mu >= params.a * rho {
        return Ok(FixedPointSolution {
            delta_star: rho,
            regime: Regime::Saturated,
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut lo = 0.0;
    let mut hi = (params.mu / params.a).max(1.0);
    let mut iterations = 0u32;
    while hi - pmf_h(params, hi) <= 0.0 {
        hi *= 2.0;
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NoSolution("PMF bracket expansion failed".into()));
        }
    }
    while hi - lo > 1e-16 * hi.max(1.0) && iterations < 300 {
        let mid = 0.5 * (lo + hi);
        let phi = mid - pmf_h(params, mid);
        if phi < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let delta_star = 0.5 * (lo + hi);
    let h = pmf_h(params, delta_star);
    let residual = if h.is_finite() { (delta_star - h).abs() } else { f64::INFINITY };
    let regime = if delta_star > params.mu / params.a {
        Regime::AboveMuOverA
    } else {
        Regime::BelowMuOverA
    };
    Ok(FixedPointSolution { delta_star, regime, residual, iterations })
}

/// PMF zero: xi_k = q_k exp(beta k (mu - a delta*)_-).
pub fn pmf_minimizer(params: &ModelParams, w: &CycleWeightTable) -> Result<OccupationVector> {
    let sol = pmf_delta_star(params, w)?;
    Ok(pmf_minimizer_at(params, w, sol.delta_star))
}

/// PMF minimiser formula at a given delta (exposed for sweeps that already
/// hold the fixed point).
pub fn pmf_minimizer_at(
    params: &ModelParams,
    w: &CycleWeightTable,
    delta_star: f64,
) -> OccupationVector {
    let s = params.beta * (params.mu - params.a * delta_star).min(0.0);
    OccupationVector {
        x: w.q.iter().enumerate().map(|(i, q)| q * (s * (i + 1) as f64).exp()).collect(),
    }
}

/// The three series over the HYL stationary occupation numbers that every
/// downstream formula needs: g0 = sum k xi_k, s1 = sum xi_k, s2 = sum k^2 xi_k^2.
#[derive(Debug, Clone, Copy)]
pub struct HylSums {
    pub g0: f64,
    pub s1: f64,
    pub s2: f64,
    /// terms evaluated with an exact Lambert W before switching to the
    /// series tail
    pub k_exact: usize,
}

/// Evaluate the HYL stationary sums for exponent slope `s` (the per-k energy
/// is E_k = s k). Terms with a sizable Lambert argument are evaluated
/// exactly; the rest are summed in closed form through Bose functions using
/// W_0(y) = y - y^2 + 3/2 y^3 - 8/3 y^4 + O(y^5).
fn hyl_sums_slope(
    s: f64,
    chi: BranchPattern,
    params: &ModelParams,
    w: &CycleWeightTable,
) -> Result<HylSums> {
    let d = params.d as f64;
    let beta = params.beta;
    let b = params.b;
    let bb = b * beta;
    let pref = params.prefactor();
    let r = beta * params.alpha + s;
    let t = -r;
    if t <= 0.0 && params.d <= 2 {
        return Err(Error::Divergence(
            "HYL stationary series diverges for alpha = 0, d <= 2 at this delta".into(),
        ));
    }
    let c0 = bb * pref; // |arg W| at k is c0 k^{1-d/2} e^{rk}
    // tail orders: (exponent n, multiplicity m) for the three sums
    let g0_orders = [(d / 2.0, 1.0), (d - 1.0, 2.0), (1.5 * d - 2.0, 3.0), (2.0 * d - 3.0, 4.0)];
    let s1_orders =
        [(d / 2.0 + 1.0, 1.0), (d, 2.0), (1.5 * d - 1.0, 3.0), (2.0 * d - 2.0, 4.0)];
    let s2_orders = [(d, 2.0), (1.5 * d - 1.0, 3.0), (2.0 * d - 2.0, 4.0)];
    let g0_coef = [pref, bb * pref * pref, 1.5 * bb * bb * pref.powi(3), 8.0 / 3.0 * bb.powi(3) * pref.powi(4)];
    let s1_coef = g0_coef;
    let s2_coef = [pref * pref, 2.0 * bb * pref.powi(3), 4.0 * bb * bb * pref.powi(4)];

    let mut partial = [0.0f64; 11]; // partial sums k^{-n} e^{-m t k} for all 11 (n,m) slots
    let mut g0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let k_min_exact = match chi {
        BranchPattern::AllPrincipal => 16,
        BranchPattern::LowerAt(j) => j.max(16),
    };
    let mut k = 1usize;
    let mut prev_phi = f64::INFINITY;
    while k <= w.k_max {
        let kf = k as f64;
        let phi = c0 * kf.powf(1.0 - d / 2.0) * (r * kf).exp();
        if phi > EXP_NEG1 * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "Lambert argument below -1/e at k = {k}: no stationary point here"
            )));
        }
        let branch = match chi {
            BranchPattern::LowerAt(j) if j == k => Branch::Lower,
            _ => Branch::Principal,
        };
        let wk = lambert_w(branch, -phi)?;
        let xi = -wk / (bb * kf * kf);
        g0 += -wk / (bb * kf);
        s1 += xi;
        s2 += (kf * xi) * (kf * xi);
        for (i, &(n, m)) in g0_orders.iter().chain(s1_orders.iter()).chain(s2_orders.iter()).enumerate() {
            partial[i] += kf.powf(-n) * (m * r * kf).exp();
        }
        let done = k >= k_min_exact && phi < 1e-4 && phi <= prev_phi;
        prev_phi = phi;
        k += 1;
        if done {
            break;
        }
    }
    if k <= w.k_max {
        // closed-form tails beyond the exact range
        for (i, &(n, m)) in g0_orders.iter().enumerate() {
            g0 += g0_coef[i] * (bose_g(n, m * t)? - partial[i]);
        }
        for (i, &(n, m)) in s1_orders.iter().enumerate() {
            s1 += s1_coef[i] * (bose_g(n, m * t)? - partial[4 + i]);
        }
        for (i, &(n, m)) in s2_orders.iter().enumerate() {
            s2 += s2_coef[i] * (bose_g(n, m * t)? - partial[8 + i]);
        }
    }
    Ok(HylSums { g0, s1, s2, k_exact: k - 1 })
}

/// Exponent slope of E_k(delta) = s k, with the case switch at delta = mu/a.
fn hyl_slope(params: &ModelParams, delta: f64) -> f64 {
    let u = params.mu - params.a * delta;
    if u <= 0.0 {
        params.beta * u
    } else {
        -params.b / (params.a - params.b) * params.beta * u
    }
}

/// The consistency series g^chi(delta). A domain error signals a Lambert
/// argument below -1/e for some k: no stationary point exists at this delta.
pub fn hyl_g(
    delta: f64,
    chi: BranchPattern,
    params: &ModelParams,
    w: &CycleWeightTable,
) -> Result<f64> {
    params.validate_hyl()?;
    if !(params.b > 0.0) {
        return Err(Error::Domain("HYL series needs b > 0".into()));
    }
    Ok(hyl_sums_slope(hyl_slope(params, delta), chi, params, w)?.g0)
}

/// h~(x): the left-piece profile of g^0 as a function of x = delta - mu/a <= 0,
/// independent of mu. All terms use the principal branch.
pub fn htilde(x: f64, params: &ModelParams, w: &CycleWeightTable) -> Result<f64> {
    params.validate_hyl()?;
    if x > 0.0 {
        return Err(Error::Domain("htilde is defined for x <= 0".into()));
    }
    let s = params.a * params.b / (params.a - params.b) * params.beta * x;
    Ok(hyl_sums_slope(s, BranchPattern::AllPrincipal, params, w)?.g0)
}

/// Variational objective F = I_alpha + H_lsc evaluated exactly at a
/// stationary point, using log(xi_k/q_k) = b beta k^2 xi_k + E_k to collapse
/// the entropy sum onto the stationary series.
fn objective_at_root(delta: f64, sums: &HylSums, params: &ModelParams, w: &CycleWeightTable) -> f64 {
    let u = params.mu - params.a * delta;
    let c = if u <= 0.0 { 1.0 } else { -params.b / (params.a - params.b) };
    let beta = params.beta;
    params.b / 2.0 * sums.s2 - sums.s1 / beta + w.qbar / beta + c * u * delta
        - params.mu * delta
        + params.a / 2.0 * delta * delta
        - u.max(0.0).powi(2) / (2.0 * (params.a - params.b))
}

/// Reconstruct the full occupation vector at a root.
fn xi_at_root(delta: f64, params: &ModelParams, w: &CycleWeightTable) -> OccupationVector {
    let s = hyl_slope(params, delta);
    let bb = params.b * params.beta;
    let d2 = params.d as f64 / 2.0;
    let c0 = bb * params.prefactor();
    let r = params.beta * params.alpha + s;
    let mut x = Vec::with_capacity(w.k_max);
    for k in 1..=w.k_max {
        let kf = k as f64;
        let phi = c0 * kf.powf(1.0 - d2) * (r * kf).exp();
        let xi = if phi > 1e-8 {
            match lambert_w(Branch::Principal, -phi) {
                Ok(wk) => -wk / (bb * kf * kf),
                Err(_) => w.q[k - 1] * (s * kf).exp(),
            }
        } else {
            // W_0(-phi) = -phi - phi^2 + O(phi^3)
            (phi + phi * phi) / (bb * kf * kf)
        };
        x.push(xi);
    }
    OccupationVector { x }
}

/// Scan grid for the chi = 0 roots. Besides a uniform and a geometric
/// component it clusters points geometrically around the kink at mu/a, where
/// near-tangent root pairs can sit within 1e-6 of each other.
fn root_scan_grid(params: &ModelParams, w: &CycleWeightTable) -> Vec<f64> {
    let base = if w.rho.is_finite() { w.rho } else { 25.0 };
    let dmax = 4.0 * base.max(params.mu / params.a).max(0.25);
    let mua = params.mu / params.a;
    let mut grid = Vec::with_capacity(2100);
    for i in 0..=1000 {
        grid.push(dmax * i as f64 / 1000.0);
    }
    for i in 0..300 {
        grid.push(dmax * 10f64.powf(-12.0 + 12.0 * i as f64 / 299.0));
    }
    if mua > 0.0 && mua < dmax {
        grid.push(mua);
        for i in 0..300 {
            let off = dmax * 10f64.powf(-14.0 + 14.0 * i as f64 / 299.0);
            if mua + off < dmax {
                grid.push(mua + off);
            }
            if mua - off > 0.0 {
                grid.push(mua - off);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
    grid
}

/// Find every root of delta = g^0(delta) by dense scan plus bisection, label
/// the roots, and attach exact objectives.
///
/// Returns an empty list when the Lambert domain condition fails everywhere.
pub fn hyl_solve_branch0(
    params: &ModelParams,
    w: &CycleWeightTable,
) -> Result<Vec<HylBranchSolution>> {
    params.validate_hyl()?;
    if !(params.b > 0.0) {
        return Err(Error::Domain("HYL root solve needs b > 0".into()));
    }
    let grid = root_scan_grid(params, w);
    let g = |delta: f64| -> Option<f64> {
        hyl_sums_slope(hyl_slope(params, delta), BranchPattern::AllPrincipal, params, w)
            .ok()
            .map(|s| s.g0)
    };
    let mut roots: Vec<f64> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &delta in &grid {
        let phi = g(delta).map(|v| v - delta);
        if let (Some((d0, p0)), Some(p1)) = (prev, phi) {
            if p0 == 0.0 {
                roots.push(d0);
            } else if p0.signum() != p1.signum() {
                // bisection refinement to 1e-12
                let (mut lo, mut hi, mut plo) = (d0, delta, p0);
                for _ in 0..100 {
                    if hi - lo <= 1e-12 * hi.max(1.0) {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    match g(mid).map(|v| v - mid) {
                        Some(pm) if pm.signum() == plo.signum() => {
                            lo = mid;
                            plo = pm;
                        }
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        prev = phi.map(|p| (delta, p));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * a.max(1.0));

    let mua = params.mu / params.a;
    let mut out = Vec::new();
    for &delta in &roots {
        let sums = hyl_sums_slope(hyl_slope(params, delta), BranchPattern::AllPrincipal, params, w)?;
        out.push(HylBranchSolution {
            delta_star: delta,
            chi: BranchPattern::AllPrincipal,
            xi: xi_at_root(delta, params, w),
            objective: objective_at_root(delta, &sums, params, w),
            label: SolutionLabel::Xi0, // provisional, fixed below
            residual: (sums.g0 - delta).abs(),
        })
    }
    // label per the density ordering: right of mu/a is xi0, the two left
    // roots are xi1 (larger density) and xi2 (smaller)
    let mut lefts: Vec<usize> = (0..out.len()).filter(|&i| out[i].delta_star <= mua).collect();
    lefts.sort_by(|&i, &j| out[i].delta_star.partial_cmp(&out[j].delta_star).unwrap());
    match lefts.len() {
        0 => {}
        1 => out[lefts[0]].label = SolutionLabel::Xi2,
        _ => {
            let hi = *lefts.last().unwrap();
            out[hi].label = SolutionLabel::Xi1;
            for &i in &lefts[..lefts.len() - 1] {
                out[i].label = SolutionLabel::Xi2;
            }
        }
    }
    Ok(out)
}

/// Upper bound on b below which chi != 0 candidates are excluded, so the
/// minimiser search over chi = 0 roots is exhaustive.
pub(crate) fn chi_exclusion_bound(params: &ModelParams, w: &CycleWeightTable) -> Result<f64> {
    // if the branch-0 profile cannot even be evaluated at x = 0 the coupling
    // is outside the solvable regime, not merely a bad argument
    let mu_p = params.a
        * htilde(0.0, params, w).map_err(|e| {
            Error::Regime(format!("branch-0 profile undefined at these couplings: {e}"))
        })?;
    Ok(params
        .a
        .min((params.beta * w.q[0]).recip() * (-params.beta * mu_p / params.a).exp()))
}

/// Global minimiser of the HYL objective among the chi = 0 roots.
///
/// # Errors
/// Regime error when b is not below min{a, (beta q_1)^{-1} e^{-beta mu_p/a}}:
/// outside that range the exclusion of lower-branch candidates is not
/// guaranteed and the solver refuses rather than guesses.
pub fn hyl_minimizer(params: &ModelParams, w: &CycleWeightTable) -> Result<HylBranchSolution> {
    let bound = chi_exclusion_bound(params, w)?;
    if params.b >= bound {
        return Err(Error::Regime(format!(
            "b = {} is not below the lower-branch exclusion bound {bound:.6e}",
            params.b
        )));
    }
    let roots = hyl_solve_branch0(params, w)?;
    roots
        .into_iter()
        .min_by(|x, y| x.objective.partial_cmp(&y.objective).unwrap())
        .ok_or_else(|| Error::NoSolution("no chi = 0 stationary point exists".into()))
}

/// Golden-section minimisation of a unimodal scalar function on [lo, hi].
fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_8;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
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

/// Compute mu_p, mu_tang, mu*, beta*, b*, and the d >= 5 slope condition.
///
/// mu* is located by bisection on the sign of P^2 - P^0, where
/// P^j = -F(xi^j) are the candidate pressures of the left- and right-root
/// families; the sign is monotone near the crossing.
pub fn critical_params(params: &ModelParams, w: &CycleWeightTable) -> Result<CriticalParams> {
    params.validate_hyl()?;
    if !(params.b > 0.0) {
        return Err(Error::Domain("critical parameters need b > 0".into()));
    }
    let a = params.a;
    let h0 = htilde(0.0, params, w)?;
    let mu_p = a * h0;

    // one-sided slope of g^0 at delta -> mu/a, via h~
    let fd_h = 1e-7;
    let slope = (h0 - htilde(-fd_h, params, w)?) / fd_h;
    let dge5_condition_holds = slope > 1.0;

    // mu_tang: log-spaced grid then golden-section refinement
    let kappa = a * params.b / (a - params.b) * params.beta;
    let xmax = 50.0 * (1.0 + 1.0 / kappa);
    let mut xs: Vec<f64> = (0..400)
        .map(|i| -10f64.powf(-10.0 + (xmax.log10() + 10.0) * i as f64 / 399.0))
        .collect();
    xs.push(0.0);
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let fval = |x: f64| htilde(x, params, w).map(|h| h - x).unwrap_or(f64::INFINITY);
    let fs: Vec<f64> = xs.iter().map(|&x| fval(x)).collect();
    let imin = fs
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.partial_cmp(q.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let lo = xs[imin.saturating_sub(1)];
    let hi = xs[(imin + 1).min(xs.len() - 1)];
    let (_, fmin) = golden_min(fval, lo, hi, 1e-13 * (1.0 + lo.abs()));
    let mu_tang = a * fmin.min(h0);

    let d = params.d;
    let e = std::f64::consts::E;
    let beta_star = if d == 2 {
        f64::NAN
    } else {
        ((e * params.b).powi(2) / (4.0 * std::f64::consts::PI).powi(d as i32))
            .powf(1.0 / (d as f64 - 2.0))
    };
    let b_star = (4.0 * std::f64::consts::PI * params.beta).powf(d as f64 / 2.0) / (e * params.beta);

    let mut mu_star = None;
    let in_regime = d >= 3
        && (d < 5 || dge5_condition_holds)
        && params.b < chi_exclusion_bound(params, w)?
        && mu_tang < mu_p - 1e-14 * mu_p.abs().max(1.0);
    if in_regime {
        // G(mu) = P^2 - P^0 = F(xi0) - F(xi2); negative near mu_tang where
        // the right root wins, positive near mu_p
        let gap = |mu: f64| -> Option<f64> {
            let p = ModelParams { mu, ..*params };
            let roots = hyl_solve_branch0(&p, w).ok()?;
            let xi0 = roots
                .iter()
                .filter(|r| r.delta_star > mu / a)
                .min_by(|x, y| x.objective.partial_cmp(&y.objective).unwrap())?;
            let xi2 = roots
                .iter()
                .filter(|r| r.delta_star <= mu / a)
                .min_by(|x, y| x.objective.partial_cmp(&y.objective).unwrap())?;
            Some(xi0.objective - xi2.objective)
        };
        // The sign change can hug mu_tang (the P^2 branch flattens out right
        // after the tangency), so scan a geometric ladder of window fractions
        // for the bracket before bisecting.
        let window = mu_p - mu_tang;
        let mut bracket = None;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=80 {
            let frac = 10f64.powf(-8.0 + 7.9 * i as f64 / 80.0);
            let mu = mu_tang + frac * window;
            if let Some(g) = gap(mu) {
                if let Some((pmu, pg)) = prev {
                    if pg < 0.0 && g >= 0.0 {
                        bracket = Some((pmu, mu));
                        break;
                    }
                }
                prev = Some((mu, g));
            }
        }
        if let Some((mut lo, mut hi)) = bracket {
            for _ in 0..80 {
                if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                match gap(mid) {
                    Some(gm) if gm < 0.0 => lo = mid,
                    Some(_) => hi = mid,
                    None => break,
                }
            }
            mu_star = Some(0.5 * (lo + hi));
        }
    }

    Ok(CriticalParams { mu_p, mu_tang, mu_star, beta_star, b_star, dge5_condition_holds })
}
