//! Elementary spherical functions phi_lambda, their lambda-derivatives, the
//! c-function and the Harish-Chandra series.
//!
//! Two independent evaluation paths are kept deliberately separate:
//!
//! * an ODE path integrating u'' + (m_gamma coth t + 2 m_2gamma coth 2t) u'
//!   + (lambda^2 + rho^2) u = 0 outward from a Frobenius series launch, and
//! * the Harish-Chandra expansion e^{-rho t} sum of c(+-lambda) e^{+-i lambda t}
//!   Gamma_k(+-lambda) e^{-2kt}, valid beyond the switch radius.
//!
//! Cross-agreement of the two is the module's main internal oracle; the
//! defining eigen-equation residual is checked downstream against the spatial
//! Laplacian.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::{RadialGrid, RadialFunction, SpaceParams};

/// Taylor coefficients c_j of coth x = 1/x + sum c_j x^{2j+1}.
const COTH_SERIES: [f64; 8] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
    -3617.0 / 325641566250.0,
];

const FROBENIUS_TERMS: usize = 64;

/// Even power series u = t^m sum_k a_{2k} t^{2k} solving the radial equation
/// near the regular singular point t = 0. Converges on |t| < pi/2 (pi/4 when
/// m_2gamma > 0); used here only up to the launch radius.
struct FrobeniusLaunch {
    angular_m: u32,
    coeffs: Vec<Complex64>,
}

impl FrobeniusLaunch {
    fn new(params: SpaceParams, mu_sq: Complex64, angular_m: u32) -> Self {
        let m = angular_m as f64;
        let mg = params.m_gamma() as f64;
        let m2 = params.m_2gamma() as f64;
        let d = params.dim() as f64;

        // b(t) = (d-1)/t + sum_j b_j t^{2j+1},  b_j = c_j (m_gamma + 4^{j+1} m_2gamma)
        // 1/sinh^2 t = 1/t^2 + sum_j s_j t^{2j},  s_j = -(2j+1) c_j
        let mut b = [0.0; 8];
        let mut s = [0.0; 8];
        for (j, &c) in COTH_SERIES.iter().enumerate() {
            b[j] = c * (mg + m2 * 2.0_f64.powi(2 * j as i32 + 2));
            s[j] = -(2.0 * j as f64 + 1.0) * c;
        }

        let mut a = vec![Complex64::default(); FROBENIUS_TERMS];
        a[0] = Complex64::new(1.0, 0.0);
        for big_k in 0..FROBENIUS_TERMS - 1 {
            let kk = big_k as f64;
            let mut rhs = mu_sq * a[big_k];
            for j in 0..=big_k.min(7) {
                let k_low = big_k - j;
                rhs += (b[j] * (m + 2.0 * k_low as f64) - m * m * s[j]) * a[k_low];
            }
            // indicial denominator: (m+2K)(m+2K+d-2) - m^2 at K = big_k + 1
            let two_k = 2.0 * kk + 2.0;
            let denom = two_k * (two_k + 2.0 * m) + (d - 2.0) * (two_k + m);
            a[big_k + 1] = -rhs / denom;
        }
        Self {
            angular_m,
            coeffs: a,
        }
    }

    /// Value and derivative at t.
    fn eval(&self, t: f64) -> (Complex64, Complex64) {
        let m = self.angular_m as f64;
        let t2 = t * t;
        let mut u = Complex64::default();
        let mut series_d = Complex64::default(); // d/dt of sum a_{2k} t^{2k}
        let mut p = Complex64::new(1.0, 0.0);
        for (k, &a) in self.coeffs.iter().enumerate() {
            u += a * p;
            if k > 0 {
                series_d += a * (2.0 * k as f64) * p / t;
            }
            p *= t2;
        }
        let tm = t.powi(self.angular_m as i32);
        let du = if self.angular_m == 0 {
            series_d
        } else {
            tm * (series_d + m / t * u)
        };
        (tm * u, du)
    }
}

fn denominator_ok(d: f64) -> bool {
    d != 0.0
}

/// Discretization of the outward march. Frozen and shared across the solves
/// of a finite-difference stencil so the integrator error varies smoothly
/// with lambda instead of jumping with the step count.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OdeDiscretization {
    h_osc: f64,
    t_launch: f64,
}

impl OdeDiscretization {
    /// Coarsens the oscillation-limited step by `factor` (error grows like
    /// factor^4); the transform plan trades unneeded accuracy for speed.
    pub(crate) fn relaxed(mut self, factor: f64) -> Self {
        self.h_osc *= factor;
        self
    }
}

pub(crate) fn discretization_for(params: SpaceParams, lambda: Complex64) -> OdeDiscretization {
    let mu = params.multiplier_c(lambda).norm().sqrt().max(1.0);
    // Launch radius: inside the series' comfortable zone and early enough
    // that the oscillation scale mu t stays small (limits cancellation).
    let cap: f64 = if params.m_2gamma() > 0 { 0.3 } else { 0.4 };
    OdeDiscretization {
        h_osc: 4.0e-3 / mu.powf(1.25),
        t_launch: cap.min(4.0 / mu),
    }
}

/// Integrates the radial equation for frequency `lambda` (and optional
/// angular mode) outward, returning u at each of the ascending `targets`.
/// Targets below the series launch radius are evaluated from the series.
pub(crate) fn solve_radial(
    params: SpaceParams,
    lambda: Complex64,
    angular_m: u32,
    targets: &[f64],
) -> Result<Vec<Complex64>> {
    solve_radial_disc(
        params,
        lambda,
        angular_m,
        targets,
        discretization_for(params, lambda),
    )
}

pub(crate) fn solve_radial_disc(
    params: SpaceParams,
    lambda: Complex64,
    angular_m: u32,
    targets: &[f64],
    disc: OdeDiscretization,
) -> Result<Vec<Complex64>> {
    debug_assert!(targets.windows(2).all(|w| w[0] < w[1]));
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    if targets[0] <= 0.0 {
        return Err(Error::OdeFailure {
            t: targets[0],
            reason: "targets must be strictly positive",
        });
    }
    let mu_sq = params.multiplier_c(lambda);
    let t_launch = disc.t_launch;
    let series = FrobeniusLaunch::new(params, mu_sq, angular_m);

    // Oscillation-limited step; the t/10 guard keeps the first post-launch
    // steps clear of the coefficient's 1/t variation.
    let h_osc = disc.h_osc;

    let mut out = Vec::with_capacity(targets.len());
    let mut idx = 0;
    while idx < targets.len() && targets[idx] <= t_launch {
        out.push(series.eval(targets[idx]).0);
        idx += 1;
    }
    if idx == targets.len() {
        return Ok(out);
    }

    let (mut u, mut du) = series.eval(t_launch);
    let mut t = t_launch;
    let m_sq = (angular_m as f64) * (angular_m as f64);
    let rhs = |t: f64, u: Complex64, v: Complex64| -> (Complex64, Complex64) {
        let b = params.radial_coefficient(t);
        let q = if angular_m == 0 {
            mu_sq
        } else {
            let sh = t.sinh();
            mu_sq - m_sq / (sh * sh)
        };
        (v, -b * v - q * u)
    };

    for &target in &targets[idx..] {
        while t < target {
            let h_allow = h_osc.min(t / 10.0);
            let h = if target - t <= h_allow * 1.0000001 {
                target - t
            } else {
                h_allow
            };
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::OdeFailure {
                    t,
                    reason: "step size collapsed",
                });
            }
            let (k1u, k1v) = rhs(t, u, du);
            let (k2u, k2v) = rhs(t + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1v);
            let (k3u, k3v) = rhs(t + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2v);
            let (k4u, k4v) = rhs(t + h, u + h * k3u, du + h * k3v);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            t += h;
        }
        t = target;
        if !u.re.is_finite() || !u.im.is_finite() {
            return Err(Error::OdeFailure {
                t,
                reason: "solution lost finiteness",
            });
        }
        out.push(u);
    }
    Ok(out)
}

fn check_grid_resolves(grid: &RadialGrid, lambda: Complex64) -> Result<()> {
    let freq = lambda.re.abs().max(1.0);
    let max_step = grid
        .nodes()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    let limit = 2.0 * std::f64::consts::PI / (8.0 * freq);
    if max_step > limit {
        return Err(Error::ResolutionCheck(format!(
            "grid spacing {max_step:.3e} exceeds {limit:.3e} needed for lambda = {lambda}"
        )));
    }
    Ok(())
}

/// Spherical function phi_lambda on the grid via the ODE path; phi(0) = 1.
pub fn phi_ode(params: SpaceParams, lambda: Complex64, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
    check_grid_resolves(grid, lambda)?;
    let values = solve_radial(params, lambda, 0, grid.nodes())?;
    RadialFunction::new(Arc::clone(grid), values, Complex64::new(1.0, 0.0))
}

/// Recursively defined coefficients of the Harish-Chandra expansion,
/// Gamma_0 = 1 and
/// (k+1)(k+1-i lambda) Gamma_{k+1}
///   = (rho+k)(rho+k-i lambda) Gamma_k
///   + m_2gamma sum_{j=0}^{k} (-1)^{k+j+1} (rho+2j-i lambda) Gamma_j.
#[derive(Debug, Clone)]
pub struct GammaCoeffs {
    lambda: Complex64,
    coeffs: Vec<Complex64>,
}

impl GammaCoeffs {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Gamma_0 ..= Gamma_K.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn truncation_k(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Polynomial growth guard exponent for |Gamma_k|; empirical for the
/// supported spaces, asserted on construction.
const GAMMA_GROWTH_EXPONENT: f64 = 8.0;

pub fn gamma_coeffs(params: SpaceParams, lambda: Complex64, k_max: usize) -> Result<GammaCoeffs> {
    if k_max < 1 {
        return Err(Error::Unsupported("gamma recursion needs K >= 1".into()));
    }
    let rho = params.rho();
    let m2 = params.m_2gamma() as f64;
    let i = Complex64::i();
    let growth_cap = lambda.norm().recip().max(1.0);

    let mut coeffs = Vec::with_capacity(k_max + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    for k in 0..k_max {
        let kf = k as f64;
        let denom = (kf + 1.0) * (kf + 1.0 - i * lambda);
        if !denominator_ok(denom.norm()) || denom.norm() < 1e-12 * (kf + 1.0) {
            return Err(Error::DegenerateDenominator {
                k,
                lambda: format!("{lambda}"),
            });
        }
        let mut next = (rho + kf) * (rho + kf - i * lambda) * coeffs[k];
        if m2 != 0.0 {
            let mut sum = Complex64::default();
            for (j, gj) in coeffs.iter().enumerate() {
                let sign = if (k + j + 1) % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * (rho + 2.0 * j as f64 - i * lambda) * gj;
            }
            next += m2 * sum;
        }
        next /= denom;
        let mag = next.norm();
        if mag > 1e300 {
            return Err(Error::CoefficientOverflow {
                k: k + 1,
                magnitude: mag,
            });
        }
        if mag > (kf + 2.0).powf(GAMMA_GROWTH_EXPONENT) * growth_cap {
            return Err(Error::CoefficientGrowth {
                k: k + 1,
                magnitude: mag,
            });
        }
        coeffs.push(next);
    }
    Ok(GammaCoeffs { lambda, coeffs })
}

/// The two-sided Harish-Chandra expansion data for one frequency:
/// c(+-lambda) and Gamma_k(+-lambda), valid for t >= t_switch.
#[derive(Debug, Clone)]
pub struct HcExpansion {
    lambda: Complex64,
    c_plus: Complex64,
    c_minus: Complex64,
    gammas_plus: GammaCoeffs,
    gammas_minus: GammaCoeffs,
    t_switch: f64,
    rho: f64,
}

pub const DEFAULT_T_SWITCH: f64 = 1.0;
const SERIES_K_MAX: usize = 200;

impl HcExpansion {
    /// Builds the expansion and cross-validates it against the ODE path at
    /// the switch radius (1e-8 relative).
    pub fn new(params: SpaceParams, lambda: Complex64) -> Result<Self> {
        let gammas_plus = gamma_coeffs(params, lambda, SERIES_K_MAX)?;
        let gammas_minus = gamma_coeffs(params, -lambda, SERIES_K_MAX)?;
        let (c_plus, c_minus) = extract_c_function(params, lambda)?;
        let exp = Self {
            lambda,
            c_plus,
            c_minus,
            gammas_plus,
            gammas_minus,
            t_switch: DEFAULT_T_SWITCH,
            rho: params.rho(),
        };
        let ode = solve_radial(params, lambda, 0, &[exp.t_switch])?[0];
        let series = exp.eval(exp.t_switch)?;
        let rel = (series - ode).norm() / ode.norm().max(1e-300);
        if rel > 1e-8 {
            return Err(Error::CalibrationFailure {
                m: 0,
                mismatch: rel,
            });
        }
        Ok(exp)
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn c_plus(&self) -> Complex64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> Complex64 {
        self.c_minus
    }

    pub fn t_switch(&self) -> f64 {
        self.t_switch
    }

    pub fn gammas(&self) -> (&GammaCoeffs, &GammaCoeffs) {
        (&self.gammas_plus, &self.gammas_minus)
    }

    fn eval(&self, t: f64) -> Result<Complex64> {
        phi_series_value(self, t)
    }

    /// Series tail sum E(lambda, t) alone (the k >= 1 part), for bound checks.
    pub fn remainder(&self, t: f64) -> Result<Complex64> {
        let s_plus = truncated_sum(&self.gammas_plus, t, 1)?;
        let s_minus = truncated_sum(&self.gammas_minus, t, 1)?;
        let i = Complex64::i();
        Ok((i * self.lambda * t).exp() * self.c_plus * s_plus
            + (-i * self.lambda * t).exp() * self.c_minus * s_minus)
    }
}

fn truncated_sum(gammas: &GammaCoeffs, t: f64, k_start: usize) -> Result<Complex64> {
    let decay = (-2.0 * t).exp();
    let mut factor = decay.powi(k_start as i32);
    let mut acc = Complex64::default();
    for (k, &g) in gammas.coeffs().iter().enumerate().skip(k_start) {
        let term = g * factor;
        acc += term;
        if k >= k_start + 2 && term.norm() < 1e-12 * acc.norm().max(1e-300) {
            return Ok(acc);
        }
        factor *= decay;
    }
    Err(Error::TruncationNotConverged {
        k_max: gammas.truncation_k(),
        t,
    })
}

/// Harish-Chandra series value
/// e^{-rho t} [ c(l) e^{i l t} sum Gamma_k(l) e^{-2kt}
///            + c(-l) e^{-i l t} sum Gamma_k(-l) e^{-2kt} ].
pub fn phi_series(expansion: &HcExpansion, t: f64) -> Result<Complex64> {
    if t < expansion.t_switch {
        return Err(Error::BelowSwitchRadius {
            t,
            t_switch: expansion.t_switch,
        });
    }
    phi_series_value(expansion, t)
}

fn phi_series_value(exp: &HcExpansion, t: f64) -> Result<Complex64> {
    let s_plus = truncated_sum(&exp.gammas_plus, t, 0)?;
    let s_minus = truncated_sum(&exp.gammas_minus, t, 0)?;
    let i = Complex64::i();
    Ok((-exp.rho * t).exp()
        * ((i * exp.lambda * t).exp() * exp.c_plus * s_plus
            + (-i * exp.lambda * t).exp() * exp.c_minus * s_minus))
}

/// Fits c(lambda), c(-lambda) from ODE samples at two large radii against the
/// two-term asymptotic e^{-rho t}(c_+ e^{i l t} + c_- e^{-i l t}).
pub fn extract_c_function(params: SpaceParams, lambda: Complex64) -> Result<(Complex64, Complex64)> {
    if lambda.norm() < 1e-9 {
        return Err(Error::UnsupportedLambda(format!("{lambda}")));
    }
    if lambda.im.abs() >= params.rho() {
        return Err(Error::UnsupportedLambda(format!(
            "{lambda}: |Im lambda| must stay below rho = {}",
            params.rho()
        )));
    }
    // Irregular spacings so no single frequency is resonant with every
    // candidate pair.
    let targets = [15.0, 16.1, 17.3, 18.2, 19.4, 20.0];
    let samples = solve_radial(params, lambda, 0, &targets)?;
    fit_c_from_samples(params.rho(), lambda, &targets, &samples)
}

/// Shared 2x2 asymptotic fit. `t1` is the first sample; the second is chosen
/// among the remaining radii to keep |sin(lambda (t2 - t1))| away from zero,
/// retrying across candidates when the default pair is near-degenerate.
pub(crate) fn fit_c_from_samples(
    rho: f64,
    lambda: Complex64,
    ts: &[f64],
    samples: &[Complex64],
) -> Result<(Complex64, Complex64)> {
    let t1 = ts[0];
    let mut best: Option<(usize, f64)> = None;
    // Prefer the widest spacing (smallest series contamination), fall back
    // toward better conditioning.
    for j in (1..ts.len()).rev() {
        let sine = (lambda * (ts[j] - t1)).sin().norm();
        if sine >= 0.1 {
            best = Some((j, sine));
            break;
        }
        if best.map_or(true, |(_, s)| sine > s) {
            best = Some((j, sine));
        }
    }
    let (j2, sine) = best.unwrap();
    if sine < 0.05 {
        return Err(Error::IllConditionedFit {
            lambda: format!("{lambda}"),
            sine,
        });
    }
    let t2 = ts[j2];
    let i = Complex64::i();
    let (e1p, e1m) = ((i * lambda * t1).exp(), (-i * lambda * t1).exp());
    let (e2p, e2m) = ((i * lambda * t2).exp(), (-i * lambda * t2).exp());
    let r1 = samples[0] * (rho * t1).exp();
    let r2 = samples[j2] * (rho * t2).exp();
    let det = e1p * e2m - e1m * e2p;
    let c_plus = (r1 * e2m - r2 * e1m) / det;
    let c_minus = (e1p * r2 - e2p * r1) / det;
    Ok((c_plus, c_minus))
}

/// A lambda-derivative of phi_lambda with the observed growth constant
/// sup_t |d^n phi|/((1+t)^n phi_0(t)).
#[derive(Debug, Clone)]
pub struct LambdaDerivative {
    pub f: RadialFunction,
    pub growth_constant: f64,
}

/// d^order/d lambda^order of phi_lambda at lambda0 > 0 by central differences
/// (step 1e-4) with one Richardson refinement.
pub fn phi_lambda_derivative(
    params: SpaceParams,
    lambda0: f64,
    order: u32,
    grid: &Arc<RadialGrid>,
) -> Result<LambdaDerivative> {
    if lambda0 <= 0.0 {
        return Err(Error::Unsupported(format!(
            "lambda derivative needs lambda0 > 0, got {lambda0}"
        )));
    }
    if order == 0 || order > 2 {
        return Err(Error::Unsupported(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    let h = 1e-4;
    // One frozen discretization for every stencil solve: the integrator
    // error then cancels in the differences instead of being divided by h.
    let disc = discretization_for(params, Complex64::new(lambda0, 0.0));
    let stencil = |h: f64| -> Result<Vec<Complex64>> {
        let lp = Complex64::new(lambda0 + h, 0.0);
        let lm = Complex64::new(lambda0 - h, 0.0);
        let up = solve_radial_disc(params, lp, 0, grid.nodes(), disc)?;
        let um = solve_radial_disc(params, lm, 0, grid.nodes(), disc)?;
        match order {
            1 => Ok(up
                .iter()
                .zip(&um)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect()),
            _ => {
                let u0 =
                    solve_radial_disc(params, Complex64::new(lambda0, 0.0), 0, grid.nodes(), disc)?;
                Ok(up
                    .iter()
                    .zip(&um)
                    .zip(&u0)
                    .map(|((a, b), c)| (a + b - 2.0 * c) / (h * h))
                    .collect())
            }
        }
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    let values: Vec<Complex64> = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect();
    // phi_lambda(0) = 1 for every lambda, so all lambda-derivatives vanish
    // at the origin.
    let f = RadialFunction::new(Arc::clone(grid), values, Complex64::default())?;

    let phi0 = solve_radial(params, Complex64::default(), 0, grid.nodes())?;
    let growth_constant = f
        .values()
        .iter()
        .zip(grid.nodes())
        .zip(&phi0)
        .map(|((v, &t), p0)| v.norm() / ((1.0 + t).powi(order as i32) * p0.norm()))
        .fold(0.0, f64::max);
    Ok(LambdaDerivative { f, growth_constant })
}
