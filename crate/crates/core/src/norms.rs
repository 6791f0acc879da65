//! Lorentz quasi-norms on weighted 1-D measure spaces, membership
//! diagnostics from truncation sweeps, the weighted ||.||_M norm and the
//! M_p functional.
//!
//! The distribution function is applied to |f| (required for complex data),
//! d_f(alpha) = measure{ |f| > alpha }. For q = infinity the quasi-norm
//! sup_alpha alpha d_f(alpha)^{1/p} is evaluated over a geometric alpha
//! sweep augmented by the exact jump candidates of the discrete measure, so
//! refining the sweep never moves the value. For finite q the rearrangement
//! integral is evaluated exactly on the step function f*.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{least_squares, panel_quadrature_weights};
use crate::poisson::PolarFunction;
use crate::space::{RadialFunction, RadialGrid};

/// Discrete weighted measure on a half-line: nodes with positive weights.
#[derive(Debug, Clone)]
pub struct WeightedHalfLine {
    t: Vec<f64>,
    w: Vec<f64>,
    total_mass: f64,
}

impl WeightedHalfLine {
    pub fn new(t: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if t.len() != w.len() {
            return Err(Error::LengthMismatch {
                expected: t.len(),
                got: w.len(),
            });
        }
        if !t.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::InvalidGrid("nodes must be increasing".into()));
        }
        for (i, &wi) in w.iter().enumerate() {
            if !(wi > 0.0) || !wi.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        let total_mass = w.iter().sum();
        Ok(Self { t, w, total_mass })
    }

    /// The radial measure of a grid: quadrature weight times density,
    /// optionally truncated at t <= t_cut.
    pub fn from_radial_grid(grid: &RadialGrid, t_cut: Option<f64>) -> Self {
        let n = match t_cut {
            Some(cut) => grid.nodes().partition_point(|&t| t <= cut),
            None => grid.len(),
        };
        let t = grid.nodes()[..n].to_vec();
        let w = (0..n).map(|i| grid.node_measure(i)).collect::<Vec<_>>();
        let total_mass = w.iter().sum();
        Self { t, w, total_mass }
    }

    /// Uniform nodes on [t_min, t_max] carrying the weight e^{2 rho t} dt.
    pub fn exponential_window(rho: f64, t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if n < 8 || !(t_max > t_min) {
            return Err(Error::InvalidGrid("bad exponential window".into()));
        }
        let h = (t_max - t_min) / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| t_min + i as f64 * h).collect();
        let base = panel_quadrature_weights(&t);
        let w: Vec<f64> = t
            .iter()
            .zip(&base)
            .map(|(&ti, &wi)| wi * (2.0 * rho * ti).exp())
            .collect();
        Self::new(t, w)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

/// Distribution function d_f(alpha) = measure{ |f| > alpha }.
pub fn distribution_function(values: &[Complex64], space: &WeightedHalfLine, alpha: f64) -> f64 {
    debug_assert_eq!(values.len(), space.len());
    values
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| v.norm() > alpha)
        .map(|(_, &w)| w)
        .sum()
}

/// Second Lorentz exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LorentzQ {
    Finite(f64),
    Infinity,
}

/// A quasi-norm value with the diagnostics that produced it.
#[derive(Debug, Clone)]
pub struct LorentzResult {
    pub value: f64,
    pub p: f64,
    pub q: LorentzQ,
    /// Original node index achieving the sup (q = infinity only).
    pub sup_location: Option<usize>,
    /// Decreasing rearrangement as (cumulative measure, f*) pairs.
    pub rearrangement: Vec<(f64, f64)>,
}

const ALPHA_SWEEP_LEVELS: usize = 512;

/// Lorentz quasi-norm ||f||_{p,q} on the discrete measure space.
pub fn lorentz_quasinorm(
    values: &[Complex64],
    space: &WeightedHalfLine,
    p: f64,
    q: LorentzQ,
) -> Result<LorentzResult> {
    lorentz_quasinorm_swept(values, space, p, q, ALPHA_SWEEP_LEVELS)
}

/// Same with an explicit alpha-sweep resolution (q = infinity case); used by
/// the sweep-refinement invariants.
pub fn lorentz_quasinorm_swept(
    values: &[Complex64],
    space: &WeightedHalfLine,
    p: f64,
    q: LorentzQ,
    sweep_levels: usize,
) -> Result<LorentzResult> {
    if values.len() != space.len() {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            got: values.len(),
        });
    }
    lorentz_weighted_swept(values, space.weights(), p, q, sweep_levels)
}

/// Lorentz quasi-norm on a bare weighted cell set (no node coordinates);
/// serves 2-D polar data where the cells carry J(t) dt dtheta measure.
pub fn lorentz_weighted(
    values: &[Complex64],
    weights: &[f64],
    p: f64,
    q: LorentzQ,
) -> Result<LorentzResult> {
    lorentz_weighted_swept(values, weights, p, q, ALPHA_SWEEP_LEVELS)
}

fn lorentz_weighted_swept(
    values: &[Complex64],
    weights: &[f64],
    p: f64,
    q: LorentzQ,
    sweep_levels: usize,
) -> Result<LorentzResult> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            got: values.len(),
        });
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Unsupported(format!("p must lie in (1, inf), got {p}")));
    }
    if let LorentzQ::Finite(qv) = q {
        if !(qv >= 1.0) || !qv.is_finite() {
            return Err(Error::Unsupported(format!("q must lie in [1, inf], got {qv}")));
        }
    }

    // Sort by magnitude, descending, remembering original node indices.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()));
    let max_abs = values[order[0]].norm();
    if max_abs == 0.0 {
        return Ok(LorentzResult {
            value: 0.0,
            p,
            q,
            sup_location: None,
            rearrangement: Vec::new(),
        });
    }

    // Step rearrangement: f* = mags[k] on [cum[k-1], cum[k]).
    let mut mags = Vec::with_capacity(order.len());
    let mut cums = Vec::with_capacity(order.len());
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i];
        mags.push(values[i].norm());
        cums.push(cum);
    }
    let rearrangement: Vec<(f64, f64)> = cums.iter().copied().zip(mags.iter().copied()).collect();

    match q {
        LorentzQ::Infinity => {
            let inv_p = 1.0 / p;
            // Exact jump candidates: alpha just below each distinct value v
            // gives d(alpha) = measure{ |f| >= v }.
            let mut best = 0.0;
            let mut best_node = order[0];
            for k in 0..mags.len() {
                let last_tie = k + 1 == mags.len() || mags[k + 1] < mags[k];
                if !last_tie || mags[k] == 0.0 {
                    continue;
                }
                let cand = mags[k] * cums[k].powf(inv_p);
                if cand > best {
                    best = cand;
                    best_node = order[k];
                }
            }
            // Geometric alpha sweep; with the jump candidates above it can
            // only confirm, never move, the sup.
            let lo = 1e-12 * max_abs;
            let ratio = (max_abs / lo).powf(1.0 / (sweep_levels - 1) as f64);
            let mut alpha = lo;
            for _ in 0..sweep_levels {
                let d = distribution_at(&mags, &cums, alpha);
                if d > 0.0 {
                    let cand = alpha * d.powf(inv_p);
                    if cand > best {
                        best = cand;
                    }
                }
                alpha *= ratio;
            }
            Ok(LorentzResult {
                value: best,
                p,
                q,
                sup_location: Some(best_node),
                rearrangement,
            })
        }
        LorentzQ::Finite(qv) => {
            // ((q/p) int (f*(s) s^{1/p})^q ds/s)^{1/q}, exact on the step f*.
            let qp = qv / p;
            let mut acc = 0.0;
            let mut prev_pow = 0.0;
            for k in 0..mags.len() {
                let pow = cums[k].powf(qp);
                acc += mags[k].powf(qv) * (pow - prev_pow);
                prev_pow = pow;
            }
            Ok(LorentzResult {
                value: acc.powf(1.0 / qv),
                p,
                q,
                sup_location: None,
                rearrangement,
            })
        }
    }
}

/// d(alpha) from the sorted rearrangement (strict inequality |f| > alpha).
fn distribution_at(mags: &[f64], cums: &[f64], alpha: f64) -> f64 {
    // mags descending: find last index with mags[k] > alpha.
    let k = mags.partition_point(|&m| m > alpha);
    if k == 0 {
        0.0
    } else {
        cums[k - 1]
    }
}

/// Norm selector shared by the membership diagnostics and the annulus
/// norm sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "param", rename_all = "kebab-case")]
pub enum NormTag {
    /// Weak-L2 on the radial measure.
    WeakL2,
    /// ||f||_M = ||f (1+t)^{-M}||_{2,inf}.
    WeightedM(u32),
    /// M_p limsup surrogate.
    Mp(f64),
    /// General Lorentz (p, q) on the radial measure.
    Lorentz { p: f64, q: LorentzQ },
}

impl std::fmt::Display for NormTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormTag::WeakL2 => write!(f, "weak-l2"),
            NormTag::WeightedM(m) => write!(f, "weighted:{m}"),
            NormTag::Mp(p) => write!(f, "mp:{p}"),
            NormTag::Lorentz { p, q } => match q {
                LorentzQ::Infinity => write!(f, "lorentz:{p},inf"),
                LorentzQ::Finite(qv) => write!(f, "lorentz:{p},{qv}"),
            },
        }
    }
}

/// Evaluates the tagged norm of a radial function, truncated at `t_cut`
/// when given.
pub fn evaluate_norm(f: &RadialFunction, tag: &NormTag, t_cut: Option<f64>) -> Result<f64> {
    let grid = f.grid();
    let space = WeightedHalfLine::from_radial_grid(grid, t_cut);
    let n = space.len();
    let values = &f.values()[..n];
    match tag {
        NormTag::WeakL2 => Ok(lorentz_quasinorm(values, &space, 2.0, LorentzQ::Infinity)?.value),
        NormTag::WeightedM(m) => {
            let weighted: Vec<Complex64> = values
                .iter()
                .zip(space.nodes())
                .map(|(&v, &t)| v * (1.0 + t).powi(-(*m as i32)))
                .collect();
            Ok(lorentz_quasinorm(&weighted, &space, 2.0, LorentzQ::Infinity)?.value)
        }
        NormTag::Mp(p) => {
            let t_hi = t_cut.unwrap_or(grid.t_max());
            let sweep = default_mp_sweep(t_hi);
            Ok(mp_functional(f, *p, &sweep)?.value)
        }
        NormTag::Lorentz { p, q } => Ok(lorentz_quasinorm(values, &space, *p, *q)?.value),
    }
}

fn default_mp_sweep(t_hi: f64) -> Vec<f64> {
    (0..=10).map(|i| t_hi * (0.5 + 0.05 * i as f64)).collect()
}

/// Verdict of a truncation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    Diverging,
    Inconclusive,
}

/// Truncated-norm sweep with the fitted log-log slope and the tail spread.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipDiagnostic {
    pub verdict: Verdict,
    /// Fitted slope of log norm against log t_max.
    pub slope: f64,
    /// Relative spread of the sweep's second half.
    pub spread: f64,
    pub norms: Vec<(f64, f64)>,
}

/// Membership diagnostic for the tagged norm: truncates at each sweep
/// radius, fits log norm against log t_max and classifies divergence
/// (slope > 0.1) against settling (spread within 2%).
pub fn membership_diagnostic(
    f: &RadialFunction,
    tag: &NormTag,
    t_max_sweep: &[f64],
) -> Result<MembershipDiagnostic> {
    if t_max_sweep.len() < 3 {
        return Err(Error::Unsupported(
            "membership sweep needs at least 3 radii".into(),
        ));
    }
    let mut norms = Vec::with_capacity(t_max_sweep.len());
    for &t_cut in t_max_sweep {
        norms.push((t_cut, evaluate_norm(f, tag, Some(t_cut))?));
    }
    let logs: Vec<(f64, f64)> = norms
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    if logs.len() < 3 {
        // Degenerate data (mostly zero norms): nothing grows.
        return Ok(MembershipDiagnostic {
            verdict: Verdict::Bounded,
            slope: 0.0,
            spread: 0.0,
            norms,
        });
    }
    let ones = vec![1.0; logs.len()];
    let xs: Vec<f64> = logs.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = logs.iter().map(|&(_, y)| y).collect();
    let beta = least_squares(&[&ones, &xs], &ys);
    let slope = beta[1];

    let half = norms.len() / 2;
    let tail: Vec<f64> = norms[half..].iter().map(|&(_, v)| v).collect();
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = if mean > 0.0 { (hi - lo) / mean } else { 0.0 };

    let verdict = if slope > 0.1 {
        Verdict::Diverging
    } else if spread <= 0.02 {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    Ok(MembershipDiagnostic {
        verdict,
        slope,
        spread,
        norms,
    })
}

/// Weak-L2 membership of a radial function (the paper's default norm).
pub fn weak_l2_membership(f: &RadialFunction, t_max_sweep: &[f64]) -> Result<MembershipDiagnostic> {
    membership_diagnostic(f, &NormTag::WeakL2, t_max_sweep)
}

/// ||f||_M = || f (1+t)^{-M} ||_{2,inf} on the full radial measure.
pub fn weighted_m_norm(f: &RadialFunction, m: u32) -> Result<f64> {
    evaluate_norm(f, &NormTag::WeightedM(m), None)
}

/// K_{2,q}(f) = || (int_K |f(k x)|^q dk)^{1/q} ||_{2,inf}: the K-orbit
/// average in polar coordinates followed by the weak-L2 quasi-norm of the
/// resulting radial profile.
pub fn kpq_functional(f: &PolarFunction, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Unsupported(format!("q must lie in [1, inf), got {q}")));
    }
    let profile = f.orbit_average(q);
    evaluate_norm(&profile, &NormTag::WeakL2, None)
}

/// Weak-L2 of a polar function over the 2-D measure J(t) dt dtheta / 2 pi,
/// truncated at t <= t_cut; the Poisson-bound diagnostic sweeps this.
pub fn polar_weak_l2(f: &PolarFunction, t_cut: f64) -> Result<f64> {
    let grid = f.grid();
    let n_t = grid.nodes().partition_point(|&t| t <= t_cut);
    let n_th = f.n_theta();
    let mut values = Vec::with_capacity(n_t * n_th);
    let mut weights = Vec::with_capacity(n_t * n_th);
    for i in 0..n_t {
        let w = grid.node_measure(i) / n_th as f64;
        for k in 0..n_th {
            values.push(f.value(i, k));
            weights.push(w);
        }
    }
    Ok(lorentz_weighted(&values, &weights, 2.0, LorentzQ::Infinity)?.value)
}

/// M_p limsup surrogate with its sweep curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpResult {
    pub value: f64,
    pub settled: bool,
    pub curve: Vec<(f64, f64)>,
}

/// M_p(f) = (max over the settled top half of the sweep of
/// (1/r) int_{B(0,r)} |f|^p)^{1/p}; the curve is returned for diagnostics
/// and a non-settling sweep is flagged.
pub fn mp_functional(f: &RadialFunction, p: f64, r_sweep: &[f64]) -> Result<MpResult> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Unsupported(format!("p must lie in (1, inf), got {p}")));
    }
    if r_sweep.len() < 4 {
        return Err(Error::Unsupported("M_p sweep needs at least 4 radii".into()));
    }
    let grid = f.grid();
    let mut curve = Vec::with_capacity(r_sweep.len());
    for &r in r_sweep {
        let n = grid.nodes().partition_point(|&t| t <= r);
        let mut acc = 0.0;
        for i in 0..n {
            acc += grid.node_measure(i) * f.values()[i].norm().powf(p);
        }
        curve.push((r, acc / r));
    }
    let half = curve.len() / 2;
    let top: Vec<f64> = curve[half..].iter().map(|&(_, v)| v).collect();
    let peak = top.iter().fold(0.0_f64, |a, &b| a.max(b));
    let value = peak.powf(1.0 / p);

    let mean = top.iter().sum::<f64>() / top.len() as f64;
    let lo = top.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let settled = mean == 0.0 || (peak - lo) / mean <= 0.05;
    Ok(MpResult {
        value,
        settled,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{GridScheme, SpaceParams};
    use std::sync::Arc;

    fn window(rho: f64, t_max: f64) -> WeightedHalfLine {
        WeightedHalfLine::exponential_window(rho, 1.0, t_max, 4001).unwrap()
    }

    fn cval(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn distribution_of_zero_and_indicator() {
        let sp = window(1.0, 10.0);
        let zero = vec![Complex64::default(); sp.len()];
        assert_eq!(distribution_function(&zero, &sp, 0.5), 0.0);

        // indicator of nodes in [2, 3]
        let ind: Vec<Complex64> = sp
            .nodes()
            .iter()
            .map(|&t| cval(if (2.0..=3.0).contains(&t) { 1.0 } else { 0.0 }))
            .collect();
        let measure: f64 = sp
            .nodes()
            .iter()
            .zip(sp.weights())
            .filter(|(&t, _)| (2.0..=3.0).contains(&t))
            .map(|(_, &w)| w)
            .sum();
        let d = distribution_function(&ind, &sp, 0.5);
        assert!((d - measure).abs() < 1e-12 * measure);
    }

    #[test]
    fn distribution_exponential_closed_form() {
        // f = e^{-rho t} on ([1, inf), e^{2 rho t} dt):
        // d(s) = (s^{-2} - e^{2 rho}) / (2 rho) for s < e^{-rho}.
        // The quadrature weights themselves are high-order accurate; the
        // level-set boundary is resolved only to the node spacing, so the
        // pointwise comparison carries an O(rho h) quantization bound.
        let rho = 1.0;
        let t_max = 28.0;
        let sp = window(rho, t_max);
        let h = sp.nodes()[1] - sp.nodes()[0];

        let mass_exact = ((2.0 * rho * t_max).exp() - (2.0 * rho).exp()) / (2.0 * rho);
        assert!(
            ((sp.total_mass() - mass_exact) / mass_exact).abs() < 1e-10,
            "window mass error {:.2e}",
            ((sp.total_mass() - mass_exact) / mass_exact).abs()
        );

        let f: Vec<Complex64> = sp.nodes().iter().map(|&t| cval((-rho * t).exp())).collect();
        for &s in &[0.05_f64, 0.01, 0.002] {
            let exact = (s.powi(-2) - (2.0 * rho).exp()) / (2.0 * rho);
            let got = distribution_function(&f, &sp, s);
            let rel = ((got - exact) / exact).abs();
            assert!(rel < 3.0 * rho * h, "d({s}) rel error {rel:.2e}");
        }

        // refining the window tightens the level-set quantization
        let fine = WeightedHalfLine::exponential_window(rho, 1.0, t_max, 16001).unwrap();
        let ff: Vec<Complex64> = fine
            .nodes()
            .iter()
            .map(|&t| cval((-rho * t).exp()))
            .collect();
        let h_fine = fine.nodes()[1] - fine.nodes()[0];
        for &s in &[0.05_f64, 0.002] {
            let exact = (s.powi(-2) - (2.0 * rho).exp()) / (2.0 * rho);
            let rel = ((distribution_function(&ff, &fine, s) - exact) / exact).abs();
            assert!(rel < 3.0 * rho * h_fine, "fine d({s}) rel error {rel:.2e}");
        }
    }

    #[test]
    fn indicator_weak_norm_exact() {
        let sp = window(0.5, 12.0);
        let ind: Vec<Complex64> = sp
            .nodes()
            .iter()
            .map(|&t| cval(if (1.5..=4.0).contains(&t) { 1.0 } else { 0.0 }))
            .collect();
        let measure: f64 = sp
            .nodes()
            .iter()
            .zip(sp.weights())
            .filter(|(&t, _)| (1.5..=4.0).contains(&t))
            .map(|(_, &w)| w)
            .sum();
        let r = lorentz_quasinorm(&ind, &sp, 2.0, LorentzQ::Infinity).unwrap();
        assert!(
            (r.value - measure.sqrt()).abs() < 1e-12 * measure.sqrt(),
            "got {}, want {}",
            r.value,
            measure.sqrt()
        );
    }

    #[test]
    fn weak_norm_of_exponential_approaches_closed_form() {
        // || e^{-rho t} ||_{2,inf} on ([1, inf), e^{2 rho t} dt) -> (2 rho)^{-1/2}
        for rho in [0.5, 1.0] {
            let sp = window(rho, 30.0 / rho.max(0.75));
            let f: Vec<Complex64> =
                sp.nodes().iter().map(|&t| cval((-rho * t).exp())).collect();
            let r = lorentz_quasinorm(&f, &sp, 2.0, LorentzQ::Infinity).unwrap();
            let expect = (2.0 * rho).powf(-0.5);
            assert!(
                ((r.value - expect) / expect).abs() < 0.01,
                "rho={rho}: {} vs {expect}",
                r.value
            );
        }
    }

    #[test]
    fn sweep_refinement_is_stable() {
        let sp = window(1.0, 25.0);
        let f: Vec<Complex64> = sp
            .nodes()
            .iter()
            .map(|&t| cval((-t).exp() * (1.0 + 0.3 * (3.0 * t).sin())))
            .collect();
        let a = lorentz_quasinorm_swept(&f, &sp, 2.0, LorentzQ::Infinity, 512).unwrap();
        let b = lorentz_quasinorm_swept(&f, &sp, 2.0, LorentzQ::Infinity, 1024).unwrap();
        assert!(
            ((a.value - b.value) / b.value).abs() < 0.005,
            "sweep refinement moved the value by {:.2e}",
            ((a.value - b.value) / b.value).abs()
        );
    }

    #[test]
    fn rearrangement_is_equimeasurable() {
        // direct integral of |f|^2 d mu equals int f*(s)^2 ds
        let sp = window(1.0, 15.0);
        let mut state = 0x243F6A8885A308D3_u64;
        let mut rand = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let f: Vec<Complex64> = (0..sp.len()).map(|_| cval(rand() - 0.3)).collect();
            let direct: f64 = f
                .iter()
                .zip(sp.weights())
                .map(|(v, &w)| w * v.norm_sqr())
                .sum();
            let r = lorentz_quasinorm(&f, &sp, 2.0, LorentzQ::Finite(2.0)).unwrap();
            let via_rearrangement: f64 = r
                .rearrangement
                .iter()
                .scan(0.0, |prev, &(cum, v)| {
                    let seg = (cum - *prev) * v * v;
                    *prev = cum;
                    Some(seg)
                })
                .sum();
            assert!(
                ((direct - via_rearrangement) / direct).abs() < 1e-10,
                "equimeasurability broken: {:.2e}",
                ((direct - via_rearrangement) / direct).abs()
            );
            // and the (2,2) value is the L2 norm
            assert!(((r.value * r.value - direct) / direct).abs() < 1e-10);
        }
    }

    #[test]
    fn lorentz_nesting_chain() {
        // ||f||_{2,inf} <= ||f||_{2,2} <= ||f||_{2,1}
        let sp = window(0.5, 12.0);
        let mut state = 0x9E3779B97F4A7C15_u64;
        let mut rand = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let f: Vec<Complex64> = (0..sp.len()).map(|_| cval(rand())).collect();
            let winf = lorentz_quasinorm(&f, &sp, 2.0, LorentzQ::Infinity)
                .unwrap()
                .value;
            let w2 = lorentz_quasinorm(&f, &sp, 2.0, LorentzQ::Finite(2.0))
                .unwrap()
                .value;
            let w1 = lorentz_quasinorm(&f, &sp, 2.0, LorentzQ::Finite(1.0))
                .unwrap()
                .value;
            assert!(winf <= w2 * (1.0 + 1e-12), "{winf} > {w2}");
            assert!(w2 <= w1 * (1.0 + 1e-12), "{w2} > {w1}");
        }
    }

    #[test]
    fn all_zero_input_gives_zero() {
        let sp = window(1.0, 10.0);
        let zero = vec![Complex64::default(); sp.len()];
        let r = lorentz_quasinorm(&zero, &sp, 2.0, LorentzQ::Infinity).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.sup_location.is_none());
        assert!(r.rearrangement.is_empty());
    }

    fn h3_function(f: impl Fn(f64) -> f64) -> RadialFunction {
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h3(), 25.0, 4096, GridScheme::Graded).unwrap(),
        );
        RadialFunction::from_real_fn(grid, f).unwrap()
    }

    #[test]
    fn membership_verdicts_match_known_profiles() {
        let sweep = [10.0, 15.0, 20.0, 25.0];
        // e^{-rho t} is in weak-L2
        let f = h3_function(|t| (-t).exp());
        assert_eq!(
            weak_l2_membership(&f, &sweep).unwrap().verdict,
            Verdict::Bounded
        );
        // t e^{-rho t} is not
        let g = h3_function(|t| t * (-t).exp());
        let diag = weak_l2_membership(&g, &sweep).unwrap();
        assert_eq!(diag.verdict, Verdict::Diverging);
        assert!(diag.slope > 0.5, "slope {}", diag.slope);
        // phi_0 on H3 (closed form t/sinh t) diverges, phi_1 = sin t / sinh t
        // stays bounded
        let phi0 = h3_function(|t| if t == 0.0 { 1.0 } else { t / t.sinh() });
        assert_eq!(
            weak_l2_membership(&phi0, &sweep).unwrap().verdict,
            Verdict::Diverging
        );
        let phi1 = h3_function(|t| if t == 0.0 { 1.0 } else { t.sin() / t.sinh() });
        assert_eq!(
            weak_l2_membership(&phi1, &sweep).unwrap().verdict,
            Verdict::Bounded
        );
    }

    #[test]
    fn weighted_norm_reduces_to_weak_l2_at_m0() {
        let f = h3_function(|t| (-0.8 * t).exp() * (2.0 * t).cos());
        let a = weighted_m_norm(&f, 0).unwrap();
        let b = evaluate_norm(&f, &NormTag::WeakL2, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weighted_norm_tames_phi0() {
        // phi_0 ~ (1+t) e^{-rho t}: || . ||_{M=1} finite while M=0 diverges
        let phi0 = h3_function(|t| if t == 0.0 { 1.0 } else { t / t.sinh() });
        let sweep = [10.0, 15.0, 20.0, 25.0];
        let m1 = membership_diagnostic(&phi0, &NormTag::WeightedM(1), &sweep).unwrap();
        assert_eq!(m1.verdict, Verdict::Bounded, "slope {}", m1.slope);
        let m0 = membership_diagnostic(&phi0, &NormTag::WeightedM(0), &sweep).unwrap();
        assert_eq!(m0.verdict, Verdict::Diverging);
    }

    #[test]
    fn mp_functional_basics() {
        // compact support -> curve decaying like 1/r
        let f = h3_function(|t| if t <= 2.0 { 1.0 } else { 0.0 });
        let sweep: Vec<f64> = (0..8).map(|i| 10.0 + 2.0 * i as f64).collect();
        let r = mp_functional(&f, 2.0, &sweep).unwrap();
        let first = r.curve[0].1;
        let last = r.curve.last().unwrap().1;
        assert!(last < first, "curve should decay");
        assert!((last * r.curve.last().unwrap().0 - first * r.curve[0].0).abs() < 1e-12);

        // homogeneity
        let g = f.scaled(Complex64::new(3.0, 0.0));
        let rg = mp_functional(&g, 2.0, &sweep).unwrap();
        assert!((rg.value - 3.0 * r.value).abs() <= 1e-12 * rg.value.max(1e-12));

        // phi_1 has a positive settled M_2 value
        let phi1 = h3_function(|t| if t == 0.0 { 1.0 } else { t.sin() / t.sinh() });
        let sweep: Vec<f64> = (0..11).map(|i| 12.5 + 1.25 * i as f64).collect();
        let rp = mp_functional(&phi1, 2.0, &sweep).unwrap();
        assert!(rp.value > 0.0);
        assert!(rp.settled, "curve spread too large: {:?}", rp.curve);
    }
}
