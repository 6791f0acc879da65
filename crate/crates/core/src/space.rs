//! Rank-one geometry: root multiplicities, the radial measure, quadrature
//! grids and the function containers shared by every other module.
//!
//! The curvature normalization fixes gamma(H0) = 1, so the geodesic radius t
//! is dimensionless, the radial density is
//! J(t) = (sinh t)^{m_gamma} (sinh 2t)^{m_2gamma} (constant fixed to 1; the
//! single surviving normalization constant is calibrated in the transform
//! plan), and the half-sum of positive roots is rho = (m_gamma + 2 m_2gamma)/2.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::panel_quadrature_weights;

/// Default spectral cutoff used by grid guards and the scenario runner;
/// adequate for rho <= 2 at desk scale.
pub const DEFAULT_LAMBDA_MAX: f64 = 20.0;
/// Default radial cutoff; e^{-rho t_max} pushes weak-L2 tail contributions
/// below 1e-9 for the supported spaces.
pub const DEFAULT_T_MAX: f64 = 25.0;

/// Root multiplicities of a rank-one symmetric space of noncompact type,
/// with the derived half-sum rho and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    m_gamma: u32,
    m_2gamma: u32,
    rho: f64,
    dim: u32,
}

impl SpaceParams {
    /// Builds the space from its root multiplicities. `m_gamma` must be
    /// positive; rho and dim are always recomputed, never set directly.
    pub fn new(m_gamma: i64, m_2gamma: i64) -> Result<Self> {
        if m_gamma < 1 {
            return Err(Error::InvalidSpace {
                m_gamma,
                m_2gamma,
                reason: "m_gamma must be a positive integer",
            });
        }
        if m_2gamma < 0 {
            return Err(Error::InvalidSpace {
                m_gamma,
                m_2gamma,
                reason: "m_2gamma must be nonnegative",
            });
        }
        let mg = m_gamma as u32;
        let m2 = m_2gamma as u32;
        let rho = (mg as f64 + 2.0 * m2 as f64) / 2.0;
        let dim = mg + m2 + 1;
        debug_assert!(rho > 0.0 && dim >= 2);
        Ok(Self {
            m_gamma: mg,
            m_2gamma: m2,
            rho,
            dim,
        })
    }

    /// Real hyperbolic plane: multiplicities (1, 0), rho = 1/2.
    pub fn h2() -> Self {
        Self::new(1, 0).unwrap()
    }

    /// Real hyperbolic 3-space: multiplicities (2, 0), rho = 1.
    pub fn h3() -> Self {
        Self::new(2, 0).unwrap()
    }

    /// Complex hyperbolic plane multiplicities (2, 1), rho = 2.
    pub fn h4c() -> Self {
        Self::new(2, 1).unwrap()
    }

    pub fn m_gamma(&self) -> u32 {
        self.m_gamma
    }

    pub fn m_2gamma(&self) -> u32 {
        self.m_2gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Radial measure density J(t) = (sinh t)^{m_gamma} (sinh 2t)^{m_2gamma}.
    pub fn density(&self, t: f64) -> f64 {
        let mut j = t.sinh().powi(self.m_gamma as i32);
        if self.m_2gamma > 0 {
            j *= (2.0 * t).sinh().powi(self.m_2gamma as i32);
        }
        j
    }

    /// First-derivative coefficient of the radial Laplacian:
    /// m_gamma coth t + 2 m_2gamma coth 2t = J'(t)/J(t).
    /// Written through a single exponential; this sits in the ODE inner loop.
    pub fn radial_coefficient(&self, t: f64) -> f64 {
        let em = (2.0 * t).exp_m1();
        let mut b = self.m_gamma as f64 * (em + 2.0) / em;
        if self.m_2gamma > 0 {
            let em2 = em * (em + 2.0); // e^{4t} - 1
            b += 2.0 * self.m_2gamma as f64 * (em2 + 2.0) / em2;
        }
        b
    }

    /// Spectral multiplier of -Delta at frequency lambda: lambda^2 + rho^2.
    pub fn multiplier(&self, lambda: f64) -> f64 {
        lambda * lambda + self.rho * self.rho
    }

    /// Complex-frequency version of [`Self::multiplier`].
    pub fn multiplier_c(&self, lambda: Complex64) -> Complex64 {
        lambda * lambda + self.rho * self.rho
    }
}

/// Node placement of the radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    /// Equispaced nodes on (0, t_max].
    Uniform,
    /// Geometric clustering on (0, 1] joined to equispaced nodes on
    /// (1, t_max]; resolves both the t^{d-1} and the e^{2 rho t} regimes
    /// of the polar density.
    Graded,
}

/// Radial quadrature grid: strictly increasing nodes on (0, t_max] with
/// composite-panel weights and the measure density per node. Immutable after
/// construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    params: SpaceParams,
    t: Vec<f64>,
    /// Panel quadrature weights for integration against dt (the density is
    /// applied separately), computed on the node set extended by t = 0.
    weights: Vec<f64>,
    density: Vec<f64>,
    t_max: f64,
    scheme: GridScheme,
}

impl RadialGrid {
    /// Builds a grid of `n_nodes` nodes covering (0, t_max].
    ///
    /// Rejects node counts that cannot resolve the fastest spectral mode at
    /// the default cutoff (eight nodes per period of e^{i lambda_max t}).
    pub fn new(params: SpaceParams, t_max: f64, n_nodes: usize, scheme: GridScheme) -> Result<Self> {
        if !(t_max > 1.0) || !t_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "t_max must exceed 1, got {t_max}"
            )));
        }
        if n_nodes < 64 {
            return Err(Error::InvalidGrid(format!(
                "need at least 64 nodes, got {n_nodes}"
            )));
        }
        // Nyquist-style guard against the default spectral cutoff: the
        // uniform section must carry >= 8 nodes per oscillation period.
        let period = 2.0 * std::f64::consts::PI / DEFAULT_LAMBDA_MAX;
        let needed = (8.0 * t_max / period).ceil() as usize;
        if n_nodes < needed {
            return Err(Error::NyquistViolation {
                needed,
                got: n_nodes,
                product: DEFAULT_LAMBDA_MAX * t_max,
            });
        }

        let t = match scheme {
            GridScheme::Uniform => {
                let h = t_max / n_nodes as f64;
                (1..=n_nodes).map(|i| i as f64 * h).collect::<Vec<_>>()
            }
            GridScheme::Graded => {
                // A quarter of the nodes cluster geometrically on (0, 1],
                // ratio matched to the uniform spacing beyond 1.
                let n_inner = n_nodes / 4;
                let n_outer = n_nodes - n_inner;
                let h = (t_max - 1.0) / n_outer as f64;
                let mut nodes = Vec::with_capacity(n_nodes);
                for i in 1..=n_inner {
                    nodes.push((-(h * (n_inner - i) as f64)).exp());
                }
                for i in 1..=n_outer {
                    nodes.push(1.0 + i as f64 * h);
                }
                nodes
            }
        };

        // Quadrature weights on {0} + nodes; the origin weight multiplies an
        // integrand that vanishes there (J(0) = 0) and is dropped.
        let mut extended = Vec::with_capacity(t.len() + 1);
        extended.push(0.0);
        extended.extend_from_slice(&t);
        let mut weights = panel_quadrature_weights(&extended);
        weights.remove(0);

        let density: Vec<f64> = t.iter().map(|&x| params.density(x)).collect();
        let grid = Self {
            params,
            t,
            weights,
            density,
            t_max,
            scheme,
        };
        grid.validate_density()?;
        Ok(grid)
    }

    /// Density asymptotics onto the two regimes of the polar integral:
    /// within a factor of 4 of its exponential asymptote 2^{-(d-1)} e^{2 rho t}
    /// for t >= 1, and within 10% of its polynomial asymptote
    /// 2^{m_2gamma} t^{d-1} for t <= 0.1.
    fn validate_density(&self) -> Result<()> {
        let d = self.params.dim() as f64;
        let rho = self.params.rho();
        let exp_scale = 2.0_f64.powf(-(d - 1.0));
        let poly_scale = 2.0_f64.powi(self.params.m_2gamma() as i32);
        for (i, (&t, &j)) in self.t.iter().zip(&self.density).enumerate() {
            if !(j > 0.0) {
                return Err(Error::NonFinite { index: i });
            }
            if t >= 1.0 {
                let ratio = j * (-2.0 * rho * t).exp() / exp_scale;
                if !(0.25..=4.0).contains(&ratio) {
                    return Err(Error::InvalidGrid(format!(
                        "density asymptotics violated at t={t}: J e^(-2 rho t) ratio {ratio}"
                    )));
                }
            }
            if t <= 0.1 {
                let ratio = j / (poly_scale * t.powf(d - 1.0));
                if (ratio - 1.0).abs() > 0.1 {
                    return Err(Error::InvalidGrid(format!(
                        "density asymptotics violated at t={t}: J/t^(d-1) ratio {ratio}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> SpaceParams {
        self.params
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    /// Measure of node i: quadrature weight times density.
    pub fn node_measure(&self, i: usize) -> f64 {
        self.weights[i] * self.density[i]
    }

    /// Index of the node closest to `t`.
    pub fn nearest_node(&self, t: f64) -> usize {
        let pos = self.t.partition_point(|&x| x < t);
        if pos == 0 {
            0
        } else if pos >= self.t.len() {
            self.t.len() - 1
        } else if (self.t[pos] - t).abs() < (t - self.t[pos - 1]).abs() {
            pos
        } else {
            pos - 1
        }
    }
}

/// Samples of a radial function on a shared grid. The value at the origin is
/// stored separately because the grid excludes t = 0.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
    at_origin: Complex64,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>, at_origin: Complex64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let f = Self {
            grid,
            values,
            at_origin,
        };
        f.check_finite()?;
        Ok(f)
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values: Vec<Complex64> = grid.nodes().iter().map(|&t| f(t)).collect();
        let at_origin = f(0.0);
        Self::new(grid, values, at_origin)
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::default(); n],
            at_origin: Complex64::default(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if !self.at_origin.re.is_finite() || !self.at_origin.im.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        for (i, v) in self.values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn at_origin(&self) -> Complex64 {
        self.at_origin
    }

    pub fn set_at_origin(&mut self, v: Complex64) {
        self.at_origin = v;
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| f(t, v))
            .collect();
        Self::new(Arc::clone(&self.grid), values, f(0.0, self.at_origin))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| c * v).collect(),
            at_origin: c * self.at_origin,
        }
    }

    /// Pointwise a*self + b*other; grids must be the same object.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::InvalidGrid(
                "linear combination across different grids".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Self::new(
            Arc::clone(&self.grid),
            values,
            a * self.at_origin + b * other.at_origin,
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(self.at_origin.norm(), f64::max)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold((self.at_origin - other.at_origin).norm(), f64::max)
    }

    /// Integral over the space of a radial function (up to the global
    /// measure constant): sum of weight * density * value.
    ///
    /// Reports a tail-dominated integral when the last node carries more
    /// than 1% of the accumulated magnitude, which signals that the cutoff
    /// t_max truncates the integrand.
    pub fn integrate(&self) -> Result<Complex64> {
        let mut acc = Complex64::default();
        let mut acc_abs = 0.0;
        for i in 0..self.values.len() {
            let contrib = self.grid.node_measure(i) * self.values[i];
            acc += contrib;
            acc_abs += contrib.norm();
        }
        let n = self.values.len();
        let tail = (self.grid.node_measure(n - 1) * self.values[n - 1]).norm();
        if acc_abs > 0.0 && tail > 0.01 * acc_abs {
            return Err(Error::TailDominated {
                fraction: tail / acc_abs,
            });
        }
        Ok(acc)
    }
}

/// Frequency grid on [0, lambda_max] with panel quadrature weights and the
/// Plancherel density |c(lambda)|^{-2} per node. Built by the transform plan,
/// which owns the c-function extraction.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    lambda: Vec<f64>,
    weights: Vec<f64>,
    plancherel: Vec<f64>,
    lambda_max: f64,
}

impl SpectralGrid {
    /// Uniform nodes 0 = lambda_0 < ... < lambda_{n-1} = lambda_max with the
    /// supplied Plancherel values. The density must be nonnegative; the
    /// lambda = 0 entry is typically filled by even interpolation.
    pub fn with_plancherel(lambda_max: f64, plancherel: Vec<f64>) -> Result<Self> {
        let n = plancherel.len();
        if n < 17 {
            return Err(Error::InvalidGrid(format!(
                "spectral grid needs at least 17 nodes, got {n}"
            )));
        }
        if !(lambda_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "lambda_max must be positive, got {lambda_max}"
            )));
        }
        for (i, &p) in plancherel.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        let h = lambda_max / (n - 1) as f64;
        let lambda: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let weights = panel_quadrature_weights(&lambda);
        Ok(Self {
            lambda,
            weights,
            plancherel,
            lambda_max,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.lambda
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn plancherel(&self) -> &[f64] {
        &self.plancherel
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn step(&self) -> f64 {
        self.lambda[1] - self.lambda[0]
    }
}

/// Samples of a spherical transform on a shared spectral grid.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&l| f(l)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_arithmetic() {
        let h3 = SpaceParams::new(2, 0).unwrap();
        assert_eq!(h3.rho(), 1.0);
        assert_eq!(h3.dim(), 3);
        let h2 = SpaceParams::new(1, 0).unwrap();
        assert_eq!(h2.rho(), 0.5);
        assert_eq!(h2.dim(), 2);
        let h4c = SpaceParams::new(2, 1).unwrap();
        assert_eq!(h4c.rho(), 2.0);
        assert_eq!(h4c.dim(), 4);
    }

    #[test]
    fn rejects_bad_multiplicities() {
        assert!(SpaceParams::new(0, 0).is_err());
        assert!(SpaceParams::new(-1, 0).is_err());
        assert!(SpaceParams::new(2, -1).is_err());
    }

    #[test]
    fn h3_density_value() {
        let p = SpaceParams::h3();
        assert!((p.density(1.0) - 1.3811).abs() < 1e-4);
        let grid = RadialGrid::new(p, 20.0, 4096, GridScheme::Uniform).unwrap();
        for (&t, &j) in grid.nodes().iter().zip(grid.density()).step_by(97) {
            assert!((j - t.sinh().powi(2)).abs() <= 1e-12 * j.max(1.0));
        }
    }

    #[test]
    fn density_asymptotics_hold_on_all_spaces() {
        for params in [SpaceParams::h2(), SpaceParams::h3(), SpaceParams::h4c()] {
            for scheme in [GridScheme::Uniform, GridScheme::Graded] {
                // Construction itself validates the asymptotic split.
                let grid = RadialGrid::new(params, 25.0, 2048, scheme).unwrap();
                let rho = params.rho();
                for (&t, &j) in grid.nodes().iter().zip(grid.density()) {
                    if t >= 1.0 {
                        let r = j * (-2.0 * rho * t).exp();
                        assert!(r > 0.0 && r <= 4.0, "J e^(-2rho t) = {r} at t = {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_undersampled_grid() {
        let err = RadialGrid::new(SpaceParams::h3(), 25.0, 128, GridScheme::Uniform);
        assert!(matches!(err, Err(Error::NyquistViolation { .. })));
        assert!(RadialGrid::new(SpaceParams::h3(), 0.5, 4096, GridScheme::Uniform).is_err());
    }

    #[test]
    fn integrate_exponential_against_h3_measure() {
        // integral of e^{-4t} sinh^2 t over (0, inf) = 1/24
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h3(), 12.0, 2048, GridScheme::Graded).unwrap(),
        );
        let f = RadialFunction::from_real_fn(Arc::clone(&grid), |t| (-4.0 * t).exp()).unwrap();
        let v = f.integrate().unwrap();
        assert!(
            (v.re - 1.0 / 24.0).abs() < 1e-8 / 24.0,
            "integral error {:.2e}",
            (v.re - 1.0 / 24.0).abs()
        );
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn integrate_zero_function() {
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h3(), 10.0, 1024, GridScheme::Uniform).unwrap(),
        );
        let f = RadialFunction::zero(Arc::clone(&grid));
        assert_eq!(f.integrate().unwrap(), Complex64::default());
    }

    #[test]
    fn integrate_flags_tail_dominated() {
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h3(), 10.0, 1024, GridScheme::Uniform).unwrap(),
        );
        // Grows against the measure: cutoff-dominated by construction.
        let f = RadialFunction::from_real_fn(Arc::clone(&grid), |t| (2.0 * t).exp()).unwrap();
        assert!(matches!(f.integrate(), Err(Error::TailDominated { .. })));
    }

    #[test]
    fn grid_refinement_converges() {
        // Doubling the node count changes the integral of e^{-(2 rho + 1) t}
        // by less than 1e-8 relative, at fixed t_max >= 30/(2 rho + 1).
        for params in [SpaceParams::h2(), SpaceParams::h3()] {
            let decay = 2.0 * params.rho() + 1.0;
            let t_max = (30.0 / decay).max(10.0 + 1.0);
            for scheme in [GridScheme::Uniform, GridScheme::Graded] {
                let coarse = Arc::new(RadialGrid::new(params, t_max, 2048, scheme).unwrap());
                let fine = Arc::new(RadialGrid::new(params, t_max, 4096, scheme).unwrap());
                let fc = RadialFunction::from_real_fn(coarse, |t| (-decay * t).exp()).unwrap();
                let ff = RadialFunction::from_real_fn(fine, |t| (-decay * t).exp()).unwrap();
                let ic = fc.integrate().unwrap().re;
                let iff = ff.integrate().unwrap().re;
                assert!(
                    ((ic - iff) / iff).abs() < 1e-8,
                    "refinement drift {:.2e} on {:?} {:?}",
                    ((ic - iff) / iff).abs(),
                    params,
                    scheme
                );
            }
        }
    }

    #[test]
    fn graded_grid_orders_and_covers() {
        let grid = RadialGrid::new(SpaceParams::h2(), 25.0, 4096, GridScheme::Graded).unwrap();
        let t = grid.nodes();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t[0] > 0.0);
        assert!((t[t.len() - 1] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn radial_function_rejects_nan() {
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h3(), 10.0, 1024, GridScheme::Uniform).unwrap(),
        );
        let mut values = vec![Complex64::default(); grid.len()];
        values[17] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            RadialFunction::new(grid, values, Complex64::default()),
            Err(Error::NonFinite { index: 17 })
        ));
    }
}
