//! Poisson transform on the 2-D polar model of the hyperbolic plane.
//!
//! The boundary integral P_lambda F(x) = int_B F(b) e^{(i lambda + rho) A(x,b)} db
//! is evaluated mode by mode: the boundary function is expanded in Fourier
//! modes, each mode's radial profile solves the separated radial equation
//! (angular term m^2/sinh^2 t), and the profile amplitude is calibrated
//! against direct theta-quadrature of the disk-model kernel
//! (1 - r^2)/|x - b|^2 at two moderate radii. The m = 0 calibration factor
//! doubles as the P_lambda 1 = phi_lambda convention check: a kernel with the
//! wrong exponent or normalization aborts here.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::fornberg_weights;
use crate::space::{RadialFunction, RadialGrid, SpaceParams};
use crate::spherical::solve_radial;

/// Function on the boundary circle, sampled on a uniform grid over [0, 2 pi).
#[derive(Debug, Clone)]
pub struct BoundaryFunction {
    values: Vec<Complex64>,
}

impl BoundaryFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 8 {
            return Err(Error::InvalidGrid(
                "boundary grid needs at least 8 nodes".into(),
            ));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..n)
            .map(|k| f(2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn theta(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.values.len() as f64
    }

    /// Fourier coefficient (1/n) sum F_k e^{-im theta_k}.
    fn mode(&self, m: i32) -> Complex64 {
        let n = self.values.len();
        let mut acc = Complex64::default();
        for (k, v) in self.values.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * (k as f64) * (m as f64) / n as f64;
            acc += v * Complex64::new(0.0, -th).exp();
        }
        acc / n as f64
    }
}

/// Samples on the polar grid (radial nodes x boundary angles), row-major in
/// the radial index. The value at the origin is angle-independent and kept
/// separately, mirroring [`RadialFunction`].
#[derive(Debug, Clone)]
pub struct PolarFunction {
    grid: Arc<RadialGrid>,
    n_theta: usize,
    values: Vec<Complex64>,
    at_origin: Complex64,
}

impl PolarFunction {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn value(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.n_theta + k]
    }

    pub fn at_origin(&self) -> Complex64 {
        self.at_origin
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(self.at_origin.norm(), f64::max)
    }

    /// Lifts a radial function to the polar grid (constant in theta).
    pub fn from_radial(f: &RadialFunction, n_theta: usize) -> Self {
        let mut values = Vec::with_capacity(f.grid().len() * n_theta);
        for v in f.values() {
            values.extend(std::iter::repeat(*v).take(n_theta));
        }
        Self {
            grid: Arc::clone(f.grid()),
            n_theta,
            values,
            at_origin: f.at_origin(),
        }
    }

    /// The K-orbit average (int |f(k x)|^q dk)^{1/q} per radial node:
    /// the theta-mean on the uniform angular grid.
    pub fn orbit_average(&self, q: f64) -> RadialFunction {
        let n_theta = self.n_theta as f64;
        let values: Vec<Complex64> = (0..self.grid.len())
            .map(|i| {
                let row = &self.values[i * self.n_theta..(i + 1) * self.n_theta];
                let mean = row.iter().map(|v| v.norm().powf(q)).sum::<f64>() / n_theta;
                Complex64::new(mean.powf(1.0 / q), 0.0)
            })
            .collect();
        RadialFunction::new(
            Arc::clone(&self.grid),
            values,
            Complex64::new(self.at_origin.norm(), 0.0),
        )
        .expect("orbit average of finite values is finite")
    }
}

const KERNEL_QUADRATURE_NODES: usize = 8192;
/// Radii for the per-mode amplitude calibration; small enough that the
/// kernel's boundary peak is fully resolved by the theta quadrature.
const CALIBRATION_RADII: (f64, f64) = (1.5, 2.5);
const MAX_BOUNDARY_MODE: i32 = 16;

/// Direct theta-quadrature of the m-th Fourier coefficient of the kernel
/// power at geodesic radius t.
fn kernel_mode(rho: f64, lambda: f64, t: f64, m: i32) -> Complex64 {
    let r = (0.5 * t).tanh();
    let expo = Complex64::new(rho, lambda);
    let n = KERNEL_QUADRATURE_NODES;
    let mut acc = Complex64::default();
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let p = (1.0 - r * r) / (1.0 + r * r - 2.0 * r * th.cos());
        acc += (expo * p.ln()).exp() * Complex64::new(0.0, -(m as f64) * th).exp();
    }
    acc / n as f64
}

/// Poisson transform of a boundary function on the hyperbolic plane for real
/// lambda != 0, sampled on the polar grid.
pub fn poisson_transform_2d(
    params: SpaceParams,
    lambda: f64,
    boundary: &BoundaryFunction,
    grid: &Arc<RadialGrid>,
) -> Result<PolarFunction> {
    if params != SpaceParams::h2() {
        return Err(Error::Unsupported(
            "Poisson transform is implemented on the hyperbolic plane only".into(),
        ));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Unsupported(format!(
            "Poisson transform needs real nonzero lambda, got {lambda}"
        )));
    }
    let rho = params.rho();
    let n_theta = boundary.len();

    // Fourier analysis of the boundary data.
    let mut coeffs: Vec<(i32, Complex64)> = Vec::new();
    let scale = boundary
        .values()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let half = (n_theta / 2) as i32;
    for m in -half..=half {
        let c = boundary.mode(m);
        if c.norm() > 1e-12 * scale {
            if m.abs() > MAX_BOUNDARY_MODE {
                return Err(Error::BoundaryModesUnresolved {
                    m,
                    max_m: MAX_BOUNDARY_MODE,
                    coeff: c.norm(),
                });
            }
            coeffs.push((m, c));
        }
    }

    // Radial profile and calibration per distinct |m|.
    let lambda_c = Complex64::new(lambda, 0.0);
    let mut profiles: Vec<(u32, Vec<Complex64>, Complex64)> = Vec::new();
    for &(m, _) in &coeffs {
        let am = m.unsigned_abs();
        if profiles.iter().any(|(pm, _, _)| *pm == am) {
            continue;
        }
        let u = solve_radial(params, lambda_c, am, grid.nodes())?;
        let (t1, t2) = CALIBRATION_RADII;
        let probe = solve_radial(params, lambda_c, am, &[t1, t2])?;
        let i1 = kernel_mode(rho, lambda, t1, am as i32);
        let i2 = kernel_mode(rho, lambda, t2, am as i32);
        let eta = i1 / probe[0];
        let mismatch = (eta * probe[1] - i2).norm() / i1.norm().max(1e-300);
        if mismatch > 1e-6 {
            return Err(Error::CalibrationFailure {
                m: am as i32,
                mismatch,
            });
        }
        if am == 0 {
            // P_lambda 1 = phi_lambda pins the kernel convention exactly.
            let off = (eta - Complex64::new(1.0, 0.0)).norm();
            if off > 1e-6 {
                return Err(Error::CalibrationFailure { m: 0, mismatch: off });
            }
        }
        profiles.push((am, u, eta));
    }

    // Synthesis on the polar grid.
    let n_t = grid.len();
    let mut values = vec![Complex64::default(); n_t * n_theta];
    let mut at_origin = Complex64::default();
    for &(m, c) in &coeffs {
        let (_, profile, eta) = profiles
            .iter()
            .find(|(pm, _, _)| *pm == m.unsigned_abs())
            .unwrap();
        if m == 0 {
            at_origin += c * eta;
        }
        for i in 0..n_t {
            let radial = c * eta * profile[i];
            for k in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * k as f64 * m as f64 / n_theta as f64;
                values[i * n_theta + k] += radial * Complex64::new(0.0, th).exp();
            }
        }
    }
    Ok(PolarFunction {
        grid: Arc::clone(grid),
        n_theta,
        values,
        at_origin,
    })
}

/// Maximum relative residual of the 2-D eigen-equation
/// (d_t^2 + coth t d_t + sinh^{-2} t d_theta^2 + lambda^2 + rho^2) v = 0
/// over interior polar nodes with t >= 0.1, by five-point finite differences
/// in t and fourth-order periodic differences in theta.
pub fn eigen_residual_2d(v: &PolarFunction, lambda: f64) -> Result<f64> {
    let grid = v.grid();
    let params = grid.params();
    if params != SpaceParams::h2() {
        return Err(Error::Unsupported(
            "2-D eigen residual is defined on the hyperbolic plane model".into(),
        ));
    }
    let mu_sq = params.multiplier(lambda);
    let t = grid.nodes();
    let n_t = grid.len();
    let n_th = v.n_theta();
    let h_th = 2.0 * std::f64::consts::PI / n_th as f64;
    let scale = v.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }

    let mut worst = 0.0_f64;
    for i in 2..n_t - 3 {
        if t[i] < 0.1 {
            continue;
        }
        let stencil = &t[i - 2..i + 3];
        let w = fornberg_weights(t[i], stencil, 2);
        let coth = params.radial_coefficient(t[i]);
        let inv_sinh_sq = t[i].sinh().powi(-2);
        for k in 0..n_th {
            let mut d1 = Complex64::default();
            let mut d2 = Complex64::default();
            for (s, off) in (i - 2..i + 3).enumerate() {
                d1 += w[1][s] * v.value(off, k);
                d2 += w[2][s] * v.value(off, k);
            }
            // (-1, 16, -30, 16, -1) / (12 h^2), periodic in theta
            let km2 = v.value(i, (k + n_th - 2) % n_th);
            let km1 = v.value(i, (k + n_th - 1) % n_th);
            let kp1 = v.value(i, (k + 1) % n_th);
            let kp2 = v.value(i, (k + 2) % n_th);
            let dth2 = (-km2 + 16.0 * km1 - 30.0 * v.value(i, k) + 16.0 * kp1 - kp2)
                / (12.0 * h_th * h_th);
            let residual = d2 + coth * d1 + inv_sinh_sq * dth2 + mu_sq * v.value(i, k);
            worst = worst.max(residual.norm());
        }
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::GridScheme;
    use crate::spherical::phi_ode;

    fn h2_grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(SpaceParams::h2(), 25.0, 4096, GridScheme::Graded).unwrap())
    }

    #[test]
    fn poisson_of_constant_is_spherical_function() {
        let grid = h2_grid();
        let lambda = 1.0;
        let one = BoundaryFunction::from_fn(64, |_| Complex64::new(1.0, 0.0)).unwrap();
        let p = poisson_transform_2d(SpaceParams::h2(), lambda, &one, &grid).unwrap();
        let phi = phi_ode(SpaceParams::h2(), Complex64::new(lambda, 0.0), &grid).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..grid.len() {
            for k in 0..p.n_theta() {
                worst = worst.max((p.value(i, k) - phi.values()[i]).norm());
            }
        }
        assert!(worst < 1e-6, "P_lambda 1 vs phi_lambda sup {worst:.2e}");
        assert!((p.at_origin() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn poisson_eigen_residual_cos_theta() {
        let grid = h2_grid();
        let lambda = 1.0;
        let f = BoundaryFunction::from_fn(256, |th| Complex64::new(th.cos(), 0.0)).unwrap();
        let p = poisson_transform_2d(SpaceParams::h2(), lambda, &f, &grid).unwrap();
        let res = eigen_residual_2d(&p, lambda).unwrap();
        assert!(res < 1e-4, "2-D eigen residual {res:.2e}");
    }

    #[test]
    fn poisson_is_linear_in_boundary_data() {
        let grid = h2_grid();
        let lambda = 1.3;
        let f = BoundaryFunction::from_fn(128, |th| Complex64::new(th.cos(), 0.0)).unwrap();
        let g = BoundaryFunction::from_fn(128, |th| {
            Complex64::new(0.25, (2.0 * th).sin() * 0.5)
        })
        .unwrap();
        let sum = BoundaryFunction::new(
            f.values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| 2.0 * a + b)
                .collect(),
        )
        .unwrap();
        let pf = poisson_transform_2d(SpaceParams::h2(), lambda, &f, &grid).unwrap();
        let pg = poisson_transform_2d(SpaceParams::h2(), lambda, &g, &grid).unwrap();
        let ps = poisson_transform_2d(SpaceParams::h2(), lambda, &sum, &grid).unwrap();
        let mut worst = 0.0_f64;
        for i in (0..grid.len()).step_by(37) {
            for k in 0..pf.n_theta() {
                let expect = 2.0 * pf.value(i, k) + pg.value(i, k);
                worst = worst.max((ps.value(i, k) - expect).norm());
            }
        }
        assert!(worst < 1e-10 * ps.max_abs(), "linearity sup {worst:.2e}");
    }

    #[test]
    fn poisson_rejects_bad_inputs() {
        let grid = h2_grid();
        let f = BoundaryFunction::from_fn(64, |th| Complex64::new(th.cos(), 0.0)).unwrap();
        assert!(poisson_transform_2d(SpaceParams::h3(), 1.0, &f, &grid).is_err());
        assert!(poisson_transform_2d(SpaceParams::h2(), 0.0, &f, &grid).is_err());
        // boundary data needing modes beyond the cap
        let spiky = BoundaryFunction::from_fn(256, |th| {
            Complex64::new((20.0 * th).cos(), 0.0)
        })
        .unwrap();
        assert!(matches!(
            poisson_transform_2d(SpaceParams::h2(), 1.0, &spiky, &grid),
            Err(Error::BoundaryModesUnresolved { .. })
        ));
    }

    #[test]
    fn orbit_average_of_radial_lift_is_identity() {
        let grid = h2_grid();
        let f = RadialFunction::from_real_fn(Arc::clone(&grid), |t| (-0.5 * t).exp()).unwrap();
        let polar = PolarFunction::from_radial(&f, 64);
        for q in [1.0, 2.0, 4.0] {
            let avg = polar.orbit_average(q);
            let mut worst = 0.0_f64;
            for i in 0..grid.len() {
                worst = worst.max((avg.values()[i] - f.values()[i]).norm());
            }
            assert!(worst < 1e-12, "orbit average broke radial data: {worst:.2e}");
        }
    }
}
