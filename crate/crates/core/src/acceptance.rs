//! The acceptance battery: every quantitative desk-scale check the library
//! must pass, with pinned tolerances. The `suite --acceptance` subcommand
//! prints one line per criterion; the `acceptance` integration test asserts
//! each of them.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;

use crate::annulus::{
    classify, estimate_limits, generalized_eigen_residual, norm_sequence, norm_sequence_modal,
    radial_laplacian_spatial, synthesize_bandlimited, Classification, ProfileShape,
    SpectralProfile,
};
use crate::norms::{
    kpq_functional, lorentz_quasinorm_swept, polar_weak_l2, weak_l2_membership, LorentzQ,
    NormTag, Verdict, WeightedHalfLine,
};
use crate::poisson::{eigen_residual_2d, poisson_transform_2d, BoundaryFunction};
use crate::scenario::{run_scenario, ScenarioConfig, ScenarioTag};
use crate::space::{GridScheme, RadialFunction, RadialGrid, SpaceParams};
use crate::spherical::{phi_lambda_derivative, phi_ode, HcExpansion, phi_series};
use crate::transforms::{abel_transform, euclidean_ft, TransformPlan};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub elapsed_seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {:<28} {:6.1}s  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed_seconds,
            self.details
        )
    }
}

const T_MAX: f64 = 25.0;
const N_T: usize = 4096;
const LAMBDA_MAX: f64 = 20.0;
const N_LAMBDA: usize = 1601;

fn h3_plan() -> &'static TransformPlan {
    static PLAN: OnceLock<TransformPlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h3(), T_MAX, N_T, GridScheme::Graded).unwrap(),
        );
        TransformPlan::new(SpaceParams::h3(), &grid, LAMBDA_MAX, N_LAMBDA).unwrap()
    })
}

fn h2_plan() -> &'static TransformPlan {
    static PLAN: OnceLock<TransformPlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        let grid = Arc::new(
            RadialGrid::new(SpaceParams::h2(), T_MAX, N_T, GridScheme::Graded).unwrap(),
        );
        TransformPlan::new(SpaceParams::h2(), &grid, LAMBDA_MAX, N_LAMBDA).unwrap()
    })
}

fn finish(
    id: u32,
    name: &'static str,
    start: Instant,
    outcome: std::result::Result<(bool, String), crate::Error>,
) -> CriterionResult {
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok((passed, details)) => CriterionResult {
            id,
            name,
            passed,
            details,
            elapsed_seconds: elapsed,
        },
        Err(e) => CriterionResult {
            id,
            name,
            passed: false,
            details: format!("errored: {e}"),
            elapsed_seconds: elapsed,
        },
    }
}

/// Criterion 1: spatial-Laplacian eigen-equation residual of phi_lambda
/// below 1e-6 relative on all three spaces, lambda in {0.5, 1, 2, 5};
/// total runtime under 10 s.
pub fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for params in [SpaceParams::h2(), SpaceParams::h3(), SpaceParams::h4c()] {
            let grid = Arc::new(RadialGrid::new(params, T_MAX, 8192, GridScheme::Graded)?);
            for &l in &[0.5, 1.0, 2.0, 5.0] {
                let phi = phi_ode(params, Complex64::new(l, 0.0), &grid)?;
                let lap = radial_laplacian_spatial(&phi, params)?;
                let mu_sq = params.multiplier(l);
                let mut res: f64 = (lap.at_origin() + mu_sq * phi.at_origin()).norm();
                for (a, b) in lap.values().iter().zip(phi.values()) {
                    res = res.max((a + mu_sq * b).norm());
                }
                worst = worst.max(res / phi.max_abs());
            }
        }
        let in_time = start.elapsed().as_secs_f64() < 10.0;
        Ok((
            worst < 1e-6 && in_time,
            format!("max residual {worst:.2e} (tol 1e-6), runtime bound 10 s"),
        ))
    };
    finish(1, "eigen-equation residual", start, run())
}

/// Criterion 2: Harish-Chandra series vs ODE to 1e-8 sup-relative on
/// t in [1, 20] for all spaces, and the H3 closed form
/// sin(lambda t)/(lambda sinh t) reproduced to 1e-8; runtime under 5 s.
pub fn criterion_2() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let ts = [1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 16.0, 20.0];
        let mut worst_pair: f64 = 0.0;
        for params in [SpaceParams::h2(), SpaceParams::h3(), SpaceParams::h4c()] {
            for &l in &[0.5, 1.0, 2.0, 5.0] {
                let lambda = Complex64::new(l, 0.0);
                let exp = HcExpansion::new(params, lambda)?;
                let ode = crate::spherical::solve_radial(params, lambda, 0, &ts)?;
                let scale = ode.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for (&t, o) in ts.iter().zip(&ode) {
                    let s = phi_series(&exp, t)?;
                    worst_pair = worst_pair.max((s - o).norm() / scale);
                }
            }
        }
        let mut worst_closed: f64 = 0.0;
        for &l in &[0.5, 1.0, 2.0, 5.0] {
            let lambda = Complex64::new(l, 0.0);
            let ode = crate::spherical::solve_radial(SpaceParams::h3(), lambda, 0, &ts)?;
            let scale = ode.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (&t, o) in ts.iter().zip(&ode) {
                let closed = (lambda * t).sin() / (lambda * t.sinh());
                worst_closed = worst_closed.max((o - closed).norm() / scale);
            }
        }
        let in_time = start.elapsed().as_secs_f64() < 5.0;
        Ok((
            worst_pair < 1e-8 && worst_closed < 1e-8 && in_time,
            format!(
                "series/ODE {worst_pair:.2e}, closed form {worst_closed:.2e} (tol 1e-8)"
            ),
        ))
    };
    finish(2, "series/ODE cross-validation", start, run())
}

fn wide_plan(params: SpaceParams) -> crate::Result<TransformPlan> {
    // Band-limited synthetics genuinely decay only like t^{-4} e^{-rho t}
    // (boundary terms of the profile's fourth derivative), so the 1e-6
    // round trip needs a longer grid than the default t_max.
    let grid = Arc::new(RadialGrid::new(params, 45.0, 8192, GridScheme::Graded)?);
    TransformPlan::new(params, &grid, LAMBDA_MAX, N_LAMBDA)
}

/// Criterion 3: forward-inverse round trip to 1e-6 sup-relative on the
/// three-function suite and a function-independent Parseval constant
/// (1e-6 relative spread) on both model spaces.
pub fn criterion_3() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let mut worst_rt: f64 = 0.0;
        let mut worst_spread: f64 = 0.0;
        for plan in [&wide_plan(SpaceParams::h3())?, &wide_plan(SpaceParams::h2())?] {
            let grid = plan.radial_grid();
            let heat = plan.heat_kernel(0.5)?;
            // quartic edges: gentle enough in lambda for the spectral grid
            // (unlike the steep-walled C-infinity bump) and two orders
            // faster in t than the raised cosine
            let profile = SpectralProfile::new(1.0, 2.0, ProfileShape::SineQuartic)?;
            let (band, _) = synthesize_bandlimited(&profile, plan)?;
            let gauss = RadialFunction::from_real_fn(Arc::clone(grid), |t| (-t * t).exp())?;
            for f in [&heat, &band, &gauss] {
                let back = plan.inverse(&plan.forward(f)?)?;
                worst_rt = worst_rt.max(back.sup_distance(f) / f.max_abs());
            }
            let ratios = [
                plan.parseval_ratio(&heat)?,
                plan.parseval_ratio(&band)?,
                plan.parseval_ratio(&gauss)?,
            ];
            let mean = ratios.iter().sum::<f64>() / 3.0;
            for r in ratios {
                worst_spread = worst_spread.max(((r - mean) / mean).abs());
            }
        }
        Ok((
            worst_rt < 1e-6 && worst_spread < 1e-6,
            format!("round trip {worst_rt:.2e}, Parseval spread {worst_spread:.2e} (tol 1e-6)"),
        ))
    };
    finish(3, "transform round trip/Parseval", start, run())
}

/// Criterion 4: slice projection F(Ab f) = fhat to 1e-5 sup over
/// lambda in [0, 10] for the heat kernel on H2 and H3, and the Abel image
/// of the heat kernel matches e^{-s rho^2} (4 pi s)^{-1/2} e^{-t^2/(4s)}
/// to 1e-5.
pub fn criterion_4() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let s = 0.5;
        let mut worst_slice: f64 = 0.0;
        let mut worst_gauss: f64 = 0.0;
        for plan in [h3_plan(), h2_plan()] {
            let h = plan.heat_kernel(s)?;
            let a = abel_transform(&h)?;
            let rho = plan.params().rho();
            let norm = (-s * rho * rho).exp() / (4.0 * std::f64::consts::PI * s).sqrt();
            for (&x, v) in a.nodes().iter().zip(a.values()) {
                let expect = norm * (-x * x / (4.0 * s)).exp();
                worst_gauss = worst_gauss.max((v.re - expect).abs() / norm);
            }
            let lambdas: Vec<f64> = (0..=400).map(|k| 0.025 * k as f64).collect();
            let ft = euclidean_ft(&a, &lambdas)?;
            let hhat = plan.forward(&h)?;
            let scale = hhat.values()[0].norm();
            for (k, &l) in lambdas.iter().enumerate() {
                let j = (l / plan.spectral_grid().step()).round() as usize;
                worst_slice = worst_slice.max((ft[k] - hhat.values()[j]).norm() / scale);
            }
        }
        Ok((
            worst_slice < 1e-5 && worst_gauss < 1e-5,
            format!("slice projection {worst_slice:.2e}, Gaussian law {worst_gauss:.2e} (tol 1e-5)"),
        ))
    };
    finish(4, "Abel slice projection", start, run())
}

/// Criterion 5: heat semigroup h_s * h_u = h_{s+u} to 1e-6 and the
/// multiplier round trip fwd(h_s) = e^{-s(lambda^2+rho^2)} to 1e-6.
pub fn criterion_5() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let mut worst_semi: f64 = 0.0;
        let mut worst_mult: f64 = 0.0;
        for plan in [h3_plan(), h2_plan()] {
            let (s, u) = (0.2, 0.3);
            let hs = plan.heat_kernel(s)?;
            let hu = plan.heat_kernel(u)?;
            let hsu = plan.heat_kernel(s + u)?;
            let conv = plan.convolve(&hs, &hu)?;
            worst_semi = worst_semi.max(conv.sup_distance(&hsu) / hsu.max_abs());

            let rho = plan.params().rho();
            let hhat = plan.forward(&hs)?;
            for (j, &l) in plan.spectral_grid().nodes().iter().enumerate() {
                let expect = (-s * (l * l + rho * rho)).exp();
                worst_mult = worst_mult.max((hhat.values()[j].re - expect).abs());
            }
        }
        Ok((
            worst_semi < 1e-6 && worst_mult < 1e-6,
            format!("semigroup {worst_semi:.2e}, multiplier {worst_mult:.2e} (tol 1e-6)"),
        ))
    };
    finish(5, "heat semigroup", start, run())
}

/// Criterion 6: membership verdicts mirror the paper (bounded: e^{-rho t},
/// phi_1; diverging: t e^{-rho t}, phi_0, the lambda-derivative of phi) and
/// the weak norm of e^{-rho t} approaches (2 rho)^{-1/2} within 1% under
/// sweep refinement.
pub fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let params = SpaceParams::h3();
        let grid = h3_plan().radial_grid();
        let rho = params.rho();
        let sweep = [10.0, 15.0, 20.0, 25.0];
        let mut verdicts = Vec::new();

        let decay = RadialFunction::from_real_fn(Arc::clone(grid), move |t| (-rho * t).exp())?;
        verdicts.push((weak_l2_membership(&decay, &sweep)?.verdict, Verdict::Bounded));
        let poly = RadialFunction::from_real_fn(Arc::clone(grid), move |t| t * (-rho * t).exp())?;
        verdicts.push((weak_l2_membership(&poly, &sweep)?.verdict, Verdict::Diverging));
        let phi0 = phi_ode(params, Complex64::default(), grid)?;
        verdicts.push((weak_l2_membership(&phi0, &sweep)?.verdict, Verdict::Diverging));
        let phi1 = phi_ode(params, Complex64::new(1.0, 0.0), grid)?;
        verdicts.push((weak_l2_membership(&phi1, &sweep)?.verdict, Verdict::Bounded));
        let dphi = phi_lambda_derivative(params, 1.0, 1, grid)?;
        verdicts.push((weak_l2_membership(&dphi.f, &sweep)?.verdict, Verdict::Diverging));
        let verdicts_ok = verdicts.iter().all(|(got, want)| got == want);

        // closed-form weak norm under sweep refinement, both rho values
        let mut worst_norm: f64 = 0.0;
        for rho in [0.5, 1.0] {
            let window = WeightedHalfLine::exponential_window(rho, 1.0, 30.0 / rho.max(0.75), 4001)?;
            let f: Vec<Complex64> = window
                .nodes()
                .iter()
                .map(|&t| Complex64::new((-rho * t).exp(), 0.0))
                .collect();
            let expect = (2.0 * rho).powf(-0.5);
            for levels in [512, 1024] {
                let r = lorentz_quasinorm_swept(&f, &window, 2.0, LorentzQ::Infinity, levels)?;
                worst_norm = worst_norm.max(((r.value - expect) / expect).abs());
            }
        }
        Ok((
            verdicts_ok && worst_norm < 0.01,
            format!(
                "verdicts {}, closed-form norm error {worst_norm:.2e} (tol 1%)",
                if verdicts_ok { "all match" } else { "MISMATCH" }
            ),
        ))
    };
    finish(6, "norm memberships", start, run())
}

/// Criterion 7: five band scenarios on H2 and H3 at N = 40 recover the band
/// edges within max(5% of alpha, 2 spectral steps), every report satisfies
/// c1 c2 >= 1 - 1e-2, under 60 s per scenario.
pub fn criterion_7() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let mut worst_alpha: f64 = 0.0;
        let mut worst_beta: f64 = 0.0;
        let mut min_product = f64::INFINITY;
        let mut slowest: f64 = 0.0;
        let mut all_ok = true;
        for plan in [h3_plan(), h2_plan()] {
            let step = plan.spectral_grid().step();
            let bands = [
                (0.5, 1.0),
                (1.0, 2.0),
                (2.0, 3.0),
                (0.0, 2.0),
                (3.0, 3.0 + 20.0 * step),
            ];
            for &(beta, alpha) in &bands {
                let t0 = Instant::now();
                let profile = SpectralProfile::new(beta, alpha, ProfileShape::RaisedCosine)?;
                let (_, fhat) = synthesize_bandlimited(&profile, plan)?;
                let seq = norm_sequence(&fhat, plan, 40, NormTag::WeakL2)?;
                let limit = estimate_limits(&seq)?;
                let report = classify(&limit, 40, plan.params(), NormTag::WeakL2, step, None)?;
                let tol = (0.05 * alpha).max(2.0 * step);
                let da = (report.alpha - alpha).abs();
                let db = (report.beta - beta).abs();
                worst_alpha = worst_alpha.max(da / tol);
                worst_beta = worst_beta.max(db / tol);
                min_product = min_product.min(report.c1 * report.c2);
                slowest = slowest.max(t0.elapsed().as_secs_f64());
                if da > tol || db > tol {
                    all_ok = false;
                }
            }
        }
        let ok = all_ok && min_product >= 1.0 - 1e-2 && slowest < 60.0;
        Ok((
            ok,
            format!(
                "edge errors <= {:.0}%/{:.0}% of tolerance, min c1c2 = {min_product:.4}, slowest {slowest:.1}s",
                100.0 * worst_alpha,
                100.0 * worst_beta
            ),
        ))
    };
    finish(7, "band support recovery", start, run())
}

/// Criterion 8: the eigenfunction case. phi_alpha gives a constant sequence
/// (1e-6) classified as the eigenfunction sphere with c1 = alpha^2 + rho^2
/// (1e-3), and the H2 Poisson transform of cos(theta) passes the 2-D eigen
/// residual at 1e-4 with bounded weak-type truncation diagnostics.
pub fn criterion_8() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let params = SpaceParams::h3();
        let grid = h3_plan().radial_grid();
        let alpha = 1.0;
        let phi = phi_ode(params, Complex64::new(alpha, 0.0), grid)?;
        let m = params.multiplier(alpha);
        let seq = norm_sequence_modal(&[(phi, Complex64::new(m, 0.0))], 40, NormTag::WeakL2)?;
        let spread = seq
            .log_a
            .iter()
            .map(|a| (a - m.ln()).abs())
            .fold(0.0, f64::max);
        let limit = estimate_limits(&seq)?;
        let report = classify(
            &limit,
            40,
            params,
            NormTag::WeakL2,
            h3_plan().spectral_grid().step(),
            None,
        )?;
        let eigen_ok = spread < 1e-6
            && report.classification == Classification::EigenfunctionSphere
            && (report.c1 - m).abs() < 1e-3;

        // Poisson side on H2
        let h2 = SpaceParams::h2();
        let g2 = h2_plan().radial_grid();
        let lambda = 1.0;
        let f = BoundaryFunction::from_fn(512, |th| Complex64::new(th.cos(), 0.0))?;
        let p = poisson_transform_2d(h2, lambda, &f, g2)?;
        let residual = eigen_residual_2d(&p, lambda)?;
        let kq = kpq_functional(&p, 2.0)?;
        let sweep = [10.0, 15.0, 20.0, 25.0];
        let norms: Vec<f64> = sweep
            .iter()
            .map(|&tc| polar_weak_l2(&p, tc))
            .collect::<crate::Result<_>>()?;
        let tail = &norms[norms.len() / 2..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let spread_p =
            (tail.iter().fold(0.0_f64, |a, &b| a.max(b)) - tail.iter().fold(f64::INFINITY, |a, &b| a.min(b))) / mean;
        let poisson_ok = residual < 1e-4 && kq.is_finite() && kq > 0.0 && spread_p <= 0.02;
        Ok((
            eigen_ok && poisson_ok,
            format!(
                "sequence spread {spread:.2e}, c1 = {:.6}, 2-D residual {residual:.2e}, K_2q = {kq:.4}, truncation spread {spread_p:.2e}",
                report.c1
            ),
        ))
    };
    finish(8, "eigenfunction degeneracy", start, run())
}

/// Criterion 9: phi_0 collapse dichotomy: invalid under weak-L2 with a
/// diverging membership verdict; constant at rho^2 and valid under the
/// weighted norm.
pub fn criterion_9() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let mut weak = ScenarioConfig {
            scenario: ScenarioTag::CollapseWeak,
            powers: 40,
            ..ScenarioConfig::default()
        };
        weak.norm = NormTag::WeakL2;
        let wb = run_scenario(&weak)?;
        let wr = wb.report.as_ref().expect("collapse-weak report");
        let weak_ok = wr.classification == Classification::InvalidCollapse
            && wb.input_membership.verdict == Verdict::Diverging;

        let weighted = ScenarioConfig {
            scenario: ScenarioTag::CollapseWeighted,
            powers: 40,
            norm: NormTag::WeightedM(1),
            ..ScenarioConfig::default()
        };
        let gb = run_scenario(&weighted)?;
        let gr = gb.report.as_ref().expect("collapse-weighted report");
        let rho_sq: f64 = 1.0;
        let const_dev = gb
            .sequence
            .log_a
            .iter()
            .map(|a| (a - rho_sq.ln()).abs())
            .fold(0.0, f64::max);
        let weighted_ok = gr.classification == Classification::EigenfunctionSphere
            && (gr.c1 - rho_sq).abs() < 1e-3
            && const_dev < 1e-6;
        Ok((
            weak_ok && weighted_ok,
            format!(
                "weak: {:?}/{:?}; weighted: {:?} with c1 = {:.6}, constancy {const_dev:.2e}",
                wr.classification, wb.input_membership.verdict, gr.classification, gr.c1
            ),
        ))
    };
    finish(9, "collapse dichotomy", start, run())
}

/// Criterion 10: the generalized eigenfunction residuals on H3 for
/// lambda_0 in {1, 2}: (L + mu^2)^2 annihilates the lambda-derivative below
/// 1e-3 while the single application equals -2 lambda_0 phi, visibly nonzero.
pub fn criterion_10() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        let params = SpaceParams::h3();
        let grid = h3_plan().radial_grid();
        let mut worst_annihilation: f64 = 0.0;
        let mut worst_identity: f64 = 0.0;
        let mut min_single = f64::INFINITY;
        for &lambda0 in &[1.0, 2.0] {
            let r = generalized_eigen_residual(params, lambda0, 1, grid)?;
            worst_annihilation = worst_annihilation.max(r.annihilation);
            worst_identity = worst_identity.max(r.single_vs_identity.unwrap());
            min_single = min_single.min(r.single_application);
        }
        Ok((
            worst_annihilation < 1e-3 && min_single > 0.1 && worst_identity < 1e-3,
            format!(
                "annihilation {worst_annihilation:.2e} (tol 1e-3), single app >= {min_single:.2}, identity gap {worst_identity:.2e}"
            ),
        ))
    };
    finish(10, "generalized eigenfunction", start, run())
}

/// Criterion 11: the L^{p,q} counterexample: a conjugate pair of complex
/// frequencies on |lambda^2+rho^2| = delta gives c1 c2 = 1 under the
/// truncated Lorentz(1.5) norm while the single-application eigen residual
/// stays order one.
pub fn criterion_11() -> CriterionResult {
    let start = Instant::now();
    let run = || -> crate::Result<(bool, String)> {
        // the modal norms oscillate with period 2 pi / theta in n, so the
        // extrapolation window must cover several periods
        let config = ScenarioConfig {
            scenario: ScenarioTag::CounterexampleLpq,
            powers: 120,
            norm: NormTag::Lorentz {
                p: 1.5,
                q: LorentzQ::Infinity,
            },
            ..ScenarioConfig::default()
        };
        let bundle = run_scenario(&config)?;
        let diag = bundle.counterexample.expect("counterexample diagnostics");
        Ok((
            diag.eigen_residual > 0.1 && diag.log_c1c2.abs() < 0.05,
            format!(
                "eigen residual {:.3} (> 0.1), |log c1 c2| = {:.4} (< 0.05), lambda = {:.4}+{:.4}i",
                diag.eigen_residual, diag.log_c1c2.abs(), diag.lambda1.0, diag.lambda1.1
            ),
        ))
    };
    finish(11, "Lorentz counterexample", start, run())
}

/// Runs the full battery in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ]
}
