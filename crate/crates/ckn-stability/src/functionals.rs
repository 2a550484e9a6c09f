//! Weighted norms, inequality deficits, pointwise kernels, Euler–Lagrange
//! residuals, and the radial second-order identity.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::numerics::{
    integrate_axisym, integrate_radial, sphere_area, QuadratureSpec, TailCutoff,
};
use crate::params::{Ckn2Params, CknParams, FirstOrderRegime};
use crate::profile::{minimizer_profile, MinimizerPoint, TestFunction};
use crate::Scalar;

/// The three weighted norms of a first-order function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormTriple {
    pub h_b: Scalar,
    pub l_a: Scalar,
    pub l_c: Scalar,
    pub err_est: Scalar,
}

/// The three weighted seminorms of a second-order function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Norm2Triple {
    pub dl_b: Scalar,
    pub h_a: Scalar,
    pub h_c: Scalar,
    pub err_est: Scalar,
}

/// First-order deficits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DeficitReport {
    pub norms: NormTriple,
    pub delta: Scalar,
    pub delta_tilde: Scalar,
    pub regime: FirstOrderRegime,
}

/// Second-order deficits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Deficit2Report {
    pub norms: Norm2Triple,
    pub sigma: Scalar,
    pub sigma_tilde: Scalar,
}

/// `|x|^{p-2} x`, the odd power appearing in all duality pairings.
#[inline]
pub(crate) fn odd_pow(x: Scalar, p_minus_2: Scalar) -> Scalar {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p_minus_2) * x
    }
}

/// How to truncate when merging support hints from several functions.
#[derive(Clone, Copy)]
pub(crate) enum SupportMode {
    /// Sums/differences: the integrand lives on the union of supports.
    Union,
    /// Products: the integrand lives on the intersection.
    Intersection,
}

/// Derive a quadrature policy for integrands built from the given functions:
/// their non-smooth radii become split points and finite supports become a
/// hard tail cutoff.
pub(crate) fn hinted_spec(
    base: &QuadratureSpec,
    hints: &[&TestFunction],
    mode: SupportMode,
) -> QuadratureSpec {
    let mut spec = base.clone();
    let uppers = hints.iter().map(|h| h.support().1);
    let cutoff = match mode {
        SupportMode::Union => {
            let m = uppers.fold(0.0 as Scalar, Scalar::max);
            m.is_finite().then_some(m)
        }
        SupportMode::Intersection => {
            let m = uppers.fold(Scalar::INFINITY, Scalar::min);
            m.is_finite().then_some(m)
        }
    };
    if let Some(r) = cutoff {
        let r = r * (1.0 + 1e-9) + 1e-300;
        spec.tail_cutoff = match spec.tail_cutoff {
            TailCutoff::FixedR(r0) => TailCutoff::FixedR(r0.min(r)),
            TailCutoff::ExpDecayBound => TailCutoff::FixedR(r),
        };
    }
    let mut splits = spec.split_points.clone();
    for h in hints {
        splits.extend(h.edges().iter().copied().filter(|e| *e > 1e-12 && e.is_finite()));
    }
    splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
    splits.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    spec.split_points = splits;
    spec
}

/// Which field of the function enters the integrand.
#[derive(Clone, Copy, PartialEq)]
pub(crate) enum NormKind {
    Value,
    Gradient,
    Laplacian,
}

/// Weighted seminorm `( int |x|^{-p w} |D u|^p dx )^{1/p}` with `D` selected
/// by `kind`. Returns the norm and a propagated error estimate.
pub(crate) fn weighted_norm(
    u: &TestFunction,
    kind: NormKind,
    weight: Scalar,
    p: Scalar,
    n_dim: u32,
    base: &QuadratureSpec,
) -> Result<(Scalar, Scalar)> {
    let spec = hinted_spec(base, &[u], SupportMode::Union);
    let volume: Scalar = sphere_area(n_dim);
    let integral = match u {
        TestFunction::Radial(parts) => {
            let wexp = n_dim as Scalar - 1.0 - p * weight;
            let f: Box<dyn Fn(Scalar) -> Scalar> = match kind {
                NormKind::Value => {
                    let g = parts.u.clone();
                    Box::new(move |r: Scalar| g(r).abs().powf(p))
                }
                NormKind::Gradient => {
                    let g = parts.du.clone();
                    Box::new(move |r: Scalar| g(r).abs().powf(p))
                }
                NormKind::Laplacian => {
                    let du = parts.du.clone();
                    let d2 = parts
                        .d2u
                        .clone()
                        .ok_or(CknError::MissingSecondDerivative)?;
                    let nm1 = n_dim as Scalar - 1.0;
                    Box::new(move |r: Scalar| (d2(r) + nm1 * du(r) / r).abs().powf(p))
                }
            };
            let i = integrate_radial(|r| f(r), wexp, &spec)?;
            crate::numerics::Integral { value: volume * i.value, err: volume * i.err }
        }
        TestFunction::Axisymmetric(_) => {
            if kind == NormKind::Laplacian {
                return Err(CknError::MissingSecondDerivative);
            }
            let uu = u.clone();
            let g = move |rho: Scalar, z: Scalar| {
                // hypot keeps the weight finite where rho^2 + z^2 underflows
                let s = rho.hypot(z);
                let mag = match kind {
                    NormKind::Value => uu.axi_value(rho, z).abs(),
                    _ => {
                        let (gr, gz) = uu.axi_grad(rho, z);
                        gr.hypot(gz)
                    }
                };
                mag.powf(p) * s.powf(-p * weight)
            };
            integrate_axisym(g, n_dim, &spec)?
        }
    };
    if integral.value < 0.0 {
        return Err(CknError::NonConvergence(
            "weighted norm integral came out negative".into(),
        ));
    }
    let norm = integral.value.powf(1.0 / p);
    let err = if integral.value > 0.0 {
        norm * integral.err / (p * integral.value)
    } else {
        integral.err.powf(1.0 / p)
    };
    Ok((norm, err))
}

/// The `(H_b, L_a, L_c)` norms of `u` under the first-order parameters.
pub fn norms_first_order(
    u: &TestFunction,
    params: &CknParams,
    spec: &QuadratureSpec,
) -> Result<NormTriple> {
    let (h_b, e1) = weighted_norm(u, NormKind::Gradient, params.b, params.p, params.n_dim, spec)?;
    let (l_a, e2) = weighted_norm(u, NormKind::Value, params.a, params.p, params.n_dim, spec)?;
    let (l_c, e3) = weighted_norm(u, NormKind::Value, params.c, params.p, params.n_dim, spec)?;
    Ok(NormTriple { h_b, l_a, l_c, err_est: e1 + e2 + e3 })
}

/// The `(||Delta u||_{L_b}, ||u||_{H_a}, ||u||_{H_c})` seminorms of a radial
/// `u` under the second-order parameters.
pub fn norms_second_order(
    u: &TestFunction,
    params2: &Ckn2Params,
    spec: &QuadratureSpec,
) -> Result<Norm2Triple> {
    if !u.is_radial() {
        return Err(CknError::InvalidInput(
            "second-order norms are defined here for radial functions".into(),
        ));
    }
    let (dl_b, e1) =
        weighted_norm(u, NormKind::Laplacian, params2.b, params2.p, params2.n_dim, spec)?;
    let (h_a, e2) =
        weighted_norm(u, NormKind::Gradient, params2.a, params2.p, params2.n_dim, spec)?;
    let (h_c, e3) =
        weighted_norm(u, NormKind::Gradient, params2.c2, params2.p, params2.n_dim, spec)?;
    Ok(Norm2Triple { dl_b, h_a, h_c, err_est: e1 + e2 + e3 })
}

fn check_denominator(den: Scalar, others: Scalar) -> Result<()> {
    if den < 1e-12 * others.max(1e-300) {
        return Err(CknError::ZeroDenominator(format!(
            "normalizing norm {den} vanishes relative to scale {others}"
        )));
    }
    Ok(())
}

/// First-order deficit and its stronger sum-form companion.
pub fn deficit(u: &TestFunction, params: &CknParams, spec: &QuadratureSpec) -> Result<DeficitReport> {
    let norms = norms_first_order(u, params, spec)?;
    check_denominator(norms.l_c, norms.h_b.max(norms.l_a))?;
    let p = params.p;
    let lcp = norms.l_c.powf(p);
    let delta = norms.h_b * norms.l_a.powf(p - 1.0) / lcp - params.s_const;
    let delta_tilde =
        (norms.h_b.powf(p) + (p - 1.0) * norms.l_a.powf(p)) / lcp - p * params.s_const;
    Ok(DeficitReport { norms, delta, delta_tilde, regime: params.regime })
}

/// Second-order deficit and its stronger companion.
pub fn deficit2(
    u: &TestFunction,
    params2: &Ckn2Params,
    spec: &QuadratureSpec,
) -> Result<Deficit2Report> {
    let norms = norms_second_order(u, params2, spec)?;
    check_denominator(norms.h_c, norms.dl_b.max(norms.h_a))?;
    let p = params2.p;
    let hcp = norms.h_c.powf(p);
    let sigma = norms.dl_b * norms.h_a.powf(p - 1.0) / hcp - params2.k_const;
    let sigma_tilde =
        (norms.dl_b.powf(p) + (p - 1.0) * norms.h_a.powf(p)) / hcp - p * params2.k_const;
    Ok(Deficit2Report { norms, sigma, sigma_tilde })
}

// ---------------------------------------------------------------------------
// Pointwise kernels.
// ---------------------------------------------------------------------------

/// `R_p(s, t) = |t|^p + (p-1)|s|^p - p|s|^{p-2} s t`; nonnegative for `p >= 2`
/// and zero exactly on the diagonal.
pub fn rp_kernel(s: Scalar, t: Scalar, p: Scalar) -> Scalar {
    if s == t {
        return 0.0;
    }
    t.abs().powf(p) + (p - 1.0) * s.abs().powf(p) - p * odd_pow(s, p - 2.0) * t
}

/// Calibrated constants of the vector inequalities and the kernel bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelConstants {
    pub p: Scalar,
    pub kappa: Scalar,
    pub c0: Scalar,
    pub c1: Scalar,
    pub m_p: Scalar,
    /// Sample count and seed used for the calibration, kept for
    /// reproducibility.
    pub samples: u64,
    pub seed: u64,
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_v(a: &[Scalar]) -> Scalar {
    dot(a, a).sqrt()
}

/// Auxiliary vector of the strengthened convexity inequality: `y` itself when
/// `|y| <= |y+z|`, otherwise `y+z` shrunk onto the sphere of radius
/// `|y+z| (|y+z|/|y|)^{1/(p-2)} / |y+z|`.
fn w_vector(y: &[Scalar], ypz: &[Scalar], p: Scalar) -> Vec<Scalar> {
    let ny = norm_v(y);
    let nypz = norm_v(ypz);
    if ny <= nypz {
        y.to_vec()
    } else {
        let f = (nypz / ny).powf(1.0 / (p - 2.0));
        ypz.iter().map(|v| f * v).collect()
    }
}

/// Slack of inequality (lower form) at `(y, z)` with the `c0|z|^p` remainder:
/// nonnegative when the inequality holds.
fn lower_slack(y: &[Scalar], z: &[Scalar], p: Scalar, kappa: Scalar, c0: Scalar) -> Scalar {
    let ypz: Vec<Scalar> = y.iter().zip(z).map(|(a, b)| a + b).collect();
    let (ny, nz, nypz) = (norm_v(y), norm_v(z), norm_v(&ypz));
    let w = w_vector(y, &ypz, p);
    let nw = norm_v(&w);
    nypz.powf(p)
        - ny.powf(p)
        - p * ny.powf(p - 2.0) * dot(y, z)
        - (1.0 - kappa) / 2.0
            * (p * ny.powf(p - 2.0) * nz * nz
                + p * (p - 2.0) * nw.powf(p - 2.0) * (ny - nypz).powi(2))
        - c0 * nz.powf(p)
}

/// Slack of the scalar upper inequality at `(a, b)`: nonnegative when it holds.
fn upper_slack(a: Scalar, b: Scalar, p: Scalar, kappa: Scalar, c1: Scalar) -> Scalar {
    a.abs().powf(p)
        + p * odd_pow(a, p - 2.0) * b
        + (p * (p - 1.0) / 2.0 + kappa) * a.abs().powf(p - 2.0) * b * b
        + c1 * b.abs().powf(p)
        - (a + b).abs().powf(p)
}

fn sample_direction(rng: &mut impl Rng, dim: usize) -> Vec<Scalar> {
    loop {
        let v: Vec<Scalar> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm_v(&v);
        if n > 1e-3 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Calibrate `(c0, c1)` for the vector inequalities at `(p, kappa)` by
/// sampling, and the kernel lower-bound constant `m_p` by a dense scan. The
/// constants carry 5% margins so fresh samples satisfy the inequalities.
pub fn calibrate_kernel_constants(
    p: Scalar,
    kappa: Scalar,
    n_samples: u64,
    seed: u64,
) -> Result<KernelConstants> {
    if !(p > 2.0) {
        return Err(CknError::InvalidInput("vector inequalities need p > 2".into()));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(CknError::InvalidInput("kappa must lie in (0, 1)".into()));
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut q0_min = Scalar::INFINITY;
    let mut q1_max = Scalar::NEG_INFINITY;
    for i in 0..n_samples {
        let dim = 1 + (i % 3) as usize;
        let mag = 10.0f64.powf(rng.gen_range(-3.0..3.0));
        let dir_y = sample_direction(&mut rng, dim);
        let y: Vec<Scalar> = dir_y.iter().map(|v| v * mag).collect();
        // |z| = 1: both quotients are homogeneous of degree p
        let z = match i % 5 {
            // targeted extremal configurations
            0 => dir_y.clone(),
            1 => dir_y.iter().map(|v| -v).collect(),
            2 => {
                // near-cancellation: z close to -y on the unit sphere
                let t: Scalar = rng.gen_range(-5e-2..5e-2);
                let mut z = sample_direction(&mut rng, dim);
                for (zk, yk) in z.iter_mut().zip(&dir_y) {
                    *zk = -yk + t * *zk;
                }
                let n = norm_v(&z);
                z.iter().map(|v| v / n).collect()
            }
            _ => sample_direction(&mut rng, dim),
        };
        let q0 = lower_slack(&y, &z, p, kappa, 0.0);
        if q0 < q0_min {
            q0_min = q0;
        }
        let a = if rng.gen_bool(0.5) { mag } else { -mag };
        let b = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let q1 = upper_slack(a, b, p, kappa, 0.0);
        if -q1 > q1_max {
            q1_max = -q1;
        }
    }
    if !(q0_min > 0.0) {
        return Err(CknError::NonConvergence(format!(
            "lower inequality has no positive remainder margin at p={p}, kappa={kappa}: {q0_min}"
        )));
    }
    let c0 = 0.95 * q0_min;
    let c1 = 1.05 * q1_max.max(1e-12);

    // Kernel bound: the quotient R_p(s,t)/|s-t|^p is scale-invariant, so scan
    // the unit circle densely and polish the minimum by golden section.
    let ratio = |theta: Scalar| -> Scalar {
        let (s, t) = (theta.cos(), theta.sin());
        if (s - t).abs() < 1e-9 {
            return Scalar::INFINITY;
        }
        rp_kernel(s, t, p) / (s - t).abs().powf(p)
    };
    let n_scan = 200_000;
    let mut best_theta = 0.0;
    let mut m_p = Scalar::INFINITY;
    for i in 0..n_scan {
        let theta = 2.0 * std::f64::consts::PI * i as Scalar / n_scan as Scalar;
        let v = ratio(theta);
        if v < m_p {
            m_p = v;
            best_theta = theta;
        }
    }
    let h = 2.0 * std::f64::consts::PI / n_scan as Scalar;
    if let Ok(r) =
        crate::numerics::minimize_scalar(ratio, (best_theta - 2.0 * h, best_theta + 2.0 * h), 1e-13)
    {
        if r.value < m_p {
            m_p = r.value;
        }
    }
    // random box samples participate in the same minimum
    for _ in 0..n_samples {
        let s: Scalar = rng.gen_range(-10.0..10.0);
        let t: Scalar = rng.gen_range(-10.0..10.0);
        if (s - t).abs() < 1e-6 {
            continue;
        }
        let v = rp_kernel(s, t, p) / (s - t).abs().powf(p);
        if v < m_p {
            m_p = v;
        }
    }
    if !(m_p > 0.0 && m_p < 1.0) {
        return Err(CknError::NonConvergence(format!(
            "kernel bound m_p out of (0,1): {m_p}"
        )));
    }
    Ok(KernelConstants { p, kappa, c0, c1, m_p, samples: n_samples, seed })
}

/// Verdict of the two vector inequalities at one `(y, z)` pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FzCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub lower_slack: Scalar,
    pub upper_slack: Scalar,
}

/// Check the lower vector inequality at `(y, z)` and the scalar upper
/// inequality at the collinear shadow `(|y|, +-|z|)`, with the calibrated
/// remainder constants.
pub fn fz_inequalities(y: &[Scalar], z: &[Scalar], consts: &KernelConstants) -> FzCheck {
    let (p, kappa) = (consts.p, consts.kappa);
    let ls = lower_slack(y, z, p, kappa, consts.c0);
    let b_sign = if dot(y, z) < 0.0 { -1.0 } else { 1.0 };
    let us = upper_slack(norm_v(y), b_sign * norm_v(z), p, kappa, consts.c1);
    let scale = norm_v(y).powf(p) + norm_v(z).powf(p) + 1e-30;
    FzCheck {
        lower_ok: ls >= -1e-12 * scale,
        upper_ok: us >= -1e-12 * scale,
        lower_slack: ls,
        upper_slack: us,
    }
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residuals and the second-order identity.
// ---------------------------------------------------------------------------

/// Signed weak-form residual together with the scale of its constituent terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ElResidual {
    pub residual: Scalar,
    /// Sum of the absolute values of the three terms; residuals are judged
    /// relative to it.
    pub scale: Scalar,
}

/// Weak residual of the first-order optimality equation of the family member
/// `v` tested against `phi`.
pub fn el_residual(
    params: &CknParams,
    pt: &MinimizerPoint,
    phi: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<ElResidual> {
    let v = minimizer_profile(params, pt)?;
    let vp = v.radial()?;
    let fp = phi.radial()?;
    let (n, p, lam) = (params.n_dim as Scalar, params.p, pt.lambda);
    let volume: Scalar = sphere_area(params.n_dim);
    let qspec = hinted_spec(spec, &[&v, phi], SupportMode::Intersection);
    let pm2 = p - 2.0;

    let (vd, fd) = (vp.du.clone(), fp.du.clone());
    let grad = integrate_radial(
        |r: Scalar| odd_pow(vd(r), pm2) * fd(r),
        n - 1.0 - p * params.b,
        &qspec,
    )?;
    let (vu, fu) = (vp.u.clone(), fp.u.clone());
    let mass_a = integrate_radial(
        |r: Scalar| odd_pow(vu(r), pm2) * fu(r),
        n - 1.0 - p * params.a,
        &qspec,
    )?;
    let (vu2, fu2) = (vp.u.clone(), fp.u.clone());
    let mass_c = integrate_radial(
        |r: Scalar| odd_pow(vu2(r), pm2) * fu2(r),
        n - 1.0 - p * params.c,
        &qspec,
    )?;

    let t1 = volume * grad.value;
    let t2 = (p - 1.0) * lam.powf(p) * volume * mass_a.value;
    let t3 = -p * params.s_const * lam.powf(p - 1.0) * volume * mass_c.value;
    Ok(ElResidual {
        residual: t1 + t2 + t3,
        scale: t1.abs() + t2.abs() + t3.abs(),
    })
}

/// Weak residual of the second-order optimality equation: the fourth-order
/// term is tested as `int |x|^{-pb} |Dv|^{p-2} Dv * Dphi` (two integrations by
/// parts), the divergence terms against the gradient of `phi`.
pub fn el_residual2(
    params2: &Ckn2Params,
    pt: &MinimizerPoint,
    phi: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<ElResidual> {
    let v = crate::profile::second_minimizer_profile(params2, pt, spec)?;
    let vp = v.radial()?;
    let fp = phi.radial()?;
    let fd2 = fp.d2u.clone().ok_or(CknError::MissingSecondDerivative)?;
    let vd2 = vp.d2u.clone().expect("family profile carries d2u");
    let (n, p, lam) = (params2.n_dim as Scalar, params2.p, pt.lambda);
    let volume: Scalar = sphere_area(params2.n_dim);
    let qspec = hinted_spec(spec, &[&v, phi], SupportMode::Intersection);
    let pm2 = p - 2.0;

    let (vd, fd) = (vp.du.clone(), fp.du.clone());
    let lap = integrate_radial(
        |r: Scalar| {
            let lv = vd2(r) + (n - 1.0) * vd(r) / r;
            let lf = fd2(r) + (n - 1.0) * fd(r) / r;
            odd_pow(lv, pm2) * lf
        },
        n - 1.0 - p * params2.b,
        &qspec,
    )?;
    let (vda, fda) = (vp.du.clone(), fp.du.clone());
    let grad_a = integrate_radial(
        |r: Scalar| odd_pow(vda(r), pm2) * fda(r),
        n - 1.0 - p * params2.a,
        &qspec,
    )?;
    let (vdc, fdc) = (vp.du.clone(), fp.du.clone());
    let grad_c = integrate_radial(
        |r: Scalar| odd_pow(vdc(r), pm2) * fdc(r),
        n - 1.0 - p * params2.c2,
        &qspec,
    )?;

    let t1 = volume * lap.value;
    let t2 = (p - 1.0) * lam.powf(p) * volume * grad_a.value;
    let t3 = -p * params2.k_const * lam.powf(p - 1.0) * volume * grad_c.value;
    Ok(ElResidual {
        residual: t1 + t2 + t3,
        scale: t1.abs() + t2.abs() + t3.abs(),
    })
}

/// Both sides of the exact second-order identity for radial `u` (for which
/// the angular term vanishes identically).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Identity2 {
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub err_est: Scalar,
}

/// Evaluate the deficit side and the kernel side of the second-order identity
/// for radial `u`. The rate `lambda` is the ratio of the two seminorms and is
/// recomputed from `u` on every call; the identity fails otherwise.
pub fn identity2_sides(
    u: &TestFunction,
    params2: &Ckn2Params,
    spec: &QuadratureSpec,
) -> Result<Identity2> {
    let norms = norms_second_order(u, params2, spec)?;
    check_denominator(norms.h_a, norms.dl_b)?;
    let p = params2.p;
    let lam = norms.dl_b / norms.h_a;
    let lhs = norms.dl_b * norms.h_a.powf(p - 1.0) - params2.k_const * norms.h_c.powf(p);

    let parts = u.radial()?;
    let du = parts.du.clone();
    let d2 = parts.d2u.clone().ok_or(CknError::MissingSecondDerivative)?;
    let n = params2.n_dim as Scalar;
    let (a, b) = (params2.a, params2.b);
    let volume: Scalar = sphere_area(params2.n_dim);
    let qspec = hinted_spec(spec, &[u], SupportMode::Union);
    let lam_s = lam.powf(1.0 / p);
    let lam_t = lam.powf(-(p - 1.0) / p);
    let kernel = integrate_radial(
        |r: Scalar| {
            let s = -lam_s * r.powf(b - a) * du(r);
            let t = lam_t * (d2(r) + (n - 1.0) * du(r) / r);
            rp_kernel(s, t, p)
        },
        n - 1.0 - p * b,
        &qspec,
    )?;
    let rhs = volume * kernel.value / p;
    Ok(Identity2 {
        lhs,
        rhs,
        err_est: norms.err_est + volume * kernel.err / p,
    })
}
