//! Distance to the minimizer manifolds and the alignment functionals, plus
//! the manifold-distance objectives used by the stability experiments.
//!
//! All searches run over `(k, log lambda)`: the inner scale `k` is solved
//! exactly (quadratic norms) or by safeguarded Newton on a strictly convex
//! 1D problem, and the outer rate by bracketed golden/parabolic search from
//! deterministic multi-start seeds. Candidates merge by smallest objective,
//! then smallest `|log lambda|`.

use serde::Serialize;

use crate::error::{CknError, Result};
use crate::functionals::{hinted_spec, odd_pow, weighted_norm, NormKind, SupportMode};
use crate::numerics::{
    integrate_axisym, integrate_radial, minimize_2d, minimize_scalar, sphere_area, QuadratureSpec,
};
use crate::params::{Ckn2Params, CknParams};
use crate::profile::{
    family_of, minimizer_profile, second_minimizer_profile, Family, MinimizerPoint, TestFunction,
};
use crate::Scalar;

/// Search options for projections and manifold distances.
#[derive(Debug, Clone)]
pub struct ProjectOpts {
    /// Box for `log lambda`.
    pub log_lambda_box: (Scalar, Scalar),
    /// Multi-start seeds in `log lambda`.
    pub seeds: Vec<Scalar>,
    /// Tolerance on `log lambda` (and on the inner scale, relatively).
    pub tol: Scalar,
    pub quad: QuadratureSpec,
}

impl Default for ProjectOpts {
    fn default() -> Self {
        Self {
            log_lambda_box: (-14.0, 14.0),
            seeds: vec![-4.0, -1.0, 0.0, 1.0, 4.0],
            tol: 1e-11,
            quad: QuadratureSpec::default(),
        }
    }
}

/// Result of a projection or alignment search.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionResult {
    pub point: MinimizerPoint,
    /// Distance in the projecting norm.
    pub distance: Scalar,
    /// Alignment value for the duality-pairing searches.
    pub mu: Option<Scalar>,
    /// Normalized orthogonality residuals where the search guarantees them.
    pub ortho_residuals: Vec<Scalar>,
    pub converged: bool,
    pub at_boundary: bool,
}

// ---------------------------------------------------------------------------
// Pairing integrals between a test function and a family member.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    /// value pairing, strongest weight (c or c2 at gradient level)
    Strong,
    /// value pairing at weight a
    Middle,
    /// gradient pairing at weight b
    Grad,
}

struct FamilyKernel {
    /// unit member value/derivative closures
    w: crate::profile::RFn,
    dw: crate::profile::RFn,
    /// logarithmic derivative of the member in the rate:
    /// `d/dlam w = lam_logderiv * w`
    lam_logderiv: crate::profile::RFn,
    /// closed-form squared norms of the unit member at p = 2, per slot
    ww: [Scalar; 3],
    weights: [Scalar; 3],
    n_dim: u32,
    p: Scalar,
}

fn first_order_kernel(params: &CknParams, lam: Scalar) -> Result<FamilyKernel> {
    let pt = MinimizerPoint::new(family_of(params), 1.0, lam)?;
    let v = minimizer_profile(params, &pt)?;
    let parts = v.radial()?;
    let s = params.s_const;
    let (alpha, g1) = (params.alpha, params.gamma1);
    Ok(FamilyKernel {
        w: parts.u.clone(),
        dw: parts.du.clone(),
        lam_logderiv: std::sync::Arc::new(move |r: Scalar| alpha / lam - r.powf(g1) / g1),
        // ||w||_{L_c}^p = 1, ||w||_{L_a}^p = S/lam, ||w||_{H_b}^p = S lam^{p-1}
        ww: [
            1.0,
            (s / lam).powf(2.0 / params.p),
            (s * lam.powf(params.p - 1.0)).powf(2.0 / params.p),
        ],
        weights: [params.c, params.a, params.b],
        n_dim: params.n_dim,
        p: params.p,
    })
}

/// Second-order kernel works at the gradient level throughout: `Strong` and
/// `Middle` pair gradients under the c2/a weights, `Grad` pairs Laplacians
/// under the b weight.
fn second_order_kernel(params2: &Ckn2Params, lam: Scalar) -> FamilyKernel {
    let (g2, beta, c3) = (params2.gamma2, params2.beta, params2.c3);
    let n = params2.n_dim as Scalar;
    let k_const = params2.k_const;
    let dw = move |r: Scalar| -c3 * lam.powf(beta) * r.powf(1.0 - n) * (-lam * r.powf(g2) / g2).exp();
    let lap = move |r: Scalar| -dw(r) * lam * r.powf(g2 - 1.0);
    FamilyKernel {
        w: std::sync::Arc::new(dw),
        dw: std::sync::Arc::new(lap),
        lam_logderiv: std::sync::Arc::new(move |r: Scalar| beta / lam - r.powf(g2) / g2),
        ww: [
            1.0,
            (k_const / lam).powf(2.0 / params2.p),
            (k_const * lam.powf(params2.p - 1.0)).powf(2.0 / params2.p),
        ],
        weights: [params2.c2, params2.a, params2.b],
        n_dim: params2.n_dim,
        p: params2.p,
    }
}

impl FamilyKernel {
    fn field(&self, slot: Slot) -> &crate::profile::RFn {
        match slot {
            Slot::Grad => &self.dw,
            _ => &self.w,
        }
    }

    fn weight(&self, slot: Slot) -> Scalar {
        match slot {
            Slot::Strong => self.weights[0],
            Slot::Middle => self.weights[1],
            Slot::Grad => self.weights[2],
        }
    }

    fn ww2(&self, slot: Slot) -> Scalar {
        match slot {
            Slot::Strong => self.ww[0],
            Slot::Middle => self.ww[1],
            Slot::Grad => self.ww[2],
        }
    }
}

/// Whether the slot pairs values or gradients of the test function.
fn slot_uses_gradient(second_order: bool, slot: Slot) -> bool {
    second_order || slot == Slot::Grad
}

/// `int |x|^{-p w_slot} (D u) (D w_lam) dx` with `D` per slot.
fn pairing(
    u: &TestFunction,
    kern: &FamilyKernel,
    slot: Slot,
    second_order: bool,
    quad: &QuadratureSpec,
) -> Result<Scalar> {
    let volume: Scalar = sphere_area(kern.n_dim);
    let spec = hinted_spec(quad, &[u], SupportMode::Intersection);
    let m = kern.n_dim as Scalar - 1.0 - kern.p * kern.weight(slot);
    let wf = kern.field(slot).clone();
    match u {
        TestFunction::Radial(parts) => {
            let uf = if slot_uses_gradient(second_order, slot) {
                if second_order && slot == Slot::Grad {
                    // Laplacian pairing
                    let du = parts.du.clone();
                    let d2 = parts.d2u.clone().ok_or(CknError::MissingSecondDerivative)?;
                    let nm1 = kern.n_dim as Scalar - 1.0;
                    std::sync::Arc::new(move |r: Scalar| d2(r) + nm1 * du(r) / r)
                        as crate::profile::RFn
                } else {
                    parts.du.clone()
                }
            } else {
                parts.u.clone()
            };
            let i = integrate_radial(|r: Scalar| uf(r) * wf(r), m, &spec)?;
            Ok(volume * i.value)
        }
        TestFunction::Axisymmetric(_) => {
            if second_order {
                return Err(CknError::InvalidInput(
                    "second-order pairings need radial functions".into(),
                ));
            }
            let uu = u.clone();
            let pw = kern.p * kern.weight(slot);
            let grad_slot = slot == Slot::Grad;
            let g = move |rho: Scalar, z: Scalar| {
                let s = rho.hypot(z).max(1e-300);
                let val = if grad_slot {
                    let (gr, gz) = uu.axi_grad(rho, z);
                    // radial member: grad w = w'(s) x/s
                    (gr * rho + gz * z) / s * wf(s)
                } else {
                    uu.axi_value(rho, z) * wf(s)
                };
                val * s.powf(-pw)
            };
            let i = integrate_axisym(g, kern.n_dim, &spec)?;
            Ok(i.value)
        }
    }
}

/// Aligned pairing `int |x|^{-p c} |w|^{p-2} w u dx` (or its gradient-level
/// second-order version) against the unit member.
fn aligned_pairing(
    u: &TestFunction,
    kern: &FamilyKernel,
    second_order: bool,
    quad: &QuadratureSpec,
) -> Result<Scalar> {
    let volume: Scalar = sphere_area(kern.n_dim);
    let spec = hinted_spec(quad, &[u], SupportMode::Intersection);
    let m = kern.n_dim as Scalar - 1.0 - kern.p * kern.weight(Slot::Strong);
    let pm2 = kern.p - 2.0;
    let wf = kern.w.clone();
    match u {
        TestFunction::Radial(parts) => {
            let uf = if second_order { parts.du.clone() } else { parts.u.clone() };
            let i = integrate_radial(|r: Scalar| odd_pow(wf(r), pm2) * uf(r), m, &spec)?;
            Ok(volume * i.value)
        }
        TestFunction::Axisymmetric(_) => {
            if second_order {
                return Err(CknError::InvalidInput(
                    "second-order pairings need radial functions".into(),
                ));
            }
            let uu = u.clone();
            let pw = kern.p * kern.weight(Slot::Strong);
            let g = move |rho: Scalar, z: Scalar| {
                let s = rho.hypot(z).max(1e-300);
                odd_pow(wf(s), pm2) * uu.axi_value(rho, z) * s.powf(-pw)
            };
            let i = integrate_axisym(g, kern.n_dim, &spec)?;
            Ok(i.value)
        }
    }
}

/// Rate-derivative of the aligned pairing (up to the positive factor `p-1`):
/// the alignment is stationary exactly where this vanishes.
fn aligned_pairing_dlam(
    u: &TestFunction,
    kern: &FamilyKernel,
    second_order: bool,
    quad: &QuadratureSpec,
) -> Result<Scalar> {
    let volume: Scalar = sphere_area(kern.n_dim);
    let spec = hinted_spec(quad, &[u], SupportMode::Intersection);
    let m = kern.n_dim as Scalar - 1.0 - kern.p * kern.weight(Slot::Strong);
    let pm2 = kern.p - 2.0;
    let wf = kern.w.clone();
    let ld = kern.lam_logderiv.clone();
    match u {
        TestFunction::Radial(parts) => {
            let uf = if second_order { parts.du.clone() } else { parts.u.clone() };
            let i =
                integrate_radial(|r: Scalar| odd_pow(wf(r), pm2) * ld(r) * uf(r), m, &spec)?;
            Ok(volume * i.value)
        }
        TestFunction::Axisymmetric(_) => {
            if second_order {
                return Err(CknError::InvalidInput(
                    "second-order pairings need radial functions".into(),
                ));
            }
            let uu = u.clone();
            let pw = kern.p * kern.weight(Slot::Strong);
            let g = move |rho: Scalar, z: Scalar| {
                let s = rho.hypot(z).max(1e-300);
                odd_pow(wf(s), pm2) * ld(s) * uu.axi_value(rho, z) * s.powf(-pw)
            };
            let i = integrate_axisym(g, kern.n_dim, &spec)?;
            Ok(i.value)
        }
    }
}

/// Polish the outer rate by root-finding the analytic stationarity integral
/// around the value-minimization optimum. Value minimization alone stalls at
/// the square root of the quadrature noise; the stationarity root is
/// noise-limited directly.
fn polish_alignment_rate(
    u: &TestFunction,
    make_kernel: &dyn Fn(Scalar) -> Result<FamilyKernel>,
    second_order: bool,
    log_lam0: Scalar,
    quad: &QuadratureSpec,
) -> Scalar {
    let s_at = |iota: Scalar| -> Option<Scalar> {
        let kern = make_kernel(iota.exp()).ok()?;
        aligned_pairing_dlam(u, &kern, second_order, quad).ok()
    };
    let mut width = 1e-3;
    let (mut a, mut b, mut sa, mut sb) = loop {
        let (a, b) = (log_lam0 - width, log_lam0 + width);
        let (Some(sa), Some(sb)) = (s_at(a), s_at(b)) else {
            return log_lam0;
        };
        if sa == 0.0 {
            return a;
        }
        if sb == 0.0 {
            return b;
        }
        if sa * sb < 0.0 {
            break (a, b, sa, sb);
        }
        width *= 4.0;
        if width > 0.5 {
            // no sign change nearby: keep the search optimum
            return log_lam0;
        }
    };
    for _ in 0..80 {
        let mid = if (sb - sa).abs() > 1e-300 {
            let sec = a - sa * (b - a) / (sb - sa);
            if sec > a && sec < b {
                0.5 * (sec + 0.5 * (a + b))
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let Some(sm) = s_at(mid) else { return 0.5 * (a + b) };
        if sm == 0.0 {
            return mid;
        }
        if sa * sm < 0.0 {
            b = mid;
            sb = sm;
        } else {
            a = mid;
            sa = sm;
        }
        if b - a <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// Outer search over log lambda.
// ---------------------------------------------------------------------------

/// Expand a downhill bracket around `seed` inside the box.
fn expand_bracket(
    phi: &mut dyn FnMut(Scalar) -> Scalar,
    seed: Scalar,
    lo: Scalar,
    hi: Scalar,
) -> (Scalar, Scalar) {
    let mut step = 0.5;
    let x0 = seed.clamp(lo, hi);
    let f0 = phi(x0);
    let xp = (x0 + step).min(hi);
    let xm = (x0 - step).max(lo);
    let (fp, fm) = (phi(xp), phi(xm));
    if f0 <= fp && f0 <= fm {
        return (xm, xp);
    }
    let dir = if fp < fm { 1.0 } else { -1.0 };
    let mut prev = x0;
    let mut cur = if dir > 0.0 { xp } else { xm };
    let mut fcur = fp.min(fm);
    for _ in 0..64 {
        step *= 1.8;
        let next = (cur + dir * step).clamp(lo, hi);
        if next == cur {
            break;
        }
        let fnext = phi(next);
        if fnext >= fcur {
            return if dir > 0.0 { (prev, next) } else { (next, prev) };
        }
        prev = cur;
        cur = next;
        fcur = fnext;
        if cur == lo || cur == hi {
            break;
        }
    }
    if dir > 0.0 {
        (prev, hi)
    } else {
        (lo, prev)
    }
}

struct OuterCandidate {
    log_lam: Scalar,
    value: Scalar,
    converged: bool,
}

/// Multi-start outer minimization over `log lambda`; candidates merge by
/// value, then by smallest `|log lambda|`.
fn outer_search(
    mut phi: impl FnMut(Scalar) -> Scalar,
    opts: &ProjectOpts,
) -> Result<OuterCandidate> {
    let (lo, hi) = opts.log_lambda_box;
    if !(lo < hi) {
        return Err(CknError::InvalidBracket("empty log-lambda box".into()));
    }
    let mut best: Option<OuterCandidate> = None;
    for &seed in &opts.seeds {
        let (a, b) = expand_bracket(&mut phi, seed, lo, hi);
        let (a, b) = if a < b { (a, b) } else { (a - opts.tol, a + opts.tol) };
        let r = minimize_scalar(&mut phi, (a, b), opts.tol)?;
        let cand = OuterCandidate {
            log_lam: r.argmin[0],
            value: r.value,
            converged: r.converged,
        };
        best = Some(match best {
            None => cand,
            Some(b0) => {
                let scale = b0.value.abs().max(cand.value.abs()).max(1e-300);
                if cand.value < b0.value - 1e-12 * scale
                    || ((cand.value - b0.value).abs() <= 1e-12 * scale
                        && cand.log_lam.abs() < b0.log_lam.abs())
                {
                    cand
                } else {
                    b0
                }
            }
        });
    }
    Ok(best.expect("at least one seed"))
}

fn check_box_boundary(log_lam: Scalar, opts: &ProjectOpts) -> Result<()> {
    let (lo, hi) = opts.log_lambda_box;
    let span = hi - lo;
    if (log_lam - lo).abs() <= 1e-6 * span || (hi - log_lam).abs() <= 1e-6 * span {
        return Err(CknError::BoundaryHit(format!(
            "optimal log lambda {log_lam} pinned to the search box [{lo}, {hi}]"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Inner scale solve for p > 2 (strictly convex in k).
// ---------------------------------------------------------------------------

/// Minimize `psi(k) = int |x|^{-pw} |f_u - k f_w|^p` via its derivative root
/// (the problem is strictly convex in the scale); returns `(k*, psi(k*))`.
/// Illinois-damped regula falsi costs one integral per iteration.
fn solve_inner_scale(
    psi: &dyn Fn(Scalar) -> Scalar,
    dpsi: &dyn Fn(Scalar) -> Scalar,
    k_init: Scalar,
) -> Result<(Scalar, Scalar)> {
    let mut lo = k_init - 1.0 - k_init.abs();
    let mut hi = k_init + 1.0 + k_init.abs();
    let mut flo = dpsi(lo);
    let mut fhi = dpsi(hi);
    let mut tries = 0;
    while flo > 0.0 || fhi < 0.0 {
        let span = hi - lo;
        if flo > 0.0 {
            lo -= span;
            flo = dpsi(lo);
        }
        if fhi < 0.0 {
            hi += span;
            fhi = dpsi(hi);
        }
        tries += 1;
        if tries > 60 {
            return Err(CknError::NonConvergence(
                "inner scale derivative has no bracketed root".into(),
            ));
        }
    }
    let mut side = 0i8;
    let mut k = 0.5 * (lo + hi);
    for _ in 0..48 {
        k = if (fhi - flo).abs() > 1e-300 {
            let sec = lo - flo * (hi - lo) / (fhi - flo);
            if sec > lo && sec < hi {
                sec
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let fk = dpsi(k);
        if fk == 0.0 {
            break;
        }
        if fk < 0.0 {
            lo = k;
            flo = fk;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = k;
            fhi = fk;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 1e-12 * (1.0 + k.abs()) {
            break;
        }
    }
    Ok((k, psi(k)))
}

// ---------------------------------------------------------------------------
// First-order projection and alignment.
// ---------------------------------------------------------------------------

/// Project `u` onto the first-order minimizer family in the strongest-weight
/// norm, searching `(k, log lambda)`.
pub fn project_lc(
    u: &TestFunction,
    params: &CknParams,
    opts: &ProjectOpts,
) -> Result<ProjectionResult> {
    let p = params.p;
    let quad = &opts.quad;
    let family = family_of(params);
    if (p - 2.0).abs() < 1e-12 {
        // quadratic: optimal k is the pairing against the unit member, and
        // distance^2 = ||u||^2 - k^2
        let (ulc, _) = weighted_norm(u, NormKind::Value, params.c, p, params.n_dim, quad)?;
        let mut phi = |log_lam: Scalar| -> Scalar {
            let kern = match first_order_kernel(params, log_lam.exp()) {
                Ok(k) => k,
                Err(_) => return Scalar::INFINITY,
            };
            match pairing(u, &kern, Slot::Strong, false, quad) {
                Ok(g) => (ulc * ulc - g * g).max(0.0),
                Err(_) => Scalar::INFINITY,
            }
        };
        let cand = outer_search(&mut phi, opts)?;
        check_box_boundary(cand.log_lam, opts)?;
        let mk = |l: Scalar| first_order_kernel(params, l);
        let log_lam = polish_alignment_rate(u, &mk, false, cand.log_lam, quad);
        let lam = log_lam.exp();
        let kern = first_order_kernel(params, lam)?;
        let k_star = pairing(u, &kern, Slot::Strong, false, quad)?;
        if k_star == 0.0 {
            return Err(CknError::NonConvergence(
                "projection degenerate: zero pairing with the whole family".into(),
            ));
        }
        let point = MinimizerPoint::new(family, k_star, lam)?;
        let ortho = orthogonality_residuals(u, &point, params, quad)?;
        let distance = (ulc * ulc - k_star * k_star).max(0.0).sqrt();
        // On-manifold inputs leave the residual quotients as noise ratios;
        // the stationarity gate only applies at a genuine distance.
        let stationary =
            distance <= 1e-7 * ulc || ortho.iter().take(2).all(|r| r.abs() < 1e-5);
        Ok(ProjectionResult {
            point,
            distance,
            mu: None,
            ortho_residuals: ortho,
            converged: cand.converged && stationary,
            at_boundary: false,
        })
    } else {
        let parts = u.radial()?.clone();
        let volume: Scalar = sphere_area(params.n_dim);
        let m = params.n_dim as Scalar - 1.0 - p * params.c;
        let uspec = hinted_spec(quad, &[u], SupportMode::Union);
        let (ulc, _) = weighted_norm(u, NormKind::Value, params.c, p, params.n_dim, quad)?;
        let hint_kern = first_order_kernel(params, 1.0)?;
        let sign_hint = aligned_pairing(u, &hint_kern, false, quad)?.signum();
        let solve_at = |lam: Scalar| -> Result<(Scalar, Scalar)> {
            let kern = first_order_kernel(params, lam)?;
            let (uu, wf) = (parts.u.clone(), kern.w.clone());
            let psi = |k: Scalar| -> Scalar {
                integrate_radial(|r: Scalar| (uu(r) - k * wf(r)).abs().powf(p), m, &uspec)
                    .map(|i| volume * i.value)
                    .unwrap_or(Scalar::INFINITY)
            };
            let (uu2, wf2) = (parts.u.clone(), kern.w.clone());
            let dpsi = |k: Scalar| -> Scalar {
                integrate_radial(
                    |r: Scalar| -p * odd_pow(uu2(r) - k * wf2(r), p - 2.0) * wf2(r),
                    m,
                    &uspec,
                )
                .map(|i| volume * i.value)
                .unwrap_or(Scalar::NAN)
            };
            solve_inner_scale(&psi, &dpsi, sign_hint * ulc.max(1e-6))
        };
        let mut inner_k = 0.0;
        let mut phi = |log_lam: Scalar| -> Scalar {
            match solve_at(log_lam.exp()) {
                Ok((k, v)) => {
                    inner_k = k;
                    v
                }
                Err(_) => Scalar::INFINITY,
            }
        };
        let cand = outer_search(&mut phi, opts)?;
        check_box_boundary(cand.log_lam, opts)?;
        let lam = cand.log_lam.exp();
        let (k_star, value) = solve_at(lam)?;
        let point = MinimizerPoint::new(family, k_star, lam)?;
        Ok(ProjectionResult {
            point,
            distance: value.max(0.0).powf(1.0 / p),
            mu: None,
            ortho_residuals: Vec::new(),
            converged: cand.converged,
            at_boundary: false,
        })
    }
}

/// Maximize the duality pairing over unit-norm members `v(+-1, lambda)` and
/// return the aligned member `mu * v` together with the orthogonality
/// residuals of the alignment system.
pub fn best_aligned(
    u: &TestFunction,
    params: &CknParams,
    opts: &ProjectOpts,
) -> Result<ProjectionResult> {
    let quad = &opts.quad;
    let (ulc, _) = weighted_norm(u, NormKind::Value, params.c, params.p, params.n_dim, quad)?;
    if ulc <= 0.0 {
        return Err(CknError::ZeroDenominator("alignment needs a nonzero function".into()));
    }
    let mut phi = |log_lam: Scalar| -> Scalar {
        let kern = match first_order_kernel(params, log_lam.exp()) {
            Ok(k) => k,
            Err(_) => return Scalar::INFINITY,
        };
        match aligned_pairing(u, &kern, false, quad) {
            Ok(g) => -g.abs(),
            Err(_) => Scalar::INFINITY,
        }
    };
    let cand = outer_search(&mut phi, opts)?;
    check_box_boundary(cand.log_lam, opts)?;
    let mk = |l: Scalar| first_order_kernel(params, l);
    let log_lam = polish_alignment_rate(u, &mk, false, cand.log_lam, quad);
    let lam = log_lam.exp();
    let kern = first_order_kernel(params, lam)?;
    // The pairing is linear in u, so normalizing u to unit norm and restoring
    // the scale afterwards leaves exactly g itself: mu = |g|, sign chosen so
    // the aligned member is mu * v(+-1, lambda).
    let g = aligned_pairing(u, &kern, false, quad)?;
    if g == 0.0 {
        return Err(CknError::NonConvergence(
            "alignment degenerate: zero pairing with the whole family".into(),
        ));
    }
    let point = MinimizerPoint::new(family_of(params), g, lam)?;
    let vbar = minimizer_profile(params, &point)?;
    let diff = TestFunction::lin_comb(1.0, u, -1.0, &vbar);
    let (dist, _) = weighted_norm(&diff, NormKind::Value, params.c, params.p, params.n_dim, quad)?;
    let ortho = orthogonality_residuals(u, &point, params, quad)?;
    Ok(ProjectionResult {
        point,
        distance: dist,
        mu: Some(g.abs()),
        ortho_residuals: ortho,
        converged: cand.converged,
        at_boundary: false,
    })
}

/// Normalized residuals of the three orthogonality conditions at `vbar`
/// (scaled family member): strongest-weight value pairing, middle-weight
/// value pairing, gradient pairing.
pub fn orthogonality_residuals(
    u: &TestFunction,
    vbar: &MinimizerPoint,
    params: &CknParams,
    quad: &QuadratureSpec,
) -> Result<Vec<Scalar>> {
    let p = params.p;
    let vprof = minimizer_profile(params, vbar)?;
    let diff = TestFunction::lin_comb(1.0, u, -1.0, &vprof);
    let volume: Scalar = sphere_area(params.n_dim);
    let vparts = vprof.radial()?.clone();
    let spec = hinted_spec(quad, &[u, &vprof], SupportMode::Union);
    let n = params.n_dim as Scalar;
    let (_, la_v, lc_v) = crate::profile::minimizer_norms(params, vbar)?;
    let hb_v = vbar.lambda * la_v;

    let mut out = Vec::with_capacity(3);
    for (slot_weight, kind, vnorm) in [
        (params.c, NormKind::Value, lc_v),
        (params.a, NormKind::Value, la_v),
        (params.b, NormKind::Gradient, hb_v),
    ] {
        let m = n - 1.0 - p * slot_weight;
        let raw = match (&diff, kind) {
            (TestFunction::Radial(dp), NormKind::Value) => {
                let (du_, vu) = (dp.u.clone(), vparts.u.clone());
                volume
                    * integrate_radial(
                        |r: Scalar| odd_pow(vu(r), p - 2.0) * du_(r),
                        m,
                        &spec,
                    )?
                    .value
            }
            (TestFunction::Radial(dp), _) => {
                let (dd, vd) = (dp.du.clone(), vparts.du.clone());
                volume
                    * integrate_radial(
                        |r: Scalar| odd_pow(vd(r), p - 2.0) * dd(r),
                        m,
                        &spec,
                    )?
                    .value
            }
            (TestFunction::Axisymmetric(_), kind) => {
                let dd = diff.clone();
                let (vu, vd) = (vparts.u.clone(), vparts.du.clone());
                let grad = kind == NormKind::Gradient;
                let pw = p * slot_weight;
                integrate_axisym(
                    move |rho: Scalar, z: Scalar| {
                        let s = rho.hypot(z).max(1e-300);
                        let val = if grad {
                            let (gr, gz) = dd.axi_grad(rho, z);
                            odd_pow(vd(s), p - 2.0) * (gr * rho + gz * z) / s
                        } else {
                            odd_pow(vu(s), p - 2.0) * dd.axi_value(rho, z)
                        };
                        val * s.powf(-pw)
                    },
                    params.n_dim,
                    &spec,
                )?
                .value
            }
        };
        let (dn, _) = weighted_norm(&diff, kind, slot_weight, p, params.n_dim, quad)?;
        let (un, _) = weighted_norm(u, kind, slot_weight, p, params.n_dim, quad)?;
        let den = vnorm.powf(p - 1.0) * dn.max(1e-14 * un.max(1e-300));
        out.push(raw / den.max(1e-300));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Second-order projection and alignment (gradient-level distances).
// ---------------------------------------------------------------------------

/// Project radial `u` onto the second-order family in the gradient-level
/// strongest-weight norm.
pub fn project_hc2(
    u: &TestFunction,
    params2: &Ckn2Params,
    opts: &ProjectOpts,
) -> Result<ProjectionResult> {
    let p = params2.p;
    let quad = &opts.quad;
    let parts = u.radial()?.clone();
    let (uhc, _) = weighted_norm(u, NormKind::Gradient, params2.c2, p, params2.n_dim, quad)?;
    if (p - 2.0).abs() < 1e-12 {
        let mut phi = |log_lam: Scalar| -> Scalar {
            let kern = second_order_kernel(params2, log_lam.exp());
            match pairing(u, &kern, Slot::Strong, true, quad) {
                Ok(g) => (uhc * uhc - g * g).max(0.0),
                Err(_) => Scalar::INFINITY,
            }
        };
        let cand = outer_search(&mut phi, opts)?;
        check_box_boundary(cand.log_lam, opts)?;
        let mk = |l: Scalar| -> Result<FamilyKernel> { Ok(second_order_kernel(params2, l)) };
        let log_lam = polish_alignment_rate(u, &mk, true, cand.log_lam, quad);
        let lam = log_lam.exp();
        let kern = second_order_kernel(params2, lam);
        let k_star = pairing(u, &kern, Slot::Strong, true, quad)?;
        if k_star == 0.0 {
            return Err(CknError::NonConvergence(
                "projection degenerate: zero pairing with the whole family".into(),
            ));
        }
        let point = MinimizerPoint::new(Family::SecondOrder, k_star, lam)?;
        Ok(ProjectionResult {
            point,
            distance: (uhc * uhc - k_star * k_star).max(0.0).sqrt(),
            mu: None,
            ortho_residuals: Vec::new(),
            converged: cand.converged,
            at_boundary: false,
        })
    } else {
        let volume: Scalar = sphere_area(params2.n_dim);
        let m = params2.n_dim as Scalar - 1.0 - p * params2.c2;
        let uspec = hinted_spec(quad, &[u], SupportMode::Union);
        let hint_kern = second_order_kernel(params2, 1.0);
        let sign_hint = aligned_pairing(u, &hint_kern, true, quad)?.signum();
        let solve_at = |lam: Scalar| -> Result<(Scalar, Scalar)> {
            let kern = second_order_kernel(params2, lam);
            let (ud, wd) = (parts.du.clone(), kern.w.clone());
            let psi = |k: Scalar| -> Scalar {
                integrate_radial(|r: Scalar| (ud(r) - k * wd(r)).abs().powf(p), m, &uspec)
                    .map(|i| volume * i.value)
                    .unwrap_or(Scalar::INFINITY)
            };
            let (ud2, wd2) = (parts.du.clone(), kern.w.clone());
            let dpsi = |k: Scalar| -> Scalar {
                integrate_radial(
                    |r: Scalar| -p * odd_pow(ud2(r) - k * wd2(r), p - 2.0) * wd2(r),
                    m,
                    &uspec,
                )
                .map(|i| volume * i.value)
                .unwrap_or(Scalar::NAN)
            };
            solve_inner_scale(&psi, &dpsi, sign_hint * uhc.max(1e-6))
        };
        let mut phi = |log_lam: Scalar| -> Scalar {
            solve_at(log_lam.exp()).map(|(_, v)| v).unwrap_or(Scalar::INFINITY)
        };
        let cand = outer_search(&mut phi, opts)?;
        check_box_boundary(cand.log_lam, opts)?;
        let lam = cand.log_lam.exp();
        let (k_star, value) = solve_at(lam)?;
        let point = MinimizerPoint::new(Family::SecondOrder, k_star, lam)?;
        Ok(ProjectionResult {
            point,
            distance: value.max(0.0).powf(1.0 / p),
            mu: None,
            ortho_residuals: Vec::new(),
            converged: cand.converged,
            at_boundary: false,
        })
    }
}

/// Second-order alignment: maximize the gradient-level duality pairing over
/// unit members and report the orthogonality residuals of its system.
pub fn best_aligned2(
    u: &TestFunction,
    params2: &Ckn2Params,
    opts: &ProjectOpts,
) -> Result<ProjectionResult> {
    let quad = &opts.quad;
    let p = params2.p;
    let (uhc, _) = weighted_norm(u, NormKind::Gradient, params2.c2, p, params2.n_dim, quad)?;
    if uhc <= 0.0 {
        return Err(CknError::ZeroDenominator("alignment needs a nonzero function".into()));
    }
    let mut phi = |log_lam: Scalar| -> Scalar {
        let kern = second_order_kernel(params2, log_lam.exp());
        match aligned_pairing(u, &kern, true, quad) {
            Ok(g) => -g.abs(),
            Err(_) => Scalar::INFINITY,
        }
    };
    let cand = outer_search(&mut phi, opts)?;
    check_box_boundary(cand.log_lam, opts)?;
    let mk = |l: Scalar| -> Result<FamilyKernel> { Ok(second_order_kernel(params2, l)) };
    let log_lam = polish_alignment_rate(u, &mk, true, cand.log_lam, quad);
    let lam = log_lam.exp();
    let kern = second_order_kernel(params2, lam);
    let g = aligned_pairing(u, &kern, true, quad)?;
    if g == 0.0 {
        return Err(CknError::NonConvergence(
            "alignment degenerate: zero pairing with the whole family".into(),
        ));
    }
    let point = MinimizerPoint::new(Family::SecondOrder, g, lam)?;
    let vbar = second_minimizer_profile(params2, &point, quad)?;
    let diff = TestFunction::lin_comb(1.0, u, -1.0, &vbar);
    let (dist, _) =
        weighted_norm(&diff, NormKind::Gradient, params2.c2, p, params2.n_dim, quad)?;
    let ortho = orthogonality_residuals2(u, &point, params2, quad)?;
    Ok(ProjectionResult {
        point,
        distance: dist,
        mu: Some(g.abs()),
        ortho_residuals: ortho,
        converged: cand.converged,
        at_boundary: false,
    })
}

/// Normalized residuals of the second-order orthogonality system at `vbar`:
/// gradient pairings under the strongest and middle weights, Laplacian
/// pairing under the `b` weight.
pub fn orthogonality_residuals2(
    u: &TestFunction,
    vbar: &MinimizerPoint,
    params2: &Ckn2Params,
    quad: &QuadratureSpec,
) -> Result<Vec<Scalar>> {
    let p = params2.p;
    let uparts = u.radial()?.clone();
    let ud2 = uparts.d2u.clone().ok_or(CknError::MissingSecondDerivative)?;
    let vprof = second_minimizer_profile(params2, vbar, quad)?;
    let vparts = vprof.radial()?.clone();
    let vd2 = vparts.d2u.clone().expect("family profile carries d2u");
    let volume: Scalar = sphere_area(params2.n_dim);
    let spec = hinted_spec(quad, &[u, &vprof], SupportMode::Union);
    let n = params2.n_dim as Scalar;
    let (dlb_v, ha_v, hc_v) = crate::profile::second_minimizer_norms(params2, vbar)?;
    let diff = TestFunction::lin_comb(1.0, u, -1.0, &vprof);

    let mut out = Vec::with_capacity(3);
    let lap_u = {
        let (du, d2) = (uparts.du.clone(), ud2.clone());
        move |r: Scalar| d2(r) + (n - 1.0) * du(r) / r
    };
    let lap_v = {
        let (dv, d2) = (vparts.du.clone(), vd2.clone());
        move |r: Scalar| d2(r) + (n - 1.0) * dv(r) / r
    };
    for (idx, (slot_weight, vnorm)) in [
        (params2.c2, hc_v),
        (params2.a, ha_v),
        (params2.b, dlb_v),
    ]
    .into_iter()
    .enumerate()
    {
        let m = n - 1.0 - p * slot_weight;
        let raw = if idx < 2 {
            let (ud, vd) = (uparts.du.clone(), vparts.du.clone());
            volume
                * integrate_radial(
                    |r: Scalar| odd_pow(vd(r), p - 2.0) * (ud(r) - vd(r)),
                    m,
                    &spec,
                )?
                .value
        } else {
            let (lu, lv) = (lap_u.clone(), lap_v.clone());
            volume
                * integrate_radial(
                    |r: Scalar| odd_pow(lv(r), p - 2.0) * (lu(r) - lv(r)),
                    m,
                    &spec,
                )?
                .value
        };
        let kind = if idx < 2 { NormKind::Gradient } else { NormKind::Laplacian };
        let (dn, _) = weighted_norm(&diff, kind, slot_weight, p, params2.n_dim, quad)?;
        let (un, _) = weighted_norm(u, kind, slot_weight, p, params2.n_dim, quad)?;
        let den = vnorm.powf(p - 1.0) * dn.max(1e-14 * un.max(1e-300));
        out.push(raw / den.max(1e-300));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Manifold-distance objectives for the stability experiments.
// ---------------------------------------------------------------------------

/// Which distance functional is minimized over the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistanceObjective {
    /// `||u-v||_{H_b} ||u-v||_{L_a}^{p-1}` (first order).
    ProductHl,
    /// `||u-v||_{H_b}^p + (p-1) ||u-v||_{L_a}^p` (first order).
    SumHl,
    /// `||u-v||_{H_b}` alone.
    HOnly,
    /// `||u-v||_{L_a}` alone.
    LOnly,
    /// `||Delta(u-v)||_{L_b} ||u-v||_{H_a}^{p-1}` (second order).
    ProductSecond,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceResult {
    pub value: Scalar,
    pub point: MinimizerPoint,
    pub converged: bool,
}

/// Quadratic-expansion channel at p = 2: `d^2(k) = uu - 2 k uw + k^2 ww`.
struct Channel {
    uu: Scalar,
    uw: Scalar,
    ww: Scalar,
}

impl Channel {
    fn d2(&self, k: Scalar) -> Scalar {
        (self.uu - 2.0 * k * self.uw + k * k * self.ww).max(0.0)
    }

    fn kmin(&self) -> Scalar {
        self.uw / self.ww
    }
}

fn p2_channels(
    u: &TestFunction,
    kern: &FamilyKernel,
    second_order: bool,
    slots: [Slot; 2],
    u2: [Scalar; 2],
    quad: &QuadratureSpec,
) -> Result<[Channel; 2]> {
    let mk = |i: usize| -> Result<Channel> {
        Ok(Channel {
            uu: u2[i] * u2[i],
            uw: pairing(u, kern, slots[i], second_order, quad)?,
            ww: kern.ww2(slots[i]),
        })
    };
    Ok([mk(0)?, mk(1)?])
}

/// Minimize a first- or second-order distance objective over the family.
/// At p = 2 each candidate rate needs only two pairing integrals; for p > 2
/// (radial u) the objective is evaluated directly under a nested search.
pub fn min_distance(
    u: &TestFunction,
    params: Option<&CknParams>,
    params2: Option<&Ckn2Params>,
    objective: DistanceObjective,
    opts: &ProjectOpts,
) -> Result<DistanceResult> {
    let quad = &opts.quad;
    let second = matches!(objective, DistanceObjective::ProductSecond);
    if second != params2.is_some() || second == params.is_some() {
        return Err(CknError::InvalidInput(
            "objective and parameter order disagree".into(),
        ));
    }
    let (p, family) = if second {
        (params2.unwrap().p, Family::SecondOrder)
    } else {
        (params.unwrap().p, family_of(params.unwrap()))
    };

    if (p - 2.0).abs() < 1e-12 {
        // channels: (grad-level strong, value-level middle) in first order,
        // (laplacian, gradient middle) in second order
        let (slots, u2) = if second {
            let q2 = params2.unwrap();
            let (dlb, _) = weighted_norm(u, NormKind::Laplacian, q2.b, p, q2.n_dim, quad)?;
            let (ha, _) = weighted_norm(u, NormKind::Gradient, q2.a, p, q2.n_dim, quad)?;
            ([Slot::Grad, Slot::Middle], [dlb, ha])
        } else {
            let q = params.unwrap();
            let (hb, _) = weighted_norm(u, NormKind::Gradient, q.b, p, q.n_dim, quad)?;
            let (la, _) = weighted_norm(u, NormKind::Value, q.a, p, q.n_dim, quad)?;
            ([Slot::Grad, Slot::Middle], [hb, la])
        };
        let eval_at = |lam: Scalar| -> Result<(Scalar, Scalar)> {
            let kern = if second {
                second_order_kernel(params2.unwrap(), lam)
            } else {
                first_order_kernel(params.unwrap(), lam)?
            };
            let ch = p2_channels(u, &kern, second, slots, u2, quad)?;
            match objective {
                DistanceObjective::HOnly => {
                    let k = ch[0].kmin();
                    Ok((k, ch[0].d2(k).sqrt()))
                }
                DistanceObjective::LOnly => {
                    let k = ch[1].kmin();
                    Ok((k, ch[1].d2(k).sqrt()))
                }
                DistanceObjective::SumHl => {
                    let k = (ch[0].uw + ch[1].uw) / (ch[0].ww + ch[1].ww);
                    Ok((k, ch[0].d2(k) + ch[1].d2(k)))
                }
                DistanceObjective::ProductHl | DistanceObjective::ProductSecond => {
                    // the product minimum in k lies between the two
                    // single-channel minima
                    let (k1, k2) = (ch[0].kmin(), ch[1].kmin());
                    let (lo, hi) = (k1.min(k2), k1.max(k2));
                    if hi - lo < 1e-14 * (1.0 + hi.abs()) {
                        let k = 0.5 * (lo + hi);
                        return Ok((k, (ch[0].d2(k) * ch[1].d2(k)).sqrt()));
                    }
                    let r = minimize_scalar(
                        |k: Scalar| ch[0].d2(k) * ch[1].d2(k),
                        (lo - 1e-12, hi + 1e-12),
                        1e-13,
                    )?;
                    Ok((r.argmin[0], r.value.max(0.0).sqrt()))
                }
            }
        };
        let mut best_k = 0.0;
        let mut phi = |log_lam: Scalar| -> Scalar {
            match eval_at(log_lam.exp()) {
                Ok((k, v)) => {
                    best_k = k;
                    v
                }
                Err(_) => Scalar::INFINITY,
            }
        };
        let cand = outer_search(&mut phi, opts)?;
        check_box_boundary(cand.log_lam, opts)?;
        let lam = cand.log_lam.exp();
        let (k, value) = eval_at(lam)?;
        let k = if k == 0.0 { 1e-300 } else { k };
        Ok(DistanceResult {
            value,
            point: MinimizerPoint::new(family, k, lam)?,
            converged: cand.converged,
        })
    } else {
        // direct nested evaluation (radial only)
        let parts = u.radial()?.clone();
        let q = params.unwrap();
        let volume: Scalar = sphere_area(q.n_dim);
        let n = q.n_dim as Scalar;
        let uspec = hinted_spec(quad, &[u], SupportMode::Union);
        let norms_of = |k: Scalar, kern: &FamilyKernel| -> Result<(Scalar, Scalar)> {
            let (ud, wd) = (parts.du.clone(), kern.dw.clone());
            let dh = volume
                * integrate_radial(
                    |r: Scalar| (ud(r) - k * wd(r)).abs().powf(p),
                    n - 1.0 - p * q.b,
                    &uspec,
                )?
                .value;
            let (uu, wu) = (parts.u.clone(), kern.w.clone());
            let dl = volume
                * integrate_radial(
                    |r: Scalar| (uu(r) - k * wu(r)).abs().powf(p),
                    n - 1.0 - p * q.a,
                    &uspec,
                )?
                .value;
            Ok((dh.powf(1.0 / p), dl.powf(1.0 / p)))
        };
        let objective_val = |dh: Scalar, dl: Scalar| -> Scalar {
            match objective {
                DistanceObjective::ProductHl => dh * dl.powf(p - 1.0),
                DistanceObjective::SumHl => dh.powf(p) + (p - 1.0) * dl.powf(p),
                DistanceObjective::HOnly => dh,
                DistanceObjective::LOnly => dl,
                DistanceObjective::ProductSecond => unreachable!("second order is p = 2 here"),
            }
        };
        let (ulc, _) = weighted_norm(u, NormKind::Value, q.c, p, q.n_dim, quad)?;
        let hint_kern = first_order_kernel(q, 1.0)?;
        let sign_hint = aligned_pairing(u, &hint_kern, false, quad)?.signum();
        let eval_at = |lam: Scalar| -> Result<(Scalar, Scalar)> {
            let kern = first_order_kernel(q, lam)?;
            let k0 = sign_hint * ulc.max(1e-6);
            let f = |k: Scalar| -> Scalar {
                norms_of(k, &kern)
                    .map(|(dh, dl)| objective_val(dh, dl))
                    .unwrap_or(Scalar::INFINITY)
            };
            // the objective is convex-like in k near the optimum; bracket and
            // polish with the scalar minimizer
            let mut fmut = f;
            let (lo, hi) = expand_bracket(&mut fmut, k0, -1e6, 1e6);
            let r = minimize_scalar(fmut, (lo, hi), 1e-9)?;
            Ok((r.argmin[0], r.value))
        };
        let mut phi = |log_lam: Scalar| -> Scalar {
            eval_at(log_lam.exp()).map(|(_, v)| v).unwrap_or(Scalar::INFINITY)
        };
        let cand = outer_search(&mut phi, opts)?;
        check_box_boundary(cand.log_lam, opts)?;
        let lam = cand.log_lam.exp();
        let (k, value) = eval_at(lam)?;
        let k = if k == 0.0 { 1e-300 } else { k };
        Ok(DistanceResult {
            value,
            point: MinimizerPoint::new(family, k, lam)?,
            converged: cand.converged,
        })
    }
}

/// Nelder–Mead route over `(k, log lambda)` for cross-checking the nested
/// scheme on first-order objectives.
pub fn min_distance_simplex(
    u: &TestFunction,
    params: &CknParams,
    objective: DistanceObjective,
    init: [Scalar; 2],
    opts: &ProjectOpts,
) -> Result<DistanceResult> {
    let p = params.p;
    let quad = &opts.quad;
    let (hb_w, la_w) = (params.b, params.a);
    let n = params.n_dim as Scalar;
    let volume: Scalar = sphere_area(params.n_dim);
    let parts = u.radial()?.clone();
    let uspec = hinted_spec(quad, &[u], SupportMode::Union);
    let f = |x: [Scalar; 2]| -> Scalar {
        let (k, lam) = (x[0], x[1].exp());
        let kern = match first_order_kernel(params, lam) {
            Ok(kk) => kk,
            Err(_) => return Scalar::INFINITY,
        };
        let (ud, wd) = (parts.du.clone(), kern.dw.clone());
        let dh = integrate_radial(
            |r: Scalar| (ud(r) - k * wd(r)).abs().powf(p),
            n - 1.0 - p * hb_w,
            &uspec,
        );
        let (uu, wu) = (parts.u.clone(), kern.w.clone());
        let dl = integrate_radial(
            |r: Scalar| (uu(r) - k * wu(r)).abs().powf(p),
            n - 1.0 - p * la_w,
            &uspec,
        );
        match (dh, dl) {
            (Ok(a), Ok(b)) => {
                let (dh, dl) = ((volume * a.value).powf(1.0 / p), (volume * b.value).powf(1.0 / p));
                match objective {
                    DistanceObjective::ProductHl => dh * dl.powf(p - 1.0),
                    DistanceObjective::SumHl => dh.powf(p) + (p - 1.0) * dl.powf(p),
                    DistanceObjective::HOnly => dh,
                    DistanceObjective::LOnly => dl,
                    DistanceObjective::ProductSecond => Scalar::INFINITY,
                }
            }
            _ => Scalar::INFINITY,
        }
    };
    let r = minimize_2d(
        f,
        init,
        [-1e3, opts.log_lambda_box.0],
        [1e3, opts.log_lambda_box.1],
        1e-10,
    )?;
    Ok(DistanceResult {
        value: r.value,
        point: MinimizerPoint::new(family_of(params), r.argmin[0].max(1e-300), r.argmin[1].exp())?,
        converged: r.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_first_order, derive_second_order};
    use crate::profile::{
        make_profile, make_profile2, minimizer_profile, ClosedFormName, PerturbationMode,
        ProfileSpec,
    };

    fn p45() -> CknParams {
        derive_first_order(4, 2.0, 0.5, 0.5).unwrap()
    }

    fn p93() -> CknParams {
        derive_first_order(9, 3.0, 1.25, 1.0).unwrap()
    }

    fn p2nd() -> Ckn2Params {
        derive_second_order(4, 2.0, -2.5, -2.5).unwrap()
    }

    fn opts() -> ProjectOpts {
        ProjectOpts::default()
    }

    #[test]
    fn projecting_a_member_recovers_it() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 2.0, 3.0).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        let r = project_lc(&v, &params, &opts()).unwrap();
        assert!(r.converged);
        assert!(r.distance < 1e-7, "distance {}", r.distance);
        assert!((r.point.k - 2.0).abs() < 1e-6, "k {}", r.point.k);
        assert!((r.point.lambda - 3.0).abs() < 1e-5, "lambda {}", r.point.lambda);
    }

    #[test]
    fn gaussian_projection_matches_frozen_oracle() {
        // frozen from a 40-digit stationary-point solve
        let params = p45();
        let g = make_profile(
            &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            &params,
            &opts().quad,
        )
        .unwrap();
        let r = project_lc(&g, &params, &opts()).unwrap();
        assert!(r.converged);
        assert!((r.point.lambda - 1.642648494086560537).abs() < 1e-7, "{}", r.point.lambda);
        assert!((r.point.k - 2.179090641860984).abs() < 1e-7, "{}", r.point.k);
        assert!((r.distance - 0.4317014884136518).abs() < 1e-8, "{}", r.distance);
    }

    #[test]
    fn perturbed_member_projection_vs_grid_oracle() {
        let params = p45();
        let u = make_profile(
            &ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.01,
                mode: PerturbationMode::GaussBump,
            },
            &params,
            &opts().quad,
        )
        .unwrap();
        let r = project_lc(&u, &params, &opts()).unwrap();
        assert!(r.distance <= 0.02, "distance {}", r.distance);
        assert!((r.point.k - 1.0).abs() <= 0.1 && r.point.lambda.ln().abs() <= 0.1);
        // independent dense grid scan over (k, log lambda)
        let quad = opts().quad;
        let mut best = Scalar::INFINITY;
        let (ulc, _) =
            weighted_norm(&u, NormKind::Value, params.c, 2.0, 4, &quad).unwrap();
        for i in 0..60 {
            let ll = -0.5 + i as f64 / 59.0;
            let kern = first_order_kernel(&params, ll.exp()).unwrap();
            let g = pairing(&u, &kern, Slot::Strong, false, &quad).unwrap();
            for j in 0..60 {
                let k = 0.7 + 0.6 * j as f64 / 59.0;
                let d2 = ulc * ulc - 2.0 * k * g + k * k;
                best = best.min(d2.max(0.0).sqrt());
            }
        }
        assert!(
            r.distance <= best + 1e-6,
            "optimizer {} worse than grid {best}",
            r.distance
        );
    }

    #[test]
    fn alignment_recovers_members_and_handles_sign() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 2.5, 0.8).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        let r = best_aligned(&v, &params, &opts()).unwrap();
        assert!((r.mu.unwrap() - 2.5).abs() < 1e-6, "mu {:?}", r.mu);
        assert!((r.point.lambda - 0.8).abs() < 1e-6);
        assert!(r.point.k > 0.0);

        let neg = minimizer_profile(
            &params,
            &MinimizerPoint::new(Family::FirstOrderCase1, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let r = best_aligned(&neg, &params, &opts()).unwrap();
        assert!(r.point.k < 0.0, "sign branch: k = {}", r.point.k);
        assert!(r.mu.unwrap() > 0.0);
    }

    #[test]
    fn gaussian_alignment_matches_frozen_oracles() {
        let params = p45();
        let g = make_profile(
            &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            &params,
            &opts().quad,
        )
        .unwrap();
        let r = best_aligned(&g, &params, &opts()).unwrap();
        let (ulc, _) = weighted_norm(&g, NormKind::Value, params.c, 2.0, 4, &opts().quad).unwrap();
        let mu_norm = r.mu.unwrap() / ulc;
        assert!((mu_norm - 0.980935429626352611).abs() < 1e-8, "mu_norm {mu_norm}");
        // Hoelder bound
        assert!(r.mu.unwrap() <= ulc * (1.0 + 1e-10));

        let params = p93();
        let g = make_profile(
            &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            &params,
            &opts().quad,
        )
        .unwrap();
        let r = best_aligned(&g, &params, &opts()).unwrap();
        assert!(
            (r.point.lambda - 1.8183602363272652).abs() < 1e-6,
            "lambda {}",
            r.point.lambda
        );
        let (ulc, _) = weighted_norm(&g, NormKind::Value, params.c, 3.0, 9, &opts().quad).unwrap();
        let mu_norm = r.mu.unwrap() / ulc;
        assert!((mu_norm - 0.95401242126716044).abs() < 1e-7, "mu_norm {mu_norm}");
    }

    #[test]
    fn orthogonality_residuals_vanish_at_projection_p2() {
        let params = p45();
        let u = make_profile(
            &ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.01,
                mode: PerturbationMode::GaussBump,
            },
            &params,
            &opts().quad,
        )
        .unwrap();
        let r = project_lc(&u, &params, &opts()).unwrap();
        for (i, res) in r.ortho_residuals.iter().enumerate() {
            assert!(res.abs() <= 1e-6, "residual {i} = {res}");
        }
    }

    #[test]
    fn orthogonality_residuals_vanish_at_alignment_p3() {
        let params = p93();
        let u = make_profile(
            &ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.02,
                mode: PerturbationMode::PolyTilt,
            },
            &params,
            &opts().quad,
        )
        .unwrap();
        let r = best_aligned(&u, &params, &opts()).unwrap();
        for (i, res) in r.ortho_residuals.iter().enumerate() {
            assert!(res.abs() <= 1e-6, "residual {i} = {res}");
        }
    }

    #[test]
    fn second_order_projection_and_alignment() {
        let params2 = p2nd();
        let pt = MinimizerPoint::new(Family::SecondOrder, 1.5, 0.7).unwrap();
        let v2 = second_minimizer_profile(&params2, &pt, &opts().quad).unwrap();
        let r = project_hc2(&v2, &params2, &opts()).unwrap();
        assert!(r.distance < 1e-7, "distance {}", r.distance);
        assert!((r.point.k - 1.5).abs() < 1e-6 && (r.point.lambda - 0.7).abs() < 1e-5);

        let r = best_aligned2(&v2, &params2, &opts()).unwrap();
        assert!((r.mu.unwrap() - 1.5).abs() < 1e-6);
        assert!((r.point.lambda - 0.7).abs() < 1e-5);

        let u = make_profile2(
            &ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.02,
                mode: PerturbationMode::GaussBump,
            },
            &params2,
            &opts().quad,
        )
        .unwrap();
        let r = project_hc2(&u, &params2, &opts()).unwrap();
        assert!(r.distance > 0.0 && r.distance < 0.05, "distance {}", r.distance);
        let r = best_aligned2(&u, &params2, &opts()).unwrap();
        for (i, res) in r.ortho_residuals.iter().enumerate() {
            assert!(res.abs() <= 1e-5, "residual {i} = {res}");
        }
    }

    #[test]
    fn simplex_route_matches_nested_route() {
        let params = p45();
        let u = make_profile(
            &ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.05,
                mode: PerturbationMode::GaussBump,
            },
            &params,
            &opts().quad,
        )
        .unwrap();
        let nested =
            min_distance(&u, Some(&params), None, DistanceObjective::ProductHl, &opts()).unwrap();
        let simplex = min_distance_simplex(
            &u,
            &params,
            DistanceObjective::ProductHl,
            [1.0, 0.0],
            &opts(),
        )
        .unwrap();
        assert!(
            (nested.value - simplex.value).abs() <= 1e-8 * (1.0 + nested.value.abs()),
            "nested {} vs simplex {}",
            nested.value,
            simplex.value
        );
    }

    #[test]
    fn scaling_invariance_of_projection_distance() {
        // the scaling map multiplies the gradient-level distance by the same
        // factor as the norm, so optimizer outputs must track it
        let params = p45();
        let g = make_profile(
            &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            &params,
            &opts().quad,
        )
        .unwrap();
        let d0 = min_distance(&g, Some(&params), None, DistanceObjective::HOnly, &opts())
            .unwrap()
            .value;
        let lam = 3.0;
        let w = crate::transforms::scale_phi(&g, lam, &params).unwrap();
        let d1 = min_distance(&w, Some(&params), None, DistanceObjective::HOnly, &opts())
            .unwrap()
            .value;
        let want = lam.powf(params.b - params.c + 1.0) * d0;
        assert!(((d1 - want) / want).abs() < 1e-5, "{d1} vs {want}");
    }

    #[test]
    fn multistart_agrees_for_small_deficit() {
        let params = p45();
        let u = make_profile(
            &ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.005,
                mode: PerturbationMode::ScaleSplit,
            },
            &params,
            &opts().quad,
        )
        .unwrap();
        let mut results = Vec::new();
        for seed in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            let mut o = opts();
            o.seeds = vec![seed];
            let r = project_lc(&u, &params, &o).unwrap();
            results.push(r.point.lambda);
        }
        let first = results[0];
        for lam in &results {
            assert!((lam - first).abs() < 1e-7, "seeds disagree: {results:?}");
        }
    }

    #[test]
    fn projecting_scaled_members_stays_on_manifold() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 1.0).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        for lam in [0.25, 4.0] {
            let w = crate::transforms::scale_phi(&v, lam, &params).unwrap();
            let r = project_lc(&w, &params, &opts()).unwrap();
            assert!(r.distance < 1e-7, "distance {} at lam {lam}", r.distance);
        }
    }
}
