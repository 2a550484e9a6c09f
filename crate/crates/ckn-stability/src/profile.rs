//! Test functions and the explicit minimizer families of both inequality
//! orders.
//!
//! A [`TestFunction`] is either radial (value plus first and optionally second
//! radial derivative) or axisymmetric (value plus the `(d/drho, d/dz)`
//! gradient). Evaluators are immutable after construction; any caches are
//! frozen when the function is built, so evaluation is reentrant.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::numerics::{integrate_radial, integrate_segment, integrate_tail, QuadratureSpec};
use crate::params::{Ckn2Params, CknParams, FirstOrderRegime};
use crate::Scalar;

pub type RFn = Arc<dyn Fn(Scalar) -> Scalar + Send + Sync>;
pub type AFn = Arc<dyn Fn(Scalar, Scalar) -> Scalar + Send + Sync>;
pub type AGrad = Arc<dyn Fn(Scalar, Scalar) -> (Scalar, Scalar) + Send + Sync>;

/// Tail bound metadata: `|u(r)| <= C exp(-q r^gamma)` for large `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub q: Scalar,
    pub gamma: Scalar,
}

impl Decay {
    /// Decay of a sum: the slower tail wins (smaller exponent first, then
    /// smaller rate).
    fn slower(self, other: Decay) -> Decay {
        if (self.gamma - other.gamma).abs() < 1e-14 {
            Decay { q: self.q.min(other.q), gamma: self.gamma }
        } else if self.gamma < other.gamma {
            self
        } else {
            other
        }
    }
}

/// Minimizer family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    FirstOrderCase1,
    FirstOrderCase2,
    SecondOrder,
}

/// A point `(k, lambda)` of a minimizer manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerPoint {
    pub family: Family,
    pub k: Scalar,
    pub lambda: Scalar,
}

impl MinimizerPoint {
    pub fn new(family: Family, k: Scalar, lambda: Scalar) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(CknError::InvalidInput("minimizer scale k must be nonzero".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(CknError::InvalidInput("minimizer rate lambda must be positive".into()));
        }
        Ok(Self { family, k, lambda })
    }
}

/// Radial evaluators.
#[derive(Clone)]
pub struct RadialParts {
    pub u: RFn,
    pub du: RFn,
    pub d2u: Option<RFn>,
    /// Effective support `(r_min, r_max)`; `r_max = inf` for decaying tails.
    pub support: (Scalar, Scalar),
    pub decay: Decay,
    /// Interior radii where the function is not smooth (spline knots, bump
    /// edges); quadrature panels are split there.
    pub edges: Vec<Scalar>,
}

/// Axisymmetric evaluators as functions of `(rho, z)`.
#[derive(Clone)]
pub struct AxisymParts {
    pub u: AFn,
    pub grad: AGrad,
    /// Support and decay in terms of the radius `sqrt(rho^2 + z^2)`.
    pub support: (Scalar, Scalar),
    pub decay: Decay,
    pub edges: Vec<Scalar>,
}

/// A radial or axisymmetric function evaluable on its domain.
#[derive(Clone)]
pub enum TestFunction {
    Radial(RadialParts),
    Axisymmetric(AxisymParts),
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Radial(p) => f
                .debug_struct("TestFunction::Radial")
                .field("support", &p.support)
                .field("decay", &p.decay)
                .field("has_d2u", &p.d2u.is_some())
                .finish(),
            TestFunction::Axisymmetric(p) => f
                .debug_struct("TestFunction::Axisymmetric")
                .field("support", &p.support)
                .field("decay", &p.decay)
                .finish(),
        }
    }
}

impl TestFunction {
    pub fn is_radial(&self) -> bool {
        matches!(self, TestFunction::Radial(_))
    }

    pub fn radial(&self) -> Result<&RadialParts> {
        match self {
            TestFunction::Radial(p) => Ok(p),
            TestFunction::Axisymmetric(_) => Err(CknError::InvalidInput(
                "operation requires a radial function".into(),
            )),
        }
    }

    pub fn support(&self) -> (Scalar, Scalar) {
        match self {
            TestFunction::Radial(p) => p.support,
            TestFunction::Axisymmetric(p) => p.support,
        }
    }

    pub fn decay(&self) -> Decay {
        match self {
            TestFunction::Radial(p) => p.decay,
            TestFunction::Axisymmetric(p) => p.decay,
        }
    }

    pub fn edges(&self) -> &[Scalar] {
        match self {
            TestFunction::Radial(p) => &p.edges,
            TestFunction::Axisymmetric(p) => &p.edges,
        }
    }

    /// Value as a function of `(rho, z)`; radial functions are lifted.
    pub fn axi_value(&self, rho: Scalar, z: Scalar) -> Scalar {
        match self {
            TestFunction::Radial(p) => (p.u)(rho.hypot(z)),
            TestFunction::Axisymmetric(p) => (p.u)(rho, z),
        }
    }

    /// Gradient `(d/drho, d/dz)`; radial functions are lifted by the chain rule.
    pub fn axi_grad(&self, rho: Scalar, z: Scalar) -> (Scalar, Scalar) {
        match self {
            TestFunction::Radial(p) => {
                let s = rho.hypot(z).max(1e-300);
                let d = (p.du)(s);
                (d * rho / s, d * z / s)
            }
            TestFunction::Axisymmetric(p) => (p.grad)(rho, z),
        }
    }

    /// `c1 * f1 + c2 * f2`. Radial when both inputs are; axisymmetric otherwise.
    pub fn lin_comb(c1: Scalar, f1: &TestFunction, c2: Scalar, f2: &TestFunction) -> TestFunction {
        let decay = f1.decay().slower(f2.decay());
        let support = (
            f1.support().0.min(f2.support().0),
            f1.support().1.max(f2.support().1),
        );
        let mut edges: Vec<Scalar> = f1.edges().to_vec();
        edges.extend_from_slice(f2.edges());
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        match (f1, f2) {
            (TestFunction::Radial(p1), TestFunction::Radial(p2)) => {
                let (u1, u2) = (p1.u.clone(), p2.u.clone());
                let (du1, du2) = (p1.du.clone(), p2.du.clone());
                let d2u = match (&p1.d2u, &p2.d2u) {
                    (Some(a), Some(b)) => {
                        let (a, b) = (a.clone(), b.clone());
                        Some(Arc::new(move |r: Scalar| c1 * a(r) + c2 * b(r)) as RFn)
                    }
                    _ => None,
                };
                TestFunction::Radial(RadialParts {
                    u: Arc::new(move |r| c1 * u1(r) + c2 * u2(r)),
                    du: Arc::new(move |r| c1 * du1(r) + c2 * du2(r)),
                    d2u,
                    support,
                    decay,
                    edges,
                })
            }
            _ => {
                let (g1, g2) = (f1.clone(), f2.clone());
                let (h1, h2) = (f1.clone(), f2.clone());
                TestFunction::Axisymmetric(AxisymParts {
                    u: Arc::new(move |rho, z| c1 * g1.axi_value(rho, z) + c2 * g2.axi_value(rho, z)),
                    grad: Arc::new(move |rho, z| {
                        let a = h1.axi_grad(rho, z);
                        let b = h2.axi_grad(rho, z);
                        (c1 * a.0 + c2 * b.0, c1 * a.1 + c2 * b.1)
                    }),
                    support,
                    decay,
                    edges,
                })
            }
        }
    }

    /// `prefactor * u(scale * .)` with derivatives adjusted by the chain rule.
    pub fn dilate(&self, scale: Scalar, prefactor: Scalar) -> TestFunction {
        assert!(scale > 0.0 && scale.is_finite());
        let decay = Decay {
            q: self.decay().q * scale.powf(self.decay().gamma),
            gamma: self.decay().gamma,
        };
        let support = (self.support().0 / scale, self.support().1 / scale);
        let edges = self.edges().iter().map(|e| e / scale).collect();
        match self {
            TestFunction::Radial(p) => {
                let (u, du) = (p.u.clone(), p.du.clone());
                let d2u = p.d2u.as_ref().map(|d2| {
                    let d2 = d2.clone();
                    Arc::new(move |r: Scalar| prefactor * scale * scale * d2(scale * r)) as RFn
                });
                TestFunction::Radial(RadialParts {
                    u: Arc::new(move |r| prefactor * u(scale * r)),
                    du: Arc::new(move |r| prefactor * scale * du(scale * r)),
                    d2u,
                    support,
                    decay,
                    edges,
                })
            }
            TestFunction::Axisymmetric(p) => {
                let (u, grad) = (p.u.clone(), p.grad.clone());
                TestFunction::Axisymmetric(AxisymParts {
                    u: Arc::new(move |rho, z| prefactor * u(scale * rho, scale * z)),
                    grad: Arc::new(move |rho, z| {
                        let g = grad(scale * rho, scale * z);
                        (prefactor * scale * g.0, prefactor * scale * g.1)
                    }),
                    support,
                    decay,
                    edges,
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// First-order minimizer family.
// ---------------------------------------------------------------------------

pub(crate) fn family_of(params: &CknParams) -> Family {
    match params.regime {
        FirstOrderRegime::P2Case2 => Family::FirstOrderCase2,
        _ => Family::FirstOrderCase1,
    }
}

fn check_first_order(params: &CknParams, pt: &MinimizerPoint) -> Result<()> {
    if pt.family != family_of(params) {
        return Err(CknError::RegimeMismatch(format!(
            "minimizer family {:?} does not match regime {:?}",
            pt.family, params.regime
        )));
    }
    Ok(())
}

/// Origin power of the family profile: `r^eta exp(-lambda r^gamma1 / gamma1)`.
fn family_eta(params: &CknParams) -> Scalar {
    match params.regime {
        FirstOrderRegime::P2Case2 => 2.0 * params.b + 2.0 - params.n_dim as Scalar,
        _ => 0.0,
    }
}

/// Closed-form value and radial derivative of a first-order family member.
pub fn minimizer_eval(
    params: &CknParams,
    pt: &MinimizerPoint,
    r: Scalar,
) -> Result<(Scalar, Scalar)> {
    check_first_order(params, pt)?;
    if !(r > 0.0) {
        return Err(CknError::InvalidInput(format!("need r > 0, got {r}")));
    }
    let eta = family_eta(params);
    let g1 = params.gamma1;
    // k multiplies last so that scaling in k is exact
    let unit = params.c1 * pt.lambda.powf(params.alpha);
    let v1 = unit * r.powf(eta) * (-pt.lambda * r.powf(g1) / g1).exp();
    let logd = eta / r - pt.lambda * r.powf(g1 - 1.0);
    Ok((pt.k * v1, pt.k * (v1 * logd)))
}

/// Closed-form norm triple `(H_b, L_a, L_c)` of a family member:
/// `(|k| lambda^{1-1/p} S^{1/p}, |k| (S/lambda)^{1/p}, |k|)`.
pub fn minimizer_norms(params: &CknParams, pt: &MinimizerPoint) -> Result<(Scalar, Scalar, Scalar)> {
    check_first_order(params, pt)?;
    let (s, lam, p) = (params.s_const, pt.lambda, params.p);
    let l_c = pt.k.abs();
    let l_a = l_c * (s / lam).powf(1.0 / p);
    let h_b = lam * l_a;
    Ok((h_b, l_a, l_c))
}

/// First-order family member as a radial [`TestFunction`].
pub fn minimizer_profile(params: &CknParams, pt: &MinimizerPoint) -> Result<TestFunction> {
    check_first_order(params, pt)?;
    let eta = family_eta(params);
    let g1 = params.gamma1;
    let lam = pt.lambda;
    let k = pt.k;
    let unit = params.c1 * lam.powf(params.alpha);
    let base = move |r: Scalar| k * (unit * r.powf(eta) * (-lam * r.powf(g1) / g1).exp());
    let logd = move |r: Scalar| eta / r - lam * r.powf(g1 - 1.0);
    let dlogd = move |r: Scalar| -eta / (r * r) - lam * (g1 - 1.0) * r.powf(g1 - 2.0);
    Ok(TestFunction::Radial(RadialParts {
        u: Arc::new(base),
        du: Arc::new(move |r| base(r) * logd(r)),
        d2u: Some(Arc::new(move |r| {
            let ld = logd(r);
            base(r) * (ld * ld + dlogd(r))
        })),
        support: (0.0, Scalar::INFINITY),
        decay: Decay { q: lam / (2.0 * g1), gamma: g1 },
        edges: Vec::new(),
    }))
}

/// Anisotropic image `u(x) = v(A x)` of a family member, `A = diag(1,...,1,
/// a_last)`, as an axisymmetric function of `(rho, z)`.
pub fn anisotropic_wrap(
    params: &CknParams,
    pt: &MinimizerPoint,
    a_last: Scalar,
) -> Result<TestFunction> {
    if !(a_last > 0.0) || !a_last.is_finite() {
        return Err(CknError::InvalidInput("diagonal entry must be positive".into()));
    }
    let v = minimizer_profile(params, pt)?;
    let p = v.radial()?.clone();
    let (u, du) = (p.u.clone(), p.du.clone());
    let a2 = a_last * a_last;
    let decay = Decay {
        q: p.decay.q * a_last.min(1.0).powf(p.decay.gamma),
        gamma: p.decay.gamma,
    };
    Ok(TestFunction::Axisymmetric(AxisymParts {
        u: Arc::new(move |rho, z| u((rho * rho + a2 * z * z).sqrt().max(1e-300))),
        grad: Arc::new(move |rho, z| {
            let s = (rho * rho + a2 * z * z).sqrt().max(1e-300);
            let d = du(s);
            (d * rho / s, d * a2 * z / s)
        }),
        support: (0.0, Scalar::INFINITY),
        decay,
        edges: Vec::new(),
    }))
}

// ---------------------------------------------------------------------------
// Second-order minimizer family. The value is the tail integral
// `k C3 lambda^beta int_r^inf s^{1-N} exp(-lambda s^{gamma2}/gamma2) ds`,
// cached on a log grid with exact endpoint slopes (the integrand is closed
// form); first derivative and Laplacian are closed form.
// ---------------------------------------------------------------------------

struct TailCache {
    xs: Vec<Scalar>,
    ys: Vec<Scalar>,
    /// dT/dx at the grid (x = ln r): `-r * integrand(r)`.
    ds: Vec<Scalar>,
    lam: Scalar,
    g2: Scalar,
    n_exp: Scalar,
    spec: QuadratureSpec,
}

impl TailCache {
    fn integrand(&self, r: Scalar) -> Scalar {
        r.powf(self.n_exp) * (-self.lam * r.powf(self.g2) / self.g2).exp()
    }

    fn build(n_dim: u32, lam: Scalar, g2: Scalar, spec: &QuadratureSpec) -> Result<Self> {
        let n_exp = 1.0 - n_dim as Scalar;
        let r_peak = (g2 / lam).powf(1.0 / g2);
        let r_lo = (r_peak * 1e-4).min(1e-5);
        let r_hi = (80.0 * g2 / lam).powf(1.0 / g2).max(4.0 * r_peak);
        let n = 1600usize;
        let (x_lo, x_hi) = (r_lo.ln(), r_hi.ln());
        let dx = (x_hi - x_lo) / (n - 1) as Scalar;
        let xs: Vec<Scalar> = (0..n).map(|i| x_lo + dx * i as Scalar).collect();
        let probe = Self {
            xs: Vec::new(),
            ys: Vec::new(),
            ds: Vec::new(),
            lam,
            g2,
            n_exp,
            spec: spec.clone(),
        };
        let seg_spec = spec.scaled_tol(0.01);
        let mut ys = vec![0.0; n];
        ys[n - 1] = integrate_tail(|s| probe.integrand(s), r_hi, &seg_spec)?.value;
        for i in (0..n - 1).rev() {
            let (a, b) = (xs[i].exp(), xs[i + 1].exp());
            ys[i] = ys[i + 1] + integrate_segment(|s| probe.integrand(s), a, b, &seg_spec)?.value;
        }
        let ds: Vec<Scalar> = xs
            .iter()
            .map(|&x| {
                let r = x.exp();
                -r * probe.integrand(r)
            })
            .collect();
        Ok(Self { xs, ys, ds, lam, g2, n_exp, spec: spec.clone() })
    }

    /// Tail integral from `r`; cubic Hermite on the cached log grid, direct
    /// quadrature outside it.
    fn eval(&self, r: Scalar) -> Scalar {
        let x = r.ln();
        let (x0, xn) = (self.xs[0], *self.xs.last().unwrap());
        if x >= xn {
            return integrate_tail(|s| self.integrand(s), r, &self.spec)
                .map(|i| i.value)
                .unwrap_or(0.0);
        }
        if x < x0 {
            let extra = integrate_segment(|s| self.integrand(s), r, x0.exp(), &self.spec)
                .map(|i| i.value)
                .unwrap_or(0.0);
            return self.ys[0] + extra;
        }
        let dx = self.xs[1] - self.xs[0];
        let i = (((x - x0) / dx) as usize).min(self.xs.len() - 2);
        let t = (x - self.xs[i]) / dx;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * dx * self.ds[i] + h01 * self.ys[i + 1] + h11 * dx * self.ds[i + 1]
    }
}

fn check_second_order(pt: &MinimizerPoint) -> Result<()> {
    if pt.family != Family::SecondOrder {
        return Err(CknError::RegimeMismatch(format!(
            "expected a second-order minimizer point, got {:?}",
            pt.family
        )));
    }
    Ok(())
}

/// Second-order family member as a radial [`TestFunction`]. The value uses a
/// frozen tail-integral cache; `du` and `d2u` are closed form.
pub fn second_minimizer_profile(
    params2: &Ckn2Params,
    pt: &MinimizerPoint,
    spec: &QuadratureSpec,
) -> Result<TestFunction> {
    check_second_order(pt)?;
    let (g2, lam) = (params2.gamma2, pt.lambda);
    let n = params2.n_dim as Scalar;
    let amp = pt.k * params2.c3 * lam.powf(params2.beta);
    let cache = Arc::new(TailCache::build(params2.n_dim, lam, g2, spec)?);
    let du = move |r: Scalar| -amp * r.powf(1.0 - n) * (-lam * r.powf(g2) / g2).exp();
    Ok(TestFunction::Radial(RadialParts {
        u: Arc::new(move |r| amp * cache.eval(r)),
        du: Arc::new(du),
        d2u: Some(Arc::new(move |r| {
            du(r) * ((1.0 - n) / r - lam * r.powf(g2 - 1.0))
        })),
        support: (0.0, Scalar::INFINITY),
        decay: Decay { q: lam / (2.0 * g2), gamma: g2 },
        edges: Vec::new(),
    }))
}

/// Value, radial derivative, and Laplacian of a second-order family member.
pub fn second_minimizer_eval(
    params2: &Ckn2Params,
    pt: &MinimizerPoint,
    r: Scalar,
    spec: &QuadratureSpec,
) -> Result<(Scalar, Scalar, Scalar)> {
    if !(r > 0.0) {
        return Err(CknError::InvalidInput(format!("need r > 0, got {r}")));
    }
    let tf = second_minimizer_profile(params2, pt, spec)?;
    let parts = tf.radial()?;
    let v = (parts.u)(r);
    let d1 = (parts.du)(r);
    let lap = (parts.d2u.as_ref().unwrap())(r) + (params2.n_dim as Scalar - 1.0) * d1 / r;
    Ok((v, d1, lap))
}

/// Closed-form norm triple `(||Delta v||_{L_b}, ||v||_{H_a}, ||v||_{H_c})`:
/// `(|k| lambda^{1-1/p} K^{1/p}, |k| (K/lambda)^{1/p}, |k|)`.
pub fn second_minimizer_norms(
    params2: &Ckn2Params,
    pt: &MinimizerPoint,
) -> Result<(Scalar, Scalar, Scalar)> {
    check_second_order(pt)?;
    let (k_const, lam, p) = (params2.k_const, pt.lambda, params2.p);
    let h_c = pt.k.abs();
    let h_a = h_c * (k_const / lam).powf(1.0 / p);
    let dl_b = lam * h_a;
    Ok((dl_b, h_a, h_c))
}

// ---------------------------------------------------------------------------
// Profile specifications and construction.
// ---------------------------------------------------------------------------

/// How a perturbation is applied to a minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// Additive smooth compactly-supported bump, normalized so that the
    /// perturbation has weighted norm `eps * |k|`.
    GaussBump,
    /// Multiplicative bounded rational tilt `v * (1 + eps * t(r))`.
    PolyTilt,
    /// Average of the two members at `lambda e^{+-eps}`.
    ScaleSplit,
}

/// Named closed-form radial profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormName {
    Gaussian,
    ExpR,
    Bump,
}

/// Declarative description of a test function, with a canonical JSON encoding
/// tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Minimizer { k: Scalar, lambda: Scalar },
    PerturbedMinimizer { k: Scalar, lambda: Scalar, eps: Scalar, mode: PerturbationMode },
    ClosedForm { name: ClosedFormName, scale: Scalar },
    Samples { r_grid: Vec<Scalar>, values: Vec<Scalar> },
}

/// Smooth bump supported on `(center - width, center + width)`, value 1 at the
/// center, all derivatives vanishing at the edges.
fn bump_parts(center: Scalar, width: Scalar) -> RadialParts {
    let val = move |r: Scalar| {
        let t = (r - center) / width;
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    };
    let d1 = move |r: Scalar| {
        let t = (r - center) / width;
        if t.abs() >= 1.0 {
            0.0
        } else {
            let den = 1.0 - t * t;
            val(r) * (-2.0 * t / (den * den)) / width
        }
    };
    let d2 = move |r: Scalar| {
        let t = (r - center) / width;
        if t.abs() >= 1.0 {
            0.0
        } else {
            let den = 1.0 - t * t;
            let phi1 = -2.0 * t / (den * den);
            let phi2 = (-2.0 - 6.0 * t * t) / (den * den * den);
            val(r) * (phi1 * phi1 + phi2) / (width * width)
        }
    };
    RadialParts {
        u: Arc::new(val),
        du: Arc::new(d1),
        d2u: Some(Arc::new(d2)),
        support: (center - width, center + width),
        decay: Decay { q: 1.0, gamma: 1.0 },
        edges: vec![center - width, center + width],
    }
}

fn closed_form_parts(name: ClosedFormName, scale: Scalar) -> Result<TestFunction> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(CknError::InvalidInput("profile scale must be positive".into()));
    }
    let tf = match name {
        ClosedFormName::Gaussian => {
            let s2 = scale * scale;
            TestFunction::Radial(RadialParts {
                u: Arc::new(move |r| (-r * r / s2).exp()),
                du: Arc::new(move |r| -2.0 * r / s2 * (-r * r / s2).exp()),
                d2u: Some(Arc::new(move |r| {
                    (4.0 * r * r / (s2 * s2) - 2.0 / s2) * (-r * r / s2).exp()
                })),
                support: (0.0, Scalar::INFINITY),
                decay: Decay { q: 1.0 / s2, gamma: 2.0 },
                edges: Vec::new(),
            })
        }
        ClosedFormName::ExpR => TestFunction::Radial(RadialParts {
            u: Arc::new(move |r| (-r / scale).exp()),
            du: Arc::new(move |r| -(-r / scale).exp() / scale),
            d2u: Some(Arc::new(move |r| (-r / scale).exp() / (scale * scale))),
            support: (0.0, Scalar::INFINITY),
            decay: Decay { q: 0.9 / scale, gamma: 1.0 },
            edges: Vec::new(),
        }),
        ClosedFormName::Bump => TestFunction::Radial(bump_parts(2.0 * scale, scale)),
    };
    Ok(tf)
}

/// Monotone-safe cubic interpolation of `(ln r, value)` samples, zero-extended
/// with one C1 blending cell on each side.
struct SampledSpline {
    xs: Vec<Scalar>,
    ys: Vec<Scalar>,
    ms: Vec<Scalar>,
}

impl SampledSpline {
    fn build(r_grid: &[Scalar], values: &[Scalar]) -> Result<Self> {
        if r_grid.len() < 8 {
            return Err(CknError::BadSamples(format!(
                "need at least 8 samples, got {}",
                r_grid.len()
            )));
        }
        if r_grid.len() != values.len() {
            return Err(CknError::BadSamples("grid/value length mismatch".into()));
        }
        let mut prev = 0.0;
        for &r in r_grid {
            if !(r > prev) || !r.is_finite() {
                return Err(CknError::BadSamples(
                    "grid must be positive, finite and strictly increasing".into(),
                ));
            }
            prev = r;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CknError::BadSamples("values must be finite".into()));
        }
        let xs: Vec<Scalar> = r_grid.iter().map(|r| r.ln()).collect();
        let ys = values.to_vec();
        let n = xs.len();
        // Fritsch-Carlson slopes keep the interpolant free of overshoot.
        let h: Vec<Scalar> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<Scalar> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ms = vec![0.0; n];
        ms[0] = delta[0];
        ms[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                ms[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ms[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Ok(Self { xs, ys, ms })
    }

    fn blend_lo(&self) -> Scalar {
        self.xs[0] - (self.xs[1] - self.xs[0])
    }

    fn blend_hi(&self) -> Scalar {
        let n = self.xs.len();
        self.xs[n - 1] + (self.xs[n - 1] - self.xs[n - 2])
    }

    /// Value and d/dx at `x = ln r`.
    fn eval(&self, x: Scalar) -> (Scalar, Scalar) {
        let n = self.xs.len();
        let hermite = |t: Scalar, dx: Scalar, y0: Scalar, m0: Scalar, y1: Scalar, m1: Scalar| {
            let (t2, t3) = (t * t, t * t * t);
            let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * dx * m0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * dx * m1;
            let d = (6.0 * t2 - 6.0 * t) * y0 / dx
                + (3.0 * t2 - 4.0 * t + 1.0) * m0
                + (-6.0 * t2 + 6.0 * t) * y1 / dx
                + (3.0 * t2 - 2.0 * t) * m1;
            (v, d)
        };
        if x < self.blend_lo() || x > self.blend_hi() {
            return (0.0, 0.0);
        }
        if x < self.xs[0] {
            let dx = self.xs[1] - self.xs[0];
            let t = (x - self.blend_lo()) / dx;
            return hermite(t, dx, 0.0, 0.0, self.ys[0], self.ms[0]);
        }
        if x >= self.xs[n - 1] {
            let dx = self.xs[n - 1] - self.xs[n - 2];
            let t = (x - self.xs[n - 1]) / dx;
            return hermite(t, dx, self.ys[n - 1], self.ms[n - 1], 0.0, 0.0);
        }
        let mut i = match self
            .xs
            .binary_search_by(|probe| probe.partial_cmp(&x).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        i = i.min(n - 2);
        let dx = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / dx;
        hermite(t, dx, self.ys[i], self.ms[i], self.ys[i + 1], self.ms[i + 1])
    }
}

fn sampled_parts(r_grid: &[Scalar], values: &[Scalar]) -> Result<TestFunction> {
    let spline = Arc::new(SampledSpline::build(r_grid, values)?);
    let support = (spline.blend_lo().exp(), spline.blend_hi().exp());
    let mut edges: Vec<Scalar> = spline.xs.iter().map(|x| x.exp()).collect();
    edges.insert(0, support.0);
    edges.push(support.1);
    let s1 = spline.clone();
    let s2 = spline.clone();
    Ok(TestFunction::Radial(RadialParts {
        u: Arc::new(move |r| s1.eval(r.ln()).0),
        du: Arc::new(move |r| s2.eval(r.ln()).1 / r),
        d2u: None,
        support,
        decay: Decay { q: 1.0, gamma: 1.0 },
        edges,
    }))
}

/// Characteristic radius of a family member (where the decaying exponent
/// reaches one); perturbations are placed around it.
fn family_scale(gamma: Scalar, lambda: Scalar) -> Scalar {
    (gamma / lambda).powf(1.0 / gamma)
}

fn perturbed_first_order(
    params: &CknParams,
    k: Scalar,
    lambda: Scalar,
    eps: Scalar,
    mode: PerturbationMode,
    spec: &QuadratureSpec,
) -> Result<TestFunction> {
    if !(eps.is_finite()) || eps < 0.0 {
        return Err(CknError::InvalidInput("perturbation size must be >= 0".into()));
    }
    let pt = MinimizerPoint::new(family_of(params), k, lambda)?;
    let v = minimizer_profile(params, &pt)?;
    match mode {
        PerturbationMode::GaussBump => {
            let r0 = family_scale(params.gamma1, lambda);
            let bump = TestFunction::Radial(bump_parts(r0, r0 / 2.0));
            let b = bump.radial()?.u.clone();
            let p = params.p;
            let wexp = params.n_dim as Scalar - 1.0 - p * params.c;
            let bspec = spec.with_fixed_r(1.5 * r0 * 1.0001);
            let norm_p = integrate_radial(|r: f64| b(r).abs().powf(p), wexp, &bspec)?;
            let bn = (crate::numerics::sphere_area::<Scalar>(params.n_dim) * norm_p.value)
                .powf(1.0 / p);
            Ok(TestFunction::lin_comb(1.0, &v, eps * k.abs() / bn, &bump))
        }
        PerturbationMode::PolyTilt => Ok(apply_tilt(&v, family_scale(params.gamma1, lambda), eps)),
        PerturbationMode::ScaleSplit => {
            let hi = MinimizerPoint::new(pt.family, k, lambda * eps.exp())?;
            let lo = MinimizerPoint::new(pt.family, k, lambda * (-eps).exp())?;
            Ok(TestFunction::lin_comb(
                0.5,
                &minimizer_profile(params, &hi)?,
                0.5,
                &minimizer_profile(params, &lo)?,
            ))
        }
    }
}

/// Multiplicative tilt `u = v (1 + eps t)`, `t = (r^2 - r0^2)/(r^2 + r0^2)`.
fn apply_tilt(v: &TestFunction, r0: Scalar, eps: Scalar) -> TestFunction {
    let parts = v.radial().expect("tilt applies to radial profiles").clone();
    let r02 = r0 * r0;
    let t = move |r: Scalar| (r * r - r02) / (r * r + r02);
    let t1 = move |r: Scalar| {
        let den = r * r + r02;
        4.0 * r * r02 / (den * den)
    };
    let t2 = move |r: Scalar| {
        let den = r * r + r02;
        4.0 * r02 * (r02 - 3.0 * r * r) / (den * den * den)
    };
    let d2u = parts.d2u.as_ref().map(|d2| {
        let (u, du, d2) = (parts.u.clone(), parts.du.clone(), d2.clone());
        Arc::new(move |r: Scalar| {
            d2(r) * (1.0 + eps * t(r)) + 2.0 * du(r) * eps * t1(r) + u(r) * eps * t2(r)
        }) as RFn
    });
    let (u2, du2) = (parts.u.clone(), parts.du.clone());
    let u3 = parts.u.clone();
    TestFunction::Radial(RadialParts {
        u: Arc::new(move |r| u3(r) * (1.0 + eps * t(r))),
        du: Arc::new(move |r| du2(r) * (1.0 + eps * t(r)) + u2(r) * eps * t1(r)),
        d2u,
        support: parts.support,
        decay: parts.decay,
        edges: parts.edges,
    })
}

/// Build a radial test function for the first-order parameter regime.
pub fn make_profile(
    spec: &ProfileSpec,
    params: &CknParams,
    quad: &QuadratureSpec,
) -> Result<TestFunction> {
    let tf = match spec {
        ProfileSpec::Minimizer { k, lambda } => {
            let pt = MinimizerPoint::new(family_of(params), *k, *lambda)?;
            minimizer_profile(params, &pt)?
        }
        ProfileSpec::PerturbedMinimizer { k, lambda, eps, mode } => {
            perturbed_first_order(params, *k, *lambda, *eps, *mode, quad)?
        }
        ProfileSpec::ClosedForm { name, scale } => closed_form_parts(*name, *scale)?,
        ProfileSpec::Samples { r_grid, values } => sampled_parts(r_grid, values)?,
    };
    verify_derivative_consistency(&tf, 32, 0x5eed)?;
    Ok(tf)
}

/// Build a radial test function for the second-order parameter regime.
pub fn make_profile2(
    spec: &ProfileSpec,
    params2: &Ckn2Params,
    quad: &QuadratureSpec,
) -> Result<TestFunction> {
    let tf = match spec {
        ProfileSpec::Minimizer { k, lambda } => {
            let pt = MinimizerPoint::new(Family::SecondOrder, *k, *lambda)?;
            second_minimizer_profile(params2, &pt, quad)?
        }
        ProfileSpec::PerturbedMinimizer { k, lambda, eps, mode } => {
            let pt = MinimizerPoint::new(Family::SecondOrder, *k, *lambda)?;
            let v = second_minimizer_profile(params2, &pt, quad)?;
            match mode {
                PerturbationMode::GaussBump => {
                    let r0 = family_scale(params2.gamma2, *lambda);
                    let bump = TestFunction::Radial(bump_parts(r0, r0 / 2.0));
                    // normalized against the gradient-level weighted norm,
                    // which is the natural size for this family
                    let b = bump.radial()?.du.clone();
                    let p = params2.p;
                    let wexp = params2.n_dim as Scalar - 1.0 - p * params2.c2;
                    let bspec = quad.with_fixed_r(1.5 * r0 * 1.0001);
                    let norm_p = integrate_radial(|r: f64| b(r).abs().powf(p), wexp, &bspec)?;
                    let bn = (crate::numerics::sphere_area::<Scalar>(params2.n_dim)
                        * norm_p.value)
                        .powf(1.0 / p);
                    TestFunction::lin_comb(1.0, &v, eps * k.abs() / bn, &bump)
                }
                PerturbationMode::PolyTilt => {
                    apply_tilt(&v, family_scale(params2.gamma2, *lambda), *eps)
                }
                PerturbationMode::ScaleSplit => {
                    let hi = MinimizerPoint::new(Family::SecondOrder, *k, lambda * eps.exp())?;
                    let lo = MinimizerPoint::new(Family::SecondOrder, *k, lambda * (-eps).exp())?;
                    TestFunction::lin_comb(
                        0.5,
                        &second_minimizer_profile(params2, &hi, quad)?,
                        0.5,
                        &second_minimizer_profile(params2, &lo, quad)?,
                    )
                }
            }
        }
        ProfileSpec::ClosedForm { name, scale } => closed_form_parts(*name, *scale)?,
        ProfileSpec::Samples { r_grid, values } => sampled_parts(r_grid, values)?,
    };
    verify_derivative_consistency(&tf, 32, 0x5eed)?;
    Ok(tf)
}

/// Check `du` (and `d2u` when present) against central differences at random
/// radii inside the support. Construction-time guard for every profile.
pub fn verify_derivative_consistency(u: &TestFunction, n: usize, seed: u64) -> Result<()> {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let (lo, hi) = u.support();
    // keep probes away from the extreme origin: for families singular at 0
    // the central-difference truncation error at step 1e-5 dominates there
    let lo = lo.max(5e-2);
    let hi = hi.min(25.0);
    if !(lo < hi) {
        return Ok(());
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    match u {
        TestFunction::Radial(p) => {
            for _ in 0..n {
                let r: Scalar = rng.gen_range(llo..lhi).exp();
                let h = 1e-5 * r.max(1.0);
                if r - h <= 0.0 {
                    continue;
                }
                let fd = ((p.u)(r + h) - (p.u)(r - h)) / (2.0 * h);
                let d = (p.du)(r);
                if (fd - d).abs() > 1e-5 * (1.0 + d.abs()) {
                    return Err(CknError::InvalidInput(format!(
                        "derivative inconsistent at r = {r}: fd {fd} vs du {d}"
                    )));
                }
                if let Some(d2) = &p.d2u {
                    let fd2 = ((p.du)(r + h) - (p.du)(r - h)) / (2.0 * h);
                    let d2v = d2(r);
                    if (fd2 - d2v).abs() > 1e-5 * (1.0 + d2v.abs()) {
                        return Err(CknError::InvalidInput(format!(
                            "second derivative inconsistent at r = {r}"
                        )));
                    }
                }
            }
        }
        TestFunction::Axisymmetric(p) => {
            for _ in 0..n {
                let s: Scalar = rng.gen_range(llo..lhi).exp();
                let phi: Scalar = rng.gen_range(0.05..1.5);
                let (rho, z) = (s * phi.cos(), s * phi.sin());
                let h = 1e-5 * s.max(1.0);
                let (grho, gz) = (p.grad)(rho, z);
                let fd_rho = ((p.u)(rho + h, z) - (p.u)((rho - h).max(1e-12), z)) / (2.0 * h);
                let fd_z = ((p.u)(rho, z + h) - (p.u)(rho, z - h)) / (2.0 * h);
                if (fd_rho - grho).abs() > 1e-5 * (1.0 + grho.abs())
                    || (fd_z - gz).abs() > 1e-5 * (1.0 + gz.abs())
                {
                    return Err(CknError::InvalidInput(format!(
                        "gradient inconsistent at (rho, z) = ({rho}, {z})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_first_order, derive_second_order};

    fn p45() -> CknParams {
        derive_first_order(4, 2.0, 0.5, 0.5).unwrap()
    }

    fn p93() -> CknParams {
        derive_first_order(9, 3.0, 1.25, 1.0).unwrap()
    }

    fn p2nd() -> Ckn2Params {
        derive_second_order(4, 2.0, -2.5, -2.5).unwrap()
    }

    #[test]
    fn minimizer_eval_collapses_to_exponential() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0 / params.c1, 1.0).unwrap();
        let (v, dv) = minimizer_eval(&params, &pt, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-14);
        assert!((dv + (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn case2_profile_shape() {
        // family member at (4,2,1,2): C1 r^2 e^{-lambda r^2/2} with C1 = 1/pi
        let params = derive_first_order(4, 2.0, 1.0, 2.0).unwrap();
        let pt = MinimizerPoint::new(Family::FirstOrderCase2, 1.0, 1.0).unwrap();
        for r in [0.3, 1.0, 2.2] {
            let (v, _) = minimizer_eval(&params, &pt, r).unwrap();
            let want = params.c1 * r * r * (-r * r / 2.0).exp();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_k_rejected() {
        assert!(MinimizerPoint::new(Family::FirstOrderCase1, 0.0, 1.0).is_err());
        assert!(MinimizerPoint::new(Family::FirstOrderCase1, 1.0, -1.0).is_err());
    }

    #[test]
    fn family_mismatch_rejected() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::SecondOrder, 1.0, 1.0).unwrap();
        assert!(matches!(
            minimizer_eval(&params, &pt, 1.0),
            Err(CknError::RegimeMismatch(_))
        ));
    }

    #[test]
    fn closed_form_norm_examples() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 3.0, 1.0).unwrap();
        let (h, a, c) = minimizer_norms(&params, &pt).unwrap();
        assert!((h - 3.0).abs() < 1e-14 && (a - 3.0).abs() < 1e-14 && (c - 3.0).abs() < 1e-14);

        let params = p93();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 8.0).unwrap();
        let (h, a, _) = minimizer_norms(&params, &pt).unwrap();
        let want_a = (1.5f64 / 8.0).powf(1.0 / 3.0);
        assert!((a - want_a).abs() < 1e-14);
        assert!((h - 8.0 * want_a).abs() < 1e-13);
    }

    #[test]
    fn linearity_in_k() {
        let params = p93();
        for lam in [0.3, 1.0, 4.0] {
            let pt1 = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, lam).unwrap();
            let ptk = MinimizerPoint::new(Family::FirstOrderCase1, -2.5, lam).unwrap();
            for r in [0.1, 1.0, 3.0] {
                let (v1, d1) = minimizer_eval(&params, &pt1, r).unwrap();
                let (vk, dk) = minimizer_eval(&params, &ptk, r).unwrap();
                assert_eq!(vk, -2.5 * v1);
                assert_eq!(dk, -2.5 * d1);
            }
        }
    }

    #[test]
    fn second_order_family_values() {
        let params2 = p2nd();
        let pt = MinimizerPoint::new(Family::SecondOrder, 1.0, 1.0).unwrap();
        let spec = QuadratureSpec::default();
        // frozen tail integrals: int_r^inf s^{-3} e^{-s} ds at r = 0.5, 1, 2
        let oracle = [
            (0.5, 0.8864174571007138294771975),
            (1.0, 0.1096919671977601368385819),
            (2.0, 0.007533344949453973296869981),
        ];
        for (r, tail) in oracle {
            let (v, d1, lap) = second_minimizer_eval(&params2, &pt, r, &spec).unwrap();
            let want_v = params2.c3 * tail;
            assert!(
                ((v - want_v) / want_v).abs() < 1e-8,
                "value at {r}: {v} vs {want_v}"
            );
            // derivative -C3 r^{-3} e^{-r}, laplacian +C3 r^{-3} e^{-r}
            let want_d = -params2.c3 * r.powf(-3.0) * (-r).exp();
            assert!(((d1 - want_d) / want_d).abs() < 1e-12);
            assert!(((lap + want_d) / want_d).abs() < 1e-12);
        }
    }

    #[test]
    fn second_order_value_decreasing_to_zero() {
        let params2 = p2nd();
        let pt = MinimizerPoint::new(Family::SecondOrder, 1.0, 1.0).unwrap();
        let spec = QuadratureSpec::default();
        let tf = second_minimizer_profile(&params2, &pt, &spec).unwrap();
        let parts = tf.radial().unwrap();
        let mut prev = Scalar::INFINITY;
        for r in [0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let v = (parts.u)(r);
            assert!(v > 0.0 && v < prev, "not decreasing at {r}: {v} vs {prev}");
            prev = v;
        }
        assert!((parts.u)(30.0) < 1e-14);
    }

    #[test]
    fn second_order_norm_relations() {
        let params2 = p2nd();
        let pt = MinimizerPoint::new(Family::SecondOrder, 1.0, 2.0).unwrap();
        let (dlb, ha, hc) = second_minimizer_norms(&params2, &pt).unwrap();
        assert!((hc - 1.0).abs() < 1e-14);
        assert!((ha - (0.5f64).sqrt()).abs() < 1e-14);
        assert!((dlb - 2.0 * (0.5f64).sqrt()).abs() < 1e-14);
        // homogeneity in k
        let pt3 = MinimizerPoint::new(Family::SecondOrder, -3.0, 2.0).unwrap();
        let (d3, a3, c3) = second_minimizer_norms(&params2, &pt3).unwrap();
        assert!((d3 - 3.0 * dlb).abs() < 1e-13 && (a3 - 3.0 * ha).abs() < 1e-13);
        assert!((c3 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn profiles_pass_derivative_checks() {
        let params = p45();
        let quad = QuadratureSpec::default();
        let specs = [
            ProfileSpec::Minimizer { k: 1.0, lambda: 1.3 },
            ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 1.0,
                eps: 0.05,
                mode: PerturbationMode::GaussBump,
            },
            ProfileSpec::PerturbedMinimizer {
                k: -2.0,
                lambda: 0.7,
                eps: 0.1,
                mode: PerturbationMode::PolyTilt,
            },
            ProfileSpec::PerturbedMinimizer {
                k: 1.0,
                lambda: 2.0,
                eps: 0.15,
                mode: PerturbationMode::ScaleSplit,
            },
            ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            ProfileSpec::ClosedForm { name: ClosedFormName::ExpR, scale: 1.5 },
            ProfileSpec::ClosedForm { name: ClosedFormName::Bump, scale: 0.8 },
        ];
        for s in &specs {
            let tf = make_profile(s, &params, &quad).unwrap();
            verify_derivative_consistency(&tf, 100, 99).unwrap();
        }
    }

    #[test]
    fn second_order_profiles_pass_derivative_checks() {
        let params2 = p2nd();
        let quad = QuadratureSpec::default();
        for mode in [
            PerturbationMode::GaussBump,
            PerturbationMode::PolyTilt,
            PerturbationMode::ScaleSplit,
        ] {
            let s = ProfileSpec::PerturbedMinimizer { k: 1.0, lambda: 1.0, eps: 0.05, mode };
            let tf = make_profile2(&s, &params2, &quad).unwrap();
            verify_derivative_consistency(&tf, 100, 7).unwrap();
        }
    }

    #[test]
    fn sampled_profile_and_bad_samples() {
        let r: Vec<f64> = (0..16).map(|i| 0.1 * 1.5f64.powi(i)).collect();
        let v: Vec<f64> = r.iter().map(|&x| (-x * x).exp()).collect();
        let tf = sampled_parts(&r, &v).unwrap();
        verify_derivative_consistency(&tf, 100, 3).unwrap();
        let parts = tf.radial().unwrap();
        // interpolates the samples
        for (i, &ri) in r.iter().enumerate() {
            assert!(((parts.u)(ri) - v[i]).abs() < 1e-12);
        }
        // zero outside the blended support
        assert_eq!((parts.u)(tf.support().1 * 1.01), 0.0);
        assert_eq!((parts.u)(tf.support().0 * 0.99), 0.0);

        assert!(matches!(
            sampled_parts(&r[..5], &v[..5]),
            Err(CknError::BadSamples(_))
        ));
        let mut bad = r.clone();
        bad[3] = bad[2];
        assert!(matches!(sampled_parts(&bad, &v), Err(CknError::BadSamples(_))));
    }

    #[test]
    fn perturbation_size_is_calibrated() {
        // the additive bump is normalized so its weighted norm is eps * |k|
        let params = p45();
        let quad = QuadratureSpec::default();
        let s = ProfileSpec::PerturbedMinimizer {
            k: 1.0,
            lambda: 1.0,
            eps: 0.01,
            mode: PerturbationMode::GaussBump,
        };
        let u = make_profile(&s, &params, &quad).unwrap();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 1.0).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        let diff = TestFunction::lin_comb(1.0, &u, -1.0, &v);
        let parts = diff.radial().unwrap();
        let du = parts.u.clone();
        let wexp = params.n_dim as Scalar - 1.0 - params.p * params.c;
        let i = integrate_radial(|r: f64| du(r).powi(2), wexp, &quad.with_fixed_r(3.0)).unwrap();
        let norm = (crate::numerics::sphere_area::<Scalar>(4) * i.value).sqrt();
        assert!(norm <= 0.02, "perturbation norm {norm}");
        assert!(norm >= 0.005, "perturbation norm {norm}");
    }

    #[test]
    fn anisotropic_wrap_identity_matches_radial() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 1.0).unwrap();
        let wrapped = anisotropic_wrap(&params, &pt, 1.0).unwrap();
        let radial = minimizer_profile(&params, &pt).unwrap();
        for (rho, z) in [(0.5, 0.0), (1.0, 1.0), (0.1, 2.0), (3.0, 0.7)] {
            let a = wrapped.axi_value(rho, z);
            let b = radial.axi_value(rho, z);
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
            let ga = wrapped.axi_grad(rho, z);
            let gb = radial.axi_grad(rho, z);
            assert!((ga.0 - gb.0).abs() < 1e-13 && (ga.1 - gb.1).abs() < 1e-13);
        }
    }

    #[test]
    fn anisotropic_gradient_finite_differences() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 1.0).unwrap();
        let wrapped = anisotropic_wrap(&params, &pt, 1.125).unwrap();
        verify_derivative_consistency(&wrapped, 100, 11).unwrap();
    }

    #[test]
    fn profile_spec_json_round_trip() {
        let specs = vec![
            ProfileSpec::Minimizer { k: 1.0, lambda: 2.0 },
            ProfileSpec::PerturbedMinimizer {
                k: -1.0,
                lambda: 0.5,
                eps: 0.01,
                mode: PerturbationMode::GaussBump,
            },
            ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            ProfileSpec::Samples { r_grid: vec![1.0, 2.0], values: vec![0.1, 0.2] },
        ];
        for s in specs {
            let j = serde_json::to_string(&s).unwrap();
            let back: ProfileSpec = serde_json::from_str(&j).unwrap();
            assert_eq!(s, back);
        }
        // unknown keys rejected
        let bad = r#"{"kind":"minimizer","k":1.0,"lambda":2.0,"zzz":1}"#;
        assert!(serde_json::from_str::<ProfileSpec>(bad).is_err());
    }

    #[test]
    fn dilate_and_lin_comb() {
        let params = p45();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 1.0).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        let w = v.dilate(2.0, 3.0);
        let (pv, pw) = (v.radial().unwrap(), w.radial().unwrap());
        for r in [0.2, 1.0, 2.5] {
            assert!(((pw.u)(r) - 3.0 * (pv.u)(2.0 * r)).abs() < 1e-14);
            assert!(((pw.du)(r) - 6.0 * (pv.du)(2.0 * r)).abs() < 1e-14);
        }
        let s = TestFunction::lin_comb(2.0, &v, -1.0, &v);
        let ps = s.radial().unwrap();
        for r in [0.2, 1.0, 2.5] {
            assert!(((ps.u)(r) - (pv.u)(r)).abs() < 1e-14);
        }
    }
}
