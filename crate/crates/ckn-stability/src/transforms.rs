//! Structural transformations: deficit-preserving scaling, the radial power
//! substitution reducing the weights to a canonical pair, and the dilation
//! that equalizes the two norms.

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::functionals::norms_first_order;
use crate::numerics::QuadratureSpec;
use crate::params::{derive_first_order, CknParams, FirstOrderRegime};
use crate::profile::TestFunction;
use crate::Scalar;

/// Provenance record of an applied transformation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformRecord {
    pub kind: TransformKind,
    pub parameter: Scalar,
    pub params_in: CknParams,
    pub params_out: CknParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    PhiScale,
    Horiuchi,
    LambdaNormalize,
}

/// Deficit-preserving scaling `u -> lam^{N/p - c} u(lam x)`: it fixes the
/// strongest-weight norm, rescales the other two by `lam^{a-c}` and
/// `lam^{b-c+1}`, and maps the minimizer family onto itself.
pub fn scale_phi(u: &TestFunction, lam: Scalar, params: &CknParams) -> Result<TestFunction> {
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(CknError::InvalidInput(format!(
            "scaling parameter must be positive, got {lam}"
        )));
    }
    let pre = lam.powf(params.n_dim as Scalar / params.p - params.c);
    Ok(u.dilate(lam, pre))
}

/// Radial power substitution `u(r theta) -> u1` reducing the weight pair to
/// the canonical `(-1/(p-1), 0)`; for radial `u` every norm identity in the
/// reduction chain is an equality:
/// `||u||_{H_b}^p = l^{N(p-1)/p} ||u1||_{H_0}^p`, same factor for the middle
/// norm, and `l^{N(p-1)/p - 1}` for the strongest one. Deficits satisfy
/// `delta(u) = l * delta_red(u1)` exactly.
pub fn horiuchi_reduce(
    u: &TestFunction,
    params: &CknParams,
) -> Result<(TestFunction, CknParams)> {
    let p = params.p;
    if params.regime == FirstOrderRegime::P2Case2 {
        return Err(CknError::RegimeMismatch(
            "the power substitution applies to the nonnegative-b regimes".into(),
        ));
    }
    let l = params.l.ok_or_else(|| {
        CknError::RegimeMismatch("reduction exponent undefined: need N > p".into())
    })?;
    let parts = u.radial()?.clone();
    let params_reduced = derive_first_order(params.n_dim, p, -1.0 / (p - 1.0), 0.0)?;

    // u1(r) = u((m r)^{1/l}) with m = l^{(p-1)/p}
    let m = l.powf((p - 1.0) / p);
    let inv_l = 1.0 / l;
    let (u0, du0) = (parts.u.clone(), parts.du.clone());
    let map = move |r: Scalar| (m * r).powf(inv_l);
    let dmap = move |r: Scalar| inv_l * m * (m * r).powf(inv_l - 1.0);
    let sup_map = |rho: Scalar| rho.powf(l) / m;
    let support = (sup_map(parts.support.0.max(0.0)), sup_map(parts.support.1));
    let decay = crate::profile::Decay {
        q: parts.decay.q * m.powf(parts.decay.gamma / l) * 0.9,
        gamma: parts.decay.gamma / l,
    };
    let edges = parts.edges.iter().map(|&e| sup_map(e)).collect();
    let reduced = TestFunction::Radial(crate::profile::RadialParts {
        u: std::sync::Arc::new(move |r| u0(map(r))),
        du: std::sync::Arc::new(move |r| du0(map(r)) * dmap(r)),
        d2u: None,
        support,
        decay,
        edges,
    });
    Ok((reduced, params_reduced))
}

/// Dilate `u` so its two weighted norms coincide: `u(lam^{-1/gamma1} x)` with
/// `lam` the ratio of the gradient-level to the value-level norm. The
/// sum-form deficit of the result equals `p` times the product-form deficit
/// of the input.
pub fn normalize_lambda(
    u: &TestFunction,
    params: &CknParams,
    spec: &QuadratureSpec,
) -> Result<(TestFunction, Scalar)> {
    let norms = norms_first_order(u, params, spec)?;
    if norms.h_b <= 0.0 || norms.l_a <= 0.0 {
        return Err(CknError::ZeroDenominator(
            "both norms must be positive to balance them".into(),
        ));
    }
    let lam = norms.h_b / norms.l_a;
    let s = lam.powf(-1.0 / params.gamma1);
    Ok((u.dilate(s, 1.0), lam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::deficit;
    use crate::profile::{
        make_profile, minimizer_profile, ClosedFormName, Family, MinimizerPoint, ProfileSpec,
    };

    fn p45() -> CknParams {
        derive_first_order(4, 2.0, 0.5, 0.5).unwrap()
    }

    fn p93() -> CknParams {
        derive_first_order(9, 3.0, 1.25, 1.0).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn gaussian(params: &CknParams) -> TestFunction {
        make_profile(
            &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            params,
            &spec(),
        )
        .unwrap()
    }

    #[test]
    fn identity_scaling_is_pointwise_identity() {
        let params = p45();
        let g = gaussian(&params);
        let w = scale_phi(&g, 1.0, &params).unwrap();
        for r in [0.3, 1.0, 2.7] {
            let a = g.radial().unwrap();
            let b = w.radial().unwrap();
            assert_eq!((a.u)(r), (b.u)(r));
        }
    }

    #[test]
    fn scaling_norm_relations() {
        let params = p45();
        let g = gaussian(&params);
        let n0 = norms_first_order(&g, &params, &spec()).unwrap();
        for lam in [0.1, 10.0] {
            let w = scale_phi(&g, lam, &params).unwrap();
            let n1 = norms_first_order(&w, &params, &spec()).unwrap();
            assert!(
                ((n1.l_c - n0.l_c) / n0.l_c).abs() < 1e-8,
                "strongest norm moved: {} vs {}",
                n1.l_c,
                n0.l_c
            );
            let want_a = lam.powf(params.a - params.c) * n0.l_a;
            let want_h = lam.powf(params.b - params.c + 1.0) * n0.h_b;
            assert!(((n1.l_a - want_a) / want_a).abs() < 1e-8);
            assert!(((n1.h_b - want_h) / want_h).abs() < 1e-8);
        }
    }

    #[test]
    fn deficit_invariant_under_scaling() {
        let params = p45();
        let g = gaussian(&params);
        let d0 = deficit(&g, &params, &spec()).unwrap().delta;
        for lam in [0.1, 1.0, 10.0] {
            let w = scale_phi(&g, lam, &params).unwrap();
            let d = deficit(&w, &params, &spec()).unwrap().delta;
            assert!(((d - d0) / d0).abs() < 1e-6, "delta {d} vs {d0} at lam {lam}");
        }
    }

    #[test]
    fn group_property() {
        let params = p45();
        let g = gaussian(&params);
        let w = scale_phi(&scale_phi(&g, 10.0, &params).unwrap(), 0.1, &params).unwrap();
        let (a, b) = (g.radial().unwrap(), w.radial().unwrap());
        for r in [0.2, 0.9, 1.7, 4.1] {
            let (va, vb) = ((a.u)(r), (b.u)(r));
            assert!((va - vb).abs() <= 1e-12 * (1.0 + va.abs()), "{va} vs {vb}");
        }
    }

    #[test]
    fn reduction_sends_minimizers_to_minimizers() {
        let params = p93();
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 1.0, 1.0).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        let (v1, reduced) = horiuchi_reduce(&v, &params).unwrap();
        assert!((reduced.s_const - 3.0).abs() < 1e-14, "S_red = {}", reduced.s_const);
        let d = deficit(&v1, &reduced, &spec()).unwrap();
        assert!(d.delta.abs() < 1e-7, "reduced deficit {}", d.delta);
    }

    #[test]
    fn reduction_scales_deficit_by_l_exactly() {
        let params = p93();
        let l = params.l.unwrap();
        assert_eq!(l, 0.5);
        let g = gaussian(&params);
        let d0 = deficit(&g, &params, &spec()).unwrap().delta;
        let (g1, reduced) = horiuchi_reduce(&g, &params).unwrap();
        let d1 = deficit(&g1, &reduced, &spec()).unwrap().delta;
        assert!(
            ((d0 - l * d1) / d0).abs() < 1e-6,
            "delta {d0} vs l * delta_red {}",
            l * d1
        );
    }

    #[test]
    fn reduction_requires_regime() {
        let params = derive_first_order(4, 2.0, 1.0, 2.0).unwrap();
        let g = gaussian(&p45());
        assert!(matches!(
            horiuchi_reduce(&g, &params),
            Err(CknError::RegimeMismatch(_))
        ));
    }

    #[test]
    fn balancing_equalizes_norms_and_doubles_deficit() {
        let params = p45();
        let g = gaussian(&params);
        let (t, lam) = normalize_lambda(&g, &params, &spec()).unwrap();
        assert!(lam > 0.0);
        let n = norms_first_order(&t, &params, &spec()).unwrap();
        assert!(
            ((n.h_b - n.l_a) / n.l_a).abs() < 1e-8,
            "norms not balanced: {} vs {}",
            n.h_b,
            n.l_a
        );
        let d = deficit(&g, &params, &spec()).unwrap();
        let dt = deficit(&t, &params, &spec()).unwrap();
        assert!(
            ((dt.delta_tilde - 2.0 * d.delta) / d.delta).abs() < 1e-6,
            "tilde {} vs 2 delta {}",
            dt.delta_tilde,
            2.0 * d.delta
        );
    }

    #[test]
    fn balancing_is_idempotent_and_fixes_balanced_members() {
        let params = p45();
        let g = gaussian(&params);
        let (t, _) = normalize_lambda(&g, &params, &spec()).unwrap();
        let (_, lam2) = normalize_lambda(&t, &params, &spec()).unwrap();
        assert!((lam2 - 1.0).abs() < 1e-8, "second pass moved: {lam2}");

        // a minimizer maps to the balanced member and its sum deficit drops
        // to zero
        let pt = MinimizerPoint::new(Family::FirstOrderCase1, 2.0, 3.0).unwrap();
        let v = minimizer_profile(&params, &pt).unwrap();
        let (vt, lam) = normalize_lambda(&v, &params, &spec()).unwrap();
        assert!((lam - 3.0).abs() < 1e-8, "lambda recovered: {lam}");
        let d = deficit(&vt, &params, &spec()).unwrap();
        assert!(d.delta_tilde.abs() < 1e-8, "tilde {}", d.delta_tilde);
    }
}
