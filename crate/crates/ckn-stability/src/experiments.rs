//! Orchestrated verification campaigns over reproducible corpora: weak and
//! strong stability ratios, scaling blow-up, anisotropic sharpness rates, the
//! second-order identity, and the weighted Poincare probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::functionals::{deficit, deficit2, identity2_sides};
use crate::numerics::{integrate_radial, minimize_scalar, sphere_area, QuadratureSpec};
use crate::params::{Ckn2Params, CknParams, FirstOrderRegime};
use crate::profile::{
    anisotropic_wrap, family_of, make_profile, make_profile2, ClosedFormName, MinimizerPoint,
    PerturbationMode, ProfileSpec, TestFunction,
};
use crate::projection::{
    min_distance, project_hc2, project_lc, DistanceObjective, ProjectOpts,
};
use crate::transforms::scale_phi;
use crate::Scalar;

/// Stability statements the campaigns can exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum Theorem {
    /// Weak first-order stability (exponential family regimes).
    T1_3,
    /// Weak first-order stability (power-weight family regime).
    T1_4,
    /// Strong product-form stability at p = 2.
    T1_7,
    /// Strong product-form stability at p > 2 (deficit power 1/p).
    T1_8,
    /// Strong sum-form stability driven by the stronger deficit.
    T1_9,
    /// Weak second-order stability for radial functions.
    T1_10,
    /// Strong second-order stability for radial functions.
    T1_11,
}

/// Reproducible corpus description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    pub seed: u64,
    pub eps_range: (Scalar, Scalar),
    pub n_perturbed: usize,
    pub n_outsiders: usize,
    pub n_sampled: usize,
    pub n_exact: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            eps_range: (0.005, 0.2),
            n_perturbed: 50,
            n_outsiders: 10,
            n_sampled: 5,
            n_exact: 2,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.eps_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(CknError::InvalidInput(
                "perturbation range must satisfy 0 < lo <= hi".into(),
            ));
        }
        if self.n_perturbed + self.n_outsiders + self.n_sampled + self.n_exact == 0 {
            return Err(CknError::InvalidInput("corpus must not be empty".into()));
        }
        Ok(())
    }
}

pub struct CorpusEntry {
    pub profile: ProfileSpec,
    pub func: TestFunction,
}

pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

fn perturbed_specs(
    rng: &mut ChaCha12Rng,
    cs: &CorpusSpec,
    out: &mut Vec<ProfileSpec>,
) {
    let modes = [
        PerturbationMode::GaussBump,
        PerturbationMode::PolyTilt,
        PerturbationMode::ScaleSplit,
    ];
    let (lo, hi) = cs.eps_range;
    for i in 0..cs.n_perturbed {
        let sign = if rng.gen_bool(0.15) { -1.0 } else { 1.0 };
        let k = sign * rng.gen_range(0.5..2.0);
        let lambda = rng.gen_range(-1.2f64..1.2).exp();
        let eps = (rng.gen_range(lo.ln()..=hi.ln())).exp();
        out.push(ProfileSpec::PerturbedMinimizer { k, lambda, eps, mode: modes[i % 3] });
    }
}

fn exact_specs(rng: &mut ChaCha12Rng, cs: &CorpusSpec, out: &mut Vec<ProfileSpec>) {
    for _ in 0..cs.n_exact {
        out.push(ProfileSpec::Minimizer {
            k: rng.gen_range(0.5..2.0),
            lambda: rng.gen_range(-1.0f64..1.0).exp(),
        });
    }
}

fn sampled_spec(rng: &mut ChaCha12Rng) -> ProfileSpec {
    let n = 24usize;
    let r_grid: Vec<Scalar> = (0..n)
        .map(|i| 0.05 * (8.0f64 / 0.05).powf(i as f64 / (n - 1) as f64))
        .collect();
    let a1: Scalar = rng.gen_range(0.3..1.5);
    let s1: Scalar = rng.gen_range(0.5..1.5);
    let a2: Scalar = rng.gen_range(-0.5..0.8);
    let s2: Scalar = rng.gen_range(1.0..3.0);
    let values: Vec<Scalar> = r_grid
        .iter()
        .map(|&r| a1 * (-(r / s1).powi(2)).exp() + a2 * (-(r / s2).powi(2)).exp())
        .collect();
    ProfileSpec::Samples { r_grid, values }
}

/// Deterministic first-order corpus: perturbed members, closed-form
/// outsiders (restricted to origin-vanishing shapes when the strongest
/// weight is not integrable against a nonzero origin value), sampled
/// profiles, and a few exact members.
pub fn build_corpus(
    params: &CknParams,
    cs: &CorpusSpec,
    quad: &QuadratureSpec,
) -> Result<Corpus> {
    cs.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cs.seed);
    let mut specs = Vec::new();
    perturbed_specs(&mut rng, cs, &mut specs);
    let origin_singular = params.p * params.c >= params.n_dim as Scalar - 1e-9;
    let names: &[ClosedFormName] = if origin_singular {
        &[ClosedFormName::Bump]
    } else {
        &[ClosedFormName::Gaussian, ClosedFormName::ExpR, ClosedFormName::Bump]
    };
    for i in 0..cs.n_outsiders {
        specs.push(ProfileSpec::ClosedForm {
            name: names[i % names.len()],
            scale: rng.gen_range(0.6..1.8),
        });
    }
    for _ in 0..cs.n_sampled {
        specs.push(sampled_spec(&mut rng));
    }
    exact_specs(&mut rng, cs, &mut specs);
    let entries = specs
        .into_iter()
        .map(|profile| {
            let func = make_profile(&profile, params, quad)?;
            Ok(CorpusEntry { profile, func })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { entries })
}

/// Deterministic second-order corpus (radial, with second derivatives);
/// sampled profiles carry no second derivative and are skipped here.
pub fn build_corpus2(
    params2: &Ckn2Params,
    cs: &CorpusSpec,
    quad: &QuadratureSpec,
) -> Result<Corpus> {
    cs.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cs.seed);
    let mut specs = Vec::new();
    perturbed_specs(&mut rng, cs, &mut specs);
    let names = [ClosedFormName::Gaussian, ClosedFormName::ExpR, ClosedFormName::Bump];
    for i in 0..cs.n_outsiders {
        specs.push(ProfileSpec::ClosedForm {
            name: names[i % names.len()],
            scale: rng.gen_range(0.6..1.8),
        });
    }
    exact_specs(&mut rng, cs, &mut specs);
    let entries = specs
        .into_iter()
        .map(|profile| {
            let func = make_profile2(&profile, params2, quad)?;
            Ok(CorpusEntry { profile, func })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { entries })
}

// ---------------------------------------------------------------------------
// Stability reports.
// ---------------------------------------------------------------------------

/// Parameter bundle echoed into reports.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum ParamsEcho {
    First(CknParams),
    Second(Ckn2Params),
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub index: usize,
    pub profile: ProfileSpec,
    pub deficit: Scalar,
    pub deficit_tilde: Scalar,
    /// Theorem-specific distance measure (projection distance or normalized
    /// difference quotient).
    pub distance: Scalar,
    /// Theorem ratio: weak rows report numerator/distance^p (the empirical
    /// constant from below), strong rows quotient/deficit^t (from above).
    pub ratio: Scalar,
    pub equality_case: bool,
    pub violation: bool,
    /// Relative residual of the second-order identity (second-order rows).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_rel: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub theorem: Theorem,
    pub params: ParamsEcho,
    pub seed: u64,
    pub rows: Vec<StabilityRow>,
    pub empirical_c_min: Scalar,
    pub empirical_c_max: Scalar,
    /// Relative change of the binding empirical constant under 10x tighter
    /// quadrature, when the mesh check ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_stability: Option<Scalar>,
    pub violations: u32,
}

/// Options shared by the verification campaigns.
#[derive(Debug, Clone)]
pub struct VerifyOpts {
    pub corpus: CorpusSpec,
    pub quad: QuadratureSpec,
    /// Tolerance of the distance searches (looser than projection defaults;
    /// ratios are insensitive at this level).
    pub search_tol: Scalar,
    pub mesh_check: bool,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        Self {
            corpus: CorpusSpec::default(),
            quad: QuadratureSpec::default(),
            search_tol: 1e-9,
            mesh_check: true,
        }
    }
}

const EQUALITY_DEFICIT: Scalar = 1e-10;
const ROW_SLACK: Scalar = 1e-8;

fn project_opts_for(u: &TestFunction, quad: &QuadratureSpec, tol: Scalar, hint: Option<Scalar>) -> ProjectOpts {
    let mut seeds = vec![-4.0, -1.0, 0.0, 1.0, 4.0];
    if let Some(h) = hint {
        seeds = vec![h - 1.5, h, h + 1.5];
    }
    let _ = u;
    ProjectOpts {
        log_lambda_box: (-14.0, 14.0),
        seeds,
        tol,
        quad: quad.clone(),
    }
}

fn summarize(theorem: Theorem, params: ParamsEcho, seed: u64, rows: Vec<StabilityRow>) -> StabilityReport {
    let included: Vec<Scalar> = rows
        .iter()
        .filter(|r| !r.equality_case && r.note.is_none() && r.ratio.is_finite())
        .map(|r| r.ratio)
        .collect();
    let c_min = included.iter().copied().fold(Scalar::INFINITY, Scalar::min);
    let c_max = included.iter().copied().fold(Scalar::NEG_INFINITY, Scalar::max);
    let violations = rows.iter().filter(|r| r.violation).count() as u32;
    StabilityReport {
        theorem,
        params,
        seed,
        rows,
        empirical_c_min: c_min,
        empirical_c_max: c_max,
        mesh_stability: None,
        violations,
    }
}

fn weak_rows(
    corpus: &Corpus,
    params: &CknParams,
    quad: &QuadratureSpec,
    tol: Scalar,
) -> Vec<StabilityRow> {
    corpus
        .entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let mut row = StabilityRow {
                index,
                profile: entry.profile.clone(),
                deficit: Scalar::NAN,
                deficit_tilde: Scalar::NAN,
                distance: Scalar::NAN,
                ratio: Scalar::NAN,
                equality_case: false,
                violation: false,
                identity_rel: None,
                note: None,
            };
            let d = match deficit(&entry.func, params, quad) {
                Ok(d) => d,
                Err(e) => {
                    row.note = Some(format!("deficit failed: {e}"));
                    return row;
                }
            };
            row.deficit = d.delta;
            row.deficit_tilde = d.delta_tilde;
            let scale = d.norms.h_b * d.norms.l_a.powf(params.p - 1.0);
            if d.delta * d.norms.l_c.powf(params.p) < -ROW_SLACK * scale {
                row.violation = true;
            }
            if d.delta_tilde < params.p * d.delta - 1e-9 * scale {
                row.violation = true;
            }
            row.equality_case = d.delta < EQUALITY_DEFICIT;
            let hint = (d.norms.h_b / d.norms.l_a).ln();
            let opts = project_opts_for(&entry.func, quad, tol, Some(hint));
            match project_lc(&entry.func, params, &opts) {
                Ok(pr) => {
                    row.distance = pr.distance;
                    if row.equality_case {
                        // members must project back onto the family
                        if pr.distance > 1e-6 * d.norms.l_c {
                            row.violation = true;
                            row.note = Some("member did not project to distance zero".into());
                        }
                    } else {
                        let numerator = d.delta * d.norms.l_c.powf(params.p);
                        row.ratio = numerator / pr.distance.powf(params.p);
                        if !(row.ratio > 0.0) {
                            row.violation = true;
                        }
                    }
                }
                Err(e) => row.note = Some(format!("projection failed: {e}")),
            }
            row
        })
        .collect()
}

/// Weak first-order stability: deficit numerator against the p-th power of
/// the projection distance, rowwise over the corpus.
pub fn verify_weak_stability(
    params: &CknParams,
    theorem: Theorem,
    opts: &VerifyOpts,
) -> Result<StabilityReport> {
    match (theorem, params.regime) {
        (Theorem::T1_3, FirstOrderRegime::P2Case1 | FirstOrderRegime::PGt2) => {}
        (Theorem::T1_4, FirstOrderRegime::P2Case2) => {}
        _ => {
            return Err(CknError::RegimeMismatch(format!(
                "theorem {theorem:?} does not apply to regime {:?}",
                params.regime
            )))
        }
    }
    let corpus = build_corpus(params, &opts.corpus, &opts.quad)?;
    let rows = weak_rows(&corpus, params, &opts.quad, opts.search_tol);
    let mut report = summarize(theorem, ParamsEcho::First(*params), opts.corpus.seed, rows);
    if opts.mesh_check {
        let fine = opts.quad.scaled_tol(0.1);
        let rows_fine = weak_rows(&corpus, params, &fine, opts.search_tol);
        let fine_report = summarize(theorem, ParamsEcho::First(*params), opts.corpus.seed, rows_fine);
        report.mesh_stability = Some(
            (report.empirical_c_min - fine_report.empirical_c_min).abs()
                / report.empirical_c_min.abs().max(1e-300),
        );
    }
    Ok(report)
}

fn strong_rows(
    corpus: &Corpus,
    params: &CknParams,
    theorem: Theorem,
    quad: &QuadratureSpec,
    tol: Scalar,
) -> Vec<StabilityRow> {
    let p = params.p;
    corpus
        .entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let mut row = StabilityRow {
                index,
                profile: entry.profile.clone(),
                deficit: Scalar::NAN,
                deficit_tilde: Scalar::NAN,
                distance: Scalar::NAN,
                ratio: Scalar::NAN,
                equality_case: false,
                violation: false,
                identity_rel: None,
                note: None,
            };
            let d = match deficit(&entry.func, params, quad) {
                Ok(d) => d,
                Err(e) => {
                    row.note = Some(format!("deficit failed: {e}"));
                    return row;
                }
            };
            row.deficit = d.delta;
            row.deficit_tilde = d.delta_tilde;
            let scale = d.norms.h_b * d.norms.l_a.powf(p - 1.0) / d.norms.l_c.powf(p);
            if d.delta < -ROW_SLACK * scale {
                row.violation = true;
            }
            if d.delta_tilde < p * d.delta - 1e-9 * scale {
                row.violation = true;
            }
            row.equality_case = d.delta < EQUALITY_DEFICIT;
            if row.equality_case {
                return row;
            }
            let hint = (d.norms.h_b / d.norms.l_a).ln();
            let popts = project_opts_for(&entry.func, quad, tol, Some(hint));
            let objective = match theorem {
                Theorem::T1_9 => DistanceObjective::SumHl,
                _ => DistanceObjective::ProductHl,
            };
            match min_distance(&entry.func, Some(params), None, objective, &popts) {
                Ok(dr) => {
                    let (quotient, power, drive) = match theorem {
                        Theorem::T1_7 => (
                            dr.value / (d.norms.h_b * d.norms.l_a),
                            1.0,
                            d.delta,
                        ),
                        Theorem::T1_8 => (
                            dr.value / (d.norms.h_b * d.norms.l_a.powf(p - 1.0)),
                            1.0 / p,
                            d.delta,
                        ),
                        Theorem::T1_9 => (
                            dr.value
                                / (d.norms.h_b.powf(p) + (p - 1.0) * d.norms.l_a.powf(p)),
                            if (p - 2.0).abs() < 1e-12 { 1.0 } else { 1.0 / p },
                            d.delta_tilde,
                        ),
                        _ => unreachable!("first-order strong theorems only"),
                    };
                    row.distance = quotient;
                    row.ratio = quotient / drive.powf(power);
                    if quotient < -ROW_SLACK {
                        row.violation = true;
                    }
                }
                Err(e) => row.note = Some(format!("distance search failed: {e}")),
            }
            row
        })
        .collect()
}

/// Strong first-order stability: normalized product- or sum-form difference
/// quotients against the driving deficit power.
pub fn verify_strong_stability(
    params: &CknParams,
    theorem: Theorem,
    opts: &VerifyOpts,
) -> Result<StabilityReport> {
    let p2 = (params.p - 2.0).abs() < 1e-12;
    match theorem {
        Theorem::T1_7 if p2 => {}
        Theorem::T1_8 if !p2 => {}
        Theorem::T1_9 => {}
        _ => {
            return Err(CknError::RegimeMismatch(format!(
                "theorem {theorem:?} does not apply at p = {}",
                params.p
            )))
        }
    }
    let corpus = build_corpus(params, &opts.corpus, &opts.quad)?;
    let rows = strong_rows(&corpus, params, theorem, &opts.quad, opts.search_tol);
    let mut report = summarize(theorem, ParamsEcho::First(*params), opts.corpus.seed, rows);
    if opts.mesh_check {
        let fine = opts.quad.scaled_tol(0.1);
        let rows_fine = strong_rows(&corpus, params, theorem, &fine, opts.search_tol);
        let fine_report = summarize(theorem, ParamsEcho::First(*params), opts.corpus.seed, rows_fine);
        report.mesh_stability = Some(
            (report.empirical_c_max - fine_report.empirical_c_max).abs()
                / report.empirical_c_max.abs().max(1e-300),
        );
    }
    Ok(report)
}

fn second_rows(
    corpus: &Corpus,
    params2: &Ckn2Params,
    theorem: Theorem,
    quad: &QuadratureSpec,
    tol: Scalar,
) -> Vec<StabilityRow> {
    let p = params2.p;
    corpus
        .entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let mut row = StabilityRow {
                index,
                profile: entry.profile.clone(),
                deficit: Scalar::NAN,
                deficit_tilde: Scalar::NAN,
                distance: Scalar::NAN,
                ratio: Scalar::NAN,
                equality_case: false,
                violation: false,
                identity_rel: None,
                note: None,
            };
            let d = match deficit2(&entry.func, params2, quad) {
                Ok(d) => d,
                Err(e) => {
                    row.note = Some(format!("deficit failed: {e}"));
                    return row;
                }
            };
            row.deficit = d.sigma;
            row.deficit_tilde = d.sigma_tilde;
            let scale = d.norms.dl_b * d.norms.h_a.powf(p - 1.0) / d.norms.h_c.powf(p);
            if d.sigma < -ROW_SLACK * scale {
                row.violation = true;
            }
            if d.sigma_tilde < p * d.sigma - 1e-9 * scale {
                row.violation = true;
            }
            match identity2_sides(&entry.func, params2, quad) {
                Ok(id) => {
                    let denom = id.lhs.abs().max(params2.k_const * d.norms.h_c.powf(p));
                    let rel = (id.lhs - id.rhs).abs() / denom.max(1e-300);
                    row.identity_rel = Some(rel);
                    if rel > 1e-6 {
                        row.violation = true;
                    }
                }
                Err(e) => row.note = Some(format!("identity failed: {e}")),
            }
            row.equality_case = d.sigma < EQUALITY_DEFICIT;
            let hint = (d.norms.dl_b / d.norms.h_a).ln();
            let popts = project_opts_for(&entry.func, quad, tol, Some(hint));
            match theorem {
                Theorem::T1_10 => match project_hc2(&entry.func, params2, &popts) {
                    Ok(pr) => {
                        row.distance = pr.distance;
                        if row.equality_case {
                            if pr.distance > 1e-5 * d.norms.h_c {
                                row.violation = true;
                                row.note =
                                    Some("member did not project to distance zero".into());
                            }
                        } else {
                            let numerator = d.sigma * d.norms.h_c.powf(p);
                            row.ratio = numerator / pr.distance.powf(p);
                            if !(row.ratio > 0.0) {
                                row.violation = true;
                            }
                        }
                    }
                    Err(e) => row.note = Some(format!("projection failed: {e}")),
                },
                Theorem::T1_11 => {
                    if row.equality_case {
                        return row;
                    }
                    match min_distance(
                        &entry.func,
                        None,
                        Some(params2),
                        DistanceObjective::ProductSecond,
                        &popts,
                    ) {
                        Ok(dr) => {
                            let quotient =
                                dr.value / (d.norms.dl_b * d.norms.h_a.powf(p - 1.0));
                            let power = if (p - 2.0).abs() < 1e-12 { 1.0 } else { 1.0 / p };
                            row.distance = quotient;
                            row.ratio = quotient / d.sigma.powf(power);
                            if quotient < -ROW_SLACK {
                                row.violation = true;
                            }
                        }
                        Err(e) => row.note = Some(format!("distance search failed: {e}")),
                    }
                }
                _ => unreachable!("second-order theorems only"),
            }
            row
        })
        .collect()
}

/// Second-order stability for radial functions, including the per-row exact
/// identity residual.
pub fn verify_second_order(
    params2: &Ckn2Params,
    theorem: Theorem,
    opts: &VerifyOpts,
) -> Result<StabilityReport> {
    if !matches!(theorem, Theorem::T1_10 | Theorem::T1_11) {
        return Err(CknError::RegimeMismatch(format!(
            "theorem {theorem:?} is not a second-order statement"
        )));
    }
    let corpus = build_corpus2(params2, &opts.corpus, &opts.quad)?;
    let rows = second_rows(&corpus, params2, theorem, &opts.quad, opts.search_tol);
    let mut report = summarize(theorem, ParamsEcho::Second(*params2), opts.corpus.seed, rows);
    if opts.mesh_check {
        let fine = opts.quad.scaled_tol(0.1);
        let rows_fine = second_rows(&corpus, params2, theorem, &fine, opts.search_tol);
        let fine_report =
            summarize(theorem, ParamsEcho::Second(*params2), opts.corpus.seed, rows_fine);
        let (c0, c1) = match theorem {
            Theorem::T1_10 => (report.empirical_c_min, fine_report.empirical_c_min),
            _ => (report.empirical_c_max, fine_report.empirical_c_max),
        };
        report.mesh_stability = Some((c0 - c1).abs() / c0.abs().max(1e-300));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Sharpness of the p = 2 strong stability rate.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessRow {
    pub j: u32,
    pub delta: Scalar,
    pub quotient: Scalar,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub params: CknParams,
    pub rows: Vec<SharpnessRow>,
    /// Log-log slope of the deficit against 1/j.
    pub slope_delta: Scalar,
    /// Log-log slope of the product-form difference quotient against 1/j.
    pub slope_dist: Scalar,
}

fn regression_slope(xs: &[Scalar], ys: &[Scalar]) -> Scalar {
    let n = xs.len() as Scalar;
    let mx = xs.iter().sum::<Scalar>() / n;
    let my = ys.iter().sum::<Scalar>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Anisotropic images of the unit member at `A = diag(1,...,1,1+1/j)`: the
/// deficit and the strong-stability quotient both decay like `j^{-2}`.
pub fn sharpness_scan(
    params: &CknParams,
    j_list: &[u32],
    opts: &VerifyOpts,
) -> Result<SharpnessReport> {
    if (params.p - 2.0).abs() > 1e-12 {
        return Err(CknError::RegimeMismatch(
            "the sharpness scan drives the p = 2 strong stability bound".into(),
        ));
    }
    if j_list.len() < 3 || j_list.iter().any(|&j| j == 0) {
        return Err(CknError::InvalidInput(
            "need at least 3 positive anisotropy indices".into(),
        ));
    }
    let pt = MinimizerPoint::new(family_of(params), 1.0, 1.0)?;
    let rows = j_list
        .par_iter()
        .map(|&j| -> Result<SharpnessRow> {
            let u = anisotropic_wrap(params, &pt, 1.0 + 1.0 / j as Scalar)?;
            let d = deficit(&u, params, &opts.quad)?;
            let popts = project_opts_for(&u, &opts.quad, opts.search_tol, Some(0.0));
            let dr = min_distance(&u, Some(params), None, DistanceObjective::ProductHl, &popts)?;
            Ok(SharpnessRow {
                j,
                delta: d.delta,
                quotient: dr.value / (d.norms.h_b * d.norms.l_a),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<Scalar> = rows.iter().map(|r| (1.0 / r.j as Scalar).ln()).collect();
    let yd: Vec<Scalar> = rows.iter().map(|r| r.delta.ln()).collect();
    let yq: Vec<Scalar> = rows.iter().map(|r| r.quotient.ln()).collect();
    Ok(SharpnessReport {
        params: *params,
        rows,
        slope_delta: regression_slope(&xs, &yd),
        slope_dist: regression_slope(&xs, &yq),
    })
}

// ---------------------------------------------------------------------------
// Scaling blow-up of the separate-norm distances.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub lam: Scalar,
    pub delta: Scalar,
    /// `inf ||Phi u - v||_{H_b} / ||Phi u||_{L_c}`.
    pub ratio_h: Scalar,
    /// `inf ||Phi u - v||_{L_a} / ||Phi u||_{L_c}`.
    pub ratio_l: Scalar,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub params: CknParams,
    pub rows: Vec<ScalingRow>,
    pub slope_h: Scalar,
    pub slope_l: Scalar,
    /// Maximum relative drift of the deficit across the scaling family.
    pub delta_drift: Scalar,
}

/// Demonstrate that the deficit is scaling-invariant while the separate-norm
/// distances blow up with the scaling exponents `b - c + 1` and `a - c`.
pub fn scaling_blowup(
    u: &TestFunction,
    params: &CknParams,
    lam_list: &[Scalar],
    opts: &VerifyOpts,
) -> Result<ScalingReport> {
    if lam_list.len() < 3 || lam_list.iter().any(|&l| !(l > 0.0)) {
        return Err(CknError::InvalidInput(
            "need at least 3 positive scaling parameters".into(),
        ));
    }
    if (params.b + 1.0 - params.a).abs() < 1e-12 {
        return Err(CknError::InvalidInput(
            "scaling exponents degenerate when b + 1 = a".into(),
        ));
    }
    let d0 = deficit(u, params, &opts.quad)?;
    if d0.delta < 1e-8 {
        return Err(CknError::InvalidInput(
            "the probe function must not lie on the minimizer manifold".into(),
        ));
    }
    let rows = lam_list
        .par_iter()
        .map(|&lam| -> Result<ScalingRow> {
            let w = scale_phi(u, lam, params)?;
            let d = deficit(&w, params, &opts.quad)?;
            let hint = (d.norms.h_b / d.norms.l_a).ln();
            let popts = project_opts_for(&w, &opts.quad, opts.search_tol, Some(hint));
            let dh = min_distance(&w, Some(params), None, DistanceObjective::HOnly, &popts)?;
            let dl = min_distance(&w, Some(params), None, DistanceObjective::LOnly, &popts)?;
            Ok(ScalingRow {
                lam,
                delta: d.delta,
                ratio_h: dh.value / d.norms.l_c,
                ratio_l: dl.value / d.norms.l_c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<Scalar> = rows.iter().map(|r| r.lam.ln()).collect();
    let yh: Vec<Scalar> = rows.iter().map(|r| r.ratio_h.ln()).collect();
    let yl: Vec<Scalar> = rows.iter().map(|r| r.ratio_l.ln()).collect();
    let drift = rows
        .iter()
        .map(|r| (r.delta - d0.delta).abs() / d0.delta)
        .fold(0.0, Scalar::max);
    Ok(ScalingReport {
        params: *params,
        rows,
        slope_h: regression_slope(&xs, &yh),
        slope_l: regression_slope(&xs, &yl),
        delta_drift: drift,
    })
}

// ---------------------------------------------------------------------------
// Weighted Poincare probe.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PoincareRow {
    pub lhs: Scalar,
    pub rhs_inf: Scalar,
    pub ratio: Scalar,
    pub c_star: Scalar,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareReport {
    pub rows: Vec<PoincareRow>,
    pub min_ratio: Scalar,
}

/// Prefactor of the weighted Poincare inequality's left-hand side.
pub fn poincare_prefactor(n_dim: u32, p: Scalar, mu: Scalar, lam_tilde: Scalar) -> Scalar {
    let n = n_dim as Scalar;
    lam_tilde.powf(n * mu / (n - p) - p - mu)
}

/// Evaluate both sides of the exponential-weight Poincare inequality on a
/// radial corpus, solving the inner shift infimum by scalar minimization.
#[allow(clippy::too_many_arguments)]
pub fn poincare_probe(
    funcs: &[TestFunction],
    n_dim: u32,
    p: Scalar,
    mu: Scalar,
    gamma: Scalar,
    m_coef: Scalar,
    lam_tilde: Scalar,
    quad: &QuadratureSpec,
) -> Result<PoincareReport> {
    let n = n_dim as Scalar;
    if !(n - p > mu && mu >= 0.0) {
        return Err(CknError::InvalidInput(format!(
            "need N - p > mu >= 0, got N={n}, p={p}, mu={mu}"
        )));
    }
    if !(gamma >= (n - p - mu) / (n - p)) {
        return Err(CknError::InvalidInput(format!(
            "need gamma >= (N-p-mu)/(N-p), got gamma={gamma}"
        )));
    }
    if !(lam_tilde > 0.0) || !(m_coef > 0.0) {
        return Err(CknError::InvalidInput(
            "rate and weight coefficient must be positive".into(),
        ));
    }
    let volume: Scalar = sphere_area(n_dim);
    let pref = poincare_prefactor(n_dim, p, mu, lam_tilde);
    let rows = funcs
        .iter()
        .map(|v| -> Result<PoincareRow> {
            let parts = v.radial()?.clone();
            let spec = crate::functionals::hinted_spec(
                quad,
                &[v],
                crate::functionals::SupportMode::Union,
            );
            let dv = parts.du.clone();
            let lhs_int = integrate_radial(
                |r: Scalar| dv(r).abs().powf(p) * (-m_coef * (lam_tilde * r).powf(gamma)).exp(),
                n - 1.0 - mu,
                &spec,
            )?;
            let lhs = pref * volume * lhs_int.value;
            // bracket the optimal shift from samples of v
            let vu = parts.u.clone();
            let mut cmin = Scalar::INFINITY;
            let mut cmax = Scalar::NEG_INFINITY;
            for i in 0..200 {
                let r = 1e-3 * (2e4f64).powf(i as f64 / 199.0);
                let val = vu(r);
                cmin = cmin.min(val);
                cmax = cmax.max(val);
            }
            let spread = (cmax - cmin).max(1e-12);
            let vu2 = parts.u.clone();
            let rhs_at = |c: Scalar| -> Scalar {
                integrate_radial(
                    |r: Scalar| {
                        (vu2(r) - c).abs().powf(p)
                            * (-m_coef * (lam_tilde * r).powf(gamma)).exp()
                    },
                    n - 1.0 - n * mu / (n - p),
                    &spec,
                )
                .map(|i| volume * i.value)
                .unwrap_or(Scalar::INFINITY)
            };
            let r = minimize_scalar(
                rhs_at,
                (cmin - 0.1 * spread, cmax + 0.1 * spread),
                1e-11,
            )?;
            let rhs_inf = r.value;
            if !(rhs_inf > 0.0) {
                return Err(CknError::ZeroDenominator(
                    "shift infimum vanished: probe function is constant".into(),
                ));
            }
            Ok(PoincareRow {
                lhs,
                rhs_inf,
                ratio: lhs / rhs_inf,
                c_star: r.argmin[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_ratio = rows.iter().map(|r| r.ratio).fold(Scalar::INFINITY, Scalar::min);
    Ok(PoincareReport { rows, min_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_first_order, derive_second_order};

    fn p45() -> CknParams {
        derive_first_order(4, 2.0, 0.5, 0.5).unwrap()
    }

    fn small_opts(n_perturbed: usize) -> VerifyOpts {
        VerifyOpts {
            corpus: CorpusSpec {
                seed: 7,
                n_perturbed,
                n_outsiders: 3,
                n_sampled: 1,
                n_exact: 1,
                ..CorpusSpec::default()
            },
            mesh_check: false,
            ..VerifyOpts::default()
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let params = p45();
        let cs = CorpusSpec { n_perturbed: 4, n_outsiders: 2, n_sampled: 1, n_exact: 1, ..CorpusSpec::default() };
        let c1 = build_corpus(&params, &cs, &QuadratureSpec::default()).unwrap();
        let c2 = build_corpus(&params, &cs, &QuadratureSpec::default()).unwrap();
        assert_eq!(c1.entries.len(), 8);
        for (a, b) in c1.entries.iter().zip(&c2.entries) {
            assert_eq!(a.profile, b.profile);
        }
    }

    #[test]
    fn weak_stability_small_corpus() {
        let params = p45();
        let r = verify_weak_stability(&params, Theorem::T1_3, &small_opts(6)).unwrap();
        assert_eq!(r.violations, 0, "rows: {:?}", r.rows.iter().filter(|x| x.violation).collect::<Vec<_>>());
        assert!(r.empirical_c_min > 0.0);
        // exact members flagged
        assert!(r.rows.iter().any(|row| row.equality_case));
    }

    #[test]
    fn strong_stability_small_corpus_p2() {
        let params = p45();
        let r = verify_strong_stability(&params, Theorem::T1_7, &small_opts(6)).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.empirical_c_max.is_finite() && r.empirical_c_max > 0.0);
        let r9 = verify_strong_stability(&params, Theorem::T1_9, &small_opts(6)).unwrap();
        assert_eq!(r9.violations, 0);
    }

    #[test]
    fn theorem_regime_gates() {
        let params = p45();
        assert!(verify_weak_stability(&params, Theorem::T1_4, &small_opts(2)).is_err());
        assert!(verify_strong_stability(&params, Theorem::T1_8, &small_opts(2)).is_err());
        let params2 = derive_second_order(4, 2.0, -2.5, -2.5).unwrap();
        assert!(verify_second_order(&params2, Theorem::T1_7, &small_opts(2)).is_err());
    }

    #[test]
    fn second_order_small_corpus() {
        let params2 = derive_second_order(4, 2.0, -2.5, -2.5).unwrap();
        let r = verify_second_order(&params2, Theorem::T1_10, &small_opts(4)).unwrap();
        assert_eq!(r.violations, 0, "{:#?}", r.rows.iter().filter(|x| x.violation).collect::<Vec<_>>());
        let max_id = r
            .rows
            .iter()
            .filter_map(|x| x.identity_rel)
            .fold(0.0, Scalar::max);
        assert!(max_id <= 1e-6, "identity residual {max_id}");
    }

    #[test]
    fn scaling_blowup_slopes() {
        let params = p45();
        let g = make_profile(
            &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
            &params,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let r = scaling_blowup(
            &g,
            &params,
            &[0.25, 0.5, 1.0, 2.0, 4.0],
            &small_opts(1),
        )
        .unwrap();
        assert!(r.delta_drift <= 1e-5, "drift {}", r.delta_drift);
        assert!((r.slope_h - 0.5).abs() <= 0.05, "slope_h {}", r.slope_h);
        assert!((r.slope_l + 0.5).abs() <= 0.05, "slope_l {}", r.slope_l);

        // members are rejected as probes
        let v = make_profile(
            &ProfileSpec::Minimizer { k: 1.0, lambda: 1.0 },
            &params,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(scaling_blowup(&v, &params, &[0.5, 1.0, 2.0], &small_opts(1)).is_err());
    }

    #[test]
    fn poincare_probe_on_plateau_and_bumps() {
        // constant plateau with smooth cut: the inner infimum lands at the
        // plateau level and the ratio is well-defined
        let quad = QuadratureSpec::default();
        let params = p45();
        let mut funcs = Vec::new();
        for scale in [0.6, 1.0, 1.5] {
            funcs.push(
                make_profile(
                    &ProfileSpec::ClosedForm { name: ClosedFormName::Bump, scale },
                    &params,
                    &quad,
                )
                .unwrap(),
            );
        }
        funcs.push(
            make_profile(
                &ProfileSpec::ClosedForm { name: ClosedFormName::Gaussian, scale: 1.0 },
                &params,
                &quad,
            )
            .unwrap(),
        );
        let r = poincare_probe(&funcs, 4, 2.0, 1.0, 1.0, 2.0, 1.0, &quad).unwrap();
        assert!(r.min_ratio > 0.0, "min ratio {}", r.min_ratio);
        for row in &r.rows {
            assert!(row.lhs > 0.0 && row.rhs_inf > 0.0);
        }
        // prefactor arithmetic: scaling the rate by 2 multiplies the printed
        // prefactor by exactly 2^{N mu/(N-p) - p - mu}
        let a = poincare_prefactor(4, 2.0, 1.0, 2.0);
        let b = poincare_prefactor(4, 2.0, 1.0, 1.0);
        let want = 2.0f64.powf(4.0 * 1.0 / 2.0 - 2.0 - 1.0);
        assert!(((a / b) - want).abs() < 1e-15);

        // hypothesis validation
        assert!(poincare_probe(&funcs, 4, 2.0, 3.0, 1.0, 2.0, 1.0, &quad).is_err());
    }

    #[test]
    fn reports_serialize_deterministically() {
        let params = p45();
        let r1 = verify_weak_stability(&params, Theorem::T1_3, &small_opts(3)).unwrap();
        let r2 = verify_weak_stability(&params, Theorem::T1_3, &small_opts(3)).unwrap();
        let j1 = serde_json::to_string(&r1).unwrap();
        let j2 = serde_json::to_string(&r2).unwrap();
        assert_eq!(j1, j2);
    }
}
