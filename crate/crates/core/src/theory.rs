//! Closed-form thresholds of the boundedness theorem and the scalar
//! minimization lemmas behind its proof.
//!
//! Everything here is a pure function of its inputs. Notation: `S` denotes
//! `chi * max{1, lambda0}` throughout.

use std::fmt;

use crate::error::{KelsimError, Result};
use crate::model::ModelParams;

/// Absolute tolerance for declaring `m == 2 - 2/N`.
pub const TOL_EQ: f64 = 1e-12;
/// Upper end of the search interval for `find_p0`.
pub const P_MAX: f64 = 1e6;
/// Margin `h(p0) >= DELTA_H` demanded of `find_p0`.
pub const DELTA_H: f64 = 1e-9;

/// Relative tolerance of the internal golden-section cross-check in [`lemma_min`].
const LEMMA_CHECK_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalExponent {
    Finite(f64),
    /// The logistic term dominates: every `m` qualifies.
    Unconstrained,
}

impl CriticalExponent {
    /// Whether `m` lies strictly above the exponent. Values within
    /// [`TOL_EQ`] of it count as equal.
    pub fn admits(&self, m: f64) -> bool {
        match *self {
            CriticalExponent::Finite(crit) => m > crit + TOL_EQ,
            CriticalExponent::Unconstrained => true,
        }
    }
}

impl fmt::Display for CriticalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalExponent::Finite(v) => write!(f, "{v}"),
            CriticalExponent::Unconstrained => write!(f, "unconstrained"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremCase {
    /// `m` above the critical exponent.
    I,
    /// `m = 2 - 2/N` with `C_D` above the diffusion threshold.
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeStatus {
    TheoremBounded(TheoremCase),
    /// The theorem is silent. This is not a blow-up prediction.
    NotCovered,
}

impl RegimeStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RegimeStatus::TheoremBounded(TheoremCase::I) => "TheoremBounded(I)",
            RegimeStatus::TheoremBounded(TheoremCase::II) => "TheoremBounded(II)",
            RegimeStatus::NotCovered => "NotCovered",
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, RegimeStatus::TheoremBounded(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVerdict {
    pub status: RegimeStatus,
    pub detail: String,
}

/// Critical diffusion exponent `m*`: boundedness is guaranteed for `m > m*`.
///
/// `m* = 2 - (2/N) S / (S - mu)` for `mu < S`, unconstrained otherwise.
pub fn critical_exponent(params: &ModelParams) -> CriticalExponent {
    let s = params.sensitivity_scale();
    if params.mu >= s {
        return CriticalExponent::Unconstrained;
    }
    let n = params.dim as f64;
    // Single rounding at the end keeps the mu = 0 values exact, e.g. 4/3 for N = 3.
    let r = s / (s - params.mu);
    CriticalExponent::Finite((2.0 * n - 2.0 * r) / n)
}

/// Lower bound on `C_D` for the borderline exponent `m = 2 - 2/N`:
/// `C_GN (1 + |u0|_1) / 3 * (2 - 2/N)^2 * S`.
pub fn cd_threshold(params: &ModelParams, u0_l1: f64) -> Result<f64> {
    if params.dim == 1 {
        return Err(KelsimError::Degenerate(
            "N = 1 makes 2 - 2/N vanish; the borderline case carries no information".into(),
        ));
    }
    check_l1(u0_l1)?;
    Ok(raw_cd_threshold(params.dim, params.chi, params.lambda0, params.c_gn, u0_l1))
}

fn raw_cd_threshold(dim: usize, chi: f64, lambda0: f64, c_gn: f64, u0_l1: f64) -> f64 {
    let e = 2.0 - 2.0 / dim as f64;
    c_gn * (1.0 + u0_l1) / 3.0 * e * e * lambda0.max(1.0) * chi
}

fn check_l1(u0_l1: f64) -> Result<()> {
    if u0_l1 >= 0.0 && u0_l1.is_finite() {
        Ok(())
    } else {
        Err(KelsimError::Domain(format!(
            "initial mass must be finite and nonnegative, got {u0_l1}"
        )))
    }
}

pub fn classify_regime(params: &ModelParams, u0_l1: f64) -> RegimeVerdict {
    let crit = critical_exponent(params);
    let m = params.m_exp;
    if crit.admits(m) {
        return RegimeVerdict {
            status: RegimeStatus::TheoremBounded(TheoremCase::I),
            detail: format!("m = {m} exceeds critical exponent m* = {crit}"),
        };
    }
    let borderline = 2.0 - 2.0 / params.dim as f64;
    if (m - borderline).abs() <= TOL_EQ {
        match cd_threshold(params, u0_l1) {
            Ok(thr) if params.c_d > thr => {
                return RegimeVerdict {
                    status: RegimeStatus::TheoremBounded(TheoremCase::II),
                    detail: format!(
                        "m = 2 - 2/N = {borderline} and C_D = {} exceeds threshold {thr}",
                        params.c_d
                    ),
                };
            }
            Ok(thr) => {
                return RegimeVerdict {
                    status: RegimeStatus::NotCovered,
                    detail: format!(
                        "m = 2 - 2/N = {borderline} but C_D = {} does not exceed threshold {thr} (m* = {crit})",
                        params.c_d
                    ),
                };
            }
            Err(_) => {}
        }
    }
    RegimeVerdict {
        status: RegimeStatus::NotCovered,
        detail: format!("m = {m} does not exceed m* = {crit} and is not the covered borderline case"),
    }
}

/// `B1(p) = 1/(p+1) * ((p+1)/p)^(-p) * ((p-1)/p)^(p+1)`.
pub fn b1_constant(p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(KelsimError::Domain(format!("B1 requires p >= 1, got {p}")));
    }
    Ok(((p + 1.0) / p).powf(-p) * ((p - 1.0) / p).powf(p + 1.0) / (p + 1.0))
}

/// `y + B1(p) y^(-p) chi^(p+1) lambda0`, the objective minimized by [`lemma_min`].
pub fn lemma_objective(p: f64, chi: f64, lambda0: f64, y: f64) -> Result<f64> {
    let b1 = b1_constant(p)?;
    Ok(y + b1 * y.powf(-p) * chi.powf(p + 1.0) * lambda0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaMin {
    pub minimizer: f64,
    pub minimum: f64,
}

/// Minimum over `y > 0` of [`lemma_objective`], in closed form:
/// `y* = (B1 lambda0 p)^(1/(p+1)) chi` and `min = (p-1)/p lambda0^(1/(p+1)) chi`.
///
/// For `p > 1` the closed form is cross-checked against a golden-section
/// search; disagreement beyond `1e-8` relative is reported as
/// [`KelsimError::Consistency`]. For `p = 1` the infimum 0 is not attained
/// and `y* = 0` is returned.
pub fn lemma_min(p: f64, chi: f64, lambda0: f64) -> Result<LemmaMin> {
    let b1 = b1_constant(p)?;
    if !(chi > 0.0 && chi.is_finite() && lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(KelsimError::Domain(format!(
            "chi and lambda0 must be positive, got {chi}, {lambda0}"
        )));
    }
    if p == 1.0 {
        return Ok(LemmaMin {
            minimizer: 0.0,
            minimum: 0.0,
        });
    }
    let minimizer = (b1 * lambda0 * p).powf(1.0 / (p + 1.0)) * chi;
    let minimum = (p - 1.0) / p * lambda0.powf(1.0 / (p + 1.0)) * chi;

    let objective = |y: f64| y + b1 * y.powf(-p) * chi.powf(p + 1.0) * lambda0;
    // The objective dominates y, so the minimizer lies below objective(chi).
    let y_max = objective(chi);
    let (_, searched) = golden_section_log(objective, y_max);
    let rel = (searched - minimum).abs() / minimum;
    if !(rel <= LEMMA_CHECK_RTOL) {
        return Err(KelsimError::Consistency(format!(
            "closed-form minimum {minimum} vs searched {searched} (rel {rel:e}) at p = {p}, chi = {chi}, lambda0 = {lambda0}"
        )));
    }
    Ok(LemmaMin { minimizer, minimum })
}

/// Golden-section search in `ln y` over `(y_max e^-80, y_max]`.
/// Returns `(argmin, min)`.
fn golden_section_log(f: impl Fn(f64) -> f64, y_max: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let g = |s: f64| f(s.exp());
    let mut a = y_max.ln() - 80.0;
    let mut b = y_max.ln();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    while b - a > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    let s = 0.5 * (a + b);
    (s.exp(), g(s))
}

/// `h(p) = 4 C_D / (C_GN (1 + |u0|_1)) - (1 - 2/N + p)^2 / p * S`.
#[allow(clippy::too_many_arguments)]
pub fn h_function(p: f64, c_d: f64, c_gn: f64, u0_l1: f64, dim: usize, lambda0: f64, chi: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(KelsimError::Domain(format!("h requires p >= 1, got {p}")));
    }
    let shift = 1.0 - 2.0 / dim as f64 + p;
    Ok(4.0 * c_d / (c_gn * (1.0 + u0_l1)) - shift * shift / p * lambda0.max(1.0) * chi)
}

/// Largest `p0` in `(1, P_MAX]` with `h(p0) >= DELTA_H`.
///
/// Requires `C_D` above [`cd_threshold`]. `h` is decreasing on `p >= 1`
/// for every `N >= 1`, so bisection on `[1, P_MAX]` brackets the crossing.
pub fn find_p0(c_d: f64, c_gn: f64, u0_l1: f64, dim: usize, lambda0: f64, chi: f64) -> Result<f64> {
    check_l1(u0_l1)?;
    if dim < 1 {
        return Err(KelsimError::Domain("dimension must be >= 1".into()));
    }
    let thr = raw_cd_threshold(dim, chi, lambda0, c_gn, u0_l1);
    let h = |p: f64| h_function(p, c_d, c_gn, u0_l1, dim, lambda0, chi);
    let h1 = h(1.0)?;
    if !(c_d > thr) || !(h1 >= DELTA_H) {
        return Err(KelsimError::Precondition(format!(
            "C_D = {c_d} must exceed the threshold {thr} (h(1) = {h1})"
        )));
    }
    if h(P_MAX)? >= DELTA_H {
        return Ok(P_MAX);
    }
    let (mut lo, mut hi) = (1.0f64, P_MAX);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? >= DELTA_H {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: usize, chi: f64, mu: f64, lambda0: f64) -> ModelParams {
        ModelParams {
            dim,
            chi,
            mu,
            lambda0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn critical_exponent_examples() {
        assert_eq!(
            critical_exponent(&params(3, 1.0, 0.0, 1.0)),
            CriticalExponent::Finite(4.0 / 3.0)
        );
        assert_eq!(
            critical_exponent(&params(2, 1.0, 2.0, 1.0)),
            CriticalExponent::Unconstrained
        );
        assert_eq!(
            critical_exponent(&params(2, 1.0, 0.5, 1.0)),
            CriticalExponent::Finite(0.0)
        );
        // mu exactly at the cutoff.
        assert_eq!(
            critical_exponent(&params(2, 1.0, 4.0, 4.0)),
            CriticalExponent::Unconstrained
        );
    }

    #[test]
    fn critical_exponent_monotonicity() {
        let m = |p: ModelParams| match critical_exponent(&p) {
            CriticalExponent::Finite(v) => v,
            CriticalExponent::Unconstrained => panic!("unexpected"),
        };
        assert!(m(params(3, 1.0, 0.2, 1.0)) < m(params(3, 1.0, 0.1, 1.0)));
        assert!(m(params(3, 2.0, 0.2, 1.0)) > m(params(3, 1.0, 0.2, 1.0)));
        assert!(m(params(3, 1.0, 0.2, 3.0)) > m(params(3, 1.0, 0.2, 2.0)));
    }

    #[test]
    fn cd_threshold_examples() {
        let p = ModelParams {
            c_gn: 1.0,
            ..params(2, 1.0, 0.0, 1.0)
        };
        assert!((cd_threshold(&p, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p = ModelParams { c_gn: 3.0, ..p };
        assert!((cd_threshold(&p, 2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(matches!(
            cd_threshold(&params(1, 1.0, 0.0, 1.0), 0.0),
            Err(KelsimError::Degenerate(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let base = params(3, 1.0, 0.0, 1.0);
        let v = classify_regime(&ModelParams { m_exp: 1.5, c_d: 1e-6, ..base }, 1.0);
        assert_eq!(v.status, RegimeStatus::TheoremBounded(TheoremCase::I));

        let thr = cd_threshold(&base, 1.0).unwrap();
        let v = classify_regime(
            &ModelParams {
                m_exp: 2.0 - 2.0 / 3.0,
                c_d: 10.0 * thr,
                ..base
            },
            1.0,
        );
        assert_eq!(v.status, RegimeStatus::TheoremBounded(TheoremCase::II));

        let v = classify_regime(&ModelParams { m_exp: 1.2, c_d: 1e-3, ..base }, 1.0);
        assert_eq!(v.status, RegimeStatus::NotCovered);

        // Borderline exponent with C_D below the threshold.
        let v = classify_regime(
            &ModelParams {
                m_exp: 2.0 - 2.0 / 3.0,
                c_d: 0.5 * thr,
                ..base
            },
            1.0,
        );
        assert_eq!(v.status, RegimeStatus::NotCovered);
    }

    #[test]
    fn classify_one_dimensional_borderline_is_not_covered() {
        let p = ModelParams {
            m_exp: 0.0,
            ..params(1, 1.0, 0.0, 1.0)
        };
        assert_eq!(classify_regime(&p, 1.0).status, RegimeStatus::NotCovered);
    }

    #[test]
    fn b1_values() {
        assert_eq!(b1_constant(1.0).unwrap(), 0.0);
        assert!((b1_constant(2.0).unwrap() - 1.0 / 54.0).abs() < 1e-16);
        // (1/4)(27/64)(16/81) = 1/48
        assert!((b1_constant(3.0).unwrap() - 1.0 / 48.0).abs() < 1e-16);
        assert!(b1_constant(0.5).is_err());
    }

    #[test]
    fn lemma_min_examples() {
        let r = lemma_min(2.0, 1.0, 1.0).unwrap();
        assert!((r.minimizer - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.minimum - 0.5).abs() < 1e-12);
        let r = lemma_min(2.0, 2.0, 1.0).unwrap();
        assert!((r.minimizer - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.minimum - 1.0).abs() < 1e-12);
        let r = lemma_min(1.0, 5.0, 3.0).unwrap();
        assert_eq!(r.minimum, 0.0);
        assert!(lemma_min(0.9, 1.0, 1.0).is_err());
    }

    #[test]
    fn lemma_min_is_homogeneous_in_chi() {
        for &p in &[1.5, 2.0, 7.0] {
            let a = lemma_min(p, 0.7, 2.0).unwrap().minimum;
            let b = lemma_min(p, 0.7 * 3.5, 2.0).unwrap().minimum;
            assert!((b - 3.5 * a).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn h_examples() {
        assert!((h_function(1.0, 1.0, 1.0, 0.0, 2, 1.0, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((h_function(1.0, 1.0 / 3.0, 1.0, 0.0, 2, 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p = params(2, 1.0, 0.0, 1.0);
        let thr = cd_threshold(&p, 0.0).unwrap();
        let h1 = h_function(1.0, thr, 1.0, 0.0, 2, 1.0, 1.0).unwrap();
        assert!((h1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn find_p0_examples() {
        let p0 = find_p0(1.0, 1.0, 0.0, 2, 1.0, 1.0).unwrap();
        assert!((p0 - 4.0).abs() < 1e-6, "{p0}");
        assert!(h_function(p0, 1.0, 1.0, 0.0, 2, 1.0, 1.0).unwrap() > 0.0);
        assert!(matches!(
            find_p0(0.1, 1.0, 0.0, 2, 1.0, 1.0),
            Err(KelsimError::Precondition(_))
        ));
        // Between the h(1) > 0 bound (1/4) and the threshold (1/3).
        assert!(find_p0(0.3, 1.0, 0.0, 2, 1.0, 1.0).is_err());
        // Huge C_D: h stays positive over the whole interval.
        assert_eq!(find_p0(1e12, 1.0, 0.0, 2, 1.0, 1.0).unwrap(), P_MAX);
    }
}
