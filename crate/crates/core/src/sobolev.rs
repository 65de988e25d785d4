//! The operator triple `(L, M, E)` and the characteristic operators
//! `S_α(t)`, `T_α(t)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{self, KahanSum};

/// Largest accepted 2-norm condition number of `L` and `M`.
pub const MAX_CONDITION: f64 = 1e8;

/// Minimum number of density panels used by the subordination rule.
pub const SUBORDINATION_PANELS: usize = 400;

/// Geometric samples per decade when estimating `M₀`.
const M0_SAMPLES_PER_DECADE: usize = 40;

/// Which route evaluates `S_α` and `T_α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// `M⁻¹E_{α,β}(A t^α)` by the matrix Mittag-Leffler series.
    Series,
    /// Quadrature of the subordination integral against `ζ_α`.
    Subordination,
}

/// `L`, `M`, `E` with the derived generator and norm constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorTriple {
    l: DMatrix<f64>,
    m: DMatrix<f64>,
    e: DMatrix<f64>,
    l_inv: DMatrix<f64>,
    m_inv: DMatrix<f64>,
    a: DMatrix<f64>,
    c1: f64,
    c2: f64,
    m0: f64,
    reach: f64,
}

fn check_invertible(x: &DMatrix<f64>, name: &'static str) -> Result<(DMatrix<f64>, f64)> {
    let sv = x.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || smax / smin >= MAX_CONDITION {
        return Err(Error::Singular(name));
    }
    let inv = x.clone().try_inverse().ok_or(Error::Singular(name))?;
    Ok((inv, 1.0 / smin))
}

/// Operator 2-norm (largest singular value).
pub fn norm2(x: &DMatrix<f64>) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.singular_values().max()
    }
}

impl OperatorTriple {
    /// Builds the triple and samples `‖e^{At}‖` on `[0, reach]` for `M₀`.
    ///
    /// `reach` should cover `a^α Θ` for the horizon `a` and density cutoff
    /// `Θ` the triple will be used with; see [`semigroup_reach`].
    pub fn new(l: DMatrix<f64>, m: DMatrix<f64>, e: DMatrix<f64>, reach: f64) -> Result<Self> {
        let n = l.nrows();
        for (name, x) in [("L", &l), ("M", &m), ("E", &e)] {
            if x.nrows() != n || x.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} has non-finite entries"
                )));
            }
        }
        if n == 0 {
            return Err(Error::Dimension("state dimension must be positive".into()));
        }
        if !(reach >= 0.0) || !reach.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "semigroup reach {reach} must be finite and nonnegative"
            )));
        }
        let (l_inv, c1) = check_invertible(&l, "L")?;
        let (m_inv, c2) = check_invertible(&m, "M")?;
        let a = -(&l_inv * &e * &m_inv);
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("A"));
        }
        let m0 = estimate_m0(&a, reach);
        if !m0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "semigroup norm overflows on [0, {reach}]"
            )));
        }
        Ok(Self {
            l,
            m,
            e,
            l_inv,
            m_inv,
            a,
            c1,
            c2,
            m0,
            reach,
        })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    pub fn l_inv(&self) -> &DMatrix<f64> {
        &self.l_inv
    }

    pub fn m_inv(&self) -> &DMatrix<f64> {
        &self.m_inv
    }

    /// `‖L⁻¹‖₂`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `‖M⁻¹‖₂`.
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Sampled estimate of `sup ‖e^{At}‖` over the reach (at least 1).
    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// `Q(t) = e^{At}`.
    pub fn semigroup(&self, t: f64) -> DMatrix<f64> {
        (&self.a * t).exp()
    }
}

/// `A = −L⁻¹EM⁻¹`.
pub fn generator(triple: &OperatorTriple) -> &DMatrix<f64> {
    &triple.a
}

/// `a^α Θ_α`: the largest semigroup time touched by the subordination
/// integrals on `[0, a]`.
pub fn semigroup_reach(alpha: f64, horizon: f64) -> Result<f64> {
    Ok(horizon.powf(alpha) * special::density_cutoff(alpha)?)
}

fn estimate_m0(a: &DMatrix<f64>, reach: f64) -> f64 {
    let mut best: f64 = 1.0;
    if reach <= 0.0 {
        return best;
    }
    let lo = (reach * 1e-4).min(1e-3);
    let decades = (reach / lo).log10();
    let samples = ((decades * M0_SAMPLES_PER_DECADE as f64).ceil() as usize).max(2);
    for k in 0..=samples {
        let t = lo * (reach / lo).powf(k as f64 / samples as f64);
        best = best.max(norm2(&(a * t).exp()));
    }
    best
}

/// Nodes `θ_i` with weights `w_i ζ_α(θ_i)` for the subordination integrals.
#[derive(Debug)]
pub struct SubordinationRule {
    alpha: f64,
    cutoff: f64,
    nodes: Vec<(f64, f64)>,
}

impl SubordinationRule {
    pub fn new(alpha: f64) -> Result<Self> {
        let (cutoff, panels) = special::density_panels(alpha, SUBORDINATION_PANELS)?;
        let mut nodes = Vec::with_capacity(panels.len() * 15);
        for p in &panels {
            for (th, w) in crate::quadrature::kronrod_nodes(p.lo, p.hi) {
                nodes.push((th, w * special::wright_eval(alpha, th)?));
            }
        }
        Ok(Self {
            alpha,
            cutoff,
            nodes,
        })
    }

    /// Shared rule for `alpha`, built on first use.
    pub fn cached(alpha: f64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<SubordinationRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache
            .lock()
            .expect("rule cache poisoned")
            .get(&alpha.to_bits())
        {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::new(alpha)?);
        cache
            .lock()
            .expect("rule cache poisoned")
            .insert(alpha.to_bits(), rule.clone());
        Ok(rule)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ θ^k ζ_α(θ) g(θ) dθ` for `k ∈ {0, 1}`, entrywise on matrices.
    fn integrate(&self, k: i32, g: impl Fn(f64) -> DMatrix<f64>) -> DMatrix<f64> {
        let first = g(self.nodes[0].0);
        let (r, c) = first.shape();
        let mut sums = vec![KahanSum::default(); r * c];
        for (i, &(th, w)) in self.nodes.iter().enumerate() {
            let v = if i == 0 { first.clone() } else { g(th) };
            let weight = w * th.powi(k);
            for (s, x) in sums.iter_mut().zip(v.iter()) {
                s.add(weight * x);
            }
        }
        DMatrix::from_iterator(r, c, sums.iter().map(|s| s.value()))
    }
}

fn check_alpha_t(alpha: f64, t: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            function: "characteristic operator",
            value: alpha,
            detail: "alpha must lie in (0, 1)".into(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange {
            function: "characteristic operator",
            value: t,
            detail: "t must be finite and nonnegative".into(),
        });
    }
    Ok(())
}

/// `S_α(t) = ∫₀^∞ M⁻¹ ζ_α(θ) Q(t^α θ) dθ = M⁻¹ E_{α,1}(A t^α)`.
pub fn s_alpha(
    triple: &OperatorTriple,
    alpha: f64,
    t: f64,
    method: Method,
) -> Result<DMatrix<f64>> {
    check_alpha_t(alpha, t)?;
    let ta = t.powf(alpha);
    match method {
        Method::Series => {
            Ok(&triple.m_inv * special::mittag_leffler_matrix(alpha, 1.0, &(&triple.a * ta))?)
        }
        Method::Subordination => {
            let rule = SubordinationRule::cached(alpha)?;
            let q = rule.integrate(0, |th| (&triple.a * (ta * th)).exp());
            Ok(&triple.m_inv * q)
        }
    }
}

/// `T_α(t) = α ∫₀^∞ M⁻¹ θ ζ_α(θ) Q(t^α θ) dθ = M⁻¹ E_{α,α}(A t^α)`.
pub fn t_alpha(
    triple: &OperatorTriple,
    alpha: f64,
    t: f64,
    method: Method,
) -> Result<DMatrix<f64>> {
    check_alpha_t(alpha, t)?;
    let ta = t.powf(alpha);
    match method {
        Method::Series => {
            Ok(&triple.m_inv * special::mittag_leffler_matrix(alpha, alpha, &(&triple.a * ta))?)
        }
        Method::Subordination => {
            let rule = SubordinationRule::cached(alpha)?;
            let q = rule.integrate(1, |th| (&triple.a * (ta * th)).exp());
            Ok(&triple.m_inv * q * alpha)
        }
    }
}

/// Series first, subordination if the series cannot reach its accuracy.
pub(crate) fn s_alpha_auto(triple: &OperatorTriple, alpha: f64, t: f64) -> Result<DMatrix<f64>> {
    s_alpha(triple, alpha, t, Method::Series)
        .or_else(|_| s_alpha(triple, alpha, t, Method::Subordination))
}

pub(crate) fn t_alpha_auto(triple: &OperatorTriple, alpha: f64, t: f64) -> Result<DMatrix<f64>> {
    t_alpha(triple, alpha, t, Method::Series)
        .or_else(|_| t_alpha(triple, alpha, t, Method::Subordination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_fn;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    fn max_abs(x: &DMatrix<f64>) -> f64 {
        x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn sample_triple() -> OperatorTriple {
        let l = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, -0.1, 1.5, 0.2, 0.0, 0.1, 1.8]);
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.0, 1.2, -0.1, 0.1, 0.0, 0.9]);
        let e = DMatrix::from_row_slice(3, 3, &[1.2, 0.1, 0.0, 0.2, 0.9, 0.1, -0.1, 0.0, 1.1]);
        OperatorTriple::new(l, m, e, 10.0).unwrap()
    }

    #[test]
    fn generator_identity_cases() {
        let t = OperatorTriple::new(eye(2), eye(2), -eye(2), 1.0).unwrap();
        assert_eq!(generator(&t), &eye(2));
        let t = OperatorTriple::new(eye(2) * 2.0, eye(2), eye(2), 1.0).unwrap();
        assert!(max_abs(&(generator(&t) + eye(2) * 0.5)) < 1e-15);
    }

    #[test]
    fn generator_matches_lu_solves() {
        let t = sample_triple();
        // A = −L⁻¹ E M⁻¹ via two LU solves: solve Mᵀ Yᵀ = Eᵀ, then L A = −Y.
        let y = t
            .m()
            .transpose()
            .lu()
            .solve(&t.e().transpose())
            .unwrap()
            .transpose();
        let a = t.l().clone().lu().solve(&(-y)).unwrap();
        assert!(max_abs(&(a - generator(&t))) < 1e-12);
    }

    #[test]
    fn rejects_singular_and_ill_conditioned() {
        let mut l = eye(2);
        l[(1, 1)] = 0.0;
        assert_eq!(
            OperatorTriple::new(l, eye(2), eye(2), 1.0),
            Err(Error::Singular("L"))
        );
        let mut m = eye(2);
        m[(1, 1)] = 1e-9;
        assert_eq!(
            OperatorTriple::new(eye(2), m, eye(2), 1.0),
            Err(Error::Singular("M"))
        );
        assert!(matches!(
            OperatorTriple::new(eye(2), eye(3), eye(2), 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn norm_constants() {
        let t = OperatorTriple::new(eye(2) * 4.0, eye(2) * 0.5, eye(2), 5.0).unwrap();
        assert!((t.c1() - 0.25).abs() < 1e-15);
        assert!((t.c2() - 2.0).abs() < 1e-15);
        // A = −0.5·I is dissipative, so the sup sits at t = 0.
        assert!((t.m0() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn operators_at_zero() {
        let t = sample_triple();
        for method in [Method::Series, Method::Subordination] {
            let s = s_alpha(&t, 0.6, 0.0, method).unwrap();
            assert!(max_abs(&(s - t.m_inv())) < 1e-9, "{method:?}");
            let tt = t_alpha(&t, 0.6, 0.0, method).unwrap();
            let want = t.m_inv() / gamma_fn(0.6).unwrap();
            assert!(max_abs(&(tt - want)) < 1e-9, "{method:?}");
        }
    }

    #[test]
    fn methods_agree() {
        let t = sample_triple();
        for alpha in [0.4, 0.6, 0.9] {
            for time in [0.1, 1.0, 2.0] {
                let a = s_alpha(&t, alpha, time, Method::Series).unwrap();
                let b = s_alpha(&t, alpha, time, Method::Subordination).unwrap();
                assert!(max_abs(&(a - b)) < 1e-6);
                let a = t_alpha(&t, alpha, time, Method::Series).unwrap();
                let b = t_alpha(&t, alpha, time, Method::Subordination).unwrap();
                assert!(max_abs(&(a - b)) < 1e-6);
            }
        }
    }

    #[test]
    fn near_one_approaches_semigroup() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, -0.5]);
        let t = OperatorTriple::new(eye(2), eye(2), -a.clone(), 5.0).unwrap();
        for time in [0.5, 1.0, 2.0] {
            let tt = t_alpha(&t, 0.999, time, Method::Series).unwrap();
            assert!(max_abs(&(tt - (&a * time).exp())) < 1e-2);
        }
    }

    #[test]
    fn series_exponential_matches_nalgebra() {
        let t = sample_triple();
        let a = generator(&t);
        let e = special::mittag_leffler_matrix(1.0, 1.0, a).unwrap();
        assert!(max_abs(&(e - a.clone().exp())) < 1e-9);
    }

    #[test]
    fn scalar_relaxation_is_completely_monotone_on_grid() {
        let lambda = 1.3;
        let t = OperatorTriple::new(eye(1), eye(1), eye(1) * lambda, 10.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let s = s_alpha(&t, 0.7, k as f64 * 0.05, Method::Series).unwrap()[(0, 0)];
            assert!(s >= 0.0 && s <= prev);
            let want = special::mittag_leffler(0.7, 1.0, -lambda * (k as f64 * 0.05f64).powf(0.7))
                .unwrap();
            assert!((s - want).abs() < 1e-12);
            prev = s;
        }
    }

    #[test]
    fn bad_arguments() {
        let t = sample_triple();
        assert!(s_alpha(&t, 1.0, 1.0, Method::Series).is_err());
        assert!(t_alpha(&t, 0.5, -1.0, Method::Series).is_err());
    }
}
