//! Finite control sets, the Hausdorff metric, convex hulls in one and two
//! dimensions, the radial retraction and the weak norm.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for hull membership and collinearity decisions.
pub const HULL_TOL: f64 = 1e-12;

/// How the atom set moves with the state, always through `pr_{L₀}(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateDependence {
    None,
    /// `u ↦ u + gain ‖pr_{L₀}(x)‖ 𝟙/√m`.
    Translate {
        gain: f64,
    },
    /// `u ↦ (1 + kappa ‖pr_{L₀}(x)‖) u`.
    Scale {
        kappa: f64,
    },
}

/// The constraint set `U(t, x)`: a finite atom list in ℝᵐ, `m ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteControlSet {
    atoms: Vec<DVector<f64>>,
    dependence: StateDependence,
}

impl FiniteControlSet {
    pub fn new(atoms: Vec<DVector<f64>>, dependence: StateDependence) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(Error::InvalidArgument(
                "control set needs at least one atom".into(),
            ));
        };
        let m = first.len();
        if m == 0 || m > 2 {
            return Err(Error::UnsupportedDimension(m));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != m {
                return Err(Error::Dimension(format!(
                    "atom {i} has dimension {}, expected {m}",
                    a.len()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("atom {i} is not finite")));
            }
            if atoms[..i].iter().any(|b| b == a) {
                return Err(Error::InvalidArgument(format!(
                    "atom {i} duplicates an earlier atom"
                )));
            }
        }
        let coef = match dependence {
            StateDependence::None => 0.0,
            StateDependence::Translate { gain } => gain,
            StateDependence::Scale { kappa } => kappa,
        };
        if !(coef >= 0.0) || !coef.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "state-dependence coefficient {coef} must be finite and nonnegative"
            )));
        }
        Ok(Self { atoms, dependence })
    }

    /// State-independent set from scalar atoms.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&v| DVector::from_element(1, v))
                .collect(),
            StateDependence::None,
        )
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The base atoms (the set at `x = 0`).
    pub fn base_atoms(&self) -> &[DVector<f64>] {
        &self.atoms
    }

    pub fn dependence(&self) -> StateDependence {
        self.dependence
    }

    pub fn is_state_dependent(&self) -> bool {
        !matches!(self.dependence, StateDependence::None)
            && !matches!(self.dependence, StateDependence::Translate { gain } if gain == 0.0)
            && !matches!(self.dependence, StateDependence::Scale { kappa } if kappa == 0.0)
    }

    /// Atoms of `U(t, x)`, evaluated at the retracted state `pr_{L₀}(x)`.
    pub fn atoms_at(&self, x: &DVector<f64>, l0: f64) -> Vec<DVector<f64>> {
        let s = match self.dependence {
            StateDependence::None => return self.atoms.clone(),
            _ => radial_retraction(x, l0).norm(),
        };
        match self.dependence {
            StateDependence::None => unreachable!(),
            StateDependence::Translate { gain } => {
                let shift = gain * s / (self.dim() as f64).sqrt();
                self.atoms.iter().map(|a| a.add_scalar(shift)).collect()
            }
            StateDependence::Scale { kappa } => {
                self.atoms.iter().map(|a| a * (1.0 + kappa * s)).collect()
            }
        }
    }

    fn max_atom_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Hausdorff-Lipschitz constant of `x ↦ U(t, x)`.
    pub fn k3(&self) -> f64 {
        match self.dependence {
            StateDependence::None => 0.0,
            StateDependence::Translate { gain } => gain,
            StateDependence::Scale { kappa } => kappa * self.max_atom_norm(),
        }
    }

    /// Growth data `(a₃, c₃)` with `sup ‖U(t, x)‖ ≤ a₃ + c₃ ‖x‖`.
    pub fn growth(&self) -> (f64, f64) {
        let r = self.max_atom_norm();
        match self.dependence {
            StateDependence::None => (r, 0.0),
            StateDependence::Translate { gain } => (r, gain),
            StateDependence::Scale { kappa } => (r, kappa * r),
        }
    }

    /// `φ(t) = a₃ + c₃ L₀`: the bound on every control value once `U` is
    /// composed with `pr_{L₀}`.
    pub fn control_bound(&self, l0: f64) -> f64 {
        let (a3, c3) = self.growth();
        a3 + c3 * l0
    }
}

fn check_sets(a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition(
            "Hausdorff distance of an empty set".into(),
        ));
    }
    Ok(())
}

fn directed(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|q| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<f64> {
    check_sets(a, b)?;
    Ok(directed(a, b).max(directed(b, a)))
}

/// `x` inside the closed ball of radius `l0`, `l0 x/‖x‖` outside.
pub fn radial_retraction(x: &DVector<f64>, l0: f64) -> DVector<f64> {
    let n = x.norm();
    if n <= l0 {
        x.clone()
    } else {
        x * (l0 / n)
    }
}

/// Closed convex hull of a finite set in ℝ or ℝ².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Hull {
    Point(DVector<f64>),
    Interval {
        lo: f64,
        hi: f64,
    },
    Segment {
        a: [f64; 2],
        b: [f64; 2],
    },
    /// Counter-clockwise vertices, no three collinear.
    Polygon(Vec<[f64; 2]>),
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    ((p[0] - a[0] - s * d[0]).powi(2) + (p[1] - a[1] - s * d[1]).powi(2)).sqrt()
}

impl Hull {
    pub fn dim(&self) -> usize {
        match self {
            Hull::Point(p) => p.len(),
            Hull::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Extreme points as vectors.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        match self {
            Hull::Point(p) => vec![p.clone()],
            Hull::Interval { lo, hi } => {
                vec![DVector::from_element(1, *lo), DVector::from_element(1, *hi)]
            }
            Hull::Segment { a, b } => vec![DVector::from_row_slice(a), DVector::from_row_slice(b)],
            Hull::Polygon(v) => v.iter().map(|p| DVector::from_row_slice(p)).collect(),
        }
    }

    /// Euclidean distance from `p` to the hull (zero inside).
    pub fn distance(&self, p: &DVector<f64>) -> f64 {
        match self {
            Hull::Point(q) => (p - q).norm(),
            Hull::Interval { lo, hi } => (lo - p[0]).max(p[0] - hi).max(0.0),
            Hull::Segment { a, b } => seg_dist([p[0], p[1]], *a, *b),
            Hull::Polygon(v) => {
                let q = [p[0], p[1]];
                let n = v.len();
                let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], q) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n)
                        .map(|i| seg_dist(q, v[i], v[(i + 1) % n]))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn contains(&self, p: &DVector<f64>) -> bool {
        self.distance(p) <= HULL_TOL * (1.0 + p.norm())
    }

    /// Largest distance from the origin to a hull point.
    pub fn radius(&self) -> f64 {
        self.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest distance between two hull points.
    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((&v[i] - &v[j]).norm());
            }
        }
        d
    }
}

/// Convex hull by a sweep (m = 1) or Andrew's monotone chain (m = 2).
pub fn convex_hull(atoms: &[DVector<f64>]) -> Result<Hull> {
    let Some(first) = atoms.first() else {
        return Err(Error::InvalidArgument("convex hull of an empty set".into()));
    };
    let m = first.len();
    if atoms.iter().any(|a| a.len() != m) {
        return Err(Error::Dimension("atoms of mixed dimension".into()));
    }
    match m {
        1 => {
            let lo = atoms.iter().map(|a| a[0]).fold(f64::INFINITY, f64::min);
            let hi = atoms.iter().map(|a| a[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(if lo == hi {
                Hull::Point(first.clone())
            } else {
                Hull::Interval { lo, hi }
            })
        }
        2 => {
            let mut pts: Vec<[f64; 2]> = atoms.iter().map(|a| [a[0], a[1]]).collect();
            pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
            pts.dedup();
            if pts.len() == 1 {
                return Ok(Hull::Point(DVector::from_row_slice(&pts[0])));
            }
            let scale = pts
                .iter()
                .map(|p| p[0].abs().max(p[1].abs()))
                .fold(1.0, f64::max);
            let tol = HULL_TOL * scale * scale;
            let mut lower: Vec<[f64; 2]> = Vec::new();
            for &p in &pts {
                while lower.len() >= 2
                    && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= tol
                {
                    lower.pop();
                }
                lower.push(p);
            }
            let mut upper: Vec<[f64; 2]> = Vec::new();
            for &p in pts.iter().rev() {
                while upper.len() >= 2
                    && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= tol
                {
                    upper.pop();
                }
                upper.push(p);
            }
            lower.pop();
            upper.pop();
            lower.extend(upper);
            if lower.len() <= 2 {
                Ok(Hull::Segment {
                    a: pts[0],
                    b: pts[pts.len() - 1],
                })
            } else {
                Ok(Hull::Polygon(lower))
            }
        }
        m => Err(Error::UnsupportedDimension(m)),
    }
}

/// Hausdorff distance between two hulls. Each directed distance is a
/// convex function of the point, so it peaks at a vertex.
pub fn hull_hausdorff(a: &Hull, b: &Hull) -> f64 {
    let d_ab = a
        .vertices()
        .iter()
        .map(|v| b.distance(v))
        .fold(0.0, f64::max);
    let d_ba = b
        .vertices()
        .iter()
        .map(|v| a.distance(v))
        .fold(0.0, f64::max);
    d_ab.max(d_ba)
}

/// Weak norm `sup_{t₁ ≤ t₂} ‖∫_{t₁}^{t₂} u‖` of a piecewise-constant signal
/// with the given cell values and uniform step. The supremum is attained at
/// cell boundaries.
pub fn weak_norm(cells: &[DVector<f64>], step: f64, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "weak-norm exponent q = {q} must exceed 1"
        )));
    }
    let Some(first) = cells.first() else {
        return Ok(0.0);
    };
    let m = first.len();
    let mut prefix = Vec::with_capacity(cells.len() + 1);
    prefix.push(DVector::zeros(m));
    for c in cells {
        let next = prefix.last().expect("nonempty") + c * step;
        prefix.push(next);
    }
    if m == 1 {
        let lo = prefix.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = prefix
            .iter()
            .map(|p| p[0])
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(hi - lo);
    }
    let mut best: f64 = 0.0;
    for i in 0..prefix.len() {
        for j in i + 1..prefix.len() {
            best = best.max((&prefix[j] - &prefix[i]).norm());
        }
    }
    Ok(best)
}

/// `‖u − v‖_ω` for two piecewise-constant signals on the same cells.
pub fn weak_distance(u: &[DVector<f64>], v: &[DVector<f64>], step: f64, q: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "signals have {} and {} cells",
            u.len(),
            v.len()
        )));
    }
    let diff: Vec<DVector<f64>> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    weak_norm(&diff, step, q)
}
