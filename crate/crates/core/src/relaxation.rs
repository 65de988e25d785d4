//! Lower convex envelopes of costs over atom sets, Carathéodory
//! decompositions and chattering controls.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractional::TimeGrid;
use crate::geometry::{convex_hull, Hull, HULL_TOL};
use crate::problem::{AtomSchedule, CostSpec, RelaxedControl, SIMPLEX_TOL};

/// The finite graph `{(u_j, g(t, x, u_j))}` of a cost restricted to the atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpigraphAtoms {
    pub points: Vec<(DVector<f64>, f64)>,
}

/// `g` evaluated at every atom of `U(t, x)`; `+∞` is implicit elsewhere.
pub fn restricted_cost(cost: &CostSpec, x: &DVector<f64>, atoms: &[DVector<f64>]) -> EpigraphAtoms {
    let sx = cost.state_part(x);
    EpigraphAtoms {
        points: atoms
            .iter()
            .map(|u| (u.clone(), sx + cost.q.eval(u)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
enum Shape {
    /// Atoms on a line `o + s·dir`; `chain` lists the lower-hull atoms by
    /// increasing `s`.
    Chain {
        origin: DVector<f64>,
        dir: DVector<f64>,
        chain: Vec<usize>,
    },
    /// Lower facets, each a triple of atom indices.
    Facets(Vec<[usize; 3]>),
}

/// `g**`: the lower convex envelope of the atom graph over its hull.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFunction {
    atoms: Vec<DVector<f64>>,
    costs: Vec<f64>,
    hull: Hull,
    shape: Shape,
}

fn cross2(o: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Barycentric coordinates of `p` in the triangle `(a, b, c)`.
fn barycentric(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> [f64; 3] {
    let area = cross2(a, b, c);
    let la = cross2(p, b, c) / area;
    let lb = cross2(a, p, c) / area;
    [la, lb, 1.0 - la - lb]
}

fn lower_chain(s: &[f64], costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]).then(costs[i].total_cmp(&costs[j])));
    let mut chain: Vec<usize> = Vec::new();
    for &p in &order {
        if chain.last().is_some_and(|&q| s[q] == s[p]) {
            continue;
        }
        while chain.len() >= 2 {
            let (a, b) = (chain[chain.len() - 2], chain[chain.len() - 1]);
            // Drop b when it lies on or above the chord from a to p.
            let lhs = (costs[b] - costs[a]) * (s[p] - s[a]);
            let rhs = (costs[p] - costs[a]) * (s[b] - s[a]);
            if lhs >= rhs {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    chain
}

/// Builds `g**` from the atom graph: a lower-hull sweep when the atoms are
/// collinear (always for `m = 1`), lower facets of the lifted point set for
/// planar atoms.
pub fn bipolar_envelope(epi: &EpigraphAtoms) -> Result<EnvelopeFunction> {
    if epi.points.is_empty() {
        return Err(Error::InvalidArgument(
            "envelope of an empty atom set".into(),
        ));
    }
    let atoms: Vec<DVector<f64>> = epi.points.iter().map(|(u, _)| u.clone()).collect();
    let costs: Vec<f64> = epi.points.iter().map(|(_, c)| *c).collect();
    if costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("atom costs must be finite".into()));
    }
    let hull = convex_hull(&atoms)?;
    let m = atoms[0].len();
    let line = match (&hull, m) {
        (_, 1) => Some((DVector::zeros(1), DVector::from_element(1, 1.0))),
        (Hull::Point(p), _) => Some((p.clone(), DVector::from_row_slice(&[1.0, 0.0]))),
        (Hull::Segment { a, b }, _) => {
            let o = DVector::from_row_slice(a);
            let d = DVector::from_row_slice(b) - &o;
            let len = d.norm();
            Some((o, d / len))
        }
        _ => None,
    };
    let shape = match line {
        Some((origin, dir)) => {
            let s: Vec<f64> = atoms.iter().map(|u| (u - &origin).dot(&dir)).collect();
            Shape::Chain {
                chain: lower_chain(&s, &costs),
                origin,
                dir,
            }
        }
        None => {
            let n = atoms.len();
            let scale = atoms.iter().map(|u| u.amax()).fold(1.0, f64::max);
            let cscale = costs.iter().map(|c| c.abs()).fold(1.0, f64::max);
            let mut facets = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let area = cross2(&atoms[i], &atoms[j], &atoms[k]);
                        if area.abs() <= HULL_TOL * scale * scale {
                            continue;
                        }
                        let lower = (0..n).filter(|&l| l != i && l != j && l != k).all(|l| {
                            let w = barycentric(&atoms[l], &atoms[i], &atoms[j], &atoms[k]);
                            let plane = w[0] * costs[i] + w[1] * costs[j] + w[2] * costs[k];
                            costs[l] >= plane - 1e-12 * cscale
                        });
                        if lower {
                            facets.push([i, j, k]);
                        }
                    }
                }
            }
            Shape::Facets(facets)
        }
    };
    Ok(EnvelopeFunction {
        atoms,
        costs,
        hull,
        shape,
    })
}

/// `Eff g** = cl conv U`.
pub fn effective_set(env: &EnvelopeFunction) -> &Hull {
    &env.hull
}

impl EnvelopeFunction {
    pub fn atoms(&self) -> &[DVector<f64>] {
        &self.atoms
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// `g**(u)`; `+∞` outside the hull.
    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        match self.decompose(u) {
            Ok(w) => w.iter().map(|&(j, l)| l * self.costs[j]).sum(),
            Err(_) => f64::INFINITY,
        }
    }

    fn decompose(&self, u: &DVector<f64>) -> Result<Vec<(usize, f64)>> {
        if u.len() != self.atoms[0].len() {
            return Err(Error::Dimension(format!("point has dimension {}", u.len())));
        }
        if !self.hull.contains(u) {
            return Err(Error::OutsideHull);
        }
        let mut out = match &self.shape {
            Shape::Chain { origin, dir, chain } => {
                let s = (u - origin).dot(dir);
                let pos = |j: usize| (&self.atoms[j] - origin).dot(dir);
                if chain.len() == 1 {
                    vec![(chain[0], 1.0)]
                } else {
                    // First segment whose right end reaches s: the left one on ties.
                    let k = (1..chain.len())
                        .find(|&k| s <= pos(chain[k]))
                        .unwrap_or(chain.len() - 1);
                    let (a, b) = (chain[k - 1], chain[k]);
                    let (sa, sb) = (pos(a), pos(b));
                    let lb = ((s - sa) / (sb - sa)).clamp(0.0, 1.0);
                    vec![(a, 1.0 - lb), (b, lb)]
                }
            }
            Shape::Facets(facets) => {
                let mut best: Option<([usize; 3], [f64; 3])> = None;
                let mut best_slack = f64::NEG_INFINITY;
                for f in facets {
                    let w = barycentric(u, &self.atoms[f[0]], &self.atoms[f[1]], &self.atoms[f[2]]);
                    let slack = w.iter().copied().fold(f64::INFINITY, f64::min);
                    if slack >= -1e-12 {
                        best = Some((*f, w));
                        break;
                    }
                    if slack > best_slack {
                        best_slack = slack;
                        best = Some((*f, w));
                    }
                }
                let (f, w) = best.ok_or(Error::OutsideHull)?;
                let w = w.map(|v| v.max(0.0));
                let total: f64 = w.iter().sum();
                (0..3).map(|i| (f[i], w[i] / total)).collect()
            }
        };
        out.retain(|&(_, l)| l > 0.0);
        Ok(out)
    }
}

/// Writes `(u*, g**(u*))` as a convex combination of at most `m + 1`
/// epigraph atoms; returns `(atom index, weight)` pairs with positive weight.
pub fn caratheodory_decompose(
    env: &EnvelopeFunction,
    u_star: &DVector<f64>,
) -> Result<Vec<(usize, f64)>> {
    env.decompose(u_star)
}

/// Smallest number of sub-cells per block, at least `min_fine / n_blocks`
/// and two, for which the chattering grid refines a grid of `cells` cells.
pub fn chattering_subcells(n_blocks: usize, cells: usize, min_fine: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let unit = cells / gcd(n_blocks, cells);
    let want = min_fine.div_ceil(n_blocks).max(2);
    unit * want.div_ceil(unit)
}

/// Block-proportional chattering: `[0, a]` is cut into `n_blocks` equal
/// blocks of `sub_cells` cells each, and every block is filled with atoms
/// in index order, atom `k` taking a share of cells proportional to its
/// block-averaged weight. Rounding errors are carried to the next block.
pub fn chattering_sequence(
    relaxed: &RelaxedControl,
    n_blocks: usize,
    sub_cells: usize,
) -> Result<AtomSchedule> {
    if n_blocks == 0 || sub_cells == 0 {
        return Err(Error::InvalidArgument(
            "chattering needs at least one block and one sub-cell".into(),
        ));
    }
    let coarse = &relaxed.grid;
    let atoms = relaxed
        .weights
        .first()
        .and_then(|c| c.first())
        .map_or(0, |w| w.len());
    for ch in &relaxed.weights {
        for w in ch {
            let sum: f64 = w.iter().sum();
            if w.len() != atoms || w.iter().any(|&v| v < -SIMPLEX_TOL) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Precondition(format!(
                    "weights {w:?} are not in the simplex"
                )));
            }
        }
    }
    let fine = TimeGrid::new(coarse.horizon(), n_blocks * sub_cells)?;
    let block = coarse.horizon() / n_blocks as f64;
    let mut indices = Vec::with_capacity(relaxed.weights.len());
    for ch in &relaxed.weights {
        let mut out = Vec::with_capacity(fine.cells());
        let mut carry = vec![0.0; atoms];
        for b in 0..n_blocks {
            let (lo, hi) = (b as f64 * block, (b + 1) as f64 * block);
            let mut avg = vec![0.0; atoms];
            let first = coarse.cell_of(lo);
            let last = coarse.cell_of(hi).max(first);
            for (j, wj) in ch.iter().enumerate().take(last + 1).skip(first) {
                let overlap = (hi.min(coarse.t(j + 1)) - lo.max(coarse.t(j))).max(0.0);
                for (a, w) in avg.iter_mut().zip(wj) {
                    *a += w.max(0.0) * overlap / block;
                }
            }
            let total: f64 = avg.iter().sum();
            let mut cum = 0.0;
            let mut placed = 0usize;
            for k in 0..atoms {
                let target = sub_cells as f64 * avg[k] / total + carry[k];
                cum += target;
                let upto = if k + 1 == atoms {
                    sub_cells
                } else {
                    (cum.round().max(0.0) as usize).clamp(placed, sub_cells)
                };
                let count = upto - placed;
                carry[k] = target - count as f64;
                out.extend(std::iter::repeat_n(k, count));
                placed = upto;
            }
        }
        indices.push(out);
    }
    AtomSchedule::new(fine, indices, atoms)
}
