//! Mixed-equilibrium computation for two-player hardmax games: the
//! discretized-game linear program and the finite-support oracle loop built
//! on circle-arc enumeration (d = 2).

pub mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::game::{exposure_from_scores, HARDMAX_TIE_TOL};
use simplex::{Constraint, LinearProgram, Relation};

/// Cap on discretization size: `k^(d-1)` points beyond this are rejected.
pub const GRID_POINT_CAP: u128 = 1_000_000;
/// Cap on the number of circle cells in the arc arrangement.
pub const ARC_CELL_CAP: usize = 100_000;
/// Feasibility slack used when a mixed strategy is checked against the
/// one-half equilibrium condition.
pub const MIXED_NE_TOL: f64 = 1e-9;

const ANGLE_DEDUP_TOL: f64 = 1e-12;
const HITTING_SET_BUDGET: usize = 64;

/// A finite-support mixed strategy over unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    support: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(support: Vec<DVector<f64>>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidWeights(format!(
                "{} support points, {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        for (i, s) in support.iter().enumerate() {
            let norm = s.norm();
            if (norm - 1.0).abs() > crate::game::UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm { index: i, norm });
            }
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidWeights("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            support: support.iter().map(|s| s.as_slice().to_vec()).collect(),
            probs,
        })
    }

    pub fn support(&self) -> Vec<DVector<f64>> {
        self.support
            .iter()
            .map(|s| DVector::from_row_slice(s))
            .collect()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

/// The m-by-m matrix `U_ij = u_1(s_i, s_j)` of a two-player hardmax game
/// restricted to a finite strategy set.
#[derive(Debug, Clone)]
pub struct PayoffMatrix {
    u: DMatrix<f64>,
}

impl PayoffMatrix {
    pub fn build(dist: &DemandDistribution, grid: &[DVector<f64>]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidConfig("empty strategy grid".into()));
        }
        for g in grid {
            if g.len() != dist.dim() {
                return Err(Error::DimensionMismatch {
                    expected: dist.dim(),
                    got: g.len(),
                });
            }
        }
        let m = grid.len();
        let mut u = DMatrix::zeros(m, m);
        for i in 0..m {
            u[(i, i)] = 0.5;
            for j in (i + 1)..m {
                let uij = two_player_hardmax_utility(dist, &grid[i], &grid[j]);
                u[(i, j)] = uij;
                u[(j, i)] = 1.0 - uij;
            }
        }
        Ok(Self { u })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn size(&self) -> usize {
        self.u.nrows()
    }

    /// Largest deviation from the constant-sum identity `U + U^T = J`.
    pub fn constant_sum_residual(&self) -> f64 {
        let m = self.u.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                worst = worst.max((self.u[(i, j)] + self.u[(j, i)] - 1.0).abs());
            }
        }
        worst
    }
}

/// Player 1's hardmax utility in the two-player game `(a, b)`:
/// per consumer, the higher score wins outright and near-equal scores split.
pub fn two_player_hardmax_utility(
    dist: &DemandDistribution,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> f64 {
    let mut u = 0.0;
    for (c, w) in dist.iter() {
        let za = c.dot(a);
        let zb = c.dot(b);
        let p = exposure_from_scores(&[za, zb], 0.0).expect("finite scores");
        u += w * p[0];
    }
    u
}

/// Expected utility of the mixed strategy `p` against a pure deviation:
/// `E_{s_1 ~ p}[u_1(s_1, dev)]`.
pub fn mixed_value_against(
    dist: &DemandDistribution,
    p: &MixedStrategy,
    deviation: &DVector<f64>,
) -> f64 {
    p.support()
        .iter()
        .zip(p.probs())
        .map(|(s, &w)| w * two_player_hardmax_utility(dist, s, deviation))
        .sum()
}

/// Minimum margin `E[u_1] - 1/2` of a mixed strategy against a dense angular
/// grid of pure deviations (d = 2). Non-negative within tolerance for a
/// mixed NE.
pub fn verify_mixed_strategy(
    dist: &DemandDistribution,
    p: &MixedStrategy,
    grid_size: usize,
) -> Result<f64> {
    if dist.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            d: dist.dim(),
            context: "mixed strategy verification",
        });
    }
    let mut min_margin = f64::INFINITY;
    for j in 0..grid_size {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / grid_size as f64;
        let dev = DVector::from_row_slice(&[phi.cos(), phi.sin()]);
        min_margin = min_margin.min(mixed_value_against(dist, p, &dev) - 0.5);
    }
    Ok(min_margin)
}

/// Uniform spherical-coordinate grid of `k^(d-1)` unit vectors.
///
/// The azimuthal coordinate takes `k` values on `[0, 2pi)`; each polar
/// coordinate takes `k` values on `[0, pi]` inclusive.
pub fn discretize_sphere(d: usize, k: usize) -> Result<Vec<DVector<f64>>> {
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            d,
            context: "sphere discretization",
        });
    }
    if k < 2 {
        return Err(Error::InvalidConfig("grid needs k >= 2".into()));
    }
    let size = (k as u128).pow((d - 1) as u32);
    if size > GRID_POINT_CAP {
        return Err(Error::GridOverflow {
            size,
            cap: GRID_POINT_CAP,
        });
    }

    let azimuth: Vec<f64> = (0..k)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / k as f64)
        .collect();
    let polar: Vec<f64> = (0..k)
        .map(|j| std::f64::consts::PI * j as f64 / (k - 1) as f64)
        .collect();

    let mut points = Vec::with_capacity(size as usize);
    let mut index = vec![0usize; d - 1];
    loop {
        // Angles: index[0..d-2] pick polar coordinates, the last picks azimuth.
        let mut point = DVector::zeros(d);
        let mut sin_prod = 1.0;
        for (axis, &idx) in index.iter().enumerate() {
            let angle = if axis == d - 2 {
                azimuth[idx]
            } else {
                polar[idx]
            };
            point[axis] = sin_prod * angle.cos();
            sin_prod *= angle.sin();
        }
        point[d - 1] = sin_prod;
        let norm = point.norm();
        if norm > 0.0 {
            point /= norm;
        } else {
            point[0] = 1.0;
        }
        points.push(point);

        // Odometer increment.
        let mut axis = d - 1;
        loop {
            if axis == 0 {
                return Ok(points);
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < k {
                break;
            }
            index[axis] = 0;
        }
    }
}

/// Solves the discretized two-player hardmax game.
///
/// Returns a maximin mixed strategy `x` (so `(x, x)` is a mixed NE of the
/// discretized game) and the game value. Among the optimal strategies the
/// most-mixed one is selected: a second program maximizes the smallest
/// support weight over the optimal face, which keeps symmetric instances
/// symmetric instead of returning an arbitrary vertex.
pub fn lp_mixed_ne(
    config: &crate::game::GameConfig,
    dist: &DemandDistribution,
    grid: &[DVector<f64>],
) -> Result<(MixedStrategy, f64)> {
    if !config.is_hardmax() {
        return Err(Error::InvalidConfig(
            "the discretized-game LP applies to hardmax (tau = 0) games".into(),
        ));
    }
    config.validate_distribution(dist)?;
    let payoff = PayoffMatrix::build(dist, grid)?;
    let (weights, value) = maximin_weights(payoff.matrix())?;
    let strategy = MixedStrategy::new(grid.to_vec(), weights)?;
    Ok((strategy, value))
}

/// Two-stage maximin solve on a payoff matrix: maximize the value, then
/// maximize the minimum weight over the optimal face.
fn maximin_weights(u: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    let m = u.nrows();
    // Stage 1: variables (x_1..x_m, alpha); maximize alpha subject to
    // sum_i x_i U_ij >= alpha for every opponent column j, sum x = 1.
    let mut constraints = Vec::with_capacity(m + 1);
    for j in 0..m {
        let mut coeffs = vec![0.0; m + 1];
        for i in 0..m {
            coeffs[i] = u[(i, j)];
        }
        coeffs[m] = -1.0;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: 0.0,
        });
    }
    let mut simplex_row = vec![1.0; m];
    simplex_row.push(0.0);
    constraints.push(Constraint {
        coeffs: simplex_row.clone(),
        relation: Relation::Eq,
        rhs: 1.0,
    });
    let mut objective = vec![0.0; m + 1];
    objective[m] = -1.0;
    let stage1 = simplex::solve(&LinearProgram {
        minimize: objective,
        constraints,
    })?;
    let value = stage1.x[m];

    // Stage 2: variables (x_1..x_m, floor); maximize the floor subject to
    // x_i >= floor and the stage-1 value (minus rounding slack).
    let mut constraints = Vec::with_capacity(2 * m + 1);
    for j in 0..m {
        let mut coeffs = vec![0.0; m + 1];
        for i in 0..m {
            coeffs[i] = u[(i, j)];
        }
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: value - 1e-12,
        });
    }
    constraints.push(Constraint {
        coeffs: simplex_row,
        relation: Relation::Eq,
        rhs: 1.0,
    });
    for i in 0..m {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[i] = 1.0;
        coeffs[m] = -1.0;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: 0.0,
        });
    }
    let mut objective = vec![0.0; m + 1];
    objective[m] = -1.0;
    let stage2 = simplex::solve(&LinearProgram {
        minimize: objective,
        constraints,
    })?;

    let mut weights: Vec<f64> = stage2.x[..m]
        .iter()
        .map(|&w| if w < 1e-12 { 0.0 } else { w })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::LinearProgram("degenerate weight vector".into()));
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok((weights, value))
}

/// A cell of the circle arrangement: a closed arc `[start, end]` in radians
/// with `end >= start` (`end` may exceed 2pi for the wrap-around arc), or a
/// single boundary point when `start == end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

impl Arc {
    pub fn is_degenerate(&self) -> bool {
        self.start == self.end
    }

    /// The angle at which the cell's constant value is evaluated.
    pub fn representative(&self) -> f64 {
        if self.is_degenerate() {
            self.start
        } else {
            0.5 * (self.start + self.end)
        }
    }

    pub fn representative_point(&self) -> DVector<f64> {
        let phi = self.representative();
        DVector::from_row_slice(&[phi.cos(), phi.sin()])
    }
}

/// The full circle arrangement cut by the score boundaries
/// `{s : <s, c_k> = <s_i, c_k>}` of a mixed strategy's support, with the
/// expected utility of the mixed player evaluated at one representative per
/// cell. The value is constant within each cell.
pub fn expected_value_cells(
    dist: &DemandDistribution,
    p: &MixedStrategy,
) -> Result<Vec<(Arc, f64)>> {
    if dist.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            d: dist.dim(),
            context: "arc arrangement",
        });
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut boundaries: Vec<f64> = Vec::new();
    for s in p.support() {
        for (c, _) in dist.iter() {
            let rho = c.norm();
            if rho == 0.0 {
                continue;
            }
            let beta = c[1].atan2(c[0]);
            let q = (s.dot(c) / rho).clamp(-1.0, 1.0);
            let delta = q.acos();
            for phi in [beta + delta, beta - delta] {
                boundaries.push(phi.rem_euclid(tau));
            }
        }
    }
    boundaries.sort_by(|a, b| a.total_cmp(b));
    boundaries.dedup_by(|a, b| (*a - *b).abs() <= ANGLE_DEDUP_TOL);
    if boundaries.len() >= 2 {
        // 0 and 2pi are the same direction.
        if (tau - boundaries[boundaries.len() - 1]) + boundaries[0] <= ANGLE_DEDUP_TOL {
            boundaries.pop();
        }
    }
    if 2 * boundaries.len() > ARC_CELL_CAP {
        return Err(Error::GridOverflow {
            size: 2 * boundaries.len() as u128,
            cap: ARC_CELL_CAP as u128,
        });
    }

    let mut cells = Vec::new();
    if boundaries.is_empty() {
        cells.push(Arc {
            start: 0.0,
            end: tau,
        });
    } else {
        for (idx, &phi) in boundaries.iter().enumerate() {
            cells.push(Arc {
                start: phi,
                end: phi,
            });
            let next = if idx + 1 < boundaries.len() {
                boundaries[idx + 1]
            } else {
                boundaries[0] + tau
            };
            if next - phi > ANGLE_DEDUP_TOL {
                cells.push(Arc {
                    start: phi,
                    end: next,
                });
            }
        }
    }

    Ok(cells
        .into_iter()
        .map(|cell| {
            let value = mixed_value_against(dist, p, &cell.representative_point());
            (cell, value)
        })
        .collect())
}

/// Cells of the circle where a pure deviation beats the mixed strategy `p`,
/// i.e. where `E_{s_1 ~ p}[u_1(s_1, s)] < 1/2`. Empty iff `(p, p)` is a
/// mixed NE (up to the cell arrangement's resolution of ties).
pub fn dominating_pure_strategies(
    dist: &DemandDistribution,
    p: &MixedStrategy,
) -> Result<Vec<Arc>> {
    Ok(expected_value_cells(dist, p)?
        .into_iter()
        .filter(|(_, value)| *value < 0.5 - ANGLE_DEDUP_TOL)
        .map(|(cell, _)| cell)
        .collect())
}

/// Oracle-driven search for a symmetric mixed NE with finite support
/// (d = 2, finite demand).
///
/// Candidate strategies are supported on consumer directions plus the arc
/// representatives revealed by the dominating-strategy oracle; the
/// constraint set grows with each violated cell until a candidate with an
/// empty dominating set is found or the budget runs out.
pub fn hitting_set_mixed_ne(
    dist: &DemandDistribution,
    max_support: usize,
) -> Result<Option<MixedStrategy>> {
    if dist.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            d: dist.dim(),
            context: "hitting-set search",
        });
    }
    if max_support == 0 {
        return Err(Error::InvalidConfig("support bound must be >= 1".into()));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut support_angles: Vec<f64> = Vec::new();
    for (c, _) in dist.iter() {
        if c.norm() > 0.0 {
            push_unique_angle(&mut support_angles, c[1].atan2(c[0]).rem_euclid(tau));
        }
    }
    if support_angles.is_empty() {
        // Every consumer is the zero vector: all strategies tie everywhere.
        let point = DVector::from_row_slice(&[1.0, 0.0]);
        return Ok(Some(MixedStrategy::new(vec![point], vec![1.0])?));
    }
    let mut constraint_angles = support_angles.clone();

    for _ in 0..HITTING_SET_BUDGET {
        let (weights, margin) =
            best_weights_on_support(dist, &support_angles, &constraint_angles)?;
        if margin < 0.5 - MIXED_NE_TOL {
            // The support cannot defend the constraints; widen it.
            let mut grew = false;
            for &phi in &constraint_angles {
                grew |= push_unique_angle(&mut support_angles, phi);
            }
            if !grew {
                return Ok(None);
            }
            continue;
        }

        let mut pts = Vec::new();
        let mut probs = Vec::new();
        for (phi, w) in support_angles.iter().zip(weights.iter()) {
            if *w > 1e-12 {
                pts.push(DVector::from_row_slice(&[phi.cos(), phi.sin()]));
                probs.push(*w);
            }
        }
        let total: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= total;
        }
        let candidate = MixedStrategy::new(pts, probs)?;

        let dominated = dominating_pure_strategies(dist, &candidate)?;
        if dominated.is_empty() {
            if candidate.support_size() > max_support {
                return Ok(None);
            }
            return Ok(Some(candidate));
        }
        let mut grew = false;
        for cell in dominated {
            grew |= push_unique_angle(&mut constraint_angles, cell.representative().rem_euclid(tau));
        }
        if !grew {
            return Ok(None);
        }
    }
    Ok(None)
}

fn push_unique_angle(angles: &mut Vec<f64>, phi: f64) -> bool {
    let tau = 2.0 * std::f64::consts::PI;
    if angles.iter().any(|&a| {
        let diff = (a - phi).rem_euclid(tau);
        diff <= ANGLE_DEDUP_TOL || tau - diff <= ANGLE_DEDUP_TOL
    }) {
        false
    } else {
        angles.push(phi);
        true
    }
}

/// Best mixed weights on a fixed support against a finite constraint set:
/// maximizes the worst-case expected utility, then the smallest weight over
/// the optimal face. Returns (weights, achieved margin).
fn best_weights_on_support(
    dist: &DemandDistribution,
    support_angles: &[f64],
    constraint_angles: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let support: Vec<DVector<f64>> = support_angles
        .iter()
        .map(|a| DVector::from_row_slice(&[a.cos(), a.sin()]))
        .collect();
    let opponents: Vec<DVector<f64>> = constraint_angles
        .iter()
        .map(|a| DVector::from_row_slice(&[a.cos(), a.sin()]))
        .collect();
    let rows = support.len();
    let cols = opponents.len();
    let mut u = DMatrix::zeros(rows, cols.max(1));
    for i in 0..rows {
        for j in 0..cols {
            u[(i, j)] = two_player_hardmax_utility(dist, &support[i], &opponents[j]);
        }
    }
    let (weights, value) = maximin_weights_rect(&u)?;
    Ok((weights, value))
}

/// Rectangular variant of the two-stage maximin solve (support rows against
/// constraint columns).
fn maximin_weights_rect(u: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    let rows = u.nrows();
    let cols = u.ncols();
    let mut constraints = Vec::with_capacity(cols + 1);
    for j in 0..cols {
        let mut coeffs = vec![0.0; rows + 1];
        for i in 0..rows {
            coeffs[i] = u[(i, j)];
        }
        coeffs[rows] = -1.0;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: 0.0,
        });
    }
    let mut simplex_row = vec![1.0; rows];
    simplex_row.push(0.0);
    constraints.push(Constraint {
        coeffs: simplex_row.clone(),
        relation: Relation::Eq,
        rhs: 1.0,
    });
    let mut objective = vec![0.0; rows + 1];
    objective[rows] = -1.0;
    let stage1 = simplex::solve(&LinearProgram {
        minimize: objective.clone(),
        constraints: constraints.clone(),
    })?;
    let value = stage1.x[rows];

    let mut constraints2 = Vec::with_capacity(cols + rows + 1);
    for j in 0..cols {
        let mut coeffs = vec![0.0; rows + 1];
        for i in 0..rows {
            coeffs[i] = u[(i, j)];
        }
        constraints2.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: value - 1e-12,
        });
    }
    constraints2.push(Constraint {
        coeffs: simplex_row,
        relation: Relation::Eq,
        rhs: 1.0,
    });
    for i in 0..rows {
        let mut coeffs = vec![0.0; rows + 1];
        coeffs[i] = 1.0;
        coeffs[rows] = -1.0;
        constraints2.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: 0.0,
        });
    }
    let stage2 = simplex::solve(&LinearProgram {
        minimize: objective,
        constraints: constraints2,
    })?;
    let mut weights: Vec<f64> = stage2.x[..rows]
        .iter()
        .map(|&w| if w < 1e-12 { 0.0 } else { w })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::LinearProgram("degenerate weight vector".into()));
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok((weights, value))
}

// Boundary/tie handling shares the tie tolerance with game-core hardmax.
const _: () = assert!(HARDMAX_TIE_TOL == 1e-12);
