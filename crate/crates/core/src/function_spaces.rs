//! Discretized function spaces.
//!
//! * `L²[-1, 1]` sampled on a quadrature grid, with the ramp sequence
//!   `x_n(r) = min(1, n r)⁺`, which is Cauchy in the `L²` norm but whose limit is
//!   a step function outside `C[-1, 1]`.
//! * Piecewise polynomials on `[0, 1]` with the inner product
//!   `Σ_n x(t_n) y(t_n) / 2ⁿ`, truncated to `N` terms, where `t_n = (cos n + 1)/2`.
//!
//! Both are diagonal Gram forms on node values with the pointwise order, so
//! both are lattice instances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone_projection::{project_closed_form, project_dykstra, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::inner_space::{InnerProductSpace, Vector};
use crate::lattice_order::{OrderBasis, OrderedSpace};
use crate::linalg::Matrix;

/// Allowed deviation of the weight sum from the interval length 2.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Minimum separation of evaluation nodes.
pub const NODE_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    CompositeSimpson,
    GaussLegendre,
}

/// Nodes and positive weights of a quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
}

impl QuadratureGrid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, rule: QuadratureRule) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Empty);
        }
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if nodes.iter().any(|r| !(-1.0..=1.0).contains(r)) {
            return Err(Error::InvalidParameter("quadrature node outside [-1, 1]".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("quadrature nodes must increase strictly".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter("quadrature weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 2.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "quadrature weights sum to {total}, expected 2"
            )));
        }
        Ok(Self {
            nodes,
            weights,
            rule,
        })
    }

    /// Composite Simpson rule over `intervals` equal panels (`intervals + 1` nodes).
    pub fn composite_simpson(intervals: usize) -> Result<Self> {
        if intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "composite Simpson needs an even number of intervals >= 2, got {intervals}"
            )));
        }
        let h = 2.0 / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| -1.0 + i as f64 * h).collect();
        nodes[intervals] = 1.0;
        let weights = (0..=intervals)
            .map(|i| {
                let c = if i == 0 || i == intervals {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Self::new(nodes, weights, QuadratureRule::CompositeSimpson)
    }

    /// Composite Simpson rule with at most `nodes` nodes: the panel count is
    /// `nodes - 1` rounded down to an even number.
    pub fn simpson_with_nodes(nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidParameter(format!(
                "composite Simpson needs at least 3 nodes, got {nodes}"
            )));
        }
        let intervals = (nodes - 1) & !1;
        Self::composite_simpson(intervals)
    }

    /// Gauss-Legendre rule with `n` nodes (Newton iteration on `P_n`).
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Gauss-Legendre needs at least one node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 {
                    break;
                }
            }
            let dp = legendre(n, z).1;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self::new(nodes, weights, QuadratureRule::GaussLegendre)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction {
            values: self.nodes.iter().map(|r| f(*r)).collect(),
        }
    }

    /// `Σ w_i f_i g_i`, the quadrature approximation of `∫ f g`.
    pub fn inner(&self, f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
        f.check(self)?;
        g.check(self)?;
        Ok(self
            .weights
            .iter()
            .zip(f.values.iter().zip(&g.values))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    pub fn norm(&self, f: &SampledFunction) -> Result<f64> {
        Ok(self.inner(f, f)?.sqrt())
    }
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Node values of a function on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub values: Vec<f64>,
}

impl SampledFunction {
    fn check(&self, grid: &QuadratureGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn to_vector(&self) -> Result<Vector> {
        Vector::new(self.values.clone())
    }

    pub fn sub(&self, other: &SampledFunction) -> SampledFunction {
        SampledFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn sup_distance(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `L²` structure on grid values: `G = diag(weights)`, pointwise order.
///
/// The Gram matrix is stored densely, so this is meant for grids of at most a
/// few thousand nodes; norms on larger grids go through [`QuadratureGrid::norm`].
pub fn build_l2_space(grid: &QuadratureGrid) -> Result<OrderedSpace> {
    let space = InnerProductSpace::new(Matrix::diagonal(grid.weights()))?;
    OrderedSpace::new(space, OrderBasis::identity(grid.len()))
}

/// `x_n(r) = max(0, min(1, n r))` at the grid nodes.
pub fn cauchy_element(grid: &QuadratureGrid, n: usize) -> Result<SampledFunction> {
    if n == 0 {
        return Err(Error::InvalidParameter("sequence index starts at 1".into()));
    }
    let n = n as f64;
    Ok(grid.sample(|r| (n * r).clamp(0.0, 1.0)))
}

/// Grid `L²` distance between `x_n` and `x_m`, `1 <= n < m`.
pub fn cauchy_distance(grid: &QuadratureGrid, n: usize, m: usize) -> Result<f64> {
    if n == 0 || m <= n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= n < m, got n = {n}, m = {m}"
        )));
    }
    let d = cauchy_element(grid, m)?.sub(&cauchy_element(grid, n)?);
    grid.norm(&d)
}

/// `∫ (x_m - x_n)² = (m-n)²/(3m³) + (m-n)³/(3n m³)`.
///
/// The difference is `(m-n) r` on `[0, 1/m]` and `1 - n r` on `[1/m, 1/n]`.
pub fn exact_cauchy_distance_sq(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let gap = m - n;
    gap * gap / (3.0 * m.powi(3)) + gap.powi(3) / (3.0 * n * m.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub n: usize,
    pub m: usize,
    pub measured_d2: f64,
    pub exact_d2: f64,
    pub abs_error: f64,
}

/// Rows `(n, 2n)` for `n = 1, 2, 4, ... <= n_max`.
pub fn cauchy_table(grid: &QuadratureGrid, n_max: usize) -> Result<Vec<CauchyRow>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    std::iter::successors(Some(1usize), |n| n.checked_mul(2))
        .take_while(|n| *n <= n_max)
        .map(|n| {
            let m = 2 * n;
            let measured_d2 = cauchy_distance(grid, n, m)?.powi(2);
            let exact_d2 = exact_cauchy_distance_sq(n, m);
            Ok(CauchyRow {
                n,
                m,
                measured_d2,
                exact_d2,
                abs_error: (measured_d2 - exact_d2).abs(),
            })
        })
        .collect()
}

/// Tolerance a Cauchy row must meet on a grid with `nodes` nodes.
pub fn cauchy_tolerance(nodes: usize) -> f64 {
    (10.0 / nodes as f64).max(1e-6)
}

/// Sup-norm gap `max |x_n - x_{4n}|` over the grid; stays near 3/4 for every `n`
/// the grid resolves, while the `L²` gaps go to zero.
pub fn cauchy_sup_gap(grid: &QuadratureGrid, n: usize) -> Result<f64> {
    Ok(cauchy_element(grid, n)?.sup_distance(&cauchy_element(grid, 4 * n)?))
}

/// Truncated point-evaluation space on `N` nodes `t_n = (cos n + 1)/2` with
/// weights `2⁻ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalNodeSpace {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl EvalNodeSpace {
    pub fn new(terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::InvalidParameter("terms must be at least 1".into()));
        }
        let nodes: Vec<f64> = (0..terms).map(|n| ((n as f64).cos() + 1.0) / 2.0).collect();
        let weights: Vec<f64> = (0..terms).map(|n| 0.5f64.powi(n as i32)).collect();
        let mut sorted = nodes.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] <= NODE_SEPARATION) {
            return Err(Error::InvalidParameter(format!(
                "evaluation nodes {} and {} coincide",
                w[0], w[1]
            )));
        }
        Ok(Self { nodes, weights })
    }

    pub fn terms(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector::from_raw(self.nodes.iter().map(|t| f(*t)).collect())
    }

    pub fn ordered_space(&self) -> Result<OrderedSpace> {
        let space = InnerProductSpace::new(Matrix::diagonal(&self.weights))?;
        OrderedSpace::new(space, OrderBasis::identity(self.terms()))
    }
}

pub fn build_eval_space(terms: usize) -> Result<OrderedSpace> {
    EvalNodeSpace::new(terms)?.ordered_space()
}

/// `2 - 2^(1-N)`.
pub fn exact_eval_one_one(terms: usize) -> f64 {
    2.0 - 2f64.powi(1 - terms as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub terms: usize,
    pub inner_one_one: f64,
    pub exact_one_one: f64,
    pub abs_error: f64,
    /// Largest `G`-distance between clipping and Dykstra over the probe functions.
    pub projection_gap: f64,
}

/// Piecewise polynomial probes on `[0, 1]`, each changing sign at least once.
pub fn eval_probe_functions() -> Vec<fn(f64) -> f64> {
    vec![
        |t| t - 0.5,
        |t| (t - 0.2) * (t - 0.7),
        |t| if t < 0.4 { 1.0 - 5.0 * t } else { (t - 0.4) * (t - 0.9) },
        |t| 3.0 * t * t * t - 2.0 * t + 0.1,
        |t| if t < 0.5 { -t } else { 2.0 * t - 1.5 },
    ]
}

pub fn weighted_eval_row(terms: usize) -> Result<EvalRow> {
    let eval = EvalNodeSpace::new(terms)?;
    let ospace = eval.ordered_space()?;
    let one = eval.sample(|_| 1.0);
    let inner_one_one = ospace.space().inner(&one, &one)?;
    let exact_one_one = exact_eval_one_one(terms);
    let mut projection_gap: f64 = 0.0;
    for f in eval_probe_functions() {
        let x = eval.sample(f);
        let clip = project_closed_form(&ospace, &x)?.point;
        let oracle = project_dykstra(&ospace, &x, DEFAULT_TOL, DEFAULT_MAX_ITER)?.point;
        projection_gap = projection_gap.max(ospace.space().norm(&(&clip - &oracle))?);
    }
    Ok(EvalRow {
        terms,
        inner_one_one,
        exact_one_one,
        abs_error: (inner_one_one - exact_one_one).abs(),
        projection_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_three_nodes() {
        let g = QuadratureGrid::composite_simpson(2).unwrap();
        assert_eq!(g.nodes(), &[-1.0, 0.0, 1.0]);
        let w = g.weights();
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15 && (w[1] - 4.0 / 3.0).abs() < 1e-15);
        assert!(crate::property_harness::is_lattice_norm_exact(&build_l2_space(&g).unwrap()).is_lattice);
    }

    #[test]
    fn grid_validation() {
        assert!(QuadratureGrid::composite_simpson(3).is_err());
        assert!(QuadratureGrid::composite_simpson(0).is_err());
        assert!(QuadratureGrid::gauss_legendre(0).is_err());
        assert!(QuadratureGrid::new(vec![0.0, 0.0], vec![1.0, 1.0], QuadratureRule::GaussLegendre).is_err());
        assert!(QuadratureGrid::new(vec![-0.5, 0.5], vec![1.0, 0.9], QuadratureRule::GaussLegendre).is_err());
    }

    #[test]
    fn gauss_legendre_small_rules() {
        let g = QuadratureGrid::gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((g.nodes()[0] + r).abs() < 1e-15 && (g.nodes()[1] - r).abs() < 1e-15);
        let g = QuadratureGrid::gauss_legendre(3).unwrap();
        assert!((g.weights()[1] - 8.0 / 9.0).abs() < 1e-14);
        assert!((g.nodes()[2] - 0.6f64.sqrt()).abs() < 1e-15);
        // exact on polynomials of degree 2n-1
        let g = QuadratureGrid::gauss_legendre(6).unwrap();
        let f = g.sample(|r| r.powi(10));
        let one = g.sample(|_| 1.0);
        assert!((g.inner(&f, &one).unwrap() - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn l2_norm_examples() {
        let g = QuadratureGrid::composite_simpson(4096).unwrap();
        assert_eq!(g.len(), 4097);
        let one = g.sample(|_| 1.0);
        assert!((g.norm(&one).unwrap().powi(2) - 2.0).abs() < 1e-12);
        let id = g.sample(|r| r);
        assert!((g.norm(&id).unwrap().powi(2) - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn l2_space_matches_grid_norm() {
        let g = QuadratureGrid::composite_simpson(256).unwrap();
        let s = build_l2_space(&g).unwrap();
        let f = g.sample(|r| r);
        let v = f.to_vector().unwrap();
        let via_space = s.space().norm(&v).unwrap();
        assert!((via_space.powi(2) - 2.0 / 3.0).abs() < 1e-9);
        assert!((via_space - g.norm(&f).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn cauchy_element_examples() {
        let g = QuadratureGrid::new(vec![-0.5, 0.5], vec![1.0, 1.0], QuadratureRule::GaussLegendre)
            .unwrap();
        assert_eq!(cauchy_element(&g, 1).unwrap().values, vec![0.0, 0.5]);
        assert_eq!(cauchy_element(&g, 4).unwrap().values, vec![0.0, 1.0]);
        assert!(cauchy_element(&g, 0).is_err());
    }

    #[test]
    fn exact_cauchy_values() {
        assert!((exact_cauchy_distance_sq(1, 2) - 1.0 / 12.0).abs() < 1e-16);
        for n in [1, 3, 10, 64] {
            assert!((exact_cauchy_distance_sq(n, 2 * n) - 1.0 / (12.0 * n as f64)).abs() < 1e-16);
        }
    }

    /// Independent check of the closed form by adaptive Simpson integration
    /// of the difference of the two ramps.
    #[test]
    fn exact_cauchy_matches_adaptive_integration() {
        fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
            const MIN_DEPTH: u32 = 32;
            let c = 0.5 * (a + b);
            let s = (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
            let l = (c - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + c)) + f(c));
            let r = (b - c) / 6.0 * (f(c) + 4.0 * f(0.5 * (c + b)) + f(b));
            if depth == 0 || (depth < MIN_DEPTH && (l + r - s).abs() < 15.0 * tol) {
                l + r + (l + r - s) / 15.0
            } else {
                adaptive(f, a, c, tol / 2.0, depth - 1) + adaptive(f, c, b, tol / 2.0, depth - 1)
            }
        }
        for (n, m) in [(1, 2), (2, 3), (3, 7), (5, 20)] {
            let ramp = |k: f64, r: f64| (k * r).clamp(0.0, 1.0);
            let f = |r: f64| (ramp(m as f64, r) - ramp(n as f64, r)).powi(2);
            let numeric = adaptive(&f, -1.0, 1.0, 1e-13, 48);
            assert!((numeric - exact_cauchy_distance_sq(n, m)).abs() < 1e-10, "{n},{m}");
        }
    }

    #[test]
    fn simpson_node_counts() {
        assert_eq!(QuadratureGrid::simpson_with_nodes(4096).unwrap().len(), 4095);
        assert_eq!(QuadratureGrid::simpson_with_nodes(4097).unwrap().len(), 4097);
        assert_eq!(QuadratureGrid::simpson_with_nodes(3).unwrap().len(), 3);
        assert!(QuadratureGrid::simpson_with_nodes(2).is_err());
    }

    #[test]
    fn cauchy_distance_requires_order() {
        let g = QuadratureGrid::composite_simpson(64).unwrap();
        assert!(cauchy_distance(&g, 2, 2).is_err());
        assert!(cauchy_distance(&g, 0, 2).is_err());
        assert!(cauchy_table(&g, 0).is_err());
        assert_eq!(cauchy_table(&g, 5).unwrap().len(), 3);
    }

    #[test]
    fn sup_gap_stays_away_from_zero() {
        let g = QuadratureGrid::composite_simpson(4096).unwrap();
        for n in [1, 4, 16, 64] {
            let sup = cauchy_sup_gap(&g, n).unwrap();
            assert!((sup - 0.75).abs() < 0.05, "n={n} sup={sup}");
            let l2 = cauchy_distance(&g, n, 4 * n).unwrap();
            assert!(l2 < 0.6 / (n as f64).sqrt());
        }
    }

    #[test]
    fn eval_space_examples() {
        let one = EvalNodeSpace::new(1).unwrap();
        assert_eq!(one.nodes(), &[1.0]);
        assert_eq!(one.weights(), &[1.0]);
        for n in [1, 4, 16, 64] {
            let row = weighted_eval_row(n).unwrap();
            assert!(row.abs_error <= 1e-12 * row.exact_one_one, "{row:?}");
            assert!(row.projection_gap <= 1e-8);
        }
        assert!(EvalNodeSpace::new(0).is_err());
        let e = EvalNodeSpace::new(10).unwrap();
        assert!(e.nodes().iter().all(|t| (0.0..=1.0).contains(t)));
        let total: f64 = e.weights().iter().sum();
        assert_eq!(total, exact_eval_one_one(10));
    }
}
