//! Seeded property suites for the lattice-norm / projection equivalence.
//!
//! Every suite draws its trials from a per-trial ChaCha stream derived from
//! `(seed, trial index)`, so a report does not depend on how trials are
//! scheduled. Trials run in parallel and are reduced in index order; the first
//! witness is always the violating trial with the smallest index.
//!
//! Refutation suites inject a deterministic witness as trial 0 when the exact
//! lattice-norm test fails, so that a non-lattice instance is refuted even
//! when random sampling would need many draws to hit a violation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone_projection::{
    certificate_check, moreau_decompose, project_closed_form, Projector,
};
use crate::error::{Error, Result};
use crate::inner_space::{InnerProductSpace, Vector};
use crate::instance::Instance;
use crate::lattice_order::{OrderBasis, OrderedSpace};
use crate::linalg::Matrix;

/// Off-diagonal tolerance of the exact lattice-norm test, relative to the
/// largest diagonal entry of `B⁻ᵀGB⁻¹`.
pub const EXACT_OFFDIAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Half-width of the uniform box random coordinates are drawn from.
    pub sample_radius: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            tol: 1e-7,
            sample_radius: 10.0,
        }
    }
}

impl TrialConfig {
    pub fn new(trials: usize, seed: u64, tol: f64) -> Self {
        Self {
            trials,
            seed,
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.sample_radius > 0.0) || !self.sample_radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sample radius must be positive, got {}",
                self.sample_radius
            )));
        }
        Ok(())
    }

    fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No violation, but some trials could not be decided (solver non-convergence).
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub inputs: BTreeMap<String, Vec<f64>>,
    pub defect: f64,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub instance_digest: String,
    /// Trials that reached a decision; non-converged trials are not counted.
    pub trials_run: usize,
    pub violations: usize,
    pub first_witness: Option<Witness>,
    pub seed: u64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// The report as written to disk: floats rounded to 12 significant digits.
    pub fn canonical(&self) -> Report {
        let text = crate::numfmt::to_canonical_json(self).expect("report serializes");
        serde_json::from_str(&text).expect("canonical report parses")
    }
}

enum Outcome {
    Holds,
    Violated { inputs: Vec<(&'static str, Vector)>, defect: f64 },
    Undecided,
}

fn violated(inputs: Vec<(&'static str, Vector)>, defect: f64) -> Outcome {
    Outcome::Violated { inputs, defect }
}

fn run_trials<F>(suite: &str, ospace: &OrderedSpace, cfg: &TrialConfig, trial: F) -> Result<Report>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Outcome> + Sync,
{
    cfg.validate()?;
    let outcomes: Vec<Outcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial(t, &mut cfg.rng(t)))
        .collect::<Result<_>>()?;
    let mut trials_run = 0;
    let mut violations = 0;
    let mut first_witness = None;
    for (t, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Holds => trials_run += 1,
            Outcome::Undecided => {}
            Outcome::Violated { inputs, defect } => {
                trials_run += 1;
                violations += 1;
                if first_witness.is_none() {
                    first_witness = Some(Witness {
                        inputs: inputs
                            .into_iter()
                            .map(|(k, v)| (k.to_string(), v.into_inner()))
                            .collect(),
                        defect,
                        trial: t,
                    });
                }
            }
        }
    }
    let verdict = if violations > 0 {
        Verdict::Fail
    } else if trials_run < cfg.trials {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(Report {
        suite: suite.to_string(),
        instance_digest: Instance::from_space(ospace, None).digest(),
        trials_run,
        violations,
        first_witness,
        seed: cfg.seed,
        tol: cfg.tol,
        verdict,
    })
}

fn random_vector(rng: &mut impl Rng, dim: usize, radius: f64) -> Vector {
    Vector::from_raw((0..dim).map(|_| rng.gen_range(-radius..=radius)).collect())
}

fn random_cone_point(ospace: &OrderedSpace, rng: &mut impl Rng, radius: f64) -> Vector {
    let c: Vec<f64> = (0..ospace.dim()).map(|_| rng.gen_range(0.0..=radius)).collect();
    ospace.order().from_coords(&c)
}

/// Largest order-coordinate shortfall `max(0, -min_i (B(y-x))_i)` of `x <= y`.
fn order_shortfall(order: &OrderBasis, x: &Vector, y: &Vector) -> f64 {
    order
        .coords(&(y - x))
        .into_iter()
        .fold(0.0f64, |m, c| m.max(-c))
}

/// Result of the exact lattice-norm test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeNormCheck {
    pub is_lattice: bool,
    /// Largest `|M_ij| / max_k M_kk` over `i != j`, with `M = B⁻ᵀGB⁻¹`.
    pub offdiag_ratio: f64,
    pub witness: Option<LatticeNormWitness>,
}

/// `x = B⁻¹(e_i - e_j)`, `y = B⁻¹(e_i + e_j)`: equal absolute values, different norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeNormWitness {
    pub i: usize,
    pub j: usize,
    pub x: Vector,
    pub y: Vector,
    pub norm_sq_x: f64,
    pub norm_sq_y: f64,
}

/// The norm is a lattice norm iff the Gram matrix in order coordinates is diagonal.
pub fn is_lattice_norm_exact(ospace: &OrderedSpace) -> LatticeNormCheck {
    let m = ospace.order_gram();
    let n = m.dim();
    let max_diag = (0..n).map(|i| m.get(i, i)).fold(0.0, f64::max);
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = 0.5 * (m.get(i, j) + m.get(j, i)).abs() / max_diag;
            if r > worst.0 {
                worst = (r, i, j);
            }
        }
    }
    let positive_diag = (0..n).all(|i| m.get(i, i) > 0.0);
    let (ratio, i, j) = worst;
    let is_lattice = positive_diag && ratio <= EXACT_OFFDIAG_TOL;
    let witness = (!is_lattice && n >= 2).then(|| {
        let order = ospace.order();
        let mut minus = vec![0.0; n];
        minus[i] = 1.0;
        minus[j] = -1.0;
        let mut plus = minus.clone();
        plus[j] = 1.0;
        let x = order.from_coords(&minus);
        let y = order.from_coords(&plus);
        let space = ospace.space();
        LatticeNormWitness {
            i,
            j,
            norm_sq_x: space.inner_raw(x.as_slice(), x.as_slice()),
            norm_sq_y: space.inner_raw(y.as_slice(), y.as_slice()),
            x,
            y,
        }
    });
    LatticeNormCheck {
        is_lattice,
        offdiag_ratio: ratio,
        witness,
    }
}

/// `x = B⁻¹(e_i - e_j)` for the largest off-diagonal `|M_ij|`: its positive part
/// `B⁻¹e_i` fails the projection certificate whenever `M_ij != 0`.
fn sign_flip_probe(ospace: &OrderedSpace, radius: f64) -> Option<Vector> {
    is_lattice_norm_exact(ospace)
        .witness
        .map(|w| w.x.scale(radius))
}

pub fn check_lattice_norm_sampled(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Report> {
    let exact = is_lattice_norm_exact(ospace);
    let space = ospace.space();
    let order = ospace.order();
    let dim = ospace.dim();
    run_trials("lattice-norm", ospace, cfg, |t, rng| {
        let (x, y) = match (&exact.witness, t) {
            (Some(w), 0) => {
                // |x| = |y|; test the larger norm against the smaller
                let (x, y) = if w.norm_sq_x > w.norm_sq_y {
                    (&w.x, &w.y)
                } else {
                    (&w.y, &w.x)
                };
                (x.scale(cfg.sample_radius), y.scale(cfg.sample_radius))
            }
            _ => {
                let cy: Vec<f64> = (0..dim)
                    .map(|_| rng.gen_range(-cfg.sample_radius..=cfg.sample_radius))
                    .collect();
                let cx: Vec<f64> = cy
                    .iter()
                    .map(|c| {
                        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        sign * rng.gen_range(0.0..=1.0) * c.abs()
                    })
                    .collect();
                (order.from_coords(&cx), order.from_coords(&cy))
            }
        };
        let nx = space.norm_raw(x.as_slice());
        let ny = space.norm_raw(y.as_slice());
        let defect = nx - ny;
        Ok(if defect > cfg.tol * (1.0 + ny) {
            violated(vec![("x", x), ("y", y)], defect)
        } else {
            Outcome::Holds
        })
    })
}

fn project(projector: &Projector, ospace: &OrderedSpace, x: &Vector) -> Result<Option<Vector>> {
    match projector.project(ospace, x) {
        Ok(r) => Ok(Some(r.point)),
        Err(Error::NonConvergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn order_scale(order: &OrderBasis, xs: &[&Vector]) -> f64 {
    1.0 + xs
        .iter()
        .map(|x| order.coords(x).iter().fold(0.0f64, |m, c| m.max(c.abs())))
        .fold(0.0, f64::max)
}

/// `x <= y` implies `P(x) <= P(y)`.
pub fn check_isotone(ospace: &OrderedSpace, projector: &Projector, cfg: &TrialConfig) -> Result<Report> {
    let order = ospace.order();
    run_trials("isotone", ospace, cfg, |_, rng| {
        let x = random_vector(rng, ospace.dim(), cfg.sample_radius);
        let y = &x + &random_cone_point(ospace, rng, cfg.sample_radius);
        let (Some(px), Some(py)) = (project(projector, ospace, &x)?, project(projector, ospace, &y)?)
        else {
            return Ok(Outcome::Undecided);
        };
        let defect = order_shortfall(order, &px, &py);
        Ok(if defect > cfg.tol * order_scale(order, &[&x, &y]) {
            violated(vec![("x", x), ("y", y), ("px", px), ("py", py)], defect)
        } else {
            Outcome::Holds
        })
    })
}

/// `P(x + y) <= P(x) + P(y)`.
pub fn check_subadditive(
    ospace: &OrderedSpace,
    projector: &Projector,
    cfg: &TrialConfig,
) -> Result<Report> {
    let order = ospace.order();
    run_trials("subadditive", ospace, cfg, |_, rng| {
        let x = random_vector(rng, ospace.dim(), cfg.sample_radius);
        let y = random_vector(rng, ospace.dim(), cfg.sample_radius);
        let s = &x + &y;
        let (Some(px), Some(py), Some(ps)) = (
            project(projector, ospace, &x)?,
            project(projector, ospace, &y)?,
            project(projector, ospace, &s)?,
        ) else {
            return Ok(Outcome::Undecided);
        };
        let bound = &px + &py;
        let defect = order_shortfall(order, &ps, &bound);
        Ok(if defect > cfg.tol * order_scale(order, &[&x, &y]) {
            violated(vec![("x", x), ("y", y), ("p_sum", ps), ("p_x_plus_p_y", bound)], defect)
        } else {
            Outcome::Holds
        })
    })
}

/// `<x, y> >= 0` for cone elements; trial 0 tests the generator pair with the
/// smallest inner product.
pub fn check_positive_pairs(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Report> {
    let space = ospace.space();
    let generators = ospace.order().generators();
    let n = generators.len();
    let mut worst_pair = (f64::INFINITY, 0, 0);
    for i in 0..n {
        for j in (i + 1).min(n - 1)..n {
            let ip = space.inner_raw(generators[i].as_slice(), generators[j].as_slice());
            if ip < worst_pair.0 {
                worst_pair = (ip, i, j);
            }
        }
    }
    run_trials("positive-pairs", ospace, cfg, |t, rng| {
        let (x, y) = if t == 0 {
            (generators[worst_pair.1].clone(), generators[worst_pair.2].clone())
        } else {
            (
                random_cone_point(ospace, rng, cfg.sample_radius),
                random_cone_point(ospace, rng, cfg.sample_radius),
            )
        };
        let ip = space.inner_raw(x.as_slice(), y.as_slice());
        let scale = 1.0 + space.norm_raw(x.as_slice()) * space.norm_raw(y.as_slice());
        Ok(if ip < -cfg.tol * scale {
            violated(vec![("x", x), ("y", y)], -ip)
        } else {
            Outcome::Holds
        })
    })
}

/// `<x⁺, x⁻> = 0` and `‖|x|‖ = ‖x‖`.
pub fn check_identities(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Report> {
    let space = ospace.space();
    let order = ospace.order();
    run_trials("identities", ospace, cfg, |_, rng| {
        let x = random_vector(rng, ospace.dim(), cfg.sample_radius);
        let pos = order.pos_part(&x)?;
        let neg = order.neg_part(&x)?;
        let abs = &pos + &neg;
        let xn = space.norm_raw(x.as_slice());
        let orth = space.inner_raw(pos.as_slice(), neg.as_slice());
        let pyth = space.norm_raw(abs.as_slice()) - xn;
        Ok(if orth.abs() > cfg.tol * (1.0 + xn * xn) {
            violated(vec![("x", x), ("pos", pos), ("neg", neg)], orth)
        } else if pyth.abs() > cfg.tol * (1.0 + xn) {
            violated(vec![("x", x), ("abs", abs)], pyth)
        } else {
            Outcome::Holds
        })
    })
}

/// `x = p + q` with `p` in the cone, `q` in the polar cone and `<p, q> = 0`.
pub fn check_moreau(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Report> {
    run_trials("moreau", ospace, cfg, |_, rng| {
        let x = random_vector(rng, ospace.dim(), cfg.sample_radius);
        match moreau_decompose(ospace, &x, cfg.tol) {
            Ok(_) => Ok(Outcome::Holds),
            Err(Error::MoreauDefect { orthogonality, polar }) => {
                Ok(violated(vec![("x", x)], orthogonality.abs().max(polar)))
            }
            Err(Error::NonConvergence { .. }) => Ok(Outcome::Undecided),
            Err(e) => Err(e),
        }
    })
}

/// `‖x⁺ - P(x)‖ <= tol·(1 + ‖x‖)` with `P` computed by Dykstra.
pub fn check_oracle_agreement(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Report> {
    let probe = sign_flip_probe(ospace, cfg.sample_radius);
    let space = ospace.space();
    let dykstra = Projector::dykstra();
    run_trials("oracle-agreement", ospace, cfg, |t, rng| {
        let x = match (&probe, t) {
            (Some(p), 0) => p.clone(),
            _ => random_vector(rng, ospace.dim(), cfg.sample_radius),
        };
        let closed = project_closed_form(ospace, &x)?.point;
        let Some(oracle) = project(&dykstra, ospace, &x)? else {
            return Ok(Outcome::Undecided);
        };
        let gap = space.norm_raw((&closed - &oracle).as_slice());
        Ok(if gap > cfg.tol * (1.0 + space.norm_raw(x.as_slice())) {
            violated(vec![("x", x), ("closed_form", closed), ("dykstra", oracle)], gap)
        } else {
            Outcome::Holds
        })
    })
}

/// Refutation suite: does the positive part pass the projection certificate?
pub fn check_positive_part_certificate(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Report> {
    let probe = sign_flip_probe(ospace, cfg.sample_radius);
    let space = ospace.space();
    run_trials("positive-part-certificate", ospace, cfg, |t, rng| {
        let x = match (&probe, t) {
            (Some(p), 0) => p.clone(),
            _ => random_vector(rng, ospace.dim(), cfg.sample_radius),
        };
        let pos = ospace.order().pos_part(&x)?;
        let xn = space.norm_raw(x.as_slice());
        let cert = certificate_check(ospace, &x, &pos, cfg.tol * (1.0 + xn * xn))?;
        Ok(if cert.verdict {
            Outcome::Holds
        } else {
            let defect = cert.orthogonality_defect.abs().max(cert.worst_generator_angle);
            violated(vec![("x", x), ("pos", pos)], defect)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Consistency {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lattice,
    NonLattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub instance_digest: String,
    pub exact: LatticeNormCheck,
    pub side: Side,
    pub verdict: Consistency,
    pub reports: Vec<Report>,
}

impl Classification {
    pub fn report(&self, suite: &str) -> Option<&Report> {
        self.reports.iter().find(|r| r.suite == suite)
    }
}

/// Runs the exact test and the sampled suites and checks they tell the same story.
///
/// Lattice side: every suite must pass. Non-lattice side: the sampled
/// lattice-norm suite or the oracle-agreement suite must fail. Isotonicity and
/// subadditivity of the Dykstra projection are reported on both sides but only
/// required on the lattice side.
pub fn classify_instance(ospace: &OrderedSpace, cfg: &TrialConfig) -> Result<Classification> {
    let exact = is_lattice_norm_exact(ospace);
    let dykstra = Projector::dykstra();
    let reports = vec![
        check_lattice_norm_sampled(ospace, cfg)?,
        check_isotone(ospace, &dykstra, cfg)?,
        check_subadditive(ospace, &dykstra, cfg)?,
        check_positive_pairs(ospace, cfg)?,
        check_oracle_agreement(ospace, cfg)?,
    ];
    let failed = |suite: &str| {
        reports
            .iter()
            .any(|r| r.suite == suite && r.verdict == Verdict::Fail)
    };
    let consistent = if exact.is_lattice {
        reports.iter().all(Report::passed)
    } else {
        failed("lattice-norm") || failed("oracle-agreement")
    };
    Ok(Classification {
        instance_digest: Instance::from_space(ospace, None).digest(),
        side: if exact.is_lattice {
            Side::Lattice
        } else {
            Side::NonLattice
        },
        exact,
        verdict: if consistent {
            Consistency::Consistent
        } else {
            Consistency::Inconsistent
        },
        reports,
    })
}

/// A random order basis with 1-norm condition estimate at most `max_condition`.
pub fn random_order_basis(rng: &mut impl Rng, dim: usize, max_condition: f64) -> OrderBasis {
    loop {
        let mut m = Matrix::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                let v = m.get(i, j) + rng.gen_range(-1.0..=1.0) / (dim as f64).sqrt();
                m.set(i, j, v);
            }
        }
        if let Some(inv) = m.inverse() {
            if crate::linalg::condition_one(&m, &inv) <= max_condition {
                if let Ok(b) = OrderBasis::new(m) {
                    return b;
                }
            }
        }
    }
}

/// `G = Bᵀ M B` for an order-coordinate Gram matrix `M`.
pub fn space_from_order_gram(order: OrderBasis, m: &Matrix) -> Result<OrderedSpace> {
    let b = order.basis();
    let mut g = b.transpose().mul(&m.mul(b));
    let n = g.dim();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (g.get(i, j) + g.get(j, i));
            g.set(i, j, s);
            g.set(j, i, s);
        }
    }
    OrderedSpace::new(InnerProductSpace::new(g)?, order)
}

/// Lattice instance `G = BᵀDB` with random well-conditioned `B` and `D` in `[0.5, 2]`.
pub fn random_lattice_instance(rng: &mut impl Rng, dim: usize) -> OrderedSpace {
    loop {
        let order = random_order_basis(rng, dim, 50.0);
        let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..=2.0)).collect();
        if let Ok(s) = space_from_order_gram(order, &Matrix::diagonal(&d)) {
            return s;
        }
    }
}

/// Non-lattice instance `G = Bᵀ(D + E)B`: a diagonal order Gram plus a symmetric
/// off-diagonal perturbation `E` that keeps `D + E` diagonally dominant and has
/// at least one entry of size at least `0.1·min D / dim`.
pub fn random_non_lattice_instance(rng: &mut impl Rng, dim: usize) -> OrderedSpace {
    assert!(dim >= 2, "a one-dimensional norm is always a lattice norm");
    loop {
        let order = random_order_basis(rng, dim, 50.0);
        let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..=2.0)).collect();
        let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let bound = 0.9 * dmin / (dim - 1) as f64;
        let mut m = Matrix::diagonal(&d);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let e = rng.gen_range(-bound..=bound);
                m.set(i, j, e);
                m.set(j, i, e);
            }
        }
        let (i, j) = (rng.gen_range(0..dim), rng.gen_range(0..dim - 1));
        let j = if j >= i { j + 1 } else { j };
        let big = rng.gen_range(0.1 * bound..=bound) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        m.set(i, j, big);
        m.set(j, i, big);
        if let Ok(s) = space_from_order_gram(order, &m) {
            return s;
        }
    }
}
