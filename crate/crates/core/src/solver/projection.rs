//! Dykstra alternating projections between the PSD cone and a polyhedron of
//! Hermitian block matrices.
//!
//! The polyhedron is an intersection of linear constraints `<N, X> <= b` or
//! `<N, X> = b`. Projection onto it runs Hildreth's method on the multipliers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// `<normal, X> <= bound` (or `== bound` when `equality`) where `normal`
/// has one Hermitian matrix per block.
#[derive(Debug, Clone)]
pub(crate) struct Halfspace {
    pub normal: Vec<CMat>,
    pub bound: f64,
    pub equality: bool,
}

impl Halfspace {
    pub(crate) fn le(normal: Vec<CMat>, bound: f64) -> Self {
        Self { normal, bound, equality: false }
    }

    pub(crate) fn eq(normal: Vec<CMat>, bound: f64) -> Self {
        Self { normal, bound, equality: true }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ProjectionProblem {
    pub halfspaces: Vec<Halfspace>,
    /// Relative violation accepted as feasible.
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum ProjectionOutcome {
    Feasible(Vec<CMat>),
    Infeasible,
}

fn block_inner(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::inner(x, y)).sum()
}

fn axpy(alpha: f64, x: &[CMat], y: &mut [CMat]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi.scale(alpha);
    }
}

impl ProjectionProblem {
    fn violation(&self, x: &[CMat]) -> f64 {
        let mut v: f64 = 0.0;
        for hs in &self.halfspaces {
            let slack = block_inner(&hs.normal, x) - hs.bound;
            let excess = if hs.equality { slack.abs() } else { slack.max(0.0) };
            v = v.max(excess / (1.0 + hs.bound.abs()));
        }
        v
    }

    /// Gram matrix of the constraint normals.
    fn gram(&self) -> DMatrix<f64> {
        let k = self.halfspaces.len();
        DMatrix::from_fn(k, k, |a, b| block_inner(&self.halfspaces[a].normal, &self.halfspaces[b].normal))
    }

    /// Euclidean projection onto the polyhedron.
    ///
    /// This is a small QP in the constraint multipliers, solved by
    /// coordinate descent (Hildreth's method) on the Gram matrix.
    fn project_polyhedron(&self, z: &[CMat], gram: &DMatrix<f64>) -> Vec<CMat> {
        let mut x = z.to_vec();
        let k = self.halfspaces.len();
        if k == 0 {
            return x;
        }
        let r: Vec<f64> = self.halfspaces.iter().map(|hs| block_inner(&hs.normal, &x) - hs.bound).collect();
        let mut u = vec![0.0; k];
        let mut gu = vec![0.0; k];
        let scale = 1.0 + r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..10_000 {
            let mut moved: f64 = 0.0;
            for a in 0..k {
                let gaa = gram[(a, a)];
                if gaa <= 1e-300 {
                    continue;
                }
                let raw = u[a] + (r[a] - gu[a]) / gaa;
                let next = if self.halfspaces[a].equality { raw } else { raw.max(0.0) };
                let step = next - u[a];
                if step != 0.0 {
                    for b in 0..k {
                        gu[b] += step * gram[(b, a)];
                    }
                    u[a] = next;
                    moved = moved.max(step.abs() * gaa);
                }
            }
            if moved <= 1e-15 * scale {
                break;
            }
        }
        for (a, hs) in self.halfspaces.iter().enumerate() {
            if u[a] != 0.0 {
                axpy(-u[a], &hs.normal, &mut x);
            }
        }
        x
    }

    /// Run Dykstra from `start`. Infeasibility is declared when the
    /// violation stops improving; hitting `max_iters` is an error.
    pub(crate) fn solve(&self, start: &[CMat]) -> Result<ProjectionOutcome> {
        let gram = self.gram();
        let mut x: Vec<CMat> = start.iter().map(linalg::psd_clip).collect();
        if self.violation(&x) <= self.tol {
            return Ok(ProjectionOutcome::Feasible(x));
        }
        let zero: Vec<CMat> = x.iter().map(|b| linalg::zeros(b.nrows(), b.ncols())).collect();
        let mut p = zero.clone();
        let mut q = zero;
        let window = 200;
        let mut reference = f64::INFINITY;
        for iter in 1..=self.max_iters {
            let xp: Vec<CMat> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
            let y = self.project_polyhedron(&xp, &gram);
            p = xp.iter().zip(&y).map(|(a, b)| a - b).collect();
            let yq: Vec<CMat> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
            x = yq.iter().map(linalg::psd_clip).collect();
            q = yq.iter().zip(&x).map(|(a, b)| a - b).collect();

            let v = self.violation(&x);
            if v <= self.tol {
                return Ok(ProjectionOutcome::Feasible(x));
            }
            if iter % window == 0 {
                if reference - v < 1e-4 * v {
                    return Ok(ProjectionOutcome::Infeasible);
                }
                reference = v;
            }
        }
        Err(Error::ProjectionNonConvergence { iterations: self.max_iters })
    }
}
