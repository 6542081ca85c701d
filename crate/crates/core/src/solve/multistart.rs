//! Multistart probes for uniqueness of positive solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{minimize, SolverParams, Status};
use crate::energy::FunctionalSpec;
use crate::error::Result;
use crate::mesh::{c1_distance, random_positive, DiscreteFunction};
use crate::operator::OperatorSpec;
use crate::problem::ProblemSpec;
use crate::scalar::{c, Scalar};

/// Distance below which two solutions belong to the same cluster.
pub const CLUSTER_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct UniquenessReport<T> {
    pub starts: usize,
    /// One representative per cluster, in order of discovery.
    pub clusters: Vec<DiscreteFunction<T>>,
    pub cluster_sizes: Vec<usize>,
    /// Starts that did not end at a positive solution.
    pub failed: usize,
    /// Whether the reaction belongs to the class where uniqueness is expected.
    pub class_guaranteed: bool,
}

impl<T> UniquenessReport<T> {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }
}

/// Minimizes `spec` from `n_starts` seeded random positive starts and clusters the results.
pub fn multistart_functional<T: Scalar>(
    spec: &FunctionalSpec<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    n_starts: usize,
    params: &SolverParams<T>,
) -> Result<UniquenessReport<T>> {
    let mesh = params.mesh(prob)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let inits: Vec<DiscreteFunction<T>> = (0..n_starts)
        .map(|_| {
            let scale = c::<T>(10f64.powf(rng.gen_range(-1.0..1.0)));
            random_positive(&mesh, &mut rng).scaled(scale)
        })
        .collect();
    let outcomes: Vec<_> = inits.par_iter().map(|u0| minimize(spec, op, prob, u0, params)).collect::<Result<_>>()?;
    let mut clusters: Vec<DiscreteFunction<T>> = Vec::new();
    let mut sizes = Vec::new();
    let mut failed = 0;
    for out in outcomes {
        let (Status::Solution, Some(u)) = (out.status, out.u) else {
            failed += 1;
            continue;
        };
        let mut hit = None;
        for (k, rep) in clusters.iter().enumerate() {
            if c1_distance(rep, &u)? < c(CLUSTER_THRESHOLD) {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) => sizes[k] += 1,
            None => {
                clusters.push(u);
                sizes.push(1);
            }
        }
    }
    Ok(UniquenessReport {
        starts: n_starts,
        clusters,
        cluster_sizes: sizes,
        failed,
        class_guaranteed: prob.flags().unique_h1pp,
    })
}

/// Multistart minimization of the energy at `lambda`.
pub fn multistart_uniqueness<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    n_starts: usize,
    params: &SolverParams<T>,
) -> Result<UniquenessReport<T>> {
    let spec = FunctionalSpec::phi_lambda(lambda, params.eta(prob));
    multistart_functional(&spec, op, prob, n_starts, params)
}
