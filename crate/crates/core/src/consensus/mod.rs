//! Best-constant consensus weights, distributed averaging and dynamic
//! average tracking.
//!
//! The weight matrix is `W = I - αL` with `α = 2 / (λ_max + λ_2)` taken from the
//! Laplacian spectrum. Every round reads only a node's own value and the values
//! of its graph neighbors.

mod eigen;

pub use eigen::{eigenvalues_symmetric, EigenResult, DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{self, Scalar};
use crate::topology::{is_connected, laplacian, Graph};

/// Eigenvalues at or below this fraction of `λ_max` count as zero.
const ZERO_EIGEN_RATIO: f64 = 1e-9;

/// Doubly stochastic consensus weights for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<S> {
    w: Matrix<S>,
    alpha_bc: S,
    rho: S,
    self_weight: Vec<S>,
    neighbor_weights: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> WeightMatrix<S> {
    pub fn n(&self) -> usize {
        self.w.dim()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.w
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.w[(i, j)]
    }

    /// The constant `α` in `W = I - αL`.
    pub fn alpha_bc(&self) -> S {
        self.alpha_bc
    }

    /// Worst-case contraction of the disagreement `v - mean(v)·1` per round,
    /// in the Euclidean norm.
    pub fn rho(&self) -> S {
        self.rho
    }

    pub fn neighbor_weights(&self, i: usize) -> &[(usize, S)] {
        &self.neighbor_weights[i]
    }
}

/// Builds best-constant weights for a connected graph.
pub fn best_constant_weights<S: Scalar>(g: &Graph) -> Result<WeightMatrix<S>> {
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let l = laplacian::<S>(g);

    let (alpha_bc, rho) = if n == 1 {
        (S::zero(), S::zero())
    } else {
        let spectrum = eigenvalues_symmetric(
            &l,
            S::tolerance_floor(DEFAULT_TOLERANCE),
            DEFAULT_MAX_SWEEPS,
        )?;
        let lambda_max = *spectrum.values.last().expect("n >= 2");
        let threshold = S::tolerance_floor(ZERO_EIGEN_RATIO) * lambda_max;
        let nonzero: Vec<S> = spectrum
            .values
            .iter()
            .copied()
            .filter(|&v| v > threshold)
            .collect();
        if nonzero.len() != n - 1 {
            return Err(Error::Disconnected);
        }
        let lambda_2 = nonzero[0];
        let alpha = S::lit(2.0) / (lambda_max + lambda_2);
        let rho = nonzero
            .iter()
            .fold(S::zero(), |acc, &v| acc.max((S::one() - alpha * v).abs()));
        (alpha, rho)
    };

    let mut w = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] = w[(i, j)] - alpha_bc * l[(i, j)];
        }
    }
    let self_weight = (0..n).map(|i| w[(i, i)]).collect();
    let neighbor_weights = (0..n)
        .map(|i| g.neighbors(i).iter().map(|&j| (j, w[(i, j)])).collect())
        .collect();

    Ok(WeightMatrix {
        w,
        alpha_bc,
        rho,
        self_weight,
        neighbor_weights,
    })
}

fn check_len<S: Scalar>(wm: &WeightMatrix<S>, v: &[S], what: &str) -> Result<()> {
    if v.len() != wm.n() {
        return Err(Error::Argument(format!(
            "{what} has length {}, weight matrix is {}x{}",
            v.len(),
            wm.n(),
            wm.n()
        )));
    }
    Ok(())
}

/// One synchronous averaging round: every node mixes its own value with its
/// neighbors' values.
pub fn consensus_round<S: Scalar>(wm: &WeightMatrix<S>, values: &[S]) -> Result<Vec<S>> {
    check_len(wm, values, "values")?;
    Ok((0..wm.n())
        .map(|i| {
            wm.neighbor_weights[i]
                .iter()
                .fold(wm.self_weight[i] * values[i], |acc, &(j, w)| {
                    acc + w * values[j]
                })
        })
        .collect())
}

/// Dynamic tracking round: `W·estimates + deltas`.
pub fn tracking_round<S: Scalar>(
    wm: &WeightMatrix<S>,
    estimates: &[S],
    deltas: &[S],
) -> Result<Vec<S>> {
    check_len(wm, deltas, "deltas")?;
    let mixed = consensus_round(wm, estimates)?;
    Ok(mixed.into_iter().zip(deltas).map(|(m, &d)| m + d).collect())
}

/// Outcome of [`run_averaging`].
#[derive(Debug, Clone, PartialEq)]
pub struct Averaging<S> {
    pub estimates: Vec<S>,
    pub rounds: usize,
}

/// Default round budget for averaging over `n` nodes.
pub fn default_max_rounds(n: usize) -> usize {
    500.max(10 * n * n)
}

/// Repeats [`consensus_round`] until every entry is within
/// `tol·(1 + |mean|)` of the mean of `x0`.
pub fn run_averaging<S: Scalar>(
    wm: &WeightMatrix<S>,
    x0: &[S],
    tol: S,
    max_rounds: usize,
) -> Result<Averaging<S>> {
    check_len(wm, x0, "initial values")?;
    if !(tol > S::zero()) {
        return Err(Error::Argument(
            "averaging tolerance must be positive".into(),
        ));
    }
    let target = scalar::mean(x0);
    let band = tol * (S::one() + target.abs());
    let disagreement = |v: &[S]| {
        v.iter()
            .fold(S::zero(), |acc, &x| acc.max((x - target).abs()))
    };

    let mut v = x0.to_vec();
    let mut rounds = 0;
    loop {
        let gap = disagreement(&v);
        if gap <= band {
            return Ok(Averaging {
                estimates: v,
                rounds,
            });
        }
        if rounds == max_rounds {
            return Err(Error::Averaging {
                rounds,
                disagreement: gap.widen(),
            });
        }
        v = consensus_round(wm, &v)?;
        rounds += 1;
    }
}
