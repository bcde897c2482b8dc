use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::shells::{enumerate_shells_with, enumerate_vectors, EnumerationOptions, ShellSeries};
use super::Lattice;
use crate::error::{Error, Result};

/// An orthogonal matrix `U`, stored row-major, reproducible from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Haar-distributed orthogonal matrix from seeded standard-normal draws.
pub fn random_rotation(n: usize, seed: u64) -> Result<RotationMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "rotation dimension must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n * n)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let gaussian = DMatrix::from_row_slice(n, n, &draws);
    let qr = gaussian.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let entries = (0..n)
        .map(|i| (0..n).map(|j| q[(i, j)]).collect())
        .collect();
    Ok(RotationMatrix {
        dim: n,
        entries,
        seed,
    })
}

impl RotationMatrix {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
            .collect()
    }

    /// `max |U^T U - I|` over all entries.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n)
                    .map(|k| self.entries[k][i] * self.entries[k][j])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// `U L`: a floating-point basis that is never enumerated directly.
///
/// Shell counts come from the exact parent and point sets are the parent's
/// vectors mapped through `U`.
#[derive(Clone, Debug)]
pub struct RotatedLattice {
    parent: Lattice,
    rotation: RotationMatrix,
}

impl RotatedLattice {
    pub fn new(parent: Lattice, rotation: RotationMatrix) -> Result<RotatedLattice> {
        if parent.dim() != rotation.dim {
            return Err(Error::InvalidParameter(format!(
                "rotation of dimension {} applied to lattice of dimension {}",
                rotation.dim,
                parent.dim()
            )));
        }
        if parent.basis().is_none() {
            return Err(Error::InvalidParameter(
                "rotation needs a lattice with an explicit basis".into(),
            ));
        }
        Ok(RotatedLattice { parent, rotation })
    }

    pub fn parent(&self) -> &Lattice {
        &self.parent
    }

    pub fn rotation(&self) -> &RotationMatrix {
        &self.rotation
    }

    pub fn is_exact(&self) -> bool {
        false
    }

    pub fn label(&self) -> String {
        format!("U{}[seed={}]", self.parent.label(), self.rotation.seed)
    }

    /// Rows `U b_i` for each parent basis row `b_i`.
    pub fn basis(&self) -> Vec<Vec<f64>> {
        self.parent
            .basis_f64()
            .expect("checked at construction")
            .iter()
            .map(|row| self.rotation.apply(row))
            .collect()
    }

    pub fn gram(&self) -> Vec<Vec<f64>> {
        let b = self.basis();
        b.iter()
            .map(|x| {
                b.iter()
                    .map(|y| x.iter().zip(y).map(|(p, q)| p * q).sum())
                    .collect()
            })
            .collect()
    }

    pub fn shells(&self, max_norm: u64, options: EnumerationOptions) -> Result<ShellSeries> {
        let parent = enumerate_shells_with(&self.parent, max_norm, options)?;
        ShellSeries::new(parent.dim(), self.label(), parent.counts().to_vec())
    }

    /// Rotated ambient points with the exact squared norm of their preimage.
    pub fn vectors(&self, max_norm: u64, budget: u64) -> Result<Vec<(Vec<f64>, u64)>> {
        enumerate_vectors(&self.parent, max_norm, budget)?
            .into_iter()
            .map(|(coeffs, norm)| {
                let x = self
                    .parent
                    .ambient_f64(&coeffs)
                    .expect("checked at construction");
                Ok((self.rotation.apply(&x), norm))
            })
            .collect()
    }
}
